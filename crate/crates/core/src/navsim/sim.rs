//! Deterministic simulator dynamics and random-walk batch collection.

use rand::Rng;

use super::geometry::Segment;
use super::world::WorldSpec;
use crate::error::{Error, Result};
use crate::rng;

const TAU: f64 = std::f64::consts::TAU;

/// Continuous agent state: planar position in `[0,1]²` plus heading.
///
/// The heading is always stored reduced modulo 2π into `[0, 2π)`. Position
/// validity (free space) is maintained by the simulator, not by the type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }
}

/// Reduce an angle into `[0, 2π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// The three discrete actions. `index()` gives the id used in transitions,
/// feature blocks and files: 0 forward, 1 rotate-left, 2 rotate-right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Forward,
    RotateLeft,
    RotateRight,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Forward, Action::RotateLeft, Action::RotateRight];

    pub fn index(self) -> usize {
        match self {
            Action::Forward => 0,
            Action::RotateLeft => 1,
            Action::RotateRight => 2,
        }
    }

    pub fn from_index(id: usize) -> Result<Action> {
        Action::ALL
            .get(id)
            .copied()
            .ok_or_else(|| Error::Contract(format!("action id {id} out of range (3 actions)")))
    }
}

/// One experience tuple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub pose: Pose,
    /// Action id; see [`Action::index`].
    pub action: usize,
    pub reward: f64,
    pub next_pose: Pose,
    /// True iff `next_pose` is inside the goal circle.
    pub terminal: bool,
}

/// Ordered sequence of transitions with episode bookkeeping.
///
/// `episode_boundaries` holds the indices of transitions that started a new
/// episode after a goal reset (index 0 is not listed). Within an episode,
/// `next_pose` of transition `t` equals `pose` of transition `t + 1`; the
/// order must be preserved because slow feature analysis consumes temporal
/// differences.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub transitions: Vec<Transition>,
    pub episode_boundaries: Vec<usize>,
    pub seed: u64,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }
}

/// Apply one action. Fully deterministic.
///
/// Rotations change the heading by ±π/4 and never crash or terminate. A
/// forward action translates by `step_length` along the heading unless the
/// movement segment touches a wall, in which case the pose is returned
/// unchanged (bitwise) with the crash penalty. Entering the goal circle
/// yields the goal reward and terminates the episode.
pub fn step(world: &WorldSpec, pose: &Pose, action: Action) -> (Pose, f64, bool) {
    match action {
        Action::RotateLeft => {
            let next = Pose::new(pose.x, pose.y, pose.theta + world.rotation());
            (next, 0.0, false)
        }
        Action::RotateRight => {
            let next = Pose::new(pose.x, pose.y, pose.theta - world.rotation());
            (next, 0.0, false)
        }
        Action::Forward => {
            let nx = pose.x + world.step_length() * pose.theta.cos();
            let ny = pose.y + world.step_length() * pose.theta.sin();
            let movement = Segment::new(pose.x, pose.y, nx, ny);
            let crashed = world
                .walls()
                .iter()
                .any(|wall| super::geometry::segments_intersect(&movement, wall));
            if crashed {
                return (*pose, world.crash_penalty(), false);
            }
            let next = Pose {
                x: nx,
                y: ny,
                theta: pose.theta,
            };
            if world.in_goal(nx, ny) {
                (next, world.goal_reward(), true)
            } else {
                (next, 0.0, false)
            }
        }
    }
}

const MAX_START_ATTEMPTS: usize = 10_000;

/// Sample a start pose: position uniform over free space by rejection,
/// orientation uniform over `[0, 2π)`.
pub fn sample_start<R: Rng>(world: &WorldSpec, rng: &mut R) -> Result<Pose> {
    let b = world.bounds();
    for _ in 0..MAX_START_ATTEMPTS {
        let x = rng.random_range(b.min_x..b.max_x);
        let y = rng.random_range(b.min_y..b.max_y);
        let theta = rng.random_range(0.0..TAU);
        if world.is_free(x, y) {
            return Ok(Pose::new(x, y, theta));
        }
    }
    Err(Error::Geometry(format!(
        "no free start pose found in {} attempts; free space may be empty",
        MAX_START_ATTEMPTS
    )))
}

/// Collect a random-walk batch of exactly `n` transitions.
///
/// Starts from [`sample_start`], applies uniformly random actions, and on a
/// terminal transition resets via [`sample_start`], recording an episode
/// boundary. Crashes stop movement but do not end the episode. The walk is
/// driven by the stream derived from `(seed, "collect")`, so identical
/// `(world, n, seed)` yield bit-identical batches.
pub fn collect_random_walk(world: &WorldSpec, n: usize, seed: u64) -> Result<Batch> {
    if n == 0 {
        return Err(Error::Contract("batch size must be at least 1".into()));
    }
    let mut rng = rng::stream(seed, "collect");
    let mut transitions = Vec::with_capacity(n);
    let mut episode_boundaries = Vec::new();
    let mut pose = sample_start(world, &mut rng)?;
    for t in 0..n {
        let action = Action::ALL[rng.random_range(0..Action::ALL.len())];
        let (next_pose, reward, terminal) = step(world, &pose, action);
        transitions.push(Transition {
            pose,
            action: action.index(),
            reward,
            next_pose,
            terminal,
        });
        if terminal {
            pose = sample_start(world, &mut rng)?;
            if t + 1 < n {
                episode_boundaries.push(t + 1);
            }
        } else {
            pose = next_pose;
        }
    }
    Ok(Batch {
        transitions,
        episode_boundaries,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::navsim::world::{make_world, World};
    use approx::assert_relative_eq;
    use nalgebra::Point2;

    #[test]
    fn forward_translates_along_heading() {
        let w = make_world(World::U);
        let (next, r, terminal) = step(&w, &Pose::new(0.15, 0.85, 0.0), Action::Forward);
        assert_relative_eq!(next.x, 0.195, epsilon = 1e-12);
        assert_relative_eq!(next.y, 0.85, epsilon = 1e-12);
        assert_eq!(next.theta, 0.0);
        assert_eq!(r, 0.0);
        assert!(!terminal);
    }

    #[test]
    fn rotation_is_pure() {
        let w = make_world(World::U);
        let pose = Pose::new(0.5, 0.8, 0.0);
        let (left, r, terminal) = step(&w, &pose, Action::RotateLeft);
        assert_eq!((left.x, left.y), (pose.x, pose.y));
        assert_relative_eq!(left.theta, std::f64::consts::FRAC_PI_4, epsilon = 1e-15);
        assert_eq!(r, 0.0);
        assert!(!terminal);

        let (right, _, _) = step(&w, &pose, Action::RotateRight);
        assert_relative_eq!(
            right.theta,
            2.0 * std::f64::consts::PI - std::f64::consts::FRAC_PI_4,
            epsilon = 1e-12
        );
    }

    #[test]
    fn crash_leaves_pose_bitwise_unchanged() {
        let w = make_world(World::U);
        let pose = Pose::new(0.28, 0.3, 0.0); // facing the obstacle edge at x = 0.3
        let (next, r, terminal) = step(&w, &pose, Action::Forward);
        assert_eq!(next.x.to_bits(), pose.x.to_bits());
        assert_eq!(next.y.to_bits(), pose.y.to_bits());
        assert_eq!(next.theta.to_bits(), pose.theta.to_bits());
        assert_eq!(r, w.crash_penalty());
        assert!(!terminal);
    }

    #[test]
    fn goal_entry_terminates_with_reward() {
        let w = make_world(World::U);
        let pose = Pose::new(0.85, 0.27, 3.0 * std::f64::consts::FRAC_PI_2); // facing down
        let (next, r, terminal) = step(&w, &pose, Action::Forward);
        assert!(w.in_goal(next.x, next.y));
        assert_eq!(r, 1.0);
        assert!(terminal);
    }

    #[test]
    fn scripted_crossing_takes_20_to_25_moves() {
        for (world, start) in [
            (make_world(World::U), Pose::new(0.005, 0.8, 0.0)),
            (
                make_world(World::S),
                Pose::new(0.15, 0.005, std::f64::consts::FRAC_PI_2),
            ),
        ] {
            let mut pose = start;
            let mut moves = 0;
            loop {
                let (next, r, _) = step(&world, &pose, Action::Forward);
                if r == world.crash_penalty() {
                    break;
                }
                pose = next;
                moves += 1;
                assert!(moves < 100, "crossing never hit the far wall");
            }
            assert!(
                (20..=25).contains(&moves),
                "{} moves to cross {:?}",
                moves,
                world.name()
            );
        }
    }

    #[test]
    fn sampled_starts_lie_in_free_space() {
        let w = make_world(World::U);
        let mut rng = crate::rng::stream(3, "test/starts");
        for _ in 0..10_000 {
            let p = sample_start(&w, &mut rng).unwrap();
            assert!(w.is_free(p.x, p.y));
            assert!((0.0..TAU).contains(&p.theta));
        }
    }

    #[test]
    fn sampled_orientation_is_uniform() {
        let w = make_world(World::S);
        let mut rng = crate::rng::stream(11, "test/theta");
        let n = 100_000;
        let mean = (0..n)
            .map(|_| sample_start(&w, &mut rng).unwrap().theta)
            .sum::<f64>()
            / n as f64;
        assert!((mean - std::f64::consts::PI).abs() < 0.05, "mean {mean}");
    }

    #[test]
    fn degenerate_world_is_a_geometry_error() {
        let blocked = WorldSpec::from_parts(
            World::U,
            vec![super::super::geometry::Rect::new(-1.0, -1.0, 2.0, 2.0)],
            Point2::new(0.5, 0.5),
            0.1,
            -1.0,
        );
        let mut rng = crate::rng::stream(0, "test/degenerate");
        assert!(matches!(
            sample_start(&blocked, &mut rng),
            Err(Error::Geometry(_))
        ));
    }

    #[test]
    fn random_walk_is_reproducible_and_chained() {
        let w = make_world(World::U);
        let a = collect_random_walk(&w, 5_000, 7).unwrap();
        let b = collect_random_walk(&w, 5_000, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5_000);
        assert_eq!(a.seed, 7);

        let crashes = a
            .transitions
            .iter()
            .filter(|t| t.reward == w.crash_penalty())
            .count();
        assert!(crashes > 0);

        for t in 0..a.len() - 1 {
            if a.episode_boundaries.contains(&(t + 1)) {
                assert!(a.transitions[t].terminal);
            } else {
                assert_eq!(a.transitions[t].next_pose, a.transitions[t + 1].pose);
                assert!(!a.transitions[t].terminal);
            }
        }
    }

    #[test]
    fn different_seeds_differ() {
        let w = make_world(World::U);
        let a = collect_random_walk(&w, 1_000, 1).unwrap();
        let b = collect_random_walk(&w, 1_000, 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn zero_length_batch_is_rejected() {
        let w = make_world(World::U);
        assert!(matches!(
            collect_random_walk(&w, 0, 1),
            Err(Error::Contract(_))
        ));
    }
}
