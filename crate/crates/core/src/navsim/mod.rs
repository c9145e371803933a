//! Deterministic continuous navigation simulator.
//!
//! Two benchmark worlds on the unit square — U-shaped and S-shaped corridors
//! around rectangular obstacles — with a point agent that moves forward by a
//! fixed step or rotates by 45°. Crashing into a wall stops movement;
//! reaching the goal circle ends the episode.

pub mod geometry;
mod io;
mod sim;
mod world;

pub use geometry::{segments_intersect, Rect, Segment};
pub use io::{load_batch, save_batch, BatchHeader};
pub use sim::{collect_random_walk, sample_start, step, wrap_angle, Action, Batch, Pose, Transition};
pub use world::{make_world, World, WorldSpec, NUM_ACTIONS};

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn arb_free_pose(world: &'static WorldSpec) -> impl Strategy<Value = Pose> {
        (0.0..1.0f64, 0.0..1.0f64, 0.0..std::f64::consts::TAU)
            .prop_filter_map("pose must be in free space", move |(x, y, theta)| {
                world.is_free(x, y).then(|| Pose::new(x, y, theta))
            })
    }

    fn u_world() -> &'static WorldSpec {
        use std::sync::OnceLock;
        static WORLD: OnceLock<WorldSpec> = OnceLock::new();
        WORLD.get_or_init(|| make_world(World::U))
    }

    proptest! {
        #[test]
        fn rotations_never_move(pose in arb_free_pose(u_world())) {
            for action in [Action::RotateLeft, Action::RotateRight] {
                let (next, r, terminal) = step(u_world(), &pose, action);
                prop_assert_eq!(next.x.to_bits(), pose.x.to_bits());
                prop_assert_eq!(next.y.to_bits(), pose.y.to_bits());
                prop_assert_eq!(r, 0.0);
                prop_assert!(!terminal);
            }
        }

        #[test]
        fn forward_never_rotates(pose in arb_free_pose(u_world())) {
            let (next, _, _) = step(u_world(), &pose, Action::Forward);
            prop_assert_eq!(next.theta.to_bits(), pose.theta.to_bits());
        }

        #[test]
        fn next_pose_stays_in_free_space(pose in arb_free_pose(u_world())) {
            for action in Action::ALL {
                let (next, _, _) = step(u_world(), &pose, action);
                prop_assert!(u_world().is_free(next.x, next.y));
            }
        }

        #[test]
        fn crash_is_bitwise_identity(pose in arb_free_pose(u_world())) {
            let (next, r, _) = step(u_world(), &pose, Action::Forward);
            if r < 0.0 {
                prop_assert_eq!(next.x.to_bits(), pose.x.to_bits());
                prop_assert_eq!(next.y.to_bits(), pose.y.to_bits());
                prop_assert_eq!(next.theta.to_bits(), pose.theta.to_bits());
            }
        }
    }
}
