//! Greedy policy evaluation by rollout.

use rand::Rng;

use crate::error::Result;
use crate::features::{FeatureMap, QWeights};
use crate::navsim::{sample_start, step, Action, Pose, WorldSpec};
use crate::policy::greedy_index;

/// Fraction of rollouts that reach the goal within `horizon` actions without
/// ever crashing, over `eval_starts` random start poses.
///
/// The policy acts greedily on the learned Q-values (ties broken by lowest
/// action index) regardless of how the weights were trained, so runs stay
/// comparable. A crash fails the trajectory immediately.
pub fn evaluate_policy<R: Rng>(
    world: &WorldSpec,
    map: &dyn FeatureMap,
    w: &QWeights,
    eval_starts: usize,
    horizon: usize,
    rng: &mut R,
) -> Result<f64> {
    rollout_fraction(world, eval_starts, horizon, rng, |pose| {
        let q = map.q_all(w, pose)?;
        Action::from_index(greedy_index(&q))
    })
}

/// Like [`evaluate_policy`] but for an arbitrary controller. Useful for
/// validating the success counting against scripted policies.
pub fn evaluate_controller<R: Rng>(
    world: &WorldSpec,
    mut controller: impl FnMut(&Pose) -> Action,
    eval_starts: usize,
    horizon: usize,
    rng: &mut R,
) -> Result<f64> {
    rollout_fraction(world, eval_starts, horizon, rng, |pose| Ok(controller(pose)))
}

fn rollout_fraction<R: Rng>(
    world: &WorldSpec,
    eval_starts: usize,
    horizon: usize,
    rng: &mut R,
    mut act: impl FnMut(&Pose) -> Result<Action>,
) -> Result<f64> {
    let mut successes = 0usize;
    for _ in 0..eval_starts {
        let mut pose = sample_start(world, rng)?;
        for _ in 0..horizon {
            let action = act(&pose)?;
            let (next, reward, terminal) = step(world, &pose, action);
            if reward < 0.0 {
                break; // crash fails the trajectory
            }
            if terminal {
                successes += 1;
                break;
            }
            pose = next;
        }
    }
    Ok(successes as f64 / eval_starts as f64)
}
