//! One-hot features over an enumerated set of poses.
//!
//! Diagnostic feature map for finite-state checks: each enumerated pose gets
//! an indicator state feature, so LSTD over these features reproduces exact
//! tabular solutions. Used by the count-based and value-iteration oracles.

use super::FeatureMap;
use crate::error::{Error, Result};
use crate::navsim::Pose;

#[derive(Debug, Clone)]
pub struct TabularFeatures {
    states: Vec<Pose>,
    num_actions: usize,
}

impl TabularFeatures {
    pub fn new(states: Vec<Pose>, num_actions: usize) -> Self {
        assert!(!states.is_empty());
        assert!(num_actions >= 1);
        TabularFeatures {
            states,
            num_actions,
        }
    }

    /// Enumerate `n` synthetic state poses spread along the x axis.
    pub fn chain(n: usize, num_actions: usize) -> Self {
        let states = (0..n)
            .map(|i| Pose::new((i as f64 + 0.5) / n as f64, 0.5, 0.0))
            .collect();
        Self::new(states, num_actions)
    }

    pub fn states(&self) -> &[Pose] {
        &self.states
    }

    /// Index of the enumerated state matching `pose` exactly (within 1e-9).
    pub fn state_index(&self, pose: &Pose) -> Result<usize> {
        self.states
            .iter()
            .position(|s| {
                (s.x - pose.x).abs() < 1e-9
                    && (s.y - pose.y).abs() < 1e-9
                    && (s.theta - pose.theta).abs() < 1e-9
            })
            .ok_or_else(|| {
                Error::Contract(format!(
                    "pose ({}, {}, {}) is not an enumerated state",
                    pose.x, pose.y, pose.theta
                ))
            })
    }
}

impl FeatureMap for TabularFeatures {
    fn state_dim(&self) -> usize {
        self.states.len()
    }

    fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn id(&self) -> String {
        format!("tabular-{}x{}", self.states.len(), self.num_actions)
    }

    fn state_features_into(&self, pose: &Pose, out: &mut [f64]) -> Result<()> {
        let idx = self.state_index(pose)?;
        out.fill(0.0);
        out[idx] = 1.0;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_hot_lookup() {
        let map = TabularFeatures::chain(4, 2);
        let pose = map.states()[2];
        let feats = map.state_features(&pose).unwrap();
        assert_eq!(feats, vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(map.dim(), 8);
    }

    #[test]
    fn unknown_pose_is_rejected() {
        let map = TabularFeatures::chain(4, 2);
        assert!(map.state_features(&Pose::new(0.9, 0.9, 0.0)).is_err());
    }
}
