//! Trigonometric Fourier basis over position and heading.

use std::f64::consts::PI;

use super::FeatureMap;
use crate::error::{Error, Result};
use crate::navsim::{Pose, NUM_ACTIONS};

/// Number of orientation factors: 1, cos θ, sin θ, cos 2θ, sin 2θ.
const ORIENTATION_FACTORS: usize = 5;

/// Outer-product Fourier basis: `k` cosines per spatial dimension (including
/// the constant, frequencies 0..k−1) times the five orientation factors.
///
/// Entry order is fixed (index-order v1): `(k1·k + k2)·5 + j` with `k1` the
/// x-frequency, `k2` the y-frequency and `j` the orientation factor, so
/// weight vectors are portable across runs. `k = 10` gives the full
/// 10·10·5 = 500-feature basis (1500 state-action features over 3 actions);
/// `k = 6` is the 180-feature desk-scale variant. All entries lie in
/// `[−1, 1]` and the `k1 = k2 = 0, j = 0` entry is the constant 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourierBasis {
    spatial_k: usize,
}

impl FourierBasis {
    pub fn new(spatial_k: usize) -> Self {
        assert!(spatial_k >= 1, "need at least the constant frequency");
        FourierBasis { spatial_k }
    }

    pub fn spatial_k(&self) -> usize {
        self.spatial_k
    }
}

impl FeatureMap for FourierBasis {
    fn state_dim(&self) -> usize {
        self.spatial_k * self.spatial_k * ORIENTATION_FACTORS
    }

    fn num_actions(&self) -> usize {
        NUM_ACTIONS
    }

    fn id(&self) -> String {
        format!("fourier-k{}", self.spatial_k)
    }

    fn state_features_into(&self, pose: &Pose, out: &mut [f64]) -> Result<()> {
        if !(0.0..=1.0).contains(&pose.x)
            || !(0.0..=1.0).contains(&pose.y)
            || !pose.theta.is_finite()
        {
            return Err(Error::Contract(format!(
                "pose ({}, {}, {}) outside the feature domain [0,1]² × [0,2π)",
                pose.x, pose.y, pose.theta
            )));
        }
        debug_assert_eq!(out.len(), self.state_dim());

        let k = self.spatial_k;
        let cx: Vec<f64> = (0..k).map(|f| (PI * f as f64 * pose.x).cos()).collect();
        let cy: Vec<f64> = (0..k).map(|f| (PI * f as f64 * pose.y).cos()).collect();
        let g = [
            1.0,
            pose.theta.cos(),
            pose.theta.sin(),
            (2.0 * pose.theta).cos(),
            (2.0 * pose.theta).sin(),
        ];

        let mut idx = 0;
        for &fx in &cx {
            for &fy in &cy {
                let fxy = fx * fy;
                for &fg in &g {
                    out[idx] = fxy * fg;
                    idx += 1;
                }
            }
        }
        Ok(())
    }
}
