//! Sparse-kernel slow feature analysis.
//!
//! Learns state features that vary slowly along the ordered random-walk
//! batch: Gaussian-kernel activations against a sparsified dictionary are
//! centered and whitened, and the directions minimizing the mean squared
//! temporal difference are extracted from a symmetric eigenproblem. The
//! resulting features have zero mean, unit variance and are mutually
//! uncorrelated on the training set, ordered by increasing slowness.

mod fit;
mod model;

pub use fit::{fit_sfa, fit_sfa_auto, select_dictionary};
pub use model::{load_model, save_model, SfaModel};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::navsim::Pose;

/// Kernel-space embedding of a pose: `(x, y, cos θ, sin θ)`.
///
/// The heading enters through its unit-circle coordinates so the kernel
/// respects the 2π periodicity.
pub fn embed_state(pose: &Pose) -> [f64; 4] {
    [pose.x, pose.y, pose.theta.cos(), pose.theta.sin()]
}

/// Gaussian kernel `exp(−‖u−v‖² / 2σ²)` on embedded states.
pub fn gaussian_kernel(u: &[f64; 4], v: &[f64; 4], width: f64) -> f64 {
    let mut d2 = 0.0;
    for i in 0..4 {
        let diff = u[i] - v[i];
        d2 += diff * diff;
    }
    (-d2 / (2.0 * width * width)).exp()
}

/// Hyperparameters of the SFA pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SfaParams {
    /// Dictionary size cap.
    #[serde(default = "defaults::max_dictionary")]
    pub max_dictionary: usize,
    /// Novelty threshold ν ∈ (0,1): a state joins the dictionary iff its
    /// maximum kernel value against the current dictionary is below ν.
    #[serde(default = "defaults::novelty")]
    pub novelty: f64,
    /// Gaussian kernel width σ in embedded units.
    #[serde(default = "defaults::kernel_width")]
    pub kernel_width: f64,
    /// Whitening ridge λ.
    #[serde(default = "defaults::ridge")]
    pub ridge: f64,
    /// Number of slow features p (the feature map adds a constant, giving
    /// p + 1 state features).
    #[serde(default = "defaults::features")]
    pub features: usize,
}

mod defaults {
    pub fn max_dictionary() -> usize {
        800
    }
    pub fn novelty() -> f64 {
        0.2
    }
    pub fn kernel_width() -> f64 {
        0.2
    }
    pub fn ridge() -> f64 {
        1e-5
    }
    pub fn features() -> usize {
        63
    }
}

impl Default for SfaParams {
    fn default() -> Self {
        SfaParams {
            max_dictionary: defaults::max_dictionary(),
            novelty: defaults::novelty(),
            kernel_width: defaults::kernel_width(),
            ridge: defaults::ridge(),
            features: defaults::features(),
        }
    }
}

impl SfaParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_dictionary == 0 {
            return Err(Error::Config("max_dictionary must be ≥ 1".into()));
        }
        if !(self.novelty > 0.0 && self.novelty < 1.0) {
            return Err(Error::Config(format!(
                "novelty must lie in (0, 1), got {}",
                self.novelty
            )));
        }
        if !(self.kernel_width.is_finite() && self.kernel_width > 0.0) {
            return Err(Error::Config(format!(
                "kernel_width must be > 0, got {}",
                self.kernel_width
            )));
        }
        if !(self.ridge.is_finite() && self.ridge >= 0.0) {
            return Err(Error::Config(format!(
                "ridge must be finite and ≥ 0, got {}",
                self.ridge
            )));
        }
        if self.features == 0 {
            return Err(Error::Config("features must be ≥ 1".into()));
        }
        Ok(())
    }
}
