//! Feature maps for linear Q-value approximation.
//!
//! A [`FeatureMap`] evaluates `p` state features per pose; the state-action
//! feature vector of dimension `m = p·|A|` is the Kronecker composition that
//! places the state features into the block of the taken action and zeros
//! everywhere else. Q-values are `q(x, a) = w · φ(x, a)`.

mod fourier;
mod tabular;
mod weights;

pub use fourier::FourierBasis;
pub use tabular::TabularFeatures;
pub use weights::{load_weights, save_weights, WeightsHeader};

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::navsim::Pose;

/// Deterministic, side-effect-free state-action feature evaluator.
pub trait FeatureMap: Send + Sync {
    /// State-feature dimension `p`.
    fn state_dim(&self) -> usize;

    /// Number of discrete actions `|A|`.
    fn num_actions(&self) -> usize;

    /// Identifier recorded in weight-file headers, e.g. `fourier-k6`.
    fn id(&self) -> String;

    /// Write the `p` state features of `pose` into `out`.
    fn state_features_into(&self, pose: &Pose, out: &mut [f64]) -> Result<()>;

    /// Total state-action dimension `m = p·|A|`.
    fn dim(&self) -> usize {
        self.state_dim() * self.num_actions()
    }

    fn state_features(&self, pose: &Pose) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.state_dim()];
        self.state_features_into(pose, &mut out)?;
        Ok(out)
    }

    /// Full state-action feature vector `φ(pose, action)`.
    fn features(&self, pose: &Pose, action: usize) -> Result<Vec<f64>> {
        let state = self.state_features(pose)?;
        compose_state_action(&state, action, self.num_actions())
    }

    /// All Q-values `q(pose, ·) = (w · φ(pose, a))_a` in one pass.
    ///
    /// Entry `a` equals the dot product of `w`'s block `a` with the state
    /// features, exploiting the block sparsity of the composition.
    fn q_all(&self, w: &QWeights, pose: &Pose) -> Result<Vec<f64>> {
        let p = self.state_dim();
        let n_actions = self.num_actions();
        if w.len() != p * n_actions {
            return Err(Error::Contract(format!(
                "weight dimension {} does not match feature dimension {}",
                w.len(),
                p * n_actions
            )));
        }
        let state = self.state_features(pose)?;
        Ok((0..n_actions)
            .map(|a| {
                w.block(a, p)
                    .iter()
                    .zip(&state)
                    .map(|(wi, si)| wi * si)
                    .sum()
            })
            .collect())
    }
}

/// Place `state_feats` into block `action` of a `|A|·p` vector, zeros
/// elsewhere (Kronecker-delta action composition).
pub fn compose_state_action(
    state_feats: &[f64],
    action: usize,
    num_actions: usize,
) -> Result<Vec<f64>> {
    if action >= num_actions {
        return Err(Error::Contract(format!(
            "action {action} out of range ({num_actions} actions)"
        )));
    }
    let p = state_feats.len();
    let mut out = vec![0.0; p * num_actions];
    out[action * p..(action + 1) * p].copy_from_slice(state_feats);
    Ok(out)
}

/// Weight vector of a linear Q-function, `q(x, a) = w · φ(x, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QWeights {
    values: DVector<f64>,
}

impl QWeights {
    pub fn zeros(m: usize) -> Self {
        QWeights {
            values: DVector::zeros(m),
        }
    }

    /// Build from raw values, rejecting non-finite entries.
    pub fn new(values: DVector<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("weight vector contains non-finite entries".into()));
        }
        Ok(QWeights { values })
    }

    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        Self::new(DVector::from_vec(values))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.len() == 0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice()
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.values
    }

    /// The `p` weights of action block `a`.
    pub fn block(&self, action: usize, p: usize) -> &[f64] {
        &self.as_slice()[action * p..(action + 1) * p]
    }
}
