//! Fitted SFA model: feature evaluation and JSON serialization.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{embed_state, gaussian_kernel, SfaParams};
use crate::error::{Error, Result};
use crate::features::FeatureMap;
use crate::navsim::{Pose, NUM_ACTIONS};

/// Fitted sparse-kernel SFA model.
///
/// Feature `j` of a pose is `alpha_j · k(pose) − mean_offset_j`, where `k`
/// holds the Gaussian-kernel activations of the embedded pose against the
/// dictionary. On its training set every feature has mean 0 and variance 1,
/// features are mutually uncorrelated, and `slowness` (the mean squared
/// temporal difference) is non-decreasing in the feature index. Signs are
/// fixed so each feature correlates non-negatively with the time index.
#[derive(Debug, Clone, PartialEq)]
pub struct SfaModel {
    pub(super) dictionary: Vec<[f64; 4]>,
    /// p × d coefficient matrix mapping kernel activations to features.
    pub(super) alpha: DMatrix<f64>,
    pub(super) mean_offset: DVector<f64>,
    pub(super) kernel_width: f64,
    pub(super) ridge: f64,
    /// Per-feature slowness, ascending.
    pub(super) slowness: Vec<f64>,
    /// Condition number of the whitening transform.
    pub(super) whitening_condition: f64,
    /// Selection parameters when fitted through [`super::fit_sfa_auto`].
    pub(super) selection: Option<SfaParams>,
}

impl SfaModel {
    /// Number of learned slow features p (excluding the constant).
    pub fn num_slow_features(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn dictionary(&self) -> &[[f64; 4]] {
        &self.dictionary
    }

    pub fn kernel_width(&self) -> f64 {
        self.kernel_width
    }

    pub fn slowness(&self) -> &[f64] {
        &self.slowness
    }

    pub fn whitening_condition(&self) -> f64 {
        self.whitening_condition
    }

    /// Kernel activations of a pose against the dictionary.
    pub fn kernel_activations(&self, pose: &Pose) -> DVector<f64> {
        let u = embed_state(pose);
        DVector::from_iterator(
            self.dictionary.len(),
            self.dictionary
                .iter()
                .map(|v| gaussian_kernel(&u, v, self.kernel_width)),
        )
    }

    /// The p slow features of a pose (without the constant entry).
    pub fn slow_features(&self, pose: &Pose) -> DVector<f64> {
        &self.alpha * self.kernel_activations(pose) - &self.mean_offset
    }
}

/// As a [`FeatureMap`], the model exposes p + 1 state features: entry 0 is
/// the constant 1 (so the span includes constants, like the Fourier basis),
/// entries 1..=p are the slow features.
impl FeatureMap for SfaModel {
    fn state_dim(&self) -> usize {
        self.num_slow_features() + 1
    }

    fn num_actions(&self) -> usize {
        NUM_ACTIONS
    }

    fn id(&self) -> String {
        format!("sfa-p{}", self.num_slow_features())
    }

    fn state_features_into(&self, pose: &Pose, out: &mut [f64]) -> Result<()> {
        out[0] = 1.0;
        let y = self.slow_features(pose);
        out[1..].copy_from_slice(y.as_slice());
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SfaModelFile {
    dictionary: Vec<[f64; 4]>,
    alpha: Vec<Vec<f64>>,
    mean_offset: Vec<f64>,
    kernel_width: f64,
    ridge: f64,
    slowness: Vec<f64>,
    whitening_condition: f64,
    selection: Option<SfaParams>,
}

pub fn save_model(model: &SfaModel, path: &Path) -> Result<()> {
    let as_io = |e: std::io::Error| Error::io(path.display().to_string(), e);
    let file = SfaModelFile {
        dictionary: model.dictionary.clone(),
        alpha: model
            .alpha
            .row_iter()
            .map(|r| r.iter().cloned().collect())
            .collect(),
        mean_offset: model.mean_offset.iter().cloned().collect(),
        kernel_width: model.kernel_width,
        ridge: model.ridge,
        slowness: model.slowness.clone(),
        whitening_condition: model.whitening_condition,
        selection: model.selection,
    };
    let out = BufWriter::new(File::create(path).map_err(as_io)?);
    serde_json::to_writer_pretty(out, &file)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> Result<SfaModel> {
    let as_io = |e: std::io::Error| Error::io(path.display().to_string(), e);
    let file: SfaModelFile =
        serde_json::from_reader(BufReader::new(File::open(path).map_err(as_io)?))
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    let d = file.dictionary.len();
    let p = file.alpha.len();
    if p == 0 || file.alpha.iter().any(|row| row.len() != d) {
        return Err(Error::Data(format!(
            "{}: alpha matrix shape does not match dictionary",
            path.display()
        )));
    }
    if file.mean_offset.len() != p || file.slowness.len() != p {
        return Err(Error::Data(format!(
            "{}: offset/slowness length does not match alpha rows",
            path.display()
        )));
    }
    Ok(SfaModel {
        dictionary: file.dictionary,
        alpha: DMatrix::from_row_iterator(p, d, file.alpha.into_iter().flatten()),
        mean_offset: DVector::from_vec(file.mean_offset),
        kernel_width: file.kernel_width,
        ridge: file.ridge,
        slowness: file.slowness,
        whitening_condition: file.whitening_condition,
        selection: file.selection,
    })
}
