//! Dictionary sparsification and the SFA eigenproblem.

use nalgebra::{DMatrix, DVector};

use super::model::SfaModel;
use super::{embed_state, gaussian_kernel, SfaParams};
use crate::error::{Error, Result};
use crate::navsim::Batch;

/// Greedy novelty selection: a single pass over the embedded batch states
/// adds a state iff its maximum kernel value against the current dictionary
/// is below `novelty`, stopping at `max_size`. Returns at least one element.
pub fn select_dictionary(
    batch: &Batch,
    novelty: f64,
    max_size: usize,
    kernel_width: f64,
) -> Result<Vec<[f64; 4]>> {
    if batch.is_empty() {
        return Err(Error::Contract("batch must be non-empty".into()));
    }
    if !(novelty > 0.0 && novelty < 1.0) {
        return Err(Error::Config(format!(
            "novelty must lie in (0, 1), got {novelty}"
        )));
    }
    if max_size == 0 {
        return Err(Error::Config("max_size must be ≥ 1".into()));
    }
    if !(kernel_width.is_finite() && kernel_width > 0.0) {
        return Err(Error::Config(format!(
            "kernel_width must be > 0, got {kernel_width}"
        )));
    }

    let mut dictionary: Vec<[f64; 4]> = Vec::new();
    for t in &batch.transitions {
        if dictionary.len() >= max_size {
            break;
        }
        let u = embed_state(&t.pose);
        let max_k = dictionary
            .iter()
            .map(|v| gaussian_kernel(&u, v, kernel_width))
            .fold(f64::NEG_INFINITY, f64::max);
        if dictionary.is_empty() || max_k < novelty {
            dictionary.push(u);
        }
    }
    Ok(dictionary)
}

/// Fit an SFA model on the ordered batch.
///
/// Pipeline: kernel activations against the dictionary are centered; the
/// regularized covariance `Cov + λI` is eigendecomposed and directions whose
/// covariance eigenvalue falls below 1e-10 of the largest are discarded; the
/// data is whitened (residual variance from the λ offset is standardized
/// away so the constraints hold exactly); the temporal-difference covariance
/// over within-episode pairs is eigendecomposed and the `p` smallest
/// eigenvectors become the feature directions, their eigenvalues the
/// slowness.
pub fn fit_sfa(
    batch: &Batch,
    dictionary: Vec<[f64; 4]>,
    kernel_width: f64,
    ridge: f64,
    p: usize,
) -> Result<SfaModel> {
    fit_with_selection(batch, dictionary, kernel_width, ridge, p, None)
}

/// Select a dictionary with `params` and fit, recording the parameters in
/// the model.
pub fn fit_sfa_auto(batch: &Batch, params: &SfaParams) -> Result<SfaModel> {
    params.validate()?;
    let dictionary = select_dictionary(
        batch,
        params.novelty,
        params.max_dictionary,
        params.kernel_width,
    )?;
    fit_with_selection(
        batch,
        dictionary,
        params.kernel_width,
        params.ridge,
        params.features,
        Some(*params),
    )
}

fn fit_with_selection(
    batch: &Batch,
    dictionary: Vec<[f64; 4]>,
    kernel_width: f64,
    ridge: f64,
    p: usize,
    selection: Option<SfaParams>,
) -> Result<SfaModel> {
    if batch.is_empty() {
        return Err(Error::Contract("batch must be non-empty".into()));
    }
    if !(kernel_width.is_finite() && kernel_width > 0.0) {
        return Err(Error::Config(format!(
            "kernel_width must be > 0, got {kernel_width}"
        )));
    }
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::Config(format!(
            "ridge must be finite and ≥ 0, got {ridge}"
        )));
    }
    let d = dictionary.len();
    if p == 0 || p > d {
        return Err(Error::Contract(format!(
            "feature count p = {p} must lie in 1..={d} (dictionary size)"
        )));
    }

    let n = batch.len();
    // Kernel activations of the n batch start-states, one row per time step.
    let mut k_mat = DMatrix::zeros(n, d);
    for (t, tr) in batch.transitions.iter().enumerate() {
        let u = embed_state(&tr.pose);
        for (j, v) in dictionary.iter().enumerate() {
            k_mat[(t, j)] = gaussian_kernel(&u, v, kernel_width);
        }
    }

    // Center the activations.
    let col_means = k_mat.row_mean();
    for j in 0..d {
        let mean = col_means[j];
        for t in 0..n {
            k_mat[(t, j)] -= mean;
        }
    }

    // Eigendecomposition of the regularized covariance.
    let mut cov = k_mat.tr_mul(&k_mat) / n as f64;
    for i in 0..d {
        cov[(i, i)] += ridge;
    }
    let eig = nalgebra::SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    // Raw covariance eigenvalues (the +λ shift removed) drive the discard.
    let raw_max = eig.eigenvalues[order[0]] - ridge;
    if !(raw_max > 1e-12) {
        return Err(Error::Data(
            "kernel covariance is numerically singular (inputs may be constant); \
             if the inputs vary, raise the ridge λ"
                .into(),
        ));
    }
    let keep: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| eig.eigenvalues[i] - ridge >= 1e-10 * raw_max)
        .collect();
    let r = keep.len();
    if p > r {
        return Err(Error::Contract(format!(
            "feature count p = {p} exceeds the {r} usable whitening directions"
        )));
    }

    let raw_kept: Vec<f64> = keep.iter().map(|&i| eig.eigenvalues[i] - ridge).collect();
    let whitening_condition =
        (raw_kept[0] / raw_kept[r - 1]).sqrt();

    // Whitening transform from the regularized spectrum.
    let mut w_mat = DMatrix::zeros(d, r);
    for (col, &i) in keep.iter().enumerate() {
        let scale = 1.0 / eig.eigenvalues[i].sqrt();
        w_mat
            .column_mut(col)
            .copy_from(&(eig.eigenvectors.column(i) * scale));
    }
    let mut z = &k_mat * &w_mat; // n × r

    // The λ offset leaves each whitened coordinate with variance slightly
    // below one; standardize empirically so the unit-variance and
    // decorrelation constraints hold exactly.
    let mut z_scales = Vec::with_capacity(r);
    for mut col in z.column_iter_mut() {
        let mean = col.mean();
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        if !(var > 1e-24) {
            return Err(Error::Data(
                "whitened direction has zero variance; inputs may be constant".into(),
            ));
        }
        let scale = 1.0 / var.sqrt();
        col *= scale;
        z_scales.push(scale);
    }

    // Temporal differences over within-episode pairs: (t, t+1) is valid
    // unless t+1 starts a new episode.
    let mut is_boundary = vec![false; n];
    for &b in &batch.episode_boundaries {
        if b < n {
            is_boundary[b] = true;
        }
    }
    let pairs: Vec<usize> = (0..n - 1).filter(|&t| !is_boundary[t + 1]).collect();
    if pairs.is_empty() {
        return Err(Error::Data(
            "batch contains no within-episode transition pairs".into(),
        ));
    }
    let mut diffs = DMatrix::zeros(pairs.len(), r);
    for (row, &t) in pairs.iter().enumerate() {
        for j in 0..r {
            diffs[(row, j)] = z[(t + 1, j)] - z[(t, j)];
        }
    }
    let td_cov = diffs.tr_mul(&diffs) / pairs.len() as f64;

    let td_eig = nalgebra::SymmetricEigen::new(td_cov);
    let mut slow_order: Vec<usize> = (0..r).collect();
    slow_order.sort_by(|&i, &j| {
        td_eig.eigenvalues[i]
            .partial_cmp(&td_eig.eigenvalues[j])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    // Feature directions in whitened coordinates; composite coefficients on
    // kernel activations are alpha = V_pᵀ · diag(z_scales) · Wᵀ.
    let mut v_p = DMatrix::zeros(r, p);
    for (col, &i) in slow_order.iter().take(p).enumerate() {
        v_p.column_mut(col).copy_from(&td_eig.eigenvectors.column(i));
    }
    let mut scaled_w = w_mat;
    for (j, mut col) in scaled_w.column_iter_mut().enumerate() {
        col *= z_scales[j];
    }
    let mut alpha = v_p.transpose() * scaled_w.transpose(); // p × d
    let mut y = &z * &v_p; // n × p training features

    // Sign convention: non-negative correlation with the time index.
    let t_mid = (n as f64 - 1.0) / 2.0;
    for j in 0..p {
        let c: f64 = (0..n).map(|t| (t as f64 - t_mid) * y[(t, j)]).sum();
        if c < 0.0 {
            y.column_mut(j).neg_mut();
            alpha.row_mut(j).neg_mut();
        }
    }

    // Exact final standardization (the rotation preserves unit variance only
    // up to rounding).
    for j in 0..p {
        let mean = y.column(j).mean();
        let var = y
            .column(j)
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / n as f64;
        if !(var > 1e-24) {
            return Err(Error::Data(
                "slow feature has zero variance on the training set".into(),
            ));
        }
        let scale = 1.0 / var.sqrt();
        y.column_mut(j).scale_mut(scale);
        alpha.row_mut(j).scale_mut(scale);
    }

    // Slowness of the final features, recomputed from the training data.
    let mut slowness: Vec<f64> = (0..p)
        .map(|j| {
            pairs
                .iter()
                .map(|&t| {
                    let dy = y[(t + 1, j)] - y[(t, j)];
                    dy * dy
                })
                .sum::<f64>()
                / pairs.len() as f64
        })
        .collect();

    // Order features by final slowness.
    let mut feature_order: Vec<usize> = (0..p).collect();
    feature_order.sort_by(|&i, &j| slowness[i].partial_cmp(&slowness[j]).unwrap());
    let alpha_sorted = DMatrix::from_row_iterator(
        p,
        d,
        feature_order
            .iter()
            .flat_map(|&i| alpha.row(i).iter().cloned().collect::<Vec<_>>()),
    );
    slowness = feature_order.iter().map(|&i| slowness[i]).collect();

    // Offsets make each feature exactly zero-mean on the training set:
    // y(x) = alpha · k(x) − alpha · κ.
    let mean_offset = &alpha_sorted * &DVector::from_iterator(d, col_means.iter().cloned());

    Ok(SfaModel {
        dictionary,
        alpha: alpha_sorted,
        mean_offset,
        kernel_width,
        ridge,
        slowness,
        whitening_condition,
        selection,
    })
}
