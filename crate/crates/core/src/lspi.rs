//! Soft-LSTD system assembly and the LSPI outer loop.
//!
//! LSTD assembles `A = (1/n) Σ_t φ(x_t,a_t)(φ(x_t,a_t) − γ·Γ[φ|q](x_{t+1}))ᵀ`
//! and `b = (1/n) Σ_t φ(x_t,a_t)·r_t`, where `Γ` averages next-state features
//! under the improvement policy induced by the previous weight vector. LSPI
//! alternates solving `(A + ρI) w = b` with recomputing `Γ` from the new `w`
//! until the weights stabilize.

use std::collections::HashSet;
use std::fs::File;
use std::hash::{Hash, Hasher};
use std::io::{BufWriter, Write};
use std::ops::AddAssign;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMap, QWeights};
use crate::navsim::Batch;
use crate::policy::{improvement_policy, ImprovementConfig};

/// The assembled linear system. `a` is generally not symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct LstdSystem {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Sample count the sums were normalized by.
    pub n: usize,
}

/// Solver settings shared by all LSPI runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverParams {
    /// Ridge ρ added to the diagonal of `A` before factorization.
    pub ridge: f64,
    /// Convergence tolerance on the max-norm weight change.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        SolverParams {
            ridge: 1e-6,
            tol: 1e-6,
            max_iters: 50,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ridge.is_finite() && self.ridge >= 0.0) {
            return Err(Error::Config(format!(
                "ridge must be finite and ≥ 0, got {}",
                self.ridge
            )));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// Outcome of one LSPI run.
#[derive(Debug, Clone, PartialEq)]
pub struct LspiResult {
    pub w: QWeights,
    /// Number of LSTD solves performed (≥ 1).
    pub iterations: usize,
    /// True iff the last max-norm weight change was ≤ tol.
    pub converged: bool,
    /// Max-norm weight change per iteration.
    pub weight_deltas: Vec<f64>,
    /// Condition estimate of the factorized system per iteration.
    pub cond_estimates: Vec<f64>,
}

/// Precomputed per-batch quantities for repeated LSTD assembly.
///
/// Transitions are partitioned by taken action (batch order preserved within
/// each partition) with their state features evaluated once. The Gram blocks
/// `Σ φφᵀ` and the reward projection `Σ φ r` do not depend on the evaluated
/// policy, so each iteration rebuilds only the `Γ`-weighted cross products.
/// All reductions run in a fixed order, so assembly is deterministic.
pub struct LstdAssembler {
    p: usize,
    num_actions: usize,
    n: usize,
    /// Per action: state features of the partition's transitions, one column
    /// per transition.
    phi: Vec<DMatrix<f64>>,
    phi_next: Vec<DMatrix<f64>>,
    terminal: Vec<Vec<bool>>,
    gram: Vec<DMatrix<f64>>,
    b_sum: DVector<f64>,
}

impl LstdAssembler {
    pub fn new(batch: &Batch, map: &dyn FeatureMap) -> Result<Self> {
        if batch.is_empty() {
            return Err(Error::Contract("batch must be non-empty".into()));
        }
        let p = map.state_dim();
        let num_actions = map.num_actions();
        let n = batch.len();

        let mut counts = vec![0usize; num_actions];
        for t in &batch.transitions {
            if t.action >= num_actions {
                return Err(Error::Data(format!(
                    "transition action {} out of range ({} actions)",
                    t.action, num_actions
                )));
            }
            if !t.reward.is_finite() {
                return Err(Error::Data(format!("non-finite reward {}", t.reward)));
            }
            counts[t.action] += 1;
        }

        let mut phi: Vec<DMatrix<f64>> =
            counts.iter().map(|&c| DMatrix::zeros(p, c)).collect();
        let mut phi_next: Vec<DMatrix<f64>> =
            counts.iter().map(|&c| DMatrix::zeros(p, c)).collect();
        let mut rewards: Vec<Vec<f64>> = counts.iter().map(|&c| Vec::with_capacity(c)).collect();
        let mut terminal: Vec<Vec<bool>> =
            counts.iter().map(|&c| Vec::with_capacity(c)).collect();

        let mut scratch = vec![0.0; p];
        let mut fill = vec![0usize; num_actions];
        for t in &batch.transitions {
            let a = t.action;
            let j = fill[a];

            map.state_features_into(&t.pose, &mut scratch)?;
            check_features(&scratch)?;
            phi[a].column_mut(j).copy_from_slice(&scratch);

            map.state_features_into(&t.next_pose, &mut scratch)?;
            check_features(&scratch)?;
            phi_next[a].column_mut(j).copy_from_slice(&scratch);

            rewards[a].push(t.reward);
            terminal[a].push(t.terminal);
            fill[a] += 1;
        }

        let gram: Vec<DMatrix<f64>> = phi.iter().map(|f| f * f.transpose()).collect();
        let mut b_sum = DVector::zeros(p * num_actions);
        for a in 0..num_actions {
            if counts[a] == 0 {
                continue;
            }
            let r = DVector::from_vec(rewards[a].clone());
            b_sum.rows_mut(a * p, p).copy_from(&(&phi[a] * r));
        }

        Ok(LstdAssembler {
            p,
            num_actions,
            n,
            phi,
            phi_next,
            terminal,
            gram,
            b_sum,
        })
    }

    pub fn dim(&self) -> usize {
        self.p * self.num_actions
    }

    pub fn sample_count(&self) -> usize {
        self.n
    }

    /// Assemble the soft-LSTD system for the policy induced by `w_policy`.
    ///
    /// Terminal transitions contribute `φφᵀ` and `φr` only — the bootstrap
    /// term is dropped.
    pub fn assemble(
        &self,
        w_policy: &QWeights,
        gamma: f64,
        config: &ImprovementConfig,
    ) -> Result<LstdSystem> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::Contract(format!(
                "gamma must lie in [0, 1), got {gamma}"
            )));
        }
        config.validate()?;
        let (p, m) = (self.p, self.dim());
        if w_policy.len() != m {
            return Err(Error::Contract(format!(
                "weight dimension {} does not match system dimension {m}",
                w_policy.len()
            )));
        }

        // Weight blocks as columns: q(x', b) = (φ'ᵀ W)[t, b].
        let mut w_mat = DMatrix::zeros(p, self.num_actions);
        for b in 0..self.num_actions {
            w_mat.column_mut(b).copy_from_slice(w_policy.block(b, p));
        }

        let mut a_mat = DMatrix::zeros(m, m);
        for a in 0..self.num_actions {
            let n_a = self.phi[a].ncols();
            if n_a == 0 {
                continue;
            }
            a_mat
                .view_mut((a * p, a * p), (p, p))
                .add_assign(&self.gram[a]);

            if gamma == 0.0 {
                continue;
            }

            let q_next = self.phi_next[a].tr_mul(&w_mat); // n_a × |A|
            let mut pi = DMatrix::zeros(n_a, self.num_actions);
            let mut q_row = vec![0.0; self.num_actions];
            for t in 0..n_a {
                if self.terminal[a][t] {
                    continue; // no bootstrap
                }
                for b in 0..self.num_actions {
                    q_row[b] = q_next[(t, b)];
                }
                let dist = improvement_policy(&q_row, config)?;
                for b in 0..self.num_actions {
                    pi[(t, b)] = dist.probs()[b];
                }
            }

            for b in 0..self.num_actions {
                let weights = pi.column(b);
                if weights.iter().all(|w| *w == 0.0) {
                    continue;
                }
                let mut scaled = self.phi_next[a].clone();
                for (t, mut col) in scaled.column_iter_mut().enumerate() {
                    col *= weights[t];
                }
                let cross = &self.phi[a] * scaled.transpose();
                let mut block = a_mat.view_mut((a * p, b * p), (p, p));
                block.zip_apply(&cross, |entry, c| *entry -= gamma * c);
            }
        }

        let scale = 1.0 / self.n as f64;
        Ok(LstdSystem {
            a: a_mat * scale,
            b: &self.b_sum * scale,
            n: self.n,
        })
    }
}

fn check_features(feats: &[f64]) -> Result<()> {
    if feats.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite feature values".into()));
    }
    Ok(())
}

/// Assemble the soft-LSTD system for one batch and policy.
pub fn lstd_assemble(
    batch: &Batch,
    map: &dyn FeatureMap,
    w_policy: &QWeights,
    gamma: f64,
    config: &ImprovementConfig,
) -> Result<LstdSystem> {
    LstdAssembler::new(batch, map)?.assemble(w_policy, gamma, config)
}

/// Solve `(A + ρI) w = b` by LU factorization with partial pivoting.
pub fn lstd_solve(system: &LstdSystem, ridge: f64) -> Result<QWeights> {
    solve_with_cond(system, ridge).map(|(w, _)| w)
}

fn solve_with_cond(system: &LstdSystem, ridge: f64) -> Result<(QWeights, f64)> {
    if !(ridge.is_finite() && ridge >= 0.0) {
        return Err(Error::Config(format!(
            "ridge must be finite and ≥ 0, got {ridge}"
        )));
    }
    let mut a = system.a.clone();
    for i in 0..a.nrows().min(a.ncols()) {
        a[(i, i)] += ridge;
    }
    let lu = a.lu();
    let diag = lu.u().diagonal();
    let max = diag.iter().fold(0.0f64, |acc, d| acc.max(d.abs()));
    let min = diag.iter().fold(f64::INFINITY, |acc, d| acc.min(d.abs()));
    let cond_estimate = if min > 0.0 { max / min } else { f64::INFINITY };

    let solution = lu.solve(&system.b).ok_or_else(|| Error::Solver {
        msg: "LSTD system is singular even with ridge".into(),
        cond_estimate,
    })?;
    let w = QWeights::new(solution).map_err(|_| Error::Solver {
        msg: "LSTD solution contains non-finite entries".into(),
        cond_estimate,
    })?;
    Ok((w, cond_estimate))
}

/// Hash of a weight vector rounded to 12 significant decimal digits, used
/// for cycle detection.
fn weight_hash(w: &[f64]) -> u64 {
    let mut hasher = std::collections::hash_map::DefaultHasher::new();
    for v in w {
        // format! rounds to 12 digits after the point in scientific notation
        format!("{v:.12e}").hash(&mut hasher);
    }
    hasher.finish()
}

/// LSPI: iterate LSTD policy evaluation and policy improvement from `w = 0`.
///
/// Stops when the max-norm weight change drops to `tol`, after `max_iters`
/// solves, or when an iterate repeats (greedy LSPI can cycle); a detected
/// cycle returns the last iterate with `converged = false`.
pub fn lspi_train(
    batch: &Batch,
    map: &dyn FeatureMap,
    gamma: f64,
    config: &ImprovementConfig,
    params: &SolverParams,
) -> Result<LspiResult> {
    lspi_train_assembled(&LstdAssembler::new(batch, map)?, gamma, config, params)
}

/// [`lspi_train`] over a prebuilt assembler, for running many (γ, operator)
/// settings against one batch without recomputing features.
pub fn lspi_train_assembled(
    assembler: &LstdAssembler,
    gamma: f64,
    config: &ImprovementConfig,
    params: &SolverParams,
) -> Result<LspiResult> {
    params.validate()?;
    let mut w = QWeights::zeros(assembler.dim());
    let mut seen = HashSet::new();
    seen.insert(weight_hash(w.as_slice()));
    let mut weight_deltas = Vec::new();
    let mut cond_estimates = Vec::new();

    for iteration in 1..=params.max_iters {
        let system = assembler.assemble(&w, gamma, config)?;
        let (w_next, cond) = solve_with_cond(&system, params.ridge)?;
        let delta = w_next
            .as_slice()
            .iter()
            .zip(w.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        weight_deltas.push(delta);
        cond_estimates.push(cond);

        if delta <= params.tol {
            return Ok(LspiResult {
                w: w_next,
                iterations: iteration,
                converged: true,
                weight_deltas,
                cond_estimates,
            });
        }
        if !seen.insert(weight_hash(w_next.as_slice())) {
            return Ok(LspiResult {
                w: w_next,
                iterations: iteration,
                converged: false,
                weight_deltas,
                cond_estimates,
            });
        }
        w = w_next;
    }

    Ok(LspiResult {
        w,
        iterations: params.max_iters,
        converged: false,
        weight_deltas,
        cond_estimates,
    })
}

/// Write the per-iteration run log as CSV `(iteration, delta, cond_estimate)`.
pub fn save_run_log(result: &LspiResult, path: &Path) -> Result<()> {
    let as_io = |e: std::io::Error| Error::io(path.display().to_string(), e);
    let mut out = BufWriter::new(File::create(path).map_err(as_io)?);
    writeln!(out, "iteration,delta,cond_estimate").map_err(as_io)?;
    for (i, (delta, cond)) in result
        .weight_deltas
        .iter()
        .zip(&result.cond_estimates)
        .enumerate()
    {
        writeln!(out, "{},{},{}", i + 1, delta, cond).map_err(as_io)?;
    }
    out.flush().map_err(as_io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::TabularFeatures;
    use crate::navsim::{Pose, Transition};
    use approx::assert_relative_eq;

    /// Batch over enumerated tabular states from (state, action, reward,
    /// next_state) tuples.
    fn tabular_batch(map: &TabularFeatures, steps: &[(usize, usize, f64, usize)]) -> Batch {
        let transitions = steps
            .iter()
            .map(|&(s, a, r, s2)| Transition {
                pose: map.states()[s],
                action: a,
                reward: r,
                next_pose: map.states()[s2],
                terminal: false,
            })
            .collect();
        Batch {
            transitions,
            episode_boundaries: Vec::new(),
            seed: 0,
        }
    }

    #[test]
    fn zero_rewards_give_zero_b() {
        let map = TabularFeatures::chain(3, 2);
        let batch = tabular_batch(&map, &[(0, 0, 0.0, 1), (1, 1, 0.0, 2), (2, 0, 0.0, 0)]);
        let w = QWeights::zeros(map.dim());
        let sys = lstd_assemble(&batch, &map, &w, 0.9, &ImprovementConfig::greedy()).unwrap();
        assert!(sys.b.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn gamma_zero_gives_gram_matrix() {
        let map = TabularFeatures::chain(3, 2);
        let steps = [(0, 0, 1.0, 1), (1, 1, -1.0, 2), (1, 0, 0.5, 0), (2, 1, 2.0, 2)];
        let batch = tabular_batch(&map, &steps);
        let w = QWeights::zeros(map.dim());
        let sys = lstd_assemble(&batch, &map, &w, 0.0, &ImprovementConfig::greedy()).unwrap();

        let m = map.dim();
        let mut expected = DMatrix::zeros(m, m);
        for t in &batch.transitions {
            let phi = DVector::from_vec(map.features(&t.pose, t.action).unwrap());
            expected += &phi * phi.transpose();
        }
        expected /= batch.len() as f64;
        assert_relative_eq!(sys.a, expected, epsilon = 1e-14);
    }

    #[test]
    fn beta_zero_matches_uniform_policy_matrix() {
        let map = TabularFeatures::chain(3, 3);
        let steps = [
            (0, 0, 1.0, 1),
            (0, 1, 0.0, 2),
            (1, 2, -1.0, 2),
            (2, 1, 0.5, 0),
            (1, 0, 0.25, 1),
        ];
        let batch = tabular_batch(&map, &steps);
        let mut rng = crate::rng::stream(2, "test/beta0");
        use rand::Rng;
        let w = QWeights::from_vec((0..map.dim()).map(|_| rng.random_range(-1.0..1.0)).collect())
            .unwrap();
        let gamma = 0.8;
        let sys =
            lstd_assemble(&batch, &map, &w, gamma, &ImprovementConfig::softmax(0.0, false))
                .unwrap();

        // Uniform Γ: average next features over all actions.
        let m = map.dim();
        let mut expected = DMatrix::zeros(m, m);
        for t in &batch.transitions {
            let phi = DVector::from_vec(map.features(&t.pose, t.action).unwrap());
            let mut avg = DVector::zeros(m);
            for b in 0..3 {
                avg += DVector::from_vec(map.features(&t.next_pose, b).unwrap()) / 3.0;
            }
            expected += &phi * (&phi - gamma * avg).transpose();
        }
        expected /= batch.len() as f64;
        assert_relative_eq!(sys.a, expected, epsilon = 1e-12);
    }

    #[test]
    fn identity_system_solves_trivially() {
        let sys = LstdSystem {
            a: DMatrix::identity(3, 3),
            b: DVector::from_vec(vec![1.0, 0.0, 0.0]),
            n: 1,
        };
        let w = lstd_solve(&sys, 0.0).unwrap();
        assert_eq!(w.as_slice(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn two_state_chain_fixed_point() {
        // s0 → s1 with r = 0, s1 → s1 with r = 1, a single action.
        let map = TabularFeatures::chain(2, 1);
        let batch = tabular_batch(&map, &[(0, 0, 0.0, 1), (1, 0, 1.0, 1)]);
        let w0 = QWeights::zeros(map.dim());
        let cfg = ImprovementConfig::greedy();

        let sys = lstd_assemble(&batch, &map, &w0, 0.5, &cfg).unwrap();
        let w = lstd_solve(&sys, 0.0).unwrap();
        assert_relative_eq!(w.as_slice()[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(w.as_slice()[1], 2.0, epsilon = 1e-12);

        let sys0 = lstd_assemble(&batch, &map, &w0, 0.0, &cfg).unwrap();
        let w = lstd_solve(&sys0, 0.0).unwrap();
        assert_relative_eq!(w.as_slice()[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(w.as_slice()[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_system_reports_solver_error() {
        let sys = LstdSystem {
            a: DMatrix::zeros(2, 2),
            b: DVector::from_vec(vec![1.0, 1.0]),
            n: 1,
        };
        match lstd_solve(&sys, 0.0) {
            Err(Error::Solver { cond_estimate, .. }) => assert!(cond_estimate.is_infinite()),
            other => panic!("expected solver error, got {other:?}"),
        }
    }

    #[test]
    fn max_iters_one_does_one_solve() {
        let map = TabularFeatures::chain(2, 1);
        let batch = tabular_batch(&map, &[(0, 0, 0.0, 1), (1, 0, 1.0, 1)]);
        let params = SolverParams {
            max_iters: 1,
            ..Default::default()
        };
        let result =
            lspi_train(&batch, &map, 0.9, &ImprovementConfig::greedy(), &params).unwrap();
        assert_eq!(result.iterations, 1);
        assert_eq!(result.weight_deltas.len(), 1);
        assert!(!result.converged);
    }

    #[test]
    fn lspi_is_deterministic() {
        let map = TabularFeatures::chain(3, 2);
        let steps = [
            (0, 0, 0.0, 1),
            (0, 1, 0.1, 0),
            (1, 0, 0.0, 2),
            (1, 1, -0.5, 0),
            (2, 0, 1.0, 2),
            (2, 1, 0.0, 1),
        ];
        let batch = tabular_batch(&map, &steps);
        let cfg = ImprovementConfig::softmax(5.0, true);
        let params = SolverParams::default();
        let a = lspi_train(&batch, &map, 0.9, &cfg, &params).unwrap();
        let b = lspi_train(&batch, &map, 0.9, &cfg, &params).unwrap();
        assert_eq!(a.iterations, b.iterations);
        let bits =
            |r: &LspiResult| r.w.as_slice().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn converged_run_has_small_galerkin_residual() {
        let map = TabularFeatures::chain(3, 2);
        let steps = [
            (0, 0, 0.0, 1),
            (0, 1, 0.1, 0),
            (1, 0, 0.0, 2),
            (1, 1, -0.5, 0),
            (2, 0, 1.0, 2),
            (2, 1, 0.0, 1),
        ];
        let batch = tabular_batch(&map, &steps);
        let cfg = ImprovementConfig::softmax(3.0, false);
        let params = SolverParams {
            ridge: 0.0,
            tol: 1e-12,
            max_iters: 200,
        };
        let result = lspi_train(&batch, &map, 0.9, &cfg, &params).unwrap();
        assert!(result.converged);

        // Galerkin condition: features ⟂ TD-residuals at the fixed point.
        let mut residual = DVector::zeros(map.dim());
        for t in &batch.transitions {
            let delta =
                crate::policy::soft_td_error(t, &map, &result.w, 0.9, &cfg).unwrap();
            let phi = DVector::from_vec(map.features(&t.pose, t.action).unwrap());
            residual += phi * delta;
        }
        residual /= batch.len() as f64;
        assert!(residual.amax() < 1e-9, "residual {}", residual.amax());
    }

    #[test]
    fn weight_hash_rounds_at_12_digits() {
        let a = [1.0, 2.0];
        let b = [1.0 + 1e-15, 2.0];
        let c = [1.0 + 1e-9, 2.0];
        assert_eq!(weight_hash(&a), weight_hash(&b));
        assert_ne!(weight_hash(&a), weight_hash(&c));
    }

    #[test]
    fn terminal_transitions_drop_bootstrap() {
        let map = TabularFeatures::chain(2, 1);
        let mut batch = tabular_batch(&map, &[(0, 0, 1.0, 1)]);
        batch.transitions[0].terminal = true;
        let w = QWeights::from_vec(vec![5.0, 5.0]).unwrap();
        let sys = lstd_assemble(&batch, &map, &w, 0.9, &ImprovementConfig::greedy()).unwrap();
        // A = φφᵀ/n with no −γ·φφ'ᵀ term.
        assert_relative_eq!(sys.a[(0, 0)], 1.0, epsilon = 1e-15);
        assert_relative_eq!(sys.a[(0, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn pose_mismatch_is_contract_error() {
        let map = TabularFeatures::chain(2, 1);
        let batch = Batch {
            transitions: vec![Transition {
                pose: Pose::new(0.9, 0.9, 0.0),
                action: 0,
                reward: 0.0,
                next_pose: Pose::new(0.9, 0.9, 0.0),
                terminal: false,
            }],
            episode_boundaries: Vec::new(),
            seed: 0,
        };
        assert!(LstdAssembler::new(&batch, &map).is_err());
    }
}
