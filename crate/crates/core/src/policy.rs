//! Policies and policy-improvement operators over per-state Q-value vectors.
//!
//! The greedy operator picks `argmax_a q(x, a)`; the non-deterministic
//! operators replace the indicator with a softmax (inverse stochasticity β)
//! or ε-greedy distribution. Optionally the Q-values are standardized per
//! state first so the softmax stochasticity is comparable in every state.

use crate::error::{Error, Result};
use crate::features::{FeatureMap, QWeights};
use crate::navsim::Transition;

/// Policy-improvement operator kind with its stochasticity parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ImprovementOperator {
    Greedy,
    /// Softmax (Boltzmann) policy with inverse stochasticity `beta ≥ 0`;
    /// β = 0 is uniform, β → ∞ approaches greedy.
    Softmax { beta: f64 },
    /// ε/|A| everywhere plus 1−ε on the greedy action.
    EpsilonGreedy { epsilon: f64 },
}

/// How the improvement step turns Q-values into an action distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImprovementConfig {
    pub operator: ImprovementOperator,
    /// Standardize Q-values per state (mean 0, population std 1) before
    /// applying the operator.
    pub normalize: bool,
}

impl ImprovementConfig {
    pub fn greedy() -> Self {
        ImprovementConfig {
            operator: ImprovementOperator::Greedy,
            normalize: false,
        }
    }

    pub fn softmax(beta: f64, normalize: bool) -> Self {
        ImprovementConfig {
            operator: ImprovementOperator::Softmax { beta },
            normalize,
        }
    }

    pub fn epsilon_greedy(epsilon: f64) -> Self {
        ImprovementConfig {
            operator: ImprovementOperator::EpsilonGreedy { epsilon },
            normalize: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.operator {
            ImprovementOperator::Greedy => Ok(()),
            ImprovementOperator::Softmax { beta } => {
                if beta.is_finite() && beta >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "softmax beta must be finite and ≥ 0, got {beta}"
                    )))
                }
            }
            ImprovementOperator::EpsilonGreedy { epsilon } => {
                if (0.0..=1.0).contains(&epsilon) {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "epsilon must lie in [0, 1], got {epsilon}"
                    )))
                }
            }
        }
    }

    /// Label used in CSV rows and chart legends.
    pub fn operator_name(&self) -> &'static str {
        match self.operator {
            ImprovementOperator::Greedy => "greedy",
            ImprovementOperator::Softmax { .. } => "softmax",
            ImprovementOperator::EpsilonGreedy { .. } => "egreedy",
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match self.operator {
            ImprovementOperator::Softmax { beta } => Some(beta),
            _ => None,
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self.operator {
            ImprovementOperator::EpsilonGreedy { epsilon } => Some(epsilon),
            _ => None,
        }
    }
}

/// Probability vector over the action set.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    probs: Vec<f64>,
}

impl ActionDistribution {
    fn new(probs: Vec<f64>) -> Self {
        debug_assert!(probs.iter().all(|p| *p >= 0.0));
        debug_assert!((probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        ActionDistribution { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

fn check_finite(q_values: &[f64]) -> Result<()> {
    if q_values.is_empty() {
        return Err(Error::Contract("empty Q-value vector".into()));
    }
    if q_values.iter().any(|q| !q.is_finite()) {
        return Err(Error::Contract(format!(
            "non-finite Q-values: {q_values:?}"
        )));
    }
    Ok(())
}

/// Index of the maximal entry, ties broken by lowest index.
pub fn greedy_index(q_values: &[f64]) -> usize {
    let mut best = 0;
    for (i, q) in q_values.iter().enumerate().skip(1) {
        if *q > q_values[best] {
            best = i;
        }
    }
    best
}

/// Softmax (Boltzmann) policy `π_β(a) ∝ exp(β q_a)`.
///
/// Evaluated with max-subtraction so large β or large Q-values cannot
/// overflow.
pub fn softmax_policy(q_values: &[f64], beta: f64) -> Result<ActionDistribution> {
    check_finite(q_values)?;
    if !beta.is_finite() || beta < 0.0 {
        return Err(Error::Contract(format!(
            "softmax beta must be finite and ≥ 0, got {beta}"
        )));
    }
    let max = q_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut probs: Vec<f64> = q_values.iter().map(|q| (beta * (q - max)).exp()).collect();
    let sum: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= sum;
    }
    Ok(ActionDistribution::new(probs))
}

/// ε-greedy policy: mass ε spread uniformly, 1−ε on the greedy action.
pub fn epsilon_greedy_policy(q_values: &[f64], epsilon: f64) -> Result<ActionDistribution> {
    check_finite(q_values)?;
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Contract(format!(
            "epsilon must lie in [0, 1], got {epsilon}"
        )));
    }
    let n = q_values.len();
    let mut probs = vec![epsilon / n as f64; n];
    probs[greedy_index(q_values)] += 1.0 - epsilon;
    Ok(ActionDistribution::new(probs))
}

fn greedy_policy(q_values: &[f64]) -> Result<ActionDistribution> {
    check_finite(q_values)?;
    let mut probs = vec![0.0; q_values.len()];
    probs[greedy_index(q_values)] = 1.0;
    Ok(ActionDistribution::new(probs))
}

/// Standardize Q-values across actions: subtract the mean, divide by the
/// population standard deviation. A degenerate state (σ below 1e-12) maps to
/// the all-zero vector.
pub fn normalize_q(q_values: &[f64]) -> Vec<f64> {
    let n = q_values.len() as f64;
    let mean = q_values.iter().sum::<f64>() / n;
    let var = q_values.iter().map(|q| (q - mean) * (q - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    if std < 1e-12 {
        return vec![0.0; q_values.len()];
    }
    q_values.iter().map(|q| (q - mean) / std).collect()
}

/// The improved policy for one state: normalization (if configured) followed
/// by the configured operator.
pub fn improvement_policy(
    q_values: &[f64],
    config: &ImprovementConfig,
) -> Result<ActionDistribution> {
    check_finite(q_values)?;
    config.validate()?;
    let normalized;
    let q = if config.normalize {
        normalized = normalize_q(q_values);
        normalized.as_slice()
    } else {
        q_values
    };
    match config.operator {
        ImprovementOperator::Greedy => greedy_policy(q),
        ImprovementOperator::Softmax { beta } => softmax_policy(q, beta),
        ImprovementOperator::EpsilonGreedy { epsilon } => epsilon_greedy_policy(q, epsilon),
    }
}

/// Apply the improvement operator: the expectation of `f_values` under the
/// policy induced by `q_values`. For the greedy operator this selects
/// `f(x, argmax_a q)`; the result always lies in `[min f, max f]`.
pub fn apply_operator(
    f_values: &[f64],
    q_values: &[f64],
    config: &ImprovementConfig,
) -> Result<f64> {
    if f_values.len() != q_values.len() {
        return Err(Error::Contract(format!(
            "operator dimension mismatch: {} f-values vs {} q-values",
            f_values.len(),
            q_values.len()
        )));
    }
    let policy = improvement_policy(q_values, config)?;
    Ok(policy
        .probs()
        .iter()
        .zip(f_values)
        .map(|(p, f)| p * f)
        .sum())
}

/// Soft TD-error `δ = r + γ·Γ[q|q](x') − q(x, a)`.
///
/// For terminal transitions the bootstrapped next-state term is dropped.
pub fn soft_td_error(
    transition: &Transition,
    map: &dyn FeatureMap,
    w: &QWeights,
    gamma: f64,
    config: &ImprovementConfig,
) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Contract(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    let q_here = map.q_all(w, &transition.pose)?;
    if transition.action >= q_here.len() {
        return Err(Error::Contract(format!(
            "action {} out of range ({} actions)",
            transition.action,
            q_here.len()
        )));
    }
    let bootstrap = if transition.terminal {
        0.0
    } else {
        let q_next = map.q_all(w, &transition.next_pose)?;
        gamma * apply_operator(&q_next, &q_next, config)?
    };
    Ok(transition.reward + bootstrap - q_here[transition.action])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn softmax_symmetry() {
        for beta in [0.0, 1.0, 17.0] {
            let d = softmax_policy(&[0.0, 0.0, 0.0], beta).unwrap();
            for p in d.probs() {
                assert_relative_eq!(*p, 1.0 / 3.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn softmax_hand_value() {
        let d = softmax_policy(&[2.0f64.ln(), 0.0, 0.0], 1.0).unwrap();
        assert_relative_eq!(d.probs()[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(d.probs()[1], 0.25, epsilon = 1e-12);
        assert_relative_eq!(d.probs()[2], 0.25, epsilon = 1e-12);
    }

    #[test]
    fn softmax_greedy_limit() {
        let d = softmax_policy(&[1.0, 0.0, 0.0], 1e6).unwrap();
        assert!((d.probs()[0] - 1.0).abs() < 1e-9);
        assert!(d.probs()[1] < 1e-9);
    }

    #[test]
    fn softmax_rejects_nan_and_bad_beta() {
        assert!(softmax_policy(&[f64::NAN, 0.0], 1.0).is_err());
        assert!(softmax_policy(&[0.0, 1.0], -1.0).is_err());
        assert!(softmax_policy(&[0.0, 1.0], f64::INFINITY).is_err());
    }

    #[test]
    fn epsilon_greedy_hand_value() {
        let d = epsilon_greedy_policy(&[1.0, 2.0, 3.0], 0.3).unwrap();
        assert_relative_eq!(d.probs()[0], 0.1, epsilon = 1e-15);
        assert_relative_eq!(d.probs()[1], 0.1, epsilon = 1e-15);
        assert_relative_eq!(d.probs()[2], 0.8, epsilon = 1e-15);
    }

    #[test]
    fn epsilon_one_is_uniform() {
        let d = epsilon_greedy_policy(&[9.0, -4.0, 2.5], 1.0).unwrap();
        for p in d.probs() {
            assert_relative_eq!(*p, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn epsilon_zero_breaks_ties_low() {
        let d = epsilon_greedy_policy(&[5.0, 5.0, 1.0], 0.0).unwrap();
        assert_eq!(d.probs(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn normalize_hand_value() {
        let q = normalize_q(&[1.0, 0.0, -1.0]);
        let expected = (3.0f64 / 2.0).sqrt();
        assert_relative_eq!(q[0], expected, epsilon = 1e-12);
        assert_relative_eq!(q[1], 0.0, epsilon = 1e-15);
        assert_relative_eq!(q[2], -expected, epsilon = 1e-12);
    }

    #[test]
    fn normalize_degenerate_is_zero() {
        assert_eq!(normalize_q(&[3.0, 3.0, 3.0]), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn normalize_preserves_argmax() {
        let q = [0.4, -2.0, 7.3, 1.1];
        assert_eq!(greedy_index(&normalize_q(&q)), greedy_index(&q));
    }

    #[test]
    fn improvement_greedy_is_indicator() {
        let d = improvement_policy(&[0.0, 1.0, 0.0], &ImprovementConfig::greedy()).unwrap();
        assert_eq!(d.probs(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn normalized_softmax_on_constant_is_uniform() {
        let cfg = ImprovementConfig::softmax(12.0, true);
        let d = improvement_policy(&[4.0, 4.0, 4.0], &cfg).unwrap();
        for p in d.probs() {
            assert_relative_eq!(*p, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn normalized_softmax_is_scale_invariant() {
        let cfg = ImprovementConfig::softmax(2.0, true);
        let a = improvement_policy(&[1.0, 0.0, -1.0], &cfg).unwrap();
        let b = improvement_policy(&[10.0, 0.0, -10.0], &cfg).unwrap();
        for (x, y) in a.probs().iter().zip(b.probs()) {
            assert_relative_eq!(*x, *y, epsilon = 1e-12);
        }
    }

    #[test]
    fn operator_uniform_mean() {
        let cfg = ImprovementConfig::softmax(0.0, false);
        let v = apply_operator(&[1.0, 2.0, 3.0], &[0.3, -1.0, 0.9], &cfg).unwrap();
        assert_relative_eq!(v, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn operator_greedy_selects() {
        let v = apply_operator(&[5.0, 7.0, 9.0], &[0.0, 1.0, 0.0], &ImprovementConfig::greedy())
            .unwrap();
        assert_eq!(v, 7.0);
    }

    #[test]
    fn operator_softmax_hand_value() {
        let cfg = ImprovementConfig::softmax(1.0, false);
        let v = apply_operator(&[4.0, 8.0, 12.0], &[2.0f64.ln(), 0.0, 0.0], &cfg).unwrap();
        assert_relative_eq!(v, 7.0, epsilon = 1e-12);
    }

    #[test]
    fn operator_rejects_mismatch() {
        let cfg = ImprovementConfig::greedy();
        assert!(apply_operator(&[1.0, 2.0], &[1.0, 2.0, 3.0], &cfg).is_err());
    }

    #[test]
    fn td_error_zero_weights_gives_reward() {
        use crate::features::{FeatureMap, TabularFeatures};
        let map = TabularFeatures::chain(2, 1);
        let w = QWeights::zeros(map.dim());
        let t = Transition {
            pose: map.states()[0],
            action: 0,
            reward: -1.0,
            next_pose: map.states()[1],
            terminal: false,
        };
        let delta =
            soft_td_error(&t, &map, &w, 0.9, &ImprovementConfig::greedy()).unwrap();
        assert_eq!(delta, -1.0);
    }

    #[test]
    fn td_error_gamma_zero() {
        use crate::features::TabularFeatures;
        let map = TabularFeatures::chain(2, 1);
        let w = QWeights::from_vec(vec![0.7, -0.2]).unwrap();
        let t = Transition {
            pose: map.states()[0],
            action: 0,
            reward: 2.0,
            next_pose: map.states()[1],
            terminal: false,
        };
        let delta =
            soft_td_error(&t, &map, &w, 0.0, &ImprovementConfig::greedy()).unwrap();
        assert_relative_eq!(delta, 2.0 - 0.7, epsilon = 1e-15);
    }

    proptest! {
        #[test]
        fn distributions_are_valid(
            q in proptest::collection::vec(-10.0..10.0f64, 2..6),
            beta in 0.0..50.0f64,
            epsilon in 0.0..1.0f64,
            normalize in proptest::bool::ANY,
        ) {
            for cfg in [
                ImprovementConfig { operator: ImprovementOperator::Greedy, normalize },
                ImprovementConfig { operator: ImprovementOperator::Softmax { beta }, normalize },
                ImprovementConfig { operator: ImprovementOperator::EpsilonGreedy { epsilon }, normalize },
            ] {
                let d = improvement_policy(&q, &cfg).unwrap();
                prop_assert!(d.probs().iter().all(|p| *p >= 0.0));
                prop_assert!((d.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn softmax_shift_invariance(
            q in proptest::collection::vec(-10.0..10.0f64, 3),
            beta in 0.0..20.0f64,
            shift in -100.0..100.0f64,
        ) {
            let shifted: Vec<f64> = q.iter().map(|v| v + shift).collect();
            let a = softmax_policy(&q, beta).unwrap();
            let b = softmax_policy(&shifted, beta).unwrap();
            for (x, y) in a.probs().iter().zip(b.probs()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }

        #[test]
        fn argmax_probability_grows_with_beta(
            q in proptest::collection::vec(-5.0..5.0f64, 3),
            beta1 in 0.0..10.0f64,
            extra in 0.01..10.0f64,
        ) {
            let best = greedy_index(&q);
            let gap = q.iter().enumerate().filter(|(i, _)| *i != best)
                .map(|(_, v)| q[best] - v).fold(f64::INFINITY, f64::min);
            prop_assume!(gap > 1e-6);
            let beta2 = beta1 + extra;
            let p1 = softmax_policy(&q, beta1).unwrap().probs()[best];
            let p2 = softmax_policy(&q, beta2).unwrap().probs()[best];
            prop_assert!(p2 >= p1 - 1e-12);
        }

        #[test]
        fn operator_is_a_convex_combination(
            f in proptest::collection::vec(-10.0..10.0f64, 3),
            q in proptest::collection::vec(-10.0..10.0f64, 3),
            beta in 0.0..30.0f64,
        ) {
            let cfg = ImprovementConfig::softmax(beta, false);
            let v = apply_operator(&f, &q, &cfg).unwrap();
            let lo = f.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }

        #[test]
        fn normalized_policy_is_affine_invariant(
            q in proptest::collection::vec(-5.0..5.0f64, 3),
            scale in 0.1..20.0f64,
            offset in -50.0..50.0f64,
            beta in 0.0..10.0f64,
        ) {
            let spread = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                - q.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assume!(spread > 1e-6);
            let cfg = ImprovementConfig::softmax(beta, true);
            let transformed: Vec<f64> = q.iter().map(|v| scale * v + offset).collect();
            let a = improvement_policy(&q, &cfg).unwrap();
            let b = improvement_policy(&transformed, &cfg).unwrap();
            for (x, y) in a.probs().iter().zip(b.probs()) {
                prop_assert!((x - y).abs() <= 1e-10);
            }
        }
    }
}
