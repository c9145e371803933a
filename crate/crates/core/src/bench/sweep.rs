//! The γ × β × seed sweep.

use rayon::prelude::*;

use super::config::{ExperimentConfig, OperatorKind, Representation};
use super::eval::evaluate_policy;
use crate::error::Result;
use crate::features::{FeatureMap, FourierBasis};
use crate::lspi::{lspi_train_assembled, LstdAssembler};
use crate::navsim::{collect_random_walk, make_world, World};
use crate::policy::{ImprovementConfig, ImprovementOperator};
use crate::rng;
use crate::sfa::fit_sfa_auto;

/// One sweep result: a (γ, operator, seed) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub world: World,
    pub representation: Representation,
    pub operator: OperatorKind,
    pub normalize: bool,
    pub gamma: f64,
    pub beta: Option<f64>,
    pub epsilon: Option<f64>,
    pub seed: u64,
    pub batch_size: usize,
    /// Successes / eval_starts; absent when the cell failed.
    pub success_fraction: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time_s: Option<f64>,
    pub error: Option<String>,
}

fn operator_kind(config: &ImprovementConfig) -> OperatorKind {
    match config.operator {
        ImprovementOperator::Greedy => OperatorKind::Greedy,
        ImprovementOperator::Softmax { .. } => OperatorKind::Softmax,
        ImprovementOperator::EpsilonGreedy { .. } => OperatorKind::Egreedy,
    }
}

/// Deterministic ordering: (γ, β, ε, operator, seed); greedy (no β) sorts
/// before the softmax series of the same γ.
fn sort_cells(cells: &mut [SweepCell]) {
    let key = |c: &SweepCell| {
        (
            c.gamma.to_bits(),
            c.beta.map(f64::to_bits),
            c.epsilon.map(f64::to_bits),
            c.operator.to_string(),
            c.seed,
        )
    };
    cells.sort_by(|a, b| key(a).cmp(&key(b)));
}

/// RNG tag of a cell's evaluation stream; value-based, so extending a grid
/// never perturbs existing cells.
fn eval_tag(config: &ExperimentConfig, gamma: f64, op: &ImprovementConfig) -> String {
    format!(
        "eval/world={}/rep={}/op={}/beta={}/eps={}/norm={}/gamma={}",
        config.world,
        config.representation,
        op.operator_name(),
        op.beta().map_or_else(|| "-".into(), |b| b.to_string()),
        op.epsilon().map_or_else(|| "-".into(), |e| e.to_string()),
        op.normalize,
        gamma
    )
}

/// Run the full sweep: per seed, collect a random-walk batch (and fit SFA if
/// configured), then train and greedily evaluate every (γ, operator) cell.
///
/// Cells are independent and run in parallel; determinism comes from derived
/// RNG streams and a final sort. Per-cell solver failures are recorded in
/// the cell rather than failing the sweep.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepCell>> {
    config.validate()?;
    let operators = config.operator_series()?;
    let world = make_world(config.world);

    let per_seed: Vec<Vec<SweepCell>> = config
        .seeds
        .par_iter()
        .map(|&seed| -> Result<Vec<SweepCell>> {
            let batch = collect_random_walk(&world, config.batch_size, seed)?;

            let map: Box<dyn FeatureMap> = match config.representation {
                Representation::Fourier => {
                    Box::new(FourierBasis::new(config.fourier.spatial_cosines))
                }
                Representation::Sfa => match fit_sfa_auto(&batch, &config.sfa) {
                    Ok(model) => Box::new(model),
                    Err(e) => {
                        return Ok(failed_seed_cells(config, &operators, seed, &e.to_string()))
                    }
                },
            };
            let assembler = match LstdAssembler::new(&batch, map.as_ref()) {
                Ok(assembler) => assembler,
                Err(e) => return Ok(failed_seed_cells(config, &operators, seed, &e.to_string())),
            };

            let cells: Vec<SweepCell> = config
                .gamma_grid
                .par_iter()
                .flat_map(|&gamma| {
                    operators.par_iter().map(move |op| (gamma, op))
                })
                .map(|(gamma, op)| {
                    run_cell(config, &world, map.as_ref(), &assembler, seed, gamma, op)
                })
                .collect();
            Ok(cells)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut cells: Vec<SweepCell> = per_seed.into_iter().flatten().collect();
    sort_cells(&mut cells);
    Ok(cells)
}

fn cell_shell(
    config: &ExperimentConfig,
    seed: u64,
    gamma: f64,
    op: &ImprovementConfig,
) -> SweepCell {
    SweepCell {
        world: config.world,
        representation: config.representation,
        operator: operator_kind(op),
        normalize: op.normalize,
        gamma,
        beta: op.beta(),
        epsilon: op.epsilon(),
        seed,
        batch_size: config.batch_size,
        success_fraction: None,
        iterations: 0,
        converged: false,
        wall_time_s: None,
        error: None,
    }
}

fn failed_seed_cells(
    config: &ExperimentConfig,
    operators: &[ImprovementConfig],
    seed: u64,
    error: &str,
) -> Vec<SweepCell> {
    config
        .gamma_grid
        .iter()
        .flat_map(|&gamma| {
            operators.iter().map(move |op| {
                let mut cell = cell_shell(config, seed, gamma, op);
                cell.error = Some(error.to_string());
                cell
            })
        })
        .collect()
}

fn run_cell(
    config: &ExperimentConfig,
    world: &crate::navsim::WorldSpec,
    map: &dyn FeatureMap,
    assembler: &LstdAssembler,
    seed: u64,
    gamma: f64,
    op: &ImprovementConfig,
) -> SweepCell {
    let mut cell = cell_shell(config, seed, gamma, op);
    let started = std::time::Instant::now();

    let outcome = lspi_train_assembled(assembler, gamma, op, &config.solver).and_then(|result| {
        let mut rng = rng::stream(seed, &eval_tag(config, gamma, op));
        let sf = evaluate_policy(
            world,
            map,
            &result.w,
            config.eval_starts,
            config.horizon,
            &mut rng,
        )?;
        Ok((result, sf))
    });

    match outcome {
        Ok((result, sf)) => {
            cell.success_fraction = Some(sf);
            cell.iterations = result.iterations;
            cell.converged = result.converged;
        }
        Err(e) => cell.error = Some(e.to_string()),
    }
    if config.record_wall_time {
        cell.wall_time_s = Some(started.elapsed().as_secs_f64());
    }
    cell
}

/// Mean and across-seed deviation of one (series, γ) group.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregatePoint {
    pub representation: Representation,
    pub operator: OperatorKind,
    pub normalize: bool,
    pub beta: Option<f64>,
    pub epsilon: Option<f64>,
    pub gamma: f64,
    /// Mean success fraction over the cells that produced one.
    pub mean: f64,
    /// Population standard deviation across those cells.
    pub std: f64,
    pub cells_ok: usize,
    pub cells_failed: usize,
}

/// Aggregate per-seed cells into per-(series, γ) means ± population std.
pub fn aggregate(cells: &[SweepCell]) -> Vec<AggregatePoint> {
    let mut sorted: Vec<&SweepCell> = cells.iter().collect();
    let group_key = |c: &SweepCell| {
        (
            c.representation.to_string(),
            c.operator.to_string(),
            c.normalize,
            c.beta.map(f64::to_bits),
            c.epsilon.map(f64::to_bits),
            c.gamma.to_bits(),
        )
    };
    sorted.sort_by(|a, b| group_key(a).cmp(&group_key(b)));

    let mut points = Vec::new();
    let mut group: Vec<&SweepCell> = Vec::new();
    for cell in sorted {
        if let Some(first) = group.first() {
            if group_key(first) != group_key(cell) {
                points.push(summarize(&group));
                group.clear();
            }
        }
        group.push(cell);
    }
    if !group.is_empty() {
        points.push(summarize(&group));
    }
    points
}

fn summarize(group: &[&SweepCell]) -> AggregatePoint {
    let first = group[0];
    let values: Vec<f64> = group.iter().filter_map(|c| c.success_fraction).collect();
    let n = values.len();
    let mean = if n > 0 {
        values.iter().sum::<f64>() / n as f64
    } else {
        f64::NAN
    };
    let std = if n > 0 {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64).sqrt()
    } else {
        f64::NAN
    };
    AggregatePoint {
        representation: first.representation,
        operator: first.operator,
        normalize: first.normalize,
        beta: first.beta,
        epsilon: first.epsilon,
        gamma: first.gamma,
        mean,
        std,
        cells_ok: n,
        cells_failed: group.len() - n,
    }
}
