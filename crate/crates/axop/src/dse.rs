//! Design-space exploration: predefined-list evaluation, Pareto-front
//! extraction, 2-D hypervolume, constrained NSGA-II search, and validated
//! re-characterization of surrogate-predicted points.
//!
//! All objectives minimize. Constraints are upper bounds handled by
//! feasibility-dominance: a feasible point always beats an infeasible one,
//! and infeasible points rank by total violation. Every search is fully
//! deterministic for a fixed seed, independent of worker count: per-batch
//! fitness evaluation runs in parallel but results are joined in submission
//! order.

use crate::axmodel::AxoConfig;
use crate::behav::BehavMetrics;
use crate::ppa::PpaMetrics;
use rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;
use thiserror::Error;

/// Application-level behavioral metrics (filled by the task harness).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AppBehavMetrics {
    pub output_mse: f64,
    pub output_max_abs_err: f64,
    /// Peak signal-to-noise ratio in dB; infinite for exact outputs.
    /// Meaningful for image tasks only.
    pub psnr_db: f64,
}

/// Whether a point's metrics came from surrogates or real characterization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fidelity {
    Predicted,
    Characterized,
}

impl Fidelity {
    pub fn label(&self) -> &'static str {
        match self {
            Fidelity::Predicted => "predicted",
            Fidelity::Characterized => "characterized",
        }
    }
}

/// One evaluated design: config, metrics, and how they were obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignPoint {
    pub config: AxoConfig,
    pub behav: BehavMetrics,
    pub app_behav: Option<AppBehavMetrics>,
    pub ppa: PpaMetrics,
    pub fidelity: Fidelity,
}

/// Selector for one metric on a design point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKey {
    AvgAbsErr,
    AvgRelErr,
    MaxAbsErr,
    ErrProb,
    Mse,
    LutCount,
    CarryCount,
    CpdProxy,
    PowerProxy,
    PdpProxy,
    OutputMse,
    OutputMaxAbsErr,
}

impl MetricKey {
    pub fn label(&self) -> &'static str {
        match self {
            MetricKey::AvgAbsErr => "avg_abs_err",
            MetricKey::AvgRelErr => "avg_rel_err",
            MetricKey::MaxAbsErr => "max_abs_err",
            MetricKey::ErrProb => "err_prob",
            MetricKey::Mse => "mse",
            MetricKey::LutCount => "lut_count",
            MetricKey::CarryCount => "carry_count",
            MetricKey::CpdProxy => "cpd_proxy",
            MetricKey::PowerProxy => "power_proxy",
            MetricKey::PdpProxy => "pdp_proxy",
            MetricKey::OutputMse => "output_mse",
            MetricKey::OutputMaxAbsErr => "output_max_abs_err",
        }
    }

    pub fn parse(text: &str) -> Option<MetricKey> {
        Some(match text {
            "avg_abs_err" => MetricKey::AvgAbsErr,
            "avg_rel_err" => MetricKey::AvgRelErr,
            "max_abs_err" => MetricKey::MaxAbsErr,
            "err_prob" => MetricKey::ErrProb,
            "mse" => MetricKey::Mse,
            "lut_count" => MetricKey::LutCount,
            "carry_count" => MetricKey::CarryCount,
            "cpd_proxy" => MetricKey::CpdProxy,
            "power_proxy" => MetricKey::PowerProxy,
            "pdp_proxy" => MetricKey::PdpProxy,
            "output_mse" => MetricKey::OutputMse,
            "output_max_abs_err" => MetricKey::OutputMaxAbsErr,
            _ => return None,
        })
    }

    pub fn value(&self, point: &DesignPoint) -> f64 {
        match self {
            MetricKey::AvgAbsErr => point.behav.avg_abs_err,
            MetricKey::AvgRelErr => point.behav.avg_rel_err,
            MetricKey::MaxAbsErr => point.behav.max_abs_err,
            MetricKey::ErrProb => point.behav.err_prob,
            MetricKey::Mse => point.behav.mse,
            MetricKey::LutCount => point.ppa.lut_count as f64,
            MetricKey::CarryCount => point.ppa.carry_count as f64,
            MetricKey::CpdProxy => point.ppa.cpd_proxy,
            MetricKey::PowerProxy => point.ppa.power_proxy,
            MetricKey::PdpProxy => point.ppa.pdp_proxy,
            MetricKey::OutputMse => point.app_behav.map(|m| m.output_mse).unwrap_or(f64::NAN),
            MetricKey::OutputMaxAbsErr => point
                .app_behav
                .map(|m| m.output_max_abs_err)
                .unwrap_or(f64::NAN),
        }
    }
}

/// Minimize-all objectives plus upper-bound constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Objectives {
    pub minimize: Vec<MetricKey>,
    pub constraints: Vec<(MetricKey, f64)>,
}

impl Objectives {
    pub fn new(minimize: Vec<MetricKey>) -> Objectives {
        Objectives {
            minimize,
            constraints: Vec::new(),
        }
    }

    pub fn with_constraints(mut self, constraints: Vec<(MetricKey, f64)>) -> Objectives {
        self.constraints = constraints;
        self
    }

    pub fn values(&self, point: &DesignPoint) -> Vec<f64> {
        self.minimize.iter().map(|k| k.value(point)).collect()
    }

    /// Total constraint violation; zero means feasible.
    pub fn violation(&self, point: &DesignPoint) -> f64 {
        self.constraints
            .iter()
            .map(|(key, bound)| (key.value(point) - bound).max(0.0))
            .sum()
    }

    pub fn is_feasible(&self, point: &DesignPoint) -> bool {
        self.violation(point) == 0.0
    }
}

/// GA parameters. `mutation_prob_per_bit: None` defaults to `1/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaParams {
    pub population: usize,
    pub generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob_per_bit: Option<f64>,
    pub tournament_size: usize,
    pub seed: u64,
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population: 32,
            generations: 25,
            crossover_prob: 0.9,
            mutation_prob_per_bit: None,
            tournament_size: 2,
            seed: 1,
        }
    }
}

/// Mutually non-dominated feasible points, ordered by the first objective
/// ascending with ties broken by config string.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoArchive {
    pub objectives: Objectives,
    pub points: Vec<DesignPoint>,
}

/// One generation-log row of an evolutionary run.
#[derive(Debug, Clone)]
pub struct GenLogRow {
    pub generation: usize,
    pub config: AxoConfig,
    pub objective_values: Vec<f64>,
    pub feasible: bool,
    pub fidelity: Fidelity,
}

/// Errors from exploration operations.
#[derive(Debug, Error)]
pub enum DseError {
    #[error("no feasible points remain after constraint filtering")]
    AllInfeasible,
    #[error("hypervolume needs exactly 2 objectives, got {got}")]
    WrongDimension { got: usize },
    #[error("reference point {reference:?} is dominated by front point {point:?}")]
    RefDominated {
        reference: Vec<f64>,
        point: Vec<f64>,
    },
    #[error("GA population must be even and nonzero, got {got}")]
    BadPopulation { got: usize },
    #[error("probability {what} = {got} outside [0, 1]")]
    BadProbability { what: &'static str, got: f64 },
    #[error("objectives list is empty")]
    NoObjectives,
    #[error("fitness evaluation failed for {config}: {message}")]
    Fitness { config: String, message: String },
}

/// `a` dominates `b` under minimize-all semantics.
fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strictly = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly = true;
        }
    }
    strictly
}

/// Evaluates a predefined config list through a fitness function, preserving
/// order. Evaluation runs batch-parallel; results join in input order.
pub fn evaluate_list<F>(configs: &[AxoConfig], fitness: F) -> Result<Vec<DesignPoint>, DseError>
where
    F: Fn(&AxoConfig) -> Result<DesignPoint, String> + Sync,
{
    configs
        .par_iter()
        .map(|config| {
            fitness(config).map_err(|message| DseError::Fitness {
                config: config.to_string(),
                message,
            })
        })
        .collect()
}

/// Extracts the maximal set of feasible, mutually non-dominated points.
///
/// Infeasible points are excluded before domination; the result is stably
/// ordered by the first objective ascending, ties by config string.
pub fn pareto_front(points: &[DesignPoint], objectives: &Objectives) -> Result<ParetoArchive, DseError> {
    if objectives.minimize.is_empty() {
        return Err(DseError::NoObjectives);
    }
    let feasible: Vec<&DesignPoint> = points
        .iter()
        .filter(|p| objectives.is_feasible(p))
        .collect();
    if feasible.is_empty() {
        return Err(DseError::AllInfeasible);
    }
    let values: Vec<Vec<f64>> = feasible.iter().map(|p| objectives.values(p)).collect();
    let mut front: Vec<DesignPoint> = Vec::new();
    'candidates: for (i, point) in feasible.iter().enumerate() {
        for (j, _) in feasible.iter().enumerate() {
            if i != j && dominates(&values[j], &values[i]) {
                continue 'candidates;
            }
        }
        // Keep one representative per duplicate objective vector.
        if front
            .iter()
            .any(|kept| objectives.values(kept) == values[i] && kept.config == point.config)
        {
            continue;
        }
        front.push((*point).clone());
    }
    front.sort_by(|a, b| {
        let va = objectives.minimize[0].value(a);
        let vb = objectives.minimize[0].value(b);
        va.partial_cmp(&vb)
            .unwrap()
            .then_with(|| a.config.to_string().cmp(&b.config.to_string()))
    });
    front.dedup_by(|a, b| a.config == b.config);
    Ok(ParetoArchive {
        objectives: objectives.clone(),
        points: front,
    })
}

/// Exact 2-D hypervolume of a point set against a reference point, raw
/// coordinates. Dominated and duplicate points contribute nothing.
pub fn hypervolume_2d(points: &[Vec<f64>], reference: &[f64]) -> Result<f64, DseError> {
    if reference.len() != 2 {
        return Err(DseError::WrongDimension {
            got: reference.len(),
        });
    }
    for point in points {
        if point.len() != 2 {
            return Err(DseError::WrongDimension { got: point.len() });
        }
        if point[0] > reference[0] || point[1] > reference[1] {
            return Err(DseError::RefDominated {
                reference: reference.to_vec(),
                point: point.clone(),
            });
        }
    }
    if points.is_empty() {
        return Ok(0.0);
    }
    // Reduce to the non-dominated staircase.
    let mut sorted: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.partial_cmp(&b.1).unwrap()));
    let mut staircase: Vec<(f64, f64)> = Vec::new();
    for (x, y) in sorted {
        if staircase.last().map_or(true, |(_, last_y)| y < *last_y) {
            staircase.push((x, y));
        }
    }
    let mut area = 0.0;
    let mut prev_y = reference[1];
    for (x, y) in staircase {
        area += (reference[0] - x) * (prev_y - y);
        prev_y = y;
    }
    Ok(area)
}

/// Joint min-max normalization of several 2-D fronts onto `[0, 1]` with the
/// fixed reference `(1.1, 1.1)`, then the exact hypervolume of each.
///
/// Scaling ranges come from the union of all compared sets, so the returned
/// values are directly comparable. A degenerate axis (all values equal) maps
/// to zero.
pub fn hypervolumes_normalized(sets: &[Vec<Vec<f64>>]) -> Result<Vec<f64>, DseError> {
    let all: Vec<&Vec<f64>> = sets.iter().flatten().collect();
    if all.is_empty() {
        return Ok(vec![0.0; sets.len()]);
    }
    for point in &all {
        if point.len() != 2 {
            return Err(DseError::WrongDimension { got: point.len() });
        }
    }
    let mut mins = [f64::INFINITY; 2];
    let mut maxs = [f64::NEG_INFINITY; 2];
    for point in &all {
        for d in 0..2 {
            mins[d] = mins[d].min(point[d]);
            maxs[d] = maxs[d].max(point[d]);
        }
    }
    let scale = |value: f64, d: usize| {
        if maxs[d] > mins[d] {
            (value - mins[d]) / (maxs[d] - mins[d])
        } else {
            0.0
        }
    };
    let reference = vec![1.1, 1.1];
    sets.iter()
        .map(|set| {
            let scaled: Vec<Vec<f64>> = set
                .iter()
                .map(|p| vec![scale(p[0], 0), scale(p[1], 1)])
                .collect();
            hypervolume_2d(&scaled, &reference)
        })
        .collect()
}

/// Result of an evolutionary search.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Final population in rank order.
    pub population: Vec<DesignPoint>,
    /// Pareto front over every distinct evaluated config.
    pub archive_front: ParetoArchive,
    /// All distinct evaluated points keyed by config.
    pub evaluated: BTreeMap<AxoConfig, DesignPoint>,
    pub log: Vec<GenLogRow>,
}

/// NSGA-II over the pruning-config space.
///
/// Non-dominated sorting with crowding-distance selection, binary tournament,
/// uniform crossover, per-bit flip mutation, and feasibility-dominance for
/// constraints. The archive records every distinct evaluated config, so no
/// front point is ever fabricated. Deterministic for a fixed seed regardless
/// of worker count.
pub fn nsga2_search<F>(
    config_len: usize,
    objectives: &Objectives,
    params: &GaParams,
    fitness: F,
) -> Result<SearchOutcome, DseError>
where
    F: Fn(&AxoConfig) -> Result<DesignPoint, String> + Sync,
{
    if objectives.minimize.is_empty() {
        return Err(DseError::NoObjectives);
    }
    if params.population == 0 || params.population % 2 != 0 {
        return Err(DseError::BadPopulation {
            got: params.population,
        });
    }
    for (what, p) in [
        ("crossover_prob", params.crossover_prob),
        (
            "mutation_prob_per_bit",
            params.mutation_prob_per_bit.unwrap_or(0.0),
        ),
    ] {
        if !(0.0..=1.0).contains(&p) {
            return Err(DseError::BadProbability { what, got: p });
        }
    }
    let mutation_prob = params
        .mutation_prob_per_bit
        .unwrap_or(1.0 / config_len.max(1) as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut evaluated: BTreeMap<AxoConfig, DesignPoint> = BTreeMap::new();
    let mut log: Vec<GenLogRow> = Vec::new();

    let mut population: Vec<AxoConfig> = (0..params.population)
        .map(|_| AxoConfig::from_bits((0..config_len).map(|_| rng.next_u32() & 1 == 1).collect()))
        .collect();

    evaluate_batch(&population, &fitness, &mut evaluated)?;
    log_generation(0, &population, objectives, &evaluated, &mut log);

    for generation in 1..=params.generations {
        let ranked = rank_population(&population, objectives, &evaluated);
        let offspring = breed(
            &ranked,
            &population,
            params,
            mutation_prob,
            config_len,
            &mut rng,
        );
        evaluate_batch(&offspring, &fitness, &mut evaluated)?;

        // Elitist mu+lambda selection over the combined pool.
        let mut pool = population.clone();
        pool.extend(offspring.iter().cloned());
        let pool_ranked = rank_population(&pool, objectives, &evaluated);
        population = select_next(&pool, &pool_ranked, params.population);
        log_generation(generation, &population, objectives, &evaluated, &mut log);
    }

    let all_points: Vec<DesignPoint> = evaluated.values().cloned().collect();
    let archive_front = pareto_front(&all_points, objectives)?;
    let final_population = population
        .iter()
        .map(|c| evaluated[c].clone())
        .collect();
    Ok(SearchOutcome {
        population: final_population,
        archive_front,
        evaluated,
        log,
    })
}

/// Evaluates configs not seen before, in parallel, joining in batch order.
fn evaluate_batch<F>(
    batch: &[AxoConfig],
    fitness: &F,
    evaluated: &mut BTreeMap<AxoConfig, DesignPoint>,
) -> Result<(), DseError>
where
    F: Fn(&AxoConfig) -> Result<DesignPoint, String> + Sync,
{
    let mut fresh: Vec<AxoConfig> = Vec::new();
    for config in batch {
        if !evaluated.contains_key(config) && !fresh.contains(config) {
            fresh.push(config.clone());
        }
    }
    let results: Vec<Result<DesignPoint, DseError>> = fresh
        .par_iter()
        .map(|config| {
            fitness(config).map_err(|message| DseError::Fitness {
                config: config.to_string(),
                message,
            })
        })
        .collect();
    for (config, result) in fresh.into_iter().zip(results) {
        evaluated.insert(config, result?);
    }
    Ok(())
}

fn log_generation(
    generation: usize,
    population: &[AxoConfig],
    objectives: &Objectives,
    evaluated: &BTreeMap<AxoConfig, DesignPoint>,
    log: &mut Vec<GenLogRow>,
) {
    for config in population {
        let point = &evaluated[config];
        log.push(GenLogRow {
            generation,
            config: config.clone(),
            objective_values: objectives.values(point),
            feasible: objectives.is_feasible(point),
            fidelity: point.fidelity,
        });
    }
}

struct RankInfo {
    rank: usize,
    crowding: f64,
    violation: f64,
}

/// Constrained non-dominated sorting plus crowding distance.
fn rank_population(
    population: &[AxoConfig],
    objectives: &Objectives,
    evaluated: &BTreeMap<AxoConfig, DesignPoint>,
) -> Vec<RankInfo> {
    let n = population.len();
    let values: Vec<Vec<f64>> = population
        .iter()
        .map(|c| objectives.values(&evaluated[c]))
        .collect();
    let violations: Vec<f64> = population
        .iter()
        .map(|c| objectives.violation(&evaluated[c]))
        .collect();

    // Deb's constrained domination.
    let beats = |i: usize, j: usize| -> bool {
        match (violations[i] == 0.0, violations[j] == 0.0) {
            (true, false) => true,
            (false, true) => false,
            (false, false) => violations[i] < violations[j],
            (true, true) => dominates(&values[i], &values[j]),
        }
    };

    let mut dominated_by: Vec<usize> = vec![0; n];
    let mut dominates_list: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && beats(i, j) {
                dominates_list[i].push(j);
                dominated_by[j] += 1;
            }
        }
    }
    let mut rank = vec![usize::MAX; n];
    let mut current: Vec<usize> = (0..n).filter(|i| dominated_by[*i] == 0).collect();
    let mut level = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            rank[i] = level;
        }
        for &i in &current {
            for &j in &dominates_list[i] {
                dominated_by[j] -= 1;
                if dominated_by[j] == 0 {
                    next.push(j);
                }
            }
        }
        current = next;
        level += 1;
    }

    // Crowding distance within each front.
    let mut crowding = vec![0.0f64; n];
    let objective_count = objectives.minimize.len();
    for front_level in 0..level {
        let members: Vec<usize> = (0..n).filter(|i| rank[*i] == front_level).collect();
        if members.len() <= 2 {
            for &i in &members {
                crowding[i] = f64::INFINITY;
            }
            continue;
        }
        for m in 0..objective_count {
            let mut ordered = members.clone();
            ordered.sort_by(|a, b| {
                values[*a][m]
                    .partial_cmp(&values[*b][m])
                    .unwrap()
                    .then_with(|| population[*a].to_string().cmp(&population[*b].to_string()))
            });
            let span = values[*ordered.last().unwrap()][m] - values[ordered[0]][m];
            crowding[ordered[0]] = f64::INFINITY;
            crowding[*ordered.last().unwrap()] = f64::INFINITY;
            if span > 0.0 {
                for w in 1..ordered.len() - 1 {
                    let gap = values[ordered[w + 1]][m] - values[ordered[w - 1]][m];
                    crowding[ordered[w]] += gap / span;
                }
            }
        }
    }

    (0..n)
        .map(|i| RankInfo {
            rank: rank[i],
            crowding: crowding[i],
            violation: violations[i],
        })
        .collect()
}

/// Binary-tournament parent selection then uniform crossover and mutation.
fn breed(
    ranked: &[RankInfo],
    population: &[AxoConfig],
    params: &GaParams,
    mutation_prob: f64,
    config_len: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<AxoConfig> {
    let pick = |rng: &mut ChaCha8Rng| -> usize {
        let mut best = (rng.next_u64() % population.len() as u64) as usize;
        for _ in 1..params.tournament_size.max(1) {
            let other = (rng.next_u64() % population.len() as u64) as usize;
            let better = match ranked[other].rank.cmp(&ranked[best].rank) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => {
                    if ranked[other].violation != ranked[best].violation {
                        ranked[other].violation < ranked[best].violation
                    } else {
                        ranked[other].crowding > ranked[best].crowding
                    }
                }
            };
            if better {
                best = other;
            }
        }
        best
    };
    let unit = |rng: &mut ChaCha8Rng| -> f64 { (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 };

    let mut offspring = Vec::with_capacity(params.population);
    while offspring.len() < params.population {
        let mut first = population[pick(rng)].clone();
        let mut second = population[pick(rng)].clone();
        if unit(rng) < params.crossover_prob {
            for i in 0..config_len {
                if rng.next_u32() & 1 == 1 {
                    let tmp = first.bit(i);
                    first.set_bit(i, second.bit(i));
                    second.set_bit(i, tmp);
                }
            }
        }
        for child in [&mut first, &mut second] {
            for i in 0..config_len {
                if unit(rng) < mutation_prob {
                    let flipped = !child.bit(i);
                    child.set_bit(i, flipped);
                }
            }
        }
        offspring.push(first);
        if offspring.len() < params.population {
            offspring.push(second);
        }
    }
    offspring
}

/// Takes the best `count` individuals by (rank, crowding desc, config).
fn select_next(pool: &[AxoConfig], ranked: &[RankInfo], count: usize) -> Vec<AxoConfig> {
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|a, b| {
        ranked[*a]
            .rank
            .cmp(&ranked[*b].rank)
            .then_with(|| {
                ranked[*b]
                    .crowding
                    .partial_cmp(&ranked[*a].crowding)
                    .unwrap()
            })
            .then_with(|| pool[*a].to_string().cmp(&pool[*b].to_string()))
    });
    order.truncate(count);
    order.into_iter().map(|i| pool[i].clone()).collect()
}

/// Per-metric mean absolute drift between predicted and validated metrics.
#[derive(Debug, Clone, Default)]
pub struct DriftReport {
    pub pairs: usize,
    pub by_metric: BTreeMap<&'static str, f64>,
}

/// Re-characterizes predicted points with a high-fidelity path and reports
/// the prediction drift per metric.
///
/// Pairing with the predicted originals is positional, so the drift report
/// is exact over the supplied metric keys.
pub fn validate_points<F>(
    points: &[DesignPoint],
    characterize: F,
    drift_metrics: &[MetricKey],
) -> Result<(Vec<DesignPoint>, DriftReport), DseError>
where
    F: Fn(&AxoConfig) -> Result<DesignPoint, String> + Sync,
{
    let validated: Vec<DesignPoint> = points
        .par_iter()
        .map(|point| {
            characterize(&point.config).map_err(|message| DseError::Fitness {
                config: point.config.to_string(),
                message,
            })
        })
        .collect::<Result<_, _>>()?;
    let mut report = DriftReport {
        pairs: points.len(),
        by_metric: BTreeMap::new(),
    };
    for key in drift_metrics {
        let total: f64 = points
            .iter()
            .zip(&validated)
            .map(|(predicted, actual)| (key.value(predicted) - key.value(actual)).abs())
            .sum();
        report
            .by_metric
            .insert(key.label(), total / points.len().max(1) as f64);
    }
    Ok((validated, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ppa::PpaSource;

    fn point(config: &str, a: f64, b: f64) -> DesignPoint {
        DesignPoint {
            config: AxoConfig::parse(config).unwrap(),
            behav: BehavMetrics {
                avg_abs_err: a,
                ..Default::default()
            },
            app_behav: None,
            ppa: PpaMetrics {
                pdp_proxy: b,
                source: PpaSource::Proxy,
                ..Default::default()
            },
            fidelity: Fidelity::Characterized,
        }
    }

    fn ab_objectives() -> Objectives {
        Objectives::new(vec![MetricKey::AvgAbsErr, MetricKey::PdpProxy])
    }

    #[test]
    fn pareto_front_drops_dominated() {
        let points = vec![point("00", 1.0, 2.0), point("01", 2.0, 1.0), point("10", 2.0, 2.0)];
        let front = pareto_front(&points, &ab_objectives()).unwrap();
        let configs: Vec<String> = front.points.iter().map(|p| p.config.to_string()).collect();
        assert_eq!(configs, vec!["00", "01"]);
    }

    #[test]
    fn single_point_is_its_own_front() {
        let points = vec![point("0", 3.0, 4.0)];
        let front = pareto_front(&points, &ab_objectives()).unwrap();
        assert_eq!(front.points.len(), 1);
    }

    #[test]
    fn pareto_is_idempotent() {
        let points = vec![
            point("000", 1.0, 5.0),
            point("001", 2.0, 3.0),
            point("010", 3.0, 1.0),
            point("011", 4.0, 4.0),
        ];
        let objectives = ab_objectives();
        let once = pareto_front(&points, &objectives).unwrap();
        let twice = pareto_front(&once.points, &objectives).unwrap();
        assert_eq!(once.points, twice.points);
    }

    #[test]
    fn infeasible_points_are_filtered() {
        let objectives = ab_objectives().with_constraints(vec![(MetricKey::AvgAbsErr, 1.5)]);
        let points = vec![point("00", 1.0, 2.0), point("01", 2.0, 1.0)];
        let front = pareto_front(&points, &objectives).unwrap();
        assert_eq!(front.points.len(), 1);
        assert_eq!(front.points[0].config.to_string(), "00");

        let strict = ab_objectives().with_constraints(vec![(MetricKey::AvgAbsErr, 0.5)]);
        assert!(matches!(
            pareto_front(&points, &strict),
            Err(DseError::AllInfeasible)
        ));
    }

    #[test]
    fn hypervolume_unit_cases() {
        assert_eq!(
            hypervolume_2d(&[vec![0.0, 0.0]], &[1.0, 1.0]).unwrap(),
            1.0
        );
        assert_eq!(
            hypervolume_2d(&[vec![0.0, 0.5], vec![0.5, 0.0]], &[1.0, 1.0]).unwrap(),
            0.75
        );
    }

    #[test]
    fn dominated_point_does_not_change_hypervolume() {
        let base = hypervolume_2d(&[vec![0.0, 0.5], vec![0.5, 0.0]], &[1.0, 1.0]).unwrap();
        let with_dominated = hypervolume_2d(
            &[vec![0.0, 0.5], vec![0.5, 0.0], vec![0.6, 0.6]],
            &[1.0, 1.0],
        )
        .unwrap();
        assert_eq!(base, with_dominated);
    }

    #[test]
    fn hypervolume_rejects_dominating_points_and_bad_dims() {
        assert!(matches!(
            hypervolume_2d(&[vec![2.0, 0.0]], &[1.0, 1.0]),
            Err(DseError::RefDominated { .. })
        ));
        assert!(matches!(
            hypervolume_2d(&[vec![0.0, 0.0, 0.0]], &[1.0, 1.0]),
            Err(DseError::WrongDimension { got: 3 })
        ));
    }

    #[test]
    fn normalized_hypervolumes_share_scaling() {
        let a = vec![vec![0.0, 10.0], vec![5.0, 0.0]];
        let b = vec![vec![0.0, 10.0], vec![5.0, 0.0]];
        let hvs = hypervolumes_normalized(&[a, b]).unwrap();
        assert_eq!(hvs[0], hvs[1]);
        assert!(hvs[0] > 0.0);
    }

    #[test]
    fn strictly_increasing_transform_preserves_membership() {
        let points = vec![
            point("000", 1.0, 5.0),
            point("001", 2.0, 3.0),
            point("010", 3.0, 1.0),
            point("011", 4.0, 4.0),
        ];
        let objectives = ab_objectives();
        let before: Vec<String> = pareto_front(&points, &objectives)
            .unwrap()
            .points
            .iter()
            .map(|p| p.config.to_string())
            .collect();
        // exp() is strictly increasing; recode the first objective.
        let transformed: Vec<DesignPoint> = points
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q.behav.avg_abs_err = p.behav.avg_abs_err.exp();
                q
            })
            .collect();
        let after: Vec<String> = pareto_front(&transformed, &objectives)
            .unwrap()
            .points
            .iter()
            .map(|p| p.config.to_string())
            .collect();
        assert_eq!(before, after);
    }

    #[test]
    fn evaluate_list_preserves_order_and_handles_empty() {
        let configs = vec![
            AxoConfig::parse("10").unwrap(),
            AxoConfig::parse("01").unwrap(),
        ];
        let points = evaluate_list(&configs, |c| Ok(point(&c.to_string(), 0.0, 0.0))).unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].config.to_string(), "10");
        let empty = evaluate_list(&[], |c| Ok(point(&c.to_string(), 0.0, 0.0))).unwrap();
        assert!(empty.is_empty());
    }

    fn toy_fitness(config: &AxoConfig) -> Result<DesignPoint, String> {
        // Two antagonistic objectives: popcount and zero-count.
        let ones = config.popcount() as f64;
        let zeros = (config.len() - config.popcount()) as f64;
        Ok(point(&config.to_string(), ones, zeros))
    }

    #[test]
    fn nsga2_is_deterministic() {
        let objectives = ab_objectives();
        let params = GaParams {
            population: 8,
            generations: 5,
            seed: 3,
            ..Default::default()
        };
        let a = nsga2_search(6, &objectives, &params, toy_fitness).unwrap();
        let b = nsga2_search(6, &objectives, &params, toy_fitness).unwrap();
        assert_eq!(a.log.len(), b.log.len());
        for (x, y) in a.log.iter().zip(&b.log) {
            assert_eq!(x.config, y.config);
            assert_eq!(x.objective_values, y.objective_values);
        }
    }

    #[test]
    fn nsga2_archive_only_holds_evaluated_configs() {
        let objectives = ab_objectives();
        let params = GaParams {
            population: 8,
            generations: 4,
            seed: 5,
            ..Default::default()
        };
        let outcome = nsga2_search(5, &objectives, &params, toy_fitness).unwrap();
        for p in &outcome.archive_front.points {
            assert!(outcome.evaluated.contains_key(&p.config));
        }
    }

    #[test]
    fn nsga2_rejects_odd_population() {
        let params = GaParams {
            population: 7,
            ..Default::default()
        };
        assert!(matches!(
            nsga2_search(4, &ab_objectives(), &params, toy_fitness),
            Err(DseError::BadPopulation { got: 7 })
        ));
    }

    #[test]
    fn validate_points_reports_zero_drift_for_identical_paths() {
        let points = vec![point("101", 1.0, 2.0), point("010", 3.0, 4.0)];
        let (validated, report) = validate_points(
            &points,
            |c| {
                Ok(points
                    .iter()
                    .find(|p| &p.config == c)
                    .cloned()
                    .unwrap())
            },
            &[MetricKey::AvgAbsErr, MetricKey::PdpProxy],
        )
        .unwrap();
        assert_eq!(validated.len(), 2);
        assert_eq!(report.by_metric["avg_abs_err"], 0.0);
        assert_eq!(report.by_metric["pdp_proxy"], 0.0);
    }
}
