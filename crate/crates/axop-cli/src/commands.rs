//! Command implementations behind the CLI surface. Each command returns a
//! typed error that maps onto the process exit codes: usage errors (1), data
//! errors (2), internal invariant violations (3).

use crate::config::{config_hash, derive_seed, RunConfig};
use crate::report::{self, ResultSet};
use crate::serial;
use axop::axmodel::{apply_config, enumerate_configs, sample_configs, AxoConfig, TiePolarity};
use axop::behav::{characterize_behav, fit_poly_estimator, EvalPlan, OutputEstimator};
use axop::dse::{
    hypervolumes_normalized, nsga2_search, pareto_front, validate_points, DesignPoint, Fidelity,
    MetricKey, Objectives, ParetoArchive,
};
use axop::netlist::Netlist;
use axop::opgen::OperatorSpec;
use axop::ppa::{characterize_ppa, import_ppa, DelayModel, PowerPlan, PpaMetrics};
use axop::surrogate::{fit_surrogate, FeatureMode, SurrogateModel};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Typed command failure; the variant picks the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn data<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Data(e.to_string())
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| data(format!("{}: {e}", parent.display())))?;
        }
    }
    std::fs::write(path, content).map_err(|e| data(format!("{}: {e}", path.display())))
}

fn parse_operator_args(kind: &str, width_a: usize, width_b: Option<usize>) -> Result<OperatorSpec, CliError> {
    match kind {
        "uadd" => Ok(OperatorSpec::unsigned_add(width_a)),
        "smul-bw" => Ok(OperatorSpec::signed_mul_bw(width_a, width_b.unwrap_or(width_a))),
        other => Err(CliError::Usage(format!(
            "unknown operator kind {other:?} (expected uadd or smul-bw)"
        ))),
    }
}

/// `generate`: write the accurate netlist and print the config length.
pub fn cmd_generate(
    kind: &str,
    width_a: usize,
    width_b: Option<usize>,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let spec = parse_operator_args(kind, width_a, width_b)?;
    let netlist = spec.generate().map_err(usage)?;
    let text = serial::write_netlist(&netlist);
    let path = out
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(format!("{}.netlist", spec.name())));
    write_file(&path, &text)?;
    println!(
        "{}: {} LUTs, {} carry cells, config length L = {}",
        path.display(),
        netlist.luts.len(),
        netlist.carries.len(),
        spec.config_len()
    );
    Ok(())
}

/// Everything needed to characterize one config exactly.
pub struct Workbench {
    pub spec: OperatorSpec,
    pub base: Netlist,
    pub accurate: OutputEstimator,
    pub tie: TiePolarity,
    pub plan: EvalPlan,
    pub estimator: EstimatorChoice,
    pub delay: DelayModel,
    pub power: PowerPlan,
    pub imported: BTreeMap<String, PpaMetrics>,
}

#[derive(Debug, Clone, Copy)]
pub enum EstimatorChoice {
    Netlist,
    Lookup,
    Poly {
        degree: usize,
        samples: usize,
        seed: u64,
    },
}

impl Workbench {
    pub fn from_config(config: &RunConfig, config_dir: &Path) -> Result<Workbench, CliError> {
        let spec = config.operator.spec().map_err(usage)?;
        let base = spec.generate().map_err(usage)?;
        let accurate = OutputEstimator::from_netlist(spec, &base)
            .map_err(|e| CliError::Internal(e.to_string()))?;
        let tie = config.model.tie_polarity().map_err(usage)?;
        let behav = &config.estimation.behav;
        let plan = match behav.plan.as_str() {
            "exhaustive" => EvalPlan::Exhaustive,
            "monte-carlo" => EvalPlan::MonteCarlo {
                samples: behav.samples,
                seed: derive_seed(config.seed, "behav-mc"),
            },
            other => {
                return Err(CliError::Usage(format!(
                    "estimation.behav.plan: unknown plan {other:?}"
                )))
            }
        };
        let estimator = match behav.estimator.as_str() {
            "netlist" => EstimatorChoice::Netlist,
            "lookup" => EstimatorChoice::Lookup,
            "poly" => EstimatorChoice::Poly {
                degree: behav.degree,
                samples: behav.fit_samples,
                seed: derive_seed(config.seed, "poly-fit"),
            },
            other => {
                return Err(CliError::Usage(format!(
                    "estimation.behav.estimator: unknown estimator {other:?}"
                )))
            }
        };
        let imported = match &config.estimation.ppa.imported {
            Some(path) => {
                let text = read_file(&config_dir.join(path))?;
                import_ppa(&text).map_err(data)?
            }
            None => BTreeMap::new(),
        };
        Ok(Workbench {
            spec,
            base,
            accurate,
            tie,
            plan,
            estimator,
            delay: config.estimation.ppa.delay_model(),
            power: config.estimation.ppa.power_plan(config.seed),
            imported,
        })
    }

    /// Exact characterization of one config: behavioral metrics through the
    /// chosen output estimator, PPA proxies or imported records.
    pub fn characterize(&self, config: &AxoConfig) -> Result<DesignPoint, String> {
        let pruned = apply_config(&self.base, config, self.tie).map_err(|e| e.to_string())?;
        let functional =
            OutputEstimator::from_netlist(self.spec, &pruned).map_err(|e| e.to_string())?;
        let estimator = match self.estimator {
            EstimatorChoice::Netlist => functional,
            EstimatorChoice::Lookup => {
                OutputEstimator::table_from(&functional).map_err(|e| e.to_string())?
            }
            EstimatorChoice::Poly {
                degree,
                samples,
                seed,
            } => fit_poly_estimator(&functional, degree, samples, seed).map_err(|e| e.to_string())?,
        };
        let behav =
            characterize_behav(&estimator, &self.accurate, &self.plan).map_err(|e| e.to_string())?;
        let ppa = match self.imported.get(&config.to_string()) {
            Some(record) => *record,
            None => characterize_ppa(&pruned, &self.delay, &self.power).map_err(|e| e.to_string())?,
        };
        Ok(DesignPoint {
            config: config.clone(),
            behav,
            app_behav: None,
            ppa,
            fidelity: Fidelity::Characterized,
        })
    }
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))
}

/// Resolves the run's config list from the dse section.
pub fn resolve_configs(
    config: &RunConfig,
    spec: &OperatorSpec,
    config_dir: &Path,
) -> Result<Vec<AxoConfig>, CliError> {
    let length = spec.config_len();
    let section = &config.dse;
    match section.method.as_deref().unwrap_or("enumerate") {
        "enumerate" => Ok(enumerate_configs(length, section.enumeration_cap)
            .map_err(data)?
            .collect()),
        "list" => {
            let path = section.list_file.as_ref().ok_or_else(|| {
                CliError::Usage("dse.list_file: required for the list method".into())
            })?;
            let text = read_file(&config_dir.join(path))?;
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(|l| AxoConfig::parse(l).map_err(data))
                .collect()
        }
        "sample" => {
            let sample = section.sample.as_ref().ok_or_else(|| {
                CliError::Usage("dse.sample: required for the sample method".into())
            })?;
            let strategy = sample.strategy(config.seed).map_err(usage)?;
            sample_configs(&strategy, length, sample.count).map_err(data)
        }
        "ga" => Err(CliError::Usage(
            "dse.method ga does not enumerate a config list; use cmd dse".into(),
        )),
        other => Err(CliError::Usage(format!("dse.method: unknown method {other:?}"))),
    }
}

/// Evaluates a batch in parallel, preserving input order. On failure the
/// successfully characterized prefix is flushed with a `.partial` suffix.
fn characterize_batch(
    workbench: &Workbench,
    configs: &[AxoConfig],
    pool: &rayon::ThreadPool,
    partial_path: &Path,
    runconfig_hash: &str,
) -> Result<Vec<DesignPoint>, CliError> {
    use rayon::prelude::*;
    let results: Vec<Result<DesignPoint, String>> = pool.install(|| {
        configs
            .par_iter()
            .map(|c| workbench.characterize(c))
            .collect()
    });
    let mut points = Vec::with_capacity(results.len());
    for (config, result) in configs.iter().zip(results) {
        match result {
            Ok(point) => points.push(point),
            Err(message) => {
                points.sort_by(|a: &DesignPoint, b: &DesignPoint| {
                    a.config.to_string().cmp(&b.config.to_string())
                });
                let partial = report::write_results(&points, runconfig_hash, false);
                write_file(partial_path, &partial)?;
                return Err(CliError::Data(format!(
                    "characterization failed for {config}: {message} (partial results in {})",
                    partial_path.display()
                )));
            }
        }
    }
    Ok(points)
}

/// `characterize`: one results row per config, lexicographic order.
pub fn cmd_characterize(config_path: &Path) -> Result<PathBuf, CliError> {
    let text = read_file(config_path)?;
    let run = RunConfig::parse(&text).map_err(usage)?;
    let hash = config_hash(&text);
    let config_dir = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let workbench = Workbench::from_config(&run, &config_dir)?;
    let configs = resolve_configs(&run, &workbench.spec, &config_dir)?;
    let pool = build_pool(run.workers)?;

    let out_dir = config_dir.join(&run.output_dir);
    let out_path = out_dir.join("results.csv");
    let partial_path = out_dir.join("results.csv.partial");
    let mut points = characterize_batch(&workbench, &configs, &pool, &partial_path, &hash)?;
    points.sort_by(|a, b| a.config.to_string().cmp(&b.config.to_string()));

    // Imported records that matched nothing are reported, not dropped.
    let known: Vec<String> = points.iter().map(|p| p.config.to_string()).collect();
    let unmatched: Vec<&String> = workbench
        .imported
        .keys()
        .filter(|k| !known.contains(k))
        .collect();
    if !unmatched.is_empty() {
        eprintln!(
            "warning: {} imported PPA records matched no characterized config: {}",
            unmatched.len(),
            unmatched
                .iter()
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
                .join(", ")
        );
    }

    write_file(&out_path, &report::write_results(&points, &hash, false))?;
    println!("{}: {} rows", out_path.display(), points.len());
    Ok(out_path)
}

/// `sample`: print a batch of configs, one per line.
pub fn cmd_sample(
    kind: &str,
    length: usize,
    count: usize,
    window: Option<usize>,
    seed: u64,
) -> Result<Vec<AxoConfig>, CliError> {
    let strategy = match kind {
        "random" => axop::axmodel::SamplingStrategy::Random {
            seed: derive_seed(seed, "sampling"),
        },
        "patterned" => axop::axmodel::SamplingStrategy::Patterned {
            window: window
                .ok_or_else(|| CliError::Usage("--window is required for patterned".into()))?,
        },
        "special" => axop::axmodel::SamplingStrategy::Special,
        other => {
            return Err(CliError::Usage(format!(
                "unknown sampling kind {other:?} (expected random, patterned, special)"
            )))
        }
    };
    let batch = sample_configs(&strategy, length, count).map_err(data)?;
    for config in &batch {
        println!("{config}");
    }
    Ok(batch)
}

/// Builds surrogate models for the requested targets from a characterized
/// training set.
fn fit_fitness_surrogates(
    run: &RunConfig,
    workbench: &Workbench,
    pool: &rayon::ThreadPool,
) -> Result<Vec<(MetricKey, SurrogateModel)>, CliError> {
    let training = run
        .dse
        .surrogate_training
        .as_ref()
        .ok_or_else(|| CliError::Usage("dse.surrogate_training: required with surrogate_fitness".into()))?;
    let strategy = training.strategy(run.seed).map_err(usage)?;
    let configs = sample_configs(&strategy, workbench.spec.config_len(), training.count).map_err(data)?;
    use rayon::prelude::*;
    let points: Vec<DesignPoint> = pool
        .install(|| {
            configs
                .par_iter()
                .map(|c| workbench.characterize(c))
                .collect::<Result<Vec<_>, _>>()
        })
        .map_err(CliError::Data)?;

    let mut models = Vec::new();
    for entry in &run.dse.surrogate_fitness {
        let key = MetricKey::parse(&entry.target).ok_or_else(|| {
            CliError::Usage(format!("surrogate_fitness.target: unknown metric {:?}", entry.target))
        })?;
        let mode = FeatureMode::parse(&entry.features).ok_or_else(|| {
            CliError::Usage(format!(
                "surrogate_fitness.features: unknown mode {:?}",
                entry.features
            ))
        })?;
        let dataset: Vec<(AxoConfig, f64)> = points
            .iter()
            .map(|p| (p.config.clone(), key.value(p)))
            .collect();
        let model = fit_surrogate(
            &dataset,
            key.label(),
            mode,
            entry.lambda,
            derive_seed(run.seed, "surrogate-split"),
        )
        .map_err(data)?;
        models.push((key, model));
    }
    Ok(models)
}

/// Builds a predicted design point from surrogate outputs.
fn predicted_point(
    config: &AxoConfig,
    models: &[(MetricKey, SurrogateModel)],
) -> Result<DesignPoint, String> {
    let mut point = DesignPoint {
        config: config.clone(),
        behav: axop::behav::BehavMetrics {
            avg_abs_err: f64::NAN,
            avg_rel_err: f64::NAN,
            max_abs_err: f64::NAN,
            err_prob: f64::NAN,
            mse: f64::NAN,
        },
        app_behav: None,
        ppa: PpaMetrics {
            lut_count: 0,
            carry_count: 0,
            cpd_proxy: f64::NAN,
            power_proxy: f64::NAN,
            pdp_proxy: f64::NAN,
            source: axop::ppa::PpaSource::Proxy,
        },
        fidelity: Fidelity::Predicted,
    };
    for (key, model) in models {
        let value = model.predict(config).map_err(|e| e.to_string())?;
        match key {
            MetricKey::AvgAbsErr => point.behav.avg_abs_err = value,
            MetricKey::AvgRelErr => point.behav.avg_rel_err = value,
            MetricKey::MaxAbsErr => point.behav.max_abs_err = value,
            MetricKey::ErrProb => point.behav.err_prob = value,
            MetricKey::Mse => point.behav.mse = value,
            MetricKey::LutCount => point.ppa.lut_count = value.round().max(0.0) as u64,
            MetricKey::CarryCount => point.ppa.carry_count = value.round().max(0.0) as u64,
            MetricKey::CpdProxy => point.ppa.cpd_proxy = value,
            MetricKey::PowerProxy => point.ppa.power_proxy = value,
            MetricKey::PdpProxy => point.ppa.pdp_proxy = value,
            MetricKey::OutputMse | MetricKey::OutputMaxAbsErr => {
                return Err("application metrics cannot be surrogate fitness targets here".into())
            }
        }
    }
    Ok(point)
}

/// Outcome bundle of `cmd_dse`.
pub struct DseOutputs {
    pub front_path: PathBuf,
    pub points_path: PathBuf,
    pub genlog_path: Option<PathBuf>,
    pub hypervolume_path: PathBuf,
    pub front: ParetoArchive,
}

/// `dse`: run the configured method, write front/points/log plus a
/// hypervolume report comparing the front against any named result sets.
pub fn cmd_dse(config_path: &Path, compare: &[PathBuf]) -> Result<DseOutputs, CliError> {
    let text = read_file(config_path)?;
    let run = RunConfig::parse(&text).map_err(usage)?;
    let hash = config_hash(&text);
    let config_dir = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let workbench = Workbench::from_config(&run, &config_dir)?;
    let objectives = run.objectives().map_err(usage)?;
    if objectives.minimize.is_empty() {
        return Err(CliError::Usage("objectives: at least one metric required".into()));
    }
    let pool = build_pool(run.workers)?;
    let out_dir = config_dir.join(&run.output_dir);

    let method = run.dse.method.as_deref().unwrap_or("enumerate");
    let (all_points, front, log): (Vec<DesignPoint>, ParetoArchive, Option<String>) = if method == "ga" {
        let params = run.dse.ga.clone().unwrap_or_default().params(run.seed);
        let outcome = if run.dse.surrogate_fitness.is_empty() {
            pool.install(|| {
                nsga2_search(workbench.spec.config_len(), &objectives, &params, |c| {
                    workbench.characterize(c)
                })
            })
            .map_err(data)?
        } else {
            let models = fit_fitness_surrogates(&run, &workbench, &pool)?;
            pool.install(|| {
                nsga2_search(workbench.spec.config_len(), &objectives, &params, |c| {
                    predicted_point(c, &models)
                })
            })
            .map_err(data)?
        };
        let genlog = report::write_genlog(&outcome.log, &objectives, &hash);
        (
            outcome.evaluated.values().cloned().collect(),
            outcome.archive_front,
            Some(genlog),
        )
    } else {
        let configs = resolve_configs(&run, &workbench.spec, &config_dir)?;
        let partial = out_dir.join("dse_points.csv.partial");
        let mut points = characterize_batch(&workbench, &configs, &pool, &partial, &hash)?;
        points.sort_by(|a, b| a.config.to_string().cmp(&b.config.to_string()));
        let front = pareto_front(&points, &objectives).map_err(data)?;
        (points, front, None)
    };

    let front_path = out_dir.join("front.csv");
    let points_path = out_dir.join("dse_points.csv");
    write_file(&front_path, &report::write_results(&front.points, &hash, false))?;
    write_file(&points_path, &report::write_results(&all_points, &hash, false))?;
    let genlog_path = match log {
        Some(content) => {
            let path = out_dir.join("genlog.csv");
            write_file(&path, &content)?;
            Some(path)
        }
        None => None,
    };

    // Hypervolume report: this front plus any compared result sets, scaled
    // jointly. Needs exactly two objectives.
    let mut names = vec!["front".to_string()];
    let mut sets: Vec<Vec<Vec<f64>>> = Vec::new();
    let front_vectors: Vec<Vec<f64>> = front
        .points
        .iter()
        .map(|p| objectives.values(p))
        .collect();
    sets.push(front_vectors);
    for path in compare {
        let parsed = report::parse_results(&read_file(path)?).map_err(data)?;
        let vectors = report::objective_vectors(&parsed, &objectives.minimize).map_err(data)?;
        names.push(
            path.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
        );
        sets.push(vectors);
    }
    let hypervolume_path = out_dir.join("hypervolume.csv");
    if objectives.minimize.len() == 2 {
        let values = hypervolumes_normalized(&sets).map_err(data)?;
        write_file(
            &hypervolume_path,
            &report::write_hypervolumes(&names, &values, &hash),
        )?;
    } else {
        write_file(
            &hypervolume_path,
            &format!("{} \nset,hypervolume_normalized\n", report::RESULTS_MAGIC),
        )?;
        eprintln!("note: hypervolume report needs exactly 2 objectives; wrote empty report");
    }

    println!(
        "front: {} points -> {}",
        front.points.len(),
        front_path.display()
    );
    Ok(DseOutputs {
        front_path,
        points_path,
        genlog_path,
        hypervolume_path,
        front,
    })
}

/// `validate`: re-characterize points from a results CSV with the exact path
/// and report prediction drift.
pub fn cmd_validate(config_path: &Path, points_path: &Path) -> Result<(PathBuf, PathBuf), CliError> {
    let text = read_file(config_path)?;
    let run = RunConfig::parse(&text).map_err(usage)?;
    let hash = config_hash(&text);
    let config_dir = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let workbench = Workbench::from_config(&run, &config_dir)?;
    let pool = build_pool(run.workers)?;

    let parsed = report::parse_results(&read_file(points_path)?).map_err(data)?;
    let predicted: Vec<DesignPoint> = parsed
        .rows
        .iter()
        .map(|r| r.to_design_point())
        .collect::<Result<_, _>>()
        .map_err(data)?;

    // Drift over the operator metrics present in the input file.
    let drift_keys: Vec<MetricKey> = parsed
        .columns
        .iter()
        .filter_map(|c| MetricKey::parse(c))
        .collect();
    let (validated, drift) = pool
        .install(|| validate_points(&predicted, |c| workbench.characterize(c), &drift_keys))
        .map_err(data)?;

    let out_dir = config_dir.join(&run.output_dir);
    let validated_path = out_dir.join("validated.csv");
    let drift_path = out_dir.join("drift.csv");
    write_file(&validated_path, &report::write_results(&validated, &hash, false))?;
    write_file(&drift_path, &report::write_drift(&drift, &hash))?;
    println!(
        "validated {} points -> {} (drift report {})",
        validated.len(),
        validated_path.display(),
        drift_path.display()
    );
    Ok((validated_path, drift_path))
}

fn build_task(run: &RunConfig, spec: &OperatorSpec, config_dir: &Path) -> Result<axop::apps::TaskModel, CliError> {
    let section = run
        .task
        .as_ref()
        .ok_or_else(|| CliError::Usage("task: section required for app-eval".into()))?;
    match section.kind.as_str() {
        "fir" => {
            let signal = if section.signal == "builtin" {
                axop::apps::parse_signal_csv(axop::fixtures::SIGNAL_CSV).map_err(data)?
            } else {
                axop::apps::parse_signal_csv(&read_file(&config_dir.join(&section.signal))?)
                    .map_err(data)?
            };
            let taps = section
                .taps
                .clone()
                .unwrap_or_else(|| vec![1, 2, 3, 4, 4, 3, 2, 1]);
            Ok(axop::apps::TaskModel::FirLowPass { taps, signal }.quantized_for(spec))
        }
        "conv2d" => {
            let image = if section.image == "builtin" {
                axop::apps::parse_pgm(axop::fixtures::GRADIENT_PGM).map_err(data)?
            } else {
                axop::apps::parse_pgm(&read_file(&config_dir.join(&section.image))?).map_err(data)?
            };
            let kernel_rows = section
                .kernel
                .clone()
                .unwrap_or_else(|| vec![vec![1, 1, 1], vec![1, 2, 1], vec![1, 1, 1]]);
            if kernel_rows.len() != 3 || kernel_rows.iter().any(|r| r.len() != 3) {
                return Err(CliError::Usage("task.kernel: must be 3x3".into()));
            }
            let mut kernel = [[0i64; 3]; 3];
            for (y, row) in kernel_rows.iter().enumerate() {
                for (x, v) in row.iter().enumerate() {
                    kernel[y][x] = *v;
                }
            }
            Ok(axop::apps::TaskModel::Conv2d3x3 { kernel, image }.quantized_for(spec))
        }
        other => Err(CliError::Usage(format!("task.kind: unknown kind {other:?}"))),
    }
}

/// `app-eval`: application-specific exploration over the operator space.
pub fn cmd_app_eval(config_path: &Path) -> Result<(PathBuf, PathBuf), CliError> {
    let text = read_file(config_path)?;
    let run = RunConfig::parse(&text).map_err(usage)?;
    let hash = config_hash(&text);
    let config_dir = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let spec = run.operator.spec().map_err(usage)?;
    let base = spec.generate().map_err(usage)?;
    let task = build_task(&run, &spec, &config_dir)?;
    let objectives = run.objectives().map_err(usage)?;
    let pool = build_pool(run.workers)?;
    let delay = run.estimation.ppa.delay_model();
    let power = run.estimation.ppa.power_plan(run.seed);

    let method = match run.dse.method.as_deref().unwrap_or("sample") {
        "ga" => axop::apps::AppDseMethod::Ga {
            params: run.dse.ga.clone().unwrap_or_default().params(run.seed),
        },
        _ => {
            let configs = resolve_configs(&run, &spec, &config_dir)?;
            axop::apps::AppDseMethod::Sampling { configs }
        }
    };
    let outcome = pool
        .install(|| axop::apps::app_dse(&task, &base, &spec, &objectives, &method, &delay, &power))
        .map_err(data)?;

    let out_dir = config_dir.join(&run.output_dir);
    let front_path = out_dir.join("app_front.csv");
    let points_path = out_dir.join("app_points.csv");
    let mut evaluated = outcome.evaluated.clone();
    evaluated.sort_by(|a, b| a.config.to_string().cmp(&b.config.to_string()));
    write_file(&front_path, &report::write_results(&outcome.front.points, &hash, true))?;
    write_file(&points_path, &report::write_results(&evaluated, &hash, true))?;
    println!(
        "app front: {} points -> {}",
        outcome.front.points.len(),
        front_path.display()
    );
    Ok((front_path, points_path))
}

/// `emit-rtl`: read a serialized netlist and write Verilog.
pub fn cmd_emit_rtl(netlist_path: &Path, mode: &str, out: Option<&Path>) -> Result<PathBuf, CliError> {
    let netlist = serial::parse_netlist(&read_file(netlist_path)?).map_err(data)?;
    let mode = match mode {
        "generic" => axop::verilog::VerilogMode::Generic,
        "vendor" => axop::verilog::VerilogMode::VendorPrimitives,
        other => {
            return Err(CliError::Usage(format!(
                "unknown RTL mode {other:?} (expected generic or vendor)"
            )))
        }
    };
    let text = axop::verilog::emit_verilog(&netlist, mode).map_err(data)?;
    let path = out
        .map(PathBuf::from)
        .unwrap_or_else(|| netlist_path.with_extension("v"));
    write_file(&path, &text)?;
    println!("{}", path.display());
    Ok(path)
}

/// `import-ppa`: parse an external measurement file and summarize it.
pub fn cmd_import_ppa(file: &Path) -> Result<usize, CliError> {
    let records = import_ppa(&read_file(file)?).map_err(data)?;
    println!("{}: {} records", file.display(), records.len());
    for (config, metrics) in &records {
        println!(
            "  {config}: lut={} carry={} cpd={} power={} pdp={}",
            metrics.lut_count,
            metrics.carry_count,
            metrics.cpd_proxy,
            metrics.power_proxy,
            metrics.pdp_proxy
        );
    }
    Ok(records.len())
}

/// `plotdata`: tidy long-format CSV plus an optional SVG scatter with the
/// Pareto front marked.
pub fn cmd_plotdata(
    results: &[PathBuf],
    out: &Path,
    svg: Option<&Path>,
    x_column: &str,
    y_column: &str,
) -> Result<(), CliError> {
    if results.is_empty() {
        return Err(CliError::Usage("plotdata needs at least one results file".into()));
    }
    let mut sets: Vec<(String, ResultSet)> = Vec::new();
    for path in results {
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        sets.push((name, report::parse_results(&read_file(path)?).map_err(data)?));
    }
    let tidy = report::write_plotdata(&sets).map_err(data)?;
    write_file(out, &tidy)?;

    if let Some(svg_path) = svg {
        // Pareto marking against the chosen two columns over all sets.
        let x_key = MetricKey::parse(x_column)
            .ok_or_else(|| CliError::Usage(format!("unknown metric {x_column:?}")))?;
        let y_key = MetricKey::parse(y_column)
            .ok_or_else(|| CliError::Usage(format!("unknown metric {y_column:?}")))?;
        let objectives = Objectives::new(vec![x_key, y_key]);
        let mut points: Vec<DesignPoint> = Vec::new();
        for (_, set) in &sets {
            for row in &set.rows {
                points.push(row.to_design_point().map_err(data)?);
            }
        }
        let front = pareto_front(&points, &objectives).map_err(data)?;
        let marked: Vec<String> = front.points.iter().map(|p| p.config.to_string()).collect();
        let svg_text =
            report::write_svg_scatter(&sets, x_column, y_column, &marked).map_err(data)?;
        write_file(svg_path, &svg_text)?;
    }
    println!("{}", out.display());
    Ok(())
}

/// `fit-surrogate`: fit a config-to-metric model from a results CSV and save
/// it as a coefficient CSV.
pub fn cmd_fit_surrogate(
    results_path: &Path,
    target: &str,
    features: &str,
    lambda: f64,
    seed: u64,
    out: &Path,
) -> Result<SurrogateModel, CliError> {
    let key = MetricKey::parse(target)
        .ok_or_else(|| CliError::Usage(format!("unknown metric {target:?}")))?;
    let mode = FeatureMode::parse(features)
        .ok_or_else(|| CliError::Usage(format!("unknown feature mode {features:?}")))?;
    let parsed = report::parse_results(&read_file(results_path)?).map_err(data)?;
    let dataset: Vec<(AxoConfig, f64)> = parsed
        .rows
        .iter()
        .map(|row| {
            let config = AxoConfig::parse(&row.config).map_err(data)?;
            let value = row
                .value(key.label())
                .ok_or_else(|| CliError::Data(format!("results lack column {}", key.label())))?;
            Ok((config, value))
        })
        .collect::<Result<_, CliError>>()?;
    let model = fit_surrogate(&dataset, key.label(), mode, lambda, derive_seed(seed, "surrogate-split"))
        .map_err(data)?;
    write_file(out, &crate::surrogate_io::write_model(&model))?;
    println!(
        "{}: train MAE {}, test MAE {}",
        out.display(),
        report::format_real(model.train_mae),
        report::format_real(model.test_mae)
    );
    Ok(model)
}
