//! Experiment orchestration: every algorithm on every instance, several
//! seeded runs each, then per-row aggregation and pairwise ANOVA over the
//! runs pooled across datasets.
//!
//! Runs execute in parallel but results are always assembled in
//! `(algorithm, dataset, run)` index order, so a report depends only on
//! the plan.

mod plan;
mod summary;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use thiserror::Error;

pub use plan::{load_plan, parse_plan};
pub use summary::{format_f, summarize, Summary};

use crate::bpso::{self, SwarmConfig, SwarmError};
use crate::rng::mix_seed;
use crate::stats::{pairwise_anova, AlgorithmRuns, AnovaResult, StatsError};
use crate::topology::{TopologyError, TopologyKind};
use crate::wcnf::{brute_force_optimum, generate_random, parse_wcnf, GeneratorParams, WcnfInstance};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("plan error: {0}")]
    Plan(String),
    #[error(transparent)]
    Solver(#[from] SwarmError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("worker pool: {0}")]
    Pool(String),
}

impl From<TopologyError> for HarnessError {
    fn from(e: TopologyError) -> Self {
        HarnessError::Plan(e.to_string())
    }
}

/// A topology with or without the guaranteed-convergence update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Algorithm {
    pub topology: TopologyKind,
    pub gc: bool,
}

impl Algorithm {
    pub const fn new(topology: TopologyKind, gc: bool) -> Self {
        Self { topology, gc }
    }

    /// The eight variants, plain before guaranteed-convergence for each topology.
    pub fn all_variants() -> [Algorithm; 8] {
        let mut out = [Algorithm::new(TopologyKind::GlobalBest, false); 8];
        for (i, kind) in TopologyKind::ALL.into_iter().enumerate() {
            out[2 * i] = Algorithm::new(kind, false);
            out[2 * i + 1] = Algorithm::new(kind, true);
        }
        out
    }

    /// Report label, e.g. `LBest-GC`.
    pub fn label(&self) -> String {
        if self.gc {
            format!("{}-GC", self.topology.label())
        } else {
            self.topology.label().to_string()
        }
    }

    /// Plan-file name, e.g. `lbest-gc`.
    pub fn name(&self) -> String {
        if self.gc {
            format!("{}-gc", self.topology.name())
        } else {
            self.topology.name().to_string()
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        let (kind, gc) = match lower.strip_suffix("-gc") {
            Some(k) => (k, true),
            None => (lower.as_str(), false),
        };
        let topology = kind
            .parse::<TopologyKind>()
            .map_err(|_| HarnessError::Plan(format!("unknown algorithm {s:?}")))?;
        Ok(Algorithm { topology, gc })
    }
}

/// Where an instance comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceSource {
    File(PathBuf),
    Generated {
        name: Option<String>,
        params: GeneratorParams,
        /// Attach the exhaustive optimum as the known optimum.
        with_opt: bool,
    },
}

impl InstanceSource {
    /// Label used before the instance is loaded.
    pub fn label(&self) -> String {
        match self {
            InstanceSource::File(path) => path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            InstanceSource::Generated { name, params, .. } => {
                name.clone().unwrap_or_else(|| params.label())
            }
        }
    }

    pub fn load(&self) -> Result<WcnfInstance, String> {
        match self {
            InstanceSource::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                parse_wcnf(&text).map_err(|e| format!("{}: {e}", path.display()))
            }
            InstanceSource::Generated {
                name,
                params,
                with_opt,
            } => {
                let mut inst = generate_random(params).map_err(|e| e.to_string())?;
                if let Some(n) = name {
                    inst = inst.with_name(n.clone());
                }
                if *with_opt {
                    let (opt, _) = brute_force_optimum(&inst).map_err(|e| e.to_string())?;
                    inst = inst.with_known_optimum(opt).map_err(|e| e.to_string())?;
                }
                Ok(inst)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub instances: Vec<InstanceSource>,
    pub algorithms: Vec<Algorithm>,
    pub runs_per_pair: usize,
    pub base_seed: u64,
    /// Solver settings shared by every run; the seed field is overwritten per run.
    pub swarm: SwarmConfig,
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
}

impl ExperimentPlan {
    /// Eight variants on four exhaustively solved random 3-CNF instances
    /// (16 variables, 100 clauses, weights 1–100, generator seeds 1–4),
    /// three runs each, default solver settings.
    pub fn desk_scale(base_seed: u64) -> Self {
        Self {
            instances: (1..=4)
                .map(|seed| InstanceSource::Generated {
                    name: None,
                    params: GeneratorParams {
                        num_vars: 16,
                        num_clauses: 100,
                        clause_len: 3,
                        weight_lo: 1,
                        weight_hi: 100,
                        seed,
                    },
                    with_opt: true,
                })
                .collect(),
            algorithms: Algorithm::all_variants().to_vec(),
            runs_per_pair: 3,
            base_seed,
            swarm: SwarmConfig::default(),
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.runs_per_pair < 1 {
            return Err(HarnessError::Plan("runs_per_pair must be at least 1".into()));
        }
        if self.algorithms.is_empty() {
            return Err(HarnessError::Plan("no algorithms".into()));
        }
        if self.instances.is_empty() {
            return Err(HarnessError::Plan("no instances".into()));
        }
        for (i, a) in self.algorithms.iter().enumerate() {
            if self.algorithms[..i].contains(a) {
                return Err(HarnessError::Plan(format!("algorithm {a} listed twice")));
            }
        }
        if self.workers == Some(0) {
            return Err(HarnessError::Plan("workers must be at least 1".into()));
        }
        self.swarm
            .validate()
            .map_err(|e| HarnessError::Plan(e.to_string()))?;
        for a in &self.algorithms {
            crate::topology::Topology::new(a.topology, &self.swarm.topology, self.swarm.swarm_size)?;
        }
        Ok(())
    }
}

/// Outcome of one solver run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunRecord {
    pub algorithm_index: usize,
    pub algorithm: String,
    pub dataset_index: usize,
    pub dataset: String,
    pub run: usize,
    pub seed: u64,
    pub best_fitness: u64,
    pub iterations: usize,
    pub converged: bool,
}

/// A dataset that could not be loaded; none of its runs happen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exclusion {
    pub dataset_index: usize,
    pub dataset: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportMetadata {
    pub base_seed: u64,
    pub runs_per_pair: usize,
    pub algorithms: Vec<String>,
    pub datasets: Vec<String>,
    pub swarm: SwarmConfig,
    pub started_unix: u64,
    pub finished_unix: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    /// One row per algorithm × loaded dataset, algorithm-major.
    pub rows: Vec<AlgorithmRuns>,
    pub anova: Vec<((String, String), AnovaResult)>,
    /// Why `anova` is empty, when it is.
    pub anova_note: Option<String>,
    pub runs: Vec<RunRecord>,
    pub exclusions: Vec<Exclusion>,
    pub metadata: ReportMetadata,
}

fn unix_now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Runs the plan.
pub fn run_experiment(plan: &ExperimentPlan) -> Result<ExperimentReport, HarnessError> {
    run_experiment_with_progress(plan, |_| {})
}

/// [`run_experiment`], calling `on_run` as each run finishes (in completion order).
pub fn run_experiment_with_progress<F>(plan: &ExperimentPlan, on_run: F) -> Result<ExperimentReport, HarnessError>
where
    F: Fn(&RunRecord) + Sync,
{
    plan.validate()?;
    let started_unix = unix_now();

    let mut loaded: Vec<(usize, String, WcnfInstance)> = Vec::new();
    let mut exclusions = Vec::new();
    for (d, source) in plan.instances.iter().enumerate() {
        match source.load() {
            Ok(inst) => {
                let label = if inst.name().is_empty() {
                    source.label()
                } else {
                    inst.name().to_string()
                };
                loaded.push((d, label, inst));
            }
            Err(reason) => exclusions.push(Exclusion {
                dataset_index: d,
                dataset: source.label(),
                reason,
            }),
        }
    }

    let jobs: Vec<(usize, usize, usize)> = (0..plan.algorithms.len())
        .flat_map(|a| {
            (0..loaded.len()).flat_map(move |l| (0..plan.runs_per_pair).map(move |r| (a, l, r)))
        })
        .collect();

    let execute = |&(a, l, r): &(usize, usize, usize)| -> Result<RunRecord, SwarmError> {
        let algorithm = plan.algorithms[a];
        let (d, ref label, ref inst) = loaded[l];
        let seed = mix_seed(plan.base_seed, a, d, r);
        let config = SwarmConfig {
            seed,
            gc_enabled: algorithm.gc,
            ..plan.swarm.clone()
        };
        let result = bpso::run(inst, algorithm.topology, &config)?;
        let record = RunRecord {
            algorithm_index: a,
            algorithm: algorithm.label(),
            dataset_index: d,
            dataset: label.clone(),
            run: r,
            seed,
            best_fitness: result.best_fitness,
            iterations: result.iterations_run,
            converged: result.converged,
        };
        on_run(&record);
        Ok(record)
    };

    let runs: Vec<RunRecord> = match plan.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Pool(e.to_string()))?
            .install(|| jobs.par_iter().map(execute).collect::<Result<_, _>>())?,
        None => jobs.par_iter().map(execute).collect::<Result<_, _>>()?,
    };

    // `runs` is algorithm-major, then dataset, then run.
    let per_row = plan.runs_per_pair;
    let mut rows = Vec::with_capacity(plan.algorithms.len() * loaded.len());
    for chunk in runs.chunks(per_row) {
        let first = &chunk[0];
        let optimum = loaded
            .iter()
            .find(|(d, _, _)| *d == first.dataset_index)
            .and_then(|(_, _, inst)| inst.known_optimum())
            .filter(|&o| o > 0);
        rows.push(AlgorithmRuns::new(
            first.algorithm.clone(),
            first.dataset.clone(),
            chunk.iter().map(|r| r.best_fitness).collect(),
            optimum,
        )?);
    }

    let pooled_len = loaded.len() * per_row;
    let (anova, anova_note) = if plan.algorithms.len() < 2 {
        (Vec::new(), Some("fewer than two algorithms; no pairs to compare".to_string()))
    } else if pooled_len < 2 {
        (
            Vec::new(),
            Some(format!("{pooled_len} pooled run(s) per algorithm; ANOVA needs at least 2")),
        )
    } else {
        let pooled: Vec<(String, Vec<f64>)> = plan
            .algorithms
            .iter()
            .enumerate()
            .map(|(a, alg)| {
                let values = runs[a * pooled_len..(a + 1) * pooled_len]
                    .iter()
                    .map(|r| r.best_fitness as f64)
                    .collect();
                (alg.label(), values)
            })
            .collect();
        (pairwise_anova(&pooled)?, None)
    };

    Ok(ExperimentReport {
        rows,
        anova,
        anova_note,
        runs,
        exclusions,
        metadata: ReportMetadata {
            base_seed: plan.base_seed,
            runs_per_pair: plan.runs_per_pair,
            algorithms: plan.algorithms.iter().map(Algorithm::label).collect(),
            datasets: plan.instances.iter().map(InstanceSource::label).collect(),
            swarm: plan.swarm.clone(),
            started_unix,
            finished_unix: unix_now(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_plan(algorithms: Vec<Algorithm>) -> ExperimentPlan {
        let mut plan = ExperimentPlan::desk_scale(7);
        plan.algorithms = algorithms;
        plan.instances.truncate(2);
        plan.runs_per_pair = 2;
        plan.swarm.stagnation_window = 40;
        plan.swarm.max_iterations = 200;
        plan.workers = Some(2);
        plan
    }

    #[test]
    fn algorithm_names_round_trip() {
        let all = Algorithm::all_variants();
        let labels: Vec<String> = all.iter().map(Algorithm::label).collect();
        assert_eq!(
            labels,
            [
                "GBest", "GBest-GC", "LBest", "LBest-GC", "SquareGrid", "SquareGrid-GC",
                "AdaptiveHierarchy", "AdaptiveHierarchy-GC"
            ]
        );
        for a in all {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("ring".parse::<Algorithm>().is_err());
    }

    #[test]
    fn report_shape_and_seeds() {
        let plan = tiny_plan(Algorithm::all_variants()[..3].to_vec());
        let report = run_experiment(&plan).unwrap();
        assert_eq!(report.runs.len(), 3 * 2 * 2);
        assert_eq!(report.rows.len(), 3 * 2);
        assert_eq!(report.anova.len(), 3);
        for (_, r) in &report.anova {
            assert_eq!((r.v1, r.v2), (1, 6));
        }
        for rec in &report.runs {
            assert_eq!(rec.seed, mix_seed(7, rec.algorithm_index, rec.dataset_index, rec.run));
        }
        for row in &report.rows {
            let opt = row.optimum.unwrap();
            assert!(row.run_values.iter().all(|&v| v <= opt));
            assert_eq!(row.percent, Some(crate::stats::percent_of_optimum(row.average, opt).unwrap()));
        }
    }

    #[test]
    fn single_run_is_reexecutable_from_its_seed() {
        let plan = tiny_plan(vec![Algorithm::new(TopologyKind::SquareGrid, true)]);
        let report = run_experiment(&plan).unwrap();
        let rec = &report.runs[3];
        let inst = plan.instances[rec.dataset_index].load().unwrap();
        let config = SwarmConfig {
            seed: rec.seed,
            gc_enabled: true,
            ..plan.swarm.clone()
        };
        let again = bpso::run(&inst, TopologyKind::SquareGrid, &config).unwrap();
        assert_eq!(again.best_fitness, rec.best_fitness);
        assert_eq!(again.iterations_run, rec.iterations);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut plan = tiny_plan(Algorithm::all_variants()[4..].to_vec());
        let a = run_experiment(&plan).unwrap();
        plan.workers = Some(1);
        let b = run_experiment(&plan).unwrap();
        assert_eq!(a.runs, b.runs);
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.anova, b.anova);
    }

    #[test]
    fn single_algorithm_has_no_anova() {
        let report = run_experiment(&tiny_plan(vec![Algorithm::new(TopologyKind::GlobalBest, false)])).unwrap();
        assert!(report.anova.is_empty());
        assert!(report.anova_note.is_some());
    }

    #[test]
    fn missing_instances_are_excluded() {
        let mut plan = tiny_plan(Algorithm::all_variants()[..2].to_vec());
        plan.instances.insert(0, InstanceSource::File(PathBuf::from("/nonexistent/x.wcnf")));
        let report = run_experiment(&plan).unwrap();
        assert_eq!(report.exclusions.len(), 1);
        assert_eq!(report.exclusions[0].dataset, "x");
        assert_eq!(report.exclusions[0].dataset_index, 0);
        assert_eq!(report.runs.len(), 2 * 2 * 2);
        assert!(report.runs.iter().all(|r| r.dataset_index != 0));
        assert_eq!(report.anova[0].1.v2, 6);
    }

    #[test]
    fn all_instances_missing_yields_empty_report() {
        let mut plan = tiny_plan(Algorithm::all_variants()[..2].to_vec());
        plan.instances = vec![InstanceSource::File(PathBuf::from("/nonexistent/y.wcnf"))];
        let report = run_experiment(&plan).unwrap();
        assert!(report.rows.is_empty() && report.runs.is_empty() && report.anova.is_empty());
        assert!(report.anova_note.is_some());
    }

    #[test]
    fn oversized_oracle_request_is_an_exclusion() {
        let mut plan = tiny_plan(Algorithm::all_variants()[..2].to_vec());
        plan.instances.push(InstanceSource::Generated {
            name: Some("big".into()),
            params: GeneratorParams {
                num_vars: 30,
                num_clauses: 10,
                clause_len: 3,
                weight_lo: 1,
                weight_hi: 2,
                seed: 1,
            },
            with_opt: true,
        });
        let report = run_experiment(&plan).unwrap();
        assert_eq!(report.exclusions.len(), 1);
        assert!(report.exclusions[0].reason.contains("at most 24"));
    }

    #[test]
    fn invalid_plans_are_rejected() {
        let mut plan = tiny_plan(vec![]);
        assert!(run_experiment(&plan).is_err());
        plan.algorithms = vec![Algorithm::new(TopologyKind::GlobalBest, false); 2];
        assert!(run_experiment(&plan).is_err());
    }
}
