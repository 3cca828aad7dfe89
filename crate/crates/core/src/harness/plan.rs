//! Plan files.
//!
//! A plan is a TOML document:
//!
//! ```toml
//! base_seed = 7            # required
//! runs_per_pair = 3        # default 3
//! workers = 4              # default: available parallelism
//! algorithms = ["gbest", "gbest-gc", "lbest", "lbest-gc",
//!               "grid", "grid-gc", "hierarchy", "hierarchy-gc"]   # default: all eight
//!
//! [swarm]                  # optional overrides of the solver defaults
//! swarm_size = 30
//! stagnation_window = 1500
//!
//! [[instance]]             # a WCNF file, relative to the plan's directory
//! path = "data/a.wcnf"
//!
//! [[instance]]             # or a generated instance
//! name = "rand-1"          # optional label
//! vars = 16
//! clauses = 100
//! len = 3
//! wmin = 1
//! wmax = 100
//! seed = 1
//! with_opt = true          # attach the exhaustive optimum
//! ```
//!
//! Accepted `[swarm]` keys: `swarm_size`, `v_max`, `v_min`, `w_start`,
//! `w_decrement`, `w_floor`, `c1`, `c2`, `stagnation_window`,
//! `max_iterations`, `gc_rho0`, `gc_success_threshold`,
//! `gc_failure_threshold`, `grid_rows`, `grid_cols`, `start_degree`,
//! `min_degree`, `adapt_interval`. Unknown keys are errors.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{Algorithm, ExperimentPlan, HarnessError, InstanceSource};
use crate::bpso::SwarmConfig;
use crate::wcnf::GeneratorParams;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    base_seed: u64,
    runs_per_pair: Option<usize>,
    workers: Option<usize>,
    algorithms: Option<Vec<String>>,
    #[serde(default)]
    swarm: SwarmOverrides,
    #[serde(default)]
    instance: Vec<InstanceEntry>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SwarmOverrides {
    swarm_size: Option<usize>,
    v_max: Option<f64>,
    v_min: Option<f64>,
    w_start: Option<f64>,
    w_decrement: Option<f64>,
    w_floor: Option<f64>,
    c1: Option<f64>,
    c2: Option<f64>,
    stagnation_window: Option<usize>,
    max_iterations: Option<usize>,
    gc_rho0: Option<f64>,
    gc_success_threshold: Option<usize>,
    gc_failure_threshold: Option<usize>,
    grid_rows: Option<usize>,
    grid_cols: Option<usize>,
    start_degree: Option<usize>,
    min_degree: Option<usize>,
    adapt_interval: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceEntry {
    path: Option<PathBuf>,
    name: Option<String>,
    vars: Option<usize>,
    clauses: Option<usize>,
    len: Option<usize>,
    wmin: Option<u64>,
    wmax: Option<u64>,
    seed: Option<u64>,
    #[serde(default)]
    with_opt: bool,
}

macro_rules! apply {
    ($target:expr, $src:expr, $($field:ident),+) => {
        $(if let Some(v) = $src.$field { $target.$field = v; })+
    };
}

impl SwarmOverrides {
    fn apply(&self, config: &mut SwarmConfig) -> Result<(), HarnessError> {
        apply!(
            config, self, swarm_size, v_max, v_min, w_start, w_decrement, w_floor, c1, c2,
            stagnation_window, max_iterations, gc_rho0, gc_success_threshold,
            gc_failure_threshold
        );
        let t = &mut config.topology;
        apply!(t, self, start_degree, min_degree, adapt_interval);
        match (self.grid_rows, self.grid_cols) {
            (Some(r), Some(c)) => t.grid_shape = Some((r, c)),
            (None, None) => {}
            _ => return Err(HarnessError::Plan("grid_rows and grid_cols go together".into())),
        }
        Ok(())
    }
}

impl InstanceEntry {
    fn into_source(self, base_dir: &Path, index: usize) -> Result<InstanceSource, HarnessError> {
        let generator = [
            self.vars.is_some(),
            self.clauses.is_some(),
            self.len.is_some(),
            self.wmin.is_some(),
            self.wmax.is_some(),
            self.seed.is_some(),
        ];
        match self.path {
            Some(path) => {
                if generator.iter().any(|&g| g) || self.with_opt {
                    return Err(HarnessError::Plan(format!(
                        "instance {index}: `path` cannot be combined with generator keys"
                    )));
                }
                Ok(InstanceSource::File(base_dir.join(path)))
            }
            None => {
                let (Some(vars), Some(clauses), Some(len), Some(wmin), Some(wmax), Some(seed)) =
                    (self.vars, self.clauses, self.len, self.wmin, self.wmax, self.seed)
                else {
                    return Err(HarnessError::Plan(format!(
                        "instance {index}: give either `path` or all of vars, clauses, len, wmin, wmax, seed"
                    )));
                };
                Ok(InstanceSource::Generated {
                    name: self.name,
                    params: GeneratorParams {
                        num_vars: vars,
                        num_clauses: clauses,
                        clause_len: len,
                        weight_lo: wmin,
                        weight_hi: wmax,
                        seed,
                    },
                    with_opt: self.with_opt,
                })
            }
        }
    }
}

/// Parses plan text; relative instance paths resolve against `base_dir`.
pub fn parse_plan(text: &str, base_dir: &Path) -> Result<ExperimentPlan, HarnessError> {
    let file: PlanFile = toml::from_str(text).map_err(|e| HarnessError::Plan(e.to_string()))?;

    let mut swarm = SwarmConfig::default();
    file.swarm.apply(&mut swarm)?;

    let algorithms = match file.algorithms {
        Some(names) => names
            .iter()
            .map(|n| n.parse::<Algorithm>())
            .collect::<Result<Vec<_>, _>>()?,
        None => Algorithm::all_variants().to_vec(),
    };
    let instances = file
        .instance
        .into_iter()
        .enumerate()
        .map(|(i, e)| e.into_source(base_dir, i))
        .collect::<Result<Vec<_>, _>>()?;

    let plan = ExperimentPlan {
        instances,
        algorithms,
        runs_per_pair: file.runs_per_pair.unwrap_or(3),
        base_seed: file.base_seed,
        swarm,
        workers: file.workers,
    };
    plan.validate()?;
    Ok(plan)
}

/// Reads and parses a plan file.
pub fn load_plan(path: &Path) -> Result<ExperimentPlan, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Plan(format!("{}: {e}", path.display())))?;
    parse_plan(&text, path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::TopologyKind;

    const DESK: &str = r#"
base_seed = 7
workers = 2

[swarm]
stagnation_window = 200
grid_rows = 5
grid_cols = 6

[[instance]]
path = "a.wcnf"

[[instance]]
name = "g"
vars = 16
clauses = 100
len = 3
wmin = 1
wmax = 100
seed = 1
with_opt = true
"#;

    #[test]
    fn parses_full_plan() {
        let plan = parse_plan(DESK, Path::new("/data")).unwrap();
        assert_eq!(plan.base_seed, 7);
        assert_eq!(plan.runs_per_pair, 3);
        assert_eq!(plan.workers, Some(2));
        assert_eq!(plan.algorithms.len(), 8);
        assert_eq!(plan.swarm.stagnation_window, 200);
        assert_eq!(plan.swarm.swarm_size, 30);
        assert_eq!(plan.swarm.topology.grid_shape, Some((5, 6)));
        assert_eq!(plan.instances[0], InstanceSource::File(PathBuf::from("/data/a.wcnf")));
        match &plan.instances[1] {
            InstanceSource::Generated { name, params, with_opt } => {
                assert_eq!(name.as_deref(), Some("g"));
                assert_eq!(params.num_vars, 16);
                assert!(with_opt);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn algorithm_list_is_respected() {
        let plan = parse_plan(
            "base_seed = 1\nalgorithms = [\"lbest-gc\", \"hierarchy\"]\n[[instance]]\npath = \"x\"\n",
            Path::new("."),
        )
        .unwrap();
        assert_eq!(
            plan.algorithms,
            vec![
                Algorithm { topology: TopologyKind::LocalBestRing, gc: true },
                Algorithm { topology: TopologyKind::AdaptiveHierarchy, gc: false },
            ]
        );
    }

    #[test]
    fn rejects_bad_plans() {
        for text in [
            "runs_per_pair = 3\n[[instance]]\npath = \"x\"\n",               // no seed
            "base_seed = 1\n",                                                // no instances
            "base_seed = 1\nbogus = 2\n[[instance]]\npath = \"x\"\n",         // unknown key
            "base_seed = 1\nalgorithms = [\"star\"]\n[[instance]]\npath = \"x\"\n",
            "base_seed = 1\nalgorithms = [\"gbest\", \"gbest\"]\n[[instance]]\npath = \"x\"\n",
            "base_seed = 1\nruns_per_pair = 0\n[[instance]]\npath = \"x\"\n",
            "base_seed = 1\n[[instance]]\nvars = 3\n",                        // partial generator
            "base_seed = 1\n[[instance]]\npath = \"x\"\nvars = 3\n",          // mixed
            "base_seed = 1\n[swarm]\ngrid_rows = 5\n[[instance]]\npath = \"x\"\n",
            "base_seed = 1\n[swarm]\nswarm_size = 1\n[[instance]]\npath = \"x\"\n",
            "base_seed = [",
        ] {
            assert!(matches!(parse_plan(text, Path::new(".")), Err(HarnessError::Plan(_))), "{text}");
        }
    }
}
