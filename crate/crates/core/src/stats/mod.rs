//! One-way ANOVA and the report arithmetic for result tables.

mod critical;

use thiserror::Error;

pub use critical::{f_critical, f_critical_conservative, ALPHA, DF_INFINITE};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("no F critical value tabulated for v1={v1} v2={} alpha={alpha}", fmt_df(*.v2))]
    Lookup { v1: usize, v2: usize, alpha: f64 },
}

fn fmt_df(v2: usize) -> String {
    if v2 == DF_INFINITE {
        "inf".into()
    } else {
        v2.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaResult {
    pub f_statistic: f64,
    pub v1: usize,
    pub v2: usize,
    pub ss_between: f64,
    pub ss_within: f64,
    pub group_means: Vec<f64>,
    pub f_critical: f64,
    pub significant: bool,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// One-way ANOVA with the verdict taken at α = 0.05.
///
/// `F = (SSB / (M − 1)) / (SSW / (N − M))`. With `SSW = 0`, `F` is `+∞` when
/// `SSB > 0` and `0` when both vanish.
pub fn anova_oneway<G: AsRef<[f64]>>(groups: &[G]) -> Result<AnovaResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::Argument(format!(
            "ANOVA needs at least 2 groups, got {}",
            groups.len()
        )));
    }
    if let Some((i, g)) = groups.iter().enumerate().find(|(_, g)| g.as_ref().len() < 2) {
        return Err(StatsError::Argument(format!(
            "group {i} has {} observations, need at least 2",
            g.as_ref().len()
        )));
    }
    if groups.iter().flat_map(|g| g.as_ref()).any(|x| !x.is_finite()) {
        return Err(StatsError::Argument("observations must be finite".into()));
    }

    let total: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    let grand_mean = groups.iter().flat_map(|g| g.as_ref()).sum::<f64>() / total as f64;
    let group_means: Vec<f64> = groups.iter().map(|g| mean(g.as_ref())).collect();
    let ss_between: f64 = groups
        .iter()
        .zip(&group_means)
        .map(|(g, m)| g.as_ref().len() as f64 * (m - grand_mean).powi(2))
        .sum();
    let ss_within: f64 = groups
        .iter()
        .zip(&group_means)
        .map(|(g, m)| g.as_ref().iter().map(|x| (x - m).powi(2)).sum::<f64>())
        .sum();

    let v1 = groups.len() - 1;
    let v2 = total - groups.len();
    let f_statistic = if ss_within > 0.0 {
        (ss_between / v1 as f64) / (ss_within / v2 as f64)
    } else if ss_between > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let f_critical = f_critical_conservative(v1, v2)?;
    Ok(AnovaResult {
        f_statistic,
        v1,
        v2,
        ss_between,
        ss_within,
        group_means,
        f_critical,
        significant: f_statistic > f_critical,
    })
}

/// An `(algorithm_a, algorithm_b)` pair and its test result.
pub type PairResult = ((String, String), AnovaResult);

/// One two-group ANOVA per unordered pair, in input order:
/// `(0,1), (0,2), …, (1,2), …`.
pub fn pairwise_anova(
    per_algorithm: &[(String, Vec<f64>)],
) -> Result<Vec<PairResult>, StatsError> {
    if let Some((_, first)) = per_algorithm.first() {
        if let Some((name, values)) = per_algorithm.iter().find(|(_, v)| v.len() != first.len()) {
            return Err(StatsError::Argument(format!(
                "{name} has {} observations, expected {}",
                values.len(),
                first.len()
            )));
        }
    }
    let mut out = Vec::new();
    for (i, (a, xs)) in per_algorithm.iter().enumerate() {
        for (b, ys) in &per_algorithm[i + 1..] {
            let result = anova_oneway(&[xs.as_slice(), ys.as_slice()])?;
            out.push(((a.clone(), b.clone()), result));
        }
    }
    Ok(out)
}

/// Rounds to `decimals` places, halves away from negative infinity.
pub fn round_half_up(x: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (x * scale + 0.5).floor() / scale
}

/// Arithmetic mean of run values.
pub fn average_runs(run_values: &[u64]) -> Result<f64, StatsError> {
    if run_values.is_empty() {
        return Err(StatsError::Argument("no run values to average".into()));
    }
    Ok(run_values.iter().map(|&v| v as f64).sum::<f64>() / run_values.len() as f64)
}

/// `100 · average / optimum`, rounded half-up to two decimals.
pub fn percent_of_optimum(average: f64, optimum: u64) -> Result<f64, StatsError> {
    if optimum == 0 {
        return Err(StatsError::Argument("optimum must be positive".into()));
    }
    Ok(round_half_up(100.0 * average / optimum as f64, 2))
}

/// One table row: an algorithm's runs on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmRuns {
    pub algorithm: String,
    pub dataset: String,
    pub run_values: Vec<u64>,
    pub average: f64,
    pub optimum: Option<u64>,
    pub percent: Option<f64>,
}

impl AlgorithmRuns {
    pub fn new(
        algorithm: impl Into<String>,
        dataset: impl Into<String>,
        run_values: Vec<u64>,
        optimum: Option<u64>,
    ) -> Result<Self, StatsError> {
        let average = average_runs(&run_values)?;
        let percent = match optimum {
            Some(opt) => Some(percent_of_optimum(average, opt)?),
            None => None,
        };
        Ok(Self {
            algorithm: algorithm.into(),
            dataset: dataset.into(),
            run_values,
            average,
            optimum,
            percent,
        })
    }
}
