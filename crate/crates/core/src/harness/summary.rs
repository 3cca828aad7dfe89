//! Text tables and CSV output for an [`ExperimentReport`].
//!
//! Everything here is a pure function of the report body; timestamps only
//! appear in [`Summary::metadata_text`].

use std::fmt::Write as _;

use super::ExperimentReport;
use crate::stats::{round_half_up, AlgorithmRuns};

/// Rendered report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    /// One table per algorithm: dataset, runs, average, optimum, percent.
    pub tables_text: String,
    /// Pairwise verdict lines followed by a square F matrix.
    pub significance_text: String,
    pub metadata_text: String,
    /// One line per solver run.
    pub runs_csv: String,
    /// One line per algorithm × dataset.
    pub rows_csv: String,
    pub significance_csv: String,
}

/// `F` with four decimals; `inf` when the within-group variance vanished.
pub fn format_f(f: f64) -> String {
    if f.is_infinite() {
        "inf".into()
    } else {
        format!("{f:.4}")
    }
}

fn fmt2(x: f64) -> String {
    format!("{:.2}", round_half_up(x, 2))
}

fn percent_cell(row: &AlgorithmRuns) -> String {
    row.percent.map(fmt2).unwrap_or_else(|| "-".into())
}

fn optimum_cell(row: &AlgorithmRuns) -> String {
    row.optimum.map(|o| o.to_string()).unwrap_or_else(|| "-".into())
}

/// Left-aligns the first column and right-aligns the rest.
fn render_table(out: &mut String, cells: &[Vec<String>]) {
    let cols = cells.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| cells.iter().filter_map(|r| r.get(c)).map(String::len).max().unwrap_or(0))
        .collect();
    for row in cells {
        let mut line = String::new();
        for (c, cell) in row.iter().enumerate() {
            if c == 0 {
                let _ = write!(line, "{cell:<w$}", w = widths[0]);
            } else {
                let _ = write!(line, "  {cell:>w$}", w = widths[c]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
}

fn csv_string(records: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for rec in records {
        w.write_record(&rec).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flushing to memory")).expect("csv output is UTF-8")
}

pub fn summarize(report: &ExperimentReport) -> Summary {
    let runs_per_pair = report.metadata.runs_per_pair;

    let mut tables_text = String::new();
    for algorithm in &report.metadata.algorithms {
        let rows: Vec<&AlgorithmRuns> = report.rows.iter().filter(|r| &r.algorithm == algorithm).collect();
        if rows.is_empty() {
            continue;
        }
        let _ = writeln!(tables_text, "{algorithm}");
        let mut cells = Vec::with_capacity(rows.len() + 1);
        let mut header = vec!["Dataset".to_string()];
        header.extend((1..=runs_per_pair).map(|r| format!("Run {r}")));
        header.extend(["Average".into(), "Optimum".into(), "%".into()]);
        cells.push(header);
        for row in rows {
            let mut line = vec![row.dataset.clone()];
            line.extend(row.run_values.iter().map(u64::to_string));
            line.extend([fmt2(row.average), optimum_cell(row), percent_cell(row)]);
            cells.push(line);
        }
        render_table(&mut tables_text, &cells);
        tables_text.push('\n');
    }
    for ex in &report.exclusions {
        let _ = writeln!(tables_text, "excluded dataset {}: {}", ex.dataset, ex.reason);
    }

    let mut significance_text = String::new();
    if report.anova.is_empty() {
        let note = report.anova_note.as_deref().unwrap_or("no comparisons");
        let _ = writeln!(significance_text, "Significance matrix omitted: {note}");
    } else {
        let _ = writeln!(significance_text, "Pairwise one-way ANOVA (alpha = 0.05)");
        for ((a, b), r) in &report.anova {
            let _ = writeln!(
                significance_text,
                "{a} vs {b}: F={} v1={} v2={} Fcrit={:.2} {}",
                format_f(r.f_statistic),
                r.v1,
                r.v2,
                r.f_critical,
                if r.significant { "significant" } else { "not-significant" }
            );
        }
        significance_text.push('\n');
        let names = &report.metadata.algorithms;
        let lookup = |i: usize, j: usize| {
            let (x, y) = (&names[i.min(j)], &names[i.max(j)]);
            report
                .anova
                .iter()
                .find(|((a, b), _)| a == x && b == y)
                .map(|(_, r)| r)
        };
        let mut cells = vec![std::iter::once("F (* = significant)".to_string())
            .chain(names.iter().cloned())
            .collect::<Vec<_>>()];
        for i in 0..names.len() {
            let mut line = vec![names[i].clone()];
            for j in 0..names.len() {
                line.push(match (i == j, lookup(i, j)) {
                    (true, _) => "-".into(),
                    (false, Some(r)) => format!("{}{}", format_f(r.f_statistic), if r.significant { "*" } else { "" }),
                    (false, None) => "?".into(),
                });
            }
            cells.push(line);
        }
        render_table(&mut significance_text, &cells);
    }

    let m = &report.metadata;
    let mut metadata_text = String::new();
    let _ = writeln!(metadata_text, "base_seed: {}", m.base_seed);
    let _ = writeln!(metadata_text, "runs_per_pair: {}", m.runs_per_pair);
    let _ = writeln!(metadata_text, "algorithms: {}", m.algorithms.join(", "));
    let _ = writeln!(metadata_text, "datasets: {}", m.datasets.join(", "));
    let _ = writeln!(metadata_text, "swarm: {:?}", m.swarm);
    let _ = writeln!(metadata_text, "total runs: {}", report.runs.len());
    let _ = writeln!(metadata_text, "started_unix: {}", m.started_unix);
    let _ = writeln!(metadata_text, "finished_unix: {}", m.finished_unix);

    let runs_csv = csv_string(
        std::iter::once(
            ["algorithm", "dataset", "run", "seed", "best_fitness", "iterations", "converged"]
                .map(String::from)
                .to_vec(),
        )
        .chain(report.runs.iter().map(|r| {
            vec![
                r.algorithm.clone(),
                r.dataset.clone(),
                (r.run + 1).to_string(),
                r.seed.to_string(),
                r.best_fitness.to_string(),
                r.iterations.to_string(),
                r.converged.to_string(),
            ]
        })),
    );

    let mut rows_header = vec!["algorithm".to_string(), "dataset".to_string()];
    rows_header.extend((1..=runs_per_pair).map(|r| format!("run_{r}")));
    rows_header.extend(["average", "optimum", "percent"].map(String::from));
    let rows_csv = csv_string(std::iter::once(rows_header).chain(report.rows.iter().map(|row| {
        let mut rec = vec![row.algorithm.clone(), row.dataset.clone()];
        rec.extend(row.run_values.iter().map(u64::to_string));
        rec.push(fmt2(row.average));
        rec.push(row.optimum.map(|o| o.to_string()).unwrap_or_default());
        rec.push(row.percent.map(fmt2).unwrap_or_default());
        rec
    })));

    let significance_csv = csv_string(
        std::iter::once(
            ["algorithm_a", "algorithm_b", "f", "v1", "v2", "f_critical", "significant"]
                .map(String::from)
                .to_vec(),
        )
        .chain(report.anova.iter().map(|((a, b), r)| {
            vec![
                a.clone(),
                b.clone(),
                format_f(r.f_statistic),
                r.v1.to_string(),
                r.v2.to_string(),
                format!("{:.4}", r.f_critical),
                r.significant.to_string(),
            ]
        })),
    );

    Summary {
        tables_text,
        significance_text,
        metadata_text,
        runs_csv,
        rows_csv,
        significance_csv,
    }
}
