//! Experiment batteries: every (function, variant, seed) cell is an
//! independent run. Cells run on a worker pool, results are reduced into a
//! [`ResultTable`] of mean, standard deviation, Cohen's d against a
//! reference variant, a win/tie/loss mark and the Friedman mean rank.
//!
//! Output layout of a battery directory:
//!
//! ```text
//! <out>/results.csv                           function,variant,mean,std,d,mark,rank
//! <out>/finals.csv                            one row per cell
//! <out>/traces/<function>_<variant>_<seed>.json   full RunResult
//! ```
//!
//! `shade-cc` runs plain SHADE round-robin over every subproblem, the
//! singletons included.

mod stats;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use stats::{average_ranks, cohens_d, friedman_ranks, mark, mean, std_dev, EFFECT_THRESHOLD};

use crate::benchmarks::{build_benchmark, BenchmarkId, DEFAULT_DIMENSION, DEFAULT_GROUP_SIZE};
use crate::cc::{run_variant, CcConfig, RunResult, Variant};
use crate::error::{CcError, Result};

/// Environment variable overriding the worker count.
pub const THREADS_ENV: &str = "CCOPT_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub functions: Vec<BenchmarkId>,
    pub variants: Vec<Variant>,
    pub runs: usize,
    pub dimension: usize,
    pub group_size: usize,
    /// Seed of the benchmark instances (shifts, permutations, rotations).
    pub benchmark_seed: u64,
    /// Run `r` uses seed `base_seed + r`.
    pub base_seed: u64,
    /// Variant the others are compared with; defaults to `asmcc` when
    /// present, else the last listed.
    pub reference: Option<Variant>,
    /// Algorithm parameters and the FE budget.
    pub algorithm: CcConfig,
    pub output_dir: PathBuf,
    pub threads: Option<usize>,
    pub write_traces: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            functions: BenchmarkId::ALL.to_vec(),
            variants: Variant::ALL.to_vec(),
            runs: 25,
            dimension: DEFAULT_DIMENSION,
            group_size: DEFAULT_GROUP_SIZE,
            benchmark_seed: 0,
            base_seed: 0,
            reference: None,
            algorithm: CcConfig::default(),
            output_dir: PathBuf::from("out"),
            threads: None,
            write_traces: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(CcError::InvalidConfig("runs must be >= 1".into()));
        }
        if self.functions.is_empty() || self.variants.is_empty() {
            return Err(CcError::InvalidConfig("need at least one function and one variant".into()));
        }
        if let Some(r) = self.reference {
            if !self.variants.contains(&r) {
                return Err(CcError::InvalidConfig(format!("reference {r} is not among the variants")));
            }
        }
        if self.threads == Some(0) {
            return Err(CcError::InvalidConfig("threads must be >= 1".into()));
        }
        self.algorithm.validate()
    }

    pub fn reference_variant(&self) -> Variant {
        default_reference(&self.variants, self.reference)
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.runs as u64).map(|r| self.base_seed + r)
    }
}

fn default_reference(variants: &[Variant], explicit: Option<Variant>) -> Variant {
    explicit.unwrap_or_else(|| {
        if variants.contains(&Variant::Asmcc) {
            Variant::Asmcc
        } else {
            *variants.last().expect("at least one variant")
        }
    })
}

/// Worker count: `CCOPT_THREADS`, then the configured value, then all cores.
pub fn worker_count(configured: Option<usize>) -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .or(configured)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Outcome of one (function, variant, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub function: String,
    pub variant: Variant,
    pub seed: u64,
    pub fitness: Option<f64>,
    pub fes_used: Option<u64>,
    pub error: Option<String>,
}

impl CellResult {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub function: String,
    pub variant: Variant,
    pub mean: f64,
    pub std: f64,
    /// Cohen's d of this variant against the reference.
    pub d: Option<f64>,
    pub mark: String,
    /// The variant's Friedman mean rank over all complete functions.
    pub rank: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn row(&self, function: &str, variant: Variant) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.function == function && r.variant == variant)
    }

    pub fn mean_rank(&self, variant: Variant) -> Option<f64> {
        self.rows.iter().find(|r| r.variant == variant).and_then(|r| r.rank)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        for r in &self.rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path)?;
        let rows = r.deserialize().collect::<std::result::Result<Vec<ResultRow>, _>>()?;
        Ok(Self { rows })
    }
}

fn first_seen<T: PartialEq + Clone>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for it in items {
        if !out.contains(&it) {
            out.push(it);
        }
    }
    out
}

/// Reduce cell results into a table. Failed cells are excluded; a function
/// or variant order follows first appearance in `cells`.
pub fn aggregate(cells: &[CellResult], reference: Variant) -> ResultTable {
    let functions = first_seen(cells.iter().map(|c| c.function.clone()));
    let variants = first_seen(cells.iter().map(|c| c.variant));
    let finals = |f: &str, v: Variant| -> Vec<f64> {
        cells
            .iter()
            .filter(|c| c.function == f && c.variant == v)
            .filter_map(|c| c.fitness)
            .collect()
    };

    let scores: Vec<Vec<Option<f64>>> = functions
        .iter()
        .map(|f| {
            variants
                .iter()
                .map(|&v| {
                    let xs = finals(f, v);
                    (!xs.is_empty()).then(|| mean(&xs))
                })
                .collect()
        })
        .collect();
    let ranks = friedman_ranks(&scores);

    let mut rows = Vec::new();
    for f in &functions {
        let reference_finals = finals(f, reference);
        for (vi, &v) in variants.iter().enumerate() {
            let xs = finals(f, v);
            if xs.is_empty() {
                continue;
            }
            let d = cohens_d(&xs, &reference_finals);
            rows.push(ResultRow {
                function: f.clone(),
                variant: v,
                mean: mean(&xs),
                std: std_dev(&xs),
                d,
                mark: mark(d.unwrap_or(f64::NAN)).to_string(),
                rank: ranks.as_ref().map(|r| r[vi]),
            });
        }
    }
    ResultTable { rows }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub cells: Vec<CellResult>,
    pub table: ResultTable,
}

impl ExperimentOutcome {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| c.failed()).count()
    }
}

pub fn trace_file_name(function: &str, variant: Variant, seed: u64) -> String {
    format!("{function}_{variant}_{seed}.json")
}

/// Run every cell of `config`, write all outputs under its output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate()?;
    let out = &config.output_dir;
    let traces = out.join("traces");
    fs::create_dir_all(if config.write_traces { &traces } else { out })?;

    let problems = config
        .functions
        .iter()
        .map(|&id| build_benchmark(id, config.dimension, config.group_size, config.benchmark_seed))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, Variant, u64)> = (0..problems.len())
        .flat_map(|fi| {
            config
                .variants
                .iter()
                .flat_map(move |&v| config.seeds().map(move |s| (fi, v, s)))
        })
        .collect();

    let threads = worker_count(config.threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CcError::InvalidConfig(format!("worker pool: {e}")))?;
    log::info!("{} cells on {threads} workers", jobs.len());

    let cells: Vec<CellResult> = pool.install(|| {
        jobs.par_iter()
            .map(|&(fi, variant, seed)| {
                let function = config.functions[fi].to_string();
                let outcome = run_variant(variant, &problems[fi], &config.algorithm, seed).and_then(|r| {
                    if config.write_traces {
                        fs::write(traces.join(trace_file_name(&function, variant, seed)), r.to_json()?)?;
                    }
                    Ok(r)
                });
                match outcome {
                    Ok(r) => {
                        log::info!("{function} {variant} seed {seed}: {:e}", r.f_star);
                        CellResult {
                            function,
                            variant,
                            seed,
                            fitness: Some(r.f_star),
                            fes_used: Some(r.fes_used),
                            error: None,
                        }
                    }
                    Err(e) => {
                        log::warn!("{function} {variant} seed {seed} failed: {e}");
                        CellResult {
                            function,
                            variant,
                            seed,
                            fitness: None,
                            fes_used: None,
                            error: Some(e.to_string()),
                        }
                    }
                }
            })
            .collect()
    });

    write_cells(&out.join("finals.csv"), &cells)?;
    let table = aggregate(&cells, config.reference_variant());
    table.write_csv(&out.join("results.csv"))?;
    Ok(ExperimentOutcome { cells, table })
}

/// Run one cell outside a battery.
pub fn run_one(id: BenchmarkId, variant: Variant, seed: u64, dimension: usize, group_size: usize, benchmark_seed: u64, algorithm: &CcConfig) -> Result<RunResult> {
    let problem = build_benchmark(id, dimension, group_size, benchmark_seed)?;
    run_variant(variant, &problem, algorithm, seed)
}

pub fn write_cells(path: &Path, cells: &[CellResult]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for c in cells {
        w.serialize(c)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cells(path: &Path) -> Result<Vec<CellResult>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<Vec<CellResult>, _>>()?)
}

/// Re-aggregate a battery directory from its `finals.csv` and rewrite
/// `results.csv`.
pub fn report(dir: &Path, reference: Option<Variant>) -> Result<(Vec<CellResult>, ResultTable)> {
    let cells = read_cells(&dir.join("finals.csv"))?;
    let variants = first_seen(cells.iter().map(|c| c.variant));
    if variants.is_empty() {
        return Err(CcError::InvalidConfig(format!("{} has no cells", dir.display())));
    }
    let table = aggregate(&cells, default_reference(&variants, reference));
    table.write_csv(&dir.join("results.csv"))?;
    Ok((cells, table))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cell(f: &str, v: Variant, seed: u64, x: f64) -> CellResult {
        CellResult {
            function: f.into(),
            variant: v,
            seed,
            fitness: Some(x),
            fes_used: Some(1),
            error: None,
        }
    }

    #[test]
    fn aggregate_one_row() {
        let cells: Vec<_> = [1.0, 2.0, 6.0].iter().enumerate().map(|(s, &x)| cell("F1", Variant::Asmcc, s as u64, x)).collect();
        let t = aggregate(&cells, Variant::Asmcc);
        assert_eq!(t.rows.len(), 1);
        assert_eq!(t.rows[0].mean, 3.0);
        assert_eq!(t.rows[0].d, Some(0.0));
        assert_eq!(t.rows[0].mark, "≈");
        assert_eq!(t.rows[0].rank, None);
    }

    #[test]
    fn failed_cells_are_excluded() {
        let mut cells = vec![
            cell("F1", Variant::PsCc, 0, 4.0),
            cell("F1", Variant::PsCc, 1, 6.0),
            cell("F1", Variant::Asmcc, 0, 1.0),
            cell("F1", Variant::Asmcc, 1, 1.0),
        ];
        cells.push(CellResult {
            fitness: None,
            fes_used: None,
            error: Some("boom".into()),
            ..cell("F1", Variant::Asmcc, 2, 0.0)
        });
        let t = aggregate(&cells, Variant::Asmcc);
        assert_eq!(t.row("F1", Variant::Asmcc).unwrap().mean, 1.0);
        let ps = t.row("F1", Variant::PsCc).unwrap();
        assert_eq!(ps.mark, "+");
        assert_eq!(ps.rank, Some(2.0));
        assert_eq!(t.mean_rank(Variant::Asmcc), Some(1.0));
    }

    #[test]
    fn default_reference_prefers_asmcc() {
        assert_eq!(default_reference(&[Variant::Asmcc, Variant::PsCc], None), Variant::Asmcc);
        assert_eq!(default_reference(&[Variant::ShadeCc, Variant::PsCc], None), Variant::PsCc);
    }
}
