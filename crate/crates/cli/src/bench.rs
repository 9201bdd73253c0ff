//! End-to-end benchmark: sample, estimate, compile, measure.
//!
//! One run covers a list of sample counts. For each count it draws fresh
//! samples per trial, fits the kernel estimator, compiles the surrogate,
//! and measures sup-norm errors of both against the known truth on a fixed
//! evaluation grid, plus build time, query times, and storage. Error
//! columns are means of per-trial sups; the log-log slope across sample
//! counts is fitted on the surrogate's error column.
//!
//! Determinism: trial RNG streams come from (seed, lane 1000 + n-index,
//! trial). Reruns with one config differ only in the wall-clock columns.

use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;

use plif::holder::SmoothFn;
use plif::interp::{BuildConfig, PiecewiseInterpolant};
use plif::kde::{rate_bandwidth, KdeModel, Kernel};
use plif::lattice::PrincipalLattice;
use plif::seed::stream_seed;

use crate::density::build_density;
use crate::{eval_grid, linear_fit, time_per_call_ns};

const BENCH_LANE_BASE: u64 = 1000;
const LEBESGUE_SAMPLES: usize = 50_000;
const LEBESGUE_SEED: u64 = 7;

#[derive(Clone, Debug, Serialize)]
pub struct BenchConfig {
    pub density: String,
    pub beta: f64,
    pub l: f64,
    pub dim: usize,
    pub n_list: Vec<u64>,
    pub trials: usize,
    pub seed: u64,
    /// Approximate evaluation grid size; exact size is reported.
    pub grid: usize,
    /// Restrict the grid to [h, 1-h]^d with h the estimator bandwidth,
    /// suppressing kernel boundary bias.
    pub interior_only: bool,
    pub precision: Option<u32>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            density: String::from("trig:a=0.5,k=1"),
            beta: 2.0,
            l: 40.0,
            dim: 1,
            n_list: (10..=16).map(|e| 1u64 << e).collect(),
            trials: 20,
            seed: 0,
            grid: 10_000,
            interior_only: false,
            precision: None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub n: u64,
    pub cells_per_axis: usize,
    pub nodes_per_cell: usize,
    pub oracle_calls: u64,
    pub serialized_bytes: u64,
    /// Mean over trials of the grid sup-error of the kernel estimator.
    pub err_kde: f64,
    /// Mean over trials of the grid sup-error of the compiled surrogate.
    pub err_interp: f64,
    /// Mean over trials of the grid sup-distance between the two.
    pub err_gap: f64,
    /// Worst disagreement between a query at a mesh point and the stored
    /// value, across all trials. Zero up to rounding by construction.
    pub mesh_max_dev: f64,
    pub build_ms: f64,
    pub kde_query_ns: f64,
    pub interp_query_ns: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub grid_points: usize,
    pub rows: Vec<BenchRow>,
    /// Fitted slope of log err_interp against log n.
    pub fitted_slope: f64,
    /// The theory's exponent: -beta/(2·beta + d).
    pub reference_slope: f64,
    /// Median over rows of err_interp / (sqrt(log n) · n^reference_slope):
    /// the constant in front of the rate, as measured.
    pub measured_constant: f64,
    /// Seeded estimate of the cell lattice's Lebesgue constant; multiplies
    /// mesh-value perturbations into query error.
    pub stability_constant: f64,
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    let density = build_density(&cfg.density, cfg.beta, cfg.l, cfg.dim)?;
    let spec = density.spec();
    let kernel = Kernel::for_order(spec.ell());
    let stability_constant = PrincipalLattice::new(spec.ell(), cfg.dim)?
        .lebesgue_estimate(LEBESGUE_SAMPLES, LEBESGUE_SEED);
    // Sequential builds keep the whole run on one thread, so the timing
    // columns are comparable across machines with different core counts.
    let build_cfg = BuildConfig {
        precision: cfg.precision,
        parallel: false,
        ..BuildConfig::default()
    };

    let mut rows = Vec::with_capacity(cfg.n_list.len());
    let mut grid_points = 0usize;
    for (ni, &n) in cfg.n_list.iter().enumerate() {
        let h_kde = rate_bandwidth(n as usize, spec.beta, cfg.dim);
        let margin = if cfg.interior_only { h_kde } else { 0.0 };
        anyhow::ensure!(margin < 0.5, "bandwidth {h_kde} leaves no interior");
        let grid = eval_grid(cfg.dim, cfg.grid, margin);
        grid_points = grid.len();
        let truth: Vec<f64> = grid.iter().map(|y| density.eval(y)).collect();

        let mut acc = RowAcc::default();
        for trial in 0..cfg.trials {
            let seed = stream_seed(cfg.seed, BENCH_LANE_BASE + ni as u64, trial as u64);
            let samples = density.sample(n as usize, seed);
            let kde = KdeModel::new(samples, cfg.dim, kernel.clone(), h_kde)
                .context("estimator construction")?;

            let t0 = Instant::now();
            let fi = PiecewiseInterpolant::build(|y| kde.eval(y), n, spec, &build_cfg)
                .context("surrogate build")?;
            acc.build_ms += t0.elapsed().as_secs_f64() * 1e3;

            let mut sup_kde = 0.0_f64;
            let mut sup_interp = 0.0_f64;
            let mut sup_gap = 0.0_f64;
            for (y, &f_true) in grid.iter().zip(&truth) {
                let f_hat = kde.eval(y);
                let f_tilde = fi.query(y)?;
                sup_kde = sup_kde.max((f_hat - f_true).abs());
                sup_interp = sup_interp.max((f_tilde - f_true).abs());
                sup_gap = sup_gap.max((f_tilde - f_hat).abs());
            }
            acc.err_kde += sup_kde;
            acc.err_interp += sup_interp;
            acc.err_gap += sup_gap;

            for (point, stored) in fi.mesh_values() {
                let dev = (fi.query(&point)? - stored).abs();
                acc.mesh_max_dev = acc.mesh_max_dev.max(dev);
            }

            let reps = grid.len().clamp(1, 500);
            let mut k = 0usize;
            acc.kde_query_ns += time_per_call_ns(reps, || {
                std::hint::black_box(kde.eval(&grid[k % grid.len()]));
                k += 1;
            });
            let mut q = 0usize;
            acc.interp_query_ns += time_per_call_ns(grid.len(), || {
                std::hint::black_box(fi.query(&grid[q % grid.len()]).unwrap());
                q += 1;
            });

            acc.cells_per_axis = fi.geometry().cells_per_axis();
            acc.nodes_per_cell = fi.geometry().lattice().len();
            acc.oracle_calls = fi.value_count() as u64;
            acc.serialized_bytes = fi.serialized_len();
        }
        rows.push(acc.into_row(n, cfg.trials));
    }

    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.err_interp.ln()))
        .collect();
    let (fitted_slope, _) = linear_fit(&pts);
    let reference_slope = -spec.beta / (2.0 * spec.beta + cfg.dim as f64);
    let mut constants: Vec<f64> = rows
        .iter()
        .map(|r| {
            let n = r.n as f64;
            r.err_interp / (n.ln().sqrt() * n.powf(reference_slope))
        })
        .collect();
    constants.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let measured_constant = constants[constants.len() / 2];

    Ok(BenchReport {
        config: cfg.clone(),
        grid_points,
        rows,
        fitted_slope,
        reference_slope,
        measured_constant,
        stability_constant,
    })
}

#[derive(Default)]
struct RowAcc {
    err_kde: f64,
    err_interp: f64,
    err_gap: f64,
    mesh_max_dev: f64,
    build_ms: f64,
    kde_query_ns: f64,
    interp_query_ns: f64,
    cells_per_axis: usize,
    nodes_per_cell: usize,
    oracle_calls: u64,
    serialized_bytes: u64,
}

impl RowAcc {
    fn into_row(self, n: u64, trials: usize) -> BenchRow {
        let t = trials as f64;
        BenchRow {
            n,
            cells_per_axis: self.cells_per_axis,
            nodes_per_cell: self.nodes_per_cell,
            oracle_calls: self.oracle_calls,
            serialized_bytes: self.serialized_bytes,
            err_kde: self.err_kde / t,
            err_interp: self.err_interp / t,
            err_gap: self.err_gap / t,
            mesh_max_dev: self.mesh_max_dev,
            build_ms: self.build_ms / t,
            kde_query_ns: self.kde_query_ns / t,
            interp_query_ns: self.interp_query_ns / t,
        }
    }
}

pub fn write_csv<W: std::io::Write>(report: &BenchReport, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in &report.rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}
