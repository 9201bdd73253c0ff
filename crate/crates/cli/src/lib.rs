//! Experiment harness behind the `plif` binary.
//!
//! Everything here is deterministic given a master seed: per-trial RNG
//! streams are derived with [`plif::seed::stream_seed`] from (seed, lane,
//! index), where the lane encodes the experiment stage and the index the
//! trial. Reports are plain data, serialized to CSV for tables and JSON
//! for metadata; wall-clock fields are the only nondeterministic columns.

pub mod bench;
pub mod density;

use anyhow::{bail, Context, Result};
use plif::entropy::NetSpec;
use plif::holder::HolderSpec;
use serde::Serialize;

/// Least-squares line through `(x, y)` points; returns (slope, intercept).
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    assert!(points.len() >= 2, "need at least two points to fit");
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    (slope, (sy - slope * sx) / n)
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyRow {
    pub delta: f64,
    pub mesh_points: u64,
    pub log_net_size: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyReport {
    pub beta: f64,
    pub l: f64,
    pub dim: usize,
    pub rows: Vec<EntropyRow>,
    /// Fitted slope of log(log-net-size) against log(1/delta).
    pub fitted_slope: f64,
    /// The capacity theory's power: d/beta.
    pub reference_slope: f64,
}

/// Net sizes across an accuracy sweep, plus the fitted growth exponent.
pub fn entropy_sweep(spec: HolderSpec, deltas: &[f64]) -> Result<EntropyReport> {
    if deltas.len() < 2 {
        bail!("need at least two delta values to fit a slope");
    }
    let mut rows = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let ns = NetSpec::new(spec, delta)
            .with_context(|| format!("net construction at delta = {delta}"))?;
        rows.push(EntropyRow {
            delta,
            mesh_points: ns.mesh_point_count(),
            log_net_size: ns.log_size(),
        });
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((1.0 / r.delta).ln(), r.log_net_size.ln()))
        .collect();
    let (fitted_slope, _) = linear_fit(&pts);
    Ok(EntropyReport {
        beta: spec.beta,
        l: spec.l,
        dim: spec.dim,
        rows,
        fitted_slope,
        reference_slope: spec.dim as f64 / spec.beta,
    })
}

/// Mean nanoseconds per call of `f` over `reps` calls.
pub fn time_per_call_ns<F: FnMut()>(reps: usize, mut f: F) -> f64 {
    assert!(reps > 0);
    let t0 = std::time::Instant::now();
    for _ in 0..reps {
        f();
    }
    t0.elapsed().as_nanos() as f64 / reps as f64
}

/// Uniform evaluation grid with roughly `total` points: a line for d = 1,
/// a side^d lattice otherwise, inset by `margin` on every axis.
pub fn eval_grid(dim: usize, total: usize, margin: f64) -> Vec<Vec<f64>> {
    assert!(dim >= 1 && total >= 2);
    assert!((0.0..0.5).contains(&margin));
    let side = if dim == 1 {
        total
    } else {
        (total as f64).powf(1.0 / dim as f64).floor().max(2.0) as usize
    };
    let coord = |i: usize| margin + (1.0 - 2.0 * margin) * i as f64 / (side - 1) as f64;
    let mut out = Vec::with_capacity(side.pow(dim as u32));
    let mut idx = vec![0usize; dim];
    loop {
        out.push(idx.iter().map(|&i| coord(i)).collect());
        let mut axis = dim;
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < side {
                break;
            }
            idx[axis] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_exact_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 - 0.4 * i as f64)).collect();
        let (slope, intercept) = linear_fit(&pts);
        assert!((slope + 0.4).abs() < 1e-12);
        assert!((intercept - 3.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_sweep_matches_direct_formula() {
        let spec = HolderSpec::new(1.0, 1.0, 1).unwrap();
        let report = entropy_sweep(spec, &[1.0, 0.5]).unwrap();
        assert!((report.rows[0].log_net_size - 3.0_f64.ln()).abs() < 1e-12);
        assert_eq!(report.rows[0].mesh_points, 1);
        assert!(report.rows[1].log_net_size > report.rows[0].log_net_size);
    }

    #[test]
    fn grids_have_expected_shape() {
        let g1 = eval_grid(1, 101, 0.0);
        assert_eq!(g1.len(), 101);
        assert_eq!(g1[0], vec![0.0]);
        assert_eq!(g1[100], vec![1.0]);

        let g2 = eval_grid(2, 10_000, 0.1);
        assert_eq!(g2.len(), 100 * 100);
        assert!(g2.iter().flatten().all(|&c| (0.1..=0.9).contains(&c)));
        // Last axis varies fastest.
        assert_eq!(g2[1][0], g2[0][0]);
        assert!(g2[1][1] > g2[0][1]);
    }
}
