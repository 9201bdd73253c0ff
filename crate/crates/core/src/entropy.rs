//! Constructive covering nets for smoothness balls.
//!
//! A net element is described by quantized mesh values: lay down the same
//! cell-plus-lattice mesh the interpolants use, with the mesh width tied to
//! the target accuracy by `h^beta = delta`, then round each function value
//! at each mesh point to a multiple of `delta`. Two functions that round
//! identically have interpolants within a constant multiple of `delta` of
//! each other everywhere, so the assignment map together with a count of
//! reachable level vectors bounds the covering number.
//!
//! The net is never enumerated; it exists as the assignment function plus
//! the closed-form log of its size. Logarithms are base e.

use thiserror::Error;

use crate::holder::HolderSpec;
use crate::interp::{GridGeometry, InterpError};

#[derive(Debug, Error)]
pub enum EntropyError {
    #[error("target accuracy must satisfy 0 < delta <= 1, got {0}")]
    BadDelta(f64),
    #[error(transparent)]
    Grid(#[from] InterpError),
    #[error("evaluator returned {value} at {point:?}, beyond the class bound {bound}")]
    ValueExceedsBound {
        point: Vec<f64>,
        value: f64,
        bound: f64,
    },
    #[error("evaluator returned a non-finite value at {point:?}")]
    NonFiniteValue { point: Vec<f64> },
}

/// Mesh width for accuracy `delta`: `h = 1/k` for the smallest integer `k`
/// with `k^beta >= 1/delta`. The floor-then-fix form keeps integer powers
/// exact where `powf` alone would round past them.
fn cells_per_axis(delta: f64, beta: f64) -> usize {
    let target = 1.0 / delta;
    let x = target.powf(1.0 / beta);
    let mut k = x.floor().max(1.0);
    if k.powf(beta) < target * (1.0 - 1e-9) {
        k += 1.0;
    }
    k as usize
}

/// A covering net at accuracy `delta` for the ball described by `spec`.
#[derive(Clone, Debug)]
pub struct NetSpec {
    spec: HolderSpec,
    delta: f64,
    geometry: GridGeometry,
}

impl NetSpec {
    pub fn new(spec: HolderSpec, delta: f64) -> Result<Self, EntropyError> {
        if !(delta.is_finite() && delta > 0.0 && delta <= 1.0) {
            return Err(EntropyError::BadDelta(delta));
        }
        let m = cells_per_axis(delta, spec.beta);
        let geometry = GridGeometry::new(spec.dim, m, spec.ell())?;
        Ok(NetSpec {
            spec,
            delta,
            geometry,
        })
    }

    pub fn spec(&self) -> HolderSpec {
        self.spec
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// The mesh the net quantizes over; shared with the interpolants.
    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn mesh_width(&self) -> f64 {
        self.geometry.cell_width()
    }

    /// Values allowed at mesh points: `[-B, B]` with `B` the class's
    /// uniform bound.
    pub fn value_bound(&self) -> f64 {
        self.spec.uniform_bound()
    }

    /// Mesh points counted per cell: `M · (1/h)^d`. Points shared between
    /// neighboring cells count once per cell, matching the storage layout.
    pub fn mesh_point_count(&self) -> u64 {
        self.geometry.value_count() as u64
    }

    /// Natural log of the net size: mesh points times `log((2B+delta)/delta)`,
    /// the log-count of quantization levels available per point.
    pub fn log_size(&self) -> f64 {
        let b = self.value_bound();
        self.mesh_point_count() as f64 * ((2.0 * b + self.delta) / self.delta).ln()
    }

    /// Quantization levels of `f` at every mesh point, cell-major in node
    /// order: `round(f(U)/delta)` per point. Functions beyond the class
    /// bound are rejected rather than clamped, since such a value disproves
    /// the membership the net is predicated on.
    pub fn assign<F>(&self, f: F) -> Result<Vec<i64>, EntropyError>
    where
        F: Fn(&[f64]) -> f64,
    {
        let bound = self.value_bound();
        let mut out = Vec::with_capacity(self.geometry.value_count());
        let dim = self.geometry.dim();
        let big_m = self.geometry.lattice().len();
        let mut j = vec![0usize; dim];
        let mut y = vec![0.0_f64; dim];
        for cell in 0..self.geometry.num_cells() {
            self.geometry.decode_cell(cell, &mut j);
            for k in 0..big_m {
                self.geometry.mesh_point_into(&j, k, &mut y);
                let v = f(&y);
                if !v.is_finite() {
                    return Err(EntropyError::NonFiniteValue { point: y.clone() });
                }
                if v.abs() > bound {
                    return Err(EntropyError::ValueExceedsBound {
                        point: y.clone(),
                        value: v,
                        bound,
                    });
                }
                out.push((v / self.delta).round() as i64);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(beta: f64, l: f64, dim: usize) -> HolderSpec {
        HolderSpec::new(beta, l, dim).unwrap()
    }

    fn fit_slope(points: &[(f64, f64)]) -> f64 {
        let n = points.len() as f64;
        let sx: f64 = points.iter().map(|p| p.0).sum();
        let sy: f64 = points.iter().map(|p| p.1).sum();
        let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    }

    #[test]
    fn coarsest_net_log_size() {
        // delta=1, beta=1, d=1, L=1: one cell, one node, log(3).
        let ns = NetSpec::new(spec(1.0, 1.0, 1), 1.0).unwrap();
        assert_eq!(ns.mesh_point_count(), 1);
        assert_eq!(ns.mesh_width(), 1.0);
        assert!((ns.log_size() - 3.0_f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn delta_validation() {
        let s = spec(1.0, 1.0, 1);
        assert!(matches!(
            NetSpec::new(s, 0.0),
            Err(EntropyError::BadDelta(_))
        ));
        assert!(NetSpec::new(s, 1.5).is_err());
        assert!(NetSpec::new(s, -0.5).is_err());
        assert!(NetSpec::new(s, f64::NAN).is_err());
        assert!(NetSpec::new(s, 1.0).is_ok());
    }

    #[test]
    fn mesh_width_rounds_to_reciprocal_integers() {
        // beta=1: 1/h = 1/delta exactly at powers of two.
        for k in 1..=8 {
            let delta = 0.5_f64.powi(k);
            let ns = NetSpec::new(spec(1.0, 1.0, 1), delta).unwrap();
            assert_eq!(ns.mesh_point_count(), 1 << k);
        }
        // beta=3, delta=0.001: 0.001^{-1/3} must give 10 cells, not 11.
        let ns = NetSpec::new(spec(3.0, 1.0, 1), 0.001).unwrap();
        assert_eq!((1.0 / ns.mesh_width()).round() as u64, 10);
    }

    #[test]
    fn refining_delta_grows_the_net() {
        let s = spec(1.0, 1.0, 1);
        let mut prev_points = 0;
        let mut prev_log = 0.0;
        for k in 1..=8 {
            let ns = NetSpec::new(s, 0.5_f64.powi(k)).unwrap();
            let points = ns.mesh_point_count();
            let log = ns.log_size();
            if k > 1 {
                assert_eq!(points, prev_points * 2);
                assert!(log > prev_log);
            }
            prev_points = points;
            prev_log = log;
        }
    }

    #[test]
    fn zero_function_gets_zero_levels() {
        let ns = NetSpec::new(spec(2.0, 3.0, 2), 0.125).unwrap();
        let levels = ns.assign(|_| 0.0).unwrap();
        assert_eq!(levels.len(), ns.mesh_point_count() as usize);
        assert!(levels.iter().all(|&l| l == 0));
    }

    #[test]
    fn small_shifts_stay_adjacent() {
        let ns = NetSpec::new(spec(2.0, 3.0, 1), 0.125).unwrap();
        let d = ns.delta();
        let base = |y: &[f64]| 0.9 + 0.3 * (2.0 * y[0] - 1.0);
        let a = ns.assign(base).unwrap();
        let b = ns.assign(|y| base(y) + d / 3.0).unwrap();
        for (la, lb) in a.iter().zip(&b) {
            assert!((la - lb).abs() <= 1);
        }
    }

    #[test]
    fn separated_functions_get_distinct_assignments() {
        let ns = NetSpec::new(spec(2.0, 40.0, 1), 0.0625).unwrap();
        let a = ns.assign(|y| 1.0 + 0.5 * (std::f64::consts::TAU * y[0]).sin());
        let b = ns.assign(|_| 1.0);
        assert_ne!(a.unwrap(), b.unwrap());
    }

    #[test]
    fn out_of_class_evaluator_rejected() {
        let ns = NetSpec::new(spec(1.0, 1.0, 1), 0.25).unwrap();
        // B = 1 for this spec; 1.2 falsifies membership.
        let err = ns.assign(|_| 1.2).unwrap_err();
        assert!(matches!(err, EntropyError::ValueExceedsBound { .. }));
        assert!(matches!(
            ns.assign(|_| f64::NAN).unwrap_err(),
            EntropyError::NonFiniteValue { .. }
        ));
    }

    #[test]
    fn log_size_slope_tracks_dim_over_beta() {
        // Slope of log(log_size) against log(1/delta). The scale L=25
        // keeps the level-count term's logarithmic drift small next to
        // the mesh-count power law at desk-scale deltas.
        for (beta, dim) in [(1.0, 1), (2.0, 1), (1.0, 2)] {
            let s = spec(beta, 25.0, dim);
            let pts: Vec<(f64, f64)> = (3..=8)
                .map(|k| {
                    let delta = 0.5_f64.powi(k);
                    let ns = NetSpec::new(s, delta).unwrap();
                    ((1.0 / delta).ln(), ns.log_size().ln())
                })
                .collect();
            let slope = fit_slope(&pts);
            let want = dim as f64 / beta;
            assert!(
                (slope - want).abs() <= 0.2,
                "beta={beta} d={dim}: slope {slope} vs {want}"
            );
        }
    }
}
