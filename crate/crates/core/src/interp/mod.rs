//! Piecewise polynomial compilation of pointwise estimators.
//!
//! The unit cube is split into `m^d` congruent cells of side `h = 1/m`.
//! Each cell carries a shifted and rescaled copy of the principal lattice,
//! and stores the oracle's values at its lattice nodes. A query locates its
//! cell, maps to local coordinates `x = y·m - j`, and evaluates the unique
//! degree-`ell` interpolant through the stored values, directly from the
//! explicit Lagrange basis. Nothing is ever solved for: the Vandermonde
//! route exists only as a diagnostic.
//!
//! The number of cells per axis is tied to the oracle's sample count `n`
//! and smoothness `beta` by `m = ceil(n^{1/(2beta+d)})`, which balances the
//! interpolation bias against the oracle's own statistical error, so the
//! compiled surrogate keeps the estimator's accuracy while its query cost
//! no longer depends on `n`.
//!
//! Cells outside the simplex corner of the unit cell use the polynomial
//! continuation of the simplex interpolant; that is the intended behavior,
//! not an oversight, and its stability is covered by the Lebesgue-constant
//! diagnostics in [`crate::lattice`].

mod format;

pub use format::default_precision;

use rayon::prelude::*;
use thiserror::Error;

use crate::holder::HolderSpec;
use crate::lattice::{LatticeError, PrincipalLattice, DEFAULT_NODE_CAP};

/// Default cap on the total stored values `m^d · M` of one interpolant.
pub const DEFAULT_VALUE_CAP: u64 = 100_000_000;

/// Widest supported fixed-point fraction, in bits. Keeps quantized levels
/// exactly representable in both `i64` and `f64` for every in-range value.
pub const MAX_PRECISION: u32 = 44;

#[derive(Debug, Error)]
pub enum InterpError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("grid (m={m}, dim={dim}, ell={ell}) would hold {total} values, cap is {cap}")]
    TooManyValues {
        m: u64,
        dim: usize,
        ell: u32,
        total: u128,
        cap: u128,
    },
    #[error("cells per axis must be at least 1")]
    ZeroCells,
    #[error("bandwidth selection needs beta > 0, got {0}")]
    BadBeta(f64),
    #[error("build needs at least one sample behind the oracle")]
    ZeroSamples,
    #[error("coordinate {coord} on axis {axis} is outside the unit cube")]
    OutOfDomain { axis: usize, coord: f64 },
    #[error("oracle returned {value} at {point:?}")]
    OracleFailure { point: Vec<f64>, value: f64 },
    #[error("value {value} at mesh point {point:?} exceeds the representable range ±{bound}")]
    ValueOutOfRange {
        point: Vec<f64>,
        value: f64,
        bound: f64,
    },
    #[error("fixed-point precision {0} is outside 1..={MAX_PRECISION} bits")]
    BadPrecision(u32),
    #[error("expected {expected} values, got {got}")]
    WrongValueCount { expected: usize, got: usize },
    #[error("spec with beta={beta} implies degree {spec_ell}, geometry has degree {geom_ell}")]
    DegreeMismatch {
        beta: f64,
        spec_ell: u32,
        geom_ell: u32,
    },
    #[error("stored value at index {0} is not finite")]
    NonFiniteValue(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("not an interpolant file (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    BadVersion(u16),
    #[error("unsupported format flags {0:#06x}")]
    BadFlags(u16),
    #[error("invalid header: {0}")]
    BadHeader(String),
    #[error("payload checksum mismatch (stored {stored:#010x}, computed {computed:#010x})")]
    ChecksumMismatch { stored: u32, computed: u32 },
}

/// Cube partition plus the per-cell lattice.
#[derive(Clone, Debug)]
pub struct GridGeometry {
    dim: usize,
    cells_per_axis: usize,
    lattice: PrincipalLattice,
}

impl GridGeometry {
    pub fn new(dim: usize, cells_per_axis: usize, ell: u32) -> Result<Self, InterpError> {
        Self::with_caps(dim, cells_per_axis, ell, DEFAULT_NODE_CAP, DEFAULT_VALUE_CAP)
    }

    pub fn with_caps(
        dim: usize,
        cells_per_axis: usize,
        ell: u32,
        node_cap: u128,
        value_cap: u64,
    ) -> Result<Self, InterpError> {
        if cells_per_axis == 0 {
            return Err(InterpError::ZeroCells);
        }
        let lattice = PrincipalLattice::with_cap(ell, dim, node_cap)?;
        let mut total: u128 = lattice.len() as u128;
        for _ in 0..dim {
            total = total.saturating_mul(cells_per_axis as u128);
        }
        if total > u128::from(value_cap) {
            return Err(InterpError::TooManyValues {
                m: cells_per_axis as u64,
                dim,
                ell,
                total,
                cap: u128::from(value_cap),
            });
        }
        Ok(GridGeometry {
            dim,
            cells_per_axis,
            lattice,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells_per_axis(&self) -> usize {
        self.cells_per_axis
    }

    pub fn ell(&self) -> u32 {
        self.lattice.ell()
    }

    pub fn lattice(&self) -> &PrincipalLattice {
        &self.lattice
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.cells_per_axis as f64
    }

    pub fn num_cells(&self) -> usize {
        self.cells_per_axis.pow(self.dim as u32)
    }

    /// Stored values per interpolant: `m^d · M`. Equals the number of
    /// oracle calls a build performs.
    pub fn value_count(&self) -> usize {
        self.num_cells() * self.lattice.len()
    }

    /// Cell of `y`: per-axis `j_i = min(floor(y_i · m), m - 1)`, so cells
    /// are closed on the lower face and the rightmost cell is closed on
    /// both. Points outside the unit cube are rejected.
    pub fn cell_index(&self, y: &[f64]) -> Result<Vec<usize>, InterpError> {
        self.check_domain(y)?;
        let m = self.cells_per_axis;
        Ok(y.iter()
            .map(|&yi| ((yi * m as f64).floor() as usize).min(m - 1))
            .collect())
    }

    fn check_domain(&self, y: &[f64]) -> Result<(), InterpError> {
        assert_eq!(y.len(), self.dim, "query dimension mismatch");
        for (axis, &yi) in y.iter().enumerate() {
            if !(0.0..=1.0).contains(&yi) {
                return Err(InterpError::OutOfDomain { axis, coord: yi });
            }
        }
        Ok(())
    }

    /// Row-major linearization, last axis fastest.
    pub fn linear_cell(&self, j: &[usize]) -> usize {
        debug_assert_eq!(j.len(), self.dim);
        let m = self.cells_per_axis;
        j.iter().fold(0, |acc, &ji| {
            debug_assert!(ji < m);
            acc * m + ji
        })
    }

    /// Inverse of [`Self::linear_cell`].
    pub fn decode_cell(&self, mut linear: usize, j: &mut [usize]) {
        debug_assert_eq!(j.len(), self.dim);
        let m = self.cells_per_axis;
        for ji in j.iter_mut().rev() {
            *ji = linear % m;
            linear /= m;
        }
        debug_assert_eq!(linear, 0);
    }

    /// Global coordinates of lattice node `k` of cell `j`:
    /// `h · (U_k + j)` per axis.
    pub fn mesh_point(&self, j: &[usize], k: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.mesh_point_into(j, k, &mut out);
        out
    }

    pub fn mesh_point_into(&self, j: &[usize], k: usize, out: &mut [f64]) {
        self.lattice.node_cartesian_into(k, out);
        let h = self.cell_width();
        for (o, &ji) in out.iter_mut().zip(j) {
            *o = (*o + ji as f64) * h;
        }
    }
}

/// Cells per axis for `n` oracle samples at smoothness `beta`:
/// the smallest integer `m` with `m^{2beta+d} ≥ n`, so the cell width
/// `h = 1/m` sits just below `n^{-1/(2beta+d)}`.
pub fn choose_bandwidth(n: u64, beta: f64, dim: usize) -> Result<(usize, f64), InterpError> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(InterpError::BadBeta(beta));
    }
    if n == 0 {
        return Err(InterpError::ZeroSamples);
    }
    let exponent = 2.0 * beta + dim as f64;
    let x = (n as f64).powf(1.0 / exponent);
    // floor, then fix up against the exact inequality with a relative slack
    // that forgives powf rounding (n = 10^5, beta = 2, d = 1 must give
    // exactly 10, not 11).
    let mut m = x.floor().max(1.0);
    if m.powf(exponent) < n as f64 * (1.0 - 1e-9) {
        m += 1.0;
    }
    let m = m as usize;
    Ok((m, 1.0 / m as f64))
}

/// Where an interpolant's values came from. In-memory record only; the
/// serialized format carries just the reproducible fields.
#[derive(Clone, Debug, Default)]
pub struct Provenance {
    pub n: Option<u64>,
    pub source: String,
    pub built_at: Option<std::time::SystemTime>,
}

/// Build-time options.
#[derive(Clone, Debug)]
pub struct BuildConfig {
    /// Fixed-point fraction bits for quantized storage; `None` keeps full
    /// `f64` values.
    pub precision: Option<u32>,
    /// Evaluate cells concurrently. Requires nothing of the oracle beyond
    /// `Sync`; the stored values are identical either way.
    pub parallel: bool,
    /// Cap on `m^d · M`.
    pub value_cap: u64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            precision: None,
            parallel: true,
            value_cap: DEFAULT_VALUE_CAP,
        }
    }
}

/// A compiled piecewise polynomial surrogate.
#[derive(Clone, Debug)]
pub struct PiecewiseInterpolant {
    geometry: GridGeometry,
    spec: HolderSpec,
    precision: Option<u32>,
    /// Fixed-point range bound `B`; values must lie in `[-B, B]` when
    /// quantizing. Persisted, so round-trips are byte-identical.
    value_bound: f64,
    /// Cell-major, `value_count` entries: cell `c` owns
    /// `values[c·M .. (c+1)·M]` in lattice node order. Quantized
    /// interpolants store the dequantized levels, so queries agree with a
    /// serialized round-trip bit for bit.
    values: Vec<f64>,
    meta: Provenance,
}

impl PiecewiseInterpolant {
    /// Evaluate `oracle` at every mesh point and store (optionally
    /// quantized) values. `n` is the oracle's sample count, which fixes the
    /// cell width; it does not bound the number of oracle calls, which is
    /// exactly [`GridGeometry::value_count`].
    pub fn build<F>(
        oracle: F,
        n: u64,
        spec: HolderSpec,
        config: &BuildConfig,
    ) -> Result<Self, InterpError>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let (m, _h) = choose_bandwidth(n, spec.beta, spec.dim)?;
        let geometry =
            GridGeometry::with_caps(spec.dim, m, spec.ell(), DEFAULT_NODE_CAP, config.value_cap)?;
        if let Some(p) = config.precision {
            if !(1..=MAX_PRECISION).contains(&p) {
                return Err(InterpError::BadPrecision(p));
            }
        }
        let value_bound = spec.uniform_bound() + 1.0;
        let big_m = geometry.lattice().len();
        let dim = geometry.dim();
        let mut values = vec![0.0_f64; geometry.value_count()];

        let fill_cell = |scratch: &mut (Vec<usize>, Vec<f64>),
                         cell: usize,
                         chunk: &mut [f64]|
         -> Result<(), InterpError> {
            let (j, y) = scratch;
            geometry.decode_cell(cell, j);
            for (k, slot) in chunk.iter_mut().enumerate() {
                geometry.mesh_point_into(j, k, y);
                let v = oracle(y);
                if !v.is_finite() {
                    return Err(InterpError::OracleFailure {
                        point: y.clone(),
                        value: v,
                    });
                }
                *slot = match config.precision {
                    None => v,
                    Some(p) => format::quantize_checked(v, p, value_bound).map_err(|_| {
                        InterpError::ValueOutOfRange {
                            point: y.clone(),
                            value: v,
                            bound: value_bound,
                        }
                    })?,
                };
            }
            Ok(())
        };

        if config.parallel {
            values
                .par_chunks_mut(big_m)
                .enumerate()
                .try_for_each_init(
                    || (vec![0usize; dim], vec![0.0_f64; dim]),
                    |scratch, (cell, chunk)| fill_cell(scratch, cell, chunk),
                )?;
        } else {
            let mut scratch = (vec![0usize; dim], vec![0.0_f64; dim]);
            for (cell, chunk) in values.chunks_mut(big_m).enumerate() {
                fill_cell(&mut scratch, cell, chunk)?;
            }
        }

        Ok(PiecewiseInterpolant {
            geometry,
            spec,
            precision: config.precision,
            value_bound,
            values,
            meta: Provenance {
                n: Some(n),
                source: String::from("oracle"),
                built_at: Some(std::time::SystemTime::now()),
            },
        })
    }

    /// Assemble an interpolant from externally computed mesh values, in the
    /// canonical cell-major node order. Quantizes when `precision` is set.
    pub fn from_values(
        geometry: GridGeometry,
        spec: HolderSpec,
        precision: Option<u32>,
        mut values: Vec<f64>,
    ) -> Result<Self, InterpError> {
        if spec.dim != geometry.dim() {
            return Err(InterpError::BadHeader(format!(
                "spec dimension {} does not match geometry dimension {}",
                spec.dim,
                geometry.dim()
            )));
        }
        if spec.ell() != geometry.ell() {
            return Err(InterpError::DegreeMismatch {
                beta: spec.beta,
                spec_ell: spec.ell(),
                geom_ell: geometry.ell(),
            });
        }
        if values.len() != geometry.value_count() {
            return Err(InterpError::WrongValueCount {
                expected: geometry.value_count(),
                got: values.len(),
            });
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(InterpError::NonFiniteValue(bad));
        }
        let value_bound = spec.uniform_bound() + 1.0;
        if let Some(p) = precision {
            if !(1..=MAX_PRECISION).contains(&p) {
                return Err(InterpError::BadPrecision(p));
            }
            for (i, v) in values.iter_mut().enumerate() {
                *v = format::quantize_checked(*v, p, value_bound).map_err(|value| {
                    let mut j = vec![0usize; geometry.dim()];
                    geometry.decode_cell(i / geometry.lattice().len(), &mut j);
                    InterpError::ValueOutOfRange {
                        point: geometry.mesh_point(&j, i % geometry.lattice().len()),
                        value,
                        bound: value_bound,
                    }
                })?;
            }
        }
        Ok(PiecewiseInterpolant {
            geometry,
            spec,
            precision,
            value_bound,
            values,
            meta: Provenance::default(),
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn spec(&self) -> HolderSpec {
        self.spec
    }

    pub fn precision(&self) -> Option<u32> {
        self.precision
    }

    pub fn value_bound(&self) -> f64 {
        self.value_bound
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> &Provenance {
        &self.meta
    }

    pub fn set_source(&mut self, source: impl Into<String>) {
        self.meta.source = source.into();
    }

    /// Stored values, equal to the oracle calls made by [`Self::build`].
    pub fn value_count(&self) -> usize {
        self.values.len()
    }

    /// Evaluate at `y ∈ [0,1]^d`: locate the cell, rescale to local
    /// coordinates, evaluate the cell's lattice interpolant. Cost depends
    /// on `(ell, d)` only, never on the oracle's sample count.
    pub fn query(&self, y: &[f64]) -> Result<f64, InterpError> {
        self.geometry.check_domain(y)?;
        let m = self.geometry.cells_per_axis();
        let mf = m as f64;
        let mut linear = 0usize;
        let mut x = vec![0.0_f64; y.len()];
        for (xi, &yi) in x.iter_mut().zip(y) {
            let scaled = yi * mf;
            let j = (scaled.floor() as usize).min(m - 1);
            *xi = scaled - j as f64;
            linear = linear * m + j;
        }
        let big_m = self.geometry.lattice().len();
        let cell_values = &self.values[linear * big_m..(linear + 1) * big_m];
        Ok(self
            .geometry
            .lattice()
            .interpolate_eval(cell_values, &x)
            .expect("cell buffer matches lattice size"))
    }

    /// All mesh points with their stored values, in storage order.
    pub fn mesh_values(&self) -> impl Iterator<Item = (Vec<f64>, f64)> + '_ {
        let big_m = self.geometry.lattice().len();
        let mut j = vec![0usize; self.geometry.dim()];
        let mut cell = usize::MAX;
        self.values.iter().enumerate().map(move |(i, &v)| {
            let c = i / big_m;
            if c != cell {
                self.geometry.decode_cell(c, &mut j);
                cell = c;
            }
            (self.geometry.mesh_point(&j, i % big_m), v)
        })
    }

    /// Exact size in bytes of [`Self::serialize`]'s output.
    pub fn serialized_len(&self) -> u64 {
        format::serialized_len(self.values.len() as u64)
    }

    pub fn serialize<W: std::io::Write>(&self, w: &mut W) -> Result<(), InterpError> {
        format::write(self, w)
    }

    pub fn deserialize<R: std::io::Read>(r: &mut R) -> Result<Self, InterpError> {
        format::read(r)
    }

    pub(crate) fn parts(
        geometry: GridGeometry,
        spec: HolderSpec,
        precision: Option<u32>,
        value_bound: f64,
        values: Vec<f64>,
        meta: Provenance,
    ) -> Self {
        PiecewiseInterpolant {
            geometry,
            spec,
            precision,
            value_bound,
            values,
            meta,
        }
    }
}
