//! Principal lattices on the unit simplex and their Lagrange bases.
//!
//! The degree-`ell` principal lattice of the simplex
//! `{x ∈ R^d : x_t ≥ 0, Σ x_t ≤ 1}` is the set of points whose barycentric
//! coordinates are integer multiples of `1/ell`. It carries `C(ell+d, ell)`
//! nodes, exactly the dimension of the polynomials of total degree at most
//! `ell`, and admits an explicit Lagrange basis: for a node `U` with integer
//! weights `s_t = ell·λ_t(U)`,
//!
//! ```text
//! p_U(x) = Π_{t: s_t > 0} Π_{r=0}^{s_t - 1} (ell·λ_t(x) - r) / (s_t - r)
//! ```
//!
//! Degree-`ell` interpolation through lattice values is exact and unique, so
//! the basis never has to be obtained by inverting a Vandermonde system. The
//! Vandermonde matrix is still exposed here because its smallest singular
//! value measures the conditioning of the node set, and a closed-form lower
//! bound for that singular value is available.
//!
//! Node weights are stored as exact integers, so sign tests like
//! `λ_t(U) > 0` never see rounding. Node order is frozen: graded
//! lexicographic on the weight tuple `(s_1, …, s_d)`, degree first, then
//! ascending lex. Serialized value tables depend on this order.

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

/// Default cap on the node count of a single lattice.
pub const DEFAULT_NODE_CAP: u128 = 1_000_000;

#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("dimension must be at least 1")]
    ZeroDim,
    #[error("lattice (ell={ell}, dim={dim}) has {size} nodes, cap is {cap}")]
    TooLarge {
        ell: u32,
        dim: usize,
        size: u128,
        cap: u128,
    },
    #[error("expected {expected} node values, got {got}")]
    ValueCount { expected: usize, got: usize },
    #[error("point has {got} coordinates, lattice dimension is {dim}")]
    DimMismatch { dim: usize, got: usize },
    #[error("SVD did not converge")]
    SvdNoConvergence,
}

/// Exponent tuple of a monomial `x^α = Π x_t^{α_t}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    exps: Vec<u32>,
}

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Self {
        MultiIndex { exps }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    /// Total degree `|α| = Σ α_t`.
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    /// `x^α`, with the convention `0^0 = 1`.
    pub fn monomial(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.exps.len());
        let mut p = 1.0;
        for (xi, &e) in x.iter().zip(&self.exps) {
            if e > 0 {
                p *= xi.powi(e as i32);
            }
        }
        p
    }

    /// `α! = Π α_t!`.
    pub fn factorial(&self) -> f64 {
        self.exps
            .iter()
            .map(|&e| (1..=u64::from(e)).map(|k| k as f64).product::<f64>())
            .product()
    }
}

/// All multi-indices with `|α| ≤ max_degree` in `dim` variables, in the
/// frozen canonical order: ascending total degree, then ascending
/// lexicographic within a degree.
pub fn multi_indices_up_to(max_degree: u32, dim: usize) -> Vec<MultiIndex> {
    assert!(dim >= 1, "dimension must be at least 1");
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(dim);
    for deg in 0..=max_degree {
        push_compositions(deg, dim, &mut prefix, &mut out);
    }
    out
}

fn push_compositions(total: u32, dim: usize, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if dim == 1 {
        prefix.push(total);
        out.push(MultiIndex::new(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in 0..=total {
        prefix.push(first);
        push_compositions(total - first, dim - 1, prefix, out);
        prefix.pop();
    }
}

/// `C(ell + dim, ell)`, the node count of the lattice, saturating at
/// `u128::MAX`.
pub fn lattice_size(ell: u32, dim: usize) -> u128 {
    // C(ell+d, d) = Π_{i=1..d} (ell+i)/i, exact at every step.
    let mut acc: u128 = 1;
    for i in 1..=(dim as u128) {
        match acc.checked_mul(u128::from(ell) + i) {
            Some(v) => acc = v / i,
            None => return u128::MAX,
        }
    }
    acc
}

/// Barycentric coordinates `(1 - Σ x_t, x_1, …, x_d)` of a point with
/// respect to the corner simplex of the unit cube.
pub fn barycentric(x: &[f64]) -> Vec<f64> {
    let mut lam = Vec::with_capacity(x.len() + 1);
    lam.push(1.0 - x.iter().sum::<f64>());
    lam.extend_from_slice(x);
    lam
}

/// Principal lattice of degree `ell` on the `dim`-simplex.
#[derive(Clone, Debug)]
pub struct PrincipalLattice {
    ell: u32,
    dim: usize,
    /// Node weights, `dim + 1` integers per node: `(s_0, s_1, …, s_d)` with
    /// `Σ s_t = ell`. Frozen canonical order (see module docs).
    weights: Vec<u32>,
}

impl PrincipalLattice {
    pub fn new(ell: u32, dim: usize) -> Result<Self, LatticeError> {
        Self::with_cap(ell, dim, DEFAULT_NODE_CAP)
    }

    pub fn with_cap(ell: u32, dim: usize, cap: u128) -> Result<Self, LatticeError> {
        if dim == 0 {
            return Err(LatticeError::ZeroDim);
        }
        let size = lattice_size(ell, dim);
        if size > cap {
            return Err(LatticeError::TooLarge {
                ell,
                dim,
                size,
                cap,
            });
        }
        // Nodes are in bijection with multi-indices of degree ≤ ell:
        // (s_1,…,s_d) = α and s_0 = ell - |α|, so both share one canonical
        // order.
        let mut weights = Vec::with_capacity(size as usize * (dim + 1));
        for mi in multi_indices_up_to(ell, dim) {
            weights.push(ell - mi.degree());
            weights.extend_from_slice(mi.exps());
        }
        Ok(PrincipalLattice { ell, dim, weights })
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of nodes `M = C(ell + dim, ell)`.
    pub fn len(&self) -> usize {
        self.weights.len() / (self.dim + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Integer weights `(s_0, …, s_d)` of node `i`.
    pub fn node_weights(&self, i: usize) -> &[u32] {
        let w = self.dim + 1;
        &self.weights[i * w..(i + 1) * w]
    }

    /// Cartesian coordinates `(s_1/ell, …, s_d/ell)` of node `i`. For
    /// `ell = 0` the single node is the origin.
    pub fn node_cartesian(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.node_cartesian_into(i, &mut out);
        out
    }

    pub fn node_cartesian_into(&self, i: usize, out: &mut [f64]) {
        assert_eq!(out.len(), self.dim);
        let w = self.node_weights(i);
        if self.ell == 0 {
            out.fill(0.0);
            return;
        }
        let ell = f64::from(self.ell);
        for (o, &s) in out.iter_mut().zip(&w[1..]) {
            *o = f64::from(s) / ell;
        }
    }

    /// Lagrange basis function of node `i` at `x`. Identically 1 for
    /// `ell = 0`. Defined on all of `R^d`; outside the simplex it is the
    /// polynomial continuation.
    pub fn basis_eval(&self, i: usize, x: &[f64]) -> f64 {
        assert_eq!(
            x.len(),
            self.dim,
            "point has {} coordinates, lattice dimension is {}",
            x.len(),
            self.dim
        );
        let lam0 = 1.0 - x.iter().sum::<f64>();
        self.basis_from_parts(self.node_weights(i), lam0, x)
    }

    #[inline]
    fn basis_from_parts(&self, w: &[u32], lam0: f64, x: &[f64]) -> f64 {
        let ell = f64::from(self.ell);
        let mut p = 1.0;
        for t in 0..=self.dim {
            let lam = if t == 0 { lam0 } else { x[t - 1] };
            let s = w[t];
            for r in 0..s {
                // (λ_t - r/ell) / (λ_t(U) - r/ell) with exact integer
                // numerator scaling: (ell·λ_t - r) / (s_t - r).
                p *= (ell * lam - f64::from(r)) / f64::from(s - r);
            }
        }
        p
    }

    /// Value at `x` of the unique degree-`ell` polynomial taking
    /// `values[i]` at node `i`.
    pub fn interpolate_eval(&self, values: &[f64], x: &[f64]) -> Result<f64, LatticeError> {
        if x.len() != self.dim {
            return Err(LatticeError::DimMismatch {
                dim: self.dim,
                got: x.len(),
            });
        }
        if values.len() != self.len() {
            return Err(LatticeError::ValueCount {
                expected: self.len(),
                got: values.len(),
            });
        }
        let lam0 = 1.0 - x.iter().sum::<f64>();
        let mut acc = 0.0;
        for (v, w) in values.iter().zip(self.weights.chunks_exact(self.dim + 1)) {
            acc += v * self.basis_from_parts(w, lam0, x);
        }
        Ok(acc)
    }

    /// Monomial exponents `|α| ≤ ell` in the canonical column order of
    /// [`Self::vandermonde`].
    pub fn monomials(&self) -> Vec<MultiIndex> {
        multi_indices_up_to(self.ell, self.dim)
    }

    /// The square matrix `V[k, a] = U_k^{α_a}` over the lattice nodes and
    /// canonical monomials. Used for conditioning diagnostics; interpolation
    /// never inverts it.
    pub fn vandermonde(&self) -> Vandermonde {
        let m = self.len();
        let monomials = self.monomials();
        let mut data = vec![0.0; m * m];
        let mut point = vec![0.0; self.dim];
        for k in 0..m {
            self.node_cartesian_into(k, &mut point);
            for (a, mono) in monomials.iter().enumerate() {
                data[k * m + a] = mono.monomial(&point);
            }
        }
        Vandermonde { size: m, data }
    }

    /// Estimate of `max_x Σ_i |p_i(x)|` over the unit cube (not just the
    /// simplex: piecewise use evaluates the basis on the whole cell), by
    /// sampling `samples` uniform points.
    pub fn lebesgue_estimate(&self, samples: usize, seed: u64) -> f64 {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut x = vec![0.0; self.dim];
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            for xi in x.iter_mut() {
                *xi = rng.random_range(0.0..1.0);
            }
            let lam0 = 1.0 - x.iter().sum::<f64>();
            let total: f64 = self
                .weights
                .chunks_exact(self.dim + 1)
                .map(|w| self.basis_from_parts(w, lam0, &x).abs())
                .sum();
            worst = worst.max(total);
        }
        worst
    }
}

/// Dense Vandermonde-type matrix of a principal lattice, row-major.
#[derive(Clone, Debug)]
pub struct Vandermonde {
    size: usize,
    data: Vec<f64>,
}

impl Vandermonde {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.size + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.size)
    }

    /// Smallest singular value, by dense SVD.
    pub fn min_singular_value(&self) -> Result<f64, LatticeError> {
        let m = nalgebra::DMatrix::from_row_slice(self.size, self.size, &self.data);
        let svd = nalgebra::linalg::SVD::try_new(m, false, false, 1.0e-12, 10_000)
            .ok_or(LatticeError::SvdNoConvergence)?;
        Ok(svd
            .singular_values
            .iter()
            .fold(f64::INFINITY, |a, &b| a.min(b)))
    }

    /// Solve `V s = y` by LU with partial pivoting. Diagnostic path only.
    pub fn solve(&self, y: &[f64]) -> Result<Vec<f64>, LatticeError> {
        if y.len() != self.size {
            return Err(LatticeError::ValueCount {
                expected: self.size,
                got: y.len(),
            });
        }
        let m = nalgebra::DMatrix::from_row_slice(self.size, self.size, &self.data);
        let rhs = nalgebra::DVector::from_column_slice(y);
        let sol = m.lu().solve(&rhs).ok_or(LatticeError::SvdNoConvergence)?;
        Ok(sol.iter().copied().collect())
    }
}

/// Closed-form lower bound for the smallest singular value of the lattice
/// Vandermonde matrix: `C(ell+d, ell)^{-3} · 4^{-ell} · ell^{-2ell}`, with
/// the convention 1 for `ell = 0` (where the matrix is the 1×1 identity).
pub fn sv_lower_bound(ell: u32, dim: usize) -> f64 {
    if ell == 0 {
        return 1.0;
    }
    let m = lattice_size(ell, dim) as f64;
    let ell_f = f64::from(ell);
    m.powi(-3) * 4.0_f64.powi(-(ell as i32)) * ell_f.powf(-2.0 * ell_f)
}
