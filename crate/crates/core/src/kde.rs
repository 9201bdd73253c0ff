//! Kernel density estimation with higher-order product kernels.
//!
//! This is the deliberately plain baseline estimator: evaluation scans every
//! sample, costing Θ(n·d) per query with no precomputation, trees, binning,
//! or other shortcuts. Its whole purpose in this crate is to be the slow
//! oracle that interpolant compilation reads from, and the honest yardstick
//! in the timing experiments; making it clever would invalidate both.
//!
//! Kernels have a polynomial profile supported on `[-1, 1]`, applied per
//! axis (product form). A kernel of order `ell` has `∫K = 1` and vanishing
//! moments `∫u^j K = 0` for `1 ≤ j ≤ ell`. Orders 0 and 1 use the
//! Epanechnikov profile; higher orders are built from orthonormal Legendre
//! polynomials: `K(u) = Σ_{m ≤ ell} φ_m(0) φ_m(u)` with
//! `φ_m = sqrt((2m+1)/2) P_m`, whose moments against `u^j` telescope to
//! `0^j` for `j ≤ ell`.

use std::path::Path;

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::holder::{SmoothFn, SyntheticDensity};
use crate::seed::stream_seed;

#[derive(Debug, Error)]
pub enum KdeError {
    #[error("bandwidth must be finite and positive, got {0}")]
    BadBandwidth(f64),
    #[error("dimension must be at least 1")]
    ZeroDim,
    #[error("sample buffer length {len} is not a multiple of dim {dim}")]
    RaggedSamples { len: usize, dim: usize },
    #[error("no samples")]
    Empty,
    #[error("sample {index} has a non-finite coordinate")]
    NonFiniteSample { index: usize },
    #[error("tail check needs at least 100 trials, got {0}")]
    TooFewTrials(usize),
    #[error("interior region [h, 1-h]^d is empty at bandwidth {0}")]
    InteriorEmpty(f64),
    #[error("reading {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
    #[error("{path}:{line}: cannot parse '{value}' as a float")]
    BadField {
        path: String,
        line: usize,
        value: String,
    },
    #[error("{path}:{line}: row has {got} columns, expected {want}")]
    BadWidth {
        path: String,
        line: usize,
        got: usize,
        want: usize,
    },
}

/// Symmetric polynomial kernel profile on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    order: u32,
    /// Monomial coefficients of the profile, ascending degree.
    coeffs: Vec<f64>,
}

impl Kernel {
    /// `3/4 (1 - u²)` on `[-1, 1]`: nonnegative, order 1.
    pub fn epanechnikov() -> Kernel {
        Kernel {
            order: 1,
            coeffs: vec![0.75, 0.0, -0.75],
        }
    }

    /// Order-`order` kernel from orthonormal Legendre polynomials. Takes
    /// negative values for `order ≥ 2`, as any such kernel must.
    pub fn legendre(order: u32) -> Kernel {
        let deg = order as usize;
        let mut polys: Vec<Vec<f64>> = Vec::with_capacity(deg + 1);
        polys.push(vec![1.0]);
        if deg >= 1 {
            polys.push(vec![0.0, 1.0]);
        }
        for m in 2..=deg {
            // m·P_m = (2m-1)·u·P_{m-1} - (m-1)·P_{m-2}
            let mut next = vec![0.0; m + 1];
            for (i, &c) in polys[m - 1].iter().enumerate() {
                next[i + 1] += (2 * m - 1) as f64 * c;
            }
            for (i, &c) in polys[m - 2].iter().enumerate() {
                next[i] -= (m - 1) as f64 * c;
            }
            for c in next.iter_mut() {
                *c /= m as f64;
            }
            polys.push(next);
        }
        let mut coeffs = vec![0.0; deg + 1];
        for (m, p) in polys.iter().enumerate() {
            let at_zero = p[0];
            if at_zero == 0.0 {
                continue;
            }
            let w = (2 * m + 1) as f64 / 2.0 * at_zero;
            for (c, &pc) in coeffs.iter_mut().zip(p) {
                *c += w * pc;
            }
        }
        Kernel {
            order,
            coeffs,
        }
    }

    /// Epanechnikov for orders 0 and 1 (where it qualifies), the Legendre
    /// construction above that.
    pub fn for_order(order: u32) -> Kernel {
        if order <= 1 {
            Kernel::epanechnikov()
        } else {
            Kernel::legendre(order)
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn profile_coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// One-dimensional profile; zero outside `[-1, 1]`.
    #[inline]
    pub fn eval1(&self, u: f64) -> f64 {
        if !(-1.0..=1.0).contains(&u) {
            return 0.0;
        }
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * u + c;
        }
        acc
    }

    /// Product kernel `Π K(u_i)`.
    pub fn eval(&self, u: &[f64]) -> f64 {
        u.iter().map(|&ui| self.eval1(ui)).product()
    }
}

/// Rate-optimal bandwidth `n^{-1/(2·beta + d)}`.
pub fn rate_bandwidth(n: usize, beta: f64, dim: usize) -> f64 {
    (n as f64).powf(-1.0 / (2.0 * beta + dim as f64))
}

/// Plain kernel density estimator over a flat row-major sample buffer.
#[derive(Clone, Debug)]
pub struct KdeModel {
    dim: usize,
    bandwidth: f64,
    kernel: Kernel,
    samples: Vec<f64>,
}

impl KdeModel {
    pub fn new(
        samples: Vec<f64>,
        dim: usize,
        kernel: Kernel,
        bandwidth: f64,
    ) -> Result<Self, KdeError> {
        if dim == 0 {
            return Err(KdeError::ZeroDim);
        }
        if !samples.len().is_multiple_of(dim) {
            return Err(KdeError::RaggedSamples {
                len: samples.len(),
                dim,
            });
        }
        if samples.is_empty() {
            return Err(KdeError::Empty);
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(KdeError::BadBandwidth(bandwidth));
        }
        if let Some(bad) = samples.iter().position(|v| !v.is_finite()) {
            return Err(KdeError::NonFiniteSample { index: bad / dim });
        }
        Ok(KdeModel {
            dim,
            bandwidth,
            kernel,
            samples,
        })
    }

    /// Construct with the rate-optimal bandwidth for smoothness `beta`.
    pub fn with_rate_bandwidth(
        samples: Vec<f64>,
        dim: usize,
        kernel: Kernel,
        beta: f64,
    ) -> Result<Self, KdeError> {
        if dim == 0 {
            return Err(KdeError::ZeroDim);
        }
        let n = samples.len() / dim.max(1);
        let h = rate_bandwidth(n.max(1), beta, dim);
        Self::new(samples, dim, kernel, h)
    }

    pub fn n(&self) -> usize {
        self.samples.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// `(1/(n·h^d)) Σ_i K((X_i - y)/h)`. Full scan, every call.
    pub fn eval(&self, y: &[f64]) -> f64 {
        assert_eq!(y.len(), self.dim, "query dimension mismatch");
        let inv_h = 1.0 / self.bandwidth;
        let mut acc = 0.0;
        for row in self.samples.chunks_exact(self.dim) {
            let mut k = 1.0;
            for (xi, yi) in row.iter().zip(y) {
                k *= self.kernel.eval1((xi - yi) * inv_h);
                if k == 0.0 {
                    break;
                }
            }
            acc += k;
        }
        acc * inv_h.powi(self.dim as i32) / self.n() as f64
    }
}

/// Load samples from a CSV file: one point per row, `d` float columns, no
/// header (a single leading non-numeric row is tolerated and skipped).
/// Returns the flat buffer and the column count.
pub fn load_samples_csv(
    path: impl AsRef<Path>,
    expected_dim: Option<usize>,
) -> Result<(Vec<f64>, usize), KdeError> {
    let path = path.as_ref();
    let pstr = path.display().to_string();
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| KdeError::Csv {
            path: pstr.clone(),
            source,
        })?;
    let mut out = Vec::new();
    let mut dim: Option<usize> = expected_dim;
    let mut first_data_row = true;
    for (idx, record) in rdr.records().enumerate() {
        let record = record.map_err(|source| KdeError::Csv {
            path: pstr.clone(),
            source,
        })?;
        let line = idx + 1;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        let mut parse_failed = None;
        for field in record.iter() {
            match field.parse::<f64>() {
                Ok(v) => row.push(v),
                Err(_) => {
                    parse_failed = Some(field.to_string());
                    break;
                }
            }
        }
        if let Some(value) = parse_failed {
            if first_data_row {
                continue; // header row
            }
            return Err(KdeError::BadField {
                path: pstr,
                line,
                value,
            });
        }
        let want = *dim.get_or_insert(row.len());
        if row.len() != want {
            return Err(KdeError::BadWidth {
                path: pstr,
                line,
                got: row.len(),
                want,
            });
        }
        out.extend_from_slice(&row);
        first_data_row = false;
    }
    let dim = dim.unwrap_or(0);
    if out.is_empty() || dim == 0 {
        return Err(KdeError::Empty);
    }
    Ok((out, dim))
}

/// Configuration for the sub-Gaussian tail check.
#[derive(Clone, Debug)]
pub struct TailCheckConfig {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    /// Multiples of the RMS error at which exceedance is tabulated.
    pub multiples: Vec<f64>,
    /// Restrict query points to `[h, 1-h]^d`.
    pub interior_only: bool,
}

impl TailCheckConfig {
    pub fn new(n: usize, trials: usize, seed: u64) -> Self {
        TailCheckConfig {
            n,
            trials,
            seed,
            multiples: vec![1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0],
            interior_only: false,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TailRow {
    /// `t / eps`.
    pub multiple: f64,
    pub t: f64,
    /// Fraction of trials with `|f̂(y) - f(y)| > t`.
    pub exceed_freq: f64,
    /// `2·exp(-t²/eps²)`.
    pub sub_gaussian_bound: f64,
}

#[derive(Clone, Debug)]
pub struct TailReport {
    pub n: usize,
    pub trials: usize,
    /// RMS pointwise error over trials; the empirical scale `eps`.
    pub eps: f64,
    /// `eps / n^{-beta/(2beta+d)}`: the measured constant in front of the
    /// rate. Reported, never asserted.
    pub c_star: f64,
    /// `n^{-beta/(2beta+d)}`.
    pub rate: f64,
    pub rows: Vec<TailRow>,
}

/// Empirical check of the sub-Gaussian pointwise tail: over independent
/// datasets, compare the frequency of `|f̂(y) - f(y)| > t` with
/// `2·exp(-t²/eps²)`, where `eps` is the measured RMS error. One dataset
/// and one uniform query point per trial; trial `i` draws from the seed
/// stream `(seed, lane=1, i)`.
pub fn assumption1_check(
    density: &SyntheticDensity,
    cfg: &TailCheckConfig,
) -> Result<TailReport, KdeError> {
    if cfg.trials < 100 {
        return Err(KdeError::TooFewTrials(cfg.trials));
    }
    let spec = density.spec();
    let dim = spec.dim;
    let h = rate_bandwidth(cfg.n, spec.beta, dim);
    let (lo, hi) = if cfg.interior_only {
        if h >= 0.5 {
            return Err(KdeError::InteriorEmpty(h));
        }
        (h, 1.0 - h)
    } else {
        (0.0, 1.0)
    };
    let kernel = Kernel::for_order(spec.ell());
    let mut errors = Vec::with_capacity(cfg.trials);
    let mut y = vec![0.0; dim];
    for trial in 0..cfg.trials {
        let mut rng = ChaCha12Rng::seed_from_u64(stream_seed(cfg.seed, 1, trial as u64));
        let xs = density.sample_with(cfg.n, &mut rng);
        let kde = KdeModel::new(xs, dim, kernel.clone(), h)?;
        for yi in y.iter_mut() {
            *yi = rng.random_range(lo..hi);
        }
        errors.push((kde.eval(&y) - density.eval(&y)).abs());
    }
    let eps = (errors.iter().map(|e| e * e).sum::<f64>() / cfg.trials as f64).sqrt();
    let rate = (cfg.n as f64).powf(-spec.beta / (2.0 * spec.beta + dim as f64));
    let mut rows = Vec::new();
    if eps > 0.0 {
        for &multiple in &cfg.multiples {
            let t = multiple * eps;
            if t > 1.0 {
                continue;
            }
            let exceed = errors.iter().filter(|&&e| e > t).count() as f64;
            rows.push(TailRow {
                multiple,
                t,
                exceed_freq: exceed / cfg.trials as f64,
                sub_gaussian_bound: 2.0 * (-multiple * multiple).exp(),
            });
        }
    }
    Ok(TailReport {
        n: cfg.n,
        trials: cfg.trials,
        eps,
        c_star: eps / rate,
        rate,
        rows,
    })
}
