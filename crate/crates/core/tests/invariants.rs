//! Cross-module invariants, exercised on randomized inputs.
//!
//! The Lagrange-basis evaluation path and the Vandermonde solve path are
//! kept deliberately independent in the library; several tests here drive
//! both and require agreement, so a regression in either one trips a
//! comparison instead of silently shifting results.

use proptest::prelude::*;
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use plif::entropy::NetSpec;
use plif::holder::{DensityKind, HolderSpec, SmoothFn, SyntheticDensity};
use plif::interp::{BuildConfig, PiecewiseInterpolant};
use plif::kde::{rate_bandwidth, KdeModel};
use plif::lattice::PrincipalLattice;
use plif::seed::stream_seed;

/// Lebesgue constants over the unit cube, estimated with 200k seeded
/// samples. The one-dimensional values match the classical equispaced
/// constants; (1, d) values approach the exact corner value 2d - 1.
const LEBESGUE_SAMPLES: usize = 200_000;
const LEBESGUE_SEED: u64 = 7;
const LEBESGUE_TABLE: &[(u32, usize, f64)] = &[
    (1, 1, 1.0),
    (2, 1, 1.249999999962),
    (3, 1, 1.631130309246),
    (1, 2, 2.997661247456),
    (2, 2, 16.971945909005),
];

#[test]
fn lebesgue_estimates_match_frozen_table() {
    for &(ell, dim, expect) in LEBESGUE_TABLE {
        let lat = PrincipalLattice::new(ell, dim).unwrap();
        let est = lat.lebesgue_estimate(LEBESGUE_SAMPLES, LEBESGUE_SEED);
        assert!(
            (est - expect).abs() <= 1e-8 * expect,
            "ell={ell} d={dim}: {est} vs {expect}"
        );
    }
    // Analytic anchors: the estimate approaches the true maximum from below.
    let quad = PrincipalLattice::new(2, 1).unwrap();
    let est = quad.lebesgue_estimate(LEBESGUE_SAMPLES, LEBESGUE_SEED);
    assert!((1.25 * 0.999..=1.25 + 1e-12).contains(&est));
    let lin2 = PrincipalLattice::new(1, 2).unwrap();
    let est = lin2.lebesgue_estimate(LEBESGUE_SAMPLES, LEBESGUE_SEED);
    assert!((3.0 * 0.99..=3.0 + 1e-12).contains(&est));
}

#[test]
fn lebesgue_bounded_by_conditioning() {
    // With p(x) the basis vector and t(x) the monomial vector, V^T p = t,
    // so sum |p_i(x)| <= sqrt(M)·|p|_2 <= sqrt(M)·|t|_2/sigma_min <= M/sigma_min
    // on the cube. Ties the two independently computed diagnostics together.
    for &(ell, dim, _) in LEBESGUE_TABLE {
        let lat = PrincipalLattice::new(ell, dim).unwrap();
        let est = lat.lebesgue_estimate(20_000, 11);
        let sigma = lat.vandermonde().min_singular_value().unwrap();
        let cap = lat.len() as f64 / sigma;
        assert!(
            est <= cap * (1.0 + 1e-9),
            "ell={ell} d={dim}: estimate {est} above operator bound {cap}"
        );
    }
}

#[test]
fn lagrange_and_vandermonde_routes_agree() {
    // Interpolate random data two ways: basis evaluation directly, and
    // monomial coefficients from the Vandermonde solve. Same polynomial.
    let mut rng = ChaCha12Rng::seed_from_u64(stream_seed(2024, 9, 0));
    for (ell, dim) in [(1usize, 1usize), (2, 1), (3, 1), (1, 2), (2, 2), (2, 3)] {
        let lat = PrincipalLattice::new(ell as u32, dim).unwrap();
        let values: Vec<f64> = (0..lat.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let coeffs = lat.vandermonde().solve(&values).unwrap();
        let monos = lat.monomials();
        for _ in 0..20 {
            let x: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
            let direct = lat.interpolate_eval(&values, &x).unwrap();
            let via_coeffs: f64 = coeffs
                .iter()
                .zip(&monos)
                .map(|(c, a)| c * a.monomial(&x))
                .sum();
            assert!(
                (direct - via_coeffs).abs() <= 1e-8 * (1.0 + via_coeffs.abs()),
                "ell={ell} dim={dim}: {direct} vs {via_coeffs}"
            );
        }
    }
}

#[test]
fn quantization_error_bounded_by_stability() {
    // Rounding mesh values to p fraction bits moves the interpolant by at
    // most the Lebesgue constant times half a step, everywhere.
    let spec = HolderSpec::new(2.0, 10.0, 1).unwrap();
    let oracle = |y: &[f64]| 1.0 + 0.8 * (5.0 * y[0]).sin();
    for p in [6u32, 10, 16] {
        let full =
            PiecewiseInterpolant::build(oracle, 40_000, spec, &BuildConfig::default()).unwrap();
        let quant = PiecewiseInterpolant::build(
            oracle,
            40_000,
            spec,
            &BuildConfig {
                precision: Some(p),
                ..BuildConfig::default()
            },
        )
        .unwrap();
        let lambda = 1.0; // ell = 1, d = 1: nonnegative basis sums to one
        let cap = lambda * 0.5 * (p as f64).exp2().recip();
        for i in 0..=4000 {
            let y = [i as f64 / 4000.0];
            let d = (full.query(&y).unwrap() - quant.query(&y).unwrap()).abs();
            assert!(d <= cap * (1.0 + 1e-9), "p={p} y={:?}: {d} > {cap}", y);
        }
    }
}

#[test]
fn identically_assigned_functions_stay_close() {
    // Pairs engineered to share a net index have interpolants within
    // Lambda·delta of each other in sup norm: the constructive half of the
    // covering argument, at desk scale.
    let spec = HolderSpec::new(2.0, 40.0, 1).unwrap();
    let density = SyntheticDensity::new(
        DensityKind::TrigWave {
            dim: 1,
            amplitude: 0.5,
            frequency: 1,
        },
        spec,
    )
    .unwrap();
    let delta = 0.05;
    let ns = NetSpec::new(spec, delta).unwrap();
    let geo = ns.geometry().clone();
    let lambda = geo
        .lattice()
        .lebesgue_estimate(50_000, LEBESGUE_SEED);

    let big_m = geo.lattice().len();
    let mut base = Vec::with_capacity(geo.value_count());
    let mut j = vec![0usize; geo.dim()];
    let mut y = vec![0.0; geo.dim()];
    for cell in 0..geo.num_cells() {
        geo.decode_cell(cell, &mut j);
        for k in 0..big_m {
            geo.mesh_point_into(&j, k, &mut y);
            base.push(density.eval(&y));
        }
    }
    let levels: Vec<i64> = base.iter().map(|v| (v / delta).round() as i64).collect();

    let mut rng = ChaCha12Rng::seed_from_u64(stream_seed(77, 3, 0));
    let f = PiecewiseInterpolant::from_values(geo.clone(), spec, None, base.clone()).unwrap();
    for _ in 0..50 {
        // Same level at every mesh point, by construction.
        let perturbed: Vec<f64> = levels
            .iter()
            .map(|&k| (k as f64 + rng.random_range(-0.49..0.49)) * delta)
            .collect();
        let g =
            PiecewiseInterpolant::from_values(geo.clone(), spec, None, perturbed.clone()).unwrap();
        let assigned = ns.assign(|p| g.query(p).unwrap()).unwrap();
        assert_eq!(assigned, levels);

        // Mesh values differ by at most delta, so interpolants differ by
        // at most Lambda·delta.
        let mut sup = 0.0_f64;
        for i in 0..=10_000 {
            let yy = [i as f64 / 10_000.0];
            sup = sup.max((f.query(&yy).unwrap() - g.query(&yy).unwrap()).abs());
        }
        assert!(
            sup <= lambda * delta * (1.0 + 1e-6),
            "sup {sup} vs {}",
            lambda * delta
        );
    }
}

#[test]
fn samplers_match_their_cdf() {
    // Kolmogorov-Smirnov at n = 1e5 against the closed-form CDF; the 99.9%
    // critical value is about 0.006, so 0.01 fails only on real defects.
    let n = 100_000usize;
    for density in plif::holder::shipped_densities() {
        if density.spec().dim != 1 {
            continue;
        }
        let mut draws = density.sample(n, stream_seed(5150, 4, 0));
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut ks = 0.0_f64;
        for (i, &x) in draws.iter().enumerate() {
            let f = density.cdf1(x);
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            ks = ks.max((f - lo).abs()).max((f - hi).abs());
        }
        assert!(ks <= 0.01, "{}: KS statistic {ks}", density.name());
    }
}

#[test]
fn kde_tracks_truth_away_from_the_boundary() {
    let spec = HolderSpec::new(2.0, 40.0, 1).unwrap();
    let density = SyntheticDensity::new(
        DensityKind::TrigWave {
            dim: 1,
            amplitude: 0.5,
            frequency: 1,
        },
        spec,
    )
    .unwrap();
    let n = 20_000usize;
    let samples = density.sample(n, stream_seed(31, 1, 0));
    let h = rate_bandwidth(n, spec.beta, 1);
    let kde = KdeModel::new(samples, 1, plif::kde::Kernel::for_order(spec.ell()), h).unwrap();
    let mut sup = 0.0_f64;
    for i in 0..=500 {
        let y = h + (1.0 - 2.0 * h) * i as f64 / 500.0;
        sup = sup.max((kde.eval(&[y]) - density.eval(&[y])).abs());
    }
    assert!(sup <= 0.15, "interior sup error {sup}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_is_a_partition_of_unity(
        ell in 0u32..4,
        dim in 1usize..4,
        xs in proptest::collection::vec(0.0f64..=1.0, 3),
    ) {
        let lat = PrincipalLattice::new(ell, dim).unwrap();
        let x = &xs[..dim];
        let sum: f64 = (0..lat.len()).map(|i| lat.basis_eval(i, x)).sum();
        prop_assert!((sum - 1.0).abs() < 1e-9, "sum {sum}");
    }

    #[test]
    fn interpolation_reproduces_low_degree_polynomials(
        ell in 0u32..4,
        dim in 1usize..3,
        seed in 0u64..1_000,
        xs in proptest::collection::vec(0.0f64..=1.0, 2),
    ) {
        let lat = PrincipalLattice::new(ell, dim).unwrap();
        let monos = lat.monomials();
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let coeffs: Vec<f64> = (0..monos.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let poly = |x: &[f64]| -> f64 {
            coeffs.iter().zip(&monos).map(|(c, a)| c * a.monomial(x)).sum()
        };
        let values: Vec<f64> = (0..lat.len())
            .map(|i| poly(&lat.node_cartesian(i)))
            .collect();
        let x = &xs[..dim];
        let got = lat.interpolate_eval(&values, x).unwrap();
        let want = poly(x);
        prop_assert!((got - want).abs() < 1e-9 * (1.0 + want.abs()), "{got} vs {want}");
    }

    #[test]
    fn file_round_trip_is_lossless(
        dim in 1usize..3,
        beta_sel in 0usize..4,
        n in 100u64..3_000,
        precision in proptest::option::of(6u32..30),
        amp in -0.9f64..0.9,
        freq in 1.0f64..4.0,
    ) {
        let beta = [1.5, 2.0, 2.6, 3.0][beta_sel];
        let spec = HolderSpec::new(beta, 30.0, dim).unwrap();
        let oracle = move |y: &[f64]| {
            1.0 + amp * (freq * y.iter().sum::<f64>()).sin()
        };
        let fi = PiecewiseInterpolant::build(
            oracle,
            n,
            spec,
            &BuildConfig { precision, parallel: false, ..BuildConfig::default() },
        )
        .unwrap();
        let mut bytes = Vec::new();
        fi.serialize(&mut bytes).unwrap();
        prop_assert_eq!(bytes.len() as u64, fi.serialized_len());
        let back = PiecewiseInterpolant::deserialize(&mut bytes.as_slice()).unwrap();
        prop_assert_eq!(back.values(), fi.values());
        let mut again = Vec::new();
        back.serialize(&mut again).unwrap();
        prop_assert_eq!(again, bytes);
    }

    #[test]
    fn every_cube_point_lands_in_a_valid_cell(
        dim in 1usize..4,
        m in 1usize..6,
        xs in proptest::collection::vec(0.0f64..=1.0, 3),
    ) {
        let geo = plif::interp::GridGeometry::new(dim, m, 1).unwrap();
        let y = &xs[..dim];
        let j = geo.cell_index(y).unwrap();
        prop_assert!(j.iter().all(|&ji| ji < m));
        let linear = geo.linear_cell(&j);
        prop_assert!(linear < geo.num_cells());
        let mut back = vec![0usize; dim];
        geo.decode_cell(linear, &mut back);
        prop_assert_eq!(back, j);
    }

    #[test]
    fn quantization_levels_are_reachable_and_adjacent(
        shift in 0.0f64..1.0,
        delta_exp in 1i32..6,
    ) {
        let spec = HolderSpec::new(1.0, 2.0, 1).unwrap();
        let delta = 0.5f64.powi(delta_exp);
        let ns = NetSpec::new(spec, delta).unwrap();
        let f = move |y: &[f64]| 0.4 + 0.3 * (y[0] - shift);
        let a = ns.assign(f).unwrap();
        let b = ns.assign(move |y| f(y) + delta / 3.0).unwrap();
        prop_assert_eq!(a.len(), ns.mesh_point_count() as usize);
        for (la, lb) in a.iter().zip(&b) {
            prop_assert!((la - lb).abs() <= 1);
        }
    }
}
