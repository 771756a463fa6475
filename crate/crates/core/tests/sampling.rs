use mehler::exec::Executor;
use mehler::levy::{characteristic_exponent, LevyMeasure, LevyTriple, SemigroupFamily};
use mehler::models::{build_alpha_stable, build_koponen, coordinate_atoms, ModelParams, ModelSpec};
use mehler::rng::RandomStream;
use mehler::sampling::*;
use nalgebra::DMatrix;

/// Mean of `e^{i⟨x,ξ⟩}` and the standard errors of its two parts.
fn ecf(s: &SampleSet, xi: &[f64]) -> ((f64, f64), (f64, f64)) {
    let n = s.len() as f64;
    let (mut c, mut sn, mut c2, mut s2) = (0.0, 0.0, 0.0, 0.0);
    for r in s.rows() {
        let a: f64 = r.iter().zip(xi).map(|(x, y)| x * y).sum();
        let (si, co) = a.sin_cos();
        c += co;
        sn += si;
        c2 += co * co;
        s2 += si * si;
    }
    let (mc, ms) = (c / n, sn / n);
    (((mc), (ms)), (((c2 / n - mc * mc) / n).sqrt(), ((s2 / n - ms * ms) / n).sqrt()))
}

fn assert_matches_char(s: &SampleSet, xi: &[f64], want: num_complex::Complex64, what: &str) {
    let ((re, im), (sr, si)) = ecf(s, xi);
    assert!((re - want.re).abs() <= 3.0 * sr + 1e-4, "{what} ξ={xi:?}: re {re} vs {} (se {sr})", want.re);
    assert!((im - want.im).abs() <= 3.0 * si + 1e-4, "{what} ξ={xi:?}: im {im} vs {} (se {si})", want.im);
}

fn probe(model: &ModelSpec, k: f64) -> Vec<f64> {
    let d = model.dimension();
    (0..d).map(|i| if i == 0 { k } else { 0.5 * k }).collect()
}

#[test]
fn zero_measure_gives_zero_increments() {
    let m = LevyMeasure::zero(2);
    let mut rng = RandomStream::new(1, 0).rng();
    let y = sample_levy_increment(&m, 1.0, &JumpScheme::default(), &mut rng).unwrap();
    assert_eq!(y, vec![0.0, 0.0]);
}

#[test]
fn koponen_increment_second_moment() {
    let model = build_koponen(1.0, 0.75, 1.0, 0.0).unwrap();
    let triple = model.triple();
    let n = 100_000;
    let s = sample_increments(triple, 1.0, n, &JumpScheme::default(), RandomStream::new(7, 0), &Executor::default())
        .unwrap();
    let x = s.column(0);
    let mean = x.iter().sum::<f64>() / n as f64;
    let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    let m2 = sq.iter().sum::<f64>() / n as f64;
    let var2 = sq.iter().map(|v| (v - m2).powi(2)).sum::<f64>() / n as f64;
    let sd = (m2 / n as f64).sqrt();
    assert!(mean.abs() <= 3.0 * sd, "mean {mean}");
    let want = triple.m.moment(2.0);
    assert!((m2 - want).abs() <= 3.0 * (var2 / n as f64).sqrt(), "{m2} vs {want}");
}

#[test]
fn alpha_stable_increment_matches_characteristic_function() {
    let model = build_alpha_stable(1.5, 1.0, coordinate_atoms(1), vec![0.0]).unwrap();
    let s = sample_increments(
        model.triple(),
        0.5,
        100_000,
        &JumpScheme::default(),
        RandomStream::new(3, 0),
        &Executor::default(),
    )
    .unwrap();
    let lam = characteristic_exponent(model.triple(), &[1.0]).unwrap();
    assert_matches_char(&s, &[1.0], (-0.5 * lam).exp(), "increment");
}

#[test]
fn deterministic_paths() {
    let m0 = LevyTriple::pure_jump(LevyMeasure::zero(1));
    let sg = SemigroupFamily::scalar(1, 1.0).unwrap();
    let mut rng = RandomStream::new(1, 0).rng();
    let z = simulate_ou_path(&[2.0], 1.5, &m0, &sg, &JumpScheme::default(), &mut rng).unwrap();
    assert!((z[0] - 2.0 * (-1.5f64).exp()).abs() < 1e-14);
    let drift = LevyTriple::new(vec![1.0], DMatrix::zeros(1, 1), LevyMeasure::zero(1)).unwrap();
    let z = simulate_ou_path(&[2.0], 1.5, &drift, &sg, &JumpScheme::default(), &mut rng).unwrap();
    let want = 2.0 * (-1.5f64).exp() + 1.0 - (-1.5f64).exp();
    assert!((z[0] - want).abs() < 1e-12, "{} vs {want}", z[0]);
}

#[test]
fn koponen_path_and_mu_t_match_mu_hat() {
    let model = build_koponen(1.0, 0.75, 1.0, 0.0).unwrap();
    let ex = Executor::default();
    let scheme = JumpScheme::default();
    let paths = simulate_ou_paths(&[0.0], 1.0, 100_000, &model.evolved, &scheme, RandomStream::new(11, 0), &ex).unwrap();
    let direct = sample_mu_t(1.0, 100_000, &model.evolved, &scheme, RandomStream::new(12, 0), &ex).unwrap();
    for k in [0.5, 1.0, 2.0] {
        let want = model.evolved.mu_hat(1.0, &[k]).unwrap();
        assert_matches_char(&paths, &[k], want, "path");
        assert_matches_char(&direct, &[k], want, "mu_t");
    }
    let (a, b) = (paths.column(0), direct.column(0));
    let (a, b) = (&a[..10_000], &b[..10_000]);
    assert!(ks_statistic(a, b) < ks_critical_1pct(a.len(), b.len()));
}

#[test]
fn small_times_give_small_draws() {
    let model = build_koponen(1.0, 0.75, 1.0, 0.0).unwrap();
    let s = sample_mu_t(1e-6, 1000, &model.evolved, &JumpScheme::default(), RandomStream::new(5, 0), &Executor::default())
        .unwrap();
    let max = s.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(max < 0.05, "{max}");
}

#[test]
fn invariant_samplers_match_the_limit_characteristic_function() {
    let ex = Executor::default();
    let scheme = JumpScheme::default();
    for name in ["koponen", "alpha_stable", "fractional_ou"] {
        let model = ModelParams::named(name).unwrap().build().unwrap();
        let direct =
            sample_invariant(100_000, &model.evolved, &scheme, RandomStream::new(21, 0), &ex, InvariantMethod::Direct)
                .unwrap();
        for k in [0.5, 1.0, 2.0] {
            let xi = probe(&model, k);
            let want = model.evolved.mu_hat(f64::INFINITY, &xi).unwrap();
            assert_matches_char(&direct, &xi, want, name);
        }
        let long = sample_invariant(
            10_000,
            &model.evolved,
            &scheme,
            RandomStream::new(22, 0),
            &ex,
            InvariantMethod::LongHorizon,
        )
        .unwrap();
        for k in 0..model.dimension() {
            let a = &direct.column(k)[..10_000];
            let b = long.column(k);
            let ks = ks_statistic(a, &b);
            assert!(ks < ks_critical_1pct(a.len(), b.len()), "{name} coordinate {k}: KS {ks}");
        }
    }
}

#[test]
fn zero_model_invariant_is_a_point_mass() {
    let t = LevyTriple::pure_jump(LevyMeasure::zero(1));
    let ev = mehler::levy::EvolvedTriple::new(t, SemigroupFamily::scalar(1, 1.0).unwrap()).unwrap();
    for method in [InvariantMethod::Direct, InvariantMethod::LongHorizon] {
        let s = sample_invariant(50, &ev, &JumpScheme::default(), RandomStream::new(1, 0), &Executor::default(), method)
            .unwrap();
        assert!(s.as_slice().iter().all(|&v| v == 0.0));
    }
}

#[test]
fn gaussian_sampler_moments() {
    let ex = Executor::default();
    let z = sample_gaussian(&DMatrix::zeros(1, 1), 10, RandomStream::new(1, 0), &ex).unwrap();
    assert!(z.as_slice().iter().all(|&v| v == 0.0));
    let n = 100_000;
    let q = DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 0.25]);
    let s = sample_gaussian(&q, n, RandomStream::new(2, 0), &ex).unwrap();
    for k in 0..2 {
        let x = s.column(k);
        let v = x.iter().map(|a| a * a).sum::<f64>() / n as f64;
        let se = q[(k, k)] * (2.0 / n as f64).sqrt();
        assert!((v - q[(k, k)]).abs() <= 3.0 * se, "{v}");
    }
    assert!(sample_gaussian(&DMatrix::from_row_slice(1, 1, &[-1.0]), 1, RandomStream::new(1, 0), &ex).is_err());
}

#[test]
fn draws_do_not_depend_on_thread_count() {
    let model = build_koponen(1.0, 0.75, 1.0, 0.0).unwrap();
    let scheme = JumpScheme::default();
    let one = sample_invariant(
        3000,
        &model.evolved,
        &scheme,
        RandomStream::new(9, 0),
        &Executor::sequential(),
        InvariantMethod::Direct,
    )
    .unwrap();
    let four = sample_invariant(
        3000,
        &model.evolved,
        &scheme,
        RandomStream::new(9, 0),
        &Executor::with_threads(4).unwrap(),
        InvariantMethod::Direct,
    )
    .unwrap();
    assert_eq!(one, four);
}

#[test]
fn csv_export_has_header_and_rows() {
    let s = SampleSet::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    let mut buf = Vec::new();
    s.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x1,x2");
    assert_eq!(lines.len(), 3);
    let empty = SampleSet::new(1, vec![]).unwrap();
    let mut buf = Vec::new();
    empty.write_csv(&mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "x1\n");
}
