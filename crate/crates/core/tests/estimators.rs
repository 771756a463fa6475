use mehler::estimators::*;
use mehler::exec::Executor;
use mehler::functions::*;
use mehler::models::{build_alpha_stable, build_koponen, coordinate_atoms, ModelParams, ModelSpec};
use mehler::rng::RandomStream;
use mehler::sampling::{sample_invariant, InvariantMethod, JumpScheme, SampleSet};

fn scalar(name: &str, offset: f64, terms: Vec<Term>) -> CylindricalFunction {
    CylindricalFunction::along(name, vec![1.0], Additive::scalar(offset, terms)).unwrap()
}

fn term(shape: Shape, scale: f64) -> Term {
    Term::new(shape, scale, 1.0, 0.0)
}

fn invariant(model: &ModelSpec, n: usize, seed: u64) -> SampleSet {
    sample_invariant(
        n,
        &model.evolved,
        &JumpScheme::default(),
        RandomStream::new(seed, 0),
        &Executor::default(),
        InvariantMethod::Direct,
    )
    .unwrap()
}

fn model(name: &str) -> ModelSpec {
    ModelParams::named(name).unwrap().build().unwrap()
}

fn stable_1d() -> ModelSpec {
    build_alpha_stable(1.5, 1.0, coordinate_atoms(1), vec![0.0]).unwrap()
}

fn opts() -> FormOptions {
    FormOptions::default()
}

fn check_oracle(kind: FormKind, f: &CylindricalFunction, m: &ModelSpec, seed: u64) {
    let s = invariant(m, 12, seed);
    let ex = Executor::default();
    let got = integrate_form(kind, f, &s, &m.triple().m, &opts(), &ex).unwrap().value;
    let want = brute_force::form(kind, f, &m.triple().m, &s.column(0)).unwrap();
    let rel = (got - want).abs() / want.abs();
    assert!(rel < 1e-3, "{kind:?} {} on {}: {got} vs {want} (rel {rel:.2e})", f.name(), m.name);
}

#[test]
fn entropy_form_matches_brute_force() {
    let (kop, stab, fou) = (model("koponen"), stable_1d(), model("fractional_ou"));
    let p1 = FormKind::Entropy { p: 1.0 };
    check_oracle(p1, &scalar("2+sin", 2.0, vec![term(Shape::Sin, 1.0)]), &kop, 1);
    check_oracle(p1, &scalar("bump", 0.5, vec![term(Shape::Gauss, 1.0)]), &stab, 2);
    check_oracle(FormKind::Entropy { p: 2.0 }, &scalar("tanh", 2.0, vec![term(Shape::Tanh, 1.0)]), &kop, 3);
    check_oracle(p1, &scalar("lorentz", 0.4, vec![term(Shape::Lorentz, 1.0)]), &fou, 4);
    check_oracle(FormKind::Entropy { p: 1.5 }, &scalar("atan", 2.0, vec![term(Shape::Atan, 1.0)]), &stab, 5);
}

#[test]
fn dirichlet_form_matches_brute_force() {
    let (kop, stab, fou) = (model("koponen"), stable_1d(), model("fractional_ou"));
    let k = FormKind::Dirichlet;
    check_oracle(k, &scalar("2+sin", 2.0, vec![term(Shape::Sin, 1.0)]), &kop, 6);
    check_oracle(k, &scalar("tanh", 0.0, vec![term(Shape::Tanh, 1.0)]), &stab, 7);
    check_oracle(k, &scalar("sin", 0.0, vec![term(Shape::Sin, 1.0)]), &fou, 8);
    check_oracle(k, &scalar("gauss", 0.0, vec![term(Shape::Gauss, 1.0)]), &kop, 9);
    check_oracle(k, &scalar("ratio", 0.0, vec![term(Shape::Ratio, 1.0)]), &stab, 10);
}

#[test]
fn weighted_form_matches_brute_force() {
    let light = build_koponen(1.0, 0.2, 1.0, 0.0).unwrap();
    let lighter = build_koponen(1.0, 0.1, 1.0, 0.0).unwrap();
    let bump = scalar("1+gauss", 1.0, vec![Term::new(Shape::Gauss, 1.0, std::f64::consts::SQRT_2, 0.0)]);
    check_oracle(FormKind::Weighted { p: 2.5 }, &bump, &light, 11);
    check_oracle(FormKind::Weighted { p: 2.2 }, &scalar("tanh", 0.0, vec![term(Shape::Tanh, 1.0)]), &light, 12);
    check_oracle(FormKind::Weighted { p: 2.7 }, &bump, &lighter, 13);
    check_oracle(FormKind::Weighted { p: 2.5 }, &scalar("sin", 0.0, vec![term(Shape::Sin, 1.0)]), &lighter, 14);
    check_oracle(FormKind::Weighted { p: 2.4 }, &scalar("x e^-x2", 0.0, vec![term(Shape::GaussSlope, 1.0)]), &light, 15);
}

#[test]
fn weighted_form_flags_divergence() {
    let kop = model("koponen");
    let s = invariant(&kop, 10, 1);
    let f = scalar("tanh", 0.0, vec![term(Shape::Tanh, 1.0)]);
    let err = weighted_increment_form(&f, 3.0, &s, &kop.triple().m, &opts(), &Executor::default());
    assert!(matches!(err, Err(mehler::Error::Divergent(_))), "{err:?}");
    assert!(weighted_increment_form(&f, 2.0, &s, &kop.triple().m, &opts(), &Executor::default()).is_err());
}

#[test]
fn constant_functions_have_zero_forms() {
    let kop = model("koponen");
    let s = invariant(&kop, 500, 2);
    let m = &kop.triple().m;
    let ex = Executor::default();
    let c = scalar("c", 1.7, vec![]);
    assert_eq!(dirichlet_form(&c, &s, m, &opts(), &ex).unwrap().value, 0.0);
    assert_eq!(nonlocal_entropy_form(&c, 2.0, &s, m, &opts(), &ex).unwrap().value, 0.0);
    let light = build_koponen(1.0, 0.2, 1.0, 0.0).unwrap();
    assert_eq!(weighted_increment_form(&c, 2.5, &s, &light.triple().m, &opts(), &ex).unwrap().value, 0.0);
    let e = estimate_entropy(|x| c.value(x), 1.0, &s).unwrap();
    assert_eq!((e.value, e.std_error), (0.0, 0.0));
}

#[test]
fn forms_and_entropies_are_nonnegative_on_the_positive_suite() {
    let ex = Executor::default();
    for name in ["koponen", "alpha_stable", "fractional_ou"] {
        let model = model(name);
        let s = invariant(&model, 2000, 3);
        for f in suite("positive", model.dimension()).unwrap().functions {
            let ent = estimate_entropy(|x| f.value(x), 1.0, &s).unwrap();
            assert!(ent.value >= 0.0, "{name} {}", f.name());
            for p in [1.0, 2.0] {
                let form = nonlocal_entropy_form(&f, p, &s, &model.triple().m, &opts(), &ex).unwrap();
                assert!(form.value >= 0.0, "{name} {} p={p}", f.name());
            }
            let dir = dirichlet_form(&f, &s, &model.triple().m, &opts(), &ex).unwrap();
            assert!(dir.value >= 0.0);
        }
    }
}

#[test]
fn dirichlet_form_ignores_additive_constants() {
    let kop = model("koponen");
    let s = invariant(&kop, 5000, 4);
    let ex = Executor::default();
    let m = &kop.triple().m;
    let f = scalar("tanh", 0.0, vec![term(Shape::Tanh, 1.0)]);
    let g = compose_scalar(&f, ScalarMap::Affine { a: 3.0, b: 1.0 }).unwrap();
    let a = dirichlet_form(&f, &s, m, &opts(), &ex).unwrap().value;
    let b = dirichlet_form(&g, &s, m, &opts(), &ex).unwrap().value;
    assert!((a - b).abs() <= 1e-9 * a, "{a} vs {b}");
}

#[test]
fn entropy_form_is_homogeneous_at_p_one() {
    let stab = stable_1d();
    let s = invariant(&stab, 300, 5);
    let ex = Executor::default();
    let m = &stab.triple().m;
    let f = scalar("bump", 0.5, vec![term(Shape::Gauss, 1.0)]);
    let g = compose_scalar(&f, ScalarMap::Affine { a: 0.0, b: 2.0 }).unwrap();
    let a = nonlocal_entropy_form(&f, 1.0, &s, m, &opts(), &ex).unwrap().value;
    let b = nonlocal_entropy_form(&g, 1.0, &s, m, &opts(), &ex).unwrap().value;
    assert!((b - 2.0 * a).abs() <= 1e-12 * a, "{b} vs 2·{a}");
}

#[test]
fn entropy_form_rejects_functions_without_positive_infimum() {
    let kop = model("koponen");
    let s = invariant(&kop, 10, 6);
    let f = scalar("tanh", 0.0, vec![term(Shape::Tanh, 1.0)]);
    assert!(nonlocal_entropy_form(&f, 1.0, &s, &kop.triple().m, &opts(), &Executor::default()).is_err());
    assert!(estimate_entropy(|x| f.value(x), 1.0, &s).is_err());
}

#[test]
fn means_of_constants_and_odd_functions() {
    let kop = model("koponen");
    let s = invariant(&kop, 100_000, 7);
    let c = estimate_mean(|_| 2.5, &s).unwrap();
    assert_eq!((c.value, c.std_error), (2.5, 0.0));
    let odd = estimate_mean(|x| x[0].tanh(), &s).unwrap();
    assert!(odd.value.abs() <= 3.0 * odd.std_error, "{odd:?}");
}

#[test]
fn second_moment_matches_characteristic_curvature() {
    let kop = model("koponen");
    let s = invariant(&kop, 100_000, 8);
    let m2 = estimate_mean(|x| x[0] * x[0], &s).unwrap();
    // -d²/dξ² log σ̂ at 0, by Richardson extrapolation of central differences.
    let curv = |h: f64| -2.0 * kop.evolved.mu_hat(f64::INFINITY, &[h]).unwrap().re.ln() / (h * h);
    let var = (4.0 * curv(0.05) - curv(0.1)) / 3.0;
    assert!((m2.value - var).abs() <= 3.0 * m2.std_error, "{m2:?} vs {var}");
    let p2 = moment(&s, 2.0).unwrap();
    assert_eq!(p2.value, m2.value);
    assert_eq!(moment(&s, 0.0).unwrap().value, 1.0);
}

#[test]
fn koponen_first_moment_outside_the_ball() {
    let kop = model("koponen");
    let m1 = measure_moment(&kop.triple().m, 1.0, Region::Outside).unwrap();
    let bound = 2.0 / (2.5 * std::f64::consts::E);
    assert!(m1.value <= bound && m1.value > 0.0, "{m1:?} vs {bound}");
    assert!(measure_moment(&kop.triple().m, 1.0, Region::Ball).is_err());
    let stab = stable_1d();
    assert!(measure_moment(&stab.triple().m, 2.0, Region::Outside).is_err());
}

#[test]
fn tail_probabilities() {
    let kop = model("koponen");
    let s = invariant(&kop, 100_000, 9);
    let g = s.column(0);
    let half = tail_probability(&g, 0.0, 0.0).unwrap();
    assert!((half.value - 0.5).abs() <= 3.0 * half.std_error, "{half:?}");
    let mut last = 1.0;
    for k in 0..40 {
        let p = tail_probability(&g, 0.0, 0.25 * k as f64).unwrap().value;
        assert!(p <= last);
        last = p;
    }
    assert_eq!(tail_probability(&g, 0.0, 1e6).unwrap().value, 0.0);
    assert!(tail_probability(&g, 0.0, -1.0).is_err());
}

#[test]
fn empirical_characteristic_function_basics() {
    let stab = model("alpha_stable");
    let s = invariant(&stab, 5000, 10);
    let one = empirical_char(&s, &[0.0, 0.0]).unwrap();
    assert_eq!((one.re.value, one.im.value), (1.0, 0.0));
    let a = empirical_char(&s, &[0.7, -0.2]).unwrap();
    let b = empirical_char(&s, &[-0.7, 0.2]).unwrap();
    assert!((a.re.value - b.re.value).abs() < 1e-12 && (a.im.value + b.im.value).abs() < 1e-12);
    assert!(empirical_char(&s, &[1.0]).is_err());
}

#[test]
fn standard_error_shrinks_like_root_n() {
    let kop = model("koponen");
    let (mut small, mut large) = (0.0, 0.0);
    for rep in 0..20 {
        let s = invariant(&kop, 4000, 100 + rep);
        let f = |x: &[f64]| x[0].tanh();
        let a = estimate_mean(f, &SampleSet::new(1, s.as_slice()[..2000].to_vec()).unwrap()).unwrap();
        let b = estimate_mean(f, &s).unwrap();
        small += a.std_error;
        large += b.std_error;
    }
    let ratio = large / small;
    let want = std::f64::consts::FRAC_1_SQRT_2;
    assert!(ratio > want / 1.3 && ratio < want * 1.3, "{ratio}");
}

#[test]
fn semigroup_action() {
    let kop = model("koponen");
    let ex = Executor::default();
    let scheme = JumpScheme::default();
    let f = scalar("bump", 0.0, vec![term(Shape::Gauss, 1.0)]);
    let at0 = semigroup_apply(&f, 0.0, &[0.4], 10, &kop.evolved, &scheme, RandomStream::new(1, 0), &ex).unwrap();
    assert_eq!((at0.value, at0.std_error), (f.value(&[0.4]), 0.0));
    let p1 = semigroup_apply(&f, 1.0, &[0.4], 20_000, &kop.evolved, &scheme, RandomStream::new(2, 0), &ex).unwrap();
    assert!(p1.value.abs() <= 1.0 + 3.0 * p1.std_error);
    let late = semigroup_apply(&f, 30.0, &[2.0], 100_000, &kop.evolved, &scheme, RandomStream::new(3, 0), &ex).unwrap();
    let s = invariant(&kop, 100_000, 4);
    let mean = estimate_mean(|x| f.value(x), &s).unwrap();
    let se = late.std_error.hypot(mean.std_error);
    assert!((late.value - mean.value).abs() <= 3.0 * se, "{late:?} vs {mean:?}");
    assert!(semigroup_apply(&f, -1.0, &[0.0], 1, &kop.evolved, &scheme, RandomStream::new(1, 0), &ex).is_err());
}
