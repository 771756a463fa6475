use std::sync::Arc;

use mehler::functions::{Additive, CylindricalFunction, Shape, Term};
use mehler::levy::hypotheses::radial_grid;
use mehler::levy::*;
use mehler::quad::{self, Tolerance};
use mehler::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;

fn stable_1d(alpha: f64) -> LevyMeasure {
    LevyMeasure::from_density(
        1,
        Arc::new(move |y: &[f64]| y[0].abs().powf(-1.0 - alpha)),
        alpha,
        TailClass::Power { index: alpha },
    )
    .unwrap()
}

#[test]
fn stable_moments_match_closed_forms() {
    let m = stable_1d(1.5);
    assert!(m.is_symmetric());
    // ∫_0^1 r² r^{-2.5} = 1/0.5, ∫_1^∞ r^{-2.5} = 1/1.5, two rays.
    let t = m.truncated_second_moment().unwrap();
    assert!((t - 2.0 * (2.0 + 1.0 / 1.5)).abs() < 1e-9, "{t}");
    let out = m.moment_outside_unit(1.0);
    assert!((out - 2.0 / 0.5).abs() < 1e-8, "{out}");
    assert!(m.moment(1.0).is_infinite());
    assert!(m.moment_outside_unit(1.5).is_infinite());
}

#[test]
fn declared_order_is_checked() {
    let bad = LevyMeasure::from_density(
        1,
        Arc::new(|y: &[f64]| y[0].abs().powf(-2.5)),
        0.5,
        TailClass::Power { index: 1.5 },
    );
    assert!(bad.is_err());
}

#[test]
fn polar_density_mass_matches_one_dimensional_integral() {
    // Isotropic e^{-|y|²}|y|^{-2-1}: mass outside 0.5 is 2π ∫_0.5^∞ e^{-r²} r^{-2} dr.
    let m = LevyMeasure::from_density(
        2,
        Arc::new(|y: &[f64]| {
            let r2 = y[0] * y[0] + y[1] * y[1];
            (-r2).exp() * r2.powf(-1.5)
        }),
        1.0,
        TailClass::Gaussian { rate: 1.0 },
    )
    .unwrap();
    assert!(m.is_symmetric());
    let got = m.mass_outside(0.5).unwrap();
    let want = 2.0
        * std::f64::consts::PI
        * quad::adaptive(|r: f64| (-r * r).exp() / (r * r), 0.5, 12.0, Tolerance::default())
            .unwrap()
            .value;
    assert!((got - want).abs() < 1e-9 * want);
}

fn koponen_measure() -> LevyMeasure {
    LevyMeasure::from_density(
        1,
        Arc::new(|y: &[f64]| (-y[0] * y[0]).exp() * y[0].abs().powf(-2.5)),
        1.5,
        TailClass::Gaussian { rate: 1.0 },
    )
    .unwrap()
}

#[test]
fn psi_matches_direct_quadrature_and_inverts() {
    let m = koponen_measure();
    for &s in &[0.0, 0.5, 2.0, 6.0] {
        let direct = 2.0
            * quad::adaptive(|y: f64| y * (s * y - y * y).exp() * y.powf(-2.5), 1.0, 40.0, Tolerance::default())
                .unwrap()
                .value;
        let got = psi_of(&m, s).unwrap();
        assert!((got - direct).abs() < 1e-9 * direct, "s={s}: {got} vs {direct}");
    }
    let v = psi_of(&m, 2.0).unwrap();
    assert!((psi_inverse(&m, v).unwrap() - 2.0).abs() < 1e-10);
    assert!(psi_inverse(&m, 0.5 * psi_of(&m, 0.0).unwrap()).is_err());
    assert_eq!(psi_inverse_generalised(&m, 0.0).unwrap(), 0.0);
}

#[test]
fn heavy_tails_have_no_exponential_moments() {
    let m = LevyMeasure::from_density(
        1,
        Arc::new(|y: &[f64]| y[0].abs().powf(-2.5)),
        1.5,
        TailClass::Power { index: 1.5 },
    )
    .unwrap();
    assert!(matches!(psi_of(&m, 0.1), Err(Error::Divergent(_))));
    assert!(matches!(ms_of(&m, 1.0), Err(Error::Divergent(_))));
}

fn koponen_evolved() -> EvolvedTriple {
    let m = LevyMeasure::from_density(
        1,
        Arc::new(|y: &[f64]| (-y[0] * y[0]).exp() * y[0].abs().powf(-2.5)),
        1.5,
        TailClass::Gaussian { rate: 1.0 },
    )
    .unwrap();
    EvolvedTriple::new(LevyTriple::pure_jump(m), SemigroupFamily::scalar(1, 1.0).unwrap()).unwrap()
}

#[test]
fn koponen_clauses_pass_with_closed_form_values() {
    let report = check_hypotheses(&koponen_evolved());
    assert!(report.all_pass(), "{report:?}");
    let first = report.get("first_moment_outside_unit").unwrap().value;
    assert!(first <= 2.0 / (2.5 * 1f64.exp()));
    let small = report.get("integrated_small_jumps").unwrap().value;
    assert!(small <= 1.0 / (2.0 * 0.5625 * 0.25));
}

#[test]
fn zero_eigenvalue_fails_stability() {
    let m = LevyMeasure::zero(2);
    let b = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 0.0]);
    let ev = EvolvedTriple::new(LevyTriple::pure_jump(m), SemigroupFamily::new(b).unwrap()).unwrap();
    let report = check_hypotheses(&ev);
    assert!(report.failures().contains(&"exponential_stability"));
}

#[test]
fn koponen_domination_and_search() {
    let ev = koponen_evolved();
    let grid = radial_grid(&[1.0], 1e-3, 10.0, 60);
    for &t in &[0.1, 1.0, 5.0] {
        assert!(check_domination(&ev, &|t| (-1.5 * t).exp(), t, &grid).pass);
    }
    assert!(!check_domination(&ev, &|_| 0.0, 1.0, &grid).pass);
    let fit = domination_search(&ev, &[0.1, 0.5, 1.0, 2.0], &grid).unwrap();
    assert!((fit.rate - 1.5).abs() < 1e-4, "{fit:?}");
}

fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

#[test]
fn symmetric_stable_exponent_matches_closed_form() {
    // ∫_R (1 - cos(yξ)) |y|^{-1-α} dy = 2 Γ(-α)(-cos(πα/2))... written as
    // -2 Γ(-α) cos(πα/2) |ξ|^α.
    for &alpha in &[0.5, 1.2, 1.5, 1.8] {
        let m = LevyMeasure::from_density(
            1,
            Arc::new(move |y: &[f64]| y[0].abs().powf(-1.0 - alpha)),
            alpha,
            TailClass::Power { index: alpha },
        )
        .unwrap();
        let t = LevyTriple::pure_jump(m);
        for &xi in &[0.01, 0.3, 1.0, 2.0, 7.5] {
            let got = characteristic_exponent(&t, &[xi]).unwrap();
            let want = -2.0 * gamma(-alpha) * (std::f64::consts::PI * alpha / 2.0).cos()
                * xi.powf(alpha);
            assert!((got.re - want).abs() < 1e-9 * want.max(1.0), "α={alpha} ξ={xi}: {got} vs {want}");
            assert!(got.im.abs() < 1e-9, "imaginary part {}", got.im);
        }
    }
}

#[test]
fn one_sided_exponent_matches_quadrature_oracle() {
    // One-sided tempered density e^{-y} y^{-1.5} on y > 0.
    let m = LevyMeasure::from_density(
        1,
        Arc::new(|y: &[f64]| if y[0] > 0.0 { (-y[0]).exp() * y[0].powf(-1.5) } else { 0.0 }),
        0.5,
        TailClass::Exponential { rate: 1.0 },
    )
    .unwrap();
    let t = LevyTriple::new(vec![0.3], DMatrix::from_element(1, 1, 0.5), m).unwrap();
    let xi = 1.7;
    let got = characteristic_exponent(&t, &[xi]).unwrap();
    // Closed form of the tempered stable integral for α = 1/2:
    // ∫_0^∞ (e^{iyξ} - 1) e^{-y} y^{-3/2} dy = Γ(-1/2)[(1 - iξ)^{1/2} - 1].
    let g = gamma(-0.5);
    let tempered = (Complex64::new(1.0, -xi).sqrt() - 1.0) * g;
    // Compensator: -iξ ∫_0^1 y e^{-y} y^{-3/2} dy.
    let comp = quad::near_zero(|y: f64| (-y).exp() * y.powf(-0.5), 1.0, -0.5, Tolerance::default())
        .unwrap()
        .value;
    let integral = tempered - Complex64::new(0.0, xi * comp);
    let want = Complex64::new(0.5 * 0.5 * xi * xi, -0.3 * xi) - integral;
    assert!((got - want).norm() < 1e-9, "{got} vs {want}");
}

#[test]
fn scalar_and_symmetric_flows_agree_with_expm() {
    let b = DMatrix::from_row_slice(2, 2, &[-1.0, 0.3, 0.3, -2.0]);
    let sg = SemigroupFamily::new(b.clone()).unwrap();
    let direct = (&b * 0.7).exp();
    assert!((sg.matrix(0.7) - direct).amax() < 1e-13);
    let sc = SemigroupFamily::scalar(3, 1.5).unwrap();
    assert_eq!(sc.scalar_rate(), Some(1.5));
    assert!((sc.apply(2.0, &[1.0, 0.0, 0.0])[0] - (-3.0f64).exp()).abs() < 1e-15);
}

#[test]
fn non_normal_growth_bound_dominates_norm() {
    let b = DMatrix::from_row_slice(2, 2, &[-1.0, 5.0, 0.0, -1.0]);
    let sg = SemigroupFamily::new(b).unwrap();
    let g = sg.growth_bound();
    assert!(g.k > 1.0 && g.omega < 0.0);
    for i in 0..200 {
        let t = i as f64 * 0.1;
        assert!(sg.matrix(t).norm() <= g.k * (g.omega * t).exp() * (1.0 + 1e-9));
    }
}

#[test]
fn rule_reproduces_radial_moments() {
    for tail in [TailClass::Gaussian { rate: 1.0 }, TailClass::Power { index: 1.5 }] {
        let gauss = matches!(tail, TailClass::Gaussian { .. });
        let m = LevyMeasure::from_density(
            1,
            Arc::new(move |y: &[f64]| {
                let a = y[0].abs();
                if gauss { (-a * a).exp() * a.powf(-2.5) } else { a.powf(-2.5) }
            }),
            1.5,
            tail,
        )
        .unwrap();
        let rule = MeasureRule::new(&m, 1e-3).unwrap();
        let got = rule.integrate_outer(|y| 1.0f64.min(y[0] * y[0]));
        let want = m.radial_moment(2.0, 1e-3, 1.0).unwrap() + m.radial_moment(0.0, 1.0, f64::INFINITY).unwrap();
        assert!((got - want).abs() < 1e-10 * want, "{tail:?}: {got} vs {want}");
        let small = rule.rays.iter().map(|r| r.small[0]).sum::<f64>();
        let want_small = m.radial_moment(2.0, 0.0, 1e-3).unwrap();
        assert!((small - want_small).abs() < 1e-12 * want_small);
    }
}

#[test]
fn drift_term_alone_for_a_negligible_measure() {
    let m = LevyMeasure::from_density(
        1,
        Arc::new(|y: &[f64]| 1e-12 * (-y[0] * y[0]).exp() * y[0].abs().powf(-2.5)),
        1.5,
        TailClass::Gaussian { rate: 1.0 },
    )
    .unwrap();
    let triple = LevyTriple::pure_jump(m);
    let sg = SemigroupFamily::scalar(1, 1.0).unwrap();
    let f = CylindricalFunction::along("sin", vec![1.0], Additive::scalar(0.0, vec![Term::new(Shape::Sin, 1.0, 1.0, 0.0)]))
        .unwrap();
    let v = apply_generator(&triple, &sg, &f, &[1.0]).unwrap();
    assert!((v + 1f64.cos()).abs() < 1e-10, "{v}");
    let c = CylindricalFunction::along("c", vec![1.0], Additive::scalar(3.0, vec![])).unwrap();
    assert_eq!(apply_generator(&triple, &sg, &c, &[0.4]).unwrap(), 0.0);
}

fn koponen_drift(b: f64, beta: f64) -> EvolvedTriple {
    let m = koponen_evolved().triple().m.clone();
    let triple = LevyTriple::new(vec![b], DMatrix::zeros(1, 1), m).unwrap();
    EvolvedTriple::new(triple, SemigroupFamily::scalar(1, beta).unwrap()).unwrap()
}

fn stable_2d() -> EvolvedTriple {
    let atoms = vec![(vec![1.0, 0.0], 1.0), (vec![-1.0, 0.0], 1.0), (vec![0.0, 1.0], 1.0), (vec![0.0, -1.0], 1.0)];
    let m = LevyMeasure::spherical(
        atoms,
        Arc::new(|r: f64| if r > 0.0 { r.powf(-2.5) } else { 0.0 }),
        1.5,
        TailClass::Power { index: 1.5 },
    )
    .unwrap();
    EvolvedTriple::new(LevyTriple::pure_jump(m), SemigroupFamily::scalar(2, 1.0).unwrap()).unwrap()
}

#[test]
fn mu_hat_is_a_characteristic_function() {
    let ev = koponen_drift(0.7, 1.0);
    for &xi in &[-3.0, -0.4, 0.9, 2.5] {
        assert!((ev.mu_hat(0.0, &[xi]).unwrap() - 1.0).norm() < 1e-14);
        let t = 0.8;
        let v = ev.mu_hat(t, &[xi]).unwrap();
        assert!(v.norm() <= 1.0 + 1e-12);
        let w = ev.mu_hat(t, &[-xi]).unwrap();
        assert!((v - w.conj()).norm() < 1e-10);
    }
    assert!((ev.mu_hat(1.3, &[0.0]).unwrap() - 1.0).norm() < 1e-14);
}

#[test]
fn semigroup_consistency_on_random_times() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let kop = koponen_drift(0.5, 1.0);
    let st = stable_2d();
    for _ in 0..20 {
        let (t, s) = (rng.random_range(0.05..2.0), rng.random_range(0.05..2.0));
        let xi = rng.random_range(-3.0..3.0);
        assert!(kop.semigroup_consistency(t, s, &[xi]).unwrap() <= 1e-8);
        let xi2 = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        assert!(st.semigroup_consistency(t, s, &xi2).unwrap() <= 1e-8);
    }
    assert!(st.semigroup_consistency(0.3, 0.7, &[1.0, 1.0]).unwrap() <= 1e-8);
}

#[test]
fn drift_converges_to_b_over_beta() {
    // The jump part is symmetric, so b_t = ∫_0^t e^{-βs} b ds.
    for &(b, beta) in &[(2.0, 1.0), (1.0, 2.0)] {
        let ev = koponen_drift(b, beta);
        let inf = ev.drift_bt(f64::INFINITY).unwrap()[0];
        assert!((inf - b / beta).abs() < 1e-6, "{inf}");
        let t = 20.0 / beta;
        assert!((ev.drift_bt(t).unwrap()[0] - b / beta).abs() < 1e-6);
        let half = ev.drift_bt(0.5).unwrap()[0];
        assert!((half - b * (1.0 - (-0.5 * beta).exp()) / beta).abs() < 1e-8, "{half}");
    }
}

#[test]
fn gaussian_covariance_integrates_the_flow() {
    let m = koponen_evolved().triple().m.clone();
    let triple = LevyTriple::new(vec![0.0], DMatrix::from_element(1, 1, 3.0), m.clone()).unwrap();
    let ev = EvolvedTriple::new(triple, SemigroupFamily::scalar(1, 2.0).unwrap()).unwrap();
    let mut prev = 0.0;
    for &t in &[0.1, 0.5, 1.0, 4.0] {
        let q = ev.gaussian_qt(t).unwrap()[(0, 0)];
        assert!((q - 3.0 * (1.0 - (-4.0 * t).exp()) / 4.0).abs() < 1e-10);
        assert!(q > prev);
        prev = q;
    }
    assert!((ev.gaussian_qt(f64::INFINITY).unwrap()[(0, 0)] - 0.75).abs() < 1e-10);
    let zero = EvolvedTriple::new(LevyTriple::pure_jump(m), SemigroupFamily::scalar(1, 2.0).unwrap()).unwrap();
    assert_eq!(zero.gaussian_qt(1.0).unwrap()[(0, 0)], 0.0);
}

#[test]
fn invariant_density_matches_the_substituted_integral() {
    // m_∞(z) = |z|^{-1-2s} ∫_1^∞ e^{-u²z²} u^{-1-2s} du for c = β = 1, s = 3/4.
    let ev = koponen_evolved();
    for &z in &[0.5, 1.0, 2.0] {
        let tail = quad::semi_infinite(|u| (-u * u * z * z).exp() * u.powf(-2.5), 1.0, Tolerance::new(1e-15, 1e-12))
            .unwrap()
            .value;
        let want = z.powf(-2.5) * tail;
        for y in [z, -z] {
            let got = ev.levy_mt_density(f64::INFINITY, &[y]).unwrap();
            assert!((got - want).abs() <= 1e-7 * want, "z = {y}: {got} vs {want}");
        }
    }
}

#[test]
fn evolved_measure_grows_in_time() {
    let ev = koponen_evolved();
    let mut prev = 0.0;
    for &t in &[0.1, 0.5, 1.0, 3.0, f64::INFINITY] {
        let v = ev.levy_mt_density(t, &[0.7]).unwrap();
        assert!(v > prev);
        prev = v;
    }
    assert_eq!(ev.levy_mt_density(0.0, &[0.7]).unwrap(), 0.0);
    // T_s contracts, so ∫(1∧|y|²) M_t ≤ t ∫(1∧|y|²) M.
    let total = ev.triple().m.truncated_second_moment().unwrap();
    for &t in &[0.5, 1.0, 2.0] {
        let mt = ev.evolved_measure(t).unwrap().truncated_second_moment().unwrap();
        assert!(mt <= t * total * (1.0 + 1e-8), "t = {t}: {mt}");
    }
}

#[test]
fn mass_on_a_half_line_is_time_times_bump_mass() {
    // T_s maps (0, ∞) into itself, so M_t((0, ∞)) = t M((0, ∞)).
    let bump = |y: f64| if (y - 2.0).abs() < 0.5 { (1.0 - 4.0 * (y - 2.0).powi(2)).powi(2) } else { 0.0 };
    let m = LevyMeasure::from_density(1, Arc::new(move |y: &[f64]| bump(y[0])), 0.0, TailClass::Compact { radius: 2.5 })
        .unwrap();
    let mass = quad::adaptive(bump, 1.5, 2.5, Tolerance::new(1e-14, 1e-12)).unwrap().value;
    let ev = EvolvedTriple::new(LevyTriple::pure_jump(m), SemigroupFamily::scalar(1, 1.0).unwrap()).unwrap();
    for &t in &[0.05f64, 0.2, 0.5] {
        let lo = 1.5 * (-t).exp();
        let got = quad::adaptive(|y| ev.levy_mt_density(t, &[y]).unwrap(), lo * 0.99, 2.5, Tolerance::new(1e-12, 1e-9))
            .unwrap()
            .value;
        assert!((got - t * mass).abs() <= 1e-6 * t * mass, "t = {t}: {got} vs {}", t * mass);
    }
}

#[test]
fn standard_measures_satisfy_the_hypotheses() {
    assert!(check_hypotheses(&koponen_drift(1.0, 2.0)).all_pass());
    let report = check_hypotheses(&stable_2d());
    assert!(report.all_pass(), "{report:?}");
    // First moment outside the unit ball: 4 atoms × ∫_1^∞ r^{-1.5} dr = 8.
    let first = report.get("first_moment_outside_unit").unwrap().value;
    assert!((first - 8.0).abs() < 1e-6, "{first}");
}

#[test]
fn stable_domination_holds_with_equality() {
    // M_∞ ∘ T_t^{-1} = e^{-αβt} M_∞ for the scalar flow.
    let ev = stable_2d();
    let grid = radial_grid(&[1.0, 0.0], 1e-2, 10.0, 40);
    for &t in &[0.2, 1.0, 3.0] {
        let d = check_domination(&ev, &|t| (-1.5 * t).exp(), t, &grid);
        assert!(d.pass);
        assert!(d.worst_margin.abs() <= 1e-8 * d.scale, "{d:?}");
    }
}

#[test]
fn psi_is_increasing_and_dominates_its_constant() {
    let m = koponen_measure();
    let c = 2.0 * quad::semi_infinite(|y| (-y * y).exp() * y.powf(-1.5), 1.0, Tolerance::new(1e-15, 1e-12)).unwrap().value;
    let mut prev = 0.0;
    for &a in &[0.1, 0.5, 1.0, 2.0, 4.0] {
        let p = psi_of(&m, a).unwrap();
        assert!(p > prev);
        assert!(p >= c * a.exp() * (1.0 - 1e-10), "α = {a}");
        prev = p;
    }
}

fn exp_square() -> CylindricalFunction {
    CylindricalFunction::along(
        "exp(-x²)",
        vec![1.0],
        Additive::scalar(0.0, vec![Term::new(Shape::Gauss, 1.0, std::f64::consts::SQRT_2, 0.0)]),
    )
    .unwrap()
}

#[test]
fn generator_matches_trapezoid_on_koponen() {
    // f(x) = e^{-x²}, M(dy) = e^{-y²}|y|^{-5/2} dy, Bx = -x, b = 0.
    let x = 0.5f64;
    let f = |u: f64| (-u * u).exp();
    let f0 = f(x);
    let d1 = -2.0 * x * f0;
    let d2 = (4.0 * x * x - 2.0) * f0;
    let d3 = (12.0 * x - 8.0 * x.powi(3)) * f0;
    let d4 = (16.0 * x.powi(4) - 48.0 * x * x + 12.0) * f0;
    // `weight` is the compensator weight, ½ on the sphere |y| = 1.
    let jump = |y: f64, weight: f64| {
        let inc = if y.abs() < 1e-3 {
            d2 * y * y / 2.0 + d3 * y.powi(3) / 6.0 + d4 * y.powi(4) / 24.0
        } else {
            f(x + y) - f0 - weight * d1 * y
        };
        inc * (-y * y).exp() * y.abs().powf(-2.5)
    };
    // y = ±u², integrand times 2u; trapezoid on [0, 4] with a node at u = 1.
    let n = 200_000;
    let h = 4.0 / n as f64;
    let mut sum = 0.0;
    for i in 0..=n {
        let u = i as f64 * h;
        let weight = match (4 * i).cmp(&n) {
            std::cmp::Ordering::Less => 1.0,
            std::cmp::Ordering::Equal => 0.5,
            std::cmp::Ordering::Greater => 0.0,
        };
        let g = if i == 0 { 2.0 * d2 } else { (jump(u * u, weight) + jump(-u * u, weight)) * 2.0 * u };
        sum += if i == 0 || i == n { 0.5 * g } else { g };
    }
    let want = -x * d1 + sum * h;
    let ev = koponen_evolved();
    let got = apply_generator(ev.triple(), ev.semigroup(), &exp_square(), &[x]).unwrap();
    assert!((got - want).abs() < 1e-6, "{got} vs {want}");
}

#[test]
fn generator_on_cosines_uses_the_exponent() {
    // L cos(ξx) = Re[e^{iξx}(iξ(Bx) - λ(ξ))] with Bx = -x.
    let ev = koponen_drift(0.3, 1.0);
    for &(xi, x) in &[(1.0, 0.4), (2.5, -1.2), (0.3, 2.0)] {
        let f = CylindricalFunction::along("cos", vec![1.0], Additive::scalar(0.0, vec![Term::new(Shape::Cos, 1.0, xi, 0.0)]))
            .unwrap();
        let lam = characteristic_exponent(ev.triple(), &[xi]).unwrap();
        let want = (Complex64::from_polar(1.0, xi * x) * (Complex64::new(0.0, -xi * x) - lam)).re;
        let got = apply_generator(ev.triple(), ev.semigroup(), &f, &[x]).unwrap();
        assert!((got - want).abs() < 1e-6 * (1.0 + want.abs()), "ξ = {xi}, x = {x}: {got} vs {want}");
    }
}

#[test]
fn exponent_vanishes_at_zero_and_matches_trapezoid() {
    let ev = koponen_evolved();
    assert_eq!(characteristic_exponent(ev.triple(), &[0.0]).unwrap(), Complex64::new(0.0, 0.0));
    // λ(1) = 2 ∫_0^∞ (1 - cos y) e^{-y²} y^{-5/2} dy; y = u² again.
    let g = |u: f64| {
        let y = u * u;
        let one_minus_cos = if y < 1e-3 { y * y / 2.0 - y.powi(4) / 24.0 } else { 1.0 - y.cos() };
        2.0 * one_minus_cos * (-y * y).exp() * y.powf(-2.5) * 2.0 * u
    };
    let n = 200_000;
    let h = 4.0 / n as f64;
    let want: f64 = (1..n).map(|i| g(i as f64 * h)).sum::<f64>() * h + 0.5 * h * (2.0 + g(4.0));
    let got = characteristic_exponent(ev.triple(), &[1.0]).unwrap();
    assert!(got.im.abs() < 1e-12);
    assert!((got.re - want).abs() < 1e-7, "{} vs {want}", got.re);
}

#[test]
fn contraction_shortcut_fails_for_jumps_outside_the_unit_ball() {
    // (1 ∧ |e^{-s} y|²) ≤ e^{-2s}(1 ∧ |y|²) is false for |y| > 1, and the
    // integrated form (1 - e^{-2t})/2 ∫(1∧|y|²) M is exceeded on Koponen.
    let ev = koponen_evolved();
    let total = ev.triple().m.truncated_second_moment().unwrap();
    let t = 2.0f64;
    let mt = ev.evolved_measure(t).unwrap().truncated_second_moment().unwrap();
    let shortcut = (1.0 - (-2.0 * t).exp()) / 2.0 * total;
    assert!(mt > shortcut && mt <= t * total, "{mt} vs {shortcut}");
}
