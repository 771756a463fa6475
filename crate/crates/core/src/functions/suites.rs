//! Named families of test functions used by the inequality checkers.

use std::sync::Arc;

use super::profile::{Additive, Composite, Profile, ScalarMap, Term};
use super::shape::Shape;
use super::CylindricalFunction;
use crate::error::{invalid, Result};

pub const SUITE_NAMES: [&str; 3] = ["positive", "lipschitz", "centred"];

/// A named list of functions on `R^d`.
#[derive(Debug, Clone)]
pub struct Suite {
    pub name: &'static str,
    pub functions: Vec<CylindricalFunction>,
}

fn t(shape: Shape, scale: f64, rate: f64, shift: f64) -> Term {
    Term::new(shape, scale, rate, shift)
}

/// Directions cycled through by the one-dimensional members.
fn directions(d: usize) -> Vec<Vec<f64>> {
    let unit = |k: usize| {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        e
    };
    if d == 1 {
        return vec![vec![1.0]];
    }
    let diag = {
        let mut e = vec![0.0; d];
        e[0] = std::f64::consts::FRAC_1_SQRT_2;
        e[1] = std::f64::consts::FRAC_1_SQRT_2;
        e
    };
    vec![unit(0), unit(1), diag]
}

fn build(d: usize, members: Vec<(&str, Arc<dyn Profile>)>, pair: Vec<(&str, Arc<dyn Profile>)>) -> Vec<CylindricalFunction> {
    let dirs = directions(d);
    let mut out: Vec<CylindricalFunction> = members
        .into_iter()
        .enumerate()
        .map(|(i, (name, core))| {
            CylindricalFunction::new(name, vec![dirs[i % dirs.len()].clone()], core).expect("suite member")
        })
        .collect();
    if d >= 2 {
        for (name, core) in pair {
            let b = vec![dirs[0].clone(), dirs[1].clone()];
            out.push(CylindricalFunction::new(name, b, core).expect("suite member"));
        }
    }
    out
}

fn one(offset: f64, terms: Vec<Term>) -> Arc<dyn Profile> {
    Arc::new(Additive::scalar(offset, terms))
}

fn two(offset: f64, terms: Vec<Term>) -> Arc<dyn Profile> {
    Arc::new(Additive::new(2, offset, terms).expect("two-variable profile"))
}

/// Functions with certified infimum in `[0.2, 1]`.
fn positive(d: usize) -> Vec<CylindricalFunction> {
    let members: Vec<(&str, Arc<dyn Profile>)> = vec![
        ("gauss_bump", one(0.5, vec![t(Shape::Gauss, 1.0, 1.0, 0.0)])),
        ("gauss_wide", one(0.3, vec![t(Shape::Gauss, 1.0, 0.5, 0.0)])),
        ("gauss_shifted", one(0.5, vec![t(Shape::Gauss, 1.0, 1.0, 1.0)])),
        ("tanh_shift", one(2.0, vec![t(Shape::Tanh, 1.0, 1.0, 0.0)])),
        ("tanh_steep", one(1.5, vec![t(Shape::Tanh, 1.0, 2.0, 0.5)])),
        ("lorentz", one(0.4, vec![t(Shape::Lorentz, 1.0, 1.0, 0.0)])),
        ("lorentz_tall", one(0.2, vec![t(Shape::Lorentz, 2.0, 1.0, -1.0)])),
        ("cos_shift", one(2.0, vec![t(Shape::Cos, 1.0, 1.0, 0.0)])),
        ("sin_slow", one(1.5, vec![t(Shape::Sin, 1.0, 0.5, 0.0)])),
        ("atan_shift", one(2.0, vec![t(Shape::Atan, 1.0, 1.0, 0.0)])),
        ("ratio_shift", one(1.25, vec![t(Shape::Ratio, 1.0, 1.0, 0.0)])),
        (
            "exp_tanh",
            Arc::new(Composite { inner: one(0.0, vec![t(Shape::Tanh, 0.5, 1.0, 0.0)]), map: ScalarMap::Exp }),
        ),
    ];
    let pair: Vec<(&str, Arc<dyn Profile>)> = vec![(
        "tanh_cos_pair",
        two(2.0, vec![t(Shape::Tanh, 0.5, 1.0, 0.0).on(0), t(Shape::Cos, 0.5, 1.0, 0.0).on(1)]),
    )];
    build(d, members, pair)
}

/// Functions with certified Lipschitz constant at most one.
fn lipschitz(d: usize) -> Vec<CylindricalFunction> {
    let members: Vec<(&str, Arc<dyn Profile>)> = vec![
        ("soft_abs", one(0.0, vec![t(Shape::SoftAbs, 1.0, 1.0, 0.0)])),
        ("soft_abs_sharp", one(0.0, vec![t(Shape::SoftAbs, 0.5, 2.0, 0.0)])),
        ("soft_abs_shifted", one(0.0, vec![t(Shape::SoftAbs, 1.0, 1.0, 1.0)])),
        (
            "soft_abs_capped",
            Arc::new(Composite {
                inner: one(0.0, vec![t(Shape::SoftAbs, 1.0, 1.0, 0.0)]),
                map: ScalarMap::Cap { c: 3.0 },
            }),
        ),
        (
            "soft_distance",
            one(0.0, vec![t(Shape::SoftAbs, 0.5, 1.0, 1.0), t(Shape::SoftAbs, 0.5, 1.0, -1.0)]),
        ),
        ("coordinate", one(0.0, vec![t(Shape::Identity, 1.0, 1.0, 0.0)])),
        ("tanh", one(0.0, vec![t(Shape::Tanh, 1.0, 1.0, 0.0)])),
        ("sin", one(0.0, vec![t(Shape::Sin, 1.0, 1.0, 0.0)])),
        ("atan", one(0.0, vec![t(Shape::Atan, 1.0, 1.0, 0.0)])),
        ("ratio", one(0.0, vec![t(Shape::Ratio, 1.0, 1.0, 0.0)])),
        ("log_cosh", one(0.0, vec![t(Shape::LogCosh, 1.0, 1.0, 0.0)])),
        ("gauss", one(0.0, vec![t(Shape::Gauss, 1.0, 1.0, 0.0)])),
    ];
    let pair: Vec<(&str, Arc<dyn Profile>)> = vec![(
        "soft_abs_pair",
        two(0.0, vec![t(Shape::SoftAbs, 0.5, 1.0, 0.0).on(0), t(Shape::SoftAbs, 0.5, 1.0, 0.0).on(1)]),
    )];
    build(d, members, pair)
}

/// Bounded functions with bounded derivatives; the checkers centre them.
fn centred(d: usize) -> Vec<CylindricalFunction> {
    let members: Vec<(&str, Arc<dyn Profile>)> = vec![
        ("tanh", one(0.0, vec![t(Shape::Tanh, 1.0, 1.0, 0.0)])),
        ("tanh_steep", one(0.0, vec![t(Shape::Tanh, 1.0, 3.0, 0.2)])),
        ("sin", one(0.0, vec![t(Shape::Sin, 1.0, 1.0, 0.0)])),
        ("sin_fast", one(0.0, vec![t(Shape::Sin, 1.0, 2.0, 0.0)])),
        ("cos", one(0.0, vec![t(Shape::Cos, 1.0, 1.0, 0.0)])),
        ("gauss_bump", one(0.0, vec![t(Shape::Gauss, 1.0, 1.0, 0.0)])),
        ("gauss_slope", one(0.0, vec![t(Shape::GaussSlope, 1.0, 1.0, 0.0)])),
        ("lorentz", one(0.0, vec![t(Shape::Lorentz, 1.0, 1.0, 0.5)])),
        ("atan", one(0.0, vec![t(Shape::Atan, 1.0, 1.0, 0.0)])),
        ("ratio_shifted", one(0.0, vec![t(Shape::Ratio, 1.0, 1.0, -0.5)])),
        ("sin_plus_tanh", one(0.0, vec![t(Shape::Sin, 0.5, 1.0, 0.0), t(Shape::Tanh, 0.5, 2.0, 0.0)])),
    ];
    let pair: Vec<(&str, Arc<dyn Profile>)> = vec![(
        "sin_cos_pair",
        two(0.0, vec![t(Shape::Sin, 1.0, 1.0, 0.0).on(0), t(Shape::Cos, 1.0, 1.0, 0.0).on(1)]),
    )];
    build(d, members, pair)
}

/// The suite called `name` on `R^d`.
pub fn suite(name: &str, d: usize) -> Result<Suite> {
    let (name, functions) = match name {
        "positive" => ("positive", positive(d)),
        "lipschitz" => ("lipschitz", lipschitz(d)),
        "centred" => ("centred", centred(d)),
        other => return Err(invalid(format!("unknown suite '{other}' (known: {})", SUITE_NAMES.join(", ")))),
    };
    Ok(Suite { name, functions })
}

/// All suites on `R^d`.
pub fn standard_suites(d: usize) -> Vec<Suite> {
    SUITE_NAMES.iter().map(|n| suite(n, d).expect("known suite")).collect()
}
