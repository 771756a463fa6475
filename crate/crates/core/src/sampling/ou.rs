//! Mild solutions of `dZ = BZ dt + dY`.
//!
//! `Z(T) = e^{TB} x_0 + Σ_i e^{(T-s_i)B} J_i + ∫_0^T e^{(T-s)B} (b - c_ε) ds + G`,
//! where the `J_i` are the jumps above `ε` at uniform times `s_i`, `c_ε` is
//! their compensator and `G` is Gaussian with covariance
//! `∫_0^T e^{sB} (Q + Σ_ε) e^{sB^T} ds`.

use nalgebra::DMatrix;
use rand::Rng;

use super::id::{add_gaussian, IdSampler, JumpScheme};
use crate::error::Result;
use crate::levy::{EvolvedTriple, LevyMeasure, LevyTriple, SemigroupFamily};
use crate::linalg;

/// Path sampler for a fixed horizon.
#[derive(Debug, Clone)]
pub struct OuSampler {
    id: IdSampler,
    semigroup: SemigroupFamily,
    horizon: f64,
    /// `e^{TB}`.
    flow: DMatrix<f64>,
    /// `∫_0^T e^{sB} (b - c_ε) ds`.
    drift: Vec<f64>,
    factor: Option<DMatrix<f64>>,
}

impl OuSampler {
    pub fn new(triple: &LevyTriple, semigroup: &SemigroupFamily, scheme: &JumpScheme, horizon: f64) -> Result<Self> {
        let id = IdSampler::new(triple, scheme)?;
        let d = triple.dimension();
        let flow = semigroup.matrix(horizon);
        let drift = linalg::integrated_exp_apply(semigroup.generator(), id.shift(), horizon);
        let factor = match id.factor() {
            None => None,
            Some(l) => {
                let cov = l * l.transpose();
                let qt = match semigroup.scalar_rate() {
                    Some(k) => cov * ((1.0 - (-2.0 * k * horizon).exp()) / (2.0 * k)),
                    None => {
                        let gauss = LevyTriple::new(vec![0.0; d], cov, LevyMeasure::zero(d))?;
                        EvolvedTriple::new(gauss, semigroup.clone())?.gaussian_qt(horizon)?
                    }
                };
                Some(linalg::psd_factor(&qt)?)
            }
        };
        Ok(Self { id, semigroup: semigroup.clone(), horizon, flow, drift, factor })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `Z(T)` started from `x0`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, x0: &[f64], out: &mut [f64]) {
        let d = out.len();
        let start = linalg::mat_vec(&self.flow, x0);
        for i in 0..d {
            out[i] = start[i] + self.drift[i];
        }
        let jumps = self.id.jumps();
        let mut y = vec![0.0; d];
        let n = jumps.count(rng, self.horizon);
        let scalar = self.semigroup.scalar_rate();
        for _ in 0..n {
            let lag = self.horizon * rng.random::<f64>();
            jumps.jump(rng, &mut y);
            match scalar {
                Some(k) => {
                    let c = (-k * lag).exp();
                    for (o, v) in out.iter_mut().zip(&y) {
                        *o += c * v;
                    }
                }
                None => {
                    for (o, v) in out.iter_mut().zip(self.semigroup.apply(lag, &y)) {
                        *o += v;
                    }
                }
            }
        }
        if let Some(l) = &self.factor {
            add_gaussian(rng, l, 1.0, out);
        }
    }
}
