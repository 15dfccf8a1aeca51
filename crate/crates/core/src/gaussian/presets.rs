//! Cat and GKP superpositions.

use num_complex::Complex64;

use super::measurement::Measurement;
use super::state::GaussianPureState;
use super::superposition::{GaussianOracles, GaussianSuperposition};
use crate::error::{Error, Result};
use crate::rejection::SuperpositionModel;

/// `(|α⟩ + |−α⟩)/N` with `N² = 2(1 + e^{−2|α|²})`.
pub fn cat_state(alpha: Complex64) -> Result<GaussianSuperposition> {
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "cat amplitude {alpha} is not finite"
        )));
    }
    let n = (2.0 * (1.0 + (-2.0 * alpha.norm_sqr()).exp())).sqrt();
    let c = Complex64::new(1.0 / n, 0.0);
    GaussianSuperposition::new(
        vec![
            GaussianPureState::coherent(alpha),
            GaussianPureState::coherent(-alpha),
        ],
        vec![c, c],
    )
}

/// Heterodyne model of the cat state.
pub fn cat_model(alpha: Complex64) -> Result<SuperpositionModel<GaussianOracles>> {
    cat_state(alpha)?.model(Measurement::Heterodyne)
}

/// Parameters of a truncated GKP state
/// `Σ_{|z| ≤ z_max} e^{−κ²z²/2} ψ_{z,Δ}`, where `ψ_{z,Δ}` is the vacuum
/// squeezed to position width `Δ` and displaced to `x = z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GkpParams {
    pub kappa: f64,
    pub delta: f64,
    pub z_max: u32,
    /// Largest allowed envelope weight outside the truncation, relative to
    /// the weight kept.
    pub tail_tolerance: f64,
}

impl GkpParams {
    pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-9;

    pub fn new(kappa: f64, delta: f64, z_max: u32) -> Self {
        GkpParams {
            kappa,
            delta,
            z_max,
            tail_tolerance: Self::DEFAULT_TAIL_TOLERANCE,
        }
    }

    pub fn with_tail_tolerance(self, tail_tolerance: f64) -> Self {
        GkpParams {
            tail_tolerance,
            ..self
        }
    }

    /// The configuration with `K ≈ 13.47`:
    /// `κ = 0.6`, `Δ = 0.3`, `z_max = 7`. Its tail mass is about `5e−6`, so the
    /// tolerance is relaxed to `1e−5`.
    pub fn reference() -> Self {
        GkpParams::new(0.6, 0.3, 7).with_tail_tolerance(1e-5)
    }

    pub fn chi(&self) -> usize {
        2 * self.z_max as usize + 1
    }

    fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.z_max == 0 {
            return Err(Error::InvalidArgument("z_max must be at least 1".into()));
        }
        if !(self.tail_tolerance >= 0.0) {
            return Err(Error::InvalidArgument(
                "tail tolerance must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// `Σ_{|z| > z_max} w_z / Σ_{|z| ≤ z_max} w_z` with `w_z = e^{−κ²z²/2}`.
pub fn gkp_tail_mass(kappa: f64, z_max: u32) -> f64 {
    let w = |z: f64| (-kappa * kappa * z * z / 2.0).exp();
    let kept: f64 = w(0.0) + 2.0 * (1..=z_max).map(|z| w(z as f64)).sum::<f64>();
    let mut tail = 0.0;
    let mut z = z_max as f64 + 1.0;
    loop {
        let t = 2.0 * w(z);
        tail += t;
        if t <= tail * 1e-17 || t == 0.0 {
            break;
        }
        z += 1.0;
    }
    tail / kept
}

/// Normalized truncated GKP superposition.
pub fn gkp_state(params: &GkpParams) -> Result<GaussianSuperposition> {
    params.validate()?;
    let tail = gkp_tail_mass(params.kappa, params.z_max);
    if tail > params.tail_tolerance {
        return Err(Error::TailMass {
            tail,
            tolerance: params.tail_tolerance,
        });
    }
    let zs = -(params.z_max as i64)..=params.z_max as i64;
    let components = zs
        .clone()
        .map(|z| GaussianPureState::displaced_squeezed(z as f64, params.delta))
        .collect::<Result<Vec<_>>>()?;
    let weights = zs
        .map(|z| {
            let z = z as f64;
            Complex64::new((-params.kappa * params.kappa * z * z / 2.0).exp(), 0.0)
        })
        .collect();
    GaussianSuperposition::normalized(components, weights)
}

/// Homodyne model of the truncated GKP state.
pub fn gkp_model(params: &GkpParams) -> Result<SuperpositionModel<GaussianOracles>> {
    gkp_state(params)?.model(Measurement::Homodyne)
}
