use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::state::GaussianPureState;
use super::wave::ModeWave;
use crate::error::{Error, Result};
use crate::linalg::pinv_symmetric;

/// A Gaussian measurement applied to every mode.
///
/// Heterodyne and general-dyne outcomes are points `m = (x₁, p₁, …)` in
/// phase space, with densities relative to `λ = dm / 2^N` (Lebesgue measure
/// in the complex plane of `β = (x + ip)/√2`). Homodyne outcomes are position
/// readings `(x₁, …, x_N)` with densities relative to `dx`.
#[derive(Debug, Clone, PartialEq)]
pub enum Measurement {
    Heterodyne,
    Homodyne,
    /// Projection onto squeezed coherent states with covariance
    /// `S Sᵀ = diag(z₁², 1/z₁², …)`. `z = 1` is heterodyne; `z → 0` approaches
    /// homodyne.
    General {
        squeeze: Vec<f64>,
    },
}

impl Measurement {
    pub fn outcome_dim(&self, modes: usize) -> usize {
        match self {
            Measurement::Homodyne => modes,
            _ => 2 * modes,
        }
    }

    /// Per-mode squeezing, `None` for homodyne.
    fn squeeze(&self, modes: usize) -> Result<Option<Vec<f64>>> {
        match self {
            Measurement::Heterodyne => Ok(Some(vec![1.0; modes])),
            Measurement::Homodyne => Ok(None),
            Measurement::General { squeeze } => {
                if squeeze.len() != modes {
                    return Err(Error::DimensionMismatch {
                        expected: modes,
                        got: squeeze.len(),
                    });
                }
                if squeeze.iter().any(|&z| !(z > 0.0) || !z.is_finite()) {
                    return Err(Error::InvalidArgument(
                        "squeezing parameters must be positive".into(),
                    ));
                }
                Ok(Some(squeeze.clone()))
            }
        }
    }

    pub fn validate(&self, modes: usize) -> Result<()> {
        self.squeeze(modes).map(|_| ())
    }
}

/// Outcome distribution of one Gaussian state under one measurement: a
/// normal law, with the density written relative to the measurement's
/// reference measure.
#[derive(Debug, Clone)]
pub struct OutcomeLaw {
    mean: DVector<f64>,
    /// Lower Cholesky factor of the outcome covariance.
    chol: DMatrix<f64>,
    /// Matrix `P` in the exponent `−(m−d)ᵀ P (m−d)`.
    precision: DMatrix<f64>,
    log_norm: f64,
}

impl OutcomeLaw {
    pub fn new(state: &GaussianPureState, meas: &Measurement) -> Result<Self> {
        let n = state.modes();
        let gamma = state.gamma();
        let d = state.disp();
        match meas.squeeze(n)? {
            Some(z) => {
                // (Γ + S Sᵀ) with S = diag(z₁, 1/z₁, …).
                let mut sum = gamma.clone();
                for (k, zk) in z.iter().enumerate() {
                    sum[(2 * k, 2 * k)] += zk * zk;
                    sum[(2 * k + 1, 2 * k + 1)] += 1.0 / (zk * zk);
                }
                let cov = sum.scale(0.5);
                let chol = cov
                    .clone()
                    .cholesky()
                    .ok_or_else(|| Error::Numerical("Γ + SSᵀ is singular".into()))?;
                let log_det: f64 = chol.l().diagonal().iter().map(|v| 2.0 * v.ln()).sum();
                let precision = chol.inverse().scale(0.5);
                Ok(OutcomeLaw {
                    mean: d.clone(),
                    chol: chol.l(),
                    precision,
                    log_norm: -(n as f64) * PI.ln() - 0.5 * log_det,
                })
            }
            None => {
                // Homodyne: the limit of (Γ + SSᵀ)⁻¹ is the Moore-Penrose
                // inverse of XΓX with X = diag(1, 0, 1, 0, …). Restricted to the
                // position quadratures it is the inverse of the x-block of Γ.
                let xs: Vec<usize> = (0..n).map(|k| 2 * k).collect();
                let mut xgx = DMatrix::zeros(2 * n, 2 * n);
                for &i in &xs {
                    for &j in &xs {
                        xgx[(i, j)] = gamma[(i, j)];
                    }
                }
                let pinv = pinv_symmetric(&xgx);
                let precision = DMatrix::from_fn(n, n, |a, b| pinv[(xs[a], xs[b])]);
                let gamma_x = DMatrix::from_fn(n, n, |a, b| gamma[(xs[a], xs[b])]);
                let chol =
                    gamma_x.clone().scale(0.5).cholesky().ok_or_else(|| {
                        Error::Numerical("position block of Γ is singular".into())
                    })?;
                // Normalized so the density integrates to one against dx.
                let log_det = gamma_x.determinant().ln();
                Ok(OutcomeLaw {
                    mean: DVector::from_iterator(n, xs.iter().map(|&i| d[i])),
                    chol: chol.l(),
                    precision,
                    log_norm: -0.5 * (n as f64) * PI.ln() - 0.5 * log_det,
                })
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Outcome covariance `L Lᵀ`.
    pub fn covariance(&self) -> DMatrix<f64> {
        &self.chol * self.chol.transpose()
    }

    pub fn density(&self, m: &[f64]) -> Result<f64> {
        if m.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: m.len(),
            });
        }
        let diff = DVector::from_column_slice(m) - &self.mean;
        let q = diff.dot(&(&self.precision * &diff));
        Ok((self.log_norm - q).exp())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.mean + &self.chol * z
    }
}

/// Outcome density of `state` under `meas` at outcome `m`.
pub fn single_density(state: &GaussianPureState, meas: &Measurement, m: &[f64]) -> Result<f64> {
    OutcomeLaw::new(state, meas)?.density(m)
}

/// Draws one outcome of `meas` applied to `state`.
pub fn component_sample<R: Rng + ?Sized>(
    state: &GaussianPureState,
    meas: &Measurement,
    rng: &mut R,
) -> Result<DVector<f64>> {
    Ok(OutcomeLaw::new(state, meas)?.sample(rng))
}

/// `⟨G(z, m), ψ⟩` where `G(z, m)` is the squeezed coherent state with
/// covariance `diag(z₁², 1/z₁², …)` and displacement `m`.
pub fn dyne_amplitude(state: &GaussianPureState, squeeze: &[f64], m: &[f64]) -> Result<Complex64> {
    let waves = state.waves()?;
    let n = waves.len();
    if squeeze.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: squeeze.len(),
        });
    }
    if m.len() != 2 * n {
        return Err(Error::DimensionMismatch {
            expected: 2 * n,
            got: m.len(),
        });
    }
    Ok(waves
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let probe =
                ModeWave::from_moments(squeeze[k] * squeeze[k], 0.0, m[2 * k], m[2 * k + 1]);
            probe.overlap(w)
        })
        .product())
}

/// Coherent-state amplitude `⟨β, ψ⟩` with `β_k = (m_{2k} + i m_{2k+1})/√2`.
pub fn het_amplitude(state: &GaussianPureState, m: &[f64]) -> Result<Complex64> {
    dyne_amplitude(state, &vec![1.0; state.modes()], m)
}

/// Position-space wavefunction `ψ(x)`.
pub fn position_wavefunction(state: &GaussianPureState, x: &[f64]) -> Result<Complex64> {
    let waves = state.waves()?;
    if x.len() != waves.len() {
        return Err(Error::DimensionMismatch {
            expected: waves.len(),
            got: x.len(),
        });
    }
    Ok(waves.iter().zip(x).map(|(w, &xk)| w.eval(xk)).product())
}
