use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use super::wave::ModeWave;
use crate::error::{Error, Result};

/// Tolerance on symmetry and on `Γ Ω Γᵀ = Ω`, relative to the largest entry.
pub const PURITY_TOL: f64 = 1e-9;
/// Off-diagonal mode blocks below this (relative) count as zero.
const FACTOR_TOL: f64 = 1e-12;

/// Symplectic form for quadrature ordering `(x₁, p₁, …, x_N, p_N)`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// A pure Gaussian state on `N` modes.
///
/// The covariance matrix is normalized so the vacuum has `Γ = I`, and the
/// displacement `d` holds the quadrature means `(⟨x₁⟩, ⟨p₁⟩, …)`. The global
/// phase is fixed by `⟨vac, ψ⟩ > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPureState {
    modes: usize,
    gamma: DMatrix<f64>,
    disp: DVector<f64>,
    factors: Option<Vec<ModeWave>>,
}

impl GaussianPureState {
    /// Checks symmetry, positive definiteness and purity.
    pub fn new(gamma: DMatrix<f64>, disp: DVector<f64>) -> Result<Self> {
        let dim = gamma.nrows();
        if dim == 0 || !dim.is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: dim,
            });
        }
        if gamma.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: gamma.ncols(),
            });
        }
        if disp.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: disp.len(),
            });
        }
        if gamma.iter().chain(disp.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite entry in state".into()));
        }
        let modes = dim / 2;
        let scale = gamma.amax().max(1.0);

        let asym = (&gamma - gamma.transpose()).amax();
        if asym > PURITY_TOL * scale {
            return Err(Error::NonSymmetric(asym));
        }
        let gamma = (&gamma + gamma.transpose()).scale(0.5);
        if gamma.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        let omega = symplectic_form(modes);
        let defect = (&gamma * &omega * gamma.transpose() - &omega).amax();
        if defect > PURITY_TOL * scale * scale {
            return Err(Error::NotPure(defect));
        }

        let factors = mode_factors(&gamma, &disp, modes, scale);
        Ok(GaussianPureState {
            modes,
            gamma,
            disp,
            factors,
        })
    }

    pub fn vacuum(modes: usize) -> Self {
        GaussianPureState::new(
            DMatrix::identity(2 * modes, 2 * modes),
            DVector::zeros(2 * modes),
        )
        .expect("vacuum is a valid state")
    }

    /// Coherent state `|α⟩`: `Γ = I`, `d = √2 (Re α, Im α)`.
    pub fn coherent(alpha: Complex64) -> Self {
        let s = std::f64::consts::SQRT_2;
        GaussianPureState::new(
            DMatrix::identity(2, 2),
            DVector::from_vec(vec![s * alpha.re, s * alpha.im]),
        )
        .expect("coherent state is valid")
    }

    /// Position-squeezed vacuum displaced to `x = z`, with wavefunction
    /// `exp(−(x−z)²/(2Δ²)) / (πΔ²)^{1/4}`.
    pub fn displaced_squeezed(z: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() || !z.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "squeezed state with Δ = {delta}, z = {z}"
            )));
        }
        GaussianPureState::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![
                delta * delta,
                1.0 / (delta * delta),
            ])),
            DVector::from_vec(vec![z, 0.0]),
        )
    }

    /// Single-mode state from squeezing `r` (position variance scaled by
    /// `e^{−2r}`), rotation angle `theta` and displacement `(q, p)`.
    pub fn single_mode(r: f64, theta: f64, q: f64, p: f64) -> Result<Self> {
        let (s, c) = theta.sin_cos();
        let rot = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]);
        let diag =
            DMatrix::from_diagonal(&DVector::from_vec(vec![(-2.0 * r).exp(), (2.0 * r).exp()]));
        GaussianPureState::new(&rot * diag * rot.transpose(), DVector::from_vec(vec![q, p]))
    }

    /// A random single-mode state: squeezing `r ∈ [−1, 1]`, uniform rotation,
    /// displacement in `[−2, 2]²`.
    pub fn random_single_mode<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let r = rng.random_range(-1.0..1.0);
        let theta = rng.random_range(0.0..std::f64::consts::PI);
        let q = rng.random_range(-2.0..2.0);
        let p = rng.random_range(-2.0..2.0);
        GaussianPureState::single_mode(r, theta, q, p).expect("rotated squeezed state is valid")
    }

    /// Tensor product of states, in order.
    pub fn product(parts: &[GaussianPureState]) -> Result<Self> {
        let dim: usize = parts.iter().map(|s| 2 * s.modes).sum();
        if dim == 0 {
            return Err(Error::InvalidArgument("empty tensor product".into()));
        }
        let mut gamma = DMatrix::zeros(dim, dim);
        let mut disp = DVector::zeros(dim);
        let mut at = 0;
        for s in parts {
            let n = 2 * s.modes;
            gamma.view_mut((at, at), (n, n)).copy_from(&s.gamma);
            disp.rows_mut(at, n).copy_from(&s.disp);
            at += n;
        }
        GaussianPureState::new(gamma, disp)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn gamma(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    pub fn disp(&self) -> &DVector<f64> {
        &self.disp
    }

    /// Per-mode wavefunctions when the state is a product across modes.
    pub fn mode_waves(&self) -> Option<&[ModeWave]> {
        self.factors.as_deref()
    }

    pub fn is_product(&self) -> bool {
        self.factors.is_some()
    }

    pub(crate) fn waves(&self) -> Result<&[ModeWave]> {
        self.mode_waves().ok_or(Error::UnsupportedOverlap)
    }
}

fn mode_factors(
    gamma: &DMatrix<f64>,
    disp: &DVector<f64>,
    modes: usize,
    scale: f64,
) -> Option<Vec<ModeWave>> {
    for i in 0..2 * modes {
        for j in 0..2 * modes {
            if i / 2 != j / 2 && gamma[(i, j)].abs() > FACTOR_TOL * scale {
                return None;
            }
        }
    }
    Some(
        (0..modes)
            .map(|k| {
                let (x, p) = (2 * k, 2 * k + 1);
                ModeWave::from_moments(gamma[(x, x)], gamma[(x, p)], disp[x], disp[p])
            })
            .collect(),
    )
}
