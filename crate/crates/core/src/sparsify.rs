//! Sparsification of Gaussian decompositions.
//!
//! A normalized `Ψ = Σ_k c_k ω_k` with many terms is replaced by a superposition
//! of `χ` terms with equal-magnitude coefficients. Indices `k_1, …, k_χ` are drawn
//! i.i.d. with probability `|c_k| / ‖c‖₁`, and
//!
//! ```text
//!     Ω = (‖c‖₁/χ) Σ_j e^{i arg c_{k_j}} ω_{k_j},      Ψ′ = Ω / ‖Ω‖.
//! ```
//!
//! `Ω` is an unbiased estimate of `Ψ` with `E‖Ψ − Ω‖² ≤ ‖c‖₁²/χ`. With
//! `χ = ⌈3‖c‖₁²/ε²⌉` a draw is accepted once `‖Ψ − Ψ′‖ ≤ 2ε` and
//! `‖c′‖₂ ≤ √2 ε`, so the sampler for `Ψ′` has `K = χ‖c′‖₂² ≤ 6‖c‖₁²`.
//! All norms are exact, from the Gram matrix of the source components.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore};

use crate::discrete::CdfSampler;
use crate::error::{Error, Result};
use crate::gaussian::{gram_matrix, GaussianOracles, GaussianSuperposition, Measurement};
use crate::rejection::{trial_budget, SampleResult, SuperpositionModel};

/// A normalized Gaussian decomposition `Ψ = Σ_k c_k ω_k`.
pub type Decomposition = GaussianSuperposition;

/// Default retry cap of [`sparsify_verified`].
pub const MAX_ATTEMPTS: usize = 64;

/// `‖c‖₁²`, an upper bound on the Gaussian extent of `Ψ`.
pub fn l1_sq(decomp: &Decomposition) -> f64 {
    let l1: f64 = decomp.coeffs().iter().map(|c| c.norm()).sum();
    l1 * l1
}

/// Number of terms used for an `ε`-sparsification: `⌈3‖c‖₁²/ε²⌉`.
pub fn sparse_chi(decomp: &Decomposition, epsilon: f64) -> usize {
    (3.0 * l1_sq(decomp) / (epsilon * epsilon)).ceil() as usize
}

/// One random draw of the sparsified state.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDraw {
    /// Source index behind each term of `result`.
    pub indices: Vec<usize>,
    /// `Ψ′ = Ω/‖Ω‖`. Term `j` is `ω_{k_j}` with coefficient
    /// `e^{i arg c_{k_j}} ‖c‖₁/(χ‖Ω‖)`.
    pub result: GaussianSuperposition,
    pub omega_norm: f64,
    /// `‖Ψ − Ψ′‖`.
    pub distance: f64,
    /// `‖Ψ − Ω‖`.
    pub omega_distance: f64,
}

impl SparseDraw {
    /// `‖c′‖₂`.
    pub fn coeff_norm(&self) -> f64 {
        self.result
            .coeffs()
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Precomputed pieces shared by repeated draws from one decomposition.
struct Sparsifier<'a> {
    decomp: &'a Decomposition,
    gram: DMatrix<Complex64>,
    picker: CdfSampler,
    l1: f64,
}

impl<'a> Sparsifier<'a> {
    fn new(decomp: &'a Decomposition) -> Result<Self> {
        let l1: f64 = decomp.coeffs().iter().map(|c| c.norm()).sum();
        let weights: Vec<f64> = decomp.coeffs().iter().map(|c| c.norm() / l1).collect();
        Ok(Sparsifier {
            decomp,
            gram: gram_matrix(decomp.components())?,
            picker: CdfSampler::new(&weights)?,
            l1,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, chi: usize, rng: &mut R) -> Result<SparseDraw> {
        if chi == 0 {
            return Err(Error::InvalidArgument(
                "sparsification needs chi >= 1".into(),
            ));
        }
        let c = self.decomp.coeffs();
        let indices: Vec<usize> = (0..chi).map(|_| self.picker.sample(rng)).collect();
        let phases: Vec<Complex64> = indices.iter().map(|&k| c[k] / c[k].norm()).collect();
        let scale = self.l1 / chi as f64;

        // ‖Ω‖² and ⟨Ψ, Ω⟩ from the source Gram matrix.
        let mut omega_sq = chi as f64;
        for a in 0..chi {
            for b in a + 1..chi {
                let g = self.gram[(indices[a], indices[b])];
                omega_sq += 2.0 * (phases[a].conj() * phases[b] * g).re;
            }
        }
        omega_sq *= scale * scale;
        let mut psi_omega = Complex64::new(0.0, 0.0);
        for (&k, p) in indices.iter().zip(&phases) {
            for (a, ca) in c.iter().enumerate() {
                psi_omega += ca.conj() * p * self.gram[(a, k)];
            }
        }
        psi_omega *= scale;

        let omega_norm = omega_sq.max(0.0).sqrt();
        if !(omega_norm > 1e-12) {
            return Err(Error::ZeroNorm);
        }
        let omega_distance = (1.0 + omega_sq - 2.0 * psi_omega.re).max(0.0).sqrt();
        let distance = (2.0 - 2.0 * psi_omega.re / omega_norm).max(0.0).sqrt();

        let components = indices
            .iter()
            .map(|&k| self.decomp.components()[k].clone())
            .collect();
        let coeffs = phases.iter().map(|p| p * (scale / omega_norm)).collect();
        let result = GaussianSuperposition::normalized(components, coeffs)?;
        Ok(SparseDraw {
            indices,
            result,
            omega_norm,
            distance,
            omega_distance,
        })
    }
}

/// Draws one `χ`-term sparsification of `decomp`.
pub fn sparsify_once<R: Rng + ?Sized>(
    decomp: &Decomposition,
    chi: usize,
    rng: &mut R,
) -> Result<SparseDraw> {
    Sparsifier::new(decomp)?.draw(chi, rng)
}

/// A verified `ε`-sparsification.
#[derive(Debug, Clone, PartialEq)]
pub struct Sparsification {
    pub source: Decomposition,
    pub epsilon: f64,
    pub chi: usize,
    pub draw: SparseDraw,
    /// Draws made, including the accepted one.
    pub attempts: usize,
}

impl Sparsification {
    pub fn result(&self) -> &GaussianSuperposition {
        &self.draw.result
    }

    /// `‖Ψ − Ψ′‖`.
    pub fn distance(&self) -> f64 {
        self.draw.distance
    }

    /// `‖c′‖₂`.
    pub fn coeff_norm(&self) -> f64 {
        self.draw.coeff_norm()
    }

    /// Whether both sparsification guarantees hold.
    pub fn satisfies_bounds(&self) -> bool {
        accepts(&self.draw, self.epsilon)
    }
}

fn accepts(draw: &SparseDraw, epsilon: f64) -> bool {
    draw.distance <= 2.0 * epsilon && draw.coeff_norm() <= std::f64::consts::SQRT_2 * epsilon
}

/// Redraws until `‖Ψ − Ψ′‖ ≤ 2ε` and `‖c′‖₂ ≤ √2 ε`, at most
/// [`MAX_ATTEMPTS`] times.
pub fn sparsify_verified<R: Rng + ?Sized>(
    decomp: &Decomposition,
    epsilon: f64,
    rng: &mut R,
) -> Result<Sparsification> {
    sparsify_verified_with(decomp, epsilon, MAX_ATTEMPTS, rng)
}

pub fn sparsify_verified_with<R: Rng + ?Sized>(
    decomp: &Decomposition,
    epsilon: f64,
    max_attempts: usize,
    rng: &mut R,
) -> Result<Sparsification> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "epsilon {epsilon} not in (0, 1/2)"
        )));
    }
    let chi = sparse_chi(decomp, epsilon);
    let sparsifier = Sparsifier::new(decomp)?;
    for attempts in 1..=max_attempts {
        let draw = match sparsifier.draw(chi, rng) {
            Ok(d) => d,
            Err(Error::ZeroNorm) => continue,
            Err(e) => return Err(e),
        };
        if accepts(&draw, epsilon) {
            return Ok(Sparsification {
                source: decomp.clone(),
                epsilon,
                chi,
                draw,
                attempts,
            });
        }
    }
    Err(Error::MaxAttempts {
        attempts: max_attempts,
    })
}

/// A sparsified state wired to a measurement, ready to sample repeatedly.
pub struct ExtentSampler {
    sparsification: Sparsification,
    model: SuperpositionModel<GaussianOracles>,
}

impl ExtentSampler {
    pub fn new<R: Rng + ?Sized>(
        decomp: &Decomposition,
        epsilon: f64,
        meas: Measurement,
        rng: &mut R,
    ) -> Result<Self> {
        let sparsification = sparsify_verified(decomp, epsilon, rng)?;
        let model = sparsification.result().model(meas)?;
        Ok(ExtentSampler {
            sparsification,
            model,
        })
    }

    pub fn sparsification(&self) -> &Sparsification {
        &self.sparsification
    }

    pub fn model(&self) -> &SuperpositionModel<GaussianOracles> {
        &self.model
    }

    /// One budgeted run with `n = ⌈K ln(1/δ)⌉` trials.
    pub fn sample<R: RngCore>(
        &self,
        delta: f64,
        rng: &mut R,
    ) -> Result<SampleResult<nalgebra::DVector<f64>>> {
        let n = trial_budget(self.model.k(), delta)?;
        self.model.sample_with_budget(n, rng)
    }
}

/// Sparsifies `decomp` to accuracy `ε`, then samples the result under `meas`
/// with failure probability at most `δ`.
pub fn sample_with_extent<R: RngCore>(
    decomp: &Decomposition,
    epsilon: f64,
    delta: f64,
    meas: Measurement,
    rng: &mut R,
) -> Result<SampleResult<nalgebra::DVector<f64>>> {
    ExtentSampler::new(decomp, epsilon, meas, rng)?.sample(delta, rng)
}
