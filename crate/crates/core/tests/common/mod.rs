//! Independent oracles shared by the integration tests.
//!
//! Nothing here goes through the library's closed-form overlaps: wavefunctions
//! are written from textbook formulas or built by numerical integration.

#![allow(dead_code)]

use std::collections::VecDeque;
use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::RngCore;
use supersample::gaussian::{GaussianSuperposition, Measurement, OutcomeLaw};
use supersample::quadrature::GaussLegendre;
use supersample::stats::{bin_probabilities, binned_l1, chi_square_binned, ChiSquare, Histogram};

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Vacuum wavefunction `e^{−x²/2}/π^{1/4}`.
pub fn vacuum_wave(x: f64) -> Complex64 {
    c((-x * x / 2.0).exp() / PI.powf(0.25), 0.0)
}

/// Coherent state with quadrature means `(q, p)`, phased so `⟨0|α⟩ > 0`:
/// `π^{−1/4} exp(−(x−q)²/2 + i p x − i q p/2)`.
pub fn coherent_wave(q: f64, p: f64) -> impl Fn(f64) -> Complex64 {
    move |x| (c(-(x - q) * (x - q) / 2.0, p * x - q * p / 2.0)).exp() / PI.powf(0.25)
}

/// `exp(−(x−z)²/(2Δ²)) / (πΔ²)^{1/4}`.
pub fn squeezed_wave(z: f64, delta: f64) -> impl Fn(f64) -> Complex64 {
    move |x| {
        c(
            (-(x - z).powi(2) / (2.0 * delta * delta)).exp() / (PI * delta * delta).powf(0.25),
            0.0,
        )
    }
}

/// `∫ conj f · g` over `[lo, hi]`.
pub fn overlap(
    f: impl Fn(f64) -> Complex64,
    g: impl Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
) -> Complex64 {
    GaussLegendre::new(16).integrate_complex(lo, hi, 400, |x| f(x).conj() * g(x))
}

/// The state `D(q, p) R(θ) S(r) |0⟩` evaluated at `x`, up to a global phase,
/// with the rotation done as a fractional Fourier transform by quadrature.
///
/// `S(r)` scales the position variance by `e^{−2r}`, and the rotation turns
/// the covariance into `R(θ) diag(e^{−2r}, e^{2r}) R(θ)ᵀ`.
pub struct RotatedSqueezed {
    pub r: f64,
    pub theta: f64,
    pub q: f64,
    pub p: f64,
    gl: GaussLegendre,
}

impl RotatedSqueezed {
    pub fn new(r: f64, theta: f64, q: f64, p: f64) -> Self {
        RotatedSqueezed {
            r,
            theta,
            q,
            p,
            gl: GaussLegendre::new(16),
        }
    }

    fn squeezed(&self, y: f64) -> f64 {
        let s = (2.0 * self.r).exp();
        (s / PI).powf(0.25) * (-s * y * y / 2.0).exp()
    }

    /// Fractional Fourier transform by angle `α = −θ`.
    fn rotated(&self, x: f64) -> Complex64 {
        let a = -self.theta;
        let (cot, csc) = (a.cos() / a.sin(), 1.0 / a.sin());
        let norm = ((c(1.0, -cot)) / (2.0 * PI)).sqrt();
        let spread = 12.0 * (-self.r).exp().max(1.0);
        norm * self.gl.integrate_complex(-spread, spread, 600, |y| {
            (I * ((x * x + y * y) * cot / 2.0 - x * y * csc)).exp() * self.squeezed(y)
        })
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        (I * self.p * x).exp() * self.rotated(x - self.q)
    }
}

/// Moments of `|ψ|²` and of the momentum, from a sampled wavefunction.
#[derive(Debug, Clone, Copy)]
pub struct Moments {
    pub norm: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub cov_xp: f64,
}

pub fn moments(psi: impl Fn(f64) -> Complex64, lo: f64, hi: f64) -> Moments {
    let gl = GaussLegendre::new(16);
    let h = 1e-5;
    let d = |x: f64| (psi(x + h) - psi(x - h)) / (2.0 * h);
    let int = |f: &dyn Fn(f64) -> f64| gl.integrate(lo, hi, 400, f);
    let norm = int(&|x| psi(x).norm_sqr());
    let mean_x = int(&|x| x * psi(x).norm_sqr());
    let mean_p = int(&|x| (psi(x).conj() * d(x)).im);
    let x2 = int(&|x| x * x * psi(x).norm_sqr());
    let p2 = int(&|x| d(x).norm_sqr());
    let xp = int(&|x| x * (psi(x).conj() * d(x)).im);
    Moments {
        norm,
        mean_x,
        mean_p,
        var_x: x2 - mean_x * mean_x,
        var_p: p2 - mean_p * mean_p,
        cov_xp: xp - mean_x * mean_p,
    }
}

/// An RNG that replays scripted `u64` words.
pub struct ScriptedRng {
    words: VecDeque<u64>,
}

impl ScriptedRng {
    /// Each `k` makes `random::<f64>()` return exactly `k · 2^{−53}`.
    pub fn from_grid(ks: &[u64]) -> Self {
        ScriptedRng {
            words: ks.iter().map(|k| k << 11).collect(),
        }
    }
}

impl RngCore for ScriptedRng {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.words.pop_front().expect("script exhausted")
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let w = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&w[..chunk.len()]);
        }
    }
}

/// Integral of an outcome density over a box, by a tensor Gauss-Legendre rule.
pub fn total_mass(
    density: impl Fn(&[f64]) -> f64,
    dim: usize,
    lo: f64,
    hi: f64,
    panels: usize,
) -> f64 {
    let gl = GaussLegendre::new(16);
    match dim {
        1 => gl.integrate(lo, hi, panels, |x| density(&[x])),
        2 => gl.integrate_2d((lo, hi), (lo, hi), panels, |x, y| density(&[x, y])),
        _ => panic!("unsupported dimension {dim}"),
    }
}

/// Chi-square of single-mode samples against a law, binned on `[lo, hi)^d`.
/// Phase-space densities are relative to `dm/2`, hence the factor.
pub fn law_chi_square(
    law: &OutcomeLaw,
    samples: &[DVector<f64>],
    width: f64,
    lo: f64,
    hi: f64,
) -> ChiSquare {
    let hist =
        Histogram::from_points(law.dim(), width, samples.iter().map(|s| s.as_slice())).unwrap();
    let scale = if law.dim() == 2 { 0.5 } else { 1.0 };
    let probs = bin_probabilities(law.dim(), width, lo, hi, 8, |m| {
        scale * law.density(m).unwrap()
    })
    .unwrap();
    chi_square_binned(&hist, &probs).unwrap()
}

/// Converts heterodyne quadrature outcomes to `(Re β, Im β)`.
pub fn to_beta(m: &DVector<f64>) -> [f64; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [m[0] * s, m[1] * s]
}

/// Binned L₁ between the normalized histogram of `points` and the exact
/// superposition density. Heterodyne points are binned in the `β` plane,
/// where the density is `f` itself; homodyne points on the line.
pub fn superposition_l1(
    sup: &GaussianSuperposition,
    meas: &Measurement,
    points: &[DVector<f64>],
    width: f64,
    lo: f64,
    hi: f64,
) -> f64 {
    match meas {
        Measurement::Homodyne => {
            let hist =
                Histogram::from_points(1, width, points.iter().map(|p| p.as_slice())).unwrap();
            let probs = bin_probabilities(1, width, lo, hi, 8, |x| {
                sup.superposition_density(meas, x).unwrap()
            })
            .unwrap();
            binned_l1(&hist, &probs)
        }
        _ => {
            let betas: Vec<[f64; 2]> = points.iter().map(to_beta).collect();
            let hist =
                Histogram::from_points(2, width, betas.iter().map(|b| b.as_slice())).unwrap();
            let r2 = std::f64::consts::SQRT_2;
            let probs = bin_probabilities(2, width, lo, hi, 6, |b| {
                sup.superposition_density(meas, &[b[0] * r2, b[1] * r2])
                    .unwrap()
            })
            .unwrap();
            binned_l1(&hist, &probs)
        }
    }
}
