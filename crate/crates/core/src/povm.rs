//! Finite-dimensional superpositions and POVMs, evaluated by brute force.
//!
//! Everything here is exact linear algebra on `ℂ^D`: Born probabilities,
//! exact sampling, and numerical checks of the inequalities behind the
//! rejection bound.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use crate::discrete::CdfSampler;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_inv_sqrt, hermitian_min_eigenvalue, max_abs_diff};
use crate::rejection::{SuperpositionModel, SuperpositionOracles};

/// Lowest eigenvalue accepted for a positive semidefinite effect.
pub const PSD_TOL: f64 = 1e-10;
/// Entrywise tolerance on `Σ_k M_k = I`.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Tolerance on `‖ψ_j‖ = 1`.
pub const COMPONENT_NORM_TOL: f64 = 1e-12;
/// Tolerance on `‖Ψ‖ = 1`.
pub const STATE_NORM_TOL: f64 = 1e-10;

type CMatrix = DMatrix<Complex64>;
type CVector = DVector<Complex64>;

/// Worst-case deviations of a candidate POVM from the axioms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PovmReport {
    /// Smallest eigenvalue over all effects.
    pub min_eigenvalue: f64,
    /// Largest entry of `M_k − M_k†` over all effects.
    pub hermiticity_defect: f64,
    /// Largest entry of `Σ_k M_k − I`.
    pub completeness_defect: f64,
}

impl PovmReport {
    pub fn is_valid(&self) -> bool {
        self.min_eigenvalue >= -PSD_TOL
            && self.hermiticity_defect <= COMPLETENESS_TOL
            && self.completeness_defect <= COMPLETENESS_TOL
    }
}

/// A POVM with finitely many outcomes on `ℂ^D`.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePovm {
    dim: usize,
    effects: Vec<CMatrix>,
}

impl FinitePovm {
    /// Requires Hermitian PSD effects summing to the identity.
    pub fn new(effects: Vec<CMatrix>) -> Result<Self> {
        let povm = FinitePovm::unchecked(effects)?;
        let r = povm.report();
        if r.hermiticity_defect > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!(
                "effect is not Hermitian (defect {:e})",
                r.hermiticity_defect
            )));
        }
        if r.min_eigenvalue < -PSD_TOL {
            return Err(Error::InvalidPovm(format!(
                "effect has negative eigenvalue {:e}",
                r.min_eigenvalue
            )));
        }
        if r.completeness_defect > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!(
                "effects do not sum to the identity (defect {:e})",
                r.completeness_defect
            )));
        }
        Ok(povm)
    }

    /// Checks shapes only. Use [`report`](Self::report) to inspect the rest.
    pub fn unchecked(effects: Vec<CMatrix>) -> Result<Self> {
        let first = effects
            .first()
            .ok_or_else(|| Error::InvalidPovm("no effects".into()))?;
        let dim = first.nrows();
        if dim == 0 {
            return Err(Error::InvalidPovm("zero-dimensional effects".into()));
        }
        for e in &effects {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: e.nrows().max(e.ncols()),
                });
            }
        }
        Ok(FinitePovm { dim, effects })
    }

    /// `|k⟩⟨k|` for `k = 0..dim`.
    pub fn computational_basis(dim: usize) -> Self {
        let effects = (0..dim)
            .map(|k| {
                let mut e = CMatrix::zeros(dim, dim);
                e[(k, k)] = Complex64::new(1.0, 0.0);
                e
            })
            .collect();
        FinitePovm { dim, effects }
    }

    pub fn report(&self) -> PovmReport {
        let mut sum = CMatrix::zeros(self.dim, self.dim);
        let mut min_eigenvalue = f64::INFINITY;
        let mut hermiticity_defect: f64 = 0.0;
        for e in &self.effects {
            sum += e;
            hermiticity_defect = hermiticity_defect.max(max_abs_diff(e, &e.adjoint()));
            min_eigenvalue = min_eigenvalue.min(hermitian_min_eigenvalue(e));
        }
        let completeness_defect = max_abs_diff(&sum, &CMatrix::identity(self.dim, self.dim));
        PovmReport {
            min_eigenvalue,
            hermiticity_defect,
            completeness_defect,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[CMatrix] {
        &self.effects
    }

    /// `⟨ψ, M_k ψ⟩`, clamped at zero.
    pub fn probability(&self, k: usize, psi: &CVector) -> f64 {
        expectation(&self.effects[k], psi)
    }
}

fn expectation(m: &CMatrix, psi: &CVector) -> f64 {
    psi.dotc(&(m * psi)).re.max(0.0)
}

/// `Ψ = Σ_j c_j ψ_j` in `ℂ^D` with unit-norm components.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSuperposition {
    components: Vec<CVector>,
    coeffs: Vec<Complex64>,
    state: CVector,
}

impl FiniteSuperposition {
    pub fn new(components: Vec<CVector>, coeffs: Vec<Complex64>) -> Result<Self> {
        let state = combine(&components, &coeffs)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > STATE_NORM_TOL {
            return Err(Error::NotNormalized(norm * norm));
        }
        Ok(FiniteSuperposition {
            components,
            coeffs,
            state,
        })
    }

    /// Rescales `weights` globally so that `‖Ψ‖ = 1`.
    pub fn normalized(components: Vec<CVector>, weights: Vec<Complex64>) -> Result<Self> {
        let state = combine(&components, &weights)?;
        let norm = state.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::NotNormalized(norm * norm));
        }
        let coeffs = weights.into_iter().map(|w| w / norm).collect();
        FiniteSuperposition::new(components, coeffs)
    }

    pub fn dim(&self) -> usize {
        self.state.len()
    }

    pub fn chi(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[CVector] {
        &self.components
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// The normalized vector `Ψ`.
    pub fn state(&self) -> &CVector {
        &self.state
    }

    pub fn gram_matrix(&self) -> CMatrix {
        let chi = self.chi();
        CMatrix::from_fn(chi, chi, |j, k| {
            self.components[j].dotc(&self.components[k])
        })
    }

    /// `K = χ ‖c‖₂²`.
    pub fn k_factor(&self) -> f64 {
        self.chi() as f64 * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Oracles for measuring this superposition with `povm`.
    pub fn oracles(&self, povm: &FinitePovm) -> Result<FiniteOracles> {
        FiniteOracles::new(self.clone(), povm.clone())
    }

    pub fn model(&self, povm: &FinitePovm) -> Result<SuperpositionModel<FiniteOracles>> {
        SuperpositionModel::new(self.oracles(povm)?)
    }
}

fn combine(components: &[CVector], coeffs: &[Complex64]) -> Result<CVector> {
    let first = components
        .first()
        .ok_or_else(|| Error::InvalidArgument("superposition with no components".into()))?;
    if coeffs.len() != components.len() {
        return Err(Error::DimensionMismatch {
            expected: components.len(),
            got: coeffs.len(),
        });
    }
    let dim = first.len();
    let mut state = CVector::zeros(dim);
    for (j, (v, c)) in components.iter().zip(coeffs).enumerate() {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        let n = v.norm();
        if (n - 1.0).abs() > COMPONENT_NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "component {j} has norm {n}"
            )));
        }
        state += v * *c;
    }
    Ok(state)
}

/// Born distribution `(⟨Ψ, M_k Ψ⟩)_k`.
pub fn born_distribution(state: &CVector, povm: &FinitePovm) -> Result<Vec<f64>> {
    if state.len() != povm.dim() {
        return Err(Error::DimensionMismatch {
            expected: povm.dim(),
            got: state.len(),
        });
    }
    Ok((0..povm.len())
        .map(|k| povm.probability(k, state))
        .collect())
}

/// One exact draw from the Born distribution, by inverse CDF.
pub fn sample_exact<R: Rng + ?Sized>(
    state: &CVector,
    povm: &FinitePovm,
    rng: &mut R,
) -> Result<usize> {
    Ok(exact_sampler(state, povm)?.sample(rng))
}

/// Reusable inverse-CDF sampler for the Born distribution.
pub fn exact_sampler(state: &CVector, povm: &FinitePovm) -> Result<CdfSampler> {
    CdfSampler::new(&born_distribution(state, povm)?)
}

/// Smallest eigenvalue of `χ Σ_j P_j ρ P_j − ρ` with `ρ = |Ψ⟩⟨Ψ|` and
/// `P_j = |ψ_j⟩⟨ψ_j|`. The pinching inequality says it is nonnegative.
pub fn check_pinching(sup: &FiniteSuperposition) -> Result<f64> {
    let g = sup.gram_matrix();
    let defect = max_abs_diff(&g, &CMatrix::identity(sup.chi(), sup.chi()));
    if defect > 1e-10 {
        return Err(Error::NonOrthogonal(defect));
    }
    let psi = sup.state();
    let rho = psi * psi.adjoint();
    let mut pinched = CMatrix::zeros(sup.dim(), sup.dim());
    for v in sup.components() {
        // P ρ P = |⟨v, Ψ⟩|² |v⟩⟨v|
        let a = v.dotc(psi).norm_sqr();
        pinched += (v * v.adjoint()).scale(a);
    }
    Ok(hermitian_min_eigenvalue(
        &(pinched.scale(sup.chi() as f64) - rho),
    ))
}

/// `max_k f_Ψ(k) / (K Σ_j p(j) f_ψj(k))` over outcomes with a positive
/// denominator. The mixture bound says it is at most one.
pub fn check_mixture_bound(sup: &FiniteSuperposition, povm: &FinitePovm) -> Result<f64> {
    if sup.dim() != povm.dim() {
        return Err(Error::DimensionMismatch {
            expected: povm.dim(),
            got: sup.dim(),
        });
    }
    let norm_sq: f64 = sup.coeffs().iter().map(|c| c.norm_sqr()).sum();
    let k = sup.chi() as f64 * norm_sq;
    let mut worst: f64 = 0.0;
    for e in povm.effects() {
        let mixture: f64 = sup
            .components()
            .iter()
            .zip(sup.coeffs())
            .map(|(v, c)| c.norm_sqr() / norm_sq * expectation(e, v))
            .sum();
        if mixture > 0.0 {
            worst = worst.max(expectation(e, sup.state()) / (k * mixture));
        }
    }
    Ok(worst)
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im)
}

/// A uniformly random unit vector in `ℂ^D`.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CVector {
    loop {
        let v = CVector::from_fn(dim, |_, _| complex_normal(rng));
        let n = v.norm();
        if n > 1e-8 {
            return v.unscale(n);
        }
    }
}

/// A random POVM with `m` effects: Wishart matrices `A_k = G_k G_k†` of random
/// rank, conjugated by `S^{−1/2}` with `S = Σ_k A_k`.
pub fn random_povm<R: Rng + ?Sized>(dim: usize, m: usize, rng: &mut R) -> Result<FinitePovm> {
    if dim < 1 || m < 1 {
        return Err(Error::InvalidArgument(format!(
            "random POVM with D = {dim}, m = {m}"
        )));
    }
    for _ in 0..100 {
        let raw: Vec<CMatrix> = (0..m)
            .map(|_| {
                let rank = rng.random_range(1..=dim);
                let g = CMatrix::from_fn(dim, rank, |_, _| complex_normal(rng));
                &g * g.adjoint()
            })
            .collect();
        let sum = raw.iter().fold(CMatrix::zeros(dim, dim), |acc, a| acc + a);
        let Ok(s) = hermitian_inv_sqrt(&sum) else {
            continue;
        };
        let effects = raw.iter().map(|a| {
            let e = &s * a * &s;
            (&e + e.adjoint()).scale(0.5)
        });
        match FinitePovm::new(effects.collect()) {
            Ok(p) => return Ok(p),
            Err(_) => continue,
        }
    }
    Err(Error::Numerical(
        "could not draw a well-conditioned POVM".into(),
    ))
}

/// A random superposition of `chi` random unit vectors, with complex Gaussian
/// weights rescaled so that `‖Ψ‖ = 1`, together with a random POVM of `m`
/// effects.
pub fn random_instance<R: Rng + ?Sized>(
    dim: usize,
    chi: usize,
    m: usize,
    rng: &mut R,
) -> Result<(FiniteSuperposition, FinitePovm)> {
    if dim < 2 || chi < 1 || m < 2 {
        return Err(Error::InvalidArgument(format!(
            "random instance needs D >= 2, chi >= 1, m >= 2 (got {dim}, {chi}, {m})"
        )));
    }
    let sup = loop {
        let components: Vec<CVector> = (0..chi).map(|_| random_unit_vector(dim, rng)).collect();
        let weights: Vec<Complex64> = (0..chi).map(|_| complex_normal(rng)).collect();
        // Strong cancellation makes K huge; redraw instead.
        let total = combine(&components, &weights)?.norm();
        let scale: f64 = weights.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        if total < 1e-3 * scale {
            continue;
        }
        break FiniteSuperposition::normalized(components, weights)?;
    };
    Ok((sup, random_povm(dim, m, rng)?))
}

/// A random superposition of `chi ≤ D` orthonormal vectors.
pub fn random_orthogonal_instance<R: Rng + ?Sized>(
    dim: usize,
    chi: usize,
    rng: &mut R,
) -> Result<FiniteSuperposition> {
    if chi < 1 || chi > dim {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= chi <= D, got chi = {chi}, D = {dim}"
        )));
    }
    let g = CMatrix::from_fn(dim, chi, |_, _| complex_normal(rng));
    let q = g.qr().q();
    let components: Vec<CVector> = (0..chi)
        .map(|j| {
            let v = q.column(j).into_owned();
            let n = v.norm();
            v.unscale(n)
        })
        .collect();
    let weights: Vec<Complex64> = (0..chi).map(|_| complex_normal(rng)).collect();
    FiniteSuperposition::normalized(components, weights)
}

/// Density and sampling oracles for a finite superposition under a finite
/// POVM. Densities are relative to counting measure on outcome indices.
#[derive(Debug, Clone)]
pub struct FiniteOracles {
    sup: FiniteSuperposition,
    povm: FinitePovm,
    samplers: Vec<CdfSampler>,
}

impl FiniteOracles {
    pub fn new(sup: FiniteSuperposition, povm: FinitePovm) -> Result<Self> {
        if sup.dim() != povm.dim() {
            return Err(Error::DimensionMismatch {
                expected: povm.dim(),
                got: sup.dim(),
            });
        }
        let samplers = sup
            .components()
            .iter()
            .map(|v| exact_sampler(v, &povm))
            .collect::<Result<Vec<_>>>()?;
        Ok(FiniteOracles {
            sup,
            povm,
            samplers,
        })
    }

    pub fn superposition(&self) -> &FiniteSuperposition {
        &self.sup
    }

    pub fn povm(&self) -> &FinitePovm {
        &self.povm
    }
}

impl SuperpositionOracles for FiniteOracles {
    type Outcome = usize;

    fn coefficients(&self) -> &[Complex64] {
        self.sup.coeffs()
    }

    fn superposition_density(&self, x: &usize) -> Result<f64> {
        self.outcome(*x)?;
        Ok(self.povm.probability(*x, self.sup.state()))
    }

    fn component_density(&self, j: usize, x: &usize) -> Result<f64> {
        self.outcome(*x)?;
        Ok(self.povm.probability(*x, &self.sup.components()[j]))
    }

    fn sample_component(&self, j: usize, rng: &mut dyn RngCore) -> Result<usize> {
        Ok(self.samplers[j].sample(rng))
    }
}

impl FiniteOracles {
    fn outcome(&self, x: usize) -> Result<()> {
        if x < self.povm.len() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "outcome {x} out of range 0..{}",
                self.povm.len()
            )))
        }
    }
}
