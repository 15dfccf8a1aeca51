use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::RngCore;

use super::measurement::{dyne_amplitude, position_wavefunction, Measurement, OutcomeLaw};
use super::state::GaussianPureState;
use crate::error::{Error, Result};
use crate::rejection::{SuperpositionModel, SuperpositionOracles};

/// Tolerance on `‖Ψ‖² = 1`.
pub const NORM_TOL: f64 = 1e-9;

/// Overlap `⟨ψ_j, ψ_k⟩` of two product states.
pub fn overlap(a: &GaussianPureState, b: &GaussianPureState) -> Result<Complex64> {
    if a.modes() != b.modes() {
        return Err(Error::DimensionMismatch {
            expected: a.modes(),
            got: b.modes(),
        });
    }
    Ok(a.waves()?
        .iter()
        .zip(b.waves()?)
        .map(|(x, y)| x.overlap(y))
        .product())
}

/// `G_jk = ⟨ψ_j, ψ_k⟩`.
pub fn gram_matrix(components: &[GaussianPureState]) -> Result<DMatrix<Complex64>> {
    let chi = components.len();
    let mut g = DMatrix::from_element(chi, chi, Complex64::new(0.0, 0.0));
    for j in 0..chi {
        g[(j, j)] = Complex64::new(1.0, 0.0);
        for k in j + 1..chi {
            let v = overlap(&components[j], &components[k])?;
            g[(j, k)] = v;
            g[(k, j)] = v.conj();
        }
    }
    Ok(g)
}

/// `‖Σ c_j ψ_j‖² = c† G c`.
pub fn norm_squared(components: &[GaussianPureState], coeffs: &[Complex64]) -> Result<f64> {
    if components.len() != coeffs.len() {
        return Err(Error::DimensionMismatch {
            expected: components.len(),
            got: coeffs.len(),
        });
    }
    let g = gram_matrix(components)?;
    let c = DVector::from_column_slice(coeffs);
    Ok(c.dotc(&(&g * &c)).re.max(0.0))
}

/// A normalized superposition `Ψ = Σ c_j ψ_j` of Gaussian pure states.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSuperposition {
    components: Vec<GaussianPureState>,
    coeffs: Vec<Complex64>,
}

impl GaussianSuperposition {
    /// Requires `‖Ψ‖ = 1` within [`NORM_TOL`].
    pub fn new(components: Vec<GaussianPureState>, coeffs: Vec<Complex64>) -> Result<Self> {
        check_shapes(&components, &coeffs)?;
        let norm_sq = norm_squared(&components, &coeffs)?;
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(GaussianSuperposition { components, coeffs })
    }

    /// Rescales `weights` so the superposition has unit norm.
    pub fn normalized(components: Vec<GaussianPureState>, weights: Vec<Complex64>) -> Result<Self> {
        check_shapes(&components, &weights)?;
        let norm_sq = norm_squared(&components, &weights)?;
        if !(norm_sq > 0.0) || !norm_sq.is_finite() {
            return Err(Error::NotNormalized(norm_sq));
        }
        let scale = 1.0 / norm_sq.sqrt();
        let coeffs = weights.into_iter().map(|w| w * scale).collect();
        Ok(GaussianSuperposition { components, coeffs })
    }

    pub fn chi(&self) -> usize {
        self.components.len()
    }

    pub fn modes(&self) -> usize {
        self.components[0].modes()
    }

    pub fn components(&self) -> &[GaussianPureState] {
        &self.components
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn gram_matrix(&self) -> Result<DMatrix<Complex64>> {
        gram_matrix(&self.components)
    }

    pub fn norm_squared(&self) -> Result<f64> {
        norm_squared(&self.components, &self.coeffs)
    }

    /// `K = χ ‖c‖₂²`.
    pub fn k_factor(&self) -> f64 {
        self.chi() as f64 * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// `Σ c_j ⟨probe(m), ψ_j⟩` for dyne measurements, `Σ c_j ψ_j(x)` for homodyne.
    pub fn amplitude(&self, meas: &Measurement, m: &[f64]) -> Result<Complex64> {
        let n = self.modes();
        let mut total = Complex64::new(0.0, 0.0);
        match meas {
            Measurement::Homodyne => {
                for (c, s) in self.coeffs.iter().zip(&self.components) {
                    total += c * position_wavefunction(s, m)?;
                }
            }
            Measurement::Heterodyne | Measurement::General { .. } => {
                let z = match meas {
                    Measurement::General { squeeze } => squeeze.clone(),
                    _ => vec![1.0; n],
                };
                meas.validate(n)?;
                for (c, s) in self.coeffs.iter().zip(&self.components) {
                    total += c * dyne_amplitude(s, &z, m)?;
                }
            }
        }
        Ok(total)
    }

    /// Outcome density `f_Ψ(m)` including interference terms.
    pub fn superposition_density(&self, meas: &Measurement, m: &[f64]) -> Result<f64> {
        let a = self.amplitude(meas, m)?.norm_sqr();
        Ok(match meas {
            Measurement::Homodyne => a,
            _ => a / PI.powi(self.modes() as i32),
        })
    }

    /// Wires the densities and samplers for `meas` into a rejection model.
    pub fn model(&self, meas: Measurement) -> Result<SuperpositionModel<GaussianOracles>> {
        SuperpositionModel::new(GaussianOracles::new(self.clone(), meas)?)
    }
}

fn check_shapes(components: &[GaussianPureState], coeffs: &[Complex64]) -> Result<()> {
    if components.is_empty() {
        return Err(Error::InvalidArgument(
            "superposition with no components".into(),
        ));
    }
    if components.len() != coeffs.len() {
        return Err(Error::DimensionMismatch {
            expected: components.len(),
            got: coeffs.len(),
        });
    }
    let modes = components[0].modes();
    if let Some(bad) = components.iter().find(|s| s.modes() != modes) {
        return Err(Error::DimensionMismatch {
            expected: modes,
            got: bad.modes(),
        });
    }
    if components.iter().any(|s| !s.is_product()) {
        return Err(Error::UnsupportedOverlap);
    }
    Ok(())
}

/// Density and sampling oracles of a Gaussian superposition under a fixed
/// measurement. Outcomes are vectors in the measurement's outcome space.
#[derive(Debug, Clone)]
pub struct GaussianOracles {
    sup: GaussianSuperposition,
    meas: Measurement,
    laws: Vec<OutcomeLaw>,
}

impl GaussianOracles {
    pub fn new(sup: GaussianSuperposition, meas: Measurement) -> Result<Self> {
        meas.validate(sup.modes())?;
        let laws = sup
            .components()
            .iter()
            .map(|s| OutcomeLaw::new(s, &meas))
            .collect::<Result<Vec<_>>>()?;
        Ok(GaussianOracles { sup, meas, laws })
    }

    pub fn superposition(&self) -> &GaussianSuperposition {
        &self.sup
    }

    pub fn measurement(&self) -> &Measurement {
        &self.meas
    }

    pub fn outcome_dim(&self) -> usize {
        self.meas.outcome_dim(self.sup.modes())
    }
}

impl SuperpositionOracles for GaussianOracles {
    type Outcome = DVector<f64>;

    fn coefficients(&self) -> &[Complex64] {
        self.sup.coeffs()
    }

    fn superposition_density(&self, x: &DVector<f64>) -> Result<f64> {
        self.sup.superposition_density(&self.meas, x.as_slice())
    }

    fn component_density(&self, j: usize, x: &DVector<f64>) -> Result<f64> {
        self.laws[j].density(x.as_slice())
    }

    fn sample_component(&self, j: usize, rng: &mut dyn RngCore) -> Result<DVector<f64>> {
        Ok(self.laws[j].sample(rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_components_give_all_ones() {
        let s = GaussianPureState::single_mode(0.3, 0.2, 1.0, -0.5).unwrap();
        let g = gram_matrix(&[s.clone(), s.clone(), s]).unwrap();
        assert!(g.iter().all(|v| (v - 1.0).norm() < 1e-13));
    }

    #[test]
    fn coherent_overlap() {
        let a = Complex64::new(1.0, 1.0);
        let g = gram_matrix(&[
            GaussianPureState::coherent(a),
            GaussianPureState::coherent(-a),
        ])
        .unwrap();
        assert!((g[(0, 1)] - (-4.0f64).exp()).norm() < 1e-15);
    }

    #[test]
    fn squeezed_overlap() {
        let d: f64 = 0.3;
        let s1 = GaussianPureState::displaced_squeezed(1.0, d).unwrap();
        let s2 = GaussianPureState::displaced_squeezed(-1.0, d).unwrap();
        let v = overlap(&s1, &s2).unwrap();
        assert!((v - (-4.0 / (4.0 * d * d)).exp()).norm() < 1e-15);
    }

    #[test]
    fn unnormalized_cat_norm() {
        let a = Complex64::new(1.0, 1.0);
        let comps = vec![
            GaussianPureState::coherent(a),
            GaussianPureState::coherent(-a),
        ];
        let one = Complex64::new(1.0, 0.0);
        let n = norm_squared(&comps, &[one, one]).unwrap();
        assert!((n - 2.0 * (1.0 + (-4.0f64).exp())).abs() < 1e-13);
        assert!((n - 2.03663).abs() < 1e-5);
    }

    #[test]
    fn orthogonal_limit_norm() {
        let comps: Vec<_> = (0..3)
            .map(|k| GaussianPureState::coherent(Complex64::new(20.0 * k as f64, 0.0)))
            .collect();
        let c = [
            Complex64::new(0.5, 0.0),
            Complex64::new(0.0, 0.5),
            Complex64::new(0.7, 0.1),
        ];
        let expect: f64 = c.iter().map(|v| v.norm_sqr()).sum();
        assert!((norm_squared(&comps, &c).unwrap() - expect).abs() < 1e-14);
    }

    #[test]
    fn requires_normalization() {
        let v = GaussianPureState::vacuum(1);
        assert!(matches!(
            GaussianSuperposition::new(vec![v.clone()], vec![Complex64::new(2.0, 0.0)]),
            Err(Error::NotNormalized(_))
        ));
        let sup = GaussianSuperposition::new(vec![v], vec![Complex64::new(0.0, 1.0)]).unwrap();
        assert_eq!(sup.k_factor(), 1.0);
    }

    #[test]
    fn single_component_matches_single_density() {
        let s = GaussianPureState::single_mode(0.5, 0.9, 0.3, 0.1).unwrap();
        let sup =
            GaussianSuperposition::new(vec![s.clone()], vec![Complex64::new(0.6, 0.8)]).unwrap();
        for m in [[0.0, 0.0], [1.0, 2.0], [-1.5, 0.4]] {
            let a = sup
                .superposition_density(&Measurement::Heterodyne, &m)
                .unwrap();
            let b = super::super::single_density(&s, &Measurement::Heterodyne, &m).unwrap();
            assert!((a - b).abs() <= 1e-12 * b);
        }
        let x = [0.7];
        let a = sup
            .superposition_density(&Measurement::Homodyne, &x)
            .unwrap();
        let b = super::super::single_density(&s, &Measurement::Homodyne, &x).unwrap();
        assert!((a - b).abs() <= 1e-12 * b);
    }
}
