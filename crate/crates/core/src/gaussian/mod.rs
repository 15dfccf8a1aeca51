//! Pure Gaussian states, Gaussian measurements and their superpositions.
//!
//! Conventions: quadratures are ordered `(x₁, p₁, …, x_N, p_N)`, the vacuum
//! has covariance `Γ = I` (so the quadrature covariance is `Γ/2`), a coherent
//! state `|α⟩` has displacement `d = √2 (Re α, Im α)`, and phase-space points
//! relate to coherent amplitudes by `β = (x + ip)/√2`. Every state carries the
//! global phase for which `⟨vac, ψ⟩ > 0`.
//!
//! Heterodyne and general-dyne densities are relative to Lebesgue measure in
//! `β`, which is `dm / 2^N` in quadrature coordinates. Homodyne densities are
//! relative to `dx`.
//!
//! Overlaps are closed-form for single-mode states. Multimode states are
//! handled when they factor across modes; anything else reports
//! [`Error::UnsupportedOverlap`](crate::Error::UnsupportedOverlap).

mod measurement;
mod presets;
mod state;
mod superposition;
mod wave;

pub use measurement::{
    component_sample, dyne_amplitude, het_amplitude, position_wavefunction, single_density,
    Measurement, OutcomeLaw,
};
pub use presets::{cat_model, cat_state, gkp_model, gkp_state, gkp_tail_mass, GkpParams};
pub use state::{symplectic_form, GaussianPureState, PURITY_TOL};
pub use superposition::{
    gram_matrix, norm_squared, overlap, GaussianOracles, GaussianSuperposition, NORM_TOL,
};
pub use wave::ModeWave;
