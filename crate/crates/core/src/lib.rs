//! Sampling measurement outcomes of a coherent superposition
//! `Ψ = Σ_j c_j ψ_j` from oracles for its components.
//!
//! Given the outcome density of `Ψ`, the outcome densities of each `ψ_j` and
//! a sampler for each `ψ_j`, [`SuperpositionModel`] draws exact samples of
//! `Ψ`'s outcome distribution by rejection from the incoherent mixture
//! `Σ_j p(j) μ_j` with `p(j) = |c_j|² / ‖c‖₂²`. The expected number of trials
//! per sample is `K = χ ‖c‖₂²`.
//!
//! ```
//! use num_complex::Complex64;
//! use supersample::gaussian::cat_model;
//! use supersample::rng;
//!
//! let model = cat_model(Complex64::new(1.0, 1.0)).unwrap();
//! let mut rng = rng::root(7);
//! let accepted = model.sample_until_success(1000, &mut rng).unwrap();
//! assert_eq!(accepted.outcome.len(), 2);
//! assert!((model.k() - 1.964).abs() < 1e-3);
//! ```

pub mod discrete;
mod error;
pub mod gaussian;
pub mod linalg;
pub mod povm;
pub mod quadrature;
pub mod rejection;
pub mod rng;
pub mod sparsify;
pub mod stats;

pub use error::{Error, Result};
pub use rejection::{
    trial_budget, Accepted, IndexSampling, SampleResult, SuperpositionModel, SuperpositionOracles,
    TrialRecord,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/rejection.md")]
    mod rejection {}
    #[doc = include_str!("../../../book/src/index-sampling.md")]
    mod index_sampling {}
    #[doc = include_str!("../../../book/src/gaussian.md")]
    mod gaussian {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/finite.md")]
    mod finite {}
    #[doc = include_str!("../../../book/src/sparsification.md")]
    mod sparsification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
