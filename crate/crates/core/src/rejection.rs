//! Rejection sampling from a coherent superposition's outcome distribution.
//!
//! Given oracles for the density `f_Ψ` of the superposition, the densities
//! `f_ψj` of its components, and a sampler for each component, the sampler
//! proposes from the incoherent mixture `Σ p(j) μ_ψj` with
//! `p(j) = |c_j|² / ‖c‖₂²` and accepts a proposal `x` with probability
//!
//! ```text
//!     f_Ψ(x) / (K · Σ_j p(j) f_ψj(x)),    K = χ ‖c‖₂².
//! ```
//!
//! `K` bounds the ratio uniformly, so the acceptance probability never exceeds
//! one, accepted outcomes are distributed exactly as `f_Ψ`, and each trial is
//! accepted with probability `1/K`. Running `n` trials fails with probability
//! at most `exp(−n/K)`.
//!
//! Random variates are consumed in a fixed order per trial: the index bits,
//! then whatever the component sampler draws, then one uniform for the
//! acceptance coin.

use std::fmt::Debug;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;
use rand::{Rng, RngCore};
use rayon::prelude::*;

use crate::discrete::{CdfSampler, CountingPmf, Pmf, PmfOracle};
use crate::error::{Error, Result};
use crate::rng;

/// Slack tolerated above an acceptance probability of one before it is
/// treated as a violated bound.
pub const CLAMP_TOL: f64 = 1e-9;

/// Oracle access to a superposition `Ψ = Σ c_j ψ_j` measured by a fixed POVM.
///
/// Densities are with respect to a common reference measure on the outcome
/// space. The component densities must integrate to one; `superposition_density`
/// must integrate to `‖Ψ‖²`.
pub trait SuperpositionOracles {
    type Outcome: Clone + Debug;

    fn coefficients(&self) -> &[Complex64];

    /// `f_Ψ(x) = ⟨Ψ, Q(x) Ψ⟩`.
    fn superposition_density(&self, x: &Self::Outcome) -> Result<f64>;

    /// `f_ψj(x) = ⟨ψ_j, Q(x) ψ_j⟩`.
    fn component_density(&self, j: usize, x: &Self::Outcome) -> Result<f64>;

    /// Draws `X ~ μ_ψj`.
    fn sample_component(&self, j: usize, rng: &mut dyn RngCore) -> Result<Self::Outcome>;
}

impl<O: SuperpositionOracles + ?Sized> SuperpositionOracles for &O {
    type Outcome = O::Outcome;

    fn coefficients(&self) -> &[Complex64] {
        (**self).coefficients()
    }

    fn superposition_density(&self, x: &Self::Outcome) -> Result<f64> {
        (**self).superposition_density(x)
    }

    fn component_density(&self, j: usize, x: &Self::Outcome) -> Result<f64> {
        (**self).component_density(j, x)
    }

    fn sample_component(&self, j: usize, rng: &mut dyn RngCore) -> Result<Self::Outcome> {
        (**self).sample_component(j, rng)
    }
}

/// How the component index `J ~ p` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexSampling {
    /// Bit-by-bit conditional coin flips against the `p(·)` oracle.
    #[default]
    Bitwise,
    /// Binary search in a cached cumulative table.
    Cdf,
}

/// One proposal and its accept/reject decision.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord<X> {
    pub j: usize,
    pub x: X,
    pub accept_prob: f64,
    pub accepted: bool,
}

/// Outcome of a budgeted run; `outcome` is `None` when every trial rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult<X> {
    pub outcome: Option<X>,
    pub trials_used: usize,
    pub trial_log: Option<Vec<TrialRecord<X>>>,
}

impl<X> SampleResult<X> {
    pub fn is_fail(&self) -> bool {
        self.outcome.is_none()
    }
}

/// An accepted sample together with the number of trials it took.
#[derive(Debug, Clone, PartialEq)]
pub struct Accepted<X> {
    pub outcome: X,
    pub trials: usize,
}

/// A superposition with its proposal distribution and bound `K` precomputed.
pub struct SuperpositionModel<O> {
    oracles: O,
    pmf: PmfOracle<CountingPmf<Vec<f64>>>,
    cdf: CdfSampler,
    index_sampling: IndexSampling,
    norm_sq: f64,
    k: f64,
}

impl<O: SuperpositionOracles> SuperpositionModel<O> {
    pub fn new(oracles: O) -> Result<Self> {
        let coeffs = oracles.coefficients();
        let chi = coeffs.len();
        if chi == 0 {
            return Err(Error::InvalidArgument(
                "superposition with no components".into(),
            ));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        let norm_sq: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if !(norm_sq > 0.0) {
            return Err(Error::InvalidArgument("all coefficients vanish".into()));
        }
        let probs: Vec<f64> = coeffs.iter().map(|c| c.norm_sqr() / norm_sq).collect();
        let k = chi as f64 * norm_sq;
        // A normalized state always has K >= 1; anything below means the
        // coefficients and the state disagree.
        if k < 1.0 - 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "bound K = {k} < 1 cannot belong to a normalized superposition"
            )));
        }
        let cdf = CdfSampler::new(&probs)?;
        let pmf = PmfOracle::new(CountingPmf::new(probs))?;
        Ok(SuperpositionModel {
            oracles,
            pmf,
            cdf,
            index_sampling: IndexSampling::default(),
            norm_sq,
            k,
        })
    }

    pub fn with_index_sampling(mut self, mode: IndexSampling) -> Self {
        self.index_sampling = mode;
        self
    }

    pub fn oracles(&self) -> &O {
        &self.oracles
    }

    pub fn chi(&self) -> usize {
        self.pmf.chi()
    }

    /// `p(j) = |c_j|² / ‖c‖₂²`.
    pub fn probabilities(&self) -> &[f64] {
        self.pmf.inner().get()
    }

    /// `‖c‖₂²`.
    pub fn coefficient_norm_sq(&self) -> f64 {
        self.norm_sq
    }

    /// The rejection bound `K = χ‖c‖₂²`, also the expected number of trials
    /// per accepted sample.
    pub fn k(&self) -> f64 {
        self.k
    }

    /// Number of `p(·)` evaluations made so far.
    pub fn pmf_calls(&self) -> usize {
        self.pmf.inner().calls()
    }

    /// Density of the proposal mixture, `Σ_j p(j) f_ψj(x)`.
    pub fn mixture_density(&self, x: &O::Outcome) -> Result<f64> {
        let p = self.pmf.inner();
        let mut total = 0.0;
        for j in 0..self.chi() {
            let f = self.oracles.component_density(j, x)?;
            check_density(f, || format!("component density f_{j}"))?;
            total += p.prob(j) * f;
        }
        Ok(total)
    }

    pub fn acceptance_probability(&self, x: &O::Outcome) -> Result<f64> {
        let target = self.oracles.superposition_density(x)?;
        check_density(target, || "superposition density".to_string())?;
        let mixture = self.mixture_density(x)?;
        if mixture <= 0.0 {
            return Err(Error::DegenerateOutcome { density: mixture });
        }
        let ratio = target / (self.k * mixture);
        if ratio > 1.0 + CLAMP_TOL {
            return Err(Error::BoundViolation { ratio, k: self.k });
        }
        Ok(ratio.min(1.0))
    }

    fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        match self.index_sampling {
            IndexSampling::Bitwise => self.pmf.sample_index(rng),
            IndexSampling::Cdf => Ok(self.cdf.sample(rng)),
        }
    }

    /// One proposal `(J, X)` with `J ~ p`, `X ~ μ_ψJ`, and its acceptance coin.
    pub fn draw_trial<R: RngCore>(&self, rng: &mut R) -> Result<TrialRecord<O::Outcome>> {
        let j = self.sample_index(rng)?;
        let x = self.oracles.sample_component(j, rng)?;
        let accept_prob = self.acceptance_probability(&x)?;
        let u: f64 = rng.random();
        Ok(TrialRecord {
            j,
            x,
            accept_prob,
            accepted: u < accept_prob,
        })
    }

    /// Runs at most `n` trials and returns the first accepted outcome.
    pub fn sample_with_budget<R: RngCore>(
        &self,
        n: usize,
        rng: &mut R,
    ) -> Result<SampleResult<O::Outcome>> {
        self.budgeted(n, rng, false)
    }

    /// Like [`sample_with_budget`](Self::sample_with_budget) but keeps every trial.
    pub fn sample_with_budget_logged<R: RngCore>(
        &self,
        n: usize,
        rng: &mut R,
    ) -> Result<SampleResult<O::Outcome>> {
        self.budgeted(n, rng, true)
    }

    fn budgeted<R: RngCore>(
        &self,
        n: usize,
        rng: &mut R,
        log: bool,
    ) -> Result<SampleResult<O::Outcome>> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "trial budget must be at least 1".into(),
            ));
        }
        let mut trial_log = log.then(Vec::new);
        for used in 1..=n {
            let trial = self.draw_trial(rng)?;
            let accepted = trial.accepted.then(|| trial.x.clone());
            if let Some(log) = trial_log.as_mut() {
                log.push(trial);
            }
            if let Some(outcome) = accepted {
                return Ok(SampleResult {
                    outcome: Some(outcome),
                    trials_used: used,
                    trial_log,
                });
            }
        }
        Ok(SampleResult {
            outcome: None,
            trials_used: n,
            trial_log,
        })
    }

    /// Repeats trials until one is accepted, giving up after `max_trials`.
    pub fn sample_until_success<R: RngCore>(
        &self,
        max_trials: usize,
        rng: &mut R,
    ) -> Result<Accepted<O::Outcome>> {
        match self.sample_with_budget(max_trials, rng)? {
            SampleResult {
                outcome: Some(outcome),
                trials_used,
                ..
            } => Ok(Accepted {
                outcome,
                trials: trials_used,
            }),
            SampleResult { trials_used, .. } => Err(Error::BudgetExhausted {
                trials: trials_used,
            }),
        }
    }

    /// Draws `count` samples in parallel, sample `i` from substream `(seed, i)`.
    ///
    /// The result is ordered by sample index and does not depend on the number
    /// of worker threads.
    pub fn sample_many(
        &self,
        count: usize,
        max_trials: usize,
        seed: u64,
    ) -> Vec<Result<Accepted<O::Outcome>>>
    where
        O: Sync,
        O::Outcome: Send,
    {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = rng::substream(seed, i as u64);
                self.sample_until_success(max_trials, &mut rng)
            })
            .collect()
    }
}

fn check_density(f: f64, what: impl FnOnce() -> String) -> Result<()> {
    if f >= 0.0 && f.is_finite() {
        Ok(())
    } else {
        Err(Error::OracleContract(format!("{} returned {f}", what())))
    }
}

/// Number of trials `n = ⌈K ln(1/δ)⌉`, so that `exp(−n/K) ≤ δ`.
pub fn trial_budget(k: f64, delta: f64) -> Result<usize> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "bound K = {k} must be finite and >= 1"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "failure probability {delta} not in (0, 1)"
        )));
    }
    let n = (k * (1.0 / delta).ln()).ceil();
    Ok((n as usize).max(1))
}

/// Wraps oracles and counts calls of each kind.
pub struct CountingOracles<O> {
    inner: O,
    superposition: AtomicUsize,
    component: Vec<AtomicUsize>,
    samples: AtomicUsize,
}

/// Snapshot of [`CountingOracles`] counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleCalls {
    pub superposition: usize,
    pub component: Vec<usize>,
    pub samples: usize,
}

impl<O: SuperpositionOracles> CountingOracles<O> {
    pub fn new(inner: O) -> Self {
        let chi = inner.coefficients().len();
        CountingOracles {
            inner,
            superposition: AtomicUsize::new(0),
            component: (0..chi).map(|_| AtomicUsize::new(0)).collect(),
            samples: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> OracleCalls {
        OracleCalls {
            superposition: self.superposition.load(Ordering::Relaxed),
            component: self
                .component
                .iter()
                .map(|c| c.load(Ordering::Relaxed))
                .collect(),
            samples: self.samples.load(Ordering::Relaxed),
        }
    }
}

impl<O: SuperpositionOracles> SuperpositionOracles for CountingOracles<O> {
    type Outcome = O::Outcome;

    fn coefficients(&self) -> &[Complex64] {
        self.inner.coefficients()
    }

    fn superposition_density(&self, x: &Self::Outcome) -> Result<f64> {
        self.superposition.fetch_add(1, Ordering::Relaxed);
        self.inner.superposition_density(x)
    }

    fn component_density(&self, j: usize, x: &Self::Outcome) -> Result<f64> {
        self.component[j].fetch_add(1, Ordering::Relaxed);
        self.inner.component_density(j, x)
    }

    fn sample_component(&self, j: usize, rng: &mut dyn RngCore) -> Result<Self::Outcome> {
        self.samples.fetch_add(1, Ordering::Relaxed);
        self.inner.sample_component(j, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// `(|0⟩ + |1⟩)/√2` measured in the computational basis, written as a
    /// superposition of the two basis states.
    struct Qubit {
        coeffs: Vec<Complex64>,
    }

    impl Qubit {
        fn new() -> Self {
            let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            Qubit { coeffs: vec![c, c] }
        }
    }

    impl SuperpositionOracles for Qubit {
        type Outcome = usize;

        fn coefficients(&self) -> &[Complex64] {
            &self.coeffs
        }

        fn superposition_density(&self, _x: &usize) -> Result<f64> {
            Ok(0.5)
        }

        fn component_density(&self, j: usize, x: &usize) -> Result<f64> {
            Ok(if j == *x { 1.0 } else { 0.0 })
        }

        fn sample_component(&self, j: usize, _rng: &mut dyn RngCore) -> Result<usize> {
            Ok(j)
        }
    }

    /// A single normalized component: every proposal is accepted.
    struct Single;

    impl SuperpositionOracles for Single {
        type Outcome = f64;

        fn coefficients(&self) -> &[Complex64] {
            const ONE: [Complex64; 1] = [Complex64::new(0.0, 1.0)];
            &ONE
        }

        fn superposition_density(&self, x: &f64) -> Result<f64> {
            Ok((-x * x / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt())
        }

        fn component_density(&self, _j: usize, x: &f64) -> Result<f64> {
            self.superposition_density(x)
        }

        fn sample_component(&self, _j: usize, rng: &mut dyn RngCore) -> Result<f64> {
            Ok(rng.sample(rand_distr::StandardNormal))
        }
    }

    #[test]
    fn single_component_always_accepts() {
        let model = SuperpositionModel::new(Single).unwrap();
        assert_eq!(model.k(), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for x in [-3.0, 0.0, 0.7, 5.0] {
            assert_eq!(
                model.mixture_density(&x).unwrap(),
                Single.component_density(0, &x).unwrap()
            );
            assert_eq!(model.acceptance_probability(&x).unwrap(), 1.0);
        }
        for _ in 0..100 {
            assert!(model.draw_trial(&mut rng).unwrap().accepted);
            let r = model.sample_with_budget(1, &mut rng).unwrap();
            assert_eq!(r.trials_used, 1);
            assert!(r.outcome.is_some());
            assert_eq!(model.sample_until_success(1, &mut rng).unwrap().trials, 1);
        }
    }

    #[test]
    fn qubit_densities() {
        let model = SuperpositionModel::new(Qubit::new()).unwrap();
        assert!((model.k() - 2.0).abs() < 1e-12);
        assert!((model.mixture_density(&0).unwrap() - 0.5).abs() < 1e-15);
        assert!((model.acceptance_probability(&0).unwrap() - 0.5).abs() < 1e-15);
        assert!((model.acceptance_probability(&1).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn qubit_acceptance_rate() {
        let model = SuperpositionModel::new(Qubit::new()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let accepted = (0..n)
            .filter(|_| model.draw_trial(&mut rng).unwrap().accepted)
            .count();
        let rate = accepted as f64 / n as f64;
        let sigma = (0.25f64 / n as f64).sqrt();
        assert!((rate - 0.5).abs() <= 3.0 * sigma, "rate {rate}");
    }

    #[test]
    fn qubit_fail_rate_under_budget() {
        let model = SuperpositionModel::new(Qubit::new()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let runs = 10_000;
        let fails = (0..runs)
            .filter(|_| model.sample_with_budget(10, &mut rng).unwrap().is_fail())
            .count();
        let q = 2f64.powi(-10);
        let sigma = (q * (1.0 - q) / runs as f64).sqrt();
        assert!(
            (fails as f64 / runs as f64) <= q + 3.0 * sigma,
            "fails {fails}"
        );
    }

    #[test]
    fn fail_result_shape() {
        struct Never;
        impl SuperpositionOracles for Never {
            type Outcome = usize;
            fn coefficients(&self) -> &[Complex64] {
                const C: [Complex64; 1] = [Complex64::new(1.0, 0.0)];
                &C
            }
            fn superposition_density(&self, _x: &usize) -> Result<f64> {
                Ok(0.0)
            }
            fn component_density(&self, _j: usize, _x: &usize) -> Result<f64> {
                Ok(1.0)
            }
            fn sample_component(&self, _j: usize, _rng: &mut dyn RngCore) -> Result<usize> {
                Ok(0)
            }
        }
        let model = SuperpositionModel::new(Never).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = model.sample_with_budget_logged(5, &mut rng).unwrap();
        assert!(r.is_fail());
        assert_eq!(r.trials_used, 5);
        let log = r.trial_log.unwrap();
        assert_eq!(log.len(), 5);
        assert!(log.iter().all(|t| !t.accepted && t.accept_prob == 0.0));
        assert_eq!(
            model.sample_until_success(7, &mut rng),
            Err(Error::BudgetExhausted { trials: 7 })
        );
    }

    struct Faulty {
        target: f64,
        component: f64,
    }

    impl SuperpositionOracles for Faulty {
        type Outcome = usize;
        fn coefficients(&self) -> &[Complex64] {
            const C: [Complex64; 2] = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
            &C
        }
        fn superposition_density(&self, _x: &usize) -> Result<f64> {
            Ok(self.target)
        }
        fn component_density(&self, _j: usize, _x: &usize) -> Result<f64> {
            Ok(self.component)
        }
        fn sample_component(&self, _j: usize, _rng: &mut dyn RngCore) -> Result<usize> {
            Ok(0)
        }
    }

    #[test]
    fn oracle_inconsistencies_are_errors() {
        // K = 2 here, so the ratio is target / (2 * component).
        let m = SuperpositionModel::new(Faulty {
            target: 1.0,
            component: 0.0,
        })
        .unwrap();
        assert!(matches!(
            m.acceptance_probability(&0),
            Err(Error::DegenerateOutcome { .. })
        ));

        let m = SuperpositionModel::new(Faulty {
            target: 3.0,
            component: 1.0,
        })
        .unwrap();
        assert!(matches!(
            m.acceptance_probability(&0),
            Err(Error::BoundViolation { .. })
        ));

        let m = SuperpositionModel::new(Faulty {
            target: 2.0 + 1e-12,
            component: 1.0,
        })
        .unwrap();
        assert_eq!(m.acceptance_probability(&0).unwrap(), 1.0);

        let m = SuperpositionModel::new(Faulty {
            target: 1.0,
            component: -1.0,
        })
        .unwrap();
        assert!(matches!(
            m.mixture_density(&0),
            Err(Error::OracleContract(_))
        ));

        let m = SuperpositionModel::new(Faulty {
            target: f64::NAN,
            component: 1.0,
        })
        .unwrap();
        assert!(matches!(
            m.acceptance_probability(&0),
            Err(Error::OracleContract(_))
        ));
    }

    #[test]
    fn rejects_subunit_bound() {
        struct Small;
        impl SuperpositionOracles for Small {
            type Outcome = usize;
            fn coefficients(&self) -> &[Complex64] {
                const C: [Complex64; 2] = [Complex64::new(0.1, 0.0), Complex64::new(0.1, 0.0)];
                &C
            }
            fn superposition_density(&self, _x: &usize) -> Result<f64> {
                Ok(1.0)
            }
            fn component_density(&self, _j: usize, _x: &usize) -> Result<f64> {
                Ok(1.0)
            }
            fn sample_component(&self, _j: usize, _rng: &mut dyn RngCore) -> Result<usize> {
                Ok(0)
            }
        }
        assert!(SuperpositionModel::new(Small).is_err());
    }

    #[test]
    fn budgets() {
        assert_eq!(trial_budget(1.0, (-3.0f64).exp()).unwrap(), 3);
        assert_eq!(trial_budget(2.0, (-5.0f64).exp()).unwrap(), 10);
        assert_eq!(trial_budget(1.9642, 0.01).unwrap(), 10);
        assert!(trial_budget(0.5, 0.1).is_err());
        assert!(trial_budget(2.0, 0.0).is_err());
        assert!(trial_budget(2.0, 1.0).is_err());
        assert!(trial_budget(f64::INFINITY, 0.5).is_err());
    }

    #[test]
    fn same_seed_same_trials() {
        let model = SuperpositionModel::new(Qubit::new()).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            model
                .sample_with_budget_logged(50, &mut rng)
                .unwrap()
                .trial_log
                .unwrap()
        };
        assert_eq!(run(5), run(5));
    }

    #[test]
    fn parallel_draws_ignore_thread_count() {
        let model = SuperpositionModel::new(Single).unwrap();
        let a = model.sample_many(64, 10, 3);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let b = pool.install(|| model.sample_many(64, 10, 3));
        assert_eq!(a, b);
    }

    #[test]
    fn call_counts_per_trial() {
        let model = SuperpositionModel::new(CountingOracles::new(Qubit::new())).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let trials = 200;
        for _ in 0..trials {
            model.draw_trial(&mut rng).unwrap();
        }
        let calls = model.oracles().calls();
        assert_eq!(calls.superposition, trials);
        assert_eq!(calls.samples, trials);
        assert!(calls.component.iter().all(|&c| c == trials));
        // χ evaluations for the mixture plus at most 2χ⌈log₂χ⌉ for the index.
        assert!(model.pmf_calls() <= trials * (2 + 4));
    }
}
