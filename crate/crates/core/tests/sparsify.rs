use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use supersample::gaussian::{gram_matrix, GaussianPureState, GaussianSuperposition, Measurement};
use supersample::rng;
use supersample::sparsify::*;
use supersample::stats::{two_sample_l1, Histogram};

fn random_decomposition(terms: usize, rng: &mut impl Rng) -> Decomposition {
    let comps: Vec<_> = (0..terms)
        .map(|_| GaussianPureState::random_single_mode(rng))
        .collect();
    let weights: Vec<_> = (0..terms)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    GaussianSuperposition::normalized(comps, weights).unwrap()
}

/// `‖Ψ − Ψ′‖` from one Gram matrix over both component lists.
fn distance(a: &GaussianSuperposition, b: &GaussianSuperposition) -> f64 {
    let mut comps = a.components().to_vec();
    comps.extend_from_slice(b.components());
    let mut coeffs = a.coeffs().to_vec();
    coeffs.extend(b.coeffs().iter().map(|c| -c));
    let g = gram_matrix(&comps).unwrap();
    let mut total = Complex64::new(0.0, 0.0);
    for j in 0..coeffs.len() {
        for k in 0..coeffs.len() {
            total += coeffs[j].conj() * g[(j, k)] * coeffs[k];
        }
    }
    total.re.max(0.0).sqrt()
}

#[test]
fn accepted_outputs_meet_bounds() {
    let mut r = rng::root(41);
    let decomp = random_decomposition(6, &mut r);
    let eps = 0.4;
    let mut attempts = Vec::new();
    for _ in 0..100 {
        let s = sparsify_verified(&decomp, eps, &mut r).unwrap();
        let d = distance(&decomp, s.result());
        assert!((d - s.distance()).abs() < 1e-8, "{d} vs {}", s.distance());
        assert!(d <= 2.0 * eps);
        assert!(s.coeff_norm() <= 2f64.sqrt() * eps);
        assert!((s.result().norm_squared().unwrap() - 1.0).abs() < 1e-9);
        assert!(s.result().k_factor() <= 6.0 * l1_sq(&decomp) + 1e-9);
        attempts.push(s.attempts);
    }
    attempts.sort();
    let median = (attempts[49] + attempts[50]) as f64 / 2.0;
    assert!(median <= 2.0, "median attempts {median}");
}

#[test]
fn estimator_error_shrinks_like_one_over_chi() {
    let mut r = rng::root(42);
    let decomp = random_decomposition(6, &mut r);
    let l1 = l1_sq(&decomp);
    for chi in [8, 200] {
        let n = 400;
        let errs: Vec<f64> = (0..n)
            .map(|_| {
                sparsify_once(&decomp, chi, &mut r)
                    .unwrap()
                    .omega_distance
                    .powi(2)
            })
            .collect();
        let mean = errs.iter().sum::<f64>() / n as f64;
        let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        // E‖Ψ − Ω‖² = (‖c‖₁² − ‖Ψ‖²)/χ for unit components.
        let want = (l1 - 1.0) / chi as f64;
        assert!(
            (mean - want).abs() < 4.0 * (var / n as f64).sqrt(),
            "χ={chi}: {mean} vs {want}"
        );
    }
}

#[test]
fn extent_sampling_tracks_direct_sampling() {
    let mut r = rng::root(43);
    let decomp = random_decomposition(6, &mut r);
    let eps = 0.4;
    let meas = Measurement::Homodyne;
    let n = 20_000;
    let direct = decomp.model(meas.clone()).unwrap();
    let mut a = Histogram::new(1, 0.1).unwrap();
    for _ in 0..n {
        let x = direct
            .sample_until_success(1_000_000, &mut r)
            .unwrap()
            .outcome;
        a.add(x.as_slice()).unwrap();
    }
    let mut b = Histogram::new(1, 0.1).unwrap();
    let mut fails = 0;
    while b.total() < n as u64 {
        match sample_with_extent(&decomp, eps, 0.01, meas.clone(), &mut r)
            .unwrap()
            .outcome
        {
            Some(x) => b.add(x.as_slice()).unwrap(),
            None => fails += 1,
        }
    }
    let l1 = two_sample_l1(&a, &b).unwrap();
    assert!(l1 <= 8.0 * eps + 0.05, "L1 {l1}");
    assert!(fails < n / 50);
}

#[test]
fn failure_rate_within_delta() {
    let mut r = rng::root(44);
    let decomp = random_decomposition(4, &mut r);
    let sampler = ExtentSampler::new(&decomp, 0.3, Measurement::Heterodyne, &mut r).unwrap();
    let delta = 0.2;
    let runs = 4000;
    let fails = (0..runs)
        .filter(|_| sampler.sample(delta, &mut r).unwrap().is_fail())
        .count();
    // 99% one-sided binomial bound on the count.
    let sd = (runs as f64 * delta * (1.0 - delta)).sqrt();
    assert!(
        (fails as f64) <= runs as f64 * delta + 2.33 * sd,
        "{fails} failures"
    );
}

#[test]
fn retry_cap_is_reported() {
    let mut r = rng::root(45);
    let decomp = random_decomposition(6, &mut r);
    // Zero attempts can never succeed.
    assert!(matches!(
        sparsify_verified_with(&decomp, 0.4, 0, &mut r),
        Err(supersample::Error::MaxAttempts { attempts: 0 })
    ));
}
