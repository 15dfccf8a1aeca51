//! Verification sweeps. Every check reports margins, positive when passing.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use supersample::discrete::{index_bits, CountingPmf, PmfOracle};
use supersample::gaussian::{
    cat_state, gkp_state, het_amplitude, single_density, GaussianPureState, GaussianSuperposition,
    GkpParams, Measurement,
};
use supersample::povm::{
    born_distribution, check_mixture_bound, check_pinching, random_instance,
    random_orthogonal_instance, FinitePovm, FiniteSuperposition, PovmReport, COMPLETENESS_TOL,
    PSD_TOL,
};
use supersample::quadrature::GaussLegendre;
use supersample::rng::{self, StreamRng};
use supersample::stats::{frequencies, tv_distance};
use supersample::{SuperpositionModel, SuperpositionOracles};

use crate::error::CliError;
use crate::model::{self, Model};
use crate::output::write_json;
use crate::{Suite, VerifyArgs};

/// Slack on the pointwise bound and the pinching inequality.
const BOUND_TOL: f64 = 1e-9;
const MASS_TOL: f64 = 1e-6;
const TV_TOL: f64 = 0.02;

#[derive(Serialize)]
struct Check {
    name: String,
    passed: bool,
    instances: usize,
    min_margin: Option<f64>,
    max_margin: Option<f64>,
    detail: String,
}

/// Collects margins and builds a [`Check`].
struct Margins {
    min: f64,
    max: f64,
    count: usize,
}

impl Margins {
    fn new() -> Self {
        Margins {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            count: 0,
        }
    }

    fn push(&mut self, m: f64) {
        // NaN margins must fail.
        let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
        self.min = self.min.min(m);
        self.max = self.max.max(m);
        self.count += 1;
    }

    fn check(self, name: &str, detail: String) -> Check {
        let finite = |v: f64| v.is_finite().then_some(v);
        Check {
            name: name.to_string(),
            passed: self.count > 0 && self.min >= 0.0,
            instances: self.count,
            min_margin: finite(self.min),
            max_margin: finite(self.max),
            detail,
        }
    }
}

#[derive(Serialize)]
struct Report {
    seed: u64,
    passed: bool,
    checks: Vec<Check>,
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    let model = args.model.as_deref().map(model::load).transpose()?;
    let suite = args.suite.or(if model.is_some() {
        None
    } else {
        Some(Suite::All)
    });
    let want = |s: Suite| suite == Some(Suite::All) || suite == Some(s);
    let mut checks = Vec::new();
    if let Some(m) = &model {
        checks.extend(model_checks(m, args.seed)?);
    }
    if want(Suite::Pinching) {
        checks.push(pinching(&mut rng::substream(args.seed, 1))?);
    }
    if want(Suite::Mixture) {
        checks.push(finite_mixture(&mut rng::substream(args.seed, 2))?);
        checks.push(gaussian_mixture(&mut rng::substream(args.seed, 3))?);
    }
    if want(Suite::Reduction) {
        checks.push(reduction(args.seed, args.samples)?);
    }
    if want(Suite::Gaussian) {
        checks.extend(gaussian(&mut rng::substream(args.seed, 5))?);
    }
    if want(Suite::Discrete) {
        checks.push(discrete(&mut rng::substream(args.seed, 6))?);
    }
    let passed = checks.iter().all(|c| c.passed);
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.clone())
        .collect();
    write_json(
        args.out.as_deref(),
        &Report {
            seed: args.seed,
            passed,
            checks,
        },
    )?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "failed checks: {}",
            failed.join(", ")
        )))
    }
}

fn povm_checks(report: &PovmReport) -> Vec<Check> {
    let one = |name: &str, margin: f64, detail: String| {
        let mut m = Margins::new();
        m.push(margin);
        m.check(name, detail)
    };
    vec![
        one(
            "povm_positivity",
            report.min_eigenvalue + PSD_TOL,
            format!("min effect eigenvalue {:e}", report.min_eigenvalue),
        ),
        one(
            "povm_hermiticity",
            COMPLETENESS_TOL - report.hermiticity_defect,
            format!("max |M - M^dagger| entry {:e}", report.hermiticity_defect),
        ),
        one(
            "povm_completeness",
            COMPLETENESS_TOL - report.completeness_defect,
            format!("max |sum M_k - I| entry {:e}", report.completeness_defect),
        ),
    ]
}

fn model_checks(model: &Model, seed: u64) -> Result<Vec<Check>, CliError> {
    match model {
        Model::Finite { sup, povm, report } => {
            let mut checks = povm_checks(report);
            if report.is_valid() {
                let mut m = Margins::new();
                m.push(1.0 + BOUND_TOL - check_mixture_bound(sup, povm)?);
                checks.push(m.check("model_mixture_bound", format!("K = {}", sup.k_factor())));
                if let Ok(p) = check_pinching(sup) {
                    let mut m = Margins::new();
                    m.push(p + BOUND_TOL);
                    checks.push(m.check("model_pinching", format!("min eigenvalue {p:e}")));
                }
            }
            Ok(checks)
        }
        Model::Gaussian {
            kind,
            sup,
            default_measurement,
        } => {
            let mut r = rng::substream(seed, 7);
            let mut m = Margins::new();
            ratio_margins(sup, default_measurement.clone(), 10_000, &mut r, &mut m)?;
            Ok(vec![m.check(
                "model_mixture_bound",
                format!("{kind}, K = {}", sup.k_factor()),
            )])
        }
    }
}

fn pinching(r: &mut StreamRng) -> Result<Check, CliError> {
    let mut m = Margins::new();
    for _ in 0..1000 {
        let dim = r.random_range(1..=16);
        let chi = r.random_range(1..=dim);
        m.push(check_pinching(&random_orthogonal_instance(dim, chi, r)?)? + BOUND_TOL);
    }
    Ok(m.check(
        "pinching",
        "1000 orthogonal instances, D <= 16; margin = min eigenvalue + 1e-9".into(),
    ))
}

fn finite_mixture(r: &mut StreamRng) -> Result<Check, CliError> {
    let mut m = Margins::new();
    for _ in 0..1000 {
        let dim = r.random_range(2..=8);
        let chi = r.random_range(1..=8);
        let effects = r.random_range(2..=8);
        let (sup, povm) = random_instance(dim, chi, effects, r)?;
        m.push(1.0 + BOUND_TOL - check_mixture_bound(&sup, &povm)?);
    }
    Ok(m.check(
        "finite_mixture_bound",
        "1000 random instances; margin = 1 + 1e-9 - max ratio".into(),
    ))
}

fn ratio_margins(
    sup: &GaussianSuperposition,
    meas: Measurement,
    points: usize,
    r: &mut StreamRng,
    m: &mut Margins,
) -> Result<(), CliError> {
    let model: SuperpositionModel<_> = sup.model(meas)?;
    let oracles = model.oracles();
    for _ in 0..points {
        let x = if r.random::<bool>() {
            let j = r.random_range(0..sup.chi());
            oracles.sample_component(j, r)?
        } else {
            DVector::from_fn(oracles.outcome_dim(), |_, _| r.random_range(-6.0..6.0))
        };
        let target = oracles.superposition_density(&x)?;
        let mixture = model.mixture_density(&x)?;
        if mixture > 1e-280 {
            m.push(1.0 + BOUND_TOL - target / (model.k() * mixture));
        }
    }
    Ok(())
}

fn random_superposition(r: &mut StreamRng) -> Result<GaussianSuperposition, CliError> {
    let normal = |r: &mut StreamRng| -> f64 { r.sample(StandardNormal) };
    loop {
        let chi = r.random_range(1..=8);
        let comps: Vec<_> = (0..chi)
            .map(|_| GaussianPureState::random_single_mode(r))
            .collect();
        let w: Vec<_> = (0..chi)
            .map(|_| Complex64::new(normal(r), normal(r)))
            .collect();
        match GaussianSuperposition::normalized(comps, w) {
            Ok(s) => return Ok(s),
            Err(supersample::Error::NotNormalized(_)) => continue,
            Err(e) => return Err(e.into()),
        }
    }
}

fn gaussian_mixture(r: &mut StreamRng) -> Result<Check, CliError> {
    let mut m = Margins::new();
    let cat = cat_state(Complex64::new(1.0, 1.0))?;
    ratio_margins(&cat, Measurement::Heterodyne, 10_000, r, &mut m)?;
    let gkp = gkp_state(&GkpParams::reference())?;
    ratio_margins(&gkp, Measurement::Homodyne, 10_000, r, &mut m)?;
    for i in 0..100 {
        let sup = random_superposition(r)?;
        let meas = match i % 3 {
            0 => Measurement::Heterodyne,
            1 => Measurement::Homodyne,
            _ => Measurement::General {
                squeeze: vec![r.random_range(0.2..5.0)],
            },
        };
        ratio_margins(&sup, meas, 100, r, &mut m)?;
    }
    Ok(m.check(
        "gaussian_mixture_bound",
        "cat, GKP and 100 random single-mode superpositions; margin = 1 + 1e-9 - ratio".into(),
    ))
}

fn reduction(seed: u64, samples: usize) -> Result<Check, CliError> {
    let mut r = rng::substream(seed, 4);
    let mut m = Margins::new();
    for inst in 0..5u64 {
        let dim = r.random_range(2..=8);
        let chi = r.random_range(1..=4);
        let effects = r.random_range(2..=8);
        let (sup, povm): (FiniteSuperposition, FinitePovm) =
            random_instance(dim, chi, effects, &mut r)?;
        let born = born_distribution(sup.state(), &povm)?;
        let model = sup.model(&povm)?;
        let mut outcomes = Vec::with_capacity(samples);
        for d in model.sample_many(samples, 10_000_000, seed.wrapping_add(1000 + inst)) {
            outcomes.push(d?.outcome);
        }
        m.push(TV_TOL - tv_distance(&frequencies(&outcomes, effects), &born));
    }
    Ok(m.check(
        "reduction_tv",
        format!("5 random instances, {samples} samples each; margin = 0.02 - TV"),
    ))
}

fn gaussian(r: &mut StreamRng) -> Result<Vec<Check>, CliError> {
    let gl = GaussLegendre::new(16);
    let measurements = [
        Measurement::Heterodyne,
        Measurement::Homodyne,
        Measurement::General { squeeze: vec![0.5] },
        Measurement::General { squeeze: vec![2.0] },
    ];
    let mut mass = Margins::new();
    let mut consistency = Margins::new();
    for _ in 0..10 {
        let s = GaussianPureState::random_single_mode(r);
        for meas in &measurements {
            let total = if meas.outcome_dim(1) == 1 {
                gl.integrate(-25.0, 25.0, 80, |x| {
                    single_density(&s, meas, &[x]).unwrap_or(f64::NAN)
                })
            } else {
                // Phase-space densities are relative to dm/2.
                0.5 * gl.integrate_2d((-25.0, 25.0), (-25.0, 25.0), 80, |x, p| {
                    single_density(&s, meas, &[x, p]).unwrap_or(f64::NAN)
                })
            };
            mass.push(MASS_TOL - (total - 1.0).abs());
        }
        for _ in 0..20 {
            let m = [r.random_range(-3.0..3.0), r.random_range(-3.0..3.0)];
            let a = het_amplitude(&s, &m)?.norm_sqr() / std::f64::consts::PI;
            let f = single_density(&s, &Measurement::Heterodyne, &m)?;
            consistency.push(1e-10 - (a - f).abs() / f.max(1e-300));
        }
    }
    Ok(vec![
        mass.check(
            "gaussian_density_mass",
            "10 random states x 4 measurements; margin = 1e-6 - |mass - 1|".into(),
        ),
        consistency.check(
            "gaussian_amplitude_density",
            "|het_amplitude|^2/pi vs heterodyne density; margin = 1e-10 - relative error".into(),
        ),
    ])
}

fn discrete(r: &mut StreamRng) -> Result<Check, CliError> {
    let mut m = Margins::new();
    for chi in 2..=64usize {
        let w: Vec<f64> = (0..chi).map(|_| r.random::<f64>()).collect();
        let s: f64 = w.iter().sum();
        let oracle = PmfOracle::new(CountingPmf::new(
            w.iter().map(|x| x / s).collect::<Vec<_>>(),
        ))?;
        let budget = 2 * chi * index_bits(chi) as usize;
        for _ in 0..20 {
            oracle.inner().reset();
            oracle.sample_index(r)?;
            m.push(budget as f64 - oracle.inner().calls() as f64);
        }
    }
    Ok(m.check(
        "discrete_call_budget",
        "chi = 2..64; margin = 2 chi ceil(log2 chi) - oracle calls per draw".into(),
    ))
}
