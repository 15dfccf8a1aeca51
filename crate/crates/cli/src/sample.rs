use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use nalgebra::DVector;
use serde::Serialize;
use supersample::gaussian::Measurement;
use supersample::stats::Histogram;
use supersample::{trial_budget, Error, SuperpositionModel, SuperpositionOracles};

use crate::error::{io, CliError};
use crate::model::{self, Model};
use crate::output::{num, write_json, Csv};
use crate::{usage, SampleArgs};

#[derive(Serialize)]
struct Summary {
    model: &'static str,
    measurement: &'static str,
    seed: u64,
    samples: usize,
    accepted: usize,
    failures: Vec<usize>,
    delta: f64,
    budget_per_sample: usize,
    chi: usize,
    #[serde(rename = "K")]
    k: f64,
    /// Mean trials over accepted samples.
    mean_trials: Option<f64>,
    /// Accepted samples over all trials, failed samples included.
    acceptance_rate: f64,
    total_trials: usize,
    bin_width: f64,
    histogram: Option<&'static str>,
}

/// Outcome of every requested sample, in sample order.
struct Run<X> {
    outcomes: Vec<Option<(X, usize)>>,
    total_trials: usize,
}

fn run_model<O>(
    model: &SuperpositionModel<O>,
    count: usize,
    budget: usize,
    seed: u64,
) -> Result<Run<O::Outcome>, CliError>
where
    O: SuperpositionOracles + Sync,
    O::Outcome: Send,
{
    let mut outcomes = Vec::with_capacity(count);
    let mut total_trials = 0;
    for r in model.sample_many(count, budget, seed) {
        match r {
            Ok(a) => {
                total_trials += a.trials;
                outcomes.push(Some((a.outcome, a.trials)));
            }
            Err(Error::BudgetExhausted { trials }) => {
                total_trials += trials;
                outcomes.push(None);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Run {
        outcomes,
        total_trials,
    })
}

/// Trials per sample so that the whole run fails with probability at most δ.
fn per_sample_budget(k: f64, args: &SampleArgs) -> Result<usize, CliError> {
    if let Some(n) = args.budget {
        if n == 0 {
            return Err(usage("--budget must be at least 1"));
        }
        return Ok(n);
    }
    if !(args.delta > 0.0 && args.delta < 1.0) {
        return Err(usage(format!("--delta {} not in (0, 1)", args.delta)));
    }
    Ok(trial_budget(k, args.delta / args.samples as f64)?)
}

pub fn run(args: &SampleArgs) -> Result<(), CliError> {
    if args.samples == 0 {
        return Err(usage("--samples must be at least 1"));
    }
    if !(args.bin_width > 0.0) || !args.bin_width.is_finite() {
        return Err(usage(format!(
            "--bin-width {} must be positive",
            args.bin_width
        )));
    }
    let model = model::load(&args.model)?;
    std::fs::create_dir_all(&args.out).map_err(io(&args.out))?;
    let samples_path = args.out.join("samples.csv");
    let hist_path = args.out.join("histogram.csv");

    let summary = match &model {
        Model::Gaussian {
            kind,
            sup,
            default_measurement,
        } => {
            let meas: Measurement = args
                .measurement
                .map(Into::into)
                .unwrap_or_else(|| default_measurement.clone());
            let modes = sup.modes();
            let sm = sup.model(meas.clone())?;
            let budget = per_sample_budget(sm.k(), args)?;
            let run = run_model(&sm, args.samples, budget, args.seed)?;
            let het = !matches!(meas, Measurement::Homodyne);
            write_gaussian_samples(&samples_path, kind, het, modes, &run)?;
            let histogram = if modes == 1 {
                write_gaussian_histogram(&hist_path, kind, het, args.bin_width, &run)?;
                Some("histogram.csv")
            } else {
                None
            };
            summarize(
                kind,
                if het { "het" } else { "hom" },
                args,
                budget,
                sm.chi(),
                sm.k(),
                &run,
                histogram,
            )
        }
        Model::Finite { sup, povm, report } => {
            if args.measurement.is_some() {
                return Err(usage(
                    "finite models carry their own POVM; drop --measurement",
                ));
            }
            model::require_valid(report)?;
            let sm = sup.model(povm)?;
            let budget = per_sample_budget(sm.k(), args)?;
            let run = run_model(&sm, args.samples, budget, args.seed)?;
            write_finite(&samples_path, &hist_path, povm.len(), &run)?;
            summarize(
                "finite",
                "povm",
                args,
                budget,
                sm.chi(),
                sm.k(),
                &run,
                Some("histogram.csv"),
            )
        }
    };
    write_json(Some(&args.out.join("summary.json")), &summary)?;
    if summary.failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "{} of {} samples exhausted their budget of {} trials",
            summary.failures.len(),
            args.samples,
            summary.budget_per_sample
        )))
    }
}

#[allow(clippy::too_many_arguments)]
fn summarize<X>(
    kind: &'static str,
    measurement: &'static str,
    args: &SampleArgs,
    budget: usize,
    chi: usize,
    k: f64,
    run: &Run<X>,
    histogram: Option<&'static str>,
) -> Summary {
    let failures: Vec<usize> = run
        .outcomes
        .iter()
        .enumerate()
        .filter(|(_, o)| o.is_none())
        .map(|(i, _)| i)
        .collect();
    let accepted = run.outcomes.len() - failures.len();
    let accepted_trials: usize = run.outcomes.iter().flatten().map(|(_, t)| t).sum();
    Summary {
        model: kind,
        measurement,
        seed: args.seed,
        samples: args.samples,
        accepted,
        failures,
        delta: args.delta,
        budget_per_sample: budget,
        chi,
        k,
        mean_trials: (accepted > 0).then(|| accepted_trials as f64 / accepted as f64),
        acceptance_rate: accepted as f64 / run.total_trials.max(1) as f64,
        total_trials: run.total_trials,
        bin_width: args.bin_width,
        histogram,
    }
}

fn write_gaussian_samples(
    path: &Path,
    kind: &str,
    het: bool,
    modes: usize,
    run: &Run<DVector<f64>>,
) -> Result<(), CliError> {
    let mut header = vec!["sample".to_string(), "trials".to_string()];
    for k in 1..=modes {
        header.push(format!("x{k}"));
        if het {
            header.push(format!("p{k}"));
        }
    }
    let comments = if het {
        vec![
            format!("model: {kind}; measurement: heterodyne"),
            "outcomes are quadrature pairs (x_k, p_k); beta_k = (x_k + i p_k)/sqrt(2)".to_string(),
        ]
    } else {
        vec![
            format!("model: {kind}; measurement: homodyne"),
            "outcomes are x quadratures".to_string(),
        ]
    };
    let file = crate::output::sink(Some(path))?;
    let cols: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut csv = Csv::new(file, &comments, &cols).map_err(io(path))?;
    for (i, o) in run.outcomes.iter().enumerate() {
        if let Some((x, t)) = o {
            let mut row = vec![i.to_string(), t.to_string()];
            row.extend(x.iter().map(|v| num(*v)));
            csv.row(&row).map_err(io(path))?;
        }
    }
    csv.finish().map_err(io(path))
}

/// Single-mode histogram normalized as count/(total · bin area). Heterodyne
/// bins live in the β plane, homodyne bins on the x line; rows give bin
/// centres.
fn write_gaussian_histogram(
    path: &Path,
    kind: &str,
    het: bool,
    width: f64,
    run: &Run<DVector<f64>>,
) -> Result<(), CliError> {
    let dim = if het { 2 } else { 1 };
    let mut hist = Histogram::new(dim, width)?;
    for (x, _) in run.outcomes.iter().flatten() {
        if het {
            hist.add(&[x[0] * FRAC_1_SQRT_2, x[1] * FRAC_1_SQRT_2])?;
        } else {
            hist.add(&[x[0]])?;
        }
    }
    let comments = vec![
        format!("model: {kind}; bin width {}", num(width)),
        if het {
            "bins in the beta plane; density = count/(total * bin area) with respect to d(Re beta) d(Im beta)".to_string()
        } else {
            "density = count/(total * bin width) with respect to dx".to_string()
        },
    ];
    let cols: &[&str] = if het {
        &["re_beta", "im_beta", "count", "density"]
    } else {
        &["x", "count", "density"]
    };
    let file = crate::output::sink(Some(path))?;
    let mut csv = Csv::new(file, &comments, cols).map_err(io(path))?;
    for (bin, count) in hist.bins() {
        let mut row: Vec<String> = hist
            .bin_origin(bin)
            .iter()
            .map(|o| num(o + width / 2.0))
            .collect();
        row.push(count.to_string());
        row.push(num(hist.density(bin)));
        csv.row(&row).map_err(io(path))?;
    }
    csv.finish().map_err(io(path))
}

fn write_finite(
    samples: &Path,
    histogram: &Path,
    outcomes: usize,
    run: &Run<usize>,
) -> Result<(), CliError> {
    let file = crate::output::sink(Some(samples))?;
    let comments = ["model: finite; outcomes are POVM effect indices".to_string()];
    let mut csv =
        Csv::new(file, &comments, &["sample", "trials", "outcome"]).map_err(io(samples))?;
    let mut counts = BTreeMap::new();
    for (i, o) in run.outcomes.iter().enumerate() {
        if let Some((k, t)) = o {
            csv.row(&[i.to_string(), t.to_string(), k.to_string()])
                .map_err(io(samples))?;
            *counts.entry(*k).or_insert(0u64) += 1;
        }
    }
    csv.finish().map_err(io(samples))?;
    let total: u64 = counts.values().sum();
    let file = crate::output::sink(Some(histogram))?;
    let comments = ["model: finite; frequency = count/total".to_string()];
    let mut csv =
        Csv::new(file, &comments, &["outcome", "count", "frequency"]).map_err(io(histogram))?;
    for k in 0..outcomes {
        let c = counts.get(&k).copied().unwrap_or(0);
        let f = if total > 0 {
            c as f64 / total as f64
        } else {
            0.0
        };
        csv.row(&[k.to_string(), c.to_string(), num(f)])
            .map_err(io(histogram))?;
    }
    csv.finish().map_err(io(histogram))
}
