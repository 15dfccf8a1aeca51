use std::f64::consts::SQRT_2;

use supersample::gaussian::Measurement;
use supersample::povm::born_distribution;

use crate::error::{io, CliError};
use crate::model::{self, Model};
use crate::output::{num, sink, Csv};
use crate::{usage, DensityArgs};

pub fn run(args: &DensityArgs) -> Result<(), CliError> {
    let model = model::load(&args.model)?;
    let target = args.out.clone().unwrap_or_else(|| "<stdout>".into());
    let out = sink(args.out.as_deref())?;
    match &model {
        Model::Gaussian {
            kind,
            sup,
            default_measurement,
        } => {
            let meas: Measurement = args
                .measurement
                .map(Into::into)
                .unwrap_or_else(|| default_measurement.clone());
            if sup.modes() != 1 {
                return Err(usage(
                    "density grids are available for single-mode models only",
                ));
            }
            let grid = args
                .grid
                .ok_or_else(|| usage("--grid MIN:MAX:STEP is required for Gaussian models"))?;
            let pts = grid.points();
            match meas {
                Measurement::Homodyne => {
                    let comments = [
                        format!("model: {kind}; measurement: homodyne"),
                        "density with respect to dx".into(),
                    ];
                    let mut csv =
                        Csv::new(out, &comments, &["x", "density"]).map_err(io(&target))?;
                    for &x in &pts {
                        let f = sup.superposition_density(&meas, &[x])?;
                        csv.row(&[num(x), num(f)]).map_err(io(&target))?;
                    }
                    csv.finish().map_err(io(&target))?;
                }
                _ => {
                    let comments = [
                        format!("model: {kind}; measurement: heterodyne"),
                        "beta = (x + i p)/sqrt(2); density with respect to d(Re beta) d(Im beta)"
                            .into(),
                    ];
                    let mut csv = Csv::new(out, &comments, &["re_beta", "im_beta", "density"])
                        .map_err(io(&target))?;
                    for &a in &pts {
                        for &b in &pts {
                            let f = sup.superposition_density(&meas, &[a * SQRT_2, b * SQRT_2])?;
                            csv.row(&[num(a), num(b), num(f)]).map_err(io(&target))?;
                        }
                    }
                    csv.finish().map_err(io(&target))?;
                }
            }
        }
        Model::Finite { sup, povm, report } => {
            if args.measurement.is_some() || args.grid.is_some() {
                return Err(usage(
                    "finite models carry their own POVM; drop --measurement and --grid",
                ));
            }
            model::require_valid(report)?;
            let probs = born_distribution(sup.state(), povm)?;
            let comments = ["model: finite; Born probabilities of the POVM outcomes".to_string()];
            let mut csv =
                Csv::new(out, &comments, &["outcome", "probability"]).map_err(io(&target))?;
            for (k, p) in probs.iter().enumerate() {
                csv.row(&[k.to_string(), num(*p)]).map_err(io(&target))?;
            }
            csv.finish().map_err(io(&target))?;
        }
    }
    Ok(())
}
