use serde::Serialize;
use supersample::rng;
use supersample::sparsify::{l1_sq, sparsify_verified};

use crate::error::CliError;
use crate::model::{self, gaussian_spec, Model, ModelSpec};
use crate::output::write_json;
use crate::{usage, SparsifyArgs};

#[derive(Serialize)]
struct Report {
    source: &'static str,
    source_chi: usize,
    /// `‖c‖₁²` of the source decomposition.
    l1_sq: f64,
    epsilon: f64,
    seed: u64,
    chi: usize,
    attempts: usize,
    distance: f64,
    coeff_norm: f64,
    #[serde(rename = "K")]
    k: f64,
    model: ModelSpec,
}

pub fn run(args: &SparsifyArgs) -> Result<(), CliError> {
    if !(args.epsilon > 0.0 && args.epsilon < 0.5) {
        return Err(usage(format!("--epsilon {} not in (0, 1/2)", args.epsilon)));
    }
    let Model::Gaussian { kind, sup, .. } = model::load(&args.model)? else {
        return Err(usage(
            "sparsify needs a Gaussian decomposition (cat, gkp or gaussian_superposition)",
        ));
    };
    let mut r = rng::root(args.seed);
    let s = sparsify_verified(&sup, args.epsilon, &mut r)?;
    let spec = gaussian_spec(s.result());
    if let Some(out) = &args.out {
        write_json(Some(out), &spec)?;
    }
    let report = Report {
        source: kind,
        source_chi: sup.chi(),
        l1_sq: l1_sq(&sup),
        epsilon: args.epsilon,
        seed: args.seed,
        chi: s.chi,
        attempts: s.attempts,
        distance: s.distance(),
        coeff_norm: s.coeff_norm(),
        k: s.result().k_factor(),
        model: spec,
    };
    write_json(None, &report)
}
