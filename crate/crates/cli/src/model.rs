//! JSON model documents.

use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use supersample::gaussian::{
    cat_state, gkp_state, GaussianPureState, GaussianSuperposition, GkpParams, Measurement,
};
use supersample::povm::{FinitePovm, FiniteSuperposition, PovmReport};

use crate::error::CliError;

/// A complex number written as `[re, im]` or as a bare real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "CplxRepr", into = "CplxRepr")]
pub struct Cplx(pub Complex64);

#[derive(Serialize, Deserialize)]
#[serde(untagged, expecting = "a complex number [re, im] or a real number")]
enum CplxRepr {
    Pair(f64, f64),
    Real(f64),
}

impl From<CplxRepr> for Cplx {
    fn from(r: CplxRepr) -> Self {
        match r {
            CplxRepr::Pair(re, im) => Cplx(Complex64::new(re, im)),
            CplxRepr::Real(re) => Cplx(Complex64::new(re, 0.0)),
        }
    }
}

impl From<Cplx> for CplxRepr {
    fn from(c: Cplx) -> Self {
        CplxRepr::Pair(c.0.re, c.0.im)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub c: Cplx,
    pub gamma: Vec<Vec<f64>>,
    pub d: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatSpec {
    #[serde(rename = "type")]
    pub kind: String,
    pub alpha: Cplx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GkpSpec {
    #[serde(rename = "type")]
    pub kind: String,
    pub kappa: f64,
    pub delta: f64,
    pub zmax: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSpec {
    #[serde(rename = "type")]
    pub kind: String,
    pub modes: usize,
    pub components: Vec<ComponentSpec>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub normalize: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiniteSpec {
    #[serde(rename = "type")]
    pub kind: String,
    pub dim: usize,
    pub components: Vec<Vec<Cplx>>,
    pub coeffs: Vec<Cplx>,
    pub povm: Vec<Vec<Vec<Cplx>>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub normalize: bool,
}

/// A model document. Each variant carries its own `"type"` field.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ModelSpec {
    Cat(CatSpec),
    Gkp(GkpSpec),
    GaussianSuperposition(GaussianSpec),
    Finite(FiniteSpec),
}

#[derive(Deserialize)]
struct Tag {
    #[serde(rename = "type")]
    kind: String,
}

/// A validated model.
pub enum Model {
    Gaussian {
        kind: &'static str,
        sup: GaussianSuperposition,
        default_measurement: Measurement,
    },
    /// The POVM is kept even when invalid so that `verify` can report on it.
    Finite {
        sup: FiniteSuperposition,
        povm: FinitePovm,
        report: PovmReport,
    },
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Gaussian { kind, sup, .. } => write!(f, "{kind} (χ = {})", sup.chi()),
            Model::Finite { sup, povm, .. } => {
                write!(
                    f,
                    "finite (D = {}, χ = {}, {} effects)",
                    sup.dim(),
                    sup.chi(),
                    povm.len()
                )
            }
        }
    }
}

/// Rejects a POVM that fails positivity, hermiticity or completeness.
pub fn require_valid(report: &PovmReport) -> Result<(), CliError> {
    if report.is_valid() {
        return Ok(());
    }
    Err(model_err(
        "povm",
        format!(
            "not a POVM (min eigenvalue {:e}, hermiticity defect {:e}, completeness defect {:e}); run `verify --model` for a report",
            report.min_eigenvalue, report.hermiticity_defect, report.completeness_defect
        ),
    ))
}

fn field(path: impl Into<String>) -> impl FnOnce(supersample::Error) -> CliError {
    let path = path.into();
    move |e| CliError::Model {
        path,
        message: e.to_string(),
    }
}

fn model_err(path: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Model {
        path: path.into(),
        message: message.into(),
    }
}

/// Reads and validates a model file.
pub fn load(path: &Path) -> Result<Model, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.into(),
        source: e,
    })?;
    let spec = parse(&text).map_err(|e| match e {
        CliError::Json {
            path: field,
            line,
            column,
            message,
            ..
        } => CliError::Json {
            file: path.display().to_string(),
            path: field,
            line,
            column,
            message,
        },
        CliError::Model {
            path: field,
            message,
        } => CliError::Model {
            path: format!("{}: {field}", path.display()),
            message,
        },
        other => other,
    })?;
    Ok(spec)
}

/// Parses a model document. Errors name the JSON line and column, or the
/// offending field.
pub fn parse(text: &str) -> Result<Model, CliError> {
    build(&parse_spec(text)?)
}

/// Reads the `"type"` tag first, then the matching document, so that errors
/// keep their JSON position.
pub fn parse_spec(text: &str) -> Result<ModelSpec, CliError> {
    let tag: Tag = located(text)?;
    Ok(match tag.kind.as_str() {
        "cat" => ModelSpec::Cat(located(text)?),
        "gkp" => ModelSpec::Gkp(located(text)?),
        "gaussian_superposition" => ModelSpec::GaussianSuperposition(located(text)?),
        "finite" => ModelSpec::Finite(located(text)?),
        other => return Err(model_err(
            "type",
            format!(
                "unknown model type `{other}`; expected cat, gkp, gaussian_superposition or finite"
            ),
        )),
    })
}

fn located<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.inner();
        CliError::Json {
            file: String::new(),
            path: e.path().to_string(),
            line: inner.line(),
            column: inner.column(),
            message: strip_location(&inner.to_string()),
        }
    })
}

fn strip_location(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

pub fn build(spec: &ModelSpec) -> Result<Model, CliError> {
    match spec {
        ModelSpec::Cat(CatSpec { alpha, .. }) => Ok(Model::Gaussian {
            kind: "cat",
            sup: cat_state(alpha.0).map_err(field("alpha"))?,
            default_measurement: Measurement::Heterodyne,
        }),
        ModelSpec::Gkp(GkpSpec {
            kappa,
            delta,
            zmax,
            tail_tol,
            ..
        }) => {
            let mut params = GkpParams::new(*kappa, *delta, *zmax);
            if let Some(t) = tail_tol {
                params = params.with_tail_tolerance(*t);
            }
            let sup = gkp_state(&params).map_err(|e| match e {
                supersample::Error::TailMass { .. } => model_err("zmax", e.to_string()),
                e => model_err("kappa/delta", e.to_string()),
            })?;
            Ok(Model::Gaussian {
                kind: "gkp",
                sup,
                default_measurement: Measurement::Homodyne,
            })
        }
        ModelSpec::GaussianSuperposition(GaussianSpec {
            modes,
            components,
            normalize,
            ..
        }) => {
            if components.is_empty() {
                return Err(model_err(
                    "components",
                    "at least one component is required",
                ));
            }
            let n = 2 * modes;
            let mut states = Vec::with_capacity(components.len());
            let mut coeffs = Vec::with_capacity(components.len());
            for (i, comp) in components.iter().enumerate() {
                if comp.gamma.len() != n || comp.gamma.iter().any(|row| row.len() != n) {
                    return Err(model_err(
                        format!("components[{i}].gamma"),
                        format!("expected a {n}×{n} matrix"),
                    ));
                }
                if comp.d.len() != n {
                    return Err(model_err(
                        format!("components[{i}].d"),
                        format!("expected {n} entries"),
                    ));
                }
                let gamma = DMatrix::from_fn(n, n, |r, c| comp.gamma[r][c]);
                let state = GaussianPureState::new(gamma, DVector::from_column_slice(&comp.d))
                    .map_err(field(format!("components[{i}]")))?;
                states.push(state);
                coeffs.push(comp.c.0);
            }
            let sup = if *normalize {
                GaussianSuperposition::normalized(states, coeffs)
            } else {
                GaussianSuperposition::new(states, coeffs)
            }
            .map_err(field("components"))?;
            Ok(Model::Gaussian {
                kind: "gaussian_superposition",
                sup,
                default_measurement: Measurement::Heterodyne,
            })
        }
        ModelSpec::Finite(FiniteSpec {
            dim,
            components,
            coeffs,
            povm,
            normalize,
            ..
        }) => {
            let dim = *dim;
            if components.len() != coeffs.len() {
                return Err(model_err(
                    "coeffs",
                    format!(
                        "{} coefficients for {} components",
                        coeffs.len(),
                        components.len()
                    ),
                ));
            }
            let mut vecs = Vec::with_capacity(components.len());
            for (i, v) in components.iter().enumerate() {
                if v.len() != dim {
                    return Err(model_err(
                        format!("components[{i}]"),
                        format!("expected {dim} entries"),
                    ));
                }
                vecs.push(DVector::from_iterator(dim, v.iter().map(|c| c.0)));
            }
            let mut effects = Vec::with_capacity(povm.len());
            for (k, e) in povm.iter().enumerate() {
                if e.len() != dim || e.iter().any(|row| row.len() != dim) {
                    return Err(model_err(
                        format!("povm[{k}]"),
                        format!("expected a {dim}×{dim} matrix"),
                    ));
                }
                effects.push(DMatrix::from_fn(dim, dim, |r, c| e[r][c].0));
            }
            let weights: Vec<Complex64> = coeffs.iter().map(|c| c.0).collect();
            let sup = if *normalize {
                FiniteSuperposition::normalized(vecs, weights)
            } else {
                FiniteSuperposition::new(vecs, weights)
            }
            .map_err(field("components"))?;
            let povm = FinitePovm::unchecked(effects).map_err(field("povm"))?;
            let report = povm.report();
            Ok(Model::Finite { sup, povm, report })
        }
    }
}

/// Writes a Gaussian superposition back out as a model document.
pub fn gaussian_spec(sup: &GaussianSuperposition) -> ModelSpec {
    let components = sup
        .components()
        .iter()
        .zip(sup.coeffs())
        .map(|(s, c)| {
            let g = s.gamma();
            ComponentSpec {
                c: Cplx(*c),
                gamma: (0..g.nrows())
                    .map(|r| (0..g.ncols()).map(|k| g[(r, k)]).collect())
                    .collect(),
                d: s.disp().iter().copied().collect(),
            }
        })
        .collect();
    ModelSpec::GaussianSuperposition(GaussianSpec {
        kind: "gaussian_superposition".into(),
        modes: sup.modes(),
        components,
        normalize: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cat_document() {
        let m = parse(r#"{"type": "cat", "alpha": [1, 1]}"#).unwrap();
        assert!(matches!(m, Model::Gaussian { kind: "cat", .. }));
    }

    #[test]
    fn real_shorthand() {
        let m = parse(r#"{"type": "cat", "alpha": 1.5}"#).unwrap();
        let Model::Gaussian { sup, .. } = m else {
            panic!()
        };
        assert_eq!(sup.chi(), 2);
    }

    #[test]
    fn json_errors_carry_line_and_field() {
        let text =
            "{\n  \"type\": \"gkp\",\n  \"kappa\": 0.6,\n  \"delta\": \"wide\",\n  \"zmax\": 7\n}";
        let err = parse(text).unwrap_err();
        let CliError::Json { path, line, .. } = &err else {
            panic!("{err}")
        };
        assert_eq!(path, "delta");
        assert_eq!(*line, 4);
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(parse(r#"{"type": "cat", "alpha": [1, 0], "beta": 2}"#).is_err());
        assert!(parse(r#"{"type": "torus"}"#).is_err());
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let text = r#"{"type": "gaussian_superposition", "modes": 1,
            "components": [{"c": [1, 0], "gamma": [[2, 0], [0, 2]], "d": [0, 0]}]}"#;
        let err = parse(text).unwrap_err();
        let CliError::Model { path, .. } = &err else {
            panic!("{err}")
        };
        assert_eq!(path, "components[0]");
    }

    #[test]
    fn gkp_tail_guard() {
        let strict = r#"{"type": "gkp", "kappa": 0.6, "delta": 0.3, "zmax": 7}"#;
        let CliError::Model { path, .. } = parse(strict).unwrap_err() else {
            panic!()
        };
        assert_eq!(path, "zmax");
        let loose = r#"{"type": "gkp", "kappa": 0.6, "delta": 0.3, "zmax": 7, "tail_tol": 1e-5}"#;
        assert!(parse(loose).is_ok());
    }

    #[test]
    fn gaussian_round_trip() {
        let Model::Gaussian { sup, .. } = parse(r#"{"type": "cat", "alpha": [0.5, -1]}"#).unwrap()
        else {
            panic!()
        };
        let text = serde_json::to_string(&gaussian_spec(&sup)).unwrap();
        let Model::Gaussian { sup: back, .. } = parse(&text).unwrap() else {
            panic!()
        };
        assert_eq!(back.chi(), 2);
        assert_eq!(back.coeffs(), sup.coeffs());
    }

    #[test]
    fn finite_document_with_faulty_povm_still_loads() {
        let text = r#"{"type": "finite", "dim": 2,
            "components": [[1, 0], [0, 1]], "coeffs": [0.6, 0.8],
            "povm": [[[1, 0], [0, 0]], [[0, 0], [0, 0.5]]]}"#;
        let Model::Finite { report, .. } = parse(text).unwrap() else {
            panic!()
        };
        assert!((report.completeness_defect - 0.5).abs() < 1e-12);
    }
}
