//! Manifest ingestion. A manifest is one hand-editable JSON document naming
//! a chart, its metric, and the optional structure / physics / soliton
//! blocks, plus run options. Symmetric tensors travel as lower-triangle
//! component maps keyed like "g21"; expressions are strings in the chart's
//! coordinates.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_rational::BigRational;
use serde::Deserialize;
use thiserror::Error;

use crate::derived::PhysicsConfig;
use crate::expr::{self, Expr, ParseError};
use crate::sample::{EvalMode, SamplePlan};
use crate::soliton::RBSolitonConfig;
use crate::structure::{GeneratorInput, MsqeStructure};
use crate::tensor::{ChartManifold, Convention, CurvatureSign, CurvatureBundle, TensorField};

pub const SCHEMA_TAG: &str = "curvlab.manifest/v1";
/// Sample-plan size for pipeline runs.
pub const PIPELINE_POINTS: usize = 20;

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("bad expression at {field}: {source}")]
    Expression {
        field: String,
        #[source]
        source: ParseError,
    },
    #[error("invalid manifest at {field}: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ManifestError {
    ManifestError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldManifest {
    #[serde(rename = "$schema", default)]
    pub schema: Option<String>,
    pub name: String,
    pub dimension: usize,
    pub coordinates: Vec<String>,
    pub metric: BTreeMap<String, String>,
    #[serde(default)]
    pub structure: Option<StructureBlock>,
    #[serde(default)]
    pub physics: Option<PhysicsBlock>,
    #[serde(default)]
    pub soliton: Option<SolitonBlock>,
    #[serde(default)]
    pub options: OptionsBlock,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureBlock {
    #[serde(default)]
    pub xi1: Option<Vec<String>>,
    #[serde(default)]
    pub a: Option<Vec<String>>,
    #[serde(default)]
    pub xi2: Option<Vec<String>>,
    #[serde(default)]
    pub b: Option<Vec<String>>,
    pub d: BTreeMap<String, String>,
    #[serde(default)]
    pub psi1: Option<String>,
    #[serde(default)]
    pub psi2: Option<String>,
    #[serde(default)]
    pub psi3: Option<String>,
    #[serde(default)]
    pub psi4: Option<String>,
    #[serde(default)]
    pub psi5: Option<String>,
    #[serde(default = "plus_one")]
    pub eps1: i8,
    #[serde(default = "plus_one")]
    pub eps2: i8,
}

fn plus_one() -> i8 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsBlock {
    pub kappa: String,
    pub sigma: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonBlock {
    pub u: Vec<String>,
    pub rho: String,
    #[serde(default)]
    pub lambda: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConventionChoice {
    Negative,
    Positive,
}

impl ConventionChoice {
    pub fn label(self) -> &'static str {
        match self {
            ConventionChoice::Negative => "negative",
            ConventionChoice::Positive => "positive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeChoice {
    Rational,
    Float,
}

impl ModeChoice {
    pub fn label(self) -> &'static str {
        match self {
            ModeChoice::Rational => "rational",
            ModeChoice::Float => "float",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptionsBlock {
    pub convention: ConventionChoice,
    pub mode: ModeChoice,
    /// Sample box `[lo, hi]` in every coordinate, as rational strings.
    #[serde(rename = "box")]
    pub sample_box: [String; 2],
    pub seed: u64,
}

impl Default for OptionsBlock {
    fn default() -> Self {
        OptionsBlock {
            convention: ConventionChoice::Negative,
            mode: ModeChoice::Rational,
            sample_box: ["1/2".to_string(), "3".to_string()],
            seed: 0,
        }
    }
}

/// Manifest content shipped in the binary, addressable by bare name.
pub fn bundled_manifest(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".json").unwrap_or(name);
    match stem {
        "msqe_example" => Some(include_str!("../../manifests/msqe_example.json")),
        "minkowski4" => Some(include_str!("../../manifests/minkowski4.json")),
        "polar_plane" => Some(include_str!("../../manifests/polar_plane.json")),
        _ => None,
    }
}

pub fn bundled_manifest_names() -> &'static [&'static str] {
    &["msqe_example", "minkowski4", "polar_plane"]
}

/// Parse and validate a manifest from JSON text. Validation resolves every
/// expression once, so a manifest returned here is known good.
pub fn parse_manifest(text: &str) -> Result<ManifoldManifest, ManifestError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let manifest: ManifoldManifest =
        serde_path_to_error::deserialize(&mut de).map_err(|e| ManifestError::Schema {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
    if let Some(tag) = &manifest.schema {
        if tag != SCHEMA_TAG {
            return Err(invalid(
                "$schema",
                format!("expected \"{SCHEMA_TAG}\", got \"{tag}\""),
            ));
        }
    }
    manifest.resolve()?;
    Ok(manifest)
}

pub fn load_manifest(path: &Path) -> Result<ManifoldManifest, ManifestError> {
    let text = fs::read_to_string(path).map_err(|source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_manifest(&text)
}

/// Engine-ready form of a manifest.
pub struct ResolvedManifest {
    pub name: String,
    pub bundle: CurvatureBundle,
    pub structure: Option<MsqeStructure>,
    pub physics: Option<PhysicsConfig>,
    pub soliton: Option<RBSolitonConfig>,
    pub plan: SamplePlan,
    pub convention: ConventionChoice,
    pub mode: ModeChoice,
    pub seed: u64,
}

impl ManifoldManifest {
    pub fn resolve(&self) -> Result<ResolvedManifest, ManifestError> {
        let n = self.dimension;
        if n == 0 {
            return Err(invalid("dimension", "dimension must be positive"));
        }
        if n > 9 {
            return Err(invalid(
                "dimension",
                "component keys like \"g21\" are single-digit; at most nine coordinates",
            ));
        }
        if self.coordinates.len() != n {
            return Err(invalid(
                "coordinates",
                format!("{} names for dimension {n}", self.coordinates.len()),
            ));
        }
        let m = ChartManifold::new(self.coordinates.clone())
            .map_err(|e| invalid("coordinates", e.to_string()))?;

        let g = symmetric_from_triangle(&m, n, &self.metric, "metric", 'g')?;
        let convention = match self.options.convention {
            ConventionChoice::Negative => Convention::default(),
            ConventionChoice::Positive => Convention {
                curvature_sign: CurvatureSign::Positive,
                ..Convention::default()
            },
        };
        let bundle = CurvatureBundle::new(g, convention)
            .map_err(|e| invalid("metric", e.to_string()))?;

        let structure = match &self.structure {
            Some(block) => Some(resolve_structure(&bundle, &m, n, block)?),
            None => None,
        };

        let physics = match &self.physics {
            Some(block) => {
                let kappa = parse_field(&m, &block.kappa, "physics.kappa")?;
                let sigma = parse_field(&m, &block.sigma, "physics.sigma")?;
                Some(
                    PhysicsConfig::new(kappa, sigma)
                        .map_err(|e| invalid("physics.kappa", e.to_string()))?,
                )
            }
            None => None,
        };

        let soliton = match &self.soliton {
            Some(block) => {
                if block.u.len() != n {
                    return Err(invalid(
                        "soliton.u",
                        format!("{} components for dimension {n}", block.u.len()),
                    ));
                }
                let u = block
                    .u
                    .iter()
                    .enumerate()
                    .map(|(i, src)| parse_field(&m, src, &format!("soliton.u[{i}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let rho = rational_field(&m, &block.rho, "soliton.rho")?;
                let lambda = block
                    .lambda
                    .as_ref()
                    .map(|src| rational_field(&m, src, "soliton.lambda"))
                    .transpose()?;
                Some(RBSolitonConfig { u, rho, lambda })
            }
            None => None,
        };

        let lo = rational_field(&m, &self.options.sample_box[0], "options.box[0]")?;
        let hi = rational_field(&m, &self.options.sample_box[1], "options.box[1]")?;
        if lo >= hi {
            return Err(invalid("options.box", "lower bound must be below upper"));
        }
        let mode = match self.options.mode {
            ModeChoice::Rational => EvalMode::Rational,
            ModeChoice::Float => EvalMode::Float,
        };
        let plan = SamplePlan::new(n, PIPELINE_POINTS, self.options.seed, &lo, &hi, mode);

        Ok(ResolvedManifest {
            name: self.name.clone(),
            bundle,
            structure,
            physics,
            soliton,
            plan,
            convention: self.options.convention,
            mode: self.options.mode,
            seed: self.options.seed,
        })
    }
}

fn parse_field(
    m: &std::sync::Arc<ChartManifold>,
    src: &str,
    field: &str,
) -> Result<Expr, ManifestError> {
    m.parse(src).map_err(|source| ManifestError::Expression {
        field: field.to_string(),
        source,
    })
}

fn rational_field(
    m: &std::sync::Arc<ChartManifold>,
    src: &str,
    field: &str,
) -> Result<BigRational, ManifestError> {
    let e = parse_field(m, src, field)?;
    expr::constant_value(&e).ok_or_else(|| invalid(field, "must be a rational constant"))
}

/// Read a symmetric (0,2) tensor from a lower-triangle component map with
/// keys like "g21" (row then column, 1-based, row >= column). The triangle
/// must be complete: a forgotten component is an error, not a zero.
fn symmetric_from_triangle(
    m: &std::sync::Arc<ChartManifold>,
    n: usize,
    map: &BTreeMap<String, String>,
    block: &str,
    letter: char,
) -> Result<TensorField, ManifestError> {
    for key in map.keys() {
        let field = format!("{block}.{key}");
        let digits: Vec<u32> = key
            .strip_prefix(letter)
            .map(|rest| rest.chars().filter_map(|c| c.to_digit(10)).collect())
            .unwrap_or_default();
        match digits.as_slice() {
            [i, j] if key.len() == 3 => {
                let (i, j) = (*i as usize, *j as usize);
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(invalid(&field, format!("indices out of range for dimension {n}")));
                }
                if i < j {
                    return Err(invalid(
                        &field,
                        format!("upper-triangle key; the symmetric entry is {letter}{j}{i}"),
                    ));
                }
            }
            _ => {
                return Err(invalid(
                    &field,
                    format!("keys look like {letter}21 (row then column, 1-based)"),
                ))
            }
        }
    }
    let mut out = TensorField::zeros(m, 0, 2);
    for i in 1..=n {
        for j in 1..=i {
            let key = format!("{letter}{i}{j}");
            let src = map.get(&key).ok_or_else(|| {
                invalid(&format!("{block}.{key}"), "missing lower-triangle component")
            })?;
            let e = parse_field(m, src, &format!("{block}.{key}"))?;
            out.set(&[i - 1, j - 1], e.clone());
            out.set(&[j - 1, i - 1], e);
        }
    }
    Ok(out)
}

fn resolve_structure(
    bundle: &CurvatureBundle,
    m: &std::sync::Arc<ChartManifold>,
    n: usize,
    block: &StructureBlock,
) -> Result<MsqeStructure, ManifestError> {
    let parse_list = |src: &Option<Vec<String>>, field: &str| -> Result<Option<Vec<Expr>>, ManifestError> {
        match src {
            None => Ok(None),
            Some(items) => {
                if items.len() != n {
                    return Err(invalid(
                        &format!("structure.{field}"),
                        format!("{} components for dimension {n}", items.len()),
                    ));
                }
                items
                    .iter()
                    .enumerate()
                    .map(|(i, s)| parse_field(m, s, &format!("structure.{field}[{i}]")))
                    .collect::<Result<Vec<_>, _>>()
                    .map(Some)
            }
        }
    };
    let generator = |vector: Option<Vec<Expr>>,
                     form: Option<Vec<Expr>>,
                     field: &str|
     -> Result<GeneratorInput, ManifestError> {
        match (vector, form) {
            (Some(v), Some(f)) => Ok(GeneratorInput::both(v, f)),
            (Some(v), None) => Ok(GeneratorInput::vector(v)),
            (None, Some(f)) => Ok(GeneratorInput::one_form(f)),
            (None, None) => Err(invalid(
                &format!("structure.{field}"),
                "a generator needs a vector field, a one-form, or both",
            )),
        }
    };
    let g1 = generator(
        parse_list(&block.xi1, "xi1")?,
        parse_list(&block.a, "a")?,
        "xi1",
    )?;
    let g2 = generator(
        parse_list(&block.xi2, "xi2")?,
        parse_list(&block.b, "b")?,
        "xi2",
    )?;
    let d = symmetric_from_triangle(m, n, &block.d, "structure.d", 'd')?;

    let psi_sources = [
        ("psi1", &block.psi1),
        ("psi2", &block.psi2),
        ("psi3", &block.psi3),
        ("psi4", &block.psi4),
        ("psi5", &block.psi5),
    ];
    let supplied = psi_sources.iter().filter(|(_, s)| s.is_some()).count();
    let psis = match supplied {
        0 => None,
        5 => {
            let mut parsed = Vec::with_capacity(5);
            for (name, src) in &psi_sources {
                parsed.push(parse_field(
                    m,
                    src.as_ref().unwrap(),
                    &format!("structure.{name}"),
                )?);
            }
            Some([
                parsed[0].clone(),
                parsed[1].clone(),
                parsed[2].clone(),
                parsed[3].clone(),
                parsed[4].clone(),
            ])
        }
        _ => {
            return Err(invalid(
                "structure.psi1",
                "coefficient functions come as all five or none",
            ))
        }
    };

    MsqeStructure::resolve(bundle, g1, g2, d, psis, block.eps1, block.eps2)
        .map_err(|e| invalid("structure", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_manifests_parse_and_resolve() {
        for name in bundled_manifest_names() {
            let text = bundled_manifest(name).unwrap();
            let manifest = parse_manifest(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            manifest.resolve().unwrap();
        }
        assert!(bundled_manifest("msqe_example.json").is_some());
        assert!(bundled_manifest("no_such").is_none());
    }

    #[test]
    fn the_bench_manifest_carries_its_structure() {
        let manifest = parse_manifest(bundled_manifest("msqe_example").unwrap()).unwrap();
        assert_eq!(manifest.dimension, 4);
        let resolved = manifest.resolve().unwrap();
        let s = resolved.structure.expect("structure block");
        assert_eq!((s.eps1(), s.eps2()), (-1, 1));
        assert!(s.psis().is_some());
        assert!(resolved.physics.is_some());
        assert!(resolved.soliton.is_some());
        assert_eq!(resolved.plan.points.len(), PIPELINE_POINTS);
    }

    fn minimal(metric_g22: &str) -> String {
        format!(
            r#"{{
              "name": "t",
              "dimension": 2,
              "coordinates": ["x1", "x2"],
              "metric": {{ "g11": "1", "g21": "0", "g22": "{metric_g22}" }}
            }}"#
        )
    }

    #[test]
    fn unknown_symbols_report_the_field() {
        let err = parse_manifest(&minimal("2*(x9)^2")).unwrap_err();
        match err {
            ManifestError::Expression { field, source } => {
                assert_eq!(field, "metric.g22");
                assert!(source.to_string().contains("x9"), "{source}");
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn triangle_violations_are_named() {
        let missing = r#"{
          "name": "t", "dimension": 2, "coordinates": ["x1", "x2"],
          "metric": { "g11": "1", "g22": "1" }
        }"#;
        let err = parse_manifest(missing).unwrap_err();
        assert!(err.to_string().contains("metric.g21"), "{err}");

        let upper = r#"{
          "name": "t", "dimension": 2, "coordinates": ["x1", "x2"],
          "metric": { "g11": "1", "g12": "0", "g21": "0", "g22": "1" }
        }"#;
        let err = parse_manifest(upper).unwrap_err();
        assert!(err.to_string().contains("g21"), "{err}");
    }

    #[test]
    fn schema_violations_carry_a_path() {
        let err = parse_manifest(r#"{ "name": "t", "dimension": "four" }"#).unwrap_err();
        match err {
            ManifestError::Schema { path, .. } => assert_eq!(path, "dimension"),
            other => panic!("wrong error: {other}"),
        }

        let unknown_field = r#"{
          "name": "t", "dimension": 2, "coordinates": ["x1", "x2"],
          "metric": { "g11": "1", "g21": "0", "g22": "1" },
          "metrics": {}
        }"#;
        assert!(matches!(
            parse_manifest(unknown_field).unwrap_err(),
            ManifestError::Schema { .. }
        ));
    }

    #[test]
    fn singular_metrics_are_rejected_as_validation_errors() {
        let err = parse_manifest(&minimal("0")).unwrap_err();
        match err {
            ManifestError::Validation { field, message } => {
                assert_eq!(field, "metric");
                assert!(message.contains("singular"), "{message}");
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn defaults_fill_the_options_block() {
        let manifest = parse_manifest(&minimal("1")).unwrap();
        assert_eq!(manifest.options.convention, ConventionChoice::Negative);
        assert_eq!(manifest.options.mode, ModeChoice::Rational);
        assert_eq!(manifest.options.seed, 0);
        let resolved = manifest.resolve().unwrap();
        assert!(resolved.structure.is_none());
        assert!(resolved.physics.is_none());
    }
}
