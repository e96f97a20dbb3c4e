//! JSON model files.
//!
//! ```json
//! {
//!   "dimension": 1,
//!   "states": {"kind": "interval", "N": 3},
//!   "channels": [
//!     {"jump": [-1], "intensity": {"linear": [2], "offset": 0}},
//!     {"jump": [1], "intensity": {"linear": [-1], "offset": 3}}
//!   ]
//! }
//! ```
//!
//! `states` is either an explicit list of points or a generator
//! (`{"kind": "interval", "N": n}` or `{"kind": "simplex", "N": n}`).
//! Rationals are integers or `"p/q"` strings. An optional `drift` holds
//! `{"matrix": [[…]], "offset": […]}`. Unknown keys are rejected. Written files
//! always list states explicitly.
//!
//! Hybrid files wrap a one-dimensional model:
//! `{"layer_model": {…}, "z_drift": [b0, b1, b2], "z_jumps": [{"kind": "uniform", "max": 1}], "z_bounds": {"lower": [0, 0], "upper": [3, -1]}}`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_path_to_error::Segment;

use crate::model::{AffineFunctional, AffineMap, AffineModel, JumpChannel, ModelError, Point, StateSpace};
use crate::rational::{serde_rational, serde_rational_matrix, serde_rational_vec, Rational};
use crate::simulate::{HybridModel, SimulateError, ZBounds, ZJumpLaw};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IoError {
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error("JSON syntax error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Hybrid(#[from] SimulateError),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub dimension: usize,
    pub states: StatesDoc,
    pub channels: Vec<ChannelDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<DriftDoc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StatesDoc {
    Explicit(Vec<Point>),
    Generator(GeneratorDoc),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GeneratorDoc {
    Interval {
        #[serde(rename = "N")]
        n: u32,
    },
    Simplex {
        #[serde(rename = "N")]
        n: u32,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDoc {
    pub jump: Point,
    pub intensity: FunctionalDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalDoc {
    #[serde(with = "serde_rational_vec")]
    pub linear: Vec<Rational>,
    #[serde(with = "serde_rational")]
    pub offset: Rational,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftDoc {
    #[serde(with = "serde_rational_matrix")]
    pub matrix: Vec<Vec<Rational>>,
    #[serde(with = "serde_rational_vec")]
    pub offset: Vec<Rational>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridDoc {
    pub layer_model: ModelDoc,
    pub z_drift: [f64; 3],
    pub z_jumps: Vec<ZJumpLaw>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_bounds: Option<ZBounds>,
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    let mut out = String::new();
    for segment in path.iter() {
        out.push('/');
        match segment {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

fn parse_doc<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, IoError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let result: Result<T, _> = serde_path_to_error::deserialize(de);
    let doc = result.map_err(|e| {
        let pointer = pointer(e.path());
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => IoError::Schema { pointer, message: strip_position(&inner) },
            _ => IoError::Parse { line: inner.line(), column: inner.column(), message: strip_position(&inner) },
        }
    })?;
    Ok(doc)
}

fn strip_position(e: &serde_json::Error) -> String {
    let text = e.to_string();
    match text.rfind(" at line ") {
        Some(i) => text[..i].to_string(),
        None => text,
    }
}

impl ModelDoc {
    pub fn into_model(self) -> Result<AffineModel, IoError> {
        let space = match self.states {
            StatesDoc::Explicit(points) => StateSpace::new(self.dimension, points)?,
            StatesDoc::Generator(GeneratorDoc::Interval { n }) => {
                if self.dimension != 1 {
                    return Err(IoError::Schema {
                        pointer: "/states".into(),
                        message: format!("interval generator needs dimension 1, file declares {}", self.dimension),
                    });
                }
                StateSpace::interval(n)
            }
            StatesDoc::Generator(GeneratorDoc::Simplex { n }) => {
                if self.dimension == 0 {
                    return Err(IoError::Schema { pointer: "/states".into(), message: "simplex generator needs dimension ≥ 1".into() });
                }
                StateSpace::simplex(self.dimension, n)
            }
        };
        let channels = self
            .channels
            .into_iter()
            .map(|c| JumpChannel::new(c.jump, AffineFunctional::new(c.intensity.linear, c.intensity.offset)))
            .collect();
        let model = AffineModel::new(space, channels)?;
        match self.drift {
            Some(d) => Ok(model.with_drift(AffineMap::new(d.matrix, d.offset))?),
            None => Ok(model),
        }
    }

    pub fn from_model(model: &AffineModel) -> Self {
        Self {
            dimension: model.dimension(),
            states: StatesDoc::Explicit(model.space.points().to_vec()),
            channels: model
                .channels()
                .iter()
                .map(|c| ChannelDoc {
                    jump: c.jump.clone(),
                    intensity: FunctionalDoc { linear: c.intensity.linear.clone(), offset: c.intensity.offset.clone() },
                })
                .collect(),
            drift: model.drift.as_ref().map(|d| DriftDoc { matrix: d.matrix.clone(), offset: d.offset.clone() }),
        }
    }
}

pub fn parse_model(text: &str) -> Result<AffineModel, IoError> {
    parse_doc::<ModelDoc>(text)?.into_model()
}

fn read(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path)
        .map_err(|e| IoError::Read { path: path.display().to_string(), message: e.to_string() })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<AffineModel, IoError> {
    parse_model(&read(path.as_ref())?)
}

pub fn model_to_json(model: &AffineModel) -> String {
    serde_json::to_string_pretty(&ModelDoc::from_model(model)).expect("model documents serialize")
}

pub fn parse_hybrid(text: &str) -> Result<HybridModel, IoError> {
    let doc: HybridDoc = parse_doc(text)?;
    let layer = doc.layer_model.into_model()?;
    Ok(HybridModel::new(layer, doc.z_drift, doc.z_jumps, doc.z_bounds)?)
}

pub fn load_hybrid(path: impl AsRef<Path>) -> Result<HybridModel, IoError> {
    parse_hybrid(&read(path.as_ref())?)
}

pub fn hybrid_to_json(model: &HybridModel) -> String {
    let doc = HybridDoc {
        layer_model: ModelDoc::from_model(&model.layer_model),
        z_drift: model.z_drift,
        z_jumps: model.z_jumps.clone(),
        z_bounds: model.z_bounds,
    };
    serde_json::to_string_pretty(&doc).expect("hybrid documents serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{make_birth_death, make_uniform_simplex};
    use crate::rational::{int, ratio};

    #[test]
    fn interval_generator() {
        let text = r#"{"dimension": 1, "states": {"kind": "interval", "N": 3},
            "channels": [{"jump": [-1], "intensity": {"linear": [2], "offset": 0}}]}"#;
        let model = parse_model(text).unwrap();
        assert_eq!(model.space.len(), 4);
    }

    #[test]
    fn simplex_generator_counts_points() {
        let text = r#"{"dimension": 2, "states": {"kind": "simplex", "N": 3}, "channels": []}"#;
        assert_eq!(parse_model(text).unwrap().space.len(), 10);
    }

    #[test]
    fn zero_denominator_is_a_schema_error() {
        let text = r#"{"dimension": 1, "states": [[0], [1]],
            "channels": [{"jump": [-1], "intensity": {"linear": ["1/0"], "offset": 0}}]}"#;
        match parse_model(text) {
            Err(IoError::Schema { pointer, .. }) => assert_eq!(pointer, "/channels/0/intensity/linear/0"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = r#"{"dimension": 1, "states": [[0]], "channels": [], "rates": 1}"#;
        assert!(matches!(parse_model(text), Err(IoError::Schema { .. })));
    }

    #[test]
    fn syntax_error_has_position() {
        assert!(matches!(parse_model("{\"dimension\": 1,"), Err(IoError::Parse { line: 1, .. })));
    }

    #[test]
    fn round_trips() {
        for model in [
            make_birth_death(3, int(2), ratio(1, 3)).unwrap(),
            make_uniform_simplex(2, 3, ratio(5, 2)).unwrap(),
        ] {
            assert_eq!(parse_model(&model_to_json(&model)).unwrap(), model);
        }
        let hybrid = HybridModel::uniform_jump_example(3).unwrap();
        assert_eq!(parse_hybrid(&hybrid_to_json(&hybrid)).unwrap(), hybrid);
    }
}
