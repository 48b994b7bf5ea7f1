//! JSON documents for trigonometric polynomials and closed curves.
//!
//! ```json
//! {"kind":"trigpoly","a0":1.0,"cos":[0.0,0.0,0.05],"sin":[0.0,0.0,0.0]}
//! {"kind":"curve3","x":{...},"y":{...},"z":{...}}
//! {"kind":"sampled_c1","period":6.283185307179586,"positions":[[x,y,z],...],"velocities":[[...],...]}
//! ```
//!
//! Numbers are written in shortest round-trip form, so every double is
//! recovered bit for bit.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curve::{AnalyticCurve, CurveError, SampledC1, SpaceCurve};
use crate::trigpoly::{TrigPoly, TrigPolyError};
use crate::Vec3;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("expected a {expected} document, found {found}")]
    WrongKind { expected: &'static str, found: &'static str },
    #[error("invalid trigonometric polynomial: {0}")]
    TrigPoly(#[from] TrigPolyError),
    #[error("invalid curve: {0}")]
    Curve(#[from] CurveError),
    #[error("nested component has kind {0:?}, expected \"trigpoly\"")]
    NestedKind(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPolyDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    pub a0: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl TrigPolyDoc {
    fn nested(p: &TrigPoly) -> Self {
        Self {
            kind: Some("trigpoly".into()),
            ..Self::top(p)
        }
    }

    fn top(p: &TrigPoly) -> Self {
        Self {
            kind: None,
            a0: p.a0(),
            cos: p.cos_coeffs().to_vec(),
            sin: p.sin_coeffs().to_vec(),
        }
    }

    fn to_poly(&self) -> Result<TrigPoly, IoError> {
        if let Some(k) = &self.kind {
            if k != "trigpoly" {
                return Err(IoError::NestedKind(k.clone()));
            }
        }
        Ok(TrigPoly::try_new(self.a0, self.cos.clone(), self.sin.clone())?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Document {
    Trigpoly(TrigPolyDoc),
    Curve3 {
        x: TrigPolyDoc,
        y: TrigPolyDoc,
        z: TrigPolyDoc,
    },
    SampledC1 {
        period: f64,
        positions: Vec<[f64; 3]>,
        velocities: Vec<[f64; 3]>,
    },
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Trigpoly(_) => "trigpoly",
            Document::Curve3 { .. } => "curve3",
            Document::SampledC1 { .. } => "sampled_c1",
        }
    }

    pub fn from_trigpoly(p: &TrigPoly) -> Self {
        Document::Trigpoly(TrigPolyDoc::top(p))
    }

    pub fn from_curve(c: &SpaceCurve) -> Self {
        match c {
            SpaceCurve::Analytic(a) => Document::Curve3 {
                x: TrigPolyDoc::nested(&a.x),
                y: TrigPolyDoc::nested(&a.y),
                z: TrigPolyDoc::nested(&a.z),
            },
            SpaceCurve::SampledC1(s) => Document::SampledC1 {
                period: s.period(),
                positions: s.positions().iter().map(|p| [p.x, p.y, p.z]).collect(),
                velocities: s.velocities().iter().map(|p| [p.x, p.y, p.z]).collect(),
            },
        }
    }

    pub fn to_trigpoly(&self) -> Result<TrigPoly, IoError> {
        match self {
            Document::Trigpoly(d) => d.to_poly(),
            other => Err(IoError::WrongKind {
                expected: "trigpoly",
                found: other.kind(),
            }),
        }
    }

    pub fn to_curve(&self) -> Result<SpaceCurve, IoError> {
        match self {
            Document::Curve3 { x, y, z } => Ok(SpaceCurve::Analytic(AnalyticCurve::new(
                x.to_poly()?,
                y.to_poly()?,
                z.to_poly()?,
            ))),
            Document::SampledC1 {
                period,
                positions,
                velocities,
            } => {
                let v3 = |a: &[[f64; 3]]| a.iter().map(|p| Vec3::new(p[0], p[1], p[2])).collect();
                Ok(SpaceCurve::SampledC1(SampledC1::new(*period, v3(positions), v3(velocities))?))
            }
            other => Err(IoError::WrongKind {
                expected: "curve3 or sampled_c1",
                found: other.kind(),
            }),
        }
    }
}

pub fn parse_document(text: &str) -> Result<Document, IoError> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_trigpoly(text: &str) -> Result<TrigPoly, IoError> {
    parse_document(text)?.to_trigpoly()
}

pub fn parse_curve(text: &str) -> Result<SpaceCurve, IoError> {
    parse_document(text)?.to_curve()
}

pub fn trigpoly_to_json(p: &TrigPoly) -> String {
    to_json(&Document::from_trigpoly(p))
}

pub fn curve_to_json(c: &SpaceCurve) -> String {
    to_json(&Document::from_curve(c))
}

pub fn to_json(doc: &Document) -> String {
    serde_json::to_string_pretty(doc).expect("documents always serialize")
}
