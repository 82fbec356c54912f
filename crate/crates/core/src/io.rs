//! JSON wire formats shared by the library and the command-line tool.
//!
//! Exact values travel as `"num/den"` strings. Readers also accept JSON
//! numbers and decimal strings; a number is read through its decimal text,
//! so `0.3` becomes exactly `3/10` on the rational path.

use serde::{Deserialize, Serialize};
use serde_json::Value as Json;

use crate::error::{Error, Result};
use crate::outcome::{Event, FiniteOutcomeSpace, GridOutcomeSpace, OutcomeSpace};
use crate::region::{PredictionRegion, RegionKind};
use crate::transducer::{Contour, Provenance};
use crate::value::Value;

/// `{"labels": [...]}` or `{"grid": {"lo": .., "hi": .., "num_points": ..}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceFile {
    Finite { labels: Vec<String> },
    Grid { grid: GridOutcomeSpace },
}

impl SpaceFile {
    pub fn into_space(self) -> Result<OutcomeSpace> {
        Ok(match self {
            SpaceFile::Finite { labels } => FiniteOutcomeSpace::new(labels)?.into(),
            SpaceFile::Grid { grid } => GridOutcomeSpace::new(grid.lo(), grid.hi(), grid.size())?.into(),
        })
    }

    pub fn from_space(space: &OutcomeSpace) -> Self {
        match space {
            OutcomeSpace::Finite(f) => SpaceFile::Finite { labels: f.labels().to_vec() },
            OutcomeSpace::Grid(g) => SpaceFile::Grid { grid: *g },
        }
    }
}

/// Reads a scalar from a JSON number or string.
pub fn parse_scalar<V: Value>(v: &Json) -> Result<V> {
    let text = match v {
        Json::Number(n) => n.to_string(),
        Json::String(s) => s.clone(),
        other => return Err(Error::Json(format!("expected a number or \"num/den\" string, got {other}"))),
    };
    V::parse(&text).ok_or_else(|| Error::Json(format!("cannot read {text:?} as a number")))
}

/// Writes a scalar: a string for exact values, a number otherwise.
pub fn render_scalar<V: Value>(v: &V) -> Json {
    if V::EXACT {
        Json::String(v.render())
    } else {
        serde_json::Number::from_f64(v.to_f64()).map_or(Json::Null, Json::Number)
    }
}

/// A contour together with the space it lives on. Without `labels` or
/// `grid` the space is anonymous (`y0, y1, ...`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridOutcomeSpace>,
    pub pi: Vec<Json>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl ContourFile {
    pub fn from_contour<V: Value>(c: &Contour<V>, space: &OutcomeSpace) -> Self {
        let (labels, grid) = match space {
            OutcomeSpace::Finite(f) => (Some(f.labels().to_vec()), None),
            OutcomeSpace::Grid(g) => (None, Some(*g)),
        };
        Self { labels, grid, pi: c.values().iter().map(render_scalar).collect(), provenance: Some(c.provenance()) }
    }

    pub fn space(&self) -> Result<OutcomeSpace> {
        match (&self.labels, &self.grid) {
            (Some(_), Some(_)) => Err(Error::Json("contour file has both labels and grid".into())),
            (Some(labels), None) => SpaceFile::Finite { labels: labels.clone() }.into_space(),
            (None, Some(grid)) => SpaceFile::Grid { grid: *grid }.into_space(),
            (None, None) => Ok(FiniteOutcomeSpace::anonymous(self.pi.len())?.into()),
        }
    }

    pub fn contour<V: Value>(&self) -> Result<Contour<V>> {
        let space = self.space()?;
        if space.size() != self.pi.len() {
            return Err(Error::WrongDimension { expected: space.size(), actual: self.pi.len() });
        }
        let values = self.pi.iter().map(parse_scalar).collect::<Result<Vec<V>>>()?;
        Contour::new(values, self.provenance.unwrap_or(Provenance::Analytic))
    }
}

/// `{"alpha": 0.3, "labels": ["B", "C"], "kind": "cpr"}`; grid regions list
/// `points` instead of labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionFile {
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<f64>>,
    pub kind: RegionKind,
    pub size: f64,
}

impl RegionFile {
    pub fn new<V: Value>(region: &PredictionRegion<V>, space: &OutcomeSpace) -> Self {
        let (labels, points) = event_payload(&region.event, space);
        Self { alpha: region.alpha.to_f64(), labels, points, kind: region.kind, size: space.event_size(&region.event) }
    }
}

/// Labels for finite spaces, grid coordinates for grids.
pub fn event_payload(event: &Event, space: &OutcomeSpace) -> (Option<Vec<String>>, Option<Vec<f64>>) {
    match space {
        OutcomeSpace::Finite(f) => (Some(f.event_labels(event)), None),
        OutcomeSpace::Grid(g) => (None, Some(event.indices().iter().map(|&i| g.point(i)).collect())),
    }
}

/// One focal element of a mass function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassEntry {
    pub event: Vec<String>,
    pub mass: Json,
}
