//! JSON body files.
//!
//! ```json
//! {"type": "polytope", "dim": 3, "vertices": [[1, 1, 1], ...], "label": "cube"}
//! {"type": "lp", "p": 4, "axes": [1, 2, 1]}
//! {"type": "ellipsoid", "matrix": [[1, 0, 0], [0, 2, 0], [0, 0, 3]]}
//! {"type": "radial", "n_alpha": 32, "n_beta": 64, "rho": [...]}
//! {"type": "transformed", "matrix": [[...], [...], [...]], "base": {...}}
//! ```
//!
//! Two-dimensional files use `"dim": 2` with a polytope vertex list.

use std::path::Path;

use mahler_core::body::{make_body, BodySpec};
use mahler_core::{ConvexBody3, Error as CoreError, Polygon2};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

fn three() -> u8 {
    3
}

/// Parsed form of a body file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyFile {
    /// Ambient dimension, 2 or 3.
    #[serde(default = "three")]
    pub dim: u8,
    /// Optional free-text label.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Representation and its payload.
    #[serde(flatten)]
    pub kind: BodyKind,
}

/// Representation tag and payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum BodyKind {
    /// Convex hull of a symmetric vertex list.
    Polytope {
        /// Vertex coordinates.
        vertices: Vec<Vec<f64>>,
    },
    /// Weighted `l_p` ball.
    Lp {
        /// Exponent.
        p: f64,
        /// Semi-axes.
        axes: [f64; 3],
    },
    /// Ellipsoid `x . M x <= 1`.
    Ellipsoid {
        /// Symmetric positive-definite matrix.
        matrix: [[f64; 3]; 3],
    },
    /// Radial table on the quadrature grid.
    Radial {
        /// Number of `alpha` rings.
        n_alpha: usize,
        /// Number of `beta` nodes per ring.
        n_beta: usize,
        /// Radial values ring by ring.
        rho: Vec<f64>,
    },
    /// Linear image of another body.
    Transformed {
        /// Row-major matrix.
        matrix: [[f64; 3]; 3],
        /// The body being mapped.
        base: Box<BodyFile>,
    },
}

/// A body of either dimension.
#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    /// Planar polygon.
    Plane(Polygon2),
    /// Spatial body.
    Space(ConvexBody3),
}

fn spec_of(kind: &BodyKind) -> Result<BodySpec, CliError> {
    Ok(match kind {
        BodyKind::Polytope { vertices } => {
            let mut out = Vec::with_capacity(vertices.len());
            for v in vertices {
                if v.len() != 3 {
                    return Err(CliError::Parse(format!("vertex {v:?} does not have 3 coordinates")));
                }
                out.push([v[0], v[1], v[2]]);
            }
            BodySpec::Polytope { vertices: out }
        }
        BodyKind::Lp { p, axes } => BodySpec::LpBall { p: *p, axes: *axes },
        BodyKind::Ellipsoid { matrix } => BodySpec::Ellipsoid { matrix: *matrix },
        BodyKind::Radial { n_alpha, n_beta, rho } => {
            BodySpec::Radial { n_alpha: *n_alpha, n_beta: *n_beta, rho: rho.clone() }
        }
        BodyKind::Transformed { matrix, base } => {
            if base.dim != 3 {
                return Err(CliError::Parse("transformed bodies must be three-dimensional".into()));
            }
            BodySpec::Transformed { base: Box::new(spec_of(&base.kind)?), matrix: *matrix }
        }
    })
}

fn kind_of(spec: &BodySpec) -> BodyKind {
    match spec {
        BodySpec::Polytope { vertices } => BodyKind::Polytope { vertices: vertices.iter().map(|v| v.to_vec()).collect() },
        BodySpec::LpBall { p, axes } => BodyKind::Lp { p: *p, axes: *axes },
        BodySpec::Ellipsoid { matrix } => BodyKind::Ellipsoid { matrix: *matrix },
        BodySpec::Radial { n_alpha, n_beta, rho } => {
            BodyKind::Radial { n_alpha: *n_alpha, n_beta: *n_beta, rho: rho.clone() }
        }
        BodySpec::Transformed { base, matrix } => BodyKind::Transformed {
            matrix: *matrix,
            base: Box::new(BodyFile { dim: 3, label: None, kind: kind_of(base) }),
        },
    }
}

impl BodyFile {
    /// Builds and validates the body.
    pub fn build(&self) -> Result<Body, CliError> {
        let label = self.label.clone().unwrap_or_default();
        match self.dim {
            2 => match &self.kind {
                BodyKind::Polytope { vertices } => {
                    let mut pts = Vec::with_capacity(vertices.len());
                    for v in vertices {
                        if v.len() != 2 {
                            return Err(CliError::Parse(format!("vertex {v:?} does not have 2 coordinates")));
                        }
                        pts.push([v[0], v[1]]);
                    }
                    Ok(Body::Plane(Polygon2::from_points(&pts)?))
                }
                _ => Err(CliError::Parse("two-dimensional bodies must be polytopes".into())),
            },
            3 => make_body(&spec_of(&self.kind)?, &label).map(Body::Space).map_err(|e| match e {
                CoreError::BadParameter(_) | CoreError::BadGridSize(..) => CliError::InvalidBody(e.to_string()),
                e => e.into(),
            }),
            d => Err(CliError::Parse(format!("dim must be 2 or 3, got {d}"))),
        }
    }

    /// Body file describing a spatial body.
    pub fn from_body3(k: &ConvexBody3) -> Self {
        let label = (!k.label().is_empty()).then(|| k.label().to_string());
        BodyFile { dim: 3, label, kind: kind_of(&k.to_spec()) }
    }

    /// Body file describing a polygon.
    pub fn from_polygon(p: &Polygon2, label: Option<String>) -> Self {
        BodyFile { dim: 2, label, kind: BodyKind::Polytope { vertices: p.vertices().iter().map(|v| v.to_vec()).collect() } }
    }
}

/// Parses a body from JSON text.
pub fn parse_body_str(text: &str) -> Result<Body, CliError> {
    let file: BodyFile = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
    file.build()
}

/// Reads and parses a body file, returning the body and the raw bytes.
pub fn parse_body_file(path: &Path) -> Result<(Body, Vec<u8>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Parse(e.to_string()))?;
    Ok((parse_body_str(text)?, bytes))
}
