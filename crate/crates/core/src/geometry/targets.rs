//! Composite ground-vehicle models built from boxes, faceted cylinders and
//! cones. Vehicles point along +x, are centred on the origin and stand on
//! z = 0. Each classifiable feature is its own named part.

use serde::{Deserialize, Serialize};

use super::primitives::{box_between, rod};
use super::{Mesh, Vector3};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TargetKind {
    /// Armoured personnel carrier.
    Apc,
    /// Main battle tank.
    Mbt,
    /// Stinger launcher.
    Str,
    /// Land missile launcher.
    Msl,
}

impl TargetKind {
    pub const ALL: [TargetKind; 4] = [TargetKind::Apc, TargetKind::Mbt, TargetKind::Str, TargetKind::Msl];

    pub fn label(self) -> &'static str {
        match self {
            TargetKind::Apc => "APC",
            TargetKind::Mbt => "MBT",
            TargetKind::Str => "STR",
            TargetKind::Msl => "MSL",
        }
    }
}

impl std::str::FromStr for TargetKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "APC" => Ok(TargetKind::Apc),
            "MBT" => Ok(TargetKind::Mbt),
            "STR" => Ok(TargetKind::Str),
            "MSL" => Ok(TargetKind::Msl),
            _ => Err(format!("unknown target kind {s:?} (expected APC, MBT, STR or MSL)")),
        }
    }
}

impl std::fmt::Display for TargetKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetailLevel {
    #[default]
    Coarse,
    Fine,
}

impl DetailLevel {
    pub fn segments(self) -> usize {
        match self {
            DetailLevel::Coarse => 16,
            DetailLevel::Fine => 32,
        }
    }

    pub fn box_edge(self) -> f64 {
        match self {
            DetailLevel::Coarse => 1.0,
            DetailLevel::Fine => 0.5,
        }
    }
}

/// Width of the thin strips standing in for whip antennas.
pub const ANTENNA_STRIP_WIDTH_M: f64 = 0.02;

/// One sub-solid of a target, in metres.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum PartShape {
    Box { lo: [f64; 3], hi: [f64; 3] },
    /// Cylinder of `body_length` with an optional conical nose.
    Rod {
        base: [f64; 3],
        axis: [f64; 3],
        body_length: f64,
        nose_length: f64,
        radius: f64,
    },
    /// Vertical antenna strip rising from `base`.
    Strip { base: [f64; 3], height: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartSpec {
    pub name: String,
    #[serde(flatten)]
    pub shape: PartShape,
}

fn part(name: impl Into<String>, shape: PartShape) -> PartSpec {
    PartSpec { name: name.into(), shape }
}

fn block(name: impl Into<String>, lo: [f64; 3], hi: [f64; 3]) -> PartSpec {
    part(name, PartShape::Box { lo, hi })
}

fn wheel(name: String, x: f64, y: f64, radius: f64, width: f64) -> PartSpec {
    let side = y.signum();
    part(
        name,
        PartShape::Rod {
            base: [x, y - side * width / 2.0, radius],
            axis: [0.0, side, 0.0],
            body_length: width,
            nose_length: 0.0,
            radius,
        },
    )
}

fn wheels(xs: &[f64], y: f64, radius: f64, width: f64) -> Vec<PartSpec> {
    let mut out = Vec::new();
    for (i, &x) in xs.iter().enumerate() {
        out.push(wheel(format!("wheel_{}", 2 * i), x, y, radius, width));
        out.push(wheel(format!("wheel_{}", 2 * i + 1), x, -y, radius, width));
    }
    out
}

fn antenna(name: &str, base: [f64; 3], height: f64) -> PartSpec {
    part(name, PartShape::Strip { base, height })
}

/// Sub-solid layout of each target class.
pub fn target_parts(kind: TargetKind) -> Vec<PartSpec> {
    match kind {
        TargetKind::Msl => {
            // 6.5 x 3 x 1 m truck bed carrying a 4 m x 0.5 m missile.
            let mut p = vec![
                block("body", [-3.25, -1.5, 0.8], [3.25, 1.5, 1.8]),
                block("cabin", [1.75, -1.5, 1.8], [3.25, 1.5, 3.0]),
                block("cradle_0", [-2.2, -0.3, 1.8], [-1.9, 0.3, 1.95]),
                block("cradle_1", [0.2, -0.3, 1.8], [0.5, 0.3, 1.95]),
                part(
                    "missile",
                    PartShape::Rod {
                        base: [-2.5, 0.0, 2.2],
                        axis: [1.0, 0.0, 0.0],
                        body_length: 3.5,
                        nose_length: 0.5,
                        radius: 0.25,
                    },
                ),
                antenna("antenna", [3.0, 1.25, 3.0], 1.2),
            ];
            p.extend(wheels(&[-2.3, -0.9, 2.3], 1.25, 0.45, 0.4));
            p
        }
        TargetKind::Mbt => {
            let mut p = vec![
                block("hull", [-3.25, -1.7, 0.45], [3.25, 1.7, 1.5]),
                part(
                    "turret",
                    PartShape::Rod {
                        base: [-0.4, 0.0, 1.5],
                        axis: [0.0, 0.0, 1.0],
                        body_length: 0.8,
                        nose_length: 0.0,
                        radius: 1.3,
                    },
                ),
                part(
                    "canon",
                    PartShape::Rod {
                        base: [0.8, 0.0, 1.95],
                        axis: [1.0, 0.0, 0.0],
                        body_length: 3.6,
                        nose_length: 0.0,
                        radius: 0.09,
                    },
                ),
                antenna("antenna", [-1.3, -0.8, 2.3], 1.5),
            ];
            p.extend(wheels(&[-2.5, -1.5, -0.5, 0.5, 1.5, 2.5], 1.45, 0.35, 0.5));
            p
        }
        TargetKind::Apc => {
            let mut p = vec![
                block("body", [-3.0, -1.4, 0.5], [3.0, 1.4, 2.0]),
                block("nose", [3.0, -1.2, 0.6], [3.5, 1.2, 1.5]),
                antenna("antenna", [2.6, 1.0, 2.0], 1.5),
            ];
            p.extend(wheels(&[-2.0, -0.7, 0.7, 2.0], 1.2, 0.45, 0.35));
            p
        }
        TargetKind::Str => {
            let mut p = vec![
                block("body", [-2.5, -1.25, 0.5], [2.5, 1.25, 1.5]),
                part(
                    "turret",
                    PartShape::Rod {
                        base: [-0.8, 0.0, 1.5],
                        axis: [0.0, 0.0, 1.0],
                        body_length: 0.6,
                        nose_length: 0.0,
                        radius: 0.8,
                    },
                ),
                block("phased_array", [-1.7, -0.6, 1.6], [-1.62, 0.6, 2.6]),
                antenna("antenna", [-2.2, 1.0, 1.5], 1.5),
            ];
            for (i, (y, z)) in [(-0.3, 2.25), (0.3, 2.25), (-0.3, 2.55), (0.3, 2.55)].into_iter().enumerate() {
                p.push(part(
                    format!("stinger_{i}"),
                    PartShape::Rod {
                        base: [-1.2, y, z],
                        axis: [1.0, 0.0, 0.0],
                        body_length: 1.3,
                        nose_length: 0.2,
                        radius: 0.08,
                    },
                ));
            }
            p.extend(wheels(&[-1.6, 1.6], 1.05, 0.45, 0.35));
            p
        }
    }
}

pub fn build_part(spec: &PartSpec, detail: DetailLevel) -> Mesh {
    let n = detail.segments();
    let mesh = match spec.shape {
        PartShape::Box { lo, hi } => box_between(&spec.name, lo.into(), hi.into(), Some(detail.box_edge()), true),
        PartShape::Rod {
            base,
            axis,
            body_length,
            nose_length,
            radius,
        } => rod(&spec.name, base.into(), axis.into(), body_length, nose_length, radius, n),
        PartShape::Strip { base, height } => {
            let b = Vector3::from(base);
            let h = ANTENNA_STRIP_WIDTH_M / 2.0;
            box_between(
                &spec.name,
                b - Vector3::new(h, h, 0.0),
                b + Vector3::new(h, h, height),
                None,
                true,
            )
        }
    };
    super::primitives::as_part(mesh, &spec.name)
}

/// Faceted PEC model of a ground target.
pub fn build_target(kind: TargetKind, detail: DetailLevel) -> Mesh {
    let parts: Vec<Mesh> = target_parts(kind).iter().map(|p| build_part(p, detail)).collect();
    Mesh::merge(kind.label(), &parts)
}
