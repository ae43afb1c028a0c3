//! Parametric closed solids and flat patches.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{GeometryError, Mesh, MeshPart, Vector3};

pub const DEFAULT_SEGMENTS: usize = 16;
pub const DEFAULT_GROUND_EDGE_M: f64 = 0.25;

/// Shape parameters for the standalone primitives.
///
/// Boxes are centred on the z axis and stand on the ground (z from 0 to
/// height); width runs along x, length along y. Plates lie in z = 0 with
/// their normal along +z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PrimitiveSpec {
    Plate {
        width: f64,
        length: f64,
        #[serde(default)]
        max_edge: Option<f64>,
    },
    #[serde(alias = "prism")]
    Box {
        width: f64,
        length: f64,
        height: f64,
        #[serde(default)]
        max_edge: Option<f64>,
    },
    /// Open-bottomed wall standing on a subdivided ground patch. The wall
    /// runs along y, centred on the origin.
    WallOnGround {
        wall_length: f64,
        wall_thickness: f64,
        wall_height: f64,
        ground_width: f64,
        ground_length: f64,
        #[serde(default)]
        ground_edge: Option<f64>,
    },
    Cylinder {
        radius: f64,
        length: f64,
        #[serde(default)]
        segments: Option<usize>,
    },
    Cone {
        radius: f64,
        length: f64,
        #[serde(default)]
        segments: Option<usize>,
    },
}

impl PrimitiveSpec {
    pub fn prism(width: f64, length: f64, height: f64) -> Self {
        PrimitiveSpec::Box {
            width,
            length,
            height,
            max_edge: None,
        }
    }

    pub fn plate(width: f64, length: f64) -> Self {
        PrimitiveSpec::Plate {
            width,
            length,
            max_edge: None,
        }
    }

    pub fn wall_on_ground(wall: (f64, f64, f64), ground: (f64, f64)) -> Self {
        PrimitiveSpec::WallOnGround {
            wall_length: wall.0,
            wall_thickness: wall.1,
            wall_height: wall.2,
            ground_width: ground.0,
            ground_length: ground.1,
            ground_edge: None,
        }
    }
}

fn check_positive(pairs: &[(&str, f64)]) -> Result<(), GeometryError> {
    for (name, v) in pairs {
        if !(*v > 0.0) || !v.is_finite() {
            return Err(GeometryError::InvalidSpec(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    Ok(())
}

fn check_edge(max_edge: Option<f64>) -> Result<(), GeometryError> {
    match max_edge {
        Some(e) => check_positive(&[("max_edge", e)]),
        None => Ok(()),
    }
}

fn check_segments(n: usize) -> Result<(), GeometryError> {
    if n < 3 {
        return Err(GeometryError::InvalidSpec(format!(
            "segments must be at least 3, got {n}"
        )));
    }
    Ok(())
}

pub fn build_primitive(spec: &PrimitiveSpec) -> Result<Mesh, GeometryError> {
    match *spec {
        PrimitiveSpec::Plate {
            width,
            length,
            max_edge,
        } => {
            check_positive(&[("width", width), ("length", length)])?;
            check_edge(max_edge)?;
            Ok(plate(width, length, max_edge))
        }
        PrimitiveSpec::Box {
            width,
            length,
            height,
            max_edge,
        } => {
            check_positive(&[("width", width), ("length", length), ("height", height)])?;
            check_edge(max_edge)?;
            let lo = Vector3::new(-width / 2.0, -length / 2.0, 0.0);
            let hi = Vector3::new(width / 2.0, length / 2.0, height);
            Ok(box_between("box", lo, hi, max_edge, true))
        }
        PrimitiveSpec::WallOnGround {
            wall_length,
            wall_thickness,
            wall_height,
            ground_width,
            ground_length,
            ground_edge,
        } => {
            check_positive(&[
                ("wall_length", wall_length),
                ("wall_thickness", wall_thickness),
                ("wall_height", wall_height),
                ("ground_width", ground_width),
                ("ground_length", ground_length),
            ])?;
            check_edge(ground_edge)?;
            let edge = ground_edge.unwrap_or(DEFAULT_GROUND_EDGE_M);
            let ground = plate(ground_width, ground_length, Some(edge)).renamed("ground");
            let lo = Vector3::new(-wall_thickness / 2.0, -wall_length / 2.0, 0.0);
            let hi = Vector3::new(wall_thickness / 2.0, wall_length / 2.0, wall_height);
            let wall = box_between("wall", lo, hi, None, false);
            Ok(Mesh::merge("wall_on_ground", &[ground, wall]))
        }
        PrimitiveSpec::Cylinder {
            radius,
            length,
            segments,
        } => {
            check_positive(&[("radius", radius), ("length", length)])?;
            let n = segments.unwrap_or(DEFAULT_SEGMENTS);
            check_segments(n)?;
            Ok(cylinder("cylinder", Vector3::ZERO, Vector3::Z, length, radius, n))
        }
        PrimitiveSpec::Cone {
            radius,
            length,
            segments,
        } => {
            check_positive(&[("radius", radius), ("length", length)])?;
            let n = segments.unwrap_or(DEFAULT_SEGMENTS);
            check_segments(n)?;
            Ok(cone("cone", Vector3::ZERO, Vector3::Z, length, radius, n))
        }
    }
}

/// Incrementally collects triangles over integer-keyed vertices so shared
/// edges use identical vertices.
struct Builder<K> {
    index: HashMap<K, usize>,
    vertices: Vec<Vector3>,
    triangles: Vec<[usize; 3]>,
}

impl<K: std::hash::Hash + Eq + Copy> Builder<K> {
    fn new() -> Self {
        Builder {
            index: HashMap::new(),
            vertices: Vec::new(),
            triangles: Vec::new(),
        }
    }

    fn vertex(&mut self, key: K, pos: impl FnOnce() -> Vector3) -> usize {
        let vertices = &mut self.vertices;
        *self.index.entry(key).or_insert_with(|| {
            vertices.push(pos());
            vertices.len() - 1
        })
    }

    fn finish(self, name: &str) -> Mesh {
        Mesh::new(name, self.vertices, self.triangles)
            .expect("primitive construction yields valid facets")
            .canonicalized()
    }
}

/// Flat rectangle in z = 0, centred on the origin, normal +z.
pub fn plate(width: f64, length: f64, max_edge: Option<f64>) -> Mesh {
    let (nx, ny) = match max_edge {
        Some(e) => (cells(width, e), cells(length, e)),
        None => (1, 1),
    };
    let mut b = Builder::<(usize, usize)>::new();
    let pos = |i: usize, j: usize| {
        Vector3::new(
            -width / 2.0 + width * i as f64 / nx as f64,
            -length / 2.0 + length * j as f64 / ny as f64,
            0.0,
        )
    };
    for i in 0..nx {
        for j in 0..ny {
            let p00 = b.vertex((i, j), || pos(i, j));
            let p10 = b.vertex((i + 1, j), || pos(i + 1, j));
            let p11 = b.vertex((i + 1, j + 1), || pos(i + 1, j + 1));
            let p01 = b.vertex((i, j + 1), || pos(i, j + 1));
            b.triangles.push([p00, p10, p11]);
            b.triangles.push([p00, p11, p01]);
        }
    }
    b.finish("plate")
}

fn cells(extent: f64, max_edge: f64) -> usize {
    ((extent / max_edge) - 1e-9).ceil().max(1.0) as usize
}

/// Axis-aligned box between `lo` and `hi` with outward normals. Each face
/// is split into a lattice no coarser than `max_edge`; `with_bottom = false`
/// omits the z = lo.z face.
pub fn box_between(
    name: &str,
    lo: Vector3,
    hi: Vector3,
    max_edge: Option<f64>,
    with_bottom: bool,
) -> Mesh {
    let size = hi - lo;
    let n = match max_edge {
        Some(e) => [cells(size.x, e), cells(size.y, e), cells(size.z, e)],
        None => [1, 1, 1],
    };
    let pos = |k: [usize; 3]| {
        Vector3::new(
            lo.x + size.x * k[0] as f64 / n[0] as f64,
            lo.y + size.y * k[1] as f64 / n[1] as f64,
            lo.z + size.z * k[2] as f64 / n[2] as f64,
        )
    };
    let mut b = Builder::<[usize; 3]>::new();
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in [0usize, 1] {
            if axis == 2 && side == 0 && !with_bottom {
                continue;
            }
            for i in 0..n[u] {
                for j in 0..n[v] {
                    let key = |di: usize, dj: usize| {
                        let mut k = [0usize; 3];
                        k[axis] = side * n[axis];
                        k[u] = i + di;
                        k[v] = j + dj;
                        k
                    };
                    let mut corner = |di, dj| {
                        let k = key(di, dj);
                        b.vertex(k, || pos(k))
                    };
                    let p00 = corner(0, 0);
                    let p10 = corner(1, 0);
                    let p11 = corner(1, 1);
                    let p01 = corner(0, 1);
                    if side == 1 {
                        b.triangles.push([p00, p10, p11]);
                        b.triangles.push([p00, p11, p01]);
                    } else {
                        b.triangles.push([p00, p11, p10]);
                        b.triangles.push([p00, p01, p11]);
                    }
                }
            }
        }
    }
    b.finish(name)
}

/// Orthonormal pair `(e1, e2)` with `e1 × e2 = axis`.
fn frame(axis: Vector3) -> (Vector3, Vector3) {
    let helper = if axis.z.abs() < 0.9 { Vector3::Z } else { Vector3::X };
    let e1 = helper.cross(axis).normalized();
    let e2 = axis.cross(e1);
    (e1, e2)
}

fn ring(center: Vector3, e1: Vector3, e2: Vector3, radius: f64, n: usize) -> Vec<Vector3> {
    (0..n)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / n as f64;
            let (s, c) = t.sin_cos();
            center + (e1 * c + e2 * s) * radius
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum RodKey {
    Ring(usize, usize),
    Center(usize),
}

/// Closed N-gon prism along `axis` (unit) from `base`.
pub fn cylinder(name: &str, base: Vector3, axis: Vector3, length: f64, radius: f64, n: usize) -> Mesh {
    rod(name, base, axis, length, 0.0, radius, n)
}

/// Closed N-gon cone with its base disc at `base` and apex at `base + length * axis`.
pub fn cone(name: &str, base: Vector3, axis: Vector3, length: f64, radius: f64, n: usize) -> Mesh {
    rod(name, base, axis, 0.0, length, radius, n)
}

/// Cylinder of `body_length` capped at the tail, followed by a conical nose
/// of `nose_length`. Either length may be zero (pure cone or pure cylinder).
pub fn rod(
    name: &str,
    base: Vector3,
    axis: Vector3,
    body_length: f64,
    nose_length: f64,
    radius: f64,
    n: usize,
) -> Mesh {
    let axis = axis.normalized();
    let (e1, e2) = frame(axis);
    let tail = ring(base, e1, e2, radius, n);
    let joint = ring(base + axis * body_length, e1, e2, radius, n);
    let mut b = Builder::<RodKey>::new();
    let c0 = b.vertex(RodKey::Center(0), || base);
    let t: Vec<usize> = (0..n).map(|i| b.vertex(RodKey::Ring(0, i), || tail[i])).collect();
    for i in 0..n {
        b.triangles.push([c0, t[(i + 1) % n], t[i]]);
    }
    let mut last = t;
    if body_length > 0.0 {
        let j: Vec<usize> = (0..n).map(|i| b.vertex(RodKey::Ring(1, i), || joint[i])).collect();
        for i in 0..n {
            let i1 = (i + 1) % n;
            b.triangles.push([last[i], last[i1], j[i1]]);
            b.triangles.push([last[i], j[i1], j[i]]);
        }
        last = j;
    }
    let tip = base + axis * (body_length + nose_length);
    let c1 = b.vertex(RodKey::Center(1), || tip);
    if nose_length > 0.0 {
        for i in 0..n {
            b.triangles.push([last[i], last[(i + 1) % n], c1]);
        }
    } else {
        for i in 0..n {
            b.triangles.push([c1, last[i], last[(i + 1) % n]]);
        }
    }
    b.finish(name)
}

/// Tags every facet of `mesh` as a single named part.
pub fn as_part(mesh: Mesh, name: &str) -> Mesh {
    let mut m = mesh.renamed(name);
    let n = m.facets().len();
    m.set_parts(vec![MeshPart {
        name: name.to_string(),
        facets: 0..n,
    }]);
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closure_residual(m: &Mesh) -> f64 {
        m.vector_area(0..m.facets().len()).norm() / m.total_area()
    }

    #[test]
    fn prism_has_twelve_facets_and_42_square_metres() {
        let m = build_primitive(&PrimitiveSpec::prism(1.0, 1.0, 10.0)).unwrap();
        assert_eq!(m.facets().len(), 12);
        assert_eq!(m.vertices().len(), 8);
        assert!((m.total_area() - 42.0).abs() < 1e-12);
        assert!(closure_residual(&m) < 1e-12);
    }

    #[test]
    fn plate_is_two_facets() {
        let m = build_primitive(&PrimitiveSpec::plate(1.0, 1.0)).unwrap();
        assert_eq!(m.facets().len(), 2);
        assert!((m.total_area() - 1.0).abs() < 1e-15);
        for f in m.facets() {
            assert_eq!(f.normal, Vector3::Z);
        }
    }

    #[test]
    fn subdivided_plate_respects_edge() {
        let m = plate(1.0, 2.0, Some(0.25));
        assert_eq!(m.facets().len(), 4 * 8 * 2);
        assert!((m.total_area() - 2.0).abs() < 1e-12);
        assert_eq!(m.vertices().len(), 5 * 9);
    }

    #[test]
    fn subdivided_box_stays_closed() {
        let m = box_between("b", Vector3::new(-1.0, -0.3, 0.2), Vector3::new(2.0, 0.4, 1.1), Some(0.3), true);
        assert!(closure_residual(&m) < 1e-12);
        let area = 2.0 * (3.0 * 0.7 + 3.0 * 0.9 + 0.7 * 0.9);
        assert!((m.total_area() - area).abs() < 1e-12);
    }

    #[test]
    fn wall_on_ground_parts() {
        let m = build_primitive(&PrimitiveSpec::wall_on_ground((4.0, 0.2, 2.0), (10.0, 10.0))).unwrap();
        let ground = m.part("ground").unwrap().clone();
        let wall = m.part("wall").unwrap().clone();
        assert_eq!(ground.facets.len(), 40 * 40 * 2);
        assert_eq!(wall.facets.len(), 10);
        for i in ground.facets {
            let p = m.facet_vertices(i);
            let n = (p[1] - p[0]).cross(p[2] - p[0]).normalized();
            assert!((n - Vector3::Z).norm() < 1e-15);
            assert_eq!(m.facets()[i].normal, Vector3::Z);
        }
    }

    #[test]
    fn cylinder_and_cone_are_closed() {
        for n in [3, 8, 16, 31] {
            let c = cylinder("c", Vector3::new(0.1, 0.2, 0.3), Vector3::new(1.0, 1.0, 0.2).normalized(), 2.0, 0.4, n);
            assert!(closure_residual(&c) < 1e-12, "cylinder n={n}");
            assert_eq!(c.facets().len(), 4 * n);
            let k = cone("k", Vector3::ZERO, Vector3::X, 1.5, 0.25, n);
            assert!(closure_residual(&k) < 1e-12, "cone n={n}");
            let r = rod("r", Vector3::ZERO, Vector3::Y, 3.5, 0.5, 0.25, n);
            assert!(closure_residual(&r) < 1e-12, "rod n={n}");
        }
    }

    #[test]
    fn cylinder_normals_point_outward() {
        let c = cylinder("c", Vector3::ZERO, Vector3::Z, 2.0, 1.0, 16);
        let mid = Vector3::new(0.0, 0.0, 1.0);
        for f in c.facets() {
            assert!(f.normal.dot(f.centroid - mid) > 0.0);
        }
    }

    #[test]
    fn non_positive_dimensions_rejected() {
        for spec in [
            PrimitiveSpec::prism(0.0, 1.0, 1.0),
            PrimitiveSpec::plate(1.0, -2.0),
            PrimitiveSpec::wall_on_ground((4.0, 0.2, 2.0), (0.0, 10.0)),
            PrimitiveSpec::Cylinder { radius: 1.0, length: f64::NAN, segments: None },
            PrimitiveSpec::Cone { radius: 1.0, length: 1.0, segments: Some(2) },
        ] {
            assert!(matches!(build_primitive(&spec), Err(GeometryError::InvalidSpec(_))), "{spec:?}");
        }
    }

    #[test]
    fn spec_json_accepts_prism_alias() {
        let s: PrimitiveSpec =
            serde_json::from_str(r#"{"type":"prism","width":1,"length":1,"height":10}"#).unwrap();
        assert_eq!(s, PrimitiveSpec::prism(1.0, 1.0, 10.0));
    }
}
