//! Faceted PEC surface models: vectors, meshes, parametric primitives and
//! targets, STL I/O and scene descriptions.

mod mesh;
pub mod primitives;
pub mod scene;
mod stl;
pub mod targets;
mod vector;

use thiserror::Error;

pub use mesh::{mesh_quality, Facet, Mesh, MeshPart, MeshQualityReport};
pub use primitives::{build_primitive, PrimitiveSpec};
pub use scene::{ObjectSource, SceneObject, SceneSpec};
pub use stl::{load_mesh, write_stl};
pub use targets::{build_target, DetailLevel, TargetKind};
pub use vector::{azimuth_of, direction_from_angles, horizontal_unit, vertical_unit, Vector3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid geometry spec: {0}")]
    InvalidSpec(String),
    #[error("mesh has no facets")]
    EmptyMesh,
    #[error("vertex {0} is not finite")]
    NonFiniteVertex(usize),
    #[error("facet {facet} references vertex {index} but the mesh has {vertex_count} vertices")]
    IndexOutOfRange {
        facet: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("degenerate (zero-area) facets: {0:?}")]
    DegenerateFacets(Vec<usize>),
    #[error("STL parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SPEED_OF_LIGHT;

    #[test]
    fn prism_quality_at_one_gigahertz() {
        let m = build_primitive(&PrimitiveSpec::prism(1.0, 1.0, 10.0)).unwrap();
        let q = mesh_quality(&m, 1e9).unwrap();
        assert!((q.max_edge_m - 101f64.sqrt()).abs() < 1e-12);
        assert!((q.max_edge_over_lambda - 101f64.sqrt() * 1e9 / SPEED_OF_LIGHT).abs() < 1e-12);
        assert!((q.max_edge_over_lambda - 33.5).abs() < 0.05);
        assert!(q.coarse_warning);
        assert_eq!(q.facet_count, 12);
    }

    #[test]
    fn plate_quality_at_one_metre_wavelength() {
        let m = build_primitive(&PrimitiveSpec::plate(1.0, 1.0)).unwrap();
        let q = mesh_quality(&m, 299_792_458.0).unwrap();
        assert!((q.max_edge_over_lambda - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn quality_ratio_doubles_with_frequency() {
        let m = build_target(TargetKind::Apc, DetailLevel::Coarse);
        let a = mesh_quality(&m, 0.7e9).unwrap();
        let b = mesh_quality(&m, 1.4e9).unwrap();
        assert!((b.max_edge_over_lambda - 2.0 * a.max_edge_over_lambda).abs() < 1e-12);
    }

    #[test]
    fn quality_errors() {
        let m = Mesh::new("empty", vec![], vec![]).unwrap();
        assert_eq!(mesh_quality(&m, 1e9), Err(GeometryError::EmptyMesh));
        let p = build_primitive(&PrimitiveSpec::plate(1.0, 1.0)).unwrap();
        assert!(mesh_quality(&p, 0.0).is_err());
    }

    #[test]
    fn index_out_of_range_rejected() {
        let e = Mesh::new("bad", vec![Vector3::ZERO; 2], vec![[0, 1, 2]]).unwrap_err();
        assert!(matches!(e, GeometryError::IndexOutOfRange { index: 2, .. }));
    }

    proptest::proptest! {
        #[test]
        fn stored_facet_data_is_recomputable(
            pts in proptest::collection::vec(-5.0f64..5.0, 9),
            angle in 0.0f64..360.0,
        ) {
            let v: Vec<Vector3> = pts.chunks(3).map(|c| Vector3::new(c[0], c[1], c[2])).collect();
            if let Ok(m) = Mesh::new("t", v, vec![[0, 1, 2]]) {
                let r = m.rotated_z(angle);
                for mesh in [&m, &r] {
                    let f = mesh.facets()[0];
                    let p = mesh.facet_vertices(0);
                    let n = (p[1] - p[0]).cross(p[2] - p[0]);
                    proptest::prop_assert!((f.normal.norm() - 1.0).abs() < 1e-12);
                    proptest::prop_assert!((0.5 * n.norm() - f.area).abs() <= 1e-9 * f.area);
                    proptest::prop_assert!((f.normal - n.normalized()).norm() < 1e-9);
                    proptest::prop_assert!((f.centroid - (p[0] + p[1] + p[2]) / 3.0).norm() < 1e-9);
                }
            }
        }

        #[test]
        fn primitive_stl_roundtrip_is_bit_stable(
            w in 0.1f64..5.0, l in 0.1f64..5.0, h in 0.1f64..5.0, e in 0.3f64..3.0,
        ) {
            let spec = PrimitiveSpec::Box { width: w, length: l, height: h, max_edge: Some(e) };
            let m = build_primitive(&spec).unwrap();
            let back = load_mesh(write_stl(&m).as_bytes()).unwrap();
            proptest::prop_assert_eq!(back.vertices(), m.vertices());
            proptest::prop_assert_eq!(back.facets(), m.facets());
            let closure = m.vector_area(0..m.facets().len()).norm();
            proptest::prop_assert!(closure <= 1e-9 * m.total_area());
        }
    }
}
