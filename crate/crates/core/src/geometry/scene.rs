//! JSON scene descriptions: a list of primitives, targets and STL files with
//! placements.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::targets::{build_target, DetailLevel, TargetKind};
use super::{build_primitive, load_mesh, GeometryError, Mesh, PrimitiveSpec, Vector3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectSource {
    Primitive(PrimitiveSpec),
    Target {
        kind: TargetKind,
        #[serde(default)]
        detail: DetailLevel,
    },
    /// ASCII STL path, relative to the scene file's directory.
    MeshFile(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneObject {
    #[serde(flatten)]
    pub source: ObjectSource,
    /// Rotation about +z applied before the offset.
    #[serde(default)]
    pub rotation_deg: f64,
    #[serde(default)]
    pub offset: [f64; 3],
}

impl SceneObject {
    pub fn new(source: ObjectSource) -> Self {
        SceneObject {
            source,
            rotation_deg: 0.0,
            offset: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub name: String,
    pub objects: Vec<SceneObject>,
}

impl SceneSpec {
    /// Builds the merged scene mesh. `base_dir` resolves relative mesh files.
    pub fn build(&self, base_dir: &Path) -> Result<Mesh, GeometryError> {
        if self.objects.is_empty() {
            return Err(GeometryError::InvalidSpec("scene has no objects".into()));
        }
        let mut meshes = Vec::with_capacity(self.objects.len());
        for obj in &self.objects {
            let mesh = match &obj.source {
                ObjectSource::Primitive(spec) => build_primitive(spec)?,
                ObjectSource::Target { kind, detail } => build_target(*kind, *detail),
                ObjectSource::MeshFile(path) => {
                    let full = base_dir.join(path);
                    let bytes = std::fs::read(&full).map_err(|e| GeometryError::Io {
                        path: full.display().to_string(),
                        message: e.to_string(),
                    })?;
                    load_mesh(&bytes)?
                }
            };
            let mut m = mesh;
            if obj.rotation_deg != 0.0 {
                m = m.rotated_z(obj.rotation_deg);
            }
            if obj.offset != [0.0; 3] {
                m = m.translated(Vector3::from(obj.offset));
            }
            meshes.push(m);
        }
        if meshes.len() == 1 {
            return Ok(meshes.pop().expect("one mesh").renamed(self.name.clone()));
        }
        Ok(Mesh::merge(self.name.clone(), &meshes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scene_json_builds_placed_objects() {
        let json = r#"{
            "name": "demo",
            "objects": [
                {"primitive": {"type": "plate", "width": 2, "length": 2}, "offset": [0, 0, 1]},
                {"target": {"kind": "MSL"}, "rotation_deg": 90}
            ]
        }"#;
        let scene: SceneSpec = serde_json::from_str(json).unwrap();
        let m = scene.build(Path::new(".")).unwrap();
        assert_eq!(m.name, "demo");
        assert!(m.part("missile").is_some());
        let plate = m.parts()[0].clone();
        for f in &m.facets()[plate.facets] {
            assert_eq!(f.centroid.z, 1.0);
        }
        // rotated by 90 degrees: the 6.5 m length now runs along y
        let (lo, hi) = m.bounds_of(m.parts()[1].facets.start..m.facets().len());
        assert!(((hi - lo).y - 6.5).abs() < 1e-9);
    }

    #[test]
    fn missing_mesh_file_is_io_error() {
        let scene = SceneSpec {
            name: "x".into(),
            objects: vec![SceneObject::new(ObjectSource::MeshFile("nope.stl".into()))],
        };
        assert!(matches!(scene.build(Path::new("/nonexistent")), Err(GeometryError::Io { .. })));
    }
}
