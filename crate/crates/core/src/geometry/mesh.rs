use std::collections::HashMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{GeometryError, Vector3};
use crate::SPEED_OF_LIGHT;

/// Flat triangular facet with derived normal, area and centroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    pub vertex_indices: [usize; 3],
    pub normal: Vector3,
    pub area: f64,
    pub centroid: Vector3,
}

impl Facet {
    /// Derives normal (right-hand winding), area and centroid from vertex
    /// positions. Returns `None` for a zero-area triangle.
    pub fn from_vertices(vertex_indices: [usize; 3], p: [Vector3; 3]) -> Option<Facet> {
        let n = (p[1] - p[0]).cross(p[2] - p[0]);
        let twice_area = n.norm();
        if !(twice_area > 0.0) || !twice_area.is_finite() {
            return None;
        }
        Some(Facet {
            vertex_indices,
            normal: n / twice_area,
            area: 0.5 * twice_area,
            centroid: (p[0] + p[1] + p[2]) / 3.0,
        })
    }
}

/// Named contiguous facet range of a composite mesh (one sub-solid).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshPart {
    pub name: String,
    pub facets: Range<usize>,
}

/// Triangular-facet PEC surface. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub name: String,
    vertices: Vec<Vector3>,
    facets: Vec<Facet>,
    parts: Vec<MeshPart>,
}

impl Mesh {
    /// Builds a mesh from raw triangles, recomputing per-facet data.
    pub fn new(
        name: impl Into<String>,
        vertices: Vec<Vector3>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Mesh, GeometryError> {
        let name = name.into();
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFiniteVertex(i));
        }
        let mut facets = Vec::with_capacity(triangles.len());
        let mut degenerate = Vec::new();
        for (fi, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i >= vertices.len()) {
                return Err(GeometryError::IndexOutOfRange {
                    facet: fi,
                    index: bad,
                    vertex_count: vertices.len(),
                });
            }
            let p = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
            match Facet::from_vertices(*tri, p) {
                Some(f) => facets.push(f),
                None => degenerate.push(fi),
            }
        }
        if !degenerate.is_empty() {
            return Err(GeometryError::DegenerateFacets(degenerate));
        }
        let parts = vec![MeshPart {
            name: name.clone(),
            facets: 0..facets.len(),
        }];
        Ok(Mesh {
            name,
            vertices,
            facets,
            parts,
        })
    }

    pub fn vertices(&self) -> &[Vector3] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn parts(&self) -> &[MeshPart] {
        &self.parts
    }

    pub fn part(&self, name: &str) -> Option<&MeshPart> {
        self.parts.iter().find(|p| p.name == name)
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn facet_vertices(&self, i: usize) -> [Vector3; 3] {
        let idx = self.facets[i].vertex_indices;
        [self.vertices[idx[0]], self.vertices[idx[1]], self.vertices[idx[2]]]
    }

    pub fn total_area(&self) -> f64 {
        self.facets.iter().map(|f| f.area).sum()
    }

    /// Sum of `normal * area` over a facet range. Zero for a closed surface.
    pub fn vector_area(&self, range: Range<usize>) -> Vector3 {
        self.facets[range]
            .iter()
            .fold(Vector3::ZERO, |acc, f| acc + f.normal * f.area)
    }

    /// Axis-aligned bounding box `(min, max)` over the vertices of `range`.
    pub fn bounds_of(&self, range: Range<usize>) -> (Vector3, Vector3) {
        let inf = Vector3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut lo = inf;
        let mut hi = -inf;
        for f in &self.facets[range] {
            for &i in &f.vertex_indices {
                lo = lo.min(self.vertices[i]);
                hi = hi.max(self.vertices[i]);
            }
        }
        (lo, hi)
    }

    pub fn bounds(&self) -> (Vector3, Vector3) {
        self.bounds_of(0..self.facets.len())
    }

    pub fn max_edge(&self) -> f64 {
        (0..self.facets.len())
            .map(|i| {
                let p = self.facet_vertices(i);
                (p[1] - p[0])
                    .norm()
                    .max((p[2] - p[1]).norm())
                    .max((p[0] - p[2]).norm())
            })
            .fold(0.0, f64::max)
    }

    /// Applies `f` to every vertex and rebuilds facet data.
    pub fn map_vertices(&self, f: impl Fn(Vector3) -> Vector3) -> Result<Mesh, GeometryError> {
        let vertices = self.vertices.iter().map(|&v| f(v)).collect();
        let tris = self.facets.iter().map(|fc| fc.vertex_indices).collect();
        let mut m = Mesh::new(self.name.clone(), vertices, tris)?;
        m.parts = self.parts.clone();
        Ok(m)
    }

    pub fn translated(&self, delta: Vector3) -> Mesh {
        self.map_vertices(|v| v + delta)
            .expect("translation preserves facet validity")
    }

    /// Rotation about +z through the origin.
    pub fn rotated_z(&self, angle_deg: f64) -> Mesh {
        self.map_vertices(|v| v.rotated_z(angle_deg))
            .expect("rotation preserves facet validity")
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Mesh {
        let name = name.into();
        if self.parts.len() == 1 {
            self.parts[0].name = name.clone();
        }
        self.name = name;
        self
    }

    /// Concatenates meshes; each input's parts are kept, prefixed by nothing.
    pub fn merge(name: impl Into<String>, meshes: &[Mesh]) -> Mesh {
        let mut vertices = Vec::new();
        let mut facets = Vec::new();
        let mut parts = Vec::new();
        for m in meshes {
            let vbase = vertices.len();
            let fbase = facets.len();
            vertices.extend_from_slice(&m.vertices);
            facets.extend(m.facets.iter().map(|f| Facet {
                vertex_indices: f.vertex_indices.map(|i| i + vbase),
                ..*f
            }));
            parts.extend(m.parts.iter().map(|p| MeshPart {
                name: p.name.clone(),
                facets: p.facets.start + fbase..p.facets.end + fbase,
            }));
        }
        Mesh {
            name: name.into(),
            vertices,
            facets,
            parts,
        }
    }

    /// Renumbers vertices in order of first use by the facet list and drops
    /// unused ones. STL export/import of a canonical mesh is bit-stable.
    pub fn canonicalized(&self) -> Mesh {
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut vertices = Vec::with_capacity(self.vertices.len());
        let facets = self
            .facets
            .iter()
            .map(|f| {
                let vertex_indices = f.vertex_indices.map(|i| {
                    *remap.entry(i).or_insert_with(|| {
                        vertices.push(self.vertices[i]);
                        vertices.len() - 1
                    })
                });
                Facet { vertex_indices, ..*f }
            })
            .collect();
        Mesh {
            name: self.name.clone(),
            vertices,
            facets,
            parts: self.parts.clone(),
        }
    }

    /// Content digest over name-independent geometry (hex SHA-256).
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.vertices.len() as u64).to_le_bytes());
        for v in &self.vertices {
            for c in v.to_array() {
                h.update(c.to_le_bytes());
            }
        }
        h.update((self.facets.len() as u64).to_le_bytes());
        for f in &self.facets {
            for i in f.vertex_indices {
                h.update((i as u64).to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }

    pub(crate) fn set_parts(&mut self, parts: Vec<MeshPart>) {
        self.parts = parts;
    }
}

/// Edge length of a mesh relative to the wavelength at a given frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshQualityReport {
    pub max_edge_m: f64,
    pub max_edge_over_lambda: f64,
    pub facet_count: usize,
    /// Set when the longest edge exceeds one wavelength. Flat facets are
    /// integrated exactly, but curved parts are poorly approximated.
    pub coarse_warning: bool,
}

pub fn mesh_quality(mesh: &Mesh, frequency_hz: f64) -> Result<MeshQualityReport, GeometryError> {
    if mesh.is_empty() {
        return Err(GeometryError::EmptyMesh);
    }
    if !(frequency_hz > 0.0) {
        return Err(GeometryError::InvalidSpec(format!(
            "frequency must be positive, got {frequency_hz}"
        )));
    }
    let max_edge_m = mesh.max_edge();
    let max_edge_over_lambda = max_edge_m * frequency_hz / SPEED_OF_LIGHT;
    Ok(MeshQualityReport {
        max_edge_m,
        max_edge_over_lambda,
        facet_count: mesh.facets().len(),
        coarse_warning: max_edge_over_lambda > 1.0,
    })
}
