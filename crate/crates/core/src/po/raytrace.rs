//! Occlusion queries: bounding-volume hierarchy over mesh facets with a
//! watertight ray/triangle test.

use crate::geometry::{Mesh, Vector3};

/// Offset below which a hit is treated as the ray's own origin, metres.
pub const SELF_HIT_EPSILON_M: f64 = 1e-9;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vector3,
    hi: Vector3,
}

impl Aabb {
    fn empty() -> Self {
        let inf = Vector3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        Aabb { lo: inf, hi: -inf }
    }

    fn grow(&mut self, p: Vector3) {
        self.lo = self.lo.min(p);
        self.hi = self.hi.max(p);
    }

    fn union(&mut self, o: &Aabb) {
        self.lo = self.lo.min(o.lo);
        self.hi = self.hi.max(o.hi);
    }

    /// Slab test; `inv` holds reciprocal direction components.
    fn hit(&self, origin: Vector3, inv: [f64; 3], t_max: f64) -> bool {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for a in 0..3 {
            let o = origin.component(a);
            let (lo, hi) = (self.lo.component(a), self.hi.component(a));
            if inv[a].is_infinite() {
                // Ray parallel to this slab.
                if o < lo || o > hi {
                    return false;
                }
                continue;
            }
            let ta = (lo - o) * inv[a];
            let tb = (hi - o) * inv[a];
            t0 = t0.max(ta.min(tb));
            t1 = t1.min(ta.max(tb));
            if t0 > t1 {
                return false;
            }
        }
        true
    }
}

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, start: usize, end: usize },
    Inner { bounds: Aabb, left: usize, right: usize },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Static acceleration structure over the facets of one mesh.
#[derive(Debug, Clone)]
pub struct Occluder {
    triangles: Vec<[Vector3; 3]>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl Occluder {
    pub fn new(mesh: &Mesh) -> Self {
        let triangles: Vec<[Vector3; 3]> = (0..mesh.facets().len()).map(|i| mesh.facet_vertices(i)).collect();
        let mut order: Vec<usize> = (0..triangles.len()).collect();
        let mut nodes = Vec::new();
        if !triangles.is_empty() {
            let centroids: Vec<Vector3> = triangles.iter().map(|t| (t[0] + t[1] + t[2]) / 3.0).collect();
            build(&triangles, &centroids, &mut order, 0, triangles.len(), &mut nodes);
        }
        Occluder { triangles, order, nodes }
    }

    /// True if the ray `origin + t * dir` with `t > SELF_HIT_EPSILON_M`
    /// meets any facet other than `skip`.
    pub fn occluded(&self, origin: Vector3, dir: Vector3, skip: Option<usize>) -> bool {
        if self.nodes.is_empty() {
            return false;
        }
        let inv = [1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z];
        let ray = WatertightRay::new(origin, dir);
        let mut stack = Vec::with_capacity(64);
        stack.push(0usize);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if !node.bounds().hit(origin, inv, f64::INFINITY) {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    for &fi in &self.order[start..end] {
                        if Some(fi) == skip {
                            continue;
                        }
                        if let Some(t) = ray.intersect(&self.triangles[fi]) {
                            if t > SELF_HIT_EPSILON_M {
                                return true;
                            }
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        false
    }
}

fn build(
    tris: &[[Vector3; 3]],
    centroids: &[Vector3],
    order: &mut [usize],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> usize {
    let mut bounds = Aabb::empty();
    let mut cbounds = Aabb::empty();
    for &i in &order[start..end] {
        for p in tris[i] {
            bounds.grow(p);
        }
        cbounds.grow(centroids[i]);
    }
    let me = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { bounds, start, end });
        return me;
    }
    let ext = cbounds.hi - cbounds.lo;
    let axis = if ext.x >= ext.y && ext.x >= ext.z {
        0
    } else if ext.y >= ext.z {
        1
    } else {
        2
    };
    let mid = (start + end) / 2;
    order[start..end].sort_by(|&a, &b| {
        centroids[a]
            .component(axis)
            .total_cmp(&centroids[b].component(axis))
            .then(a.cmp(&b))
    });
    nodes.push(Node::Leaf { bounds, start, end });
    let left = build(tris, centroids, order, start, mid, nodes);
    let right = build(tris, centroids, order, mid, end, nodes);
    let mut b = *nodes[left].bounds();
    b.union(nodes[right].bounds());
    nodes[me] = Node::Inner { bounds: b, left, right };
    me
}

/// Ray prepared for the watertight triangle test (shear into a frame where
/// the dominant direction axis is z).
#[derive(Debug, Clone, Copy)]
pub struct WatertightRay {
    origin: Vector3,
    kx: usize,
    ky: usize,
    kz: usize,
    sx: f64,
    sy: f64,
    sz: f64,
}

impl WatertightRay {
    pub fn new(origin: Vector3, dir: Vector3) -> Self {
        let d = dir.to_array();
        let kz = if d[0].abs() >= d[1].abs() && d[0].abs() >= d[2].abs() {
            0
        } else if d[1].abs() >= d[2].abs() {
            1
        } else {
            2
        };
        let mut kx = (kz + 1) % 3;
        let mut ky = (kx + 1) % 3;
        if d[kz] < 0.0 {
            std::mem::swap(&mut kx, &mut ky);
        }
        WatertightRay {
            origin,
            kx,
            ky,
            kz,
            sx: d[kx] / d[kz],
            sy: d[ky] / d[kz],
            sz: 1.0 / d[kz],
        }
    }

    /// Ray parameter of the hit, if any. Edges and vertices shared by two
    /// triangles are never missed by both.
    pub fn intersect(&self, tri: &[Vector3; 3]) -> Option<f64> {
        let rel = |p: Vector3| (p - self.origin).to_array();
        let (a, b, c) = (rel(tri[0]), rel(tri[1]), rel(tri[2]));
        let (kx, ky, kz) = (self.kx, self.ky, self.kz);
        let ax = a[kx] - self.sx * a[kz];
        let ay = a[ky] - self.sy * a[kz];
        let bx = b[kx] - self.sx * b[kz];
        let by = b[ky] - self.sy * b[kz];
        let cx = c[kx] - self.sx * c[kz];
        let cy = c[ky] - self.sy * c[kz];
        let u = cx * by - cy * bx;
        let v = ax * cy - ay * cx;
        let w = bx * ay - by * ax;
        if (u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0) {
            return None;
        }
        let det = u + v + w;
        if det == 0.0 {
            return None;
        }
        let t_scaled = self.sz * (u * a[kz] + v * b[kz] + w * c[kz]);
        let t = t_scaled / det;
        (t > 0.0).then_some(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_primitive, direction_from_angles, PrimitiveSpec};

    fn brute(mesh: &Mesh, origin: Vector3, dir: Vector3, skip: Option<usize>) -> bool {
        let ray = WatertightRay::new(origin, dir);
        (0..mesh.facets().len()).any(|i| {
            Some(i) != skip
                && ray
                    .intersect(&mesh.facet_vertices(i))
                    .is_some_and(|t| t > SELF_HIT_EPSILON_M)
        })
    }

    #[test]
    fn single_triangle_hits_and_misses() {
        let tri = [Vector3::ZERO, Vector3::X, Vector3::Y];
        let down = Vector3::new(0.0, 0.0, -1.0);
        let r = WatertightRay::new(Vector3::new(0.25, 0.25, 1.0), down);
        assert_eq!(r.intersect(&tri), Some(1.0));
        let r = WatertightRay::new(Vector3::new(0.75, 0.75, 1.0), down);
        assert_eq!(r.intersect(&tri), None);
        // from below, both windings register
        let r = WatertightRay::new(Vector3::new(0.25, 0.25, -2.0), Vector3::Z);
        assert_eq!(r.intersect(&tri), Some(2.0));
    }

    #[test]
    fn shared_edge_is_watertight() {
        // ray through the diagonal shared by the two plate triangles
        let plate = build_primitive(&PrimitiveSpec::plate(2.0, 2.0)).unwrap();
        let occ = Occluder::new(&plate);
        for k in -9..=9 {
            let s = k as f64 / 10.0;
            let origin = Vector3::new(s, s, 3.0);
            assert!(occ.occluded(origin, -Vector3::Z, None), "diagonal point {s}");
        }
    }

    #[test]
    fn bvh_matches_brute_force() {
        let mesh = build_primitive(&PrimitiveSpec::wall_on_ground((4.0, 0.2, 2.0), (10.0, 10.0))).unwrap();
        let occ = Occluder::new(&mesh);
        let mut mismatches = 0;
        for (i, f) in mesh.facets().iter().enumerate().step_by(7) {
            for (az, el) in [(0.0, 10.0), (0.0, 45.0), (120.0, 5.0), (200.0, 30.0)] {
                let d = direction_from_angles(az, el);
                if occ.occluded(f.centroid, d, Some(i)) != brute(&mesh, f.centroid, d, Some(i)) {
                    mismatches += 1;
                }
            }
        }
        assert_eq!(mismatches, 0);
    }
}
