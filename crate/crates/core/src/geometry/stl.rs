//! ASCII STL reading and writing.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{GeometryError, Mesh, Vector3};

/// Writes `mesh` as ASCII STL. Coordinates use shortest round-trip
/// formatting so a reload reproduces them bit for bit.
pub fn write_stl(mesh: &Mesh) -> String {
    let name = if mesh.name.is_empty() { "mesh" } else { mesh.name.as_str() };
    let mut s = String::new();
    let _ = writeln!(s, "solid {name}");
    for (i, f) in mesh.facets().iter().enumerate() {
        let n = f.normal;
        let _ = writeln!(s, "  facet normal {:?} {:?} {:?}", n.x, n.y, n.z);
        s.push_str("    outer loop\n");
        for p in mesh.facet_vertices(i) {
            let _ = writeln!(s, "      vertex {:?} {:?} {:?}", p.x, p.y, p.z);
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    let _ = writeln!(s, "endsolid {name}");
    s
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    /// Next non-blank line as (1-based line number, tokens).
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, line) in self.inner.by_ref() {
            self.last_line = i + 1;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if !toks.is_empty() {
                return Some((i + 1, toks));
            }
        }
        None
    }

    fn expect(&mut self, keyword: &[&str]) -> Result<(usize, Vec<&'a str>), GeometryError> {
        let (line, toks) = self.next_tokens().ok_or_else(|| GeometryError::Parse {
            line: self.last_line.max(1),
            message: format!("unexpected end of input, expected {:?}", keyword.join(" ")),
        })?;
        if toks.len() < keyword.len() || toks[..keyword.len()] != *keyword {
            return Err(GeometryError::Parse {
                line,
                message: format!("expected {:?}, found {:?}", keyword.join(" "), toks.join(" ")),
            });
        }
        Ok((line, toks))
    }
}

fn parse_triple(line: usize, toks: &[&str]) -> Result<Vector3, GeometryError> {
    if toks.len() != 3 {
        return Err(GeometryError::Parse {
            line,
            message: format!("expected 3 numbers, found {}", toks.len()),
        });
    }
    let mut v = [0.0; 3];
    for (slot, t) in v.iter_mut().zip(toks) {
        *slot = t.parse::<f64>().map_err(|e| GeometryError::Parse {
            line,
            message: format!("bad number {t:?}: {e}"),
        })?;
        if !slot.is_finite() {
            return Err(GeometryError::Parse {
                line,
                message: format!("non-finite number {t:?}"),
            });
        }
    }
    Ok(v.into())
}

/// Parses ASCII STL. Stored facet normals are ignored; normals, areas and
/// centroids are recomputed from the vertex winding. Bit-identical vertices
/// are merged in order of first appearance.
pub fn load_mesh(bytes: &[u8]) -> Result<Mesh, GeometryError> {
    let text = std::str::from_utf8(bytes).map_err(|e| GeometryError::Parse {
        line: 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
        message: "input is not valid UTF-8 (binary STL is not supported)".into(),
    })?;
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        last_line: 0,
    };
    let (_, head) = lines.expect(&["solid"])?;
    let name = head[1..].join(" ");

    let mut index: HashMap<[u64; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    loop {
        let (line, toks) = lines.next_tokens().ok_or_else(|| GeometryError::Parse {
            line: lines.last_line.max(1),
            message: "unexpected end of input, expected \"facet\" or \"endsolid\"".into(),
        })?;
        match toks[0] {
            "endsolid" => break,
            "facet" => {
                if toks.get(1) != Some(&"normal") {
                    return Err(GeometryError::Parse {
                        line,
                        message: "expected \"facet normal\"".into(),
                    });
                }
                parse_triple(line, &toks[2..])?;
            }
            other => {
                return Err(GeometryError::Parse {
                    line,
                    message: format!("expected \"facet\" or \"endsolid\", found {other:?}"),
                })
            }
        }
        lines.expect(&["outer", "loop"])?;
        let mut tri = [0usize; 3];
        for slot in &mut tri {
            let (line, toks) = lines.expect(&["vertex"])?;
            let p = parse_triple(line, &toks[1..])?;
            let key = [p.x.to_bits(), p.y.to_bits(), p.z.to_bits()];
            *slot = *index.entry(key).or_insert_with(|| {
                vertices.push(p);
                vertices.len() - 1
            });
        }
        lines.expect(&["endloop"])?;
        lines.expect(&["endfacet"])?;
        triangles.push(tri);
    }
    Mesh::new(name, vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_primitive, PrimitiveSpec};

    const RIGHT_TRIANGLE: &str = "solid tri
  facet normal 0 0 1
    outer loop
      vertex 0 0 0
      vertex 1 0 0
      vertex 0 1 0
    endloop
  endfacet
endsolid tri
";

    #[test]
    fn unit_right_triangle() {
        let m = load_mesh(RIGHT_TRIANGLE.as_bytes()).unwrap();
        assert_eq!(m.facets().len(), 1);
        assert_eq!(m.facets()[0].area, 0.5);
        assert_eq!(m.facets()[0].normal, Vector3::Z);
        assert_eq!(m.name, "tri");
    }

    #[test]
    fn inconsistent_stored_normal_is_ignored() {
        let text = RIGHT_TRIANGLE.replace("normal 0 0 1", "normal 1 0 0");
        let m = load_mesh(text.as_bytes()).unwrap();
        assert_eq!(m.facets()[0].normal, Vector3::Z);
    }

    #[test]
    fn prism_roundtrip_is_bit_stable() {
        let m = build_primitive(&PrimitiveSpec::prism(1.0, 1.0, 10.0)).unwrap();
        let back = load_mesh(write_stl(&m).as_bytes()).unwrap();
        assert_eq!(back.vertices().len(), m.vertices().len());
        assert_eq!(back.facets().len(), m.facets().len());
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.facets(), m.facets());
    }

    #[test]
    fn truncated_file_is_parse_error() {
        let cut = &RIGHT_TRIANGLE[..RIGHT_TRIANGLE.find("endloop").unwrap()];
        match load_mesh(cut.as_bytes()) {
            Err(GeometryError::Parse { line, .. }) => assert_eq!(line, 7),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_number_reports_line() {
        let text = RIGHT_TRIANGLE.replace("vertex 1 0 0", "vertex 1 zero 0");
        match load_mesh(text.as_bytes()) {
            Err(GeometryError::Parse { line, message }) => {
                assert_eq!(line, 5);
                assert!(message.contains("zero"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_facets_are_listed() {
        let mut text = String::from("solid d\n");
        for (i, third) in ["0 1 0", "2 0 0", "0 3 0", "3 0 0"].iter().enumerate() {
            let _ = i;
            text += &format!(
                "facet normal 0 0 1\nouter loop\nvertex 0 0 0\nvertex 1 0 0\nvertex {third}\nendloop\nendfacet\n"
            );
        }
        text += "endsolid d\n";
        match load_mesh(text.as_bytes()) {
            Err(GeometryError::DegenerateFacets(list)) => assert_eq!(list, vec![1, 3]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn binary_input_rejected() {
        let bytes = [0x80u8, 0x81, 0x00, 0x10];
        assert!(matches!(load_mesh(&bytes), Err(GeometryError::Parse { .. })));
    }
}
