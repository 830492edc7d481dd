//! Line-oriented ASCII mesh files:
//!
//! ```text
//! rfa-mesh 1
//! vertices N
//! x y                 (N lines)
//! triangles M
//! i j k subdomain     (M lines, 0-based, subdomain 0 = blood, 1 = tissue)
//! boundary K
//! i j tag             (K lines, tag in 1..=8)
//! ```

use std::fmt::Write as _;
use std::path::Path;

use super::{BoundaryTag, Mesh, MeshError, Subdomain};

pub fn mesh_to_string(mesh: &Mesh) -> String {
    let mut out = String::new();
    out.push_str("rfa-mesh 1\n");
    let _ = writeln!(out, "vertices {}", mesh.num_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(out, "{:?} {:?}", p[0], p[1]);
    }
    let _ = writeln!(out, "triangles {}", mesh.num_triangles());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let _ = writeln!(out, "{} {} {} {}", tri[0], tri[1], tri[2], mesh.subdomain(t).code());
    }
    let edges: Vec<_> = mesh.tagged_edges().collect();
    let _ = writeln!(out, "boundary {}", edges.len());
    for e in edges {
        let _ = writeln!(out, "{} {} {}", e.vertices[0], e.vertices[1], e.tag.index());
    }
    out
}

pub fn write_mesh(mesh: &Mesh, path: impl AsRef<Path>) -> Result<(), MeshError> {
    std::fs::write(path.as_ref(), mesh_to_string(mesh))
        .map_err(|e| MeshError::Io(format!("{}: {e}", path.as_ref().display())))
}

/// Reads a channel/tissue mesh file; the electrode tag Σ8 is required.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh, MeshError> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| MeshError::Io(format!("{}: {e}", path.as_ref().display())))?;
    let mesh = parse_mesh(&text)?;
    mesh.require_tag(BoundaryTag::Electrode)?;
    Ok(mesh)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_content(&mut self) -> Result<(usize, &'a str), MeshError> {
        for (i, line) in self.inner.by_ref() {
            let trimmed = line.trim();
            if !trimmed.is_empty() && !trimmed.starts_with('#') {
                return Ok((i + 1, trimmed));
            }
        }
        Err(MeshError::Parse {
            line: 0,
            message: "unexpected end of file".into(),
        })
    }

    fn header(&mut self, keyword: &str) -> Result<usize, MeshError> {
        let (line, text) = self.next_content()?;
        let mut parts = text.split_whitespace();
        if parts.next() != Some(keyword) {
            return Err(MeshError::Parse {
                line,
                message: format!("expected `{keyword} <count>`"),
            });
        }
        let count = parts.next().and_then(|c| c.parse().ok()).ok_or(MeshError::Parse {
            line,
            message: format!("bad `{keyword}` count"),
        })?;
        Ok(count)
    }
}

fn fields<T: std::str::FromStr>(line: usize, text: &str, n: usize) -> Result<Vec<T>, MeshError> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    if parts.len() != n {
        return Err(MeshError::Parse {
            line,
            message: format!("expected {n} fields, found {}", parts.len()),
        });
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<T>().map_err(|_| MeshError::Parse {
                line,
                message: format!("cannot parse `{p}`"),
            })
        })
        .collect()
}

/// Parses and validates a mesh without requiring any particular tag.
pub fn parse_mesh(text: &str) -> Result<Mesh, MeshError> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (line, magic) = lines.next_content()?;
    if magic.split_whitespace().collect::<Vec<_>>() != ["rfa-mesh", "1"] {
        return Err(MeshError::Parse {
            line,
            message: "missing `rfa-mesh 1` header".into(),
        });
    }

    let nv = lines.header("vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, text) = lines.next_content()?;
        let xy: Vec<f64> = fields(line, text, 2)?;
        if !xy.iter().all(|v| v.is_finite()) {
            return Err(MeshError::Parse {
                line,
                message: "non-finite coordinate".into(),
            });
        }
        vertices.push([xy[0], xy[1]]);
    }

    let nt = lines.header("triangles")?;
    let mut triangles = Vec::with_capacity(nt);
    let mut subdomain = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (line, text) = lines.next_content()?;
        let v: Vec<usize> = fields(line, text, 4)?;
        let s = u8::try_from(v[3]).ok().and_then(Subdomain::from_code).ok_or(MeshError::Parse {
            line,
            message: format!("invalid subdomain {}", v[3]),
        })?;
        triangles.push([v[0], v[1], v[2]]);
        subdomain.push(s);
    }

    let nb = lines.header("boundary")?;
    let mut tagged = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (line, text) = lines.next_content()?;
        let v: Vec<usize> = fields(line, text, 3)?;
        let tag = u8::try_from(v[2]).ok().and_then(BoundaryTag::from_index).ok_or(MeshError::Parse {
            line,
            message: format!("invalid boundary tag {}", v[2]),
        })?;
        tagged.push(([v[0], v[1]], tag));
    }

    Mesh::new(vertices, triangles, subdomain, tagged)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_TRIANGLES: &str = "rfa-mesh 1
vertices 4
0 0
1 0
1 1
0 1
triangles 2
0 1 2 0
0 2 3 0
boundary 4
0 1 7
1 2 3
2 3 2
3 0 8
";

    #[test]
    fn parses_small_mesh() {
        let m = parse_mesh(TWO_TRIANGLES).unwrap();
        assert_eq!(m.num_triangles(), 2);
        assert!(m.has_tag(BoundaryTag::Electrode));
    }

    #[test]
    fn negative_area_names_triangle() {
        let text = TWO_TRIANGLES.replace("0 2 3 0", "0 3 2 0");
        let err = parse_mesh(&text).unwrap_err();
        assert!(matches!(err, MeshError::NonPositiveArea { triangle: 1, .. }), "{err}");
        assert!(err.to_string().contains("triangle 1"));
    }

    #[test]
    fn missing_electrode_tag() {
        let text = TWO_TRIANGLES.replace("3 0 8", "3 0 1");
        let mesh = parse_mesh(&text).unwrap();
        let err = mesh.require_tag(BoundaryTag::Electrode).unwrap_err();
        assert!(err.to_string().contains("required boundary tag absent"));
    }

    #[test]
    fn bad_tag_reports_line() {
        let text = TWO_TRIANGLES.replace("3 0 8", "3 0 9");
        match parse_mesh(&text).unwrap_err() {
            MeshError::Parse { line, message } => {
                assert_eq!(line, 14);
                assert!(message.contains("tag"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn garbage_coordinate_reports_line() {
        let text = TWO_TRIANGLES.replace("1 1\n", "1 x\n");
        assert!(matches!(parse_mesh(&text), Err(MeshError::Parse { line: 5, .. })));
    }
}
