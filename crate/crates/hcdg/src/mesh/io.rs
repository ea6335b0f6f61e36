//! Plain-text quad mesh reader.
//!
//! Format (UTF-8, `#` comments allowed):
//! ```text
//! hcdg-mesh 2d
//! vertices N
//! x y            (N lines)
//! quads M
//! a b c d        (M lines, zero-based vertex ids, counter-clockwise)
//! boundary TAG K (optional, repeatable; TAG is dirichlet or neumann)
//! v0 v1          (K lines identifying boundary edges)
//! ```
//! Unlisted boundary edges default to Dirichlet. A re-tagged edge keeps the
//! last tag and records a warning.

use super::{build_quad_topology, BoundaryTag, Mesh, MeshError};
use std::collections::HashMap;

struct Cursor<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    line_no: usize,
}

impl<'a> Cursor<'a> {
    fn new(text: &'a str) -> Self {
        Cursor {
            lines: text.lines().enumerate(),
            line_no: 0,
        }
    }

    /// Next non-empty, non-comment line as (line number, tokens with columns).
    fn next_tokens(&mut self) -> Option<(usize, Vec<(usize, &'a str)>)> {
        for (i, line) in self.lines.by_ref() {
            self.line_no = i + 1;
            let body = line.split('#').next().unwrap_or("");
            let mut toks = Vec::new();
            let mut col = 0;
            for tok in body.split_whitespace() {
                let at = body[col..].find(tok).unwrap() + col;
                toks.push((at + 1, tok));
                col = at + tok.len();
            }
            if !toks.is_empty() {
                return Some((i + 1, toks));
            }
        }
        None
    }
}

fn parse_err(line: usize, col: usize, msg: impl Into<String>) -> MeshError {
    MeshError::ParseError {
        line,
        col,
        msg: msg.into(),
    }
}

fn expect_count(
    toks: &[(usize, &str)],
    n: usize,
    line: usize,
    what: &str,
) -> Result<(), MeshError> {
    if toks.len() != n {
        let col = toks.last().map_or(1, |t| t.0);
        return Err(parse_err(
            line,
            col,
            format!("expected {n} fields for {what}, got {}", toks.len()),
        ));
    }
    Ok(())
}

fn parse_num<T: std::str::FromStr>(tok: (usize, &str), line: usize, what: &str) -> Result<T, MeshError> {
    tok.1
        .parse()
        .map_err(|_| parse_err(line, tok.0, format!("invalid {what} `{}`", tok.1)))
}

/// Parse and validate a mesh file. Returns the mesh together with any
/// non-fatal warnings recorded while reading.
pub fn read_mesh(text: &str) -> Result<(Mesh, Vec<String>), MeshError> {
    let mut cur = Cursor::new(text);
    let mut warnings = Vec::new();

    let (line, toks) = cur
        .next_tokens()
        .ok_or_else(|| parse_err(1, 1, "empty mesh file"))?;
    if toks.len() != 2 || toks[0].1 != "hcdg-mesh" || toks[1].1 != "2d" {
        return Err(parse_err(line, toks[0].0, "expected header `hcdg-mesh 2d`"));
    }

    let (line, toks) = cur
        .next_tokens()
        .ok_or_else(|| parse_err(line, 1, "missing `vertices N`"))?;
    expect_count(&toks, 2, line, "`vertices N`")?;
    if toks[0].1 != "vertices" {
        return Err(parse_err(line, toks[0].0, "expected `vertices N`"));
    }
    let nv: usize = parse_num(toks[1], line, "vertex count")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line, toks) = cur
            .next_tokens()
            .ok_or_else(|| parse_err(cur.line_no + 1, 1, "missing vertex line"))?;
        expect_count(&toks, 2, line, "vertex coordinates")?;
        let x: f64 = parse_num(toks[0], line, "x coordinate")?;
        let y: f64 = parse_num(toks[1], line, "y coordinate")?;
        vertices.push([x, y]);
    }

    let (line, toks) = cur
        .next_tokens()
        .ok_or_else(|| parse_err(cur.line_no + 1, 1, "missing `quads M`"))?;
    expect_count(&toks, 2, line, "`quads M`")?;
    if toks[0].1 != "quads" {
        return Err(parse_err(line, toks[0].0, "expected `quads M`"));
    }
    let nq: usize = parse_num(toks[1], line, "quad count")?;
    let mut elem_verts = Vec::with_capacity(4 * nq);
    for _ in 0..nq {
        let (line, toks) = cur
            .next_tokens()
            .ok_or_else(|| parse_err(cur.line_no + 1, 1, "missing quad line"))?;
        expect_count(&toks, 4, line, "quad vertex ids")?;
        for &tok in &toks {
            let v: usize = parse_num(tok, line, "vertex id")?;
            if v >= nv {
                return Err(parse_err(line, tok.0, format!("vertex id {v} out of range")));
            }
            elem_verts.push(v);
        }
    }

    let mut mesh = build_quad_topology(vertices, elem_verts)?;
    let mut edge_to_face: HashMap<(usize, usize), usize> = HashMap::new();
    for (f, face) in mesh.faces.iter().enumerate() {
        if face.is_boundary() {
            let (a, b) = mesh.local_face_verts(face.left_elem, face.local_left);
            edge_to_face.insert((a.min(b), a.max(b)), f);
        }
    }

    // Optional boundary blocks.
    let mut tagged: HashMap<usize, usize> = HashMap::new();
    while let Some((line, toks)) = cur.next_tokens() {
        if toks[0].1 != "boundary" {
            return Err(parse_err(line, toks[0].0, "expected `boundary TAG K`"));
        }
        expect_count(&toks, 3, line, "`boundary TAG K`")?;
        let tag = match toks[1].1.to_ascii_lowercase().as_str() {
            "dirichlet" => BoundaryTag::Dirichlet,
            "neumann" => BoundaryTag::Neumann,
            other => return Err(MeshError::TagError(other.to_string())),
        };
        let k: usize = parse_num(toks[2], line, "edge count")?;
        for _ in 0..k {
            let (line, toks) = cur
                .next_tokens()
                .ok_or_else(|| parse_err(cur.line_no + 1, 1, "missing boundary edge line"))?;
            expect_count(&toks, 2, line, "boundary edge")?;
            let a: usize = parse_num(toks[0], line, "vertex id")?;
            let b: usize = parse_num(toks[1], line, "vertex id")?;
            let key = (a.min(b), a.max(b));
            let f = *edge_to_face.get(&key).ok_or_else(|| {
                MeshError::TopologyError(format!("({a}, {b}) is not a boundary edge"))
            })?;
            if let Some(prev) = tagged.insert(f, line) {
                warnings.push(format!(
                    "line {line}: edge ({a}, {b}) re-tagged (previous tag at line {prev}); last tag wins"
                ));
            }
            mesh.boundary_tags[f] = Some(tag);
        }
    }

    mesh.validate()?;
    Ok((mesh, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_QUADS: &str = "\
hcdg-mesh 2d
vertices 6
0 0
1 0
2 0
0 1
1 1
2 1
quads 2
0 1 4 3
1 2 5 4
";

    #[test]
    fn two_quads_share_one_edge() {
        let (m, warnings) = read_mesh(TWO_QUADS).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(m.n_elements(), 2);
        assert_eq!(m.faces.iter().filter(|f| !f.is_boundary()).count(), 1);
        assert_eq!(m.faces.iter().filter(|f| f.is_boundary()).count(), 6);
        // Untagged boundary defaults to Dirichlet.
        assert!(m
            .boundary_tags
            .iter()
            .flatten()
            .all(|t| *t == BoundaryTag::Dirichlet));
    }

    #[test]
    fn clockwise_quad_is_inverted() {
        let text = "\
hcdg-mesh 2d
vertices 4
0 0
1 0
1 1
0 1
quads 1
0 3 2 1
";
        match read_mesh(text) {
            Err(MeshError::TopologyError(msg)) => assert!(msg.contains("inverted")),
            other => panic!("expected inverted-quad error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_tag_line_last_wins_with_warning() {
        let text = format!(
            "{TWO_QUADS}boundary neumann 1\n0 1\nboundary dirichlet 1\n0 1\n"
        );
        let (m, warnings) = read_mesh(&text).unwrap();
        assert_eq!(warnings.len(), 1);
        let f = m
            .faces
            .iter()
            .enumerate()
            .find(|(_, face)| {
                face.is_boundary() && {
                    let (a, b) = m.local_face_verts(face.left_elem, face.local_left);
                    (a.min(b), a.max(b)) == (0, 1)
                }
            })
            .map(|(i, _)| i)
            .unwrap();
        assert_eq!(m.boundary_tags[f], Some(BoundaryTag::Dirichlet));
    }

    #[test]
    fn unknown_tag_rejected() {
        let text = format!("{TWO_QUADS}boundary robin 1\n0 1\n");
        assert!(matches!(read_mesh(&text), Err(MeshError::TagError(t)) if t == "robin"));
    }

    #[test]
    fn parse_error_carries_position() {
        let text = "hcdg-mesh 2d\nvertices 1\n0 oops\nquads 0\n";
        match read_mesh(text) {
            Err(MeshError::ParseError { line, col, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(col, 3);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn hanging_node_rejected() {
        // Right column split in two: vertex 6 hangs on the left quad's edge.
        let text = "\
hcdg-mesh 2d
vertices 8
0 0
1 0
2 0
0 1
1 1
2 1
1 0.5
2 0.5
quads 3
0 1 4 3
1 2 7 6
6 7 5 4
";
        match read_mesh(text) {
            Err(MeshError::TopologyError(msg)) => assert!(msg.contains("hanging")),
            other => panic!("expected hanging-node error, got {other:?}"),
        }
    }
}
