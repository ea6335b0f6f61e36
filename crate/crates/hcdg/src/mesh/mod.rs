//! Interval and straight-sided quadrilateral meshes: construction, file
//! ingestion, oriented face connectivity and bilinear element geometry.
//!
//! Local face order is fixed as (left, right) in 1D and (-x, +x, -y, +y) in
//! 2D, so the opposite face of local face `f` is always `f ^ 1`.

mod io;

pub use io::read_mesh;

use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    ParseError { line: usize, col: usize, msg: String },
    #[error("topology error: {0}")]
    TopologyError(String),
    #[error("unknown boundary tag `{0}`")]
    TagError(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
}

/// One mesh face. Interior faces have two incident element sides; boundary
/// faces only the left one. Periodic wrap faces are stored as interior faces
/// with `periodic` set (the two sides live at different physical positions).
#[derive(Debug, Clone)]
pub struct Face {
    pub left_elem: usize,
    pub right_elem: Option<usize>,
    pub local_left: usize,
    pub local_right: usize,
    /// 2D only: the two sides traverse the face in opposite tangential
    /// directions.
    pub tangential_flip: bool,
    pub periodic: bool,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.right_elem.is_none()
    }

    /// Element id and local face index for side 0 (left) or 1 (right).
    pub fn side(&self, s: usize) -> (usize, usize) {
        if s == 0 {
            (self.left_elem, self.local_left)
        } else {
            (self.right_elem.expect("boundary face has no right side"), self.local_right)
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub dim: usize,
    pub vertices: Vec<[f64; 2]>,
    /// Flattened element->vertex lists: 2 entries per interval element,
    /// 4 (counter-clockwise) per quad.
    pub elem_verts: Vec<usize>,
    pub faces: Vec<Face>,
    /// Flattened element->face ids, 2*dim entries per element in local order.
    pub elem_faces: Vec<usize>,
    /// One entry per face; `None` on interior faces.
    pub boundary_tags: Vec<Option<BoundaryTag>>,
}

impl Mesh {
    pub fn n_elements(&self) -> usize {
        self.elem_verts.len() / self.verts_per_elem()
    }

    pub fn verts_per_elem(&self) -> usize {
        if self.dim == 1 {
            2
        } else {
            4
        }
    }

    pub fn faces_per_elem(&self) -> usize {
        2 * self.dim
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let k = self.verts_per_elem();
        &self.elem_verts[e * k..(e + 1) * k]
    }

    pub fn element_faces(&self, e: usize) -> &[usize] {
        let k = self.faces_per_elem();
        &self.elem_faces[e * k..(e + 1) * k]
    }

    pub fn element_map(&self, e: usize) -> ElementMap {
        let vs = self.element(e);
        if self.dim == 1 {
            ElementMap::Interval {
                a: self.vertices[vs[0]][0],
                b: self.vertices[vs[1]][0],
            }
        } else {
            ElementMap::Bilinear {
                corners: [
                    self.vertices[vs[0]],
                    self.vertices[vs[1]],
                    self.vertices[vs[2]],
                    self.vertices[vs[3]],
                ],
            }
        }
    }

    /// Vertex pair of a local face in tangential order (2D).
    pub fn local_face_verts(&self, e: usize, local: usize) -> (usize, usize) {
        let vs = self.element(e);
        if self.dim == 1 {
            let v = vs[local];
            (v, v)
        } else {
            match local {
                0 => (vs[0], vs[3]),
                1 => (vs[1], vs[2]),
                2 => (vs[0], vs[1]),
                3 => (vs[3], vs[2]),
                _ => unreachable!("local face index out of range"),
            }
        }
    }

    /// The switch value seen by `elem` across face `f`, given the stored
    /// value-from-left `v`.
    pub fn side_of(&self, f: usize, elem: usize) -> usize {
        let face = &self.faces[f];
        if face.left_elem == elem {
            0
        } else {
            debug_assert_eq!(face.right_elem, Some(elem));
            1
        }
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_elements())
            .map(|e| self.element_map(e).measure())
            .sum()
    }

    pub fn set_boundary_tag(&mut self, face: usize, tag: BoundaryTag) {
        assert!(self.faces[face].is_boundary(), "face {face} is interior");
        self.boundary_tags[face] = Some(tag);
    }

    /// Run the structural invariant checks (face handshake, positive corner
    /// Jacobians, hanging-node scan).
    pub fn validate(&self) -> Result<(), MeshError> {
        let mut seen = vec![0usize; self.faces.len()];
        for e in 0..self.n_elements() {
            for &f in self.element_faces(e) {
                seen[f] += 1;
            }
        }
        for (f, face) in self.faces.iter().enumerate() {
            let want = if face.is_boundary() { 1 } else { 2 };
            if seen[f] != want {
                return Err(MeshError::TopologyError(format!(
                    "face {f} referenced {} times, expected {want}",
                    seen[f]
                )));
            }
            if face.right_elem == Some(face.left_elem) {
                return Err(MeshError::TopologyError(format!(
                    "face {f} joins element {} to itself",
                    face.left_elem
                )));
            }
        }
        if self.dim == 2 {
            for e in 0..self.n_elements() {
                let map = self.element_map(e);
                for &(xi, eta) in &[(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                    if map.jacobian_det(xi, eta) <= 0.0 {
                        return Err(MeshError::TopologyError(format!(
                            "inverted quad: element {e} has non-positive Jacobian"
                        )));
                    }
                }
            }
            self.check_hanging_nodes()?;
        }
        Ok(())
    }

    /// A boundary-looking edge with another element's vertex strictly inside
    /// it is a hanging node.
    fn check_hanging_nodes(&self) -> Result<(), MeshError> {
        let mut boundary_edges = Vec::new();
        for (f, face) in self.faces.iter().enumerate() {
            if face.is_boundary() {
                let (a, b) = self.local_face_verts(face.left_elem, face.local_left);
                boundary_edges.push((f, a, b));
            }
        }
        for &(f, a, b) in &boundary_edges {
            let pa = self.vertices[a];
            let pb = self.vertices[b];
            let len2 = (pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2);
            for (w, pw) in self.vertices.iter().enumerate() {
                if w == a || w == b {
                    continue;
                }
                let cross = (pb[0] - pa[0]) * (pw[1] - pa[1]) - (pb[1] - pa[1]) * (pw[0] - pa[0]);
                if cross.abs() > 1e-12 * len2.sqrt().max(1.0) {
                    continue;
                }
                let t = ((pw[0] - pa[0]) * (pb[0] - pa[0]) + (pw[1] - pa[1]) * (pb[1] - pa[1]))
                    / len2;
                if t > 1e-10 && t < 1.0 - 1e-10 {
                    return Err(MeshError::TopologyError(format!(
                        "hanging node: vertex {w} lies inside boundary edge of face {f}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Reference-to-physical geometry of one element.
#[derive(Debug, Clone)]
pub enum ElementMap {
    Interval { a: f64, b: f64 },
    Bilinear { corners: [[f64; 2]; 4] },
}

impl ElementMap {
    /// Map a reference point to physical coordinates.
    pub fn to_physical(&self, xi: f64, eta: f64) -> [f64; 2] {
        match self {
            ElementMap::Interval { a, b } => [a + 0.5 * (xi + 1.0) * (b - a), 0.0],
            ElementMap::Bilinear { corners } => {
                let n = [
                    0.25 * (1.0 - xi) * (1.0 - eta),
                    0.25 * (1.0 + xi) * (1.0 - eta),
                    0.25 * (1.0 + xi) * (1.0 + eta),
                    0.25 * (1.0 - xi) * (1.0 + eta),
                ];
                let mut p = [0.0, 0.0];
                for (ni, c) in n.iter().zip(corners) {
                    p[0] += ni * c[0];
                    p[1] += ni * c[1];
                }
                p
            }
        }
    }

    /// Jacobian matrix [[dx/dxi, dx/deta], [dy/dxi, dy/deta]] (2D) or the 1D
    /// stretch factor in slot (0,0).
    pub fn jacobian(&self, xi: f64, eta: f64) -> [[f64; 2]; 2] {
        match self {
            ElementMap::Interval { a, b } => [[0.5 * (b - a), 0.0], [0.0, 1.0]],
            ElementMap::Bilinear { corners } => {
                let dndxi = [
                    -0.25 * (1.0 - eta),
                    0.25 * (1.0 - eta),
                    0.25 * (1.0 + eta),
                    -0.25 * (1.0 + eta),
                ];
                let dndeta = [
                    -0.25 * (1.0 - xi),
                    -0.25 * (1.0 + xi),
                    0.25 * (1.0 + xi),
                    0.25 * (1.0 - xi),
                ];
                let mut j = [[0.0; 2]; 2];
                for k in 0..4 {
                    j[0][0] += dndxi[k] * corners[k][0];
                    j[1][0] += dndxi[k] * corners[k][1];
                    j[0][1] += dndeta[k] * corners[k][0];
                    j[1][1] += dndeta[k] * corners[k][1];
                }
                j
            }
        }
    }

    pub fn jacobian_det(&self, xi: f64, eta: f64) -> f64 {
        let j = self.jacobian(xi, eta);
        match self {
            ElementMap::Interval { .. } => j[0][0],
            ElementMap::Bilinear { .. } => j[0][0] * j[1][1] - j[0][1] * j[1][0],
        }
    }

    /// Adjugate of the Jacobian: adj[r][d] = |J| * d xi_r / d x_d.
    pub fn jacobian_adjugate(&self, xi: f64, eta: f64) -> [[f64; 2]; 2] {
        match self {
            ElementMap::Interval { .. } => [[1.0, 0.0], [0.0, 1.0]],
            ElementMap::Bilinear { .. } => {
                let j = self.jacobian(xi, eta);
                [[j[1][1], -j[0][1]], [-j[1][0], j[0][0]]]
            }
        }
    }

    /// Physical measure of the element (length or area).
    pub fn measure(&self) -> f64 {
        match self {
            ElementMap::Interval { a, b } => b - a,
            ElementMap::Bilinear { corners } => {
                // Shoelace; exact for straight-sided quads.
                let mut s = 0.0;
                for k in 0..4 {
                    let c = corners[k];
                    let d = corners[(k + 1) % 4];
                    s += c[0] * d[1] - d[0] * c[1];
                }
                0.5 * s
            }
        }
    }
}

/// k equal intervals over (a, b), left to right. Periodic meshes link the
/// first and last elements through a single wrap face.
pub fn uniform_interval_mesh(k: usize, domain: (f64, f64), periodic: bool) -> Result<Mesh, MeshError> {
    let (a, b) = domain;
    if !(a < b) {
        return Err(MeshError::InvalidDomain(format!("need a < b, got ({a}, {b})")));
    }
    if k == 0 {
        return Err(MeshError::InvalidDomain("need at least one element".into()));
    }
    if periodic && k < 2 {
        return Err(MeshError::InvalidDomain(
            "periodic interval mesh needs k >= 2".into(),
        ));
    }
    let h = (b - a) / k as f64;
    let vertices: Vec<[f64; 2]> = (0..=k).map(|i| [a + h * i as f64, 0.0]).collect();
    let mut elem_verts = Vec::with_capacity(2 * k);
    for e in 0..k {
        elem_verts.push(e);
        elem_verts.push(e + 1);
    }
    let mut faces = Vec::new();
    let mut elem_faces = vec![usize::MAX; 2 * k];
    // Interior faces between consecutive elements.
    for e in 0..k - 1 {
        let f = faces.len();
        faces.push(Face {
            left_elem: e,
            right_elem: Some(e + 1),
            local_left: 1,
            local_right: 0,
            tangential_flip: false,
            periodic: false,
        });
        elem_faces[2 * e + 1] = f;
        elem_faces[2 * (e + 1)] = f;
    }
    if periodic {
        let f = faces.len();
        faces.push(Face {
            left_elem: k - 1,
            right_elem: Some(0),
            local_left: 1,
            local_right: 0,
            tangential_flip: false,
            periodic: true,
        });
        elem_faces[2 * (k - 1) + 1] = f;
        elem_faces[0] = f;
    } else {
        let fl = faces.len();
        faces.push(Face {
            left_elem: 0,
            right_elem: None,
            local_left: 0,
            local_right: 0,
            tangential_flip: false,
            periodic: false,
        });
        elem_faces[0] = fl;
        let fr = faces.len();
        faces.push(Face {
            left_elem: k - 1,
            right_elem: None,
            local_left: 1,
            local_right: 0,
            tangential_flip: false,
            periodic: false,
        });
        elem_faces[2 * (k - 1) + 1] = fr;
    }
    let boundary_tags = faces
        .iter()
        .map(|f| f.is_boundary().then_some(BoundaryTag::Dirichlet))
        .collect();
    Ok(Mesh {
        dim: 1,
        vertices,
        elem_verts,
        faces,
        elem_faces,
        boundary_tags,
    })
}

/// nx-by-ny axis-aligned quads over a rectangle, elements x-fastest.
pub fn cartesian_quad_mesh(
    nx: usize,
    ny: usize,
    domain: ((f64, f64), (f64, f64)),
    periodic: bool,
) -> Result<Mesh, MeshError> {
    let ((x0, x1), (y0, y1)) = domain;
    if !(x0 < x1 && y0 < y1) {
        return Err(MeshError::InvalidDomain("need x0 < x1 and y0 < y1".into()));
    }
    if nx == 0 || ny == 0 {
        return Err(MeshError::InvalidDomain("need nx, ny >= 1".into()));
    }
    if periodic && (nx < 2 || ny < 2) {
        return Err(MeshError::InvalidDomain(
            "periodic quad mesh needs nx, ny >= 2".into(),
        ));
    }
    let dx = (x1 - x0) / nx as f64;
    let dy = (y1 - y0) / ny as f64;
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([x0 + dx * i as f64, y0 + dy * j as f64]);
        }
    }
    let mut elem_verts = Vec::with_capacity(4 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            elem_verts.extend_from_slice(&[vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
        }
    }
    let mut mesh = build_quad_topology(vertices, elem_verts)?;
    if periodic {
        link_periodic_cartesian(&mut mesh, nx, ny)?;
    }
    mesh.validate()?;
    Ok(mesh)
}

/// Pair local faces by shared vertex sets; unmatched faces become boundary
/// faces tagged Dirichlet.
pub(crate) fn build_quad_topology(
    vertices: Vec<[f64; 2]>,
    elem_verts: Vec<usize>,
) -> Result<Mesh, MeshError> {
    let n_elem = elem_verts.len() / 4;
    let mut mesh = Mesh {
        dim: 2,
        vertices,
        elem_verts,
        faces: Vec::new(),
        elem_faces: vec![usize::MAX; 4 * n_elem],
        boundary_tags: Vec::new(),
    };
    let mut open: HashMap<(usize, usize), (usize, usize, (usize, usize))> = HashMap::new();
    let mut shared: HashMap<(usize, usize), usize> = HashMap::new();
    for e in 0..n_elem {
        for local in 0..4 {
            let (a, b) = mesh.local_face_verts(e, local);
            if a == b {
                return Err(MeshError::TopologyError(format!(
                    "element {e} repeats vertex {a}"
                )));
            }
            let key = (a.min(b), a.max(b));
            *shared.entry(key).or_insert(0) += 1;
            if shared[&key] > 2 {
                return Err(MeshError::TopologyError(format!(
                    "edge ({}, {}) shared by more than two elements",
                    key.0, key.1
                )));
            }
            if let Some((e0, local0, pair0)) = open.remove(&key) {
                let flip = pair0.0 == b && pair0.1 == a;
                debug_assert!(flip || (pair0.0 == a && pair0.1 == b));
                let f = mesh.faces.len();
                mesh.faces.push(Face {
                    left_elem: e0,
                    right_elem: Some(e),
                    local_left: local0,
                    local_right: local,
                    tangential_flip: flip,
                    periodic: false,
                });
                mesh.elem_faces[4 * e0 + local0] = f;
                mesh.elem_faces[4 * e + local] = f;
            } else {
                open.insert(key, (e, local, (a, b)));
            }
        }
    }
    // Remaining open edges are domain boundary, in deterministic order.
    let mut rest: Vec<_> = open.into_values().collect();
    rest.sort_by_key(|&(e, local, _)| (e, local));
    for (e, local, _) in rest {
        let f = mesh.faces.len();
        mesh.faces.push(Face {
            left_elem: e,
            right_elem: None,
            local_left: local,
            local_right: 0,
            tangential_flip: false,
            periodic: false,
        });
        mesh.elem_faces[4 * e + local] = f;
    }
    mesh.boundary_tags = mesh
        .faces
        .iter()
        .map(|f| f.is_boundary().then_some(BoundaryTag::Dirichlet))
        .collect();
    Ok(mesh)
}

/// Merge opposite boundary faces of a Cartesian mesh into periodic wrap
/// faces, checking translated congruence.
fn link_periodic_cartesian(mesh: &mut Mesh, nx: usize, ny: usize) -> Result<(), MeshError> {
    let eid = |i: usize, j: usize| j * nx + i;
    let mut pairs = Vec::new();
    for j in 0..ny {
        pairs.push((eid(nx - 1, j), 1usize, eid(0, j), 0usize));
    }
    for i in 0..nx {
        pairs.push((eid(i, ny - 1), 3usize, eid(i, 0), 2usize));
    }
    for (el, ll, er, lr) in pairs {
        let (a0, b0) = mesh.local_face_verts(el, ll);
        let (a1, b1) = mesh.local_face_verts(er, lr);
        let d0 = edge_vec(&mesh.vertices, a0, b0);
        let d1 = edge_vec(&mesh.vertices, a1, b1);
        if (d0[0] - d1[0]).abs() > 1e-10 || (d0[1] - d1[1]).abs() > 1e-10 {
            return Err(MeshError::TopologyError(
                "periodic partners are not congruent".into(),
            ));
        }
        let old_l = mesh.elem_faces[4 * el + ll];
        let old_r = mesh.elem_faces[4 * er + lr];
        let f = old_l.min(old_r);
        let dead = old_l.max(old_r);
        mesh.faces[f] = Face {
            left_elem: el,
            right_elem: Some(er),
            local_left: ll,
            local_right: lr,
            tangential_flip: false,
            periodic: true,
        };
        mesh.elem_faces[4 * el + ll] = f;
        mesh.elem_faces[4 * er + lr] = f;
        remove_face(mesh, dead);
    }
    Ok(())
}

fn edge_vec(vertices: &[[f64; 2]], a: usize, b: usize) -> [f64; 2] {
    [
        vertices[b][0] - vertices[a][0],
        vertices[b][1] - vertices[a][1],
    ]
}

/// Delete a face and renumber references to the ids above it.
fn remove_face(mesh: &mut Mesh, f: usize) {
    mesh.faces.remove(f);
    mesh.boundary_tags.remove(f);
    for id in mesh.elem_faces.iter_mut() {
        debug_assert_ne!(*id, f);
        if *id != usize::MAX && *id > f {
            *id -= 1;
        }
    }
}

/// Split every quad into four through the edge midpoints. Boundary tags are
/// inherited from the parent edges; periodic wrap faces are re-linked between
/// the matching children.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    assert_eq!(mesh.dim, 2, "uniform refinement is defined for quad meshes");
    let nv = mesh.vertices.len();
    let mut vertices = mesh.vertices.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 2]>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoint.entry(key).or_insert_with(|| {
            let p = [
                0.5 * (vertices[a][0] + vertices[b][0]),
                0.5 * (vertices[a][1] + vertices[b][1]),
            ];
            vertices.push(p);
            vertices.len() - 1
        })
    };
    let mut elem_verts = Vec::with_capacity(16 * mesh.n_elements());
    for e in 0..mesh.n_elements() {
        let vs: [usize; 4] = mesh.element(e).try_into().unwrap();
        let m01 = mid(vs[0], vs[1], &mut vertices);
        let m12 = mid(vs[1], vs[2], &mut vertices);
        let m32 = mid(vs[3], vs[2], &mut vertices);
        let m03 = mid(vs[0], vs[3], &mut vertices);
        let c = {
            let p = [
                0.25 * (vertices[vs[0]][0] + vertices[vs[1]][0] + vertices[vs[2]][0] + vertices[vs[3]][0]),
                0.25 * (vertices[vs[0]][1] + vertices[vs[1]][1] + vertices[vs[2]][1] + vertices[vs[3]][1]),
            ];
            vertices.push(p);
            vertices.len() - 1
        };
        elem_verts.extend_from_slice(&[vs[0], m01, c, m03]);
        elem_verts.extend_from_slice(&[m01, vs[1], m12, c]);
        elem_verts.extend_from_slice(&[c, m12, vs[2], m32]);
        elem_verts.extend_from_slice(&[m03, c, m32, vs[3]]);
    }
    let mut refined =
        build_quad_topology(vertices, elem_verts).expect("refinement preserves valid topology");

    // Index the refined boundary faces by their vertex pair.
    let mut by_edge: HashMap<(usize, usize), usize> = HashMap::new();
    for (f, face) in refined.faces.iter().enumerate() {
        if face.is_boundary() {
            let (a, b) = refined.local_face_verts(face.left_elem, face.local_left);
            by_edge.insert((a.min(b), a.max(b)), f);
        }
    }
    let child_edges = |a: usize, b: usize| {
        let key = (a.min(b), a.max(b));
        let m = midpoint[&key];
        [(a.min(m), a.max(m)), (m.min(b), m.max(b))]
    };

    // Inherit tags from parent boundary edges; collect periodic re-links.
    let mut relink = Vec::new();
    for (pf, face) in mesh.faces.iter().enumerate() {
        let (a, b) = mesh.local_face_verts(face.left_elem, face.local_left);
        debug_assert!(a < nv && b < nv);
        if face.is_boundary() {
            let tag = mesh.boundary_tags[pf].unwrap_or(BoundaryTag::Dirichlet);
            for key in child_edges(a, b) {
                let f = by_edge[&key];
                refined.boundary_tags[f] = Some(tag);
            }
        } else if face.periodic {
            let (a1, b1) = mesh.local_face_verts(
                face.right_elem.unwrap(),
                face.local_right,
            );
            let left = child_edges(a, b);
            let right = child_edges(a1, b1);
            // With a flip the sub-edges pair up in reversed order.
            let (r0, r1) = if face.tangential_flip {
                (right[1], right[0])
            } else {
                (right[0], right[1])
            };
            relink.push((left[0], r0, face.tangential_flip));
            relink.push((left[1], r1, face.tangential_flip));
        }
    }
    for (le, re, flip) in relink {
        let fl = by_edge[&le];
        let fr = by_edge[&re];
        let (el, ll) = (refined.faces[fl].left_elem, refined.faces[fl].local_left);
        let (er, lr) = (refined.faces[fr].left_elem, refined.faces[fr].local_left);
        let keep = fl.min(fr);
        let dead = fl.max(fr);
        refined.faces[keep] = Face {
            left_elem: el,
            right_elem: Some(er),
            local_left: ll,
            local_right: lr,
            tangential_flip: flip,
            periodic: true,
        };
        refined.boundary_tags[keep] = None;
        refined.elem_faces[4 * el + ll] = keep;
        refined.elem_faces[4 * er + lr] = keep;
        remove_face(&mut refined, dead);
        for v in by_edge.values_mut() {
            if *v > dead {
                *v -= 1;
            }
        }
    }
    refined.validate().expect("refined mesh is valid");
    refined
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn interval_periodic_merges_wrap_face() {
        let m = uniform_interval_mesh(3, (0.0, 1.0), true).unwrap();
        assert_eq!(m.n_elements(), 3);
        assert_eq!(m.faces.len(), 3);
        assert!(m.faces.iter().all(|f| !f.is_boundary()));
    }

    #[test]
    fn interval_single_element() {
        let m = uniform_interval_mesh(1, (0.0, 1.0), false).unwrap();
        assert_eq!(m.n_elements(), 1);
        assert_eq!(m.faces.iter().filter(|f| f.is_boundary()).count(), 2);
    }

    #[test]
    fn interval_widths() {
        let m = uniform_interval_mesh(4, (0.0, 2.0), false).unwrap();
        for e in 0..4 {
            assert_abs_diff_eq!(m.element_map(e).measure(), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn interval_rejects_bad_domain() {
        assert!(uniform_interval_mesh(3, (1.0, 1.0), false).is_err());
    }

    #[test]
    fn cartesian_3x3_face_counts() {
        let m = cartesian_quad_mesh(3, 3, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
        assert_eq!(m.n_elements(), 9);
        // Brute-force edge enumeration: 9 quads, 24 distinct edges.
        assert_eq!(m.faces.len(), 24);
        assert_eq!(m.faces.iter().filter(|f| !f.is_boundary()).count(), 12);
        assert_eq!(m.faces.iter().filter(|f| f.is_boundary()).count(), 12);
        assert!(m.faces.iter().all(|f| !f.tangential_flip));
    }

    #[test]
    fn cartesian_1x1() {
        let m = cartesian_quad_mesh(1, 1, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
        assert_eq!(m.n_elements(), 1);
        assert_eq!(m.faces.len(), 4);
        assert!(m.faces.iter().all(|f| f.is_boundary()));
    }

    #[test]
    fn cartesian_2x1_interior_face_orientation() {
        let m = cartesian_quad_mesh(2, 1, ((0.0, 2.0), (0.0, 1.0)), false).unwrap();
        let f = m.faces.iter().find(|f| !f.is_boundary()).unwrap();
        assert_eq!(f.left_elem, 0);
        assert_eq!(f.right_elem, Some(1));
        assert_eq!(f.local_left, 1);
        assert_eq!(f.local_right, 0);
    }

    #[test]
    fn cartesian_jacobian_is_quarter_cell_area() {
        let m = cartesian_quad_mesh(3, 2, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
        let map = m.element_map(4);
        let want = (1.0 / 3.0) * (1.0 / 2.0) / 4.0;
        for &(xi, eta) in &[(-0.3, 0.8), (0.0, 0.0), (0.9, -0.9)] {
            assert_abs_diff_eq!(map.jacobian_det(xi, eta), want, epsilon = 1e-13);
        }
    }

    #[test]
    fn periodic_cartesian_all_faces_interior() {
        let m = cartesian_quad_mesh(3, 3, ((0.0, 1.0), (0.0, 1.0)), true).unwrap();
        assert_eq!(m.faces.len(), 18);
        assert!(m.faces.iter().all(|f| !f.is_boundary()));
        assert_eq!(m.faces.iter().filter(|f| f.periodic).count(), 6);
    }

    #[test]
    fn refine_cartesian_quadruples_elements() {
        let m = cartesian_quad_mesh(3, 3, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
        let r = refine_uniform(&m);
        assert_eq!(r.n_elements(), 36);
        let rr = refine_uniform(&r);
        assert_eq!(rr.n_elements(), 144);
        assert_abs_diff_eq!(rr.total_area(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn refine_inherits_boundary_tags() {
        let mut m = cartesian_quad_mesh(2, 2, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
        // Tag the whole bottom edge Neumann.
        let bottom: Vec<usize> = m
            .faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_boundary())
            .filter(|(_, f)| {
                let (a, b) = m.local_face_verts(f.left_elem, f.local_left);
                m.vertices[a][1] == 0.0 && m.vertices[b][1] == 0.0
            })
            .map(|(i, _)| i)
            .collect();
        for f in bottom {
            m.set_boundary_tag(f, BoundaryTag::Neumann);
        }
        let r = refine_uniform(&m);
        let n_neumann = r
            .boundary_tags
            .iter()
            .filter(|t| **t == Some(BoundaryTag::Neumann))
            .count();
        assert_eq!(n_neumann, 4);
    }

    #[test]
    fn refine_periodic_relinks_wrap_faces() {
        let m = cartesian_quad_mesh(2, 2, ((0.0, 1.0), (0.0, 1.0)), true).unwrap();
        let r = refine_uniform(&m);
        assert_eq!(r.n_elements(), 16);
        assert!(r.faces.iter().all(|f| !f.is_boundary()));
        assert_eq!(r.faces.iter().filter(|f| f.periodic).count(), 8);
    }

    #[test]
    fn refine_preserves_area_on_skewed_mesh() {
        let vertices = vec![
            [0.0, 0.0],
            [1.1, 0.0],
            [2.0, 0.1],
            [0.0, 0.9],
            [1.0, 1.1],
            [2.1, 1.0],
        ];
        let elem_verts = vec![0, 1, 4, 3, 1, 2, 5, 4];
        let m = build_quad_topology(vertices, elem_verts).unwrap();
        m.validate().unwrap();
        let area = m.total_area();
        let r = refine_uniform(&m);
        assert_eq!(r.n_elements(), 8);
        assert_abs_diff_eq!(r.total_area(), area, epsilon = 1e-12);
        // Interior faces by brute-force edge count: 8 quads, shared edges.
        let interior = r.faces.iter().filter(|f| !f.is_boundary()).count();
        assert_eq!(interior, 10);
    }

    #[test]
    fn face_handshake_counts() {
        let m = cartesian_quad_mesh(4, 3, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
        let mut seen = vec![0usize; m.faces.len()];
        for e in 0..m.n_elements() {
            for &f in m.element_faces(e) {
                seen[f] += 1;
            }
        }
        for (f, face) in m.faces.iter().enumerate() {
            assert_eq!(seen[f], if face.is_boundary() { 1 } else { 2 });
        }
    }
}
