//! Per-element node placement: tensor-product lattices of the closed, open
//! and half-closed 1D families, with the Gauss-Radau orientation of each
//! dimension chosen by the switch function, plus global numbering and
//! face-node membership.

use crate::mesh::Mesh;
use crate::quadrature::{make_basis, Basis1D, NodeFamily, RadauSide};
use crate::switch::SwitchFunction;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("element {elem} sees equal switch signs on opposite faces of dimension {dim}; half-closed layouts need alternation")]
    AlternationViolated { elem: usize, dim: usize },
    #[error(transparent)]
    Quadrature(#[from] crate::quadrature::QuadratureError),
}

/// Node family kind, without the per-dimension Radau orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyKind {
    Closed,
    Open,
    HalfClosed,
}

impl FamilyKind {
    pub fn label(self) -> &'static str {
        match self {
            FamilyKind::Closed => "closed",
            FamilyKind::Open => "open",
            FamilyKind::HalfClosed => "halfclosed",
        }
    }
}

/// Element -> contiguous global index range. All elements carry the same
/// number of nodes, (p+1)^d.
#[derive(Debug, Clone)]
pub struct GlobalNumbering {
    pub nodes_per_elem: usize,
    pub n_elems: usize,
}

impl GlobalNumbering {
    pub fn total(&self) -> usize {
        self.nodes_per_elem * self.n_elems
    }

    pub fn range(&self, e: usize) -> (usize, usize) {
        (e * self.nodes_per_elem, (e + 1) * self.nodes_per_elem)
    }

    pub fn global(&self, e: usize, local: usize) -> usize {
        debug_assert!(local < self.nodes_per_elem);
        e * self.nodes_per_elem + local
    }

    pub fn element_of(&self, node: usize) -> usize {
        node / self.nodes_per_elem
    }

    pub fn block_index(&self) -> Vec<(usize, usize)> {
        (0..self.n_elems).map(|e| self.range(e)).collect()
    }
}

/// The node lattice of one element: a 1D basis per dimension (x-fastest
/// local ordering) and the explicit node sets of each local face.
#[derive(Debug, Clone)]
pub struct ElementLayout {
    pub bases: Vec<Arc<Basis1D>>,
    /// Local node ids on each local face; empty when no nodes lie on it.
    pub face_nodes: Vec<Vec<usize>>,
}

impl ElementLayout {
    pub fn dim(&self) -> usize {
        self.bases.len()
    }

    pub fn n1d(&self) -> usize {
        self.bases[0].n
    }

    pub fn nodes_per_elem(&self) -> usize {
        self.bases.iter().map(|b| b.n).product()
    }

    pub fn basis(&self, d: usize) -> &Basis1D {
        &self.bases[d]
    }

    /// Local id of the lattice node with per-dimension indices.
    pub fn node_id(&self, i: usize, j: usize) -> usize {
        if self.dim() == 1 {
            i
        } else {
            j * self.n1d() + i
        }
    }

    /// Reference coordinates of a local node.
    pub fn node_ref(&self, local: usize) -> (f64, f64) {
        let n = self.n1d();
        if self.dim() == 1 {
            (self.bases[0].nodes[local], 0.0)
        } else {
            (self.bases[0].nodes[local % n], self.bases[1].nodes[local / n])
        }
    }

    /// Normal dimension of a local face and whether it sits at +1.
    pub fn face_axis(&self, local: usize) -> (usize, bool) {
        (local / 2, local % 2 == 1)
    }

    /// Tangential dimension of a local face (2D).
    pub fn face_tangent_dim(&self, local: usize) -> usize {
        1 - local / 2
    }
}

/// Node layouts for every element of a mesh, sharing the 1D bases.
#[derive(Debug, Clone)]
pub struct Layouts {
    pub family: FamilyKind,
    pub p: usize,
    pub per_elem: Vec<ElementLayout>,
    pub numbering: GlobalNumbering,
}

impl Layouts {
    pub fn elem(&self, e: usize) -> &ElementLayout {
        &self.per_elem[e]
    }
}

/// Build layouts on a mesh. Half-closed layouts orient each dimension's
/// Gauss-Radau basis so the closed endpoint lies on the face whose switch
/// value (seen from the element) is +1; closed and open layouts ignore the
/// switch.
pub fn build_layouts(
    mesh: &Mesh,
    s: &SwitchFunction,
    family: FamilyKind,
    p: usize,
) -> Result<Layouts, LayoutError> {
    let dim = mesh.dim;
    let shared: Option<Arc<Basis1D>> = match family {
        FamilyKind::Closed => Some(Arc::new(make_basis(NodeFamily::GaussLobatto, p)?)),
        FamilyKind::Open => Some(Arc::new(make_basis(NodeFamily::GaussLegendre, p)?)),
        FamilyKind::HalfClosed => None,
    };
    let radau_left = Arc::new(make_basis(NodeFamily::GaussRadau(RadauSide::Left), p)?);
    let radau_right = Arc::new(make_basis(NodeFamily::GaussRadau(RadauSide::Right), p)?);

    let mut per_elem = Vec::with_capacity(mesh.n_elements());
    for e in 0..mesh.n_elements() {
        let mut bases = Vec::with_capacity(dim);
        for d in 0..dim {
            let b = match family {
                FamilyKind::Closed | FamilyKind::Open => shared.clone().unwrap(),
                FamilyKind::HalfClosed => {
                    let faces = mesh.element_faces(e);
                    let minus = s.seen_by(mesh, faces[2 * d], e);
                    let plus = s.seen_by(mesh, faces[2 * d + 1], e);
                    if minus == plus {
                        return Err(LayoutError::AlternationViolated { elem: e, dim: d });
                    }
                    if plus > 0 {
                        radau_right.clone()
                    } else {
                        radau_left.clone()
                    }
                }
            };
            bases.push(b);
        }
        let mut layout = ElementLayout {
            bases,
            face_nodes: Vec::new(),
        };
        layout.face_nodes = face_node_sets(&layout);
        per_elem.push(layout);
    }
    let numbering = GlobalNumbering {
        nodes_per_elem: per_elem[0].nodes_per_elem(),
        n_elems: per_elem.len(),
    };
    Ok(Layouts {
        family,
        p,
        per_elem,
        numbering,
    })
}

/// Index of the node sitting exactly at an endpoint, if any.
fn endpoint_index(b: &Basis1D, plus: bool) -> Option<usize> {
    if plus {
        (b.nodes[b.n - 1] == 1.0).then_some(b.n - 1)
    } else {
        (b.nodes[0] == -1.0).then_some(0)
    }
}

fn face_node_sets(layout: &ElementLayout) -> Vec<Vec<usize>> {
    let dim = layout.dim();
    let mut out = vec![Vec::new(); 2 * dim];
    for (local, slot) in out.iter_mut().enumerate() {
        let (axis, plus) = layout.face_axis(local);
        let Some(k) = endpoint_index(layout.basis(axis), plus) else {
            continue;
        };
        if dim == 1 {
            *slot = vec![k];
        } else {
            let nt = layout.basis(1 - axis).n;
            *slot = (0..nt)
                .map(|t| {
                    if axis == 0 {
                        layout.node_id(k, t)
                    } else {
                        layout.node_id(t, k)
                    }
                })
                .collect();
        }
    }
    out
}

/// Physical coordinates of every global node, element lattices mapped
/// through the element geometry. Periodic meshes duplicate positions across
/// partner faces since DG nodes are element-local.
pub fn physical_node_coords(mesh: &Mesh, layouts: &Layouts) -> Vec<[f64; 2]> {
    let mut coords = Vec::with_capacity(layouts.numbering.total());
    for e in 0..mesh.n_elements() {
        let map = mesh.element_map(e);
        let layout = layouts.elem(e);
        for local in 0..layout.nodes_per_elem() {
            let (xi, eta) = layout.node_ref(local);
            coords.push(map.to_physical(xi, eta));
        }
    }
    coords
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{cartesian_quad_mesh, uniform_interval_mesh};
    use crate::switch::{assign_switch_quad, SwitchFunction};
    use approx::assert_abs_diff_eq;

    /// Stored per-face values that make element `e` see the given signs in
    /// local face order.
    fn switch_seen_by(m: &Mesh, e: usize, seen: &[i8]) -> SwitchFunction {
        let mut vals = vec![1i8; m.faces.len()];
        for (loc, &f) in m.element_faces(e).iter().enumerate() {
            vals[f] = if m.side_of(f, e) == 0 { seen[loc] } else { -seen[loc] };
        }
        SwitchFunction::from_left_values(vals)
    }

    #[test]
    fn interval_halfclosed_nodes_sit_on_switch_positive_faces() {
        let m = uniform_interval_mesh(2, (0.0, 1.0), false).unwrap();
        let s = assign_switch_quad(&m, 0).unwrap();
        let l = build_layouts(&m, &s, FamilyKind::HalfClosed, 1).unwrap();
        let f = m.faces.iter().position(|f| !f.is_boundary()).unwrap();
        let face = &m.faces[f];
        let left_has = !l.elem(face.left_elem).face_nodes[face.local_left].is_empty();
        let right_has = !l.elem(face.right_elem.unwrap()).face_nodes[face.local_right].is_empty();
        assert_ne!(left_has, right_has);
        let holder = if left_has { face.left_elem } else { face.right_elem.unwrap() };
        assert_eq!(s.seen_by(&m, f, holder), 1, "nodes must sit on the S=+1 side");
    }

    #[test]
    fn single_quad_p1_layout_matches_hand_enumeration() {
        let m = cartesian_quad_mesh(1, 1, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
        let s = switch_seen_by(&m, 0, &[-1, 1, -1, 1]);
        let l = build_layouts(&m, &s, FamilyKind::HalfClosed, 1).unwrap();
        let e = l.elem(0);
        assert_eq!(e.nodes_per_elem(), 4);
        // Closed ends at +1 in both dims: one node at the (+x, +y) corner.
        let coords = physical_node_coords(&m, &l);
        let corner = coords
            .iter()
            .filter(|c| (c[0] - 1.0).abs() < 1e-14 && (c[1] - 1.0).abs() < 1e-14)
            .count();
        assert_eq!(corner, 1);
        assert_eq!(e.face_nodes[1].len(), 2);
        assert_eq!(e.face_nodes[3].len(), 2);
        assert!(e.face_nodes[0].is_empty());
        assert!(e.face_nodes[2].is_empty());
    }

    #[test]
    fn closed_p2_every_face_holds_three_nodes() {
        let m = cartesian_quad_mesh(1, 1, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
        let s = assign_switch_quad(&m, 0).unwrap();
        let l = build_layouts(&m, &s, FamilyKind::Closed, 2).unwrap();
        let e = l.elem(0);
        assert_eq!(e.nodes_per_elem(), 9);
        for local in 0..4 {
            assert_eq!(e.face_nodes[local].len(), 3);
        }
    }

    #[test]
    fn open_layout_has_no_face_nodes() {
        let m = cartesian_quad_mesh(2, 2, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
        let s = assign_switch_quad(&m, 0).unwrap();
        let l = build_layouts(&m, &s, FamilyKind::Open, 2).unwrap();
        for e in 0..4 {
            assert!(l.elem(e).face_nodes.iter().all(|f| f.is_empty()));
        }
    }

    #[test]
    fn halfclosed_interior_faces_covered_exactly_once() {
        let m = cartesian_quad_mesh(4, 3, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
        for seed in [0, 1, 2] {
            let s = assign_switch_quad(&m, seed).unwrap();
            let l = build_layouts(&m, &s, FamilyKind::HalfClosed, 2).unwrap();
            for (f, face) in m.faces.iter().enumerate() {
                if face.is_boundary() {
                    continue;
                }
                let left = !l.elem(face.left_elem).face_nodes[face.local_left].is_empty();
                let right =
                    !l.elem(face.right_elem.unwrap()).face_nodes[face.local_right].is_empty();
                assert!(left ^ right, "face {f} covered left={left} right={right}");
            }
        }
    }

    #[test]
    fn closed_face_positions_coincide_across_conforming_faces() {
        let m = cartesian_quad_mesh(2, 2, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
        let s = assign_switch_quad(&m, 0).unwrap();
        let l = build_layouts(&m, &s, FamilyKind::Closed, 2).unwrap();
        let coords = physical_node_coords(&m, &l);
        for face in m.faces.iter().filter(|f| !f.is_boundary()) {
            let a = &l.elem(face.left_elem).face_nodes[face.local_left];
            let b = &l.elem(face.right_elem.unwrap()).face_nodes[face.local_right];
            let ga: Vec<_> = a
                .iter()
                .map(|&loc| coords[l.numbering.global(face.left_elem, loc)])
                .collect();
            for &loc in b {
                let p = coords[l.numbering.global(face.right_elem.unwrap(), loc)];
                assert!(
                    ga.iter()
                        .any(|q| (q[0] - p[0]).abs() < 1e-12 && (q[1] - p[1]).abs() < 1e-12),
                    "face node does not pair up"
                );
            }
        }
    }

    #[test]
    fn dependent_count_is_p_to_the_d() {
        let m = cartesian_quad_mesh(3, 2, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
        let s = assign_switch_quad(&m, 5).unwrap();
        for p in 1..=3 {
            let l = build_layouts(&m, &s, FamilyKind::HalfClosed, p).unwrap();
            for e in 0..m.n_elements() {
                let layout = l.elem(e);
                let on_positive: std::collections::HashSet<usize> = m
                    .element_faces(e)
                    .iter()
                    .enumerate()
                    .filter(|(_, &f)| s.seen_by(&m, f, e) > 0)
                    .flat_map(|(loc, _)| layout.face_nodes[loc].iter().copied())
                    .collect();
                let dependent = layout.nodes_per_elem() - on_positive.len();
                assert_eq!(dependent, p * p);
            }
        }
    }

    #[test]
    fn interval_radau_left_coords() {
        let m = uniform_interval_mesh(1, (0.0, 1.0), false).unwrap();
        let s = switch_seen_by(&m, 0, &[1, -1]);
        let l = build_layouts(&m, &s, FamilyKind::HalfClosed, 1).unwrap();
        let coords = physical_node_coords(&m, &l);
        assert_abs_diff_eq!(coords[0][0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(coords[1][0], 2.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn alternation_violation_rejected() {
        let m = uniform_interval_mesh(2, (0.0, 1.0), false).unwrap();
        // All faces +1 from the left: element 0 sees +1 on both its faces.
        let s = SwitchFunction::from_left_values(vec![1; m.faces.len()]);
        match build_layouts(&m, &s, FamilyKind::HalfClosed, 1) {
            Err(LayoutError::AlternationViolated { .. }) => {}
            other => panic!("expected alternation violation, got {other:?}"),
        }
    }
}
