//! Face quadrature and trace data.
//!
//! Interior faces of half-closed layouts use the aligned rule: the
//! quadrature points are the tangential node positions of the element
//! WITHOUT nodes on the face, so that side needs line interpolation only
//! while the node-bearing side interpolates its face nodes to the points.
//! Closed layouts collocate at the shared Lobatto face nodes. Open layouts
//! use p+2 Gauss-Legendre points, which keeps their off-diagonal blocks
//! fully dense. Exact mode over-integrates every face with p+2 points.

use crate::layout::{FamilyKind, Layouts};
use crate::mesh::Mesh;
use crate::quadrature::{make_basis, NodeFamily};
use nalgebra::DMatrix;

use super::QuadratureMode;

/// Quadrature and per-side trace data for one mesh face.
pub struct FaceQuadrature {
    /// Quadrature points in the left side's tangential coordinate.
    pub points: Vec<f64>,
    /// Reference weights (sum 2 on faces of 2D meshes, single 1.0 in 1D).
    pub weights: Vec<f64>,
    /// Physical arc length per unit reference length (|edge|/2; 1.0 in 1D).
    pub arc_scale: f64,
    /// Per present side: outward normal (constant on straight faces).
    pub normals: Vec<[f64; 2]>,
    /// Per present side: trace matrix, n_q x nodes_per_elem.
    pub traces: Vec<DMatrix<f64>>,
    /// Per present side: physical coordinates of the quadrature points.
    pub phys_points: Vec<Vec<[f64; 2]>>,
}

impl FaceQuadrature {
    pub fn n_sides(&self) -> usize {
        self.traces.len()
    }

    pub fn build(mesh: &Mesh, layouts: &Layouts, f: usize, mode: QuadratureMode) -> Self {
        if mesh.dim == 1 {
            Self::build_1d(mesh, layouts, f)
        } else {
            Self::build_2d(mesh, layouts, f, mode)
        }
    }

    fn build_1d(mesh: &Mesh, layouts: &Layouts, f: usize) -> Self {
        let face = &mesh.faces[f];
        let n_sides = if face.is_boundary() { 1 } else { 2 };
        let mut normals = Vec::new();
        let mut traces = Vec::new();
        let mut phys_points = Vec::new();
        for s in 0..n_sides {
            let (e, local) = face.side(s);
            let layout = layouts.elem(e);
            let plus = local == 1;
            let tr = layout.basis(0).trace(plus);
            let mut t = DMatrix::zeros(1, layout.nodes_per_elem());
            for (j, v) in tr.iter().enumerate() {
                t[(0, j)] = *v;
            }
            traces.push(t);
            normals.push([if plus { 1.0 } else { -1.0 }, 0.0]);
            let map = mesh.element_map(e);
            phys_points.push(vec![map.to_physical(if plus { 1.0 } else { -1.0 }, 0.0)]);
        }
        FaceQuadrature {
            points: vec![0.0],
            weights: vec![1.0],
            arc_scale: 1.0,
            normals,
            traces,
            phys_points,
        }
    }

    fn build_2d(mesh: &Mesh, layouts: &Layouts, f: usize, mode: QuadratureMode) -> Self {
        let face = &mesh.faces[f];
        let n_sides = if face.is_boundary() { 1 } else { 2 };

        // Quadrature in the left side's tangential coordinate.
        let (points, weights) = match mode {
            QuadratureMode::Exact => gauss_points(layouts.p + 2),
            QuadratureMode::Collocation => match layouts.family {
                FamilyKind::Open => gauss_points(layouts.p + 2),
                FamilyKind::Closed => {
                    let (e, local) = face.side(0);
                    let b = layouts.elem(e).basis(layouts.elem(e).face_tangent_dim(local));
                    (b.nodes.clone(), b.weights.clone())
                }
                FamilyKind::HalfClosed => {
                    // The side without nodes on this face dictates the points.
                    let bare = (0..n_sides)
                        .find(|&s| {
                            let (e, local) = face.side(s);
                            layouts.elem(e).face_nodes[local].is_empty()
                        })
                        .unwrap_or(0);
                    let (e, local) = face.side(bare);
                    let b = layouts.elem(e).basis(layouts.elem(e).face_tangent_dim(local));
                    let mut pts = b.nodes.clone();
                    let mut wts = b.weights.clone();
                    // Express in the left side's coordinate.
                    if bare == 1 && face.tangential_flip {
                        pts.iter_mut().for_each(|t| *t = -*t);
                        pts.reverse();
                        wts.reverse();
                    }
                    (pts, wts)
                }
            },
        };

        let mut normals = Vec::new();
        let mut traces = Vec::new();
        let mut phys_points = Vec::new();
        let mut arc_scale = 0.0;
        for s in 0..n_sides {
            let (e, local) = face.side(s);
            let layout = layouts.elem(e);
            // This side's tangential coordinates of the quadrature points.
            let own: Vec<f64> = if s == 1 && face.tangential_flip {
                points.iter().map(|t| -t).collect()
            } else {
                points.clone()
            };
            let (axis, plus) = layout.face_axis(local);
            let tdim = layout.face_tangent_dim(local);
            let tr = layout.basis(axis).trace(plus);
            let tang = layout.basis(tdim).interp_to(&own);
            let n1 = layout.n1d();
            let mut t = DMatrix::zeros(own.len(), layout.nodes_per_elem());
            for q in 0..own.len() {
                for ka in 0..n1 {
                    if tr[ka] == 0.0 {
                        continue;
                    }
                    for kt in 0..n1 {
                        let v = tr[ka] * tang[(q, kt)];
                        if v == 0.0 {
                            continue;
                        }
                        let id = if axis == 0 {
                            layout.node_id(ka, kt)
                        } else {
                            layout.node_id(kt, ka)
                        };
                        t[(q, id)] = v;
                    }
                }
            }
            traces.push(t);

            // Straight edge geometry in this side's tangential order.
            let (va, vb) = mesh.local_face_verts(e, local);
            let a = mesh.vertices[va];
            let b = mesh.vertices[vb];
            let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
            arc_scale = 0.5 * len;
            let tangent = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
            let mut normal = [tangent[1], -tangent[0]];
            // Orient outward using the element centroid.
            let verts = mesh.element(e);
            let cx = verts.iter().map(|&v| mesh.vertices[v][0]).sum::<f64>() / 4.0;
            let cy = verts.iter().map(|&v| mesh.vertices[v][1]).sum::<f64>() / 4.0;
            let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
            if normal[0] * (mid[0] - cx) + normal[1] * (mid[1] - cy) < 0.0 {
                normal = [-normal[0], -normal[1]];
            }
            normals.push(normal);
            phys_points.push(
                own.iter()
                    .map(|&t| {
                        [
                            a[0] + 0.5 * (t + 1.0) * (b[0] - a[0]),
                            a[1] + 0.5 * (t + 1.0) * (b[1] - a[1]),
                        ]
                    })
                    .collect(),
            );
        }
        FaceQuadrature {
            points,
            weights,
            arc_scale,
            normals,
            traces,
            phys_points,
        }
    }
}

/// n-point Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_points(n: usize) -> (Vec<f64>, Vec<f64>) {
    let b = make_basis(NodeFamily::GaussLegendre, n - 1).expect("gauss basis");
    (b.nodes, b.weights)
}
