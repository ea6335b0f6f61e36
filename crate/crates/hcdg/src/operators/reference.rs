//! Dense, over-integrated reference assembly.
//!
//! Every integral here is evaluated with p+2 Gauss-Legendre points per
//! direction (exact for the bilinear-geometry integrands of straight-sided
//! elements), with dense mass blocks and full trace interpolation on faces.
//! This is the independent oracle the sparse collocation assembly is tested
//! against, and the engine behind the basis-independence spectrum check.

use super::{dirichlet_penalty_rows, flux_sides, FaceQuadrature, QuadratureMode, SideRule};
use crate::layout::Layouts;
use crate::mesh::Mesh;
use crate::switch::SwitchFunction;
use nalgebra::{Cholesky, DMatrix};

/// Tensor Gauss data on one element: quadrature weights, |J| and metric
/// adjugate at the points, basis values and reference-derivative values.
struct VolumeData {
    w: Vec<f64>,
    det: Vec<f64>,
    adj: Vec<[[f64; 2]; 2]>,
    values: DMatrix<f64>,
    dref: Vec<DMatrix<f64>>,
}

fn volume_data(mesh: &Mesh, layouts: &Layouts, e: usize) -> VolumeData {
    let layout = layouts.elem(e);
    let map = mesh.element_map(e);
    let nq1 = layouts.p + 2;
    let (gx, gw) = super::gauss_points(nq1);
    if layout.dim() == 1 {
        let b = layout.basis(0);
        let values = b.interp_to(&gx);
        let dref = &values * &b.diff;
        let det = gx.iter().map(|&x| map.jacobian_det(x, 0.0)).collect();
        return VolumeData {
            w: gw,
            det,
            adj: vec![[[1.0, 0.0], [0.0, 1.0]]; nq1],
            values,
            dref: vec![dref],
        };
    }
    let (bx, by) = (layout.basis(0), layout.basis(1));
    let vx = bx.interp_to(&gx);
    let vy = by.interp_to(&gx);
    let dvx = &vx * &bx.diff;
    let dvy = &vy * &by.diff;
    let n = layout.nodes_per_elem();
    let nq = nq1 * nq1;
    let mut values = DMatrix::zeros(nq, n);
    let mut d0 = DMatrix::zeros(nq, n);
    let mut d1 = DMatrix::zeros(nq, n);
    let mut w = Vec::with_capacity(nq);
    let mut det = Vec::with_capacity(nq);
    let mut adj = Vec::with_capacity(nq);
    for qb in 0..nq1 {
        for qa in 0..nq1 {
            let q = qb * nq1 + qa;
            w.push(gw[qa] * gw[qb]);
            det.push(map.jacobian_det(gx[qa], gx[qb]));
            adj.push(map.jacobian_adjugate(gx[qa], gx[qb]));
            for ib in 0..layout.n1d() {
                for ia in 0..layout.n1d() {
                    let i = layout.node_id(ia, ib);
                    values[(q, i)] = vx[(qa, ia)] * vy[(qb, ib)];
                    d0[(q, i)] = dvx[(qa, ia)] * vy[(qb, ib)];
                    d1[(q, i)] = vx[(qa, ia)] * dvy[(qb, ib)];
                }
            }
        }
    }
    VolumeData {
        w,
        det,
        adj,
        values,
        dref: vec![d0, d1],
    }
}

/// Exactly integrated mass block of one element.
pub fn element_mass_block(mesh: &Mesh, layouts: &Layouts, e: usize) -> DMatrix<f64> {
    let vd = volume_data(mesh, layouts, e);
    let n = vd.values.ncols();
    let mut m = DMatrix::zeros(n, n);
    for q in 0..vd.w.len() {
        let scale = vd.w[q] * vd.det[q];
        for i in 0..n {
            let vi = vd.values[(q, i)];
            if vi == 0.0 {
                continue;
            }
            for j in 0..n {
                m[(i, j)] += scale * vi * vd.values[(q, j)];
            }
        }
    }
    m
}

/// Dense block-diagonal mass matrix.
pub fn ref_mass(mesh: &Mesh, layouts: &Layouts) -> DMatrix<f64> {
    let total = layouts.numbering.total();
    let mut m = DMatrix::zeros(total, total);
    for e in 0..mesh.n_elements() {
        let block = element_mass_block(mesh, layouts, e);
        let (lo, _) = layouts.numbering.range(e);
        m.view_mut((lo, lo), (block.nrows(), block.ncols()))
            .copy_from(&block);
    }
    m
}

/// Dense divergence-form operator with the given flux-side rule.
pub(crate) fn ref_div_form(
    mesh: &Mesh,
    layouts: &Layouts,
    s: Option<&SwitchFunction>,
    rule: SideRule,
    d: usize,
) -> DMatrix<f64> {
    let numbering = &layouts.numbering;
    let total = numbering.total();
    let mut a = DMatrix::zeros(total, total);
    for e in 0..mesh.n_elements() {
        let vd = volume_data(mesh, layouts, e);
        let (lo, _) = numbering.range(e);
        let n = vd.values.ncols();
        // The adjugate already carries |J|, so the volume weight is w alone.
        for q in 0..vd.w.len() {
            for i in 0..n {
                let mut di = 0.0;
                for (r, dref) in vd.dref.iter().enumerate() {
                    di += vd.adj[q][r][d] * dref[(q, i)];
                }
                if di == 0.0 {
                    continue;
                }
                let scale = vd.w[q] * di;
                for j in 0..n {
                    a[(lo + i, lo + j)] += scale * vd.values[(q, j)];
                }
            }
        }
    }
    for f in 0..mesh.faces.len() {
        let face = &mesh.faces[f];
        let fq = FaceQuadrature::build(mesh, layouts, f, QuadratureMode::Exact);
        let flux = flux_sides(mesh, s, rule, f).expect("switch supplied");
        for rs in 0..fq.n_sides() {
            let nd = fq.normals[rs][d];
            if nd == 0.0 {
                continue;
            }
            let (er, _) = face.side(rs);
            let (rlo, _) = numbering.range(er);
            let tr = &fq.traces[rs];
            for &(cs, wf) in &flux {
                let (ec, _) = face.side(cs);
                let (clo, _) = numbering.range(ec);
                let tc = &fq.traces[cs];
                for q in 0..fq.weights.len() {
                    let coeff = -fq.weights[q] * fq.arc_scale * nd * wf;
                    for i in 0..tr.ncols() {
                        let ti = tr[(q, i)];
                        if ti == 0.0 {
                            continue;
                        }
                        for j in 0..tc.ncols() {
                            a[(rlo + i, clo + j)] += coeff * ti * tc[(q, j)];
                        }
                    }
                }
            }
        }
    }
    a
}

/// Dense exactly-integrated LDG Laplacian.
pub fn ref_laplacian(
    mesh: &Mesh,
    layouts: &Layouts,
    s: &SwitchFunction,
    c_d: f64,
) -> DMatrix<f64> {
    let total = layouts.numbering.total();
    let m = ref_mass(mesh, layouts);
    let chol = Cholesky::new(m).expect("mass matrix is SPD");
    let mut l = DMatrix::zeros(total, total);
    for d in 0..mesh.dim {
        let dd = ref_div_form(mesh, layouts, Some(s), SideRule::SwitchQ, d);
        let minv_dt = chol.solve(&dd.transpose());
        l -= &dd * minv_dt;
    }
    if c_d != 0.0 {
        l -= c_d * ref_penalty(mesh, layouts, s);
    }
    l
}

/// Dense Dirichlet face-mass penalty on switch-positive boundary faces.
pub fn ref_penalty(mesh: &Mesh, layouts: &Layouts, s: &SwitchFunction) -> DMatrix<f64> {
    let total = layouts.numbering.total();
    let mut p = DMatrix::zeros(total, total);
    for (f, face) in mesh.faces.iter().enumerate() {
        if !dirichlet_penalty_rows(mesh, s, f) {
            continue;
        }
        let fq = FaceQuadrature::build(mesh, layouts, f, QuadratureMode::Exact);
        let (e, _) = face.side(0);
        let (lo, _) = layouts.numbering.range(e);
        let t = &fq.traces[0];
        for q in 0..fq.weights.len() {
            let w = fq.weights[q] * fq.arc_scale;
            for i in 0..t.ncols() {
                let ti = t[(q, i)];
                if ti == 0.0 {
                    continue;
                }
                for j in 0..t.ncols() {
                    p[(lo + i, lo + j)] += w * ti * t[(q, j)];
                }
            }
        }
    }
    p
}

/// Sorted eigenvalues of the nodal Laplacian M^{-1} L, computed through the
/// symmetric similarity C^{-1} L C^{-T} with M = C C^T.
pub fn nodal_laplacian_eigs(
    mesh: &Mesh,
    layouts: &Layouts,
    s: &SwitchFunction,
    c_d: f64,
) -> Vec<f64> {
    let m = ref_mass(mesh, layouts);
    let l = ref_laplacian(mesh, layouts, s, c_d);
    let chol = Cholesky::new(m).expect("mass matrix is SPD");
    let lfac = chol.l();
    let x = lfac.solve_lower_triangular(&l).expect("triangular solve");
    let b = lfac
        .solve_lower_triangular(&x.transpose())
        .expect("triangular solve")
        .transpose();
    let sym = 0.5 * (&b + b.transpose());
    let mut eigs: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eigs
}
