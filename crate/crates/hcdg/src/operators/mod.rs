//! Sparse assembly of the DG mass, boundary mass, divergence, gradient and
//! LDG Laplacian operators, plus sparsity-pattern analytics and the
//! basis-independence spectrum check.
//!
//! Volume terms are assembled per element as differentiation matrices
//! composed with the collocation weights; face terms couple trace data
//! through the face quadrature of [`faceq`]. The gradient is constructed as
//! the negated transpose of the divergence carrying the complementary flux,
//! which keeps the LDG Laplacian symmetric by construction.

mod faceq;
pub mod reference;

pub use faceq::{gauss_points, FaceQuadrature};

use crate::layout::Layouts;
use crate::mesh::{BoundaryTag, Mesh};
use crate::sparse::{Builder, SparseOperator, SymmetryHint};
use crate::switch::SwitchFunction;
use nalgebra::DMatrix;
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("flux kind needs a switch function but none was supplied")]
    MissingSwitch,
    #[error("collocation mass diagonal has a non-positive entry at node {0}")]
    NonDiagonalMass(usize),
    #[error("system with {0} nodes exceeds the dense-diagnostics cap of {1}")]
    SystemTooLarge(usize, usize),
}

/// Numerical flux selection for first-derivative operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxKind {
    /// Minimal-dissipation LDG coupling driven by the switch.
    UpwindBySwitch,
    Central,
    TakeRight,
    TakeLeft,
}

#[derive(Debug, Clone, Copy)]
pub struct FluxSpec {
    pub kind: FluxKind,
    pub dirichlet_penalty: f64,
}

impl FluxSpec {
    pub fn upwind_by_switch(dirichlet_penalty: f64) -> Self {
        FluxSpec {
            kind: FluxKind::UpwindBySwitch,
            dirichlet_penalty,
        }
    }
}

/// Quadrature rule used during assembly. Collocation reuses the solution
/// nodes (diagonal mass for the orthogonal families); Exact over-integrates
/// with p+2 Gauss-Legendre points per direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureMode {
    Collocation,
    Exact,
}

/// Which side of a face supplies the flux value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SideRule {
    /// Value from the side whose own switch sign is negative (the LDG
    /// auxiliary-variable flux).
    SwitchQ,
    /// Value from the side whose own switch sign is positive (the LDG
    /// primal-variable flux).
    SwitchU,
    Left,
    Right,
    Central,
}

impl SideRule {
    fn complement(self) -> SideRule {
        match self {
            SideRule::SwitchQ => SideRule::SwitchU,
            SideRule::SwitchU => SideRule::SwitchQ,
            SideRule::Left => SideRule::Right,
            SideRule::Right => SideRule::Left,
            SideRule::Central => SideRule::Central,
        }
    }

    fn needs_switch(self) -> bool {
        matches!(self, SideRule::SwitchQ | SideRule::SwitchU)
    }
}

fn divergence_rule(kind: FluxKind) -> SideRule {
    match kind {
        FluxKind::UpwindBySwitch => SideRule::SwitchQ,
        FluxKind::Central => SideRule::Central,
        FluxKind::TakeLeft => SideRule::Left,
        FluxKind::TakeRight => SideRule::Right,
    }
}

fn gradient_rule(kind: FluxKind) -> SideRule {
    match kind {
        FluxKind::UpwindBySwitch => SideRule::SwitchU,
        FluxKind::Central => SideRule::Central,
        FluxKind::TakeLeft => SideRule::Left,
        FluxKind::TakeRight => SideRule::Right,
    }
}

/// Flux contributions (side, weight) on one face, or an empty list when the
/// boundary flux carries no unknowns (pure data).
pub(crate) fn flux_sides(
    mesh: &Mesh,
    s: Option<&SwitchFunction>,
    rule: SideRule,
    f: usize,
) -> Result<Vec<(usize, f64)>, OperatorError> {
    let face = &mesh.faces[f];
    if face.is_boundary() {
        let tag = mesh.boundary_tags[f].unwrap_or(BoundaryTag::Dirichlet);
        return Ok(match (rule, tag) {
            (SideRule::SwitchQ, BoundaryTag::Dirichlet) => vec![(0, 1.0)],
            (SideRule::SwitchQ, BoundaryTag::Neumann) => vec![],
            (SideRule::SwitchU, BoundaryTag::Dirichlet) => vec![],
            (SideRule::SwitchU, BoundaryTag::Neumann) => vec![(0, 1.0)],
            _ => vec![(0, 1.0)],
        });
    }
    Ok(match rule {
        SideRule::SwitchQ | SideRule::SwitchU => {
            let s = s.ok_or(OperatorError::MissingSwitch)?;
            let want = if rule == SideRule::SwitchQ { -1 } else { 1 };
            let side = if s.from_side(f, 0) == want { 0 } else { 1 };
            vec![(side, 1.0)]
        }
        SideRule::Left => vec![(0, 1.0)],
        SideRule::Right => vec![(1, 1.0)],
        SideRule::Central => vec![(0, 0.5), (1, 0.5)],
    })
}

/// Diagonal of the collocation mass matrix: tensor weight times |J| at each
/// node, indexed by the global numbering.
pub fn mass_diagonal(mesh: &Mesh, layouts: &Layouts) -> Vec<f64> {
    let mut diag = Vec::with_capacity(layouts.numbering.total());
    for e in 0..mesh.n_elements() {
        let layout = layouts.elem(e);
        let map = mesh.element_map(e);
        for local in 0..layout.nodes_per_elem() {
            let (xi, eta) = layout.node_ref(local);
            let w = if layout.dim() == 1 {
                layout.basis(0).weights[local]
            } else {
                let n = layout.n1d();
                layout.basis(0).weights[local % n] * layout.basis(1).weights[local / n]
            };
            diag.push(w * map.jacobian_det(xi, eta));
        }
    }
    diag
}

/// DG mass matrix. Collocation mode is strictly diagonal; Exact mode
/// over-integrates, which leaves dense blocks for the closed family.
pub fn assemble_mass(mesh: &Mesh, layouts: &Layouts, mode: QuadratureMode) -> SparseOperator {
    let numbering = &layouts.numbering;
    let mut b = Builder::new(numbering.total(), numbering.total());
    match mode {
        QuadratureMode::Collocation => {
            for (i, v) in mass_diagonal(mesh, layouts).into_iter().enumerate() {
                b.push(i, i, v);
            }
        }
        QuadratureMode::Exact => {
            for e in 0..mesh.n_elements() {
                let block = reference::element_mass_block(mesh, layouts, e);
                let (lo, _) = numbering.range(e);
                for i in 0..block.nrows() {
                    for j in 0..block.ncols() {
                        b.push(lo + i, lo + j, block[(i, j)]);
                    }
                }
            }
        }
    }
    let mut m = b.build(numbering.block_index());
    m.symmetry_hint = SymmetryHint::Symmetric;
    m
}

/// Face mass matrix over the face-node basis of the node-bearing side.
pub struct FaceMass {
    /// Which side carries the nodes (0 = left).
    pub side: usize,
    /// Local volume node ids spanning the face basis; empty for open
    /// layouts, where the matrix is expressed at the quadrature points.
    pub nodes: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

/// Boundary mass matrix of one face: S_ab = integral of the a-th and b-th
/// face basis functions over the face. Diagonal whenever the face nodes
/// coincide with the quadrature points.
pub fn assemble_face_mass(
    mesh: &Mesh,
    layouts: &Layouts,
    f: usize,
    mode: QuadratureMode,
) -> FaceMass {
    let face = &mesh.faces[f];
    let fq = FaceQuadrature::build(mesh, layouts, f, mode);
    let n_sides = fq.n_sides();
    let side = (0..n_sides)
        .find(|&s| {
            let (e, local) = face.side(s);
            !layouts.elem(e).face_nodes[local].is_empty()
        })
        .unwrap_or(0);
    let (e, local) = face.side(side);
    let nodes = layouts.elem(e).face_nodes[local].clone();
    if nodes.is_empty() {
        // Open layout: the natural face basis is the quadrature points.
        let n = fq.weights.len();
        let mut m = DMatrix::zeros(n, n);
        for q in 0..n {
            m[(q, q)] = fq.weights[q] * fq.arc_scale;
        }
        return FaceMass {
            side,
            nodes,
            matrix: m,
        };
    }
    let t = &fq.traces[side];
    let mut m = DMatrix::zeros(nodes.len(), nodes.len());
    for (a, &na) in nodes.iter().enumerate() {
        for (b, &nb) in nodes.iter().enumerate() {
            let mut acc = 0.0;
            for q in 0..fq.weights.len() {
                acc += fq.weights[q] * fq.arc_scale * t[(q, na)] * t[(q, nb)];
            }
            m[(a, b)] = acc;
        }
    }
    FaceMass {
        side,
        nodes,
        matrix: m,
    }
}

/// Divergence-form operator with a configurable flux-side rule; the shared
/// primitive behind the public divergence and gradient assemblies.
pub(crate) fn div_form(
    mesh: &Mesh,
    layouts: &Layouts,
    s: Option<&SwitchFunction>,
    rule: SideRule,
    d: usize,
) -> Result<SparseOperator, OperatorError> {
    assert!(d < mesh.dim, "direction {d} out of range");
    if rule.needs_switch() && s.is_none() {
        return Err(OperatorError::MissingSwitch);
    }
    let numbering = &layouts.numbering;
    let mut b = Builder::new(numbering.total(), numbering.total());

    // Volume terms: differentiation matrices composed with the collocation
    // weights and the metric adjugate.
    for e in 0..mesh.n_elements() {
        let layout = layouts.elem(e);
        let map = mesh.element_map(e);
        let (lo, _) = numbering.range(e);
        let n = layout.n1d();
        if layout.dim() == 1 {
            let basis = layout.basis(0);
            for q in 0..n {
                let factor = basis.weights[q];
                for i in 0..n {
                    b.push(lo + i, lo + q, factor * basis.diff[(q, i)]);
                }
            }
        } else {
            let (bx, by) = (layout.basis(0), layout.basis(1));
            for qb in 0..n {
                for qa in 0..n {
                    let q = layout.node_id(qa, qb);
                    let (xi, eta) = layout.node_ref(q);
                    let adj = map.jacobian_adjugate(xi, eta);
                    let w = bx.weights[qa] * by.weights[qb];
                    let f0 = w * adj[0][d];
                    if f0 != 0.0 {
                        for ia in 0..n {
                            b.push(lo + layout.node_id(ia, qb), lo + q, f0 * bx.diff[(qa, ia)]);
                        }
                    }
                    let f1 = w * adj[1][d];
                    if f1 != 0.0 {
                        for ib in 0..n {
                            b.push(lo + layout.node_id(qa, ib), lo + q, f1 * by.diff[(qb, ib)]);
                        }
                    }
                }
            }
        }
    }

    // Face terms.
    for f in 0..mesh.faces.len() {
        let face = &mesh.faces[f];
        let fq = FaceQuadrature::build(mesh, layouts, f, QuadratureMode::Collocation);
        let flux = flux_sides(mesh, s, rule, f)?;
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
                            let tj = tc[(q, j)];
                            if tj != 0.0 {
                                b.push(rlo + i, clo + j, coeff * ti * tj);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(b.build(numbering.block_index()))
}

/// Discrete divergence in direction d with the given flux.
pub fn assemble_divergence(
    mesh: &Mesh,
    layouts: &Layouts,
    s: Option<&SwitchFunction>,
    flux: &FluxSpec,
    d: usize,
) -> Result<SparseOperator, OperatorError> {
    div_form(mesh, layouts, s, divergence_rule(flux.kind), d)
}

/// Discrete gradient in direction d: the negated transpose of the
/// divergence assembled with the complementary flux, which equals its
/// direct assembly and realises the adjoint pairing of the LDG fluxes.
pub fn assemble_gradient(
    mesh: &Mesh,
    layouts: &Layouts,
    s: Option<&SwitchFunction>,
    flux: &FluxSpec,
    d: usize,
) -> Result<SparseOperator, OperatorError> {
    let comp = gradient_rule(flux.kind).complement();
    Ok(div_form(mesh, layouts, s, comp, d)?.transpose().scaled(-1.0))
}

/// Whether a face takes part in the Dirichlet penalty: a Dirichlet boundary
/// face whose boundary switch value is positive.
pub(crate) fn dirichlet_penalty_rows(mesh: &Mesh, s: &SwitchFunction, f: usize) -> bool {
    mesh.faces[f].is_boundary()
        && mesh.boundary_tags[f] == Some(BoundaryTag::Dirichlet)
        && s.from_side(f, 0) > 0
}

/// Face-mass penalty operator over the Dirichlet faces whose boundary
/// switch is positive.
pub(crate) fn dirichlet_penalty_op(
    mesh: &Mesh,
    layouts: &Layouts,
    s: &SwitchFunction,
) -> SparseOperator {
    let numbering = &layouts.numbering;
    let mut b = Builder::new(numbering.total(), numbering.total());
    for (f, face) in mesh.faces.iter().enumerate() {
        if !dirichlet_penalty_rows(mesh, s, f) {
            continue;
        }
        let fq = FaceQuadrature::build(mesh, layouts, f, QuadratureMode::Collocation);
        let (e, _) = face.side(0);
        let (lo, _) = numbering.range(e);
        let t = &fq.traces[0];
        for q in 0..fq.weights.len() {
            let w = fq.weights[q] * fq.arc_scale;
            for i in 0..t.ncols() {
                let ti = t[(q, i)];
                if ti == 0.0 {
                    continue;
                }
                for j in 0..t.ncols() {
                    let tj = t[(q, j)];
                    if tj != 0.0 {
                        b.push(lo + i, lo + j, w * ti * tj);
                    }
                }
            }
        }
    }
    b.build(numbering.block_index())
}

/// Discrete LDG Laplacian: L = -sum_d D_d M^{-1} D_d^T - C_D * (Dirichlet
/// face mass on switch-positive faces). Symmetric negative semi-definite;
/// strictly negative definite once a penalised Dirichlet face is present.
pub fn assemble_ldg_laplacian(
    mesh: &Mesh,
    layouts: &Layouts,
    s: &SwitchFunction,
    c_d: f64,
) -> Result<SparseOperator, OperatorError> {
    let m = mass_diagonal(mesh, layouts);
    if let Some(i) = m.iter().position(|v| *v <= 0.0) {
        return Err(OperatorError::NonDiagonalMass(i));
    }
    let inv: Vec<f64> = m.iter().map(|v| 1.0 / v).collect();
    let mut sum: Option<SparseOperator> = None;
    for d in 0..mesh.dim {
        let dd = div_form(mesh, layouts, Some(s), SideRule::SwitchQ, d)?;
        let ld = dd.scale_cols(&inv).multiply(&dd.transpose());
        sum = Some(match sum {
            None => ld,
            Some(acc) => acc.add_scaled(&ld, 1.0),
        });
    }
    let mut l = sum.unwrap().scaled(-1.0);
    if c_d != 0.0 {
        let pen = dirichlet_penalty_op(mesh, layouts, s);
        l = l.add_scaled(&pen, -c_d);
    }
    l.symmetry_hint = SymmetryHint::Symmetric;
    Ok(l)
}

/// Sparsity summary of an operator.
pub struct PatternReport {
    pub nnz: usize,
    pub pattern_hash: u64,
    /// nnz of each diagonal block.
    pub diag_block_nnz: Vec<usize>,
    /// Occupancy classes of the coupled off-diagonal blocks: nnz -> count.
    pub offdiag_occupancy: BTreeMap<usize, usize>,
}

impl fmt::Display for PatternReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "nnz {}", self.nnz)?;
        writeln!(f, "pattern {:016x}", self.pattern_hash)?;
        let total_diag: usize = self.diag_block_nnz.iter().sum();
        writeln!(
            f,
            "diagonal blocks {} holding {} entries",
            self.diag_block_nnz.len(),
            total_diag
        )?;
        for (class, count) in &self.offdiag_occupancy {
            writeln!(f, "off-diagonal blocks with {class} entries: {count}")?;
        }
        Ok(())
    }
}

/// Count nnz per element block and classify the off-diagonal blocks.
pub fn pattern_report(a: &SparseOperator) -> PatternReport {
    let blocks = &a.block_index;
    let elem_of = |idx: usize| blocks.partition_point(|&(lo, _)| lo <= idx) - 1;
    let mut diag = vec![0usize; blocks.len()];
    let mut off: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for r in 0..a.nrows {
        let er = elem_of(r);
        let (cols, _) = a.row(r);
        for &c in cols {
            let ec = elem_of(c);
            if er == ec {
                diag[er] += 1;
            } else {
                *off.entry((er, ec)).or_insert(0) += 1;
            }
        }
    }
    let mut occupancy = BTreeMap::new();
    for count in off.values() {
        *occupancy.entry(*count).or_insert(0) += 1;
    }
    PatternReport {
        nnz: a.nnz(),
        pattern_hash: a.pattern_hash(),
        diag_block_nnz: diag,
        offdiag_occupancy: occupancy,
    }
}

/// Result of the basis-independence check.
pub struct SpectralReport {
    pub n: usize,
    pub max_deviation: f64,
    pub closed_eigs: Vec<f64>,
    pub halfclosed_eigs: Vec<f64>,
}

/// Cap on dense spectrum diagnostics.
pub const DENSE_EIG_CAP: usize = 2000;

/// Compare the nodal Laplacian spectra of the closed and half-closed bases
/// on the same mesh and switch; both assemblies use exact integration so
/// the two matrices represent the same operator on the DG space.
pub fn spectral_equivalence_check(
    mesh: &Mesh,
    p: usize,
    s: &SwitchFunction,
    c_d: f64,
) -> Result<SpectralReport, OperatorError> {
    use crate::layout::{build_layouts, FamilyKind};
    let closed = build_layouts(mesh, s, FamilyKind::Closed, p).expect("closed layout");
    let half = build_layouts(mesh, s, FamilyKind::HalfClosed, p).expect("half-closed layout");
    let n = closed.numbering.total();
    if n > DENSE_EIG_CAP {
        return Err(OperatorError::SystemTooLarge(n, DENSE_EIG_CAP));
    }
    let ce = reference::nodal_laplacian_eigs(mesh, &closed, s, c_d);
    let he = reference::nodal_laplacian_eigs(mesh, &half, s, c_d);
    let max_deviation = ce
        .iter()
        .zip(&he)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(SpectralReport {
        n,
        max_deviation,
        closed_eigs: ce,
        halfclosed_eigs: he,
    })
}
