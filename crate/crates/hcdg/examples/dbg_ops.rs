use hcdg::layout::{build_layouts, FamilyKind};
use hcdg::mesh::{cartesian_quad_mesh, uniform_interval_mesh};
use hcdg::operators::*;
use hcdg::switch::assign_switch_quad;
use nalgebra::DMatrix;

fn schur_entries(k: usize, p: usize, family: FamilyKind) -> (f64, f64) {
    let m = uniform_interval_mesh(k, (0.0, 1.0), true).unwrap();
    let s = assign_switch_quad(&m, 0).unwrap();
    let l = build_layouts(&m, &s, family, p).unwrap();
    let lap = assemble_ldg_laplacian(&m, &l, &s, 0.0).unwrap();
    let a = lap.to_dense().scale(-1.0); // Poisson operator
    // independent nodes: on some S=+1 face of their element
    let mut indep = Vec::new();
    let mut dep = Vec::new();
    for e in 0..m.n_elements() {
        let layout = l.elem(e);
        let mut on_pos = std::collections::HashSet::new();
        for (loc, &f) in m.element_faces(e).iter().enumerate() {
            if s.seen_by(&m, f, e) > 0 {
                for &node in &layout.face_nodes[loc] {
                    on_pos.insert(node);
                }
            }
        }
        for local in 0..layout.nodes_per_elem() {
            let g = l.numbering.global(e, local);
            if on_pos.contains(&local) { indep.push(g) } else { dep.push(g) }
        }
    }
    let ni = indep.len();
    let nd = dep.len();
    let pick = |rows: &Vec<usize>, cols: &Vec<usize>| {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])])
    };
    let aii = pick(&indep, &indep);
    let aid = pick(&indep, &dep);
    let adi = pick(&dep, &indep);
    let add = pick(&dep, &dep);
    let tilde = &aii - &aid * add.lu().solve(&adi).unwrap();
    println!("k={k} p={p} {:?}: ni={ni} nd={nd}", family);
    // report diagonal + offdiag of the (presumed circulant) tilde
    let mut diag = Vec::new();
    let mut off = Vec::new();
    for i in 0..ni {
        for j in 0..ni {
            let v = tilde[(i, j)];
            if v.abs() > 1e-9 {
                if i == j { diag.push(v) } else { off.push(v) }
            }
        }
    }
    println!("  diag entries: {:?}", &diag[..diag.len().min(4)]);
    println!("  off entries: {:?}", &off[..off.len().min(4)]);
    (diag[0], off[0])
}

fn main() {
    // 1) constant annihilation on periodic 1D mesh, all families, via M^{-1} D 1
    for fam in [FamilyKind::HalfClosed, FamilyKind::Closed, FamilyKind::Open] {
        let m = uniform_interval_mesh(4, (0.0, 1.0), true).unwrap();
        let s = assign_switch_quad(&m, 0).unwrap();
        let l = build_layouts(&m, &s, fam, 2).unwrap();
        let d = assemble_divergence(&m, &l, Some(&s), &FluxSpec::upwind_by_switch(0.0), 0).unwrap();
        let ones = vec![1.0; l.numbering.total()];
        let mut y = vec![0.0; ones.len()];
        d.matvec(&ones, &mut y);
        let max = y.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        println!("{:?} D*1 max = {max:.2e}", fam);
    }
    // 2) adjointness dual route on a 2x2 cartesian (affine) mesh
    for fam in [FamilyKind::HalfClosed, FamilyKind::Closed, FamilyKind::Open] {
        let m = cartesian_quad_mesh(2, 2, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
        let s = assign_switch_quad(&m, 1).unwrap();
        let l = build_layouts(&m, &s, fam, 2).unwrap();
        let flux = FluxSpec::upwind_by_switch(0.0);
        let g = assemble_gradient(&m, &l, Some(&s), &flux, 0).unwrap();
        let d = assemble_divergence(&m, &l, Some(&s), &flux, 0).unwrap();
        let resid = (g.to_dense() + d.to_dense().transpose()).abs().max();
        println!("{:?} ||G + D^T|| = {resid:.2e}", fam);
    }
    // 3) sparse collocation vs dense reference, half-closed p=2, 2x2 cartesian
    for fam in [FamilyKind::HalfClosed, FamilyKind::Open] {
        let m = cartesian_quad_mesh(2, 2, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
        let s = assign_switch_quad(&m, 1).unwrap();
        let l = build_layouts(&m, &s, fam, 2).unwrap();
        let lap = assemble_ldg_laplacian(&m, &l, &s, 10.0).unwrap();
        let refl = reference::ref_laplacian(&m, &l, &s, 10.0);
        let diff = (lap.to_dense() - &refl).abs().max() / refl.abs().max();
        println!("{:?} |L_colloc - L_ref| rel = {diff:.2e}", fam);
    }
    // 4) the 1D condensed operator entries
    for p in 1..=3 {
        for fam in [FamilyKind::HalfClosed, FamilyKind::Closed] {
            let (d0, o0) = schur_entries(3, p, fam);
            let k = 3.0;
            println!("  => diag={d0:.6} off={o0:.6}; 2k(p+1)={}, 2k={}", 2.0*k*((p+1) as f64), 2.0*k);
        }
    }
    // 5) Laplacian pattern equality + counts on 3x3 p=1
    for periodic in [true, false] {
        let m = cartesian_quad_mesh(3, 3, ((0.0, 1.0), (0.0, 1.0)), periodic).unwrap();
        let s = assign_switch_quad(&m, 0).unwrap();
        let mut line = format!("3x3 periodic={periodic}: ");
        for fam in [FamilyKind::Closed, FamilyKind::HalfClosed, FamilyKind::Open] {
            let l = build_layouts(&m, &s, fam, 1).unwrap();
            let lap = assemble_ldg_laplacian(&m, &l, &s, 0.0).unwrap();
            line += &format!("{:?} nnz={} hash={:08x} | ", fam, lap.nnz(), lap.pattern_hash() & 0xffffffff);
        }
        println!("{line}");
    }
    // symmetry check
    let m = cartesian_quad_mesh(3, 2, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
    let s = assign_switch_quad(&m, 9).unwrap();
    let l = build_layouts(&m, &s, FamilyKind::HalfClosed, 3).unwrap();
    let lap = assemble_ldg_laplacian(&m, &l, &s, 25.0).unwrap();
    let ld = lap.to_dense();
    let sym = (&ld - ld.transpose()).abs().max() / ld.abs().max();
    println!("halfclosed p=3 laplacian symmetry rel = {sym:.2e}");
}
