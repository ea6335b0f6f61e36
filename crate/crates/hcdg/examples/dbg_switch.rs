use hcdg::mesh::cartesian_quad_mesh;
use hcdg::switch::{assign_switch_quad, validate_switch};

fn main() {
    let m = cartesian_quad_mesh(3, 3, ((0.0, 1.0), (0.0, 1.0)), false).unwrap();
    let s = assign_switch_quad(&m, 42).unwrap();
    let report = validate_switch(&m, &s);
    for v in &report {
        println!("{v:?}");
    }
    for e in 0..m.n_elements() {
        let f = m.element_faces(e);
        println!(
            "elem {e}: faces {:?} seen {:?}",
            f,
            f.iter().map(|&ff| s.seen_by(&m, ff, e)).collect::<Vec<_>>()
        );
    }
}
