//! Per-face switch functions for the LDG fluxes and half-closed node
//! placement: seeded alternating-chain assignment on interval/quad meshes,
//! validation of the antisymmetry/alternation/consistency properties, and
//! the closed-form eliminated-fraction formulas.

use crate::mesh::Mesh;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SwitchError {
    #[error("switch propagation conflict: face chain {0:?} closes with inconsistent parity")]
    PropagationConflict(Vec<usize>),
    #[error("unsupported shape for the elimination-ratio formula: {0}")]
    UnsupportedShape(String),
}

/// Per-face +-1 labels. One value is stored per face, as seen from the left
/// element (or the only element, on boundary faces); the right element sees
/// the negation, so antisymmetry holds by representation.
#[derive(Debug, Clone)]
pub struct SwitchFunction {
    values: Vec<i8>,
}

impl SwitchFunction {
    pub fn from_left_values(values: Vec<i8>) -> Self {
        assert!(values.iter().all(|v| *v == 1 || *v == -1));
        SwitchFunction { values }
    }

    pub fn n_faces(&self) -> usize {
        self.values.len()
    }

    /// Value seen from side 0 (left) or 1 (right) of the face.
    pub fn from_side(&self, face: usize, side: usize) -> i8 {
        if side == 0 {
            self.values[face]
        } else {
            -self.values[face]
        }
    }

    /// Value seen by a specific element across one of its faces.
    pub fn seen_by(&self, mesh: &Mesh, face: usize, elem: usize) -> i8 {
        self.from_side(face, mesh.side_of(face, elem))
    }

    /// Text dump, one `face <id> <+1|-1>` line per face.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for (f, v) in self.values.iter().enumerate() {
            s.push_str(&format!("face {} {}\n", f, if *v > 0 { "+1" } else { "-1" }));
        }
        s
    }
}

/// Assign a switch on an interval or quad mesh by alternating propagation:
/// unprocessed faces are visited in seeded pseudo-random order, set to -1
/// from their left element, and the value is propagated across opposite
/// local faces in both directions until the chain hits the domain boundary
/// or closes on itself.
pub fn assign_switch_quad(mesh: &Mesh, seed: u64) -> Result<SwitchFunction, SwitchError> {
    let n = mesh.faces.len();
    let mut values: Vec<Option<i8>> = vec![None; n];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);

    for &start in &order {
        if values[start].is_some() {
            continue;
        }
        values[start] = Some(-1);
        let mut chain = vec![start];
        let sides = if mesh.faces[start].is_boundary() { 1 } else { 2 };
        for side in 0..sides {
            let (mut elem, mut local) = mesh.faces[start].side(side);
            let mut face = start;
            loop {
                // The element must see opposite signs on its opposite faces.
                let seen = stored_to_seen(values[face].unwrap(), mesh.side_of(face, elem));
                let next_local = local ^ 1;
                let next = mesh.element_faces(elem)[next_local];
                let want = seen_to_stored(-seen, mesh.side_of(next, elem));
                match values[next] {
                    Some(v) => {
                        if v != want {
                            chain.push(next);
                            return Err(SwitchError::PropagationConflict(chain));
                        }
                        break; // chain closed consistently
                    }
                    None => {
                        values[next] = Some(want);
                        chain.push(next);
                    }
                }
                let nf = &mesh.faces[next];
                if nf.is_boundary() {
                    break;
                }
                let (e0, l0) = nf.side(0);
                let (e1, l1) = nf.side(1);
                face = next;
                if e0 == elem {
                    elem = e1;
                    local = l1;
                } else {
                    debug_assert_eq!(e1, elem);
                    elem = e0;
                    local = l0;
                }
            }
        }
    }
    Ok(SwitchFunction::from_left_values(
        values.into_iter().map(|v| v.unwrap()).collect(),
    ))
}

fn stored_to_seen(stored: i8, side: usize) -> i8 {
    if side == 0 {
        stored
    } else {
        -stored
    }
}

fn seen_to_stored(seen: i8, side: usize) -> i8 {
    stored_to_seen(seen, side)
}

/// One violation found by [`validate_switch`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SwitchViolation {
    /// Opposite local faces of an element carry equal signs.
    Alternation { elem: usize, faces: (usize, usize) },
    /// An element sees all-equal switch signs: |sum over its faces| reaches
    /// the face count. Boundary switch values take part in the sum, since
    /// they carry meaning for the Dirichlet penalty rule.
    Consistency { elem: usize, sum: i64, faces: usize },
}

/// Check quad alternation and the consistency bound on every element.
/// An empty report means the switch is valid.
pub fn validate_switch(mesh: &Mesh, s: &SwitchFunction) -> Vec<SwitchViolation> {
    let mut report = Vec::new();
    for e in 0..mesh.n_elements() {
        let faces = mesh.element_faces(e);
        for d in 0..mesh.dim {
            let (fa, fb) = (faces[2 * d], faces[2 * d + 1]);
            if s.seen_by(mesh, fa, e) == s.seen_by(mesh, fb, e) {
                report.push(SwitchViolation::Alternation { elem: e, faces: (fa, fb) });
            }
        }
        let sum: i64 = faces.iter().map(|&f| s.seen_by(mesh, f, e) as i64).sum();
        if sum.unsigned_abs() as usize >= faces.len() {
            report.push(SwitchViolation::Consistency {
                elem: e,
                sum,
                faces: faces.len(),
            });
        }
    }
    report
}

/// Exact rational number for the elimination-ratio formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    pub num: u64,
    pub den: u64,
}

impl Rational {
    fn new(num: u64, den: u64) -> Self {
        let g = gcd(num, den).max(1);
        Rational {
            num: num / g,
            den: den / g,
        }
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl std::fmt::Display for Rational {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Element shapes covered by the eliminated-fraction formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Tensor-product element in d dimensions (interval, quad, hex).
    Quad(u32),
    Triangle,
    Tetrahedron,
}

/// Fraction of unknowns eliminated by switch-driven static condensation:
/// p^d/(p+1)^d on tensor-product elements, and the expected fractions
/// p^2/((p+1)(p+2)) and (7p^3+5p)/(7(p+1)(p+2)(p+3)) on simplices.
pub fn dependent_nodes_ratio(shape: Shape, p: u64) -> Result<Rational, SwitchError> {
    if p == 0 {
        return Err(SwitchError::UnsupportedShape(
            "ratio formulas need p >= 1".into(),
        ));
    }
    match shape {
        Shape::Quad(d) if (1..=3).contains(&d) => Ok(Rational::new(p.pow(d), (p + 1).pow(d))),
        Shape::Quad(d) => Err(SwitchError::UnsupportedShape(format!(
            "tensor-product dimension {d} out of range 1..=3"
        ))),
        Shape::Triangle => Ok(Rational::new(p * p, (p + 1) * (p + 2))),
        Shape::Tetrahedron => Ok(Rational::new(
            7 * p.pow(3) + 5 * p,
            7 * (p + 1) * (p + 2) * (p + 3),
        )),
    }
}
