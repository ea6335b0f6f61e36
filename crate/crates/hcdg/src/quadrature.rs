//! Orthogonal-polynomial evaluation and 1D node/weight/differentiation data
//! for the Gauss-Legendre (open), Gauss-Lobatto (closed) and Gauss-Radau
//! (half-closed) families on the reference interval [-1, 1].

use nalgebra::DMatrix;
use thiserror::Error;

/// Which endpoint a Gauss-Radau rule pins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RadauSide {
    /// Node at -1, open at +1.
    Left,
    /// Node at +1, open at -1.
    Right,
}

impl RadauSide {
    pub fn mirrored(self) -> Self {
        match self {
            RadauSide::Left => RadauSide::Right,
            RadauSide::Right => RadauSide::Left,
        }
    }
}

/// One of the three 1D node families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeFamily {
    /// Open: no endpoint nodes, exactness degree 2n-1.
    GaussLegendre,
    /// Closed: both endpoint nodes, exactness degree 2n-3.
    GaussLobatto,
    /// Half-closed: one endpoint node, exactness degree 2n-2.
    GaussRadau(RadauSide),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QuadratureError {
    #[error("Gauss-Lobatto needs degree p >= 1, got p = {0}")]
    DegreeTooLow(usize),
}

/// Legendre polynomial P_p and its derivative at x, by the three-term
/// recurrence. Total on p >= 0, x in [-1, 1].
pub fn legendre_eval(p: usize, x: f64) -> (f64, f64) {
    if p == 0 {
        return (1.0, 0.0);
    }
    let (mut pm1, mut dm1) = (1.0, 0.0); // P_0
    let (mut pk, mut dk) = (x, 1.0); // P_1
    for k in 1..p {
        let kf = k as f64;
        let pk1 = ((2.0 * kf + 1.0) * x * pk - kf * pm1) / (kf + 1.0);
        let dk1 = ((2.0 * kf + 1.0) * (pk + x * dk) - kf * dm1) / (kf + 1.0);
        pm1 = pk;
        dm1 = dk;
        pk = pk1;
        dk = dk1;
    }
    (pk, dk)
}

/// Nodal data for one family at degree p: n = p+1 strictly increasing nodes,
/// positive weights summing to 2, the Lagrange differentiation matrix and the
/// basis traces at the two endpoints.
#[derive(Debug, Clone)]
pub struct Basis1D {
    pub family: NodeFamily,
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// diff[(i, j)] = d l_j / dx at node i.
    pub diff: DMatrix<f64>,
    /// Basis values at -1.
    pub trace_left: Vec<f64>,
    /// Basis values at +1.
    pub trace_right: Vec<f64>,
    /// Barycentric weights of the node set.
    bary: Vec<f64>,
}

impl Basis1D {
    pub fn degree(&self) -> usize {
        self.n - 1
    }

    /// Basis values at an arbitrary point, by the barycentric formula.
    /// Exact unit vector when x coincides with a node.
    pub fn eval_at(&self, x: f64) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        for (j, &xj) in self.nodes.iter().enumerate() {
            if (x - xj).abs() < 1e-14 {
                out[j] = 1.0;
                return out;
            }
        }
        let mut denom = 0.0;
        for j in 0..n {
            let t = self.bary[j] / (x - self.nodes[j]);
            out[j] = t;
            denom += t;
        }
        for v in out.iter_mut() {
            *v /= denom;
        }
        out
    }

    /// Rows evaluate the basis at each of the given points.
    pub fn interp_to(&self, points: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(points.len(), self.n);
        for (q, &x) in points.iter().enumerate() {
            for (j, v) in self.eval_at(x).into_iter().enumerate() {
                m[(q, j)] = v;
            }
        }
        m
    }

    /// Trace vector for one end of the interval.
    pub fn trace(&self, right: bool) -> &[f64] {
        if right {
            &self.trace_right
        } else {
            &self.trace_left
        }
    }
}

/// Build the node/weight/differentiation data for a family at degree p.
pub fn make_basis(family: NodeFamily, p: usize) -> Result<Basis1D, QuadratureError> {
    let n = p + 1;
    let (nodes, weights) = match family {
        NodeFamily::GaussLegendre => legendre_rule(n),
        NodeFamily::GaussLobatto => {
            if p < 1 {
                return Err(QuadratureError::DegreeTooLow(p));
            }
            lobatto_rule(n)
        }
        NodeFamily::GaussRadau(side) => {
            let (mut x, mut w) = radau_left_rule(n);
            if side == RadauSide::Right {
                x.iter_mut().for_each(|v| *v = -*v);
                x.reverse();
                w.reverse();
            }
            (x, w)
        }
    };
    let bary = barycentric_weights(&nodes);
    let diff = differentiation_matrix(&nodes, &bary);
    let basis = Basis1D {
        family,
        n,
        nodes,
        weights,
        diff,
        trace_left: vec![],
        trace_right: vec![],
        bary,
    };
    let trace_left = basis.eval_at(-1.0);
    let trace_right = basis.eval_at(1.0);
    Ok(Basis1D {
        trace_left,
        trace_right,
        ..basis
    })
}

/// n-point Gauss-Legendre rule: roots of P_n.
fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nodes = find_roots(n, |x| legendre_eval(n, x));
    let weights = nodes
        .iter()
        .map(|&x| {
            let (_, d) = legendre_eval(n, x);
            2.0 / ((1.0 - x * x) * d * d)
        })
        .collect();
    (nodes, weights)
}

/// n-point Gauss-Lobatto rule: +-1 and the roots of P'_{n-1}.
fn lobatto_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let m = n - 1;
    let mut nodes = vec![-1.0];
    if n > 2 {
        // f = P'_{n-1}; f' from the Legendre ODE, fine away from +-1.
        nodes.extend(find_roots(n - 2, |x| {
            let (pv, pd) = legendre_eval(m, x);
            let pdd = (2.0 * x * pd - (m as f64) * (m as f64 + 1.0) * pv) / (1.0 - x * x);
            (pd, pdd)
        }));
    }
    nodes.push(1.0);
    let scale = 2.0 / ((m * n) as f64);
    let weights = nodes
        .iter()
        .map(|&x| {
            let (pv, _) = legendre_eval(m, x);
            scale / (pv * pv)
        })
        .collect();
    (nodes, weights)
}

/// n-point left Gauss-Radau rule: -1 and the roots of (P_{n-1}+P_n)/(1+x).
fn radau_left_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![-1.0];
    if n > 1 {
        nodes.extend(find_roots(n - 1, |x| {
            let (a, da) = legendre_eval(n - 1, x);
            let (b, db) = legendre_eval(n, x);
            let s = 1.0 + x;
            let f = (a + b) / s;
            let df = (da + db) / s - (a + b) / (s * s);
            (f, df)
        }));
    }
    let n2 = (n * n) as f64;
    let weights = nodes
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            if i == 0 {
                2.0 / n2
            } else {
                let (pv, _) = legendre_eval(n - 1, x);
                (1.0 - x) / (n2 * pv * pv)
            }
        })
        .collect();
    (nodes, weights)
}

/// Find `count` simple roots of f in (-1, 1): bracket on a dense Chebyshev
/// grid, then Newton polish (tolerance 1e-15, at most 100 steps) with
/// bisection as the safeguard whenever Newton leaves the bracket.
fn find_roots(count: usize, f: impl Fn(f64) -> (f64, f64)) -> Vec<f64> {
    if count == 0 {
        return vec![];
    }
    let m = 16 * (count + 2);
    let grid: Vec<f64> = (0..=m)
        .map(|j| -(std::f64::consts::PI * j as f64 / m as f64).cos() * (1.0 - 1e-12))
        .collect();
    let mut roots = Vec::with_capacity(count);
    let mut fa = f(grid[0]).0;
    for w in 1..=m {
        let fb = f(grid[w]).0;
        if fa == 0.0 {
            roots.push(grid[w - 1]);
        } else if fa * fb < 0.0 {
            roots.push(polish_root(grid[w - 1], grid[w], &f));
        }
        fa = fb;
    }
    assert_eq!(
        roots.len(),
        count,
        "root bracketing found {} of {} roots",
        roots.len(),
        count
    );
    roots
}

fn polish_root(mut a: f64, mut b: f64, f: &impl Fn(f64) -> (f64, f64)) -> f64 {
    let (mut fa, _) = f(a);
    let mut x = 0.5 * (a + b);
    for _ in 0..100 {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return x;
        }
        if fa * fx < 0.0 {
            b = x;
        } else {
            a = x;
            fa = fx;
        }
        let step = fx / dfx;
        let xn = x - step;
        let xn = if xn <= a || xn >= b { 0.5 * (a + b) } else { xn };
        if (xn - x).abs() < 1e-15 {
            return xn;
        }
        x = xn;
    }
    x
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut w = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                w[j] /= nodes[j] - nodes[k];
            }
        }
    }
    // Rescale so the weights stay O(1) at high degree.
    let mx = w.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    w.iter_mut().for_each(|v| *v /= mx);
    w
}

fn differentiation_matrix(nodes: &[f64], bary: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if i != j {
                let v = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d[(i, j)] = v;
                diag -= v;
            }
        }
        d[(i, i)] = diag;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Independent oracle: evaluate P_p by summing Bonnet's recurrence into a
    /// table, written separately from the production recurrence.
    fn legendre_table(p: usize, x: f64) -> f64 {
        let mut table = vec![1.0, x];
        for k in 1..=p {
            let kf = k as f64;
            let next = ((2.0 * kf + 1.0) * x * table[k] - kf * table[k - 1]) / (kf + 1.0);
            table.push(next);
        }
        table[p]
    }

    fn exact_moment(m: usize) -> f64 {
        if m % 2 == 1 {
            0.0
        } else {
            2.0 / (m as f64 + 1.0)
        }
    }

    /// Largest m such that all moments 0..=m integrate within tol.
    fn measured_exactness(basis: &Basis1D) -> usize {
        let mut m = 0;
        loop {
            let q: f64 = basis
                .nodes
                .iter()
                .zip(&basis.weights)
                .map(|(x, w)| w * x.powi(m as i32))
                .sum();
            if (q - exact_moment(m)).abs() > 1e-12 {
                return m - 1;
            }
            m += 1;
            if m > 100 {
                panic!("exactness sweep did not terminate");
            }
        }
    }

    #[test]
    fn legendre_eval_low_degrees() {
        assert_eq!(legendre_eval(0, 0.3), (1.0, 0.0));
        assert_eq!(legendre_eval(1, 0.3), (0.3, 1.0));
    }

    #[test]
    fn legendre_eval_matches_table_oracle() {
        for p in 0..=12 {
            for &x in &[-0.9, -0.3, 0.0, 0.5, 0.7, 1.0] {
                let (v, _) = legendre_eval(p, x);
                assert_abs_diff_eq!(v, legendre_table(p, x), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn radau_p0_is_single_closed_point() {
        let b = make_basis(NodeFamily::GaussRadau(RadauSide::Left), 0).unwrap();
        assert_eq!(b.nodes, vec![-1.0]);
        assert_eq!(b.weights, vec![2.0]);
    }

    #[test]
    fn radau_p1_nodes_and_weights() {
        let b = make_basis(NodeFamily::GaussRadau(RadauSide::Left), 1).unwrap();
        assert_abs_diff_eq!(b.nodes[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.nodes[1], 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.weights[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(b.weights[1], 1.5, epsilon = 1e-14);
        // Independent check: exact integrals of 1, x, x^2 over [-1, 1].
        for m in 0..=2 {
            let q: f64 = b
                .nodes
                .iter()
                .zip(&b.weights)
                .map(|(x, w)| w * x.powi(m))
                .sum();
            assert_abs_diff_eq!(q, exact_moment(m as usize), epsilon = 1e-14);
        }
    }

    #[test]
    fn lobatto_p2_nodes_and_weights() {
        let b = make_basis(NodeFamily::GaussLobatto, 2).unwrap();
        assert_abs_diff_eq!(b.nodes[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.nodes[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.nodes[2], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.weights[0], 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.weights[1], 4.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.weights[2], 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn lobatto_p0_rejected() {
        assert!(matches!(
            make_basis(NodeFamily::GaussLobatto, 0),
            Err(QuadratureError::DegreeTooLow(0))
        ));
    }

    #[test]
    fn exactness_degrees_for_all_families() {
        for p in 0..=8 {
            let n = p + 1;
            let gl = make_basis(NodeFamily::GaussLegendre, p).unwrap();
            assert_eq!(measured_exactness(&gl), 2 * n - 1, "legendre p={p}");
            for side in [RadauSide::Left, RadauSide::Right] {
                let gr = make_basis(NodeFamily::GaussRadau(side), p).unwrap();
                assert_eq!(measured_exactness(&gr), 2 * n - 2, "radau p={p}");
            }
            if p >= 1 {
                let lo = make_basis(NodeFamily::GaussLobatto, p).unwrap();
                assert_eq!(measured_exactness(&lo), 2 * n - 3, "lobatto p={p}");
            }
        }
    }

    #[test]
    fn weights_sum_to_interval_measure() {
        for p in 0..=20 {
            for fam in [
                NodeFamily::GaussLegendre,
                NodeFamily::GaussLobatto,
                NodeFamily::GaussRadau(RadauSide::Left),
            ] {
                if fam == NodeFamily::GaussLobatto && p == 0 {
                    continue;
                }
                let b = make_basis(fam, p).unwrap();
                let s: f64 = b.weights.iter().sum();
                assert_abs_diff_eq!(s, 2.0, epsilon = 1e-13);
                assert!(b.weights.iter().all(|&w| w > 0.0));
                assert!(b.nodes.windows(2).all(|w| w[0] < w[1]));
            }
        }
    }

    #[test]
    fn radau_right_mirrors_left() {
        for p in 0..=8 {
            let l = make_basis(NodeFamily::GaussRadau(RadauSide::Left), p).unwrap();
            let r = make_basis(NodeFamily::GaussRadau(RadauSide::Right), p).unwrap();
            for i in 0..=p {
                assert_abs_diff_eq!(r.nodes[i], -l.nodes[p - i], epsilon = 1e-15);
                assert_abs_diff_eq!(r.weights[i], l.weights[p - i], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn differentiation_reproduces_monomial_derivatives() {
        for p in 1..=8 {
            for fam in [
                NodeFamily::GaussLegendre,
                NodeFamily::GaussLobatto,
                NodeFamily::GaussRadau(RadauSide::Left),
                NodeFamily::GaussRadau(RadauSide::Right),
            ] {
                let b = make_basis(fam, p).unwrap();
                for m in 0..=p {
                    for i in 0..b.n {
                        let got: f64 = (0..b.n)
                            .map(|j| b.diff[(i, j)] * b.nodes[j].powi(m as i32))
                            .sum();
                        let want = if m == 0 {
                            0.0
                        } else {
                            m as f64 * b.nodes[i].powi(m as i32 - 1)
                        };
                        assert_abs_diff_eq!(got, want, epsilon = 1e-11);
                    }
                }
            }
        }
    }

    #[test]
    fn traces_interpolate_endpoint_values() {
        for p in 1..=8 {
            let b = make_basis(NodeFamily::GaussRadau(RadauSide::Left), p).unwrap();
            // trace_left is the unit vector on the closed end.
            assert_eq!(b.trace_left[0], 1.0);
            assert!(b.trace_left[1..].iter().all(|&v| v == 0.0));
            // trace_right interpolates an arbitrary degree-p polynomial.
            let poly = |x: f64| (0..=p).map(|k| 0.3 * x.powi(k as i32)).sum::<f64>();
            let got: f64 = (0..b.n).map(|j| b.trace_right[j] * poly(b.nodes[j])).sum();
            assert_abs_diff_eq!(got, poly(1.0), epsilon = 1e-12);
            let lo = make_basis(NodeFamily::GaussLobatto, p).unwrap();
            assert_eq!(lo.trace_left[0], 1.0);
            assert_eq!(lo.trace_right[p], 1.0);
        }
    }

    #[test]
    fn diff_rows_sum_to_zero() {
        let b = make_basis(NodeFamily::GaussRadau(RadauSide::Left), 12).unwrap();
        for i in 0..b.n {
            let s: f64 = (0..b.n).map(|j| b.diff[(i, j)]).sum();
            assert_abs_diff_eq!(s, 0.0, epsilon = 1e-12);
        }
    }
}
