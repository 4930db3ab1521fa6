//! Gauss–Legendre rule on [-1, 1] with its spectral integration matrix.

use super::Real;

#[derive(Clone, Debug)]
pub struct GaussRule<R> {
    /// Ascending nodes in (-1, 1).
    pub nodes: Vec<R>,
    pub weights: Vec<R>,
    /// `partial[i][l]` = ∫_{-1}^{x_i} L_l(x) dx with L_l the Lagrange basis
    /// on the nodes, so Σ_l partial[i][l] f(x_l) integrates the interpolant
    /// of f from -1 up to node i.
    pub partial: Vec<Vec<R>>,
}

/// (P_n(x), P_{n-1}(x)) by the three-term recurrence.
fn legendre_pair<R: Real>(n: usize, x: R) -> (R, R) {
    let mut p0 = R::one();
    let mut p1 = x;
    if n == 0 {
        return (p0, R::zero());
    }
    for k in 2..=n {
        let kk = R::from_i64(k as i64);
        let p2 = (R::from_i64(2 * k as i64 - 1) * x * p1 - R::from_i64(k as i64 - 1) * p0) / kk;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

fn legendre_all<R: Real>(n: usize, x: R) -> Vec<R> {
    let mut p = Vec::with_capacity(n + 1);
    p.push(R::one());
    if n >= 1 {
        p.push(x);
    }
    for k in 2..=n {
        let v = (R::from_i64(2 * k as i64 - 1) * x * p[k - 1] - R::from_i64(k as i64 - 1) * p[k - 2])
            / R::from_i64(k as i64);
        p.push(v);
    }
    p
}

impl<R: Real> GaussRule<R> {
    pub fn new(n: usize) -> GaussRule<R> {
        assert!(n >= 1, "Gauss rule needs at least one node");
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let nn = R::from_i64(n as i64);
        for i in 0..n {
            // roots in descending order from the classical initial guess
            let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut x = R::from_f64(guess);
            let mut dp = R::one();
            for _ in 0..100 {
                let (p, pm1) = legendre_pair(n, x);
                dp = nn * (x * p - pm1) / (x * x - R::one());
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= R::epsilon() * R::from_f64(4.0) {
                    let (p, pm1) = legendre_pair(n, x);
                    dp = nn * (x * p - pm1) / (x * x - R::one());
                    break;
                }
            }
            let w = R::from_f64(2.0) / ((R::one() - x * x) * dp * dp);
            nodes.push(x);
            weights.push(w);
        }
        nodes.reverse();
        weights.reverse();

        let half = R::from_f64(0.5);
        let p_nodes: Vec<Vec<R>> = nodes.iter().map(|&x| legendre_all(n, x)).collect();
        let mut partial = vec![vec![R::zero(); n]; n];
        for i in 0..n {
            let pi = &p_nodes[i];
            // I_m = ∫_{-1}^{x_i} P_m
            let mut integ = Vec::with_capacity(n);
            integ.push(nodes[i] + R::one());
            for m in 1..n {
                integ.push((pi[m + 1] - pi[m - 1]) / R::from_i64(2 * m as i64 + 1));
            }
            for l in 0..n {
                let pl = &p_nodes[l];
                let mut s = R::zero();
                for m in 0..n {
                    s += R::from_i64(2 * m as i64 + 1) * half * pl[m] * integ[m];
                }
                partial[i][l] = weights[l] * s;
            }
        }
        GaussRule { nodes, weights, partial }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}
