use super::{Matrix, Vector};

/// Augmented-Lagrangian multipliers and penalties, one column per grid node.
///
/// `lambda`/`mu` are `p x (N + 1)` for the inequalities, `eta`/`kappa`
/// `q x (N + 1)` for the equalities.
#[derive(Debug, Clone, PartialEq)]
pub struct AlState {
    pub lambda: Matrix,
    pub mu: Matrix,
    pub eta: Matrix,
    pub kappa: Matrix,
    pub gamma: f64,
}

impl AlState {
    pub fn new(inequalities: usize, equalities: usize, nodes: usize, mu0: f64, gamma: f64) -> Self {
        Self {
            lambda: Matrix::zeros(inequalities, nodes),
            mu: Matrix::from_element(inequalities, nodes, mu0),
            eta: Matrix::zeros(equalities, nodes),
            kappa: Matrix::from_element(equalities, nodes, mu0),
            gamma,
        }
    }

    /// Penalty active for inequality `i` at `node`.
    pub fn active(&self, i: usize, node: usize, g: f64) -> bool {
        g >= 0.0 || self.lambda[(i, node)] > 0.0
    }

    /// Penalty value and its gradient scale for one node:
    /// returns `(cost, d cost / d g, d^2 cost / d g^2)` per inequality and equality.
    pub(crate) fn node_terms(&self, node: usize, g: &Vector, h: &Vector) -> (f64, Vector, Vector, Vector, Vector) {
        let mut cost = 0.0;
        let mut dg = Vector::zeros(g.len());
        let mut ddg = Vector::zeros(g.len());
        for i in 0..g.len() {
            let (l, m) = (self.lambda[(i, node)], self.mu[(i, node)]);
            let on = if self.active(i, node, g[i]) { 1.0 } else { 0.0 };
            cost += l * g[i] + on * m * g[i] * g[i];
            dg[i] = l + 2.0 * on * m * g[i];
            ddg[i] = 2.0 * on * m;
        }
        let mut dh = Vector::zeros(h.len());
        let mut ddh = Vector::zeros(h.len());
        for i in 0..h.len() {
            let (e, k) = (self.eta[(i, node)], self.kappa[(i, node)]);
            cost += e * h[i] + k * h[i] * h[i];
            dh[i] = e + 2.0 * k * h[i];
            ddh[i] = 2.0 * k;
        }
        (cost, dg, ddg, dh, ddh)
    }
}

/// Multiplier and penalty update after one DDP pass.
///
/// `g_values`/`h_values` hold one column per node.
pub fn update_al(al: &AlState, g_values: &Matrix, h_values: &Matrix) -> AlState {
    let mut next = al.clone();
    for node in 0..al.lambda.ncols() {
        for i in 0..al.lambda.nrows() {
            next.lambda[(i, node)] = (al.lambda[(i, node)] + al.mu[(i, node)] * g_values[(i, node)]).max(0.0);
        }
        for i in 0..al.eta.nrows() {
            next.eta[(i, node)] = al.eta[(i, node)] + al.kappa[(i, node)] * h_values[(i, node)];
        }
    }
    next.mu *= al.gamma;
    next.kappa *= al.gamma;
    next
}
