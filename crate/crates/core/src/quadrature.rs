//! Gauss–Legendre rules and composite panels.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A composite Gauss rule on a partition of an interval.
#[derive(Debug, Clone)]
pub struct Panels {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Panels {
    /// `order`-point Gauss rule on each cell of the partition `breaks` (increasing).
    pub fn new(breaks: &[f64], order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order * breaks.len());
        let mut weights = Vec::with_capacity(order * breaks.len());
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for k in 0..order {
                nodes.push(mid + half * x[k]);
                weights.push(half * w[k]);
            }
        }
        Panels { nodes, weights }
    }

    /// Uniform cells of length at most `h` on `[a, b]`, always splitting at the given interior points.
    pub fn graded(a: f64, b: f64, h: f64, splits: &[f64], order: usize) -> Self {
        Self::new(&breakpoints(a, b, h, splits), order)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Partition of `[a, b]` into cells no longer than `h`, respecting the `splits`.
pub fn breakpoints(a: f64, b: f64, h: f64, splits: &[f64]) -> Vec<f64> {
    let mut anchors = vec![a];
    let mut inner: Vec<f64> = splits.iter().copied().filter(|&s| s > a && s < b).collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    anchors.extend(inner);
    anchors.push(b);
    let mut out = vec![a];
    for pair in anchors.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        let cells = ((hi - lo) / h).ceil().max(1.0) as usize;
        for k in 1..=cells {
            out.push(lo + (hi - lo) * k as f64 / cells as f64);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn composite_exp() {
        let p = Panels::graded(0.0, 10.0, 0.5, &[3.3], 4);
        let q: f64 = p.nodes.iter().zip(&p.weights).map(|(x, w)| w * x.exp()).sum();
        assert!((q - (10f64.exp() - 1.0)).abs() / q < 1e-10);
    }
}
