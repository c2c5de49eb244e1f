//! Tensor-product panel quadrature over rectangles.
//!
//! Integration bounds are oriented: a reversed interval (`hi < lo`)
//! contributes with a negative sign, exactly like `∫_lo^hi`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    GaussLegendreTensor,
    MidpointComposite,
}

/// A tensor-product rule with its reference nodes on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    kind: RuleKind,
    points_per_axis: usize,
    panels_per_axis: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub const MAX_POINTS: usize = 64;

impl QuadratureRule {
    pub fn new(kind: RuleKind, points_per_axis: usize, panels_per_axis: usize) -> Result<Self> {
        if !(1..=MAX_POINTS).contains(&points_per_axis) {
            return Err(Error::invalid(format!(
                "points_per_axis must be in [1, {MAX_POINTS}], got {points_per_axis}"
            )));
        }
        if panels_per_axis == 0 {
            return Err(Error::invalid("panels_per_axis must be at least 1"));
        }
        let (nodes, weights) = match kind {
            RuleKind::GaussLegendreTensor => gauss_legendre(points_per_axis),
            RuleKind::MidpointComposite => {
                let m = points_per_axis as f64;
                let nodes = (0..points_per_axis)
                    .map(|i| -1.0 + (2 * i + 1) as f64 / m)
                    .collect();
                (nodes, vec![2.0 / m; points_per_axis])
            }
        };
        Ok(QuadratureRule {
            kind,
            points_per_axis,
            panels_per_axis,
            nodes,
            weights,
        })
    }

    pub fn gauss(points: usize, panels: usize) -> Result<Self> {
        Self::new(RuleKind::GaussLegendreTensor, points, panels)
    }

    pub fn midpoint(points: usize, panels: usize) -> Result<Self> {
        Self::new(RuleKind::MidpointComposite, points, panels)
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn panels_per_axis(&self) -> usize {
        self.panels_per_axis
    }

    /// Reference nodes and weights on `[-1, 1]`.
    pub fn reference(&self) -> (&[f64], &[f64]) {
        (&self.nodes, &self.weights)
    }

    /// Physical nodes and weights for the oriented interval `lo → hi`.
    fn mapped(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let n = self.panels_per_axis;
        let width = (hi - lo) / n as f64;
        let mut out = Vec::with_capacity(n * self.points_per_axis);
        for p in 0..n {
            let a = lo + width * p as f64;
            let half = 0.5 * width;
            let mid = a + half;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                out.push((mid + half * x, half * w));
            }
        }
        out
    }

    pub fn integrate1d<F>(&self, mut g: F, lo: f64, hi: f64) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let pts = self.mapped(lo, hi);
        let mut total = 0.0;
        for panel in pts.chunks(self.points_per_axis) {
            let mut s = 0.0;
            for &(x, w) in panel {
                s += w * g(x).map_err(|e| at_node(x, f64::NAN, e))?;
            }
            total += s;
        }
        Ok(total)
    }
}

impl Default for QuadratureRule {
    /// 16-point Gauss–Legendre, one panel per axis.
    fn default() -> Self {
        QuadratureRule::gauss(16, 1).expect("static rule")
    }
}

fn at_node(z1: f64, z2: f64, e: Error) -> Error {
    match e {
        already @ Error::AtNode { .. } => already,
        other => Error::AtNode {
            z1,
            z2,
            source: Box::new(other),
        },
    }
}

/// Integrates `g` over `[l1, l2] × [r1, r2]` (oriented bounds).
///
/// Summation order is fixed: panels row-major (first axis outer), nodes
/// row-major inside each panel, panel sums added in panel order.
pub fn integrate2d<F>(mut g: F, (l1, l2): (f64, f64), (r1, r2): (f64, f64), rule: &QuadratureRule) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let first = rule.mapped(l1, l2);
    let second = rule.mapped(r1, r2);
    let k = rule.points_per_axis;
    let mut total = 0.0;
    for pa in first.chunks(k) {
        for pb in second.chunks(k) {
            let mut panel = 0.0;
            for &(z1, w1) in pa {
                for &(z2, w2) in pb {
                    let v = g(z1, z2).map_err(|e| at_node(z1, z2, e))?;
                    panel += w1 * w2 * v;
                }
            }
            total += panel;
        }
    }
    Ok(total)
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`, by Newton
/// iteration on `P_n` from Chebyshev-like initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_over_rectangle() {
        let r = QuadratureRule::default();
        let v = integrate2d(|_, _| Ok(1.0), (0.0, 2.0), (0.0, 3.0), &r).unwrap();
        assert!((v - 6.0).abs() < 1e-13);
    }

    #[test]
    fn exponential_product() {
        let r = QuadratureRule::gauss(16, 1).unwrap();
        let v = integrate2d(|a, b| Ok((a + b).exp()), (0.0, 1.0), (0.0, 1.0), &r).unwrap();
        let e1 = std::f64::consts::E - 1.0;
        assert!((v - e1 * e1).abs() <= 1e-13, "{v}");
    }

    #[test]
    fn two_point_bilinear_exact() {
        let r = QuadratureRule::gauss(2, 1).unwrap();
        let v = integrate2d(|a, b| Ok(a * b), (0.0, 1.0), (0.0, 1.0), &r).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
    }

    #[test]
    fn known_low_order_nodes() {
        let (x, w) = gauss_legendre(2);
        assert!((x[1] - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((w[0] - 1.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(3);
        assert_eq!(x[1], 0.0);
        assert!((x[2] - 0.6f64.sqrt()).abs() < 1e-15);
        assert!((w[1] - 8.0 / 9.0).abs() < 1e-15);
        let (x, w) = gauss_legendre(1);
        assert_eq!((x[0], w[0]), (0.0, 2.0));
    }

    #[test]
    fn weights_sum_to_two() {
        for n in 1..=MAX_POINTS {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}: {s}");
            assert!(x.windows(2).all(|p| p[0] < p[1]), "nodes not ascending for n={n}");
        }
    }

    #[test]
    fn oriented_bounds_flip_sign() {
        let r = QuadratureRule::gauss(4, 1).unwrap();
        let fwd = integrate2d(|a, b| Ok(a * a + b), (0.0, 1.0), (0.0, 2.0), &r).unwrap();
        let rev = integrate2d(|a, b| Ok(a * a + b), (1.0, 0.0), (0.0, 2.0), &r).unwrap();
        assert!((fwd + rev).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_rules() {
        assert!(QuadratureRule::gauss(0, 1).is_err());
        assert!(QuadratureRule::gauss(65, 1).is_err());
        assert!(QuadratureRule::gauss(4, 0).is_err());
    }

    #[test]
    fn errors_carry_node_location() {
        let r = QuadratureRule::gauss(1, 1).unwrap();
        let err = integrate2d(|_, _| Err(Error::invalid("boom")), (0.0, 2.0), (0.0, 4.0), &r).unwrap_err();
        match err {
            Error::AtNode { z1, z2, .. } => assert_eq!((z1, z2), (1.0, 2.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn midpoint_rule_is_second_order() {
        let f = |a: f64, b: f64| Ok((a * b).sin() + a * a);
        let exact = {
            let r = QuadratureRule::gauss(32, 1).unwrap();
            integrate2d(f, (0.0, 1.0), (0.0, 2.0), &r).unwrap()
        };
        let err = |panels| {
            let r = QuadratureRule::midpoint(1, panels).unwrap();
            (integrate2d(f, (0.0, 1.0), (0.0, 2.0), &r).unwrap() - exact).abs()
        };
        let order = (err(16) / err(32)).log2();
        assert!(order > 1.9, "order {order}");
    }
}
