#![allow(dead_code)]

use charpar::geom::Point;
use charpar::parallelogram::CharRectangle;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random sub-rectangle of `[l.0, l.1] × [r.0, r.1]` with sides at least
/// 1% of the box.
pub fn random_rect(rng: &mut StdRng, l: (f64, f64), r: (f64, f64)) -> CharRectangle {
    let side = |rng: &mut StdRng, (lo, hi): (f64, f64)| loop {
        let a = rng.gen_range(lo..hi);
        let b = rng.gen_range(lo..hi);
        if (a - b).abs() > 0.01 * (hi - lo) {
            return (a.min(b), a.max(b));
        }
    };
    let (l1, l2) = side(rng, l);
    let (r1, r2) = side(rng, r);
    CharRectangle::new(l1, l2, r1, r2).unwrap()
}

/// Local four-point Lagrange interpolation on a uniform grid starting at 0.
fn lagrange4(step: f64, vals: &[f64], s: f64) -> f64 {
    let n = vals.len();
    let pos = s / step;
    let i0 = (pos.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let mut acc = 0.0;
    for k in 0..4 {
        let mut w = 1.0;
        for m in 0..4 {
            if m != k {
                w *= (pos - (i0 + m) as f64) / (k as f64 - m as f64);
            }
        }
        acc += w * vals[i0 + k];
    }
    acc
}

/// Darboux problem `u12 = f`, `u = 0` on `x2 = αx1` and `x2 = βx1`, solved
/// without the rectangle cascade.
///
/// With `W` the double antiderivative of `f` (`W = 0` on both axes),
/// `u = F(x1) + G(x2) + W`. The two boundary lines give
/// `G(s) = G(ρ s) + W(s/β, ρ s) - W(s/β, s)` with `ρ = α/β`, which is
/// iterated to a fixed point on a 1D grid; then `F(t) = -W(t, αt) - G(αt)`.
pub fn darboux_oracle(alpha: f64, beta: f64, w: &dyn Fn(f64, f64) -> f64, x: Point) -> f64 {
    let rho = alpha / beta;
    let s_max = x.x2.max(alpha * x.x1) * 1.01 + 1e-3;
    let n = 4001;
    let step = s_max / (n - 1) as f64;
    let h: Vec<f64> = (0..n)
        .map(|i| {
            let s = i as f64 * step;
            w(s / beta, rho * s) - w(s / beta, s)
        })
        .collect();
    let mut g = vec![0.0; n];
    for _ in 0..200 {
        let next: Vec<f64> = (0..n)
            .map(|i| lagrange4(step, &g, rho * i as f64 * step) + h[i])
            .collect();
        let diff = next.iter().zip(&g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        g = next;
        if diff < 1e-16 {
            break;
        }
    }
    let big_g = |s: f64| lagrange4(step, &g, s);
    let big_f = -w(x.x1, alpha * x.x1) - big_g(alpha * x.x1);
    big_f + big_g(x.x2) + w(x.x1, x.x2)
}
