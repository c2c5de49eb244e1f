//! Bicubic Hermite interpolation on a uniform lattice.
//!
//! Nodal slopes come from second-order finite differences (centered inside,
//! one-sided at the edges), so the interpolant is C¹, reproduces
//! biquadratic data exactly and has piecewise second derivatives.
//! Queries outside the lattice extrapolate with the nearest edge cell.

#[derive(Clone, Debug, PartialEq)]
pub struct UniformGrid {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub n: [usize; 2],
}

impl UniformGrid {
    pub fn new(lo: [f64; 2], hi: [f64; 2], n: [usize; 2]) -> Self {
        assert!(n[0] >= 2 && n[1] >= 2, "lattice needs at least 2 nodes per axis");
        UniformGrid { lo, hi, n }
    }

    pub fn step(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / (self.n[axis] - 1) as f64
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        if i == self.n[axis] - 1 {
            self.hi[axis]
        } else {
            self.lo[axis] + self.step(axis) * i as f64
        }
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index: first axis outer.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n[1] + j
    }

    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        (0..self.n[0]).flat_map(move |i| (0..self.n[1]).map(move |j| (i, j, self.coord(0, i), self.coord(1, j))))
    }

    fn locate(&self, axis: usize, x: f64) -> (usize, f64) {
        let h = self.step(axis);
        let s = (x - self.lo[axis]) / h;
        let cell = (s.floor().max(0.0) as usize).min(self.n[axis] - 2);
        (cell, s - cell as f64)
    }
}

/// Derivatives up to second order of the interpolant.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2 {
    pub f: f64,
    pub fx: f64,
    pub fy: f64,
    pub fxx: f64,
    pub fxy: f64,
    pub fyy: f64,
}

#[derive(Clone, Debug)]
pub struct BicubicField {
    grid: UniformGrid,
    f: Vec<f64>,
    fx: Vec<f64>,
    fy: Vec<f64>,
    fxy: Vec<f64>,
}

/// Second-order first derivative along a line of samples with spacing `h`.
pub(crate) fn slopes(vals: &[f64], h: f64) -> Vec<f64> {
    let n = vals.len();
    let mut d = vec![0.0; n];
    if n == 2 {
        let s = (vals[1] - vals[0]) / h;
        return vec![s, s];
    }
    d[0] = (-3.0 * vals[0] + 4.0 * vals[1] - vals[2]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (vals[i + 1] - vals[i - 1]) / (2.0 * h);
    }
    d[n - 1] = (3.0 * vals[n - 1] - 4.0 * vals[n - 2] + vals[n - 3]) / (2.0 * h);
    d
}

/// Hermite basis values and derivatives at `t`: `[h00, h10, h01, h11]`.
fn hermite(t: f64) -> [[f64; 4]; 3] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        [2.0 * t3 - 3.0 * t2 + 1.0, t3 - 2.0 * t2 + t, -2.0 * t3 + 3.0 * t2, t3 - t2],
        [6.0 * t2 - 6.0 * t, 3.0 * t2 - 4.0 * t + 1.0, -6.0 * t2 + 6.0 * t, 3.0 * t2 - 2.0 * t],
        [12.0 * t - 6.0, 6.0 * t - 4.0, -12.0 * t + 6.0, 6.0 * t - 2.0],
    ]
}

impl BicubicField {
    pub fn new(grid: UniformGrid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "value count does not match lattice");
        let [n0, n1] = grid.n;
        let (h0, h1) = (grid.step(0), grid.step(1));
        let mut fx = vec![0.0; values.len()];
        let mut fy = vec![0.0; values.len()];
        for j in 0..n1 {
            let col: Vec<f64> = (0..n0).map(|i| values[grid.index(i, j)]).collect();
            for (i, d) in slopes(&col, h0).into_iter().enumerate() {
                fx[grid.index(i, j)] = d;
            }
        }
        for i in 0..n0 {
            let row = &values[grid.index(i, 0)..grid.index(i, 0) + n1];
            for (j, d) in slopes(row, h1).into_iter().enumerate() {
                fy[grid.index(i, j)] = d;
            }
        }
        let mut fxy = vec![0.0; values.len()];
        for i in 0..n0 {
            let row = &fx[grid.index(i, 0)..grid.index(i, 0) + n1];
            for (j, d) in slopes(row, h1).into_iter().enumerate() {
                fxy[grid.index(i, j)] = d;
            }
        }
        BicubicField {
            grid,
            f: values,
            fx,
            fy,
            fxy,
        }
    }

    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.f
    }

    pub fn value(&self, x: f64, y: f64) -> f64 {
        self.jet(x, y).f
    }

    pub fn jet(&self, x: f64, y: f64) -> Jet2 {
        let g = &self.grid;
        let (i, tx) = g.locate(0, x);
        let (j, ty) = g.locate(1, y);
        let (hx, hy) = (g.step(0), g.step(1));
        let bx = hermite(tx);
        let by = hermite(ty);
        // corner (a, b) -> basis slots: value uses h0a, slope uses h1a
        let slot = |a: usize| (2 * a, 2 * a + 1);
        let mut out = [[0.0; 3]; 3];
        for a in 0..2 {
            for b in 0..2 {
                let k = g.index(i + a, j + b);
                let (va, sa) = slot(a);
                let (vb, sb) = slot(b);
                for dx in 0..3 {
                    for dy in 0..3 {
                        if dx + dy > 2 {
                            continue;
                        }
                        out[dx][dy] += self.f[k] * bx[dx][va] * by[dy][vb]
                            + hx * self.fx[k] * bx[dx][sa] * by[dy][vb]
                            + hy * self.fy[k] * bx[dx][va] * by[dy][sb]
                            + hx * hy * self.fxy[k] * bx[dx][sa] * by[dy][sb];
                    }
                }
            }
        }
        Jet2 {
            f: out[0][0],
            fx: out[1][0] / hx,
            fy: out[0][1] / hy,
            fxx: out[2][0] / (hx * hx),
            fxy: out[1][1] / (hx * hy),
            fyy: out[0][2] / (hy * hy),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(grid: &UniformGrid, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        grid.nodes().map(|(_, _, x, y)| f(x, y)).collect()
    }

    #[test]
    fn reproduces_biquadratic_exactly() {
        let f = |x: f64, y: f64| 1.0 + 2.0 * x - y + 3.0 * x * y + x * x - 0.5 * y * y + x * x * y * y;
        let grid = UniformGrid::new([0.0, -1.0], [2.0, 1.0], [7, 9]);
        let field = BicubicField::new(grid.clone(), sample(&grid, f));
        for &(x, y) in &[(0.13, 0.77), (1.99, -0.99), (0.5, 0.0), (1.234, 0.321)] {
            let j = field.jet(x, y);
            assert!((j.f - f(x, y)).abs() < 1e-12);
            assert!((j.fx - (2.0 + 3.0 * y + 2.0 * x + 2.0 * x * y * y)).abs() < 1e-11);
            assert!((j.fy - (-1.0 + 3.0 * x - y + 2.0 * x * x * y)).abs() < 1e-11);
            assert!((j.fxy - (3.0 + 4.0 * x * y)).abs() < 1e-10);
        }
    }

    #[test]
    fn interpolates_nodes() {
        let grid = UniformGrid::new([0.0, 0.0], [1.0, 1.0], [5, 5]);
        let f = |x: f64, y: f64| (3.0 * x).sin() * (2.0 * y).exp();
        let field = BicubicField::new(grid.clone(), sample(&grid, f));
        for (_, _, x, y) in grid.nodes() {
            assert!((field.value(x, y) - f(x, y)).abs() < 1e-14);
        }
    }

    #[test]
    fn smooth_error_shrinks_with_spacing() {
        let f = |x: f64, y: f64| (3.0 * x).sin() * (2.0 * y).cos();
        let err = |n: usize| {
            let grid = UniformGrid::new([0.0, 0.0], [1.0, 1.0], [n, n]);
            let field = BicubicField::new(grid.clone(), sample(&grid, f));
            let mut worst: f64 = 0.0;
            for k in 0..50 {
                let x = (k as f64 * 0.6180339887).fract();
                let y = (k as f64 * 0.7548776662).fract();
                worst = worst.max((field.value(x, y) - f(x, y)).abs());
            }
            worst
        };
        let order = (err(17) / err(33)).log2();
        assert!(order > 2.5, "observed {order}");
    }
}
