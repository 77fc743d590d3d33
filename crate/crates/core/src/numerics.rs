//! Small numerical kernels shared across modules: quadrature rules,
//! uniform-grid interpolation, finite-difference weights and RK4.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, ordered by node.
pub fn gauss_legendre(points: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(points.max(1)).expect("nonzero");
    let rule = GaussLegendre::new(n);
    let mut pairs: Vec<(f64, f64)> = rule
        .nodes()
        .copied()
        .zip(rule.weights().copied())
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Composite Gauss–Legendre on `[a, b]` split into `segments` equal pieces.
pub fn composite_gl<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    segments: usize,
    rule: &[(f64, f64)],
    mut f: F,
) -> f64 {
    let segments = segments.max(1);
    let h = (b - a) / segments as f64;
    let mut total = 0.0;
    for k in 0..segments {
        let lo = a + k as f64 * h;
        let mid = lo + 0.5 * h;
        let mut part = 0.0;
        for &(x, w) in rule {
            part += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * part;
    }
    total
}

/// Lagrange interpolation of samples on the uniform grid `x0 + k*dx` using
/// the `order` nodes closest to `x` (shifted inward at the ends).
pub fn lagrange_uniform(x0: f64, dx: f64, values: &[f64], x: f64, order: usize) -> f64 {
    let n = values.len();
    let order = order.min(n).max(1);
    let pos = (x - x0) / dx;
    let mut start = (pos - (order as f64 - 1.0) / 2.0).round() as isize;
    start = start.clamp(0, (n - order) as isize);
    let start = start as usize;
    let mut acc = 0.0;
    for a in 0..order {
        let xa = (start + a) as f64;
        let mut w = 1.0;
        for b in 0..order {
            if a != b {
                let xb = (start + b) as f64;
                w *= (pos - xb) / (xa - xb);
            }
        }
        acc += w * values[start + a];
    }
    acc
}

/// Fourth-order first derivative of samples at index `k` on a uniform grid
/// with spacing `h`; one-sided stencils near the ends.
pub fn d1_order4(values: &[f64], k: usize, h: f64) -> f64 {
    let n = values.len();
    let v = |i: usize| values[i];
    if k >= 2 && k + 2 < n {
        (-v(k + 2) + 8.0 * v(k + 1) - 8.0 * v(k - 1) + v(k - 2)) / (12.0 * h)
    } else if k < 2 {
        // forward five-point stencil about k
        let c = [-25.0, 48.0, -36.0, 16.0, -3.0];
        let base = k;
        if k == 1 {
            let c1 = [-3.0, -10.0, 18.0, -6.0, 1.0];
            return (c1[0] * v(0) + c1[1] * v(1) + c1[2] * v(2) + c1[3] * v(3) + c1[4] * v(4))
                / (12.0 * h);
        }
        (0..5).map(|i| c[i] * v(base + i)).sum::<f64>() / (12.0 * h)
    } else {
        let m = n - 1 - k;
        if m == 1 {
            let c1 = [3.0, 10.0, -18.0, 6.0, -1.0];
            return (c1[0] * v(n - 1) + c1[1] * v(n - 2) + c1[2] * v(n - 3) + c1[3] * v(n - 4)
                + c1[4] * v(n - 5))
                / (12.0 * h);
        }
        let c = [25.0, -48.0, 36.0, -16.0, 3.0];
        (0..5).map(|i| c[i] * v(n - 1 - i)).sum::<f64>() / (12.0 * h)
    }
}

/// Classical fourth-order Runge–Kutta for a scalar ODE `y' = f(t, y)`.
pub fn rk4<F: Fn(f64, f64) -> f64>(f: F, y0: f64, t0: f64, t1: f64, steps: usize) -> f64 {
    let steps = steps.max(1);
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    let mut t = t0;
    for _ in 0..steps {
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        let k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        let k4 = f(t + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
    }
    y
}

/// Square band matrix with equal lower and upper bandwidth, factored by
/// Gaussian elimination without pivoting (adequate for the diagonally
/// dominated elliptic systems it is used on; tiny pivots are reported).
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    bw: usize,
    // row r stores columns r - bw ..= r + bw
    data: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularPivot(pub usize);

impl BandedMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        BandedMatrix {
            n,
            bw,
            data: vec![0.0; n * (2 * bw + 1)],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    fn slot(&self, r: usize, c: usize) -> usize {
        debug_assert!(c + self.bw >= r && c <= r + self.bw);
        r * (2 * self.bw + 1) + (c + self.bw - r)
    }

    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let k = self.slot(r, c);
        self.data[k] += v;
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        if c + self.bw < r || c > r + self.bw {
            0.0
        } else {
            self.data[self.slot(r, c)]
        }
    }

    /// Solves `A x = b` in place, destroying the matrix.
    pub fn solve(mut self, b: &mut [f64]) -> Result<(), SingularPivot> {
        let (n, bw) = (self.n, self.bw);
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for k in 0..n {
            let pivot = self.data[self.slot(k, k)];
            if !(pivot.abs() > 1e-14 * scale) {
                return Err(SingularPivot(k));
            }
            let last = (k + bw).min(n - 1);
            for r in k + 1..=last {
                let srk = self.slot(r, k);
                let factor = self.data[srk] / pivot;
                if factor == 0.0 {
                    continue;
                }
                self.data[srk] = 0.0;
                for c in k + 1..=last {
                    let src = self.data[self.slot(k, c)];
                    let dst = self.slot(r, c);
                    self.data[dst] -= factor * src;
                }
                b[r] -= factor * b[k];
            }
        }
        for k in (0..n).rev() {
            let last = (k + bw).min(n - 1);
            let mut acc = b[k];
            for c in k + 1..=last {
                acc -= self.data[self.slot(k, c)] * b[c];
            }
            b[k] = acc / self.data[self.slot(k, k)];
        }
        Ok(())
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Format a float with 17 significant digits, independent of locale.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{:.16e}", x)
    } else {
        format!("{}", x)
    }
}

/// Finite-difference weights for the `m`-th derivative at `z` from samples at
/// `xs` (Fornberg's recursion).
pub fn fd_weights(z: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// First derivative at index `k` from the `width` samples nearest to it
/// (shifted inward at the ends), uniform spacing `h`.
pub fn d1_stencil(values: &[f64], k: usize, h: f64, width: usize) -> f64 {
    let n = values.len();
    let width = width.min(n);
    let start = (k as isize - (width as isize - 1) / 2).clamp(0, (n - width) as isize) as usize;
    let xs: Vec<f64> = (start..start + width).map(|i| i as f64).collect();
    let w = fd_weights(k as f64, &xs, 1);
    w.iter()
        .zip(&values[start..start + width])
        .map(|(a, b)| a * b)
        .sum::<f64>()
        / h
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let rule = gauss_legendre(8);
        let v = composite_gl(0.0, 2.0, 3, &rule, |x| x.powi(15));
        assert_abs_diff_eq!(v, 2f64.powi(16) / 16.0, epsilon = 1e-9);
    }

    #[test]
    fn lagrange_reproduces_cubics() {
        let xs: Vec<f64> = (0..20).map(|k| 0.1 * k as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x * x - x).collect();
        let v = lagrange_uniform(0.0, 0.1, &ys, 1.234, 4);
        assert_abs_diff_eq!(v, 1.234f64.powi(3) - 1.234, epsilon = 1e-12);
        let v = lagrange_uniform(0.0, 0.1, &ys, 0.01, 6);
        assert_abs_diff_eq!(v, 0.01f64.powi(3) - 0.01, epsilon = 1e-12);
    }

    #[test]
    fn fourth_order_derivative_exact_on_quartics() {
        let h = 0.3;
        let ys: Vec<f64> = (0..9).map(|k| (k as f64 * h).powi(4)).collect();
        for k in 0..9 {
            let x = k as f64 * h;
            assert_abs_diff_eq!(d1_order4(&ys, k, h), 4.0 * x.powi(3), epsilon = 1e-9);
        }
    }

    #[test]
    fn banded_solve_matches_dense() {
        let n = 12;
        let mut a = BandedMatrix::zeros(n, 3);
        let mut dense = nalgebra::DMatrix::<f64>::zeros(n, n);
        for r in 0..n {
            for c in r.saturating_sub(3)..(r + 4).min(n) {
                let v = if r == c { 10.0 } else { ((r * 7 + c * 3) % 5) as f64 - 2.0 };
                a.add(r, c, v);
                dense[(r, c)] = v;
            }
        }
        let rhs: Vec<f64> = (0..n).map(|k| (k as f64).sin()).collect();
        let mut x = rhs.clone();
        a.solve(&mut x).unwrap();
        let exact = dense.lu().solve(&nalgebra::DVector::from_vec(rhs)).unwrap();
        for k in 0..n {
            assert_abs_diff_eq!(x[k], exact[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn banded_solve_reports_zero_pivot() {
        let mut a = BandedMatrix::zeros(3, 1);
        a.add(0, 1, 1.0);
        a.add(1, 0, 1.0);
        a.add(2, 2, 1.0);
        assert_eq!(a.solve(&mut [1.0, 1.0, 1.0]), Err(SingularPivot(0)));
    }

    #[test]
    fn rk4_exponential() {
        let y = rk4(|_, y| y, 1.0, 0.0, 1.0, 200);
        assert_abs_diff_eq!(y, std::f64::consts::E, epsilon = 1e-10);
    }

    #[test]
    fn fornberg_weights_match_textbook_stencils() {
        let w = fd_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0], 1);
        let expect = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
        let w2 = fd_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_abs_diff_eq!(w2[1], -2.0, epsilon = 1e-14);
    }

    #[test]
    fn seven_point_stencil_is_sixth_order_at_the_edge() {
        let err = |n: usize| {
            let h = 1.0 / (n - 1) as f64;
            let v: Vec<f64> = (0..n).map(|i| (-(i as f64) * h).exp()).collect();
            (d1_stencil(&v, 0, h, 7) + 1.0).abs()
        };
        let ratio = err(41) / err(81);
        assert!(ratio > 40.0, "ratio {ratio}");
    }
}
