//! Small numerical kernels shared by the solvers: Hermite quadrature and
//! interpolation on tabulated data, Chebyshev differentiation, and an
//! adaptive Dormand–Prince integrator for scalar ODEs.

use num_traits::{Float, FloatConst};

fn c<T: Float>(v: f64) -> T {
    T::from(v).unwrap()
}

/// `out[i] = int_{x_i}^{x_last} f` from values and derivatives at the nodes.
///
/// Uses the two-point Hermite rule on each interval, `O(h^4)` with `df`
/// alone and `O(h^6)` when `d2f` is also given.
pub fn cumulative_from_right<T: Float>(xs: &[T], f: &[T], df: &[T], d2f: Option<&[T]>) -> Vec<T> {
    let n = xs.len();
    let mut out = vec![T::zero(); n];
    for i in (0..n.saturating_sub(1)).rev() {
        out[i] = out[i + 1] + interval_integral(xs, f, df, d2f, i);
    }
    out
}

/// `out[i] = int_{x_0}^{x_i} f`; see [`cumulative_from_right`].
pub fn cumulative_from_left<T: Float>(xs: &[T], f: &[T], df: &[T], d2f: Option<&[T]>) -> Vec<T> {
    let n = xs.len();
    let mut out = vec![T::zero(); n];
    for i in 1..n {
        out[i] = out[i - 1] + interval_integral(xs, f, df, d2f, i - 1);
    }
    out
}

fn interval_integral<T: Float>(xs: &[T], f: &[T], df: &[T], d2f: Option<&[T]>, i: usize) -> T {
    let h = xs[i + 1] - xs[i];
    match d2f {
        None => h / c(2.0) * (f[i] + f[i + 1]) + h * h / c(12.0) * (df[i] - df[i + 1]),
        Some(g) => {
            h / c(2.0) * (f[i] + f[i + 1])
                + h * h / c(10.0) * (df[i] - df[i + 1])
                + h * h * h / c(120.0) * (g[i] + g[i + 1])
        }
    }
}

/// Piecewise quintic Hermite interpolant through values and first and
/// second derivatives on an increasing grid.
#[derive(Debug, Clone)]
pub struct QuinticHermite<T> {
    xs: Vec<T>,
    f: Vec<T>,
    df: Vec<T>,
    d2f: Vec<T>,
}

impl<T: Float> QuinticHermite<T> {
    /// Panics unless the four slices have equal length of at least 2.
    pub fn new(xs: Vec<T>, f: Vec<T>, df: Vec<T>, d2f: Vec<T>) -> Self {
        assert!(xs.len() >= 2 && f.len() == xs.len() && df.len() == xs.len() && d2f.len() == xs.len());
        Self { xs, f, df, d2f }
    }

    pub fn domain(&self) -> (T, T) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Value at `x`; clamps to the end intervals outside the domain.
    pub fn eval(&self, x: T) -> T {
        let n = self.xs.len();
        let i = match self.xs.iter().position(|&v| v > x) {
            Some(0) => 0,
            Some(k) => k - 1,
            None => n - 2,
        }
        .min(n - 2);
        self.eval_in(i, x)
    }

    fn eval_in(&self, i: usize, x: T) -> T {
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s3 * s;
        let s5 = s4 * s;
        let one = T::one();
        let h00 = one - c::<T>(10.0) * s3 + c::<T>(15.0) * s4 - c::<T>(6.0) * s5;
        let h10 = s - c::<T>(6.0) * s3 + c::<T>(8.0) * s4 - c::<T>(3.0) * s5;
        let h20 = (s2 - c::<T>(3.0) * s3 + c::<T>(3.0) * s4 - s5) / c(2.0);
        let h01 = c::<T>(10.0) * s3 - c::<T>(15.0) * s4 + c::<T>(6.0) * s5;
        let h11 = -c::<T>(4.0) * s3 + c::<T>(7.0) * s4 - c::<T>(3.0) * s5;
        let h21 = (s3 - c::<T>(2.0) * s4 + s5) / c(2.0);
        h00 * self.f[i]
            + h10 * h * self.df[i]
            + h20 * h * h * self.d2f[i]
            + h01 * self.f[i + 1]
            + h11 * h * self.df[i + 1]
            + h21 * h * h * self.d2f[i + 1]
    }
}

/// Chebyshev–Lobatto points on `[a, b]`, in increasing order.
pub fn chebyshev_points<T: Float + FloatConst>(n: usize, a: T, b: T) -> Vec<T> {
    let half = (b - a) / c(2.0);
    let mid = (b + a) / c(2.0);
    (0..=n)
        .map(|j| mid - half * (T::PI() * c::<T>(j as f64) / c::<T>(n as f64)).cos())
        .collect()
}

/// Derivative at the points of [`chebyshev_points`] of the polynomial
/// interpolating `values` there.
pub fn chebyshev_derivative<T: Float + FloatConst>(values: &[T], a: T, b: T) -> Vec<T> {
    let n = values.len() - 1;
    // Points ordered as -cos, i.e. reversed standard nodes x_j = cos(pi j / n).
    let x: Vec<T> = (0..=n)
        .map(|j| -(T::PI() * c::<T>(j as f64) / c::<T>(n as f64)).cos())
        .collect();
    let weight = |j: usize| {
        let base = if j == 0 || j == n { c::<T>(2.0) } else { T::one() };
        if j % 2 == 0 {
            base
        } else {
            -base
        }
    };
    let scale = c::<T>(2.0) / (b - a);
    let mut out = vec![T::zero(); n + 1];
    for i in 0..=n {
        let mut diag = T::zero();
        let mut acc = T::zero();
        for j in 0..=n {
            if i == j {
                continue;
            }
            let dij = weight(i) / weight(j) / (x[i] - x[j]);
            acc = acc + dij * values[j];
            diag = diag - dij;
        }
        out[i] = (acc + diag * values[i]) * scale;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OdeError {
    StepUnderflow { at: f64 },
    Bound { at: f64 },
}

/// Adaptive Dormand–Prince 5(4) for `y' = f(x, y)` from `x0` to `x1`
/// (either direction). Fails if `|y|` exceeds `bound`.
pub fn dormand_prince<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    x0: f64,
    y0: f64,
    x1: f64,
    tol: f64,
    bound: f64,
) -> Result<f64, OdeError> {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut h = span.abs().min(0.1);
    let mut k = [0.0; 7];
    k[0] = f(x, y);
    while (x1 - x) * dir > 0.0 {
        let remaining = (x1 - x).abs();
        if remaining <= 1e-13 * (1.0 + x.abs()) {
            break;
        }
        h = h.min(remaining);
        if h < 1e-12 * (1.0 + x.abs()) {
            return Err(OdeError::StepUnderflow { at: x });
        }
        let hs = h * dir;
        for s in 0..6 {
            let mut yi = y;
            for (j, kj) in k.iter().enumerate().take(s + 1) {
                yi += hs * A[s][j] * kj;
            }
            k[s + 1] = f(x + C[s] * hs, yi);
        }
        let y5 = y + hs * (0..7).map(|i| B5[i] * k[i]).sum::<f64>();
        let y4 = y + hs * (0..7).map(|i| B4[i] * k[i]).sum::<f64>();
        let err = (y5 - y4).abs() / (tol * (1.0 + y5.abs()));
        if err <= 1.0 {
            x += hs;
            y = y5;
            if !(y.abs() <= bound) {
                return Err(OdeError::Bound { at: x });
            }
            k[0] = k[6];
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_cumulative_orders() {
        let xs: Vec<f64> = (0..=40).map(|i| i as f64 * 0.05).collect();
        let f: Vec<f64> = xs.iter().map(|x| x.sin()).collect();
        let df: Vec<f64> = xs.iter().map(|x| x.cos()).collect();
        let d2f: Vec<f64> = xs.iter().map(|x| -x.sin()).collect();
        let exact = 1.0 - 2f64.cos();
        let c4 = cumulative_from_left(&xs, &f, &df, None);
        let c6 = cumulative_from_left(&xs, &f, &df, Some(&d2f));
        assert!((c4[40] - exact).abs() < 1e-7);
        assert!((c6[40] - exact).abs() < 1e-12);
        let r = cumulative_from_right(&xs, &f, &df, Some(&d2f));
        assert!((r[0] - exact).abs() < 1e-12 && r[40] == 0.0);
    }

    #[test]
    fn quintic_hermite_is_accurate() {
        let xs: Vec<f64> = (0..=20).map(|i| -1.0 + i as f64 * 0.1).collect();
        let interp = QuinticHermite::new(
            xs.clone(),
            xs.iter().map(|x| x.exp()).collect(),
            xs.iter().map(|x| x.exp()).collect(),
            xs.iter().map(|x| x.exp()).collect(),
        );
        for &x in &[-0.97, 0.123, 0.55, 1.0] {
            assert!((interp.eval(x) - f64::exp(x)).abs() < 1e-10, "{}", interp.eval(x) - f64::exp(x));
        }
    }

    #[test]
    fn chebyshev_differentiates_exp() {
        let xs = chebyshev_points(30, -2.0, 3.0);
        let v: Vec<f64> = xs.iter().map(|x: &f64| (0.5 * x).exp()).collect();
        let d = chebyshev_derivative(&v, -2.0, 3.0);
        for (x, dv) in xs.iter().zip(&d) {
            assert!((dv - 0.5 * (0.5 * x).exp()).abs() < 1e-11);
        }
        let xs32 = chebyshev_points(12, 0.0f32, 1.0);
        let d32 = chebyshev_derivative(&xs32.iter().map(|x| x * x).collect::<Vec<_>>(), 0.0, 1.0);
        assert!((d32[6] - 2.0 * xs32[6]).abs() < 1e-4);
    }

    #[test]
    fn dormand_prince_both_directions() {
        let y = dormand_prince(|_, y| -y, 0.0, 1.0, 3.0, 1e-12, 1e3).unwrap();
        assert!((y - (-3f64).exp()).abs() < 1e-11);
        let back = dormand_prince(|_, y| -y, 3.0, y, 0.0, 1e-12, 1e3).unwrap();
        assert!((back - 1.0).abs() < 1e-10);
        // y' = y^2 blows up at x = 1.
        assert!(matches!(
            dormand_prince(|_, y| y * y, 0.0, 1.0, 2.0, 1e-10, 1e3),
            Err(OdeError::Bound { .. }) | Err(OdeError::StepUnderflow { .. })
        ));
    }
}
