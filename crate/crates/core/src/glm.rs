//! Marchenko (GLM) equations at `t = 0`: kernels `R_+`, `R_-`, the
//! diagonal values `K_+(x,x)`, `K_-(x,x)`, the potential recovered from
//! them, the invariant `K(gamma)` by splitting at `x0`, and the Riccati
//! inversion `u -> q`.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::numerics::{self, chebyshev_derivative, chebyshev_points, OdeError, QuinticHermite};
use crate::param::GammaParam;
use crate::quadrature::GaussLegendre;
use crate::rhp::PotentialTable;
use crate::scattering::{Scattering, Side};
use crate::special::polylog;

/// Nodes per unit-width Gauss–Legendre panel of the Fredholm discretization.
pub const PANEL_NODES: usize = 16;
/// Shortest cut of the `z`-integral.
pub const MIN_CUT: f64 = 12.0;
/// Longest admissible cut of the `z`-integral.
pub const MAX_CUT: f64 = 200.0;
/// Admissible kernel magnitude beyond the cut.
pub const KERNEL_TAIL: f64 = 1e-14;
/// Admissible `|Im R_-|`.
pub const REALNESS_TOL: f64 = 1e-8;
/// Admissible `|L|` at the ends of the `k` window.
pub const LEAK_LIMIT: f64 = 1e-12;
/// Admissible spread of `K(gamma)` between two split points.
pub const SPLIT_TOL: f64 = 1e-5;
/// Riccati blow-up bound on `|q|`.
pub const RICCATI_BOUND: f64 = 1e3;

const K_WINDOW: f64 = 16.0;
const K_STEP: f64 = 0.01;
const FFT_LEN: usize = 1 << 16;
const LAGRANGE_POINTS: usize = 8;

/// Which Marchenko equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlmSide {
    Plus,
    Minus,
}

/// `R_+(x) = -sqrt(gamma/pi) e^{-x^2}`.
pub fn r_plus(x: f64, p: &GammaParam) -> f64 {
    -(p.gamma() / PI).sqrt() * (-x * x).exp()
}

/// `R_-` tabulated by FFT of `L` on a uniform `k` grid.
#[derive(Debug, Clone)]
pub struct RMinusTable {
    x_start: f64,
    dx: f64,
    values: Vec<f64>,
    /// `prefix_max[m] = max_{i <= m} |values[i]|`.
    prefix_max: Vec<f64>,
    /// Largest `|Im|` seen before discarding the imaginary part.
    pub max_imag: f64,
}

impl RMinusTable {
    pub fn new(p: &GammaParam) -> Result<Self> {
        let n_k = (2.0 * K_WINDOW / K_STEP).round() as usize + 1;
        let half = FFT_LEN / 2;
        let dx = 2.0 * PI / (FFT_LEN as f64 * K_STEP);
        if p.is_trivial() {
            return Ok(Self {
                x_start: -(half as f64) * dx,
                dx,
                values: vec![0.0; FFT_LEN],
                prefix_max: vec![0.0; FFT_LEN],
                max_imag: 0.0,
            });
        }
        let sc = Scattering::new(p)?;
        let ks: Vec<f64> = (0..n_k).map(|j| -K_WINDOW + j as f64 * K_STEP).collect();
        let ls: Vec<C64> = ks
            .par_iter()
            .map(|&k| sc.left_reflection(C64::new(k, 0.0), Side::Plus))
            .collect::<Result<_>>()?;
        let leak = ls[0].norm().max(ls[n_k - 1].norm());
        if leak > LEAK_LIMIT {
            return Err(Error::TruncationLeak {
                what: "left reflection coefficient",
                magnitude: leak,
            });
        }
        // Index j <-> k = (j - half) dk, m <-> x = (m - half) dx, so
        // e^{-i k x} = e^{-2 pi i j m / N} (-1)^{j + m}.
        let mut buf = vec![C64::new(0.0, 0.0); FFT_LEN];
        for (&k, &l) in ks.iter().zip(&ls) {
            let j = (k / K_STEP).round() as i64 + half as i64;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            buf[j as usize] = l * sign;
        }
        let fft: Arc<dyn rustfft::Fft<f64>> = FftPlanner::new().plan_fft_forward(FFT_LEN);
        fft.process(&mut buf);
        let scale = K_STEP / (2.0 * PI);
        let mut max_imag = 0.0f64;
        let values: Vec<f64> = buf
            .iter()
            .enumerate()
            .map(|(m, v)| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                let v = v * (sign * scale);
                max_imag = max_imag.max(v.im.abs());
                v.re
            })
            .collect();
        if max_imag > REALNESS_TOL {
            return Err(Error::RealnessViolation {
                what: "R_minus",
                im: max_imag,
            });
        }
        let prefix_max = values
            .iter()
            .scan(0.0f64, |m, v| {
                *m = m.max(v.abs());
                Some(*m)
            })
            .collect();
        Ok(Self {
            x_start: -(half as f64) * dx,
            dx,
            values,
            prefix_max,
            max_imag,
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x_start, self.x_start + (self.values.len() - 1) as f64 * self.dx)
    }

    /// Eight-point Lagrange interpolation.
    pub fn eval(&self, x: f64) -> f64 {
        let pos = (x - self.x_start) / self.dx;
        let base = pos.floor() as i64 - (LAGRANGE_POINTS as i64 / 2 - 1);
        let base = base.clamp(0, (self.values.len() - LAGRANGE_POINTS) as i64) as usize;
        let mut acc = 0.0;
        for i in 0..LAGRANGE_POINTS {
            let mut w = 1.0;
            let xi = (base + i) as f64;
            for j in 0..LAGRANGE_POINTS {
                if i != j {
                    let xj = (base + j) as f64;
                    w *= (pos - xj) / (xi - xj);
                }
            }
            acc += w * self.values[base + i];
        }
        acc
    }

    /// `max |R_-(s)|` over tabulated `s <= x`.
    pub fn max_left_of(&self, x: f64) -> f64 {
        let m = ((x - self.x_start) / self.dx).floor();
        if m < 0.0 {
            return 0.0;
        }
        self.prefix_max[(m as usize).min(self.values.len() - 1)]
    }

    /// `(s, R_-(s))` at the table nodes inside `[lo, hi]`.
    pub fn samples(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        self.values
            .iter()
            .enumerate()
            .map(|(m, &v)| (self.x_start + m as f64 * self.dx, v))
            .filter(|(s, _)| *s >= lo && *s <= hi)
            .collect()
    }
}

/// `R_-(x)`; builds the whole table, so prefer [`RMinusTable`] for repeated use.
pub fn r_minus(x: f64, p: &GammaParam) -> Result<f64> {
    Ok(RMinusTable::new(p)?.eval(x))
}

/// Kernel data for one `gamma`, reused across `x`.
#[derive(Debug, Clone)]
pub struct GlmKernels {
    p: GammaParam,
    minus: Option<RMinusTable>,
    rule: GaussLegendre<f64>,
}

impl GlmKernels {
    /// Plus-side kernels only.
    pub fn plus(p: &GammaParam) -> Self {
        Self {
            p: *p,
            minus: None,
            rule: GaussLegendre::new(PANEL_NODES),
        }
    }

    /// Both sides; tabulates `R_-`.
    pub fn new(p: &GammaParam) -> Result<Self> {
        Ok(Self {
            minus: Some(RMinusTable::new(p)?),
            ..Self::plus(p)
        })
    }

    pub fn param(&self) -> &GammaParam {
        &self.p
    }

    pub fn minus_table(&self) -> Option<&RMinusTable> {
        self.minus.as_ref()
    }

    fn kernel(&self, side: GlmSide, s: f64) -> f64 {
        match side {
            GlmSide::Plus => r_plus(s, &self.p),
            GlmSide::Minus => self.minus.as_ref().map_or(0.0, |t| t.eval(s)),
        }
    }

    /// Length of the `z`-window so that the kernel beyond it is below
    /// [`KERNEL_TAIL`].
    fn cut(&self, side: GlmSide, x: f64) -> Result<f64> {
        match side {
            GlmSide::Plus => {
                let cut = MIN_CUT.max(6.5 - 2.0 * x).ceil();
                let tail = r_plus(2.0 * x + cut, &self.p).abs();
                if tail > KERNEL_TAIL {
                    return Err(Error::KernelTruncation { side: "plus", tail });
                }
                Ok(cut)
            }
            GlmSide::Minus => {
                let table = self
                    .minus
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("R_minus was not tabulated".into()))?;
                let mut cut = MIN_CUT;
                while table.max_left_of(2.0 * x - cut) > KERNEL_TAIL {
                    cut += 1.0;
                    if cut > MAX_CUT || 2.0 * x - cut < table.range().0 {
                        return Err(Error::KernelTruncation {
                            side: "minus",
                            tail: table.max_left_of(2.0 * x - cut),
                        });
                    }
                }
                Ok(cut)
            }
        }
    }

    /// `K_pm(x, x)` from a Gauss–Legendre Nyström solve with `refine`
    /// nodes per panel multiple.
    pub fn diagonal_with(&self, side: GlmSide, x: f64, refine: usize) -> Result<f64> {
        if self.p.is_trivial() {
            return Ok(0.0);
        }
        let cut = self.cut(side, x)?;
        let (lo, hi) = match side {
            GlmSide::Plus => (x, x + cut),
            GlmSide::Minus => (x - cut, x),
        };
        let panels = cut as usize;
        let rule = if refine == 1 {
            self.rule.clone()
        } else {
            GaussLegendre::new(PANEL_NODES * refine)
        };
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for i in 0..panels {
            let a = lo + (hi - lo) * i as f64 / panels as f64;
            let b = lo + (hi - lo) * (i + 1) as f64 / panels as f64;
            for (z, w) in rule.mapped(a, b) {
                nodes.push(z);
                weights.push(w);
            }
        }
        let n = nodes.len();
        let a = Mat::<f64>::from_fn(n, n, |i, j| {
            let v = weights[j] * self.kernel(side, nodes[j] + nodes[i]);
            if i == j {
                1.0 + v
            } else {
                v
            }
        });
        let rhs = Mat::<f64>::from_fn(n, 1, |i, _| -self.kernel(side, x + nodes[i]));
        let k = a.partial_piv_lu().solve(&rhs);
        let mut diag = -self.kernel(side, 2.0 * x);
        for j in 0..n {
            diag -= weights[j] * k[(j, 0)] * self.kernel(side, nodes[j] + x);
        }
        if !diag.is_finite() {
            return Err(Error::SingularSystem);
        }
        Ok(diag)
    }

    pub fn diagonal(&self, side: GlmSide, x: f64) -> Result<f64> {
        self.diagonal_with(side, x, 1)
    }
}

/// `K_pm(x, x)` for one `x`. For the minus side this tabulates `R_-`.
pub fn solve_volterra(side: GlmSide, x: f64, p: &GammaParam) -> Result<f64> {
    let kernels = match side {
        GlmSide::Plus => GlmKernels::plus(p),
        GlmSide::Minus => GlmKernels::new(p)?,
    };
    kernels.diagonal(side, x)
}

/// Diagonal `K_pm(x, x)` on a grid.
#[derive(Debug, Clone)]
pub struct GlmKernelTable {
    pub side: GlmSide,
    pub x_values: Vec<f64>,
    pub kernel_diag: Vec<f64>,
}

impl GlmKernels {
    pub fn table(&self, side: GlmSide, xs: &[f64]) -> Result<GlmKernelTable> {
        let kernel_diag = xs
            .par_iter()
            .map(|&x| self.diagonal(side, x))
            .collect::<Result<Vec<_>>>()?;
        Ok(GlmKernelTable {
            side,
            x_values: xs.to_vec(),
            kernel_diag,
        })
    }
}

/// Chebyshev interpolant of `u = -d/dx 2 K_+(x, x)` on `[a, b]`.
#[derive(Debug, Clone)]
pub struct GlmPotential {
    pub a: f64,
    pub b: f64,
    pub points: Vec<f64>,
    /// `2 K_+(x, x) = int_x^infty u`.
    pub int_u: Vec<f64>,
    pub u: Vec<f64>,
}

impl GlmPotential {
    pub fn new(kernels: &GlmKernels, a: f64, b: f64, degree: usize) -> Result<Self> {
        if !(b > a) || degree < 2 {
            return Err(Error::InvalidParameter(format!("interval [{a}, {b}], degree {degree}")));
        }
        let points = chebyshev_points(degree, a, b);
        let int_u = points
            .par_iter()
            .map(|&x| Ok(2.0 * kernels.diagonal(GlmSide::Plus, x)?))
            .collect::<Result<Vec<_>>>()?;
        let u = chebyshev_derivative(&int_u, a, b).into_iter().map(|d| -d).collect();
        Ok(Self {
            a,
            b,
            points,
            int_u,
            u,
        })
    }

    /// Barycentric interpolation of `u` at `x` in `[a, b]`.
    pub fn u_at(&self, x: f64) -> f64 {
        barycentric(&self.points, &self.u, x)
    }

    pub fn int_u_at(&self, x: f64) -> f64 {
        barycentric(&self.points, &self.int_u, x)
    }
}

fn barycentric(points: &[f64], values: &[f64], x: f64) -> f64 {
    let n = points.len() - 1;
    let mut num = 0.0;
    let mut den = 0.0;
    for (j, (&xj, &fj)) in points.iter().zip(values).enumerate() {
        if x == xj {
            return fj;
        }
        let mut w = if j % 2 == 0 { 1.0 } else { -1.0 };
        if j == 0 || j == n {
            w *= 0.5;
        }
        let t = w / (x - xj);
        num += t * fj;
        den += t;
    }
    num / den
}

/// Value of `K(gamma)` by splitting at `x0`, with its parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KSplit {
    pub x0: f64,
    pub value: f64,
    /// `int_{-infty}^{x0} 2 K_-(x, x) dx`.
    pub minus_part: f64,
    /// `int_{x0}^{infty} 2 K_+(x, x) dx`.
    pub plus_part: f64,
    /// `x0 int u`.
    pub mass_part: f64,
}

const SPLIT_PANEL: f64 = 0.5;
const SPLIT_TAIL: f64 = 1e-15;
const SPLIT_LEFT_LIMIT: f64 = 150.0;

/// `K(gamma)` from one split point.
pub fn k_split(kernels: &GlmKernels, x0: f64) -> Result<KSplit> {
    let p = kernels.param();
    let rule = GaussLegendre::<f64>::new(PANEL_NODES);
    let panel = |a: f64, b: f64, side: GlmSide| -> Result<(f64, f64)> {
        let pts: Vec<(f64, f64)> = rule.mapped(a, b).collect();
        let vals = pts
            .par_iter()
            .map(|&(x, _)| kernels.diagonal(side, x))
            .collect::<Result<Vec<_>>>()?;
        let integral = pts.iter().zip(&vals).map(|((_, w), v)| 2.0 * w * v).sum();
        let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok((integral, peak))
    };
    let mut plus_part = 0.0;
    let mut a = x0;
    loop {
        let (v, peak) = panel(a, a + SPLIT_PANEL, GlmSide::Plus)?;
        plus_part += v;
        a += SPLIT_PANEL;
        if peak < SPLIT_TAIL && a > 0.0 {
            break;
        }
    }
    let mut minus_part = 0.0;
    let mut b = x0;
    loop {
        let (v, peak) = panel(b - SPLIT_PANEL, b, GlmSide::Minus)?;
        minus_part += v;
        b -= SPLIT_PANEL;
        if peak < SPLIT_TAIL {
            break;
        }
        if x0 - b > SPLIT_LEFT_LIMIT {
            return Err(Error::TailDivergence {
                detail: format!("K_minus(x,x) still {peak:e} at x = {b}"),
            });
        }
    }
    let mass = (2.0 / PI).sqrt() * polylog(1.5, p.gamma());
    let mass_part = x0 * mass;
    Ok(KSplit {
        x0,
        value: -minus_part + plus_part + mass_part,
        minus_part,
        plus_part,
        mass_part,
    })
}

/// `K(gamma)` by the splitting formula at `x0`, checked against the split
/// at `x0 - 1`.
pub fn k_invariant_glm(p: &GammaParam, x0: f64) -> Result<f64> {
    if p.is_trivial() {
        return Ok(0.0);
    }
    let kernels = GlmKernels::new(p)?;
    let a = k_split(&kernels, x0)?;
    let b = k_split(&kernels, x0 - 1.0)?;
    let spread = (a.value - b.value).abs();
    if spread > SPLIT_TOL {
        return Err(Error::SplitInconsistency { spread });
    }
    Ok(a.value)
}

/// Integrates `q' = q^2 - u` from the right end of the table to the left,
/// seeded with the Gaussian tail `q(X) = 2 sqrt(gamma/pi) e^{-4 X^2}`.
pub fn riccati_q_from_u(table: &PotentialTable) -> Result<Vec<f64>> {
    let xs = table.xs();
    let n = xs.len();
    if n < 2 {
        return Err(Error::InvalidParameter("table needs at least two rows".into()));
    }
    let x_end = xs[n - 1];
    if x_end < 8.0 {
        return Err(Error::InvalidParameter(format!("table ends at {x_end} < 8")));
    }
    table.check()?;
    let u = QuinticHermite::new(
        xs.clone(),
        table.column(|r| r.u),
        table.column(|r| r.u_x),
        table.column(|r| r.u_xx),
    );
    let mut q = vec![0.0; n];
    q[n - 1] = 2.0 * (table.gamma / PI).sqrt() * (-4.0 * x_end * x_end).exp();
    for i in (0..n - 1).rev() {
        q[i] = numerics::dormand_prince(|x, q| q * q - u.eval(x), xs[i + 1], q[i + 1], xs[i], 1e-13, RICCATI_BOUND)
            .map_err(|e| match e {
                OdeError::Bound { at } | OdeError::StepUnderflow { at } => Error::BlowUp {
                    x: at,
                    bound: RICCATI_BOUND,
                },
            })?;
    }
    Ok(q)
}
