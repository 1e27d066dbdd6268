//! Nyström solution of the singular integral equation for the matrix
//! Riemann–Hilbert problem with jump
//! `J = [[1, conj(R) e^{-2i theta}], [-R e^{2i theta}, 1 - |R|^2]]`,
//! `theta = k x + 4 k^3 t`, on the real line.
//!
//! Unknowns are sampled on a uniform grid `s_j = j h`. The Cauchy operator
//! acts on the sinc interpolant of its argument, whose Cauchy transform is
//! known in closed form, so `C_+` is an exact Toeplitz matrix and `M(k)` can
//! be evaluated anywhere off the grid.

use std::f64::consts::PI;
use std::sync::Arc;

use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::param::GammaParam;
use crate::quadrature::{ContourGrid, ContourShape, DEFAULT_TRUNCATION};
use crate::scattering::{reflection_r, Side};
use crate::special::expm1_c;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest admissible solver residual.
pub const RESIDUAL_LIMIT: f64 = 1e-8;
/// Largest admissible magnitude of a field at the truncation ends.
pub const LEAK_LIMIT: f64 = 1e-12;
const HYPERBOLIC_TOL: f64 = 1e-8;

/// 2×2 matrices sampled at the nodes of a contour grid.
#[derive(Debug, Clone)]
pub struct MatrixField {
    grid: ContourGrid,
    values: Vec<Mat2>,
}

impl MatrixField {
    pub fn new(grid: ContourGrid, values: Vec<Mat2>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values for {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn<F: FnMut(C64) -> Mat2>(grid: ContourGrid, f: F) -> Self {
        let values = grid.nodes().iter().copied().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &ContourGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Mat2] {
        &self.values
    }

    fn end_magnitude(&self) -> f64 {
        match (self.values.first(), self.values.last()) {
            (Some(a), Some(b)) => a.max_abs().max(b.max_abs()),
            _ => 0.0,
        }
    }
}

fn uniform_step(grid: &ContourGrid) -> Result<f64> {
    match grid.shape() {
        ContourShape::Uniform { step } => Ok(step),
        other => Err(Error::InvalidParameter(format!(
            "RHP collocation needs a uniform real grid, got {other:?}"
        ))),
    }
}

/// Cauchy transform `(1/2 pi i) int sinc(s) / (s - z) ds` of the unit-step
/// sinc function; `side` selects the boundary value for real `z`.
fn sinc_cauchy(z: C64, side: Side) -> C64 {
    let upper = z.im > 0.0 || (z.im == 0.0 && side == Side::Plus);
    if z == C64::new(0.0, 0.0) {
        return C64::new(if upper { 0.5 } else { -0.5 }, 0.0);
    }
    let phase = if upper { I * PI * z } else { -I * PI * z };
    expm1_c(phase) / (2.0 * PI * I * z)
}

/// Toeplitz symbol of the discrete `C_+` at integer offsets `d`.
fn cplus_offset(d: i64) -> C64 {
    if d == 0 {
        C64::new(0.5, 0.0)
    } else if d % 2 != 0 {
        I / (PI * d as f64)
    } else {
        C64::new(0.0, 0.0)
    }
}

/// Discrete `C_+` on `n` equispaced nodes, applied by FFT convolution.
struct CplusOperator {
    n: usize,
    kernel: Vec<C64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl CplusOperator {
    fn new(n: usize) -> Self {
        let len = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut kernel = vec![C64::new(0.0, 0.0); len];
        for d in -(n as i64 - 1)..n as i64 {
            kernel[d.rem_euclid(len as i64) as usize] = cplus_offset(d) / len as f64;
        }
        forward.process(&mut kernel);
        Self {
            n,
            kernel,
            forward,
            inverse,
        }
    }

    fn apply_in_place(&self, buf: &mut Vec<C64>) {
        buf.resize(self.kernel.len(), C64::new(0.0, 0.0));
        self.forward.process(buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel) {
            *b *= k;
        }
        self.inverse.process(buf);
        buf.truncate(self.n);
    }

    fn apply(&self, values: &[C64]) -> Vec<C64> {
        let mut buf = values.to_vec();
        self.apply_in_place(&mut buf);
        buf
    }

    fn apply_mat2(&self, values: &[Mat2]) -> Vec<Mat2> {
        let mut out = vec![Mat2::ZERO; self.n];
        for r in 0..2 {
            for c in 0..2 {
                let col: Vec<C64> = values.iter().map(|m| m.get(r, c)).collect();
                for (o, v) in out.iter_mut().zip(self.apply(&col)) {
                    o.0[r][c] = v;
                }
            }
        }
        out
    }

    /// `C_+ U` for a dense `n × n` matrix `U`, column by column.
    fn apply_matrix(&self, u: &Mat<C64>) -> Mat<C64> {
        let mut out = Mat::<C64>::zeros(self.n, self.n);
        let mut buf = Vec::with_capacity(self.kernel.len());
        for j in 0..self.n {
            buf.clear();
            buf.extend((0..self.n).map(|i| u[(i, j)]));
            self.apply_in_place(&mut buf);
            for (i, v) in buf.iter().enumerate() {
                out[(i, j)] = *v;
            }
        }
        out
    }
}

/// Upper boundary value of the Cauchy transform of `f`, at the nodes of `f`.
pub fn cauchy_plus(f: &MatrixField) -> Result<MatrixField> {
    uniform_step(&f.grid)?;
    let leak = f.end_magnitude();
    if leak > LEAK_LIMIT {
        return Err(Error::TruncationLeak {
            what: "Cauchy transform argument",
            magnitude: leak,
        });
    }
    Ok(MatrixField {
        grid: f.grid.clone(),
        values: CplusOperator::new(f.values.len()).apply_mat2(&f.values),
    })
}

fn jump_at(s: f64, x: f64, t: f64, p: &GammaParam) -> Mat2 {
    let r = reflection_r(C64::new(s, 0.0), p).re;
    let theta = s * x + 4.0 * s * s * s * t;
    let e = C64::from_polar(1.0, 2.0 * theta);
    Mat2::new(
        C64::new(1.0, 0.0),
        e.conj() * r,
        -e * r,
        C64::new(1.0 - r * r, 0.0),
    )
}

/// `J^{(j)} = d^j J / dx^j`; only the off-diagonal entries depend on `x`.
fn jump_x_derivative(j: &Mat2, s: f64, order: u32) -> Mat2 {
    let up = (C64::new(0.0, -2.0 * s)).powu(order);
    let down = (C64::new(0.0, 2.0 * s)).powu(order);
    Mat2::new(C64::new(0.0, 0.0), j.get(0, 1) * up, j.get(1, 0) * down, C64::new(0.0, 0.0))
}

/// Jump matrix of the RHP on a real grid.
pub fn build_jump(x: f64, t: f64, p: &GammaParam, grid: &ContourGrid) -> Result<MatrixField> {
    if grid.nodes().iter().any(|s| s.im != 0.0) {
        return Err(Error::InvalidParameter("jump needs a real grid".into()));
    }
    Ok(MatrixField::from_fn(grid.clone(), |s| jump_at(s.re, x, t, p)))
}

/// Collocation grid adapted to `(x, t)`: truncation 12, step fine enough
/// for the oscillation `e^{2i theta}` over the support of `R`.
pub fn default_grid(x: f64, t: f64) -> Result<ContourGrid> {
    ContourGrid::uniform(default_step(x, t), DEFAULT_TRUNCATION)
}

pub fn default_step(x: f64, t: f64) -> f64 {
    // Largest phase frequency |d(2 theta)/ds| over |s| <= 9, where |R| > 1e-9.
    let s2 = 81.0;
    let freq = (2.0 * x).abs().max((2.0 * x + 24.0 * t * s2).abs());
    let margin = if t == 0.0 { 8.0 } else { 16.0 };
    (PI / (margin + freq)).min(0.1)
}

/// Solved RHP at one `(x, t)`.
#[derive(Debug, Clone)]
pub struct RhpSolution {
    pub x: f64,
    pub t: f64,
    pub p: GammaParam,
    pub z_field: MatrixField,
    pub a1: f64,
    pub b1: f64,
    pub q: f64,
    pub int_q: f64,
    pub int_q2: f64,
    pub residual: f64,
    /// `M_+ (1 - J)` at the nodes.
    mw: Vec<Mat2>,
}

/// `x`-derivatives of `q` from the differentiated equation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QDerivatives {
    pub q_x: f64,
    pub q_xx: f64,
    pub q_xxx: f64,
}

struct Discretization {
    step: f64,
    nodes: Vec<f64>,
    jump: Vec<Mat2>,
    w: Vec<Mat2>,
    cplus: CplusOperator,
    lu: faer::linalg::solvers::PartialPivLu<C64>,
}

impl Discretization {
    fn new(x: f64, t: f64, p: &GammaParam, grid: &ContourGrid) -> Result<Self> {
        let step = uniform_step(grid)?;
        if grid.truncation() < DEFAULT_TRUNCATION - 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "grid truncation {} below {DEFAULT_TRUNCATION}",
                grid.truncation()
            )));
        }
        let nodes: Vec<f64> = grid.nodes().iter().map(|s| s.re).collect();
        let jump: Vec<Mat2> = nodes.iter().map(|&s| jump_at(s, x, t, p)).collect();
        let w: Vec<Mat2> = jump.iter().map(|&j| Mat2::IDENTITY - j).collect();
        let n = nodes.len();
        // W_11 = 0, so Z_{r1} = F_{r1} + C[Z_{r2} W_21] and Z_{r2} solves
        // (1 - C D_22 - C D_12 C D_21) Z_{r2} = F_{r2} + C[F_{r1} W_12].
        let cplus = CplusOperator::new(n);
        let c_d21 = Mat::<C64>::from_fn(n, n, |m, j| cplus_offset(m as i64 - j as i64) * w[j].get(1, 0));
        let inner = Mat::<C64>::from_fn(n, n, |l, j| {
            let mut v = w[l].get(0, 1) * c_d21[(l, j)];
            if l == j {
                v += w[j].get(1, 1);
            }
            v
        });
        let mut a = -cplus.apply_matrix(&inner);
        for i in 0..n {
            a[(i, i)] += 1.0;
        }
        let lu = a.partial_piv_lu();
        Ok(Self {
            step,
            nodes,
            jump,
            w,
            cplus,
            lu,
        })
    }

    /// Solves `Z - C_+[Z W] = C_+[G]` for the two rows at once.
    fn solve(&self, g: &[Mat2]) -> Result<Vec<Mat2>> {
        let n = self.nodes.len();
        let f = self.cplus.apply_mat2(g);
        let mut out = vec![Mat2::ZERO; n];
        for r in 0..2 {
            let coupled: Vec<C64> = self.w.iter().zip(&f).map(|(w, f)| f.get(r, 0) * w.get(0, 1)).collect();
            let coupled = self.cplus.apply(&coupled);
            let rhs = Mat::<C64>::from_fn(n, 1, |m, _| f[m].get(r, 1) + coupled[m]);
            let z2 = self.lu.solve(&rhs);
            let z2w: Vec<C64> = (0..n).map(|j| z2[(j, 0)] * self.w[j].get(1, 0)).collect();
            let z1 = self.cplus.apply(&z2w);
            for m in 0..n {
                let (a, b) = (f[m].get(r, 0) + z1[m], z2[(m, 0)]);
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::SingularSystem);
                }
                out[m].0[r] = [a, b];
            }
        }
        Ok(out)
    }

    fn integral(&self, f: &[Mat2], r: usize, c: usize) -> C64 {
        f.iter().map(|m| m.get(r, c)).sum::<C64>() * self.step
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Solves the RHP at `(x, t)` on a uniform real grid.
pub fn solve_sie(x: f64, t: f64, p: &GammaParam, grid: &ContourGrid) -> Result<RhpSolution> {
    Ok(solve_with_derivatives(x, t, p, grid, 0)?.0)
}

/// Solves the RHP and, for `order >= 1`, the differentiated equations for
/// `q_x`, `q_xx`, `q_xxx` (same operator, new right-hand sides).
pub fn solve_with_derivatives(
    x: f64,
    t: f64,
    p: &GammaParam,
    grid: &ContourGrid,
    order: u32,
) -> Result<(RhpSolution, QDerivatives)> {
    if !(x.is_finite() && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("x = {x}, t = {t}")));
    }
    let d = Discretization::new(x, t, p, grid)?;
    let n = d.nodes.len();
    let z = d.solve(&d.w)?;
    let m0: Vec<Mat2> = z.iter().map(|&z| Mat2::IDENTITY + z).collect();
    let mw: Vec<Mat2> = m0.iter().zip(&d.w).map(|(&m, &w)| m * w).collect();

    let a1c = d.integral(&mw, 0, 0) / (2.0 * PI);
    let b1c = d.integral(&mw, 0, 1) / (2.0 * PI);
    let residual = nystrom_residual(&d, &z, x, t, p)?
        .max(a1c.im.abs())
        .max(b1c.im.abs());
    if residual > RESIDUAL_LIMIT {
        return Err(Error::ResidualTooLarge {
            residual,
            limit: RESIDUAL_LIMIT,
        });
    }

    let mut derivs = QDerivatives::default();
    if order >= 1 {
        // M^{(k)} for k = 0..=order; M^{(0)} = 1 + Z, M^{(k)} = Z^{(k)}.
        let mut ms: Vec<Vec<Mat2>> = vec![m0.clone()];
        let jx: Vec<Vec<Mat2>> = (1..=order.min(3))
            .map(|j| {
                d.jump
                    .iter()
                    .zip(&d.nodes)
                    .map(|(jm, &s)| jump_x_derivative(jm, s, j))
                    .collect()
            })
            .collect();
        let mut values = [0.0; 3];
        for k in 1..=order.min(3) {
            // sum_{j=1}^{k} C(k,j) M^{(k-j)} J^{(j)}
            let forcing: Vec<Mat2> = (0..n)
                .map(|i| {
                    let mut acc = Mat2::ZERO;
                    for j in 1..=k {
                        acc += ms[(k - j) as usize][i] * jx[(j - 1) as usize][i] * binomial(k, j);
                    }
                    acc
                })
                .collect();
            let neg: Vec<Mat2> = forcing.iter().map(|f| *f * -1.0).collect();
            let zk = d.solve(&neg)?;
            let integrand: Vec<Mat2> = (0..n).map(|i| zk[i] * d.w[i] - forcing[i]).collect();
            values[(k - 1) as usize] = (d.integral(&integrand, 0, 1) / PI).re;
            ms.push(zk);
        }
        derivs = QDerivatives {
            q_x: values[0],
            q_xx: values[1],
            q_xxx: values[2],
        };
    }

    let z_field = MatrixField::new(grid.clone(), z)?;
    let mut sol = RhpSolution {
        x,
        t,
        p: *p,
        z_field,
        a1: a1c.re,
        b1: b1c.re,
        q: 2.0 * b1c.re,
        int_q: 0.0,
        int_q2: -2.0 * a1c.re,
        residual,
        mw,
    };
    sol.int_q = int_q_from_zero(&sol)?;
    Ok((sol, derivs))
}

/// Residual of the discrete equation on the grid of step `h/2`, with the
/// solution extended to the midpoints by Nyström interpolation.
fn nystrom_residual(d: &Discretization, z: &[Mat2], x: f64, t: f64, p: &GammaParam) -> Result<f64> {
    let n = d.nodes.len();
    let g: Vec<Mat2> = z
        .iter()
        .zip(&d.w)
        .map(|(&z, &w)| (Mat2::IDENTITY + z) * w)
        .collect();
    let leak = g[0].max_abs().max(g[n - 1].max_abs());
    if leak > LEAK_LIMIT {
        return Err(Error::TruncationLeak {
            what: "M_+ (1 - J)",
            magnitude: leak,
        });
    }
    // Midpoint weights depend only on the offset m + 1/2 - j.
    let mid_kernel: Vec<C64> = (0..2 * n)
        .map(|k| sinc_cauchy(C64::new(k as f64 - n as f64 + 0.5, 0.0), Side::Plus))
        .collect();
    let mut fine_z = Vec::with_capacity(2 * n - 1);
    let mut fine_w = Vec::with_capacity(2 * n - 1);
    for m in 0..n {
        fine_z.push(z[m]);
        fine_w.push(d.w[m]);
        if m + 1 < n {
            let mut acc = Mat2::ZERO;
            for (j, gj) in g.iter().enumerate() {
                acc += *gj * mid_kernel[m + n - j];
            }
            fine_z.push(acc);
            let s = d.nodes[m] + 0.5 * d.step;
            fine_w.push(Mat2::IDENTITY - jump_at(s, x, t, p));
        }
    }
    let fine_g: Vec<Mat2> = fine_z
        .iter()
        .zip(&fine_w)
        .map(|(&z, &w)| (Mat2::IDENTITY + z) * w)
        .collect();
    let c = CplusOperator::new(fine_g.len()).apply_mat2(&fine_g);
    let res = fine_z
        .iter()
        .zip(&c)
        .map(|(&z, &cg)| (z - cg).max_abs())
        .fold(0.0, f64::max);
    Ok(res)
}

/// `M(k)` from the Cauchy representation of the sinc interpolant of
/// `M_+ (1 - J)`; real `k` returns the boundary value from `side`.
pub fn eval_m(k: C64, sol: &RhpSolution, side: Side) -> Result<Mat2> {
    let step = uniform_step(sol.z_field.grid())?;
    let n = sol.mw.len();
    let leak = sol.mw[0].max_abs().max(sol.mw[n - 1].max_abs());
    if leak > LEAK_LIMIT {
        return Err(Error::TruncationLeak {
            what: "M_+ (1 - J)",
            magnitude: leak,
        });
    }
    let mut m = Mat2::IDENTITY;
    for (s, g) in sol.z_field.grid().nodes().iter().zip(&sol.mw) {
        m += *g * sinc_cauchy((k - s) / step, side);
    }
    Ok(m)
}

/// `int_x^infty q = ln(r + w)` from `M_+(0)` times the lower-triangular
/// jump factor, with `r^2 - w^2 = 1` enforced relative to `|r|^2 + |w|^2`.
pub fn int_q_from_zero(sol: &RhpSolution) -> Result<f64> {
    let grid = sol.z_field.grid();
    let zero = grid
        .nodes()
        .iter()
        .position(|s| s.norm() == 0.0)
        .ok_or_else(|| Error::InvalidParameter("grid lacks the node s = 0".into()))?;
    let m_plus = Mat2::IDENTITY + sol.z_field.values()[zero];
    let r0 = reflection_r(C64::new(0.0, 0.0), &sol.p);
    let factor = Mat2::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), -r0, C64::new(1.0, 0.0));
    let p0 = m_plus * factor;
    let (r, w) = (p0.get(0, 0), p0.get(0, 1));
    let scale = r.norm_sqr() + w.norm_sqr();
    let defect = ((r * r - w * w - 1.0).norm() / scale).max((r.im.abs() + w.im.abs()) / scale.sqrt());
    if defect > HYPERBOLIC_TOL {
        return Err(Error::HyperbolicViolation { defect });
    }
    Ok((r.re + w.re).ln())
}

/// One row of a potential table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialRow {
    pub x: f64,
    pub q: f64,
    pub q_x: f64,
    pub q_xx: f64,
    pub q_xxx: f64,
    /// `u = q^2 - q_x`.
    pub u: f64,
    pub u_x: f64,
    pub u_xx: f64,
    pub int_q: f64,
    pub int_q2: f64,
    /// `int_x^infty u = q + int_x^infty q^2`.
    pub int_u: f64,
    pub residual: f64,
}

impl PotentialRow {
    fn failed(x: f64) -> Self {
        let nan = f64::NAN;
        Self {
            x,
            q: nan,
            q_x: nan,
            q_xx: nan,
            q_xxx: nan,
            u: nan,
            u_x: nan,
            u_xx: nan,
            int_q: nan,
            int_q2: nan,
            int_u: nan,
            residual: nan,
        }
    }

    fn from_solution(sol: &RhpSolution, d: &QDerivatives) -> Self {
        let q = sol.q;
        Self {
            x: sol.x,
            q,
            q_x: d.q_x,
            q_xx: d.q_xx,
            q_xxx: d.q_xxx,
            u: q * q - d.q_x,
            u_x: 2.0 * q * d.q_x - d.q_xx,
            u_xx: 2.0 * d.q_x * d.q_x + 2.0 * q * d.q_xx - d.q_xxx,
            int_q: sol.int_q,
            int_q2: sol.int_q2,
            int_u: q + sol.int_q2,
            residual: sol.residual,
        }
    }
}

/// `q`, its derivatives, `u` and tail integrals on an `x`-grid at fixed `t`.
#[derive(Debug, Clone)]
pub struct PotentialTable {
    pub gamma: f64,
    pub t: f64,
    pub rows: Vec<PotentialRow>,
    /// Rows whose solve failed, with the error; their entries are NaN.
    pub failures: Vec<(usize, Error)>,
}

impl PotentialTable {
    pub fn xs(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.x).collect()
    }

    pub fn column<F: Fn(&PotentialRow) -> f64>(&self, f: F) -> Vec<f64> {
        self.rows.iter().map(f).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    /// First failure, if any, as an error.
    pub fn check(&self) -> Result<()> {
        match self.failures.first() {
            Some((_, e)) => Err(e.clone()),
            None => Ok(()),
        }
    }
}

/// Evenly spaced grid `lo, lo + step, ..., hi`.
pub fn x_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

pub fn potential_table(p: &GammaParam, x_grid: &[f64], t: f64) -> Result<PotentialTable> {
    if x_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("x grid must be strictly increasing".into()));
    }
    let results: Vec<Result<PotentialRow>> = x_grid
        .par_iter()
        .map(|&x| {
            let grid = default_grid(x, t)?;
            let (sol, d) = solve_with_derivatives(x, t, p, &grid, 3)?;
            Ok(PotentialRow::from_solution(&sol, &d))
        })
        .collect();
    let mut rows = Vec::with_capacity(x_grid.len());
    let mut failures = Vec::new();
    for (i, (r, &x)) in results.into_iter().zip(x_grid).enumerate() {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                rows.push(PotentialRow::failed(x));
                failures.push((i, e));
            }
        }
    }
    Ok(PotentialTable {
        gamma: p.gamma(),
        t,
        rows,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(g: f64) -> GammaParam {
        GammaParam::new(g).unwrap()
    }

    fn solve(x: f64, g: f64) -> RhpSolution {
        solve_sie(x, 0.0, &gp(g), &default_grid(x, 0.0).unwrap()).unwrap()
    }

    #[test]
    fn jump_examples() {
        let grid = ContourGrid::uniform(0.1, 12.0).unwrap();
        let j0 = build_jump(1.3, 0.02, &gp(0.0), &grid).unwrap();
        assert!(j0.values().iter().all(|m| *m == Mat2::IDENTITY));
        let p = gp(0.3);
        let j = build_jump(-2.0, 0.07, &p, &grid).unwrap();
        let at0 = j.values()[grid.len() / 2];
        let sg = p.sqrt_gamma();
        let expect = Mat2::new(C64::new(1.0, 0.0), C64::new(-sg, 0.0), C64::new(sg, 0.0), C64::new(1.0 - 0.3, 0.0));
        assert!((at0 - expect).max_abs() < 1e-15);
        for m in j.values() {
            assert!((m.det() - 1.0).norm() < 1e-14);
        }
    }

    #[test]
    fn cauchy_plus_projects() {
        let grid = ContourGrid::uniform(0.05, 12.0).unwrap();
        let up = MatrixField::from_fn(grid.clone(), |s| {
            let f = (I * 10.0 * s - s * s / 2.0).exp();
            Mat2::new(f, f * 2.0, C64::new(0.0, 0.0), f)
        });
        let down = MatrixField::from_fn(grid.clone(), |s| {
            let f = (-I * 10.0 * s - s * s / 2.0).exp();
            Mat2::new(f, f, f, f)
        });
        let cu = cauchy_plus(&up).unwrap();
        let cd = cauchy_plus(&down).unwrap();
        for i in 0..grid.len() {
            assert!((cu.values()[i] - up.values()[i]).max_abs() < 1e-12);
            assert!(cd.values()[i].max_abs() < 1e-12);
        }
        let zero = MatrixField::from_fn(grid.clone(), |_| Mat2::ZERO);
        assert!(cauchy_plus(&zero).unwrap().values().iter().all(|m| *m == Mat2::ZERO));
    }

    #[test]
    fn cauchy_plus_rejects_algebraic_decay() {
        let grid = ContourGrid::uniform(0.1, 12.0).unwrap();
        let f = MatrixField::from_fn(grid, |s| Mat2::IDENTITY * (1.0 / (s + I)));
        assert!(matches!(cauchy_plus(&f), Err(Error::TruncationLeak { .. })));
    }

    #[test]
    fn trivial_gamma_gives_zero() {
        let sol = solve(0.7, 0.0);
        assert!(sol.z_field.values().iter().all(|m| *m == Mat2::ZERO));
        assert_eq!((sol.q, sol.a1, sol.int_q, sol.int_q2), (0.0, 0.0, 0.0, 0.0));
        let m = eval_m(C64::new(0.0, 10.0), &sol, Side::Plus).unwrap();
        assert_eq!(m, Mat2::IDENTITY);
    }

    #[test]
    fn decays_to_the_right() {
        let sol = solve(6.0, 0.5);
        assert!(sol.q.abs() < 1e-6 && sol.a1.abs() < 1e-6);
    }

    #[test]
    fn reference_values_at_gamma_one() {
        let (sol, d) = solve_with_derivatives(0.0, 0.0, &gp(1.0), &default_grid(0.0, 0.0).unwrap(), 2).unwrap();
        assert!((sol.q - 1.246_228_184_862_1).abs() < 1e-11);
        assert!((d.q_x + 0.701_508_557_535_52).abs() < 1e-10);
        assert!((d.q_xx + 6.510_374_539_577_8).abs() < 1e-9);
        assert!((sol.int_q2 - 0.432_054_148_878_47).abs() < 1e-11);
        assert!((sol.int_q - 0.515_353_910_921_59).abs() < 1e-11);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = gp(0.5);
        let x = 1.0;
        let e = 1e-3;
        let solve_q = |x: f64| solve_sie(x, 0.0, &p, &default_grid(1.0, 0.0).unwrap()).unwrap().q;
        let (_, d) = solve_with_derivatives(x, 0.0, &p, &default_grid(1.0, 0.0).unwrap(), 3).unwrap();
        let fd = (8.0 * (solve_q(x + e) - solve_q(x - e)) - (solve_q(x + 2.0 * e) - solve_q(x - 2.0 * e)))
            / (12.0 * e);
        assert!((fd - d.q_x).abs() < 1e-6 * d.q_x.abs().max(1e-2), "{fd} {}", d.q_x);
    }

    #[test]
    fn symmetries_and_determinant() {
        let sol = solve(-1.5, 0.8);
        for &k in &[C64::new(0.3, 0.7), C64::new(-2.0, 0.05), C64::new(1.1, -0.4)] {
            let m = eval_m(k, &sol, Side::Plus).unwrap();
            let mc = eval_m(k.conj(), &sol, Side::Plus).unwrap();
            let mn = eval_m(-k, &sol, Side::Plus).unwrap();
            assert!((m.det() - 1.0).norm() < 1e-10);
            assert!((mc.conj().sigma1_conjugate() - m).max_abs() < 1e-10);
            assert!((mn.sigma1_conjugate() - m).max_abs() < 1e-10);
        }
        let k = C64::new(0.0, 1e6);
        let m = eval_m(k, &sol, Side::Plus).unwrap();
        assert!((k * m.get(0, 1) - I * sol.b1).norm() < 1e-6, "{} {}", k * m.get(0, 1), sol.b1);
    }

    #[test]
    fn boundary_values_satisfy_jump() {
        let sol = solve(0.4, 0.9);
        for &s in &[0.0, 0.35, -1.7] {
            let k = C64::new(s, 0.0);
            let mp = eval_m(k, &sol, Side::Plus).unwrap();
            let mm = eval_m(k, &sol, Side::Minus).unwrap();
            let j = jump_at(s, 0.4, 0.0, &gp(0.9));
            assert!((mm - mp * j).max_abs() < 1e-10);
        }
    }

    #[test]
    fn hyperbolic_identity_at_minus_six() {
        let sol = solve(-6.0, 1.0);
        let l1: f64 = 1.165_194_315_878_021_3;
        let expect = (12.0 + l1).ln() + 0.5 * 2f64.ln();
        assert!((sol.int_q - expect).abs() < 1e-6);
        assert!((sol.q - 2.0 / (l1 + 12.0)).abs() < 1e-6);
    }

    #[test]
    fn table_identity_and_failures() {
        let p = gp(0.5);
        let t = potential_table(&p, &[-2.0, 0.0, 2.0], 0.0).unwrap();
        assert!(t.is_complete());
        for r in &t.rows {
            assert!((r.int_u - (r.q + r.int_q2)).abs() < 1e-12);
            assert!(r.residual < RESIDUAL_LIMIT);
        }
        assert!(potential_table(&p, &[0.0, 0.0], 0.0).is_err());
        let zero = potential_table(&gp(0.0), &[-1.0, 1.0], 0.0).unwrap();
        assert!(zero.rows.iter().all(|r| r.q == 0.0 && r.u == 0.0 && r.int_u == 0.0));
    }
}
