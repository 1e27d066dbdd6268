//! The distribution function `F(s; gamma)` assembled from tail integrals of
//! `q`, its `u`-only form at `gamma = 1`, and the linear law of `ln F` as
//! `s -> -infinity`.

use rayon::prelude::*;

use crate::asymptotics::TailModel;
use crate::error::{Error, Result};
use crate::glm::GlmPotential;
use crate::numerics::{cumulative_from_right, QuinticHermite};
use crate::param::GammaParam;
use crate::quadrature::GaussLegendre;
use crate::rhp::{default_grid, potential_table, solve_sie, x_grid, PotentialTable};

/// Left end of the default potential table; the tail model takes over beyond it.
pub const TABLE_LO: f64 = -10.0;
/// Right end of the default potential table.
pub const TABLE_HI: f64 = 10.0;
/// Default table step.
pub const TABLE_STEP: f64 = 0.05;
/// Tail fits use `s <= TAIL_FIT_MAX`.
pub const TAIL_FIT_MAX: f64 = -8.0;
/// Minimum number of tail points for [`tail_fit`].
pub const TAIL_FIT_MIN_POINTS: usize = 10;
/// Largest tolerated deviation of `ln F` from its linear fit.
pub const TAIL_FIT_LIMIT: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// `exp[-1/2 int (z - s) q^2] sqrt(cosh sigma - sqrt(gamma) sinh sigma)`.
    QForm,
    /// `exp[-1/2 int (z - s) u]`, valid at `gamma = 1` only.
    UForm,
}

/// `sqrt(cosh sigma - sqrt(gamma) sinh sigma)` without cancellation.
pub fn sigma_factor(sigma: f64, sqrt_gamma: f64) -> Result<f64> {
    let value = 0.5 * ((1.0 - sqrt_gamma) * sigma.exp() + (1.0 + sqrt_gamma) * (-sigma).exp());
    if !(value > 0.0) {
        return Err(Error::NegativeRadicand { value });
    }
    Ok(value.sqrt())
}

/// Tail integrals of `q` at `t = 0`, interpolated on a potential table and
/// continued to the left by the asymptotic model.
#[derive(Debug, Clone)]
pub struct QProfile {
    p: GammaParam,
    x_lo: f64,
    x_hi: f64,
    /// `J(x) = int_x^infty (z - x) q^2 dz = int_x^infty I_2`.
    weighted: QuinticHermite<f64>,
    sigma: QuinticHermite<f64>,
    model: Option<TailModel>,
}

impl QProfile {
    /// Builds the profile on the default table `[-10, 10]`, step 0.05.
    pub fn new(p: &GammaParam) -> Result<Self> {
        let table = potential_table(p, &x_grid(TABLE_LO, TABLE_HI, TABLE_STEP), 0.0)?;
        Self::from_table(&table, p)
    }

    pub fn from_table(table: &PotentialTable, p: &GammaParam) -> Result<Self> {
        table.check()?;
        if table.t != 0.0 {
            return Err(Error::InvalidParameter("distribution needs a t = 0 table".into()));
        }
        if table.rows.len() < 2 {
            return Err(Error::InvalidParameter("table needs at least two rows".into()));
        }
        let xs = table.xs();
        let i2 = table.column(|r| r.int_q2);
        let q2 = table.column(|r| -r.q * r.q);
        let dq2 = table.column(|r| -2.0 * r.q * r.q_x);
        let weighted = cumulative_from_right(&xs, &i2, &q2, Some(&dq2));
        let sigma = table.column(|r| r.int_q);
        let model = if p.is_trivial() { None } else { Some(TailModel::new(p)?) };
        Ok(Self {
            p: *p,
            x_lo: xs[0],
            x_hi: xs[xs.len() - 1],
            weighted: QuinticHermite::new(xs.clone(), weighted, i2.iter().map(|v| -v).collect(), q2.iter().map(|v| -v).collect()),
            sigma: QuinticHermite::new(
                xs,
                sigma,
                table.column(|r| -r.q),
                table.column(|r| -r.q_x),
            ),
            model,
        })
    }

    pub fn param(&self) -> &GammaParam {
        &self.p
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x_lo, self.x_hi)
    }

    /// `sigma(x) = int_x^infty q`.
    pub fn sigma(&self, x: f64) -> Result<f64> {
        if x >= self.x_hi {
            return Ok(0.0);
        }
        if x >= self.x_lo {
            return Ok(self.sigma.eval(x));
        }
        let Some(m) = &self.model else { return Ok(0.0) };
        match m.int_q_unchecked(x)? {
            Some(v) => Ok(v),
            None => {
                let at_lo = m.left_int_q_unchecked(self.x_lo)?.unwrap_or(0.0);
                let at_x = m.left_int_q_unchecked(x)?.unwrap_or(0.0);
                Ok(self.sigma.eval(self.x_lo) + at_lo - at_x)
            }
        }
    }

    /// `J(x) = int_x^infty (z - x) q^2 dz`.
    pub fn weighted(&self, x: f64) -> Result<f64> {
        if x >= self.x_hi {
            return Ok(0.0);
        }
        if x >= self.x_lo {
            return Ok(self.weighted.eval(x));
        }
        let Some(m) = &self.model else { return Ok(0.0) };
        // int_x^{x_lo} I_2 with I_2 = 2 T_1 - int_{-infty}^z q^2 from the model.
        let mass = 2.0 * m.t1 * (self.x_lo - x);
        let left = model_int_of_left_int_q2(m, x, self.x_lo)?;
        Ok(self.weighted.eval(self.x_lo) + mass - left)
    }

    /// `F(2x)`.
    pub fn f_at_half(&self, x: f64) -> Result<f64> {
        let j = self.weighted(x)?;
        let sigma = self.sigma(x)?;
        Ok((-0.5 * j).exp() * sigma_factor(sigma, self.p.sqrt_gamma())?)
    }

    /// `F(s)`; the defining formula is evaluated at `s / 2`.
    pub fn f(&self, s: f64) -> Result<f64> {
        self.f_at_half(0.5 * s)
    }
}

/// `int_a^b int_{-infty}^z q^2 dz` of the tail model.
fn model_int_of_left_int_q2(m: &TailModel, a: f64, b: f64) -> Result<f64> {
    use crate::asymptotics::Regime;
    match m.regime {
        Regime::GammaOne { l1 } => {
            let (da, db) = (l1 - 2.0 * a, l1 - 2.0 * b);
            if da <= 0.0 || db <= 0.0 {
                return Err(Error::ModelPole { x: b });
            }
            // d/dz[-ln(L - 2z)] = 2/(L - 2z).
            Ok(da.ln() - db.ln())
        }
        Regime::GammaLessOne { kappa, l_minus1 } => {
            let rho = |x: f64| ((2.0 * x * kappa).exp() * l_minus1 / (2.0 * kappa)).powi(2);
            let (ra, rb) = (rho(a), rho(b));
            if ra >= 1.0 || rb >= 1.0 {
                return Err(Error::ModelPole { x: b });
            }
            // d/dz[-ln(1 - rho)] = 4 kappa rho / (1 - rho).
            Ok((-ra).ln_1p() - (-rb).ln_1p())
        }
    }
}

/// `sigma(s; gamma) = int_s^infty q(x, 0; gamma) dx` from one RHP solve at
/// `x = s`, or at the table edge plus the model tail when `s < -10`.
pub fn sigma_of_s(s: f64, p: &GammaParam) -> Result<f64> {
    if p.is_trivial() {
        return Ok(0.0);
    }
    let x = s.max(TABLE_LO);
    let sol = solve_sie(x, 0.0, p, &default_grid(x, 0.0)?)?;
    if s >= TABLE_LO {
        return Ok(sol.int_q);
    }
    let m = TailModel::new(p)?;
    match m.int_q_unchecked(s)? {
        Some(v) => Ok(v),
        None => {
            let at_lo = m.left_int_q_unchecked(TABLE_LO)?.unwrap_or(0.0);
            let at_s = m.left_int_q_unchecked(s)?.unwrap_or(0.0);
            Ok(sol.int_q + at_lo - at_s)
        }
    }
}

/// `F(s; gamma)` from a freshly computed profile. Use [`QProfile`] to
/// evaluate many points.
pub fn f_of_s(s: f64, p: &GammaParam) -> Result<f64> {
    if p.is_trivial() {
        return Ok(1.0);
    }
    QProfile::new(p)?.f(s)
}

const UFORM_PANEL: f64 = 0.25;
const UFORM_NODES: usize = 16;

/// `F(s; 1) = exp[-1/2 int_{s/2}^infty int_z^infty u]` from a GLM
/// interpolant of `int_x^infty u`.
///
/// Beyond the right end of the interpolant `u` is taken as zero.
pub fn f_of_s_uform(s: f64, u: &GlmPotential) -> Result<f64> {
    let x = 0.5 * s;
    if x < u.a {
        return Err(Error::InvalidParameter(format!(
            "s/2 = {x} left of the interpolation interval [{}, {}]",
            u.a, u.b
        )));
    }
    if x >= u.b {
        return Ok(1.0);
    }
    let rule = GaussLegendre::<f64>::new(UFORM_NODES);
    let panels = ((u.b - x) / UFORM_PANEL).ceil().max(1.0) as usize;
    let integral = rule.composite(x, u.b, panels, |z| u.int_u_at(z));
    Ok((-0.5 * integral).exp())
}

/// `F(s)` by the `u`-only formula on an RHP table, via the cumulative rule
/// `int_x^infty int_z^infty u` with `d/dz int_z^infty u = -u`.
pub fn uform_from_table(table: &PotentialTable) -> Result<Vec<f64>> {
    table.check()?;
    let xs = table.xs();
    let int_u = table.column(|r| r.int_u);
    let du = table.column(|r| -r.u);
    let ddu = table.column(|r| -r.u_x);
    let w = cumulative_from_right(&xs, &int_u, &du, Some(&ddu));
    Ok(w.into_iter().map(|v| (-0.5 * v).exp()).collect())
}

/// Tabulated `F(s; gamma)` with the fitted tail law `ln F ~ slope s + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionTable {
    pub gamma: f64,
    pub s_values: Vec<f64>,
    pub f_values: Vec<f64>,
    /// Fitted slope on `s <= -8` (target `T_1 / 2`), if enough points.
    pub tail_slope: Option<f64>,
    /// Fitted offset on `s <= -8` (target `-K / 2`), if enough points.
    pub tail_offset: Option<f64>,
    pub route: Route,
}

impl DistributionTable {
    /// Piecewise-linear interpolation of `F`; 0 left and 1 right of the table.
    pub fn interpolate(&self, s: f64) -> f64 {
        let xs = &self.s_values;
        let n = xs.len();
        if n == 0 || s >= xs[n - 1] {
            return 1.0;
        }
        if s < xs[0] {
            return 0.0;
        }
        let i = xs.partition_point(|&v| v <= s).clamp(1, n - 1);
        let (x0, x1) = (xs[i - 1], xs[i]);
        let (f0, f1) = (self.f_values[i - 1], self.f_values[i]);
        f0 + (f1 - f0) * (s - x0) / (x1 - x0)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.s_values[0], self.s_values[self.s_values.len() - 1])
    }

    /// Largest decrease between consecutive entries (0 if monotone).
    pub fn monotonicity_defect(&self) -> f64 {
        self.f_values.windows(2).map(|w| (w[0] - w[1]).max(0.0)).fold(0.0, f64::max)
    }
}

fn finish(gamma: f64, s_values: Vec<f64>, f_values: Vec<f64>, route: Route) -> Result<DistributionTable> {
    let mut table = DistributionTable {
        gamma,
        s_values,
        f_values,
        tail_slope: None,
        tail_offset: None,
        route,
    };
    let tail_points = table.s_values.iter().filter(|&&s| s <= TAIL_FIT_MAX).count();
    if tail_points >= TAIL_FIT_MIN_POINTS && gamma > 0.0 {
        let (slope, offset) = tail_fit(&table)?;
        table.tail_slope = Some(slope);
        table.tail_offset = Some(offset);
    }
    Ok(table)
}

/// `F` on `s_values` by the `q`-form.
pub fn distribution_table(profile: &QProfile, s_values: &[f64]) -> Result<DistributionTable> {
    let f_values = s_values
        .par_iter()
        .map(|&s| profile.f(s))
        .collect::<Result<Vec<_>>>()?;
    finish(profile.param().gamma(), s_values.to_vec(), f_values, Route::QForm)
}

/// `F(.; 1)` on `s_values` by the `u`-form.
pub fn distribution_table_uform(u: &GlmPotential, s_values: &[f64]) -> Result<DistributionTable> {
    let f_values = s_values
        .par_iter()
        .map(|&s| f_of_s_uform(s, u))
        .collect::<Result<Vec<_>>>()?;
    finish(1.0, s_values.to_vec(), f_values, Route::UForm)
}

/// Least-squares line through `(s, ln F)` for `s <= -8`.
pub fn tail_fit(table: &DistributionTable) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = table
        .s_values
        .iter()
        .zip(&table.f_values)
        .filter(|(&s, _)| s <= TAIL_FIT_MAX)
        .map(|(&s, &f)| (s, f.ln()))
        .collect();
    if pts.len() < TAIL_FIT_MIN_POINTS {
        return Err(Error::InvalidParameter(format!(
            "{} tail points with s <= {TAIL_FIT_MAX}, need {TAIL_FIT_MIN_POINTS}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let ms = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ml = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - ms).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - ms) * (p.1 - ml)).sum();
    let slope = sxy / sxx;
    let offset = ml - slope * ms;
    let residual = pts
        .iter()
        .map(|p| (p.1 - slope * p.0 - offset).abs())
        .fold(0.0, f64::max);
    if !(residual <= TAIL_FIT_LIMIT) {
        return Err(Error::FitResidualTooLarge { residual });
    }
    Ok((slope, offset))
}

/// `s_min, s_min + step, ..., s_max`.
pub fn s_grid(s_min: f64, s_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(s_max >= s_min) || !step.is_finite() || !s_min.is_finite() || !s_max.is_finite() {
        return Err(Error::InvalidParameter(format!("s range [{s_min}, {s_max}] step {step}")));
    }
    Ok(x_grid(s_min, s_max, step))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_factor_is_stable() {
        for &s in &[0.0f64, 0.5, 3.0, 20.0] {
            let direct = (s.cosh() - 0.3f64.sqrt() * s.sinh()).sqrt();
            assert!((sigma_factor(s, 0.3f64.sqrt()).unwrap() - direct).abs() < 1e-12 * direct);
            assert!((sigma_factor(s, 1.0).unwrap() - (-s / 2.0).exp()).abs() < 1e-15);
        }
        assert!(matches!(sigma_factor(f64::NAN, 0.5), Err(Error::NegativeRadicand { .. })));
    }

    #[test]
    fn model_integral_matches_quadrature() {
        let rule = GaussLegendre::<f64>::new(20);
        for m in [TailModel::gamma_one(1.165, 0.5), TailModel::gamma_less_one(0.4, 0.9, 0.3)] {
            let (a, b) = (-30.0, -10.0);
            let quad = rule.composite(a, b, 40, |z| m.left_int_q2_unchecked(z).unwrap());
            let exact = model_int_of_left_int_q2(&m, a, b).unwrap();
            assert!((quad - exact).abs() < 1e-12, "{quad} {exact}");
        }
    }

    #[test]
    fn tail_fit_recovers_line() {
        let s: Vec<f64> = (0..20).map(|i| -20.0 + 0.5 * i as f64).collect();
        let f = s.iter().map(|&v| (0.5 * v - 0.25).exp()).collect();
        let t = finish(1.0, s, f, Route::QForm).unwrap();
        assert!((t.tail_slope.unwrap() - 0.5).abs() < 1e-12);
        assert!((t.tail_offset.unwrap() + 0.25).abs() < 1e-12);
        let s: Vec<f64> = (0..20).map(|i| -20.0 + 0.5 * i as f64).collect();
        let curved = s.iter().map(|&v| (0.01 * v * v).exp()).collect();
        let bad = DistributionTable {
            gamma: 1.0,
            s_values: s,
            f_values: curved,
            tail_slope: None,
            tail_offset: None,
            route: Route::QForm,
        };
        assert!(matches!(tail_fit(&bad), Err(Error::FitResidualTooLarge { .. })));
    }

    #[test]
    fn interpolation_is_step_consistent() {
        let t = DistributionTable {
            gamma: 1.0,
            s_values: vec![0.0, 1.0, 2.0],
            f_values: vec![0.2, 0.6, 0.9],
            tail_slope: None,
            tail_offset: None,
            route: Route::QForm,
        };
        assert_eq!(t.interpolate(-1.0), 0.0);
        assert_eq!(t.interpolate(5.0), 1.0);
        assert!((t.interpolate(0.5) - 0.4).abs() < 1e-15);
        assert_eq!(t.monotonicity_defect(), 0.0);
    }

    #[test]
    fn trivial_gamma_gives_one() {
        let p = GammaParam::new(0.0).unwrap();
        assert_eq!(f_of_s(-3.0, &p).unwrap(), 1.0);
        assert_eq!(sigma_of_s(-3.0, &p).unwrap(), 0.0);
    }
}
