//! Scattering data of the Gaussian reflection coefficient: `R`, `T`, `L`,
//! the conjugation function `delta_hat`, its Taylor data `c_j` at `i kappa`,
//! and the constants `T_1`, `L_{-1}`, `L_1(1)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::param::GammaParam;
use crate::quadrature::{ContourGrid, GaussLegendre, DEFAULT_TRUNCATION};
use crate::special::{e_ratio, log_one_minus_gauss, polylog, polylog_series};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Points with `|Im k|` below this are handled with an indented contour.
const NEAR_AXIS: f64 = 0.25;
/// Guard radius around poles and contours, in units of `a`.
const GUARD: f64 = 1e-3;
/// Realness tolerance for `c_j`.
const REALNESS_TOL: f64 = 1e-8;

/// Side from which a boundary value on the real axis is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Side {
    #[default]
    Plus,
    Minus,
}

/// `R(k; gamma) = -sqrt(gamma) exp(-k^2/4)`.
pub fn reflection_r(k: C64, p: &GammaParam) -> C64 {
    -p.sqrt_gamma() * (-k * k / 4.0).exp()
}

/// Constants attached to one value of `gamma`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringConstants {
    pub t1: f64,
    /// Residue scale of `L` at `i kappa`; zero at `gamma = 1`, where `L` is entire.
    pub l_minus1: f64,
    pub l1_of_1: Option<f64>,
    pub c: Vec<f64>,
}

/// Quadrature value of `T_1` with its error estimate and the series oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T1Estimate {
    pub value: f64,
    pub error_estimate: f64,
    pub oracle: f64,
    pub oracle_bound: f64,
}

/// `T_1(gamma) = -(1/2pi) int ln(1 - gamma e^{-s^2/2}) ds`, cross-checked
/// against `Li_{3/2}(gamma) / sqrt(2 pi)`.
pub fn t1_constant(p: &GammaParam) -> Result<f64> {
    Ok(t1_estimate(p)?.value)
}

pub fn t1_estimate(p: &GammaParam) -> Result<T1Estimate> {
    let g = p.gamma();
    if g == 0.0 {
        return Ok(T1Estimate {
            value: 0.0,
            error_estimate: 0.0,
            oracle: 0.0,
            oracle_bound: 0.0,
        });
    }
    let coarse = t1_quadrature(p, 1);
    let fine = t1_quadrature(p, 2);
    let error_estimate = (fine - coarse).abs() + 8.0 * f64::EPSILON * fine.abs();
    let norm = (2.0 * PI).sqrt();
    let (oracle, oracle_bound) = if g <= 0.99 {
        let s = polylog_series(1.5, g, 1e-17, 100_000);
        (s.value / norm, s.tail_bound / norm)
    } else {
        (polylog(1.5, g) / norm, 1e-15)
    };
    let tol = 100.0 * error_estimate + oracle_bound;
    if (fine - oracle).abs() > tol {
        return Err(Error::MethodDisagreement {
            what: "T1 quadrature vs polylog series",
            a: fine,
            b: oracle,
            tol,
        });
    }
    Ok(T1Estimate {
        value: fine,
        error_estimate,
        oracle,
        oracle_bound,
    })
}

fn t1_quadrature(p: &GammaParam, refine: usize) -> f64 {
    let g = p.gamma();
    let kappa = p.kappa();
    let gl = GaussLegendre::<f64>::new(24);
    let width = 0.5 / refine as f64;
    let panels = |a: f64, b: f64| (((b - a) / width).ceil() as usize).max(1);
    // Integrate over s >= 0 and double.
    let inner = if kappa < 1.0 {
        // ln(1 - g e^{-s^2/2}) = ln(s^2 + kappa^2) + ln E(s^2 + kappa^2); the
        // first piece is integrated in closed form on [0, 1].
        let k2 = kappa * kappa;
        let closed = (1.0 + k2).ln() - 2.0 + 2.0 * kappa * (1.0 / kappa).atan();
        let closed = if kappa == 0.0 { -2.0 } else { closed };
        closed + gl.composite(0.0, 1.0, panels(0.0, 1.0), |s| e_ratio(C64::new(s * s + k2, 0.0)).re.ln())
    } else {
        gl.composite(0.0, 1.0, panels(0.0, 1.0), |s| log_one_minus_gauss(g, s))
    };
    let outer = gl.composite(1.0, DEFAULT_TRUNCATION, panels(1.0, DEFAULT_TRUNCATION), |s| {
        log_one_minus_gauss(g, s)
    });
    -(inner + outer) / PI
}

/// Reusable evaluator for the `gamma`-dependent scattering functions.
#[derive(Debug, Clone)]
pub struct Scattering {
    p: GammaParam,
    real: SymbolGrid,
}

#[derive(Debug, Clone)]
struct SymbolGrid {
    grid: ContourGrid,
    symbol: Vec<C64>,
}

impl SymbolGrid {
    fn new(grid: ContourGrid, p: &GammaParam) -> Self {
        let symbol = grid.nodes().iter().map(|&s| symbol(s, p)).collect();
        Self { grid, symbol }
    }

    /// `(1/2 pi i) sum w l(s) / (s - k)^m`.
    fn cauchy(&self, k: C64, power: i32) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for ((&s, &w), &l) in self.grid.nodes().iter().zip(self.grid.weights()).zip(&self.symbol) {
            acc += w * l / (s - k).powi(power);
        }
        acc / (2.0 * PI * I)
    }
}

/// `ln[(s^2 + a^2)/(s^2 + kappa^2) (1 - e^{-(s^2+kappa^2)/2})]`, written
/// through `E(z) = (1 - e^{-z/2})/z` so that it is analytic in `|Im s| < a`.
fn symbol(s: C64, p: &GammaParam) -> C64 {
    let s2 = s * s;
    (s2 + p.a() * p.a()).ln() + e_ratio(s2 + p.kappa() * p.kappa()).ln()
}

impl Scattering {
    pub fn new(p: &GammaParam) -> Result<Self> {
        p.require_nontrivial()?;
        let grid = ContourGrid::real_line(DEFAULT_TRUNCATION)?;
        Ok(Self {
            p: *p,
            real: SymbolGrid::new(grid, p),
        })
    }

    pub fn param(&self) -> &GammaParam {
        &self.p
    }

    /// The log-symbol of the conjugation problem for `delta_hat`.
    pub fn symbol(&self, s: C64) -> C64 {
        symbol(s, &self.p)
    }

    fn guard(&self) -> f64 {
        GUARD * self.p.a()
    }

    /// `ln delta_hat(k)`; real `k` gives the boundary value from `side`.
    pub fn log_delta_hat(&self, k: C64, side: Side) -> Result<C64> {
        if k.im.abs() >= NEAR_AXIS {
            return Ok(self.real.cauchy(k, 1));
        }
        let above = k.im > 0.0 || (k.im == 0.0 && side == Side::Plus);
        let depth = if above { NEAR_AXIS } else { -NEAR_AXIS };
        let grid = ContourGrid::indented(k.re, depth, DEFAULT_TRUNCATION)?;
        if grid.distance_to(k) < self.guard() {
            return Err(Error::ContourClash {
                k: format!("{k}"),
                guard: self.guard(),
            });
        }
        Ok(SymbolGrid::new(grid, &self.p).cauchy(k, 1))
    }

    pub fn delta_hat(&self, k: C64, side: Side) -> Result<C64> {
        Ok(self.log_delta_hat(k, side)?.exp())
    }

    fn upper(k: C64, side: Side) -> bool {
        k.im > 0.0 || (k.im == 0.0 && side == Side::Plus)
    }

    /// `(k + i kappa)/(k - i kappa)`, identically one at `kappa = 0`.
    fn pole_ratio(&self, k: C64) -> C64 {
        let kappa = self.p.kappa();
        if kappa == 0.0 {
            C64::new(1.0, 0.0)
        } else {
            (k + I * kappa) / (k - I * kappa)
        }
    }

    /// Transmission coefficient `T(k)`, entire in `k`.
    pub fn transmission(&self, k: C64, side: Side) -> Result<C64> {
        let (kappa, a) = (self.p.kappa(), self.p.a());
        let dh = self.delta_hat(k, side)?;
        if Self::upper(k, side) {
            Ok(dh * (k + I * kappa) / (k + I * a))
        } else {
            Ok(dh * (k + I * kappa) * (k - I * a) * e_ratio(k * k + kappa * kappa))
        }
    }

    /// Left reflection coefficient `L(k)`, meromorphic with a simple pole at
    /// `i kappa` for `gamma < 1`.
    pub fn left_reflection(&self, k: C64, side: Side) -> Result<C64> {
        let (kappa, a) = (self.p.kappa(), self.p.a());
        if kappa > 0.0 && (k - I * kappa).norm() < self.guard() {
            return Err(Error::PoleProximity { k: format!("{k}") });
        }
        let dh2 = self.log_delta_hat(k, side)?.scale(2.0).exp();
        let z = k * k + kappa * kappa;
        let gauss = (-z / 4.0).exp();
        let ratio = self.pole_ratio(k);
        if Self::upper(k, side) {
            Ok(gauss * ratio / e_ratio(z) * dh2 / ((k + I * a) * (k + I * a)))
        } else {
            Ok(gauss * ratio * e_ratio(z) * (k - I * a) * (k - I * a) * dh2)
        }
    }

    /// Taylor data `c_j` of `ln delta_hat^2` at `i kappa`, integrated over `Sigma_a`.
    pub fn c_coeff(&self, j: usize) -> Result<f64> {
        let grid = ContourGrid::sigma_a(self.p.a(), DEFAULT_TRUNCATION)?;
        self.c_coeff_on(j, &SymbolGrid::new(grid, &self.p))
    }

    fn c_coeff_on(&self, j: usize, sg: &SymbolGrid) -> Result<f64> {
        let k = I * self.p.kappa();
        // cauchy() carries 1/(2 pi i); c_j = (1/pi i) int ... for even j and
        // -(1/pi) int ... for odd j.
        let raw = sg.cauchy(k, j as i32 + 1) * 2.0;
        let value = if j % 2 == 0 { raw } else { raw * (-I) };
        if value.im.abs() > REALNESS_TOL * value.re.abs().max(1.0) {
            return Err(Error::RealnessViolation {
                what: "c_j coefficient",
                im: value.im,
            });
        }
        Ok(value.re)
    }

    pub fn c_coeffs(&self, j_max: usize) -> Result<Vec<f64>> {
        let grid = ContourGrid::sigma_a(self.p.a(), DEFAULT_TRUNCATION)?;
        let sg = SymbolGrid::new(grid, &self.p);
        (0..=j_max).map(|j| self.c_coeff_on(j, &sg)).collect()
    }

    /// `L_{-1} = 4 kappa e^{c_0}/(a + kappa)^2`.
    pub fn l_minus1(&self) -> Result<f64> {
        let (kappa, a) = (self.p.kappa(), self.p.a());
        Ok(4.0 * kappa * self.c_coeff(0)?.exp() / ((a + kappa) * (a + kappa)))
    }

    pub fn constants(&self, j_max: usize) -> Result<ScatteringConstants> {
        let c = self.c_coeffs(j_max)?;
        let (kappa, a) = (self.p.kappa(), self.p.a());
        let l_minus1 = 4.0 * kappa * c[0].exp() / ((a + kappa) * (a + kappa));
        let l1 = if self.p.is_critical() {
            Some(l1_of_1()?)
        } else {
            None
        };
        Ok(ScatteringConstants {
            t1: t1_constant(&self.p)?,
            l_minus1,
            l1_of_1: l1,
            c,
        })
    }
}

pub fn delta_hat(k: C64, p: &GammaParam) -> Result<C64> {
    Scattering::new(p)?.delta_hat(k, Side::Plus)
}

pub fn c_coeff(j: usize, p: &GammaParam) -> Result<f64> {
    Scattering::new(p)?.c_coeff(j)
}

/// `T(k)`; on the real axis the (continuous) value is returned.
pub fn transmission_t(k: C64, p: &GammaParam) -> Result<C64> {
    if p.is_trivial() {
        return Ok(C64::new(1.0, 0.0));
    }
    Scattering::new(p)?.transmission(k, Side::Plus)
}

pub fn left_reflection_l(k: C64, p: &GammaParam) -> Result<C64> {
    if p.is_trivial() {
        return Ok(C64::new(0.0, 0.0));
    }
    Scattering::new(p)?.left_reflection(k, Side::Plus)
}

/// Independent evaluations of `L_1(1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Routes {
    /// `2 - (1/pi) int_{Sigma_{1/4}} ln([1 - e^{-s^2/2}](s^2+1)/s^2) ds/s^2`.
    pub contour: f64,
    /// `c_1(1; 1) + 2`.
    pub layer_a1: f64,
    /// `c_1(1; 2) + 1`.
    pub layer_a2: f64,
}

const L1_AGREEMENT: f64 = 1e-12;

pub fn l1_routes() -> Result<L1Routes> {
    let grid = ContourGrid::sigma_a(0.25, DEFAULT_TRUNCATION)?;
    let integral = grid.integrate(|s| {
        let s2 = s * s;
        // (1 - e^{-s^2/2})/s^2 = E(s^2)
        (e_ratio(s2) * (s2 + 1.0)).ln() / s2
    });
    let contour = 2.0 - integral.re / PI;
    let mut layer = [0.0; 2];
    for (slot, a) in layer.iter_mut().zip([1.0, 2.0]) {
        let p = GammaParam::with_layer(1.0, a)?;
        *slot = Scattering::new(&p)?.c_coeff(1)? + 2.0 / a;
    }
    Ok(L1Routes {
        contour,
        layer_a1: layer[0],
        layer_a2: layer[1],
    })
}

/// `L_1(1)`, the linear coefficient of `L(k;1) = -(1 + i L_1 k + ...)`.
pub fn l1_of_1() -> Result<f64> {
    let r = l1_routes()?;
    for (what, other) in [("L1(1) contour vs c1(1;1)+2", r.layer_a1), ("L1(1) contour vs c1(1;2)+1", r.layer_a2)] {
        if (r.contour - other).abs() > L1_AGREEMENT {
            return Err(Error::MethodDisagreement {
                what,
                a: r.contour,
                b: other,
                tol: L1_AGREEMENT,
            });
        }
    }
    Ok(r.contour)
}

/// Independent evaluations of `L_{-1}(gamma)` for `gamma in (0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lm1Routes {
    /// `4 kappa e^{c_0}/(a + kappa)^2`.
    pub residue: f64,
    /// `T(i kappa)^2 / kappa`.
    pub transmission: f64,
    /// `exp[(1/pi i) int_R ln(1 - gamma e^{-s^2/2}) ds/(s - i kappa)] / kappa`.
    pub real_line: f64,
}

pub fn lm1_routes(p: &GammaParam) -> Result<Lm1Routes> {
    if p.is_trivial() || p.is_critical() {
        return Err(Error::InvalidParameter(
            "L_{-1} is defined for gamma in (0, 1)".into(),
        ));
    }
    let sc = Scattering::new(p)?;
    let kappa = p.kappa();
    let residue = sc.l_minus1()?;
    let t = sc.transmission(I * kappa, Side::Plus)?;
    let transmission = (t * t).re / kappa;
    let real_line = (log_residue_real_line(p) / (PI * I)).re.exp() / kappa;
    Ok(Lm1Routes {
        residue,
        transmission,
        real_line,
    })
}

/// `int_R ln(1 - gamma e^{-s^2/2}) / (s - i kappa) ds` on panels graded
/// towards the near-singular points `+-i kappa`.
fn log_residue_real_line(p: &GammaParam) -> C64 {
    let (g, kappa) = (p.gamma(), p.kappa());
    let k = I * kappa;
    let gl = GaussLegendre::<f64>::new(24);
    let mut acc = C64::new(0.0, 0.0);
    let f = |s: f64| -> C64 {
        let v = if kappa < 1.0 {
            (s * s + kappa * kappa).ln() + e_ratio(C64::new(s * s + kappa * kappa, 0.0)).re.ln()
        } else {
            log_one_minus_gauss(g, s)
        };
        v / (C64::new(s, 0.0) - k)
    };
    let mut lo = 0.0;
    while lo < DEFAULT_TRUNCATION {
        let width = (0.5 * kappa.max(lo)).clamp(1e-3, 0.5);
        let hi = (lo + width).min(DEFAULT_TRUNCATION);
        for (s, w) in gl.mapped(lo, hi) {
            acc += (f(s) + f(-s)) * w;
        }
        lo = hi;
    }
    acc
}

/// `L_{-1}(gamma)/(2 kappa) = 2 e^{c_0}/(a + kappa)^2`, tending to one as `gamma -> 1`.
pub fn lm1_over_2kappa(p: &GammaParam) -> Result<f64> {
    if p.is_trivial() || p.is_critical() {
        return Err(Error::InvalidParameter(
            "L_{-1}/(2 kappa) is defined for gamma in (0, 1)".into(),
        ));
    }
    let sc = Scattering::new(p)?;
    let (kappa, a) = (p.kappa(), p.a());
    Ok(2.0 * sc.c_coeff(0)?.exp() / ((a + kappa) * (a + kappa)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn param(g: f64) -> GammaParam {
        GammaParam::new(g).unwrap()
    }

    #[test]
    fn reflection_examples() {
        let one = param(1.0);
        assert_eq!(reflection_r(C64::new(0.0, 0.0), &one), C64::new(-1.0, 0.0));
        assert_eq!(reflection_r(C64::new(0.0, 0.0), &param(0.25)), C64::new(-0.5, 0.0));
        let v = reflection_r(C64::new(0.0, 2.0), &one);
        assert!((v.re + std::f64::consts::E).abs() < 1e-15 && v.im.abs() < 1e-15);
    }

    #[test]
    fn t1_values() {
        assert_eq!(t1_constant(&param(0.0)).unwrap(), 0.0);
        let t = t1_estimate(&param(1.0)).unwrap();
        assert!((t.value - 1.042_186_978_869).abs() < 1e-12, "{t:?}");
        let half = t1_constant(&param(0.5)).unwrap();
        let oracle: f64 = (1..200).map(|n| 0.5f64.powi(n) / (n as f64).powf(1.5)).sum::<f64>()
            / (2.0 * PI).sqrt();
        assert!((half - oracle).abs() < 1e-14);
    }

    #[test]
    fn c_coefficients_at_gamma_one() {
        let a1 = Scattering::new(&GammaParam::with_layer(1.0, 1.0).unwrap()).unwrap();
        let a2 = Scattering::new(&GammaParam::with_layer(1.0, 2.0).unwrap()).unwrap();
        assert!((a1.c_coeff(0).unwrap().exp() - 0.5).abs() < 1e-13);
        assert!((a2.c_coeff(0).unwrap().exp() - 2.0).abs() < 1e-13);
        assert!((a1.c_coeff(2).unwrap() - 0.75).abs() < 1e-12);
        assert!(a2.c_coeff(2).unwrap().abs() < 1e-12);
    }

    #[test]
    fn l1_routes_agree() {
        let r = l1_routes().unwrap();
        assert!((r.contour - 1.165_194_315_878_021_3).abs() < 1e-13, "{r:?}");
        assert!((r.layer_a1 - r.layer_a2).abs() < 1e-12);
    }

    #[test]
    fn delta_hat_at_origin() {
        let sc = Scattering::new(&param(1.0)).unwrap();
        let d = sc.delta_hat(C64::new(0.0, 1e-9), Side::Plus).unwrap();
        assert!(((d * d).re - 0.5).abs() < 1e-8);
        let far = sc.delta_hat(C64::new(0.0, 1e4), Side::Plus).unwrap();
        assert!((far - 1.0).norm() < 1e-3);
    }

    #[test]
    fn delta_hat_jump_and_conjugation() {
        let p = param(0.7);
        let sc = Scattering::new(&p).unwrap();
        for &x in &[-3.0, -0.4, 0.0, 0.1, 2.5] {
            let k = C64::new(x, 0.0);
            let plus = sc.delta_hat(k, Side::Plus).unwrap();
            let minus = sc.delta_hat(k, Side::Minus).unwrap();
            let g = sc.symbol(k).exp();
            assert!((plus / minus - g).norm() < 1e-10);
            assert!((plus * minus.conj() - 1.0).norm() < 1e-10);
        }
    }

    #[test]
    fn transmission_small_k_at_gamma_one() {
        let sc = Scattering::new(&param(1.0)).unwrap();
        let k = C64::new(1e-4, 0.0);
        let t = sc.transmission(k, Side::Plus).unwrap();
        let model = -I * k / 2f64.sqrt();
        assert!((t - model).norm() < 1e-7);
    }

    #[test]
    fn transmission_large_k() {
        let p = param(0.6);
        let sc = Scattering::new(&p).unwrap();
        let k = C64::new(0.0, 50.0);
        let t = sc.transmission(k, Side::Plus).unwrap();
        let t1 = t1_constant(&p).unwrap();
        // ln T = -i T1 / k + O(k^-3), so k ln T avoids the T1^2/(2k) term of k (T - 1).
        let lhs = k * t.ln();
        assert!((lhs + I * t1).norm() < 1e-3 * t1);
    }

    #[test]
    fn transmission_zero_at_minus_i_kappa() {
        let p = param(0.5);
        let sc = Scattering::new(&p).unwrap();
        let t = sc.transmission(C64::new(0.0, -p.kappa()), Side::Plus).unwrap();
        assert!(t.norm() < 1e-14);
    }

    #[test]
    fn left_reflection_at_origin() {
        let l = left_reflection_l(C64::new(0.0, 0.0), &param(1.0)).unwrap();
        assert!((l + 1.0).norm() < 1e-12);
    }

    #[test]
    fn left_reflection_continuous_across_axis() {
        let sc = Scattering::new(&param(0.8)).unwrap();
        for &x in &[-1.5, 0.0, 0.7] {
            let k = C64::new(x, 0.0);
            let a = sc.left_reflection(k, Side::Plus).unwrap();
            let b = sc.left_reflection(k, Side::Minus).unwrap();
            assert!((a - b).norm() < 1e-12);
            assert!(x == 0.0 || a.norm() < 1.0);
        }
    }

    #[test]
    fn pole_guard() {
        let p = param(0.5);
        let sc = Scattering::new(&p).unwrap();
        let k = C64::new(1e-5, p.kappa());
        assert!(matches!(sc.left_reflection(k, Side::Plus), Err(Error::PoleProximity { .. })));
    }

    #[test]
    fn lm1_routes_agree() {
        for &g in &[0.25, 0.5, 0.9, 0.999] {
            let r = lm1_routes(&param(g)).unwrap();
            assert!((r.residue - r.transmission).abs() < 1e-10 * r.residue, "{g}: {r:?}");
            assert!((r.residue - r.real_line).abs() < 1e-10 * r.residue, "{g}: {r:?}");
        }
    }

    #[test]
    fn lm1_over_2kappa_tends_to_one() {
        let p = GammaParam::new(1.0 - 1e-6).unwrap();
        let v = lm1_over_2kappa(&p).unwrap();
        assert!((v - 1.0).abs() < 1e-2);
    }

    #[test]
    fn residue_matches_contour_integral() {
        let p = param(0.6);
        let sc = Scattering::new(&p).unwrap();
        let center = I * p.kappa();
        let (r, n) = (0.1, 64);
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            let e = C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
            acc += sc.left_reflection(center + r * e, Side::Plus).unwrap() * r * e;
        }
        let res = acc / n as f64;
        let lm1 = sc.l_minus1().unwrap();
        assert!((res + I * lm1).norm() < 1e-12, "{res} vs {lm1}");
    }
}
