//! Closed-form behaviour of `q` as `x -> -infinity`, the model matrix it
//! comes from, residuals against the RHP solver, and the small-`kappa`
//! series fit of `L_{-1}/(2 kappa)`.

use faer::prelude::*;
use faer::Mat;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mat2::Mat2;
use crate::param::GammaParam;
use crate::rhp::{default_grid, solve_sie};
use crate::scattering::{l1_of_1, lm1_over_2kappa, lm1_routes, t1_constant};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Required agreement of the two `L_{-1}` routes.
pub const LM1_AGREEMENT: f64 = 1e-8;
/// Largest admissible fit residual for [`fit_lkappa_series`].
pub const FIT_RESIDUAL_LIMIT: f64 = 1e-6;
/// Fit degree of [`fit_lkappa_series`] (constant term fixed to one).
pub const FIT_DEGREE: usize = 7;
/// Default fit abscissae: 15 equispaced `kappa` in `[0.01, 0.15]`.
pub fn default_fit_kappas() -> Vec<f64> {
    (0..15).map(|i| 0.01 + 0.01 * i as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    GammaLessOne { kappa: f64, l_minus1: f64 },
    GammaOne { l1: f64 },
}

/// Leading-order model of the solution for `x -> -infinity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub regime: Regime,
    /// `T_1(gamma)`.
    pub t1: f64,
    /// Largest `x` at which the model is claimed.
    pub valid_from: f64,
}

impl TailModel {
    /// Builds the model, taking `L_{-1}` from two routes that must agree.
    pub fn new(p: &GammaParam) -> Result<Self> {
        if p.is_trivial() {
            return Err(Error::InvalidParameter("no tail model at gamma = 0".into()));
        }
        let t1 = t1_constant(p)?;
        if p.is_critical() {
            return Ok(Self {
                regime: Regime::GammaOne { l1: l1_of_1()? },
                t1,
                valid_from: -5.0,
            });
        }
        let routes = lm1_routes(p)?;
        let diff = (routes.residue - routes.real_line).abs();
        if diff > LM1_AGREEMENT * routes.residue.abs() {
            return Err(Error::MethodDisagreement {
                what: "L_{-1} routes",
                a: routes.residue,
                b: routes.real_line,
                tol: LM1_AGREEMENT,
            });
        }
        Ok(Self::gamma_less_one(p.kappa(), routes.residue, t1))
    }

    /// `gamma < 1` model from given constants.
    pub fn gamma_less_one(kappa: f64, l_minus1: f64, t1: f64) -> Self {
        // e^{2 x kappa} L_{-1} / (2 kappa) = 1/2.
        let valid_from = (kappa / l_minus1).ln() / (2.0 * kappa);
        Self {
            regime: Regime::GammaLessOne { kappa, l_minus1 },
            t1,
            valid_from,
        }
    }

    pub fn gamma_one(l1: f64, t1: f64) -> Self {
        Self {
            regime: Regime::GammaOne { l1 },
            t1,
            valid_from: -5.0,
        }
    }

    fn check_range(&self, x: f64) -> Result<()> {
        if x > self.valid_from {
            return Err(Error::InvalidParameter(format!(
                "x = {x} beyond model range x <= {}",
                self.valid_from
            )));
        }
        Ok(())
    }

    /// `v = e^{2 x kappa} L_{-1} / (2 kappa)` for `gamma < 1`.
    fn v(&self, x: f64, kappa: f64, l_minus1: f64) -> Result<f64> {
        let v = (2.0 * x * kappa).exp() * l_minus1 / (2.0 * kappa);
        if v >= 1.0 {
            return Err(Error::ModelPole { x });
        }
        Ok(v)
    }

    /// `(alpha, beta)` of the model matrix.
    pub fn alpha_beta(&self, x: f64) -> Result<(f64, f64)> {
        self.check_range(x)?;
        self.alpha_beta_unchecked(x)
    }

    /// As [`Self::alpha_beta`] without the range check; only the pole is rejected.
    pub fn alpha_beta_unchecked(&self, x: f64) -> Result<(f64, f64)> {
        match self.regime {
            Regime::GammaOne { l1 } => {
                let d = l1 - 2.0 * x;
                if d <= 0.0 {
                    return Err(Error::ModelPole { x });
                }
                Ok((1.0 / d, 1.0 / d))
            }
            Regime::GammaLessOne { kappa, l_minus1 } => {
                let v = self.v(x, kappa, l_minus1)?;
                let den = 1.0 - v * v;
                Ok((2.0 * kappa * v * v / den, 2.0 * kappa * v / den))
            }
        }
    }

    /// Model potential `q = 2 beta`.
    pub fn q(&self, x: f64) -> Result<f64> {
        Ok(2.0 * self.alpha_beta(x)?.1)
    }

    /// Model of `int_x^infty q^2 = 2 T_1 - 2 alpha`.
    pub fn int_q2(&self, x: f64) -> Result<f64> {
        Ok(2.0 * self.t1 - 2.0 * self.alpha_beta(x)?.0)
    }

    /// Model of `A_1 = -T_1 + alpha`.
    pub fn a1(&self, x: f64) -> Result<f64> {
        Ok(-self.t1 + self.alpha_beta(x)?.0)
    }

    /// `int_x^infty q = ln(L_1 - 2x) + ln(2)/2`; only for `gamma = 1`.
    pub fn int_q(&self, x: f64) -> Result<Option<f64>> {
        self.check_range(x)?;
        self.int_q_unchecked(x)
    }

    pub fn int_q_unchecked(&self, x: f64) -> Result<Option<f64>> {
        match self.regime {
            Regime::GammaOne { l1 } => {
                if l1 - 2.0 * x <= 0.0 {
                    return Err(Error::ModelPole { x });
                }
                Ok(Some((l1 - 2.0 * x).ln() + 0.5 * 2f64.ln()))
            }
            Regime::GammaLessOne { .. } => Ok(None),
        }
    }

    /// `int_{-infty}^x q^2` of the model.
    pub fn left_int_q2(&self, x: f64) -> Result<f64> {
        self.check_range(x)?;
        self.left_int_q2_unchecked(x)
    }

    pub fn left_int_q2_unchecked(&self, x: f64) -> Result<f64> {
        match self.regime {
            Regime::GammaOne { l1 } => Ok(2.0 / (l1 - 2.0 * x)),
            Regime::GammaLessOne { kappa, l_minus1 } => {
                let rho = self.v(x, kappa, l_minus1)?.powi(2);
                Ok(4.0 * kappa * rho / (1.0 - rho))
            }
        }
    }

    /// `int_{-infty}^x q` of the model; only for `gamma < 1`.
    pub fn left_int_q(&self, x: f64) -> Result<Option<f64>> {
        self.check_range(x)?;
        self.left_int_q_unchecked(x)
    }

    pub fn left_int_q_unchecked(&self, x: f64) -> Result<Option<f64>> {
        match self.regime {
            Regime::GammaOne { .. } => Ok(None),
            Regime::GammaLessOne { kappa, l_minus1 } => {
                let v = self.v(x, kappa, l_minus1)?;
                Ok(Some(((1.0 + v) / (1.0 - v)).ln()))
            }
        }
    }

    /// Model matrix `N_mod(x; k)`.
    pub fn n_mod(&self, x: f64, k: C64) -> Result<Mat2> {
        let (alpha, beta) = self.alpha_beta(x)?;
        let kappa = match self.regime {
            Regime::GammaOne { .. } => 0.0,
            Regime::GammaLessOne { kappa, .. } => kappa,
        };
        let (kp, km) = (k + I * kappa, k - I * kappa);
        Ok(Mat2::new(
            1.0 + I * alpha / kp,
            I * beta / km,
            -I * beta / kp,
            1.0 - I * alpha / km,
        ))
    }
}

/// `q` of the model at `x`.
pub fn q_model(x: f64, m: &TailModel) -> Result<f64> {
    m.q(x)
}

/// `int_x^infty q^2` of the model with the given `T_1`.
pub fn intq2_model(x: f64, m: &TailModel, t1: f64) -> Result<f64> {
    Ok(2.0 * t1 - 2.0 * m.alpha_beta(x)?.0)
}

pub fn model_alpha_beta(x: f64, p: &GammaParam) -> Result<(f64, f64)> {
    TailModel::new(p)?.alpha_beta(x)
}

/// Solver-minus-model differences at one `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailResidual {
    pub x: f64,
    pub q_solver: f64,
    pub q_model: f64,
    pub q_err: f64,
    pub int_q2_err: f64,
    pub a1_err: f64,
    /// `gamma = 1` only.
    pub int_q_err: Option<f64>,
}

pub fn tail_residuals(p: &GammaParam, model: &TailModel, xs: &[f64]) -> Result<Vec<TailResidual>> {
    xs.par_iter()
        .map(|&x| {
            let sol = solve_sie(x, 0.0, p, &default_grid(x, 0.0)?)?;
            let q_model = model.q(x)?;
            Ok(TailResidual {
                x,
                q_solver: sol.q,
                q_model,
                q_err: sol.q - q_model,
                int_q2_err: sol.int_q2 - model.int_q2(x)?,
                a1_err: sol.a1 - model.a1(x)?,
                int_q_err: model.int_q(x)?.map(|v| sol.int_q - v),
            })
        })
        .collect()
}

/// Coefficients of `L_{-1}/(2 kappa) = 1 - l1 kappa + l2 kappa^2 - l3 kappa^3 + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct LkappaFit {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    /// Largest absolute residual of the fit at the data points.
    pub residual: f64,
    /// Fitted `b_j` of `sum_{j >= 1} b_j kappa^j`.
    pub coefficients: Vec<f64>,
    pub kappas: Vec<f64>,
}

/// Least-squares fit of `L_{-1}/(2 kappa) - 1` by a polynomial of degree
/// [`FIT_DEGREE`] without constant term.
pub fn fit_lkappa_series(kappas: &[f64]) -> Result<LkappaFit> {
    fit_lkappa_series_with(kappas, FIT_DEGREE)
}

pub fn fit_lkappa_series_with(kappas: &[f64], degree: usize) -> Result<LkappaFit> {
    if kappas.len() < 6 || kappas.len() <= degree || degree < 3 {
        return Err(Error::InvalidParameter(format!(
            "{} kappas for degree {degree}",
            kappas.len()
        )));
    }
    if kappas.iter().any(|&k| !(k > 0.0 && k <= 0.3)) {
        return Err(Error::InvalidParameter("kappas must lie in (0, 0.3]".into()));
    }
    let ys = kappas
        .par_iter()
        .map(|&k| Ok(lm1_over_2kappa(&GammaParam::from_kappa(k)?)? - 1.0))
        .collect::<Result<Vec<_>>>()?;
    let scale = kappas.iter().fold(0.0f64, |m, &k| m.max(k));
    let a = Mat::<f64>::from_fn(kappas.len(), degree, |i, j| (kappas[i] / scale).powi(j as i32 + 1));
    let b = Mat::<f64>::from_fn(kappas.len(), 1, |i, _| ys[i]);
    let sol = a.qr().solve_lstsq(&b);
    let coefficients: Vec<f64> = (0..degree).map(|j| sol[(j, 0)] / scale.powi(j as i32 + 1)).collect();
    let residual = kappas
        .iter()
        .zip(&ys)
        .map(|(&k, &y)| {
            let fit: f64 = coefficients.iter().enumerate().map(|(j, c)| c * k.powi(j as i32 + 1)).sum();
            (fit - y).abs()
        })
        .fold(0.0, f64::max);
    if residual > FIT_RESIDUAL_LIMIT || !residual.is_finite() {
        return Err(Error::IllConditionedFit { residual });
    }
    Ok(LkappaFit {
        l1: -coefficients[0],
        l2: coefficients[1],
        l3: -coefficients[2],
        residual,
        coefficients,
        kappas: kappas.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const L1: f64 = 1.165_194_315_878_021_3;

    #[test]
    fn gamma_one_examples() {
        let m = TailModel::new(&GammaParam::new(1.0).unwrap()).unwrap();
        assert!((q_model(-10.0, &m).unwrap() - 2.0 / (20.0 + L1)).abs() < 1e-15);
        let (a, b) = m.alpha_beta(-7.0).unwrap();
        assert_eq!(a, b);
        assert!((intq2_model(-10.0, &m, m.t1).unwrap() - (2.0 * m.t1 - 2.0 / (20.0 + L1))).abs() < 1e-14);
        assert!(m.q(0.0).is_err());
    }

    #[test]
    fn gamma_less_one_limits() {
        let m = TailModel::new(&GammaParam::new(0.5).unwrap()).unwrap();
        assert!((m.int_q2(-200.0).unwrap() - 2.0 * m.t1).abs() < 1e-14);
        let (a, b) = m.alpha_beta(-3.0).unwrap();
        assert!(a > 0.0 && b > 0.0);
    }

    #[test]
    fn formal_kappa_limit() {
        let kappa = 1e-5;
        let m = TailModel::gamma_less_one(kappa, 2.0 * kappa * (1.0 - L1 * kappa), 0.0);
        for &x in &[-10.0, -6.0] {
            let expect = 2.0 / (L1 - 2.0 * x);
            let q = 2.0 * m.alpha_beta_unchecked(x).unwrap().1;
            assert!((q - expect).abs() < 1e-3 * expect);
        }
    }

    #[test]
    fn model_determinant_is_one() {
        let m = TailModel::new(&GammaParam::new(0.5).unwrap()).unwrap();
        for i in 0..10 {
            let k = C64::new(-2.0 + 0.43 * i as f64, 0.3 - 0.07 * i as f64);
            assert!((m.n_mod(-6.0, k).unwrap().det() - 1.0).norm() < 1e-12);
        }
        let m1 = TailModel::gamma_one(L1, 1.0);
        assert!((m1.n_mod(-6.0, C64::new(0.2, 0.4)).unwrap().det() - 1.0).norm() < 1e-13);
    }

    #[test]
    fn model_matches_solver() {
        let p = GammaParam::new(0.5).unwrap();
        let m = TailModel::new(&p).unwrap();
        let r = tail_residuals(&p, &m, &[-8.0, -7.0]).unwrap();
        assert!(r[0].q_err.abs() < 1e-6, "{r:?}");
        assert!(r[1].a1_err.abs() < 1e-6, "{r:?}");
        let p1 = GammaParam::new(1.0).unwrap();
        let r1 = tail_residuals(&p1, &TailModel::new(&p1).unwrap(), &[-8.0]).unwrap();
        assert!(r1[0].int_q2_err.abs() < 1e-5 && r1[0].int_q_err.unwrap().abs() < 1e-5, "{r1:?}");
    }

    #[test]
    fn series_fit() {
        let fit = fit_lkappa_series(&default_fit_kappas()).unwrap();
        assert!((fit.l1 - L1).abs() < 1e-6, "{fit:?}");
        assert!((fit.l2 - 0.678_838_896_877).abs() < 1e-4);
        assert!((fit.l3 - 0.236_014_873_1).abs() < 1e-3);
        assert!((fit.l3 - L1.powi(3) / 6.0).abs() > 1e-2);
        assert!(fit_lkappa_series(&[0.1, 0.2]).is_err());
    }
}
