use crate::error::{Error, Result};

/// Ensemble parameter `gamma` with the derived pole height `kappa` and the
/// layer parameter `a` used for contour deformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParam {
    gamma: f64,
    kappa: f64,
    a: f64,
}

impl GammaParam {
    /// Validates `gamma` in `[0, 1]` and picks the default layer parameter:
    /// `a = 1` whenever that exceeds `kappa` by a safe margin, otherwise `2 kappa`.
    pub fn new(gamma: f64) -> Result<Self> {
        let kappa = kappa_of(gamma)?;
        let a = if kappa < 0.5 { 1.0 } else { 2.0 * kappa };
        Ok(Self { gamma, kappa, a })
    }

    pub fn with_layer(gamma: f64, a: f64) -> Result<Self> {
        let kappa = kappa_of(gamma)?;
        if !(a.is_finite() && a > kappa) {
            return Err(Error::InvalidParameter(format!(
                "layer parameter a = {a} must exceed kappa = {kappa}"
            )));
        }
        Ok(Self { gamma, kappa, a })
    }

    /// Parameter with `gamma = exp(-kappa^2 / 2)`, keeping `kappa` exact.
    pub fn from_kappa(kappa: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa >= 0.0) {
            return Err(Error::InvalidParameter(format!("kappa = {kappa}")));
        }
        let gamma = (-0.5 * kappa * kappa).exp();
        let a = if kappa < 0.5 { 1.0 } else { 2.0 * kappa };
        Ok(Self { gamma, kappa, a })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `sqrt(-2 ln gamma)`; infinite at `gamma = 0`.
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn sqrt_gamma(&self) -> f64 {
        self.gamma.sqrt()
    }

    pub fn is_trivial(&self) -> bool {
        self.gamma == 0.0
    }

    pub fn is_critical(&self) -> bool {
        self.gamma == 1.0
    }

    pub(crate) fn require_nontrivial(&self) -> Result<()> {
        if self.is_trivial() {
            Err(Error::InvalidParameter(
                "operation needs gamma > 0 (kappa is infinite at gamma = 0)".into(),
            ))
        } else {
            Ok(())
        }
    }
}

fn kappa_of(gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidParameter(format!(
            "gamma = {gamma} outside [0, 1]"
        )));
    }
    if gamma == 0.0 {
        return Ok(f64::INFINITY);
    }
    // -ln(gamma) >= 0; ln_1p keeps accuracy for gamma close to 1.
    let neg_log = -(gamma - 1.0).ln_1p();
    Ok((2.0 * neg_log.max(0.0)).sqrt())
}
