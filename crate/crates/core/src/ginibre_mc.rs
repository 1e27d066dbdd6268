//! Monte Carlo sampling of the largest real eigenvalue of real Gaussian
//! matrices, and its Kolmogorov–Smirnov distance to a tabulated law.

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::distribution::DistributionTable;
use crate::error::{Error, Result};

/// Tolerance for matching complex-conjugate eigenvalue pairs.
pub const PAIRING_TOL: f64 = 1e-6;
/// Largest fraction of samples allowed outside a table in [`ks_distance`].
pub const SUPPORT_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    n: usize,
    trials: u64,
    seed: u64,
    im_tol: f64,
}

impl McConfig {
    /// Config with the default `im_tol = 1e-8 sqrt(n)`.
    pub fn new(n: usize, trials: u64, seed: u64) -> Result<Self> {
        Self::with_im_tol(n, trials, seed, 1e-8 * (n as f64).sqrt())
    }

    pub fn with_im_tol(n: usize, trials: u64, seed: u64, im_tol: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("matrix size {n} < 2")));
        }
        if trials < 1 {
            return Err(Error::InvalidParameter("at least one trial".into()));
        }
        if !(im_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("im_tol = {im_tol}")));
        }
        Ok(Self { n, trials, seed, im_tol })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn im_tol(&self) -> f64 {
        self.im_tol
    }
}

/// A cumulative distribution function with explicit left limits.
pub trait Cdf {
    fn eval(&self, s: f64) -> f64;
    fn eval_left(&self, s: f64) -> f64;
}

impl Cdf for DistributionTable {
    fn eval(&self, s: f64) -> f64 {
        self.interpolate(s)
    }

    fn eval_left(&self, s: f64) -> f64 {
        self.interpolate(s)
    }
}

/// Empirical law of `lambda_max - sqrt(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    /// Shifted maxima, ascending; trials without real eigenvalues are `-inf`.
    samples: Vec<f64>,
    pub trials: u64,
    /// Trials dropped for eigenvalue failures or broken conjugate pairing.
    pub failures: u64,
    /// Trials with no real eigenvalue.
    pub no_real: u64,
    /// Sum of real-eigenvalue counts over the retained trials.
    pub real_count_total: u64,
}

impl EmpiricalCdf {
    /// Builds from raw shifted maxima.
    pub fn from_samples(mut samples: Vec<f64>) -> Result<Self> {
        if samples.iter().any(|s| s.is_nan()) {
            return Err(Error::InvalidParameter("NaN sample".into()));
        }
        samples.sort_by(f64::total_cmp);
        let no_real = samples.iter().filter(|s| **s == f64::NEG_INFINITY).count() as u64;
        Ok(Self {
            trials: samples.len() as u64,
            samples,
            failures: 0,
            no_real,
            real_count_total: 0,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean number of real eigenvalues per retained trial.
    pub fn mean_real_count(&self) -> f64 {
        self.real_count_total as f64 / self.samples.len().max(1) as f64
    }

    /// Fraction of retained trials with at least one real eigenvalue.
    pub fn fraction_with_real(&self) -> f64 {
        1.0 - self.no_real as f64 / self.samples.len().max(1) as f64
    }
}

impl Cdf for EmpiricalCdf {
    fn eval(&self, s: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.partition_point(|&v| v <= s) as f64 / self.samples.len() as f64
    }

    fn eval_left(&self, s: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.partition_point(|&v| v < s) as f64 / self.samples.len() as f64
    }
}

struct TrialOutcome {
    max: f64,
    real_count: u64,
}

fn run_trial(cfg: &McConfig, trial: u64) -> Option<TrialOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial);
    let n = cfg.n;
    let mut entries = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        entries.push(StandardNormal.sample(&mut rng));
    }
    let a = Mat::<f64>::from_fn(n, n, |i, j| entries[i * n + j]);
    let eig = a.eigenvalues().ok()?;
    if eig.len() != n || eig.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return None;
    }
    let (real, complex): (Vec<_>, Vec<_>) = eig.iter().partition(|z| z.im.abs() < cfg.im_tol);
    if !conjugate_paired(&complex) {
        return None;
    }
    let max = real.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    Some(TrialOutcome {
        max: max - (n as f64).sqrt(),
        real_count: real.len() as u64,
    })
}

fn conjugate_paired(zs: &[&num_complex::Complex64]) -> bool {
    let mut upper: Vec<_> = zs.iter().filter(|z| z.im > 0.0).map(|z| **z).collect();
    let mut lower: Vec<_> = zs.iter().filter(|z| z.im < 0.0).map(|z| z.conj()).collect();
    if upper.len() != lower.len() {
        return false;
    }
    let key = |a: &num_complex::Complex64, b: &num_complex::Complex64| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
    upper.sort_by(key);
    lower.sort_by(key);
    upper.iter().zip(&lower).all(|(a, b)| {
        let scale = 1.0 + a.norm();
        (a - b).norm() <= PAIRING_TOL * scale
    })
}

/// Samples `lambda_max - sqrt(n)` over `cfg.trials` independent matrices.
///
/// Trial `j` draws from the ChaCha8 stream `j` of `cfg.seed`, so the result
/// does not depend on the worker count.
pub fn sample_max_real_eig(cfg: &McConfig) -> EmpiricalCdf {
    let outcomes: Vec<Option<TrialOutcome>> = (0..cfg.trials)
        .into_par_iter()
        .map(|j| run_trial(cfg, j))
        .collect();
    let mut samples = Vec::with_capacity(outcomes.len());
    let mut failures = 0;
    let mut real_count_total = 0;
    for o in outcomes {
        match o {
            Some(t) => {
                samples.push(t.max);
                real_count_total += t.real_count;
            }
            None => failures += 1,
        }
    }
    samples.sort_by(f64::total_cmp);
    let no_real = samples.iter().filter(|s| **s == f64::NEG_INFINITY).count() as u64;
    EmpiricalCdf {
        samples,
        trials: cfg.trials,
        failures,
        no_real,
        real_count_total,
    }
}

/// `sup_s |F_emp(s) - G(s)|` for a nondecreasing `G`, evaluated exactly at
/// the jumps of `F_emp` using left and right limits.
pub fn ks_distance_to<G: Cdf + ?Sized>(emp: &EmpiricalCdf, g: &G) -> f64 {
    let m = emp.samples.len();
    if m == 0 {
        return 1.0;
    }
    let mf = m as f64;
    let mut d = 0.0f64;
    let mut i = 0;
    while i < m {
        let s = emp.samples[i];
        let mut j = i;
        while j < m && emp.samples[j] == s {
            j += 1;
        }
        if s.is_finite() {
            d = d.max((i as f64 / mf - g.eval_left(s)).abs());
            d = d.max((j as f64 / mf - g.eval(s)).abs());
            // Between this jump and the next, F_emp is flat at j/m.
            let next = emp.samples.get(j).copied().unwrap_or(f64::INFINITY);
            if next.is_finite() {
                d = d.max((j as f64 / mf - g.eval_left(next)).abs());
            } else {
                d = d.max((j as f64 / mf - 1.0).abs());
            }
        } else {
            // Samples at -inf carry mass j/m there.
            d = d.max((j as f64 / mf - g.eval(f64::NEG_INFINITY)).abs());
            if let Some(&next) = emp.samples.get(j) {
                d = d.max((j as f64 / mf - g.eval_left(next)).abs());
            }
        }
        i = j;
    }
    d
}

/// KS distance against a tabulated `F`, refusing when more than 1% of the
/// samples fall outside the table's `s`-range.
pub fn ks_distance(emp: &EmpiricalCdf, table: &DistributionTable) -> Result<f64> {
    let (lo, hi) = table.range();
    let outside = emp.samples.iter().filter(|&&s| !(s >= lo && s <= hi)).count();
    if outside as f64 > SUPPORT_FRACTION * emp.samples.len() as f64 {
        return Err(Error::SupportMismatch {
            outside,
            total: emp.samples.len(),
        });
    }
    Ok(ks_distance_to(emp, table))
}

/// Half-width of the Dvoretzky–Kiefer–Wolfowitz band at confidence `1 - alpha`.
pub fn dkw_epsilon(samples: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * samples as f64)).sqrt()
}

/// Largest excess of `|F_emp - F|` over the DKW band on the nodes of `s_values`.
pub fn dkw_excess(emp: &EmpiricalCdf, table: &DistributionTable, s_values: &[f64], alpha: f64) -> f64 {
    let eps = dkw_epsilon(emp.len(), alpha);
    s_values
        .iter()
        .map(|&s| (emp.eval(s) - table.interpolate(s)).abs() - eps)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(McConfig::new(1, 10, 0).is_err());
        assert!(McConfig::new(3, 0, 0).is_err());
        assert!(McConfig::with_im_tol(3, 1, 0, 0.0).is_err());
        let c = McConfig::new(100, 1, 0).unwrap();
        assert!((c.im_tol() - 1e-7).abs() < 1e-20);
    }

    #[test]
    fn empirical_cdf_is_right_continuous() {
        let e = EmpiricalCdf::from_samples(vec![0.5, -1.0, 0.5, 2.0]).unwrap();
        assert_eq!(e.samples(), &[-1.0, 0.5, 0.5, 2.0]);
        assert_eq!(e.eval(-2.0), 0.0);
        assert_eq!(e.eval(0.5), 0.75);
        assert_eq!(e.eval_left(0.5), 0.25);
        assert_eq!(e.eval(3.0), 1.0);
    }

    #[test]
    fn ks_to_itself_is_zero() {
        let e = EmpiricalCdf::from_samples(vec![f64::NEG_INFINITY, 0.3, -0.2, 0.3, 1.7]).unwrap();
        assert_eq!(ks_distance_to(&e, &e), 0.0);
    }

    #[test]
    fn ks_against_uniform_law() {
        struct Uniform;
        impl Cdf for Uniform {
            fn eval(&self, s: f64) -> f64 {
                s.clamp(0.0, 1.0)
            }
            fn eval_left(&self, s: f64) -> f64 {
                self.eval(s)
            }
        }
        let e = EmpiricalCdf::from_samples(vec![0.25, 0.75]).unwrap();
        assert!((ks_distance_to(&e, &Uniform) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn odd_size_always_has_a_real_eigenvalue() {
        let cfg = McConfig::new(5, 200, 7).unwrap();
        let e = sample_max_real_eig(&cfg);
        assert_eq!(e.failures, 0);
        assert_eq!(e.no_real, 0);
        assert!(e.real_count_total >= 200);
        assert!(e.real_count_total % 2 == 200 % 2);
    }

    #[test]
    fn seed_determinism() {
        let cfg = McConfig::new(6, 64, 42).unwrap();
        assert_eq!(sample_max_real_eig(&cfg), sample_max_real_eig(&cfg));
        let other = McConfig::new(6, 64, 43).unwrap();
        assert_ne!(sample_max_real_eig(&cfg).samples(), sample_max_real_eig(&other).samples());
    }

    #[test]
    fn pairing_detects_lone_complex_value() {
        let a = num_complex::Complex64::new(1.0, 2.0);
        let b = a.conj();
        assert!(conjugate_paired(&[&a, &b]));
        assert!(!conjugate_paired(&[&a]));
    }

    #[test]
    fn dkw_width() {
        assert!((dkw_epsilon(1000, 0.01) - ((200f64).ln() / 2000.0).sqrt()).abs() < 1e-15);
    }
}
