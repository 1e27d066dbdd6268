use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::output::Format;
use crate::CliError;

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Output file, written atomically; standard output when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub format: Format,
    /// Mantissa digits of the scientific notation in CSV output.
    #[arg(long, default_value_t = 15, global = true)]
    pub digits: usize,
}

#[derive(Debug, Clone, Args)]
pub struct XRange {
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 0.1)]
    pub step: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// T_1(1), L_1(1) and the coefficients c_j(1; a) for a = 1, 2.
    Constants {
        /// Highest coefficient index.
        #[arg(long, default_value_t = 4)]
        j_max: usize,
    },
    /// q, u and their integrals from the Riemann-Hilbert solver.
    Potential {
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t: f64,
        #[command(flatten)]
        range: XRange,
    },
    /// GLM kernel diagonals and the Chebyshev potential.
    Glm {
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = -6.0, allow_negative_numbers = true)]
        x_min: f64,
        #[arg(long, default_value_t = 6.0, allow_negative_numbers = true)]
        x_max: f64,
        #[arg(long, default_value_t = 0.25)]
        step: f64,
        /// Splitting point for K(gamma); the value goes to standard error.
        #[arg(long, allow_negative_numbers = true)]
        x0: Option<f64>,
    },
    /// F(s; gamma) with the residual of the linear tail law of ln F.
    Distribution {
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = -20.0, allow_negative_numbers = true)]
        s_min: f64,
        #[arg(long, default_value_t = 12.0, allow_negative_numbers = true)]
        s_max: f64,
        #[arg(long, default_value_t = 0.05)]
        s_step: f64,
    },
    /// H, K, N, M at time t, with spreads against a second time.
    Conserved {
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t: f64,
        /// Second time for the invariance spreads; |t| <= 0.1.
        #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
        compare_t: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
    },
    /// Solver minus left-tail model on an x grid.
    VerifyAsymptotics {
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        #[command(flatten)]
        range: XRange,
    },
    /// Series coefficients l1, l2, l3 of L_{-1}/(2 kappa).
    FitLkappa,
    /// Largest real eigenvalue of real Ginibre matrices, shifted by sqrt(n).
    Mc {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 5000)]
        trials: u64,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
        /// JSON summary file; standard error when absent.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Runs the acceptance suite and prints one PASS/FAIL line per criterion.
    AllChecks {
        /// The suite is defined at gamma = 1.
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
    },
}

/// Riemann-Hilbert, GLM and Monte Carlo tools for the KdV / Ginibre
/// largest-real-eigenvalue problem.
///
/// Worker threads for the parallel solvers follow RAYON_NUM_THREADS
/// (default: one per logical core).
#[derive(Debug, Parser)]
#[command(name = "kdv-ginibre", version)]
pub struct Invocation {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

/// Parsed and validated invocation.
#[derive(Debug)]
pub struct RunConfig {
    pub common: Common,
    pub command: Command,
}

fn finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{name} must be finite")))
    }
}

fn range(name: &str, lo: f64, hi: f64, step: f64) -> Result<(), CliError> {
    finite(name, lo)?;
    finite(name, hi)?;
    if !(hi > lo) {
        return Err(CliError::Validation(format!("{name}: upper end must exceed lower end")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::Validation(format!("{name}: step must be positive")));
    }
    if (hi - lo) / step > 1e6 {
        return Err(CliError::Validation(format!("{name}: more than 1e6 grid points")));
    }
    Ok(())
}

fn gamma(g: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&g) {
        Ok(())
    } else {
        Err(CliError::Validation(format!("gamma = {g} must lie in [0, 1]")))
    }
}

impl RunConfig {
    pub fn validate(inv: Invocation) -> Result<Self, CliError> {
        if !(1..=17).contains(&inv.common.digits) {
            return Err(CliError::Validation("digits must lie in 1..=17".into()));
        }
        match &inv.command {
            Command::Constants { .. } | Command::FitLkappa => {}
            Command::Potential { gamma: g, t, range: r } => {
                gamma(*g)?;
                finite("t", *t)?;
                range("x", r.x_min, r.x_max, r.step)?;
            }
            Command::Glm { gamma: g, x_min, x_max, step, x0 } => {
                gamma(*g)?;
                range("x", *x_min, *x_max, *step)?;
                if let Some(x0) = x0 {
                    finite("x0", *x0)?;
                }
            }
            Command::Distribution { gamma: g, s_min, s_max, s_step } => {
                gamma(*g)?;
                range("s", *s_min, *s_max, *s_step)?;
            }
            Command::Conserved { gamma: g, t, compare_t, step } => {
                gamma(*g)?;
                for (name, v) in [("t", *t), ("compare-t", *compare_t)] {
                    if !(v.abs() <= 0.1) {
                        return Err(CliError::Validation(format!("{name} must lie in [-0.1, 0.1]")));
                    }
                }
                range("x", -1.0, 1.0, *step)?;
            }
            Command::VerifyAsymptotics { gamma: g, range: r } => {
                gamma(*g)?;
                range("x", r.x_min, r.x_max, r.step)?;
            }
            Command::Mc { n, trials, .. } => {
                if *n == 0 || *trials == 0 {
                    return Err(CliError::Validation("n and trials must be positive".into()));
                }
            }
            Command::AllChecks { gamma: g } => {
                if *g != 1.0 {
                    return Err(CliError::Validation("all-checks is defined at gamma = 1".into()));
                }
            }
        }
        Ok(Self {
            common: inv.common,
            command: inv.command,
        })
    }
}
