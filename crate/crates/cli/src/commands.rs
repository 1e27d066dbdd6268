use std::collections::BTreeMap;

use serde_json::Value;

use kdv_ginibre::acceptance;
use kdv_ginibre::asymptotics::{default_fit_kappas, fit_lkappa_series, tail_residuals, TailModel};
use kdv_ginibre::conserved::{compute_conserved, invariance_check};
use kdv_ginibre::distribution::{
    distribution_table, s_grid, QProfile, TABLE_HI, TABLE_LO, TABLE_STEP,
};
use kdv_ginibre::ginibre_mc::{ks_distance, sample_max_real_eig, McConfig};
use kdv_ginibre::glm::{k_invariant_glm, GlmKernels, GlmPotential, GlmSide};
use kdv_ginibre::rhp::{potential_table, x_grid};
use kdv_ginibre::scattering::{l1_of_1, t1_constant, Scattering};
use kdv_ginibre::GammaParam;

use crate::config::{Command, Common, RunConfig};
use crate::output::{emit, flat_json, number, sci, Format, Table};
use crate::CliError;

const GLM_DEGREE: usize = 120;

fn param(g: f64) -> Result<GammaParam, CliError> {
    Ok(GammaParam::new(g)?)
}

fn write(common: &Common, content: &str) -> Result<(), CliError> {
    emit(common.output.as_deref(), content).map_err(CliError::Io)
}

fn write_table(common: &Common, table: &Table) -> Result<(), CliError> {
    write(common, &table.render(common.format, common.digits))
}

fn write_object(common: &Common, fields: BTreeMap<&str, Value>) -> Result<(), CliError> {
    let content = match common.format {
        Format::Json => flat_json(fields),
        Format::Csv => {
            let keys: Vec<&str> = fields.keys().copied().collect();
            let vals: Vec<String> = fields
                .values()
                .map(|v| match v {
                    Value::Number(n) => sci(n.as_f64().unwrap_or(f64::NAN), common.digits),
                    Value::Null => "nan".into(),
                    other => other.to_string(),
                })
                .collect();
            format!("{}\n{}\n", keys.join(","), vals.join(","))
        }
    };
    write(common, &content)
}

pub fn run(cfg: RunConfig) -> Result<(), CliError> {
    let common = &cfg.common;
    match cfg.command {
        Command::Constants { j_max } => constants(common, j_max),
        Command::Potential { gamma, t, range } => {
            let p = param(gamma)?;
            let table = potential_table(&p, &x_grid(range.x_min, range.x_max, range.step), t)?;
            table.check()?;
            let mut out = Table::new(vec!["x", "q", "q_x", "u", "int_q", "int_q2", "int_u", "residual"]);
            for r in &table.rows {
                out.push(vec![r.x, r.q, r.q_x, r.u, r.int_q, r.int_q2, r.int_u, r.residual]);
            }
            write_table(common, &out)
        }
        Command::Glm { gamma, x_min, x_max, step, x0 } => {
            let p = param(gamma)?;
            let xs = x_grid(x_min, x_max, step);
            let mut out = Table::new(vec!["x", "K_plus_diag", "K_minus_diag", "u_glm"]);
            if p.is_trivial() {
                for &x in &xs {
                    out.push(vec![x, 0.0, 0.0, 0.0]);
                }
            } else {
                let kernels = GlmKernels::new(&p)?;
                let plus = kernels.table(GlmSide::Plus, &xs)?;
                let minus = kernels.table(GlmSide::Minus, &xs)?;
                let u = GlmPotential::new(&kernels, x_min, x_max, GLM_DEGREE)?;
                for (i, &x) in xs.iter().enumerate() {
                    out.push(vec![x, plus.kernel_diag[i], minus.kernel_diag[i], u.u_at(x)]);
                }
            }
            if let Some(x0) = x0 {
                eprintln!("K({gamma}) at x0 = {x0}: {}", sci(k_invariant_glm(&p, x0)?, common.digits));
            }
            write_table(common, &out)
        }
        Command::Distribution { gamma, s_min, s_max, s_step } => {
            let p = param(gamma)?;
            let table = potential_table(&p, &x_grid(TABLE_LO, TABLE_HI, TABLE_STEP), 0.0)?;
            let profile = QProfile::from_table(&table, &p)?;
            let m = compute_conserved(&table, &p)?.m.unwrap_or(0.0);
            let half_t1 = 0.5 * t1_constant(&p)?;
            let dist = distribution_table(&profile, &s_grid(s_min, s_max, s_step)?)?;
            let mut out = Table::new(vec!["s", "F", "lnF", "tail_model_residual"]);
            for (&s, &f) in dist.s_values.iter().zip(&dist.f_values) {
                let ln_f = f.ln();
                out.push(vec![s, f, ln_f, ln_f - (half_t1 * s - 0.5 * m)]);
            }
            write_table(common, &out)
        }
        Command::Conserved { gamma, t, compare_t, step } => {
            let p = param(gamma)?;
            let report = invariance_check(&p, &[t, compare_t], step)?;
            let c = &report.sets[0];
            let fields = BTreeMap::from([
                ("gamma", number(gamma)),
                ("t", number(t)),
                ("compare_t", number(compare_t)),
                ("H", number(c.h)),
                ("K", number(c.k)),
                ("N", number(c.n)),
                ("M", c.m.map_or(Value::Null, number)),
                ("spread_H", number(report.spread_h)),
                ("spread_K", number(report.spread_k)),
                ("spread_N", number(report.spread_n)),
                ("spread_M", number(report.spread_m)),
            ]);
            write_object(common, fields)
        }
        Command::VerifyAsymptotics { gamma, range } => {
            let p = param(gamma)?;
            let model = TailModel::new(&p)?;
            let rows = tail_residuals(&p, &model, &x_grid(range.x_min, range.x_max, range.step))?;
            let mut out = Table::new(vec!["x", "q_solver", "q_model", "q_err", "int_q2_err", "a1_err", "int_q_err"]);
            for r in &rows {
                out.push(vec![
                    r.x,
                    r.q_solver,
                    r.q_model,
                    r.q_err,
                    r.int_q2_err,
                    r.a1_err,
                    r.int_q_err.unwrap_or(f64::NAN),
                ]);
            }
            write_table(common, &out)
        }
        Command::FitLkappa => {
            let fit = fit_lkappa_series(&default_fit_kappas())?;
            let fields = BTreeMap::from([
                ("l1", number(fit.l1)),
                ("l2", number(fit.l2)),
                ("l3", number(fit.l3)),
                ("residual", number(fit.residual)),
            ]);
            write_object(
                &Common {
                    format: Format::Json,
                    ..common.clone()
                },
                fields,
            )
        }
        Command::Mc { n, trials, seed, summary } => {
            let mc = McConfig::new(n, trials, seed)?;
            let emp = sample_max_real_eig(&mc);
            let ks = ks_distance(&emp, &*acceptance::f_table()?)?;
            let mut out = Table::new(vec!["shifted_max"]);
            for &s in emp.samples() {
                out.push(vec![s]);
            }
            write_table(common, &out)?;
            let fields = BTreeMap::from([
                ("n", Value::from(n)),
                ("trials", Value::from(trials)),
                ("seed", Value::from(seed)),
                ("ks_distance", number(ks)),
                ("mean_real_count", number(emp.mean_real_count())),
                ("failures", Value::from(emp.failures)),
                ("no_real", Value::from(emp.no_real)),
            ]);
            let text = flat_json(fields);
            match summary {
                Some(path) => emit(Some(&path), &text).map_err(CliError::Io),
                None => {
                    eprint!("{text}");
                    Ok(())
                }
            }
        }
        Command::AllChecks { .. } => {
            let reports = acceptance::run_all();
            let mut text = String::new();
            for r in &reports {
                text.push_str(&format!("{r}\n"));
            }
            write(common, &text)?;
            let failed: Vec<String> = reports
                .iter()
                .filter(|r| !r.passed)
                .map(|r| format!("criterion {} ({}): {}", r.id, r.name, r.failures.join("; ")))
                .collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::CheckFailed(failed.join("\n")))
            }
        }
    }
}

fn constants(common: &Common, j_max: usize) -> Result<(), CliError> {
    let one = param(1.0)?;
    let mut rows = vec![
        ("T1(1)".to_string(), t1_constant(&one)?),
        ("L1(1)".to_string(), l1_of_1()?),
    ];
    for a in [1.0, 2.0] {
        let c = Scattering::new(&GammaParam::with_layer(1.0, a)?)?.c_coeffs(j_max)?;
        for (j, v) in c.into_iter().enumerate() {
            rows.push((format!("c{j}(1;{a})"), v));
        }
    }
    let content = match common.format {
        Format::Csv => {
            let mut s = String::from("quantity,value\n");
            for (name, v) in &rows {
                s.push_str(&format!("{name},{}\n", sci(*v, common.digits)));
            }
            s
        }
        Format::Json => flat_json(rows.iter().map(|(k, v)| (k.as_str(), number(*v))).collect()),
    };
    write(common, &content)
}
