//! End-to-end acceptance checks. Each criterion returns a report with the
//! measured quantities and a pass flag; heavy intermediate results are
//! cached per process.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::asymptotics::{fit_lkappa_series, TailModel};
use crate::conserved::{compute_conserved, invariance_from_sets, m_at_anchors, window, ConservedSet, INVARIANCE_STEP};
use crate::distribution::{distribution_table, f_of_s_uform, s_grid, DistributionTable, QProfile};
use crate::error::Result;
use crate::ginibre_mc::{ks_distance, sample_max_real_eig, EmpiricalCdf, McConfig};
use crate::glm::{k_invariant_glm, riccati_q_from_u, GlmKernels, GlmPotential};
use crate::param::GammaParam;
use crate::rhp::{default_grid, eval_m, potential_table, solve_sie, x_grid, PotentialTable};
use crate::scattering::{c_coeff, l1_routes, lm1_routes, reflection_r, t1_constant, Scattering, Side};
use crate::special::polylog;

/// `T_1(1)` as printed.
pub const T1_OF_1: f64 = 1.042_186_978_869;
/// `L_1(1)` as printed.
pub const L1_OF_1: f64 = 1.165_194_315_878_021_340_410_354;
/// Conjectured series coefficients.
pub const L2_PUBLISHED: f64 = 0.678_838_896_877;
pub const L3_PUBLISHED: f64 = 0.236_014_873_1;
/// The two literature values of `K(1)`.
pub const K1_LITERATURE: [f64; 2] = [-0.1254, 0.567_989_25];

/// Residual level below which successive windows are not compared.
pub const DECAY_FLOOR: f64 = 1e-12;
/// Required residual ratio between successive unit windows.
pub const DECAY_FACTOR: f64 = 10.0;

/// Gammas of the two-solver and tail criteria.
pub const GAMMAS: [f64; 4] = [0.25, 0.5, 0.9, 1.0];

/// MC parameters of criterion 10.
pub const MC_N: usize = 200;
pub const MC_TRIALS: u64 = 5000;
pub const MC_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub values: Vec<(String, f64)>,
    pub failures: Vec<String>,
}

impl CriterionReport {
    fn new(id: u8, name: &'static str) -> Self {
        Self {
            id,
            name,
            passed: true,
            values: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn record(&mut self, key: impl Into<String>, value: f64) {
        self.values.push((key.into(), value));
    }

    /// Records `value` and requires `value < limit`.
    fn below(&mut self, key: impl Into<String>, value: f64, limit: f64) {
        let key = key.into();
        if !(value < limit) {
            self.passed = false;
            self.failures.push(format!("{key} = {value:.3e} not below {limit:.1e}"));
        }
        self.values.push((key, value));
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.passed = false;
            self.failures.push(what.into());
        }
    }

    fn error(id: u8, name: &'static str, e: crate::Error) -> Self {
        let mut r = Self::new(id, name);
        r.passed = false;
        r.failures.push(format!("error: {e}"));
        r
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name
        )?;
        for (k, v) in &self.values {
            write!(f, "; {k}={v:.6e}")?;
        }
        for m in &self.failures {
            write!(f, "; {m}")?;
        }
        Ok(())
    }
}

fn gp(g: f64) -> GammaParam {
    GammaParam::new(g).expect("valid gamma")
}

type Cache<T> = Mutex<HashMap<u64, Arc<T>>>;

fn cached<T, F: FnOnce() -> Result<T>>(cache: &Cache<T>, key: u64, make: F) -> Result<Arc<T>> {
    if let Some(v) = cache.lock().expect("cache lock").get(&key) {
        return Ok(v.clone());
    }
    let v = Arc::new(make()?);
    cache.lock().expect("cache lock").insert(key, v.clone());
    Ok(v)
}

/// `t = 0` table on `[-10, 10]` with step 0.05.
pub fn base_table(g: f64) -> Result<Arc<PotentialTable>> {
    static CACHE: OnceLock<Cache<PotentialTable>> = OnceLock::new();
    cached(CACHE.get_or_init(Default::default), g.to_bits(), || {
        let t = potential_table(&gp(g), &x_grid(-10.0, 10.0, 0.05), 0.0)?;
        t.check()?;
        Ok(t)
    })
}

/// GLM interpolant of `u` on `[-6, 6]`.
pub fn glm_potential(g: f64) -> Result<Arc<GlmPotential>> {
    static CACHE: OnceLock<Cache<GlmPotential>> = OnceLock::new();
    cached(CACHE.get_or_init(Default::default), g.to_bits(), || {
        GlmPotential::new(&GlmKernels::plus(&gp(g)), -6.0, 6.0, 120)
    })
}

/// `F(.; 1)` on `s in [-20, 12]`, step 0.05.
pub fn f_table() -> Result<Arc<DistributionTable>> {
    static CELL: OnceLock<Mutex<Option<Arc<DistributionTable>>>> = OnceLock::new();
    let cell = CELL.get_or_init(Default::default);
    let mut guard = cell.lock().expect("cache lock");
    if let Some(t) = guard.as_ref() {
        return Ok(t.clone());
    }
    let profile = QProfile::from_table(&*base_table(1.0)?, &gp(1.0))?;
    let t = Arc::new(distribution_table(&profile, &s_grid(-20.0, 12.0, 0.05)?)?);
    *guard = Some(t.clone());
    Ok(t)
}

/// `K(1)` by the GLM splitting formula.
pub fn k1_glm() -> Result<f64> {
    static CELL: OnceLock<Mutex<Option<f64>>> = OnceLock::new();
    let cell = CELL.get_or_init(Default::default);
    let mut guard = cell.lock().expect("cache lock");
    if let Some(v) = *guard {
        return Ok(v);
    }
    let v = k_invariant_glm(&gp(1.0), 0.0)?;
    *guard = Some(v);
    Ok(v)
}

/// Conserved sets at `t = 0` (base table) and `t = 0.05` (wide window).
pub fn conserved_pair(g: f64) -> Result<Arc<[ConservedSet; 2]>> {
    static CACHE: OnceLock<Cache<[ConservedSet; 2]>> = OnceLock::new();
    cached(CACHE.get_or_init(Default::default), g.to_bits(), || {
        let p = gp(g);
        let c0 = compute_conserved(&*base_table(g)?, &p)?;
        let t = 0.05;
        let (lo, hi) = window(t);
        let c1 = compute_conserved(&potential_table(&p, &x_grid(lo, hi, INVARIANCE_STEP), t)?, &p)?;
        Ok([c0, c1])
    })
}

/// Maxima of `|f|` over consecutive unit windows `[a - 1, a]`, walking left
/// from `start` for `count` windows.
fn window_maxima(xs: &[f64], res: &[f64], start: f64, count: usize) -> Vec<(f64, f64)> {
    (0..count)
        .map(|i| {
            let hi = start - i as f64;
            let lo = hi - 1.0;
            let m = xs
                .iter()
                .zip(res)
                .filter(|(x, _)| **x >= lo - 1e-9 && **x <= hi + 1e-9)
                .map(|(_, r)| r.abs())
                .fold(0.0, f64::max);
            (hi, m)
        })
        .collect()
}

/// Checks a factor-`DECAY_FACTOR` drop between successive windows while the
/// later window is above the floor; returns the ratios that were tested.
fn decay_check(r: &mut CriterionReport, label: &str, maxima: &[(f64, f64)]) {
    let mut tested = 0;
    for w in maxima.windows(2) {
        let (hi, a) = w[0];
        let (_, b) = w[1];
        if b < DECAY_FLOOR {
            break;
        }
        tested += 1;
        let ratio = a / b;
        r.record(format!("{label} decay [{}, {}]", hi - 2.0, hi - 1.0), ratio);
        r.require(
            ratio >= DECAY_FACTOR,
            format!("{label}: residual ratio {ratio:.2} below {DECAY_FACTOR} at window ending {}", hi - 1.0),
        );
    }
    r.require(tested >= 2, format!("{label}: only {tested} windows above the floor"));
}

pub fn criterion_1() -> CriterionReport {
    let name = "constants T1(1), L1(1), a-independence";
    let run = || -> Result<CriterionReport> {
        let mut r = CriterionReport::new(1, name);
        let t1 = t1_constant(&gp(1.0))?;
        r.record("T1(1)", t1);
        r.below("|T1(1) - 1.042186978869|", (t1 - T1_OF_1).abs(), 1e-9);
        let l = l1_routes()?;
        r.record("L1(1)", l.contour);
        r.below("|L1(1) - published|", (l.contour - L1_OF_1).abs(), 1e-10);
        r.below("|c1(1;1)+2 - c1(1;2)-1|", (l.layer_a1 - l.layer_a2).abs(), 1e-10);
        Ok(r)
    };
    run().unwrap_or_else(|e| CriterionReport::error(1, name, e))
}

pub fn criterion_2() -> CriterionReport {
    let name = "scattering symmetries and unitarity";
    let run = || -> Result<CriterionReport> {
        let mut r = CriterionReport::new(2, name);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for g in [0.8, 1.0] {
            let p = gp(g);
            let sc = Scattering::new(&p)?;
            let rel = |a: C64, b: C64| (a - b).norm() / a.norm().max(1.0);
            let (mut sym_t, mut sym_l, mut sym_r) = (0.0f64, 0.0f64, 0.0f64);
            let mut count = 0;
            while count < 50 {
                let k = C64::from_polar(5.0 * rng.random::<f64>().sqrt(), 2.0 * PI * rng.random::<f64>());
                if (k - C64::new(0.0, p.kappa())).norm() < 0.1 || k.im.abs() < 1e-3 {
                    continue;
                }
                count += 1;
                let mk = -k.conj();
                sym_t = sym_t.max(rel(sc.transmission(k, Side::Plus)?, sc.transmission(mk, Side::Plus)?.conj()));
                sym_l = sym_l.max(rel(sc.left_reflection(k, Side::Plus)?, sc.left_reflection(mk, Side::Plus)?.conj()));
                sym_r = sym_r.max(rel(reflection_r(k, &p), reflection_r(mk, &p).conj()));
            }
            let (mut unit, mut rel_tl) = (0.0f64, 0.0f64);
            for _ in 0..50 {
                let s = rng.random_range(-5.0..5.0);
                let k = C64::new(s, 0.0);
                let t = sc.transmission(k, Side::Plus)?;
                let rr = reflection_r(k, &p);
                let l = sc.left_reflection(k, Side::Plus)?;
                unit = unit.max((t.norm_sqr() - (1.0 - rr.norm_sqr())).abs());
                rel_tl = rel_tl.max((t * rr.conj() + l * t.conj()).norm());
            }
            r.below(format!("gamma={g} T symmetry"), sym_t, 1e-10);
            r.below(format!("gamma={g} L symmetry"), sym_l, 1e-10);
            r.below(format!("gamma={g} R symmetry"), sym_r, 1e-10);
            r.below(format!("gamma={g} |T|^2 - 1 + |R|^2"), unit, 1e-10);
            r.below(format!("gamma={g} T conj(R) + L conj(T)"), rel_tl, 1e-10);
        }
        let c2 = c_coeff(2, &GammaParam::with_layer(1.0, 2.0)?)?;
        r.below("|c2(1;2)|", c2.abs(), 1e-10);
        Ok(r)
    };
    run().unwrap_or_else(|e| CriterionReport::error(2, name, e))
}

pub fn criterion_3() -> CriterionReport {
    let name = "RHP solver: det M, symmetries, dA1/dx = 2 B1^2, gamma = 0";
    let run = || -> Result<CriterionReport> {
        let mut r = CriterionReport::new(3, name);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (mut det, mut conj, mut refl, mut ode) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..8 {
            let g = rng.random_range(0.05..=1.0);
            let x = rng.random_range(-6.0..4.0);
            let p = gp(g);
            let grid = default_grid(x, 0.0)?;
            let sol = solve_sie(x, 0.0, &p, &grid)?;
            for _ in 0..4 {
                let k = C64::new(rng.random_range(-3.0..3.0), rng.random_range(0.05..2.0))
                    * if rng.random::<bool>() { 1.0 } else { -1.0 };
                let m = eval_m(k, &sol, Side::Plus)?;
                let mc = eval_m(k.conj(), &sol, Side::Plus)?;
                let mn = eval_m(-k, &sol, Side::Plus)?;
                det = det.max((m.det() - 1.0).norm());
                conj = conj.max((mc.conj().sigma1_conjugate() - m).max_abs());
                refl = refl.max((mn.sigma1_conjugate() - m).max_abs());
            }
            let e = 1e-3;
            let a1 = |dx: f64| -> Result<f64> { Ok(solve_sie(x + dx, 0.0, &p, &grid)?.a1) };
            let fd = (8.0 * (a1(e)? - a1(-e)?) - (a1(2.0 * e)? - a1(-2.0 * e)?)) / (12.0 * e);
            ode = ode.max((fd - 2.0 * sol.b1 * sol.b1).abs());
        }
        r.below("max |det M - 1|", det, 1e-8);
        r.below("max |conj(M(conj k)) - s1 M s1|", conj, 1e-8);
        r.below("max |s1 M(-k) s1 - M(k)|", refl, 1e-8);
        r.below("max |dA1/dx - 2 B1^2|", ode, 1e-5);
        let zero = potential_table(&gp(0.0), &x_grid(-3.0, 3.0, 1.0), 0.0)?;
        let exact_zero = zero
            .rows
            .iter()
            .all(|row| row.q == 0.0 && row.q_x == 0.0 && row.u == 0.0 && row.int_q == 0.0 && row.int_q2 == 0.0);
        r.require(exact_zero, "gamma = 0 output is not identically zero");
        Ok(r)
    };
    run().unwrap_or_else(|e| CriterionReport::error(3, name, e))
}

/// Residuals against the tail model on the base table, then the decay test.
fn tail_criterion(r: &mut CriterionReport, g: f64) -> Result<()> {
    let p = gp(g);
    let model = TailModel::new(&p)?;
    let table = base_table(g)?;
    let mut xs = Vec::new();
    let (mut q_res, mut iq_res) = (Vec::new(), Vec::new());
    for row in &table.rows {
        if row.x > 1e-9 {
            continue;
        }
        let (alpha, beta) = model.alpha_beta_unchecked(row.x)?;
        xs.push(row.x);
        q_res.push(row.q - 2.0 * beta);
        // int_x^infty q for gamma = 1; int_x^infty q^2 otherwise.
        iq_res.push(match model.int_q_unchecked(row.x)? {
            Some(v) => row.int_q - v,
            None => row.int_q2 - (2.0 * model.t1 - 2.0 * alpha),
        });
    }
    let in_window = |x: f64| (-9.0 - 1e-9..=-6.0 + 1e-9).contains(&x);
    let sup = |res: &[f64]| {
        xs.iter()
            .zip(res)
            .filter(|(x, _)| in_window(**x))
            .map(|(_, v)| v.abs())
            .fold(0.0, f64::max)
    };
    let label_i = if p.is_critical() { "int q" } else { "int q^2" };
    r.below(format!("gamma={g} sup |q - model| on [-9,-6]"), sup(&q_res), 1e-5);
    r.below(format!("gamma={g} sup |{label_i} - model| on [-9,-6]"), sup(&iq_res), 1e-5);
    decay_check(r, &format!("gamma={g} q"), &window_maxima(&xs, &q_res, 0.0, 9));
    decay_check(r, &format!("gamma={g} {label_i}"), &window_maxima(&xs, &iq_res, 0.0, 9));
    Ok(())
}

pub fn criterion_4() -> CriterionReport {
    let name = "tail law at gamma = 1";
    let run = || -> Result<CriterionReport> {
        let mut r = CriterionReport::new(4, name);
        tail_criterion(&mut r, 1.0)?;
        Ok(r)
    };
    run().unwrap_or_else(|e| CriterionReport::error(4, name, e))
}

pub fn criterion_5() -> CriterionReport {
    let name = "tail law for gamma < 1 with two L_{-1} routes";
    let run = || -> Result<CriterionReport> {
        let mut r = CriterionReport::new(5, name);
        for g in [0.25, 0.5, 0.9] {
            let routes = lm1_routes(&gp(g))?;
            r.record(format!("gamma={g} L_-1"), routes.residue);
            r.below(
                format!("gamma={g} L_-1 route gap (rel)"),
                (routes.residue - routes.real_line).abs() / routes.residue,
                1e-8,
            );
            tail_criterion(&mut r, g)?;
        }
        Ok(r)
    };
    run().unwrap_or_else(|e| CriterionReport::error(5, name, e))
}

pub fn criterion_6() -> CriterionReport {
    let name = "RHP vs GLM potential and Riccati recovery";
    let run = || -> Result<CriterionReport> {
        let mut r = CriterionReport::new(6, name);
        for g in GAMMAS {
            let table = base_table(g)?;
            let glm = glm_potential(g)?;
            let inside = |x: f64| (-5.0 - 1e-9..=5.0 + 1e-9).contains(&x);
            let du = table
                .rows
                .iter()
                .filter(|row| inside(row.x))
                .map(|row| (row.u - glm.u_at(row.x)).abs())
                .fold(0.0, f64::max);
            r.below(format!("gamma={g} max |u_RHP - u_GLM|"), du, 1e-5);
            let q = riccati_q_from_u(&table)?;
            let dq = table
                .rows
                .iter()
                .zip(&q)
                .filter(|(row, _)| inside(row.x))
                .map(|(row, v)| (row.q - v).abs())
                .fold(0.0, f64::max);
            r.below(format!("gamma={g} max |q_Riccati - q_RHP|"), dq, 1e-5);
        }
        Ok(r)
    };
    run().unwrap_or_else(|e| CriterionReport::error(6, name, e))
}

pub fn criterion_7() -> CriterionReport {
    let name = "conservation laws";
    let run = || -> Result<CriterionReport> {
        let mut r = CriterionReport::new(7, name);
        for g in GAMMAS {
            let c = compute_conserved(&*base_table(g)?, &gp(g))?;
            let oracle = (2.0 / PI).sqrt() * polylog(1.5, g);
            r.below(format!("gamma={g} |int u - sqrt(2/pi) Li(3/2)|"), (c.mass - oracle).abs(), 1e-6);
        }
        for g in [0.5, 1.0] {
            let pair = conserved_pair(g)?;
            let rep = invariance_from_sets(pair.to_vec());
            r.below(format!("gamma={g} spread H"), rep.spread_h, 1e-3);
            r.below(format!("gamma={g} spread K"), rep.spread_k, 1e-3);
            r.below(format!("gamma={g} spread N"), rep.spread_n, 1e-3);
            r.below(format!("gamma={g} spread M"), rep.spread_m, 1e-3);
        }
        let m = m_at_anchors(&*base_table(1.0)?, &gp(1.0), &[-6.0, -8.0])?;
        r.record("M(1) anchor -6", m[0]);
        r.below("|M(1; -6) - M(1; -8)|", (m[0] - m[1]).abs(), 1e-5);
        Ok(r)
    };
    run().unwrap_or_else(|e| CriterionReport::error(7, name, e))
}

pub fn criterion_8() -> CriterionReport {
    let name = "tail of F(s;1) and K(1) = M(1)";
    let run = || -> Result<CriterionReport> {
        let mut r = CriterionReport::new(8, name);
        let table = f_table()?;
        let (slope, offset) = (
            table.tail_slope.expect("table reaches s = -20"),
            table.tail_offset.expect("table reaches s = -20"),
        );
        r.record("tail slope", slope);
        r.record("tail offset", offset);
        r.below("|slope - T1(1)/2|", (slope - 0.5 * T1_OF_1).abs(), 1e-4);
        let k1 = k1_glm()?;
        let m1 = compute_conserved(&*base_table(1.0)?, &gp(1.0))?.m.expect("gamma = 1");
        r.record("K(1) GLM", k1);
        r.record("M(1)", m1);
        r.below("|offset + K(1)/2|", (offset + 0.5 * k1).abs(), 1e-3);
        r.below("|K(1) - M(1)|", (k1 - m1).abs(), 1e-3);
        r.record("|K(1) - (-0.1254)|", (k1 - K1_LITERATURE[0]).abs());
        r.record("|K(1) - 0.56798925|", (k1 - K1_LITERATURE[1]).abs());
        let glm = glm_potential(1.0)?;
        let mut route_gap = 0.0f64;
        for s in [-8.0, -4.0, 0.0, 4.0] {
            let i = table.s_values.iter().position(|v| (v - s).abs() < 1e-9).expect("grid node");
            route_gap = route_gap.max((table.f_values[i] - f_of_s_uform(s, &glm)?).abs());
        }
        r.below("q-form vs u-form max gap", route_gap, 1e-6);
        r.below("monotonicity defect", table.monotonicity_defect(), 1e-12);
        Ok(r)
    };
    run().unwrap_or_else(|e| CriterionReport::error(8, name, e))
}

pub fn criterion_9() -> CriterionReport {
    let name = "small-kappa series of L_{-1}/(2 kappa)";
    let run = || -> Result<CriterionReport> {
        let mut r = CriterionReport::new(9, name);
        let fit = fit_lkappa_series(&crate::asymptotics::default_fit_kappas())?;
        r.record("l1", fit.l1);
        r.record("l2", fit.l2);
        r.record("l3", fit.l3);
        r.below("|l2 - 0.678838896877|", (fit.l2 - L2_PUBLISHED).abs(), 1e-4);
        r.below("|l2 - L1^2/2|", (fit.l2 - 0.5 * L1_OF_1 * L1_OF_1).abs(), 1e-4);
        r.below("|l3 - 0.2360148731|", (fit.l3 - L3_PUBLISHED).abs(), 1e-3);
        let gap = (fit.l3 - L1_OF_1.powi(3) / 6.0).abs();
        r.record("|l3 - L1^3/6|", gap);
        r.require(gap > 10.0 * (fit.l3 - L3_PUBLISHED).abs().max(1e-4), "l3 not separated from L1^3/6");
        Ok(r)
    };
    run().unwrap_or_else(|e| CriterionReport::error(9, name, e))
}

/// Monte Carlo comparison; `trials` is 5000 for the criterion proper.
pub fn criterion_10_with(n: usize, trials: u64, seed: u64) -> CriterionReport {
    let name = "Monte Carlo largest real eigenvalue vs F(s;1)";
    let run = || -> Result<CriterionReport> {
        let mut r = CriterionReport::new(10, name);
        let cfg = McConfig::new(n, trials, seed)?;
        let emp = sample_max_real_eig(&cfg);
        let ks = ks_distance(&emp, &*f_table()?)?;
        r.below("KS distance", ks, 0.05);
        let expect = (2.0 * n as f64 / PI).sqrt();
        r.record("mean real count", emp.mean_real_count());
        r.below("relative count error", (emp.mean_real_count() - expect).abs() / expect, 0.1);
        r.record("failed trials", emp.failures as f64);
        let small = McConfig::new(n, 64, seed)?;
        let again: EmpiricalCdf = sample_max_real_eig(&small);
        r.require(again == sample_max_real_eig(&small), "same seed gave different samples");
        Ok(r)
    };
    run().unwrap_or_else(|e| CriterionReport::error(10, name, e))
}

pub fn criterion_10() -> CriterionReport {
    criterion_10_with(MC_N, MC_TRIALS, MC_SEED)
}

/// All criteria in order.
pub fn run_all() -> Vec<CriterionReport> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(),
        criterion_4(),
        criterion_5(),
        criterion_6(),
        criterion_7(),
        criterion_8(),
        criterion_9(),
        criterion_10(),
    ]
}
