//! The experiment commands behind the `acn` subcommands.
//!
//! Classic combining schemes (single, isotropic, MRC, EGC, SC) hold one
//! combined SNR for the whole burst, so their burst error probability is the
//! per-packet error at `rho / K` raised to the `K`th power. The phase-shifter
//! combiner follows its schedule, so its burst error is the product of the
//! scheduled per-packet errors.

use acn_core::{
    binomial_ci99_contains, burst_error_prob, burst_snr_sum, design_rates, f_kernel,
    ks_critical_value, mismatch_sweep, multi_period_check, optimal_burst_objective, rho,
    simulate_bursts, simulate_scenario2, worst_case_aoa, worst_mismatch_objective,
    x_star_membership, AcnError, AntennaArray, BurstTrialConfig, CombiningScheme, CrossTerms,
    OmegaMode, PepModel, Scenario2Config,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::{PI, TAU};

use crate::config::deg;
use crate::output::Report;
use crate::{CliError, Ctx};

const MEMBERSHIP_TOL: f64 = 1e-9;

fn to_deg(value: f64) -> f64 {
    value * 180.0 / PI
}

fn pairwise_in_x_star(x: &[f64], k: u32, tol: f64) -> bool {
    for l in 0..x.len() {
        for m in (l + 1)..x.len() {
            if !x_star_membership(x[m] - x[l], k, tol) {
                return false;
            }
        }
    }
    true
}

/// The commands that evaluate a single azimuth use the configured one, or
/// fall back to the worst-case angle of arrival searched on `points`.
fn resolve_phi(ctx: &Ctx, array: &AntennaArray, points: usize) -> Result<f64, CliError> {
    match ctx.cfg.phi() {
        Some(phi) => Ok(phi),
        None => Ok(worst_case_aoa(array, points.max(360))?),
    }
}

/// Burst error of a scheme that sees the flat per-packet SNR `rho / K`.
fn flat_burst_bep(pep: &PepModel, rho: f64, k: u32) -> Result<f64, CliError> {
    Ok(pep.evaluate(rho / k as f64)?.powi(k as i32))
}

/// `design`: the optimal rotation rates as CSV, with `X*` membership and
/// period-multiple notes.
pub fn design(ctx: &Ctx) -> Result<(), CliError> {
    let array = ctx.cfg.array(&ctx.dir)?;
    let budget = ctx.cfg.budget()?;
    let k = budget.packets();
    let t = budget.period();
    let rates = design_rates(array.len(), k, t)?;
    let x: Vec<f64> = rates.iter().map(|r| r * t / 2.0).collect();

    let mut report = Report::new(&ctx.raw, ctx.seed);
    report.comment(&format!(
        "design for L = {} antennas, K = {k} packets, T = {t} s",
        array.len()
    ));
    report.comment(&format!(
        "all pair differences in X*: {}",
        pairwise_in_x_star(&x, k, MEMBERSHIP_TOL)
    ));
    if array.len() > 1 && !ctx.cfg.sweep.period_multiples.is_empty() {
        let flags = multi_period_check(rates[1], k, t, &ctx.cfg.sweep.period_multiples);
        let kept: Vec<String> = flags
            .iter()
            .filter(|f| f.1)
            .map(|f| f.0.to_string())
            .collect();
        report.comment(&format!(
            "alpha_1 stays optimal for period multiples: [{}]",
            kept.join(", ")
        ));
    }
    report.line("l,rate_rad_per_s,half_rate_angle_rad,x_star_member");
    for (l, (rate, xl)) in rates.iter().zip(&x).enumerate() {
        report.line(&format!(
            "{l},{rate},{xl},{}",
            x_star_membership(*xl, k, MEMBERSHIP_TOL)
        ));
    }
    report.write(ctx.out.as_deref())
}

/// `sweep-aoa`: SNR sums and burst error probabilities per combining scheme
/// over the azimuth grid.
pub fn sweep_aoa(ctx: &Ctx) -> Result<(), CliError> {
    let array = ctx.cfg.array(&ctx.dir)?;
    let budget = ctx.cfg.budget()?;
    let pep = ctx.cfg.pep();
    let schedule = ctx.cfg.schedule(array.len(), &budget)?;
    let n = ctx.grid.unwrap_or(ctx.cfg.sweep.phi_points);
    if n == 0 {
        return Err(CliError::Usage(
            "the azimuth grid needs at least one point".into(),
        ));
    }
    let l = array.len();
    let k = budget.packets();
    let schemes = [
        CombiningScheme::Isotropic,
        CombiningScheme::MaximalRatio,
        CombiningScheme::EqualGain,
        CombiningScheme::Selection,
        CombiningScheme::Acn,
    ];

    let rows: Result<Vec<String>, CliError> = (0..n)
        .into_par_iter()
        .map(|i| {
            let phi = i as f64 * TAU / n as f64;
            let mut rhos = Vec::with_capacity(l + schemes.len());
            for index in 0..l {
                rhos.push(rho(CombiningScheme::Single(index), &array, &budget, phi)?);
            }
            for scheme in schemes {
                rhos.push(rho(scheme, &array, &budget, phi)?);
            }
            let mut row = format!("{}", i as f64 * 360.0 / n as f64);
            for value in &rhos {
                row.push(',');
                row.push_str(&value.to_string());
            }
            for (j, value) in rhos.iter().enumerate() {
                let bep = if j + 1 == rhos.len() {
                    burst_error_prob(&array, &schedule, &budget, &pep, phi, OmegaMode::Zero)?
                } else {
                    flat_burst_bep(&pep, *value, k)?
                };
                row.push(',');
                row.push_str(&bep.to_string());
            }
            Ok(row)
        })
        .collect();

    let mut header = String::from("phi_deg");
    for index in 0..l {
        header.push_str(&format!(",rho_single_{index}"));
    }
    header.push_str(",rho_iso,rho_mrc,rho_egc,rho_sc,rho_acn");
    for index in 0..l {
        header.push_str(&format!(",bep_single_{index}"));
    }
    header.push_str(",bep_iso,bep_mrc,bep_egc,bep_sc,bep_acn");

    let mut report = Report::new(&ctx.raw, ctx.seed);
    report.line(&header);
    for row in rows? {
        report.line(&row);
    }
    report.write(ctx.out.as_deref())
}

/// `sweep-alpha`: worst-offset burst error as a function of the rate-period
/// product, at the configured or worst-case azimuth.
pub fn sweep_alpha(ctx: &Ctx) -> Result<(), CliError> {
    let array = ctx.cfg.array(&ctx.dir)?;
    let budget = ctx.cfg.budget()?;
    let pep = ctx.cfg.pep();
    let phi = resolve_phi(ctx, &array, ctx.cfg.sweep.phi_points)?;
    let points = ctx.grid.unwrap_or(ctx.cfg.sweep.alpha_t_points);
    let range = (
        deg(ctx.cfg.sweep.alpha_t_min_deg),
        deg(ctx.cfg.sweep.alpha_t_max_deg),
    );
    let rows = mismatch_sweep(&array, &budget, &pep, phi, range, points)?;

    let mut report = Report::new(&ctx.raw, ctx.seed);
    report.comment(&format!("phi_deg: {}", to_deg(phi)));
    report.line("alpha_t_rad,bep_worst");
    for (alpha_t, bep) in rows {
        report.line(&format!("{alpha_t},{bep}"));
    }
    report.write(ctx.out.as_deref())
}

/// `compare`: one row per combining scheme at a single azimuth.
pub fn compare(ctx: &Ctx) -> Result<(), CliError> {
    let array = ctx.cfg.array(&ctx.dir)?;
    let budget = ctx.cfg.budget()?;
    let pep = ctx.cfg.pep();
    let schedule = ctx.cfg.schedule(array.len(), &budget)?;
    let phi = resolve_phi(ctx, &array, ctx.grid.unwrap_or(ctx.cfg.sweep.phi_points))?;
    let k = budget.packets();

    let mut report = Report::new(&ctx.raw, ctx.seed);
    report.comment(&format!("phi_deg: {}", to_deg(phi)));
    report.line("scheme,rho,bep");
    for index in 0..array.len() {
        let value = rho(CombiningScheme::Single(index), &array, &budget, phi)?;
        let bep = flat_burst_bep(&pep, value, k)?;
        report.line(&format!("single_{index},{value},{bep}"));
    }
    for (name, scheme) in [
        ("iso", CombiningScheme::Isotropic),
        ("mrc", CombiningScheme::MaximalRatio),
        ("egc", CombiningScheme::EqualGain),
        ("sc", CombiningScheme::Selection),
    ] {
        let value = rho(scheme, &array, &budget, phi)?;
        let bep = flat_burst_bep(&pep, value, k)?;
        report.line(&format!("{name},{value},{bep}"));
    }
    let value = rho(CombiningScheme::Acn, &array, &budget, phi)?;
    let bep = burst_error_prob(&array, &schedule, &budget, &pep, phi, OmegaMode::Zero)?;
    report.line(&format!("acn,{value},{bep}"));
    report.write(ctx.out.as_deref())
}

#[derive(Serialize)]
struct BurstRecord {
    check: &'static str,
    trials: u64,
    analytic: f64,
    bursts: u64,
    empirical: f64,
    ci99_lo: f64,
    ci99_hi: f64,
    within_binomial_ci: bool,
}

#[derive(Serialize)]
struct Scenario2Record {
    check: &'static str,
    samples: usize,
    paths: usize,
    sample_mean: f64,
    analytic_mean: f64,
    mean_rel_err: f64,
    ks_statistic: f64,
    ks_critical_1pct: f64,
    within_tolerance: bool,
}

/// `montecarlo`: JSON-lines validation records; exits with the validation
/// code when a record falls outside its tolerance.
pub fn montecarlo(ctx: &Ctx) -> Result<(), CliError> {
    let array = ctx.cfg.array(&ctx.dir)?;
    let budget = ctx.cfg.budget()?;
    let pep = ctx.cfg.pep();
    let schedule = ctx.cfg.schedule(array.len(), &budget)?;
    let phi = resolve_phi(ctx, &array, ctx.grid.unwrap_or(ctx.cfg.sweep.phi_points))?;
    let mc = &ctx.cfg.montecarlo;

    let analytic = burst_error_prob(&array, &schedule, &budget, &pep, phi, OmegaMode::Geometric)?;
    let burst_cfg = BurstTrialConfig {
        trials: mc.trials,
        seed: ctx.seed,
        phi,
        schedule: schedule.clone(),
        budget,
        pep,
        omega_mode: OmegaMode::Geometric,
    };
    let sim = simulate_bursts(&array, &burst_cfg)?;
    let burst_record = BurstRecord {
        check: "burst",
        trials: sim.trials,
        analytic,
        bursts: sim.bursts,
        empirical: sim.rate,
        ci99_lo: sim.ci99.0,
        ci99_hi: sim.ci99.1,
        within_binomial_ci: binomial_ci99_contains(sim.trials, analytic, sim.bursts),
    };

    // The scattering reference uses equal branch powers taken from the
    // budget, so its analytic mean is the per-branch SNR.
    let s2_cfg = Scenario2Config {
        paths: mc.paths,
        branch_powers: vec![budget.received_power(); array.len()],
        samples: mc.scenario2_samples,
        seed: ctx.seed.wrapping_add(1),
    };
    let s2 = simulate_scenario2(&array, &schedule, &budget, &s2_cfg)?;
    let mean_rel_err = (s2.sample_mean - s2.analytic_mean).abs() / s2.analytic_mean;
    let ks_critical_1pct = ks_critical_value(mc.scenario2_samples, 0.01);
    let s2_record = Scenario2Record {
        check: "scenario2",
        samples: mc.scenario2_samples,
        paths: mc.paths,
        sample_mean: s2.sample_mean,
        analytic_mean: s2.analytic_mean,
        mean_rel_err,
        ks_statistic: s2.ks_statistic,
        ks_critical_1pct,
        within_tolerance: mean_rel_err <= 0.02 && s2.ks_statistic < ks_critical_1pct,
    };

    let mut report = Report::new(&ctx.raw, ctx.seed);
    report.line(&serde_json::to_string(&burst_record).expect("record serializes"));
    report.line(&serde_json::to_string(&s2_record).expect("record serializes"));
    report.write(ctx.out.as_deref())?;

    let mut failures = Vec::new();
    if !burst_record.within_binomial_ci {
        failures.push("burst rate outside the 99% binomial interval");
    }
    if !s2_record.within_tolerance {
        failures.push("scattering SNR off the exponential reference");
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failures.join("; ")))
    }
}

/// `verify-theory`: PASS/FAIL report over the analytic property suite.
pub fn verify_theory(ctx: &Ctx) -> Result<(), CliError> {
    let array = ctx.cfg.array(&ctx.dir)?;
    let budget = ctx.cfg.budget()?;
    let schedule = ctx.cfg.schedule(array.len(), &budget)?;
    let k = budget.packets();
    let t = budget.period();
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut checks: Vec<(&str, bool, String)> = Vec::new();

    let mut max_abs = 0.0f64;
    for q in 1..=4 * k {
        if q % k == 0 {
            continue;
        }
        let x = q as f64 * PI / k as f64;
        for _ in 0..100 {
            max_abs = max_abs.max(f_kernel(x, rng.random::<f64>() * TAU, k).abs());
        }
    }
    checks.push((
        "kernel-zeros",
        max_abs <= 1e-10,
        format!("max |f| = {max_abs:.2e} on the K = {k} design set"),
    ));

    let mut max_dev = 0.0f64;
    for _ in 0..1000 {
        let x = -TAU + 3.0 * TAU * rng.random::<f64>();
        let y = rng.random::<f64>() * TAU;
        let kk = rng.random_range(1..=12u32);
        let direct: f64 = (0..kk).map(|i| (y - 2.0 * i as f64 * x).cos()).sum();
        max_dev = max_dev.max((f_kernel(x, y, kk) - direct).abs());
    }
    checks.push((
        "kernel-closed-form",
        max_dev <= 1e-10,
        format!("max deviation = {max_dev:.2e} over 1000 triples"),
    ));

    let x: Vec<f64> = schedule.rates().iter().map(|r| r * t / 2.0).collect();
    let pairs = x.len() * x.len().saturating_sub(1) / 2;
    checks.push((
        "schedule-pairwise-membership",
        pairwise_in_x_star(&x, k, MEMBERSHIP_TOL),
        format!("{pairs} pair differences against X* for K = {k}"),
    ));

    let mut worst_spread = 0.0f64;
    for _ in 0..8 {
        let phi = rng.random::<f64>() * TAU;
        let mut values = Vec::with_capacity(16);
        for _ in 0..16 {
            let mut offsets = vec![0.0];
            offsets.extend((1..array.len()).map(|_| rng.random::<f64>() * TAU));
            let shifted = schedule.with_offsets(offsets)?;
            values.push(burst_snr_sum(&array, &shifted, &budget, phi, OmegaMode::Zero)?);
        }
        let max = values.iter().cloned().fold(f64::MIN, f64::max);
        let min = values.iter().cloned().fold(f64::MAX, f64::min);
        worst_spread = worst_spread.max((max - min) / max.abs().max(1e-300));
    }
    checks.push((
        "offset-invariance",
        worst_spread <= 1e-9,
        format!("max relative SNR-sum spread = {worst_spread:.2e} over 8 azimuths x 16 offsets"),
    ));

    let mut max_rel = 0.0f64;
    for _ in 0..16 {
        let phi = rng.random::<f64>() * TAU;
        let base = optimal_burst_objective(&array, phi, k);
        let (_, worst) = worst_mismatch_objective(&array, phi, &x, k)?;
        max_rel = max_rel.max((worst - base).abs() / base.max(1e-9));
    }
    checks.push((
        "bound-attainment",
        max_rel <= 1e-9,
        format!("max relative gap to K sum|g|^2 = {max_rel:.2e} over 16 azimuths"),
    ));

    match design_rates(array.len(), k, t) {
        Ok(rates) => {
            let xd: Vec<f64> = rates.iter().map(|r| r * t / 2.0).collect();
            checks.push((
                "feasibility-construction",
                pairwise_in_x_star(&xd, k, MEMBERSHIP_TOL),
                format!("designed rates for L = {} are pairwise optimal", array.len()),
            ));
        }
        Err(AcnError::Infeasible(_)) if array.len() > k as usize => checks.push((
            "feasibility-construction",
            true,
            format!("L = {} > K = {k} rejected as infeasible, as the converse requires", array.len()),
        )),
        Err(e) => checks.push(("feasibility-construction", false, e.to_string())),
    }

    let kc = k.min(4);
    checks.push((
        "converse-search",
        !converse_has_solution(kc),
        format!(
            "no all-pairs-X* vector for L = {} at K = {kc} (grid step pi/{})",
            kc + 1,
            4 * kc
        ),
    ));

    let mut worst_cert = f64::MIN;
    for _ in 0..100 {
        let w = rng.random_range(1..=6usize);
        let pairs: Vec<(usize, usize)> = (0..w).map(|i| (0, i + 1)).collect();
        let weights: Vec<f64> = (0..w).map(|_| rng.random::<f64>() * 3.0).collect();
        let x_diffs: Vec<f64> = (0..w).map(|_| rng.random::<f64>() * TAU).collect();
        let ct = CrossTerms::from_parts(w + 1, pairs, weights, x_diffs, k.max(2))?;
        let y = ct.adversarial_pair_targets();
        worst_cert = worst_cert.max(ct.eval_pairwise(&y) / ct.amp_abs_sum().max(1e-300));
    }
    checks.push((
        "construction-nonpositivity",
        worst_cert <= 1e-12,
        format!("max normalized certificate value = {worst_cert:.2e} over 100 draws"),
    ));

    let mut report = Report::new(&ctx.raw, ctx.seed);
    for (name, ok, detail) in &checks {
        let verdict = if *ok { "PASS" } else { "FAIL" };
        report.line(&format!("verify {name}: {verdict} [{detail}]"));
    }
    report.write(ctx.out.as_deref())?;

    let failures: Vec<&str> = checks
        .iter()
        .filter(|(_, ok, _)| !ok)
        .map(|(name, _, _)| *name)
        .collect();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{} theory checks failed: {}",
            failures.len(),
            failures.join(", ")
        )))
    }
}

/// Scans `[0, pi)^(L-1)` with `L = k + 1` on a step of `pi/(4k)` for a rate
/// vector whose pair differences all lie in `X*`.
fn converse_has_solution(k: u32) -> bool {
    let dims = k as usize;
    let n = 4 * k as usize;
    let step = PI / n as f64;
    let mut index = vec![0usize; dims];
    loop {
        let mut x_full = vec![0.0];
        x_full.extend(index.iter().map(|&i| i as f64 * step));
        if pairwise_in_x_star(&x_full, k, 1e-6) {
            return true;
        }
        let mut d = dims;
        loop {
            if d == 0 {
                break;
            }
            d -= 1;
            index[d] += 1;
            if index[d] < n {
                break;
            }
            index[d] = 0;
        }
        if index.iter().all(|&i| i == 0) {
            return false;
        }
    }
}
