//! Monte Carlo validation of the burst error analysis and the
//! rich-scattering (Rayleigh) reference scenario.
//!
//! Every trial and every scattering sample owns a dedicated counter-mode RNG
//! substream (`seed_from_u64(seed)` plus `set_stream(index)`), so results are
//! bit-identical regardless of how the work is split across threads.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::TAU;

use crate::combining::{packet_avg_snr, LinkBudget, OmegaMode, PhaseSchedule};
use crate::error::AcnError;
use crate::patterns::AntennaArray;
use crate::pep::PepModel;
use crate::Result;

/// Normal quantile at 0.995, the half-width factor of a two-sided 99%
/// confidence interval.
const Z99: f64 = 2.575_829_303_548_901;

/// Configuration of a burst-error Monte Carlo run.
#[derive(Debug, Clone)]
pub struct BurstTrialConfig {
    /// Number of independent bursts to draw (at least 1000).
    pub trials: u64,
    /// Base RNG seed; trial `i` uses substream `i` of this seed.
    pub seed: u64,
    /// Arrival angle of the plane wave.
    pub phi: f64,
    /// Phase-shifter schedule under test.
    pub schedule: PhaseSchedule,
    /// Link budget of the burst.
    pub budget: LinkBudget,
    /// Packet error probability model.
    pub pep: PepModel,
    /// Plane-wave phase handling; validation runs use the geometric mode.
    pub omega_mode: OmegaMode,
}

/// Result of a burst-error Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct BurstSim {
    /// Trials drawn.
    pub trials: u64,
    /// Trials in which every packet of the burst failed.
    pub bursts: u64,
    /// Empirical burst error rate.
    pub rate: f64,
    /// Wilson 99% confidence interval for the burst error probability.
    pub ci99: (f64, f64),
}

/// Wilson score interval at 99% confidence.
fn wilson_ci99(successes: u64, n: u64) -> (f64, f64) {
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = Z99 * Z99;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z99 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Draws `trials` independent bursts: packet `k` fails with the analytic
/// per-packet error probability at its scheduled SNR, and a burst is lost
/// when all `K` packets fail. Returns counts, the empirical rate, and its
/// Wilson 99% interval.
pub fn simulate_bursts(array: &AntennaArray, cfg: &BurstTrialConfig) -> Result<BurstSim> {
    if cfg.trials < 1000 {
        return Err(AcnError::Config(format!(
            "{} trials is below the 1000-trial minimum",
            cfg.trials
        )));
    }
    cfg.pep.validate()?;
    let k = cfg.budget.packets();
    let mut packet_error = Vec::with_capacity(k as usize);
    for kk in 0..k {
        let snr = packet_avg_snr(array, &cfg.schedule, &cfg.budget, cfg.phi, kk, cfg.omega_mode)?;
        packet_error.push(cfg.pep.evaluate(snr)?);
    }
    let bursts: u64 = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(trial);
            for &p in &packet_error {
                let u: f64 = rng.random();
                if u >= p {
                    return 0u64;
                }
            }
            1u64
        })
        .sum();
    let rate = bursts as f64 / cfg.trials as f64;
    Ok(BurstSim {
        trials: cfg.trials,
        bursts,
        rate,
        ci99: wilson_ci99(bursts, cfg.trials),
    })
}

/// True when `count` successes out of `trials` fall inside the central 99%
/// acceptance region of a Binomial(`trials`, `p`) draw, using the normal
/// approximation with a continuity correction (degenerate `p` handled
/// exactly).
pub fn binomial_ci99_contains(trials: u64, p: f64, count: u64) -> bool {
    if p <= 0.0 {
        return count == 0;
    }
    if p >= 1.0 {
        return count == trials;
    }
    let n = trials as f64;
    let mean = n * p;
    let sd = (n * p * (1.0 - p)).sqrt();
    let lo = mean - Z99 * sd - 0.5;
    let hi = mean + Z99 * sd + 0.5;
    let c = count as f64;
    c >= lo && c <= hi
}

/// Configuration of the rich-scattering reference scenario.
#[derive(Debug, Clone)]
pub struct Scenario2Config {
    /// Scatterer paths per branch (at least 8; the Rayleigh limit improves
    /// with more).
    pub paths: usize,
    /// Received power per branch (length `L`, positive).
    pub branch_powers: Vec<f64>,
    /// Samples of the combined SNR to draw (at least 10000).
    pub samples: usize,
    /// Base RNG seed; sample `i` uses substream `i`.
    pub seed: u64,
}

/// Result of a rich-scattering simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario2Sim {
    /// The drawn combined-SNR samples.
    pub samples: Vec<f64>,
    /// Their sample mean.
    pub sample_mean: f64,
    /// The analytic mean `sum_l P_r,l / (L P_n)`.
    pub analytic_mean: f64,
    /// Kolmogorov-Smirnov distance to the exponential law with the analytic
    /// mean.
    pub ks_statistic: f64,
}

/// Simulates the combined per-packet SNR under rich scattering: each branch
/// sees its own independent ensemble of `paths` scatterers with uniform
/// arrival angles and complex Gaussian amplitudes, weighted by the branch
/// pattern and its geometric plane-wave phase, then scaled so the branch
/// power equals `branch_powers[l]` on average. Samples cycle through the
/// burst's packet slots so the schedule's rotation is exercised (it cannot
/// change the SNR law: a unit phasor does not alter a circularly symmetric
/// sum).
///
/// Branch ensembles are drawn independently, which models branches far
/// enough apart (or scattering rich enough) that their fading decorrelates;
/// this is the regime in which the combined SNR is exactly exponential.
pub fn simulate_scenario2(
    array: &AntennaArray,
    schedule: &PhaseSchedule,
    budget: &LinkBudget,
    cfg: &Scenario2Config,
) -> Result<Scenario2Sim> {
    if cfg.paths < 8 {
        return Err(AcnError::Config(format!(
            "{} scatterer paths is below the 8-path minimum",
            cfg.paths
        )));
    }
    if cfg.samples < 10_000 {
        return Err(AcnError::Config(format!(
            "{} samples is below the 10000-sample minimum",
            cfg.samples
        )));
    }
    if cfg.branch_powers.len() != array.len() {
        return Err(AcnError::Config(format!(
            "{} branch powers for {} elements",
            cfg.branch_powers.len(),
            array.len()
        )));
    }
    if cfg
        .branch_powers
        .iter()
        .any(|p| !(*p > 0.0 && p.is_finite()))
    {
        return Err(AcnError::Config("branch powers must be positive".into()));
    }
    if schedule.len() != array.len() {
        return Err(AcnError::Config(format!(
            "schedule has {} branches but array has {} elements",
            schedule.len(),
            array.len()
        )));
    }
    let l_count = array.len();
    let mut scales = Vec::with_capacity(l_count);
    for (l, power) in cfg.branch_powers.iter().enumerate() {
        let ms = array.element(l).mean_square_gain(4096);
        if !(ms > 0.0) {
            return Err(AcnError::Config(format!(
                "element {l} has zero mean-square gain; its branch carries no power"
            )));
        }
        scales.push((power / ms).sqrt());
    }
    let sigma = (1.0 / (2.0 * cfg.paths as f64)).sqrt();
    let k = budget.packets();
    let period = budget.period();
    let lf = l_count as f64;
    let noise = budget.noise_power();

    let snrs: Vec<f64> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(s);
            let t = (s % k as u64) as f64 * period;
            let mut h = Complex64::new(0.0, 0.0);
            for l in 0..l_count {
                let mut branch = Complex64::new(0.0, 0.0);
                for _ in 0..cfg.paths {
                    let phi: f64 = rng.random::<f64>() * TAU;
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    let gain = array.element(l).evaluate(phi);
                    let omega = array.plane_wave_phase(l, phi);
                    branch += Complex64::new(re * sigma, im * sigma) * gain * Complex64::cis(-omega);
                }
                h += scales[l] * branch * Complex64::cis(schedule.phase(l, t));
            }
            h.norm_sqr() / (lf * noise)
        })
        .collect();

    let sample_mean = snrs.iter().sum::<f64>() / cfg.samples as f64;
    let analytic_mean = cfg.branch_powers.iter().sum::<f64>() / (lf * noise);
    let ks_statistic = ks_statistic_exponential(&snrs, analytic_mean);
    Ok(Scenario2Sim {
        samples: snrs,
        sample_mean,
        analytic_mean,
        ks_statistic,
    })
}

/// Kolmogorov-Smirnov distance between the sample set and the exponential
/// law with the given mean. Panics on an empty sample set or nonpositive
/// mean; the caller owns those checks.
pub fn ks_statistic_exponential(samples: &[f64], mean: f64) -> f64 {
    assert!(!samples.is_empty(), "KS statistic of an empty sample set");
    assert!(mean > 0.0, "exponential mean must be positive");
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let f = 1.0 - (-x / mean).exp();
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

/// Critical value of the one-sample Kolmogorov-Smirnov statistic at level
/// `alpha`: the asymptotic `sqrt(-ln(alpha / 2) / 2)` divided by Stephens'
/// finite-sample correction `sqrt(n) + 0.12 + 0.11 / sqrt(n)`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    assert!(n > 0, "sample count must be positive");
    assert!(alpha > 0.0 && alpha < 1.0, "level must be in (0, 1)");
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let sn = (n as f64).sqrt();
    c / (sn + 0.12 + 0.11 / sn)
}

/// Recomputes every per-packet SNR of a burst through plain trigonometric
/// accumulation (no complex arithmetic) and returns the largest absolute
/// deviation from [`packet_avg_snr`]. A cross-check that the production path
/// and a from-scratch path agree.
pub fn validate_packet_snr(
    array: &AntennaArray,
    schedule: &PhaseSchedule,
    budget: &LinkBudget,
    phi: f64,
    mode: OmegaMode,
) -> Result<f64> {
    let mut max_dev: f64 = 0.0;
    let lf = array.len() as f64;
    for k in 0..budget.packets() {
        let expected = packet_avg_snr(array, schedule, budget, phi, k, mode)?;
        let t = k as f64 * budget.period();
        let mut re = 0.0;
        let mut im = 0.0;
        for l in 0..array.len() {
            let gain = array.element(l).evaluate(phi);
            let omega = match mode {
                OmegaMode::Geometric => array.plane_wave_phase(l, phi),
                OmegaMode::Zero => 0.0,
            };
            let angle = gain.arg() - omega + schedule.phase(l, t);
            re += gain.norm() * angle.cos();
            im += gain.norm() * angle.sin();
        }
        let raw = budget.received_power() / (lf * budget.noise_power()) * (re * re + im * im);
        max_dev = max_dev.max((raw - expected).abs());
    }
    Ok(max_dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::design_rates;
    use crate::patterns::FarFieldPattern;
    use std::f64::consts::PI;

    fn iso_array(n: usize, spacing: f64) -> AntennaArray {
        AntennaArray::new(
            vec![FarFieldPattern::Isotropic; n],
            (0..n).map(|i| (i as f64 * spacing, 0.0)).collect(),
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn cancelled_branches_always_burst() {
        let array = iso_array(2, 0.0);
        let budget = LinkBudget::new(1.0, 1.0, 3, 0.1).unwrap();
        let cfg = BurstTrialConfig {
            trials: 2000,
            seed: 7,
            phi: 0.0,
            schedule: PhaseSchedule::new(vec![0.0, 0.0], vec![0.0, PI]).unwrap(),
            budget,
            pep: PepModel::Exponential { a: 1.0, b: 1.0 },
            omega_mode: OmegaMode::Zero,
        };
        let sim = simulate_bursts(&array, &cfg).unwrap();
        assert_eq!(sim.bursts, 2000);
        assert_eq!(sim.rate, 1.0);
        assert!(sim.ci99.1 >= sim.rate && sim.ci99.0 <= sim.rate);
    }

    #[test]
    fn burst_rate_matches_analytic_product() {
        let array = iso_array(1, 0.0);
        // gamma = 1 per packet, P_e = e^{-1} about 0.368, burst = P_e^2.
        let budget = LinkBudget::new(1.0, 1.0, 2, 0.1).unwrap();
        let cfg = BurstTrialConfig {
            trials: 50_000,
            seed: 42,
            phi: 1.0,
            schedule: PhaseSchedule::from_rates(vec![0.0]).unwrap(),
            budget,
            pep: PepModel::Exponential { a: 1.0, b: 1.0 },
            omega_mode: OmegaMode::Geometric,
        };
        let sim = simulate_bursts(&array, &cfg).unwrap();
        let analytic = (-2.0f64).exp();
        assert!(
            binomial_ci99_contains(sim.trials, analytic, sim.bursts),
            "bursts = {} of {}, analytic {analytic}",
            sim.bursts,
            sim.trials
        );
        // Determinism: the same configuration reproduces the exact counts.
        let again = simulate_bursts(&array, &cfg).unwrap();
        assert_eq!(sim, again);
    }

    #[test]
    fn trials_below_minimum_are_rejected() {
        let array = iso_array(1, 0.0);
        let cfg = BurstTrialConfig {
            trials: 999,
            seed: 0,
            phi: 0.0,
            schedule: PhaseSchedule::from_rates(vec![0.0]).unwrap(),
            budget: LinkBudget::new(1.0, 1.0, 2, 0.1).unwrap(),
            pep: PepModel::Exponential { a: 1.0, b: 1.0 },
            omega_mode: OmegaMode::Zero,
        };
        assert!(simulate_bursts(&array, &cfg).is_err());
    }

    #[test]
    fn binomial_acceptance_region_edges() {
        assert!(binomial_ci99_contains(1000, 0.0, 0));
        assert!(!binomial_ci99_contains(1000, 0.0, 1));
        assert!(binomial_ci99_contains(1000, 1.0, 1000));
        assert!(!binomial_ci99_contains(1000, 1.0, 999));
        assert!(binomial_ci99_contains(10_000, 0.5, 5000));
        assert!(binomial_ci99_contains(10_000, 0.5, 5120));
        assert!(!binomial_ci99_contains(10_000, 0.5, 5600));
    }

    #[test]
    fn ks_statistic_of_exponential_quantiles_is_tiny() {
        let n = 10_000;
        let mean = 2.5;
        let samples: Vec<f64> = (0..n)
            .map(|i| -mean * (1.0 - (i as f64 + 0.5) / n as f64).ln())
            .collect();
        let d = ks_statistic_exponential(&samples, mean);
        assert!(d <= 0.5 / n as f64 + 1e-12, "D = {d}");
        // A wrong mean is flagged.
        let d_bad = ks_statistic_exponential(&samples, 2.0 * mean);
        assert!(d_bad > 0.1);
    }

    #[test]
    fn ks_critical_value_reference() {
        let c = ks_critical_value(1_000_000, 0.01);
        assert!((c - 1.627_62e-3).abs() < 5e-7, "c = {c}");
        assert!(ks_critical_value(100, 0.01) > c);
    }

    #[test]
    fn scenario2_isotropic_pair_is_rayleigh() {
        let array = iso_array(2, 1.0);
        let k = 5u32;
        let t = 0.1;
        let budget = LinkBudget::new(1.0, 0.5, k, t).unwrap();
        let schedule = PhaseSchedule::from_rates(design_rates(2, k, t).unwrap()).unwrap();
        let cfg = Scenario2Config {
            paths: 32,
            branch_powers: vec![1.0, 1.0],
            samples: 20_000,
            seed: 2024,
        };
        let sim = simulate_scenario2(&array, &schedule, &budget, &cfg).unwrap();
        assert_eq!(sim.samples.len(), 20_000);
        assert!((sim.analytic_mean - 2.0).abs() < 1e-12);
        assert!(
            (sim.sample_mean - sim.analytic_mean).abs() < 0.03 * sim.analytic_mean,
            "mean {} vs {}",
            sim.sample_mean,
            sim.analytic_mean
        );
        let crit = ks_critical_value(cfg.samples, 0.01);
        assert!(
            sim.ks_statistic < crit,
            "D = {} vs critical {crit}",
            sim.ks_statistic
        );
    }

    #[test]
    fn scenario2_validates_config() {
        let array = iso_array(2, 1.0);
        let budget = LinkBudget::new(1.0, 1.0, 5, 0.1).unwrap();
        let schedule = PhaseSchedule::from_rates(vec![0.0, 1.0]).unwrap();
        let base = Scenario2Config {
            paths: 32,
            branch_powers: vec![1.0, 1.0],
            samples: 20_000,
            seed: 1,
        };
        let bad_paths = Scenario2Config { paths: 4, ..base.clone() };
        assert!(simulate_scenario2(&array, &schedule, &budget, &bad_paths).is_err());
        let bad_samples = Scenario2Config { samples: 100, ..base.clone() };
        assert!(simulate_scenario2(&array, &schedule, &budget, &bad_samples).is_err());
        let bad_powers = Scenario2Config { branch_powers: vec![1.0], ..base.clone() };
        assert!(simulate_scenario2(&array, &schedule, &budget, &bad_powers).is_err());
        let neg_power = Scenario2Config { branch_powers: vec![1.0, -1.0], ..base };
        assert!(simulate_scenario2(&array, &schedule, &budget, &neg_power).is_err());
    }

    #[test]
    fn packet_snr_cross_check_agrees() {
        let array = AntennaArray::new(
            vec![
                FarFieldPattern::Isotropic,
                FarFieldPattern::cardioid(0.7, 0.4).unwrap(),
                FarFieldPattern::DipoleCosine { pointing: 1.9 },
            ],
            vec![(0.0, 0.0), (0.04, 0.0), (0.0, 0.06)],
            0.125,
        )
        .unwrap();
        let k = 7u32;
        let t = 0.05;
        let budget = LinkBudget::new(2.0, 0.5, k, t).unwrap();
        let schedule = PhaseSchedule::new(
            design_rates(3, k, t).unwrap(),
            vec![0.0, 0.9, 4.1],
        )
        .unwrap();
        for mode in [OmegaMode::Zero, OmegaMode::Geometric] {
            let dev = validate_packet_snr(&array, &schedule, &budget, 1.3, mode).unwrap();
            assert!(dev <= 1e-12, "deviation {dev}");
        }
    }
}
