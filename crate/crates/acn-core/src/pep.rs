//! Packet error probability (PEP) models and the burst error probability
//! of a periodic message.
//!
//! A burst of `K` packets is lost only if every packet fails, so with
//! per-packet error probability `P_e` the burst error probability is the
//! product `P_B = prod_k P_e(gamma_k)`. All models here are nonincreasing
//! in the average SNR, which is what lets rate design reduce worst-case
//! `P_B` questions to SNR-sum questions in the exponential case.

use crate::combining::LinkBudget;
use crate::error::AcnError;
use crate::patterns::AntennaArray;
use crate::util::golden_max;
use crate::Result;
use num_complex::Complex64;
use statrs::function::erf::erfc;
use std::f64::consts::TAU;

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Packet error probability as a function of the packet's average SNR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PepModel {
    /// `min(1, a * exp(-b * gamma))`: the analytically convenient family
    /// for which the worst-case burst design is exactly optimal.
    Exponential { a: f64, b: f64 },
    /// Uncoded QPSK over an AWGN channel, `bits` bits per packet:
    /// `1 - (1 - Q(sqrt(gamma)))^bits`.
    QpskAwgn { bits: u32 },
    /// Uncoded QPSK over flat Rayleigh fading with per-packet average SNR
    /// `gamma`: `1 - (1/2 + (1/2) sqrt(gamma / (2 + gamma)))^bits`.
    QpskRayleigh { bits: u32 },
}

impl PepModel {
    /// Checks the model parameters: `a > 0`, `b > 0`, `bits >= 1`.
    pub fn validate(&self) -> Result<()> {
        match *self {
            PepModel::Exponential { a, b } => {
                if !(a > 0.0 && a.is_finite() && b > 0.0 && b.is_finite()) {
                    return Err(AcnError::Config(format!(
                        "exponential PEP needs positive finite a, b (got a = {a}, b = {b})"
                    )));
                }
            }
            PepModel::QpskAwgn { bits } | PepModel::QpskRayleigh { bits } => {
                if bits == 0 {
                    return Err(AcnError::Config("packet must carry at least one bit".into()));
                }
            }
        }
        Ok(())
    }

    /// Packet error probability at average SNR `snr`. Errors on negative or
    /// non-finite SNR; the result is always in `[0, 1]`.
    pub fn evaluate(&self, snr: f64) -> Result<f64> {
        if !(snr >= 0.0 && snr.is_finite()) {
            return Err(AcnError::Domain(format!(
                "packet SNR must be finite and nonnegative, got {snr}"
            )));
        }
        let p = match *self {
            PepModel::Exponential { a, b } => (a * (-b * snr).exp()).min(1.0),
            PepModel::QpskAwgn { bits } => {
                let bit_ok = 1.0 - q_function(snr.sqrt());
                1.0 - bit_ok.powi(bits as i32)
            }
            PepModel::QpskRayleigh { bits } => {
                let bit_ok = 0.5 + 0.5 * (snr / (2.0 + snr)).sqrt();
                1.0 - bit_ok.powi(bits as i32)
            }
        };
        Ok(p)
    }
}

/// Burst error probability `P_B = prod_{k=0}^{K-1} P_e(gamma_k)` for a given
/// schedule and arrival angle.
pub fn burst_error_prob(
    array: &AntennaArray,
    schedule: &crate::combining::PhaseSchedule,
    budget: &LinkBudget,
    pep: &PepModel,
    phi: f64,
    mode: crate::combining::OmegaMode,
) -> Result<f64> {
    pep.validate()?;
    let mut prod = 1.0;
    for k in 0..budget.packets() {
        let snr = crate::combining::packet_avg_snr(array, schedule, budget, phi, k, mode)?;
        prod *= pep.evaluate(snr)?;
    }
    Ok(prod)
}

/// Burst error probability from cached branch gains with zero plane-wave
/// phases, for the offset vector `offsets` (full length `L`, `offsets[0]`
/// arbitrary but conventionally 0).
fn bep_from_gains(
    gains: &[Complex64],
    rates: &[f64],
    offsets: &[f64],
    budget: &LinkBudget,
    pep: &PepModel,
) -> f64 {
    let l = gains.len() as f64;
    let scale = budget.received_power() / (l * budget.noise_power());
    let mut prod = 1.0;
    for k in 0..budget.packets() {
        let t = k as f64 * budget.period();
        let mut sum = Complex64::new(0.0, 0.0);
        for ((gain, rate), offset) in gains.iter().zip(rates).zip(offsets) {
            sum += gain * Complex64::cis(rate * t + offset);
        }
        let snr = scale * sum.norm_sqr();
        // Gains and offsets are finite here, so evaluate cannot fail.
        prod *= pep.evaluate(snr).expect("finite SNR");
    }
    prod
}

const OFFSET_GRID: usize = 64;
const OFFSET_TOL: f64 = 1e-8;

/// Worst-case burst error probability over the phase offsets
/// `beta_1..beta_{L-1}` (the reference offset stays 0), for fixed rates and
/// arrival angle. Plane-wave phases are taken as zero: a fixed `Omega_l`
/// only shifts the worst offsets, not the worst value.
///
/// Returns the maximizing offsets (full length `L`) and the maximum. The
/// search is a 64-point-per-coordinate grid scan followed by cyclic
/// per-coordinate golden-section refinement to an offset tolerance of 1e-8;
/// grid ties keep the lexicographically smallest offsets. For more than four
/// branches the joint grid is replaced by deterministic multistart ascent.
pub fn worst_offset_bep(
    array: &AntennaArray,
    rates: &[f64],
    budget: &LinkBudget,
    pep: &PepModel,
    phi: f64,
) -> Result<(Vec<f64>, f64)> {
    if rates.len() != array.len() {
        return Err(AcnError::Config(format!(
            "{} rates for {} elements",
            rates.len(),
            array.len()
        )));
    }
    if rates.is_empty() || rates[0] != 0.0 {
        return Err(AcnError::Config(
            "rate vector must start with the zero reference rate".into(),
        ));
    }
    pep.validate()?;
    let gains = array.gains(phi);
    Ok(worst_offset_from_gains(&gains, rates, budget, pep))
}

/// Search core shared with the direct minimax-over-rates routine.
pub(crate) fn worst_offset_from_gains(
    gains: &[Complex64],
    rates: &[f64],
    budget: &LinkBudget,
    pep: &PepModel,
) -> (Vec<f64>, f64) {
    let l = gains.len();
    let dims = l - 1;
    let eval = |free: &[f64]| {
        let mut offsets = vec![0.0; l];
        offsets[1..].copy_from_slice(free);
        bep_from_gains(gains, rates, &offsets, budget, pep)
    };
    if dims == 0 {
        let value = eval(&[]);
        return (vec![0.0], value);
    }

    let step = TAU / OFFSET_GRID as f64;
    let mut best = vec![0.0; dims];
    let mut best_value = f64::NEG_INFINITY;
    if dims <= 3 {
        // Exhaustive joint grid, scanned in lexicographic order so ties keep
        // the smallest offsets.
        let mut index = vec![0usize; dims];
        let mut free = vec![0.0; dims];
        loop {
            for (f, &i) in free.iter_mut().zip(index.iter()) {
                *f = i as f64 * step;
            }
            let value = eval(&free);
            if value > best_value {
                best_value = value;
                best.copy_from_slice(&free);
            }
            let mut d = dims;
            loop {
                if d == 0 {
                    break;
                }
                d -= 1;
                index[d] += 1;
                if index[d] < OFFSET_GRID {
                    break;
                }
                index[d] = 0;
            }
            if index.iter().all(|&i| i == 0) {
                break;
            }
        }
    } else {
        // Deterministic low-discrepancy starts followed by coordinate ascent.
        let primes = [2.0f64, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0];
        for s in 0..16 {
            let mut free: Vec<f64> = (0..dims)
                .map(|d| {
                    let h = primes[d % primes.len()].sqrt();
                    (s as f64 * h).fract() * TAU
                })
                .collect();
            let mut value = eval(&free);
            for _ in 0..8 {
                let before = value;
                for d in 0..dims {
                    let center = free[d];
                    let (x, v) = golden_max(
                        |x| {
                            let mut probe = free.clone();
                            probe[d] = x;
                            eval(&probe)
                        },
                        center - TAU / 2.0,
                        center + TAU / 2.0,
                        OFFSET_TOL,
                    );
                    if v > value {
                        value = v;
                        free[d] = x;
                    }
                }
                if value - before <= 1e-15 * (1.0 + value.abs()) {
                    break;
                }
            }
            if value > best_value {
                best_value = value;
                best = free;
            }
        }
    }

    // Cyclic golden-section polish around the best grid point.
    for _ in 0..16 {
        let before = best_value;
        for d in 0..dims {
            let center = best[d];
            let (x, v) = golden_max(
                |x| {
                    let mut probe = best.clone();
                    probe[d] = x;
                    eval(&probe)
                },
                center - step,
                center + step,
                OFFSET_TOL,
            );
            if v > best_value {
                best_value = v;
                best[d] = x;
            }
        }
        if best_value - before <= 1e-15 * (1.0 + best_value.abs()) {
            break;
        }
    }

    let mut offsets = vec![0.0; l];
    for (o, b) in offsets[1..].iter_mut().zip(best.iter()) {
        *o = b.rem_euclid(TAU);
    }
    let value = {
        let mut full = vec![0.0; dims];
        full.copy_from_slice(&offsets[1..]);
        eval(&full)
    };
    (offsets, value)
}
