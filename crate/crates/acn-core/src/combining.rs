//! Effective far field of the combined branches and per-packet average SNR,
//! plus closed-form burst SNR sums for the classic combining schemes.
//!
//! The combiner runs each branch `l` through an analog phase shifter
//! `phi_l(t) = alpha_l * t + beta_l` and adds the results, so the receiver
//! sees the single effective pattern
//!
//! `g(phi, t) = sum_l g_l(phi) * exp(-j * (Omega_l(phi) - alpha_l * t - beta_l))`
//!
//! where `Omega_l` is the plane-wave phase of element `l`. Element 0 is the
//! reference: its rate and offset are pinned to zero. Packet `k` of a burst
//! is sent at `t = k * T` and the channel is static within a packet, so the
//! per-packet average SNR follows directly from `|g(phi, k * T)|^2`.

use num_complex::Complex64;

use crate::error::AcnError;
use crate::patterns::AntennaArray;
use crate::Result;

/// How plane-wave phases `Omega_l` enter the effective far field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OmegaMode {
    /// Geometric phases from the element positions; the Monte Carlo
    /// validation default.
    Geometric,
    /// All plane-wave phases zero. This is the design-space view: a fixed
    /// `Omega_l` is indistinguishable from a shifted `beta_l`, so design
    /// sweeps use the zero mode and let the offsets absorb geometry.
    #[default]
    Zero,
}

/// Per-branch phase-shifter schedule: rotation rates `alpha_l` (rad/s) and
/// offsets `beta_l` (rad), with the reference element pinned to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSchedule {
    rates: Vec<f64>,
    offsets: Vec<f64>,
}

impl PhaseSchedule {
    /// Builds a schedule. `rates` and `offsets` must have the same nonzero
    /// length, be finite, and start with the zero reference entry.
    pub fn new(rates: Vec<f64>, offsets: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(AcnError::Config("schedule needs at least one branch".into()));
        }
        if rates.len() != offsets.len() {
            return Err(AcnError::Config(format!(
                "{} rates but {} offsets",
                rates.len(),
                offsets.len()
            )));
        }
        if rates[0] != 0.0 || offsets[0] != 0.0 {
            return Err(AcnError::Config(
                "reference element must have zero rate and offset".into(),
            ));
        }
        if rates.iter().chain(offsets.iter()).any(|v| !v.is_finite()) {
            return Err(AcnError::Config("non-finite schedule entry".into()));
        }
        Ok(Self { rates, offsets })
    }

    /// Builds a schedule with the given rates and all offsets zero.
    pub fn from_rates(rates: Vec<f64>) -> Result<Self> {
        let offsets = vec![0.0; rates.len()];
        Self::new(rates, offsets)
    }

    /// Returns a copy of this schedule with different offsets.
    pub fn with_offsets(&self, offsets: Vec<f64>) -> Result<Self> {
        Self::new(self.rates.clone(), offsets)
    }

    /// Number of branches `L`.
    pub fn len(&self) -> usize {
        self.rates.len()
    }

    /// Always false: construction requires at least one branch.
    pub fn is_empty(&self) -> bool {
        self.rates.is_empty()
    }

    /// Rotation rates in rad/s, `rates()[0] == 0`.
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// Phase offsets in rad, `offsets()[0] == 0`.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// Instantaneous shifter phase `alpha_l * t + beta_l`.
    pub fn phase(&self, l: usize, t: f64) -> f64 {
        self.rates[l] * t + self.offsets[l]
    }
}

/// Link budget of a periodic-message burst: received signal power per
/// branch, noise power per branch, packets per burst `K`, and the packet
/// period `T` in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    received_power: f64,
    noise_power: f64,
    packets: u32,
    period: f64,
}

impl LinkBudget {
    /// Builds a budget; powers must be positive and finite, `packets >= 1`,
    /// `period > 0`.
    pub fn new(received_power: f64, noise_power: f64, packets: u32, period: f64) -> Result<Self> {
        if !(received_power > 0.0 && received_power.is_finite()) {
            return Err(AcnError::Config(format!(
                "received power {received_power} must be positive"
            )));
        }
        if !(noise_power > 0.0 && noise_power.is_finite()) {
            return Err(AcnError::Config(format!(
                "noise power {noise_power} must be positive"
            )));
        }
        if packets == 0 {
            return Err(AcnError::Config("burst needs at least one packet".into()));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(AcnError::Config(format!("period {period} must be positive")));
        }
        Ok(Self {
            received_power,
            noise_power,
            packets,
            period,
        })
    }

    /// Budget with unit noise power and the received power set from an SNR
    /// in dB.
    pub fn from_snr_db(snr_db: f64, packets: u32, period: f64) -> Result<Self> {
        Self::new(10f64.powf(snr_db / 10.0), 1.0, packets, period)
    }

    /// Received signal power per branch (linear).
    pub fn received_power(&self) -> f64 {
        self.received_power
    }

    /// Noise power per branch (linear).
    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    /// Packets per burst `K`.
    pub fn packets(&self) -> u32 {
        self.packets
    }

    /// Packet period `T` in seconds.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Per-branch SNR `P_r / P_n`.
    pub fn snr(&self) -> f64 {
        self.received_power / self.noise_power
    }
}

/// Classic combining schemes compared against the phase-shifter combiner.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombiningScheme {
    /// Antenna `l` alone.
    Single(usize),
    /// A hypothetical isotropic reference antenna.
    Isotropic,
    /// Maximal-ratio combining (per-packet channel knowledge).
    MaximalRatio,
    /// Equal-gain combining (per-packet phase knowledge).
    EqualGain,
    /// Selection combining (per-packet branch choice).
    Selection,
    /// The analog phase-shifter combiner with an optimal rate schedule.
    Acn,
}

/// Effective far field `sum_l g_l(phi) * exp(-j (Omega_l - alpha_l t - beta_l))`
/// of the combined array at time `t`.
///
/// Errors if the schedule length does not match the array.
pub fn effective_farfield(
    array: &AntennaArray,
    schedule: &PhaseSchedule,
    phi: f64,
    t: f64,
    mode: OmegaMode,
) -> Result<Complex64> {
    if schedule.len() != array.len() {
        return Err(AcnError::Config(format!(
            "schedule has {} branches but array has {} elements",
            schedule.len(),
            array.len()
        )));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    for l in 0..array.len() {
        let omega = match mode {
            OmegaMode::Geometric => array.plane_wave_phase(l, phi),
            OmegaMode::Zero => 0.0,
        };
        let gain = array.element(l).evaluate(phi);
        sum += gain * Complex64::cis(-(omega - schedule.phase(l, t)));
    }
    Ok(sum)
}

/// Average SNR of packet `k` (sent at `t = k * T`):
///
/// `gamma_k = P_r / (L * P_n) * |g(phi, k * T)|^2`
///
/// The `1/L` accounts for the combiner splitting one receiver chain across
/// `L` branches' noise.
pub fn packet_avg_snr(
    array: &AntennaArray,
    schedule: &PhaseSchedule,
    budget: &LinkBudget,
    phi: f64,
    k: u32,
    mode: OmegaMode,
) -> Result<f64> {
    let g = effective_farfield(array, schedule, phi, k as f64 * budget.period(), mode)?;
    let l = array.len() as f64;
    Ok(budget.received_power() / (l * budget.noise_power()) * g.norm_sqr())
}

/// Sum of the per-packet average SNRs over one burst,
/// `sum_{k=0}^{K-1} gamma_k`.
///
/// Under an optimal rate schedule this sum is invariant to the offsets and
/// the plane-wave phases; see [`crate::design::design_rates`].
pub fn burst_snr_sum(
    array: &AntennaArray,
    schedule: &PhaseSchedule,
    budget: &LinkBudget,
    phi: f64,
    mode: OmegaMode,
) -> Result<f64> {
    let mut sum = 0.0;
    for k in 0..budget.packets() {
        sum += packet_avg_snr(array, schedule, budget, phi, k, mode)?;
    }
    Ok(sum)
}

/// Burst SNR sum `rho = sum_k gamma_k` of a combining scheme at azimuth
/// `phi`, in closed form:
///
/// - single antenna `l`: `(K P_r / P_n) |g_l|^2`
/// - isotropic reference: `K P_r / P_n`
/// - MRC: `(K P_r / P_n) sum_l |g_l|^2`
/// - EGC: `(K P_r / (L P_n)) (sum_l |g_l|)^2`
/// - SC: `(K P_r / P_n) max_l |g_l|^2`
/// - ACN: `(K P_r / (L P_n)) sum_l |g_l|^2`
///
/// The ACN value assumes an optimal rate schedule, which makes the sum
/// independent of the offsets; `rho(MRC) = L * rho(ACN)` exactly by
/// construction. Errors if a `Single` index is out of range.
pub fn rho(
    scheme: CombiningScheme,
    array: &AntennaArray,
    budget: &LinkBudget,
    phi: f64,
) -> Result<f64> {
    let gains = array.gains(phi);
    let l = array.len() as f64;
    let base = budget.packets() as f64 * budget.received_power() / budget.noise_power();
    let sum_sq: f64 = gains.iter().map(|g| g.norm_sqr()).sum();
    let acn = base * sum_sq / l;
    let value = match scheme {
        CombiningScheme::Single(index) => {
            let gain = gains.get(index).ok_or(AcnError::IndexOutOfRange {
                index,
                len: array.len(),
            })?;
            base * gain.norm_sqr()
        }
        CombiningScheme::Isotropic => base,
        CombiningScheme::MaximalRatio => l * acn,
        CombiningScheme::EqualGain => {
            let sum_abs: f64 = gains.iter().map(|g| g.norm()).sum();
            base * sum_abs * sum_abs / l
        }
        CombiningScheme::Selection => {
            let max_sq = gains.iter().map(|g| g.norm_sqr()).fold(0.0, f64::max);
            base * max_sq
        }
        CombiningScheme::Acn => acn,
    };
    Ok(value)
}
