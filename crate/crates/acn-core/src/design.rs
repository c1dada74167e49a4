//! Rate-schedule design for the phase-shifter combiner.
//!
//! Over one burst of `K` packets the combiner's SNR sum at azimuth `phi`
//! takes the form
//!
//! `J(x, psi) = K sum_l |g_l|^2 + sum_{l<m} 2 |g_l| |g_m| f(x_m - x_l, psi_m - psi_l)`
//!
//! with half-rate angles `x_l = alpha_l T / 2`, per-branch total phases
//! `psi_l`, and the kernel `f(x, y) = sum_{k=0}^{K-1} cos(y - 2 k x)`. The
//! cross terms vanish for every `psi` exactly when all pair differences
//! `x_m - x_l` lie in the set `X* = { q pi / K } \ { q pi }`, which yields
//! the closed-form optimal schedule `alpha_l = l * 2 pi / (K T)` whenever
//! `L <= K`. This module provides the kernel, the design rule, the
//! worst-case (over offsets and arrival angle) objectives, and grid-search
//! fallbacks that make no structural assumptions.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::combining::LinkBudget;
use crate::error::AcnError;
use crate::patterns::AntennaArray;
use crate::pep::{worst_offset_from_gains, PepModel};
use crate::util::{golden_min, wrap_tau};
use crate::Result;

/// Burst kernel `f(x, y) = sum_{k=0}^{K-1} cos(y - 2 k x)`.
///
/// Evaluated in closed form as `[sin(K e) / sin(e)] * cos(y - (K - 1) e)`
/// where `e = x - round(x / pi) * pi`. The argument reduction keeps the
/// ratio well conditioned near multiples of `pi` (where the naive
/// `sin(Kx)/sin(x)` form loses all precision) and the `e == 0` branch is the
/// exact limit `K * cos(y)`. The kernel is `pi`-periodic in `x`, which is
/// what lets every search below restrict `x` to `[0, pi)`.
pub fn f_kernel(x: f64, y: f64, k: u32) -> f64 {
    let (ratio, lead) = kernel_ratio(x, k);
    ratio * (y - lead).cos()
}

/// Reduced Dirichlet ratio and phase lead: returns `(sin(K e)/sin(e), (K-1) e)`
/// with `e` the distance from `x` to the nearest multiple of `pi`.
fn kernel_ratio(x: f64, k: u32) -> (f64, f64) {
    let kf = k as f64;
    let eps = x - (x / PI).round() * PI;
    if eps == 0.0 {
        (kf, 0.0)
    } else {
        ((kf * eps).sin() / eps.sin(), (kf - 1.0) * eps)
    }
}

/// Distance from `x` to the nearest integer multiple of `unit`.
fn dist_to_multiple(x: f64, unit: f64) -> f64 {
    (x - (x / unit).round() * unit).abs()
}

/// True when `x` is (within `tol`) a multiple of `pi / K` but not of `pi`,
/// i.e. a member of the zero set `X*` of the kernel envelope.
pub fn x_star_membership(x: f64, k: u32, tol: f64) -> bool {
    if k == 0 {
        return false;
    }
    dist_to_multiple(x, PI / k as f64) <= tol && dist_to_multiple(x, PI) > tol
}

/// The `2 (K - 1)` representatives of `X*` in `(0, 2 pi)`:
/// `q pi / K` for `q = 1..2K-1`, `q` not a multiple of `K`.
pub fn x_star_set(k: u32) -> Vec<f64> {
    (1..2 * k)
        .filter(|q| q % k != 0)
        .map(|q| q as f64 * PI / k as f64)
        .collect()
}

/// Optimal rotation rates `alpha_l = l * 2 pi / (K T)` for `L` branches,
/// `K` packets per burst, and packet period `T`.
///
/// Every pair difference of the half-rate angles `alpha_l T / 2` then lands
/// in `X*`, so the burst SNR sum equals its offset-free optimum
/// `K sum_l |g_l|^2` regardless of offsets and plane-wave phases. Feasible
/// only for `L <= K`; more branches than packets is reported as infeasible.
pub fn design_rates(l: usize, k: u32, t: f64) -> Result<Vec<f64>> {
    if l == 0 {
        return Err(AcnError::Config("array needs at least one element".into()));
    }
    if k < 2 {
        return Err(AcnError::Config(
            "rate design needs at least two packets per burst".into(),
        ));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(AcnError::Config(format!("period {t} must be positive")));
    }
    if l > k as usize {
        return Err(AcnError::Infeasible(format!(
            "no rate schedule reaches the worst-case optimum for {l} antennas \
             and {k} packets per burst: pair differences of more than {k} \
             half-rate angles cannot all avoid the kernel's nonzero set"
        )));
    }
    let base = TAU / (k as f64 * t);
    Ok((0..l).map(|i| i as f64 * base).collect())
}

/// Checks which period multiples keep a rate schedule optimal: for each `r`
/// the half-rate angle `alpha1 * (r T1) / 2` is tested for `X*` membership
/// (tolerance 1e-9). A schedule designed for period `T1` stays optimal at
/// `r T1` exactly when the scaled angle still avoids multiples of `pi`.
pub fn multi_period_check(alpha1: f64, k: u32, t1: f64, multiples: &[u32]) -> Vec<(u32, bool)> {
    multiples
        .iter()
        .map(|&r| {
            let x = alpha1 * (r as f64 * t1) / 2.0;
            (r, x_star_membership(x, k, 1e-9))
        })
        .collect()
}

/// The pairwise cross terms of the burst objective at a fixed azimuth:
/// for each element pair `w = (l, m)` a weight `c_w = 2 |g_l| |g_m|`, the
/// half-rate difference `x_w = x_m - x_l`, and the reduced amplitude/phase
/// pair such that the pair's contribution is `amp_w * cos(y_w - phase_w)`
/// with `y_w = psi_m - psi_l`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossTerms {
    n_elements: usize,
    k: u32,
    pairs: Vec<(usize, usize)>,
    weights: Vec<f64>,
    x_diffs: Vec<f64>,
    amps: Vec<f64>,
    phases: Vec<f64>,
}

impl CrossTerms {
    /// Cross terms of an array at azimuth `phi` for half-rate angles `x`
    /// (full length `L`, `x[0]` conventionally 0).
    pub fn from_array(array: &AntennaArray, phi: f64, x: &[f64], k: u32) -> Result<Self> {
        if x.len() != array.len() {
            return Err(AcnError::Config(format!(
                "{} half-rate angles for {} elements",
                x.len(),
                array.len()
            )));
        }
        let gains = array.gains(phi);
        let mags: Vec<f64> = gains.iter().map(|g| g.norm()).collect();
        let n = array.len();
        let mut pairs = Vec::with_capacity(n * (n - 1) / 2);
        let mut weights = Vec::with_capacity(pairs.capacity());
        let mut x_diffs = Vec::with_capacity(pairs.capacity());
        for l in 0..n {
            for m in (l + 1)..n {
                pairs.push((l, m));
                weights.push(2.0 * mags[l] * mags[m]);
                x_diffs.push(x[m] - x[l]);
            }
        }
        Self::from_parts(n, pairs, weights, x_diffs, k)
    }

    /// Cross terms from raw per-pair data. Weights must be nonnegative and
    /// finite, pair indices in range and distinct.
    pub fn from_parts(
        n_elements: usize,
        pairs: Vec<(usize, usize)>,
        weights: Vec<f64>,
        x_diffs: Vec<f64>,
        k: u32,
    ) -> Result<Self> {
        if weights.len() != pairs.len() || x_diffs.len() != pairs.len() {
            return Err(AcnError::Config(format!(
                "{} pairs, {} weights, {} differences",
                pairs.len(),
                weights.len(),
                x_diffs.len()
            )));
        }
        for &(l, m) in &pairs {
            if l >= n_elements || m >= n_elements || l == m {
                return Err(AcnError::Config(format!(
                    "pair ({l}, {m}) invalid for {n_elements} elements"
                )));
            }
        }
        if weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(AcnError::Config("pair weights must be nonnegative".into()));
        }
        let mut amps = Vec::with_capacity(pairs.len());
        let mut phases = Vec::with_capacity(pairs.len());
        for (w, x) in weights.iter().zip(&x_diffs) {
            let (ratio, lead) = kernel_ratio(*x, k);
            amps.push(w * ratio);
            phases.push(lead);
        }
        Ok(Self {
            n_elements,
            k,
            pairs,
            weights,
            x_diffs,
            amps,
            phases,
        })
    }

    /// Number of pairs `W`.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// True for a single-element (pairless) instance.
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Element pairs `(l, m)` with `l < m`.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Reduced pair amplitudes `c_w * sin(K e_w) / sin(e_w)`.
    pub fn amps(&self) -> &[f64] {
        &self.amps
    }

    /// Reduced pair phases `(K - 1) e_w`.
    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// Sum of the absolute pair amplitudes; an upper bound on how far the
    /// cross terms can move the objective in either direction.
    pub fn amp_abs_sum(&self) -> f64 {
        self.amps.iter().map(|a| a.abs()).sum()
    }

    /// Cross-term sum at per-element phases `psi` (full length `L`).
    pub fn eval_mismatch(&self, psi: &[f64]) -> f64 {
        assert_eq!(psi.len(), self.n_elements, "phase vector length");
        self.pairs
            .iter()
            .zip(self.amps.iter().zip(&self.phases))
            .map(|(&(l, m), (amp, phase))| amp * (psi[m] - psi[l] - phase).cos())
            .sum()
    }

    /// Cross-term sum at free per-pair phases `y` (length `W`), ignoring
    /// consistency between pairs.
    pub fn eval_pairwise(&self, y: &[f64]) -> f64 {
        assert_eq!(y.len(), self.len(), "pair phase vector length");
        y.iter()
            .zip(self.amps.iter().zip(&self.phases))
            .map(|(y, (amp, phase))| amp * (y - phase).cos())
            .sum()
    }

    /// Pair indices ordered by decreasing `|amp|` (ties by index).
    pub fn adversarial_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.amps[b]
                .abs()
                .partial_cmp(&self.amps[a].abs())
                .unwrap()
                .then(a.cmp(&b))
        });
        order
    }

    /// Per-pair phase targets that certify a nonpositive cross-term sum:
    /// the `ceil(W/2)` pairs with the largest `|amp|` get their extremal
    /// phase (contribution `-|amp_w|`), the rest get `phase_w` (contribution
    /// `+|amp_w|`, the least favorable filler). Since the extremal half
    /// dominates, `eval_pairwise` of the targets is `<= 0` no matter how the
    /// filler pairs are later changed.
    pub fn adversarial_pair_targets(&self) -> Vec<f64> {
        let order = self.adversarial_order();
        let top = self.len().div_ceil(2);
        let mut y = self.phases.clone();
        for &w in order.iter().take(top) {
            if self.amps[w] > 0.0 {
                y[w] += PI;
            }
        }
        y
    }

    /// A consistent per-element phase vector approximating the pairwise
    /// adversary: pairs are visited in decreasing `|amp|` and each pair that
    /// does not close a cycle pins its extremal phase difference (a
    /// maximum-`|amp|` spanning forest). Returns the phases (reference
    /// element at 0, wrapped to `[0, 2 pi)`) and the cross-term sum there,
    /// an upper bound on the true infimum over phases.
    pub fn adversarial_mismatch(&self) -> (Vec<f64>, f64) {
        let (psi, value) = greedy_adversarial(
            self.n_elements,
            &self.pairs,
            &self.amps,
            &self.phases,
        );
        (psi, value)
    }

    /// Packets per burst `K`.
    pub fn packets(&self) -> u32 {
        self.k
    }

    /// Pair weights `c_w`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Half-rate differences `x_w`.
    pub fn x_diffs(&self) -> &[f64] {
        &self.x_diffs
    }
}

/// Union-find with potentials: `find` returns the root and leaves `pot[v]`
/// holding `psi_v - psi_root` for every node on the compressed path.
fn uf_find(parent: &mut [usize], pot: &mut [f64], v: usize) -> usize {
    let mut root = v;
    while parent[root] != root {
        root = parent[root];
    }
    let mut path = Vec::new();
    let mut node = v;
    while parent[node] != node {
        path.push(node);
        node = parent[node];
    }
    let mut cum = 0.0;
    for &node in path.iter().rev() {
        cum += pot[node];
        parent[node] = root;
        pot[node] = cum;
    }
    root
}

/// Greedy max-`|amp|` spanning realization of the pairwise adversary; see
/// [`CrossTerms::adversarial_mismatch`].
fn greedy_adversarial(
    n: usize,
    pairs: &[(usize, usize)],
    amps: &[f64],
    phases: &[f64],
) -> (Vec<f64>, f64) {
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| {
        amps[b]
            .abs()
            .partial_cmp(&amps[a].abs())
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut parent: Vec<usize> = (0..n).collect();
    let mut pot = vec![0.0; n];
    for &w in &order {
        let (l, m) = pairs[w];
        let rl = uf_find(&mut parent, &mut pot, l);
        let rm = uf_find(&mut parent, &mut pot, m);
        if rl == rm {
            continue;
        }
        let target = phases[w] + if amps[w] > 0.0 { PI } else { 0.0 };
        parent[rm] = rl;
        pot[rm] = target + pot[l] - pot[m];
    }
    let mut psi = vec![0.0; n];
    for v in 0..n {
        uf_find(&mut parent, &mut pot, v);
        psi[v] = pot[v];
    }
    let shift = psi[0];
    for p in psi.iter_mut() {
        *p = wrap_tau(*p - shift);
    }
    let value = pairs
        .iter()
        .zip(amps.iter().zip(phases))
        .map(|(&(l, m), (amp, phase))| amp * (psi[m] - psi[l] - phase).cos())
        .sum();
    (psi, value)
}

/// Burst SNR objective `J(x, psi)` (per unit `P_r / (L P_n)`): the packet
/// sum `sum_{k=0}^{K-1} |sum_l |g_l| e^{j (psi_l - 2 x_l k)}|^2`, expanded
/// as `K sum |g_l|^2` plus the pairwise cross terms. `psi_l` is the total
/// per-branch phase (offset, plane-wave, and element gain phase combined);
/// its sign orientation is a pure convention, since `psi -> -psi` is a
/// bijection that leaves every infimum and supremum below unchanged.
pub fn burst_objective(
    array: &AntennaArray,
    phi: f64,
    x: &[f64],
    psi: &[f64],
    k: u32,
) -> Result<f64> {
    if psi.len() != array.len() {
        return Err(AcnError::Config(format!(
            "{} phases for {} elements",
            psi.len(),
            array.len()
        )));
    }
    let ct = CrossTerms::from_array(array, phi, x, k)?;
    Ok(optimal_burst_objective(array, phi, k) + ct.eval_mismatch(psi))
}

/// The offset-free optimum `K sum_l |g_l(phi)|^2` of the burst objective,
/// attained by any schedule whose pair differences all lie in `X*`.
pub fn optimal_burst_objective(array: &AntennaArray, phi: f64, k: u32) -> f64 {
    k as f64
        * array
            .gains(phi)
            .iter()
            .map(|g| g.norm_sqr())
            .sum::<f64>()
}

const MISMATCH_GRID_2D: usize = 32;
const MISMATCH_GRID_3D: usize = 16;
const MISMATCH_TOL: f64 = 1e-9;

/// Infimum of the cross-term sum over consistent per-element phases.
/// Returns the minimizing phases (reference element 0) and the value.
/// `floor_scale` sets the negligibility threshold for the fast path taken
/// when all amplitudes have already collapsed (the designed-rates case).
fn inf_mismatch(ct: &CrossTerms, floor_scale: f64) -> (Vec<f64>, f64) {
    let n = ct.n_elements;
    let dims = n - 1;
    if dims == 0 || ct.is_empty() {
        return (vec![0.0; n], 0.0);
    }
    if ct.amp_abs_sum() <= 1e-12 * floor_scale.max(1.0) {
        let psi = vec![0.0; n];
        let value = ct.eval_mismatch(&psi);
        return (psi, value);
    }

    let eval = |free: &[f64]| {
        let mut psi = vec![0.0; n];
        psi[1..].copy_from_slice(free);
        ct.eval_mismatch(&psi)
    };

    if dims == 1 {
        // Single pair: the minimum is -|amp| in closed form.
        let amp = ct.amps[0];
        let phase = ct.phases[0];
        let free = wrap_tau(if amp > 0.0 { phase + PI } else { phase });
        let mut psi = vec![0.0; n];
        psi[1] = free;
        let value = ct.eval_mismatch(&psi);
        return (psi, value);
    }

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let (adv_psi, _) = ct.adversarial_mismatch();
    candidates.push(adv_psi[1..].to_vec());

    if dims <= 3 {
        let grid = if dims == 2 { MISMATCH_GRID_2D } else { MISMATCH_GRID_3D };
        let step = TAU / grid as f64;
        let mut index = vec![0usize; dims];
        let mut free = vec![0.0; dims];
        let mut best = vec![0.0; dims];
        let mut best_value = f64::INFINITY;
        loop {
            for (f, &i) in free.iter_mut().zip(index.iter()) {
                *f = i as f64 * step;
            }
            let value = eval(&free);
            if value < best_value {
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
                if index[d] < grid {
                    break;
                }
                index[d] = 0;
            }
            if index.iter().all(|&i| i == 0) {
                break;
            }
        }
        candidates.push(best);
    } else {
        let primes = [2.0f64, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0];
        for s in 0..16 {
            let free: Vec<f64> = (0..dims)
                .map(|d| (s as f64 * primes[d % primes.len()].sqrt()).fract() * TAU)
                .collect();
            candidates.push(free);
        }
    }

    let polish_step = if dims <= 3 {
        TAU / if dims == 2 { MISMATCH_GRID_2D } else { MISMATCH_GRID_3D } as f64
    } else {
        TAU / 4.0
    };
    let mut best_free: Option<Vec<f64>> = None;
    let mut best_value = f64::INFINITY;
    for start in candidates {
        let mut free = start;
        let mut value = eval(&free);
        for _ in 0..16 {
            let before = value;
            for d in 0..dims {
                let center = free[d];
                let (x, v) = golden_min(
                    |x| {
                        let mut probe = free.clone();
                        probe[d] = x;
                        eval(&probe)
                    },
                    center - polish_step,
                    center + polish_step,
                    MISMATCH_TOL,
                );
                if v < value {
                    value = v;
                    free[d] = x;
                }
            }
            if before - value <= 1e-15 * (1.0 + value.abs()) {
                break;
            }
        }
        if value < best_value {
            best_value = value;
            best_free = Some(free);
        }
    }

    let free = best_free.expect("at least one candidate");
    let mut psi = vec![0.0; n];
    for (p, f) in psi[1..].iter_mut().zip(free.iter()) {
        *p = wrap_tau(*f);
    }
    let value = ct.eval_mismatch(&psi);
    (psi, value)
}

/// Worst-case burst objective over the per-branch phases: the infimum of
/// `J(x, psi)` over `psi` at fixed azimuth and half-rate angles. Returns the
/// minimizing phases and the value. When every pair difference lies in `X*`
/// the cross terms vanish and the result equals
/// [`optimal_burst_objective`]; that case is detected and returned without
/// search.
pub fn worst_mismatch_objective(
    array: &AntennaArray,
    phi: f64,
    x: &[f64],
    k: u32,
) -> Result<(Vec<f64>, f64)> {
    let ct = CrossTerms::from_array(array, phi, x, k)?;
    let base = optimal_burst_objective(array, phi, k);
    let (psi, inf) = inf_mismatch(&ct, base.abs());
    Ok((psi, base + inf))
}

/// Grid resolution for the exhaustive searches. `rate_points` samples each
/// free half-rate angle over `[0, pi)`; `phi_points` samples the azimuth
/// over `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub rate_points: usize,
    pub phi_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            rate_points: 256,
            phi_points: 3600,
        }
    }
}

impl GridSpec {
    /// Builds a grid spec, rejecting grids below 8 points per axis.
    pub fn new(rate_points: usize, phi_points: usize) -> Result<Self> {
        let spec = Self {
            rate_points,
            phi_points,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Rejects grids too coarse to mean anything (under 8 points per axis).
    pub fn validate(&self) -> Result<()> {
        if self.rate_points < 8 || self.phi_points < 8 {
            return Err(AcnError::Resolution(format!(
                "search grid {} x {} is below the 8-points-per-axis minimum",
                self.rate_points, self.phi_points
            )));
        }
        Ok(())
    }
}

/// Result of a minimax rate search.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxResult {
    /// Rotation rates `alpha_l` in rad/s, reference element first.
    pub rates: Vec<f64>,
    /// Half-rate angles `x_l = alpha_l T / 2`.
    pub half_rate_angles: Vec<f64>,
    /// The guaranteed objective: for [`minimax_rates`] the worst-case burst
    /// SNR objective `min_phi inf_psi J`; for [`minimax_rates_pep`] the
    /// worst-case burst error probability.
    pub value: f64,
}

/// Exhaustive maximin search for the rate schedule that maximizes the
/// worst-case (over azimuth and per-branch phases) burst SNR objective.
///
/// Free half-rate angles are scanned over `[0, pi)` on `grid.rate_points`
/// points per axis (the kernel is `pi`-periodic, so nothing is lost), the
/// azimuth over `grid.phi_points` points. A sound branch-and-bound prune
/// keeps the scan tractable: the objective of any candidate is at most its
/// value at a handful of probe azimuths, each bounded through the greedy
/// adversarial phase construction, and candidates that cannot beat the
/// incumbent are skipped without the inner phase search. The closed-form
/// design point seeds the incumbent. Supports up to four antennas (three
/// free rates); the returned angles have grid resolution.
pub fn minimax_rates(array: &AntennaArray, k: u32, t: f64, grid: GridSpec) -> Result<MinimaxResult> {
    grid.validate()?;
    let l = array.len();
    if l < 2 {
        return Err(AcnError::Config(
            "rate search needs at least two antennas".into(),
        ));
    }
    if k < 2 {
        return Err(AcnError::Config(
            "rate search needs at least two packets per burst".into(),
        ));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(AcnError::Config(format!("period {t} must be positive")));
    }
    if l > k as usize {
        return Err(AcnError::Infeasible(format!(
            "no rate schedule reaches the worst-case optimum for {l} antennas \
             and {k} packets per burst: pair differences of more than {k} \
             half-rate angles cannot all avoid the kernel's nonzero set"
        )));
    }
    if l > 4 {
        return Err(AcnError::Resolution(format!(
            "exhaustive rate search over {} free angles is not supported; \
             use the closed-form design rates",
            l - 1
        )));
    }

    let dims = l - 1;
    let n_x = grid.rate_points;
    let n_phi = grid.phi_points;
    let x_step = PI / n_x as f64;

    // Per-azimuth pair weights and gain power sums.
    let mut pairs = Vec::new();
    for a in 0..l {
        for b in (a + 1)..l {
            pairs.push((a, b));
        }
    }
    let mut weights = vec![vec![0.0; pairs.len()]; n_phi];
    let mut sum_sq = vec![0.0; n_phi];
    for i in 0..n_phi {
        let phi = i as f64 * TAU / n_phi as f64;
        let mags: Vec<f64> = array.gains(phi).iter().map(|g| g.norm()).collect();
        sum_sq[i] = mags.iter().map(|m| m * m).sum();
        for (w, &(a, b)) in weights[i].iter_mut().zip(&pairs) {
            *w = 2.0 * mags[a] * mags[b];
        }
    }
    let kf = k as f64;

    // Probe azimuths for the upper bound: the global gain-power minimum and
    // seven strided offsets from it.
    let argmin = sum_sq
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .unwrap();
    let mut probes: Vec<usize> = (0..8).map(|j| (argmin + j * n_phi / 8) % n_phi).collect();
    probes.sort_unstable();
    probes.dedup();

    // Evaluates min over the full azimuth grid of K sum|g|^2 + inf_psi cross.
    let full_value = |x_free: &[f64]| -> f64 {
        let mut x_full = vec![0.0; l];
        x_full[1..].copy_from_slice(x_free);
        let mut ratios = Vec::with_capacity(pairs.len());
        let mut phases = Vec::with_capacity(pairs.len());
        let mut ratio_abs_sum = 0.0;
        for &(a, b) in &pairs {
            let (ratio, lead) = kernel_ratio(x_full[b] - x_full[a], k);
            ratios.push(ratio);
            phases.push(lead);
            ratio_abs_sum += ratio.abs();
        }
        let mut min_v = f64::INFINITY;
        for i in 0..n_phi {
            let base = kf * sum_sq[i];
            // The cross terms cannot push J below base - sum_w |amp_w|; skip
            // azimuths that provably cannot lower the running minimum.
            let w_max = weights[i].iter().cloned().fold(0.0, f64::max);
            if base - w_max * ratio_abs_sum >= min_v {
                continue;
            }
            let amps: Vec<f64> = weights[i]
                .iter()
                .zip(&ratios)
                .map(|(w, r)| w * r)
                .collect();
            let ct = CrossTerms {
                n_elements: l,
                k,
                pairs: pairs.clone(),
                weights: weights[i].clone(),
                x_diffs: pairs.iter().map(|&(a, b)| x_full[b] - x_full[a]).collect(),
                amps,
                phases: phases.clone(),
            };
            let (_, inf) = inf_mismatch(&ct, base.abs());
            min_v = min_v.min(base + inf);
        }
        min_v
    };

    // Cheap upper bound on the candidate's value from probe azimuths.
    let probe_bound = |x_free: &[f64]| -> f64 {
        let mut x_full = vec![0.0; l];
        x_full[1..].copy_from_slice(x_free);
        let mut ratios = Vec::with_capacity(pairs.len());
        let mut phases = Vec::with_capacity(pairs.len());
        for &(a, b) in &pairs {
            let (ratio, lead) = kernel_ratio(x_full[b] - x_full[a], k);
            ratios.push(ratio);
            phases.push(lead);
        }
        let mut best = f64::INFINITY;
        for &p in &probes {
            let amps: Vec<f64> = weights[p]
                .iter()
                .zip(&ratios)
                .map(|(w, r)| w * r)
                .collect();
            let (_, v) = greedy_adversarial(l, &pairs, &amps, &phases);
            best = best.min(kf * sum_sq[p] + v);
        }
        best
    };

    // Seed the incumbent with the closed-form design point.
    let seed_index: Vec<usize> = (1..l)
        .map(|i| {
            let x = i as f64 * PI / kf;
            ((x / x_step).round() as usize).min(n_x - 1)
        })
        .collect();
    let seed_free: Vec<f64> = seed_index.iter().map(|&i| i as f64 * x_step).collect();
    let mut best_value = full_value(&seed_free);
    let mut best_free = seed_free;

    let mut index = vec![0usize; dims];
    let mut free = vec![0.0; dims];
    loop {
        if index != seed_index {
            for (f, &i) in free.iter_mut().zip(index.iter()) {
                *f = i as f64 * x_step;
            }
            let tol = 1e-12 * best_value.abs().max(1.0);
            if probe_bound(&free) > best_value + tol {
                let value = full_value(&free);
                if value > best_value {
                    best_value = value;
                    best_free.copy_from_slice(&free);
                }
            }
        }
        let mut d = dims;
        loop {
            if d == 0 {
                break;
            }
            d -= 1;
            index[d] += 1;
            if index[d] < n_x {
                break;
            }
            index[d] = 0;
        }
        if index.iter().all(|&i| i == 0) {
            break;
        }
    }

    let mut half_rate_angles = vec![0.0; l];
    half_rate_angles[1..].copy_from_slice(&best_free);
    let rates = half_rate_angles.iter().map(|x| 2.0 * x / t).collect();
    Ok(MinimaxResult {
        rates,
        half_rate_angles,
        value: best_value,
    })
}

/// Direct minimax over rates of the worst-case (over azimuth and offsets)
/// burst error probability for an arbitrary PEP model. Supports two
/// antennas: the single free half-rate angle is scanned over `[0, pi)` on
/// `grid.rate_points` points, each evaluated against `grid.phi_points`
/// azimuths with a full worst-offset search. Ties keep the smallest angle.
pub fn minimax_rates_pep(
    array: &AntennaArray,
    budget: &LinkBudget,
    pep: &PepModel,
    grid: GridSpec,
) -> Result<MinimaxResult> {
    grid.validate()?;
    pep.validate()?;
    if array.len() != 2 {
        return Err(AcnError::Resolution(format!(
            "direct error-probability rate search supports two antennas, got {}",
            array.len()
        )));
    }
    let n_x = grid.rate_points;
    let n_phi = grid.phi_points;
    let t = budget.period();
    let gains: Vec<_> = (0..n_phi)
        .map(|i| array.gains(i as f64 * TAU / n_phi as f64))
        .collect();

    let (best_i, best_value) = (0..n_x)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 * PI / n_x as f64;
            let rates = [0.0, 2.0 * x / t];
            let worst = gains
                .iter()
                .map(|g| worst_offset_from_gains(g, &rates, budget, pep).1)
                .fold(f64::NEG_INFINITY, f64::max);
            (i, worst)
        })
        .reduce(
            || (usize::MAX, f64::INFINITY),
            |a, b| {
                if b.1 < a.1 || (b.1 == a.1 && b.0 < a.0) {
                    b
                } else {
                    a
                }
            },
        );

    let x = best_i as f64 * PI / n_x as f64;
    Ok(MinimaxResult {
        rates: vec![0.0, 2.0 * x / t],
        half_rate_angles: vec![0.0, x],
        value: best_value,
    })
}

/// The azimuth minimizing the array gain power `sum_l |g_l(phi)|^2`, the
/// arrival angle at which an optimally scheduled combiner fares worst.
/// Scans `points >= 360` grid angles (finer structure than a degree would
/// be missed otherwise) and golden-polishes the best bracket; exact grid
/// ties keep the smallest angle.
pub fn worst_case_aoa(array: &AntennaArray, points: usize) -> Result<f64> {
    if points < 360 {
        return Err(AcnError::Resolution(format!(
            "azimuth grid of {points} points is below the 360-point minimum"
        )));
    }
    let power = |phi: f64| -> f64 {
        array.gains(phi).iter().map(|g| g.norm_sqr()).sum()
    };
    let step = TAU / points as f64;
    let mut best_i = 0;
    let mut best_v = f64::INFINITY;
    for i in 0..points {
        let v = power(i as f64 * step);
        if v < best_v {
            best_v = v;
            best_i = i;
        }
    }
    let center = best_i as f64 * step;
    let (phi, v) = golden_min(power, center - step, center + step, 1e-10);
    if v < best_v {
        Ok(wrap_tau(phi))
    } else {
        Ok(center)
    }
}

/// Worst-case burst error probability as a function of the rate-period
/// product `alpha1 * T`, for a two-antenna array at a fixed azimuth.
/// Returns `points >= 2` pairs `(alpha1 * T, worst-case BEP)` on an
/// inclusive linear grid over `range`, in ascending order.
pub fn mismatch_sweep(
    array: &AntennaArray,
    budget: &LinkBudget,
    pep: &PepModel,
    phi: f64,
    range: (f64, f64),
    points: usize,
) -> Result<Vec<(f64, f64)>> {
    if array.len() != 2 {
        return Err(AcnError::Config(format!(
            "rate-product sweep is defined for two antennas, got {}",
            array.len()
        )));
    }
    if points < 2 {
        return Err(AcnError::Config(format!(
            "sweep needs at least two grid points, got {points}"
        )));
    }
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(AcnError::Config(format!(
            "sweep range ({lo}, {hi}) must be finite and increasing"
        )));
    }
    pep.validate()?;
    let gains = array.gains(phi);
    let t = budget.period();
    let step = (hi - lo) / (points - 1) as f64;
    let rows = (0..points)
        .into_par_iter()
        .map(|i| {
            let alpha_t = lo + i as f64 * step;
            let rates = [0.0, alpha_t / t];
            let (_, worst) = worst_offset_from_gains(&gains, &rates, budget, pep);
            (alpha_t, worst)
        })
        .collect();
    Ok(rows)
}
