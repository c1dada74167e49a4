//! Property-based checks of the analytic identities the toolkit rests on.

use acn_core::{
    burst_objective, f_kernel, rho, CombiningScheme, CrossTerms, FarFieldPattern, LinkBudget,
    PepModel,
};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

fn direct_kernel(x: f64, y: f64, k: u32) -> f64 {
    (0..k).map(|i| (y - 2.0 * i as f64 * x).cos()).sum()
}

fn pattern_strategy() -> impl Strategy<Value = FarFieldPattern> {
    prop_oneof![
        Just(FarFieldPattern::Isotropic),
        (0.0..TAU).prop_map(|pointing| FarFieldPattern::DipoleCosine { pointing }),
        (0.0..TAU, 0.0..1.0)
            .prop_map(|(pointing, depth)| FarFieldPattern::cardioid(pointing, depth).unwrap()),
        (0.0..TAU, 0.3..3.0f64, 0.0..0.6f64).prop_map(|(pointing, beamwidth, back)| {
            FarFieldPattern::patch_lobe(pointing, beamwidth, back).unwrap()
        }),
    ]
}

fn array_strategy(max_elements: usize) -> impl Strategy<Value = acn_core::AntennaArray> {
    prop::collection::vec((pattern_strategy(), -0.2..0.2f64, -0.2..0.2f64), 1..=max_elements)
        .prop_map(|specs| {
            let elements = specs.iter().map(|(p, _, _)| p.clone()).collect();
            let positions = specs.iter().map(|&(_, x, y)| (x, y)).collect();
            acn_core::AntennaArray::new(elements, positions, 0.125).unwrap()
        })
}

proptest! {
    #[test]
    fn kernel_closed_form_equals_direct_sum(
        x in -TAU..2.0 * TAU,
        y in 0.0..TAU,
        k in 1u32..=12,
    ) {
        let closed = f_kernel(x, y, k);
        let direct = direct_kernel(x, y, k);
        prop_assert!((closed - direct).abs() < 1e-10, "{closed} vs {direct}");
    }

    #[test]
    fn kernel_is_pi_periodic(x in -PI..PI, y in 0.0..TAU, k in 1u32..=12) {
        prop_assert!((f_kernel(x, y, k) - f_kernel(x + PI, y, k)).abs() < 1e-9);
    }

    #[test]
    fn kernel_vanishes_on_the_design_set(
        k in 2u32..=12,
        q in 1u32..=47,
        y in 0.0..TAU,
    ) {
        prop_assume!(q < 4 * k && q % k != 0);
        let x = q as f64 * PI / k as f64;
        prop_assert!(f_kernel(x, y, k).abs() < 1e-10);
    }

    #[test]
    fn rho_orderings_hold_for_any_array(
        array in array_strategy(4),
        phi in 0.0..TAU,
        snr_db in -5.0..15.0f64,
        packets in 1u32..=10,
    ) {
        let budget = LinkBudget::from_snr_db(snr_db, packets, 0.1).unwrap();
        let l = array.len() as f64;
        let mrc = rho(CombiningScheme::MaximalRatio, &array, &budget, phi).unwrap();
        let egc = rho(CombiningScheme::EqualGain, &array, &budget, phi).unwrap();
        let sc = rho(CombiningScheme::Selection, &array, &budget, phi).unwrap();
        let acn = rho(CombiningScheme::Acn, &array, &budget, phi).unwrap();
        let slack = 1e-12 * mrc.max(1.0);
        prop_assert!(mrc == l * acn, "MRC must equal L times the combiner sum exactly");
        prop_assert!(mrc >= egc - slack, "MRC {mrc} vs EGC {egc}");
        prop_assert!(egc >= acn - slack, "EGC {egc} vs combiner {acn}");
        prop_assert!(mrc >= sc - slack, "MRC {mrc} vs SC {sc}");
        prop_assert!(sc >= acn - slack, "SC {sc} vs combiner {acn}");
    }

    #[test]
    fn pep_models_are_nonincreasing(
        pair in (0.0..30.0f64, 0.0..30.0f64),
        a in 0.1..2.0f64,
        b in 0.05..2.0f64,
        bits in 1u32..=3200,
    ) {
        let (lo, hi) = if pair.0 <= pair.1 { pair } else { (pair.1, pair.0) };
        for model in [
            PepModel::Exponential { a, b },
            PepModel::QpskAwgn { bits },
            PepModel::QpskRayleigh { bits },
        ] {
            let p_lo = model.evaluate(lo).unwrap();
            let p_hi = model.evaluate(hi).unwrap();
            prop_assert!(p_hi <= p_lo + 1e-12, "{model:?}: {p_lo} -> {p_hi}");
            prop_assert!((0.0..=1.0).contains(&p_lo));
        }
    }

    #[test]
    fn adversarial_targets_certify_nonpositive_cross_terms(
        weights in prop::collection::vec(0.0..3.0f64, 1..=6),
        x_seed in prop::collection::vec(0.0..TAU, 6),
        filler in prop::collection::vec(0.0..TAU, 6),
        k in 2u32..=9,
    ) {
        let w = weights.len();
        let pairs: Vec<(usize, usize)> = (0..w).map(|i| (0, i + 1)).collect();
        let x_diffs = x_seed[..w].to_vec();
        let ct = CrossTerms::from_parts(w + 1, pairs, weights, x_diffs, k).unwrap();
        let mut y = ct.adversarial_pair_targets();
        let order = ct.adversarial_order();
        for &i in order.iter().skip(ct.len().div_ceil(2)) {
            y[i] = filler[i];
        }
        let sum = ct.eval_pairwise(&y);
        prop_assert!(sum <= 1e-12 * ct.amp_abs_sum().max(1.0), "sum = {sum}");
    }

    #[test]
    fn burst_objective_matches_direct_packet_sum(
        array in array_strategy(3),
        phi in 0.0..TAU,
        k in 1u32..=9,
        x_seed in prop::collection::vec(0.0..PI, 3),
        psi_seed in prop::collection::vec(0.0..TAU, 3),
    ) {
        let l = array.len();
        let mut x = x_seed[..l].to_vec();
        x[0] = 0.0;
        let psi = psi_seed[..l].to_vec();
        let j = burst_objective(&array, phi, &x, &psi, k).unwrap();
        let mags: Vec<f64> = array.gains(phi).iter().map(|g| g.norm()).collect();
        let mut direct = 0.0;
        for kk in 0..k {
            let (mut re, mut im) = (0.0, 0.0);
            for l in 0..mags.len() {
                let angle = psi[l] - 2.0 * x[l] * kk as f64;
                re += mags[l] * angle.cos();
                im += mags[l] * angle.sin();
            }
            direct += re * re + im * im;
        }
        prop_assert!(
            (j - direct).abs() <= 1e-9 * direct.abs().max(1.0),
            "J = {j} vs {direct}"
        );
    }

    #[test]
    fn per_packet_gain_peak_meets_the_equal_gain_bound(
        g0 in (0.05..2.0f64, 0.0..TAU),
        g1 in (0.05..2.0f64, 0.0..TAU),
        beta in 0.0..TAU,
        k in 3u32..=20,
    ) {
        // With the designed rotation the K per-packet phases are uniformly
        // spread, so at least one lands within pi/K of coherence:
        // max_k |a + b e^{j theta_k}|^2 >= cos^2(pi/(2K)) (a + b)^2.
        let a = Complex64::from_polar(g0.0, g0.1);
        let b = Complex64::from_polar(g1.0, g1.1);
        let mut best = 0.0f64;
        for kk in 0..k {
            let theta = beta + TAU * kk as f64 / k as f64;
            best = best.max((a + b * Complex64::cis(theta)).norm_sqr());
        }
        let kf = k as f64;
        let bound = (PI / (2.0 * kf)).cos().powi(2) * (a.norm() + b.norm()).powi(2);
        prop_assert!(best >= bound - 1e-12, "peak {best} vs bound {bound}");
    }
}
