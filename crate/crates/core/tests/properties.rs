mod common;

use proptest::prelude::*;
use common::{binary_with_defiers, interior_forgeable, onesided_forgeable, rng};

use late_phase::adversarial::{forge_binary_interior, forge_binary_onesided, forge_continuous, DEFAULT_FLOOR};
use late_phase::boundary::{classify_interior, classify_one_sided, Verdict};
use late_phase::dgp::{ComplianceType, DiscreteDist, Theta};
use late_phase::estimation::{estimate, magnitude_lower_bound, sign_under_dominance};
use late_phase::fixtures::{random_dist, random_forgeable, random_theta};
use late_phase::{Sign, ThetaF32};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn wald_ratio_equals_late_combination(seed in any::<u64>()) {
        let theta = random_theta(&mut rng(seed), 4);
        let s = theta.shares();
        prop_assume!((s.complier - s.defier).abs() > 0.05);
        let mu1 = theta.laws(ComplianceType::Complier).effect();
        let mu2 = theta.laws(ComplianceType::Defier).effect();
        let combination = (mu1 * s.complier - mu2 * s.defier) / (s.complier - s.defier);
        let wald = theta.observed_law().wald_ratio().unwrap();
        prop_assert!((wald - combination).abs() <= 1e-10 * (1.0 + combination.abs()));
        prop_assert!((theta.iv_beta().unwrap() - combination).abs() <= 1e-10 * (1.0 + combination.abs()));
    }

    #[test]
    fn observed_cells_conserve_mass(seed in any::<u64>()) {
        let theta = random_theta(&mut rng(seed), 5);
        let law = theta.observed_law();
        for d in [false, true] {
            for z in [false, true] {
                if let Some(cell) = law.cell(d, z) {
                    let total: f64 = cell.atoms().iter().map(|a| a.mass).sum();
                    prop_assert!((total - 1.0).abs() <= 1e-12);
                    prop_assert!(cell.atoms().iter().all(|a| a.mass > 0.0));
                }
            }
        }
        prop_assert!(common::observed_law_discrepancy(&theta) <= 1e-12);
    }

    #[test]
    fn mixture_conserves_mass(seed in any::<u64>(), w in 0.0f64..=1.0) {
        let mut r = rng(seed);
        let (x, y) = (random_dist(&mut r, 6, -2.0, 2.0), random_dist(&mut r, 6, -2.0, 2.0));
        let m = DiscreteDist::mixture(&[(w, &x), (1.0 - w, &y)]).unwrap();
        let total: f64 = m.atoms().iter().map(|a| a.mass).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!((m.mean() - (w * x.mean() + (1.0 - w) * y.mean())).abs() <= 1e-12);
    }

    #[test]
    fn quantile_is_monotone(seed in any::<u64>(), e1 in 1e-9f64..1.0, e2 in 1e-9f64..1.0) {
        let d = random_dist(&mut rng(seed), 8, -3.0, 3.0);
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(d.quantile(lo).unwrap() <= d.quantile(hi).unwrap());
        prop_assert!(d.cdf(d.quantile(lo).unwrap()) >= lo);
    }

    #[test]
    fn larger_late_magnitude_is_bounded_below(seed in any::<u64>()) {
        let theta = random_theta(&mut rng(seed), 4);
        let s = theta.shares();
        prop_assume!((s.complier - s.defier).abs() > 1e-3);
        let beta = theta.iv_beta().unwrap();
        let mut largest = theta.late_complier().map(f64::abs).unwrap_or(0.0);
        if let Ok(mu2) = theta.late_defier() {
            largest = largest.max(mu2.abs());
        }
        let bound = magnitude_lower_bound(beta, theta.k1(), theta.k2()).unwrap();
        prop_assert!(largest >= bound - 1e-12, "{largest} < {bound}");
    }

    #[test]
    fn dominance_identifies_sign(seed in any::<u64>()) {
        let mut theta = random_theta(&mut rng(seed), 4);
        if theta.k1() < theta.k2() {
            theta = theta.instrument_swapped();
        }
        let s = *theta.shares();
        prop_assume!(s.complier - s.defier > 1e-3 && s.complier > 0.0);
        let mu1 = theta.late_complier().unwrap();
        let mu2 = if s.defier > 0.0 { theta.late_defier().unwrap() } else { 0.0 };
        prop_assume!(mu1.abs() >= mu2.abs() && mu1 != 0.0);
        let beta = theta.iv_beta().unwrap();
        prop_assert_eq!(sign_under_dominance(beta, Sign::Positive).unwrap(), Sign::of(mu1));
    }

    #[test]
    fn continuous_forge_preserves_observables(seed in any::<u64>()) {
        let (theta, config) = random_forgeable(&mut rng(seed), 4);
        let beta = theta.iv_beta().unwrap();
        // Monotone-CDF condition for the rebalanced always-taker law.
        let f11 = theta.treated_law(ComplianceType::AlwaysTaker);
        let b1_plus_delta = f11.quantile(1.0 - config.eps1).unwrap();
        prop_assert!(f11.cdf(b1_plus_delta) >= 1.0 - config.eps1);
        let forged = forge_continuous(&theta, &config).unwrap();
        let t = forged.truncation.unwrap();
        prop_assert!(f11.cdf(t.b1) < 1.0 - forged.c_tilde / theta.k2());
        prop_assert!(forged.equivalence_distance <= 1e-12);
        prop_assert!(forged.mu1_twin > -beta && forged.mu2_twin > -beta);
        prop_assert!(forged.membership.all(), "{:?}", forged.membership.failed_clauses());
        prop_assert!(common::observed_law_discrepancy(&forged.twin) <= 1e-12);
        // Determinism.
        prop_assert_eq!(&forged, &forge_continuous(&theta, &config).unwrap());
    }

    #[test]
    fn binary_forge_keeps_late_identity(seed in any::<u64>()) {
        let (theta, eta) = interior_forgeable(&mut rng(seed));
        let (k1, k2) = (theta.k1(), theta.k2());
        let beta = theta.iv_beta().unwrap();
        let forged = forge_binary_interior(&theta, eta, DEFAULT_FLOOR).unwrap();
        let s = forged.twin.shares();
        let lhs = forged.mu1_twin * s.complier - forged.mu2_twin * s.defier;
        prop_assert!((lhs - beta * (k1 - k2)).abs() <= 1e-12);
        prop_assert!(forged.mu1_twin >= -1e-12);
        prop_assert!(forged.equivalence_distance <= 1e-12);
        prop_assert!(forged.membership.all(), "{:?}", forged.membership);

        let theta = onesided_forgeable(&mut rng(seed));
        let forged = forge_binary_onesided(&theta, DEFAULT_FLOOR).unwrap();
        prop_assert_eq!(forged.c_tilde, theta.treated_success_control_arm());
        prop_assert!(forged.mu1_twin >= -1e-12);
        prop_assert!(forged.equivalence_distance <= 1e-12);
    }

    #[test]
    fn safe_side_verdicts_are_sound(seed in any::<u64>()) {
        let theta = binary_with_defiers(&mut rng(seed));
        let (k1, k2) = (theta.k1(), theta.k2());
        prop_assume!(k1 > k2);
        let beta = theta.iv_beta().unwrap();
        prop_assume!(beta != 0.0);
        let mu1 = theta.late_complier().unwrap();
        let eta = theta.shares().defier;
        if classify_interior(beta, k1, k2, eta).unwrap().verdict == Verdict::SafeSide {
            prop_assert_eq!(Sign::of(mu1), Sign::of(beta));
        }
        let cell = theta.treated_success_control_arm();
        if classify_one_sided(beta, k1, k2, cell).unwrap().verdict == Verdict::SafeSide {
            prop_assert_eq!(Sign::of(mu1), Sign::of(beta));
        }
    }
}

#[test]
fn single_precision_agrees_with_double() {
    let theta: Theta = random_theta(&mut rng(5), 3);
    let data = late_phase::dgp::sample(&theta, 5_000, 1).unwrap();
    let e64 = estimate(&data).unwrap();
    let rows32 = data
        .rows()
        .iter()
        .map(|r| late_phase::data::Observation::new(r.y as f32, r.d, r.z))
        .collect();
    let e32 = estimate(&late_phase::SampleDataF32::new(rows32).unwrap()).unwrap();
    assert!((e32.k1_hat as f64 - e64.k1_hat).abs() < 1e-5);
    assert!((e32.itt_hat as f64 - e64.itt_hat).abs() < 1e-4);

    let f32_theta: ThetaF32 = late_phase::document::DgpDocument::from_theta(&theta)
        .to_theta::<f32>()
        .unwrap();
    assert!((f32_theta.iv_beta().unwrap() as f64 - theta.iv_beta().unwrap()).abs() < 1e-3);
    let report = classify_interior(-0.0950_f32, 0.4105, 0.3557, 0.01).unwrap();
    assert!((report.boundary - 0.0052).abs() <= 5e-5);
}
