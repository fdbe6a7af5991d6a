mod common;

use num_complex::Complex64;
use proptest::prelude::*;
use surveil_core::geometry::{solve_coefficients, CaseId};
use surveil_core::scenario::{generate_channels, ChannelSet, FadingParams, NodeLayout, RngStream};
use surveil_core::sinr::{
    augment, check_feasible, element_budget, sinr_bob, sinr_eve, PowerBudget, ReflectVector, SinrReport,
};
use surveil_core::subproblem::{build_subproblem, extract_reflect, taylor_point, LinearizationPoint};

fn channels(n: usize, seed: u64) -> ChannelSet {
    generate_channels(&NodeLayout::default(), &FadingParams::default(), n, RngStream::new(seed, 41)).unwrap()
}

fn within_budget(ch: &ChannelSet, pb: &PowerBudget, fracs: &[(f64, f64)]) -> ReflectVector {
    let phis: Vec<Complex64> = fracs
        .iter()
        .enumerate()
        .map(|(k, &(r, th))| Complex64::from_polar(element_budget(ch, pb, k).unwrap().sqrt() * r, th))
        .collect();
    ReflectVector::from_phis(&phis).unwrap()
}

fn fracs(n: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..std::f64::consts::TAU), n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_reflection_gives_direct_snrs(seed in any::<u64>(), n in 1usize..10, p_a in 50.0f64..95.0) {
        let ch = channels(n, seed);
        let aug = augment(&ch);
        let pb = PowerBudget::from_db(p_a, 60.0);
        let v = ReflectVector::no_reflection(n);
        let direct_b = pb.p_a * ch.h_ab.norm_sqr() / pb.sigma_02;
        let direct_e = pb.p_a * ch.h_ae.norm_sqr() / pb.sigma_02;
        prop_assert!((sinr_bob(&v, &aug, &pb) - direct_b).abs() <= 1e-12 * direct_b);
        prop_assert!((sinr_eve(&v, &aug, &pb) - direct_e).abs() <= 1e-12 * direct_e);
    }

    #[test]
    fn symmetric_links_give_equal_sinrs(seed in any::<u64>(), f in fracs(5)) {
        let ch = channels(5, seed);
        let sym = ChannelSet { h_ae: ch.h_ab, h_re: ch.h_rb.clone(), ..ch };
        let pb = PowerBudget::from_db(80.0, 60.0);
        let v = within_budget(&sym, &pb, &f);
        let aug = augment(&sym);
        prop_assert_eq!(sinr_bob(&v, &aug, &pb), sinr_eve(&v, &aug, &pb));
    }

    #[test]
    fn rate_is_monotone_in_bob_sinr(b1 in 0.0f64..1e6, db in 0.0f64..1e6, slack in 0.0f64..1e6) {
        let b2 = b1 + db;
        let e = b2 + slack;
        let (r1, r2) = (SinrReport::new(b1, e), SinrReport::new(b2, e));
        prop_assert!(r1.eavesdrop_ok && r2.eavesdrop_ok);
        prop_assert!(r2.rate >= r1.rate);
    }

    #[test]
    fn smaller_surface_is_a_prefix(seed in any::<u64>(), n in 1usize..12, extra in 1usize..6) {
        let small = channels(n, seed);
        let big = channels(n + extra, seed);
        prop_assert_eq!(small.h_ab, big.h_ab);
        prop_assert_eq!(small.h_ae, big.h_ae);
        prop_assert_eq!(&small.h_ar[..], &big.h_ar[..n]);
        prop_assert_eq!(&small.h_rb[..], &big.h_rb[..n]);
        prop_assert_eq!(&small.h_re[..], &big.h_re[..n]);
    }

    /// At a C1–C3-feasible expansion point the linearized program contains
    /// the point itself.
    #[test]
    fn taylor_point_satisfies_every_constraint(seed in any::<u64>(), f in fracs(4)) {
        let ch = channels(4, seed);
        let aug = augment(&ch);
        let pb = PowerBudget::from_db(80.0, 60.0);
        let v0 = within_budget(&ch, &pb, &f);
        prop_assume!(check_feasible(&v0, &ch, &aug, &pb, 0.0).feasible);
        let lp = LinearizationPoint::at(v0, &aug, &pb);
        let cp = build_subproblem(&aug, &ch, &pb, &lp).unwrap();
        let x = taylor_point(&aug, &pb, &lp);
        for (r, viol) in cp.violations(&x).unwrap() {
            prop_assert!(viol <= 1e-9 * cp.constraint_scale(r), "{:?}: {}", r, viol);
        }
    }

    /// Any point of the linearized program maps back to a vector meeting
    /// the original constraints.
    #[test]
    fn program_feasibility_implies_original_feasibility(
        seed in any::<u64>(),
        f in fracs(3),
        g in fracs(3),
        a_frac in 0.0f64..1.0,
    ) {
        let ch = channels(3, seed);
        let aug = augment(&ch);
        let pb = PowerBudget::from_db(80.0, 60.0);
        let lp = LinearizationPoint::at(within_budget(&ch, &pb, &f), &aug, &pb);
        let cp = build_subproblem(&aug, &ch, &pb, &lp).unwrap();
        let v = within_budget(&ch, &pb, &g);
        let Some(mut x) = common::p3_point(&aug, &pb, lp.v0.as_augmented(), lp.b0, lp.e0, v.as_augmented())
        else {
            return Ok(());
        };
        x[2 * 3] *= a_frac;
        prop_assert!(cp.evaluate_constraints(&x).unwrap() <= 1e-9 * x[2 * 3 + 3].max(1.0));
        let back = extract_reflect(&x, 3).unwrap();
        prop_assert!(check_feasible(&back, &ch, &aug, &pb, 1e-9).feasible);
    }

    #[test]
    fn element_solution_is_feasible_and_dominates_samples(seed in any::<u64>(), case in 0usize..11) {
        let mut r = common::rng(seed);
        let ec = common::random_case(&mut r, CaseId::ALL[case]);
        let out = solve_coefficients(&ec);
        prop_assert!(out.phi.norm_sqr() <= ec.beta_up * (1.0 + 1e-9));
        let best = ec.objective(out.phi);
        let mut any_feasible = false;
        for _ in 0..500 {
            let phi = common::sample_disk(&mut r, Complex64::new(0.0, 0.0), ec.beta_up);
            if common::feasible(&ec, phi) {
                any_feasible = true;
                prop_assert!(ec.objective(phi) <= best + 1e-9 * best.abs(), "{:?}", out);
            }
        }
        if any_feasible {
            prop_assert!(common::feasible(&ec, out.phi), "{:?}", out);
        }
    }
}
