mod common;

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::Rng;
use surveil_core::geometry::*;
use surveil_core::scenario::{generate_channels, ChannelSet, FadingParams, NodeLayout, RngStream};
use surveil_core::sinr::{
    augment, check_feasible, sinr_bob, sinr_eve, PowerBudget, ReflectVector,
};

use common::{feasible, grid_best, random_case, rng, sample_disk};

fn channels(n: usize, seed: u64) -> ChannelSet {
    generate_channels(&NodeLayout::default(), &FadingParams::default(), n, RngStream::new(seed, 0)).unwrap()
}

fn random_phis<R: Rng>(rng: &mut R, ch: &ChannelSet, pb: &PowerBudget) -> ReflectVector {
    let phis: Vec<Complex64> = (0..ch.n_elements())
        .map(|k| {
            let beta = surveil_core::sinr::element_budget(ch, pb, k).unwrap();
            sample_disk(rng, Complex64::new(0.0, 0.0), beta)
        })
        .collect();
    ReflectVector::from_phis(&phis).unwrap()
}

#[test]
fn grid_oracle_on_every_branch() {
    let mut r = rng(11);
    let mut seen = BTreeSet::new();
    for case in CaseId::ALL {
        for _ in 0..6 {
            let ec = random_case(&mut r, case);
            let out = solve_coefficients(&ec);
            seen.insert(out.case_id);
            assert!(out.phi.norm_sqr() <= ec.beta_up * (1.0 + 1e-9));
            match grid_best(&ec, 400) {
                Some(best) => {
                    assert!(feasible(&ec, out.phi), "{case:?} infeasible {out:?}");
                    let f = ec.objective(out.phi);
                    assert!(f >= best - 1e-3 * best.abs(), "{case:?}: {f} < grid {best}");
                }
                None => assert_eq!(out.phi, Complex64::new(0.0, 0.0), "{case:?}"),
            }
        }
    }
    assert_eq!(seen.len(), CaseId::ALL.len(), "{seen:?}");
}

#[test]
fn gamma_and_eta_beat_disk_samples() {
    let mut r = rng(5);
    for _ in 0..5 {
        let ec = random_case(&mut r, CaseId::InnerCrossing);
        let gamma = candidate_gamma(&ec);
        assert!((gamma.norm_sqr() - ec.beta_up).abs() <= 1e-12 * ec.beta_up);
        let eta = candidate_eta(&ec).unwrap();
        assert!(((eta - Complex64::new(ec.u, ec.w)).norm_sqr() - ec.z).abs() <= 1e-12 * ec.z.max(1.0));
        let (fg, fe) = (ec.objective(gamma), ec.objective(eta));
        for _ in 0..100_000 {
            let a = sample_disk(&mut r, Complex64::new(0.0, 0.0), ec.beta_up);
            assert!(ec.objective(a) <= fg + 1e-12 * fg.abs());
            let b = sample_disk(&mut r, Complex64::new(ec.u, ec.w), ec.z);
            assert!(ec.objective(b) <= fe + 1e-12 * fe.abs());
        }
    }
}

#[test]
fn intersections_lie_on_both_circles() {
    let mut r = rng(9);
    for _ in 0..200 {
        let ec = random_case(&mut r, CaseId::OuterCrossing);
        let (a, b) = circle_intersections(&ec).unwrap();
        for e in [a, b] {
            assert!((e.norm_sqr() - ec.beta_up).abs() <= 1e-9);
            assert!(((e - Complex64::new(ec.u, ec.w)).norm_sqr() - ec.z).abs() <= 1e-9);
        }
    }
}

#[test]
fn quadratic_forms_reproduce_worst_case_sinrs() {
    let mut r = rng(3);
    let pb = PowerBudget::from_db(80.0, 60.0);
    for seed in 0..20 {
        let ch = channels(1 + seed as usize % 8, seed);
        let aug = augment(&ch);
        let v = random_phis(&mut r, &ch, &pb);
        for n in 0..ch.n_elements() {
            let pc = partial_channels(n, &v, &ch).unwrap();
            let ec = element_coefficients(n, &pc, &ch, &pb).unwrap();
            let beta = ec.beta_up;
            for _ in 0..20 {
                let phi = sample_disk(&mut r, Complex64::new(0.0, 0.0), beta);
                let mut full = v.clone();
                full.set_phi(n, phi);
                // Direct evaluation of the worst-case structures.
                let g_b = ch.h_ar[n] * ch.h_rb[n];
                let g_e = ch.h_ar[n] * ch.h_re[n];
                let bob = pb.p_a * (pc.h_ab_not_n + g_b * phi).norm_sqr()
                    / (pb.sigma_r2 * pc.h_rb_not_n + pb.sigma_02);
                let eve = pb.p_a * (pc.h_ae_not_n + g_e * phi).norm_sqr()
                    / (pb.sigma_r2 * (ch.h_re[n].norm_sqr() * beta + pc.h_re_not_n) + pb.sigma_02);
                assert!((ec.objective(phi) - bob).abs() <= 1e-10 * bob);
                assert!((ec.eve(phi) - eve).abs() <= 1e-10 * eve);
                // Dominance against the exact SINRs.
                assert!(ec.objective(phi) >= sinr_bob(&full, &aug, &pb) * (1.0 - 1e-12));
                assert!(ec.eve(phi) <= sinr_eve(&full, &aug, &pb) * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn partial_channels_rebuild_bob_numerator() {
    let mut r = rng(4);
    let pb = PowerBudget::from_db(80.0, 60.0);
    let ch = channels(6, 1);
    let aug = augment(&ch);
    let v = random_phis(&mut r, &ch, &pb);
    for n in 0..6 {
        let pc = partial_channels(n, &v, &ch).unwrap();
        let num = (pc.h_ab_not_n + ch.h_ar[n] * ch.h_rb[n] * v.phi(n)).norm_sqr();
        let direct = sinr_bob(&v, &aug, &pb) * surveil_core::sinr::denominator_bob(&v, &aug, &pb) / pb.p_a;
        assert!((num - direct).abs() <= 1e-12 * direct);
    }
    let zero = ReflectVector::no_reflection(6);
    let pc = partial_channels(2, &zero, &ch).unwrap();
    assert_eq!(pc.h_ab_not_n, ch.h_ab);
    assert_eq!(pc.h_rb_not_n, 0.0);
    assert!(partial_channels(6, &zero, &ch).is_err());
}

#[test]
fn single_element_residuals_are_direct_links() {
    let ch = channels(1, 2);
    let v = ReflectVector::uniform(1, Complex64::new(0.3, 0.1));
    let pc = partial_channels(0, &v, &ch).unwrap();
    assert_eq!(pc.h_ab_not_n, ch.h_ab);
    assert_eq!(pc.h_ae_not_n, ch.h_ae);
    assert_eq!((pc.h_rb_not_n, pc.h_re_not_n), (0.0, 0.0));
}

#[test]
fn vanishing_bob_reflection_zeroes_bob_terms() {
    let mut ch = channels(3, 6);
    ch.h_rb[1] = Complex64::new(0.0, 0.0);
    let pb = PowerBudget::from_db(80.0, 60.0);
    let v = ReflectVector::uniform(3, Complex64::new(0.01, 0.0));
    let pc = partial_channels(1, &v, &ch).unwrap();
    let ec = element_coefficients(1, &pc, &ch, &pb).unwrap();
    assert_eq!((ec.j, ec.l, ec.m), (0.0, 0.0, 0.0));
}

#[test]
fn symmetric_links_hit_half_plane_when_budget_noise_vanishes() {
    let ch = channels(2, 8);
    let sym = ChannelSet {
        h_ae: ch.h_ab,
        h_re: ch.h_rb.clone(),
        ..ch
    };
    // No amplified noise: β_up drops out of Eve's denominator.
    let pb = PowerBudget::from_db(80.0, 60.0).passive();
    let v = ReflectVector::uniform(2, Complex64::new(0.01, 0.0));
    let pc = partial_channels(0, &v, &sym).unwrap();
    let ec = element_coefficients(0, &pc, &sym, &pb).unwrap();
    assert!(ec.is_degenerate());
    assert_eq!(solve_coefficients(&ec).case_id, CaseId::HalfPlane);
}

#[test]
fn coordinate_descent_stays_feasible_and_beats_no_reflection() {
    let pb = PowerBudget::from_db(80.0, 60.0);
    let mut gains = 0;
    for seed in 0..20 {
        let ch = channels(8, seed);
        let aug = augment(&ch);
        let v = coordinate_descent(&ch, &pb, DEFAULT_ROUNDS, Complex64::new(0.01, 0.0)).unwrap();
        let fz = check_feasible(&v, &ch, &aug, &pb, 1e-6);
        if v.phis().iter().any(|p| p.norm_sqr() > 0.0) {
            assert!(fz.feasible, "seed {seed}: {:?}", fz.violations);
        }
        if sinr_bob(&v, &aug, &pb) > sinr_bob(&ReflectVector::no_reflection(8), &aug, &pb) {
            gains += 1;
        }
    }
    assert!(gains >= 15, "{gains}");
}

#[test]
fn coordinate_descent_on_dead_surface_reflects_nothing() {
    let mut ch = channels(4, 1);
    ch.h_rb = vec![Complex64::new(0.0, 0.0); 4];
    ch.h_re = vec![Complex64::new(0.0, 0.0); 4];
    let pb = PowerBudget::from_db(80.0, 60.0);
    let v = coordinate_descent(&ch, &pb, 2, Complex64::new(0.01, 0.0)).unwrap();
    assert_eq!(v, ReflectVector::no_reflection(4));
}

#[test]
fn single_element_descent_is_one_solve() {
    let ch = channels(1, 12);
    let pb = PowerBudget::from_db(80.0, 60.0);
    let init = Complex64::new(0.01, 0.0);
    let v = coordinate_descent(&ch, &pb, 1, init).unwrap();
    let out = solve_element(0, &ReflectVector::uniform(1, init), &ch, &pb).unwrap();
    assert_eq!(v.phi(0), out.phi);
}
