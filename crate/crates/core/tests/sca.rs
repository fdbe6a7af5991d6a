use num_complex::Complex64;
use surveil_core::sca::{sca_solve, update_point, ScaOptions, ScaOutcome};
use surveil_core::scenario::{generate_channels, ChannelSet, FadingParams, NodeLayout, RngStream};
use surveil_core::sinr::{
    augment, check_feasible, denominator_bob, denominator_eve, sinr_bob, sinr_eve, PowerBudget,
    ReflectVector,
};
use surveil_core::subproblem::denominators_at;

fn channels(n: usize, seed: u64) -> ChannelSet {
    generate_channels(&NodeLayout::default(), &FadingParams::default(), n, RngStream::new(seed, 5)).unwrap()
}

fn budget() -> PowerBudget {
    PowerBudget::from_db(80.0, 60.0)
}

/// Largest Bob SINR over a polar grid of the single element's disk,
/// subject to `SINR_E ≥ SINR_B`.
fn single_element_grid(ch: &ChannelSet, pb: &PowerBudget) -> f64 {
    let aug = augment(ch);
    let beta = surveil_core::sinr::element_budget(ch, pb, 0).unwrap();
    let mut best = sinr_bob(&ReflectVector::no_reflection(1), &aug, pb);
    if sinr_eve(&ReflectVector::no_reflection(1), &aug, pb) < best {
        best = 0.0;
    }
    for a in 0..720 {
        let th = a as f64 * std::f64::consts::TAU / 720.0;
        for r in 1..=200 {
            let rad = beta.sqrt() * r as f64 / 200.0;
            let v = ReflectVector::from_phis(&[Complex64::from_polar(rad, th)]).unwrap();
            let (b, e) = (sinr_bob(&v, &aug, pb), sinr_eve(&v, &aug, pb));
            if e >= b {
                best = best.max(b);
            }
        }
    }
    best
}

#[test]
fn single_element_matches_polar_grid() {
    let pb = budget();
    for seed in 0..6 {
        let ch = channels(1, seed);
        let aug = augment(&ch);
        let res = sca_solve(&ch, &aug, &pb, &ScaOptions::default()).unwrap();
        let got = sinr_bob(&res.v, &aug, &pb);
        let want = single_element_grid(&ch, &pb);
        assert!(got >= want * (1.0 - 1e-2), "seed {seed}: {got} vs grid {want} ({:?})", res.outcome);
        assert!(check_feasible(&res.v, &ch, &aug, &pb, 1e-6).feasible);
    }
}

#[test]
fn trace_is_monotone_and_output_feasible() {
    let pb = budget();
    for seed in 0..10 {
        let ch = channels(6, seed);
        let aug = augment(&ch);
        let res = sca_solve(&ch, &aug, &pb, &ScaOptions::default()).unwrap();
        let objs = res.trace.objectives();
        assert!(objs.windows(2).all(|w| w[1] >= w[0] - 1e-6), "{objs:?}");
        assert!(res.trace.rounds.len() <= ScaOptions::default().max_rounds);
        if res.outcome != ScaOutcome::InfeasibleFallback {
            assert!(check_feasible(&res.v, &ch, &aug, &pb, 1e-6).feasible);
            assert!(sinr_eve(&res.v, &aug, &pb) >= sinr_bob(&res.v, &aug, &pb) * (1.0 - 1e-6));
        }
    }
}

/// With Eve's links equal to Bob's, the inner approximation of
/// `SINR_E ≥ SINR_B` pins the iterate near its start, so the guarantee is
/// relative to the starting point rather than to switching the surface off.
#[test]
fn symmetric_links_never_lose_ground() {
    let pb = budget();
    let opts = ScaOptions::default();
    for seed in 0..3 {
        let ch = channels(4, seed);
        let sym = ChannelSet {
            h_ae: ch.h_ab,
            h_re: ch.h_rb.clone(),
            ..ch
        };
        let aug = augment(&sym);
        let res = sca_solve(&sym, &aug, &pb, &opts).unwrap();
        let start = ReflectVector::uniform(4, Complex64::new(opts.init_value[0], opts.init_value[1]));
        assert!(sinr_bob(&res.v, &aug, &pb) >= sinr_bob(&start, &aug, &pb) * (1.0 - 1e-9), "seed {seed}");
        assert!(check_feasible(&res.v, &sym, &aug, &pb, 1e-6).feasible);
    }
}

#[test]
fn impossible_eavesdropping_switches_surface_off() {
    let pb = budget();
    let mut ch = channels(3, 1);
    // Eve hears nothing and the surface cannot reach Bob.
    ch.h_ae = Complex64::new(0.0, 0.0);
    ch.h_re = vec![Complex64::new(0.0, 0.0); 3];
    ch.h_rb = vec![Complex64::new(0.0, 0.0); 3];
    let aug = augment(&ch);
    let res = sca_solve(&ch, &aug, &pb, &ScaOptions::default()).unwrap();
    assert_eq!(res.outcome, ScaOutcome::InfeasibleFallback);
    assert_eq!(res.v, ReflectVector::no_reflection(3));
}

#[test]
fn update_point_uses_true_denominators() {
    let pb = budget();
    let ch = channels(5, 2);
    let aug = augment(&ch);
    let lp = update_point(ReflectVector::no_reflection(5), &aug, &pb);
    assert_eq!((lp.b0, lp.e0), (pb.sigma_02, pb.sigma_02));

    let phis: Vec<Complex64> = (0..5).map(|k| Complex64::from_polar(3.0, k as f64)).collect();
    let v = ReflectVector::from_phis(&phis).unwrap();
    let lp = update_point(v.clone(), &aug, &pb);
    assert_eq!((lp.b0, lp.e0), denominators_at(&v, &aug, &pb));
    assert_eq!(lp.b0, denominator_bob(&v, &aug, &pb));
    assert_eq!(lp.e0, denominator_eve(&v, &aug, &pb));
    assert_eq!(lp.v0, v);
}

#[test]
fn trace_csv_header() {
    let pb = budget();
    let ch = channels(2, 0);
    let aug = augment(&ch);
    let res = sca_solve(&ch, &aug, &pb, &ScaOptions::default()).unwrap();
    let mut buf = Vec::new();
    res.trace.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("round,objective,sinr_b,sinr_e,status\n"));
    assert_eq!(text.lines().count(), res.trace.rounds.len() + 1);
}

#[test]
fn options_reject_nonsense() {
    let bad = ScaOptions {
        max_rounds: 0,
        ..ScaOptions::default()
    };
    assert!(bad.validate().is_err());
    let json = r#"{"max_rounds": 5, "obj_tol": 1e-3}"#;
    let opts: ScaOptions = serde_json::from_str(json).unwrap();
    assert_eq!(opts.max_rounds, 5);
    assert_eq!(opts.init_value, [0.01, 0.0]);
    assert!(serde_json::from_str::<ScaOptions>(r#"{"rounds": 5}"#).is_err());
}
