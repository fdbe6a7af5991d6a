use num_complex::Complex64;
use surveil_core::passive::{passive_optimize, passive_rate};
use surveil_core::scenario::{generate_channels, ChannelSet, FadingParams, NodeLayout, RngStream};
use surveil_core::sinr::{
    augment, eavesdrop_rate, eavesdrop_rate_within, PowerBudget, ReflectVector, REPORT_TOL,
};

fn channels(n: usize, seed: u64) -> ChannelSet {
    generate_channels(&NodeLayout::default(), &FadingParams::default(), n, RngStream::new(seed, 17)).unwrap()
}

/// Exhaustive search over `res × res` phase pairs.
fn grid_rate(ch: &ChannelSet, pb: &PowerBudget, res: usize) -> f64 {
    let aug = augment(ch);
    let pb = pb.passive();
    let step = std::f64::consts::TAU / res as f64;
    let mut best = 0.0f64;
    for a in 0..res {
        for b in 0..res {
            let v = ReflectVector::from_phis(&[
                Complex64::from_polar(1.0, a as f64 * step),
                Complex64::from_polar(1.0, b as f64 * step),
            ])
            .unwrap();
            best = best.max(eavesdrop_rate(&v, &aug, &pb).rate);
        }
    }
    best
}

#[test]
fn two_element_phases_match_grid_search() {
    let pb = PowerBudget::from_db(80.0, 60.0);
    for seed in 0..40 {
        let ch = channels(2, seed);
        let v = passive_optimize(&ch, &pb, 3).unwrap();
        let got = eavesdrop_rate_within(&v, &augment(&ch), &pb.passive(), REPORT_TOL).rate;
        let want = grid_rate(&ch, &pb, 720);
        assert!(got >= want - 1e-2, "seed {seed}: {got} vs grid {want}");
    }
}

#[test]
fn rate_delegates_to_zero_noise_budget() {
    let pb = PowerBudget::from_db(75.0, 60.0);
    let ch = channels(5, 2);
    let v = passive_optimize(&ch, &pb, 3).unwrap();
    let direct = eavesdrop_rate(&v, &augment(&ch), &pb.passive());
    assert_eq!(passive_rate(&v, &ch, &pb).unwrap(), direct);
}
