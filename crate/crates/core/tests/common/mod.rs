//! Shared generators and brute-force oracles for the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use surveil_core::geometry::{CaseId, ElementCoefficients};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random element coefficients whose geometry falls into `case`.
pub fn random_case<R: Rng>(rng: &mut R, case: CaseId) -> ElementCoefficients {
    use CaseId::*;
    let j = rng.random_range(0.5..2.0);
    let l: f64 = rng.random_range(-2.0..2.0);
    let m: f64 = rng.random_range(-2.0..2.0);
    let beta: f64 = rng.random_range(0.5..2.0);
    let rb = beta.sqrt();
    // Keeps the objective positive on the disk so relative comparisons work.
    let k = rng.random_range(1.0..2.0) + (l.abs() + m.abs()) * rb;
    let theta = rng.random_range(0.0..std::f64::consts::TAU);

    if case == HalfPlane {
        let a = Complex64::from_polar(rng.random_range(0.5..2.0), theta);
        let b = a.norm() * rb * rng.random_range(-1.5..1.5);
        let n = j;
        return ElementCoefficients::from_quadratics(j, k, l, m, n, k - b, l + a.re, m + a.im, beta);
    }

    let outer = matches!(
        case,
        OuterUnconstrained | OuterDiskExcluded | OuterHoleInside | OuterDisjoint | OuterCrossing
    );
    let nj = rng.random_range(0.2..2.0) * if outer { 1.0 } else { -1.0 };
    let (d1, z) = match case {
        OuterUnconstrained | InnerEmpty => (rng.random_range(0.0..2.0), -rng.random_range(0.05..1.0)),
        OuterDiskExcluded | InnerDiskInside => {
            let d1 = rng.random_range(0.0..1.0);
            let rz: f64 = rb + d1 + rng.random_range(0.05..1.0);
            (d1, rz * rz)
        }
        OuterHoleInside | InnerCircleInside => {
            let rz = rb * rng.random_range(0.1..0.9);
            let d1 = (rb - rz) * rng.random_range(0.0..0.95);
            (d1, rz * rz)
        }
        OuterDisjoint | InnerDisjoint => {
            let rz = rb * rng.random_range(0.1..1.5);
            (rb + rz + rng.random_range(0.05..1.0), rz * rz)
        }
        OuterCrossing | InnerCrossing => {
            let rz = rb * rng.random_range(0.3..1.5);
            let lo = (rb - rz).abs();
            let hi = rb + rz;
            (lo + (hi - lo) * rng.random_range(0.05..0.95), rz * rz)
        }
        HalfPlane => unreachable!(),
    };
    let (u, w) = (d1 * theta.cos(), d1 * theta.sin());
    let n = j + nj;
    let p = l - 2.0 * nj * u;
    let q = m - 2.0 * nj * w;
    let o = k - (z - u * u - w * w) * nj;
    ElementCoefficients::from_quadratics(j, k, l, m, n, o, p, q, beta)
}

fn margin_scale(ec: &ElementCoefficients) -> f64 {
    (ec.n - ec.j).abs() * ec.beta_up
        + ((ec.p - ec.l).abs() + (ec.q - ec.m).abs()) * ec.beta_up.sqrt()
        + (ec.k - ec.o).abs()
}

/// Budget and `Ē ≥ B̄` within roundoff.
pub fn feasible(ec: &ElementCoefficients, phi: Complex64) -> bool {
    phi.norm_sqr() <= ec.beta_up * (1.0 + 1e-9) && ec.margin(phi) >= -1e-9 * margin_scale(ec)
}

/// Largest objective over a `res × res` grid of the feasible region.
pub fn grid_best(ec: &ElementCoefficients, res: usize) -> Option<f64> {
    let r = ec.beta_up.sqrt();
    let step = 2.0 * r / (res - 1) as f64;
    let mut best: Option<f64> = None;
    for a in 0..res {
        for b in 0..res {
            let phi = Complex64::new(-r + a as f64 * step, -r + b as f64 * step);
            if phi.norm_sqr() <= ec.beta_up && ec.margin(phi) >= 0.0 {
                let f = ec.objective(phi);
                best = Some(best.map_or(f, |x| x.max(f)));
            }
        }
    }
    best
}

/// Uniform sample from the disk of squared radius `r2` centred at `c`.
pub fn sample_disk<R: Rng>(rng: &mut R, c: Complex64, r2: f64) -> Complex64 {
    let rad = (r2 * rng.random::<f64>()).sqrt();
    c + Complex64::from_polar(rad, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Best auxiliaries `[a, b, c, d, e]` of the linearized program for a fixed
/// augmented reflecting vector `v`, from the complex forms of its
/// constraints: each auxiliary is pushed to the bound that favours the
/// objective. `None` when no auxiliaries make `v` feasible (the disk
/// budgets are not checked).
pub fn p3_aux(
    aug: &surveil_core::sinr::AugmentedChannels,
    pb: &surveil_core::sinr::PowerBudget,
    v0: &[Complex64],
    b0: f64,
    e0: f64,
    v: &[Complex64],
) -> Option<[f64; 5]> {
    let dot = |h: &[Complex64], x: &[Complex64]| h.iter().zip(x).map(|(h, x)| h * x).sum::<Complex64>();
    let noise = |h: &[Complex64], x: &[Complex64]| {
        pb.sigma_r2 * h.iter().zip(x).map(|(h, x)| h.norm_sqr() * x.norm_sqr()).sum::<f64>() + pb.sigma_02
    };
    let lin = |h: &[Complex64], den0: f64, den: f64| {
        let g0 = dot(h, v0);
        2.0 * pb.p_a * (g0.conj() * dot(h, v)).re / den0 - pb.p_a * g0.norm_sqr() / (den0 * den0) * den
    };
    let b = noise(&aug.h_r_b, v);
    let e = noise(&aug.h_r_e, v);
    let a = lin(&aug.h_a_b, b0, b);
    let c = lin(&aug.h_a_e, e0, e);
    let cross: Complex64 = aug
        .h_r_b
        .iter()
        .zip(v0)
        .zip(v)
        .map(|((h, x0), x)| x0.conj() * h.norm_sqr() * x)
        .sum();
    let d = 2.0 * pb.sigma_r2 * cross.re - (noise(&aug.h_r_b, v0) - pb.sigma_02) + pb.sigma_02;
    let q = pb.p_a * dot(&aug.h_a_b, v).norm_sqr();
    if a < 0.0 || c < 0.0 || d < 0.0 || c * d < q {
        return None;
    }
    Some([a, b, c, d, e])
}

/// [`p3_aux`] laid out as a full program point.
pub fn p3_point(
    aug: &surveil_core::sinr::AugmentedChannels,
    pb: &surveil_core::sinr::PowerBudget,
    v0: &[Complex64],
    b0: f64,
    e0: f64,
    v: &[Complex64],
) -> Option<Vec<f64>> {
    let aux = p3_aux(aug, pb, v0, b0, e0, v)?;
    let n = v.len() - 1;
    let mut x: Vec<f64> = v[..n].iter().map(|p| p.re).collect();
    x.extend(v[..n].iter().map(|p| p.im));
    x.extend(aux);
    Some(x)
}
