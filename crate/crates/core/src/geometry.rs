//! Element-wise suboptimal method: with every other coefficient fixed, the
//! worst-case SINRs of element `n` are planar quadratics in `(φ_r, φ_i)`
//!
//! ```text
//! B̄(φ) = J|φ|² + K + Lφ_r + Mφ_i      Ē(φ) = N|φ|² + O + Pφ_r + Qφ_i
//! ```
//!
//! so maximizing `B̄` subject to `|φ|² ≤ β_up` and `Ē ≥ B̄` reduces to
//! finding the point of a disk intersected with a disk (or its complement)
//! that lies farthest from the centre `(S, T)` of the objective's level
//! circles.
//!
//! The Bob side drops element `n`'s own amplified noise and the Eve side
//! charges it at the full budget, so `B̄ ≥ SINR_B` and `Ē ≤ SINR_E` on the
//! disk: any point feasible here is feasible for the full problem.

use num_complex::Complex64;

use crate::error::{Result, SurveilError};
use crate::scenario::ChannelSet;
use crate::sinr::{
    augment, eavesdrop_rate_within, element_budget, PowerBudget, ReflectVector, REPORT_TOL,
};

/// `|N − J|` below this fraction of `max(1, |N|, |J|)` is treated as zero.
const DEGENERATE_REL: f64 = 1e-12;
/// `J` below this is treated as a linear objective.
const FLAT_OBJECTIVE: f64 = 1e-15;
/// Relative slack when testing whether a boundary point satisfies a circle
/// constraint.
const BOUNDARY_SLACK: f64 = 1e-12;

/// Contributions of all elements except `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialChannels {
    /// `h_AB + Σ_{j≠n} h_AR^j h_RB^j φ_j`
    pub h_ab_not_n: Complex64,
    /// `Σ_{j≠n} |h_RB^j φ_j|²`
    pub h_rb_not_n: f64,
    pub h_ae_not_n: Complex64,
    pub h_re_not_n: f64,
}

pub fn partial_channels(n: usize, v: &ReflectVector, ch: &ChannelSet) -> Result<PartialChannels> {
    let len = ch.n_elements();
    if n >= len || v.n_elements() != len {
        return Err(SurveilError::IndexOutOfRange {
            index: n,
            len: len.min(v.n_elements()),
        });
    }
    let mut pc = PartialChannels {
        h_ab_not_n: ch.h_ab,
        h_rb_not_n: 0.0,
        h_ae_not_n: ch.h_ae,
        h_re_not_n: 0.0,
    };
    for (j, phi) in v.phis().iter().enumerate() {
        if j == n {
            continue;
        }
        pc.h_ab_not_n += ch.h_ar[j] * ch.h_rb[j] * phi;
        pc.h_ae_not_n += ch.h_ar[j] * ch.h_re[j] * phi;
        pc.h_rb_not_n += (ch.h_rb[j] * phi).norm_sqr();
        pc.h_re_not_n += (ch.h_re[j] * phi).norm_sqr();
    }
    Ok(pc)
}

/// Coefficients of the two planar quadratics plus the derived geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementCoefficients {
    pub j: f64,
    pub k: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub o: f64,
    pub p: f64,
    pub q: f64,
    /// Budget on `|φ_n|²`.
    pub beta_up: f64,
    /// Centre of the objective's level circles; non-finite when `J = 0`.
    pub s: f64,
    pub t: f64,
    /// Centre and squared radius of the boundary `Ē = B̄`; NaN when
    /// `N − J` is degenerate.
    pub u: f64,
    pub w: f64,
    pub z: f64,
    /// Distance from `(U, W)` to the origin.
    pub d1: f64,
}

impl ElementCoefficients {
    /// Builds the derived fields from the eight quadratic coefficients.
    #[allow(clippy::too_many_arguments)]
    pub fn from_quadratics(
        j: f64,
        k: f64,
        l: f64,
        m: f64,
        n: f64,
        o: f64,
        p: f64,
        q: f64,
        beta_up: f64,
    ) -> Self {
        let mut ec = Self {
            j,
            k,
            l,
            m,
            n,
            o,
            p,
            q,
            beta_up,
            s: -l / (2.0 * j),
            t: -m / (2.0 * j),
            u: f64::NAN,
            w: f64::NAN,
            z: f64::NAN,
            d1: f64::NAN,
        };
        if !ec.is_degenerate() {
            let nj = n - j;
            ec.u = -(p - l) / (2.0 * nj);
            ec.w = -(q - m) / (2.0 * nj);
            ec.z = (k - o) / nj + ((p - l).powi(2) + (q - m).powi(2)) / (4.0 * nj * nj);
            ec.d1 = ec.u.hypot(ec.w);
        }
        ec
    }

    /// `N − J ≈ 0`: the constraint boundary is a line, not a circle.
    pub fn is_degenerate(&self) -> bool {
        (self.n - self.j).abs() <= DEGENERATE_REL * self.n.abs().max(self.j.abs()).max(1.0)
    }

    /// Worst-case Bob SINR `B̄(φ)`.
    pub fn objective(&self, phi: Complex64) -> f64 {
        self.j * phi.norm_sqr() + self.k + self.l * phi.re + self.m * phi.im
    }

    /// Worst-case Eve SINR `Ē(φ)`.
    pub fn eve(&self, phi: Complex64) -> f64 {
        self.n * phi.norm_sqr() + self.o + self.p * phi.re + self.q * phi.im
    }

    /// `Ē(φ) − B̄(φ)`; non-negative exactly on the feasible side.
    pub fn margin(&self, phi: Complex64) -> f64 {
        (self.n - self.j) * phi.norm_sqr()
            + (self.p - self.l) * phi.re
            + (self.q - self.m) * phi.im
            - (self.k - self.o)
    }

    /// Direction in which `B̄` grows fastest away from a circle centred at
    /// `c`: `c − (S, T)` scaled by `2J`, which stays finite as `J → 0`.
    fn ascent_from(&self, c: Complex64) -> Complex64 {
        let j = if self.j <= FLAT_OBJECTIVE { 0.0 } else { self.j };
        2.0 * j * c + Complex64::new(self.l, self.m)
    }

    fn center(&self) -> Complex64 {
        Complex64::new(self.u, self.w)
    }

    /// Whether `φ` lies outside (`outside = true`) or inside the circle
    /// `|φ − (U, W)|² = Z`, up to roundoff.
    fn ring_side(&self, phi: Complex64, outside: bool) -> bool {
        let d2 = (phi - self.center()).norm_sqr();
        let slack = BOUNDARY_SLACK * self.z.abs().max(d2).max(self.beta_up);
        if outside {
            d2 >= self.z - slack
        } else {
            d2 <= self.z + slack
        }
    }

    fn in_disk(&self, phi: Complex64) -> bool {
        phi.norm_sqr() <= self.beta_up * (1.0 + BOUNDARY_SLACK)
    }
}

/// Coefficients for element `n` given the rest of the surface.
pub fn element_coefficients(
    n: usize,
    pc: &PartialChannels,
    ch: &ChannelSet,
    pb: &PowerBudget,
) -> Result<ElementCoefficients> {
    let beta_up = element_budget(ch, pb, n)?;
    let g_b = ch.h_ar[n] * ch.h_rb[n];
    let g_e = ch.h_ar[n] * ch.h_re[n];
    let d_b = pb.sigma_r2 * pc.h_rb_not_n + pb.sigma_02;
    // Element n's own amplified noise at Eve, charged at the full budget.
    let own = if pb.sigma_r2 > 0.0 {
        pb.sigma_r2 * ch.h_re[n].norm_sqr() * beta_up
    } else {
        0.0
    };
    let d_e = own + pb.sigma_r2 * pc.h_re_not_n + pb.sigma_02;
    let cross_b = g_b * pc.h_ab_not_n.conj();
    let cross_e = g_e * pc.h_ae_not_n.conj();
    Ok(ElementCoefficients::from_quadratics(
        pb.p_a * g_b.norm_sqr() / d_b,
        pb.p_a * pc.h_ab_not_n.norm_sqr() / d_b,
        2.0 * pb.p_a * cross_b.re / d_b,
        -2.0 * pb.p_a * cross_b.im / d_b,
        pb.p_a * g_e.norm_sqr() / d_e,
        pb.p_a * pc.h_ae_not_n.norm_sqr() / d_e,
        2.0 * pb.p_a * cross_e.re / d_e,
        -2.0 * pb.p_a * cross_e.im / d_e,
        beta_up,
    ))
}

/// Point of `|φ|² ≤ β_up` farthest from `(S, T)`.
pub fn candidate_gamma(ec: &ElementCoefficients) -> Complex64 {
    on_circle(Complex64::new(0.0, 0.0), ec.beta_up.sqrt(), ec.ascent_from(Complex64::new(0.0, 0.0)))
}

/// Point of the disk `|φ − (U, W)|² ≤ Z` farthest from `(S, T)`.
pub fn candidate_eta(ec: &ElementCoefficients) -> Option<Complex64> {
    if !(ec.z > 0.0) {
        return None;
    }
    let c = ec.center();
    Some(on_circle(c, ec.z.sqrt(), ec.ascent_from(c)))
}

/// `c + r·dir/|dir|`, with `dir = 0` resolved towards +real.
fn on_circle(c: Complex64, r: f64, dir: Complex64) -> Complex64 {
    let len = dir.norm();
    if len > 0.0 && len.is_finite() {
        c + dir * (r / len)
    } else {
        c + Complex64::new(r, 0.0)
    }
}

/// Points of the circle `|φ| = r` on the line `a·φ = κ` (`a` read as a
/// real 2-vector).
fn circle_line(r: f64, a: Complex64, kappa: f64) -> Option<(Complex64, Complex64)> {
    let len = a.norm();
    if !(len > 0.0) {
        return None;
    }
    let dir = a / len;
    let dist = kappa / len;
    if dist.abs() > r {
        return None;
    }
    let foot = dir * dist;
    let half = (r * r - dist * dist).max(0.0).sqrt();
    let perp = Complex64::new(-dir.im, dir.re);
    Some((foot + perp * half, foot - perp * half))
}

/// Intersections of `|φ|² = β_up` with `|φ − (U, W)|² = Z`.
pub fn circle_intersections(ec: &ElementCoefficients) -> Option<(Complex64, Complex64)> {
    if !(ec.z > 0.0) || ec.d1 == 0.0 {
        return None;
    }
    let (rb, rz) = (ec.beta_up.sqrt(), ec.z.sqrt());
    if (rb - rz).abs() > ec.d1 || ec.d1 > rb + rz {
        return None;
    }
    // Subtracting the circle equations leaves the radical line
    // 2(U, W)·φ = β_up − Z + d1².
    circle_line(rb, 2.0 * ec.center(), ec.beta_up - ec.z + ec.d1 * ec.d1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseId {
    /// `N > J`, `Z ≤ 0`: the constraint holds everywhere.
    OuterUnconstrained,
    /// `N > J`: the disk lies inside the excluded circle.
    OuterDiskExcluded,
    /// `N > J`: the excluded circle lies strictly inside the disk.
    OuterHoleInside,
    /// `N > J`: the excluded circle misses the disk.
    OuterDisjoint,
    /// `N > J`: the circles cross.
    OuterCrossing,
    /// `N < J`, `Z ≤ 0`: the allowed circle is empty.
    InnerEmpty,
    /// `N < J`: the disk lies inside the allowed circle.
    InnerDiskInside,
    /// `N < J`: the allowed circle lies strictly inside the disk.
    InnerCircleInside,
    /// `N < J`: the allowed circle misses the disk.
    InnerDisjoint,
    /// `N < J`: the circles cross.
    InnerCrossing,
    /// `N ≈ J`: the constraint is a half-plane.
    HalfPlane,
}

impl CaseId {
    pub const ALL: [CaseId; 11] = [
        CaseId::OuterUnconstrained,
        CaseId::OuterDiskExcluded,
        CaseId::OuterHoleInside,
        CaseId::OuterDisjoint,
        CaseId::OuterCrossing,
        CaseId::InnerEmpty,
        CaseId::InnerDiskInside,
        CaseId::InnerCircleInside,
        CaseId::InnerDisjoint,
        CaseId::InnerCrossing,
        CaseId::HalfPlane,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Candidate {
    Gamma,
    Eta,
    Epsilon1,
    Epsilon2,
    Origin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseOutcome {
    pub case_id: CaseId,
    pub phi: Complex64,
    /// Candidates that were examined, in evaluation order.
    pub candidates: Vec<(Candidate, Complex64)>,
}

/// Best of the crossing points by objective.
fn better(ec: &ElementCoefficients, a: Complex64, b: Complex64) -> (Candidate, Complex64) {
    if ec.objective(b) > ec.objective(a) {
        (Candidate::Epsilon2, b)
    } else {
        (Candidate::Epsilon1, a)
    }
}

/// Runs the case analysis on precomputed coefficients.
pub fn solve_coefficients(ec: &ElementCoefficients) -> CaseOutcome {
    let mut out = case_machine(ec);
    // An element that cannot move the objective is switched off when that
    // is allowed, rather than spending its budget for nothing.
    let origin = Complex64::new(0.0, 0.0);
    if ec.j <= FLAT_OBJECTIVE && ec.l == 0.0 && ec.m == 0.0 && ec.margin(origin) >= 0.0 {
        out.phi = origin;
    }
    out
}

fn case_machine(ec: &ElementCoefficients) -> CaseOutcome {
    let origin = Complex64::new(0.0, 0.0);
    let gamma = candidate_gamma(ec);
    let mut candidates = vec![(Candidate::Gamma, gamma)];
    let done = |case_id, (kind, phi): (Candidate, Complex64), mut candidates: Vec<_>| {
        if kind == Candidate::Origin {
            candidates.push((Candidate::Origin, origin));
        }
        CaseOutcome {
            case_id,
            phi,
            candidates,
        }
    };
    let zero = (Candidate::Origin, origin);

    if ec.is_degenerate() {
        // (P−L)φ_r + (Q−M)φ_i ≥ K − O.
        let a = Complex64::new(ec.p - ec.l, ec.q - ec.m);
        let b = ec.k - ec.o;
        let slack = BOUNDARY_SLACK * b.abs().max(a.norm() * ec.beta_up.sqrt());
        if a.re * gamma.re + a.im * gamma.im >= b - slack {
            return done(CaseId::HalfPlane, (Candidate::Gamma, gamma), candidates);
        }
        return match circle_line(ec.beta_up.sqrt(), a, b) {
            Some((e1, e2)) => {
                candidates.push((Candidate::Epsilon1, e1));
                candidates.push((Candidate::Epsilon2, e2));
                done(CaseId::HalfPlane, better(ec, e1, e2), candidates)
            }
            None => done(CaseId::HalfPlane, zero, candidates),
        };
    }

    let (rb, rz) = (ec.beta_up.sqrt(), ec.z.max(0.0).sqrt());
    let d1 = ec.d1;
    if ec.n - ec.j > 0.0 {
        if ec.z <= 0.0 {
            return done(CaseId::OuterUnconstrained, (Candidate::Gamma, gamma), candidates);
        }
        if d1 + rb < rz {
            return done(CaseId::OuterDiskExcluded, zero, candidates);
        }
        if d1 + rz < rb {
            return done(CaseId::OuterHoleInside, (Candidate::Gamma, gamma), candidates);
        }
        if d1 > rb + rz {
            return done(CaseId::OuterDisjoint, (Candidate::Gamma, gamma), candidates);
        }
        if ec.ring_side(gamma, true) {
            return done(CaseId::OuterCrossing, (Candidate::Gamma, gamma), candidates);
        }
        match circle_intersections(ec) {
            Some((e1, e2)) => {
                candidates.push((Candidate::Epsilon1, e1));
                candidates.push((Candidate::Epsilon2, e2));
                let pick = if (e2 - gamma).norm_sqr() < (e1 - gamma).norm_sqr() {
                    (Candidate::Epsilon2, e2)
                } else {
                    (Candidate::Epsilon1, e1)
                };
                done(CaseId::OuterCrossing, pick, candidates)
            }
            None => done(CaseId::OuterCrossing, zero, candidates),
        }
    } else {
        if ec.z <= 0.0 {
            return done(CaseId::InnerEmpty, zero, candidates);
        }
        let eta = candidate_eta(ec).expect("Z > 0");
        candidates.push((Candidate::Eta, eta));
        if d1 + rb < rz {
            return done(CaseId::InnerDiskInside, (Candidate::Gamma, gamma), candidates);
        }
        if d1 + rz < rb {
            return done(CaseId::InnerCircleInside, (Candidate::Eta, eta), candidates);
        }
        if d1 > rb + rz {
            return done(CaseId::InnerDisjoint, zero, candidates);
        }
        if ec.ring_side(gamma, false) {
            return done(CaseId::InnerCrossing, (Candidate::Gamma, gamma), candidates);
        }
        if ec.in_disk(eta) {
            return done(CaseId::InnerCrossing, (Candidate::Eta, eta), candidates);
        }
        match circle_intersections(ec) {
            Some((e1, e2)) => {
                candidates.push((Candidate::Epsilon1, e1));
                candidates.push((Candidate::Epsilon2, e2));
                done(CaseId::InnerCrossing, better(ec, e1, e2), candidates)
            }
            None => done(CaseId::InnerCrossing, zero, candidates),
        }
    }
}

/// Best coefficient for element `n` with the others held at `v`.
pub fn solve_element(
    n: usize,
    v: &ReflectVector,
    ch: &ChannelSet,
    pb: &PowerBudget,
) -> Result<CaseOutcome> {
    let pc = partial_channels(n, v, ch)?;
    let ec = element_coefficients(n, &pc, ch, pb)?;
    let mut out = solve_coefficients(&ec);
    // Clear roundoff so the budget holds exactly.
    let p = out.phi.norm_sqr();
    if p > ec.beta_up {
        out.phi *= (ec.beta_up / p).sqrt();
    }
    Ok(out)
}

pub const DEFAULT_ROUNDS: usize = 3;

/// Sweeps the elements `rounds` times, replacing each coefficient by its
/// element-wise optimum. Starts from `init` on every element (clipped to
/// the budget).
///
/// An element whose feasible region is empty is switched off, which can
/// leave the whole vector violating `SINR_E ≥ SINR_B`; the iterate with the
/// highest Bob SINR among those satisfying it is returned (the last iterate
/// if none does).
pub fn coordinate_descent(
    ch: &ChannelSet,
    pb: &PowerBudget,
    rounds: usize,
    init: Complex64,
) -> Result<ReflectVector> {
    pb.validate_active()?;
    if rounds == 0 {
        return Err(SurveilError::Config("coordinate descent needs at least one round".into()));
    }
    let n = ch.n_elements();
    let aug = augment(ch);
    let mut phis = Vec::with_capacity(n);
    for k in 0..n {
        let budget = element_budget(ch, pb, k)?;
        let p = init.norm_sqr();
        phis.push(if p > budget { init * (budget / p).sqrt() } else { init });
    }
    let mut v = ReflectVector::from_phis(&phis)?;
    let mut best: Option<(f64, ReflectVector)> = None;
    let mut consider = |v: &ReflectVector| {
        let rep = eavesdrop_rate_within(v, &aug, pb, REPORT_TOL);
        if rep.eavesdrop_ok && best.as_ref().is_none_or(|(b, _)| rep.sinr_b >= *b) {
            best = Some((rep.sinr_b, v.clone()));
        }
    };
    consider(&v);
    for _ in 0..rounds {
        for k in 0..n {
            let out = solve_element(k, &v, ch, pb)?;
            v.set_phi(k, out.phi);
            consider(&v);
        }
    }
    Ok(best.map_or(v, |(_, b)| b))
}
