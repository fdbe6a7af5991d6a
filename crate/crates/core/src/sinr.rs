//! Reflected power, Bob/Eve SINRs and the eavesdropping rate of a
//! reflecting vector.
//!
//! With `v = [φ₁ … φ_N, 1]ᵀ` and the augmented rows built by [`augment`],
//!
//! ```text
//! SINR_B = P_A |h_{A−B} v|² / (σ_r² ‖diag(h_{R−B})ᴴ v‖² + σ_0²)
//! ```
//!
//! and likewise for Eve. All quantities are linear; dB only appears at the
//! reporting boundary.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SurveilError};
use crate::scenario::{from_db, ChannelSet};

/// Augmented reflecting vector `[φ₁, …, φ_N, 1]`. Element indices used by
/// the accessors are zero-based.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectVector {
    v: Vec<Complex64>,
}

impl ReflectVector {
    pub fn from_phis(phis: &[Complex64]) -> Result<Self> {
        if phis.iter().any(|p| !p.is_finite()) {
            return Err(SurveilError::NonFinite("reflecting coefficient".into()));
        }
        let mut v = phis.to_vec();
        v.push(Complex64::new(1.0, 0.0));
        Ok(Self { v })
    }

    /// Accepts a full augmented vector; the last entry must be exactly 1.
    pub fn from_augmented(v: Vec<Complex64>) -> Result<Self> {
        match v.last() {
            Some(last) if *last == Complex64::new(1.0, 0.0) => {}
            _ => {
                return Err(SurveilError::Domain(
                    "augmented reflecting vector must end with 1".into(),
                ))
            }
        }
        if v.iter().any(|p| !p.is_finite()) {
            return Err(SurveilError::NonFinite("reflecting coefficient".into()));
        }
        Ok(Self { v })
    }

    /// `[0, …, 0, 1]`: the surface reflects nothing.
    pub fn no_reflection(n_elements: usize) -> Self {
        Self::uniform(n_elements, Complex64::new(0.0, 0.0))
    }

    pub fn uniform(n_elements: usize, phi: Complex64) -> Self {
        let mut v = vec![phi; n_elements];
        v.push(Complex64::new(1.0, 0.0));
        Self { v }
    }

    pub fn n_elements(&self) -> usize {
        self.v.len() - 1
    }

    pub fn phis(&self) -> &[Complex64] {
        &self.v[..self.v.len() - 1]
    }

    pub fn phi(&self, n: usize) -> Complex64 {
        self.v[n]
    }

    pub fn set_phi(&mut self, n: usize, phi: Complex64) {
        assert!(n < self.n_elements(), "element {n} out of range");
        self.v[n] = phi;
    }

    pub fn as_augmented(&self) -> &[Complex64] {
        &self.v
    }
}

/// Rows of the quadratic forms: `h_{A−B} = [h_RB ∘ h_AR, h_AB]`,
/// `h_{R−B} = [h_RB, 0]` and the Eve counterparts.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedChannels {
    pub h_a_b: Vec<Complex64>,
    pub h_a_e: Vec<Complex64>,
    pub h_r_b: Vec<Complex64>,
    pub h_r_e: Vec<Complex64>,
}

impl AugmentedChannels {
    pub fn n_elements(&self) -> usize {
        self.h_a_b.len() - 1
    }
}

pub fn augment(ch: &ChannelSet) -> AugmentedChannels {
    let zero = Complex64::new(0.0, 0.0);
    let cascade = |h_r: &[Complex64], direct: Complex64| -> Vec<Complex64> {
        h_r.iter()
            .zip(&ch.h_ar)
            .map(|(r, a)| r * a)
            .chain(std::iter::once(direct))
            .collect()
    };
    let pad = |h_r: &[Complex64]| -> Vec<Complex64> {
        h_r.iter().copied().chain(std::iter::once(zero)).collect()
    };
    AugmentedChannels {
        h_a_b: cascade(&ch.h_rb, ch.h_ab),
        h_a_e: cascade(&ch.h_re, ch.h_ae),
        h_r_b: pad(&ch.h_rb),
        h_r_e: pad(&ch.h_re),
    }
}

/// Transmit power, per-element amplification budget and noise powers, all
/// linear.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget {
    pub p_a: f64,
    pub p_max: f64,
    pub sigma_r2: f64,
    pub sigma_02: f64,
}

impl PowerBudget {
    /// Powers given in dB relative to the unit noise floor.
    pub fn from_db(p_a_db: f64, p_max_db: f64) -> Self {
        Self {
            p_a: from_db(p_a_db),
            p_max: from_db(p_max_db),
            sigma_r2: 1.0,
            sigma_02: 1.0,
        }
    }

    /// Same budget with the surface injecting no noise.
    pub fn passive(&self) -> Self {
        Self {
            sigma_r2: 0.0,
            ..*self
        }
    }

    pub fn validate_active(&self) -> Result<()> {
        if self.p_a > 0.0 && self.p_max > 0.0 && self.sigma_r2 > 0.0 && self.sigma_02 > 0.0 {
            Ok(())
        } else {
            Err(SurveilError::Domain(format!(
                "active scheme needs strictly positive powers, got {self:?}"
            )))
        }
    }

    pub fn validate_passive(&self) -> Result<()> {
        if self.p_a > 0.0 && self.sigma_r2 == 0.0 && self.sigma_02 > 0.0 {
            Ok(())
        } else {
            Err(SurveilError::Domain(format!(
                "passive evaluation needs sigma_r2 = 0 and positive powers, got {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinrReport {
    pub sinr_b: f64,
    pub sinr_e: f64,
    /// bps/Hz
    pub rate: f64,
    pub eavesdrop_ok: bool,
}

/// Relative slack on `SINR_E ≥ SINR_B` used when reporting optimizer
/// outputs, which land on that boundary up to solver accuracy.
pub const REPORT_TOL: f64 = 1e-6;

impl SinrReport {
    pub fn new(sinr_b: f64, sinr_e: f64) -> Self {
        Self::with_tolerance(sinr_b, sinr_e, 0.0)
    }

    /// Counts the eavesdropper as successful when `SINR_E ≥ SINR_B (1 − tol)`.
    pub fn with_tolerance(sinr_b: f64, sinr_e: f64, tol: f64) -> Self {
        let eavesdrop_ok = sinr_e >= sinr_b * (1.0 - tol);
        let rate = if eavesdrop_ok {
            (1.0 + sinr_b).log2()
        } else {
            0.0
        };
        Self {
            sinr_b,
            sinr_e,
            rate,
            eavesdrop_ok,
        }
    }
}

fn row_times(row: &[Complex64], v: &[Complex64]) -> Complex64 {
    row.iter().zip(v).map(|(h, x)| h * x).sum()
}

/// `‖diag(h)ᴴ v‖²`
fn weighted_norm2(h: &[Complex64], v: &[Complex64]) -> f64 {
    h.iter().zip(v).map(|(h, x)| h.norm_sqr() * x.norm_sqr()).sum()
}

/// Per-element budget on `|φ_n|²`: `P_max / (|h_AR^n|² P_A + σ_r²)`.
pub fn element_budget(ch: &ChannelSet, pb: &PowerBudget, n: usize) -> Result<f64> {
    let h = ch.h_ar.get(n).ok_or(SurveilError::IndexOutOfRange {
        index: n,
        len: ch.h_ar.len(),
    })?;
    Ok(pb.p_max / (h.norm_sqr() * pb.p_a + pb.sigma_r2))
}

/// Power reflected by element `n`: `|φ_n|² (|h_AR^n|² P_A + σ_r²)`.
pub fn element_power(v: &ReflectVector, ch: &ChannelSet, pb: &PowerBudget, n: usize) -> Result<f64> {
    if n >= v.n_elements() || n >= ch.h_ar.len() {
        return Err(SurveilError::IndexOutOfRange {
            index: n,
            len: v.n_elements().min(ch.h_ar.len()),
        });
    }
    Ok(v.phi(n).norm_sqr() * (ch.h_ar[n].norm_sqr() * pb.p_a + pb.sigma_r2))
}

/// Interference-plus-noise seen by Bob: `σ_r² ‖diag(h_{R−B})ᴴ v‖² + σ_0²`.
pub fn denominator_bob(v: &ReflectVector, aug: &AugmentedChannels, pb: &PowerBudget) -> f64 {
    pb.sigma_r2 * weighted_norm2(&aug.h_r_b, v.as_augmented()) + pb.sigma_02
}

pub fn denominator_eve(v: &ReflectVector, aug: &AugmentedChannels, pb: &PowerBudget) -> f64 {
    pb.sigma_r2 * weighted_norm2(&aug.h_r_e, v.as_augmented()) + pb.sigma_02
}

pub fn sinr_bob(v: &ReflectVector, aug: &AugmentedChannels, pb: &PowerBudget) -> f64 {
    pb.p_a * row_times(&aug.h_a_b, v.as_augmented()).norm_sqr() / denominator_bob(v, aug, pb)
}

pub fn sinr_eve(v: &ReflectVector, aug: &AugmentedChannels, pb: &PowerBudget) -> f64 {
    pb.p_a * row_times(&aug.h_a_e, v.as_augmented()).norm_sqr() / denominator_eve(v, aug, pb)
}

/// `log₂(1 + SINR_B)` when Eve's SINR is at least Bob's, else 0.
pub fn eavesdrop_rate(v: &ReflectVector, aug: &AugmentedChannels, pb: &PowerBudget) -> SinrReport {
    SinrReport::new(sinr_bob(v, aug, pb), sinr_eve(v, aug, pb))
}

/// [`eavesdrop_rate`] with a relative slack on the eavesdropping condition.
pub fn eavesdrop_rate_within(
    v: &ReflectVector,
    aug: &AugmentedChannels,
    pb: &PowerBudget,
    tol: f64,
) -> SinrReport {
    SinrReport::with_tolerance(sinr_bob(v, aug, pb), sinr_eve(v, aug, pb), tol)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// C1: amplification budget of element `index` exceeded.
    Budget { index: usize, power: f64, budget: f64 },
    /// C2: the fixed last entry is not 1.
    FixedEntry,
    /// C3: Eve's SINR below Bob's.
    Eavesdrop { sinr_b: f64, sinr_e: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Checks C1–C3 with relative tolerance `tol`.
pub fn check_feasible(
    v: &ReflectVector,
    ch: &ChannelSet,
    aug: &AugmentedChannels,
    pb: &PowerBudget,
    tol: f64,
) -> Feasibility {
    let mut violations = Vec::new();
    for (n, phi) in v.phis().iter().enumerate() {
        let budget = pb.p_max / (ch.h_ar[n].norm_sqr() * pb.p_a + pb.sigma_r2);
        let power = phi.norm_sqr();
        if power > budget * (1.0 + tol) {
            violations.push(Violation::Budget {
                index: n,
                power,
                budget,
            });
        }
    }
    if v.as_augmented().last() != Some(&Complex64::new(1.0, 0.0)) {
        violations.push(Violation::FixedEntry);
    }
    let sinr_b = sinr_bob(v, aug, pb);
    let sinr_e = sinr_eve(v, aug, pb);
    if sinr_e < sinr_b * (1.0 - tol) {
        violations.push(Violation::Eavesdrop { sinr_b, sinr_e });
    }
    Feasibility {
        feasible: violations.is_empty(),
        violations,
    }
}
