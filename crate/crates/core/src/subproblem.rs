//! Convex inner approximation of the eavesdropping problem around a
//! linearization point, emitted as a [`ConeProgram`].
//!
//! Real variables are laid out as
//!
//! ```text
//! x = [Re v₁ … Re v_N, Im v₁ … Im v_N, a, b, c, d, e]
//! ```
//!
//! where `a` is the objective (a lower bound on Bob's SINR), `b`/`e` upper
//! bound Bob's/Eve's interference-plus-noise, and `c`, `d` split the
//! eavesdropping condition into `P_A|h_{A−B}v|² ≤ c·d`, `d ≤ D_B(v)` and
//! `c ≤ SINR_E`. The fixed last entry of `v` is folded into offsets.
//!
//! Quadratic-over-linear terms and convex quadratics that appear on the
//! "greater-than" side are replaced by their first-order Taylor expansions,
//! which under-estimate them; every feasible point of the emitted program is
//! therefore feasible for the original problem.

use num_complex::Complex64;
use socp::{ConeProgram, LinearIneq, SocBlock};

use crate::error::{Result, SurveilError};
use crate::scenario::ChannelSet;
use crate::sinr::{
    denominator_bob, denominator_eve, element_budget, sinr_bob, AugmentedChannels, PowerBudget,
    ReflectVector,
};

/// Group label of the auxiliary-variable bounds, which are not part of the
/// approximated problem proper.
pub const BOUND_GROUP: &str = "bound";

/// Variable indices for a surface with `n` elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
}

impl Layout {
    pub fn re(&self, k: usize) -> usize {
        k
    }
    pub fn im(&self, k: usize) -> usize {
        self.n + k
    }
    pub fn a(&self) -> usize {
        2 * self.n
    }
    pub fn b(&self) -> usize {
        2 * self.n + 1
    }
    pub fn c(&self) -> usize {
        2 * self.n + 2
    }
    pub fn d(&self) -> usize {
        2 * self.n + 3
    }
    pub fn e(&self) -> usize {
        2 * self.n + 4
    }
    pub fn n_vars(&self) -> usize {
        2 * self.n + 5
    }

    fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.n).map(|k| format!("re_v{k}")).collect();
        names.extend((1..=self.n).map(|k| format!("im_v{k}")));
        names.extend(["a", "b", "c", "d", "e"].map(String::from));
        names
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizationPoint {
    pub v0: ReflectVector,
    /// Bob's interference-plus-noise at `v0`.
    pub b0: f64,
    /// Eve's interference-plus-noise at `v0`.
    pub e0: f64,
}

impl LinearizationPoint {
    /// Anchors the expansion on the true denominators at `v0`.
    pub fn at(v0: ReflectVector, aug: &AugmentedChannels, pb: &PowerBudget) -> Self {
        let (b0, e0) = denominators_at(&v0, aug, pb);
        Self { v0, b0, e0 }
    }
}

pub fn denominators_at(v0: &ReflectVector, aug: &AugmentedChannels, pb: &PowerBudget) -> (f64, f64) {
    (denominator_bob(v0, aug, pb), denominator_eve(v0, aug, pb))
}

fn row_times(row: &[Complex64], v: &[Complex64]) -> Complex64 {
    row.iter().zip(v).map(|(h, x)| h * x).sum()
}

/// `aux ≤ 2P_A Re(g* h v)/den0 − P_A|g|² den/den0²` with `g = h·v0`, as a
/// `≤` row.
fn linearized_ratio(
    lay: Layout,
    h: &[Complex64],
    v0: &[Complex64],
    p_a: f64,
    den0: f64,
    aux: usize,
    den: usize,
    group: &str,
) -> LinearIneq {
    let n = lay.n;
    let g = row_times(h, v0);
    let mut row = vec![0.0; lay.n_vars()];
    for k in 0..n {
        let q = g.conj() * h[k];
        row[lay.re(k)] = -2.0 * p_a * q.re / den0;
        row[lay.im(k)] = 2.0 * p_a * q.im / den0;
    }
    row[den] = p_a * g.norm_sqr() / (den0 * den0);
    row[aux] = 1.0;
    LinearIneq {
        row,
        rhs: 2.0 * p_a * (g.conj() * h[n]).re / den0,
        group: group.to_string(),
    }
}

/// `‖[σ_r diag(h)ᴴ v, (den − σ_0² − 1)/2]‖ ≤ (den − σ_0² + 1)/2`, i.e.
/// `σ_r² Σ|h_k|²|v_k|² + σ_0² ≤ den`.
fn noise_cone(lay: Layout, h: &[Complex64], pb: &PowerBudget, den: usize, group: &str) -> SocBlock {
    let nv = lay.n_vars();
    let sr = pb.sigma_r2.sqrt();
    let mut a = Vec::with_capacity(2 * lay.n + 1);
    for k in 0..lay.n {
        // conj(h)·v = (h_r v_r + h_i v_i) + j(h_r v_i − h_i v_r)
        let mut re = vec![0.0; nv];
        re[lay.re(k)] = sr * h[k].re;
        re[lay.im(k)] = sr * h[k].im;
        let mut im = vec![0.0; nv];
        im[lay.re(k)] = -sr * h[k].im;
        im[lay.im(k)] = sr * h[k].re;
        a.push(re);
        a.push(im);
    }
    let mut last = vec![0.0; nv];
    last[den] = 0.5;
    a.push(last);
    let mut b = vec![0.0; 2 * lay.n];
    b.push((-pb.sigma_02 - 1.0) / 2.0);
    let mut c = vec![0.0; nv];
    c[den] = 0.5;
    SocBlock {
        a,
        b,
        c,
        d: (1.0 - pb.sigma_02) / 2.0,
        group: group.to_string(),
    }
}

fn bound(lay: Layout, var: usize, lower: f64) -> LinearIneq {
    let mut row = vec![0.0; lay.n_vars()];
    row[var] = -1.0;
    LinearIneq {
        row,
        rhs: -lower,
        group: BOUND_GROUP.to_string(),
    }
}

/// Builds the convex subproblem around `lp`.
pub fn build_subproblem(
    aug: &AugmentedChannels,
    ch: &ChannelSet,
    pb: &PowerBudget,
    lp: &LinearizationPoint,
) -> Result<ConeProgram> {
    let n = aug.n_elements();
    if ch.n_elements() != n || lp.v0.n_elements() != n {
        return Err(SurveilError::Domain(format!(
            "subproblem size mismatch: channels {}, augmented {n}, point {}",
            ch.n_elements(),
            lp.v0.n_elements()
        )));
    }
    let finite = |h: &[Complex64]| h.iter().all(|z| z.is_finite());
    if !(finite(&aug.h_a_b) && finite(&aug.h_a_e) && finite(&aug.h_r_b) && finite(&aug.h_r_e)) {
        return Err(SurveilError::NonFinite("channel coefficients".into()));
    }
    if !(lp.b0 >= pb.sigma_02 && lp.e0 >= pb.sigma_02) || !lp.b0.is_finite() || !lp.e0.is_finite() {
        return Err(SurveilError::Domain(format!(
            "linearization denominators must be at least the noise floor, got b0={}, e0={}",
            lp.b0, lp.e0
        )));
    }

    let lay = Layout { n };
    let nv = lay.n_vars();
    let v0 = lp.v0.as_augmented();
    let mut cp = ConeProgram::new(nv);
    cp.var_names = lay.names();
    cp.objective[lay.a()] = 1.0;

    // Per-element amplification budget.
    for k in 0..n {
        let mut re = vec![0.0; nv];
        re[lay.re(k)] = 1.0;
        let mut im = vec![0.0; nv];
        im[lay.im(k)] = 1.0;
        cp.soc_blocks.push(SocBlock {
            a: vec![re, im],
            b: vec![0.0, 0.0],
            c: vec![0.0; nv],
            d: element_budget(ch, pb, k)?.sqrt(),
            group: "C1".into(),
        });
    }

    cp.linear_ineqs.push(linearized_ratio(
        lay, &aug.h_a_b, v0, pb.p_a, lp.b0, lay.a(), lay.b(), "C4'",
    ));
    cp.soc_blocks.push(noise_cone(lay, &aug.h_r_b, pb, lay.b(), "C5'"));
    cp.linear_ineqs.push(linearized_ratio(
        lay, &aug.h_a_e, v0, pb.p_a, lp.e0, lay.c(), lay.e(), "C8",
    ));
    cp.soc_blocks.push(noise_cone(lay, &aug.h_r_e, pb, lay.e(), "C9"));

    // P_A|h_{A−B} v|² ≤ c·d as a rotated cone.
    {
        let sp = pb.p_a.sqrt();
        let h = &aug.h_a_b;
        let mut head = vec![0.0; nv];
        head[lay.c()] = 0.5;
        head[lay.d()] = -0.5;
        let mut re = vec![0.0; nv];
        let mut im = vec![0.0; nv];
        for k in 0..n {
            re[lay.re(k)] = sp * h[k].re;
            re[lay.im(k)] = -sp * h[k].im;
            im[lay.re(k)] = sp * h[k].im;
            im[lay.im(k)] = sp * h[k].re;
        }
        let mut c = vec![0.0; nv];
        c[lay.c()] = 0.5;
        c[lay.d()] = 0.5;
        cp.soc_blocks.push(SocBlock {
            a: vec![head, re, im],
            b: vec![0.0, sp * h[n].re, sp * h[n].im],
            c,
            d: 0.0,
            group: "C10'".into(),
        });
    }

    // d ≤ σ_r²(2Re(v0ᴴ H_{R−B} v) − v0ᴴ H_{R−B} v0) + σ_0².
    {
        let mut row = vec![0.0; nv];
        row[lay.d()] = 1.0;
        let mut quad0 = 0.0;
        for k in 0..n {
            let w = aug.h_r_b[k].norm_sqr();
            row[lay.re(k)] = -2.0 * pb.sigma_r2 * w * v0[k].re;
            row[lay.im(k)] = -2.0 * pb.sigma_r2 * w * v0[k].im;
            quad0 += w * v0[k].norm_sqr();
        }
        cp.linear_ineqs.push(LinearIneq {
            row,
            rhs: pb.sigma_02 - pb.sigma_r2 * quad0,
            group: "C11'".into(),
        });
    }

    cp.linear_ineqs.push(bound(lay, lay.a(), 0.0));
    cp.linear_ineqs.push(bound(lay, lay.b(), pb.sigma_02));
    cp.linear_ineqs.push(bound(lay, lay.c(), 0.0));
    cp.linear_ineqs.push(bound(lay, lay.e(), pb.sigma_02));

    cp.validate()?;
    Ok(cp)
}

/// Constraint groups of the approximated problem, excluding the auxiliary
/// bounds.
pub fn constraint_groups(cp: &ConeProgram) -> Vec<&str> {
    cp.groups().into_iter().filter(|g| *g != BOUND_GROUP).collect()
}

/// The point of the program's variable space corresponding to the expansion
/// point itself.
pub fn taylor_point(aug: &AugmentedChannels, pb: &PowerBudget, lp: &LinearizationPoint) -> Vec<f64> {
    let n = lp.v0.n_elements();
    let lay = Layout { n };
    let mut x = vec![0.0; lay.n_vars()];
    for (k, phi) in lp.v0.phis().iter().enumerate() {
        x[lay.re(k)] = phi.re;
        x[lay.im(k)] = phi.im;
    }
    let s = sinr_bob(&lp.v0, aug, pb);
    x[lay.a()] = s;
    x[lay.b()] = lp.b0;
    x[lay.c()] = s;
    x[lay.d()] = lp.b0;
    x[lay.e()] = lp.e0;
    x
}

/// Reads the reflecting vector out of a solution of the program.
pub fn extract_reflect(x: &[f64], n: usize) -> Result<ReflectVector> {
    let lay = Layout { n };
    if x.len() != lay.n_vars() {
        return Err(SurveilError::Domain(format!(
            "expected {} variables, got {}",
            lay.n_vars(),
            x.len()
        )));
    }
    let phis: Vec<Complex64> = (0..n)
        .map(|k| Complex64::new(x[lay.re(k)], x[lay.im(k)]))
        .collect();
    ReflectVector::from_phis(&phis)
}
