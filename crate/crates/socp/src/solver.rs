//! Homogeneous self-dual interior-point method.
//!
//! The embedding
//!
//! ```text
//! Gᵀz + cτ = 0,   s = hτ − Gx,   κ = −cᵀx − hᵀz,   (s, z) ∈ K × K,  τ, κ ≥ 0
//! ```
//!
//! always has a strictly feasible start; its limit either recovers a
//! primal-dual optimal pair (`τ > 0`) or a certificate of infeasibility
//! (`κ > 0`). Each iteration solves two reduced KKT systems sharing one
//! thin QR factorization of `Ĝ = W⁻¹G`, which avoids squaring its
//! condition number the way the normal equations `ĜᵀĜ` would.

use nalgebra::{DMatrix, DVector};

use crate::cones::{dot, norm, ConeSpec, NtScaling};
use crate::equilibrate::ScaledProblem;
use crate::program::ConeProgram;

const STEP_FRACTION: f64 = 0.99;
const REFINE_STEPS: usize = 5;
/// Residual level at which the best iterate seen is still reported as a
/// (reduced-accuracy) optimum when the method cannot reach `tol`.
const INACCURATE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// Stopped short of `tol` but the best iterate met a looser tolerance.
    OptimalInaccurate,
    Infeasible,
    Unbounded,
    IterLimit,
    NumericalFailure,
}

impl SolveStatus {
    pub fn is_optimal(self) -> bool {
        matches!(self, Self::Optimal | Self::OptimalInaccurate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeSolution {
    /// Primal point in the program's variables. When the method stalls or
    /// hits the iteration cap this is the best iterate seen; for infeasible
    /// or unbounded programs it is the certificate direction.
    pub x: Vec<f64>,
    /// Dual multipliers in original units, ordered as the linear inequalities
    /// followed by each cone block's `(head, rows…)`.
    pub z: Vec<f64>,
    pub status: SolveStatus,
    /// `objectiveᵀx` in original units.
    pub objective_value: f64,
    /// Largest of the scaled primal residual, dual residual and gap.
    pub kkt_residual: f64,
    pub iterations: usize,
}

struct Kkt<'a> {
    g: &'a DMatrix<f64>,
    spec: &'a ConeSpec,
    w: NtScaling,
    /// Thin QR of `Ĝ = W⁻¹G` (possibly with a regularizing block appended).
    qr: nalgebra::QR<f64, nalgebra::Dyn, nalgebra::Dyn>,
    r: DMatrix<f64>,
    m: usize,
    rows: usize,
}

impl<'a> Kkt<'a> {
    fn new(g: &'a DMatrix<f64>, spec: &'a ConeSpec, w: NtScaling) -> Option<Self> {
        let (m, n) = g.shape();
        let mut gs = DMatrix::zeros(m, n);
        let mut col = vec![0.0; m];
        for j in 0..n {
            col.iter_mut()
                .zip(g.column(j).iter())
                .for_each(|(c, v)| *c = *v);
            let scaled = w.apply_inv(spec, &col);
            gs.column_mut(j).copy_from_slice(&scaled);
        }
        let scale = gs.amax().max(1.0);
        let mut reg = 0.0;
        for _ in 0..8 {
            let a = if reg > 0.0 {
                let mut a = DMatrix::zeros(m + n, n);
                a.rows_mut(0, m).copy_from(&gs);
                for i in 0..n {
                    a[(m + i, i)] = reg;
                }
                a
            } else {
                gs.clone()
            };
            let qr = a.qr();
            let r = qr.r();
            let dmin = r.diagonal().iter().fold(f64::INFINITY, |a, d| a.min(d.abs()));
            if dmin > 1e-13 * scale {
                return Some(Self {
                    g,
                    spec,
                    w,
                    qr,
                    r,
                    m,
                    rows: if reg > 0.0 { m + n } else { m },
                });
            }
            reg = if reg == 0.0 { 1e-10 * scale } else { reg * 100.0 };
        }
        None
    }

    fn solve_once(&self, r1: &[f64], r2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        // With Ĝ = QR:  Rx = R⁻ᵀr1 + Qᵀ W⁻¹r2,  z = W⁻¹(Ĝx − W⁻¹r2).
        let wr2 = self.w.apply_inv(self.spec, r2);
        let rows = self.rows;
        let mut b = DVector::zeros(rows);
        b.rows_mut(0, self.m).copy_from_slice(&wr2);
        self.qr.q_tr_mul(&mut b);
        let n = self.r.ncols();
        let y = self
            .r
            .tr_solve_upper_triangular(&DVector::from_column_slice(r1))
            .unwrap_or_else(|| DVector::zeros(n));
        let rhs = y + b.rows(0, n);
        let x = self
            .r
            .solve_upper_triangular(&rhs)
            .unwrap_or_else(|| DVector::zeros(n));
        let gx = self.g * &x;
        let t: Vec<f64> = self
            .w
            .apply_inv(self.spec, gx.as_slice())
            .iter()
            .zip(&wr2)
            .map(|(a, b)| a - b)
            .collect();
        let z = self.w.apply_inv(self.spec, &t);
        (x.as_slice().to_vec(), z)
    }

    fn residual(&self, r1: &[f64], r2: &[f64], x: &[f64], z: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let gtz = self.g.tr_mul(&DVector::from_column_slice(z));
        let gx = self.g * DVector::from_column_slice(x);
        let wz = self.w.apply(self.spec, &self.w.apply(self.spec, z));
        let e1 = r1.iter().zip(gtz.iter()).map(|(r, v)| r - v).collect();
        let e2 = r2
            .iter()
            .zip(gx.iter())
            .zip(&wz)
            .map(|((r, gx), wz)| r - (gx - wz))
            .collect();
        (e1, e2)
    }

    /// Solves `[0 Gᵀ; G −W²] [x; z] = [r1; r2]`, refining while the
    /// residual keeps shrinking.
    fn solve(&self, r1: &[f64], r2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (mut x, mut z) = self.solve_once(r1, r2);
        // The second block is compared after scaling by W⁻¹; unscaled it is
        // dominated by roundoff amplified by the conditioning of W².
        let size = |e1: &[f64], e2: &[f64]| norm(e1).max(norm(&self.w.apply_inv(self.spec, e2)));
        let (mut e1, mut e2) = self.residual(r1, r2, &x, &z);
        let mut err = size(&e1, &e2);
        for _ in 0..REFINE_STEPS {
            let (dx, dz) = self.solve_once(&e1, &e2);
            let xn: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            let zn: Vec<f64> = z.iter().zip(&dz).map(|(a, b)| a + b).collect();
            let (n1, n2) = self.residual(r1, r2, &xn, &zn);
            let new_err = size(&n1, &n2);
            if !(new_err < err) {
                break;
            }
            (x, z, e1, e2, err) = (xn, zn, n1, n2, new_err);
        }
        (x, z)
    }
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += a * x);
}

fn mat_vec(g: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    (g * DVector::from_column_slice(x)).as_slice().to_vec()
}

fn mat_tr_vec(g: &DMatrix<f64>, z: &[f64]) -> Vec<f64> {
    g.tr_mul(&DVector::from_column_slice(z)).as_slice().to_vec()
}

/// Pushes `x` into the interior of the cone if it is not already there.
fn shift_interior(spec: &ConeSpec, x: &mut [f64]) {
    let t = spec.interior_shift(x);
    if t >= -1e-8 * norm(x).max(1.0) {
        let e = spec.identity();
        axpy(x, 1.0 + t, &e);
    }
}

struct Residuals {
    pres: f64,
    dres: f64,
    gap: f64,
    relgap: f64,
    pinf: Option<f64>,
    dinf: Option<f64>,
}

/// Solves `cp` (a maximization) and returns the primal point, duals and
/// termination status. Deterministic for fixed inputs.
pub fn solve(cp: &ConeProgram, opts: &SolverOptions) -> ConeSolution {
    let n = cp.n_vars;
    if let Err(_e) = cp.validate() {
        return ConeSolution {
            x: vec![0.0; n],
            z: Vec::new(),
            status: SolveStatus::NumericalFailure,
            objective_value: f64::NAN,
            kkt_residual: f64::INFINITY,
            iterations: 0,
        };
    }
    let sp = ScaledProblem::new(cp);
    let (x, z, status, kkt, iters) = run(&sp, opts);
    let x_orig = sp.unscale_x(&x);
    let z_orig = sp.unscale_z(&z);
    ConeSolution {
        objective_value: cp.objective_value(&x_orig),
        x: x_orig,
        z: z_orig,
        status,
        kkt_residual: kkt,
        iterations: iters,
    }
}

type RunOutput = (Vec<f64>, Vec<f64>, SolveStatus, f64, usize);

fn run(sp: &ScaledProblem, opts: &SolverOptions) -> RunOutput {
    let g = &sp.g;
    let h = &sp.h;
    let c = &sp.c;
    let spec = &sp.spec;
    let (m, n) = g.shape();
    let tol = opts.tol;
    let hnorm = norm(h).max(1.0);
    let cnorm = norm(c).max(1.0);
    let e = spec.identity();
    let degree = spec.degree() as f64;

    // Starting point from the identity-scaled KKT system.
    let ident = NtScaling::new(spec, &e, &e).expect("identity is interior");
    let Some(kkt0) = Kkt::new(g, spec, ident) else {
        return (vec![0.0; n], vec![0.0; m], SolveStatus::NumericalFailure, f64::INFINITY, 0);
    };
    let (mut x, sneg) = kkt0.solve(&vec![0.0; n], h);
    let mut s: Vec<f64> = sneg.iter().map(|v| -v).collect();
    let neg_c: Vec<f64> = c.iter().map(|v| -v).collect();
    let (_, mut z) = kkt0.solve(&neg_c, &vec![0.0; m]);
    shift_interior(spec, &mut s);
    shift_interior(spec, &mut z);
    let mut tau = 1.0;
    let mut kappa = 1.0;

    let residuals = |x: &[f64], s: &[f64], z: &[f64], tau: f64| -> (Vec<f64>, Vec<f64>, Residuals) {
        let gx = mat_vec(g, x);
        let gtz = mat_tr_vec(g, z);
        let rx: Vec<f64> = gtz.iter().zip(c).map(|(a, c)| a + c * tau).collect();
        let rz: Vec<f64> = gx
            .iter()
            .zip(s)
            .zip(h)
            .map(|((gx, s), h)| gx + s - h * tau)
            .collect();
        let cx = dot(c, x);
        let hz = dot(h, z);
        let pcost = cx / tau;
        let dcost = -hz / tau;
        let gap = dot(s, z) / (tau * tau);
        let relgap = if pcost < 0.0 {
            gap / -pcost
        } else if dcost > 0.0 {
            gap / dcost
        } else {
            f64::INFINITY
        };
        let pinf = (hz < 0.0).then(|| norm(&gtz) / -hz / cnorm);
        let dinf = (cx < 0.0).then(|| {
            let r: Vec<f64> = gx.iter().zip(s).map(|(a, b)| a + b).collect();
            norm(&r) / -cx / hnorm
        });
        let res = Residuals {
            pres: norm(&rz) / tau / hnorm,
            dres: norm(&rx) / tau / cnorm,
            gap,
            relgap,
            pinf,
            dinf,
        };
        (rx, rz, res)
    };

    let finish = |x: &[f64], z: &[f64], tau: f64| -> (Vec<f64>, Vec<f64>) {
        (
            x.iter().map(|v| v / tau).collect(),
            z.iter().map(|v| v / tau).collect(),
        )
    };

    let mut stalls = 0;
    let mut best = (x.clone(), z.clone(), tau, f64::INFINITY, 0);
    // Falls back to the best iterate if it is accurate enough.
    let give_up = |best: (Vec<f64>, Vec<f64>, f64, f64, usize), status: SolveStatus, iter: usize| {
        let (bx, bz, btau, bk, bit) = best;
        if bk <= INACCURATE_TOL.max(tol) {
            let (xo, zo) = finish(&bx, &bz, btau);
            (xo, zo, SolveStatus::OptimalInaccurate, bk, bit)
        } else {
            let (xo, zo) = finish(&bx, &bz, btau);
            (xo, zo, status, bk, iter)
        }
    };
    for iter in 0..opts.max_iters {
        let (rx, rz, res) = residuals(&x, &s, &z, tau);
        let kkt_res = res.pres.max(res.dres).max(res.gap.min(res.relgap));
        if kkt_res < best.3 {
            best = (x.clone(), z.clone(), tau, kkt_res, iter);
        }
        if !kkt_res.is_finite() && res.pinf.is_none() && res.dinf.is_none() {
            return give_up(best, SolveStatus::NumericalFailure, iter);
        }
        if res.pres <= tol && res.dres <= tol && (res.gap <= tol || res.relgap <= tol) {
            let (xo, zo) = finish(&x, &z, tau);
            return (xo, zo, SolveStatus::Optimal, kkt_res, iter);
        }
        if let Some(p) = res.pinf {
            if p <= tol {
                // Certificate z scaled so that hᵀz = −1.
                let hz = -dot(h, &z);
                let zo = z.iter().map(|v| v / hz).collect();
                return (vec![0.0; n], zo, SolveStatus::Infeasible, kkt_res, iter);
            }
        }
        if let Some(d) = res.dinf {
            if d <= tol {
                let cx = -dot(c, &x);
                let xo = x.iter().map(|v| v / cx).collect();
                return (xo, vec![0.0; m], SolveStatus::Unbounded, kkt_res, iter);
            }
        }

        let Some(w) = NtScaling::new(spec, &s, &z) else {
            return give_up(best, SolveStatus::NumericalFailure, iter);
        };
        let lambda = w.apply(spec, &z);
        let mu = (dot(&s, &z) + tau * kappa) / (degree + 1.0);
        let Some(kkt) = Kkt::new(g, spec, w) else {
            return give_up(best, SolveStatus::NumericalFailure, iter);
        };
        let (x1, z1) = kkt.solve(&neg_c, h);
        let rt = kappa + dot(c, &x) + dot(h, &z);
        let denom = dot(c, &x1) + dot(h, &z1) - kappa / tau;

        let ll = spec.product(&lambda, &lambda);
        let direction = |eta: f64, rc: &[f64], rtc: f64| {
            let lrc = spec.divide(&lambda, rc);
            let wlrc = kkt.w.apply(spec, &lrc);
            let r1: Vec<f64> = rx.iter().map(|v| -eta * v).collect();
            let r2: Vec<f64> = rz
                .iter()
                .zip(&wlrc)
                .map(|(r, w)| -eta * r - w)
                .collect();
            let (x2, z2) = kkt.solve(&r1, &r2);
            let dtau = (-eta * rt - dot(c, &x2) - dot(h, &z2) - rtc / tau) / denom;
            let dkappa = (rtc - kappa * dtau) / tau;
            let mut dx = x2;
            axpy(&mut dx, dtau, &x1);
            let mut dz = z2;
            axpy(&mut dz, dtau, &z1);
            // ds from the linearized primal equation G·dx + ds − h·dτ = −η·rz
            // rather than from W(λ\rc − W dz): the scaling W is badly
            // conditioned near the optimum, and this keeps the primal
            // residual contracting exactly.
            let wdz = kkt.w.apply(spec, &dz);
            let gdx = mat_vec(g, &dx);
            let ds: Vec<f64> = (0..m)
                .map(|i| -eta * rz[i] + h[i] * dtau - gdx[i])
                .collect();
            let t = kkt.w.apply_inv(spec, &ds);
            (dx, ds, dz, dtau, dkappa, wdz, t)
        };
        let step = |ds: &[f64], dz: &[f64], dtau: f64, dkappa: f64| {
            let mut a = spec.max_step(&s, ds).min(spec.max_step(&z, dz));
            if dtau < 0.0 {
                a = a.min(-tau / dtau);
            }
            if dkappa < 0.0 {
                a = a.min(-kappa / dkappa);
            }
            a
        };

        // Predictor.
        let rc_aff: Vec<f64> = ll.iter().map(|v| -v).collect();
        let (_, ds_a, dz_a, dtau_a, dkappa_a, wdz_a, wids_a) =
            direction(1.0, &rc_aff, -tau * kappa);
        let alpha_aff = step(&ds_a, &dz_a, dtau_a, dkappa_a).min(1.0);
        let sigma = (1.0 - alpha_aff).powi(3).clamp(0.0, 1.0);

        // Corrector.
        let corr = spec.product(&wids_a, &wdz_a);
        let rc: Vec<f64> = ll
            .iter()
            .zip(&e)
            .zip(&corr)
            .map(|((l, e), k)| -l + sigma * mu * e - k)
            .collect();
        let rtc = -tau * kappa + sigma * mu - dtau_a * dkappa_a;
        let (dx, ds, dz, dtau, dkappa, _, _) = direction(1.0 - sigma, &rc, rtc);
        let alpha = (STEP_FRACTION * step(&ds, &dz, dtau, dkappa)).min(1.0);
        if !alpha.is_finite() || alpha < 1e-12 {
            stalls += 1;
            if stalls >= 3 {
                return give_up(best, SolveStatus::NumericalFailure, iter);
            }
        } else {
            stalls = 0;
        }
        axpy(&mut x, alpha, &dx);
        axpy(&mut s, alpha, &ds);
        axpy(&mut z, alpha, &dz);
        tau += alpha * dtau;
        kappa += alpha * dkappa;
        if x.iter().chain(&s).chain(&z).any(|v| !v.is_finite()) || !(tau > 0.0) {
            return give_up(best, SolveStatus::NumericalFailure, iter);
        }
    }
    give_up(best, SolveStatus::IterLimit, opts.max_iters)
}
