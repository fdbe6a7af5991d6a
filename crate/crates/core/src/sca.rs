//! Successive convex approximation: repeatedly solve the cone subproblem
//! and move the linearization point to its solution.

use std::io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use socp::{solve, ConeProgram, SolveStatus, SolverOptions};

use crate::error::{Result, SurveilError};
use crate::scenario::ChannelSet;
use crate::sinr::{
    check_feasible, element_budget, sinr_bob, sinr_eve, AugmentedChannels, PowerBudget,
    ReflectVector,
};
use crate::subproblem::{build_subproblem, extract_reflect, LinearizationPoint};

/// Rounds whose objective drops below the previous one by more than this
/// are treated as solver noise and discarded.
const MONOTONE_SLACK: f64 = 1e-6;
/// Relative tolerance for accepting a round's output as feasible.
const FEASIBILITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaOptions {
    pub max_rounds: usize,
    pub obj_tol: f64,
    /// Real and imaginary part of the starting coefficient of every element.
    pub init_value: [f64; 2],
    pub solver_tol: f64,
    pub solver_max_iters: usize,
}

impl Default for ScaOptions {
    fn default() -> Self {
        Self {
            max_rounds: 20,
            obj_tol: 1e-4,
            init_value: [0.01, 0.0],
            solver_tol: 1e-8,
            solver_max_iters: 200,
        }
    }
}

impl ScaOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 || !(self.obj_tol > 0.0) || !(self.solver_tol > 0.0) {
            return Err(SurveilError::Config(format!("invalid SCA options {self:?}")));
        }
        Ok(())
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions {
            tol: self.solver_tol,
            max_iters: self.solver_max_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaRound {
    pub round: usize,
    /// Optimal `a` of the subproblem (0 when the solve failed).
    pub objective: f64,
    pub sinr_b: f64,
    pub sinr_e: f64,
    pub status: SolveStatus,
    /// Largest constraint violation of the solver output, relative to each
    /// constraint's scale.
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScaTrace {
    pub rounds: Vec<ScaRound>,
}

impl ScaTrace {
    pub fn objectives(&self) -> Vec<f64> {
        self.rounds
            .iter()
            .filter(|r| r.status.is_optimal())
            .map(|r| r.objective)
            .collect()
    }

    pub fn write_csv<W: io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["round", "objective", "sinr_b", "sinr_e", "status"])?;
        for r in &self.rounds {
            wr.write_record([
                r.round.to_string(),
                format!("{:.12e}", r.objective),
                format!("{:.12e}", r.sinr_b),
                format!("{:.12e}", r.sinr_e),
                format!("{:?}", r.status),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaOutcome {
    /// Relative improvement fell below `obj_tol`.
    Converged,
    RoundLimit,
    /// The first subproblem was infeasible; the surface is switched off.
    InfeasibleFallback,
    /// A later round failed; the best earlier iterate is returned.
    NumericalFallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaResult {
    pub v: ReflectVector,
    pub trace: ScaTrace,
    pub outcome: ScaOutcome,
}

/// Next linearization point: the new iterate with its true denominators.
pub fn update_point(v: ReflectVector, aug: &AugmentedChannels, pb: &PowerBudget) -> LinearizationPoint {
    LinearizationPoint::at(v, aug, pb)
}

fn relative_violation(cp: &ConeProgram, x: &[f64]) -> f64 {
    cp.violations(x)
        .map(|vs| {
            vs.into_iter()
                .map(|(r, v)| v / cp.constraint_scale(r))
                .fold(0.0, f64::max)
        })
        .unwrap_or(f64::INFINITY)
}

/// Pulls every coefficient back onto its amplification budget.
fn clip_to_budget(v: &ReflectVector, ch: &ChannelSet, pb: &PowerBudget) -> Result<ReflectVector> {
    let phis = v
        .phis()
        .iter()
        .enumerate()
        .map(|(k, phi)| {
            let budget = element_budget(ch, pb, k)?;
            let p = phi.norm_sqr();
            Ok(if p > budget { phi * (budget / p).sqrt() } else { *phi })
        })
        .collect::<Result<Vec<Complex64>>>()?;
    ReflectVector::from_phis(&phis)
}

pub fn sca_solve(
    ch: &ChannelSet,
    aug: &AugmentedChannels,
    pb: &PowerBudget,
    opts: &ScaOptions,
) -> Result<ScaResult> {
    pb.validate_active()?;
    opts.validate()?;
    let n = ch.n_elements();
    let init = Complex64::new(opts.init_value[0], opts.init_value[1]);
    let mut lp = update_point(clip_to_budget(&ReflectVector::uniform(n, init), ch, pb)?, aug, pb);
    let mut trace = ScaTrace::default();
    let mut best: Option<(ReflectVector, f64)> = None;
    let solver = opts.solver();

    for round in 1..=opts.max_rounds {
        let cp = build_subproblem(aug, ch, pb, &lp)?;
        let sol = solve(&cp, &solver);
        let mut entry = ScaRound {
            round,
            objective: 0.0,
            sinr_b: 0.0,
            sinr_e: 0.0,
            status: sol.status,
            max_violation: relative_violation(&cp, &sol.x),
        };
        let fail = |trace: ScaTrace, best: Option<(ReflectVector, f64)>| match best {
            Some((v, _)) => Ok(ScaResult {
                v,
                trace,
                outcome: ScaOutcome::NumericalFallback,
            }),
            None => Ok(ScaResult {
                v: ReflectVector::no_reflection(n),
                trace,
                outcome: ScaOutcome::InfeasibleFallback,
            }),
        };
        if !sol.status.is_optimal() {
            trace.rounds.push(entry);
            return fail(trace, best);
        }
        let v = clip_to_budget(&extract_reflect(&sol.x, n)?, ch, pb)?;
        entry.objective = sol.objective_value;
        entry.sinr_b = sinr_bob(&v, aug, pb);
        entry.sinr_e = sinr_eve(&v, aug, pb);
        if !check_feasible(&v, ch, aug, pb, FEASIBILITY_TOL).feasible {
            entry.status = SolveStatus::NumericalFailure;
            trace.rounds.push(entry);
            return fail(trace, best);
        }
        let prev = best.as_ref().map(|(_, a)| *a);
        if let Some(prev) = prev {
            if entry.objective < prev - MONOTONE_SLACK {
                // Only solver inexactness can make the objective regress;
                // keep the previous iterate.
                trace.rounds.push(entry);
                return Ok(ScaResult {
                    v: best.unwrap().0,
                    trace,
                    outcome: ScaOutcome::Converged,
                });
            }
        }
        let objective = entry.objective;
        trace.rounds.push(entry);
        best = Some((v.clone(), objective));
        if let Some(prev) = prev {
            if objective - prev <= opts.obj_tol * prev.abs() {
                return Ok(ScaResult {
                    v,
                    trace,
                    outcome: ScaOutcome::Converged,
                });
            }
        }
        lp = update_point(v, aug, pb);
    }
    let (v, _) = best.expect("at least one accepted round");
    Ok(ScaResult {
        v,
        trace,
        outcome: ScaOutcome::RoundLimit,
    })
}
