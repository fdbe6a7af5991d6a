use crate::cones::dot;
use crate::equilibrate::standard_form;
use crate::program::{ConeProgram, ConstraintRef};
use crate::solver::ConeSolution;

/// Independent re-check of a solution against the unscaled program data.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Largest raw violation `(lhs − rhs)₊`.
    pub max_violation: f64,
    /// Largest violation divided by the constraint's data magnitude.
    pub max_relative_violation: f64,
    pub worst: Option<ConstraintRef>,
    /// `‖Gᵀz − objective‖∞` when duals are present.
    pub dual_residual: Option<f64>,
    /// `dual objective − primal objective` when duals are present.
    pub duality_gap: Option<f64>,
    /// How far the duals sit outside the dual cone (0 when inside).
    pub dual_cone_violation: Option<f64>,
}

impl Certificate {
    pub fn primal_feasible(&self, tol: f64) -> bool {
        self.max_relative_violation <= tol
    }
}

pub fn certify(cp: &ConeProgram, sol: &ConeSolution) -> Certificate {
    let viol = cp.violations(&sol.x).unwrap_or_default();
    let mut max_violation = 0.0f64;
    let mut max_rel = 0.0f64;
    let mut worst = None;
    for (r, v) in viol {
        if v > max_violation {
            max_violation = v;
            worst = Some(r);
        }
        max_rel = max_rel.max(v / cp.constraint_scale(r));
    }

    let (g, h, c, spec) = standard_form(cp);
    let duals_present = sol.z.len() == spec.dim() && !sol.z.is_empty();
    let (dual_residual, duality_gap, dual_cone_violation) = if duals_present {
        let gtz = g.tr_mul(&nalgebra::DVector::from_column_slice(&sol.z));
        let res = gtz
            .iter()
            .zip(&c)
            .map(|(a, c)| (a + c).abs())
            .fold(0.0, f64::max);
        let gap = dot(&h, &sol.z) - cp.objective_value(&sol.x);
        (Some(res), Some(gap), Some(spec.interior_shift(&sol.z).max(0.0)))
    } else {
        (None, None, None)
    };
    Certificate {
        max_violation,
        max_relative_violation: max_rel,
        worst,
        dual_residual,
        duality_gap,
        dual_cone_violation,
    }
}
