use std::fmt::Write as _;
use std::io;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ProgramError {
    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    Dimension {
        what: String,
        expected: usize,
        got: usize,
    },
    #[error("second-order cone block {0} has no rows")]
    EmptyCone(usize),
    #[error("non-finite coefficient in {0}")]
    NonFinite(String),
}

/// `row·x ≤ rhs`
#[derive(Debug, Clone, PartialEq)]
pub struct LinearIneq {
    pub row: Vec<f64>,
    pub rhs: f64,
    /// Free-form label; constraints sharing a group label are reported together.
    pub group: String,
}

/// `‖A·x + b‖₂ ≤ cᵀx + d`, with `A` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SocBlock {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: f64,
    pub group: String,
}

impl SocBlock {
    /// Returns `(‖A·x + b‖₂, cᵀx + d)`.
    pub fn sides(&self, x: &[f64]) -> (f64, f64) {
        let norm = self
            .a
            .iter()
            .zip(&self.b)
            .map(|(row, b)| {
                let r = dot(row, x) + b;
                r * r
            })
            .sum::<f64>()
            .sqrt();
        (norm, dot(&self.c, x) + self.d)
    }
}

/// Identifies one constraint of a [`ConeProgram`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintRef {
    Linear(usize),
    Soc(usize),
}

/// Standard-form container: maximize `objectiveᵀx` over linear and
/// second-order cone constraints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConeProgram {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub linear_ineqs: Vec<LinearIneq>,
    pub soc_blocks: Vec<SocBlock>,
    pub var_names: Vec<String>,
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ConeProgram {
    pub fn new(n_vars: usize) -> Self {
        Self {
            n_vars,
            objective: vec![0.0; n_vars],
            linear_ineqs: Vec::new(),
            soc_blocks: Vec::new(),
            var_names: (0..n_vars).map(|i| format!("x{i}")).collect(),
        }
    }

    pub fn validate(&self) -> Result<(), ProgramError> {
        let n = self.n_vars;
        let dim = |what: String, got: usize| {
            if got == n {
                Ok(())
            } else {
                Err(ProgramError::Dimension {
                    what,
                    expected: n,
                    got,
                })
            }
        };
        let finite = |what: &str, vals: &[f64]| {
            if vals.iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(ProgramError::NonFinite(what.to_string()))
            }
        };
        dim("objective".into(), self.objective.len())?;
        finite("objective", &self.objective)?;
        if self.var_names.len() != n {
            return Err(ProgramError::Dimension {
                what: "var_names".into(),
                expected: n,
                got: self.var_names.len(),
            });
        }
        for (i, li) in self.linear_ineqs.iter().enumerate() {
            dim(format!("linear inequality {i}"), li.row.len())?;
            finite(&format!("linear inequality {i}"), &li.row)?;
            finite(&format!("linear inequality {i}"), &[li.rhs])?;
        }
        for (k, blk) in self.soc_blocks.iter().enumerate() {
            if blk.a.is_empty() {
                return Err(ProgramError::EmptyCone(k));
            }
            if blk.b.len() != blk.a.len() {
                return Err(ProgramError::Dimension {
                    what: format!("cone block {k} offset"),
                    expected: blk.a.len(),
                    got: blk.b.len(),
                });
            }
            dim(format!("cone block {k} c"), blk.c.len())?;
            for row in &blk.a {
                dim(format!("cone block {k} row"), row.len())?;
                finite(&format!("cone block {k}"), row)?;
            }
            finite(&format!("cone block {k}"), &blk.b)?;
            finite(&format!("cone block {k}"), &blk.c)?;
            finite(&format!("cone block {k}"), &[blk.d])?;
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Distinct group labels, in order of first appearance.
    pub fn groups(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        let labels = self
            .linear_ineqs
            .iter()
            .map(|l| l.group.as_str())
            .chain(self.soc_blocks.iter().map(|s| s.group.as_str()));
        for g in labels {
            if !out.contains(&g) {
                out.push(g);
            }
        }
        out
    }

    pub fn group_of(&self, r: ConstraintRef) -> &str {
        match r {
            ConstraintRef::Linear(i) => &self.linear_ineqs[i].group,
            ConstraintRef::Soc(k) => &self.soc_blocks[k].group,
        }
    }

    /// Per-constraint violation `(lhs − rhs)₊` in raw units.
    pub fn violations(&self, x: &[f64]) -> Result<Vec<(ConstraintRef, f64)>, ProgramError> {
        if x.len() != self.n_vars {
            return Err(ProgramError::Dimension {
                what: "point".into(),
                expected: self.n_vars,
                got: x.len(),
            });
        }
        let lin = self
            .linear_ineqs
            .iter()
            .enumerate()
            .map(|(i, li)| (ConstraintRef::Linear(i), (dot(&li.row, x) - li.rhs).max(0.0)));
        let soc = self.soc_blocks.iter().enumerate().map(|(k, blk)| {
            let (lhs, rhs) = blk.sides(x);
            (ConstraintRef::Soc(k), (lhs - rhs).max(0.0))
        });
        Ok(lin.chain(soc).collect())
    }

    /// Maximum violation over all constraints; `0` iff `x` is feasible.
    pub fn evaluate_constraints(&self, x: &[f64]) -> Result<f64, ProgramError> {
        Ok(self
            .violations(x)?
            .into_iter()
            .map(|(_, v)| v)
            .fold(0.0, f64::max))
    }

    /// Magnitude of the data defining one constraint; used to express
    /// violations relative to the constraint's own scale.
    pub fn constraint_scale(&self, r: ConstraintRef) -> f64 {
        let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        match r {
            ConstraintRef::Linear(i) => {
                let li = &self.linear_ineqs[i];
                inf(&li.row).max(li.rhs.abs()).max(1.0)
            }
            ConstraintRef::Soc(k) => {
                let blk = &self.soc_blocks[k];
                let mut m = inf(&blk.c).max(blk.d.abs()).max(inf(&blk.b));
                for row in &blk.a {
                    m = m.max(inf(row));
                }
                m.max(1.0)
            }
        }
    }

    /// Row-major plain-text listing, one constraint per line.
    pub fn listing(&self) -> String {
        let fmt_row = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:.17e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut s = String::new();
        let _ = writeln!(s, "vars {}", self.n_vars);
        let _ = writeln!(s, "names {}", self.var_names.join(" "));
        let _ = writeln!(s, "maximize {}", fmt_row(&self.objective));
        for li in &self.linear_ineqs {
            let _ = writeln!(s, "lin {} | {} <= {:.17e}", li.group, fmt_row(&li.row), li.rhs);
        }
        for (k, blk) in self.soc_blocks.iter().enumerate() {
            let _ = writeln!(
                s,
                "soc {k} {} rows {} | c {} d {:.17e}",
                blk.group,
                blk.a.len(),
                fmt_row(&blk.c),
                blk.d
            );
            for (row, b) in blk.a.iter().zip(&blk.b) {
                let _ = writeln!(s, "socrow {k} | {} + {:.17e}", fmt_row(row), b);
            }
        }
        s
    }

    pub fn write_listing<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(self.listing().as_bytes())
    }
}
