//! Conversion of a [`ConeProgram`] into the solver's internal conic form
//!
//! ```text
//! minimize cᵀx   s.t.  G·x + s = h,  s ∈ K
//! ```
//!
//! followed by Ruiz equilibration. Row scaling is uniform inside each
//! second-order cone so that cone membership is preserved.

use nalgebra::DMatrix;

use crate::cones::ConeSpec;
use crate::program::ConeProgram;

const RUIZ_PASSES: usize = 12;

pub(crate) struct ScaledProblem {
    pub g: DMatrix<f64>,
    pub h: Vec<f64>,
    pub c: Vec<f64>,
    pub spec: ConeSpec,
    /// `x_original = col_scale ∘ x_scaled`
    pub col_scale: Vec<f64>,
    /// `s_original = s_scaled / row_scale`
    pub row_scale: Vec<f64>,
    /// `c_scaled = obj_scale · col_scale ∘ c_original`
    pub obj_scale: f64,
}

/// Row index ranges of every cone block (each linear row is its own block).
fn blocks(spec: &ConeSpec) -> Vec<(usize, usize)> {
    (0..spec.lp)
        .map(|i| (i, 1))
        .chain(spec.soc_ranges())
        .collect()
}

pub(crate) fn standard_form(cp: &ConeProgram) -> (DMatrix<f64>, Vec<f64>, Vec<f64>, ConeSpec) {
    let n = cp.n_vars;
    let spec = ConeSpec {
        lp: cp.linear_ineqs.len(),
        soc: cp.soc_blocks.iter().map(|b| b.a.len() + 1).collect(),
    };
    let m = spec.dim();
    let mut g = DMatrix::zeros(m, n);
    let mut h = vec![0.0; m];
    for (i, li) in cp.linear_ineqs.iter().enumerate() {
        for j in 0..n {
            g[(i, j)] = li.row[j];
        }
        h[i] = li.rhs;
    }
    for ((st, _), blk) in spec.soc_ranges().zip(&cp.soc_blocks) {
        for j in 0..n {
            g[(st, j)] = -blk.c[j];
        }
        h[st] = blk.d;
        for (r, (row, b)) in blk.a.iter().zip(&blk.b).enumerate() {
            for j in 0..n {
                g[(st + 1 + r, j)] = -row[j];
            }
            h[st + 1 + r] = *b;
        }
    }
    let c = cp.objective.iter().map(|v| -v).collect();
    (g, h, c, spec)
}

impl ScaledProblem {
    pub fn new(cp: &ConeProgram) -> Self {
        let (mut g, mut h, mut c, spec) = standard_form(cp);
        let (m, n) = g.shape();
        let blks = blocks(&spec);
        let mut col_scale = vec![1.0; n];
        let mut row_scale = vec![1.0; m];

        let safe = |v: f64| if v > 0.0 && v.is_finite() { v } else { 1.0 };
        for _ in 0..RUIZ_PASSES {
            for j in 0..n {
                let r = safe(g.column(j).amax());
                let f = 1.0 / r.sqrt();
                g.column_mut(j).scale_mut(f);
                col_scale[j] *= f;
            }
            for &(st, len) in &blks {
                let r = safe(g.rows(st, len).amax());
                let f = 1.0 / r.sqrt();
                g.rows_mut(st, len).scale_mut(f);
                for i in st..st + len {
                    row_scale[i] *= f;
                }
            }
        }
        // Unit Euclidean norm for the largest row of every block.
        for &(st, len) in &blks {
            let r = safe(
                (st..st + len)
                    .map(|i| g.row(i).norm())
                    .fold(0.0, f64::max),
            );
            g.rows_mut(st, len).scale_mut(1.0 / r);
            for i in st..st + len {
                row_scale[i] /= r;
            }
        }
        for i in 0..m {
            h[i] *= row_scale[i];
        }
        for j in 0..n {
            c[j] *= col_scale[j];
        }
        let cmax = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let obj_scale = if cmax > 0.0 { 1.0 / cmax } else { 1.0 };
        c.iter_mut().for_each(|v| *v *= obj_scale);

        Self {
            g,
            h,
            c,
            spec,
            col_scale,
            row_scale,
            obj_scale,
        }
    }

    pub fn unscale_x(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.col_scale).map(|(x, d)| x * d).collect()
    }

    pub fn unscale_z(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(&self.row_scale)
            .map(|(z, e)| z * e / self.obj_scale)
            .collect()
    }
}
