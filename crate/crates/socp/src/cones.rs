//! Product cone `R₊^l × Q^{q₁} × … × Q^{q_k}` and the Jordan-algebra
//! operations the interior-point iteration needs.

/// Layout of the slack vector: `lp` nonnegative entries followed by
/// second-order cones of the given dimensions (head entry first).
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ConeSpec {
    pub lp: usize,
    pub soc: Vec<usize>,
}

impl ConeSpec {
    pub fn dim(&self) -> usize {
        self.lp + self.soc.iter().sum::<usize>()
    }

    /// Number of cones counted with multiplicity (barrier parameter).
    pub fn degree(&self) -> usize {
        self.lp + self.soc.len()
    }

    /// Offsets `(start, len)` of each second-order cone.
    pub fn soc_ranges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let mut start = self.lp;
        self.soc.iter().map(move |&q| {
            let r = (start, q);
            start += q;
            r
        })
    }

    pub fn identity(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.dim()];
        e[..self.lp].iter_mut().for_each(|v| *v = 1.0);
        for (st, _) in self.soc_ranges() {
            e[st] = 1.0;
        }
        e
    }

    /// `u ∘ v`.
    pub fn product(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let mut w = vec![0.0; self.dim()];
        for i in 0..self.lp {
            w[i] = u[i] * v[i];
        }
        for (st, q) in self.soc_ranges() {
            let (u0, u1) = (u[st], &u[st + 1..st + q]);
            let (v0, v1) = (v[st], &v[st + 1..st + q]);
            w[st] = u0 * v0 + dot(u1, v1);
            for j in 1..q {
                w[st + j] = u0 * v[st + j] + v0 * u[st + j];
            }
        }
        w
    }

    /// Solves `λ ∘ u = r` for `u`.
    pub fn divide(&self, lambda: &[f64], r: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; self.dim()];
        for i in 0..self.lp {
            u[i] = r[i] / lambda[i];
        }
        for (st, q) in self.soc_ranges() {
            let l0 = lambda[st];
            let l1 = &lambda[st + 1..st + q];
            let r1 = &r[st + 1..st + q];
            let det = jdet(&lambda[st..st + q]);
            let u0 = (l0 * r[st] - dot(l1, r1)) / det;
            u[st] = u0;
            for j in 1..q {
                u[st + j] = (r[st + j] - u0 * lambda[st + j]) / l0;
            }
        }
        u
    }

    /// Smallest `t` such that `x + t·e` lies in the closed cone.
    pub fn interior_shift(&self, x: &[f64]) -> f64 {
        let mut t = f64::NEG_INFINITY;
        for &v in &x[..self.lp] {
            t = t.max(-v);
        }
        for (st, q) in self.soc_ranges() {
            let n1 = norm(&x[st + 1..st + q]);
            t = t.max(n1 - x[st]);
        }
        t
    }

    /// Largest `α ≥ 0` with `x + α·dx` in the cone (`∞` if unbounded).
    /// `x` must lie in the interior.
    pub fn max_step(&self, x: &[f64], dx: &[f64]) -> f64 {
        let mut alpha = f64::INFINITY;
        for i in 0..self.lp {
            if dx[i] < 0.0 {
                alpha = alpha.min(-x[i] / dx[i]);
            }
        }
        for (st, q) in self.soc_ranges() {
            alpha = alpha.min(soc_step(&x[st..st + q], &dx[st..st + q]));
        }
        alpha
    }
}

fn soc_step(x: &[f64], d: &[f64]) -> f64 {
    // (x₀+αd₀)² − ‖x₁+αd₁‖² ≥ 0 and x₀+αd₀ ≥ 0.
    let a = d[0] * d[0] - dot(&d[1..], &d[1..]);
    let b = 2.0 * (x[0] * d[0] - dot(&x[1..], &d[1..]));
    let c = jdet(x);
    let mut alpha = f64::INFINITY;
    if d[0] < 0.0 {
        alpha = -x[0] / d[0];
    }
    let c = c.max(0.0);
    let root = if a.abs() <= f64::EPSILON * (d[0] * d[0] + dot(&d[1..], &d[1..])) {
        if b < 0.0 {
            -c / b
        } else {
            f64::INFINITY
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            // No real root: the quadratic keeps the sign of a (positive).
            f64::INFINITY
        } else {
            let sq = disc.sqrt();
            let q = -0.5 * (b + b.signum() * sq);
            let r1 = q / a;
            let r2 = if q != 0.0 { c / q } else { f64::INFINITY };
            [r1, r2]
                .into_iter()
                .filter(|r| *r >= 0.0)
                .fold(f64::INFINITY, f64::min)
        }
    };
    alpha.min(root)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Nesterov–Todd scaling `W` with `W·z = W⁻¹·s = λ`. Every block of `W`
/// is symmetric.
#[derive(Debug, Clone)]
pub(crate) struct NtScaling {
    lp: Vec<f64>,
    soc: Vec<SocScale>,
}

#[derive(Debug, Clone)]
struct SocScale {
    beta: f64,
    /// Unit hyperbolic reflection vector, `vᵀJv = 1`.
    v: Vec<f64>,
}

fn jnorm(x: &[f64]) -> f64 {
    jdet(x).max(0.0).sqrt()
}

/// `x₀² − ‖x₁‖²`, factored to avoid cancellation near the boundary.
fn jdet(x: &[f64]) -> f64 {
    let n1 = norm(&x[1..]);
    (x[0] - n1) * (x[0] + n1)
}

impl NtScaling {
    /// Returns `None` when `s` or `z` is not strictly interior.
    pub fn new(spec: &ConeSpec, s: &[f64], z: &[f64]) -> Option<Self> {
        let mut lp = Vec::with_capacity(spec.lp);
        for i in 0..spec.lp {
            if !(s[i] > 0.0 && z[i] > 0.0) {
                return None;
            }
            lp.push((s[i] / z[i]).sqrt());
        }
        let mut soc = Vec::with_capacity(spec.soc.len());
        for (st, q) in spec.soc_ranges() {
            let sb = &s[st..st + q];
            let zb = &z[st..st + q];
            let sn = jnorm(sb);
            let zn = jnorm(zb);
            if !(sn > 0.0 && zn > 0.0 && sb[0] > 0.0 && zb[0] > 0.0) {
                return None;
            }
            let sbar: Vec<f64> = sb.iter().map(|x| x / sn).collect();
            let zbar: Vec<f64> = zb.iter().map(|x| x / zn).collect();
            let gamma = ((1.0 + dot(&sbar, &zbar)) / 2.0).sqrt();
            // w̄ = (s̄ + J z̄)/(2γ)
            let mut w = vec![0.0; q];
            w[0] = (sbar[0] + zbar[0]) / (2.0 * gamma);
            for j in 1..q {
                w[j] = (sbar[j] - zbar[j]) / (2.0 * gamma);
            }
            let denom = (2.0 * (w[0] + 1.0)).sqrt();
            let mut v = w;
            v[0] += 1.0;
            v.iter_mut().for_each(|x| *x /= denom);
            soc.push(SocScale {
                beta: (sn / zn).sqrt(),
                v,
            });
        }
        Some(Self { lp, soc })
    }

    /// `W·x`.
    pub fn apply(&self, spec: &ConeSpec, x: &[f64]) -> Vec<f64> {
        self.apply_impl(spec, x, false)
    }

    /// `W⁻¹·x`.
    pub fn apply_inv(&self, spec: &ConeSpec, x: &[f64]) -> Vec<f64> {
        self.apply_impl(spec, x, true)
    }

    fn apply_impl(&self, spec: &ConeSpec, x: &[f64], inverse: bool) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        for i in 0..spec.lp {
            y[i] = if inverse {
                x[i] / self.lp[i]
            } else {
                x[i] * self.lp[i]
            };
        }
        for ((st, q), sc) in spec.soc_ranges().zip(&self.soc) {
            let xb = &x[st..st + q];
            // W = β(2vvᵀ − J),  W⁻¹ = β⁻¹(2(Jv)(Jv)ᵀ − J).
            let (scale, sign) = if inverse {
                (1.0 / sc.beta, -1.0)
            } else {
                (sc.beta, 1.0)
            };
            let vx = sc.v[0] * xb[0] + sign * dot(&sc.v[1..], &xb[1..]);
            y[st] = scale * (2.0 * sc.v[0] * vx - xb[0]);
            for j in 1..q {
                y[st + j] = scale * (2.0 * sign * sc.v[j] * vx + xb[j]);
            }
        }
        y
    }
}
