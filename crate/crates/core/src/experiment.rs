//! Monte Carlo harness: every requested method runs on the same channel
//! realization, realizations run in parallel, and rows are sorted before
//! they are written so output never depends on scheduling.

use std::collections::BTreeMap;
use std::fmt;
use std::io;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SurveilError};
use crate::geometry::{coordinate_descent, DEFAULT_ROUNDS};
use crate::passive::passive_optimize;
use crate::sca::{sca_solve, ScaOptions, ScaOutcome, ScaTrace};
use crate::scenario::{generate_channels, to_db, ChannelSet, FadingParams, NodeLayout, RngStream};
use crate::sinr::{augment, eavesdrop_rate_within, PowerBudget, ReflectVector, REPORT_TOL};

pub const ROW_HEADER: [&str; 9] = [
    "method",
    "n_r",
    "p_a_db",
    "p_max_db",
    "realization",
    "sinr_b_db",
    "sinr_e_db",
    "rate_bps_hz",
    "status",
];

pub const SUMMARY_HEADER: [&str; 6] = [
    "method",
    "n_r",
    "p_a_db",
    "p_max_db",
    "mean_rate_bps_hz",
    "realizations",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ActiveSca,
    ActiveElementwise,
    Passive,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::ActiveSca, Method::ActiveElementwise, Method::Passive];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::ActiveSca => "active-sca",
            Method::ActiveElementwise => "active-elementwise",
            Method::Passive => "passive",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = SurveilError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| SurveilError::Config(format!("unknown method {s:?}")))
    }
}

/// A single value or a sweep list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(vs) => vs.clone(),
        }
    }

    pub fn is_sweep(&self) -> bool {
        matches!(self, OneOrMany::Many(_))
    }
}

fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

fn default_realizations() -> usize {
    100
}

fn default_rounds() -> usize {
    DEFAULT_ROUNDS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub layout: NodeLayout,
    #[serde(default)]
    pub fading: FadingParams,
    pub n_r: OneOrMany<usize>,
    pub p_a_db: OneOrMany<f64>,
    pub p_max_db: OneOrMany<f64>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub sca: ScaOptions,
    /// Sweeps of the element-wise and passive coordinate methods.
    #[serde(default = "default_rounds")]
    pub rounds: usize,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.layout.validate()?;
        self.fading.validate()?;
        self.sca.validate()?;
        let bad = |msg: String| Err(SurveilError::Config(msg));
        if self.n_r.is_sweep() == self.p_a_db.is_sweep() {
            return bad("exactly one of n_r and p_a_db must be a sweep list".into());
        }
        if self.realizations == 0 {
            return bad("realizations must be at least 1".into());
        }
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if self.methods.is_empty() {
            return bad("no methods selected".into());
        }
        let n_r = self.n_r.values();
        if n_r.is_empty() || n_r.contains(&0) {
            return bad(format!("n_r values must be positive, got {n_r:?}"));
        }
        for (name, vals) in [("p_a_db", self.p_a_db.values()), ("p_max_db", self.p_max_db.values())] {
            if vals.is_empty() || vals.iter().any(|v| !v.is_finite()) {
                return bad(format!("{name} values must be finite, got {vals:?}"));
            }
        }
        Ok(())
    }

    /// Rate versus Alan's power for a 20-element surface.
    pub fn fig3(realizations: usize, base_seed: u64) -> Self {
        Self {
            layout: NodeLayout::default(),
            fading: FadingParams::default(),
            n_r: OneOrMany::One(20),
            p_a_db: OneOrMany::Many((0..7).map(|k| 60.0 + 5.0 * k as f64).collect()),
            p_max_db: OneOrMany::One(60.0),
            methods: default_methods(),
            realizations,
            base_seed,
            sca: ScaOptions::default(),
            rounds: DEFAULT_ROUNDS,
        }
    }

    /// Rate versus surface size for two amplification budgets.
    pub fn fig4(realizations: usize, base_seed: u64) -> Self {
        Self {
            n_r: OneOrMany::Many((1..=10).map(|k| 4 * k).collect()),
            p_a_db: OneOrMany::One(80.0),
            p_max_db: OneOrMany::Many(vec![50.0, 60.0]),
            ..Self::fig3(realizations, base_seed)
        }
    }

    fn points(&self) -> Vec<(f64, f64)> {
        let mut pts = Vec::new();
        for p_a in self.p_a_db.values() {
            for p_max in self.p_max_db.values() {
                pts.push((p_a, p_max));
            }
        }
        pts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: Method,
    pub n_r: usize,
    pub p_a_db: f64,
    pub p_max_db: f64,
    pub realization: u64,
    pub sinr_b_db: f64,
    pub sinr_e_db: f64,
    pub rate_bps_hz: f64,
    pub status: String,
}

impl ResultRow {
    fn record(&self) -> [String; 9] {
        [
            self.method.to_string(),
            self.n_r.to_string(),
            self.p_a_db.to_string(),
            self.p_max_db.to_string(),
            self.realization.to_string(),
            self.sinr_b_db.to_string(),
            self.sinr_e_db.to_string(),
            self.rate_bps_hz.to_string(),
            self.status.clone(),
        ]
    }

    fn sort_key(&self) -> (Method, usize, u64, u64, u64) {
        (
            self.method,
            self.n_r,
            ordered(self.p_a_db),
            ordered(self.p_max_db),
            self.realization,
        )
    }
}

/// Order-preserving map of a finite float onto `u64`.
fn ordered(x: f64) -> u64 {
    let b = x.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | 1 << 63
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub method: Method,
    pub n_r: usize,
    pub p_a_db: f64,
    pub p_max_db: f64,
    pub mean_rate_bps_hz: f64,
    pub realizations: usize,
}

/// Output of one method on one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub row: ResultRow,
    /// Round-by-round record of the SCA method.
    pub trace: Option<ScaTrace>,
}

fn outcome_label(o: ScaOutcome) -> &'static str {
    match o {
        ScaOutcome::Converged => "converged",
        ScaOutcome::RoundLimit => "round-limit",
        ScaOutcome::InfeasibleFallback => "infeasible-fallback",
        ScaOutcome::NumericalFallback => "numerical-fallback",
    }
}

/// Runs every method of `cfg` on one channel realization at one
/// `(P_A, P_max)` point.
#[allow(clippy::too_many_arguments)]
pub fn run_point(
    cfg: &ExperimentConfig,
    ch: &ChannelSet,
    p_a_db: f64,
    p_max_db: f64,
    realization: u64,
) -> Result<Vec<MethodRun>> {
    let pb = PowerBudget::from_db(p_a_db, p_max_db);
    let aug = augment(ch);
    let n_r = ch.n_elements();
    let mut out = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let (v, eval_pb, mut status, trace): (ReflectVector, PowerBudget, &str, _) = match method {
            Method::ActiveSca => {
                let res = sca_solve(ch, &aug, &pb, &cfg.sca)?;
                (res.v, pb, outcome_label(res.outcome), Some(res.trace))
            }
            Method::ActiveElementwise => {
                let v = coordinate_descent(ch, &pb, cfg.rounds, Complex64::new(cfg.sca.init_value[0], cfg.sca.init_value[1]))?;
                (v, pb, "ok", None)
            }
            Method::Passive => (passive_optimize(ch, &pb, cfg.rounds)?, pb.passive(), "ok", None),
        };
        let rep = eavesdrop_rate_within(&v, &aug, &eval_pb, REPORT_TOL);
        if !rep.eavesdrop_ok && status == "ok" {
            status = "eavesdrop-infeasible";
        }
        out.push(MethodRun {
            row: ResultRow {
                method,
                n_r,
                p_a_db,
                p_max_db,
                realization,
                sinr_b_db: to_db(rep.sinr_b),
                sinr_e_db: to_db(rep.sinr_e),
                rate_bps_hz: rep.rate,
                status: status.to_string(),
            },
            trace,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Sorted by method, `n_r`, `p_a_db`, `p_max_db`, realization.
    pub runs: Vec<MethodRun>,
    pub summary: Vec<SummaryRow>,
}

impl SweepResult {
    pub fn rows(&self) -> impl Iterator<Item = &ResultRow> {
        self.runs.iter().map(|r| &r.row)
    }
}

pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let n_rs = cfg.n_r.values();
    let points = cfg.points();
    // One job per (surface size, realization): the channels are drawn once
    // and shared by every power point and method.
    let jobs: Vec<(usize, u64)> = n_rs
        .iter()
        .flat_map(|&n| (0..cfg.realizations as u64).map(move |r| (n, r)))
        .collect();
    let per_job: Vec<Vec<MethodRun>> = jobs
        .par_iter()
        .map(|&(n, r)| {
            let ch = generate_channels(&cfg.layout, &cfg.fading, n, RngStream::new(cfg.base_seed, r))?;
            let mut runs = Vec::new();
            for &(p_a, p_max) in &points {
                runs.extend(run_point(cfg, &ch, p_a, p_max, r)?);
            }
            Ok(runs)
        })
        .collect::<Result<_>>()?;
    let mut runs: Vec<MethodRun> = per_job.into_iter().flatten().collect();
    runs.sort_by_key(|r| r.row.sort_key());
    let summary = summarize(runs.iter().map(|r| &r.row));
    Ok(SweepResult { runs, summary })
}

/// Mean rate per method and sweep point, in row order.
pub fn summarize<'a>(rows: impl Iterator<Item = &'a ResultRow>) -> Vec<SummaryRow> {
    let mut groups: BTreeMap<(Method, usize, u64, u64), (f64, f64, f64, usize)> = BTreeMap::new();
    for r in rows {
        let key = (r.method, r.n_r, ordered(r.p_a_db), ordered(r.p_max_db));
        let g = groups.entry(key).or_insert((r.p_a_db, r.p_max_db, 0.0, 0));
        g.2 += r.rate_bps_hz;
        g.3 += 1;
    }
    groups
        .into_iter()
        .map(|((method, n_r, _, _), (p_a_db, p_max_db, sum, count))| SummaryRow {
            method,
            n_r,
            p_a_db,
            p_max_db,
            mean_rate_bps_hz: sum / count as f64,
            realizations: count,
        })
        .collect()
}

pub fn write_rows<'a, W: io::Write>(w: W, rows: impl Iterator<Item = &'a ResultRow>) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(ROW_HEADER)?;
    for r in rows {
        wr.write_record(r.record())?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_summary<W: io::Write>(w: W, summary: &[SummaryRow]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(SUMMARY_HEADER)?;
    for s in summary {
        wr.write_record([
            s.method.to_string(),
            s.n_r.to_string(),
            s.p_a_db.to_string(),
            s.p_max_db.to_string(),
            s.mean_rate_bps_hz.to_string(),
            s.realizations.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

/// SCA traces of every row that has one, keyed by the row's sweep point.
pub fn write_traces<W: io::Write>(w: W, runs: &[MethodRun]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([
        "n_r",
        "p_a_db",
        "p_max_db",
        "realization",
        "round",
        "objective",
        "sinr_b",
        "sinr_e",
        "status",
    ])?;
    for run in runs {
        let Some(trace) = &run.trace else { continue };
        let r = &run.row;
        for t in &trace.rounds {
            wr.write_record([
                r.n_r.to_string(),
                r.p_a_db.to_string(),
                r.p_max_db.to_string(),
                r.realization.to_string(),
                t.round.to_string(),
                t.objective.to_string(),
                t.sinr_b.to_string(),
                t.sinr_e.to_string(),
                format!("{:?}", t.status),
            ])?;
        }
    }
    wr.flush()?;
    Ok(())
}
