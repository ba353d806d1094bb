//! Parameter sweeps and the regime table.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::bottom_jb;
use crate::io::{fmt17, write_rows};
use crate::mesh::ProfileGrid;
use crate::minimizer::{descend_symmetric, minimize_quotient, minimize_quotient_with, ConcentrationFlag, Init, MinimizeResult, SolverConfig};
use crate::params::{classify, near, Attainability, ParamSet, Regime, Verdict};

/// Relative band separating solver noise from a real change.
pub const GAMMA_NOISE: f64 = 0.02;
pub const BOTTOM_BAND: f64 = 0.03;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    Gamma,
    B,
    Q,
    A,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub param: f64,
    pub estimate: Option<f64>,
    pub converged: bool,
    pub flag: Option<ConcentrationFlag>,
    /// Error of this point, when the solver refused or failed.
    pub error: Option<String>,
}

/// Outcome of one check made over a whole sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    pub verdicts: Vec<Verdict>,
    pub bstar_estimate: Option<f64>,
    /// Cylindrical constant the bottom sweep compares against.
    pub mazya_estimate: Option<f64>,
    /// `max |Delta estimate / Delta b|` over consecutive points.
    pub lipschitz_estimate: Option<f64>,
    pub checks: Vec<SweepCheck>,
}

impl SweepResult {
    fn empty(axis: SweepAxis) -> Self {
        SweepResult {
            axis,
            points: vec![],
            verdicts: vec![],
            bstar_estimate: None,
            mazya_estimate: None,
            lipschitz_estimate: None,
            checks: vec![],
        }
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// CSV rows `param,estimate,converged,flag`; failed points have an empty estimate.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        write_rows(
            out,
            &["param", "estimate", "converged", "flag"],
            self.points.iter().map(|p| {
                vec![
                    fmt17(p.param),
                    p.estimate.map(fmt17).unwrap_or_default(),
                    p.converged.to_string(),
                    match (&p.flag, &p.error) {
                        (Some(f), _) => format!("{f:?}"),
                        (None, Some(e)) => e.clone(),
                        (None, None) => String::new(),
                    },
                ]
            }),
        )
    }

    /// JSON sidecar: the whole result including verdicts and checks.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn point(param: f64, r: Result<MinimizeResult>) -> SweepPoint {
    match r {
        Ok(m) => SweepPoint {
            param,
            estimate: Some(m.constant_estimate),
            converged: m.converged,
            flag: Some(m.concentration_flag),
            error: None,
        },
        Err(e) => SweepPoint {
            param,
            estimate: None,
            converged: false,
            flag: None,
            error: Some(match e {
                Error::NotPositive(_) => "NotPositive".to_string(),
                other => other.to_string(),
            }),
        },
    }
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Estimates `S_{a,b,gamma}(q)` along `gamma`; a decrease larger than the
/// noise band between consecutive estimates fails the monotonicity check.
pub fn sweep_gamma(ps_base: &ParamSet, gammas: &[f64], cfg: &SolverConfig) -> Result<SweepResult> {
    sweep_gamma_from(ps_base, gammas, cfg, &Init::GaussianBump)
}

pub fn sweep_gamma_from(ps_base: &ParamSet, gammas: &[f64], cfg: &SolverConfig, init: &Init) -> Result<SweepResult> {
    ps_base.validate()?;
    cfg.validate()?;
    let gs = sorted(gammas);
    let points: Vec<SweepPoint> = gs
        .par_iter()
        .map(|&g| point(g, minimize_quotient(&ParamSet { gamma: g, ..*ps_base }, cfg, init)))
        .collect();
    let verdicts = gs.iter().map(|&g| classify(&ParamSet { gamma: g, ..*ps_base })).collect();
    let mut res = SweepResult { points, verdicts, ..SweepResult::empty(SweepAxis::Gamma) };
    if res.points.len() > 1 {
        let est: Vec<(f64, f64)> = res.points.iter().filter_map(|p| p.estimate.map(|e| (p.param, e))).collect();
        let bad: Vec<String> = est
            .windows(2)
            .filter(|w| w[1].1 < w[0].1 * (1.0 - GAMMA_NOISE))
            .map(|w| format!("{} -> {}", w[0].0, w[1].0))
            .collect();
        res.checks.push(SweepCheck {
            name: "nondecreasing in gamma".into(),
            passed: bad.is_empty(),
            detail: if bad.is_empty() { "ok".into() } else { format!("decrease beyond noise at {}", bad.join(", ")) },
        });
    }
    Ok(res)
}

/// Bottom-case sweep `gamma = b`, `p = 2`.
pub fn sweep_bottom_b(ps_base: &ParamSet, bs: &[f64], cfg: &SolverConfig) -> Result<SweepResult> {
    sweep_bottom_b_from(ps_base, bs, cfg, &Init::GaussianBump)
}

pub fn sweep_bottom_b_from(ps_base: &ParamSet, bs: &[f64], cfg: &SolverConfig, init: &Init) -> Result<SweepResult> {
    ps_base.validate()?;
    cfg.validate()?;
    if !near(ps_base.p, 2.0) {
        return Err(Error::WrongP(ps_base.p));
    }
    let limit = 2.0 * ps_base.h_of(ps_base.a);
    if let Some(b) = bs.iter().find(|&&b| !(b < limit)) {
        return Err(Error::OutOfRange(format!("need b < 2H_a = {limit}, got b = {b}")));
    }
    if bs.is_empty() {
        return Ok(SweepResult::empty(SweepAxis::B));
    }
    let cyl = descend_symmetric(&ps_base.cylindrical(), cfg, init)?;
    let m = cyl.constant_estimate;
    let bs = sorted(bs);
    let points: Vec<SweepPoint> = bs
        .par_iter()
        .map(|&b| {
            let ps = ps_base.bottom(b);
            if b == 0.0 {
                return point(b, Ok(cyl.clone()));
            }
            point(b, minimize_quotient_with(&ps, cfg, init, Some(&cyl)))
        })
        .collect();
    let verdicts = bs.iter().map(|&b| classify(&ps_base.bottom(b))).collect();
    let mut res = SweepResult { points, verdicts, mazya_estimate: Some(m), ..SweepResult::empty(SweepAxis::B) };
    let est: Vec<(f64, f64)> = res.points.iter().filter_map(|p| p.estimate.map(|e| (p.param, e))).collect();
    res.bstar_estimate = est.iter().find(|(_, e)| *e < m * (1.0 - BOTTOM_BAND)).map(|(b, _)| *b);
    res.lipschitz_estimate = est
        .windows(2)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))));
    let neg: Vec<&(f64, f64)> = est.iter().filter(|(b, _)| *b < 0.0).collect();
    let off: Vec<String> = neg.iter().filter(|(_, e)| (e / m - 1.0).abs() > BOTTOM_BAND).map(|(b, e)| format!("b = {b}: {e}")).collect();
    res.checks.push(SweepCheck {
        name: "equals the cylindrical constant for b < 0".into(),
        passed: off.is_empty(),
        detail: if off.is_empty() { format!("{} points within {BOTTOM_BAND} of {m}", neg.len()) } else { off.join("; ") },
    });
    let tail: Vec<&(f64, f64)> = match res.bstar_estimate {
        Some(bs) => est.iter().filter(|(b, _)| *b >= bs).collect(),
        None => vec![],
    };
    let flat: Vec<String> = tail
        .windows(2)
        .filter(|w| !(w[1].1 < w[0].1 * (1.0 - BOTTOM_BAND)))
        .map(|w| format!("{} -> {}", w[0].0, w[1].0))
        .collect();
    res.checks.push(SweepCheck {
        name: "strictly decreasing beyond b*".into(),
        passed: res.bstar_estimate.is_some() && flat.is_empty(),
        detail: match res.bstar_estimate {
            None => "no point below the cylindrical constant".into(),
            Some(_) if flat.is_empty() => "ok".into(),
            Some(_) => format!("no decrease beyond the band at {}", flat.join(", ")),
        },
    });
    Ok(res)
}

/// `J_b` of one fixed profile at each `b`; `true` when strictly decreasing.
pub fn jb_fixed_profile(ps_base: &ParamSet, g: &ProfileGrid, bs: &[f64]) -> Result<(Vec<f64>, bool)> {
    let bs = sorted(bs);
    let v = bs.iter().map(|&b| bottom_jb(&ps_base.bottom(b), g).map(|r| r.quotient)).collect::<Result<Vec<_>>>()?;
    let dec = v.windows(2).all(|w| w[1] < w[0]);
    Ok((v, dec))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub params: ParamSet,
    pub positive: bool,
    pub regime: Regime,
    pub attainability: Attainability,
    pub citations: Vec<String>,
    pub condition_note: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegimeTable {
    pub rows: Vec<TableRow>,
}

const TABLE_HEADER: [&str; 12] =
    ["d", "k", "p", "q", "a", "b", "gamma", "positive", "regime", "attainability", "citations", "note"];

impl RegimeTable {
    fn cells(r: &TableRow) -> Vec<String> {
        let p = &r.params;
        vec![
            p.d.to_string(),
            p.k.to_string(),
            fmt17(p.p),
            fmt17(p.q),
            fmt17(p.a),
            fmt17(p.b),
            fmt17(p.gamma),
            r.positive.to_string(),
            format!("{:?}", r.regime),
            format!("{:?}", r.attainability),
            r.citations.join("; "),
            r.condition_note.clone(),
        ]
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("| {} |\n|{}\n", TABLE_HEADER.join(" | "), "---|".repeat(TABLE_HEADER.len()));
        for r in &self.rows {
            let mut c = Self::cells(r);
            for i in 2..7 {
                c[i] = format!("{}", [r.params.p, r.params.q, r.params.a, r.params.b, r.params.gamma][i - 2]);
            }
            s.push_str(&format!("| {} |\n", c.join(" | ").replace('\n', " ")));
        }
        s
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        write_rows(out, &TABLE_HEADER, self.rows.iter().map(Self::cells))
    }
}

/// One classified row per tuple.
pub fn regime_table(ps_list: &[ParamSet]) -> RegimeTable {
    RegimeTable {
        rows: ps_list
            .iter()
            .map(|ps| {
                let v = classify(ps);
                TableRow {
                    params: *ps,
                    positive: v.positive,
                    regime: v.regime,
                    attainability: v.attainability,
                    citations: v.citations,
                    condition_note: v.condition_note,
                }
            })
            .collect(),
    }
}
