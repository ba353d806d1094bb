//! Dispatch of a [`RunConfig`] to the library and report writing.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Value};

use hslab::families::{
    bump_grid, concentrate_family_quotient, radial_power_profile, talenti_radial, write_family_csv, BaseProfile,
    FamilyKind, FamilySpec,
};
use hslab::functionals::{hardy_quotient, verify_tb_identity, QuotientReport};
use hslab::io::{fmt17, write_rows};
use hslab::mesh::write_grid_csv;
use hslab::minimizer::{
    estimate_mazya_from, minimize_quotient_with, minimize_radial, Init, MinimizeResult,
};
use hslab::params::classify;
use hslab::radial::log_nodes;
use hslab::scanner::{regime_table, sweep_bottom_b, sweep_gamma, SweepResult};
use hslab::{Error, ParamSet, Result};

use crate::config::{CommandKind, FamilyArg, Format, InitArg, RunConfig};

/// Process exit status for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Diverged(_) => 3,
        Error::NotPositive(_) => 4,
        _ => 2,
    }
}

/// Executes the command and writes its report. Returns the exit status.
pub fn run(cfg: &RunConfig) -> i32 {
    match execute(cfg) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hslab: {e}");
            exit_code(&e)
        }
    }
}

fn params(cfg: &RunConfig) -> Result<ParamSet> {
    cfg.params.ok_or_else(|| Error::Parse("missing parameter \"d\" (flag or config key)".into()))
}

fn init_of(arg: Option<InitArg>, default: Init) -> Init {
    match arg {
        Some(InitArg::Gaussian) => Init::GaussianBump,
        Some(InitArg::Talenti) => Init::TalentiLike,
        Some(InitArg::Random) => Init::Random,
        None => default,
    }
}

fn execute(cfg: &RunConfig) -> Result<()> {
    let body = match cfg.command {
        CommandKind::Classify => {
            let v = classify(&params(cfg)?);
            match cfg.format {
                Format::Json => serde_json::to_string_pretty(&json!({ "params": params(cfg)?, "verdict": v }))?,
                _ => {
                    let mut buf = Vec::new();
                    write_rows(
                        &mut buf,
                        &["positive", "regime", "attainability", "citations", "condition_note"],
                        [vec![
                            v.positive.to_string(),
                            format!("{:?}", v.regime),
                            format!("{:?}", v.attainability),
                            v.citations.join("; "),
                            v.condition_note.clone(),
                        ]],
                    )?;
                    String::from_utf8_lossy(&buf).into_owned()
                }
            }
        }
        CommandKind::Constant => {
            let ps = params(cfg)?;
            let r = minimize_quotient_with(&ps, &cfg.solver, &init_of(cfg.init, Init::TalentiLike), None)?;
            minimize_report(cfg, &ps, &r)?
        }
        CommandKind::Mazya => {
            let ps = params(cfg)?.cylindrical();
            let r = estimate_mazya_from(&ps, &cfg.solver, &init_of(cfg.init, Init::GaussianBump))?;
            minimize_report(cfg, &ps, &r)?
        }
        CommandKind::Radial => {
            let ps = params(cfg)?;
            let r = minimize_radial(&ps, &cfg.solver)?;
            minimize_report(cfg, &ps, &r)?
        }
        CommandKind::Family => family(cfg)?,
        CommandKind::VerifyTb => {
            let ps = params(cfg)?;
            let g = cfg.solver.grid(ps.d, ps.k)?;
            let (c, rad) = (0.5 * g.r_max, g.r_max / 3.0);
            let g = g.fill(|r, s| {
                let t = ((r - c).powi(2) + (s - c).powi(2)) / (rad * rad);
                if t < 1.0 { (1.0 - t).powi(3) } else { 0.0 }
            });
            let res = verify_tb_identity(&ps, &g)?;
            match cfg.format {
                Format::Json => serde_json::to_string_pretty(&json!({
                    "params": ps,
                    "nr": g.nr(),
                    "ns": g.ns(),
                    "residual": res,
                }))?,
                _ => csv_string(&["nr", "ns", "residual"], vec![vec![g.nr().to_string(), g.ns().to_string(), fmt17(res)]])?,
            }
        }
        CommandKind::SweepGamma => {
            let r = sweep_gamma(&params(cfg)?, &cfg.gammas, &cfg.solver)?;
            return write_sweep(cfg, &r);
        }
        CommandKind::SweepB => {
            let r = sweep_bottom_b(&params(cfg)?, &cfg.bs, &cfg.solver)?;
            return write_sweep(cfg, &r);
        }
        CommandKind::Table => {
            let rows = match cfg.params {
                Some(ps) => vec![ps],
                None => cfg.rows.clone(),
            };
            let t = regime_table(&rows);
            match cfg.format {
                Format::Markdown => t.to_markdown(),
                Format::Csv => {
                    let mut buf = Vec::new();
                    t.write_csv(&mut buf)?;
                    String::from_utf8_lossy(&buf).into_owned()
                }
                Format::Json => serde_json::to_string_pretty(&t)?,
            }
        }
    };
    emit(cfg.output_path.as_deref(), &body)
}

fn csv_string(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut buf = Vec::new();
    write_rows(&mut buf, header, rows)?;
    Ok(String::from_utf8_lossy(&buf).into_owned())
}

fn emit(path: Option<&Path>, body: &str) -> Result<()> {
    let nl = if body.ends_with('\n') { "" } else { "\n" };
    match path {
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            write!(f, "{body}{nl}")?;
        }
        None => {
            let mut out = std::io::stdout().lock();
            write!(out, "{body}{nl}")?;
        }
    }
    Ok(())
}

fn minimize_report(cfg: &RunConfig, ps: &ParamSet, r: &MinimizeResult) -> Result<String> {
    if let Some(path) = &cfg.profile_path {
        write_grid_csv(&r.profile, std::fs::File::create(path)?)?;
    }
    Ok(match cfg.format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "params": ps,
            "constant_estimate": r.constant_estimate,
            "descent_estimate": r.descent_estimate,
            "source": r.source,
            "converged": r.converged,
            "concentration_flag": r.concentration_flag,
            "iterations": r.iterations,
            "stationarity": r.stationarity,
            "trace": r.trace.iter().map(|(i, q)| json!([i, q])).collect::<Vec<Value>>(),
        }))?,
        _ => csv_string(
            &["constant_estimate", "descent_estimate", "source", "converged", "flag", "iterations", "stationarity"],
            vec![vec![
                fmt17(r.constant_estimate),
                fmt17(r.descent_estimate),
                format!("{:?}", r.source),
                r.converged.to_string(),
                format!("{:?}", r.concentration_flag),
                r.iterations.to_string(),
                fmt17(r.stationarity),
            ]],
        )?,
    })
}

fn family(cfg: &RunConfig) -> Result<String> {
    let ps = params(cfg)?;
    let kind = match cfg.family {
        FamilyArg::Translate => FamilyKind::TranslateAlongSigma0,
        FamilyArg::Concentrate => FamilyKind::ConcentrateAtPoint,
        FamilyArg::Dilate => FamilyKind::Dilate,
        FamilyArg::RadialPower => FamilyKind::RadialPower,
        FamilyArg::Horiuchi => FamilyKind::HoriuchiRadial,
        FamilyArg::Talenti => FamilyKind::TalentiBubble,
    };
    let values = if cfg.values.is_empty() { vec![1.0] } else { cfg.values.clone() };
    let base = match kind {
        FamilyKind::TranslateAlongSigma0 | FamilyKind::Dilate => {
            BaseProfile::Grid(bump_grid(&cfg.solver.grid(ps.d, ps.k)?, cfg.radius))
        }
        FamilyKind::TalentiBubble => BaseProfile::Grid(cfg.solver.grid(ps.d, ps.k)?),
        FamilyKind::ConcentrateAtPoint => {
            // bubble four decades inside the support so truncation is negligible
            let rho = log_nodes(2000, 1e-10 * cfg.radius, cfg.radius)?;
            BaseProfile::Radial(talenti_radial(ps.d, ps.p, 1e-4 * cfg.radius, &rho)?)
        }
        FamilyKind::RadialPower | FamilyKind::HoriuchiRadial => BaseProfile::Analytic,
    };
    let mut rows: Vec<(f64, QuotientReport)> = Vec::with_capacity(values.len());
    let mut model_errors = Vec::new();
    for &h in &values {
        let rep = match (&base, kind) {
            (_, FamilyKind::RadialPower) => {
                if !(h > 0.0) {
                    return Err(Error::OutOfRange(format!("need epsilon > 0, got {h}")));
                }
                hardy_quotient(&ps, &radial_power_profile(&ps, h, cfg.radii)?)?
            }
            (BaseProfile::Radial(r), FamilyKind::ConcentrateAtPoint) => {
                let c = concentrate_family_quotient(&ps, r, h)?;
                model_errors.push(c.model_error);
                c.report
            }
            _ => {
                let spec = FamilySpec {
                    kind,
                    base: base.clone(),
                    parameter: h,
                    center: FamilySpec::default_center(kind, ps.d, ps.k),
                };
                spec.evaluate(&ps)?
            }
        };
        rows.push((h, rep));
    }
    Ok(match cfg.format {
        Format::Json => {
            let arr: Vec<Value> = rows
                .iter()
                .enumerate()
                .map(|(i, (h, r))| {
                    let mut v = json!({ "parameter": h, "report": r });
                    if let Some(m) = model_errors.get(i) {
                        v["model_error"] = json!(m);
                    }
                    v
                })
                .collect();
            serde_json::to_string_pretty(&json!({ "kind": kind, "rows": arr }))?
        }
        _ => {
            let mut buf = Vec::new();
            write_family_csv(&mut buf, kind, &rows)?;
            String::from_utf8_lossy(&buf).into_owned()
        }
    })
}

/// CSV or JSON to the output; with CSV and a file output, the full JSON
/// report goes next to it with a `.json` extension.
fn write_sweep(cfg: &RunConfig, r: &SweepResult) -> Result<()> {
    for c in &r.checks {
        if !c.passed {
            eprintln!("hslab: check {} failed: {}", c.name, c.detail);
        }
    }
    match cfg.format {
        Format::Json => emit(cfg.output_path.as_deref(), &r.to_json()?),
        _ => {
            let mut buf = Vec::new();
            r.write_csv(&mut buf)?;
            emit(cfg.output_path.as_deref(), &String::from_utf8_lossy(&buf))?;
            if let Some(p) = &cfg.output_path {
                emit(Some(&p.with_extension("json")), &r.to_json()?)?;
            }
            Ok(())
        }
    }
}
