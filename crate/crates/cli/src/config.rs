//! Command line and TOML configuration, merged into one [`RunConfig`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use hslab::mesh::Grading;
use hslab::minimizer::{MeshConfig, SolverConfig};
use hslab::params::QSpec;
use hslab::{Error, ParamSet, Result};

#[derive(Parser, Debug)]
#[command(name = "hslab", version, about = "Optimal constants of anisotropic Hardy-Sobolev inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Args, Debug, Default)]
pub struct GlobalArgs {
    /// TOML file with flat keys named like the flags; flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub nr: Option<usize>,
    #[arg(long, global = true)]
    pub ns: Option<usize>,
    #[arg(long, global = true)]
    pub rmax: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub grading: Option<GradingArg>,
    #[arg(long = "max-iters", global = true)]
    pub max_iters: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Where to write the final profile (mesh CSV) of a descent.
    #[arg(long, global = true)]
    pub profile: Option<PathBuf>,
    #[arg(short = 'd', global = true)]
    pub d: Option<u32>,
    #[arg(short = 'k', global = true)]
    pub k: Option<u32>,
    #[arg(short = 'p', global = true, allow_hyphen_values = true)]
    pub p: Option<f64>,
    /// A number, `pstar` or `pstar_eff`.
    #[arg(short = 'q', global = true, allow_hyphen_values = true)]
    pub q: Option<String>,
    #[arg(short = 'a', global = true, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(short = 'b', global = true, allow_hyphen_values = true)]
    pub b: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Admissibility, regime and attainability verdict.
    Classify,
    /// Estimate the optimal constant by descent plus competitors.
    Constant {
        #[arg(long, value_enum)]
        init: Option<InitArg>,
    },
    /// Estimate the cylindrical constant (b = gamma = 0).
    Mazya {
        #[arg(long, value_enum)]
        init: Option<InitArg>,
    },
    /// Radial minimization with weight exponent a - b at q = p*.
    Radial,
    /// Evaluate a test family at several parameter values.
    Family {
        #[arg(long, value_enum)]
        kind: Option<FamilyArg>,
        /// Comma-separated h, t, epsilon or lambda values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
        /// Radius of the base profile.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long = "r-in")]
        r_in: Option<f64>,
        #[arg(long = "r-out")]
        r_out: Option<f64>,
    },
    /// Residual of the integration-by-parts identity behind the transform.
    VerifyTb,
    /// Sweep gamma.
    SweepGamma {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        gammas: Vec<f64>,
    },
    /// Bottom-case sweep over b with gamma = b.
    SweepB {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        bs: Vec<f64>,
    },
    /// Regime table for the given tuple or the `rows` of the config file.
    Table,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Markdown,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradingArg {
    Uniform,
    Log,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitArg {
    Gaussian,
    Talenti,
    Random,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Translate,
    Concentrate,
    Dilate,
    RadialPower,
    Horiuchi,
    Talenti,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Classify,
    Constant,
    Mazya,
    Radial,
    Family,
    VerifyTb,
    SweepGamma,
    SweepB,
    Table,
}

/// Keys of the configuration file.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    d: Option<u32>,
    k: Option<u32>,
    p: Option<f64>,
    q: Option<QSpec>,
    a: Option<f64>,
    b: Option<f64>,
    gamma: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    seed: Option<u64>,
    nr: Option<usize>,
    ns: Option<usize>,
    rmax: Option<f64>,
    grading: Option<GradingArg>,
    #[serde(alias = "max_iters")]
    max_iters: Option<usize>,
    tol: Option<f64>,
    profile: Option<PathBuf>,
    #[serde(alias = "renormalize_every")]
    renormalize_every: Option<usize>,
    #[serde(alias = "delta_rel")]
    delta_rel: Option<f64>,
    init: Option<InitArg>,
    kind: Option<FamilyArg>,
    values: Option<Vec<f64>>,
    radius: Option<f64>,
    #[serde(alias = "r_in")]
    r_in: Option<f64>,
    #[serde(alias = "r_out")]
    r_out: Option<f64>,
    gammas: Option<Vec<f64>>,
    bs: Option<Vec<f64>>,
    rows: Option<Vec<ParamSet>>,
}

/// Everything one run needs.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: CommandKind,
    pub params: Option<ParamSet>,
    pub solver: SolverConfig,
    pub output_path: Option<PathBuf>,
    pub profile_path: Option<PathBuf>,
    pub format: Format,
    pub init: Option<InitArg>,
    pub family: FamilyArg,
    pub values: Vec<f64>,
    pub radius: f64,
    pub radii: (f64, f64),
    pub gammas: Vec<f64>,
    pub bs: Vec<f64>,
    pub rows: Vec<ParamSet>,
}

fn read_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn need<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Parse(format!("missing parameter \"{name}\" (flag or config key)")))
}

/// Merges flags over the configuration file and resolves `q`.
pub fn parse_config(cli: Cli) -> Result<RunConfig> {
    let g = cli.global;
    let file = match &g.config {
        Some(p) => read_file(p)?,
        None => FileConfig::default(),
    };
    let (command, init, fam, values, radius, r_in, r_out, gammas, bs) = match cli.command {
        Command::Classify => (CommandKind::Classify, None, None, vec![], None, None, None, vec![], vec![]),
        Command::Constant { init } => (CommandKind::Constant, init, None, vec![], None, None, None, vec![], vec![]),
        Command::Mazya { init } => (CommandKind::Mazya, init, None, vec![], None, None, None, vec![], vec![]),
        Command::Radial => (CommandKind::Radial, None, None, vec![], None, None, None, vec![], vec![]),
        Command::Family { kind, values, radius, r_in, r_out } => {
            (CommandKind::Family, None, kind, values, radius, r_in, r_out, vec![], vec![])
        }
        Command::VerifyTb => (CommandKind::VerifyTb, None, None, vec![], None, None, None, vec![], vec![]),
        Command::SweepGamma { gammas } => (CommandKind::SweepGamma, None, None, vec![], None, None, None, gammas, vec![]),
        Command::SweepB { bs } => (CommandKind::SweepB, None, None, vec![], None, None, None, vec![], bs),
        Command::Table => (CommandKind::Table, None, None, vec![], None, None, None, vec![], vec![]),
    };
    let or_list = |flag: Vec<f64>, file: Option<Vec<f64>>| if flag.is_empty() { file.unwrap_or_default() } else { flag };
    let rows = file.rows.clone().unwrap_or_default();

    let q = match &g.q {
        Some(s) => Some(QSpec::parse(s).map_err(|e| Error::Parse(format!("flag -q: {e}")))?),
        None => file.q.clone(),
    };
    let any_param = [g.d.is_some(), g.k.is_some(), g.p.is_some(), q.is_some(), file.d.is_some()].iter().any(|x| *x);
    let params = if command == CommandKind::Table && !rows.is_empty() && !any_param {
        None
    } else {
        let d = need(g.d.or(file.d), "d")?;
        let k = need(g.k.or(file.k), "k")?;
        let p = need(g.p.or(file.p), "p")?;
        let q = need(q, "q")?;
        let a = need(g.a.or(file.a), "a")?;
        // coordinates the command overwrites need not be given
        let (b_free, gamma_free) = match command {
            CommandKind::Mazya | CommandKind::SweepB => (true, true),
            CommandKind::SweepGamma => (false, true),
            _ => (false, false),
        };
        let b = need(g.b.or(file.b).or(b_free.then_some(0.0)), "b")?;
        let gamma = need(g.gamma.or(file.gamma).or(gamma_free.then_some(0.0)), "gamma")?;
        let qv = q.resolve(d, p, a)?;
        Some(ParamSet::new(d, k, p, qv, a, b, gamma)?)
    };

    let radius = radius.or(file.radius).unwrap_or(1.0);
    let default_rmax = match command {
        CommandKind::VerifyTb => 3.0,
        CommandKind::Family => 1.25 * radius,
        _ => 20.0,
    };
    let grading = match g.grading.or(file.grading) {
        Some(GradingArg::Uniform) => Grading::Uniform,
        Some(GradingArg::Log) => Grading::LogGraded,
        None if command == CommandKind::VerifyTb || command == CommandKind::Family => Grading::Uniform,
        None => Grading::LogGraded,
    };
    let defaults = SolverConfig::default();
    let solver = SolverConfig {
        max_iters: g.max_iters.or(file.max_iters).unwrap_or(defaults.max_iters),
        tol_rel: g.tol.or(file.tol).unwrap_or(defaults.tol_rel),
        renormalize_every: file.renormalize_every.unwrap_or(defaults.renormalize_every),
        seed: g.seed.or(file.seed).unwrap_or(defaults.seed),
        delta_rel: file.delta_rel.unwrap_or(defaults.delta_rel),
        mesh: MeshConfig {
            nr: g.nr.or(file.nr).unwrap_or(defaults.mesh.nr),
            ns: g.ns.or(file.ns).unwrap_or(defaults.mesh.ns),
            r_max: g.rmax.or(file.rmax).unwrap_or(default_rmax),
            grading,
        },
        ..defaults
    };
    solver.validate()?;

    let format = g.format.or(file.format).unwrap_or(match command {
        CommandKind::Family | CommandKind::SweepGamma | CommandKind::SweepB => Format::Csv,
        CommandKind::Table => Format::Markdown,
        _ => Format::Json,
    });
    if format == Format::Markdown && command != CommandKind::Table {
        return Err(Error::Parse("--format markdown is only available for table".into()));
    }
    Ok(RunConfig {
        command,
        params,
        solver,
        output_path: g.out.or(file.out),
        profile_path: g.profile.or(file.profile),
        format,
        init: init.or(file.init),
        family: fam.or(file.kind).unwrap_or(FamilyArg::Translate),
        values: or_list(values, file.values),
        radius,
        radii: (r_in.or(file.r_in).unwrap_or(1e-4), r_out.or(file.r_out).unwrap_or(1e4)),
        gammas: or_list(gammas, file.gammas),
        bs: or_list(bs, file.bs),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn parse(args: &[&str]) -> Result<RunConfig> {
        let mut v = vec!["hslab"];
        v.extend_from_slice(args);
        parse_config(Cli::try_parse_from(v).map_err(|e| Error::Parse(e.to_string()))?)
    }

    #[test]
    fn flags_only() {
        let c = parse(&["classify", "-d", "4", "-k", "2", "-p", "2", "-q", "pstar", "-a", "1", "-b", "-0.5", "--gamma", "-0.5"]).unwrap();
        let p = c.params.unwrap();
        assert_eq!((p.d, p.k, p.q, p.b, p.gamma), (4, 2, 4.0, -0.5, -0.5));
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.command, CommandKind::Classify);
    }

    #[test]
    fn flag_overrides_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "d = 4\nk = 2\np = 2.0\nq = 3\na = 0.0\nb = 0.0\ngamma = 0.0\nnr = 40\nmax-iters = 500").unwrap();
        let path = f.path().to_str().unwrap();
        let c = parse(&["constant", "--config", path, "-q", "pstar", "--nr", "64"]).unwrap();
        assert_eq!(c.params.unwrap().q, 4.0);
        assert_eq!(c.solver.mesh.nr, 64);
        assert_eq!(c.solver.max_iters, 500);
        let c = parse(&["constant", "--config", path]).unwrap();
        assert_eq!(c.params.unwrap().q, 3.0);
        assert_eq!(c.solver.mesh.nr, 40);
    }

    #[test]
    fn missing_d_is_named() {
        match parse(&["classify", "-k", "2", "-p", "2", "-q", "3", "-a", "0", "-b", "0", "--gamma", "0"]) {
            Err(Error::Parse(m)) => assert!(m.contains("\"d\"")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overwritten_coordinates_default_to_zero() {
        let c = parse(&["mazya", "-d", "3", "-k", "2", "-p", "2", "-q", "4", "-a", "0"]).unwrap();
        let ps = c.params.unwrap();
        assert_eq!((ps.b, ps.gamma), (0.0, 0.0));
        let c = parse(&["sweep-gamma", "-d", "4", "-k", "2", "-p", "2", "-q", "3", "-a", "0", "-b", "0.5"]).unwrap();
        assert_eq!(c.params.unwrap().b, 0.5);
        assert!(parse(&["constant", "-d", "3", "-k", "1", "-p", "2", "-q", "6", "-a", "0", "-b", "0"]).is_err());
    }

    #[test]
    fn gamma_below_b_parses() {
        let c = parse(&["classify", "-d", "4", "-k", "2", "-p", "2", "-q", "3", "-a", "0", "-b", "0.5", "--gamma", "0"]).unwrap();
        assert!(c.params.unwrap().gamma < 0.5);
    }

    #[test]
    fn file_errors_carry_context() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "d = 4\nbogus = 1").unwrap();
        match parse(&["classify", "--config", f.path().to_str().unwrap()]) {
            Err(Error::Parse(m)) => assert!(m.contains("bogus") && m.contains("line")),
            other => panic!("{other:?}"),
        }
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "q = \"pstr\"").unwrap();
        assert!(matches!(parse(&["classify", "--config", f.path().to_str().unwrap()]), Err(Error::Parse(_))));
        assert!(matches!(parse(&["classify", "--config", "/nonexistent/x.toml"]), Err(Error::Parse(_))));
    }

    #[test]
    fn resolution_bounds() {
        let base = ["constant", "-d", "3", "-k", "1", "-p", "2", "-q", "6", "-a", "0", "-b", "0", "--gamma", "0"];
        let mut v = base.to_vec();
        v.extend(["--nr", "5000"]);
        assert!(matches!(parse(&v), Err(Error::BadResolution(5000))));
    }

    #[test]
    fn table_rows_from_file() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "[[rows]]\nd = 4\nk = 2\np = 2.0\nq = 3.0\na = 0.5\nb = 0.25\ngamma = 1.0").unwrap();
        let c = parse(&["table", "--config", f.path().to_str().unwrap()]).unwrap();
        assert!(c.params.is_none());
        assert_eq!(c.rows.len(), 1);
        assert_eq!(c.format, Format::Markdown);
        assert!(parse(&["constant", "--format", "markdown", "-d", "3", "-k", "1", "-p", "2", "-q", "6", "-a", "0", "-b", "0", "--gamma", "0"]).is_err());
    }
}
