//! `ghlpc <command>`: argument parsing, command dispatch and file output.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use ghlpc_core::normal_form::Derivatives;
use ghlpc_core::predictor::{log_grid, Order, Predictor};
use ghlpc_core::verify::{
    dde_convergence_study, fit_slope, homological_residual, ode_convergence_study, CorrectorOptions, Tolerances,
};
use ghlpc_core::C64;
use serde::Serialize;

use crate::analysis::Analysis;
use crate::builtin::{Builtin, GhGuess, Model};
use crate::dsl::{parse_model, DslError};
use crate::report::{
    CoeffReport, PredictFile, PredictReport, ResidualFamily, ResidualReport, StudyReport, SCHEMA,
};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {err}")]
    Parse { path: String, err: DslError },
    #[error("{0}")]
    Numeric(ghlpc_core::Error),
    #[error("{path}: {err}")]
    Io { path: String, err: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 3,
            _ => 2,
        }
    }
}

impl From<ghlpc_core::Error> for CliError {
    fn from(e: ghlpc_core::Error) -> Self {
        CliError::Numeric(e)
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Coeffs,
    Predict,
    Verify,
    Residual,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    First,
    Higher,
    Both,
}

impl OrderArg {
    fn orders(self) -> Vec<Order> {
        match self {
            OrderArg::First => vec![Order::First],
            OrderArg::Higher => vec![Order::Higher],
            OrderArg::Both => vec![Order::First, Order::Higher],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Jets,
    Exact,
}

impl BackendArg {
    fn derivatives(self) -> Derivatives {
        match self {
            BackendArg::Jets => Derivatives::Jets,
            BackendArg::Exact => Derivatives::Exact,
        }
    }

    fn name(self) -> &'static str {
        match self {
            BackendArg::Jets => "jets",
            BackendArg::Exact => "exact",
        }
    }
}

/// Generalized Hopf normal forms, LPC predictors and their verification.
#[derive(Debug, Parser)]
#[command(name = "ghlpc", version)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Model file in the `.ghm` language.
    #[arg(long, conflicts_with = "builtin")]
    pub model: Option<PathBuf>,
    /// One of bazykin-khibnik, lorenz84, fhn-dde.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Starting point, e.g. `x=0.25:0.5,alpha=0.25:0.125,omega=0.35`.
    #[arg(long)]
    pub gh_guess: Option<String>,
    #[arg(long, default_value_t = 0.01)]
    pub eps_min: f64,
    #[arg(long, default_value_t = 0.15)]
    pub eps_max: f64,
    #[arg(long, default_value_t = 12)]
    pub eps_count: usize,
    #[arg(long, value_enum, default_value_t = OrderArg::Both)]
    pub order: OrderArg,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    pub backend: BackendArg,
    /// Orbit samples per period for `predict` and the DDE residual study.
    #[arg(long, default_value_t = 128)]
    pub psi_points: usize,
    #[arg(long)]
    pub newton_tol: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
}

/// Parses `x=a:b,alpha=a:b,omega=w`.
pub fn parse_gh_guess(s: &str) -> Result<GhGuess> {
    let bad = |m: &str| CliError::Usage(format!("--gh-guess: {m}"));
    let list = |v: &str| -> Result<Vec<f64>> {
        v.split(':').map(|t| t.trim().parse::<f64>().map_err(|_| bad(&format!("bad number '{t}'")))).collect()
    };
    let (mut x, mut alpha, mut omega) = (None, None, None);
    for part in s.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(|| bad(&format!("expected key=value, got '{part}'")))?;
        match k.trim() {
            "x" => x = Some(list(v)?),
            "alpha" => {
                let a = list(v)?;
                if a.len() != 2 {
                    return Err(bad("alpha needs two values"));
                }
                alpha = Some([a[0], a[1]]);
            }
            "omega" => omega = Some(v.trim().parse::<f64>().map_err(|_| bad("bad omega"))?),
            other => return Err(bad(&format!("unknown key '{other}'"))),
        }
    }
    match (x, alpha, omega) {
        (Some(x), Some(alpha), Some(omega)) if omega > 0.0 => Ok(GhGuess { x, alpha, omega }),
        (_, _, Some(_)) | (_, _, None) => Err(bad("x, alpha and a positive omega are all required")),
    }
}

struct Loaded {
    name: String,
    model: Model,
    guess: GhGuess,
}

fn load(cfg: &RunConfig) -> Result<Loaded> {
    let override_guess = cfg.gh_guess.as_deref().map(parse_gh_guess).transpose()?;
    let (name, model, default_guess) = match (&cfg.model, &cfg.builtin) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|err| CliError::Io { path: path.display().to_string(), err })?;
            let def = parse_model(&text).map_err(|err| CliError::Parse { path: path.display().to_string(), err })?;
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            (name, Model::Dsl(def), None)
        }
        (None, Some(b)) => {
            let bi = Builtin::from_name(b).ok_or_else(|| {
                let names: Vec<&str> = Builtin::ALL.iter().map(|b| b.name()).collect();
                CliError::Usage(format!("unknown builtin '{b}' (expected one of {})", names.join(", ")))
            })?;
            (bi.name().to_string(), bi.native(), Some(bi.guess()))
        }
        (None, None) => return Err(CliError::Usage("one of --model or --builtin is required".into())),
    };
    let guess = override_guess
        .or(default_guess)
        .ok_or_else(|| CliError::Usage("--gh-guess is required with --model".into()))?;
    Ok(Loaded { name, model, guess })
}

fn eps_grid(cfg: &RunConfig) -> Result<Vec<f64>> {
    if !(cfg.eps_min > 0.0 && cfg.eps_max > cfg.eps_min && cfg.eps_count >= 2) {
        return Err(CliError::Usage("need 0 < --eps-min < --eps-max and --eps-count >= 2".into()));
    }
    Ok(log_grid(cfg.eps_min, cfg.eps_max, cfg.eps_count))
}

fn corrector_options(cfg: &RunConfig) -> CorrectorOptions {
    let d = CorrectorOptions::default();
    let t = Tolerances::default();
    CorrectorOptions {
        newton_tol: cfg.newton_tol.unwrap_or(d.newton_tol),
        integration: Tolerances { rtol: cfg.rtol.unwrap_or(t.rtol), atol: cfg.atol.unwrap_or(t.atol), ..t },
        ..d
    }
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|err| CliError::Io { path: path.display().to_string(), err })
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    write(path, s.as_bytes())
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let io = |e: csv::Error| CliError::Io { path: path.display().to_string(), err: e.into() };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io { path: path.display().to_string(), err: e.into_error() })?;
    write(path, &bytes)
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn opt_num(x: f64) -> String {
    if x.is_finite() {
        num(x)
    } else {
        String::new()
    }
}

fn strings(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Runs one command from a full argument list (including the program name).
pub fn run<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) if e.use_stderr() => return Err(CliError::Usage(e.to_string())),
        Err(e) => {
            print!("{e}");
            return Ok(());
        }
    };
    execute(&cfg)
}

pub fn execute(cfg: &RunConfig) -> Result<()> {
    let loaded = load(cfg)?;
    fs::create_dir_all(&cfg.out).map_err(|err| CliError::Io { path: cfg.out.display().to_string(), err })?;
    let analysis = Analysis::run(&loaded.model, &loaded.guess, cfg.backend.derivatives())?;
    match cfg.command {
        Command::Coeffs => {
            let r = CoeffReport::new(&loaded.name, cfg.backend.name(), &analysis);
            write_json(&cfg.out.join("coeffs.json"), &r)
        }
        Command::Predict => predict(cfg, &loaded, &analysis),
        Command::Verify => verify(cfg, &loaded, &analysis),
        Command::Residual => residual(cfg, &loaded, &analysis),
    }
}

fn predict(cfg: &RunConfig, loaded: &Loaded, analysis: &Analysis) -> Result<()> {
    let pred = analysis.predictor()?;
    let eps = eps_grid(cfg)?;
    let mut files = Vec::new();
    for order in cfg.order.orders() {
        let curve = pred.predict(&eps, cfg.psi_points, order)?;
        let table = format!("predict_{}.csv", order.name());
        let orbit = format!("predict_{}_orbit.csv", order.name());
        let rows: Vec<Vec<String>> = curve
            .samples
            .iter()
            .map(|s| [s.eps, s.beta[0], s.beta[1], s.alpha[0], s.alpha[1], s.period].iter().map(|v| num(*v)).collect())
            .collect();
        write_csv(&cfg.out.join(&table), &strings(&["eps", "beta1", "beta2", "alpha1", "alpha2", "T"]), &rows)?;
        let mut header = strings(&["eps", "psi"]);
        header.extend((0..pred.x0.len()).map(|i| format!("x{}", i + 1)));
        let mut orows = Vec::new();
        for s in &curve.samples {
            for (psi, x) in s.psi.iter().zip(&s.orbit) {
                let mut r = vec![num(s.eps), num(*psi)];
                r.extend(x.iter().map(|v| num(*v)));
                orows.push(r);
            }
        }
        write_csv(&cfg.out.join(&orbit), &header, &orows)?;
        files.push(PredictFile { order: order.name(), table, orbit });
    }
    let r = PredictReport {
        schema: SCHEMA,
        model: loaded.name.clone(),
        x0: pred.x0.clone(),
        alpha0: pred.alpha0,
        omega0: pred.omega0,
        d2: pred.d2,
        d3: pred.d3,
        a3201: pred.a3201,
        eps,
        files,
    };
    write_json(&cfg.out.join("predict.json"), &r)
}

fn verify(cfg: &RunConfig, loaded: &Loaded, analysis: &Analysis) -> Result<()> {
    let pred: Predictor = analysis.predictor()?;
    let eps = eps_grid(cfg)?;
    let dde = matches!(analysis, Analysis::Dde { .. });
    let report = if dde {
        dde_convergence_study(&loaded.model, &pred, &eps, cfg.psi_points)?
    } else {
        ode_convergence_study(&loaded.model, &pred, &eps, &corrector_options(cfg))?
    };
    let r = StudyReport::new(&loaded.name, dde, &report);
    let rows: Vec<Vec<String>> = (0..eps.len())
        .map(|i| {
            let mut row = vec![num(eps[i]), opt_num(report.errors_first[i]), opt_num(report.errors_higher[i])];
            if !dde {
                row.push(report.iterations[i].map(|k| k.to_string()).unwrap_or_default());
            }
            row
        })
        .collect();
    let mut header = strings(&["eps", "error_first", "error_higher"]);
    if !dde {
        header.push("iterations".into());
    }
    write_csv(&cfg.out.join("verify.csv"), &header, &rows)?;
    write_json(&cfg.out.join("verify.json"), &r)
}

fn residual(cfg: &RunConfig, loaded: &Loaded, analysis: &Analysis) -> Result<()> {
    let ws = log_grid(1e-2, 1e-1, 6);
    let bs = log_grid(1e-3, 1.6e-2, 6);
    let x0 = analysis.x0().to_vec();
    let a0 = analysis.alpha0();
    let res = |w: C64, b: [f64; 2]| -> ghlpc_core::Result<f64> {
        match analysis {
            Analysis::Ode { params, .. } => homological_residual(&loaded.model, &x0, a0, &params.tables, w, b),
            Analysis::Dde { params, .. } => homological_residual(&loaded.model, &x0, a0, &params.tables, w, b),
        }
    };
    let rw = ws.iter().map(|&h| res(C64::new(h, 0.3 * h), [0.0, 0.0])).collect::<ghlpc_core::Result<Vec<_>>>()?;
    let rb = bs.iter().map(|&h| res(C64::new(0.0, 0.0), [0.0, h])).collect::<ghlpc_core::Result<Vec<_>>>()?;
    let slope = |h: &[f64], r: &[f64]| -> Result<Option<f64>> {
        if r.iter().all(|v| *v > 0.0) {
            Ok(Some(fit_slope(h, r)?.slope))
        } else {
            Ok(None)
        }
    };
    let families = vec![
        ResidualFamily { name: "w", slope: slope(&ws, &rw)?, h: ws, residual: rw },
        ResidualFamily { name: "beta2", slope: slope(&bs, &rb)?, h: bs, residual: rb },
    ];
    let rows: Vec<Vec<String>> = families
        .iter()
        .flat_map(|f| f.h.iter().zip(&f.residual).map(move |(h, r)| vec![f.name.to_string(), num(*h), num(*r)]))
        .collect();
    write_csv(&cfg.out.join("residual.csv"), &strings(&["family", "h", "residual"]), &rows)?;
    write_json(&cfg.out.join("residual.json"), &ResidualReport { schema: SCHEMA, model: loaded.name.clone(), families })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gh_guess_round_trip() {
        let g = parse_gh_guess("x=0.25:0.5,alpha=0.25:0.125,omega=0.35").unwrap();
        assert_eq!(g, GhGuess { x: vec![0.25, 0.5], alpha: [0.25, 0.125], omega: 0.35 });
        assert!(parse_gh_guess("x=1,alpha=1,omega=0.3").is_err());
        assert!(parse_gh_guess("x=1,alpha=1:2").is_err());
        assert!(parse_gh_guess("x=1,alpha=1:2,omega=-1").is_err());
        assert!(parse_gh_guess("y=1").is_err());
    }
}
