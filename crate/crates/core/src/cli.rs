//! Command-line front end.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::cmforms::{stabilize, CMSpec, Grossencharacter};
use crate::eigen::Convention;
use crate::padic::Modulus;
use crate::pipeline::{enlarged, run, PipelineError, RunConfig};
use crate::verify::{report, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConventionArg {
    Paper,
    Table,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Paper => Convention::Paper,
            ConventionArg::Table => Convention::Table,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "ovmf", version, about = "Generalized overconvergent eigenforms at critical CM points")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the q-expansion of the CM form (and its critical stabilization when --p is given).
    CmForm(CmFormArgs),
    /// Compute the normalized generalized eigenform and its prime coefficients.
    #[command(alias = "generalized-eigenform")]
    Eigenform(RunArgs),
    /// Run all predicates; exit status 0 iff every asserted check passes.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct CmFormArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub disc: i64,
    #[arg(long)]
    pub weight: u32,
    #[arg(long, default_value_t = 10)]
    pub terms: usize,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long, default_value_t = 24)]
    pub prec: u32,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub disc: Option<i64>,
    #[arg(long)]
    pub weight: Option<u32>,
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub prec: Option<u32>,
    /// Number of Katz layers, or "auto".
    #[arg(long, default_value = "auto")]
    pub levels: String,
    /// q-expansion truncation, or "auto".
    #[arg(long, default_value = "auto")]
    pub terms: String,
    #[arg(long, default_value_t = 100)]
    pub lmax: u64,
    #[arg(long, value_enum, default_value_t = ConventionArg::Table)]
    pub convention: ConventionArg,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Fixed precision buffer; by default it grows until the target is certified.
    #[arg(long)]
    pub buffer: Option<u32>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Check against one of the two bundled reference tables.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub paper_example: Option<u8>,
    /// Skip the rerun with enlarged depth and precision.
    #[arg(long)]
    pub skip_stability: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("computation failed: {0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Compute(_) => 1,
        }
    }
}

fn from_pipeline(e: PipelineError) -> CliError {
    match e {
        PipelineError::Cm(e) => CliError::Validation(e.to_string()),
        PipelineError::Padic(e) => CliError::Validation(e.to_string()),
        e => CliError::Compute(e.to_string()),
    }
}

fn parse_auto(s: &str, what: &str) -> Result<Option<usize>, CliError> {
    if s == "auto" {
        return Ok(None);
    }
    s.parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .map(Some)
        .ok_or_else(|| CliError::Validation(format!("--{what} must be a positive integer or \"auto\"")))
}

impl RunArgs {
    pub fn to_config(&self, example: Option<u8>) -> Result<RunConfig, CliError> {
        let base = example.and_then(RunConfig::example);
        let pick = |v: Option<i64>, b: Option<i64>, name: &str| {
            v.or(b)
                .ok_or_else(|| CliError::Validation(format!("--{name} is required")))
        };
        let disc = pick(self.disc, base.as_ref().map(|c| c.disc), "disc")?;
        let weight = pick(self.weight.map(i64::from), base.as_ref().map(|c| c.weight as i64), "weight")? as u32;
        let p = pick(self.p.map(|x| x as i64), base.as_ref().map(|c| c.p as i64), "p")? as u64;
        let prec = pick(self.prec.map(i64::from), base.as_ref().map(|c| c.m_target as i64), "prec")? as u32;
        let mut cfg = RunConfig::new(disc, weight, p, prec);
        cfg.n_levels = parse_auto(&self.levels, "levels")?;
        cfg.t_q = parse_auto(&self.terms, "terms")?;
        cfg.lmax = self.lmax;
        cfg.convention = self.convention.into();
        cfg.buffer = self.buffer;
        Ok(cfg)
    }
}

fn render(rep: &VerificationReport, format: Format) -> String {
    match format {
        Format::Json => rep.to_json(),
        Format::Csv => rep.to_csv(),
        Format::Text => rep.to_text(),
    }
}

pub fn cmd_cm_form(args: &CmFormArgs) -> Result<String, CliError> {
    let psi = Grossencharacter::new(args.disc, args.weight).map_err(|e| CliError::Validation(e.to_string()))?;
    let g0 = psi.qexpansion(args.terms);
    let coeffs: Vec<String> = g0.to_integers().expect("integral").iter().map(|x| x.to_string()).collect();
    let stab = match args.p {
        Some(p) => {
            let spec = CMSpec::new(args.disc, args.weight, p, args.prec).map_err(|e| CliError::Validation(e.to_string()))?;
            if args.terms < p as usize {
                return Err(CliError::Validation(format!("--terms must be at least p = {p}")));
            }
            let md = Modulus::new(p, args.prec).map_err(|e| CliError::Validation(e.to_string()))?;
            Some(stabilize(&spec, &g0, &md).map_err(|e| CliError::Validation(e.to_string()))?)
        }
        None => None,
    };
    Ok(match args.format {
        Format::Json => {
            let mut v = json!({
                "disc": args.disc,
                "weight": args.weight,
                "level": psi.level(),
                "g0": g0.to_json(),
            });
            if let Some(s) = &stab {
                v["stabilized"] = json!({
                    "p": args.p,
                    "prec": args.prec,
                    "a_p": s.a_p.to_string(),
                    "alpha": s.alpha,
                    "beta": s.beta,
                    "alpha_valuation": s.alpha.valuation(),
                    "f": s.f.to_json(),
                });
            }
            serde_json::to_string_pretty(&v).expect("json")
        }
        Format::Csv => {
            let mut s = String::from(if stab.is_some() { "n,a_n,f_n\n" } else { "n,a_n\n" });
            for (n, c) in coeffs.iter().enumerate() {
                match &stab {
                    Some(st) => writeln!(s, "{n},{c},{}", st.f.coeffs()[n]),
                    None => writeln!(s, "{n},{c}"),
                }
                .expect("string write");
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            for (n, c) in coeffs.iter().enumerate() {
                writeln!(s, "{n:>5}  {c}").expect("string write");
            }
            if let Some(st) = &stab {
                writeln!(s, "a_p = {}, alpha = {}, beta = {}", st.a_p, st.alpha, st.beta).expect("string write");
            }
            s
        }
    })
}

fn run_report(args: &RunArgs, example: Option<u8>, stability: bool) -> Result<VerificationReport, CliError> {
    let cfg = args.to_config(example)?;
    let r = run(&cfg).map_err(from_pipeline)?;
    let bigger = if stability {
        Some(enlarged(&r).map_err(from_pipeline)?)
    } else {
        None
    };
    Ok(report(&r, bigger.as_ref(), example))
}

/// The stability rerun is part of the output whenever the depth was chosen automatically.
pub fn cmd_generalized_eigenform(args: &RunArgs) -> Result<String, CliError> {
    let rep = run_report(args, None, args.levels == "auto")?;
    Ok(render(&rep, args.format))
}

/// Returns the rendered report and whether every asserted check passed.
pub fn cmd_verify(args: &VerifyArgs) -> Result<(String, bool), CliError> {
    let rep = run_report(&args.run, args.paper_example, !args.skip_stability)?;
    Ok((render(&rep, args.run.format), rep.all_passed()))
}

/// Caps the global thread pool with `OVMF_THREADS` when set.
pub fn init_threads() {
    if let Some(n) = std::env::var("OVMF_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    init_threads();
    let result = match &cli.command {
        Command::CmForm(a) => cmd_cm_form(a).map(|s| (s, true)),
        Command::Eigenform(a) => cmd_generalized_eigenform(a).map(|s| (s, true)),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok((out, ok)) => {
            println!("{}", out.trim_end());
            if ok {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
