use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use adt_reduce::ast::{parse, parse_with, print_model, AdtModel, Script, VarSort};
use adt_reduce::backend::{emit_smtlib, BackendKind, SolverConfig};
use adt_reduce::corpus::CorpusConfig;
use adt_reduce::interp::{interpolate, InterpConfig, InterpResult, InterpolationProblem, INTERP_ENV};
use adt_reduce::models::check_model;
use adt_reduce::normalize::normalize;
use adt_reduce::pipeline::{decide, mode_for, DecideConfig, DecideError, Verdict};
use adt_reduce::reduce::{reduce, simplify, ReduceOptions};
use adt_reduce::sizesolve::{completeness_report, DEFAULT_FUEL};
use adt_reduce::suite::{run_suite, SuiteConfig};

#[derive(Parser, Debug)]
#[command(name = "adt-reduce", version, about = "Decide algebraic data type constraints by reduction to EUF+LIA")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Opts {
    /// Solver for reduced formulas.
    #[arg(long, global = true, value_enum, default_value_t = Backend::Builtin)]
    backend: Backend,
    /// Command of the external SMT-LIB solver.
    #[arg(long, global = true, value_name = "CMD")]
    external_cmd: Option<String>,
    /// Unfolding budget for size constraints.
    #[arg(long, global = true, default_value_t = DEFAULT_FUEL)]
    fuel: usize,
    /// Disable the enumeration and guarded-selector optimizations.
    #[arg(long, global = true)]
    no_opt: bool,
    /// Print node counts after parsing, reduction and simplification.
    #[arg(long, global = true)]
    stats: bool,
    /// Check sat models against the input before printing them.
    #[arg(long, global = true)]
    check_model: bool,
    /// Seed of the random corpus.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Backend {
    Builtin,
    External,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Decide the conjunction of the assertions of a script.
    Solve { file: PathBuf },
    /// Report cardinalities, size images and expandingness of the datatypes.
    Analyze { file: PathBuf },
    /// Print the reduced formula as SMT-LIB.
    Emit { file: PathBuf },
    /// Compute an interpolant of the assertions of two scripts.
    Interpolate {
        file_a: PathBuf,
        /// Parsed with the declarations of the first script.
        file_b: PathBuf,
        /// Interpolating solver command (default: the ADT_REDUCE_INTERP variable).
        #[arg(long, value_name = "CMD")]
        interp_cmd: Option<String>,
        /// Budget of the interpolation query in seconds.
        #[arg(long, default_value_t = 60)]
        timeout: u64,
    },
    /// Run the agreement suite on a seeded random corpus.
    Corpus {
        #[arg(long, default_value_t = 6)]
        signatures: usize,
        #[arg(long, default_value_t = 100)]
        formulas: usize,
        /// Cross-check every verdict with the external solver.
        #[arg(long)]
        cross_check: bool,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Self {
        Failure { code: 1, msg: msg.into() }
    }

    fn input(msg: impl Into<String>) -> Self {
        Failure { code: 2, msg: msg.into() }
    }

    fn backend(msg: impl Into<String>) -> Self {
        Failure { code: 3, msg: msg.into() }
    }
}

impl From<DecideError> for Failure {
    fn from(e: DecideError) -> Self {
        match e {
            DecideError::Reduce(e) => Failure::input(e.to_string()),
            e => Failure::backend(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let cross_check = matches!(cli.cmd, Cmd::Corpus { cross_check: true, .. });
    let cfg = decide_config(&cli.opts, cross_check)?;
    match &cli.cmd {
        Cmd::Solve { file } => solve_cmd(&read_script(file)?, &cfg, &cli.opts),
        Cmd::Analyze { file } => Ok(analyze_cmd(&read_script(file)?)),
        Cmd::Emit { file } => emit_cmd(&read_script(file)?, &cfg, &cli.opts),
        Cmd::Interpolate {
            file_a,
            file_b,
            interp_cmd,
            timeout,
        } => {
            let a = read_script(file_a)?;
            let text = read_file(file_b)?;
            let b = parse_with(&text, &a).map_err(|e| Failure::input(format!("{}: {e}", file_b.display())))?;
            let cmd = interp_cmd
                .clone()
                .or_else(|| std::env::var(INTERP_ENV).ok().filter(|c| !c.trim().is_empty()))
                .ok_or_else(|| {
                    Failure::backend(format!("no interpolating solver: use --interp-cmd or set {INTERP_ENV}"))
                })?;
            let icfg = InterpConfig {
                decide: cfg,
                timeout: std::time::Duration::from_secs(*timeout),
            };
            interpolate_cmd(&a, &b, &cmd, &icfg)
        }
        Cmd::Corpus {
            signatures,
            formulas,
            cross_check,
        } => {
            let external = if *cross_check {
                Some(adt_reduce::backend::resolve_command(cli.opts.external_cmd.as_deref()))
            } else {
                None
            };
            let scfg = SuiteConfig {
                corpus: CorpusConfig {
                    seed: cli.opts.seed,
                    signatures: *signatures,
                    formulas_per_signature: *formulas,
                    ..CorpusConfig::default()
                },
                decide: cfg,
                external,
                ..SuiteConfig::default()
            };
            let report = run_suite(&scfg).map_err(|(name, e)| Failure::backend(format!("{name}: {e}")))?;
            let mut out = report.to_string();
            if cli.opts.stats {
                let _ = writeln!(out, "; slowest instance: {} ms", report.slowest().as_millis());
            }
            for d in report.disagreements() {
                let _ = writeln!(
                    out,
                    "disagreement {}: verdict {}, oracle {:?}, unoptimized {:?}, external {:?}, utvpi {:?}",
                    d.name, d.verdict, d.oracle, d.unoptimized, d.external, d.utvpi_error
                );
            }
            Ok(out)
        }
    }
}

/// `cross_check` allows an external command next to the builtin backend.
fn decide_config(opts: &Opts, cross_check: bool) -> Result<DecideConfig, Failure> {
    let backend = match opts.backend {
        Backend::Builtin => {
            if opts.external_cmd.is_some() && !cross_check {
                return Err(Failure::usage("--external-cmd requires --backend external"));
            }
            BackendKind::Builtin
        }
        Backend::External => BackendKind::External(opts.external_cmd.clone()),
    };
    Ok(DecideConfig {
        solver: SolverConfig {
            backend,
            ..SolverConfig::default()
        },
        reduce: if opts.no_opt {
            ReduceOptions::unoptimized()
        } else {
            ReduceOptions::default()
        },
        fuel: opts.fuel,
    })
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn read_script(path: &Path) -> Result<Script, Failure> {
    parse(&read_file(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

/// Completes `m` with default values for declared variables it lacks.
fn complete_model(script: &Script, m: &AdtModel) -> AdtModel {
    let mut m = m.clone();
    for (name, sort) in &script.vars {
        match sort {
            VarSort::Adt(s) => {
                m.adt.entry(name.clone()).or_insert_with(|| script.sig.default_term(*s));
            }
            VarSort::Int => {
                m.ints.entry(name.clone()).or_insert(0);
            }
        }
    }
    m.adt.retain(|n, _| script.var_sort(n).is_some());
    m.ints.retain(|n, _| script.var_sort(n).is_some());
    m
}

fn stats_lines(script: &Script, opts: &DecideConfig) -> Result<String, Failure> {
    let f = script.formula();
    let flat = normalize(&script.sig, &f);
    let reduct = reduce(&script.sig, &flat, mode_for(&f), &opts.reduce).map_err(|e| Failure::input(e.to_string()))?;
    Ok(format!(
        "; nodes: parse {}, reduct {}, simplified {}\n",
        f.node_count(),
        reduct.node_count(),
        simplify(&reduct).node_count()
    ))
}

fn solve_cmd(script: &Script, cfg: &DecideConfig, opts: &Opts) -> Result<String, Failure> {
    let f = script.formula();
    let d = decide(&script.sig, &f, cfg)?;
    let mut out = String::new();
    match &d.verdict {
        Verdict::Sat(m) => {
            let m = complete_model(script, m);
            if opts.check_model {
                let check = check_model(&script.sig, &m, &f).map_err(|e| Failure::backend(e.to_string()))?;
                if !check.holds {
                    return Err(Failure::backend(format!(
                        "model check failed: {}",
                        check.diagnostic.unwrap_or_default()
                    )));
                }
            }
            out.push_str("sat\n");
            out.push_str(&print_model(&script.sig, &m));
            out.push('\n');
        }
        Verdict::Unsat => out.push_str("unsat\n"),
        Verdict::Unknown(why) => {
            out.push_str("unknown\n");
            let _ = writeln!(out, "; {why}");
        }
    }
    if opts.stats {
        out.push_str(&stats_lines(script, cfg)?);
        let _ = writeln!(out, "; mode: {:?}, unfolding rounds: {}", d.mode, d.rounds);
    }
    Ok(out)
}

fn analyze_cmd(script: &Script) -> String {
    let sig = &script.sig;
    let mut out = String::new();
    for s in sig.sorts() {
        let _ = writeln!(
            out,
            "{}: cardinality {}, size image {}",
            sig.sort_name(s),
            sig.cardinality(s),
            sig.size_image(s)
        );
    }
    out.push_str(&completeness_report(sig));
    out
}

fn emit_cmd(script: &Script, cfg: &DecideConfig, opts: &Opts) -> Result<String, Failure> {
    let f = script.formula();
    let flat = normalize(&script.sig, &f);
    let reduct = reduce(&script.sig, &flat, mode_for(&f), &cfg.reduce).map_err(|e| Failure::input(e.to_string()))?;
    let mut out = emit_smtlib(&reduct);
    if !out.ends_with('\n') {
        out.push('\n');
    }
    if opts.stats {
        out.push_str(&stats_lines(script, cfg)?);
    }
    Ok(out)
}

fn interpolate_cmd(a: &Script, b: &Script, cmd: &str, cfg: &InterpConfig) -> Result<String, Failure> {
    let prob = InterpolationProblem::new(a.formula(), b.formula());
    match interpolate(&prob, &b.sig, cmd, cfg) {
        Ok(InterpResult::Interpolant(i)) => Ok(format!("{}\n", i.display(&b.sig))),
        Ok(InterpResult::NotUnsat(m)) => Ok(format!("not-unsat\n{}\n", print_model(&b.sig, &m))),
        Ok(InterpResult::Untranslatable(raw)) => Err(Failure::backend(format!("untranslatable interpolant: {raw}"))),
        Err(e) => Err(Failure::backend(e.to_string())),
    }
}
