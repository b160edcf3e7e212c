//! Agreement suite over a generated corpus: every instance is decided,
//! compared with the bounded enumeration oracle, with the unoptimized
//! reduction and optionally with an external solver, and measured.

use std::fmt;
use std::time::{Duration, Instant};

use crate::backend::{BackendKind, SolverConfig};
use crate::corpus::{generate, CorpusConfig, Instance};
use crate::normalize::normalize;
use crate::oracle::{bounded_search, within_bounds, OracleConfig, OracleError, OracleVerdict};
use crate::pipeline::{decide, mode_for, DecideConfig, DecideError, Verdict};
use crate::reduce::{check_utvpi, reduce, simplify, Mode, ReduceError, ReduceOptions};

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub corpus: CorpusConfig,
    pub decide: DecideConfig,
    pub oracle: OracleConfig,
    /// Also decide every instance without the reduction optimizations.
    pub compare_unoptimized: bool,
    /// External solver command to cross-check verdicts with.
    pub external: Option<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            corpus: CorpusConfig::default(),
            decide: DecideConfig::default(),
            oracle: OracleConfig::default(),
            compare_unoptimized: true,
            external: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleOutcome {
    Model,
    NoModel,
    TooLarge,
}

#[derive(Debug, Clone)]
pub struct InstanceReport {
    pub name: String,
    pub mode: Mode,
    pub verdict: &'static str,
    pub oracle: OracleOutcome,
    /// Verdict and oracle do not contradict each other.
    pub consistent: bool,
    /// Sat models lie within the oracle bounds.
    pub model_in_bounds: Option<bool>,
    /// Verdict without the optimizations, when compared.
    pub unoptimized: Option<&'static str>,
    /// Verdict of the external solver, when compared.
    pub external: Option<&'static str>,
    /// UTVPI shape violation of the depth-mode reduct.
    pub utvpi_error: Option<String>,
    pub sig_size: usize,
    pub input_nodes: usize,
    pub reduct_nodes: usize,
    pub simplified_nodes: usize,
    pub elapsed: Duration,
}

impl InstanceReport {
    /// `|reduct| / (n * |formula|)` with `n` the signature size.
    pub fn blowup(&self) -> f64 {
        self.reduct_nodes as f64 / (self.sig_size * self.input_nodes) as f64
    }

    /// Two verdicts agree unless one is sat and the other unsat.
    fn compatible(a: &str, b: &str) -> bool {
        !matches!((a, b), ("sat", "unsat") | ("unsat", "sat"))
    }

    pub fn agrees(&self) -> bool {
        self.consistent
            && self.unoptimized.is_none_or(|u| Self::compatible(u, self.verdict))
            && self.external.is_none_or(|e| Self::compatible(e, self.verdict))
            && self.utvpi_error.is_none()
    }
}

#[derive(Debug, Clone, Default)]
pub struct SuiteReport {
    pub instances: Vec<InstanceReport>,
}

impl SuiteReport {
    /// The corpus-wide blow-up constant: the largest per-instance ratio.
    pub fn blowup_constant(&self) -> f64 {
        self.instances.iter().map(InstanceReport::blowup).fold(0.0, f64::max)
    }

    pub fn count(&self, verdict: &str) -> usize {
        self.instances.iter().filter(|i| i.verdict == verdict).count()
    }

    pub fn disagreements(&self) -> Vec<&InstanceReport> {
        self.instances.iter().filter(|i| !i.agrees()).collect()
    }

    pub fn slowest(&self) -> Duration {
        self.instances.iter().map(|i| i.elapsed).max().unwrap_or_default()
    }

    fn mean(&self, f: impl Fn(&InstanceReport) -> usize) -> f64 {
        let n = self.instances.len().max(1);
        self.instances.iter().map(f).sum::<usize>() as f64 / n as f64
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.instances.len();
        let depth = self.instances.iter().filter(|i| i.mode == Mode::Depth).count();
        writeln!(f, "instances: {n} ({depth} depth mode, {} size mode)", n - depth)?;
        writeln!(
            f,
            "verdicts: {} sat, {} unsat, {} unknown",
            self.count("sat"),
            self.count("unsat"),
            self.count("unknown")
        )?;
        let oracle = |o| self.instances.iter().filter(|i| i.oracle == o).count();
        writeln!(
            f,
            "oracle: {} model, {} no model, {} too large",
            oracle(OracleOutcome::Model),
            oracle(OracleOutcome::NoModel),
            oracle(OracleOutcome::TooLarge)
        )?;
        writeln!(f, "disagreements: {}", self.disagreements().len())?;
        writeln!(
            f,
            "mean nodes: input {:.1}, reduct {:.1}, simplified {:.1}",
            self.mean(|i| i.input_nodes),
            self.mean(|i| i.reduct_nodes),
            self.mean(|i| i.simplified_nodes)
        )?;
        writeln!(f, "blow-up constant C: {:.3}", self.blowup_constant())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SuiteError {
    #[error(transparent)]
    Decide(#[from] DecideError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

fn verdict_name(r: Result<Verdict, DecideError>) -> Result<&'static str, SuiteError> {
    Ok(r?.name())
}

/// Runs one instance through every comparison.
pub fn run_instance(inst: &Instance, cfg: &SuiteConfig) -> Result<InstanceReport, SuiteError> {
    let sig = &inst.script.sig;
    let f = inst.script.formula();
    let mode = mode_for(&f);
    let flat = normalize(sig, &f);
    let reduct = reduce(sig, &flat, mode, &cfg.decide.reduce)?;
    let utvpi_error = match mode {
        Mode::Depth => check_utvpi(&reduct.formula).err(),
        Mode::Size => None,
    };
    let start = Instant::now();
    let verdict = decide(sig, &f, &cfg.decide)?.verdict;
    let elapsed = start.elapsed();
    let oracle = match bounded_search(sig, &inst.script.vars, &f, &cfg.oracle)? {
        OracleVerdict::Model(_) => OracleOutcome::Model,
        OracleVerdict::NoModel => OracleOutcome::NoModel,
        OracleVerdict::TooLarge(_) => OracleOutcome::TooLarge,
    };
    let model_in_bounds = match &verdict {
        Verdict::Sat(m) => Some(within_bounds(m, &cfg.oracle)),
        _ => None,
    };
    // a bounded model refutes unsat, and a bounded sat model must have
    // been found by the exhaustive oracle
    let consistent = match (&verdict, oracle) {
        (Verdict::Unsat, OracleOutcome::Model) => false,
        (Verdict::Sat(_), OracleOutcome::NoModel) => model_in_bounds == Some(false),
        _ => true,
    };
    let unoptimized = if cfg.compare_unoptimized {
        let plain = DecideConfig {
            reduce: ReduceOptions::unoptimized(),
            ..cfg.decide.clone()
        };
        Some(verdict_name(decide(sig, &f, &plain).map(|d| d.verdict))?)
    } else {
        None
    };
    let external = match &cfg.external {
        Some(cmd) => {
            let ext = DecideConfig {
                solver: SolverConfig {
                    backend: BackendKind::External(Some(cmd.clone())),
                    ..cfg.decide.solver.clone()
                },
                ..cfg.decide.clone()
            };
            Some(verdict_name(decide(sig, &f, &ext).map(|d| d.verdict))?)
        }
        None => None,
    };
    Ok(InstanceReport {
        name: inst.name.clone(),
        mode,
        verdict: verdict.name(),
        oracle,
        consistent,
        model_in_bounds,
        unoptimized,
        external,
        utvpi_error,
        sig_size: sig.symbol_count(),
        input_nodes: f.node_count(),
        reduct_nodes: reduct.node_count(),
        simplified_nodes: simplify(&reduct).node_count(),
        elapsed,
    })
}

/// Generates the corpus of `cfg` and runs every instance.
pub fn run_suite(cfg: &SuiteConfig) -> Result<SuiteReport, (String, SuiteError)> {
    let mut report = SuiteReport::default();
    for inst in generate(&cfg.corpus) {
        let r = run_instance(&inst, cfg).map_err(|e| (inst.name.clone(), e))?;
        report.instances.push(r);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_agrees() {
        let cfg = SuiteConfig {
            corpus: CorpusConfig {
                signatures: 2,
                formulas_per_signature: 12,
                ..CorpusConfig::default()
            },
            ..SuiteConfig::default()
        };
        let report = run_suite(&cfg).unwrap();
        assert_eq!(report.instances.len(), 24);
        assert!(report.disagreements().is_empty(), "{report}{:#?}", report.disagreements());
        assert!(report.blowup_constant() > 0.0);
    }
}
