//! Deciding EUF+LIA reducts: a built-in solver and an SMT-LIB client for
//! external solvers.

mod builtin;
pub mod external;
pub mod lia;
pub mod smtlib;

use std::collections::BTreeMap;
use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::reduce::ReducedFormula;
use crate::reduced::{ITerm, Lin, RFormula};

pub use builtin::{solve_builtin, Limits};
pub use external::{resolve_command, solve_external, SOLVER_ENV};
pub use smtlib::emit_smtlib;

/// Integer assignment plus finite function graphs; every function is
/// total with value 0 outside its graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntModel {
    pub vars: BTreeMap<String, i64>,
    pub funs: BTreeMap<String, BTreeMap<Vec<i64>, i64>>,
}

impl IntModel {
    pub fn var(&self, v: &str) -> i64 {
        self.vars.get(v).copied().unwrap_or(0)
    }

    pub fn apply(&self, f: &str, args: &[i64]) -> i64 {
        self.funs
            .get(f)
            .and_then(|g| g.get(args))
            .copied()
            .unwrap_or(0)
    }

    pub fn term(&self, t: &ITerm) -> i64 {
        match t {
            ITerm::Var(v) => self.var(v),
            ITerm::Const(c) => *c,
            ITerm::App(f, args) => {
                let vals: Vec<i64> = args.iter().map(|a| self.term(a)).collect();
                self.apply(f, &vals)
            }
        }
    }

    pub fn lin(&self, l: &Lin) -> i128 {
        l.terms
            .iter()
            .map(|(c, t)| *c as i128 * self.term(t) as i128)
            .sum::<i128>()
            + l.constant as i128
    }

    /// Truth value of `f` under this model.
    pub fn eval(&self, f: &RFormula) -> bool {
        match f {
            RFormula::True => true,
            RFormula::False => false,
            RFormula::Cmp(op, a, b) => op.holds(self.lin(a), self.lin(b)),
            RFormula::Not(x) => !self.eval(x),
            RFormula::And(xs) => xs.iter().all(|x| self.eval(x)),
            RFormula::Or(xs) => xs.iter().any(|x| self.eval(x)),
        }
    }
}

impl fmt::Display for IntModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (v, x) in &self.vars {
            writeln!(f, "{v} = {x}")?;
        }
        for (g, graph) in &self.funs {
            for (args, x) in graph {
                let args: Vec<String> = args.iter().map(i64::to_string).collect();
                writeln!(f, "{g}({}) = {x}", args.join(", "))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverResult {
    Sat(IntModel),
    Unsat,
    Unknown(String),
}

impl SolverResult {
    pub fn verdict(&self) -> &'static str {
        match self {
            SolverResult::Sat(_) => "sat",
            SolverResult::Unsat => "unsat",
            SolverResult::Unknown(_) => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("cannot start solver `{0}`: {1}")]
    Spawn(String, String),
    #[error("unexpected solver output: {0}")]
    Protocol(String),
    #[error("model does not satisfy the formula: {0}")]
    BadModel(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendKind {
    Builtin,
    /// External SMT-LIB solver; `None` uses the environment or `z3`.
    External(Option<String>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub backend: BackendKind,
    pub limits: Limits,
    /// Wall-clock budget per query.
    pub timeout: Duration,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            backend: BackendKind::Builtin,
            limits: Limits::default(),
            timeout: Duration::from_secs(30),
        }
    }
}

/// Decides `f`; models of `Sat` answers are re-checked before returning.
pub fn solve_formula(f: &RFormula, cfg: &SolverConfig) -> Result<SolverResult, SolverError> {
    let res = match &cfg.backend {
        BackendKind::Builtin => solve_builtin(f, &cfg.limits, Some(cfg.timeout)),
        BackendKind::External(cmd) => {
            let cmd = resolve_command(cmd.as_deref());
            solve_external(f, &cmd, cfg.timeout)?
        }
    };
    if let SolverResult::Sat(m) = &res {
        if !m.eval(f) {
            return Err(SolverError::BadModel(m.to_string()));
        }
    }
    Ok(res)
}

pub fn solve(reduct: &ReducedFormula, cfg: &SolverConfig) -> Result<SolverResult, SolverError> {
    solve_formula(&reduct.formula, cfg)
}

#[cfg(test)]
mod tests;
