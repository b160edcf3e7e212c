//! End-to-end decision of ADT formulas: depth mode for formulas without
//! integer constraints, the unfolding loop otherwise.

use thiserror::Error;

use crate::ast::{AdtModel, Formula};
use crate::backend::{solve, SolverConfig, SolverError, SolverResult};
use crate::models::{check_model, reconstruct, ReconstructError};
use crate::normalize::{normalize, FlatFormula};
use crate::reduce::{reduce, simplify, Mode, ReduceError, ReduceOptions, ReducedFormula};
use crate::signature::Signature;
use crate::sizesolve::{solve_with_size, SizeSolveConfig, SizeSolveError, SizeVerdict, DEFAULT_FUEL};

#[derive(Debug, Clone)]
pub struct DecideConfig {
    pub solver: SolverConfig,
    pub reduce: ReduceOptions,
    /// Unfolding budget in size mode.
    pub fuel: usize,
}

impl Default for DecideConfig {
    fn default() -> Self {
        DecideConfig {
            solver: SolverConfig::default(),
            reduce: ReduceOptions::default(),
            fuel: DEFAULT_FUEL,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Sat(AdtModel),
    Unsat,
    Unknown(String),
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::Sat(_) => "sat",
            Verdict::Unsat => "unsat",
            Verdict::Unknown(_) => "unknown",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Decision {
    pub verdict: Verdict,
    pub mode: Mode,
    pub flat: FlatFormula,
    /// The reduct that was decided last.
    pub reduct: Option<ReducedFormula>,
    /// Unfolding rounds in size mode.
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Reduce(#[from] ReduceError),
    #[error(transparent)]
    Reconstruct(#[from] ReconstructError),
    #[error(transparent)]
    Size(#[from] SizeSolveError),
    #[error("reconstructed model falsifies {0}")]
    BadModel(String),
}

/// The reduction mode used for `f`.
pub fn mode_for(f: &Formula) -> Mode {
    if f.has_size() {
        Mode::Size
    } else {
        Mode::Depth
    }
}

/// Decides `f`; every `Sat` model has passed the model check.
pub fn decide(sig: &Signature, f: &Formula, cfg: &DecideConfig) -> Result<Decision, DecideError> {
    let flat = normalize(sig, f);
    if mode_for(f) == Mode::Size {
        let size_cfg = SizeSolveConfig {
            fuel: cfg.fuel,
            solver: cfg.solver.clone(),
            reduce: cfg.reduce.clone(),
        };
        let out = solve_with_size(sig, f, &size_cfg)?;
        let verdict = match out.verdict {
            SizeVerdict::Sat(m) => Verdict::Sat(m),
            SizeVerdict::Unsat => Verdict::Unsat,
            SizeVerdict::Unknown(why) => Verdict::Unknown(why),
        };
        return Ok(Decision {
            verdict,
            mode: Mode::Size,
            flat,
            reduct: out.last_reduct,
            rounds: out.rounds,
        });
    }
    let reduct = reduce(sig, &flat, Mode::Depth, &cfg.reduce)?;
    let verdict = match solve(&simplify(&reduct), &cfg.solver)? {
        SolverResult::Unsat => Verdict::Unsat,
        SolverResult::Unknown(why) => Verdict::Unknown(why),
        SolverResult::Sat(_) => match solve(&reduct, &cfg.solver)? {
            // the simplified reduct lacks eliminated variables
            SolverResult::Sat(m) => {
                let model = reconstruct(sig, &flat, &reduct, &m)?;
                let check = check_model(sig, &model, f).map_err(|e| DecideError::BadModel(e.to_string()))?;
                if !check.holds {
                    return Err(DecideError::BadModel(check.diagnostic.unwrap_or_default()));
                }
                Verdict::Sat(model)
            }
            SolverResult::Unsat => {
                return Err(DecideError::BadModel("simplification changed the verdict".into()))
            }
            SolverResult::Unknown(why) => Verdict::Unknown(why),
        },
    };
    Ok(Decision {
        verdict,
        mode: Mode::Depth,
        flat,
        reduct: Some(reduct),
        rounds: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse;

    const LISTS: &str = "(declare-datatypes ((Colour 0) (CList 0))
      (((red) (green) (blue)) ((nil) (cons (head Colour) (tail CList)))))
    (declare-const x CList)
    (declare-const y Colour)
    ";

    fn run(body: &str) -> Verdict {
        let s = parse(&format!("{LISTS}{body}")).unwrap();
        decide(&s.sig, &s.formula(), &DecideConfig::default()).unwrap().verdict
    }

    #[test]
    fn depth_and_size_formulas() {
        assert!(matches!(run("(assert (and ((_ is cons) x) (= (head x) y)))"), Verdict::Sat(_)));
        assert_eq!(run("(assert (= x (cons y x)))"), Verdict::Unsat);
        assert_eq!(run("(assert (= (adt.size x) 4))"), Verdict::Unsat);
        let Verdict::Sat(m) = run("(assert (and (= (adt.size x) 5) (not (= (head x) (head (tail x))))))") else {
            panic!("expected sat");
        };
        assert_eq!(m.adt["x"].size(), 5);
    }
}
