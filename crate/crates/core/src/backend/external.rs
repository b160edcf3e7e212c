//! Client for external SMT-LIB solvers: one script per query on standard
//! input, the reply read from standard output.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::smtlib::{emit_formula, parse_response};
use super::{SolverError, SolverResult};
use crate::reduced::RFormula;

/// Environment variable consulted when no command is given.
pub const SOLVER_ENV: &str = "ADT_REDUCE_SOLVER";

const DEFAULT_COMMAND: &str = "z3 -in -smt2";

/// The explicit command, else the environment variable, else `z3`.
pub fn resolve_command(cmd: Option<&str>) -> String {
    match cmd {
        Some(c) => c.to_string(),
        None => std::env::var(SOLVER_ENV)
            .ok()
            .filter(|c| !c.trim().is_empty())
            .unwrap_or_else(|| DEFAULT_COMMAND.to_string()),
    }
}

/// Runs `cmd` (split at whitespace) on `input`. Returns `None` on timeout.
pub fn run(cmd: &str, input: &str, timeout: Duration) -> Result<Option<String>, SolverError> {
    let mut parts = cmd.split_whitespace();
    let program = parts
        .next()
        .ok_or_else(|| SolverError::Spawn(cmd.to_string(), "empty command".into()))?;
    let mut child = Command::new(program)
        .args(parts)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| SolverError::Spawn(cmd.to_string(), e.to_string()))?;
    let mut stdin = child.stdin.take().expect("piped stdin");
    let input = input.to_string();
    let writer = thread::spawn(move || {
        let _ = stdin.write_all(input.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });
    let deadline = Instant::now() + timeout;
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) if Instant::now() >= deadline => {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(None);
            }
            Ok(None) => thread::sleep(Duration::from_millis(2)),
            Err(e) => return Err(SolverError::Spawn(cmd.to_string(), e.to_string())),
        }
    }
    let _ = writer.join();
    let mut out = reader.join().unwrap_or_default();
    let err = err_reader.join().unwrap_or_default();
    if out.trim().is_empty() && !err.trim().is_empty() {
        out = err;
    }
    Ok(Some(out))
}

/// Decides `f` with the external solver `cmd`.
pub fn solve_external(f: &RFormula, cmd: &str, timeout: Duration) -> Result<SolverResult, SolverError> {
    match run(cmd, &emit_formula(f), timeout)? {
        None => Ok(SolverResult::Unknown(format!("timeout after {} ms", timeout.as_millis()))),
        Some(out) => parse_response(&out, f),
    }
}

/// Whether `cmd` can be started at all.
pub fn available(cmd: &str) -> bool {
    matches!(
        run(cmd, "(check-sat)\n(exit)\n", Duration::from_secs(10)),
        Ok(Some(out)) if out.contains("sat")
    )
}
