//! Acceptance checks, one PASS/FAIL/SKIP line per criterion.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use adt_reduce::ast::{evaluate, parse, parse_with, AdtModel, Formula, Script, Term, VarSort};
use adt_reduce::backend::external::{available, run};
use adt_reduce::backend::{emit_smtlib, solve, BackendKind, SolverConfig, SolverResult};
use adt_reduce::corpus::{generate, CorpusConfig};
use adt_reduce::interp::{interpolate, validate_interpolant, InterpResult, InterpolationProblem, INTERP_ENV};
use adt_reduce::models::{check_model, reconstruct};
use adt_reduce::normalize::normalize;
use adt_reduce::oracle::{bounded_search, OracleConfig, OracleVerdict};
use adt_reduce::pipeline::{decide, DecideConfig, Verdict};
use adt_reduce::reduce::{reduce, simplify, Mode, ReduceOptions};
use adt_reduce::signature::{check_expanding, Signature, SortVerdict};
use adt_reduce::sizesolve::{solve_with_size, SizeSolveConfig, SizeVerdict};
use adt_reduce::suite::{run_suite, SuiteConfig, SuiteReport};

const QUERY_LIMIT: Duration = Duration::from_secs(1);
const HORN_LIMIT: Duration = Duration::from_secs(5);
const INSTANCE_LIMIT: Duration = Duration::from_secs(1);
const MIN_INSTANCES: usize = 500;
const MIN_SIGNATURES: usize = 5;
const MAX_ORACLE_SIZE: u64 = 6;
const IMAGE_BOUND: u64 = 25;
/// Blow-up constant the corpus must stay under.
const BLOWUP_BOUND: f64 = 8.0;

const LISTS: &str = "(declare-datatypes ((Colour 0) (CList 0))
  (((red) (green) (blue))
   ((nil) (cons (head Colour) (tail CList)))))
";

const NAT: &str = "(declare-datatypes ((Nat 0)) (((one) (succ (pred Nat)))))
(declare-const x Nat)
(declare-const y Nat)
";

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn script(text: &str) -> Script {
    parse(text).unwrap_or_else(|e| panic!("{e}\n{text}"))
}

fn read(name: &str) -> Script {
    script(&std::fs::read_to_string(format!("{DATA}/{name}")).unwrap())
}

fn sat_model(v: &Verdict) -> Option<&AdtModel> {
    match v {
        Verdict::Sat(m) => Some(m),
        _ => None,
    }
}

fn criterion_1() -> Check {
    let s = read("lists_query.smt2");
    let f = s.formula();
    let start = Instant::now();
    let d = decide(&s.sig, &f, &DecideConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let m = sat_model(&d.verdict).ok_or_else(|| format!("verdict {}", d.verdict.name()))?;
    ensure(check_model(&s.sig, m, &f).unwrap().holds, || "model check failed".into())?;
    let c = |n: &str| s.sig.ctor_id(n).unwrap();
    let witness = AdtModel::new()
        .with_adt("x", Term::Ctor(c("cons"), vec![Term::Ctor(c("red"), vec![]), Term::Ctor(c("nil"), vec![])]))
        .with_adt("y", Term::Ctor(c("green"), vec![]));
    ensure(evaluate(&s.sig, &witness, &f).unwrap(), || "the listed witness is not a model".into())?;
    for opts in [ReduceOptions::default(), ReduceOptions::unoptimized()] {
        let r = reduce(&s.sig, &normalize(&s.sig, &f), Mode::Depth, &opts).map_err(|e| e.to_string())?;
        let text = emit_smtlib(&r);
        for needle in [
            "(ctorId_CList x)",
            "(depth_CList x)",
            "(<= 0 _s1)",
            "(< _s1 3)",
            "(declare-fun _s1 () Int)",
            "(declare-fun _s2 () Int)",
        ] {
            ensure(text.contains(needle), || format!("emit lacks {needle}"))?;
        }
    }
    ensure(elapsed < QUERY_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("sat in {} ms", elapsed.as_millis()))
}

fn criterion_2(report: &SuiteReport) -> Check {
    let s = read("lists_query.smt2");
    let f = s.formula();
    let flat = normalize(&s.sig, &f);
    let plain = reduce(&s.sig, &flat, Mode::Depth, &ReduceOptions::unoptimized()).map_err(|e| e.to_string())?;
    let plain = emit_smtlib(&plain);
    let opt = reduce(&s.sig, &flat, Mode::Depth, &ReduceOptions::default()).map_err(|e| e.to_string())?;
    let opt = emit_smtlib(&simplify(&opt));
    let split = "(or (and (= nil x) (= (ctorId_CList x) 0))";
    ensure(plain.contains(split), || "unoptimized reduct lacks the case split".into())?;
    ensure(!opt.contains("(= nil x)"), || "case split survives the optimizations".into())?;
    let spec = "(= (cons _s1 _s2) x)";
    ensure(plain.matches(spec).count() == 2 && opt.matches(spec).count() == 1, || {
        "the case-split constructor specification is not removed".into()
    })?;
    let (decls, body) = opt.split_at(opt.find("(assert").unwrap_or(0));
    for line in decls.lines() {
        if let Some(name) = line.strip_prefix("(declare-fun _s").and_then(|r| r.split(' ').next()) {
            ensure(body.contains(&format!("_s{name}")), || format!("dead Skolem _s{name}"))?;
        }
    }
    let mismatched: Vec<&str> = report
        .instances
        .iter()
        .filter(|i| i.unoptimized != Some(i.verdict))
        .map(|i| i.name.as_str())
        .collect();
    ensure(mismatched.is_empty(), || format!("--no-opt verdicts differ on {mismatched:?}"))?;
    Ok(format!("{} corpus verdicts agree", report.instances.len()))
}

fn criterion_3() -> Check {
    let decls = format!(
        "{LISTS}(declare-const x CList)(declare-const y CList)(declare-const r CList)
         (declare-const c Colour)(declare-const n Int)(declare-const nx Int)
         (declare-const ny Int)(declare-const nr Int)\n"
    );
    let heads = |x: &str, y: &str, r: &str| format!("(or (= {r} {y}) (= (head {r}) (head {x})))");
    let sizes = |x: &str, y: &str, r: &str| {
        format!("(= (+ (adt.size {x}) (adt.size {y})) (+ (adt.size {r}) 1))")
    };
    let len = |x: &str, n: &str| format!("(= (adt.size {x}) (+ (* 2 {n}) 1))");
    let clauses = vec![
        ("C1", format!("(not {})", heads("nil", "y", "y"))),
        (
            "C2",
            format!("(and {} (not {}))", heads("x", "y", "r"), heads("(cons c x)", "y", "(cons c r)")),
        ),
        (
            "P1",
            format!(
                "(and (not (= r nil)) {} (not (or (= (head r) (head x)) (= (head r) (head y)))))",
                heads("x", "y", "r")
            ),
        ),
        ("C1'", format!("(not {})", sizes("nil", "y", "y"))),
        (
            "C2'",
            format!("(and {} (not {}))", sizes("x", "y", "r"), sizes("(cons c x)", "y", "(cons c r)")),
        ),
        ("C3", format!("(not {})", len("nil", "0"))),
        ("C4", format!("(and {} (not {}))", len("x", "n"), len("(cons c x)", "(+ n 1)"))),
        (
            "P2",
            format!(
                "(and {} {} {} {} (not (= nr (+ nx ny))))",
                sizes("x", "y", "r"),
                len("x", "nx"),
                len("y", "ny"),
                len("r", "nr")
            ),
        ),
    ];
    let start = Instant::now();
    for (name, body) in &clauses {
        let s = script(&format!("{decls}(assert {body})"));
        let d = decide(&s.sig, &s.formula(), &DecideConfig::default()).map_err(|e| format!("{name}: {e}"))?;
        ensure(d.verdict == Verdict::Unsat, || format!("negated {name} is {}", d.verdict.name()))?;
        let size_clause = name.ends_with('\'') || name.starts_with("C3") || name.starts_with("C4") || *name == "P2";
        ensure(!size_clause || d.mode == Mode::Size, || format!("{name} not in size mode"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < HORN_LIMIT, || format!("took {elapsed:?}"))?;
    Ok(format!("{} negated clauses unsat in {} ms", clauses.len(), elapsed.as_millis()))
}

/// Term counts by sort and size, computed by direct convolution.
fn count_terms(sig: &Signature, max: u64) -> Vec<Vec<u128>> {
    let k = sig.num_sorts();
    let mut table = vec![vec![0u128; max as usize + 1]; k];
    for b in 1..=max as usize {
        for s in sig.sorts() {
            let mut total = 0u128;
            for &c in sig.ctors_of(s) {
                // sequences of argument sizes summing to b - 1
                let mut ways = vec![0u128; b];
                ways[0] = 1;
                for a in &sig.ctor(c).args {
                    let mut next = vec![0u128; b];
                    for (used, &w) in ways.iter().enumerate() {
                        if w == 0 {
                            continue;
                        }
                        for sz in 1..b - used {
                            next[used + sz] += w * table[a.sort.0][sz];
                        }
                    }
                    ways = next;
                }
                total += ways[b - 1];
            }
            table[s.0][b] = total;
        }
    }
    table
}

fn test_signatures() -> Vec<Signature> {
    let mut sigs = vec![
        script(LISTS).sig,
        script(NAT).sig,
        script(&format!("{LISTS}{}", cycle_decl(2))).sig,
        script(&format!("{LISTS}{}", cycle_decl(3))).sig,
        script("(declare-datatypes ((T 0)) (((leaf) (node (l T) (r T)))))").sig,
        script("(declare-datatypes ((U 0) (N 0)) (((unit)) ((z) (step (u U) (rest N)))))").sig,
    ];
    let mut seen = BTreeSet::new();
    for inst in generate(&CorpusConfig::default()) {
        if seen.insert(inst.name.split('-').next().unwrap().to_string()) {
            sigs.push(inst.script.sig);
        }
    }
    sigs
}

fn criterion_4() -> Check {
    let lists = script(&format!("{LISTS}(declare-const x CList)(declare-const k Int)(assert (= (adt.size x) (* 2 k)))"));
    let l = lists.sig.sort_id("CList").unwrap();
    let col = lists.sig.sort_id("Colour").unwrap();
    for n in 0..=200 {
        ensure(lists.sig.size_image(l).contains(n) == (n % 2 == 1), || format!("CList image at {n}"))?;
        ensure(lists.sig.size_image(col).contains(n) == (n == 1), || format!("Colour image at {n}"))?;
    }
    let out = solve_with_size(&lists.sig, &lists.formula(), &SizeSolveConfig::default()).map_err(|e| e.to_string())?;
    ensure(out.verdict == SizeVerdict::Unsat && out.rounds == 0, || {
        format!("|x| = 2k gave {:?} after {} rounds", out.verdict, out.rounds)
    })?;
    let sigs = test_signatures();
    for sig in &sigs {
        let counts = count_terms(sig, IMAGE_BOUND);
        for s in sig.sorts() {
            for b in 0..=IMAGE_BOUND {
                let n = counts[s.0][b as usize];
                let lib = sig.count_terms_of_size(s, b).map_err(|e| e.to_string())?;
                ensure(lib == n, || format!("{}: {lib} != {n} terms of size {b}", sig.sort_name(s)))?;
                ensure(sig.size_image(s).contains(b) == (n > 0), || {
                    format!("{}: image disagrees at {b}", sig.sort_name(s))
                })?;
            }
        }
    }
    Ok(format!("{} signatures up to size {IMAGE_BOUND}", sigs.len()))
}

fn cycle_decl(n: usize) -> String {
    let names: Vec<String> = (1..=n).map(|i| format!("(S{i} 0)")).collect();
    let bodies: Vec<String> = (1..=n)
        .map(|i| {
            let next = if i == n { 1 } else { i + 1 };
            let f = format!("(f{i} (s{next}_{i} S{next}))");
            if i == n {
                format!("({f} (null) (col (list CList)))")
            } else {
                format!("({f})")
            }
        })
        .collect();
    format!("(declare-datatypes ({}) ({}))", names.join(" "), bodies.join(" "))
}

fn criterion_5() -> Check {
    let nat = script(NAT).sig;
    let report = check_expanding(&nat);
    let SortVerdict::NonExpanding(w) = report.verdict(nat.sort_id("Nat").unwrap()) else {
        return Err("Nat is expanding".into());
    };
    let shown = w.display(&nat).to_string();
    ensure(shown == "Nat -> succ -> Nat", || format!("Nat witness {shown}"))?;
    let lists = script(LISTS).sig;
    ensure(check_expanding(&lists).is_expanding(), || "Colour/CList not expanding".into())?;
    let two = script(&format!("{LISTS}{}", cycle_decl(2))).sig;
    let r2 = check_expanding(&two);
    for s in ["S1", "S2"] {
        ensure(matches!(r2.verdict(two.sort_id(s).unwrap()), SortVerdict::NonExpanding(_)), || {
            format!("2-cycle {s} expanding")
        })?;
    }
    let three = script(&format!("{LISTS}{}", cycle_decl(3))).sig;
    ensure(check_expanding(&three).is_expanding(), || "3-cycle not expanding".into())?;
    Ok(format!("Nat witness {shown}"))
}

fn criterion_6() -> Check {
    let bounded = script(&format!(
        "{NAT}(assert (and (not (= x y)) (= (adt.size x) (adt.size y)) (<= (adt.size x) 3)))"
    ));
    let out = solve_with_size(&bounded.sig, &bounded.formula(), &SizeSolveConfig::default()).map_err(|e| e.to_string())?;
    ensure(out.verdict == SizeVerdict::Unsat, || format!("bounded: {:?}", out.verdict))?;
    ensure(out.unfoldings.values().all(|&n| n <= 3), || format!("unfoldings {:?}", out.unfoldings))?;
    let bounded_unfoldings = out.unfoldings;
    let oracle = bounded_search(&bounded.sig, &bounded.vars, &bounded.formula(), &OracleConfig::default())
        .map_err(|e| e.to_string())?;
    ensure(oracle == OracleVerdict::NoModel, || "oracle finds a model".into())?;
    let open = script(&format!("{NAT}(assert (and (not (= x y)) (= (adt.size x) (adt.size y))))"));
    let cfg = SizeSolveConfig {
        fuel: 20,
        ..SizeSolveConfig::default()
    };
    let out = solve_with_size(&open.sig, &open.formula(), &cfg).map_err(|e| e.to_string())?;
    let SizeVerdict::Unknown(why) = &out.verdict else {
        return Err(format!("fuel 20: {:?}", out.verdict));
    };
    ensure(why.contains("NonExpanding(Nat)"), || format!("diagnosis {why}"))?;
    Ok(format!("bounded case unfoldings {bounded_unfoldings:?}; fuel 20 gives unknown"))
}

/// The interpolating backend: the environment variable, else the bundled shim.
fn interp_backend() -> Option<String> {
    let cmd = std::env::var(INTERP_ENV)
        .ok()
        .filter(|c| !c.trim().is_empty())
        .unwrap_or_else(|| {
            format!("python3 {}/../../python/cvc5_shim.py", env!("CARGO_MANIFEST_DIR"))
        });
    let probe = "(set-logic QF_UFLIA)\n(set-option :produce-interpolants true)\n(declare-fun a () Int)\n(assert (= a 0))\n(get-interpolant I (not (= a 1)))\n";
    match run(&cmd, probe, Duration::from_secs(30)) {
        Ok(Some(out)) if out.contains("define-fun") => Some(cmd),
        _ => None,
    }
}

fn criterion_7() -> Outcome {
    let a = read("interp_a.smt2");
    let text = std::fs::read_to_string(format!("{DATA}/interp_b.smt2")).unwrap();
    let b = parse_with(&text, &a).unwrap();
    let prob = InterpolationProblem::new(a.formula(), b.formula());
    let sig = &b.sig;
    let i = parse_with("(assert (not (= (head x) (head (tail x)))))", &b).unwrap().formula();
    let bi = Formula::And(vec![prob.b.clone(), i.clone()]);
    match decide(sig, &bi, &DecideConfig::default()) {
        Ok(d) if d.verdict == Verdict::Unsat => {}
        other => return Outcome::Fail(format!("B & I: {other:?}")),
    }
    match validate_interpolant(sig, &i, &prob, &DecideConfig::default()) {
        Ok(true) => {}
        other => return Outcome::Fail(format!("validate_interpolant: {other:?}")),
    }
    let Some(cmd) = interp_backend() else {
        return Outcome::Skip("B & I unsat; no interpolating backend configured".into());
    };
    match interpolate(&prob, sig, &cmd, &Default::default()) {
        Ok(InterpResult::Interpolant(found)) => {
            let vars = found.free_vars();
            let x = vars.iter().all(|(n, s)| n == "x" && *s == VarSort::Adt(sig.sort_id("CList").unwrap()));
            if !x {
                return Outcome::Fail(format!("interpolant over {vars:?}"));
            }
            Outcome::Pass(format!("interpolant {}", found.display(sig)))
        }
        other => Outcome::Fail(format!("interpolate: {other:?}")),
    }
}

fn corpus_config() -> SuiteConfig {
    let external = if available("z3") { Some("z3 -in -smt2".to_string()) } else { None };
    SuiteConfig {
        corpus: CorpusConfig::default(),
        oracle: OracleConfig {
            max_size: MAX_ORACLE_SIZE,
            ..OracleConfig::default()
        },
        external,
        ..SuiteConfig::default()
    }
}

fn criterion_8(report: &SuiteReport, cfg: &SuiteConfig) -> Check {
    let n = report.instances.len();
    let sigs: BTreeSet<&str> = report.instances.iter().map(|i| i.name.split('-').next().unwrap()).collect();
    ensure(n >= MIN_INSTANCES && sigs.len() >= MIN_SIGNATURES, || {
        format!("{n} instances over {} signatures", sigs.len())
    })?;
    let bad: Vec<&str> = report.disagreements().iter().map(|i| i.name.as_str()).collect();
    ensure(bad.is_empty(), || format!("disagreements {bad:?}"))?;
    let unknown = report.count("unknown");
    ensure(unknown == 0, || format!("{unknown} unknown verdicts"))?;
    let c = report.blowup_constant();
    let over: Vec<&str> = report
        .instances
        .iter()
        .filter(|i| i.reduct_nodes as f64 > c * (i.sig_size * i.input_nodes) as f64)
        .map(|i| i.name.as_str())
        .collect();
    ensure(over.is_empty() && c <= BLOWUP_BOUND, || format!("blow-up C = {c:.3}, above: {over:?}"))?;
    let slow = report.slowest();
    ensure(slow < INSTANCE_LIMIT, || format!("slowest instance {slow:?}"))?;
    Ok(format!(
        "{n} instances, {} signatures, C = {c:.3}, slowest {} ms{}",
        sigs.len(),
        slow.as_millis(),
        if cfg.external.is_some() { ", z3 cross-checked" } else { "" }
    ))
}

fn criterion_9() -> Check {
    let mut configs = vec![SolverConfig::default()];
    if available("z3") {
        configs.push(SolverConfig {
            backend: BackendKind::External(Some("z3 -in -smt2".into())),
            ..SolverConfig::default()
        });
    }
    let mut checked = 0;
    for inst in generate(&CorpusConfig::default()) {
        let s = &inst.script;
        let f = s.formula();
        if f.has_size() {
            let out = solve_with_size(&s.sig, &f, &SizeSolveConfig::default())
                .map_err(|e| format!("{}: {e}", inst.name))?;
            if let SizeVerdict::Sat(m) = out.verdict {
                ensure(check_model(&s.sig, &m, &f).unwrap().holds, || format!("{}: model fails", inst.name))?;
                checked += 1;
            }
            continue;
        }
        let flat = normalize(&s.sig, &f);
        let reduct = reduce(&s.sig, &flat, Mode::Depth, &ReduceOptions::default()).map_err(|e| e.to_string())?;
        for solver in &configs {
            if let SolverResult::Sat(m) = solve(&reduct, solver).map_err(|e| e.to_string())? {
                let model = reconstruct(&s.sig, &flat, &reduct, &m).map_err(|e| format!("{}: {e}", inst.name))?;
                ensure(check_model(&s.sig, &model, &f).unwrap().holds, || {
                    format!("{}: reconstructed model fails", inst.name)
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} reconstructed models check"))
}

fn main() {
    let cfg = corpus_config();
    let report = run_suite(&cfg);
    let mut results: Vec<(usize, Outcome)> = Vec::new();
    let wrap = |r: Check| match r {
        Ok(msg) => Outcome::Pass(msg),
        Err(msg) => Outcome::Fail(msg),
    };
    results.push((1, wrap(criterion_1())));
    results.push((
        2,
        wrap(match &report {
            Ok(r) => criterion_2(r),
            Err((n, e)) => Err(format!("{n}: {e}")),
        }),
    ));
    results.push((3, wrap(criterion_3())));
    results.push((4, wrap(criterion_4())));
    results.push((5, wrap(criterion_5())));
    results.push((6, wrap(criterion_6())));
    results.push((7, criterion_7()));
    results.push((
        8,
        wrap(match &report {
            Ok(r) => criterion_8(r, &cfg),
            Err((n, e)) => Err(format!("{n}: {e}")),
        }),
    ));
    results.push((9, wrap(criterion_9())));
    let mut failed = 0;
    for (k, o) in &results {
        match o {
            Outcome::Pass(m) => println!("criterion {k}: PASS ({m})"),
            Outcome::Skip(m) => println!("criterion {k}: SKIP ({m})"),
            Outcome::Fail(m) => {
                failed += 1;
                println!("criterion {k}: FAIL ({m})");
            }
        }
    }
    if let Ok(r) = &report {
        print!("{r}");
        println!("slowest instance: {} ms", r.slowest().as_millis());
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
