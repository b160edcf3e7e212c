//! Seeded generation of random signatures and formulas.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{CmpOp, Command, Formula, IntExpr, Script, Term, VarSort};
use crate::signature::{CtorSpec, Signature, SignatureDecl, SortId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusConfig {
    pub seed: u64,
    pub signatures: usize,
    pub formulas_per_signature: usize,
    /// Every `size_every`-th formula uses size constraints; 0 disables them.
    pub size_every: usize,
    /// Upper bound on the number of terms of size <= 6 per sort.
    pub max_small_terms: u128,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            seed: 1,
            signatures: 6,
            formulas_per_signature: 100,
            size_every: 4,
            max_small_terms: 40,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub script: Script,
    pub uses_size: bool,
}

/// A random validated signature with 1 to 3 sorts, each with 1 to 3
/// constructors of arity at most 2.
pub fn random_signature(rng: &mut ChaCha8Rng, tag: usize, max_small_terms: u128) -> Signature {
    loop {
        let k = rng.gen_range(1..=3);
        let names: Vec<String> = (0..k).map(|i| format!("S{tag}_{i}")).collect();
        let mut decl = SignatureDecl::new();
        for (i, name) in names.iter().enumerate() {
            let n = rng.gen_range(1..=3);
            let mut ctors = Vec::new();
            for j in 0..n {
                let arity = if j == 0 && rng.gen_bool(0.7) {
                    0
                } else {
                    rng.gen_range(0..=2)
                };
                let args = (0..arity)
                    .map(|a| {
                        let target = if rng.gen_bool(0.5) {
                            name.clone()
                        } else {
                            names.choose(rng).expect("non-empty").clone()
                        };
                        (format!("s{tag}_{i}_{j}_{a}"), target)
                    })
                    .collect();
                ctors.push(CtorSpec {
                    name: format!("c{tag}_{i}_{j}"),
                    args,
                });
            }
            decl.sorts.push((name.clone(), ctors));
        }
        let Ok(sig) = decl.validate() else { continue };
        let Ok(table) = sig.count_table(6) else { continue };
        if table.iter().all(|row| row.iter().sum::<u128>() <= max_small_terms) {
            return sig;
        }
    }
}

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    sig: &'a Signature,
    vars: Vec<(String, VarSort)>,
}

impl Gen<'_> {
    fn adt_vars(&self, s: SortId) -> Vec<&String> {
        self.vars
            .iter()
            .filter(|(_, v)| *v == VarSort::Adt(s))
            .map(|(n, _)| n)
            .collect()
    }

    fn int_vars(&self) -> Vec<&String> {
        self.vars
            .iter()
            .filter(|(_, v)| *v == VarSort::Int)
            .map(|(n, _)| n)
            .collect()
    }

    /// A term of sort `s`; variables are preferred at depth 0.
    fn term(&mut self, s: SortId, depth: u32) -> Term {
        let vars: Vec<String> = self.adt_vars(s).into_iter().cloned().collect();
        let roll = self.rng.gen_range(0..10);
        if depth == 0 || roll < 5 {
            if let Some(v) = vars.choose(self.rng) {
                return Term::var(v, s);
            }
        }
        let sels: Vec<(crate::signature::CtorId, usize, SortId)> = self
            .sig
            .all_ctors()
            .flat_map(|c| {
                let d = self.sig.ctor(c);
                d.args
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.sort == s)
                    .map(move |(j, _)| (c, j, d.sort))
                    .collect::<Vec<_>>()
            })
            .collect();
        if depth > 0 && roll < 8 && !sels.is_empty() {
            let &(c, j, from) = sels.choose(self.rng).expect("non-empty");
            let arg = self.term(from, depth - 1);
            return Term::Sel(c, j, Box::new(arg));
        }
        let ctors = self.sig.ctors_of(s).to_vec();
        let c = if depth == 0 {
            let nullary: Vec<_> = ctors.iter().filter(|&&c| self.sig.ctor(c).arity() == 0).collect();
            match nullary.choose(self.rng) {
                Some(&&c) => c,
                None => *ctors.choose(self.rng).expect("inhabited"),
            }
        } else {
            *ctors.choose(self.rng).expect("inhabited")
        };
        let arg_sorts: Vec<SortId> = self.sig.ctor(c).args.iter().map(|a| a.sort).collect();
        let args = arg_sorts
            .into_iter()
            .map(|a| self.term(a, depth.saturating_sub(1)))
            .collect();
        Term::Ctor(c, args)
    }

    fn adt_sort(&mut self) -> SortId {
        let sorts: Vec<SortId> = self
            .vars
            .iter()
            .filter_map(|(_, v)| match v {
                VarSort::Adt(s) => Some(*s),
                VarSort::Int => None,
            })
            .collect();
        *sorts.choose(self.rng).expect("at least one ADT variable")
    }

    fn atom(&mut self, size: bool) -> Formula {
        let s = self.adt_sort();
        let kind = self.rng.gen_range(0..if size { 4 } else { 3 });
        match kind {
            0 | 1 => {
                let a = self.term(s, 1);
                let b = self.term(s, 2);
                Formula::Eq(a, b)
            }
            2 => {
                let c = *self.sig.ctors_of(s).choose(self.rng).expect("inhabited");
                Formula::Tester(c, self.term(s, 1))
            }
            _ => self.size_atom(s),
        }
    }

    fn size_atom(&mut self, s: SortId) -> Formula {
        let lhs = IntExpr::Size(self.term(s, 1));
        let op = *[CmpOp::Eq, CmpOp::Le, CmpOp::Ge, CmpOp::Lt]
            .choose(self.rng)
            .expect("non-empty");
        let ints: Vec<String> = self.int_vars().into_iter().cloned().collect();
        let rhs = match self.rng.gen_range(0..3) {
            0 => IntExpr::Const(self.rng.gen_range(1..=7)),
            1 if !ints.is_empty() => {
                let n = ints.choose(self.rng).expect("non-empty").clone();
                IntExpr::Add(vec![
                    IntExpr::Mul(2, Box::new(IntExpr::Var(n))),
                    IntExpr::Const(self.rng.gen_range(0..=1)),
                ])
            }
            _ => {
                let t = self.adt_sort();
                IntExpr::Size(self.term(t, 1))
            }
        };
        Formula::IntCmp(op, lhs, rhs)
    }

    fn formula(&mut self, depth: u32, size: bool) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.3) {
            let a = self.atom(size);
            return if self.rng.gen_bool(0.35) { Formula::not(a) } else { a };
        }
        let n = self.rng.gen_range(2..=3);
        let kids = (0..n).map(|_| self.formula(depth - 1, size)).collect();
        match self.rng.gen_range(0..5) {
            0..=2 => Formula::And(kids),
            3 => Formula::Or(kids),
            _ => Formula::not(Formula::Or(kids)),
        }
    }
}

/// A random formula over `sig` with its variable declarations.
pub fn random_script(rng: &mut ChaCha8Rng, sig: &Signature, size: bool) -> Script {
    let sorts: Vec<SortId> = sig.sorts().collect();
    let n_adt = rng.gen_range(1..=3);
    let mut vars: Vec<(String, VarSort)> = (0..n_adt)
        .map(|i| (format!("x{i}"), VarSort::Adt(*sorts.choose(rng).expect("non-empty"))))
        .collect();
    if size && rng.gen_bool(0.5) {
        vars.push(("n".to_string(), VarSort::Int));
    }
    let mut g = Gen {
        rng,
        sig,
        vars: vars.clone(),
    };
    let depth = g.rng.gen_range(1..=2);
    let f = g.formula(depth, size);
    let used = f.free_vars();
    vars.retain(|(n, s)| used.contains(&(n.clone(), *s)));
    Script {
        sig: sig.clone(),
        vars,
        assertions: vec![f],
        commands: vec![Command::CheckSat],
    }
}

/// The corpus for `cfg`; identical for identical configurations.
pub fn generate(cfg: &CorpusConfig) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    for si in 0..cfg.signatures {
        let sig = random_signature(&mut rng, si, cfg.max_small_terms);
        for fi in 0..cfg.formulas_per_signature {
            let size = cfg.size_every > 0 && fi % cfg.size_every == cfg.size_every - 1;
            let script = random_script(&mut rng, &sig, size);
            let uses_size = script.formula().has_size();
            out.push(Instance {
                name: format!("sig{si}-f{fi}"),
                script,
                uses_size,
            });
        }
    }
    out
}
