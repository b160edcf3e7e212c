//! ADT signatures and their static analyses.
//!
//! A [`Signature`] is an ordered list of sorts plus a global ordered list of
//! constructors. The constructor order fixes the zero-based per-sort index
//! returned by [`Signature::ctor_index`]. Signatures are only obtained by
//! validating a [`SignatureDecl`], so every value of type `Signature` is
//! well-defined: names are unique, all sort references resolve and every
//! sort has at least one constructor term.

mod expanding;
mod periodic;
mod sizes;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

pub use expanding::{check_expanding, CycleWitness, ExpandingReport, SortVerdict};
pub use periodic::EventuallyPeriodicSet;
pub use sizes::DEFAULT_SIZE_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SortId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CtorId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SortDecl {
    pub name: String,
}

/// A selector slot of a constructor: the selector's name and the argument sort.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectorDecl {
    pub name: String,
    pub sort: SortId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtorDecl {
    pub name: String,
    pub sort: SortId,
    pub args: Vec<SelectorDecl>,
}

impl CtorDecl {
    pub fn arity(&self) -> usize {
        self.args.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    Finite(u128),
    Infinite,
}

impl Cardinality {
    pub fn is_finite(self) -> bool {
        matches!(self, Cardinality::Finite(_))
    }
}

impl fmt::Display for Cardinality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cardinality::Finite(n) => write!(f, "{n}"),
            Cardinality::Infinite => write!(f, "infinite"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SignatureError {
    #[error("sort `{0}` has no constructor terms")]
    EmptySort(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("unknown sort `{0}`")]
    UnknownSort(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("constructor `{ctor}` does not belong to sort `{sort}`")]
    WrongSort { ctor: String, sort: String },
    #[error("resource limit: {0}")]
    ResourceLimit(String),
}

/// Unvalidated, name-based signature description.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SignatureDecl {
    pub sorts: Vec<(String, Vec<CtorSpec>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtorSpec {
    pub name: String,
    /// (selector name, argument sort name)
    pub args: Vec<(String, String)>,
}

impl SignatureDecl {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builder helper: `sort("CList", &[("nil", &[]), ("cons", &[("head", "Colour"), ("tail", "CList")])])`.
    pub fn sort(mut self, name: &str, ctors: &[(&str, &[(&str, &str)])]) -> Self {
        let ctors = ctors
            .iter()
            .map(|(c, args)| CtorSpec {
                name: c.to_string(),
                args: args
                    .iter()
                    .map(|(s, t)| (s.to_string(), t.to_string()))
                    .collect(),
            })
            .collect();
        self.sorts.push((name.to_string(), ctors));
        self
    }

    /// Checks names and non-emptiness and produces a [`Signature`].
    pub fn validate(&self) -> Result<Signature, Vec<SignatureError>> {
        let mut errors = Vec::new();
        let mut names = BTreeSet::new();
        let mut sort_ids = BTreeMap::new();
        for (i, (name, _)) in self.sorts.iter().enumerate() {
            if !names.insert(name.clone()) {
                errors.push(SignatureError::DuplicateName(name.clone()));
            }
            sort_ids.entry(name.clone()).or_insert(SortId(i));
        }
        let mut symbols = BTreeSet::new();
        let mut ctors = Vec::new();
        for (i, (_, specs)) in self.sorts.iter().enumerate() {
            for spec in specs {
                if !symbols.insert(spec.name.clone()) || names.contains(&spec.name) {
                    errors.push(SignatureError::DuplicateName(spec.name.clone()));
                }
                let mut args = Vec::new();
                for (sel, sort) in &spec.args {
                    if !symbols.insert(sel.clone()) || names.contains(sel) {
                        errors.push(SignatureError::DuplicateName(sel.clone()));
                    }
                    match sort_ids.get(sort) {
                        Some(&id) => args.push(SelectorDecl {
                            name: sel.clone(),
                            sort: id,
                        }),
                        None => errors.push(SignatureError::UnknownSort(sort.clone())),
                    }
                }
                ctors.push(CtorDecl {
                    name: spec.name.clone(),
                    sort: SortId(i),
                    args,
                });
            }
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        let sorts: Vec<SortDecl> = self
            .sorts
            .iter()
            .map(|(n, _)| SortDecl { name: n.clone() })
            .collect();
        Signature::from_parts(sorts, ctors).map_err(|e| vec![e]).and_then(|sig| {
            let empty: Vec<_> = sig
                .sorts()
                .filter(|&s| !sig.inhabited[s.0])
                .map(|s| SignatureError::EmptySort(sig.sort_name(s).to_string()))
                .collect();
            if empty.is_empty() {
                Ok(sig)
            } else {
                Err(empty)
            }
        })
    }
}

#[derive(Debug)]
pub struct Signature {
    sorts: Vec<SortDecl>,
    ctors: Vec<CtorDecl>,
    sort_ctors: Vec<Vec<CtorId>>,
    sort_index: BTreeMap<String, SortId>,
    ctor_index: BTreeMap<String, CtorId>,
    selector_index: BTreeMap<String, (CtorId, usize)>,
    inhabited: Vec<bool>,
    cardinalities: Vec<Cardinality>,
    size_images: OnceLock<Vec<EventuallyPeriodicSet>>,
}

impl Clone for Signature {
    fn clone(&self) -> Self {
        Signature {
            sorts: self.sorts.clone(),
            ctors: self.ctors.clone(),
            sort_ctors: self.sort_ctors.clone(),
            sort_index: self.sort_index.clone(),
            ctor_index: self.ctor_index.clone(),
            selector_index: self.selector_index.clone(),
            inhabited: self.inhabited.clone(),
            cardinalities: self.cardinalities.clone(),
            size_images: self.size_images.clone(),
        }
    }
}

impl PartialEq for Signature {
    fn eq(&self, other: &Self) -> bool {
        self.sorts == other.sorts && self.ctors == other.ctors
    }
}

impl Eq for Signature {}

impl Signature {
    fn from_parts(sorts: Vec<SortDecl>, ctors: Vec<CtorDecl>) -> Result<Self, SignatureError> {
        let mut sort_ctors = vec![Vec::new(); sorts.len()];
        for (i, c) in ctors.iter().enumerate() {
            sort_ctors[c.sort.0].push(CtorId(i));
        }
        let sort_index = sorts
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.clone(), SortId(i)))
            .collect();
        let ctor_index = ctors
            .iter()
            .enumerate()
            .map(|(i, c)| (c.name.clone(), CtorId(i)))
            .collect();
        let selector_index = ctors
            .iter()
            .enumerate()
            .flat_map(|(i, c)| {
                c.args
                    .iter()
                    .enumerate()
                    .map(move |(j, s)| (s.name.clone(), (CtorId(i), j)))
            })
            .collect();
        let mut sig = Signature {
            sorts,
            ctors,
            sort_ctors,
            sort_index,
            ctor_index,
            selector_index,
            inhabited: Vec::new(),
            cardinalities: Vec::new(),
            size_images: OnceLock::new(),
        };
        sig.inhabited = sig.compute_inhabited();
        if sig.inhabited.iter().all(|&b| b) {
            sig.cardinalities = sig.compute_cardinalities()?;
        }
        Ok(sig)
    }

    /// Least fixpoint of "some constructor has all argument sorts inhabited".
    fn compute_inhabited(&self) -> Vec<bool> {
        let mut inhabited = vec![false; self.sorts.len()];
        loop {
            let mut changed = false;
            for c in &self.ctors {
                if !inhabited[c.sort.0] && c.args.iter().all(|a| inhabited[a.sort.0]) {
                    inhabited[c.sort.0] = true;
                    changed = true;
                }
            }
            if !changed {
                return inhabited;
            }
        }
    }

    fn compute_cardinalities(&self) -> Result<Vec<Cardinality>, SignatureError> {
        let k = self.sorts.len();
        // reach[i][j]: sort j reachable from sort i in one or more steps
        let mut reach = vec![vec![false; k]; k];
        for c in &self.ctors {
            for a in &c.args {
                reach[c.sort.0][a.sort.0] = true;
            }
        }
        for m in 0..k {
            for i in 0..k {
                if reach[i][m] {
                    for j in 0..k {
                        if reach[m][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        let on_cycle: Vec<bool> = (0..k).map(|i| reach[i][i]).collect();
        let infinite: Vec<bool> = (0..k)
            .map(|i| on_cycle[i] || (0..k).any(|j| reach[i][j] && on_cycle[j]))
            .collect();
        let mut memo: Vec<Option<Cardinality>> = vec![None; k];
        for i in 0..k {
            if infinite[i] {
                memo[i] = Some(Cardinality::Infinite);
            }
        }
        // finite sorts only depend on finite sorts, and the finite part is acyclic
        fn count(
            sig: &Signature,
            s: usize,
            memo: &mut Vec<Option<Cardinality>>,
        ) -> Result<u128, SignatureError> {
            if let Some(Cardinality::Finite(n)) = memo[s] {
                return Ok(n);
            }
            let mut total: u128 = 0;
            for &c in &sig.sort_ctors[s] {
                let mut prod: u128 = 1;
                for a in &sig.ctors[c.0].args {
                    let n = count(sig, a.sort.0, memo)?;
                    prod = prod.checked_mul(n).ok_or_else(|| {
                        SignatureError::ResourceLimit("cardinality overflow".into())
                    })?;
                }
                total = total.checked_add(prod).ok_or_else(|| {
                    SignatureError::ResourceLimit("cardinality overflow".into())
                })?;
            }
            memo[s] = Some(Cardinality::Finite(total));
            Ok(total)
        }
        for i in 0..k {
            if memo[i].is_none() {
                count(self, i, &mut memo)?;
            }
        }
        Ok(memo.into_iter().map(|c| c.expect("all sorts counted")).collect())
    }

    pub fn num_sorts(&self) -> usize {
        self.sorts.len()
    }

    pub fn sorts(&self) -> impl Iterator<Item = SortId> + '_ {
        (0..self.sorts.len()).map(SortId)
    }

    pub fn all_ctors(&self) -> impl Iterator<Item = CtorId> + '_ {
        (0..self.ctors.len()).map(CtorId)
    }

    pub fn sort_name(&self, s: SortId) -> &str {
        &self.sorts[s.0].name
    }

    pub fn ctor(&self, c: CtorId) -> &CtorDecl {
        &self.ctors[c.0]
    }

    pub fn ctor_name(&self, c: CtorId) -> &str {
        &self.ctors[c.0].name
    }

    pub fn selector_name(&self, c: CtorId, j: usize) -> &str {
        &self.ctors[c.0].args[j].name
    }

    pub fn sort_id(&self, name: &str) -> Option<SortId> {
        self.sort_index.get(name).copied()
    }

    pub fn ctor_id(&self, name: &str) -> Option<CtorId> {
        self.ctor_index.get(name).copied()
    }

    /// Looks up a selector by name, returning its constructor and slot.
    pub fn selector(&self, name: &str) -> Option<(CtorId, usize)> {
        self.selector_index.get(name).copied()
    }

    /// True if `name` is a sort, constructor or selector name.
    pub fn is_reserved(&self, name: &str) -> bool {
        self.sort_index.contains_key(name)
            || self.ctor_index.contains_key(name)
            || self.selector_index.contains_key(name)
    }

    /// Constructors of `s` in declaration order.
    pub fn ctors_of(&self, s: SortId) -> &[CtorId] {
        &self.sort_ctors[s.0]
    }

    /// Number of constructors of a sort (`#Ctor`).
    pub fn num_ctors(&self, s: SortId) -> usize {
        self.sort_ctors[s.0].len()
    }

    /// Zero-based index of `c` among the constructors of its sort.
    pub fn ctor_index(&self, c: CtorId) -> usize {
        let sort = self.ctors[c.0].sort;
        self.sort_ctors[sort.0]
            .iter()
            .position(|&d| d == c)
            .expect("constructor listed under its sort")
    }

    /// The constructor of `s` with zero-based index `idx`.
    pub fn ctor_by_index(&self, s: SortId, idx: i64) -> Option<CtorId> {
        usize::try_from(idx)
            .ok()
            .and_then(|i| self.sort_ctors[s.0].get(i).copied())
    }

    /// Name-based lookup used by front ends: `(sort, ctor) -> Id`.
    pub fn ctor_index_by_name(&self, sort: &str, ctor: &str) -> Result<usize, SignatureError> {
        let s = self
            .sort_id(sort)
            .ok_or_else(|| SignatureError::UnknownSymbol(sort.to_string()))?;
        let c = self
            .ctor_id(ctor)
            .ok_or_else(|| SignatureError::UnknownSymbol(ctor.to_string()))?;
        if self.ctors[c.0].sort != s {
            return Err(SignatureError::WrongSort {
                ctor: ctor.to_string(),
                sort: sort.to_string(),
            });
        }
        Ok(self.ctor_index(c))
    }

    pub fn cardinality(&self, s: SortId) -> Cardinality {
        self.cardinalities[s.0]
    }

    /// A sort whose constructors are all nullary.
    pub fn is_enum(&self, s: SortId) -> bool {
        self.sort_ctors[s.0]
            .iter()
            .all(|c| self.ctors[c.0].args.is_empty())
    }

    /// Sorts reachable from `s` (excluding `s` unless it lies on a cycle).
    pub fn reachable_sorts(&self, s: SortId) -> BTreeSet<SortId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![s];
        while let Some(t) = stack.pop() {
            for &c in &self.sort_ctors[t.0] {
                for a in &self.ctors[c.0].args {
                    if seen.insert(a.sort) {
                        stack.push(a.sort);
                    }
                }
            }
        }
        seen
    }

    pub fn dependency_graph(&self) -> DependencyGraph {
        let mut edges = BTreeSet::new();
        for (i, c) in self.ctors.iter().enumerate() {
            edges.insert((Vertex::Sort(c.sort), Vertex::Ctor(CtorId(i))));
            for a in &c.args {
                edges.insert((Vertex::Ctor(CtorId(i)), Vertex::Sort(a.sort)));
            }
        }
        DependencyGraph {
            num_sorts: self.sorts.len(),
            num_ctors: self.ctors.len(),
            edges,
        }
    }

    /// Rough symbol count used for the blow-up bound: sorts, constructors and selectors.
    pub fn symbol_count(&self) -> usize {
        self.sorts.len()
            + self.ctors.len()
            + self.ctors.iter().map(|c| c.args.len()).sum::<usize>()
    }

    /// Renders the signature as an SMT-LIB `declare-datatypes` command.
    pub fn to_smtlib(&self) -> String {
        let mut out = String::from("(declare-datatypes (");
        for (i, s) in self.sorts.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(&format!("({} 0)", s.name));
        }
        out.push_str(") (");
        for (i, ctors) in self.sort_ctors.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push('(');
            for (k, &c) in ctors.iter().enumerate() {
                if k > 0 {
                    out.push(' ');
                }
                let decl = &self.ctors[c.0];
                out.push('(');
                out.push_str(&decl.name);
                for a in &decl.args {
                    out.push_str(&format!(" ({} {})", a.name, self.sorts[a.sort.0].name));
                }
                out.push(')');
            }
            out.push(')');
        }
        out.push_str("))");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Vertex {
    Sort(SortId),
    Ctor(CtorId),
}

/// Bipartite sort/constructor dependency graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub num_sorts: usize,
    pub num_ctors: usize,
    pub edges: BTreeSet<(Vertex, Vertex)>,
}

impl DependencyGraph {
    pub fn successors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.edges
            .range((v, Vertex::Sort(SortId(0)))..)
            .take_while(move |(a, _)| *a == v)
            .map(|(_, b)| *b)
    }

    pub fn is_bipartite(&self) -> bool {
        self.edges.iter().all(|(a, b)| {
            matches!(
                (a, b),
                (Vertex::Sort(_), Vertex::Ctor(_)) | (Vertex::Ctor(_), Vertex::Sort(_))
            )
        })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn lists() -> Signature {
        SignatureDecl::new()
            .sort("Colour", &[("red", &[]), ("green", &[]), ("blue", &[])])
            .sort(
                "CList",
                &[("nil", &[]), ("cons", &[("head", "Colour"), ("tail", "CList")])],
            )
            .validate()
            .unwrap()
    }

    pub fn nat() -> Signature {
        SignatureDecl::new()
            .sort("Nat", &[("one", &[]), ("succ", &[("pred", "Nat")])])
            .validate()
            .unwrap()
    }

    #[test]
    fn validate_accepts_lists_and_nat() {
        let sig = lists();
        assert_eq!(sig.num_sorts(), 2);
        let nat = nat();
        assert_eq!(nat.num_ctors(nat.sort_id("Nat").unwrap()), 2);
    }

    #[test]
    fn validate_rejects_empty_sort() {
        let err = SignatureDecl::new()
            .sort("S", &[("f", &[("s", "S")])])
            .validate()
            .unwrap_err();
        assert_eq!(err, vec![SignatureError::EmptySort("S".into())]);
    }

    #[test]
    fn validate_rejects_duplicates_and_unknown_sorts() {
        let err = SignatureDecl::new()
            .sort("A", &[("a", &[]), ("a", &[])])
            .sort("B", &[("b", &[("sel", "Missing")])])
            .validate()
            .unwrap_err();
        assert!(err.contains(&SignatureError::DuplicateName("a".into())));
        assert!(err.contains(&SignatureError::UnknownSort("Missing".into())));

        let err = SignatureDecl::new()
            .sort("A", &[("x", &[("x", "A")]), ("c", &[])])
            .validate()
            .unwrap_err();
        assert_eq!(err, vec![SignatureError::DuplicateName("x".into())]);
    }

    #[test]
    fn ctor_ids_are_zero_based_per_sort() {
        let sig = lists();
        assert_eq!(sig.ctor_index_by_name("CList", "cons"), Ok(1));
        assert_eq!(sig.ctor_index_by_name("CList", "nil"), Ok(0));
        assert_eq!(sig.ctor_index_by_name("Colour", "blue"), Ok(2));
        assert_eq!(sig.num_ctors(sig.sort_id("Colour").unwrap()), 3);
        assert!(matches!(
            sig.ctor_index_by_name("Colour", "nil"),
            Err(SignatureError::WrongSort { .. })
        ));
        assert!(matches!(
            sig.ctor_index_by_name("Colour", "purple"),
            Err(SignatureError::UnknownSymbol(_))
        ));
    }

    #[test]
    fn ids_are_a_bijection_per_sort() {
        let sig = lists();
        for s in sig.sorts() {
            let mut ids: Vec<usize> = sig.ctors_of(s).iter().map(|&c| sig.ctor_index(c)).collect();
            ids.sort();
            assert_eq!(ids, (0..sig.num_ctors(s)).collect::<Vec<_>>());
        }
    }

    #[test]
    fn cardinalities() {
        let sig = SignatureDecl::new()
            .sort("Colour", &[("red", &[]), ("green", &[]), ("blue", &[])])
            .sort(
                "CList",
                &[("nil", &[]), ("cons", &[("head", "Colour"), ("tail", "CList")])],
            )
            .sort("P", &[("mk", &[("a", "Colour"), ("b", "Colour")])])
            .validate()
            .unwrap();
        let id = |n| sig.sort_id(n).unwrap();
        assert_eq!(sig.cardinality(id("Colour")), Cardinality::Finite(3));
        assert_eq!(sig.cardinality(id("CList")), Cardinality::Infinite);
        assert_eq!(sig.cardinality(id("P")), Cardinality::Finite(9));
    }

    #[test]
    fn dependency_graph_matches_list_figure() {
        let sig = lists();
        let g = sig.dependency_graph();
        assert!(g.is_bipartite());
        let s = |n| Vertex::Sort(sig.sort_id(n).unwrap());
        let c = |n| Vertex::Ctor(sig.ctor_id(n).unwrap());
        let expected: BTreeSet<_> = [
            (s("Colour"), c("red")),
            (s("Colour"), c("green")),
            (s("Colour"), c("blue")),
            (s("CList"), c("nil")),
            (s("CList"), c("cons")),
            (c("cons"), s("Colour")),
            (c("cons"), s("CList")),
        ]
        .into_iter()
        .collect();
        assert_eq!(g.edges, expected);
        let succ: Vec<_> = g.successors(c("cons")).collect();
        assert_eq!(succ, vec![s("Colour"), s("CList")]);
    }
}
