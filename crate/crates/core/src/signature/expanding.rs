//! Expandingness: does every realized size eventually carry arbitrarily many terms?
//!
//! A sort is reported non-expanding when it heads a simple cycle in the
//! sort/constructor dependency graph such that
//!  1. the cycle is the only way back to its head,
//!  2. every constructor on it has exactly one argument left after
//!     single-term sorts are eliminated, and
//!  3. the cycle contributes unboundedly to the head's size image.

use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;

use super::{Cardinality, CtorId, EventuallyPeriodicSet, Signature, SortId};

/// A cycle `s1 -> f1 -> s2 -> ... -> fn -> s1`, stored as `(s_i, f_i)` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleWitness {
    pub steps: Vec<(SortId, CtorId)>,
}

impl CycleWitness {
    pub fn head(&self) -> SortId {
        self.steps[0].0
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        CycleDisplay { cycle: self, sig }
    }
}

struct CycleDisplay<'a> {
    cycle: &'a CycleWitness,
    sig: &'a Signature,
}

impl fmt::Display for CycleDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, c) in &self.cycle.steps {
            write!(
                f,
                "{} -> {} -> ",
                self.sig.sort_name(*s),
                self.sig.ctor_name(*c)
            )?;
        }
        write!(f, "{}", self.sig.sort_name(self.cycle.head()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SortVerdict {
    Expanding,
    NonExpanding(CycleWitness),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandingReport {
    pub verdicts: Vec<SortVerdict>,
}

impl ExpandingReport {
    pub fn verdict(&self, s: SortId) -> &SortVerdict {
        &self.verdicts[s.0]
    }

    /// True iff no witness cycle exists, i.e. the whole ADT is expanding.
    pub fn is_expanding(&self) -> bool {
        self.verdicts
            .iter()
            .all(|v| matches!(v, SortVerdict::Expanding))
    }

    pub fn witnesses(&self) -> impl Iterator<Item = &CycleWitness> {
        self.verdicts.iter().filter_map(|v| match v {
            SortVerdict::NonExpanding(c) => Some(c),
            SortVerdict::Expanding => None,
        })
    }

    /// One line per sort, e.g. `Nat: non-expanding (cycle: Nat -> succ -> Nat)`.
    pub fn render(&self, sig: &Signature) -> String {
        let mut out = String::new();
        for s in sig.sorts() {
            match self.verdict(s) {
                SortVerdict::Expanding => {
                    out.push_str(&format!("{}: expanding\n", sig.sort_name(s)));
                }
                SortVerdict::NonExpanding(c) => out.push_str(&format!(
                    "{}: non-expanding (cycle: {})\n",
                    sig.sort_name(s),
                    c.display(sig)
                )),
            }
        }
        out
    }
}

/// Size of the unique term of a single-term sort.
fn singleton_sizes(sig: &Signature) -> BTreeMap<SortId, u64> {
    sig.sorts()
        .filter(|&s| sig.cardinality(s) == Cardinality::Finite(1))
        .map(|s| (s, sig.size_image(s).min().expect("inhabited")))
        .collect()
}

/// Arguments of `c` that survive single-term elimination.
fn live_args(sig: &Signature, c: CtorId, single: &BTreeMap<SortId, u64>) -> Vec<SortId> {
    sig.ctor(c)
        .args
        .iter()
        .map(|a| a.sort)
        .filter(|s| !single.contains_key(s))
        .collect()
}

/// Strongly connected components of the sort graph restricted to live sorts,
/// as a component index per sort.
fn sort_components(sig: &Signature, single: &BTreeMap<SortId, u64>) -> Vec<usize> {
    let n = sig.num_sorts();
    let mut reach = vec![vec![false; n]; n];
    for s in sig.sorts() {
        if single.contains_key(&s) {
            continue;
        }
        reach[s.0][s.0] = true;
        for &c in sig.ctors_of(s) {
            for a in live_args(sig, c, single) {
                reach[s.0][a.0] = true;
            }
        }
    }
    for m in 0..n {
        for i in 0..n {
            if reach[i][m] {
                for j in 0..n {
                    if reach[m][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    (0..n)
        .map(|i| (0..n).find(|&j| reach[i][j] && reach[j][i]).unwrap_or(i))
        .collect()
}

/// Looks for a witness cycle headed by `head`.
fn witness_for(
    sig: &Signature,
    head: SortId,
    single: &BTreeMap<SortId, u64>,
    comp: &[usize],
) -> Option<CycleWitness> {
    if single.contains_key(&head) {
        return None;
    }
    let scc = comp[head.0];
    let in_scc = |s: SortId| comp[s.0] == scc && !single.contains_key(&s);
    // the component must be a single simple cycle, so every
    // sort in it has exactly one constructor edge staying inside
    let mut steps = Vec::new();
    let mut weights = Vec::new();
    let mut cur = head;
    loop {
        let mut inside = Vec::new();
        for &c in sig.ctors_of(cur) {
            let live = live_args(sig, c, single);
            let back: Vec<SortId> = live.iter().copied().filter(|&a| in_scc(a)).collect();
            if !back.is_empty() {
                inside.push((c, live, back));
            }
        }
        if inside.len() != 1 {
            return None;
        }
        let (c, live, back) = inside.pop().expect("one edge");
        if back.len() != 1 {
            return None;
        }
        // every cycle constructor is unary after elimination
        if live.len() != 1 {
            return None;
        }
        let weight = 1 + sig
            .ctor(c)
            .args
            .iter()
            .filter_map(|a| single.get(&a.sort))
            .sum::<u64>();
        steps.push((cur, c));
        weights.push(weight);
        cur = back[0];
        if cur == head {
            break;
        }
        if steps.iter().any(|(s, _)| *s == cur) {
            return None;
        }
    }
    if condition_three(sig, &steps, &weights) {
        Some(CycleWitness { steps })
    } else {
        None
    }
}

/// `R = U_i (S^{f_i}_{s_i} + offset_i)` and `T_{k+1} = R u (T_k + W)`; the
/// cycle contributes unboundedly iff the chain never stabilizes.
fn condition_three(sig: &Signature, steps: &[(SortId, CtorId)], weights: &[u64]) -> bool {
    let total: u64 = weights.iter().sum();
    let mut r = EventuallyPeriodicSet::empty();
    let mut offset = 0;
    for (&(s, c), &w) in steps.iter().zip(weights) {
        let rel = sig
            .relativized_size_image(s, c)
            .expect("cycle constructor belongs to its sort");
        r = r.union(&rel.shift(offset));
        offset += w;
    }
    let l = total.lcm(&r.period());
    let bound = (r.threshold() + r.period() * total + 2 * l) / total + r.period() + 2;
    let mut t = r.clone();
    for _ in 0..=bound {
        let next = r.union(&t.shift(total));
        if next == t {
            return false;
        }
        t = next;
    }
    true
}

/// Per-sort expandingness verdicts.
///
/// Sorts heading a witness cycle are reported non-expanding; the ADT as a
/// whole is expanding iff no sort is. Sorts that merely reach a witness
/// cycle are reported expanding.
pub fn check_expanding(sig: &Signature) -> ExpandingReport {
    let single = singleton_sizes(sig);
    let comp = sort_components(sig, &single);
    let verdicts = sig
        .sorts()
        .map(|s| match witness_for(sig, s, &single, &comp) {
            Some(w) => SortVerdict::NonExpanding(w),
            None => SortVerdict::Expanding,
        })
        .collect();
    ExpandingReport { verdicts }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::tests::{lists, nat};
    use crate::signature::SignatureDecl;

    fn cycles(n: usize) -> Signature {
        let mut decl = SignatureDecl::new()
            .sort("Colour", &[("red", &[]), ("green", &[]), ("blue", &[])])
            .sort(
                "CList",
                &[("nil", &[]), ("cons", &[("head", "Colour"), ("tail", "CList")])],
            );
        let names: Vec<(String, String, String, String)> = (1..=n)
            .map(|i| {
                let next = if i == n { 1 } else { i + 1 };
                (
                    format!("S{i}"),
                    format!("f{i}"),
                    format!("s{next}_{i}"),
                    format!("S{next}"),
                )
            })
            .collect();
        for (i, (s, f, sel, next)) in names.iter().enumerate() {
            if i + 1 == n {
                decl = decl.sort(
                    s,
                    &[
                        (f.as_str(), &[(sel.as_str(), next.as_str())]),
                        ("null", &[]),
                        ("col", &[("list", "CList")]),
                    ],
                );
            } else {
                decl = decl.sort(s, &[(f.as_str(), &[(sel.as_str(), next.as_str())])]);
            }
        }
        decl.validate().unwrap()
    }

    #[test]
    fn nat_is_not_expanding() {
        let sig = nat();
        let report = check_expanding(&sig);
        assert!(!report.is_expanding());
        assert_eq!(
            report.render(&sig),
            "Nat: non-expanding (cycle: Nat -> succ -> Nat)\n"
        );
    }

    #[test]
    fn lists_expand() {
        let sig = lists();
        let report = check_expanding(&sig);
        assert!(report.is_expanding());
    }

    #[test]
    fn two_cycle_versus_three_cycle() {
        let sig = cycles(2);
        let report = check_expanding(&sig);
        let s1 = sig.sort_id("S1").unwrap();
        assert!(matches!(report.verdict(s1), SortVerdict::NonExpanding(_)));
        if let SortVerdict::NonExpanding(w) = report.verdict(s1) {
            assert_eq!(w.display(&sig).to_string(), "S1 -> f1 -> S2 -> f2 -> S1");
        }
        assert_eq!(
            *report.verdict(sig.sort_id("CList").unwrap()),
            SortVerdict::Expanding
        );

        let sig = cycles(3);
        let report = check_expanding(&sig);
        assert!(report.is_expanding(), "{}", report.render(&sig));
    }

    #[test]
    fn singleton_arguments_are_eliminated() {
        // Unit has one term, so step(Unit, N) behaves like a unary constructor
        let sig = SignatureDecl::new()
            .sort("Unit", &[("unit", &[])])
            .sort("N", &[("z", &[]), ("step", &[("u", "Unit"), ("rest", "N")])])
            .validate()
            .unwrap();
        let report = check_expanding(&sig);
        let n = sig.sort_id("N").unwrap();
        assert!(matches!(report.verdict(n), SortVerdict::NonExpanding(_)));
    }
}
