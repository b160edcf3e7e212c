//! Size images, term counting and term enumeration.

use super::{CtorId, EventuallyPeriodicSet, Signature, SignatureError, SortId};
use crate::ast::Term;

/// Largest size accepted by the counting and enumeration oracles.
pub const DEFAULT_SIZE_CAP: u64 = 10_000;

/// Upper limit on the number of terms produced by [`Signature::enumerate_terms`].
const ENUM_CAP: usize = 2_000_000;

const MAX_WINDOW: usize = 1 << 14;

impl Signature {
    /// Size image of every sort, indexed by `SortId`.
    pub fn size_images(&self) -> &[EventuallyPeriodicSet] {
        self.size_images.get_or_init(|| compute_size_images(self))
    }

    /// `{ |t| : t a constructor term of sort s }`.
    pub fn size_image(&self, s: SortId) -> &EventuallyPeriodicSet {
        &self.size_images()[s.0]
    }

    /// Sizes realized by constructor `c`: `1 + sum of argument size images`.
    pub fn ctor_size_image(&self, c: CtorId) -> EventuallyPeriodicSet {
        let images = self.size_images();
        self.ctor(c)
            .args
            .iter()
            .fold(EventuallyPeriodicSet::singleton(1), |acc, a| {
                acc.sum(&images[a.sort.0])
            })
    }

    /// Sizes of `s`-terms whose head symbol is not `f`.
    pub fn relativized_size_image(
        &self,
        s: SortId,
        f: CtorId,
    ) -> Result<EventuallyPeriodicSet, SignatureError> {
        if self.ctor(f).sort != s {
            return Err(SignatureError::WrongSort {
                ctor: self.ctor_name(f).to_string(),
                sort: self.sort_name(s).to_string(),
            });
        }
        Ok(self
            .ctors_of(s)
            .iter()
            .filter(|&&g| g != f)
            .fold(EventuallyPeriodicSet::empty(), |acc, &g| {
                acc.union(&self.ctor_size_image(g))
            }))
    }

    /// Exact number of terms of sort `s` with size `b`.
    pub fn count_terms_of_size(&self, s: SortId, b: u64) -> Result<u128, SignatureError> {
        self.count_terms_of_size_capped(s, b, DEFAULT_SIZE_CAP)
    }

    pub fn count_terms_of_size_capped(
        &self,
        s: SortId,
        b: u64,
        cap: u64,
    ) -> Result<u128, SignatureError> {
        if b > cap {
            return Err(SignatureError::ResourceLimit(format!(
                "size {b} exceeds cap {cap}"
            )));
        }
        Ok(self.count_table(b as usize)?[s.0][b as usize])
    }

    /// `table[s][b]` = number of `s`-terms of size `b`, for all `b <= max`.
    pub fn count_table(&self, max: usize) -> Result<Vec<Vec<u128>>, SignatureError> {
        let overflow = || SignatureError::ResourceLimit("term count overflow".into());
        let k = self.num_sorts();
        let mut count = vec![vec![0u128; max + 1]; k];
        // partial[c][i][m]: ways the first i arguments of c sum to m
        let mut partial: Vec<Vec<Vec<u128>>> = self
            .ctors
            .iter()
            .map(|c| {
                let mut rows = vec![vec![0u128; max + 1]; c.args.len() + 1];
                rows[0][0] = 1;
                rows
            })
            .collect();
        for b in 1..=max {
            let m = b - 1;
            for (ci, c) in self.ctors.iter().enumerate() {
                for i in 1..=c.args.len() {
                    let arg = c.args[i - 1].sort.0;
                    let mut total: u128 = 0;
                    for j in 1..=m {
                        let left = partial[ci][i - 1][m - j];
                        if left == 0 {
                            continue;
                        }
                        let prod = left.checked_mul(count[arg][j]).ok_or_else(overflow)?;
                        total = total.checked_add(prod).ok_or_else(overflow)?;
                    }
                    partial[ci][i][m] = total;
                }
                let n = partial[ci][c.args.len()][m];
                let s = c.sort.0;
                count[s][b] = count[s][b].checked_add(n).ok_or_else(overflow)?;
            }
        }
        Ok(count)
    }

    /// All terms of sort `s` with size `<= max_size`, ordered by size, then
    /// constructor declaration order, then argument sizes and argument terms
    /// lexicographically.
    pub fn enumerate_terms(&self, s: SortId, max_size: u64) -> Result<Vec<Term>, SignatureError> {
        let table = self.terms_by_size(max_size as usize)?;
        Ok(table[s.0].iter().flatten().cloned().collect())
    }

    /// `table[s][b]` lists the `s`-terms of size `b` in enumeration order.
    pub fn terms_by_size(&self, max: usize) -> Result<Vec<Vec<Vec<Term>>>, SignatureError> {
        let k = self.num_sorts();
        let mut table: Vec<Vec<Vec<Term>>> = vec![vec![Vec::new(); max + 1]; k];
        let mut produced = 0usize;
        for b in 1..=max {
            for (ci, c) in self.ctors.iter().enumerate() {
                let sorts: Vec<usize> = c.args.iter().map(|a| a.sort.0).collect();
                let mut out = Vec::new();
                for comp in compositions(b - 1, sorts.len()) {
                    let lists: Vec<&Vec<Term>> = comp
                        .iter()
                        .zip(&sorts)
                        .map(|(&size, &srt)| &table[srt][size])
                        .collect();
                    if lists.iter().any(|l| l.is_empty()) {
                        continue;
                    }
                    let mut idx = vec![0usize; lists.len()];
                    'odometer: loop {
                        let args = idx.iter().zip(&lists).map(|(&i, l)| l[i].clone()).collect();
                        out.push(Term::Ctor(CtorId(ci), args));
                        produced += 1;
                        if produced > ENUM_CAP {
                            return Err(SignatureError::ResourceLimit(
                                "term enumeration cap reached".into(),
                            ));
                        }
                        // last position varies fastest
                        let mut pos = lists.len();
                        loop {
                            if pos == 0 {
                                break 'odometer;
                            }
                            pos -= 1;
                            idx[pos] += 1;
                            if idx[pos] < lists[pos].len() {
                                break;
                            }
                            idx[pos] = 0;
                        }
                    }
                }
                table[c.sort.0][b].extend(out);
            }
        }
        Ok(table)
    }

    /// The first term of sort `s` in enumeration order (a smallest term).
    pub fn default_term(&self, s: SortId) -> Term {
        let min = self
            .size_image(s)
            .min()
            .expect("validated sorts are inhabited");
        self.terms_by_size(min as usize)
            .expect("smallest terms are within caps")[s.0][min as usize][0]
            .clone()
    }
}

/// Ordered tuples of `parts` positive integers summing to `total`, lexicographic.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    if total < parts {
        return out;
    }
    let mut cur = Vec::with_capacity(parts);
    fn rec(rem: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 1 {
            cur.push(rem);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for first in 1..=rem - (left - 1) {
            cur.push(first);
            rec(rem - first, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(total, parts, &mut cur, &mut out);
    out
}

/// Membership windows `0..w` of all size images by dynamic programming.
fn size_windows(sig: &Signature, w: usize) -> Vec<Vec<bool>> {
    let k = sig.num_sorts();
    let mut member = vec![vec![false; w]; k];
    let mut partial: Vec<Vec<Vec<bool>>> = sig
        .ctors
        .iter()
        .map(|c| {
            let mut rows = vec![vec![false; w]; c.args.len() + 1];
            rows[0][0] = true;
            rows
        })
        .collect();
    for b in 1..w {
        let m = b - 1;
        for (ci, c) in sig.ctors.iter().enumerate() {
            for i in 1..=c.args.len() {
                let arg = c.args[i - 1].sort.0;
                partial[ci][i][m] = (1..=m).any(|j| partial[ci][i - 1][m - j] && member[arg][j]);
            }
            if partial[ci][c.args.len()][m] {
                member[c.sort.0][b] = true;
            }
        }
    }
    member
}

/// Guesses an eventually periodic set agreeing with `bits`, preferring small periods.
fn extract_candidate(bits: &[bool]) -> Option<EventuallyPeriodicSet> {
    let w = bits.len();
    for p in 1..=w / 3 {
        // smallest t such that bits[n] == bits[n + p] for all n in t..w-p
        let mut t = w - p;
        while t > 0 && bits[t - 1] == bits[t - 1 + p] {
            t -= 1;
        }
        if t + 2 * p <= w && t <= w / 2 {
            return Some(EventuallyPeriodicSet::from_window(bits, t as u64, p as u64));
        }
    }
    None
}

fn certify(sig: &Signature, images: &[EventuallyPeriodicSet]) -> bool {
    sig.sorts().all(|s| {
        let rhs = sig.ctors_of(s).iter().fold(EventuallyPeriodicSet::empty(), |acc, &c| {
            let img = sig.ctor(c).args.iter().fold(EventuallyPeriodicSet::singleton(1), |a, arg| {
                a.sum(&images[arg.sort.0])
            });
            acc.union(&img)
        });
        rhs == images[s.0]
    })
}

/// The grammar equations `S_s = U_c (1 + sum S_args)` have a unique solution,
/// since every part of a size is strictly smaller than the size itself. A
/// candidate read off a finite window is therefore exact once it satisfies
/// the equations.
fn compute_size_images(sig: &Signature) -> Vec<EventuallyPeriodicSet> {
    let mut w = 64;
    loop {
        let windows = size_windows(sig, w);
        let candidates: Option<Vec<_>> = windows.iter().map(|b| extract_candidate(b)).collect();
        if let Some(images) = candidates {
            if certify(sig, &images) {
                return images;
            }
        }
        assert!(w < MAX_WINDOW, "size image computation did not stabilize");
        w *= 2;
    }
}
