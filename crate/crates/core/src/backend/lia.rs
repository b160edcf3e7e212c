//! Integer feasibility of conjunctions of linear constraints.
//!
//! Equalities are eliminated exactly over the integers (unit-coefficient
//! substitution, otherwise the symmetric-modulo reduction of the Omega
//! test). The remaining inequalities are tightened by the gcd of their
//! coefficients and decided by a bounded simplex over the rationals with
//! Bland's rule, followed by branch-and-bound.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

type Q = BigRational;

/// `sum coeffs[v] * v + constant (= | <=) 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: BTreeMap<usize, BigInt>,
    pub constant: BigInt,
    pub is_eq: bool,
}

impl Constraint {
    pub fn new(coeffs: impl IntoIterator<Item = (usize, i64)>, constant: i64, is_eq: bool) -> Self {
        let mut map: BTreeMap<usize, BigInt> = BTreeMap::new();
        for (v, c) in coeffs {
            *map.entry(v).or_insert_with(BigInt::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        Constraint {
            coeffs: map,
            constant: constant.into(),
            is_eq,
        }
    }

    pub fn value(&self, vals: &[BigInt]) -> BigInt {
        let mut s = self.constant.clone();
        for (v, c) in &self.coeffs {
            s += c * &vals[*v];
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LiaResult {
    Sat(Vec<BigInt>),
    Unsat,
    Unknown(String),
}

/// Decides `constraints` over `num_vars` integer variables. `max_nodes`
/// bounds the branch-and-bound tree.
pub fn solve(num_vars: usize, constraints: &[Constraint], max_nodes: usize) -> LiaResult {
    let mut eqs: Vec<Row> = Vec::new();
    let mut les: Vec<Row> = Vec::new();
    for c in constraints {
        let row = Row {
            coeffs: c.coeffs.clone(),
            constant: c.constant.clone(),
        };
        if c.is_eq {
            eqs.push(row);
        } else {
            les.push(row);
        }
    }
    let mut next = num_vars;
    let mut defs: Vec<(usize, Row)> = Vec::new();
    let mut rounds = 0usize;
    while let Some(mut e) = eqs.pop() {
        rounds += 1;
        if rounds > 10_000 {
            return LiaResult::Unknown("equality elimination did not converge".into());
        }
        e.coeffs.retain(|_, c| !c.is_zero());
        if e.coeffs.is_empty() {
            if !e.constant.is_zero() {
                return LiaResult::Unsat;
            }
            continue;
        }
        let g = e.gcd();
        if !(&e.constant % &g).is_zero() {
            return LiaResult::Unsat;
        }
        e.divide(&g);
        let unit = e.coeffs.iter().find(|(_, c)| c.abs().is_one()).map(|(v, c)| (*v, c.clone()));
        let (k, def, again) = match unit {
            Some((k, a)) => {
                // a*x_k + rest + c = 0 with a = +-1
                let mut def = e.clone();
                def.coeffs.remove(&k);
                def.scale(&-a);
                (k, def, false)
            }
            None => {
                let (&k, _) = e
                    .coeffs
                    .iter()
                    .min_by(|(va, a), (vb, b)| a.abs().cmp(&b.abs()).then(va.cmp(vb)))
                    .expect("non-empty");
                if e.coeffs[&k].is_negative() {
                    e.scale(&BigInt::from(-1));
                }
                let m: BigInt = &e.coeffs[&k] + 1;
                let sigma = next;
                next += 1;
                let mut def = Row {
                    coeffs: BTreeMap::new(),
                    constant: mod_hat(&e.constant, &m),
                };
                for (v, a) in &e.coeffs {
                    if *v != k {
                        def.coeffs.insert(*v, mod_hat(a, &m));
                    }
                }
                def.coeffs.insert(sigma, -m);
                def.coeffs.retain(|_, c| !c.is_zero());
                (k, def, true)
            }
        };
        if again {
            e.substitute(k, &def);
            eqs.push(e);
        }
        for r in eqs.iter_mut().chain(les.iter_mut()) {
            r.substitute(k, &def);
        }
        defs.push((k, def));
    }

    // tighten and merge inequalities by their normalized linear form
    let mut bounds: BTreeMap<Vec<(usize, BigInt)>, (Option<BigInt>, Option<BigInt>)> = BTreeMap::new();
    for mut r in les {
        r.coeffs.retain(|_, c| !c.is_zero());
        if r.coeffs.is_empty() {
            if r.constant.is_positive() {
                return LiaResult::Unsat;
            }
            continue;
        }
        let g = r.gcd();
        // sum a x + c <= 0  ==>  sum (a/g) x <= floor(-c/g)
        let rhs = (-&r.constant).div_floor(&g);
        let mut form: Vec<(usize, BigInt)> = r.coeffs.iter().map(|(v, c)| (*v, c / &g)).collect();
        let entry_upper;
        if form[0].1.is_negative() {
            form.iter_mut().for_each(|(_, c)| *c = -&*c);
            entry_upper = false;
        } else {
            entry_upper = true;
        }
        let e = bounds.entry(form).or_insert((None, None));
        if entry_upper {
            e.1 = Some(e.1.take().map_or(rhs.clone(), |u| u.min(rhs)));
        } else {
            let lo = -rhs;
            e.0 = Some(e.0.take().map_or(lo.clone(), |l| l.max(lo)));
        }
    }
    for (lo, hi) in bounds.values() {
        if let (Some(l), Some(h)) = (lo, hi) {
            if l > h {
                return LiaResult::Unsat;
            }
        }
    }

    let mut structural: Vec<usize> = bounds.keys().flat_map(|f| f.iter().map(|(v, _)| *v)).collect();
    structural.sort_unstable();
    structural.dedup();
    let col: BTreeMap<usize, usize> = structural.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut sx = Simplex::new(structural.len());
    for (form, (lo, hi)) in &bounds {
        let lo = lo.clone().map(Q::from_integer);
        let hi = hi.clone().map(Q::from_integer);
        if let [(v, c)] = form.as_slice() {
            if c.is_one() {
                let j = col[v];
                sx.tighten(j, lo, hi);
                continue;
            }
        }
        let coeffs: Vec<(usize, Q)> = form
            .iter()
            .map(|(v, c)| (col[v], Q::from_integer(c.clone())))
            .collect();
        sx.add_row(&coeffs, lo, hi);
    }
    let mut budget = max_nodes;
    let Some(point) = (match branch_and_bound(sx, structural.len(), &mut budget) {
        Bb::Sat(p) => Some(p),
        Bb::Unsat => return LiaResult::Unsat,
        Bb::Unknown => None,
    }) else {
        return LiaResult::Unknown("branch-and-bound node limit reached".into());
    };

    let mut vals = vec![BigInt::zero(); next];
    for (i, v) in structural.iter().enumerate() {
        vals[*v] = point[i].clone();
    }
    for (k, def) in defs.iter().rev() {
        vals[*k] = def.eval(&vals);
    }
    vals.truncate(num_vars);
    LiaResult::Sat(vals)
}

/// `a - m * floor(a/m + 1/2)`.
fn mod_hat(a: &BigInt, m: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    a - m * (&two * a + m).div_floor(&(&two * m))
}

/// `sum coeffs * v + constant`.
#[derive(Debug, Clone)]
struct Row {
    coeffs: BTreeMap<usize, BigInt>,
    constant: BigInt,
}

impl Row {
    fn gcd(&self) -> BigInt {
        self.coeffs
            .values()
            .fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    fn divide(&mut self, g: &BigInt) {
        self.coeffs.values_mut().for_each(|c| *c = &*c / g);
        self.constant = &self.constant / g;
    }

    fn scale(&mut self, k: &BigInt) {
        self.coeffs.values_mut().for_each(|c| *c *= k);
        self.constant *= k;
    }

    /// Replaces `v` by `def`.
    fn substitute(&mut self, v: usize, def: &Row) {
        let Some(a) = self.coeffs.remove(&v) else { return };
        for (w, c) in &def.coeffs {
            *self.coeffs.entry(*w).or_insert_with(BigInt::zero) += &a * c;
        }
        self.coeffs.retain(|_, c| !c.is_zero());
        self.constant += &a * &def.constant;
    }

    fn eval(&self, vals: &[BigInt]) -> BigInt {
        let mut s = self.constant.clone();
        for (v, c) in &self.coeffs {
            s += c * &vals[*v];
        }
        s
    }
}

/// Bounded simplex in the general form: every row defines a slack
/// variable as a combination of the structural variables, and all
/// constraints are bounds on variables.
#[derive(Clone)]
struct Simplex {
    /// `rows[r][j]`: coefficient of variable `j` in the definition of the
    /// basic variable of row `r`.
    rows: Vec<Vec<Q>>,
    basis: Vec<usize>,
    row_of: Vec<Option<usize>>,
    val: Vec<Q>,
    lo: Vec<Option<Q>>,
    hi: Vec<Option<Q>>,
}

impl Simplex {
    fn new(structural: usize) -> Self {
        Simplex {
            rows: Vec::new(),
            basis: Vec::new(),
            row_of: vec![None; structural],
            val: vec![Q::zero(); structural],
            lo: vec![None; structural],
            hi: vec![None; structural],
        }
    }

    fn num_vars(&self) -> usize {
        self.val.len()
    }

    fn add_row(&mut self, coeffs: &[(usize, Q)], lo: Option<Q>, hi: Option<Q>) {
        let s = self.num_vars();
        for r in &mut self.rows {
            r.push(Q::zero());
        }
        let mut row = vec![Q::zero(); s + 1];
        for (j, c) in coeffs {
            // structural variables may already be basic: substitute their rows
            match self.row_of[*j] {
                None => row[*j] += c,
                Some(r) => {
                    for (k, a) in self.rows[r].iter().enumerate() {
                        if !a.is_zero() {
                            row[k] += c * a;
                        }
                    }
                }
            }
        }
        let value = (0..s).fold(Q::zero(), |acc, k| acc + &row[k] * &self.val[k]);
        self.rows.push(row);
        self.basis.push(s);
        self.row_of.push(Some(self.rows.len() - 1));
        self.val.push(value);
        self.lo.push(lo);
        self.hi.push(hi);
    }

    /// Intersects the bounds of `j` with `[lo, hi]`; false if empty.
    fn tighten(&mut self, j: usize, lo: Option<Q>, hi: Option<Q>) -> bool {
        if let Some(l) = lo {
            if self.lo[j].as_ref().is_none_or(|x| *x < l) {
                self.lo[j] = Some(l);
            }
        }
        if let Some(h) = hi {
            if self.hi[j].as_ref().is_none_or(|x| *x > h) {
                self.hi[j] = Some(h);
            }
        }
        if let (Some(l), Some(h)) = (&self.lo[j], &self.hi[j]) {
            if l > h {
                return false;
            }
        }
        if self.row_of[j].is_none() {
            let target = if self.lo[j].as_ref().is_some_and(|l| self.val[j] < *l) {
                self.lo[j].clone()
            } else if self.hi[j].as_ref().is_some_and(|h| self.val[j] > *h) {
                self.hi[j].clone()
            } else {
                None
            };
            if let Some(t) = target {
                self.update(j, t);
            }
        }
        true
    }

    /// Sets a non-basic variable and propagates to the basic ones.
    fn update(&mut self, j: usize, v: Q) {
        let delta = &v - &self.val[j];
        for (r, row) in self.rows.iter().enumerate() {
            if !row[j].is_zero() {
                let b = self.basis[r];
                self.val[b] = &self.val[b] + &row[j] * &delta;
            }
        }
        self.val[j] = v;
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let b = self.basis[r];
        let a = self.rows[r][j].clone();
        // x_j = (b - sum_{k != j} a_k x_k) / a
        let mut new_row: Vec<Q> = self.rows[r].iter().map(|c| -c / &a).collect();
        new_row[j] = Q::zero();
        new_row[b] = Q::one() / &a;
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[j].is_zero() {
                continue;
            }
            let c = std::mem::replace(&mut row[j], Q::zero());
            for (k, x) in new_row.iter().enumerate() {
                if !x.is_zero() {
                    row[k] += &c * x;
                }
            }
        }
        self.rows[r] = new_row;
        self.basis[r] = j;
        self.row_of[j] = Some(r);
        self.row_of[b] = None;
    }

    fn violated(&self, v: usize) -> Option<Q> {
        if let Some(l) = &self.lo[v] {
            if self.val[v] < *l {
                return Some(l.clone());
            }
        }
        if let Some(h) = &self.hi[v] {
            if self.val[v] > *h {
                return Some(h.clone());
            }
        }
        None
    }

    /// Rational feasibility of the current bounds.
    fn check(&mut self) -> bool {
        loop {
            let Some((r, b, target)) = self
                .basis
                .iter()
                .enumerate()
                .filter_map(|(r, &b)| self.violated(b).map(|t| (r, b, t)))
                .min_by_key(|(_, b, _)| *b)
            else {
                return true;
            };
            let increase = target > self.val[b];
            let entering = (0..self.num_vars()).find(|&j| {
                if self.row_of[j].is_some() {
                    return false;
                }
                let a = &self.rows[r][j];
                if a.is_zero() {
                    return false;
                }
                let can_up = self.hi[j].as_ref().is_none_or(|h| self.val[j] < *h);
                let can_down = self.lo[j].as_ref().is_none_or(|l| self.val[j] > *l);
                if increase == a.is_positive() {
                    can_up
                } else {
                    can_down
                }
            });
            let Some(j) = entering else { return false };
            let theta = (&target - &self.val[b]) / &self.rows[r][j];
            let new_j = &self.val[j] + &theta;
            self.update(j, new_j);
            self.pivot(r, j);
        }
    }
}

enum Bb {
    Sat(Vec<BigInt>),
    Unsat,
    Unknown,
}

fn branch_and_bound(mut sx: Simplex, structural: usize, budget: &mut usize) -> Bb {
    if !sx.check() {
        return Bb::Unsat;
    }
    let frac = (0..structural).find(|&j| !sx.val[j].is_integer());
    let Some(j) = frac else {
        return Bb::Sat((0..structural).map(|j| sx.val[j].to_integer()).collect());
    };
    if *budget == 0 {
        return Bb::Unknown;
    }
    *budget -= 1;
    let fl = sx.val[j].floor();
    let mut unknown = false;
    let mut down = sx.clone();
    if down.tighten(j, None, Some(fl.clone())) {
        match branch_and_bound(down, structural, budget) {
            Bb::Sat(p) => return Bb::Sat(p),
            Bb::Unknown => unknown = true,
            Bb::Unsat => {}
        }
    }
    if sx.tighten(j, Some(fl + Q::one()), None) {
        match branch_and_bound(sx, structural, budget) {
            Bb::Sat(p) => return Bb::Sat(p),
            Bb::Unknown => unknown = true,
            Bb::Unsat => {}
        }
    }
    if unknown {
        Bb::Unknown
    } else {
        Bb::Unsat
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(coeffs: &[(usize, i64)], k: i64, eq: bool) -> Constraint {
        Constraint::new(coeffs.iter().copied(), k, eq)
    }

    fn sat(n: usize, cs: &[Constraint]) -> Vec<BigInt> {
        match solve(n, cs, 1000) {
            LiaResult::Sat(v) => {
                for x in cs {
                    let val = x.value(&v);
                    assert!(if x.is_eq { val.is_zero() } else { !val.is_positive() }, "{x:?}");
                }
                v
            }
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn parity_conflict_is_unsat() {
        // x = 2a + 1, x = 2b
        let cs = [c(&[(0, 1), (1, -2)], -1, true), c(&[(0, 1), (2, -2)], 0, true)];
        assert_eq!(solve(3, &cs, 100), LiaResult::Unsat);
    }

    #[test]
    fn non_unit_equalities() {
        // 3x + 5y = 7, x >= 0, y >= 0 -> x = 4, y = -1 fails; x=-1,y=2 fails; unsat? 3*4-5=7 with y=-1
        let cs = [c(&[(0, 3), (1, 5)], -7, true), c(&[(0, -1)], 0, false), c(&[(1, -1)], 0, false)];
        assert_eq!(solve(2, &cs, 100), LiaResult::Unsat);
        // 3x + 5y = 11 has x = 2, y = 1
        let cs = [c(&[(0, 3), (1, 5)], -11, true), c(&[(0, -1)], 0, false), c(&[(1, -1)], 0, false)];
        let v = sat(2, &cs);
        assert_eq!((v[0].clone(), v[1].clone()), (BigInt::from(2), BigInt::from(1)));
    }

    #[test]
    fn gcd_tightening_closes_gaps() {
        // 1 <= 2x - 2y <= 1
        let cs = [c(&[(0, 2), (1, -2)], -1, false), c(&[(0, -2), (1, 2)], 1, false)];
        assert_eq!(solve(2, &cs, 100), LiaResult::Unsat);
    }

    #[test]
    fn chains_of_differences() {
        // a < b < c < a + 3 ; a >= 5
        let cs = [
            c(&[(0, 1), (1, -1)], 1, false),
            c(&[(1, 1), (2, -1)], 1, false),
            c(&[(2, 1), (0, -1)], -2, false),
            c(&[(0, -1)], 5, false),
        ];
        let v = sat(3, &cs);
        assert_eq!(&v[1] - &v[0], BigInt::one());
        let cs = [
            c(&[(0, 1), (1, -1)], 1, false),
            c(&[(1, 1), (2, -1)], 1, false),
            c(&[(2, 1), (0, -1)], -1, false),
        ];
        assert_eq!(solve(3, &cs, 100), LiaResult::Unsat);
    }

    #[test]
    fn branching_is_needed() {
        // 2x + 2y >= 3, x + y <= 2, x - y = 0 -> x = y = 1
        let cs = [
            c(&[(0, -2), (1, -2)], 3, false),
            c(&[(0, 1), (1, 1)], -2, false),
            c(&[(0, 3), (1, -3)], 0, true),
        ];
        let v = sat(2, &cs);
        assert_eq!(v, vec![BigInt::one(), BigInt::one()]);
    }
}
