//! Eventually periodic subsets of the naturals.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;

/// `{n < threshold | n in exceptions} u {n >= threshold | n mod period in residues}`.
///
/// Values are always kept in canonical form: the period is minimal and,
/// for that period, so is the threshold. Structural equality is therefore
/// set equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EventuallyPeriodicSet {
    exceptions: BTreeSet<u64>,
    threshold: u64,
    period: u64,
    residues: BTreeSet<u64>,
}

impl EventuallyPeriodicSet {
    pub fn empty() -> Self {
        Self {
            exceptions: BTreeSet::new(),
            threshold: 0,
            period: 1,
            residues: BTreeSet::new(),
        }
    }

    pub fn singleton(n: u64) -> Self {
        Self::finite([n])
    }

    pub fn finite(items: impl IntoIterator<Item = u64>) -> Self {
        let exceptions: BTreeSet<u64> = items.into_iter().collect();
        let threshold = exceptions.iter().next_back().map_or(0, |m| m + 1);
        Self::from_parts(exceptions, threshold, 1, BTreeSet::new())
    }

    /// All naturals `>= from`.
    pub fn at_least(from: u64) -> Self {
        Self::from_parts(BTreeSet::new(), from, 1, [0].into())
    }

    /// `{start + k * step | k >= 0}`; `step = 0` gives `{start}`.
    pub fn progression(start: u64, step: u64) -> Self {
        if step == 0 {
            return Self::singleton(start);
        }
        Self::from_parts(BTreeSet::new(), start, step, [start % step].into())
    }

    /// Builds and normalizes. Exceptions at or above `threshold` are ignored,
    /// residues are taken modulo `period`.
    pub fn from_parts(
        exceptions: BTreeSet<u64>,
        threshold: u64,
        period: u64,
        residues: BTreeSet<u64>,
    ) -> Self {
        assert!(period >= 1, "period must be positive");
        let mut set = Self {
            exceptions: exceptions.into_iter().filter(|&e| e < threshold).collect(),
            threshold,
            period,
            residues: residues.into_iter().map(|r| r % period).collect(),
        };
        set.normalize();
        set
    }

    /// Builds a set from a membership window: `window[n]` for `n < threshold + period`
    /// decides membership, later values repeat with the given period.
    pub fn from_window(window: &[bool], threshold: u64, period: u64) -> Self {
        let t = threshold as usize;
        let p = period as usize;
        assert!(window.len() >= t + p, "window too short");
        let exceptions = (0..t).filter(|&n| window[n]).map(|n| n as u64).collect();
        let residues = (t..t + p)
            .filter(|&n| window[n])
            .map(|n| (n % p) as u64)
            .collect();
        Self::from_parts(exceptions, threshold, period, residues)
    }

    fn normalize(&mut self) {
        let p = self.period;
        let mut best = p;
        for d in 1..p {
            if p.is_multiple_of(d) && (0..p).all(|r| self.residues.contains(&r) == self.residues.contains(&((r + d) % p))) {
                best = d;
                break;
            }
        }
        if best != p {
            self.residues = self.residues.iter().map(|r| r % best).collect();
            self.period = best;
        }
        while self.threshold > 0 {
            let n = self.threshold - 1;
            let periodic = self.residues.contains(&(n % self.period));
            if self.exceptions.contains(&n) != periodic {
                break;
            }
            self.exceptions.remove(&n);
            self.threshold = n;
        }
    }

    pub fn exceptions(&self) -> &BTreeSet<u64> {
        &self.exceptions
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    pub fn period(&self) -> u64 {
        self.period
    }

    pub fn residues(&self) -> &BTreeSet<u64> {
        &self.residues
    }

    pub fn contains(&self, n: u64) -> bool {
        if n < self.threshold {
            self.exceptions.contains(&n)
        } else {
            self.residues.contains(&(n % self.period))
        }
    }

    pub fn is_empty(&self) -> bool {
        self.exceptions.is_empty() && self.residues.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.residues.is_empty()
    }

    pub fn min(&self) -> Option<u64> {
        if let Some(&e) = self.exceptions.iter().next() {
            return Some(e);
        }
        (self.threshold..self.threshold + self.period).find(|&n| self.contains(n))
    }

    /// Largest member of a finite set.
    pub fn max(&self) -> Option<u64> {
        if self.is_finite() {
            self.exceptions.iter().next_back().copied()
        } else {
            None
        }
    }

    /// Members `<= limit` in increasing order.
    pub fn members_upto(&self, limit: u64) -> Vec<u64> {
        (0..=limit).filter(|&n| self.contains(n)).collect()
    }

    fn window(&self, len: u64) -> Vec<bool> {
        (0..len).map(|n| self.contains(n)).collect()
    }

    pub fn union(&self, other: &Self) -> Self {
        let t = self.threshold.max(other.threshold);
        let p = self.period.lcm(&other.period);
        let w: Vec<bool> = (0..t + p)
            .map(|n| self.contains(n) || other.contains(n))
            .collect();
        Self::from_window(&w, t, p)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let t = self.threshold.max(other.threshold);
        let p = self.period.lcm(&other.period);
        let w: Vec<bool> = (0..t + p)
            .map(|n| self.contains(n) && other.contains(n))
            .collect();
        Self::from_window(&w, t, p)
    }

    /// `{n + c | n in self}`.
    pub fn shift(&self, c: u64) -> Self {
        Self::from_parts(
            self.exceptions.iter().map(|e| e + c).collect(),
            self.threshold + c,
            self.period,
            self.residues.iter().map(|r| r + c).collect(),
        )
    }

    /// Minkowski sum `{a + b | a in self, b in other}`.
    pub fn sum(&self, other: &Self) -> Self {
        if self.is_empty() || other.is_empty() {
            return Self::empty();
        }
        let (ta, tb, pa, pb) = (self.threshold, other.threshold, self.period, other.period);
        // beyond this bound the sum is periodic with period lcm(pa, pb)
        let t = ta + tb + pa + pb + pa * pb;
        let p = pa.lcm(&pb);
        let len = t + p;
        let wa = self.window(len);
        let wb = other.window(len);
        let mut out = vec![false; len as usize];
        let bs: Vec<usize> = (0..len as usize).filter(|&b| wb[b]).collect();
        for (a, &ina) in wa.iter().enumerate() {
            if !ina {
                continue;
            }
            for &b in &bs {
                if a + b >= out.len() {
                    break;
                }
                out[a + b] = true;
            }
        }
        Self::from_window(&out, t, p)
    }

    /// `{0, c, 2c, ...} + self`.
    pub fn plus_multiples(&self, c: u64) -> Self {
        self.sum(&Self::progression(0, c))
    }
}

impl fmt::Display for EventuallyPeriodicSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "{{}}");
        }
        let mut parts = Vec::new();
        if !self.exceptions.is_empty() {
            let items: Vec<String> = self.exceptions.iter().map(|e| e.to_string()).collect();
            parts.push(format!("{{{}}}", items.join(", ")));
        }
        if !self.residues.is_empty() {
            let items: Vec<String> = self.residues.iter().map(|r| r.to_string()).collect();
            let items = items.join(", ");
            parts.push(match (self.threshold, self.period) {
                (t, 1) => format!("{{n >= {t}}}"),
                (0, p) => format!("{{n | n mod {p} in {{{items}}}}}"),
                (t, p) => format!("{{n >= {t} | n mod {p} in {{{items}}}}}"),
            });
        }
        write!(f, "{}", parts.join(" u "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn explicit(s: &EventuallyPeriodicSet, limit: u64) -> BTreeSet<u64> {
        s.members_upto(limit).into_iter().collect()
    }

    #[test]
    fn canonical_form_is_unique() {
        let odd = EventuallyPeriodicSet::progression(1, 2);
        let odd2 = EventuallyPeriodicSet::from_parts([1, 3].into(), 5, 4, [1, 3].into());
        assert_eq!(odd, odd2);
        assert_eq!(odd.period(), 2);
        assert_eq!(odd.threshold(), 0);
        assert_eq!(odd.to_string(), "{n | n mod 2 in {1}}");
        assert_eq!(
            EventuallyPeriodicSet::progression(3, 2).to_string(),
            "{n >= 2 | n mod 2 in {1}}"
        );
        assert_eq!(EventuallyPeriodicSet::at_least(1).to_string(), "{n >= 1}");
        assert_eq!(EventuallyPeriodicSet::singleton(1).to_string(), "{1}");
    }

    #[test]
    fn sum_and_union_against_explicit_sets() {
        let a = EventuallyPeriodicSet::from_parts([0, 2].into(), 5, 3, [1].into());
        let b = EventuallyPeriodicSet::from_parts([1].into(), 4, 2, [0].into());
        let limit = 200;
        let ea = explicit(&a, limit);
        let eb = explicit(&b, limit);
        let sum: BTreeSet<u64> = ea
            .iter()
            .flat_map(|x| eb.iter().map(move |y| x + y))
            .filter(|&n| n <= limit)
            .collect();
        assert_eq!(explicit(&a.sum(&b), limit), sum);
        let union: BTreeSet<u64> = ea.union(&eb).copied().collect();
        assert_eq!(explicit(&a.union(&b), limit), union);
        let shifted: BTreeSet<u64> = ea.iter().map(|x| x + 7).filter(|&n| n <= limit).collect();
        assert_eq!(explicit(&a.shift(7), limit), shifted);
    }

    #[test]
    fn finite_sets() {
        let s = EventuallyPeriodicSet::finite([3, 1]);
        assert!(s.is_finite());
        assert_eq!(s.max(), Some(3));
        assert_eq!(s.min(), Some(1));
        assert!(EventuallyPeriodicSet::empty().sum(&s).is_empty());
    }
}
