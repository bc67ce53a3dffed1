//! Finite-support multisets of variables (ω-sharing groups).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{parse_err, Error, Result};
use crate::syntax::{self, Exponent};
use crate::var::{Var, VarSet};

/// A multiset of variables. Zero counts are never stored.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct Multiset {
    counts: BTreeMap<Var, u32>,
}

impl Multiset {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(v: Var) -> Self {
        Self::from_counts([(v, 1)])
    }

    /// Builds a multiset from `(variable, count)` pairs; repeated variables
    /// are summed and zero counts dropped.
    pub fn from_counts(pairs: impl IntoIterator<Item = (Var, u32)>) -> Self {
        let mut m = Multiset::new();
        for (v, n) in pairs {
            m.add(v, n);
        }
        m
    }

    /// Adds `n` occurrences of `v`.
    ///
    /// Panics on `u32` overflow rather than wrapping.
    pub fn add(&mut self, v: Var, n: u32) {
        if n == 0 {
            return;
        }
        let slot = self.counts.entry(v).or_insert(0);
        *slot = slot.checked_add(n).expect("multiset count overflow");
    }

    pub fn count(&self, v: &Var) -> u32 {
        self.counts.get(v).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn contains(&self, v: &Var) -> bool {
        self.counts.contains_key(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, u32)> + Clone {
        self.counts.iter().map(|(v, n)| (v, *n))
    }

    pub fn support(&self) -> VarSet {
        self.counts.keys().cloned().collect()
    }

    pub fn support_iter(&self) -> impl Iterator<Item = &Var> {
        self.counts.keys()
    }

    /// Total number of elements counted with multiplicity.
    pub fn mass(&self) -> u64 {
        self.counts.values().map(|&n| u64::from(n)).sum()
    }

    /// Multiset sum `self ⊎ other`.
    pub fn sum(&self, other: &Multiset) -> Multiset {
        let mut out = self.clone();
        out.sum_assign(other);
        out
    }

    pub fn sum_assign(&mut self, other: &Multiset) {
        for (v, n) in other.iter() {
            self.add(v.clone(), n);
        }
    }

    /// `self ⊎ … ⊎ self` (`k` copies).
    pub fn scale(&self, k: u32) -> Multiset {
        if k == 0 {
            return Multiset::new();
        }
        Multiset {
            counts: self
                .counts
                .iter()
                .map(|(v, n)| {
                    (
                        v.clone(),
                        n.checked_mul(k).expect("multiset count overflow"),
                    )
                })
                .collect(),
        }
    }

    /// Restriction to the variables of `vars`.
    pub fn restrict(&self, vars: &VarSet) -> Multiset {
        Multiset {
            counts: self
                .counts
                .iter()
                .filter(|(v, _)| vars.contains(*v))
                .map(|(v, n)| (v.clone(), *n))
                .collect(),
        }
    }

    /// True when `self(v) <= other(v)` for every `v`.
    pub fn is_submultiset(&self, other: &Multiset) -> bool {
        self.iter().all(|(v, n)| n <= other.count(v))
    }

    /// Pointwise `self - other`, or `None` if some count would go negative.
    pub fn checked_sub(&self, other: &Multiset) -> Option<Multiset> {
        let mut out = self.clone();
        for (v, n) in other.iter() {
            let have = out.counts.get_mut(v)?;
            match (*have).cmp(&n) {
                Ordering::Less => return None,
                Ordering::Equal => {
                    out.counts.remove(v);
                }
                Ordering::Greater => *have -= n,
            }
        }
        Some(out)
    }

    /// Clamps every count to at most `cap`.
    pub fn saturate(&self, cap: u32) -> Multiset {
        Multiset {
            counts: self
                .counts
                .iter()
                .map(|(v, n)| (v.clone(), (*n).min(cap)))
                .collect(),
        }
    }

    /// Applies a variable map; variables without an image are kept.
    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Multiset {
        Multiset::from_counts(
            self.iter()
                .map(|(v, n)| (map.get(v).cloned().unwrap_or_else(|| v.clone()), n)),
        )
    }
}

/// Groups are ordered by support (lexicographic on the sorted variable
/// list), then by counts.
impl Ord for Multiset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.counts
            .keys()
            .cmp(other.counts.keys())
            .then_with(|| self.counts.values().cmp(other.counts.values()))
    }
}

impl PartialOrd for Multiset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        syntax::write_group(f, self.iter().map(|(v, n)| (v, Exponent::Finite(n))))
    }
}

impl fmt::Debug for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Multiset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut m = Multiset::new();
        for (v, e) in syntax::parse_group(s)? {
            match e {
                Exponent::Finite(n) => m.add(v, n),
                Exponent::Inf => {
                    return parse_err(format!("ω-sharing group '{s}' cannot use exponent ∞"))
                }
            }
        }
        Ok(m)
    }
}

/// Multiset sum of a sequence of groups.
pub fn sum_all<'a>(groups: impl IntoIterator<Item = &'a Multiset>) -> Multiset {
    let mut out = Multiset::new();
    for g in groups {
        out.sum_assign(g);
    }
    out
}
