//! The domain of ω-sharing groups with exact multiplicities, and its
//! optimal matching operator.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{parse_err, Error, Result};
use crate::existential::ExistentialSubstitution;
use crate::multiset::{sum_all, Multiset};
use crate::syntax;
use crate::var::{SetDisplay, Var, VarSet};

/// `[S]_U`. Invariant: every group is over `U`, and `∅ ∈ S` whenever `S`
/// is nonempty. The empty set of groups is bottom.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ShLinOmega {
    groups: BTreeSet<Multiset>,
    interest: VarSet,
}

impl ShLinOmega {
    pub fn new(groups: impl IntoIterator<Item = Multiset>, interest: VarSet) -> Result<Self> {
        let groups: BTreeSet<Multiset> = groups.into_iter().collect();
        if let Some(bad) = groups
            .iter()
            .find(|g| !g.support_iter().all(|v| interest.contains(v)))
        {
            return parse_err(format!(
                "group {bad} is not over {}",
                SetDisplay(&interest)
            ));
        }
        Ok(Self::normalized(groups, interest))
    }

    pub(crate) fn normalized(mut groups: BTreeSet<Multiset>, interest: VarSet) -> Self {
        if !groups.is_empty() {
            groups.insert(Multiset::new());
        }
        ShLinOmega { groups, interest }
    }

    pub fn bottom(interest: VarSet) -> Self {
        ShLinOmega {
            groups: BTreeSet::new(),
            interest,
        }
    }

    /// `[{∅} ∪ {v | v ∈ U}]_U`, the abstraction of `[ε]_U`.
    pub fn top_linear(interest: VarSet) -> Self {
        let groups = interest.iter().cloned().map(Multiset::singleton).collect();
        Self::normalized(groups, interest)
    }

    pub fn groups(&self) -> &BTreeSet<Multiset> {
        &self.groups
    }

    pub fn interest(&self) -> &VarSet {
        &self.interest
    }

    pub fn is_bottom(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn contains(&self, group: &Multiset) -> bool {
        self.groups.contains(group)
    }

    /// `α_ω([θ]_U) = [{θ⁻¹(v)_{|U} | v ∈ V}]_U`.
    pub fn alpha(c: &ExistentialSubstitution) -> Self {
        let rep = c.rep();
        let mut vars = rep.vars();
        vars.extend(c.interest().iter().cloned());
        let groups = vars
            .iter()
            .map(|v| rep.preimage_var(v).restrict(c.interest()))
            .chain(std::iter::once(Multiset::new()))
            .collect();
        Self::normalized(groups, c.interest().clone())
    }

    pub fn leq(&self, other: &ShLinOmega) -> bool {
        self.interest == other.interest && self.groups.is_subset(&other.groups)
    }

    /// `[S]_U` correctly approximates `[θ]_U`.
    pub fn approximates(&self, c: &ExistentialSubstitution) -> bool {
        Self::alpha(c).leq(self)
    }

    pub fn project(&self, vars: &VarSet) -> Self {
        let interest: VarSet = self.interest.intersection(vars).cloned().collect();
        let groups = self.groups.iter().map(|g| g.restrict(&interest)).collect();
        Self::normalized(groups, interest)
    }

    /// Renames through a map injective on `U`; unmapped variables are kept.
    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Result<Self> {
        let interest = rename_interest(&self.interest, map)?;
        let groups = self.groups.iter().map(|g| g.rename(map)).collect();
        Ok(Self::normalized(groups, interest))
    }

    pub fn union(&self, other: &ShLinOmega) -> Result<Self> {
        check_same_interest(&self.interest, &other.interest)?;
        let groups = self.groups.union(&other.groups).cloned().collect();
        Ok(Self::normalized(groups, self.interest.clone()))
    }

    /// Adds variables to `U`, each as a fresh singleton group.
    pub fn extend_fresh(&self, vars: &VarSet) -> Self {
        if self.is_bottom() {
            let mut interest = self.interest.clone();
            interest.extend(vars.iter().cloned());
            return Self::bottom(interest);
        }
        let mut groups = self.groups.clone();
        let mut interest = self.interest.clone();
        for v in vars.difference(&self.interest) {
            groups.insert(Multiset::singleton(v.clone()));
            interest.insert(v.clone());
        }
        Self::normalized(groups, interest)
    }

    /// Clamps every multiplicity to `cap`.
    pub fn saturate(&self, cap: u32) -> Self {
        let groups = self.groups.iter().map(|g| g.saturate(cap)).collect();
        Self::normalized(groups, self.interest.clone())
    }
}

pub(crate) fn rename_interest(interest: &VarSet, map: &BTreeMap<Var, Var>) -> Result<VarSet> {
    let renamed: VarSet = interest
        .iter()
        .map(|v| map.get(v).cloned().unwrap_or_else(|| v.clone()))
        .collect();
    if renamed.len() != interest.len() {
        return Err(Error::Renaming(format!(
            "map is not injective on {}",
            SetDisplay(interest)
        )));
    }
    Ok(renamed)
}

pub(crate) fn check_same_interest(left: &VarSet, right: &VarSet) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::InterestMismatch {
            left: SetDisplay(left).to_string(),
            right: SetDisplay(right).to_string(),
        })
    }
}

/// Calls `visit` with the multiplicity vector of every multiset `𝒮` over
/// `pool` such that `(⊎𝒮)_{|U₁} = target`. Every pool entry is given by its
/// restriction to `U₁`, which must be nonempty; this bounds the search.
pub fn for_each_decomposition(
    target: &Multiset,
    pool_on_u1: &[Multiset],
    visit: &mut dyn FnMut(&[u32]),
) {
    debug_assert!(pool_on_u1.iter().all(|h| !h.is_empty()));
    let mut counts = vec![0u32; pool_on_u1.len()];
    decompose_from(0, target.clone(), pool_on_u1, &mut counts, visit);
}

fn decompose_from(
    index: usize,
    remaining: Multiset,
    pool: &[Multiset],
    counts: &mut [u32],
    visit: &mut dyn FnMut(&[u32]),
) {
    if remaining.is_empty() {
        visit(counts);
        return;
    }
    if index == pool.len() {
        return;
    }
    let mut rest = remaining;
    let mut k = 0;
    loop {
        counts[index] = k;
        decompose_from(index + 1, rest.clone(), pool, counts, visit);
        match rest.checked_sub(&pool[index]) {
            Some(next) => {
                rest = next;
                k += 1;
            }
            None => break,
        }
    }
    counts[index] = 0;
}

/// Decides `x ∈ s*` and returns a witnessing multiset of summands. Every
/// group of `s` must have a nonempty restriction to `u1`.
pub fn star_decompose(x: &Multiset, s: &[Multiset], u1: &VarSet) -> Option<Vec<Multiset>> {
    let pool: Vec<Multiset> = s.iter().map(|h| h.restrict(u1)).collect();
    let mut found = None;
    for_each_decomposition(&x.restrict(u1), &pool, &mut |counts| {
        if found.is_some() {
            return;
        }
        let parts = expand(s, counts);
        if sum_all(&parts) == *x {
            found = Some(parts);
        }
    });
    found
}

fn expand(pool: &[Multiset], counts: &[u32]) -> Vec<Multiset> {
    pool.iter()
        .zip(counts)
        .flat_map(|(h, &n)| std::iter::repeat_n(h, n as usize).cloned())
        .collect()
}

/// How a group of a matching result arises.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    /// Copied from the second argument (empty restriction to `U₁`).
    Passed,
    /// `B_{|U₁∖U₂} ⊎ ⊎parts` for `B ∈ S₁`.
    Matched { base: Multiset, parts: Vec<Multiset> },
}

/// Every group of `match_ω(e1, e2)` with the first derivation found.
pub fn match_omega_traced(e1: &ShLinOmega, e2: &ShLinOmega) -> BTreeMap<Multiset, Origin> {
    let u1 = &e1.interest;
    let u2 = &e2.interest;
    let only_u1: VarSet = u1.difference(u2).cloned().collect();
    let mut out = BTreeMap::new();
    let mut pool = Vec::new();
    for g in &e2.groups {
        if g.restrict(u1).is_empty() {
            out.insert(g.clone(), Origin::Passed);
        } else {
            pool.push(g.clone());
        }
    }
    let pool_on_u1: Vec<Multiset> = pool.iter().map(|h| h.restrict(u1)).collect();
    for b in &e1.groups {
        let extra = b.restrict(&only_u1);
        for_each_decomposition(&b.restrict(u2), &pool_on_u1, &mut |counts| {
            let parts = expand(&pool, counts);
            let x = extra.sum(&sum_all(&parts));
            out.entry(x).or_insert_with(|| Origin::Matched {
                base: b.clone(),
                parts,
            });
        });
    }
    out
}

/// The optimal abstract matching `match_ω`.
pub fn match_omega(e1: &ShLinOmega, e2: &ShLinOmega) -> ShLinOmega {
    let interest = e1.interest.union(&e2.interest).cloned().collect();
    if e1.is_bottom() || e2.is_bottom() {
        return ShLinOmega::bottom(interest);
    }
    ShLinOmega::normalized(match_omega_traced(e1, e2).into_keys().collect(), interest)
}

impl fmt::Display for ShLinOmega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        if self.groups.len() == 1 {
            f.write_str("0")?;
        }
        let mut first = true;
        for g in self.groups.iter().filter(|g| !g.is_empty()) {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{g}")?;
        }
        write!(f, "]_{}", SetDisplay(&self.interest))
    }
}

impl fmt::Debug for ShLinOmega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ShLinOmega {
    type Err = Error;

    /// `[x^2, xz]_{x,y,z}`; `[]_{x}` is bottom and `[0]_{x}` holds only `∅`.
    fn from_str(s: &str) -> Result<Self> {
        let (body, interest) = syntax::parse_indexed(s)?;
        let mut groups = Vec::new();
        if !body.trim().is_empty() {
            for part in syntax::split_top_level(body, ',') {
                groups.push(part.parse::<Multiset>()?);
            }
        }
        ShLinOmega::new(groups, interest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::var::var_set;

    fn el(s: &str) -> ShLinOmega {
        s.parse().unwrap()
    }

    fn ms(s: &str) -> Multiset {
        s.parse().unwrap()
    }

    fn ex(s: &str) -> ExistentialSubstitution {
        s.parse().unwrap()
    }

    #[test]
    fn abstraction_examples() {
        let c = ex("[{x/s(y,u,y), z/s(u,u), v/u}]_{w,x,y,z}");
        assert_eq!(ShLinOmega::alpha(&c), el("[x^2y, xz^2, w]_{w,x,y,z}"));
        let c1 = ex("[{x/r(w1,w2,w2,w3,w3), y/a, z/r(w1)}]_{x,y,z}");
        assert_eq!(ShLinOmega::alpha(&c1), el("[x^2, xz]_{x,y,z}"));
        let free = ExistentialSubstitution::identity(&var_set("x"));
        assert_eq!(ShLinOmega::alpha(&free), el("[x]_{x}"));
    }

    #[test]
    fn order_and_approximation() {
        assert!(el("[x]_{x}").leq(&el("[x, x^2]_{x}")));
        assert!(!el("[x]_{x}").leq(&el("[x]_{x,y}")));
        assert!(el("[x]_{x}").approximates(&ex("[{x/a}]_{x}")));
        assert!(!el("[w]_{w,x}").approximates(&ExistentialSubstitution::identity(&var_set("wx"))));
    }

    #[test]
    fn decomposition_examples() {
        let s = [ms("ux"), ms("vx^2"), ms("x")];
        let u1 = var_set("xyz");
        assert_eq!(star_decompose(&ms("u^2x^2"), &s, &u1), Some(vec![ms("ux"), ms("ux")]));
        assert_eq!(star_decompose(&Multiset::new(), &s, &u1), Some(vec![]));
        let mut found = star_decompose(&ms("ux^3"), &s, &u1).unwrap();
        found.sort();
        assert_eq!(found, vec![ms("ux"), ms("x"), ms("x")]);
        assert_eq!(star_decompose(&ms("u"), &s, &u1), None);
    }

    #[test]
    fn matching_example() {
        let e1 = el("[x^2, xz]_{x,y,z}");
        let e2 = el("[uv, ux, vx^2, x]_{u,v,x}");
        let m = match_omega(&e1, &e2);
        assert_eq!(m, el("[uv, uxz, xz, u^2x^2, ux^2, vx^2, x^2]_{u,v,x,y,z}"));
        assert!(el("[uv, uxz, vx^2, x^2]_{u,v,x,y,z}").leq(&m));
    }

    #[test]
    fn matching_is_strict_in_bottom() {
        let e2 = el("[uv, ux]_{u,v,x}");
        let bottom = ShLinOmega::bottom(var_set("xy"));
        assert_eq!(match_omega(&bottom, &e2), ShLinOmega::bottom(var_set("uvxy")));
        assert_eq!(match_omega(&e2, &bottom), ShLinOmega::bottom(var_set("uvxy")));
    }

    #[test]
    fn plumbing() {
        assert_eq!(
            el("[uvx, vwz]_{u,v,w,x,z}").project(&var_set("uvw")),
            el("[uv, vw]_{u,v,w}")
        );
        assert_eq!(el("[x^2y]_{x,y}").project(&VarSet::new()).to_string(), "[0]_{}");
        let map = BTreeMap::from([(Var::new("x"), Var::new("u")), (Var::new("z"), Var::new("w"))]);
        assert_eq!(el("[xz]_{x,z}").rename(&map).unwrap(), el("[uw]_{u,w}"));
        assert_eq!(el("[x]_{x}").union(&el("[x^2]_{x}")).unwrap(), el("[x, x^2]_{x}"));
        assert!(matches!(
            el("[x]_{x}").union(&el("[y]_{y}")),
            Err(Error::InterestMismatch { .. })
        ));
        assert!("[y]_{x}".parse::<ShLinOmega>().is_err());
        assert_eq!(el("[]_{x}").to_string(), "[]_{x}");
    }
}
