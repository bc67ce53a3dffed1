//! The domain of 2-sharing groups (exponents in {0, 1, ∞}), represented by
//! antichains of maximal groups, with reference and maximal-element matching.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{parse_err, Error, Result};
use crate::multiset::{sum_all, Multiset};
use crate::omega::{check_same_interest, rename_interest, ShLinOmega};
use crate::syntax::{self, Exponent};
use crate::var::{SetDisplay, Var, VarSet};

/// Default bound on `|U₁ ∪ U₂|` for [`match2_ref`].
pub const REF_VAR_CAP: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Exp {
    One,
    Inf,
}

impl Exp {
    fn plus(self, other: Option<Exp>) -> Exp {
        match other {
            None => self,
            Some(_) => Exp::Inf,
        }
    }
}

/// A 2-sharing group. Absent variables have exponent 0.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct TwoGroup {
    exps: BTreeMap<Var, Exp>,
}

impl TwoGroup {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_exps(pairs: impl IntoIterator<Item = (Var, Exp)>) -> Self {
        TwoGroup {
            exps: pairs.into_iter().collect(),
        }
    }

    /// `α₂(B)`: counts above 1 become ∞.
    pub fn alpha(b: &Multiset) -> Self {
        TwoGroup {
            exps: b
                .iter()
                .map(|(v, n)| (v.clone(), if n <= 1 { Exp::One } else { Exp::Inf }))
                .collect(),
        }
    }

    /// The linear group over `vars`.
    pub fn linear(vars: &VarSet) -> Self {
        TwoGroup {
            exps: vars.iter().map(|v| (v.clone(), Exp::One)).collect(),
        }
    }

    pub fn get(&self, v: &Var) -> Option<Exp> {
        self.exps.get(v).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, Exp)> + Clone {
        self.exps.iter().map(|(v, e)| (v, *e))
    }

    pub fn support(&self) -> VarSet {
        self.exps.keys().cloned().collect()
    }

    pub fn support_iter(&self) -> impl Iterator<Item = &Var> {
        self.exps.keys()
    }

    /// `supp(o)` viewed as a 2-sharing group.
    pub fn linearize(&self) -> Self {
        TwoGroup {
            exps: self.exps.keys().map(|v| (v.clone(), Exp::One)).collect(),
        }
    }

    /// Same support and pointwise `≤`.
    pub fn leq(&self, other: &TwoGroup) -> bool {
        self.exps.len() == other.exps.len()
            && self
                .exps
                .iter()
                .all(|(v, e)| other.exps.get(v).is_some_and(|f| e <= f))
    }

    /// Pointwise `⊕` with `1 ⊕ 1 = ∞`.
    pub fn oplus(&self, other: &TwoGroup) -> TwoGroup {
        let mut out = self.clone();
        out.oplus_assign(other);
        out
    }

    pub fn oplus_assign(&mut self, other: &TwoGroup) {
        for (v, e) in &other.exps {
            let prev = self.exps.get(v).copied();
            self.exps.insert(v.clone(), e.plus(prev));
        }
    }

    /// `o² = o ⊕ o`.
    pub fn square(&self) -> TwoGroup {
        TwoGroup {
            exps: self.exps.keys().map(|v| (v.clone(), Exp::Inf)).collect(),
        }
    }

    pub fn restrict(&self, vars: &VarSet) -> TwoGroup {
        TwoGroup {
            exps: self
                .exps
                .iter()
                .filter(|(v, _)| vars.contains(*v))
                .map(|(v, e)| (v.clone(), *e))
                .collect(),
        }
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> TwoGroup {
        let mut out = TwoGroup::new();
        for (v, e) in &self.exps {
            let w = map.get(v).cloned().unwrap_or_else(|| v.clone());
            let prev = out.exps.get(&w).copied();
            out.exps.insert(w, e.plus(prev));
        }
        out
    }

    /// Every group below `self` (same support, exponents lowered).
    pub fn below(&self) -> Vec<TwoGroup> {
        let mut out = vec![TwoGroup::new()];
        for (v, e) in &self.exps {
            let choices: &[Exp] = match e {
                Exp::One => &[Exp::One],
                Exp::Inf => &[Exp::One, Exp::Inf],
            };
            out = out
                .into_iter()
                .flat_map(|g| {
                    choices.iter().map(move |c| {
                        let mut g = g.clone();
                        g.exps.insert(v.clone(), *c);
                        g
                    })
                })
                .collect();
        }
        out
    }

    /// Multisets with this abstraction and counts at most 2.
    pub fn concretizations_cap2(&self) -> Vec<Multiset> {
        let mut out = vec![Multiset::new()];
        for (v, e) in &self.exps {
            let counts: &[u32] = match e {
                Exp::One => &[1],
                Exp::Inf => &[2],
            };
            let mut next = Vec::new();
            for m in &out {
                for &n in counts {
                    let mut m = m.clone();
                    m.add(v.clone(), n);
                    next.push(m);
                }
            }
            out = next;
        }
        out
    }

    /// The representative with every ∞ replaced by 2.
    pub fn representative(&self) -> Multiset {
        Multiset::from_counts(self.exps.iter().map(|(v, e)| {
            (
                v.clone(),
                match e {
                    Exp::One => 1,
                    Exp::Inf => 2,
                },
            )
        }))
    }
}

/// Ordered by support (lexicographic), then by exponents.
impl Ord for TwoGroup {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.exps
            .keys()
            .cmp(other.exps.keys())
            .then_with(|| self.exps.values().cmp(other.exps.values()))
    }
}

impl PartialOrd for TwoGroup {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for TwoGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        syntax::write_group(
            f,
            self.iter().map(|(v, e)| {
                (
                    v,
                    match e {
                        Exp::One => Exponent::Finite(1),
                        Exp::Inf => Exponent::Inf,
                    },
                )
            }),
        )
    }
}

impl fmt::Debug for TwoGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for TwoGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut g = TwoGroup::new();
        for (v, e) in syntax::parse_group(s)? {
            let e = match e {
                Exponent::Finite(0) => continue,
                Exponent::Finite(1) => Exp::One,
                Exponent::Inf => Exp::Inf,
                Exponent::Finite(n) => {
                    return parse_err(format!("exponent {n} in 2-sharing group '{s}'; use ^* for ∞"))
                }
            };
            let prev = g.get(&v);
            g.exps.insert(v, e.plus(prev));
        }
        Ok(g)
    }
}

/// Reduces groups to their maximal elements.
pub fn maximals(groups: impl IntoIterator<Item = TwoGroup>) -> BTreeSet<TwoGroup> {
    let mut by_support: BTreeMap<VarSet, Vec<TwoGroup>> = BTreeMap::new();
    for g in groups {
        by_support.entry(g.support()).or_default().push(g);
    }
    let mut out = BTreeSet::new();
    for (_, mut bucket) in by_support {
        bucket.sort();
        bucket.dedup();
        for (i, g) in bucket.iter().enumerate() {
            let dominated = bucket
                .iter()
                .enumerate()
                .any(|(j, h)| i != j && g.leq(h));
            if !dominated {
                out.insert(g.clone());
            }
        }
    }
    out
}

/// `[↓T]_U` stored as its antichain of maximal groups. Invariant: groups are
/// over `U`, pairwise incomparable, and `∅` is present when nonempty.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ShLin2 {
    maximals: BTreeSet<TwoGroup>,
    interest: VarSet,
}

impl ShLin2 {
    pub fn new(groups: impl IntoIterator<Item = TwoGroup>, interest: VarSet) -> Result<Self> {
        let groups: Vec<TwoGroup> = groups.into_iter().collect();
        if let Some(bad) = groups
            .iter()
            .find(|g| !g.support_iter().all(|v| interest.contains(v)))
        {
            return parse_err(format!("group {bad} is not over {}", SetDisplay(&interest)));
        }
        Ok(Self::from_groups(groups, interest))
    }

    /// Builds `[↓groups]_U` from groups already known to be over `U`.
    pub fn from_groups(groups: impl IntoIterator<Item = TwoGroup>, interest: VarSet) -> Self {
        let mut maximals = maximals(groups);
        if !maximals.is_empty() {
            maximals.insert(TwoGroup::new());
        }
        ShLin2 { maximals, interest }
    }

    pub fn bottom(interest: VarSet) -> Self {
        ShLin2 {
            maximals: BTreeSet::new(),
            interest,
        }
    }

    pub fn maximals(&self) -> &BTreeSet<TwoGroup> {
        &self.maximals
    }

    pub fn interest(&self) -> &VarSet {
        &self.interest
    }

    pub fn is_bottom(&self) -> bool {
        self.maximals.is_empty()
    }

    /// Membership in the downward closure.
    pub fn contains(&self, o: &TwoGroup) -> bool {
        self.maximals.iter().any(|m| o.leq(m))
    }

    pub fn leq(&self, other: &ShLin2) -> bool {
        self.interest == other.interest && self.maximals.iter().all(|o| other.contains(o))
    }

    /// Every group of the downward closure.
    pub fn downset(&self) -> BTreeSet<TwoGroup> {
        self.maximals.iter().flat_map(TwoGroup::below).collect()
    }

    /// `α₂([S]_U) = [↓α₂(S)]_U`.
    pub fn alpha(e: &ShLinOmega) -> Self {
        Self::from_groups(e.groups().iter().map(TwoGroup::alpha), e.interest().clone())
    }

    /// `B ∈ γ₂([T]_U)`.
    pub fn gamma_contains(&self, b: &Multiset) -> bool {
        b.support_iter().all(|v| self.interest.contains(v)) && self.contains(&TwoGroup::alpha(b))
    }

    /// The part of `γ₂` with multiplicities at most 2, as an ω element.
    pub fn gamma_cap2(&self) -> ShLinOmega {
        let groups = self
            .downset()
            .iter()
            .flat_map(TwoGroup::concretizations_cap2)
            .collect();
        ShLinOmega::normalized(groups, self.interest.clone())
    }

    pub fn project(&self, vars: &VarSet) -> Self {
        let interest: VarSet = self.interest.intersection(vars).cloned().collect();
        let groups: Vec<TwoGroup> = self.maximals.iter().map(|g| g.restrict(&interest)).collect();
        Self::from_groups(groups, interest)
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Result<Self> {
        let interest = rename_interest(&self.interest, map)?;
        let groups: Vec<TwoGroup> = self.maximals.iter().map(|g| g.rename(map)).collect();
        Ok(Self::from_groups(groups, interest))
    }

    pub fn union(&self, other: &ShLin2) -> Result<Self> {
        check_same_interest(&self.interest, &other.interest)?;
        let groups: Vec<TwoGroup> = self.maximals.union(&other.maximals).cloned().collect();
        Ok(Self::from_groups(groups, self.interest.clone()))
    }

    /// Adds variables to `U`, each as a fresh linear singleton group.
    pub fn extend_fresh(&self, vars: &VarSet) -> Self {
        let mut interest = self.interest.clone();
        interest.extend(vars.iter().cloned());
        if self.is_bottom() {
            return Self::bottom(interest);
        }
        let mut groups: Vec<TwoGroup> = self.maximals.iter().cloned().collect();
        for v in vars.difference(&self.interest) {
            groups.push(TwoGroup::linear(&VarSet::from([v.clone()])));
        }
        Self::from_groups(groups, interest)
    }
}

/// Evaluates the four clauses of the basic properties of `α₂` on one
/// instance.
pub fn prop_abstraction2_check(b: &Multiset, v: &VarSet, xs: &[Multiset]) -> bool {
    let ab = TwoGroup::alpha(b);
    let support = b.support() == ab.support();
    let restriction = TwoGroup::alpha(&b.restrict(v)) == ab.restrict(v);
    let sum = TwoGroup::alpha(&sum_all(xs))
        == xs
            .iter()
            .map(TwoGroup::alpha)
            .fold(TwoGroup::new(), |acc, g| acc.oplus(&g));
    let double = TwoGroup::alpha(&b.sum(b)) == ab.square();
    support && restriction && sum && double
}

/// Reference `match₂` by enumeration of every 2-sharing group over
/// `U₁ ∪ U₂`. Fails with `TooLarge` above `cap` variables.
pub fn match2_ref(e1: &ShLin2, e2: &ShLin2, cap: usize) -> Result<ShLin2> {
    let u1 = &e1.interest;
    let u2 = &e2.interest;
    let all: VarSet = u1.union(u2).cloned().collect();
    if all.len() > cap {
        return Err(Error::TooLarge {
            vars: all.len(),
            cap,
        });
    }
    if e1.is_bottom() || e2.is_bottom() {
        return Ok(ShLin2::bottom(all));
    }
    let down2 = e2.downset();
    let (passed, pool): (Vec<TwoGroup>, Vec<TwoGroup>) =
        down2.into_iter().partition(|g| g.restrict(u1).is_empty());

    // (T″₂)* = {⊕X | X ⊆ T″₂ ∪ (T″₂)²}, by subset-sum closure.
    let mut generators: BTreeSet<TwoGroup> = pool.iter().cloned().collect();
    generators.extend(pool.iter().map(TwoGroup::square));
    let mut star: BTreeSet<TwoGroup> = BTreeSet::from([TwoGroup::new()]);
    for g in &generators {
        let extended: Vec<TwoGroup> = star.iter().map(|s| s.oplus(g)).collect();
        star.extend(extended);
    }

    let mut groups = passed;
    let vars: Vec<&Var> = all.iter().collect();
    let mut candidate = vec![0u8; vars.len()];
    loop {
        let o = TwoGroup::from_exps(vars.iter().zip(&candidate).filter_map(|(v, c)| match c {
            1 => Some(((*v).clone(), Exp::One)),
            2 => Some(((*v).clone(), Exp::Inf)),
            _ => None,
        }));
        if e1.contains(&o.restrict(u1)) && star.contains(&o.restrict(u2)) {
            groups.push(o);
        }
        // Odometer over {0, 1, ∞}^|U|.
        let mut i = 0;
        while i < candidate.len() && candidate[i] == 2 {
            candidate[i] = 0;
            i += 1;
        }
        if i == candidate.len() {
            break;
        }
        candidate[i] += 1;
    }
    Ok(ShLin2::from_groups(groups, all))
}

/// How a maximal group of `match′₂` arises.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin2 {
    /// A group of `T′₂`.
    Passed,
    /// `(o ∧ ⊕X) ⊕ ⊕(X ∩ T̄)` for `o ∈ T₁`.
    Matched { base: TwoGroup, chosen: Vec<TwoGroup> },
}

/// `o ∧ o′`: `o` on `U₁∖U₂`, the minimum on `U₁∩U₂`, `o′` elsewhere.
fn wedge(o: &TwoGroup, other: &TwoGroup, u1: &VarSet, u2: &VarSet) -> TwoGroup {
    let mut out = TwoGroup::new();
    for (v, e) in o.iter() {
        if !u2.contains(v) {
            out.exps.insert(v.clone(), e);
        } else if let Some(f) = other.get(v) {
            out.exps.insert(v.clone(), e.min(f));
        }
    }
    for (v, f) in other.iter() {
        if !u1.contains(v) {
            out.exps.insert(v.clone(), f);
        }
    }
    out
}

/// Every group produced by `match′₂`, with the first derivation found.
pub fn match2_opt_traced(
    t1: &BTreeSet<TwoGroup>,
    u1: &VarSet,
    t2: &BTreeSet<TwoGroup>,
    u2: &VarSet,
) -> BTreeMap<TwoGroup, Origin2> {
    let mut out = BTreeMap::new();
    let mut pool = Vec::new();
    for g in t2 {
        if g.restrict(u1).is_empty() {
            out.insert(g.clone(), Origin2::Passed);
        } else {
            pool.push(g.clone());
        }
    }
    for o in t1 {
        let target = o.restrict(u2);
        let bar: Vec<bool> = pool
            .iter()
            .map(|g| {
                g.support_iter()
                    .filter(|v| u1.contains(*v))
                    .all(|v| o.get(v) == Some(Exp::Inf))
            })
            .collect();
        // Only groups whose linearized U₁-part fits under o can be chosen.
        let usable: Vec<usize> = (0..pool.len())
            .filter(|&i| pool[i].restrict(u1).linearize().iter().all(|(v, _)| target.get(v).is_some()))
            .collect();
        let mut chosen = Vec::new();
        choose_subsets(&pool, &usable, 0, &TwoGroup::new(), &target, u1, &mut chosen, &mut |xs| {
            let joined = xs
                .iter()
                .fold(TwoGroup::new(), |acc, &i| acc.oplus(&pool[i]));
            let mut g = wedge(o, &joined, u1, u2);
            for &i in xs {
                if bar[i] {
                    g.oplus_assign(&pool[i]);
                }
            }
            out.entry(g).or_insert_with(|| Origin2::Matched {
                base: o.clone(),
                chosen: xs.iter().map(|&i| pool[i].clone()).collect(),
            });
        });
    }
    out
}

/// Enumerates index subsets `X` of `usable` with `(⊕supp X)_{|U₁} ≤ target`,
/// pruning as soon as the partial sum exceeds `target` pointwise.
#[allow(clippy::too_many_arguments)]
fn choose_subsets(
    pool: &[TwoGroup],
    usable: &[usize],
    from: usize,
    partial: &TwoGroup,
    target: &TwoGroup,
    u1: &VarSet,
    chosen: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if partial.leq(target) {
        visit(chosen);
    }
    for k in from..usable.len() {
        let i = usable[k];
        let next = partial.oplus(&pool[i].restrict(u1).linearize());
        if next.iter().any(|(v, e)| target.get(v).is_none_or(|t| e > t)) {
            continue;
        }
        chosen.push(i);
        choose_subsets(pool, usable, k + 1, &next, target, u1, chosen, visit);
        chosen.pop();
    }
}

/// `match′₂(T₁, U₁, T₂, U₂)` reduced to its maximal groups.
pub fn match2_opt(
    t1: &BTreeSet<TwoGroup>,
    u1: &VarSet,
    t2: &BTreeSet<TwoGroup>,
    u2: &VarSet,
) -> BTreeSet<TwoGroup> {
    maximals(match2_opt_traced(t1, u1, t2, u2).into_keys())
}

/// `match₂` on elements, computed through the maximal-element algorithm.
pub fn match2(e1: &ShLin2, e2: &ShLin2) -> ShLin2 {
    let interest: VarSet = e1.interest.union(&e2.interest).cloned().collect();
    if e1.is_bottom() || e2.is_bottom() {
        return ShLin2::bottom(interest);
    }
    let groups = match2_opt(&e1.maximals, &e1.interest, &e2.maximals, &e2.interest);
    ShLin2::from_groups(groups, interest)
}

impl fmt::Display for ShLin2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("↓[")?;
        if self.maximals.len() == 1 {
            f.write_str("0")?;
        }
        let mut first = true;
        for g in self.maximals.iter().filter(|g| !g.is_empty()) {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{g}")?;
        }
        write!(f, "]_{}", SetDisplay(&self.interest))
    }
}

impl fmt::Debug for ShLin2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ShLin2 {
    type Err = Error;

    /// `↓[x^*y, xz^*]_{x,y,z}`; the leading `↓` is optional.
    fn from_str(s: &str) -> Result<Self> {
        let (body, interest) = syntax::parse_indexed(s)?;
        let mut groups = Vec::new();
        if !body.trim().is_empty() {
            for part in syntax::split_top_level(body, ',') {
                groups.push(part.parse::<TwoGroup>()?);
            }
        }
        ShLin2::new(groups, interest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::var::var_set;

    fn g(s: &str) -> TwoGroup {
        s.parse().unwrap()
    }

    fn el(s: &str) -> ShLin2 {
        s.parse().unwrap()
    }

    fn ms(s: &str) -> Multiset {
        s.parse().unwrap()
    }

    fn set(items: &[&str]) -> BTreeSet<TwoGroup> {
        items.iter().map(|s| g(s)).collect()
    }

    #[test]
    fn group_operations() {
        assert_eq!(TwoGroup::alpha(&ms("xy^2z")), g("xy^*z"));
        assert_eq!(TwoGroup::alpha(&ms("xz")), g("xz"));
        assert_eq!(TwoGroup::alpha(&Multiset::new()), TwoGroup::new());
        assert_eq!(g("ux").oplus(&g("ux")), g("u^*x^*"));
        assert_eq!(g("vx^*").oplus(&TwoGroup::new()), g("vx^*"));
        assert_eq!(g("x").oplus(&g("vx^*")), g("vx^*"));
        assert_eq!(g("ux").square(), g("u^*x^*"));
        assert_eq!(TwoGroup::new().square(), TwoGroup::new());
        assert_eq!(g("vx^*").square(), g("v^*x^*"));
        assert!(g("xy").leq(&g("x^*y")));
        assert!(!g("x").leq(&g("xy")));
        assert!("x^2".parse::<TwoGroup>().is_err());
    }

    #[test]
    fn abstraction_examples() {
        let e: ShLinOmega = "[x^2y, xz^2, w]_{w,x,y,z}".parse().unwrap();
        assert_eq!(ShLin2::alpha(&e), el("↓[x^*y, xz^*, w]_{w,x,y,z}"));
        let e: ShLinOmega = "[x^2, xz]_{x,y,z}".parse().unwrap();
        assert_eq!(ShLin2::alpha(&e), el("↓[x^*, xz]_{x,y,z}"));
        assert!(el("[xy^*z]_{x,y,z}").gamma_contains(&ms("xy^3z")));
        assert!(!el("[xy^*z]_{x,y,z}").gamma_contains(&ms("x^2yz")));
    }

    #[test]
    fn abstraction_law_instances() {
        assert!(prop_abstraction2_check(&ms("x^2y"), &var_set("x"), &[]));
        assert!(prop_abstraction2_check(&ms("xz"), &var_set("z"), &[ms("ux"), ms("ux")]));
    }

    #[test]
    fn reference_matching_example() {
        let e1 = el("[x^*, xz]_{x,y,z}");
        let e2 = el("[uv, ux, vx^*, x]_{u,v,x}");
        let expected = el("[uv, u^*v^*x^*, uxz, u^*x^*, v^*x^*, vxz, x^*, xz]_{u,v,x,y,z}");
        let got = match2_ref(&e1, &e2, REF_VAR_CAP).unwrap();
        assert_eq!(got, expected);
        let from_omega = el("[uv, u^*x^*, uxz, vx^*, x^*, xz]_{u,v,x,y,z}");
        assert!(from_omega.leq(&got));
    }

    #[test]
    fn maximal_element_matching_example() {
        let got = match2_opt(
            &set(&["x^*", "xz"]),
            &var_set("xyz"),
            &set(&["uv", "ux", "vx^*", "x"]),
            &var_set("uvx"),
        );
        let expected = set(&["uv", "u^*x^*", "v^*x^*", "x^*", "u^*v^*x^*", "uxz", "vxz", "xz"]);
        assert_eq!(got, expected);
    }

    #[test]
    fn per_choice_values() {
        let u1 = var_set("xyz");
        let u2 = var_set("uvx");
        let traced = match2_opt_traced(&set(&["xz"]), &u1, &set(&["vx^*"]), &u2);
        assert!(traced.contains_key(&g("vxz")));
        // {ux, x} is not a valid choice for xz: x ⊕ x = x^* on U₁.
        let traced = match2_opt_traced(&set(&["xz"]), &u1, &set(&["ux", "x"]), &u2);
        assert!(!traced.contains_key(&g("u^*xz")));
        assert!(!traced.keys().any(|k| k.get(&Var::new("x")) == Some(Exp::Inf)));
    }

    #[test]
    fn reference_cap() {
        let big: VarSet = (0..11).map(|i| Var::new(&format!("x{i}"))).collect();
        let e = ShLin2::bottom(big);
        assert!(matches!(match2_ref(&e, &e, REF_VAR_CAP), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn plumbing() {
        let e = el("[u^*x^*y^*]_{u,v,x,y,z}");
        assert_eq!(e.project(&var_set("uv")), el("[u^*]_{u,v}"));
        assert_eq!(e.rename(&BTreeMap::new()).unwrap(), e);
        assert_eq!(el("[x]_{x}").union(&el("[x^*]_{x}")).unwrap(), el("[x^*]_{x}"));
        assert_eq!(el("[x, x^*]_{x}").maximals().len(), 2);
    }

    #[test]
    fn galois_insertion_on_cap2() {
        let e = el("[x^*y, xz^*, w]_{w,x,y,z}");
        assert_eq!(ShLin2::alpha(&e.gamma_cap2()), e);
    }
}
