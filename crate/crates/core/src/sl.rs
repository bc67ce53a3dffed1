//! The reduced product of set-sharing and linearity, with its optimal
//! matching operator.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::error::{parse_err, Error, Result};
use crate::omega::{check_same_interest, rename_interest};
use crate::syntax::{self, Exponent};
use crate::two::{Exp, ShLin2, TwoGroup};
use crate::var::{SetDisplay, Var, VarSet};

/// `[S, L, U]`. Invariant: groups are over `U`, `∅ ∈ S` when `S` is
/// nonempty, and `U ∖ vars(S) ⊆ L ⊆ U`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ShLinSl {
    sharing: BTreeSet<VarSet>,
    linear: VarSet,
    interest: VarSet,
}

impl ShLinSl {
    pub fn new(
        sharing: impl IntoIterator<Item = VarSet>,
        linear: VarSet,
        interest: VarSet,
    ) -> Result<Self> {
        let sharing: BTreeSet<VarSet> = sharing.into_iter().collect();
        if let Some(bad) = sharing.iter().find(|b| !b.is_subset(&interest)) {
            return parse_err(format!(
                "group {} is not over {}",
                GroupDisplay(bad),
                SetDisplay(&interest)
            ));
        }
        if !linear.is_subset(&interest) {
            return parse_err(format!(
                "linear set {} is not within {}",
                SetDisplay(&linear),
                SetDisplay(&interest)
            ));
        }
        Ok(Self::normalized(sharing, linear, interest))
    }

    fn normalized(mut sharing: BTreeSet<VarSet>, linear: VarSet, interest: VarSet) -> Self {
        if !sharing.is_empty() {
            sharing.insert(VarSet::new());
        }
        let shared: VarSet = sharing.iter().flatten().cloned().collect();
        let linear = interest
            .iter()
            .filter(|v| linear.contains(*v) || !shared.contains(*v))
            .cloned()
            .collect();
        ShLinSl {
            sharing,
            linear,
            interest,
        }
    }

    pub fn bottom(interest: VarSet) -> Self {
        Self::normalized(BTreeSet::new(), VarSet::new(), interest)
    }

    pub fn sharing(&self) -> &BTreeSet<VarSet> {
        &self.sharing
    }

    pub fn linear(&self) -> &VarSet {
        &self.linear
    }

    pub fn interest(&self) -> &VarSet {
        &self.interest
    }

    pub fn is_bottom(&self) -> bool {
        self.sharing.is_empty()
    }

    /// `S₁ ⊆ S₂` and `L₁ ⊇ L₂` over the same `U`.
    pub fn leq(&self, other: &ShLinSl) -> bool {
        self.interest == other.interest
            && self.sharing.is_subset(&other.sharing)
            && self.linear.is_superset(&other.linear)
    }

    /// `α_sl([T]_U)`.
    pub fn alpha(e: &ShLin2) -> Self {
        let sharing = e.maximals().iter().map(TwoGroup::support).collect();
        let linear = e
            .interest()
            .iter()
            .filter(|v| e.maximals().iter().all(|o| o.get(v) != Some(Exp::Inf)))
            .cloned()
            .collect();
        Self::normalized(sharing, linear, e.interest().clone())
    }

    /// `B_L`: ∞ on `B ∖ L`, 1 on `B ∩ L`.
    pub fn group_with_linearity(b: &VarSet, linear: &VarSet) -> TwoGroup {
        TwoGroup::from_exps(b.iter().map(|v| {
            (
                v.clone(),
                if linear.contains(v) { Exp::One } else { Exp::Inf },
            )
        }))
    }

    /// The maximal groups of `γ_sl([S, L, U])`, namely `{B_L | B ∈ S}`.
    pub fn gamma_maximals(&self) -> BTreeSet<TwoGroup> {
        self.sharing
            .iter()
            .map(|b| Self::group_with_linearity(b, &self.linear))
            .collect()
    }

    pub fn gamma(&self) -> ShLin2 {
        ShLin2::from_groups(self.gamma_maximals(), self.interest.clone())
    }

    pub fn project(&self, vars: &VarSet) -> Self {
        let interest: VarSet = self.interest.intersection(vars).cloned().collect();
        let sharing = self
            .sharing
            .iter()
            .map(|b| b.intersection(&interest).cloned().collect())
            .collect();
        let linear = self.linear.intersection(&interest).cloned().collect();
        Self::normalized(sharing, linear, interest)
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Result<Self> {
        let interest = rename_interest(&self.interest, map)?;
        let image = |v: &Var| map.get(v).cloned().unwrap_or_else(|| v.clone());
        let sharing = self
            .sharing
            .iter()
            .map(|b| b.iter().map(image).collect())
            .collect();
        let linear = self.linear.iter().map(image).collect();
        Ok(Self::normalized(sharing, linear, interest))
    }

    pub fn union(&self, other: &ShLinSl) -> Result<Self> {
        check_same_interest(&self.interest, &other.interest)?;
        let sharing = self.sharing.union(&other.sharing).cloned().collect();
        let linear = self.linear.intersection(&other.linear).cloned().collect();
        Ok(Self::normalized(sharing, linear, self.interest.clone()))
    }

    /// Adds variables to `U`, each as a fresh linear singleton group.
    pub fn extend_fresh(&self, vars: &VarSet) -> Self {
        let mut interest = self.interest.clone();
        interest.extend(vars.iter().cloned());
        let mut linear = self.linear.clone();
        linear.extend(vars.difference(&self.interest).cloned());
        if self.is_bottom() {
            return Self::normalized(BTreeSet::new(), linear, interest);
        }
        let mut sharing = self.sharing.clone();
        for v in vars.difference(&self.interest) {
            sharing.insert(VarSet::from([v.clone()]));
        }
        Self::normalized(sharing, linear, interest)
    }
}

/// `nl(X)`: variables occurring in at least two distinct groups of `X`.
pub fn nl<'a>(xs: impl IntoIterator<Item = &'a VarSet>) -> VarSet {
    let distinct: BTreeSet<&VarSet> = xs.into_iter().collect();
    let mut seen = VarSet::new();
    let mut repeated = VarSet::new();
    for b in distinct {
        for v in b {
            if !seen.insert(v.clone()) {
                repeated.insert(v.clone());
            }
        }
    }
    repeated
}

/// The optimal abstract matching `match_sl`.
pub fn match_sl(e1: &ShLinSl, e2: &ShLinSl) -> ShLinSl {
    let u1 = &e1.interest;
    let u2 = &e2.interest;
    let l1 = &e1.linear;
    let l2 = &e2.linear;
    let interest: VarSet = u1.union(u2).cloned().collect();
    if e1.is_bottom() || e2.is_bottom() {
        return ShLinSl::bottom(interest);
    }

    // Pairs ⟨B, L⟩ of S′₀ ∪ S″₀.
    let mut pairs: BTreeSet<(VarSet, VarSet)> = BTreeSet::new();
    let mut pool: Vec<&VarSet> = Vec::new();
    for b in &e2.sharing {
        if b.is_disjoint(u1) {
            pairs.insert((b.clone(), l2.clone()));
        } else {
            pool.push(b);
        }
    }
    let bar: Vec<bool> = pool.iter().map(|b| b.is_disjoint(l1)).collect();
    for b in &e1.sharing {
        let target: VarSet = b.intersection(u2).cloned().collect();
        let usable: Vec<usize> = (0..pool.len())
            .filter(|&i| pool[i].intersection(u1).all(|v| target.contains(v)))
            .collect();
        let mut search = SlSearch {
            pool: &pool,
            usable: &usable,
            l1,
            chosen: Vec::new(),
            seen: VarSet::new(),
            repeated: VarSet::new(),
        };
        search.run(0, &mut |chosen, repeated| {
            let covered: VarSet = chosen.iter().flat_map(|&i| pool[i].iter().cloned()).collect();
            let on_u1: VarSet = covered.intersection(u1).cloned().collect();
            if on_u1 != target {
                return;
            }
            let doubled: VarSet = chosen
                .iter()
                .filter(|&&i| bar[i])
                .flat_map(|&i| pool[i].iter().cloned())
                .collect();
            let mut group = b.clone();
            group.extend(covered);
            let linear = l2
                .iter()
                .filter(|v| !repeated.contains(*v) && !doubled.contains(*v))
                .cloned()
                .collect();
            pairs.insert((group, linear));
        });
    }

    let mut linear = interest.clone();
    for (b, l) in &pairs {
        linear.retain(|v| l1.contains(v) || l.contains(v) || !b.contains(v));
    }
    let sharing = pairs.into_iter().map(|(b, _)| b).collect();
    ShLinSl::normalized(sharing, linear, interest)
}

/// Subset enumeration over `S″₂` keeping `nl(X) ∩ L₁ = ∅`.
struct SlSearch<'a> {
    pool: &'a [&'a VarSet],
    usable: &'a [usize],
    l1: &'a VarSet,
    chosen: Vec<usize>,
    seen: VarSet,
    repeated: VarSet,
}

impl SlSearch<'_> {
    fn run(&mut self, from: usize, visit: &mut dyn FnMut(&[usize], &VarSet)) {
        visit(&self.chosen, &self.repeated);
        for k in from..self.usable.len() {
            let i = self.usable[k];
            let group = self.pool[i];
            if group
                .iter()
                .any(|v| self.seen.contains(v) && self.l1.contains(v))
            {
                continue;
            }
            let (saved_seen, saved_repeated) = (self.seen.clone(), self.repeated.clone());
            for v in group {
                if !self.seen.insert(v.clone()) {
                    self.repeated.insert(v.clone());
                }
            }
            self.chosen.push(i);
            self.run(k + 1, visit);
            self.chosen.pop();
            self.seen = saved_seen;
            self.repeated = saved_repeated;
        }
    }
}

struct GroupDisplay<'a>(&'a VarSet);

impl fmt::Display for GroupDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        syntax::write_group(f, self.0.iter().map(|v| (v, Exponent::Finite(1))))
    }
}

impl fmt::Display for ShLinSl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[{")?;
        if self.sharing.len() == 1 {
            f.write_str("0")?;
        }
        let mut first = true;
        for b in self.sharing.iter().filter(|b| !b.is_empty()) {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{}", GroupDisplay(b))?;
        }
        write!(
            f,
            "}}, lin={}]_{}",
            SetDisplay(&self.linear),
            SetDisplay(&self.interest)
        )
    }
}

impl fmt::Debug for ShLinSl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ShLinSl {
    type Err = Error;

    /// `[{uv, ux}, lin={u,v}]_{u,v,x}`.
    fn from_str(s: &str) -> Result<Self> {
        let (body, interest) = syntax::parse_indexed(s)?;
        let parts = syntax::split_top_level(body, ',');
        let [groups, lin] = parts.as_slice() else {
            return parse_err(format!("expected '{{groups}}, lin={{vars}}' in '{body}'"));
        };
        let groups = groups.trim();
        let Some(inner) = groups.strip_prefix('{').and_then(|g| g.strip_suffix('}')) else {
            return parse_err(format!("expected braces around sharing groups in '{groups}'"));
        };
        let Some(lin) = lin.trim().strip_prefix("lin=") else {
            return parse_err(format!("expected 'lin=' in '{lin}'"));
        };
        let mut sharing = Vec::new();
        if !inner.trim().is_empty() {
            for part in inner.split(',') {
                let mut b = VarSet::new();
                for (v, e) in syntax::parse_group(part)? {
                    if e != Exponent::Finite(1) {
                        return parse_err(format!("sharing group '{}' cannot carry exponents", part.trim()));
                    }
                    b.insert(v);
                }
                sharing.push(b);
            }
        }
        ShLinSl::new(sharing, syntax::parse_var_list(lin)?, interest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::existential::ExistentialSubstitution;
    use crate::omega::ShLinOmega;
    use crate::two::match2_opt;
    use crate::var::var_set;

    fn el(s: &str) -> ShLinSl {
        s.parse().unwrap()
    }

    fn chain(c: &str) -> ShLinSl {
        let c: ExistentialSubstitution = c.parse().unwrap();
        ShLinSl::alpha(&ShLin2::alpha(&ShLinOmega::alpha(&c)))
    }

    #[test]
    fn abstraction_examples() {
        assert_eq!(
            chain("[{x/s(y,u,y), z/s(u,u), v/u}]_{w,x,y,z}"),
            el("[{xy, xz, w}, lin={y,w}]_{w,x,y,z}")
        );
        assert_eq!(
            chain("[{x/r(w1,w2,w2,w3,w3), y/a, z/r(w1)}]_{x,y,z}"),
            el("[{x, xz}, lin={y,z}]_{x,y,z}")
        );
        assert_eq!(
            ShLinSl::alpha(&ShLin2::bottom(var_set("xy"))),
            el("[{}, lin={x,y}]_{x,y}")
        );
    }

    #[test]
    fn concretization_examples() {
        let e = el("[{x, xz}, lin={y,z}]_{x,y,z}");
        // z ∈ L but x ∉ L, so xz becomes x^*z.
        let expected: BTreeSet<TwoGroup> = ["0", "x^*", "x^*z"]
            .iter()
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(e.gamma_maximals(), expected);
        assert!(el("[{}, lin={x}]_{x}").gamma_maximals().is_empty());
        let lin = el("[{x, y}, lin={x,y}]_{x,y}");
        assert!(lin.gamma_maximals().contains(&"x".parse().unwrap()));
    }

    #[test]
    fn nl_examples() {
        let g = |s: &str| -> VarSet { var_set(s) };
        assert_eq!(nl(&[g("ux"), g("vx")]), var_set("x"));
        assert_eq!(nl(&[g("uv")]), VarSet::new());
        assert_eq!(nl(&[g("ux"), g("vx"), g("x")]), var_set("x"));
    }

    #[test]
    fn matching_example() {
        let e1 = el("[{x, xz}, lin={y,z}]_{x,y,z}");
        let e2 = el("[{uv, ux, vx, x}, lin={u,v}]_{u,v,x}");
        let m = match_sl(&e1, &e2);
        assert_eq!(
            m,
            el("[{uv, uvx, ux, vx, x, uvxz, uxz, xz, vxz}, lin={y,z}]_{u,v,x,y,z}")
        );
        let via_two = ShLinSl::alpha(&ShLin2::from_groups(
            match2_opt(&e1.gamma_maximals(), e1.interest(), &e2.gamma_maximals(), e2.interest()),
            m.interest().clone(),
        ));
        assert_eq!(via_two, m);
        let smaller = el("[{uv, uvx, uxz, ux, vx, vxz, x, xz}, lin={y,z}]_{u,v,x,y,z}");
        assert!(smaller.leq(&m) && smaller != m);
    }

    #[test]
    fn matching_with_only_empty_group() {
        let e1 = el("[{0}, lin={}]_{x}");
        let e2 = el("[{uv, ux}, lin={u,v,x}]_{u,v,x}");
        let m = match_sl(&e1, &e2);
        assert_eq!(m.sharing(), &BTreeSet::from([VarSet::new(), var_set("uv")]));
    }

    #[test]
    fn plumbing() {
        let e = el("[{uvx, vwz}, lin={u,v,w,x,z}]_{u,v,w,x,z}");
        assert_eq!(e.project(&var_set("xz")), el("[{x, z}, lin={x,z}]_{x,z}"));
        assert_eq!(e.union(&e).unwrap(), e);
        assert_eq!(e.rename(&BTreeMap::new()).unwrap(), e);
        assert!(matches!(
            e.union(&el("[{x}, lin={}]_{x}")),
            Err(Error::InterestMismatch { .. })
        ));
        assert_eq!(el("[{x}, lin={}]_{x,y}").linear(), &var_set("y"));
        assert_eq!(e.to_string(), "[{uvx, vwz}, lin={u,v,w,x,z}]_{u,v,w,x,z}");
    }
}
