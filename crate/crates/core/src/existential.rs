//! Existential substitutions: idempotent substitutions modulo renaming of
//! the variables outside a set of interest `U`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{parse_err, Error, Result};
use crate::syntax;
use crate::terms::{equations_of, match_term, mgu, Substitution, Term, UnifyError};
use crate::var::{SetDisplay, Var, VarSet};

/// The class `[θ]_U`, stored through a canonical representative.
///
/// Invariant: `rep` is the canonical form of its class, so structural
/// equality coincides with equality of classes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExistentialSubstitution {
    rep: Substitution,
    interest: VarSet,
}

fn fresh(k: usize) -> Var {
    Var::new(&format!("_{k}"))
}

/// Images `θ(u)` for `u ∈ U` (sorted) with every variable renamed to
/// `_1, _2, …` in depth-first first-occurrence order.
fn normalized_images(theta: &Substitution, interest: &VarSet) -> Vec<(Var, Term)> {
    let mut order = Vec::new();
    let images: Vec<(Var, Term)> = interest
        .iter()
        .map(|u| {
            let t = theta.image(u);
            t.vars_in_order(&mut order);
            (u.clone(), t)
        })
        .collect();
    let map: BTreeMap<Var, Var> = order
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, fresh(i + 1)))
        .collect();
    images
        .into_iter()
        .map(|(u, t)| (u, t.rename(&map)))
        .collect()
}

impl ExistentialSubstitution {
    /// Canonical representative of `[θ]_U`.
    ///
    /// All variables in the images of `U` are numbered by first occurrence;
    /// a number whose bare variable is the image of some `u ∈ U` is then
    /// written as the least such `u`.
    pub fn canonicalize(theta: &Substitution, interest: &VarSet) -> Self {
        let images = normalized_images(theta, interest);
        let mut named: BTreeMap<Var, Var> = BTreeMap::new();
        for (u, t) in &images {
            if let Term::Var(k) = t {
                named.entry(k.clone()).or_insert_with(|| u.clone());
            }
        }
        let rep = Substitution::from_bindings(
            images
                .into_iter()
                .map(|(u, t)| (u, t.rename(&named))),
        );
        ExistentialSubstitution {
            rep,
            interest: interest.clone(),
        }
    }

    /// `[ε]_U`.
    pub fn identity(interest: &VarSet) -> Self {
        ExistentialSubstitution {
            rep: Substitution::new(),
            interest: interest.clone(),
        }
    }

    pub fn rep(&self) -> &Substitution {
        &self.rep
    }

    pub fn interest(&self) -> &VarSet {
        &self.interest
    }

    /// A representative with domain exactly `U` whose range uses only fresh
    /// variables `_k`.
    pub fn full_rep(&self) -> Substitution {
        Substitution::from_bindings(normalized_images(&self.rep, &self.interest))
    }

    /// `[θ₁]_{U₁} ⪯ [θ₂]_{U₂}`: `U₁ ⊇ U₂` and `θ₁ ⪯_{U₂} θ₂`.
    pub fn leq(&self, other: &ExistentialSubstitution) -> bool {
        self.interest.is_superset(&other.interest) && eleq(&self.rep, &other.rep, &other.interest)
    }

    /// Representatives renamed apart: non-interest variables of `self`
    /// become `_l*`, those of `other` become `_r*`.
    fn renamed_apart(&self, other: &ExistentialSubstitution) -> (Substitution, Substitution) {
        let all: VarSet = self.interest.union(&other.interest).cloned().collect();
        let rename = |c: &ExistentialSubstitution, tag: &str| {
            let mut map = BTreeMap::new();
            let mut k = 0;
            for v in c.rep.range_vars() {
                if c.interest.contains(&v) {
                    continue;
                }
                let name = loop {
                    k += 1;
                    let candidate = Var::new(&format!("_{tag}{k}"));
                    if !all.contains(&candidate) {
                        break candidate;
                    }
                };
                map.insert(v, name);
            }
            c.rep.rename(&map)
        };
        (rename(self, "l"), rename(other, "r"))
    }

    /// `mgu([θ₁]_U, [θ₂]_V) = [mgu(θ₁', θ₂')]_{U ∪ V}` with `θ₁'`, `θ₂'`
    /// renamed apart outside `U ∩ V`.
    pub fn mgu(&self, other: &ExistentialSubstitution) -> Result<Self, UnifyError> {
        let (left, right) = self.renamed_apart(other);
        let mut eqs = equations_of(&left);
        eqs.extend(equations_of(&right));
        let unifier = mgu(&eqs)?;
        let interest: VarSet = self.interest.union(&other.interest).cloned().collect();
        Ok(Self::canonicalize(&unifier, &interest))
    }

    /// `mgu([θ]_U, δ) = mgu([θ]_U, [δ]_{vars(δ)})`.
    pub fn mgu_subst(&self, delta: &Substitution) -> Result<Self, UnifyError> {
        self.mgu(&Self::canonicalize(delta, &delta.vars()))
    }

    /// Concrete matching: defined only when `θ₁ ⪯_{U₁ ∩ U₂} θ₂`.
    pub fn matching(&self, other: &ExistentialSubstitution) -> Option<Self> {
        let common: VarSet = self.interest.intersection(&other.interest).cloned().collect();
        if !eleq(&self.rep, &other.rep, &common) {
            return None;
        }
        Some(
            self.mgu(other)
                .expect("unification cannot fail when the matching side-condition holds"),
        )
    }

    /// `([θ]_U)_{|V} = [θ]_{U ∩ V}`.
    pub fn project(&self, vars: &VarSet) -> Self {
        let interest: VarSet = self.interest.intersection(vars).cloned().collect();
        Self::canonicalize(&self.rep, &interest)
    }
}

/// `θ₁ ⪯_U θ₂`: some `δ` has `θ₁(x) = δ(θ₂(x))` for every `x ∈ U`.
pub fn eleq(theta1: &Substitution, theta2: &Substitution, interest: &VarSet) -> bool {
    let mut delta = BTreeMap::new();
    interest
        .iter()
        .all(|x| match_term(&theta2.image(x), &theta1.image(x), &mut delta))
}

impl fmt::Display for ExistentialSubstitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]_{}", self.rep, SetDisplay(&self.interest))
    }
}

impl fmt::Debug for ExistentialSubstitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ExistentialSubstitution {
    type Err = Error;

    /// `[{x/a, y/b}]_{x,y}`; the inner braces may be omitted.
    fn from_str(s: &str) -> Result<Self> {
        let (body, interest) = syntax::parse_indexed(s)?;
        let theta: Substitution = body.parse()?;
        if !theta.is_idempotent() {
            return parse_err(format!("substitution {theta} is not idempotent"));
        }
        Ok(Self::canonicalize(&theta, &interest))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::var::var_set;
    use proptest::prelude::*;

    fn sub(s: &str) -> Substitution {
        s.parse().unwrap()
    }

    fn ex(s: &str) -> ExistentialSubstitution {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_forms() {
        let c = ExistentialSubstitution::canonicalize(&sub("{x/f(w)}"), &var_set("x"));
        assert_eq!(c.rep(), &sub("{x/f(_1)}"));
        let c = ExistentialSubstitution::canonicalize(&sub("{x/f(w), y/w}"), &var_set("xy"));
        assert_eq!(c.rep(), &sub("{x/f(y)}"));
        assert_eq!(c.full_rep(), sub("{x/f(_1), y/_1}"));
        assert_eq!(
            ExistentialSubstitution::canonicalize(&sub("{x/a, y/b}"), &var_set("xy")),
            ExistentialSubstitution::canonicalize(&sub("{x/a, y/b, w/c}"), &var_set("xy")),
        );
        // Swapping two free interest variables yields the same class.
        assert_eq!(
            ExistentialSubstitution::canonicalize(&sub("{x/y}"), &var_set("xy")),
            ExistentialSubstitution::canonicalize(&sub("{y/x}"), &var_set("xy")),
        );
    }

    #[test]
    fn eleq_examples() {
        let t1 = sub("{x/a, y/b, z/r(b)}");
        let t2 = sub("{z/r(y)}");
        assert!(eleq(&t1, &t2, &var_set("yz")));
        assert!(eleq(&t1, &t1, &var_set("xyz")));
        assert!(!eleq(&t2, &t1, &var_set("yz")));
    }

    #[test]
    fn mgu_and_matching_examples() {
        let c1 = ex("[{x/a, y/b}]_{x,y}");
        let c2 = ex("[{z/r(y)}]_{y,z}");
        let expected = ex("[{x/a, y/b, z/r(b)}]_{x,y,z}");
        assert_eq!(c1.mgu(&c2).unwrap(), expected);
        assert_eq!(c1.matching(&c2), Some(expected.clone()));
        assert_eq!(c2.matching(&c1), None);
        assert_eq!(expected.matching(&expected), Some(expected.clone()));
        assert_eq!(c1.mgu(&ExistentialSubstitution::identity(&VarSet::new())).unwrap(), c1);
        assert!(ex("[{x/a}]_{x}").mgu(&ex("[{x/b}]_{x}")).is_err());
    }

    #[test]
    fn mgu_with_substitution() {
        let c = ExistentialSubstitution::identity(&var_set("xz"));
        let got = c.mgu_subst(&sub("{u/x, v/f(x,z), w/z}")).unwrap();
        assert_eq!(got, ex("[{u/x, v/f(x,z), w/z}]_{u,v,w,x,z}"));
        assert_eq!(c.mgu_subst(&Substitution::new()).unwrap(), c);
        assert!(ex("[{x/a}]_{x}").mgu_subst(&sub("{x/b}")).is_err());
    }

    #[test]
    fn projection() {
        let c = ex("[{x/a, y/b, z/r(b)}]_{x,y,z}");
        assert_eq!(c.project(&var_set("xz")), ex("[{x/a, z/r(b)}]_{x,z}"));
        assert_eq!(c.project(&var_set("xyz")), c);
    }

    #[test]
    fn renaming_apart_avoids_capture() {
        // The existential w of each side must stay distinct.
        let c1 = ex("[{x/f(w)}]_{x}");
        let c2 = ex("[{y/g(w)}]_{y}");
        let m = c1.mgu(&c2).unwrap();
        assert_eq!(m, ex("[{x/f(v), y/g(w)}]_{x,y}"));
    }

    fn arb_term(vars: &'static [&'static str]) -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            (0..vars.len()).prop_map(move |i| Term::var(vars[i])),
            Just(Term::constant("a")),
        ];
        leaf.prop_recursive(2, 6, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Term::app("f", vec![a])),
                (inner.clone(), inner).prop_map(|(a, b)| Term::app("g", vec![a, b])),
            ]
        })
    }

    const INTEREST: [&str; 3] = ["x", "y", "z"];
    const HIDDEN: &[&str] = &["v", "w", "x", "y"];

    fn arb_isubst() -> impl Strategy<Value = Substitution> {
        prop::collection::vec(arb_term(HIDDEN), 3).prop_map(|ts| {
            // Bind every interest variable; hidden-only ranges keep it idempotent
            // except where a range variable is itself an interest variable,
            // which is resolved by leaving that variable unbound.
            let mut s = Substitution::new();
            for (u, t) in INTEREST.iter().zip(ts) {
                s.bind(Var::new(u), t);
            }
            let range = s.range_vars();
            let keep: VarSet = s.domain().into_iter().filter(|v| !range.contains(v)).collect();
            s.restrict(&keep)
        })
    }

    proptest! {
        #[test]
        fn canonical_equality_is_mutual_instance(a in arb_isubst(), b in arb_isubst()) {
            let u = var_set("xyz");
            let same = ExistentialSubstitution::canonicalize(&a, &u)
                == ExistentialSubstitution::canonicalize(&b, &u);
            prop_assert_eq!(same, eleq(&a, &b, &u) && eleq(&b, &a, &u));
        }

        #[test]
        fn canonicalization_is_idempotent(a in arb_isubst()) {
            let u = var_set("xyz");
            let c = ExistentialSubstitution::canonicalize(&a, &u);
            prop_assert!(c.rep().is_idempotent());
            prop_assert_eq!(ExistentialSubstitution::canonicalize(c.rep(), &u), c.clone());
            prop_assert_eq!(ExistentialSubstitution::canonicalize(&c.full_rep(), &u), c);
        }

        #[test]
        fn mgu_is_lower_bound_and_commutative(a in arb_isubst(), b in arb_isubst()) {
            let c1 = ExistentialSubstitution::canonicalize(&a, &var_set("xy"));
            let c2 = ExistentialSubstitution::canonicalize(&b, &var_set("yz"));
            match (c1.mgu(&c2), c2.mgu(&c1)) {
                (Ok(m), Ok(n)) => {
                    prop_assert!(m.leq(&c1));
                    prop_assert!(m.leq(&c2));
                    prop_assert_eq!(m, n);
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "mgu definedness is not symmetric"),
            }
        }

        #[test]
        fn match_projects_back(a in arb_isubst(), b in arb_isubst()) {
            let c1 = ExistentialSubstitution::canonicalize(&a, &var_set("xy"));
            let c2 = ExistentialSubstitution::canonicalize(&b, &var_set("yz"));
            if let Some(m) = c1.matching(&c2) {
                prop_assert_eq!(m.project(c1.interest()), c1);
            }
        }
    }
}
