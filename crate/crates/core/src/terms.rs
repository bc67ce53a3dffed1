//! First-order terms, substitutions and syntactic unification.
//!
//! Lexical convention: identifiers starting with `u`..`z`, an uppercase
//! letter or `_` are variables; every other identifier (and quoted atoms
//! such as `'.'`) is a function symbol. Lists use Prolog sugar and are
//! desugared to `'.'/2` and `'[]'/0`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::error::{Error, Result};
use crate::multiset::Multiset;
use crate::var::{Var, VarSet};

pub const CONS: &str = ".";
pub const NIL: &str = "[]";

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    App(Arc<str>, Vec<Term>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum UnifyError {
    #[error("symbol clash: {0} vs {1}")]
    Clash(String, String),
    #[error("occur check: {0} occurs in {1}")]
    OccurCheck(String, String),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn constant(name: &str) -> Term {
        Term::App(Arc::from(name), Vec::new())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(Arc::from(name), args)
    }

    pub fn cons(head: Term, tail: Term) -> Term {
        Term::app(CONS, vec![head, tail])
    }

    pub fn nil() -> Term {
        Term::constant(NIL)
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            Term::App(..) => None,
        }
    }

    /// Number of occurrences of `v` in the term.
    pub fn occ(&self, v: &Var) -> u32 {
        match self {
            Term::Var(w) => u32::from(w == v),
            Term::App(_, args) => args.iter().map(|a| a.occ(v)).sum(),
        }
    }

    pub fn vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut VarSet) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    /// Variables in depth-first, left-to-right first-occurrence order.
    pub fn vars_in_order(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::App(_, args) => args.iter().for_each(|a| a.vars_in_order(out)),
        }
    }

    /// Occurrence counts of every variable of the term.
    pub fn occurrences(&self) -> Multiset {
        let mut m = Multiset::new();
        self.count_into(&mut m);
        m
    }

    fn count_into(&self, m: &mut Multiset) {
        match self {
            Term::Var(v) => m.add(v.clone(), 1),
            Term::App(_, args) => args.iter().for_each(|a| a.count_into(m)),
        }
    }

    /// No variable occurs twice.
    pub fn is_linear(&self) -> bool {
        self.occurrences().iter().all(|(_, n)| n == 1)
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Term {
        match self {
            Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| a.rename(map)).collect()),
        }
    }
}

/// One-way matching: extends `delta` so that `delta(pattern) == target`.
/// Variables of `target` are treated as constants.
pub fn match_term(pattern: &Term, target: &Term, delta: &mut BTreeMap<Var, Term>) -> bool {
    match pattern {
        Term::Var(v) => match delta.get(v) {
            Some(bound) => bound == target,
            None => {
                delta.insert(v.clone(), target.clone());
                true
            }
        },
        Term::App(f, args) => match target {
            Term::App(g, targs) if f == g && args.len() == targs.len() => args
                .iter()
                .zip(targs)
                .all(|(p, t)| match_term(p, t, delta)),
            _ => false,
        },
    }
}

/// A substitution with finite domain. Trivial bindings `x/x` are never stored.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Substitution {
    bindings: BTreeMap<Var, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_bindings(pairs: impl IntoIterator<Item = (Var, Term)>) -> Self {
        let mut s = Substitution::new();
        for (v, t) in pairs {
            s.bind(v, t);
        }
        s
    }

    /// Sets `v/t`, dropping the binding when `t` is `v` itself.
    pub fn bind(&mut self, v: Var, t: Term) {
        if t.as_var() == Some(&v) {
            self.bindings.remove(&v);
        } else {
            self.bindings.insert(v, t);
        }
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.bindings.get(v)
    }

    /// `θ(v)`, which is `v` itself for unbound variables.
    pub fn image(&self, v: &Var) -> Term {
        self.bindings
            .get(v)
            .cloned()
            .unwrap_or_else(|| Term::Var(v.clone()))
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.bindings.iter()
    }

    pub fn domain(&self) -> VarSet {
        self.bindings.keys().cloned().collect()
    }

    pub fn range_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        for t in self.bindings.values() {
            t.collect_vars(&mut out);
        }
        out
    }

    /// `dom(θ) ∪ vars(rng(θ))`.
    pub fn vars(&self) -> VarSet {
        let mut out = self.range_vars();
        out.extend(self.bindings.keys().cloned());
        out
    }

    pub fn is_idempotent(&self) -> bool {
        let range = self.range_vars();
        self.bindings.keys().all(|v| !range.contains(v))
    }

    /// Simultaneous replacement of variables by their bindings.
    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.image(v),
            Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    /// The composition that applies `self` first and then `next`, i.e.
    /// `λx. next(self(x))` (written `next ∘ self`).
    pub fn then(&self, next: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (v, t) in &self.bindings {
            out.bind(v.clone(), next.apply(t));
        }
        for (v, t) in &next.bindings {
            if !self.bindings.contains_key(v) {
                out.bind(v.clone(), t.clone());
            }
        }
        out
    }

    /// Keeps only the bindings of variables in `vars`.
    pub fn restrict(&self, vars: &VarSet) -> Substitution {
        Substitution {
            bindings: self
                .bindings
                .iter()
                .filter(|(v, _)| vars.contains(*v))
                .map(|(v, t)| (v.clone(), t.clone()))
                .collect(),
        }
    }

    /// Union of two substitutions with disjoint domains.
    pub fn disjoint_union(&self, other: &Substitution) -> Substitution {
        debug_assert!(other.bindings.keys().all(|v| !self.bindings.contains_key(v)));
        let mut out = self.clone();
        out.bindings
            .extend(other.bindings.iter().map(|(v, t)| (v.clone(), t.clone())));
        out
    }

    /// The ω-sharing group `θ⁻¹(v) = λw. occ(v, θ(w))`.
    pub fn preimage_var(&self, v: &Var) -> Multiset {
        let mut m = Multiset::new();
        for (w, t) in &self.bindings {
            m.add(w.clone(), t.occ(v));
        }
        if !self.bindings.contains_key(v) {
            m.add(v.clone(), 1);
        }
        m
    }

    /// `θ⁻¹(v₁^{i₁}⋯vₙ^{iₙ}) = ⊎ θ⁻¹(vⱼ)^{iⱼ}`.
    pub fn preimage_group(&self, group: &Multiset) -> Multiset {
        let mut m = Multiset::new();
        for (v, n) in group.iter() {
            m.sum_assign(&self.preimage_var(v).scale(n));
        }
        m
    }

    /// Renames every variable (domain and range) through `map`.
    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Substitution {
        Substitution::from_bindings(self.bindings.iter().map(|(v, t)| {
            (
                map.get(v).cloned().unwrap_or_else(|| v.clone()),
                t.rename(map),
            )
        }))
    }
}

/// Most general unifier of a set of equations, computed by equation
/// rewriting with eager occur check. For a variable-variable equation the
/// left variable is bound. The result is idempotent.
pub fn mgu(equations: &[(Term, Term)]) -> Result<Substitution, UnifyError> {
    let mut sigma = Substitution::new();
    let mut pending: Vec<(Term, Term)> = equations.iter().rev().cloned().collect();
    while let Some((l, r)) = pending.pop() {
        let l = sigma.apply(&l);
        let r = sigma.apply(&r);
        if l == r {
            continue;
        }
        match (l, r) {
            (Term::Var(x), t) | (t, Term::Var(x)) => {
                if t.occ(&x) > 0 {
                    return Err(UnifyError::OccurCheck(x.to_string(), t.to_string()));
                }
                let single = Substitution::from_bindings([(x.clone(), t.clone())]);
                sigma = sigma.then(&single);
                sigma.bind(x, t);
            }
            (Term::App(f, fargs), Term::App(g, gargs)) => {
                if f != g || fargs.len() != gargs.len() {
                    return Err(UnifyError::Clash(
                        format!("{f}/{}", fargs.len()),
                        format!("{g}/{}", gargs.len()),
                    ));
                }
                pending.extend(fargs.into_iter().zip(gargs).rev());
            }
        }
    }
    Ok(sigma)
}

/// Equations `x = θ(x)` for every binding of `θ`.
pub fn equations_of(theta: &Substitution) -> Vec<(Term, Term)> {
    theta
        .iter()
        .map(|(v, t)| (Term::Var(v.clone()), t.clone()))
        .collect()
}

// ---------------------------------------------------------------------------
// Text form

fn needs_quotes(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() && !('u'..='z').contains(&c) || c.is_ascii_digit() => {
            !chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        }
        _ => true,
    }
}

fn write_symbol(f: &mut fmt::Formatter<'_>, name: &str) -> fmt::Result {
    if needs_quotes(name) {
        write!(f, "'{name}'")
    } else {
        f.write_str(name)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::App(name, args) if &**name == NIL && args.is_empty() => f.write_str("[]"),
            Term::App(name, args) if &**name == CONS && args.len() == 2 => {
                f.write_char('[')?;
                write!(f, "{}", args[0])?;
                let mut tail = &args[1];
                loop {
                    match tail {
                        Term::App(n, a) if &**n == CONS && a.len() == 2 => {
                            write!(f, ",{}", a[0])?;
                            tail = &a[1];
                        }
                        Term::App(n, a) if &**n == NIL && a.is_empty() => break,
                        other => {
                            write!(f, "|{other}")?;
                            break;
                        }
                    }
                }
                f.write_char(']')
            }
            Term::App(name, args) => {
                write_symbol(f, name)?;
                if !args.is_empty() {
                    f.write_char('(')?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_char(',')?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_char(')')?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_char('{')?;
        for (i, (v, t)) in self.bindings.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}/{t}")?;
        }
        f.write_char('}')
    }
}

impl fmt::Debug for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Character-level cursor shared by the term, substitution and program
/// parsers. `%` starts a comment running to the end of the line.
pub(crate) struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(src: &'a str) -> Self {
        Cursor { src, pos: 0 }
    }

    pub(crate) fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    pub(crate) fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.src.len()
    }

    pub(crate) fn skip_ws(&mut self) {
        loop {
            let rest = self.rest();
            let trimmed = rest.trim_start();
            self.pos += rest.len() - trimmed.len();
            if trimmed.starts_with('%') {
                let end = trimmed.find('\n').unwrap_or(trimmed.len());
                self.pos += end;
            } else {
                break;
            }
        }
    }

    pub(crate) fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    pub(crate) fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, token: &str) -> Result<()> {
        if self.eat(token) {
            Ok(())
        } else {
            let found: String = self.rest().chars().take(12).collect();
            Err(self.error(format!("expected '{token}', found '{found}'")))
        }
    }

    pub(crate) fn line_col(&self) -> (usize, usize) {
        let before = &self.src[..self.pos];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
        (line, column)
    }

    pub(crate) fn error(&self, message: String) -> Error {
        let (line, column) = self.line_col();
        Error::Syntax {
            line,
            column,
            message,
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let len = rest
            .char_indices()
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_'))
            .map_or(rest.len(), |(i, _)| i);
        if len == 0 {
            return None;
        }
        self.pos += len;
        Some(&rest[..len])
    }

    fn quoted(&mut self) -> Result<&'a str> {
        self.expect("'")?;
        let rest = self.rest();
        match rest.find('\'') {
            Some(end) => {
                self.pos += end + 1;
                Ok(&rest[..end])
            }
            None => Err(self.error("unterminated quoted atom".into())),
        }
    }

    pub(crate) fn term(&mut self) -> Result<Term> {
        match self.peek() {
            Some('[') => self.list(),
            Some('\'') => {
                let name = self.quoted()?.to_string();
                self.args_of(&name)
            }
            Some(_) => {
                let start = self.pos;
                let Some(name) = self.ident() else {
                    let found: String = self.rest().chars().take(12).collect();
                    return Err(self.error(format!("expected a term, found '{found}'")));
                };
                if is_var_name(name) {
                    if self.rest().starts_with('(') {
                        self.pos = start;
                        return Err(self.error(format!("variable '{name}' used as a function symbol")));
                    }
                    Ok(Term::var(name))
                } else {
                    self.args_of(name)
                }
            }
            None => Err(self.error("unexpected end of input".into())),
        }
    }

    fn args_of(&mut self, name: &str) -> Result<Term> {
        if !self.rest().starts_with('(') {
            return Ok(Term::constant(name));
        }
        self.pos += 1;
        let mut args = vec![self.term()?];
        while self.eat(",") {
            args.push(self.term()?);
        }
        self.expect(")")?;
        Ok(Term::app(name, args))
    }

    fn list(&mut self) -> Result<Term> {
        self.expect("[")?;
        if self.eat("]") {
            return Ok(Term::nil());
        }
        let mut items = vec![self.term()?];
        while self.eat(",") {
            items.push(self.term()?);
        }
        let tail = if self.eat("|") { self.term()? } else { Term::nil() };
        self.expect("]")?;
        Ok(items
            .into_iter()
            .rev()
            .fold(tail, |acc, item| Term::cons(item, acc)))
    }
}

pub(crate) fn is_var_name(name: &str) -> bool {
    match name.chars().next() {
        Some(c) => ('u'..='z').contains(&c) || c.is_ascii_uppercase() || c == '_',
        None => false,
    }
}

impl FromStr for Term {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut cur = Cursor::new(s);
        let t = cur.term()?;
        if !cur.at_end() {
            return Err(cur.error(format!("trailing input '{}'", cur.rest())));
        }
        Ok(t)
    }
}

impl FromStr for Substitution {
    type Err = Error;

    /// `{x/a, y/f(z)}`; the braces are optional.
    fn from_str(s: &str) -> Result<Self> {
        let mut cur = Cursor::new(s);
        let braced = cur.eat("{");
        let mut out = Substitution::new();
        let closing = |cur: &mut Cursor| if braced { cur.peek() == Some('}') } else { cur.at_end() };
        if !closing(&mut cur) {
            loop {
                let t = cur.term()?;
                let Term::Var(v) = t else {
                    return Err(cur.error(format!("binding must start with a variable, found '{t}'")));
                };
                cur.expect("/")?;
                let rhs = cur.term()?;
                if out.get(&v).is_some() {
                    return Err(cur.error(format!("variable '{v}' bound twice")));
                }
                out.bind(v, rhs);
                if !cur.eat(",") {
                    break;
                }
            }
        }
        if braced {
            cur.expect("}")?;
        }
        if !cur.at_end() {
            return Err(cur.error(format!("trailing input '{}'", cur.rest())));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::var::var_set;
    use proptest::prelude::*;

    fn t(s: &str) -> Term {
        s.parse().unwrap()
    }

    fn sub(s: &str) -> Substitution {
        s.parse().unwrap()
    }

    fn ms(s: &str) -> Multiset {
        s.parse().unwrap()
    }

    fn v(s: &str) -> Var {
        Var::new(s)
    }

    #[test]
    fn occ_examples() {
        assert_eq!(t("s(y,u,y)").occ(&v("y")), 2);
        assert_eq!(t("a").occ(&v("x")), 0);
        assert_eq!(t("s(u,u)").occ(&v("u")), 2);
    }

    #[test]
    fn apply_examples() {
        assert_eq!(sub("{x/a}").apply(&t("f(x,y)")), t("f(a,y)"));
        assert_eq!(Substitution::new().apply(&t("g(x,[y|z])")), t("g(x,[y|z])"));
        assert_eq!(sub("{y/b}").apply(&t("r(y)")), t("r(b)"));
    }

    #[test]
    fn composition_example() {
        let theta = sub("{v/a, w/s(x,x)}");
        let eta = sub("{x/s(y,u,y), z/s(u,u), v/u}");
        assert_eq!(
            theta.then(&eta),
            sub("{v/a, w/s(s(y,u,y),s(y,u,y)), x/s(y,u,y), z/s(u,u)}")
        );
        assert_eq!(Substitution::new().then(&theta), theta);
        assert_eq!(theta.then(&Substitution::new()), theta);
    }

    #[test]
    fn mgu_examples() {
        let eqs = [(t("x"), t("a")), (t("z"), t("r(y)")), (t("y"), t("b"))];
        assert_eq!(mgu(&eqs).unwrap(), sub("{x/a, y/b, z/r(b)}"));
        assert_eq!(mgu(&[(t("x"), t("x"))]).unwrap(), Substitution::new());
        assert!(matches!(mgu(&[(t("a"), t("f(a)"))]), Err(UnifyError::Clash(..))));
        assert!(matches!(mgu(&[(t("x"), t("f(x)"))]), Err(UnifyError::OccurCheck(..))));
        assert!(matches!(mgu(&[(t("f(a,b)"), t("f(a)"))]), Err(UnifyError::Clash(..))));
    }

    #[test]
    fn preimage_examples() {
        let theta = sub("{x/s(y,u,y), z/s(u,u), v/u}");
        assert_eq!(theta.preimage_var(&v("u")), ms("uvxz^2"));
        assert_eq!(theta.preimage_var(&v("y")), ms("x^2y"));
        assert_eq!(theta.preimage_var(&v("z")), Multiset::new());
        assert_eq!(theta.preimage_var(&v("w")), ms("w"));

        let theta = sub("{v/a, w/s(x,x)}");
        assert_eq!(theta.preimage_group(&ms("uvxz^2")), ms("uw^2xz^2"));
        assert_eq!(Substitution::new().preimage_group(&ms("uvxz^2")), ms("uvxz^2"));
        assert_eq!(theta.preimage_group(&Multiset::new()), Multiset::new());
    }

    #[test]
    fn text_round_trip() {
        for s in ["f(a,[x,y|z])", "[]", "'+'(x,a)", "t(a)", "[a]"] {
            assert_eq!(t(s).to_string().parse::<Term>().unwrap(), t(s));
        }
        assert_eq!(t("[y]"), Term::cons(Term::var("y"), Term::nil()));
        assert_eq!(sub("{x/a, y/f(b)}").to_string(), "{x/a, y/f(b)}");
        assert!("{x/a, x/b}".parse::<Substitution>().is_err());
        assert!("{a/x}".parse::<Substitution>().is_err());
        assert!("x(a)".parse::<Term>().is_err());
        assert_eq!(sub("{}"), Substitution::new());
    }

    #[test]
    fn idempotence_check() {
        assert!(sub("{x/f(y)}").is_idempotent());
        assert!(!sub("{x/f(y), y/a}").is_idempotent());
    }

    // Random terms over variables u..z and symbols a, f/1, g/2, h/3.
    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            (0usize..6).prop_map(|i| Term::var(["u", "v", "w", "x", "y", "z"][i])),
            Just(Term::constant("a")),
        ];
        leaf.prop_recursive(3, 16, 3, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Term::app("f", vec![a])),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Term::app("g", vec![a, b])),
                (inner.clone(), inner.clone(), inner).prop_map(|(a, b, c)| Term::app("h", vec![a, b, c])),
            ]
        })
    }

    fn arb_subst() -> impl Strategy<Value = Substitution> {
        prop::collection::vec((0usize..6, arb_term()), 0..4).prop_map(|pairs| {
            Substitution::from_bindings(
                pairs
                    .into_iter()
                    .map(|(i, t)| (v(["u", "v", "w", "x", "y", "z"][i]), t)),
            )
        })
    }

    fn arb_group() -> impl Strategy<Value = Multiset> {
        prop::collection::vec((0usize..6, 0u32..3), 0..4).prop_map(|pairs| {
            Multiset::from_counts(
                pairs
                    .into_iter()
                    .map(|(i, n)| (v(["u", "v", "w", "x", "y", "z"][i]), n)),
            )
        })
    }

    proptest! {
        #[test]
        fn mgu_is_idempotent_unifier(eqs in prop::collection::vec((arb_term(), arb_term()), 1..4)) {
            if let Ok(theta) = mgu(&eqs) {
                prop_assert!(theta.is_idempotent());
                for (l, r) in &eqs {
                    prop_assert_eq!(theta.apply(l), theta.apply(r));
                    prop_assert_eq!(theta.apply(&theta.apply(l)), theta.apply(l));
                }
            }
        }

        #[test]
        fn preimage_composition_law(theta in arb_subst(), eta in arb_subst(), b in arb_group()) {
            // (η ∘ θ)⁻¹(B) = θ⁻¹(η⁻¹(B))
            let composed = theta.then(&eta);
            prop_assert_eq!(composed.preimage_group(&b), theta.preimage_group(&eta.preimage_group(&b)));
        }

        #[test]
        fn occurrence_bilinearity(theta in arb_subst(), term in arb_term(), i in 0usize..6) {
            let target = v(["u", "v", "w", "x", "y", "z"][i]);
            let mut expected = 0;
            for w in term.vars() {
                expected += term.occ(&w) * theta.image(&w).occ(&target);
            }
            prop_assert_eq!(theta.apply(&term).occ(&target), expected);
        }

        #[test]
        fn term_display_parses_back(term in arb_term()) {
            prop_assert_eq!(term.to_string().parse::<Term>().unwrap(), term);
        }

        #[test]
        fn matching_finds_instances(pattern in arb_term(), theta in arb_subst()) {
            let target = theta.apply(&pattern);
            let mut delta = BTreeMap::new();
            prop_assert!(match_term(&pattern, &target, &mut delta));
            let delta = Substitution::from_bindings(delta);
            prop_assert_eq!(delta.apply(&pattern), target);
        }
    }

    #[test]
    fn vars_of_term() {
        assert_eq!(t("f(x,g(y,x))").vars(), var_set("xy"));
        let mut order = Vec::new();
        t("f(y,g(x,y))").vars_in_order(&mut order);
        assert_eq!(order, vec![v("y"), v("x")]);
    }
}
