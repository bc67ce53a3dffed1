//! A goal-dependent abstract interpreter for a small logic language.
//!
//! Each call runs the call → entry → exit → answer pipeline: forward
//! unification folds [`baseline_amgu`] over the head unifier, the body is
//! analyzed left to right, and backward unification either applies the
//! optimal matching operator of the domain or falls back to abstract mgu.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::existential::ExistentialSubstitution;
use crate::multiset::Multiset;
use crate::omega::{match_omega, ShLinOmega};
use crate::sl::{match_sl, ShLinSl};
use crate::terms::{mgu, Cursor, Substitution, Term};
use crate::two::{match2, Exp, ShLin2, TwoGroup};
use crate::var::{SetDisplay, Var, VarSet};

/// `p(t₁,…,tₙ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn vars(&self) -> VarSet {
        self.args.iter().flat_map(Term::vars).collect()
    }

    fn vars_in_order(&self) -> Vec<Var> {
        let mut order = Vec::new();
        for a in &self.args {
            a.vars_in_order(&mut order);
        }
        let mut seen = VarSet::new();
        order.retain(|v| seen.insert(v.clone()));
        order
    }

    fn rename(&self, map: &BTreeMap<Var, Var>) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self.args.iter().map(|a| a.rename(map)).collect(),
        }
    }

    fn apply(&self, theta: &Substitution) -> Atom {
        Atom {
            pred: self.pred.clone(),
            args: self.args.iter().map(|a| theta.apply(a)).collect(),
        }
    }

    fn same_predicate(&self, other: &Atom) -> bool {
        self.pred == other.pred && self.args.len() == other.args.len()
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Term::app(&self.pred, self.args.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Clause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl Clause {
    pub fn vars(&self) -> VarSet {
        let mut vs = self.head.vars();
        for a in &self.body {
            vs.extend(a.vars());
        }
        vs
    }

    fn rename(&self, map: &BTreeMap<Var, Var>) -> Clause {
        Clause {
            head: self.head.rename(map),
            body: self.body.iter().map(|a| a.rename(map)).collect(),
        }
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        for (i, a) in self.body.iter().enumerate() {
            f.write_str(if i == 0 { " :- " } else { ", " })?;
            write!(f, "{a}")?;
        }
        f.write_str(".")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub clauses: Vec<Clause>,
}

fn atom_at(cur: &mut Cursor<'_>) -> Result<Atom> {
    let (line, column) = {
        cur.skip_ws();
        cur.line_col()
    };
    match cur.term()? {
        Term::App(name, args) => Ok(Atom {
            pred: name.to_string(),
            args,
        }),
        Term::Var(v) => Err(Error::Syntax {
            line,
            column,
            message: format!("expected an atom, found variable '{v}'"),
        }),
    }
}

/// Parses facts `p(t₁,…,tₙ).` and rules `p(…) :- q(…), r(…).` (`←` is
/// accepted for `:-`). `%` starts a comment.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut cur = Cursor::new(text);
    let mut clauses = Vec::new();
    while !cur.at_end() {
        let head = atom_at(&mut cur)?;
        let mut body = Vec::new();
        if cur.eat(":-") || cur.eat("←") {
            body.push(atom_at(&mut cur)?);
            while cur.eat(",") {
                body.push(atom_at(&mut cur)?);
            }
        }
        cur.expect(".")?;
        clauses.push(Clause { head, body });
    }
    Ok(Program { clauses })
}

/// Parses a single atom; a trailing `.` is optional.
pub fn parse_goal(text: &str) -> Result<Atom> {
    let mut cur = Cursor::new(text);
    let atom = atom_at(&mut cur)?;
    cur.eat(".");
    if !cur.at_end() {
        return Err(cur.error(format!("trailing input '{}'", cur.rest())));
    }
    Ok(atom)
}

/// An abstract element of one of the three domains.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Element {
    Omega(ShLinOmega),
    Two(ShLin2),
    Sl(ShLinSl),
}

impl Element {
    pub fn parse(domain: Domain, text: &str) -> Result<Self> {
        Ok(match domain {
            Domain::Omega => Element::Omega(text.parse()?),
            Domain::Two => Element::Two(text.parse()?),
            Domain::Sl => Element::Sl(text.parse()?),
        })
    }

    pub fn bottom(domain: Domain, interest: VarSet) -> Self {
        match domain {
            Domain::Omega => Element::Omega(ShLinOmega::bottom(interest)),
            Domain::Two => Element::Two(ShLin2::bottom(interest)),
            Domain::Sl => Element::Sl(ShLinSl::bottom(interest)),
        }
    }

    /// The abstraction of a concrete class.
    pub fn alpha(domain: Domain, c: &ExistentialSubstitution) -> Self {
        let omega = ShLinOmega::alpha(c);
        match domain {
            Domain::Omega => Element::Omega(omega),
            Domain::Two => Element::Two(ShLin2::alpha(&omega)),
            Domain::Sl => Element::Sl(ShLinSl::alpha(&ShLin2::alpha(&omega))),
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            Element::Omega(_) => Domain::Omega,
            Element::Two(_) => Domain::Two,
            Element::Sl(_) => Domain::Sl,
        }
    }

    pub fn interest(&self) -> &VarSet {
        match self {
            Element::Omega(e) => e.interest(),
            Element::Two(e) => e.interest(),
            Element::Sl(e) => e.interest(),
        }
    }

    pub fn is_bottom(&self) -> bool {
        match self {
            Element::Omega(e) => e.is_bottom(),
            Element::Two(e) => e.is_bottom(),
            Element::Sl(e) => e.is_bottom(),
        }
    }

    pub fn leq(&self, other: &Element) -> bool {
        match (self, other) {
            (Element::Omega(a), Element::Omega(b)) => a.leq(b),
            (Element::Two(a), Element::Two(b)) => a.leq(b),
            (Element::Sl(a), Element::Sl(b)) => a.leq(b),
            _ => false,
        }
    }

    pub fn project(&self, vars: &VarSet) -> Self {
        match self {
            Element::Omega(e) => Element::Omega(e.project(vars)),
            Element::Two(e) => Element::Two(e.project(vars)),
            Element::Sl(e) => Element::Sl(e.project(vars)),
        }
    }

    pub fn rename(&self, map: &BTreeMap<Var, Var>) -> Result<Self> {
        Ok(match self {
            Element::Omega(e) => Element::Omega(e.rename(map)?),
            Element::Two(e) => Element::Two(e.rename(map)?),
            Element::Sl(e) => Element::Sl(e.rename(map)?),
        })
    }

    pub fn union(&self, other: &Element) -> Result<Self> {
        Ok(match (self, other) {
            (Element::Omega(a), Element::Omega(b)) => Element::Omega(a.union(b)?),
            (Element::Two(a), Element::Two(b)) => Element::Two(a.union(b)?),
            (Element::Sl(a), Element::Sl(b)) => Element::Sl(a.union(b)?),
            _ => return Err(domain_mismatch(self, other)),
        })
    }

    pub fn extend_fresh(&self, vars: &VarSet) -> Self {
        match self {
            Element::Omega(e) => Element::Omega(e.extend_fresh(vars)),
            Element::Two(e) => Element::Two(e.extend_fresh(vars)),
            Element::Sl(e) => Element::Sl(e.extend_fresh(vars)),
        }
    }

    /// Abstract unification of two elements over disjoint interest sets:
    /// the groups of both, side by side.
    pub fn join_disjoint(&self, other: &Element) -> Result<Self> {
        if let Some(v) = self.interest().intersection(other.interest()).next() {
            return Err(Error::InterestMismatch {
                left: format!("{} (shares {v})", SetDisplay(self.interest())),
                right: SetDisplay(other.interest()).to_string(),
            });
        }
        let interest: VarSet = self.interest().union(other.interest()).cloned().collect();
        if self.is_bottom() || other.is_bottom() {
            return Ok(Element::bottom(self.domain(), interest));
        }
        Ok(match (self, other) {
            (Element::Omega(a), Element::Omega(b)) => Element::Omega(ShLinOmega::normalized(
                a.groups().union(b.groups()).cloned().collect(),
                interest,
            )),
            (Element::Two(a), Element::Two(b)) => Element::Two(ShLin2::from_groups(
                a.maximals().union(b.maximals()).cloned(),
                interest,
            )),
            (Element::Sl(a), Element::Sl(b)) => Element::Sl(ShLinSl::new(
                a.sharing().union(b.sharing()).cloned(),
                a.linear().union(b.linear()).cloned().collect(),
                interest,
            )?),
            _ => return Err(domain_mismatch(self, other)),
        })
    }

    /// The optimal abstract matching of the domain, `match(self, general)`.
    pub fn matching(&self, general: &Element) -> Result<Self> {
        Ok(match (self, general) {
            (Element::Omega(a), Element::Omega(b)) => Element::Omega(match_omega(a, b)),
            (Element::Two(a), Element::Two(b)) => Element::Two(match2(a, b)),
            (Element::Sl(a), Element::Sl(b)) => Element::Sl(match_sl(a, b)),
            _ => return Err(domain_mismatch(self, general)),
        })
    }

    /// Clamps ω multiplicities to `cap`; other domains are unchanged.
    pub fn saturate(&self, cap: u32) -> Self {
        match self {
            Element::Omega(e) => Element::Omega(e.saturate(cap)),
            other => other.clone(),
        }
    }

    /// Supports of the nonempty groups.
    pub fn supports(&self) -> BTreeSet<VarSet> {
        match self {
            Element::Omega(e) => e.groups().iter().map(Multiset::support).collect(),
            Element::Two(e) => e.maximals().iter().map(TwoGroup::support).collect(),
            Element::Sl(e) => e.sharing().clone(),
        }
        .into_iter()
        .filter(|b| !b.is_empty())
        .collect()
    }

    /// Variables that may be bound to a non-linear term.
    pub fn nonlinear(&self) -> VarSet {
        match self {
            Element::Omega(e) => e
                .groups()
                .iter()
                .flat_map(|g| g.iter().filter(|(_, n)| *n >= 2).map(|(v, _)| v.clone()))
                .collect(),
            Element::Two(e) => e
                .maximals()
                .iter()
                .flat_map(|g| g.iter().filter(|(_, x)| *x == Exp::Inf).map(|(v, _)| v.clone()))
                .collect(),
            Element::Sl(e) => e.interest().difference(e.linear()).cloned().collect(),
        }
    }

    /// Nonempty groups of `self` not described by `other`, in the textual
    /// form of the domain. For 2-sharing only maximal groups are listed.
    pub fn groups_not_in(&self, other: &Element) -> Vec<String> {
        match (self, other) {
            (Element::Omega(a), Element::Omega(b)) => a
                .groups()
                .iter()
                .filter(|g| !g.is_empty() && !b.contains(g))
                .map(Multiset::to_string)
                .collect(),
            (Element::Two(a), Element::Two(b)) => a
                .maximals()
                .iter()
                .filter(|g| !g.is_empty() && !b.contains(g))
                .map(TwoGroup::to_string)
                .collect(),
            (Element::Sl(a), Element::Sl(b)) => a
                .sharing()
                .iter()
                .filter(|g| !g.is_empty() && !b.sharing().contains(*g))
                .map(|g| g.iter().map(|v| v.name()).collect::<String>())
                .collect(),
            _ => Vec::new(),
        }
    }
}

fn domain_mismatch(a: &Element, b: &Element) -> Error {
    Error::Parse(format!("cannot combine a {} element with a {} element", a.domain(), b.domain()))
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Element::Omega(e) => write!(f, "{e}"),
            Element::Two(e) => write!(f, "{e}"),
            Element::Sl(e) => write!(f, "{e}"),
        }
    }
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Group operations shared by the ω and 2-sharing forms of `baseline_amgu`.
trait Group: Clone + Ord {
    fn has(&self, v: &Var) -> bool;
    fn nonlinear_at(&self, v: &Var) -> bool;
    fn plus(&self, other: &Self) -> Self;
}

impl Group for Multiset {
    fn has(&self, v: &Var) -> bool {
        self.contains(v)
    }

    fn nonlinear_at(&self, v: &Var) -> bool {
        self.count(v) >= 2
    }

    fn plus(&self, other: &Self) -> Self {
        self.sum(other)
    }
}

impl Group for TwoGroup {
    fn has(&self, v: &Var) -> bool {
        self.get(v).is_some()
    }

    fn nonlinear_at(&self, v: &Var) -> bool {
        self.get(v) == Some(Exp::Inf)
    }

    fn plus(&self, other: &Self) -> Self {
        self.oplus(other)
    }
}

/// Binding-at-a-time abstract unification on a set of groups. `close`
/// keeps sums finite (saturation for ω).
fn amgu_groups<G: Group>(groups: &BTreeSet<G>, x: &Var, t: &Term, close: &dyn Fn(G) -> G) -> BTreeSet<G> {
    if t.as_var() == Some(x) {
        return groups.clone();
    }
    let tvars = t.vars();
    if tvars.contains(x) {
        return BTreeSet::new();
    }
    let in_t = |g: &G| tvars.iter().any(|y| g.has(y));
    let mut out: BTreeSet<G> = groups.iter().filter(|g| !g.has(x) && !in_t(g)).cloned().collect();
    let rx: Vec<&G> = groups.iter().filter(|g| g.has(x)).collect();
    let rt: Vec<&G> = groups.iter().filter(|g| in_t(g)).collect();
    if rx.is_empty() || rt.is_empty() {
        return out;
    }
    let linear = t.is_linear()
        && rx.iter().all(|g| !g.nonlinear_at(x) && !in_t(g))
        && rt.iter().all(|g| {
            tvars.iter().all(|y| !g.nonlinear_at(y)) && tvars.iter().filter(|y| g.has(y)).count() == 1
        });
    if linear {
        for bx in &rx {
            for bt in &rt {
                out.insert(close(bx.plus(bt)));
            }
        }
        return out;
    }
    let base: BTreeSet<(G, bool, bool)> = rx
        .iter()
        .chain(&rt)
        .map(|g| ((*g).clone(), g.has(x), in_t(g)))
        .collect();
    let mut seen = base.clone();
    let mut work: Vec<(G, bool, bool)> = base.iter().cloned().collect();
    while let Some((g, a, b)) = work.pop() {
        for (h, c, d) in &base {
            let next = (close(g.plus(h)), a || *c, b || *d);
            if !seen.contains(&next) {
                seen.insert(next.clone());
                work.push(next);
            }
        }
    }
    out.extend(seen.into_iter().filter(|(_, a, b)| *a && *b).map(|(g, _, _)| g));
    out
}

/// Sound (not optimal) abstract unification of `e` with the binding
/// `x/t`. Variables outside the interest set of `e` are treated as fresh.
///
/// Let `R_x` be the groups containing `x`, `R_t` those meeting `vars(t)`
/// and `I` the rest. When `x` is linear, `t` is a linear term whose
/// variables are linear and pairwise independent, and no group meets both,
/// the result is `I` plus pairwise sums of `R_x × R_t`. Otherwise every sum
/// of groups from `R_x ∪ R_t` meeting both sides is added. A ground `t`
/// yields `I`. For ω, multiplicities saturate at `cap`.
pub fn baseline_amgu(e: &Element, x: &Var, t: &Term, cap: u32) -> Element {
    let mut needed = t.vars();
    needed.insert(x.clone());
    let e = e.extend_fresh(&needed);
    match &e {
        Element::Omega(el) => {
            let groups = amgu_groups(el.groups(), x, t, &|g: Multiset| g.saturate(cap));
            Element::Omega(ShLinOmega::normalized(groups, el.interest().clone()))
        }
        Element::Two(el) => Element::Two(amgu_two(el, x, t)),
        Element::Sl(el) => Element::Sl(ShLinSl::alpha(&amgu_two(&el.gamma(), x, t))),
    }
}

fn amgu_two(el: &ShLin2, x: &Var, t: &Term) -> ShLin2 {
    let groups = amgu_groups(el.maximals(), x, t, &|g| g);
    ShLin2::from_groups(groups, el.interest().clone())
}

/// Folds [`baseline_amgu`] over the bindings of `theta` in domain order.
pub fn amgu_subst(e: &Element, theta: &Substitution, cap: u32) -> Element {
    theta
        .iter()
        .fold(e.clone(), |acc, (x, t)| baseline_amgu(&acc, x, t, cap).saturate(cap))
}

/// How an exit substitution is propagated back to the caller.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Matching,
    Mgu,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Matching => "matching",
            Mode::Mgu => "mgu",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "matching" => Ok(Mode::Matching),
            "mgu" => Ok(Mode::Mgu),
            other => Err(Error::Parse(format!("unknown mode '{other}' (expected matching or mgu)"))),
        }
    }
}

/// A pipeline state of a top-level clause that can be injected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Step {
    /// The forward result before projection onto the clause variables.
    Forward,
    Entry,
    Exit,
}

impl Step {
    fn parse(s: &str) -> Option<Step> {
        match s {
            "0" | "forward" => Some(Step::Forward),
            "1" | "entry" => Some(Step::Entry),
            "2" | "exit" => Some(Step::Exit),
            _ => None,
        }
    }
}

/// Externally supplied pipeline states for the clauses of the top-level
/// goal, keyed by 1-based clause position in the program.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Injection {
    entries: BTreeMap<(usize, Step), Element>,
}

impl Injection {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, clause: usize, step: Step, element: Element) {
        self.entries.insert((clause, step), element);
    }

    fn get(&self, clause: usize, step: Step) -> Option<&Element> {
        self.entries.get(&(clause, step))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// One entry per line: `<clause> <step> <element>`, where `<step>` is
    /// `forward`, `entry` or `exit` (or `0`, `1`, `2`). `%` and `#` start
    /// comments.
    pub fn parse(domain: Domain, text: &str) -> Result<Self> {
        let mut out = Injection::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split(['%', '#']).next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let syntax = |message: String| Error::Syntax {
                line: i + 1,
                column: 1,
                message,
            };
            let mut parts = line.splitn(3, char::is_whitespace);
            let clause = parts
                .next()
                .and_then(|c| c.parse::<usize>().ok())
                .filter(|&c| c > 0)
                .ok_or_else(|| syntax("expected a positive clause number".into()))?;
            let step = parts
                .next()
                .and_then(Step::parse)
                .ok_or_else(|| syntax("expected forward, entry or exit".into()))?;
            let text = parts.next().ok_or_else(|| syntax("missing element".into()))?;
            let element = Element::parse(domain, text).map_err(|e| syntax(e.to_string()))?;
            out.insert(clause, step, element);
        }
        Ok(out)
    }
}

/// Parameters of one analysis.
#[derive(Clone, Debug)]
pub struct AnalysisRequest {
    pub program: Program,
    pub goal: Atom,
    /// Interest set must be `vars(goal)`.
    pub call: Element,
    pub mode: Mode,
    /// ω multiplicity cap used during analysis.
    pub omega_cap: u32,
    pub max_iterations: usize,
    pub injection: Injection,
}

impl AnalysisRequest {
    pub fn new(program: Program, goal: Atom, call: Element, mode: Mode) -> Self {
        AnalysisRequest {
            program,
            goal,
            call,
            mode,
            omega_cap: DEFAULT_OMEGA_CAP,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            injection: Injection::new(),
        }
    }
}

pub const DEFAULT_OMEGA_CAP: u32 = 3;
pub const DEFAULT_MAX_ITERATIONS: usize = 100;

/// The pipeline states of one top-level clause in the final iteration.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseTrace {
    /// 1-based position in the program.
    pub clause: usize,
    /// The clause after standardization apart.
    pub renamed: Clause,
    /// Unifier of the clause head with the goal.
    pub theta: Option<Substitution>,
    pub call: Element,
    pub forward: Element,
    pub entry: Element,
    pub exit: Element,
    pub answer: Element,
}

#[derive(Clone, Debug)]
pub struct AnalysisResult {
    pub answer: Element,
    pub trace: Vec<ClauseTrace>,
    /// Number of passes until no memo entry changed.
    pub iterations: usize,
    /// Call patterns with their answers, in canonical variable names.
    pub memo: Vec<(String, Element)>,
}

struct MemoEntry {
    goal: Atom,
    call: Element,
    answer: Element,
}

struct Engine<'a> {
    req: &'a AnalysisRequest,
    table: BTreeMap<String, MemoEntry>,
    visited: BTreeSet<String>,
    changed: bool,
    top_key: String,
    trace: Vec<ClauseTrace>,
}

/// Canonical names `_g1, _g2, …` for the variables of `goal` in order of
/// first occurrence, followed by the remaining variables of interest.
fn canonical(goal: &Atom, call: &Element) -> Result<(String, BTreeMap<Var, Var>)> {
    let mut order = goal.vars_in_order();
    order.extend(call.interest().iter().filter(|v| !order.contains(v)).cloned().collect::<Vec<_>>());
    let map: BTreeMap<Var, Var> = order
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, Var::new(&format!("_g{}", i + 1))))
        .collect();
    let key = format!("{} : {}", goal.rename(&map), call.rename(&map)?);
    Ok((key, map))
}

fn invert(map: &BTreeMap<Var, Var>) -> BTreeMap<Var, Var> {
    map.iter().map(|(k, v)| (v.clone(), k.clone())).collect()
}

/// Renames the variables of `clause` that clash with `taken` to `v_1`,
/// `v_2`, … (first free index).
fn standardize_apart(clause: &Clause, taken: &VarSet) -> Clause {
    let own = clause.vars();
    let mut used: VarSet = taken.union(&own).cloned().collect();
    let mut map = BTreeMap::new();
    for v in own.intersection(taken) {
        let fresh = (1..)
            .map(|k| Var::new(&format!("{}_{k}", v.name())))
            .find(|c| !used.contains(c))
            .expect("unbounded supply of names");
        used.insert(fresh.clone());
        map.insert(v.clone(), fresh);
    }
    clause.rename(&map)
}

fn head_unifier(head: &Atom, goal: &Atom) -> Option<Substitution> {
    let eqs: Vec<(Term, Term)> = head.args.iter().cloned().zip(goal.args.iter().cloned()).collect();
    mgu(&eqs).ok()
}

impl Engine<'_> {
    fn cap(&self) -> u32 {
        self.req.omega_cap
    }

    fn solve(&mut self, goal: &Atom, call: &Element) -> Result<Element> {
        let call = call.saturate(self.cap());
        let (key, to_canon) = canonical(goal, &call)?;
        let from_canon = invert(&to_canon);
        if !self.table.contains_key(&key) {
            let canon_vars: VarSet = to_canon.values().cloned().collect();
            self.table.insert(
                key.clone(),
                MemoEntry {
                    goal: goal.clone(),
                    call: call.clone(),
                    answer: Element::bottom(call.domain(), canon_vars),
                },
            );
        }
        if !self.visited.insert(key.clone()) {
            return self.table[&key].answer.rename(&from_canon);
        }
        let (rep_goal, rep_call) = {
            let e = &self.table[&key];
            (e.goal.clone(), e.call.clone())
        };
        let top = key == self.top_key;
        let answer = self.eval_clauses(&rep_goal, &rep_call, top)?;
        let (_, rep_to_canon) = canonical(&rep_goal, &rep_call)?;
        let canon = answer.rename(&rep_to_canon)?;
        let entry = self.table.get_mut(&key).expect("inserted above");
        let joined = entry.answer.union(&canon)?.saturate(self.req.omega_cap);
        if joined != entry.answer {
            entry.answer = joined.clone();
            self.changed = true;
        }
        joined.rename(&from_canon)
    }

    fn eval_clauses(&mut self, goal: &Atom, call: &Element, top: bool) -> Result<Element> {
        let goal_vars = call.interest().clone();
        let mut answer = Element::bottom(call.domain(), goal_vars.clone());
        if call.is_bottom() {
            return Ok(answer);
        }
        let req = self.req;
        for (i, clause) in req.program.clauses.iter().enumerate() {
            if !clause.head.same_predicate(goal) {
                continue;
            }
            let index = i + 1;
            let inject = |step| if top { req.injection.get(index, step).cloned() } else { None };
            let renamed = standardize_apart(clause, &goal_vars);
            let clause_vars = renamed.vars();
            let all: VarSet = goal_vars.union(&clause_vars).cloned().collect();
            let theta = head_unifier(&renamed.head, goal);
            let forward = match (&theta, inject(Step::Forward)) {
                (_, Some(e)) => e,
                (Some(theta), None) => amgu_subst(&call.extend_fresh(&clause_vars), theta, self.cap()),
                (None, None) => Element::bottom(call.domain(), all.clone()),
            };
            check_interest(&forward, &all)?;
            let entry = inject(Step::Entry).unwrap_or_else(|| forward.project(&clause_vars));
            check_interest(&entry, &clause_vars)?;
            let mut current = entry.clone();
            for atom in &renamed.body {
                if current.is_bottom() {
                    break;
                }
                let sub_call = current.project(&atom.vars());
                let sub_answer = self.solve(atom, &sub_call)?;
                current = self.combine(&current, &sub_answer)?;
            }
            let exit = inject(Step::Exit).unwrap_or(current);
            check_interest(&exit, &clause_vars)?;
            let result = match &theta {
                None => Element::bottom(call.domain(), goal_vars.clone()),
                Some(theta) => self.backward(call, &exit, &forward, theta, &goal_vars)?,
            };
            answer = answer.union(&result)?;
            if top {
                self.trace.push(ClauseTrace {
                    clause: index,
                    renamed,
                    theta,
                    call: call.clone(),
                    forward,
                    entry,
                    exit,
                    answer: result,
                });
            }
        }
        Ok(answer.saturate(self.cap()))
    }

    /// Backward unification of an exit state with its call.
    fn backward(
        &self,
        call: &Element,
        exit: &Element,
        forward: &Element,
        theta: &Substitution,
        goal_vars: &VarSet,
    ) -> Result<Element> {
        let full = match self.req.mode {
            Mode::Matching => exit.matching(forward)?,
            Mode::Mgu => amgu_subst(&call.join_disjoint(exit)?, theta, self.cap()),
        };
        Ok(full.project(goal_vars).saturate(self.cap()))
    }

    /// Refines the clause state with the answer of one body atom.
    fn combine(&self, current: &Element, answer: &Element) -> Result<Element> {
        let out = match self.req.mode {
            Mode::Matching => answer.matching(current)?,
            Mode::Mgu => {
                let primed: BTreeMap<Var, Var> = answer
                    .interest()
                    .iter()
                    .enumerate()
                    .map(|(i, v)| (v.clone(), Var::new(&format!("_p{}", i + 1))))
                    .collect();
                let bindings =
                    Substitution::from_bindings(primed.iter().map(|(v, p)| (p.clone(), Term::Var(v.clone()))));
                let joined = current.join_disjoint(&answer.rename(&primed)?)?;
                amgu_subst(&joined, &bindings, self.cap()).project(current.interest())
            }
        };
        Ok(out.saturate(self.cap()))
    }
}

fn check_interest(e: &Element, expected: &VarSet) -> Result<()> {
    if e.interest() == expected {
        Ok(())
    } else {
        Err(Error::InterestMismatch {
            left: SetDisplay(e.interest()).to_string(),
            right: SetDisplay(expected).to_string(),
        })
    }
}

/// Runs the goal-dependent fixpoint for `req`.
pub fn analyze(req: &AnalysisRequest) -> Result<AnalysisResult> {
    if !req.goal.vars().is_subset(req.call.interest()) {
        return Err(Error::InterestMismatch {
            left: SetDisplay(req.call.interest()).to_string(),
            right: SetDisplay(&req.goal.vars()).to_string(),
        });
    }
    let (top_key, _) = canonical(&req.goal, &req.call.saturate(req.omega_cap))?;
    let mut engine = Engine {
        req,
        table: BTreeMap::new(),
        visited: BTreeSet::new(),
        changed: false,
        top_key,
        trace: Vec::new(),
    };
    let mut iterations = 0;
    loop {
        if iterations == req.max_iterations {
            return Err(Error::FixpointLimitExceeded(iterations));
        }
        iterations += 1;
        engine.visited.clear();
        engine.trace.clear();
        engine.changed = false;
        let answer = engine.solve(&req.goal, &req.call)?;
        if !engine.changed {
            let memo = engine
                .table
                .iter()
                .map(|(k, e)| (k.clone(), e.answer.clone()))
                .collect();
            return Ok(AnalysisResult {
                answer,
                trace: engine.trace,
                iterations,
                memo,
            });
        }
    }
}

/// Answers of both backward modes and what separates them.
#[derive(Clone, Debug)]
pub struct Diff {
    pub matching: Element,
    pub mgu: Element,
    /// Groups of the mgu answer absent from the matching answer.
    pub groups: Vec<String>,
    /// Sharing supports present only in the mgu answer.
    pub sharing: Vec<VarSet>,
    /// Variables possibly non-linear only in the mgu answer.
    pub nonlinear: VarSet,
}

/// Runs `req` in both modes.
pub fn diff(req: &AnalysisRequest) -> Result<Diff> {
    let run = |mode| {
        let mut r = req.clone();
        r.mode = mode;
        analyze(&r).map(|res| res.answer)
    };
    let matching = run(Mode::Matching)?;
    let mgu = run(Mode::Mgu)?;
    let groups = mgu.groups_not_in(&matching);
    let sharing = mgu.supports().difference(&matching.supports()).cloned().collect();
    let nonlinear = mgu.nonlinear().difference(&matching.nonlinear()).cloned().collect();
    Ok(Diff {
        matching,
        mgu,
        groups,
        sharing,
        nonlinear,
    })
}

/// Concrete answers of `goal` under `call` by SLD resolution, exploring at
/// most `max_steps` resolution steps per derivation and collecting at most
/// `max_answers` answers.
pub fn concrete_answers(
    program: &Program,
    goal: &Atom,
    call: &ExistentialSubstitution,
    max_steps: usize,
    max_answers: usize,
) -> Vec<ExistentialSubstitution> {
    let goal_vars = goal.vars();
    let mut out = Vec::new();
    let mut counter = 0;
    sld(
        program,
        call.rep().clone(),
        vec![goal.clone()],
        max_steps,
        &goal_vars,
        &mut counter,
        max_answers,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn sld(
    program: &Program,
    sigma: Substitution,
    goals: Vec<Atom>,
    steps: usize,
    goal_vars: &VarSet,
    counter: &mut usize,
    max_answers: usize,
    out: &mut Vec<ExistentialSubstitution>,
) {
    if out.len() >= max_answers {
        return;
    }
    let Some((first, rest)) = goals.split_first() else {
        out.push(ExistentialSubstitution::canonicalize(&sigma, goal_vars));
        return;
    };
    if steps == 0 {
        return;
    }
    let atom = first.apply(&sigma);
    for clause in &program.clauses {
        if !clause.head.same_predicate(&atom) {
            continue;
        }
        *counter += 1;
        let map: BTreeMap<Var, Var> = clause
            .vars()
            .into_iter()
            .map(|v| {
                let fresh = Var::new(&format!("_s{counter}_{}", v.name()));
                (v, fresh)
            })
            .collect();
        let renamed = clause.rename(&map);
        let Some(delta) = head_unifier(&renamed.head, &atom) else {
            continue;
        };
        let next_sigma = sigma.then(&delta);
        let mut next_goals = renamed.body.clone();
        next_goals.extend(rest.iter().cloned());
        sld(program, next_sigma, next_goals, steps - 1, goal_vars, counter, max_answers, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::var::var_set;

    fn two(s: &str) -> Element {
        Element::parse(Domain::Two, s).unwrap()
    }

    fn omega(s: &str) -> Element {
        Element::parse(Domain::Omega, s).unwrap()
    }

    #[test]
    fn parses_programs() {
        let p = parse_program("p(u,v,w).").unwrap();
        assert_eq!(p.clauses.len(), 1);
        let p = parse_program("member(u,[u|v]).\nmember(u,[v|w]) :- member(u,w). % rec\n").unwrap();
        assert_eq!(p.clauses[0].head.args[1], Term::cons(Term::var("u"), Term::var("v")));
        assert_eq!(p.clauses[1].body.len(), 1);
        assert!(matches!(parse_program("p(x :-"), Err(Error::Syntax { line: 1, .. })));
        assert!(matches!(parse_program("p(x).\nq(y) :- x."), Err(Error::Syntax { line: 2, .. })));
        assert_eq!(parse_goal("p(x,f(x,z),z)").unwrap().to_string(), "p(x,f(x,z),z)");
    }

    #[test]
    fn amgu_examples() {
        let e = omega("[x, z]_{x,z}").extend_fresh(&var_set("uvw"));
        let theta: Substitution = "{u/x, v/f(x,z), w/z}".parse().unwrap();
        assert_eq!(amgu_subst(&e, &theta, 3), omega("[uvx, vwz]_{u,v,w,x,z}"));

        let e = two("[xy, xz]_{x,y,z}").extend_fresh(&var_set("u"));
        let r = baseline_amgu(&e, &Var::new("x"), &Term::var("u"), 3);
        assert_eq!(r, two("[uxy, uxz]_{u,x,y,z}"));

        let e = two("[uvxy, uxz]_{u,v,w,x,y,z}");
        let r = baseline_amgu(&e, &Var::new("w"), &Term::nil(), 3);
        assert_eq!(r, e);
        let r = baseline_amgu(&e, &Var::new("v"), &Term::nil(), 3);
        assert_eq!(r, two("[uxz]_{u,v,w,x,y,z}"));
    }

    #[test]
    fn aliasing_is_not_linear() {
        let e = omega("[xy]_{x,y}");
        let r = baseline_amgu(&e, &Var::new("x"), &Term::var("y"), 3);
        assert!(r.leq(&omega("[xy, x^2y^2, x^3y^3]_{x,y}")));
        assert!(matches!(&r, Element::Omega(o) if o.contains(&"xy".parse().unwrap())));
    }

    #[test]
    fn standardization_renames_clashes() {
        let c = &parse_program("p(u, v) :- q(v, w).").unwrap().clauses[0];
        let r = standardize_apart(c, &var_set("uw"));
        assert_eq!(r.to_string(), "p(u_1,v) :- q(v,w_1).");
    }

    #[test]
    fn injection_format() {
        let inj = Injection::parse(Domain::Two, "# first clause\n1 forward ↓[u^*x^*y^*]_{u,v,x,y,z}\n").unwrap();
        assert!(inj.get(1, Step::Forward).is_some());
        assert!(matches!(Injection::parse(Domain::Two, "1 sideways [x]_{x}"), Err(Error::Syntax { line: 1, .. })));
    }

    #[test]
    fn simple_program_end_to_end() {
        let program = parse_program("p(u,v,w).").unwrap();
        let goal = parse_goal("p(x,f(x,z),z)").unwrap();
        let req = AnalysisRequest::new(program, goal, omega("[x, z]_{x,z}"), Mode::Matching);
        let res = analyze(&req).unwrap();
        assert_eq!(res.answer, omega("[x, z]_{x,z}"));
        assert_eq!(res.trace[0].forward, omega("[uvx, vwz]_{u,v,w,x,z}"));
        assert_eq!(res.trace[0].entry, omega("[uv, vw]_{u,v,w}"));
        let d = diff(&req).unwrap();
        assert_eq!(d.sharing, vec![var_set("xz")]);
        assert!(d.groups.contains(&"xz".to_string()));
    }

    #[test]
    fn arity_mismatch_is_no_match() {
        let program = parse_program("p(u).").unwrap();
        let goal = parse_goal("p(x, y)").unwrap();
        let req = AnalysisRequest::new(program, goal, two("[x, y]_{x,y}"), Mode::Matching);
        assert!(analyze(&req).unwrap().answer.is_bottom());
    }

    #[test]
    fn concrete_member() {
        let program = parse_program("member(u,[u|v]).\nmember(u,[v|w]) :- member(u,w).").unwrap();
        let goal = parse_goal("member(x, [a, y])").unwrap();
        let call = ExistentialSubstitution::identity(&var_set("xy"));
        let answers = concrete_answers(&program, &goal, &call, 6, 10);
        assert_eq!(answers.len(), 2);
        assert!(answers.contains(&"[{x/a}]_{x,y}".parse().unwrap()));
        assert!(answers.contains(&"[{x/y}]_{x,y}".parse().unwrap()));
    }
}
