//! Verification machinery: random generators, correctness checks of the
//! abstract matchers against concrete matching, constructive optimality
//! witnesses, and randomized equivalence checks between implementations.
//!
//! Every suite is deterministic: trial `i` draws from a ChaCha stream keyed
//! by `(seed, i)` and results are merged in trial order.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::existential::ExistentialSubstitution;
use crate::multiset::{sum_all, Multiset};
use crate::omega::{match_omega, match_omega_traced, Origin, ShLinOmega};
use crate::sl::{match_sl, ShLinSl};
use crate::terms::{Substitution, Term};
use crate::two::{
    match2, match2_opt, match2_opt_traced, match2_ref, prop_abstraction2_check, Exp, Origin2, ShLin2, TwoGroup,
    REF_VAR_CAP,
};
use crate::var::{SetDisplay, Var, VarSet};

/// Parameters of a randomized suite. Every field but `jobs` is positive;
/// `jobs == 0` lets the thread pool pick its own width.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: usize,
    pub max_term_depth: usize,
    pub max_vars: usize,
    pub multiplicity_cap: u32,
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for TrialConfig {
    fn default() -> Self {
        TrialConfig {
            seed: 42,
            trials: 1000,
            max_term_depth: 3,
            max_vars: 5,
            multiplicity_cap: 3,
            jobs: 0,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.max_term_depth == 0 || self.max_vars == 0 || self.multiplicity_cap == 0 {
            return Err(Error::Parse(
                "trials, max_term_depth, max_vars and multiplicity_cap must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The random stream of trial `index`.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn pool_var(i: usize) -> Var {
    const NAMES: [&str; 6] = ["u", "v", "w", "x", "y", "z"];
    match NAMES.get(i) {
        Some(n) => Var::new(n),
        None => Var::new(&format!("x{}", i - NAMES.len() + 1)),
    }
}

fn tuple(args: Vec<Term>) -> Term {
    if args.is_empty() {
        Term::constant("a")
    } else {
        Term::app("t", args)
    }
}

/// Random term over `a`, `t/2` and variables drawn by `leaf`.
fn gen_term(rng: &mut ChaCha8Rng, depth: usize, leaf: &mut dyn FnMut(&mut ChaCha8Rng) -> Term) -> Term {
    if depth == 0 || rng.gen_bool(0.45) {
        if rng.gen_bool(0.15) {
            Term::constant("a")
        } else {
            leaf(rng)
        }
    } else {
        let l = gen_term(rng, depth - 1, leaf);
        let r = gen_term(rng, depth - 1, leaf);
        Term::app("t", vec![l, r])
    }
}

/// Leaf generator reusing an existing variable half of the time.
fn sharing_leaf<'a>(prefix: &'a str, seen: &'a mut Vec<Var>, counter: &'a mut usize) -> impl FnMut(&mut ChaCha8Rng) -> Term + 'a {
    move |rng| {
        if !seen.is_empty() && rng.gen_bool(0.5) {
            return Term::Var(seen.choose(rng).expect("nonempty").clone());
        }
        *counter += 1;
        let v = Var::new(&format!("_{prefix}{counter}"));
        seen.push(v.clone());
        Term::Var(v)
    }
}

fn gen_raw(u: &VarSet, cfg: &TrialConfig, rng: &mut ChaCha8Rng, prefix: &str) -> Substitution {
    let mut seen = Vec::new();
    let mut counter = 0;
    let mut theta = Substitution::new();
    let depth = cfg.max_term_depth;
    for x in u {
        if rng.gen_bool(0.85) {
            let t = gen_term(rng, depth, &mut sharing_leaf(prefix, &mut seen, &mut counter));
            theta.bind(x.clone(), t);
        }
    }
    theta
}

/// A random class over `u`: images use fresh variables, `a` and `t/2`.
pub fn gen_existential(u: &VarSet, cfg: &TrialConfig, rng: &mut ChaCha8Rng) -> ExistentialSubstitution {
    ExistentialSubstitution::canonicalize(&gen_raw(u, cfg, rng, "e"), u)
}

fn gen_interests(cfg: &TrialConfig, rng: &mut ChaCha8Rng, cap: usize) -> (VarSet, VarSet) {
    let n = rng.gen_range(1..=cfg.max_vars.min(cap).max(1));
    loop {
        let mut u1 = VarSet::new();
        let mut u2 = VarSet::new();
        for i in 0..n {
            match rng.gen_range(0..4) {
                0 => {
                    u1.insert(pool_var(i));
                }
                1 => {
                    u2.insert(pool_var(i));
                }
                _ => {
                    u1.insert(pool_var(i));
                    u2.insert(pool_var(i));
                }
            }
        }
        if !u1.is_empty() && !u2.is_empty() {
            return (u1, u2);
        }
    }
}

/// A random pair `(c1, c2)`. Most pairs have `c1` built as an instance of
/// `c2` on the common variables, so that the concrete match is defined.
pub fn gen_pair(cfg: &TrialConfig, rng: &mut ChaCha8Rng) -> (ExistentialSubstitution, ExistentialSubstitution) {
    let (u1, u2) = gen_interests(cfg, rng, usize::MAX);
    let theta2 = gen_raw(&u2, cfg, rng, "e");
    if rng.gen_bool(0.1) {
        let theta1 = gen_raw(&u1, cfg, rng, "f");
        return (
            ExistentialSubstitution::canonicalize(&theta1, &u1),
            ExistentialSubstitution::canonicalize(&theta2, &u2),
        );
    }
    let common: Vec<Var> = u1.intersection(&u2).cloned().collect();
    let exposed: VarSet = common.iter().flat_map(|x| theta2.image(x).vars()).collect();
    let mut seen = Vec::new();
    let mut counter = 0;
    let mut delta = Substitution::new();
    for e in &exposed {
        if rng.gen_bool(0.5) {
            let depth = rng.gen_range(0..=cfg.max_term_depth);
            let t = gen_term(rng, depth, &mut sharing_leaf("f", &mut seen, &mut counter));
            delta.bind(e.clone(), t);
        }
    }
    let mut theta1 = Substitution::new();
    for x in &common {
        theta1.bind(x.clone(), delta.apply(&theta2.image(x)));
    }
    seen.extend(theta1.range_vars().into_iter().filter(|v| !u1.contains(v)));
    seen.sort();
    seen.dedup();
    for x in u1.difference(&u2) {
        let t = gen_term(rng, cfg.max_term_depth, &mut sharing_leaf("f", &mut seen, &mut counter));
        theta1.bind(x.clone(), t);
    }
    (
        ExistentialSubstitution::canonicalize(&theta1, &u1),
        ExistentialSubstitution::canonicalize(&theta2, &u2),
    )
}

/// The abstract matchers under test.
#[derive(Clone, Copy)]
pub struct Matchers {
    pub omega: fn(&ShLinOmega, &ShLinOmega) -> ShLinOmega,
    pub two: fn(&ShLin2, &ShLin2) -> ShLin2,
    pub sl: fn(&ShLinSl, &ShLinSl) -> ShLinSl,
}

impl Matchers {
    pub fn standard() -> Self {
        Matchers {
            omega: match_omega,
            two: match2,
            sl: match_sl,
        }
    }

    /// Deliberately unsound matchers that drop every group linking
    /// `U₁∖U₂` with `U₂∖U₁`. Used to check that the suites can fail.
    pub fn mutant() -> Self {
        Matchers {
            omega: |e1, e2| {
                let m = match_omega(e1, e2);
                let keep = m.groups().iter().filter(|g| !links(&g.support(), e1.interest(), e2.interest()));
                ShLinOmega::new(keep.cloned(), m.interest().clone()).expect("subset of a valid element")
            },
            two: |e1, e2| {
                let m = match2(e1, e2);
                let keep = m.maximals().iter().filter(|g| !links(&g.support(), e1.interest(), e2.interest()));
                ShLin2::from_groups(keep.cloned(), m.interest().clone())
            },
            sl: |e1, e2| {
                let m = match_sl(e1, e2);
                let keep = m.sharing().iter().filter(|b| !links(b, e1.interest(), e2.interest()));
                ShLinSl::new(keep.cloned(), m.linear().clone(), m.interest().clone())
                    .expect("subset of a valid element")
            },
        }
    }
}

fn links(b: &VarSet, u1: &VarSet, u2: &VarSet) -> bool {
    b.iter().any(|v| !u2.contains(v)) && b.iter().any(|v| !u1.contains(v))
}

/// Correctness of the abstract matcher on one concrete pair. Vacuously true
/// when the concrete match is undefined.
pub fn check_match_correct(c1: &ExistentialSubstitution, c2: &ExistentialSubstitution, domain: Domain) -> bool {
    check_match_correct_with(c1, c2, domain, &Matchers::standard()).is_ok()
}

/// As [`check_match_correct`]; the error names the abstract and concrete
/// results that disagree.
pub fn check_match_correct_with(
    c1: &ExistentialSubstitution,
    c2: &ExistentialSubstitution,
    domain: Domain,
    matchers: &Matchers,
) -> std::result::Result<(), String> {
    let Some(m) = c1.matching(c2) else {
        return Ok(());
    };
    let a1 = ShLinOmega::alpha(c1);
    let a2 = ShLinOmega::alpha(c2);
    let am = ShLinOmega::alpha(&m);
    let (ok, abs, conc) = match domain {
        Domain::Omega => {
            let r = (matchers.omega)(&a1, &a2);
            (r.approximates(&m), r.to_string(), am.to_string())
        }
        Domain::Two => {
            let r = (matchers.two)(&ShLin2::alpha(&a1), &ShLin2::alpha(&a2));
            let cm = ShLin2::alpha(&am);
            (cm.leq(&r), r.to_string(), cm.to_string())
        }
        Domain::Sl => {
            let sl = |e: &ShLinOmega| ShLinSl::alpha(&ShLin2::alpha(e));
            let r = (matchers.sl)(&sl(&a1), &sl(&a2));
            let cm = sl(&am);
            (cm.leq(&r), r.to_string(), cm.to_string())
        }
    };
    if ok {
        Ok(())
    } else {
        Err(format!("abstract {abs} does not cover concrete {conc} (match {m})"))
    }
}

fn fresh_h(i: usize) -> Var {
    Var::new(&format!("_h{}", i + 1))
}

/// `θ₂` with `dom(θ₂) = u2` and one fresh variable `v_H` per distinct `H`
/// of `xs`: `θ₂(u) = t(v_{H₁}^{H₁(u)}, …)`, or `a` when no `H` contains `u`.
pub fn witness_theta2(xs: &[Multiset], u2: &VarSet) -> Substitution {
    let supp: BTreeSet<&Multiset> = xs.iter().filter(|h| !h.is_empty()).collect();
    let mut theta = Substitution::new();
    for u in u2 {
        let mut args = Vec::new();
        for (i, h) in supp.iter().enumerate() {
            for _ in 0..h.count(u) {
                args.push(Term::Var(fresh_h(i)));
            }
        }
        theta.bind(u.clone(), tuple(args));
    }
    theta
}

/// How the target group of a witness arises from the second argument.
enum Case<'a> {
    Passed,
    Matched { base: &'a Multiset, parts: &'a [Multiset] },
}

/// `θ₁` for a `θ₂` with `dom(θ₂) = U₂`, following the two cases of the
/// completeness argument on the second argument. `None` when some part has
/// no variable of `θ₂` realizing it.
fn completing_theta1(u1: &VarSet, theta2: &Substitution, u2: &VarSet, case: Case<'_>) -> Option<Substitution> {
    let common: Vec<&Var> = u1.intersection(u2).collect();
    let exposed: VarSet = common.iter().flat_map(|x| theta2.image(x).vars()).collect();
    let shared = Var::new("_w");
    let copies = |n: u32| tuple(vec![Term::Var(shared.clone()); n as usize]);
    let mut delta = Substitution::new();
    let mut theta1 = Substitution::new();
    match case {
        Case::Passed => {
            for y in &exposed {
                delta.bind(y.clone(), Term::constant("a"));
            }
            for x in u1.difference(u2) {
                theta1.bind(x.clone(), Term::constant("a"));
            }
        }
        Case::Matched { base, parts } => {
            let mut wanted: Vec<(Multiset, u32)> = Vec::new();
            for h in parts {
                match wanted.iter_mut().find(|(g, _)| g == h) {
                    Some((_, n)) => *n += 1,
                    None => wanted.push((h.clone(), 1)),
                }
            }
            let range = theta2.range_vars();
            let mut used = VarSet::new();
            for (h, n) in &wanted {
                let v = range
                    .iter()
                    .find(|v| !used.contains(*v) && theta2.preimage_var(v).restrict(u2) == *h)?;
                used.insert(v.clone());
                delta.bind(v.clone(), copies(*n));
            }
            for y in exposed.difference(&used) {
                delta.bind(y.clone(), Term::constant("a"));
            }
            for w in u1.difference(u2) {
                theta1.bind(w.clone(), copies(base.count(w)));
            }
        }
    }
    for x in common {
        theta1.bind(x.clone(), delta.apply(&theta2.image(x)));
    }
    Some(theta1)
}

/// A `θ₁ ∝ e1` such that `b ∈ α_ω(match(θ₁, c2))`.
pub fn witness_theta1(e1: &ShLinOmega, c2: &ExistentialSubstitution, b: &Multiset) -> Result<ExistentialSubstitution> {
    let s2 = ShLinOmega::alpha(c2);
    let traced = match_omega_traced(e1, &s2);
    let origin = traced.get(b).ok_or_else(|| Error::NotInMatch(b.to_string()))?;
    let u1 = e1.interest();
    let u2 = c2.interest();
    let theta2 = c2.full_rep();
    let case = match origin {
        Origin::Matched { base, parts } if !b.restrict(u1).is_empty() => Case::Matched { base, parts },
        _ => Case::Passed,
    };
    let theta1 = completing_theta1(u1, &theta2, u2, case).ok_or_else(|| Error::NotInMatch(b.to_string()))?;
    Ok(ExistentialSubstitution::canonicalize(&theta1, u1))
}

/// One witnessed group of an abstract matching result.
#[derive(Clone, Debug)]
pub struct WitnessReport {
    /// The abstract group or fact being witnessed.
    pub label: String,
    /// The concrete sharing group exhibited in the concrete match.
    pub group: Multiset,
    pub theta1: ExistentialSubstitution,
    pub theta2: ExistentialSubstitution,
    pub verified: bool,
}

/// An abstract matching instance.
#[derive(Clone, Debug)]
pub enum Instance {
    Omega(ShLinOmega, ShLinOmega),
    Two(ShLin2, ShLin2),
    Sl(ShLinSl, ShLinSl),
}

impl Instance {
    pub fn domain(&self) -> Domain {
        match self {
            Instance::Omega(..) => Domain::Omega,
            Instance::Two(..) => Domain::Two,
            Instance::Sl(..) => Domain::Sl,
        }
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instance::Omega(a, b) => write!(f, "{a} ; {b}"),
            Instance::Two(a, b) => write!(f, "{a} ; {b}"),
            Instance::Sl(a, b) => write!(f, "{a} ; {b}"),
        }
    }
}

/// A concrete pair whose match exhibits `target`, with its abstractions.
struct Witness {
    group: Multiset,
    theta1: ExistentialSubstitution,
    theta2: ExistentialSubstitution,
    alpha1: ShLinOmega,
    alpha2: ShLinOmega,
    matched: ShLinOmega,
}

fn build_witness(u1: &VarSet, u2: &VarSet, target: &Multiset, parts: Option<&[Multiset]>) -> Option<Witness> {
    let (raw2, case) = match parts {
        Some(parts) if !target.restrict(u1).is_empty() => {
            (witness_theta2(parts, u2), Case::Matched { base: target, parts })
        }
        _ => (witness_theta2(std::slice::from_ref(target), u2), Case::Passed),
    };
    let raw1 = completing_theta1(u1, &raw2, u2, case)?;
    let theta1 = ExistentialSubstitution::canonicalize(&raw1, u1);
    let theta2 = ExistentialSubstitution::canonicalize(&raw2, u2);
    let matched = ShLinOmega::alpha(&theta1.matching(&theta2)?);
    Some(Witness {
        group: target.clone(),
        alpha1: ShLinOmega::alpha(&theta1),
        alpha2: ShLinOmega::alpha(&theta2),
        theta1,
        theta2,
        matched,
    })
}

fn report(label: String, w: Option<Witness>, check: impl Fn(&Witness) -> bool, fallback: &VarSet) -> WitnessReport {
    match w {
        Some(w) => WitnessReport {
            verified: check(&w),
            label,
            group: w.group,
            theta1: w.theta1,
            theta2: w.theta2,
        },
        None => WitnessReport {
            label,
            group: Multiset::new(),
            theta1: ExistentialSubstitution::identity(fallback),
            theta2: ExistentialSubstitution::identity(fallback),
            verified: false,
        },
    }
}

/// Builds and verifies a witness pair for every group of the abstract
/// match of `inst`. For `Sl`, reports cover every sharing group and every
/// non-linear variable of the result.
///
/// Bottom arguments are rejected: no concrete pair is described by them.
pub fn check_optimality(inst: &Instance) -> Result<Vec<WitnessReport>> {
    match inst {
        Instance::Omega(e1, e2) => {
            if e1.is_bottom() || e2.is_bottom() {
                return Err(Error::Bottom(inst.to_string()));
            }
            Ok(optimality_omega(e1, e2))
        }
        Instance::Two(e1, e2) => {
            if e1.is_bottom() || e2.is_bottom() {
                return Err(Error::Bottom(inst.to_string()));
            }
            Ok(optimality_two(e1, e2).into_iter().map(|(r, _, _)| r).collect())
        }
        Instance::Sl(e1, e2) => {
            if e1.is_bottom() || e2.is_bottom() {
                return Err(Error::Bottom(inst.to_string()));
            }
            Ok(optimality_sl(e1, e2))
        }
    }
}

fn optimality_omega(e1: &ShLinOmega, e2: &ShLinOmega) -> Vec<WitnessReport> {
    let (u1, u2) = (e1.interest(), e2.interest());
    match_omega_traced(e1, e2)
        .iter()
        .map(|(x, origin)| {
            let parts = match origin {
                Origin::Passed => None,
                Origin::Matched { parts, .. } => Some(parts.as_slice()),
            };
            let w = build_witness(u1, u2, x, parts);
            let check = |w: &Witness| w.alpha1.leq(e1) && w.alpha2.leq(e2) && w.matched.contains(x);
            report(x.to_string(), w, check, u1)
        })
        .collect()
}

/// Exponent-2 concretization of a group chosen by `match′₂`, lowered to 1
/// on `U₁∩U₂` wherever the base group is linear.
fn lowered_representative(y: &TwoGroup, base: &TwoGroup, u1: &VarSet) -> Multiset {
    let lowered = TwoGroup::from_exps(y.iter().map(|(v, e)| {
        let e = if u1.contains(v) && base.get(v) == Some(Exp::One) { Exp::One } else { e };
        (v.clone(), e)
    }));
    lowered.representative()
}

/// Lifts each maximal group `o` of `match′₂(t1, t2)` to an ω instance
/// `(S₁, S₂)` with `α₂(S₁) ≤ t1`, `α₂(S₂) ≤ t2` and a group `C` of
/// `match_ω(S₁, S₂)` with `α₂(C) = o`, then witnesses `C`.
fn lift_two(
    t1: &BTreeSet<TwoGroup>,
    u1: &VarSet,
    t2: &BTreeSet<TwoGroup>,
    u2: &VarSet,
) -> Vec<(TwoGroup, Option<Witness>)> {
    let traced = match2_opt_traced(t1, u1, t2, u2);
    let maximal = crate::two::maximals(traced.keys().cloned());
    let only_u1: VarSet = u1.difference(u2).cloned().collect();
    maximal
        .into_iter()
        .map(|o| {
            let w = match &traced[&o] {
                Origin2::Passed => build_witness(u1, u2, &o.representative(), None),
                Origin2::Matched { base, chosen } => {
                    let mut parts = Vec::new();
                    for y in chosen {
                        let b = lowered_representative(y, base, u1);
                        let barred = y
                            .support_iter()
                            .filter(|v| u1.contains(*v))
                            .all(|v| base.get(v) == Some(Exp::Inf));
                        if barred {
                            parts.push(b.clone());
                        }
                        parts.push(b);
                    }
                    let c = base.restrict(&only_u1).representative().sum(&sum_all(&parts));
                    build_witness(u1, u2, &c, Some(&parts))
                }
            };
            (o, w)
        })
        .collect()
}

fn optimality_two(e1: &ShLin2, e2: &ShLin2) -> Vec<(WitnessReport, TwoGroup, Option<ShLinOmega>)> {
    let (u1, u2) = (e1.interest(), e2.interest());
    lift_two(e1.maximals(), u1, e2.maximals(), u2)
        .into_iter()
        .map(|(o, w)| {
            let matched = w.as_ref().map(|w| w.matched.clone());
            let check = |w: &Witness| {
                ShLin2::alpha(&w.alpha1).leq(e1)
                    && ShLin2::alpha(&w.alpha2).leq(e2)
                    && w.matched.groups().iter().any(|g| TwoGroup::alpha(g) == o)
            };
            (report(o.to_string(), w, check, u1), o, matched)
        })
        .collect()
}

fn optimality_sl(e1: &ShLinSl, e2: &ShLinSl) -> Vec<WitnessReport> {
    let (u1, u2) = (e1.interest(), e2.interest());
    let sl = |e: &ShLinOmega| ShLinSl::alpha(&ShLin2::alpha(e));
    let lifted: Vec<(TwoGroup, Witness, bool)> = lift_two(&e1.gamma_maximals(), u1, &e2.gamma_maximals(), u2)
        .into_iter()
        .filter_map(|(o, w)| w.map(|w| (o, w)))
        .map(|(o, w)| {
            let ok = sl(&w.alpha1).leq(e1)
                && sl(&w.alpha2).leq(e2)
                && w.matched.groups().iter().any(|g| TwoGroup::alpha(g) == o);
            (o, w, ok)
        })
        .collect();
    let result = match_sl(e1, e2);
    let mut reports = Vec::new();
    let mut cover = |label: String, wanted: &dyn Fn(&Multiset) -> bool| {
        let found = lifted
            .iter()
            .filter(|(_, _, ok)| *ok)
            .find_map(|(_, w, _)| w.matched.groups().iter().find(|g| wanted(g)).map(|g| (w, g.clone())));
        reports.push(match found {
            Some((w, g)) => WitnessReport {
                label,
                group: g,
                theta1: w.theta1.clone(),
                theta2: w.theta2.clone(),
                verified: true,
            },
            None => WitnessReport {
                label,
                group: Multiset::new(),
                theta1: ExistentialSubstitution::identity(u1),
                theta2: ExistentialSubstitution::identity(u2),
                verified: false,
            },
        });
    };
    for b in result.sharing() {
        let label = format!("{{{}}}", b.iter().map(|v| v.name()).collect::<Vec<_>>().join(","));
        cover(label, &|g: &Multiset| g.support() == *b);
    }
    for v in result.interest().difference(result.linear()) {
        cover(format!("nonlinear {v}"), &|g: &Multiset| g.count(v) >= 2);
    }
    reports
}

/// A failed trial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub trial: usize,
    pub instance: String,
    pub detail: String,
}

/// Outcome of a randomized suite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub check: String,
    pub domain: Option<Domain>,
    pub seed: u64,
    pub trials: usize,
    pub passed: usize,
    /// Trials whose concrete match was undefined.
    pub vacuous: usize,
    /// Verified witness reports, for optimality suites.
    pub witnesses: usize,
    pub failed: usize,
    /// The first failures, in trial order.
    pub failures: Vec<Failure>,
}

/// Number of failures kept in a report.
pub const MAX_REPORTED_FAILURES: usize = 5;

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let domain = self.domain.map_or("all".to_string(), |d| d.to_string());
        let _ = writeln!(
            out,
            "check={} domain={} seed={} trials={} passed={} vacuous={} witnesses={} failed={}",
            self.check, domain, self.seed, self.trials, self.passed, self.vacuous, self.witnesses, self.failed
        );
        for f in &self.failures {
            let _ = writeln!(out, "failure trial={} instance={} detail={}", f.trial, f.instance, f.detail);
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

enum Outcome {
    Pass { vacuous: bool, witnesses: usize },
    Fail(Failure),
}

fn run_suite(
    check: &str,
    domain: Option<Domain>,
    cfg: &TrialConfig,
    trial: impl Fn(usize, &mut ChaCha8Rng) -> Outcome + Sync,
) -> Result<SuiteReport> {
    cfg.validate()?;
    let run = || {
        (0..cfg.trials)
            .into_par_iter()
            .map(|i| trial(i, &mut trial_rng(cfg.seed, i)))
            .collect::<Vec<_>>()
    };
    let outcomes = if cfg.jobs == 0 {
        run()
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build()
            .map_err(|e| Error::Parse(format!("cannot start {} workers: {e}", cfg.jobs)))?
            .install(run)
    };
    let mut rep = SuiteReport {
        check: check.to_string(),
        domain,
        seed: cfg.seed,
        trials: cfg.trials,
        passed: 0,
        vacuous: 0,
        witnesses: 0,
        failed: 0,
        failures: Vec::new(),
    };
    for o in outcomes {
        match o {
            Outcome::Pass { vacuous, witnesses } => {
                rep.passed += 1;
                rep.vacuous += usize::from(vacuous);
                rep.witnesses += witnesses;
            }
            Outcome::Fail(f) => {
                rep.failed += 1;
                if rep.failures.len() < MAX_REPORTED_FAILURES {
                    rep.failures.push(f);
                }
            }
        }
    }
    Ok(rep)
}

/// Correctness of one matcher over `cfg.trials` random concrete pairs.
pub fn run_correctness(domain: Domain, cfg: &TrialConfig, matchers: &Matchers) -> Result<SuiteReport> {
    run_suite("correctness", Some(domain), cfg, |i, rng| {
        let (c1, c2) = gen_pair(cfg, rng);
        let vacuous = c1.matching(&c2).is_none();
        match check_match_correct_with(&c1, &c2, domain, matchers) {
            Ok(()) => Outcome::Pass { vacuous, witnesses: 0 },
            Err(detail) => Outcome::Fail(Failure {
                trial: i,
                instance: format!("{c1} ; {c2}"),
                detail,
            }),
        }
    })
}

fn gen_multiset(u: &VarSet, cap: u32, rng: &mut ChaCha8Rng) -> Multiset {
    let mut m = Multiset::new();
    for v in u {
        if rng.gen_bool(0.5) {
            m.add(v.clone(), rng.gen_range(1..=cap));
        }
    }
    m
}

fn gen_two_group(u: &VarSet, rng: &mut ChaCha8Rng) -> TwoGroup {
    let mut exps = Vec::new();
    for v in u {
        if rng.gen_bool(0.5) {
            exps.push((v.clone(), if rng.gen_bool(0.5) { Exp::One } else { Exp::Inf }));
        }
    }
    TwoGroup::from_exps(exps)
}

fn gen_varset(u: &VarSet, rng: &mut ChaCha8Rng) -> VarSet {
    u.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect()
}

/// A random abstract instance with `|U₁ ∪ U₂| ≤ 5` and small groups.
pub fn gen_instance(domain: Domain, cfg: &TrialConfig, rng: &mut ChaCha8Rng) -> Instance {
    let (u1, u2) = gen_interests(cfg, rng, 5);
    let cap = cfg.multiplicity_cap;
    match domain {
        Domain::Omega => {
            let el = |u: &VarSet, rng: &mut ChaCha8Rng| {
                let n = rng.gen_range(0..=3);
                let gs: Vec<Multiset> = (0..n).map(|_| gen_multiset(u, cap, rng)).collect();
                ShLinOmega::new(gs.into_iter().chain([Multiset::new()]), u.clone()).expect("groups over u")
            };
            Instance::Omega(el(&u1, rng), el(&u2, rng))
        }
        Domain::Two => {
            let el = |u: &VarSet, rng: &mut ChaCha8Rng| {
                let n = rng.gen_range(0..=3);
                let gs: Vec<TwoGroup> = (0..n).map(|_| gen_two_group(u, rng)).collect();
                ShLin2::new(gs.into_iter().chain([TwoGroup::new()]), u.clone()).expect("groups over u")
            };
            Instance::Two(el(&u1, rng), el(&u2, rng))
        }
        Domain::Sl => {
            let el = |u: &VarSet, rng: &mut ChaCha8Rng| {
                let n = rng.gen_range(0..=3);
                let gs: Vec<VarSet> = (0..n).map(|_| gen_varset(u, rng)).collect();
                let lin = gen_varset(u, rng);
                ShLinSl::new(gs.into_iter().chain([VarSet::new()]), lin, u.clone()).expect("groups over u")
            };
            Instance::Sl(el(&u1, rng), el(&u2, rng))
        }
    }
}

/// Optimality witnesses over `cfg.trials` random abstract instances.
pub fn run_optimality(domain: Domain, cfg: &TrialConfig) -> Result<SuiteReport> {
    run_suite("optimality", Some(domain), cfg, |i, rng| {
        let inst = gen_instance(domain, cfg, rng);
        let failure = |detail: String| {
            Outcome::Fail(Failure {
                trial: i,
                instance: inst.to_string(),
                detail,
            })
        };
        match check_optimality(&inst) {
            Err(e) => failure(e.to_string()),
            Ok(reports) => match reports.iter().find(|r| !r.verified) {
                Some(r) => failure(format!("group {} not witnessed", r.label)),
                None => Outcome::Pass {
                    vacuous: false,
                    witnesses: reports.len(),
                },
            },
        }
    })
}

/// The matching result of `match_sl` recomputed through 2-sharing.
pub fn match_sl_via_two(e1: &ShLinSl, e2: &ShLinSl) -> ShLinSl {
    let interest: VarSet = e1.interest().union(e2.interest()).cloned().collect();
    let groups = match2_opt(&e1.gamma_maximals(), e1.interest(), &e2.gamma_maximals(), e2.interest());
    ShLinSl::alpha(&ShLin2::from_groups(groups, interest))
}

/// Randomized equality of `match2_ref` with `match2`, and of `match_sl`
/// with its reconstruction through 2-sharing.
pub fn check_equivalences(cfg: &TrialConfig) -> Result<SuiteReport> {
    run_suite("equivalence", None, cfg, |i, rng| {
        let Instance::Two(a1, a2) = gen_instance(Domain::Two, cfg, rng) else {
            unreachable!("requested a two instance")
        };
        let reference = match2_ref(&a1, &a2, REF_VAR_CAP).expect("instances stay under the cap");
        let fast = match2(&a1, &a2);
        if reference != fast {
            return Outcome::Fail(Failure {
                trial: i,
                instance: format!("{a1} ; {a2}"),
                detail: format!("reference {reference} vs maximal-element {fast}"),
            });
        }
        let Instance::Sl(s1, s2) = gen_instance(Domain::Sl, cfg, rng) else {
            unreachable!("requested an sl instance")
        };
        let direct = match_sl(&s1, &s2);
        let via = match_sl_via_two(&s1, &s2);
        if direct != via {
            return Outcome::Fail(Failure {
                trial: i,
                instance: format!("{s1} ; {s2}"),
                detail: format!("direct {direct} vs through 2-sharing {via}"),
            });
        }
        Outcome::Pass {
            vacuous: false,
            witnesses: 0,
        }
    })
}

/// The four 2-sharing abstraction laws on random
/// `(B, V, 𝒳)` triples.
pub fn check_abstraction2(cfg: &TrialConfig) -> Result<SuiteReport> {
    run_suite("abstraction2", Some(Domain::Two), cfg, |i, rng| {
        let n = rng.gen_range(1..=cfg.max_vars.clamp(1, 5));
        let u: VarSet = (0..n).map(pool_var).collect();
        let b = gen_multiset(&u, cfg.multiplicity_cap, rng);
        let v = gen_varset(&u, rng);
        let xs: Vec<Multiset> = (0..rng.gen_range(0..=3))
            .map(|_| gen_multiset(&u, cfg.multiplicity_cap, rng))
            .collect();
        if prop_abstraction2_check(&b, &v, &xs) {
            Outcome::Pass {
                vacuous: false,
                witnesses: 0,
            }
        } else {
            let names: Vec<String> = xs.iter().map(Multiset::to_string).collect();
            Outcome::Fail(Failure {
                trial: i,
                instance: format!("B={b} V={} X={{{}}}", SetDisplay(&v), names.join(", ")),
                detail: "abstraction law violated".to_string(),
            })
        }
    })
}
