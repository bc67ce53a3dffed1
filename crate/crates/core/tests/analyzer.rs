use rand::Rng;
use rand_chacha::ChaCha8Rng;

use shlin::analyzer::{
    analyze, concrete_answers, diff, parse_goal, parse_program, AnalysisRequest, Element, Injection, Mode, Program,
    Step,
};
use shlin::oracle::{gen_existential, trial_rng, TrialConfig};
use shlin::{var_set, Domain, Term};

const MEMBER: &str = "member(u, [u|v]).\nmember(u, [v|w]) :- member(u, w).\n";

fn el(domain: Domain, s: &str) -> Element {
    Element::parse(domain, s).unwrap()
}

fn member_request(mode: Mode, injected: bool) -> AnalysisRequest {
    let mut req = AnalysisRequest::new(
        parse_program(MEMBER).unwrap(),
        parse_goal("member(x, [y])").unwrap(),
        el(Domain::Two, "[xy, xz]_{x,y,z}"),
        mode,
    );
    if injected {
        req.injection
            .insert(1, Step::Forward, el(Domain::Two, "↓[u^∞x^∞y^∞]_{u,v,x,y,z}"));
    }
    req
}

#[test]
fn simple_clause_both_modes() {
    let program = parse_program("p(u,v,w).").unwrap();
    let goal = parse_goal("p(x,f(x,z),z)").unwrap();
    let call = el(Domain::Omega, "[x, z]_{x,z}");
    let req = AnalysisRequest::new(program, goal, call, Mode::Matching);
    assert_eq!(analyze(&req).unwrap().answer, el(Domain::Omega, "[x, z]_{x,z}"));

    let mut mgu = req.clone();
    mgu.mode = Mode::Mgu;
    let answer = analyze(&mgu).unwrap().answer;
    let Element::Omega(o) = &answer else { panic!("omega expected") };
    assert!(o.contains(&"xz".parse().unwrap()));

    let d = diff(&req).unwrap();
    assert_eq!(d.sharing, vec![var_set("xz")]);
}

#[test]
fn member_with_injection() {
    let m = analyze(&member_request(Mode::Matching, true)).unwrap();
    assert_eq!(m.answer, el(Domain::Two, "↓[x^∞y^∞]_{x,y,z}"));
    let g = analyze(&member_request(Mode::Mgu, true)).unwrap();
    assert_eq!(g.answer, el(Domain::Two, "↓[x^∞y^∞, x^∞y^∞z^∞]_{x,y,z}"));

    let first = &m.trace[0];
    assert_eq!(first.entry, el(Domain::Two, "↓[u^*]_{u,v}"));
    let second = &m.trace[1];
    assert_eq!(second.forward, el(Domain::Two, "[uvxy, uxz]_{u,v,w,x,y,z}"));
    assert_eq!(second.entry, el(Domain::Two, "[uv, u]_{u,v,w}"));
    assert_eq!(second.exit, el(Domain::Two, "[0]_{u,v,w}"));
    assert_eq!(second.answer, el(Domain::Two, "[0]_{x,y,z}"));

    let d = diff(&member_request(Mode::Matching, true)).unwrap();
    assert_eq!(d.groups, vec!["x^*y^*z^*".to_string()]);
}

#[test]
fn member_without_injection_is_sound_but_coarser() {
    let m = analyze(&member_request(Mode::Matching, false)).unwrap();
    assert!(el(Domain::Two, "↓[x^∞y^∞]_{x,y,z}").leq(&m.answer));
    let text = "1 forward ↓[u^*x^*y^*]_{u,v,x,y,z}\n";
    assert_eq!(
        Injection::parse(Domain::Two, text).unwrap(),
        member_request(Mode::Matching, true).injection
    );
}

#[test]
fn ground_call_modes_agree() {
    let program = parse_program("p(u,v,w).").unwrap();
    let goal = parse_goal("p(x,f(x,z),z)").unwrap();
    let req = AnalysisRequest::new(program, goal, el(Domain::Omega, "[0]_{x,z}"), Mode::Matching);
    let d = diff(&req).unwrap();
    assert!(d.groups.is_empty() && d.sharing.is_empty());
}

#[test]
fn analysis_is_deterministic() {
    let a = analyze(&member_request(Mode::Mgu, false)).unwrap();
    let b = analyze(&member_request(Mode::Mgu, false)).unwrap();
    assert_eq!(a.answer, b.answer);
    assert_eq!(a.memo, b.memo);
    assert_eq!(a.iterations, b.iterations);
}

const PREDS: [(&str, usize); 3] = [("p", 1), ("q", 2), ("r", 2)];
const CLAUSE_VARS: [&str; 3] = ["u", "v", "w"];

fn random_term(rng: &mut ChaCha8Rng, vars: &[&str], depth: usize) -> Term {
    match rng.gen_range(0..if depth == 0 { 3 } else { 6 }) {
        0 => Term::constant("a"),
        1 | 2 => Term::var(vars[rng.gen_range(0..vars.len())]),
        3 => Term::app("f", vec![random_term(rng, vars, depth - 1)]),
        4 => Term::app("g", vec![random_term(rng, vars, depth - 1), random_term(rng, vars, depth - 1)]),
        _ => Term::cons(random_term(rng, vars, depth - 1), Term::nil()),
    }
}

fn random_atom(rng: &mut ChaCha8Rng, vars: &[&str]) -> shlin::analyzer::Atom {
    let (pred, arity) = PREDS[rng.gen_range(0..PREDS.len())];
    shlin::analyzer::Atom {
        pred: pred.to_string(),
        args: (0..arity).map(|_| random_term(rng, vars, 2)).collect(),
    }
}

fn random_program(rng: &mut ChaCha8Rng) -> Program {
    let mut clauses = Vec::new();
    for _ in 0..rng.gen_range(2..=5) {
        let head = random_atom(rng, &CLAUSE_VARS);
        let body = (0..rng.gen_range(0..=2)).map(|_| random_atom(rng, &CLAUSE_VARS)).collect();
        clauses.push(shlin::analyzer::Clause { head, body });
    }
    Program { clauses }
}

/// Every concrete answer found by bounded SLD resolution is described by
/// the abstract answer, in every domain and mode. Returns the number of
/// non-vacuous checks.
fn soundness_trials(domain: Domain, mode: Mode, trials: usize, seed: u64) -> usize {
    let cfg = TrialConfig {
        max_term_depth: 2,
        ..TrialConfig::default()
    };
    let mut checked = 0;
    for i in 0..trials {
        let mut rng = trial_rng(seed, i);
        let program = random_program(&mut rng);
        let goal = random_atom(&mut rng, &["x", "y", "z"]);
        let call = gen_existential(&goal.vars(), &cfg, &mut rng);
        let req = AnalysisRequest::new(program.clone(), goal.clone(), Element::alpha(domain, &call), mode);
        let answer = match analyze(&req) {
            Ok(r) => r.answer,
            Err(e) => panic!("trial {i}: {e}"),
        };
        for c in concrete_answers(&program, &goal, &call, 6, 20) {
            let abs = Element::alpha(domain, &c).saturate(req.omega_cap);
            assert!(
                abs.leq(&answer),
                "trial {i}: {domain} {} answer {answer} misses {abs}\nprogram: {:?}\ngoal: {goal} call: {call}",
                mode.name(),
                program.clauses.iter().map(|c| c.to_string()).collect::<Vec<_>>()
            );
            checked += 1;
        }
    }
    checked
}

#[test]
fn random_programs_are_analyzed_soundly() {
    for domain in Domain::ALL {
        for mode in [Mode::Matching, Mode::Mgu] {
            let checked = soundness_trials(domain, mode, 1000, 11);
            assert!(checked > 100, "{domain} {}: only {checked} concrete answers", mode.name());
        }
    }
}

#[test]
fn matching_is_never_coarser_than_mgu() {
    let cfg = TrialConfig::default();
    for domain in [Domain::Two, Domain::Sl] {
        for i in 0..300 {
            let mut rng = trial_rng(5, i);
            let program = random_program(&mut rng);
            let goal = random_atom(&mut rng, &["x", "y", "z"]);
            let call = gen_existential(&goal.vars(), &cfg, &mut rng);
            let req = AnalysisRequest::new(program, goal, Element::alpha(domain, &call), Mode::Matching);
            let d = diff(&req).unwrap();
            assert!(d.matching.leq(&d.mgu), "trial {i}: {} vs {}", d.matching, d.mgu);
        }
    }
}
