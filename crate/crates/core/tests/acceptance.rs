//! Acceptance suite: one line per criterion, each checked at its pinned
//! tolerance against oracles computed here from literal coefficients.

mod common;

use std::f64::consts::FRAC_PI_2;
use std::panic::{self, AssertUnwindSafe};

use common::{code, path_str, qpp, stdout};
use qpp::constructions::{
    cabello_scenario, family_delta_signed_overlap, hardy_scenario, single_qubit_scenario, DELTA_MINUS, DELTA_PLUS,
};
use qpp::hilbert::{self, Bit, TOL_CHECK};
use qpp::nchv::{contradiction_trace, enumerate_assignments, Status};
use qpp::optimizer::family_feasible_p;
use qpp::prepost::{abl_probability, forced_values, selection_probability};
use qpp::report::Report;
use qpp::scenario::{load, save, ForcedValue, Justification, PrePostScenario};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Literal real coordinates in the basis (A⊗B, A⊗B⊥, A⊥⊗B, A⊥⊗B⊥).
fn literal(label: &str) -> [f64; 4] {
    let (r2, r3, r6, r8) = (2f64.sqrt(), 3f64.sqrt(), 6f64.sqrt(), 8f64.sqrt());
    let k = 2.0 * r3;
    match label {
        "pre" => [1.0, 0.0, 0.0, 0.0],
        "post" => [1.0 / 3.0, 0.0, -r8 / 3.0, 0.0],
        "alpha" => [0.0, 0.0, 0.0, 1.0],
        "beta+" => [0.0, 0.5, r3 / 2.0, 0.0],
        "beta-" => [0.0, 0.5, -r3 / 2.0, 0.0],
        "gamma+" => [r8 / k, -r3 / k, 1.0 / k, 0.0],
        "gamma-" => [r8 / k, r3 / k, 1.0 / k, 0.0],
        "delta+" => [2.0 / k, r6 / k, -r2 / k, 0.0],
        "delta-" => [-2.0 / k, r6 / k, r2 / k, 0.0],
        other => panic!("no literal state {other}"),
    }
}

fn dot(u: &[f64; 4], v: &[f64; 4]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

const SEVEN: [&str; 7] = ["alpha", "beta+", "beta-", "gamma+", "gamma-", "delta+", "delta-"];

fn golden_fifth() -> f64 {
    ((5f64.sqrt() - 1.0) / 2.0).powi(5)
}

fn report(args: &[&str]) -> Report {
    let out = qpp(args);
    assert_eq!(code(&out), 0, "qpp {args:?} exited {}", code(&out));
    let r = Report::from_json(&stdout(&out)).expect("report parses");
    assert!(r.is_consistent());
    r
}

/// Recursive search for an admissible assignment extending `forced`.
fn admissible_exists(s: &PrePostScenario, forced: &[ForcedValue]) -> bool {
    fn go(s: &PrePostScenario, labels: &[&str], forced: &[ForcedValue], values: &mut Vec<u8>) -> bool {
        if values.len() == labels.len() {
            let v = |l: &str| values[labels.iter().position(|x| *x == l).unwrap()] as u32;
            return s
                .contexts()
                .iter()
                .all(|c| c.members.iter().map(|m| v(m)).sum::<u32>() == 1)
                && s.exclusive_pairs().iter().all(|(a, b)| v(a) + v(b) < 2);
        }
        let label = labels[values.len()];
        for bit in [0u8, 1] {
            if forced.iter().any(|f| f.label == label && f.bit.as_u8() != bit) {
                continue;
            }
            values.push(bit);
            if go(s, labels, forced, values) {
                return true;
            }
            values.pop();
        }
        false
    }
    let labels: Vec<&str> = s.labels().collect();
    go(s, &labels, forced, &mut Vec::new())
}

fn ac1() {
    let r = report(&["verify", "cabello", "--json"]);
    let oracle = dot(&literal("post"), &literal("pre")).powi(2);
    assert!((oracle - 1.0 / 9.0).abs() < 1e-15);
    let check = r.get("selection probability").expect("probability check");
    assert!(check.pass);
    let p = r.get_value("selection probability").unwrap();
    assert!((p - 1.0 / 9.0).abs() < 1e-12, "p = {p}");
    assert!(check.deviation.unwrap() < 1e-12);
}

fn ac2() {
    let s = cabello_scenario();
    for ctx in s.contexts() {
        let ops: Vec<_> = ctx
            .members
            .iter()
            .map(|m| s.projector(m).unwrap().operator().clone())
            .collect();
        assert!(hilbert::is_resolution_of_identity(&ops, 1e-12).unwrap());
        assert!(hilbert::identity_deviation(&ops).unwrap() < 1e-12);

        // Oracle: Σ|x⟩⟨x| − I from the literal coordinates.
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                let sum: f64 = ctx.members.iter().map(|m| literal(m)[i] * literal(m)[j]).sum();
                worst = worst.max((sum - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        assert!(worst < 1e-12, "literal context deviates by {worst}");
    }
    for l in SEVEN {
        let built: Vec<f64> = s.projector(l).unwrap().state().amps().iter().map(|a| a.re).collect();
        let lit = literal(l);
        let same = built.iter().zip(&lit).all(|(a, b)| (a - b).abs() < 1e-15);
        let opposite = built.iter().zip(&lit).all(|(a, b)| (a + b).abs() < 1e-15);
        assert!(same || opposite, "{l}: built {built:?} vs literal {lit:?}");
    }
    let (dp, dm) = (s.projector(DELTA_PLUS).unwrap(), s.projector(DELTA_MINUS).unwrap());
    assert!(hilbert::vdot(dp.state().amps(), dm.state().amps()).norm() < 1e-12);
    assert!(dot(&literal("delta+"), &literal("delta-")).abs() < 1e-12);
}

fn ac3() {
    let fv = forced_values(&cabello_scenario(), TOL_CHECK).unwrap();
    let got: Vec<(&str, Bit, Justification)> = fv.iter().map(|f| (f.label.as_str(), f.bit, f.justification)).collect();
    use Justification::*;
    assert_eq!(
        got,
        [
            ("alpha", Bit::Zero, Prediction),
            ("beta+", Bit::Zero, Prediction),
            ("beta-", Bit::Zero, Prediction),
            ("gamma+", Bit::Zero, Retrodiction),
            ("gamma-", Bit::Zero, Retrodiction),
        ]
    );
    // Oracle: the predicted zeros are orthogonal to pre, the retrodicted ones to post.
    for l in ["alpha", "beta+", "beta-"] {
        assert!(dot(&literal(l), &literal("pre")).abs() < 1e-15);
    }
    for l in ["gamma+", "gamma-"] {
        assert!(dot(&literal(l), &literal("pre")).abs() > 0.1);
        assert!(dot(&literal(l), &literal("post")).abs() < 1e-15);
    }
    for l in ["delta+", "delta-"] {
        assert!(dot(&literal(l), &literal("pre")).abs() > 0.1);
        assert!(dot(&literal(l), &literal("post")).abs() > 0.1);
    }
}

fn ac4() {
    let s = cabello_scenario();
    let forced = forced_values(&s, TOL_CHECK).unwrap();
    let r = enumerate_assignments(&s, &forced).unwrap();
    assert_eq!(r.status, Status::Unsat);
    assert_eq!(r.assignments_examined, 128);
    assert!(!admissible_exists(&s, &forced));
    let trace = contradiction_trace(&s, TOL_CHECK).unwrap();
    assert_eq!(
        trace.conclusions(),
        ["delta+=1", "delta-=1", "CONFLICT(delta+, delta-)"]
    );
    assert_eq!(trace.steps.last().unwrap().rule.to_string(), "exclusivity");
    for skip in 0..forced.len() {
        let mut subset = forced.clone();
        subset.remove(skip);
        assert_eq!(enumerate_assignments(&s, &subset).unwrap().status, Status::Sat);
        assert!(admissible_exists(&s, &subset), "dropping {}", forced[skip].label);
    }
}

fn ac5() {
    let s = cabello_scenario();
    let (pre, post) = (literal("pre"), literal("post"));
    let overlap = dot(&post, &pre);
    for l in SEVEN {
        let x = literal(l);
        let on = dot(&post, &x) * dot(&x, &pre);
        let (n1, n0) = (on * on, (overlap - on).powi(2));
        let oracle = n1 / (n1 + n0);
        let expected = if l.starts_with("delta") { 1.0 } else { 0.0 };
        assert!((oracle - expected).abs() < 1e-12, "oracle {l}");
        let got = abl_probability(&s, l, TOL_CHECK).unwrap();
        assert!((got - expected).abs() < 1e-12, "{l}: {got}");
    }
}

fn ac6() {
    let r = report(&["optimize", "hardy", "--grid", "64", "--json"]);
    let obj = r.get_value("objective").unwrap();
    assert!((obj - golden_fifth()).abs() < 1e-6, "objective {obj}");
    assert!(obj < 1.0 / 9.0);
    assert!((golden_fifth() - 0.09016994374947428).abs() < 1e-16);
}

/// ⟨δ+|δ−⟩ of the real family, with δ± ∝ (c/p, ±q·s, −p·s, 0).
fn family_overlap(c: f64, p: f64) -> f64 {
    let s2 = 1.0 - c * c;
    let q2 = 1.0 - p * p;
    let a = c * c / (p * p);
    (a - q2 * s2 + p * p * s2) / (a + s2)
}

fn ac7() {
    let r = report(&["optimize", "cabello-family", "--grid", "64", "--json"]);
    let obj = r.get_value("objective").unwrap();
    let (c, p) = (r.get_value("c").unwrap(), r.get_value("p").unwrap());
    assert!((obj - 1.0 / 9.0).abs() < 1e-6, "objective {obj}");
    assert!((c - 1.0 / 3.0).abs() < 1e-4, "c = {c}");
    assert!((p - 0.5).abs() < 1e-4, "p = {p}");

    for (c, p) in [(0.2, 0.3), (1.0 / 3.0, 0.5), (0.6, 0.8)] {
        let lib = family_delta_signed_overlap(c, p).unwrap();
        assert!((lib - family_overlap(c, p)).abs() < 1e-12);
    }
    assert!(family_overlap(1.0 / 3.0, 0.5).abs() < 1e-15);

    // Dense sweep: the overlap never reaches zero for these c.
    for c in [0.34, 0.5] {
        let n = 200_000;
        let min = (1..n)
            .map(|i| family_overlap(c, i as f64 / n as f64))
            .fold(f64::INFINITY, f64::min);
        assert!(min > 1e-9, "c = {c}: overlap reaches {min}");
        assert_eq!(family_feasible_p(c, 1e-9), None, "c = {c}");
    }
}

fn ac8() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let a = rng.random_range(0.05..FRAC_PI_2 - 0.05);
        let b = rng.random_range(0.05..FRAC_PI_2 - 0.05);
        let s = hardy_scenario(a, b).unwrap();
        for ctx in s.contexts() {
            let ops: Vec<_> = ctx
                .members
                .iter()
                .map(|m| s.projector(m).unwrap().operator().clone())
                .collect();
            assert!(hilbert::is_resolution_of_identity(&ops, 1e-9).unwrap(), "({a}, {b})");
        }
        let fv = forced_values(&s, TOL_CHECK).unwrap();
        let got: Vec<(&str, u8, Justification)> = fv
            .iter()
            .map(|f| (f.label.as_str(), f.bit.as_u8(), f.justification))
            .collect();
        use Justification::*;
        assert_eq!(
            got,
            [
                ("hat_alpha", 0, Prediction),
                ("hat_beta+", 0, Prediction),
                ("hat_beta-", 0, Prediction),
                ("hat_gamma+", 0, Retrodiction),
                ("hat_gamma-", 0, Retrodiction),
            ],
            "({a}, {b})"
        );
        assert_eq!(enumerate_assignments(&s, &fv).unwrap().status, Status::Unsat);
        assert!(!admissible_exists(&s, &fv));
        let trace = contradiction_trace(&s, TOL_CHECK).unwrap();
        assert_eq!(trace.steps.len(), 3);
        assert!(selection_probability(&s) <= golden_fifth() + 1e-12);
    }
}

fn ac9() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for seed in 0..100 {
        let n = rng.random_range(1..=10);
        let s = single_qubit_scenario(n, seed).unwrap();
        let fv = forced_values(&s, TOL_CHECK).unwrap();
        let r = enumerate_assignments(&s, &fv).unwrap();
        assert_eq!(r.status, Status::Sat, "seed {seed}");
        assert!(!r.witnesses.is_empty());
    }
}

fn ac10() {
    for s in [cabello_scenario(), hardy_scenario(0.7, 1.1).unwrap()] {
        let once = save(&s);
        let back = load(&once).unwrap();
        assert_eq!(back, s);
        assert_eq!(save(&back), once);
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cabello.json");
    std::fs::write(&path, save(&load(&save(&cabello_scenario())).unwrap())).unwrap();
    let built = report(&["verify", "cabello", "--json"]);
    let reloaded = report(&["verify", "cabello", "--json", "--scenario", path_str(&path)]);
    assert!(reloaded.overall());
    assert_eq!(reloaded.checks, built.checks);
    for name in [
        "selection probability",
        "forced values",
        "noncontextual assignments",
        "contradiction trace",
    ] {
        assert!(reloaded.get(name).is_some_and(|c| c.pass), "{name}");
    }
}

#[test]
fn acceptance() {
    let criteria: [(&str, &str, fn()); 10] = [
        ("AC1", "cabello selection probability is 1/9 within 1e-12", ac1),
        (
            "AC2",
            "cabello contexts resolve identity and delta pair is exclusive within 1e-12",
            ac2,
        ),
        (
            "AC3",
            "exactly five forced zeros with prediction/retrodiction split",
            ac3,
        ),
        (
            "AC4",
            "UNSAT over 128 assignments, 3-step trace, each forced value necessary",
            ac4,
        ),
        (
            "AC5",
            "ABL probabilities 1 for delta pair and 0 otherwise within 1e-12",
            ac5,
        ),
        (
            "AC6",
            "optimize hardy reaches ((sqrt5-1)/2)^5 within 1e-6, below 1/9",
            ac6,
        ),
        (
            "AC7",
            "cabello family maximum 1/9 at (1/3, 1/2); c = 0.34 and 0.5 infeasible",
            ac7,
        ),
        (
            "AC8",
            "20 seeded hardy angle pairs share the contradiction structure",
            ac8,
        ),
        ("AC9", "100 seeded single-qubit scenarios are SAT", ac9),
        (
            "AC10",
            "save/load/save is byte-idempotent and reload reproduces verify",
            ac10,
        ),
    ];
    let mut lines = Vec::new();
    let mut failed = 0;
    for (id, what, f) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(f));
        let line = match outcome {
            Ok(()) => format!("[PASS] {id} {what}"),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                format!("[FAIL] {id} {what}: {msg}")
            }
        };
        println!("{line}");
        lines.push(line);
    }
    assert_eq!(failed, 0, "acceptance failures:\n{}", lines.join("\n"));
}
