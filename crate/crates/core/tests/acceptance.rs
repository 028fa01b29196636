//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, then the
//! assertion. Run with `cargo test --test acceptance -- --nocapture` to see
//! the lines.

use std::f64::consts::PI;
use std::time::Instant;

use fdgen::exactmath::{factorial, moment_sum};
use fdgen::gridops::{normalize_composite, product_rule_check};
use fdgen::numdiff::geometric_grid;
use fdgen::taylorseries::classical_backward_coefficient;
use fdgen::{
    backward_centered, centered_average_formula, centered_formula, convergence_study, error_series, flatten,
    forward_centered, general_defcor, int, interior_centered, oracle_weights, rat, ConvergenceReport,
    CorrectionFormula, FormulaId, GridFunction, OperatorExpr, Rational,
};
use num_bigint::BigInt;
use num_traits::Zero;

fn listed(failures: &[String]) -> String {
    if failures.is_empty() {
        String::new()
    } else {
        format!(": {}", failures.join("; "))
    }
}

fn report(criterion: &str, passed: bool, detail: &str, started: Instant) {
    let status = if passed { "PASS" } else { "FAIL" };
    println!(
        "criterion {criterion} [{status}] {detail} ({:.2} s)",
        started.elapsed().as_secs_f64()
    );
}

/// `numer / (i! 2^two_power)`, the printed table form.
fn printed(numer: i64, i: u32, two_power: u32) -> Rational {
    Rational::new(BigInt::from(numer), factorial(i) * BigInt::from(2).pow(two_power))
}

fn table(f: &CorrectionFormula) -> Vec<(u32, Rational)> {
    f.table_coefficients()
}

fn lookup(f: &CorrectionFormula, index: u32) -> Rational {
    table(f)
        .into_iter()
        .find(|(i, _)| *i == index)
        .map(|(_, c)| c)
        .expect("coefficient present")
}

#[test]
fn criterion_1_table_reproduction() {
    let started = Instant::now();
    let mut failures = Vec::new();

    // Central table: even entries from the averaged family, odd from the derivative one.
    let central = [
        (2, rat(1, 8)),
        (3, rat(1, 24)),
        (4, printed(-18, 4, 5)),
        (5, printed(-18, 5, 5)),
        (6, printed(450, 6, 7)),
        (7, printed(450, 7, 7)),
        (8, printed(-22050, 8, 9)),
        (9, printed(-22050, 9, 9)),
        (10, printed(1786050, 10, 11)),
        (11, printed(1786050, 11, 11)),
    ];
    let odd = centered_formula(5).unwrap();
    let even = centered_average_formula(5).unwrap();
    for (i, expected) in &central {
        let got = if i % 2 == 0 {
            lookup(&even, *i)
        } else {
            lookup(&odd, *i)
        };
        if &got != expected {
            failures.push(format!("c_{i} = {got}, expected {expected}"));
        }
    }

    let interior: [&[(i64, i64)]; 4] = [
        &[(9, 8), (9, 8)],
        &[(25, 8), (125, 24), (125, 128), (125, 128)],
        &[
            (49, 8),
            (343, 24),
            (637, 128),
            (13377, 1920),
            (1029, 1024),
            (1029, 1024),
        ],
        &[
            (81, 8),
            (243, 8),
            (1917, 128),
            (17253, 640),
            (7173, 1024),
            (64557, 7168),
            (32733, 32768),
            (32733, 32768),
        ],
    ];
    for (row, expected) in interior.iter().enumerate() {
        let p = row as u32 + 1;
        let (deriv, value) = interior_centered(p).unwrap();
        for (offset, &(n, d)) in expected.iter().enumerate() {
            let i = offset as u32 + 2;
            let got = if i.is_multiple_of(2) {
                lookup(&value, i)
            } else {
                lookup(&deriv, i)
            };
            if got != rat(n, d) {
                failures.push(format!("c^{p}_{i} = {got}, expected {n}/{d}"));
            }
        }
    }

    let forward = [1i64, 1, 2, -4, -12, 36, 144, -576, -2880, 14400];
    let fc = forward_centered(11).unwrap();
    for (offset, &n) in forward.iter().enumerate() {
        let i = offset as u32 + 2;
        // a_2 is printed as 1/2 = 1/2!.
        let expected = printed(n, i, 0);
        let got = lookup(&fc, i);
        if got != expected {
            failures.push(format!("a_{i} = {got}, expected {expected}"));
        }
    }

    report(
        "1",
        failures.is_empty(),
        &format!(
            "table reproduction: central c_2..c_11, interior p=1..4, a_2..a_11{}",
            listed(&failures)
        ),
        started,
    );
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn criterion_2_flattened_centered_stencils() {
    let started = Instant::now();
    let mut failures = Vec::new();

    let p1 = flatten(&centered_formula(1).unwrap()).unwrap();
    let expected = [rat(1, 24), rat(-9, 8), rat(9, 8), rat(-1, 24)];
    if p1.weights() != expected || p1.offsets() != [rat(-3, 2), rat(-1, 2), rat(1, 2), rat(3, 2)] {
        failures.push(format!("p=1: {p1}"));
    }

    // The printed vector lists corrections on u(t+5/2)..u(t-5/2), added to the seed difference.
    let p2 = flatten(&centered_formula(2).unwrap()).unwrap();
    let printed = [9, -125, 330, -330, 125, -9];
    let offsets: Vec<Rational> = [5, 3, 1, -1, -3, -5].iter().map(|&n| rat(n, 2)).collect();
    for (offset, n) in offsets.iter().zip(printed) {
        let seed = if *offset == rat(1, 2) {
            int(1)
        } else if *offset == rat(-1, 2) {
            int(-1)
        } else {
            int(0)
        };
        let index = p2.offsets().iter().position(|o| o == offset);
        let got = index.map(|j| &p2.weights()[j] - &seed);
        if got != Some(rat(n, 1920)) {
            failures.push(format!("p=2 offset {offset}: {got:?}, expected {n}/1920"));
        }
    }

    report(
        "2",
        failures.is_empty(),
        &format!("flattened centered stencils p=1, p=2{}", listed(&failures)),
        started,
    );
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn criterion_3_oracle_equivalence() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let ids = FormulaId::all_up_to(12);
    for id in &ids {
        let stencil = match id.stencil() {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("{id}: {e}"));
                continue;
            }
        };
        match oracle_weights(stencil.offsets(), stencil.m(), stencil.order()) {
            Ok(w) if w == stencil.weights() => {}
            Ok(_) => failures.push(format!("{id}: weights differ from oracle")),
            Err(e) => failures.push(format!("{id}: oracle error {e}")),
        }
    }
    report(
        "3",
        failures.is_empty(),
        &format!(
            "oracle equivalence over {} formulas of order <= 12{}",
            ids.len(),
            listed(&failures)
        ),
        started,
    );
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn criterion_4_error_constants() {
    let started = Instant::now();
    let mut failures = Vec::new();

    // u'' = D+D- u + K k^q u^(q+2): K is minus the stencil-side constant.
    let base = OperatorExpr::composite(1);
    let second = general_defcor(&base, 2, &[], &[]).unwrap();
    let k2 = -flatten(&second).unwrap().error_constant().clone();
    if k2 != rat(-1, 12) {
        failures.push(format!("K_2 = {k2}"));
    }
    let fourth = general_defcor(&base, 4, &[OperatorExpr::composite(2)], &[]).unwrap();
    let k4 = -flatten(&fourth).unwrap().error_constant().clone();
    if k4 != rat(1, 90) {
        failures.push(format!("K_4 = {k4}"));
    }

    for p in 1..=4u32 {
        let odd = centered_formula(p).unwrap();
        let next = lookup(&centered_formula(p + 1).unwrap(), 2 * p + 3);
        if odd.table_error_constant() != (2 * p + 3, next.clone()) {
            failures.push(format!(
                "centered p={p}: {:?} vs c_{} = {next}",
                odd.table_error_constant(),
                2 * p + 3
            ));
        }
        let stencil_constant = flatten(&odd).unwrap().error_constant().clone();
        if stencil_constant != next {
            failures.push(format!("centered p={p} stencil constant {stencil_constant}"));
        }
        let even = centered_average_formula(p).unwrap();
        let next = lookup(&centered_average_formula(p + 1).unwrap(), 2 * p + 2);
        if even.table_error_constant() != (2 * p + 2, next.clone()) {
            failures.push(format!(
                "average p={p}: {:?} vs c_{} = {next}",
                even.table_error_constant(),
                2 * p + 2
            ));
        }
    }

    report(
        "4",
        failures.is_empty(),
        &format!(
            "error constants K_2, K_4, c_(2p+3), c_(2p+2) for p <= 4{}",
            listed(&failures)
        ),
        started,
    );
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn criterion_5_identity_suites() {
    use rand::{Rng, SeedableRng};
    let started = Instant::now();
    let mut failures = Vec::new();

    let rs = [int(-2), int(-1), rat(-1, 2), int(0), rat(1, 2), int(1), int(2)];
    let half = rat(1, 2);
    for m in 1..=12u32 {
        for r in &rs {
            for p in 1..m {
                if !moment_sum(m, r, p).is_zero() {
                    failures.push(format!("moment m={m} r={r} p={p}"));
                }
            }
            if moment_sum(m, r, m) != Rational::from_integer(factorial(m)) {
                failures.push(format!("moment m={m} r={r} p=m"));
            }
        }
        // Parity forms: the centered, staggered and averaged sums vanish.
        let mi = int(m as i64);
        for p in 0..=12u32 {
            let centered = signed_sum(2 * m, |j| pw(&mi - int(j), 2 * p + 1));
            let staggered = signed_sum(2 * m + 1, |j| pw(&mi - int(j) + &half, 2 * p));
            let averaged = signed_sum(2 * m, |j| {
                pw(&mi - int(j) + &half, 2 * p + 1) + pw(&mi - int(j) - &half, 2 * p + 1)
            });
            if !(centered.is_zero() && staggered.is_zero() && averaged.is_zero()) {
                failures.push(format!("parity m={m} p={p}"));
            }
        }
    }

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let mut instances = 0;
    for m in 1..=3u32 {
        for _ in 0..40 {
            let mut sample = || rat(rng.gen_range(-30..=30), rng.gen_range(1..=11));
            let f: GridFunction<Rational> = (-3..=3).map(|i| (int(i), sample())).collect();
            let g: GridFunction<Rational> = (-3..=3).map(|i| (int(i), sample())).collect();
            let k = rat(rng.gen_range(1..=5), rng.gen_range(1..=5));
            let (lhs, rhs) = product_rule_check(m, &f, &g, 0, &k).unwrap();
            instances += 1;
            if lhs != rhs {
                failures.push(format!("product rule m={m}"));
            }
        }
    }

    let examples = [
        (OperatorExpr::new(1, 3, 0, 0), OperatorExpr::composite(2).at(int(-1))),
        (OperatorExpr::d_minus(4), OperatorExpr::composite(2).at(int(-2))),
    ];
    for (word, expected) in examples {
        match normalize_composite(&word) {
            Ok(Some((got, _))) if got == expected => {}
            other => failures.push(format!("normalize {word}: {other:?}")),
        }
    }

    report(
        "5",
        failures.is_empty(),
        &format!(
            "binomial moment identities m <= 12, {instances} product-rule instances, normalizations{}",
            listed(&failures)
        ),
        started,
    );
    assert!(failures.is_empty(), "{failures:?}");
}

fn pw(x: Rational, e: u32) -> Rational {
    num_traits::Pow::pow(&x, e)
}

fn signed_sum(n: u32, term: impl Fn(i64) -> Rational) -> Rational {
    (0..=n)
        .map(|j| {
            let t = Rational::from_integer(fdgen::exactmath::binom(n, j).unwrap()) * term(j as i64);
            if j % 2 == 0 {
                t
            } else {
                -t
            }
        })
        .sum()
}

struct Study {
    label: &'static str,
    omega: f64,
    reports: Vec<(FormulaId, ConvergenceReport)>,
}

/// Six formulas on `sin(ωx)` at 0, `h = h0 2^{-j/4}` over about four decades.
fn studies() -> Vec<Study> {
    let cases = [
        ("sin(100 pi x)", 100.0 * PI, 1e-3),
        ("sin(1000 pi x)", 1000.0 * PI, 1e-4),
    ];
    cases
        .iter()
        .map(|&(label, omega, h0)| {
            let grid = geometric_grid(h0, 2f64.powf(0.25), 56);
            let reports = ["B6", "B10", "BC6", "BC10", "IC6", "IC10"]
                .iter()
                .map(|name| {
                    let id: FormulaId = name.parse().unwrap();
                    let stencil = id.stencil().unwrap();
                    let r = convergence_study(name, &stencil, |x: f64| (omega * x).sin(), omega, 0.0, &grid).unwrap();
                    (id, r)
                })
                .collect();
            Study { label, omega, reports }
        })
        .collect()
}

fn order_check(names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for study in studies() {
        for (id, r) in &study.reports {
            if !names.contains(&id.to_string().as_str()) {
                continue;
            }
            let fitted = r.fitted_order();
            let pass = fitted.is_some_and(|q| (q - id.order() as f64).abs() <= 0.2);
            ok &= pass;
            detail.push(format!(
                "{id} on {}: {}",
                study.label,
                fitted.map_or("none".into(), |q| format!("{q:.3}"))
            ));
        }
    }
    (ok, detail.join(", "))
}

#[test]
fn criterion_6a_fitted_orders() {
    let started = Instant::now();
    let (ok, detail) = order_check(&["B6", "BC6", "IC6", "BC10", "IC10"]);
    report("6a", ok, &format!("fitted orders within 0.2: {detail}"), started);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_6b_fitted_order_b10() {
    let started = Instant::now();
    let (ok, detail) = order_check(&["B10"]);
    report("6b", ok, &format!("fitted order within 0.2: {detail}"), started);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_6c_backward_centered_below_backward() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let mut compared = 0;
    for study in studies() {
        let find = |name: &str| &study.reports.iter().find(|(id, _)| id.to_string() == name).unwrap().1;
        let (bc, b) = (find("BC10"), find("B10"));
        let shared = bc.pre_floor().end.min(b.pre_floor().end);
        for i in 0..shared {
            compared += 1;
            if bc.abs_errors[i] > b.abs_errors[i] {
                failures.push(format!(
                    "{} h={:e}: {:e} > {:e}",
                    study.label, bc.h[i], bc.abs_errors[i], b.abs_errors[i]
                ));
            }
        }
    }
    let ok = failures.is_empty() && compared > 0;
    report(
        "6c",
        ok,
        &format!(
            "BC10 <= B10 at {compared} shared pre-floor spacings{}",
            listed(&failures)
        ),
        started,
    );
    assert!(ok, "{failures:?}");
}

#[test]
fn criterion_6d_error_floor_reached() {
    let started = Instant::now();
    let mut failures = Vec::new();
    for study in studies() {
        for (id, r) in &study.reports {
            let threshold = 1e-10 * study.omega;
            if r.roundoff_floor_index.is_none() || r.min_error() >= threshold {
                failures.push(format!("{id} on {}: min error {:e}", study.label, r.min_error()));
            }
        }
    }
    report(
        "6d",
        failures.is_empty(),
        &format!("all curves reach a floor below 1e-10 |u'(0)|{}", listed(&failures)),
        started,
    );
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn criterion_7_backward_series() {
    let started = Instant::now();
    let mut failures = Vec::new();
    let series = error_series(&OperatorExpr::d_minus(1).at(int(1)), 12).unwrap();
    if series.coeff(2) != Some(rat(-1, 2)) || series.coeff(3) != Some(rat(1, 6)) {
        failures.push(format!("e_2 = {:?}, e_3 = {:?}", series.coeff(2), series.coeff(3)));
    }
    for m in 1..=4u32 {
        let series = error_series(&OperatorExpr::d_minus(m), m + 8).unwrap();
        for i in m + 1..=m + 8 {
            if series.coeff(i) != Some(classical_backward_coefficient(m, i)) {
                failures.push(format!("m={m} i={i}"));
            }
        }
    }
    // Same check on the backward-centered family built from it.
    if flatten(&backward_centered(6).unwrap()).is_err() {
        failures.push("backward-centered p=6 fails verification".into());
    }
    report(
        "7",
        failures.is_empty(),
        &format!(
            "backward series matches classical expansion (e_2 = -1/2, e_3 = 1/6){}",
            listed(&failures)
        ),
        started,
    );
    assert!(failures.is_empty(), "{failures:?}");
}
