//! Named instances with known answers, and a replay of all of them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classify::{classify_float, classify_rational, FloatTolerances};
use crate::coeff::{parse_rational, Coeff};
use crate::error::Result;
use crate::local_min::{find_local_minimum, find_strict_local_minimum, has_second_order_point, solve_sos, SearchOptions, Stage, Verdict};
use crate::newton::{basin_label, run, Method, NewtonOptions, ScalarC3Function, Termination, UnivariatePolynomial};
use crate::poly::{CubicPolynomial, MonomialMap, RationalCubic};
use crate::reductions::{irrational_pencil, sdpf_to_cubic, verify_maxcut_reduction, MaxCutInstance};

fn from_terms(n: usize, terms: &[(&[u32], i64)]) -> RationalCubic {
    let map: MonomialMap<_> = terms
        .iter()
        .map(|(e, c)| (e.to_vec(), parse_rational(&c.to_string()).expect("integer")))
        .collect();
    RationalCubic::from_monomials(n, &map).expect("valid fixture")
}

/// `x1^2 x2`: local minima on the open half line `x1 = 0, x2 > 0`.
pub fn half_line() -> RationalCubic {
    from_terms(2, &[(&[2, 1], 1)])
}

/// `x2^2 - x1^2 x2`: the origin is a second-order point but not a local minimum.
pub fn parabola_saddle() -> RationalCubic {
    from_terms(2, &[(&[0, 2], 1), (&[2, 1], -1)])
}

/// `x^3 - 6x`: strict local minimum at `sqrt 2`.
pub fn root_two_cubic() -> RationalCubic {
    from_terms(1, &[(&[3], 1), (&[1], -6)])
}

/// `(x1 + x2)^3 - 3 (x1 + x2)`: local minima on the line `x1 + x2 = 1`.
pub fn line_cubic() -> RationalCubic {
    from_terms(
        2,
        &[(&[3, 0], 1), (&[2, 1], 3), (&[1, 2], 3), (&[0, 3], 1), (&[1, 0], -3), (&[0, 1], -3)],
    )
}

/// `-x1 x3^2 + x1 x4^2 + 2 x2 x3 x4 + x3^2 + x4^2`: local minima on the open
/// unit disc `x1^2 + x2^2 < 1, x3 = x4 = 0`.
pub fn disc_cubic() -> RationalCubic {
    from_terms(
        4,
        &[(&[1, 0, 2, 0], -1), (&[1, 0, 0, 2], 1), (&[0, 1, 1, 1], 2), (&[0, 0, 2, 0], 1), (&[0, 0, 0, 2], 1)],
    )
}

/// Polynomials that have second-order points, with a name.
pub fn second_order_fixtures() -> Vec<(&'static str, CubicPolynomial)> {
    vec![
        ("x1^2 x2", half_line().to_f64()),
        ("x^3 - 6x", root_two_cubic().to_f64()),
        ("line of minima", line_cubic().to_f64()),
        ("disc of minima", disc_cubic().to_f64()),
    ]
}

/// One replayed fixture.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &str, r: Result<(bool, String)>) -> FixtureOutcome {
    let (passed, detail) = r.unwrap_or_else(|e| (false, format!("error: {e}")));
    FixtureOutcome {
        name: name.to_string(),
        passed,
        detail,
    }
}

fn half_line_points() -> Result<(bool, String)> {
    let p = half_line();
    let pf = p.to_f64();
    let tol = FloatTolerances::default();
    let q = |s: &str| parse_rational(s).expect("literal");
    let mut ok = true;
    for (x, min, so, crit) in [
        (["0", "1"], true, true, true),
        (["0", "5"], true, true, true),
        (["0", "0"], false, true, true),
        (["1", "1"], false, false, false),
    ] {
        let xe = [q(x[0]), q(x[1])];
        let exact = classify_rational(&p, &xe)?;
        let float = classify_float(&pf, &[xe[0].to_f64(), xe[1].to_f64()], &tol)?;
        for r in [&exact, &float] {
            ok &= r.is_local_min == min && r.is_second_order == so && r.is_critical == crit;
        }
    }
    let origin = classify_rational(&p, &[q("0"), q("0")])?;
    let witness = origin.toc_violation.as_ref().map(|v| v.grad_p3.clone());
    ok &= witness.as_deref() == Some(&[2.0, 1.0][..]);
    Ok((ok, format!("third-order witness at the origin {witness:?}")))
}

fn saddle_parabola() -> Result<(bool, String)> {
    let p = parabola_saddle().to_f64();
    let r = classify_float(&p, &[0.0, 0.0], &FloatTolerances::default())?;
    let Some(c) = r.certificate.clone() else {
        return Ok((false, "no descent certificate".into()));
    };
    let ratio = c.parabola_ratio * c.parabola_axis[1] / c.direction[0].powi(2);
    let below = [0.1, 0.01].iter().all(|&t| p.eval(&c.point(t)).is_ok_and(|v| v < 0.0));
    let ok = r.is_second_order && !r.is_local_min && (ratio - 0.5).abs() <= 1e-9 && below;
    Ok((ok, format!("curve x2 = {ratio} x1^2")))
}

fn root_two_min(opts: &SearchOptions) -> Result<(bool, String)> {
    let r = find_strict_local_minimum(&root_two_cubic().to_f64(), opts)?;
    let x = r.point.as_ref().map(|x| x[0]).unwrap_or(f64::NAN);
    let obj = r.sdp_objective.unwrap_or(f64::NAN);
    let ok = r.verdict == Verdict::StrictLocalMinFound && (x - 2f64.sqrt()).abs() <= 1e-5 && obj.abs() <= 1e-6;
    Ok((ok, format!("x* = {x}, objective {obj:e}")))
}

fn saddle_no_min(opts: &SearchOptions) -> Result<(bool, String)> {
    let r = find_local_minimum(&parabola_saddle().to_f64(), opts)?;
    Ok((
        r.verdict == Verdict::NoLocalMinimum && r.stage == Stage::Test2Failed,
        format!("{:?} at {:?}", r.verdict, r.stage),
    ))
}

fn disc_min(opts: &SearchOptions) -> Result<(bool, String)> {
    let r = find_local_minimum(&disc_cubic().to_f64(), opts)?;
    let Some(x) = r.point else {
        return Ok((false, format!("{:?}", r.verdict)));
    };
    let ok = r.verdict == Verdict::LocalMinFound
        && x[2].abs() <= 1e-5
        && x[3].abs() <= 1e-5
        && x[0] * x[0] + x[1] * x[1] <= 0.999;
    Ok((ok, format!("x* = {x:?}")))
}

fn line_min(opts: &SearchOptions) -> Result<(bool, String)> {
    let r = find_local_minimum(&line_cubic().to_f64(), opts)?;
    let Some(x) = r.point else {
        return Ok((false, format!("{:?}", r.verdict)));
    };
    Ok((
        r.verdict == Verdict::LocalMinFound && (x[0] + x[1] - 1.0).abs() <= 1e-5,
        format!("x* = {x:?}"),
    ))
}

fn sos_values(opts: &SearchOptions) -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for (_, p) in second_order_fixtures() {
        let r = find_local_minimum(&p, opts)?;
        let (Some(x), Some(cert)) = (r.point, solve_sos(&p, &opts.solver)?) else {
            return Ok((false, "missing point or certificate".into()));
        };
        worst = worst.max((cert.gamma - p.eval(&x)?).abs());
    }
    Ok((worst <= 1e-5, format!("max |gamma - p(x*)| = {worst:e}")))
}

fn irrational(opts: &SearchOptions) -> Result<(bool, String)> {
    let c = has_second_order_point(&sdpf_to_cubic(&irrational_pencil())?, opts)?;
    let w = c.witness.map(|w| w[0]).unwrap_or(f64::NAN);
    Ok((c.exists && (w - 2f64.sqrt()).abs() <= 1e-4, format!("x = {w}")))
}

fn newton_table() -> Result<(bool, String)> {
    let f = ScalarC3Function::arctan_test();
    let four = NewtonOptions {
        max_iter: 4,
        ..NewtonOptions::default()
    };
    let third = run(&f, 1.5, Method::ThirdMin, &four)?;
    let classical = run(&f, 1.5, Method::Classical, &four)?;
    let right = [-1.2786, 0.8795, -0.3396, 0.0230];
    let mut ok = third.iterates.len() == 5 && classical.iterates.len() == 5;
    ok &= (third.iterates[1][0] + 0.2327).abs() <= 1e-3 && (third.iterates[2][0] + 0.0030).abs() <= 1e-3;
    ok &= third.values[4] <= 1e-8;
    for (x, want) in classical.iterates[1..].iter().zip(right) {
        ok &= (x[0] - want).abs() <= 1e-3;
    }
    Ok((ok, format!("third-order x1 = {:.4}, f(x4) = {:e}", third.iterates[1][0], third.values[4])))
}

fn newton_basin() -> Result<(bool, String)> {
    let f = ScalarC3Function::arctan_test();
    let o = NewtonOptions::default();
    let c = run(&f, 1.72, Method::Classical, &o)?;
    let t = run(&f, 1.72, Method::ThirdMin, &o)?;
    Ok((
        c.termination == Termination::MaxIter && t.termination == Termination::Converged,
        format!("classical {:?}, third-order {:?}", c.termination, t.termination),
    ))
}

fn quintic_basins() -> Result<(bool, String)> {
    let p = UnivariatePolynomial::parse("x^5-5x")?;
    let crit = p.critical_points();
    let i_label = crit.iter().position(|c| (c - Complex64::new(0.0, 1.0)).norm() < 1e-9);
    let one_label = crit.iter().position(|c| (c - Complex64::new(1.0, 0.0)).norm() < 1e-9);
    let mut ok = true;
    for m in [Method::Classical, Method::ThirdMin, Method::ThirdMax] {
        ok &= Some(basin_label(&p, &crit, Complex64::new(0.0, 1.5), m, 100) as usize) == i_label;
    }
    for m in [Method::Classical, Method::ThirdMin] {
        ok &= Some(basin_label(&p, &crit, Complex64::new(1.5, 0.0), m, 100) as usize) == one_label;
    }
    Ok((ok, format!("{} critical points", crit.len())))
}

fn maxcut_triangle() -> Result<(bool, String)> {
    let tri = [(0, 1), (1, 2), (0, 2)];
    let mut ok = true;
    for (k, has) in [(2, true), (3, false)] {
        let r = verify_maxcut_reduction(&MaxCutInstance::new(3, &tri, k)?)?;
        ok &= r.consistent() && (r.solutions > 0) == has;
    }
    Ok((ok, "triangle: cut of size 2, none of size 3".into()))
}

/// Replays every fixture.
pub fn replay(opts: &SearchOptions) -> Vec<FixtureOutcome> {
    vec![
        outcome("half line x1^2 x2: point classification", half_line_points()),
        outcome("x2^2 - x1^2 x2: descent parabola", saddle_parabola()),
        outcome("x^3 - 6x: strict local minimum", root_two_min(opts)),
        outcome("x2^2 - x1^2 x2: no local minimum", saddle_no_min(opts)),
        outcome("disc of minima", disc_min(opts)),
        outcome("line of minima", line_min(opts)),
        outcome("sum-of-squares value at recovered points", sos_values(opts)),
        outcome("pencil feasible only at sqrt 2", irrational(opts)),
        outcome("third-order Newton table", newton_table()),
        outcome("classical basin bracket", newton_basin()),
        outcome("x^5 - 5x basins", quintic_basins()),
        outcome("triangle cut reduction", maxcut_triangle()),
    ]
}
