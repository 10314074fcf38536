use nehari_core::hypotheses::{check_nonlinearity, check_potential, check_rho, sobolev_constant};
use nehari_core::{check_problem, Field, Grid, Nonlinearity, Potential, Problem, Rho, Verdict};
use proptest::prelude::*;

fn verdict<'a>(checks: &'a [nehari_core::hypotheses::HypothesisCheck], name: &str) -> &'a Verdict {
    &checks.iter().find(|c| c.name == name).unwrap().verdict
}

/// `|∇U|₂² / |U|²_{2*}` for the bubble `U = (1 + r²)^{-(N-2)/2}` on a grid.
fn bubble_quotient(dim: usize, r_max: f64, n: usize) -> f64 {
    let g = Grid::new(dim, r_max, n).unwrap();
    let e = -(dim as f64 - 2.0) / 2.0;
    let u = Field::from_fn(&g, |r| (1.0 + r * r).powf(e));
    let du = g.derivative(&u).unwrap();
    // the one-sided end stencil is fine here; U is smooth up to r_max
    let grad_sq: Vec<f64> = du.values().iter().map(|d| d * d).collect();
    let crit = 2.0 * dim as f64 / (dim as f64 - 2.0);
    g.integrate(&grad_sq).unwrap() / g.lp_norm(u.values(), crit).unwrap().powi(2)
}

#[test]
fn sobolev_constant_matches_bubble_quotient() {
    for (dim, r_max, n) in [(3, 4000.0, 200_001), (4, 400.0, 40_001), (6, 100.0, 10_001)] {
        let s = sobolev_constant::<f64>(dim).unwrap();
        let q = bubble_quotient(dim, r_max, n);
        assert!((q / s - 1.0).abs() < 0.01, "N = {dim}: S = {s}, quotient = {q}");
    }
    assert!((sobolev_constant::<f64>(3).unwrap() - 5.4779).abs() < 1e-3);
}

#[test]
fn v2_verdict_has_a_single_threshold_in_c() {
    let g = Grid::new(3, 10.0, 1001).unwrap();
    let passes = |c: f64| {
        let v = Potential::inverse_power(1.0, c, 1.0, 2.0).unwrap();
        check_potential(&v, &g)
            .checks
            .iter()
            .find(|c| c.name == "V2")
            .unwrap()
            .verdict
            .passed()
    };
    let cs: Vec<f64> = (0..=60).map(|k| 10f64.powf(-2.0 + k as f64 / 15.0)).collect();
    let flags: Vec<bool> = cs.iter().map(|&c| passes(c)).collect();
    assert!(flags[0] && !flags[flags.len() - 1]);
    let flips = flags.windows(2).filter(|w| w[0] != w[1]).count();
    assert_eq!(flips, 1, "{flags:?}");

    let k = flags.iter().position(|&f| !f).unwrap();
    let (mut lo, mut hi) = (cs[k - 1], cs[k]);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let at_hi = check_potential(&Potential::inverse_power(1.0, hi, 1.0, 2.0).unwrap(), &g);
    assert!((at_hi.v_minus_norm / at_hi.sobolev_constant - 1.0).abs() < 1e-6);
    let w = verdict(&at_hi.checks, "V2").witness().unwrap();
    assert!(w.lhs >= w.rhs);
}

#[test]
fn v_split_is_exact() {
    let v = Potential::inverse_power(1.0, 1.0, 1.0, 1.0).unwrap();
    for k in 1..200 {
        let r = k as f64 * 0.013;
        let pv = v.evaluate(r, 0.005);
        assert_eq!(pv.plus * pv.minus, 0.0);
        assert_eq!(pv.plus - pv.minus, pv.value);
    }
    assert_eq!(v.value(0.5, 0.01), 1.0 - 2.0);
    assert_eq!(v.value(2.0, 0.01), 1.0);
    assert!(v.evaluate(0.0, 0.01).regularized);
}

#[test]
fn power_family_exponent_window() {
    for dim in [3usize, 5, 6] {
        let cap = if dim > 4 {
            2.0 * dim as f64 / (dim as f64 - 4.0)
        } else {
            f64::INFINITY
        };
        for m in [0.5, 1.0, 3.0] {
            for p in [4.2, 5.0, 5.9, 7.0, 9.5] {
                let c = check_nonlinearity(&Nonlinearity::power(m, p).unwrap(), dim);
                let all = c.checks.iter().all(|c| c.verdict.passed());
                assert_eq!(all, p < cap, "N = {dim}, m = {m}, p = {p}: {:?}", c.checks);
                assert!((c.delta_hat / (m * (p - 2.0)) - 1.0).abs() < 1e-9);
            }
            for p in [3.0, 4.0] {
                let c = check_nonlinearity(&Nonlinearity::power(m, p).unwrap(), dim);
                assert!(!verdict(&c.checks, "f2_exponent").passed());
            }
        }
    }
    let c = check_nonlinearity(&Nonlinearity::power(1.0, 6.0).unwrap(), 4);
    assert!(matches!(
        verdict(&c.checks, "f2_exponent"),
        Verdict::PassWithWarning { .. }
    ));
}

#[test]
fn refuted_nonlinearities_carry_witnesses() {
    let linear = Nonlinearity::custom(5.0, 1.0, |t: f64| (t, 1.0, 0.5 * t * t));
    let c = check_nonlinearity(&linear, 3);
    let w = verdict(&c.checks, "f1").witness().unwrap();
    assert_eq!(w.at, Some(0.0));

    let cubic = Nonlinearity::custom(5.0, 1.0, |t: f64| (t * t * t, 3.0 * t * t, t.powi(4) / 4.0));
    let c = check_nonlinearity(&cubic, 3);
    let w2 = verdict(&c.checks, "f2").witness().unwrap();
    assert!(w2.at.unwrap().abs() > 1.0);
    assert!(!verdict(&c.checks, "f4").passed());
    assert!(c.m_hat < 1e-5);
}

#[test]
fn builtin_rho_families_pass_inside_their_ranges() {
    let mut specs = vec![Rho::SqrtShift];
    for a in [0.0, 0.5, 3.0] {
        for b in [0.0, 1.0, 4.0] {
            specs.push(Rho::Affine { a, b });
            specs.push(Rho::AffinePlusSqrt { a, b });
        }
    }
    for alpha in [0.2929, 0.3, 0.5, 0.75, 1.0] {
        specs.push(Rho::PowerShift { alpha });
    }
    for spec in specs {
        let c = check_rho(&spec);
        assert!(c.checks.iter().all(|c| c.verdict.passed()), "{spec:?}: {:?}", c.checks);
    }
}

#[test]
fn power_shift_boundary() {
    for alpha in [0.1, 0.2, 0.25] {
        let c = check_rho(&Rho::PowerShift { alpha });
        let w = verdict(&c.checks, "rho4").witness().unwrap();
        let s = w.at.unwrap();
        // closed form: violated exactly for s > 1/(√2(1-α) - 1)
        let threshold = 1.0 / (2f64.sqrt() * (1.0 - alpha) - 1.0);
        assert!(s > threshold && s < threshold * 1.01, "alpha = {alpha}: s = {s}");
        assert!(!verdict(&c.checks, "rho_family").passed());
    }
    let ok = |alpha: f64| {
        check_rho(&Rho::PowerShift { alpha })
            .checks
            .iter()
            .all(|c| c.verdict.passed())
    };
    let (mut lo, mut hi) = (0.25, 0.30);
    assert!(!ok(lo) && ok(hi));
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let sharp = 1.0 - 1.0 / 2f64.sqrt();
    assert!(lo - 0.01 <= sharp && sharp <= hi + 0.01, "[{lo}, {hi}]");
}

#[test]
fn rho_closed_form_values() {
    let d = Rho::SqrtShift.derivatives(3.0);
    assert!((d[0] - 2.0).abs() < 1e-15);
    assert!((d[1] - 0.25).abs() < 1e-15);
    assert!((d[2] + 1.0 / 32.0).abs() < 1e-15);
    let a = Rho::Affine { a: 1.0, b: 1.0 };
    let p = Rho::PowerShift { alpha: 1.0 };
    for s in [0.0, 0.3, 7.0, 1e4] {
        for k in 1..=4 {
            assert!((a.eval(s, k).unwrap() - p.eval(s, k).unwrap()).abs() < 1e-12);
        }
    }
    assert!(a.eval(1.0, 5).is_err());
}

#[test]
fn inconsistent_custom_rho_is_flagged() {
    // ρ = (1+s)^{1/2} with a wrong second derivative
    let bad = Rho::custom(|s: f64| {
        let x = 1.0 + s;
        [
            x.sqrt(),
            0.5 / x.sqrt(),
            -0.5 / x.powf(1.5),
            0.375 / x.powf(2.5),
            -0.9375 / x.powf(3.5),
        ]
    });
    let c = check_rho(&bad);
    assert!(!verdict(&c.checks, "rho1").passed());
}

#[test]
fn problem_report() {
    let g = Grid::new(3, 20.0, 801).unwrap();
    let good = Problem::new(
        3,
        1.0,
        Potential::constant(1.0),
        Nonlinearity::power(1.0, 5.0).unwrap(),
        Rho::SqrtShift,
    )
    .unwrap();
    let r = check_problem(&good, &g);
    assert!(r.all_pass(), "{:?}", r.failures());
    let bad = Problem::new(
        3,
        1.0,
        Potential::constant(1.0),
        Nonlinearity::power(1.0, 5.0).unwrap(),
        Rho::PowerShift { alpha: 0.2 },
    )
    .unwrap();
    let r = check_problem(&bad, &g);
    assert!(!r.all_pass());
    assert!(r.failures().iter().any(|c| c.name == "rho4"));
    assert!(r.failures().iter().all(|c| c.verdict.witness().is_some()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn power_shift_verdict_follows_sharp_bound(alpha in 0.05..1.0f64) {
        let sharp = 1.0 - 1.0 / 2f64.sqrt();
        prop_assume!((alpha - sharp).abs() > 2e-3);
        let ok = check_rho(&Rho::PowerShift { alpha }).checks.iter().all(|c| c.verdict.passed());
        prop_assert_eq!(ok, alpha > sharp);
    }

    #[test]
    fn exponent_verdict_matches_window(m in 0.1..5.0f64, p in 2.5..12.0f64, dim in 3usize..=6) {
        let cap = if dim > 4 { 2.0 * dim as f64 / (dim as f64 - 4.0) } else { f64::INFINITY };
        let c = check_nonlinearity(&Nonlinearity::power(m, p).unwrap(), dim);
        let v = verdict(&c.checks, "f2_exponent");
        prop_assert_eq!(v.passed(), p > 4.0 && p < cap);
        if let Some(w) = v.witness() {
            prop_assert_eq!(w.lhs, p);
        }
    }
}
