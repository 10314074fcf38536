//! Sampling-based certification of the existence hypotheses on `V`, `f` and
//! `ρ`. Every failure carries a witness: the sample where the inequality
//! breaks, with both sides evaluated.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::problem::{NonlinearitySpec, PotentialSpec, RhoSpec};
use crate::scalar::gamma_half;
use crate::Scalar;

/// Sample density for `t` and `s` sweeps.
pub const SAMPLES_PER_DECADE: usize = 400;
pub const SAMPLE_MIN: f64 = 1e-6;
pub const SAMPLE_MAX: f64 = 1e6;
/// Inequalities tolerate `-SLACK * (1 + |rhs|)`.
pub const SLACK: f64 = 1e-12;
/// Relative tail tolerance for `V → V_∞` on the last 5% of nodes.
pub const TAIL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// Sample point (`r`, `t`, `s` or a parameter), when the violation is local.
    pub at: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail { witness: Witness },
    PassWithWarning { note: String },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        !matches!(self, Verdict::Fail { .. })
    }

    fn fail(at: Option<f64>, lhs: f64, rhs: f64, detail: impl Into<String>) -> Self {
        Verdict::Fail {
            witness: Witness {
                at,
                lhs,
                rhs,
                detail: detail.into(),
            },
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Fail { witness } => Some(witness),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub verdict: Verdict,
}

impl HypothesisCheck {
    fn new(name: &'static str, verdict: Verdict) -> Self {
        Self { name, verdict }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialCheck {
    pub checks: Vec<HypothesisCheck>,
    /// `|V⁻|_{N/2}` by grid quadrature.
    pub v_minus_norm: f64,
    pub sobolev_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonlinearityCheck {
    pub checks: Vec<HypothesisCheck>,
    /// Largest `δ` with `f'(t)t² - f(t)t >= δ|t|^p` on the samples.
    pub delta_hat: f64,
    /// `f(T)/T^{p-1}` at the largest sample.
    pub m_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoCheck {
    pub checks: Vec<HypothesisCheck>,
    /// Sampled `sup |ρ^{(i)}|`, `i = 1..=4`.
    pub derivative_sups: [f64; 4],
    /// Sampled `sup |s ρ'(s) ρ''(s)|`.
    pub cross_sup: f64,
}

/// Certificate for a whole problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub dim: usize,
    pub lambda: f64,
    pub potential: PotentialCheck,
    pub nonlinearity: NonlinearityCheck,
    pub rho: RhoCheck,
}

impl HypothesisReport {
    pub fn checks(&self) -> impl Iterator<Item = &HypothesisCheck> {
        self.potential
            .checks
            .iter()
            .chain(&self.nonlinearity.checks)
            .chain(&self.rho.checks)
    }

    pub fn all_pass(&self) -> bool {
        self.checks().all(|c| c.verdict.passed())
    }

    pub fn failures(&self) -> Vec<&HypothesisCheck> {
        self.checks().filter(|c| !c.verdict.passed()).collect()
    }

    pub fn find(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks().find(|c| c.name == name)
    }
}

/// Log-spaced positive samples on `[SAMPLE_MIN, SAMPLE_MAX]`.
pub fn log_samples() -> Vec<f64> {
    let decades = (SAMPLE_MAX / SAMPLE_MIN).log10().round() as usize;
    let count = decades * SAMPLES_PER_DECADE;
    (0..=count)
        .map(|k| SAMPLE_MIN * 10f64.powf(k as f64 / SAMPLES_PER_DECADE as f64))
        .collect()
}

fn within_slack(lhs: f64, rhs: f64) -> bool {
    lhs - rhs >= -SLACK * (1.0 + rhs.abs())
}

/// Best constant `S` of `D^{1,2}(ℝ^N) ↪ L^{2*}(ℝ^N)`:
/// `S = π N (N-2) (Γ(N/2)/Γ(N))^{2/N}`.
pub fn sobolev_constant<T: Scalar>(dim: usize) -> Result<T> {
    if dim < 3 {
        return Err(Error::Dimension { dim, lambda: f64::NAN });
    }
    let n = T::from_usize_lossy(dim);
    let ratio = gamma_half::<T>(dim) / gamma_half::<T>(2 * dim);
    Ok(T::PI() * n * (n - T::lit(2.0)) * ratio.powf(T::lit(2.0) / n))
}

/// `|V⁻|_{N/2}` by the grid quadrature.
pub fn v_minus_norm<T: Scalar>(spec: &PotentialSpec<T>, grid: &RadialGrid<T>) -> T {
    let half = grid.spacing() * T::lit(0.5);
    let q = T::from_usize_lossy(grid.dim()) / T::lit(2.0);
    let powered: Vec<T> = grid
        .nodes()
        .iter()
        .map(|&r| spec.evaluate(r, half).minus.powf(q))
        .collect();
    grid.quad(&powered).powf(q.recip())
}

/// `(V1)` tail convergence and `(V2)` smallness of the negative part.
pub fn check_potential<T: Scalar>(spec: &PotentialSpec<T>, grid: &RadialGrid<T>) -> PotentialCheck {
    let v_inf = spec.v_infinity.as_f64();
    let half = grid.spacing() * T::lit(0.5);
    let n = grid.len();
    let tail_start = n - (n / 20).max(1);

    let v1 = if !(v_inf > 0.0) {
        Verdict::fail(None, v_inf, 0.0, "V_inf must be positive")
    } else {
        let worst = grid.nodes()[tail_start..]
            .iter()
            .map(|&r| (r.as_f64(), (spec.value(r, half).as_f64() - v_inf).abs()))
            .fold((f64::NAN, 0.0f64), |acc, x| if x.1 > acc.1 { x } else { acc });
        if worst.1 < TAIL_TOLERANCE * v_inf {
            Verdict::Pass
        } else {
            Verdict::fail(
                Some(worst.0),
                worst.1,
                TAIL_TOLERANCE * v_inf,
                "|V(r) - V_inf| on the last 5% of the grid exceeds the tail tolerance",
            )
        }
    };

    let norm = v_minus_norm(spec, grid).as_f64();
    let s = sobolev_constant::<f64>(grid.dim()).unwrap_or(f64::NAN);
    let v2 = if norm < s {
        Verdict::Pass
    } else {
        Verdict::fail(None, norm, s, "|V^-|_{N/2} >= S")
    };

    PotentialCheck {
        checks: vec![HypothesisCheck::new("V1", v1), HypothesisCheck::new("V2", v2)],
        v_minus_norm: norm,
        sobolev_constant: s,
    }
}

/// Relative central-difference step: `base` in double precision, the
/// cube root of epsilon when that is larger.
fn fd_step<T: Scalar>(base: f64) -> f64 {
    T::epsilon().as_f64().cbrt().max(base)
}

/// Allowed relative mismatch in [`nonlinearity_consistency`].
fn consistency_tol<T: Scalar>() -> f64 {
    (1e3 * T::epsilon().as_f64().powf(2.0 / 3.0)).max(1e-6)
}

/// Worst relative mismatch of `(F', f')` against central differences of
/// `(F, f)` on log-spaced `|t| ∈ [1e-3, 1e3]`, both signs. Returns
/// `(max relative error, where)`.
pub fn nonlinearity_consistency<T: Scalar>(spec: &NonlinearitySpec<T>) -> (f64, f64) {
    let step = fd_step::<T>(1e-4);
    let mut worst = (0.0f64, f64::NAN);
    for k in 0..=600 {
        let a = 1e-3 * 10f64.powf(k as f64 / 100.0);
        for t in [a, -a] {
            let (tp, tm) = (T::lit(t + step * a), T::lit(t - step * a));
            let width = tp.as_f64() - tm.as_f64();
            let (fp, _, big_fp) = spec.eval(tp);
            let (fm, _, big_fm) = spec.eval(tm);
            let (f0, df0, _) = spec.eval(T::lit(t));
            let (f0, df0) = (f0.as_f64(), df0.as_f64());
            let fd_f = (big_fp.as_f64() - big_fm.as_f64()) / width;
            let fd_df = (fp.as_f64() - fm.as_f64()) / width;
            let scale_f = f0.abs().max(1e-300);
            let scale_df = df0.abs().max(f0.abs() / a).max(1e-300);
            let e = ((fd_f - f0).abs() / scale_f).max((fd_df - df0).abs() / scale_df);
            if !(e <= worst.0) {
                worst = (e, t);
            }
        }
    }
    worst
}

/// Worst mismatch between central differences of `ρ^{(k)}` and `ρ^{(k+1)}`,
/// `k = 0..=3`, on log-spaced `s ∈ [1e-3, 1e6]`, measured against the
/// allowance `1e-4 |ρ^{(k+1)}|` plus a roundoff floor. Values above 1 fail.
pub fn rho_consistency<T: Scalar>(spec: &RhoSpec<T>) -> (f64, f64) {
    let step = fd_step::<T>(1e-3);
    let eps = T::epsilon().as_f64();
    let floor = (1e4 * eps / step).max(1e-9);
    let rel = (10.0 * step * step).max(1e-4);
    let mut worst = (0.0f64, f64::NAN);
    for k in 0..=900 {
        let s = 1e-3 * 10f64.powf(k as f64 / 100.0);
        let (sp, sm) = (T::lit(s + step * s), T::lit(s - step * s));
        let width = sp.as_f64() - sm.as_f64();
        let p = spec.derivatives(sp);
        let m = spec.derivatives(sm);
        let c = spec.derivatives(T::lit(s));
        for order in 0..4 {
            let fd = (p[order].as_f64() - m[order].as_f64()) / width;
            let exact = c[order + 1].as_f64();
            let roundoff = floor * c[order].as_f64().abs() / s;
            let err = (fd - exact).abs();
            let allowed = rel * exact.abs() + roundoff;
            let e = if err == 0.0 { 0.0 } else { err / allowed };
            if !(e <= worst.0) {
                worst = (e, s);
            }
        }
    }
    worst
}

/// True when `g` grows by more than a factor 2 over the last sampled decade
/// toward one end, i.e. the sampled supremum is not settling.
fn grows_toward_end(values: &[f64], per_decade: usize, from_top: bool) -> bool {
    let n = values.len();
    if n <= per_decade {
        return false;
    }
    let (end, prev) = if from_top {
        (values[n - 1].abs(), values[n - 1 - per_decade].abs())
    } else {
        (values[0].abs(), values[per_decade].abs())
    };
    end > 2.0 * prev && end > 0.0
}

fn decays_toward_end(values: &[f64], per_decade: usize, from_top: bool) -> Option<(f64, f64)> {
    let n = values.len();
    if n <= per_decade {
        return None;
    }
    let (end, prev) = if from_top {
        (values[n - 1], values[n - 1 - per_decade])
    } else {
        (values[0], values[per_decade])
    };
    (end > 0.0 && end < 0.5 * prev).then_some((end, prev))
}

/// `(f1)`–`(f4)`, the exponent range of `(f2)`, and monotonicity of `f(t)/t`.
pub fn check_nonlinearity<T: Scalar>(spec: &NonlinearitySpec<T>, dim: usize) -> NonlinearityCheck {
    let p = spec.p.as_f64();
    let ev = |t: f64| {
        let (f, df, big_f) = spec.eval(T::lit(t));
        (f.as_f64(), df.as_f64(), big_f.as_f64())
    };
    let samples = log_samples();
    let mut checks = Vec::new();

    // (f1)
    let (f0, df0, _) = ev(0.0);
    let f1 = if f0.abs() > SLACK {
        Verdict::fail(Some(0.0), f0, 0.0, "f(0) != 0")
    } else if df0.abs() > SLACK {
        Verdict::fail(Some(0.0), df0, 0.0, "f'(0) != 0")
    } else {
        Verdict::Pass
    };
    checks.push(HypothesisCheck::new("f1", f1));

    // (f2): δ̂ = inf (f't² - ft)/|t|^p over both signs
    let mut delta_hat = f64::INFINITY;
    let mut delta_at = f64::NAN;
    let mut ratios_pos = Vec::with_capacity(samples.len());
    let mut ratios_neg = Vec::with_capacity(samples.len());
    for &a in &samples {
        for (t, store) in [(a, &mut ratios_pos), (-a, &mut ratios_neg)] {
            let (f, df, _) = ev(t);
            let r = (df * t * t - f * t) / a.powf(p);
            store.push(r);
            if !(r >= delta_hat) {
                delta_hat = r;
                delta_at = t;
            }
        }
    }
    let mut f2 = if !(delta_hat > 0.0) {
        Verdict::fail(
            Some(delta_at),
            delta_hat,
            0.0,
            "f'(t)t^2 - f(t)t >= delta |t|^p fails for every delta > 0",
        )
    } else {
        Verdict::Pass
    };
    if f2.passed() {
        'ends: for (ratios, sign) in [(&ratios_pos, 1.0), (&ratios_neg, -1.0)] {
            for from_top in [true, false] {
                if let Some((end, prev)) = decays_toward_end(ratios, SAMPLES_PER_DECADE, from_top) {
                    let at = sign * if from_top { SAMPLE_MAX } else { SAMPLE_MIN };
                    f2 = Verdict::fail(
                        Some(at),
                        end,
                        prev,
                        "(f'(t)t^2 - f(t)t)/|t|^p decays toward 0; no positive delta bounds it",
                    );
                    break 'ends;
                }
            }
        }
    }
    checks.push(HypothesisCheck::new("f2", f2));

    let exponent = if !(p > 4.0) {
        Verdict::fail(None, p, 4.0, "p must exceed 4")
    } else if dim > 4 {
        let cap = 2.0 * dim as f64 / (dim as f64 - 4.0);
        if p < cap {
            Verdict::Pass
        } else {
            Verdict::fail(None, p, cap, "p must be below 2N/(N-4)")
        }
    } else if dim == 4 {
        Verdict::PassWithWarning {
            note: "N = 4: the exponent range is stated only for N = 3 and N > 4; any p > 4 accepted".into(),
        }
    } else {
        Verdict::Pass
    };
    checks.push(HypothesisCheck::new("f2_exponent", exponent));

    // (f3)
    let mut f3 = Verdict::Pass;
    'f3: for &a in std::iter::once(&0.0).chain(&samples) {
        for t in [a, -a] {
            let (f, _, big_f) = ev(t);
            let lhs = 0.25 * f * t - big_f;
            if !(lhs >= -SLACK * (1.0 + big_f.abs())) {
                f3 = Verdict::fail(Some(t), lhs, 0.0, "f(t)t/4 - F(t) < 0");
                break 'f3;
            }
        }
    }
    checks.push(HypothesisCheck::new("f3", f3));

    // (f4): f(T)/T^{p-1} over the top two decades
    let r4 = |t: f64| ev(t).0 / t.powf(p - 1.0);
    let m_hat = r4(SAMPLE_MAX);
    let early = r4(SAMPLE_MAX / 100.0);
    let f4 = if !(m_hat > 0.0) {
        Verdict::fail(
            Some(SAMPLE_MAX),
            m_hat,
            0.0,
            "f(T)/T^(p-1) does not tend to a positive limit",
        )
    } else if (m_hat - early).abs() > 0.05 * m_hat {
        Verdict::fail(
            Some(SAMPLE_MAX),
            m_hat,
            early,
            "f(T)/T^(p-1) has not stabilized over the top two decades",
        )
    } else {
        Verdict::Pass
    };
    checks.push(HypothesisCheck::new("f4", f4));

    // f(t)/t increasing on t > 0
    let mut mono = Verdict::Pass;
    let mut prev = ev(samples[0]).0 / samples[0];
    for &t in &samples[1..] {
        let q = ev(t).0 / t;
        if !within_slack(q, prev) {
            mono = Verdict::fail(Some(t), q, prev, "f(t)/t decreases");
            break;
        }
        prev = q;
    }
    checks.push(HypothesisCheck::new("f_over_t_increasing", mono));

    let (err, at) = nonlinearity_consistency(spec);
    let tol = consistency_tol::<T>();
    let consistency = if err <= tol {
        Verdict::Pass
    } else {
        Verdict::fail(Some(at), err, tol, "f, f', F are not mutually consistent")
    };
    checks.push(HypothesisCheck::new("f_consistency", consistency));

    NonlinearityCheck {
        checks,
        delta_hat,
        m_hat,
    }
}

/// `(ρ1)`–`(ρ5)` on samples, plus the sharp parameter ranges of the
/// built-in families.
pub fn check_rho<T: Scalar>(spec: &RhoSpec<T>) -> RhoCheck {
    let mut samples = vec![0.0];
    samples.extend(log_samples());
    let derivs: Vec<[f64; 5]> = samples
        .iter()
        .map(|&s| spec.derivatives(T::lit(s)).map(|d| d.as_f64()))
        .collect();
    let mut checks = Vec::new();

    let (err, at) = rho_consistency(spec);
    let rho1 = if derivs.iter().flatten().any(|v| !v.is_finite()) {
        let i = derivs
            .iter()
            .position(|d| d.iter().any(|v| !v.is_finite()))
            .unwrap_or(0);
        Verdict::fail(Some(samples[i]), f64::NAN, 0.0, "non-finite derivative")
    } else if err <= 1.0 {
        Verdict::Pass
    } else {
        Verdict::fail(
            Some(at),
            err,
            1.0,
            "finite differences of rho^(k) disagree with rho^(k+1)",
        )
    };
    checks.push(HypothesisCheck::new("rho1", rho1));

    // (ρ2) on the positive samples (index 1..), growth checked at both ends
    let mut sups = [0.0f64; 4];
    let mut rho2 = Verdict::Pass;
    for order in 1..=4 {
        let vals: Vec<f64> = derivs[1..].iter().map(|d| d[order]).collect();
        sups[order - 1] = derivs.iter().map(|d| d[order].abs()).fold(0.0, f64::max);
        if rho2.passed() {
            for from_top in [true, false] {
                if grows_toward_end(&vals, SAMPLES_PER_DECADE, from_top) {
                    let at = if from_top { SAMPLE_MAX } else { SAMPLE_MIN };
                    let end = if from_top { vals[vals.len() - 1] } else { vals[0] };
                    rho2 = Verdict::fail(
                        Some(at),
                        end.abs(),
                        sups[order - 1],
                        format!("rho^({order}) is unbounded"),
                    );
                    break;
                }
            }
        }
    }
    checks.push(HypothesisCheck::new("rho2", rho2));

    // (ρ3)
    let cross: Vec<f64> = samples.iter().zip(&derivs).map(|(&s, d)| s * d[1] * d[2]).collect();
    let cross_sup = cross.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let rho3 = if grows_toward_end(&cross[1..], SAMPLES_PER_DECADE, true) {
        Verdict::fail(
            Some(SAMPLE_MAX),
            cross[cross.len() - 1].abs(),
            cross_sup,
            "s rho'(s) rho''(s) is unbounded",
        )
    } else {
        Verdict::Pass
    };
    checks.push(HypothesisCheck::new("rho3", rho3));

    // (ρ4): ρ'(s) >= -√2 ρ''(s) s >= 0
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut rho4 = Verdict::Pass;
    for (&s, d) in samples.iter().zip(&derivs) {
        let mid = -sqrt2 * d[2] * s;
        if !within_slack(d[1], mid) {
            rho4 = Verdict::fail(Some(s), d[1], mid, "rho'(s) < -sqrt(2) rho''(s) s");
            break;
        }
        if !within_slack(mid, 0.0) {
            rho4 = Verdict::fail(Some(s), mid, 0.0, "-sqrt(2) rho''(s) s < 0");
            break;
        }
    }
    checks.push(HypothesisCheck::new("rho4", rho4));

    // (ρ5): 2ρ''(s) + ρ'''(s)s <= 0
    let mut rho5 = Verdict::Pass;
    for (&s, d) in samples.iter().zip(&derivs) {
        let lhs = 2.0 * d[2] + d[3] * s;
        if !within_slack(0.0, lhs) {
            rho5 = Verdict::fail(Some(s), lhs, 0.0, "2 rho''(s) + rho'''(s) s > 0");
            break;
        }
    }
    checks.push(HypothesisCheck::new("rho5", rho5));

    let family = match spec {
        RhoSpec::Affine { a, b } | RhoSpec::AffinePlusSqrt { a, b } => {
            let (a, b) = (a.as_f64(), b.as_f64());
            if a < 0.0 {
                Some(Verdict::fail(None, a, 0.0, "family needs a >= 0"))
            } else if b < 0.0 {
                Some(Verdict::fail(None, b, 0.0, "family needs b >= 0"))
            } else {
                Some(Verdict::Pass)
            }
        }
        RhoSpec::SqrtShift => Some(Verdict::Pass),
        RhoSpec::PowerShift { alpha } => {
            let alpha = alpha.as_f64();
            let lo = 1.0 - 1.0 / sqrt2;
            if alpha < lo {
                Some(Verdict::fail(
                    Some(alpha),
                    alpha,
                    lo,
                    "power_shift needs alpha >= 1 - 1/sqrt(2)",
                ))
            } else if alpha > 1.0 {
                Some(Verdict::fail(Some(alpha), alpha, 1.0, "power_shift needs alpha <= 1"))
            } else {
                Some(Verdict::Pass)
            }
        }
        RhoSpec::Custom(_) => None,
    };
    if let Some(v) = family {
        checks.push(HypothesisCheck::new("rho_family", v));
    }

    RhoCheck {
        checks,
        derivative_sups: sups,
        cross_sup,
    }
}

/// Runs every check for `spec` on `grid`.
pub fn check_problem<T: Scalar>(spec: &crate::problem::ProblemSpec<T>, grid: &RadialGrid<T>) -> HypothesisReport {
    HypothesisReport {
        dim: spec.dim,
        lambda: spec.lambda.as_f64(),
        potential: check_potential(&spec.potential, grid),
        nonlinearity: check_nonlinearity(&spec.nonlinearity, spec.dim),
        rho: check_rho(&spec.rho),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn verdict<'a>(checks: &'a [HypothesisCheck], name: &str) -> &'a Verdict {
        &checks.iter().find(|c| c.name == name).unwrap().verdict
    }

    #[test]
    fn sobolev_n3_closed_form() {
        // 3 (π/2)^{4/3}
        let expected = 3.0 * (std::f64::consts::PI / 2.0).powf(4.0 / 3.0);
        assert_relative_eq!(sobolev_constant::<f64>(3).unwrap(), expected, max_relative = 1e-14);
        assert!(sobolev_constant::<f64>(2).is_err());
    }

    #[test]
    fn constant_potential_passes() {
        let g = RadialGrid::<f64>::new(3, 10.0, 501).unwrap();
        let c = check_potential(&PotentialSpec::constant(1.0), &g);
        assert!(c.checks.iter().all(|c| c.verdict == Verdict::Pass));
        assert_eq!(c.v_minus_norm, 0.0);
    }

    #[test]
    fn nonpositive_v_inf_fails_v1() {
        let g = RadialGrid::<f64>::new(3, 10.0, 501).unwrap();
        let c = check_potential(&PotentialSpec::constant(-1.0), &g);
        assert!(!verdict(&c.checks, "V1").passed());
    }

    #[test]
    fn slow_tail_fails_v1() {
        let g = RadialGrid::<f64>::new(3, 10.0, 501).unwrap();
        let v = PotentialSpec::custom(1.0, |r: f64| 1.0 + 1.0 / (1.0 + r));
        let c = check_potential(&v, &g);
        let w = verdict(&c.checks, "V1").witness().unwrap();
        assert!(w.at.unwrap() >= 9.5);
    }

    #[test]
    fn power_nonlinearity_passes_with_delta() {
        let f = NonlinearitySpec::power(1.0, 5.0).unwrap();
        let c = check_nonlinearity(&f, 3);
        assert!(c.checks.iter().all(|c| c.verdict == Verdict::Pass), "{:?}", c.checks);
        assert_relative_eq!(c.delta_hat, 3.0, max_relative = 1e-10);
        assert_relative_eq!(c.m_hat, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn linear_f_fails_f1_at_zero() {
        let f = NonlinearitySpec::custom(5.0, 1.0, |t: f64| (t, 1.0, 0.5 * t * t));
        let c = check_nonlinearity(&f, 3);
        let w = verdict(&c.checks, "f1").witness().unwrap();
        assert_eq!(w.at, Some(0.0));
        assert_eq!(w.lhs, 1.0);
    }

    #[test]
    fn cubic_with_declared_quintic_fails_f2_and_f4() {
        let f = NonlinearitySpec::custom(5.0, 1.0, |t: f64| (t * t * t, 3.0 * t * t, 0.25 * t.powi(4)));
        let c = check_nonlinearity(&f, 3);
        let w2 = verdict(&c.checks, "f2").witness().unwrap();
        assert!(w2.at.unwrap().abs() >= 1e5);
        assert!(!verdict(&c.checks, "f4").passed());
        assert!(c.m_hat < 1e-5);
        assert!(verdict(&c.checks, "f1").passed());
    }

    #[test]
    fn inconsistent_triple_is_flagged() {
        let f = NonlinearitySpec::custom(5.0, 1.0, |t: f64| {
            (t.powi(4) * t.signum(), 4.0 * t.powi(3).abs(), 0.3 * t.abs().powi(5))
        });
        let c = check_nonlinearity(&f, 3);
        assert!(!verdict(&c.checks, "f_consistency").passed());
    }

    #[test]
    fn exponent_gap_in_dimension_four() {
        let f = NonlinearitySpec::power(1.0, 5.0).unwrap();
        let c = check_nonlinearity(&f, 4);
        assert!(matches!(
            verdict(&c.checks, "f2_exponent"),
            Verdict::PassWithWarning { .. }
        ));
        let c = check_nonlinearity(&f, 6);
        assert!(verdict(&c.checks, "f2_exponent").passed());
        let c = check_nonlinearity(&NonlinearitySpec::power(1.0, 6.0).unwrap(), 6);
        assert!(!verdict(&c.checks, "f2_exponent").passed());
        let c = check_nonlinearity(&NonlinearitySpec::power(1.0, 4.0).unwrap(), 3);
        assert!(!verdict(&c.checks, "f2_exponent").passed());
        let c = check_nonlinearity(&NonlinearitySpec::power(1.0, 5.5).unwrap(), 5);
        assert!(verdict(&c.checks, "f2_exponent").passed());
    }

    #[test]
    fn rho_builtins_pass() {
        for spec in [
            RhoSpec::<f64>::Affine { a: 0.0, b: 1.0 },
            RhoSpec::Affine { a: 2.0, b: 0.0 },
            RhoSpec::SqrtShift,
            RhoSpec::AffinePlusSqrt { a: 1.0, b: 3.0 },
            RhoSpec::PowerShift { alpha: 0.3 },
            RhoSpec::PowerShift { alpha: 1.0 },
        ] {
            let c = check_rho(&spec);
            assert!(
                c.checks.iter().all(|c| c.verdict == Verdict::Pass),
                "{spec:?}: {:?}",
                c.checks
            );
        }
    }

    #[test]
    fn power_shift_below_threshold_fails_rho4() {
        let c = check_rho(&RhoSpec::<f64>::PowerShift { alpha: 0.2 });
        let w = verdict(&c.checks, "rho4").witness().unwrap();
        let s = w.at.unwrap();
        let threshold = 1.0 / (std::f64::consts::SQRT_2 * 0.8 - 1.0);
        assert!(s > threshold && s < 1.01 * threshold, "witness {s}");
        assert!(w.lhs < w.rhs);
        assert!(!verdict(&c.checks, "rho_family").passed());
    }

    #[test]
    fn quadratic_rho_is_unbounded() {
        let spec = RhoSpec::<f64>::custom(|s| [s * s, 2.0 * s, 2.0, 0.0, 0.0]);
        let c = check_rho(&spec);
        assert!(!verdict(&c.checks, "rho2").passed());
        assert!(!verdict(&c.checks, "rho4").passed());
    }
}
