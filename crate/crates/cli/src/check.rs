//! Quick self-checks: the squeezed-state sum identity and a few solver
//! invariants, per scheme.

use phasevar_core::squeezed::{amplitudes_auto, analytic_n0};
use phasevar_core::{appendix_sum_check, optimize_at_mu, variance_of_state, SchemeModel, SqueezedPoint};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn result(name: impl Into<String>, pass: bool, detail: String) -> CheckResult {
    CheckResult {
        name: name.into(),
        pass,
        detail,
    }
}

fn appendix() -> CheckResult {
    let dev = |nbar: f64, n0: f64| -> Result<f64, phasevar_core::Error> {
        let p = SqueezedPoint::from_nbar_n0(nbar, n0)?;
        let (num, ana) = appendix_sum_check(p.alpha, p.zeta, 1.0)?;
        Ok((num - ana).abs() / ana)
    };
    match (dev(1e4, 100.0), dev(1e6, analytic_n0(0.125, 1.0, 1e6))) {
        (Ok(a), Ok(b)) => result(
            "appendix_sum",
            a < 0.01 && b < a,
            format!("rel. deviation {a:.2e} at nbar=1e4, {b:.2e} at nbar=1e6"),
        ),
        (Err(e), _) | (_, Err(e)) => result("appendix_sum", false, format!("error:{}", e.code())),
    }
}

fn moments() -> CheckResult {
    let mut worst = 0.0f64;
    for alpha in [1.0, 10.0, 100.0] {
        for r in [0.0, 1.0, 3.0, 5.0] {
            let p = match SqueezedPoint::new(alpha, -r) {
                Ok(p) => p,
                Err(e) => return result("squeezed_moments", false, format!("error:{}", e.code())),
            };
            let b = match amplitudes_auto(alpha, -r) {
                Ok(b) => b,
                Err(e) => return result("squeezed_moments", false, format!("error:{}", e.code())),
            };
            let m1: f64 = b.iter().enumerate().map(|(n, x)| n as f64 * x * x).sum();
            let var: f64 = b.iter().enumerate().map(|(n, x)| (n as f64 - m1).powi(2) * x * x).sum();
            worst = worst
                .max((m1 / p.nbar - 1.0).abs())
                .max((var / p.number_variance() - 1.0).abs());
        }
    }
    result("squeezed_moments", worst < 1e-6, format!("worst rel. error {worst:.2e}"))
}

fn scheme_checks(s: &SchemeModel) -> Vec<CheckResult> {
    let name = s.name();
    let h_ok = (0..100_000u64).chain((5..40).map(|k| 1u64 << k)).all(|m| (0.0..=1.0).contains(&s.h(m)));
    let mut out = vec![result(format!("h_range:{name}"), h_ok, "0 <= h(m) <= 1".into())];

    let mut prev_nbar = f64::INFINITY;
    let mut prev_v = 0.0;
    let mut worst_identity = 0.0f64;
    let mut monotone = true;
    for k in 0..8 {
        let mu = 10f64.powf(-7.0 + 0.75 * k as f64);
        match optimize_at_mu(s, mu) {
            Ok(r) => {
                monotone &= r.nbar <= prev_nbar && r.variance >= prev_v - 1e-15;
                prev_nbar = r.nbar;
                prev_v = r.variance;
                let direct = variance_of_state(&r.state, s).unwrap_or(f64::NAN);
                worst_identity = worst_identity.max((direct - r.variance).abs());
            }
            Err(e) => {
                out.push(result(format!("optimizer:{name}"), false, format!("error:{}", e.code())));
                return out;
            }
        }
    }
    out.push(result(
        format!("monotone:{name}"),
        monotone,
        "nbar falls and V rises with mu".into(),
    ));
    out.push(result(
        format!("variance_identity:{name}"),
        worst_identity < 1e-10,
        format!("|V - <S>| <= {worst_identity:.1e}"),
    ));
    out
}

pub fn run_checks(schemes: &[SchemeModel]) -> Vec<CheckResult> {
    let mut out = vec![appendix(), moments()];
    for s in schemes {
        out.extend(scheme_checks(s));
    }
    out
}
