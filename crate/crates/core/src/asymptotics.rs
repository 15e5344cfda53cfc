//! Closed-form asymptotic laws and reference curves.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::number_opt::AIRY_ZERO;
use crate::schemes::{PowerTail, SchemeModel, MARK_I_C2};

fn power_tail(scheme: &SchemeModel) -> Result<PowerTail> {
    match scheme.tail() {
        Some(t) if !scheme.is_canonical() => Ok(t),
        _ if scheme.is_canonical() => Err(Error::NoPowerLaw),
        _ => Err(Error::MissingTail),
    }
}

/// Two-term minimum variance at fixed mean photon number,
/// `2c n̄^-p + √(cp(p+1)) n̄^(-p/2-1)`.
pub fn vmin_general(scheme: &SchemeModel, nbar: f64) -> Result<f64> {
    let t = power_tail(scheme)?;
    Ok(2.0 * t.c * nbar.powf(-t.p) + t.z_asymptote() * nbar.powf(-t.p / 2.0 - 1.0))
}

/// Excess over the leading term, scaled so that it tends to `√(cp(p+1))`.
pub fn z_param(variance: f64, nbar: f64, scheme: &SchemeModel) -> Result<f64> {
    let t = power_tail(scheme)?;
    Ok((variance - 2.0 * t.c * nbar.powf(-t.p)) * nbar.powf(t.p / 2.0 + 1.0))
}

/// Mark I z prediction keeping the `c₂/m` term of `h_I` in both the
/// leading `2h(n̄)` and the curvature `√h''(n̄)`:
/// `z = 2c₂ n̄^(1/4) + √(cp(p+1) + 2c₂ n̄^(-1/2))`.
/// The radicand is clipped at zero (it turns negative below n̄ ≈ 4.7).
pub fn z_mark_i_corrected(nbar: f64) -> f64 {
    let t = SchemeModel::mark_i().tail().unwrap();
    let cpp = t.c * t.p * (t.p + 1.0);
    2.0 * MARK_I_C2 * nbar.powf(0.25) + (cpp + 2.0 * MARK_I_C2 / nbar.sqrt()).max(0.0).sqrt()
}

/// Minimum variance with photon number capped at `n_max`,
/// `2c N^-p + |z₁| (2cp)^(2/3) N^(-2(1+p)/3)`.
pub fn vmin_truncated_asym(scheme: &SchemeModel, n_max: f64) -> Result<f64> {
    let t = power_tail(scheme)?;
    Ok(2.0 * t.c * n_max.powf(-t.p)
        + AIRY_ZERO * (2.0 * t.c * t.p).powf(2.0 / 3.0) * n_max.powf(-2.0 * (1.0 + t.p) / 3.0))
}

/// Squeezed-state intrinsic constant `3/2 + 2 ln 2 - (1/4) ln 2π`.
pub fn collett_delta() -> f64 {
    1.5 + 2.0 * LN_2 - 0.25 * (2.0 * PI).ln()
}

pub const SUMMY_PEGG_C: f64 = 1.88;
pub const SUMMY_PEGG_EPS: f64 = 0.86;
/// Published heterodyne power law `A / n̄^k`, central values and errors.
pub const DARIANO_PARIS_A: f64 = 1.00;
pub const DARIANO_PARIS_K: f64 = 1.30;
pub const DARIANO_PARIS_A_ERR: f64 = 0.02;
pub const DARIANO_PARIS_K_ERR: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceCurve {
    /// `C/(n̄+ε)²`, fixed-mean optimum of the intrinsic variance.
    SummyPegg,
    /// `(ln n̄ + Δ)/(4n̄²)`, squeezed-state intrinsic optimum.
    Collett,
    /// `1.00 n̄^-1.30`, the claimed heterodyne law.
    DArianoParis,
    /// `ln n̄ / (4n̄²)`, bound on measurement-induced variance.
    LowerBound,
    /// `1/(2n̄)`, heterodyne on a coherent state.
    CoherentHeterodyne,
    /// `1/(4n̄) + 1/(8n̄^{3/2})`, adaptive measurement on a coherent state.
    CoherentAdaptive,
    /// `(1-η)/(4ηn̄)`, extra variance from detector efficiency η.
    Inefficiency { eta: f64 },
    /// `δv/n̄`, extra variance from a feedback delay δv.
    TimeDelay { delay: f64 },
}

impl ReferenceCurve {
    pub fn name(&self) -> String {
        match self {
            Self::SummyPegg => "summy_pegg".into(),
            Self::Collett => "collett".into(),
            Self::DArianoParis => "dariano_paris".into(),
            Self::LowerBound => "lower_bound".into(),
            Self::CoherentHeterodyne => "coherent_het".into(),
            Self::CoherentAdaptive => "coherent_adaptive".into(),
            Self::Inefficiency { eta } => format!("inefficiency:{eta}"),
            Self::TimeDelay { delay } => format!("time_delay:{delay}"),
        }
    }

    pub fn provenance(&self) -> &'static str {
        match self {
            Self::SummyPegg => "Summy & Pegg fixed-mean intrinsic optimum fit, C=1.88, eps=0.86",
            Self::Collett => "Collett squeezed-state intrinsic optimum",
            Self::DArianoParis => "D'Ariano & Paris numerical heterodyne fit, (1.00±0.02)/n^(1.30±0.02)",
            Self::LowerBound => "lower bound on measurement-introduced variance",
            Self::CoherentHeterodyne => "heterodyne variance of a coherent state",
            Self::CoherentAdaptive => "adaptive (mark II) variance of a coherent state",
            Self::Inefficiency { .. } => "detector-inefficiency correction",
            Self::TimeDelay { .. } => "feedback time-delay correction",
        }
    }

    pub fn evaluate(&self, nbar: f64) -> Result<f64> {
        if nbar.is_nan() || nbar < 1.0 {
            return Err(Error::InvalidArgument(format!(
                "reference curves need an argument >= 1 (got {nbar})"
            )));
        }
        Ok(match *self {
            Self::SummyPegg => SUMMY_PEGG_C / (nbar + SUMMY_PEGG_EPS).powi(2),
            Self::Collett => (nbar.ln() + collett_delta()) / (4.0 * nbar * nbar),
            Self::DArianoParis => DARIANO_PARIS_A * nbar.powf(-DARIANO_PARIS_K),
            Self::LowerBound => nbar.ln() / (4.0 * nbar * nbar),
            Self::CoherentHeterodyne => 1.0 / (2.0 * nbar),
            Self::CoherentAdaptive => 1.0 / (4.0 * nbar) + 1.0 / (8.0 * nbar.powf(1.5)),
            Self::Inefficiency { eta } => {
                if !(eta > 0.0 && eta <= 1.0) {
                    return Err(Error::InvalidArgument(format!("efficiency must lie in (0, 1] (got {eta})")));
                }
                (1.0 - eta) / (4.0 * eta * nbar)
            }
            Self::TimeDelay { delay } => delay / nbar,
        })
    }
}

impl fmt::Display for ReferenceCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for ReferenceCurve {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let param = |what: &str| -> Result<f64> {
            arg.ok_or_else(|| Error::UnknownCurve(format!("{s} (needs ':{what}')")))?
                .parse()
                .map_err(|_| Error::UnknownCurve(s.to_string()))
        };
        match (head.to_ascii_lowercase().as_str(), arg) {
            ("summy_pegg", None) => Ok(Self::SummyPegg),
            ("collett", None) => Ok(Self::Collett),
            ("dariano_paris", None) => Ok(Self::DArianoParis),
            ("lower_bound", None) => Ok(Self::LowerBound),
            ("coherent_het", None) => Ok(Self::CoherentHeterodyne),
            ("coherent_adaptive", None) => Ok(Self::CoherentAdaptive),
            ("inefficiency", _) => Ok(Self::Inefficiency { eta: param("eta")? }),
            ("time_delay", _) => Ok(Self::TimeDelay { delay: param("delay")? }),
            _ => Err(Error::UnknownCurve(s.to_string())),
        }
    }
}

/// Evaluates a reference curve by name, e.g. `"dariano_paris"` or
/// `"inefficiency:0.9"`.
pub fn reference_curves(name: &str, argument: f64) -> Result<f64> {
    name.parse::<ReferenceCurve>()?.evaluate(argument)
}

/// ⟨1|ξ³|0⟩ and ⟨3|ξ³|0⟩ for harmonic-oscillator states.
pub const XI3_10: f64 = 1.060_660_171_779_821_3; // 3/(2√2)
pub const XI3_30: f64 = 0.866_025_403_784_438_6; // √3/2

/// Constants of the harmonic-plus-cubic expansion about the stationary
/// point of `2h(x) + μx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationConstants {
    pub x0: f64,
    /// `f''(x0)/2 = c p (p+1) x0^(-p-2)`.
    pub f2: f64,
    /// `f'''(x0)/6`.
    pub f3: f64,
    /// Cubic strength in the scaled coordinate `ξ = f2^(1/4)(x - x0)`.
    pub b: f64,
    pub e0_unperturbed: f64,
    pub e0_corrected: f64,
    /// Predicted mean photon number `x0 + (p+2)/(4√(cp(p+1))) x0^(p/2)`.
    pub nbar: f64,
    /// `√f2 x0² > 10`.
    pub valid: bool,
}

pub fn perturbation_constants(scheme: &SchemeModel, mu: f64) -> Result<PerturbationConstants> {
    let t = power_tail(scheme)?;
    if mu.is_nan() || mu <= 0.0 {
        return Err(Error::InvalidArgument(format!("mu must be positive (got {mu})")));
    }
    let (c, p) = (t.c, t.p);
    let x0 = (mu / (2.0 * c * p)).powf(-1.0 / (p + 1.0));
    let cpp = c * p * (p + 1.0);
    let f2 = cpp * x0.powf(-p - 2.0);
    let f3 = -cpp * (p + 2.0) * x0.powf(-p - 3.0) / 3.0;
    let b = -(p + 2.0) / 3.0 * cpp.powf(0.25) * x0.powf(-p / 4.0 - 1.5);
    let e0 = f2.sqrt();
    let second_order = (XI3_10 * XI3_10 + XI3_30 * XI3_30 / 3.0) * b * b / (2.0 * e0);
    Ok(PerturbationConstants {
        x0,
        f2,
        f3,
        b,
        e0_unperturbed: e0,
        e0_corrected: e0 - second_order,
        nbar: x0 + (p + 2.0) / (4.0 * cpp.sqrt()) * x0.powf(p / 2.0),
        valid: p < 2.0 && f2.sqrt() * x0 * x0 > 10.0,
    })
}
