//! Phase-squeezed states `|α, ζ⟩` with real α ≥ 0 and real ζ ≤ 0.
//!
//! Number-basis amplitudes come from the three-term recursion
//! `μ√(n+1) b_{n+1} = β b_n - ν√n b_{n-1}` with `μ = cosh r`,
//! `ν = -sinh r`, `β = α(μ + ν)`. For phase squeezing every term on the
//! right is nonnegative, so the forward recursion is free of cancellation.
//! Magnitudes are tracked against a running log scale so that states with
//! large n̄ neither underflow at `n = 0` nor overflow at the peak.

use crate::error::{Error, Result};
use crate::golden;
use crate::number_opt::variance_of_amplitudes;
use crate::schemes::SchemeModel;

/// Rescale whenever an amplitude leaves `[1/BIG, BIG]`.
const BIG: f64 = 1e100;
const NORMALIZATION_TOLERANCE: f64 = 1e-8;
/// Stop the adaptive recursion once `b_n² / max b²` drops below this.
const TAIL_CUT: f64 = 1e-30;
const MAX_TERMS: usize = 1 << 27;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezedPoint {
    pub alpha: f64,
    pub zeta: f64,
    pub r: f64,
    pub mu_s: f64,
    pub nu_s: f64,
    pub beta: f64,
    pub nbar: f64,
    pub n0: f64,
    /// Phase variance under the scheme the point was evaluated for (NaN
    /// until evaluated).
    pub variance: f64,
}

impl SqueezedPoint {
    pub fn new(alpha: f64, zeta: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) || !(zeta <= 0.0 && zeta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "phase-squeezed states need alpha >= 0 and zeta <= 0 (got {alpha}, {zeta})"
            )));
        }
        let r = -zeta;
        let mu_s = r.cosh();
        let nu_s = -r.sinh();
        let nbar = alpha * alpha + nu_s * nu_s;
        Ok(Self {
            alpha,
            zeta,
            r,
            mu_s,
            nu_s,
            beta: alpha * (mu_s + nu_s),
            nbar,
            n0: nbar * (2.0 * zeta).exp(),
            variance: f64::NAN,
        })
    }

    /// The state with mean photon number `nbar` and `n0 = n̄ e^{2ζ}`.
    pub fn from_nbar_n0(nbar: f64, n0: f64) -> Result<Self> {
        if !(n0 > 0.0 && n0 <= nbar) {
            return Err(Error::InvalidArgument(format!("need 0 < n0 <= nbar (got n0={n0}, nbar={nbar})")));
        }
        let zeta = 0.5 * (n0 / nbar).ln();
        let sinh_r = (-zeta).sinh();
        let alpha_sq = nbar - sinh_r * sinh_r;
        if alpha_sq < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "n0 = {n0} needs more squeezing photons than nbar = {nbar}"
            )));
        }
        let mut p = Self::new(alpha_sq.sqrt(), zeta)?;
        p.nbar = nbar;
        Ok(p)
    }

    /// Photon-number variance `α²(μ-ν)² + 2μ²ν²`.
    pub fn number_variance(&self) -> f64 {
        let d = self.mu_s - self.nu_s;
        self.alpha * self.alpha * d * d + 2.0 * self.mu_s * self.mu_s * self.nu_s * self.nu_s
    }

    /// Smallest n0 reachable at this n̄ (all photons in squeezing).
    pub fn min_n0(nbar: f64) -> f64 {
        let r_max = nbar.sqrt().asinh();
        nbar * (-2.0 * r_max).exp()
    }
}

/// Raw recursion output: `b_n · exp(scale[n])` are the true amplitudes.
struct ScaledAmplitudes {
    values: Vec<f64>,
    scale: Vec<f64>,
}

fn recurse(point: &SqueezedPoint, stop: impl Fn(usize, f64) -> bool) -> Result<ScaledAmplitudes> {
    let (mu, nu, beta) = (point.mu_s, point.nu_s, point.beta);
    let log_b0 = -0.5 * mu.ln() - 0.5 * beta * beta + 0.5 * (nu / mu) * beta * beta;
    let mut values = vec![1.0];
    let mut scale = vec![log_b0];
    let mut log_scale = log_b0;
    let mut log_peak = log_b0;
    let (mut prev, mut cur) = (0.0f64, 1.0f64);
    let mut n = 0usize;
    loop {
        let level = cur.abs().max(prev.abs());
        let log_level = log_scale + level.ln();
        log_peak = log_peak.max(log_level);
        let rel_sq = (2.0 * (log_level - log_peak)).exp();
        if stop(n, rel_sq) {
            break;
        }
        if n + 1 >= MAX_TERMS {
            return Err(Error::InvalidArgument(format!(
                "squeezed state needs more than {MAX_TERMS} number states"
            )));
        }
        let next = (beta * cur - nu * (n as f64).sqrt() * prev) / (mu * ((n + 1) as f64).sqrt());
        prev = cur;
        cur = next;
        n += 1;
        let level = cur.abs().max(prev.abs());
        if level > BIG || (level < 1.0 / BIG && level > 0.0) {
            let f = level.ln();
            prev /= level;
            cur /= level;
            log_scale += f;
        }
        values.push(cur);
        scale.push(log_scale);
    }
    Ok(ScaledAmplitudes { values, scale })
}

fn finish(raw: ScaledAmplitudes) -> Result<Vec<f64>> {
    let ScaledAmplitudes { values, scale } = raw;
    let log_max = values
        .iter()
        .zip(&scale)
        .filter(|(v, _)| **v != 0.0)
        .map(|(v, s)| v.abs().ln() + s)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut b: Vec<f64> = values
        .iter()
        .zip(&scale)
        .map(|(v, s)| if *v == 0.0 { 0.0 } else { v.signum() * (v.abs().ln() + s - log_max).exp() })
        .collect();
    let sum_sq: f64 = b.iter().map(|x| x * x).sum();
    // Σ of the true (analytically scaled) squares is exp(2 log_max) · sum_sq
    let defect = (2.0 * log_max + sum_sq.ln()).exp_m1().abs();
    if defect.is_nan() || defect > NORMALIZATION_TOLERANCE {
        return Err(Error::Precision { defect });
    }
    let inv = 1.0 / sum_sq.sqrt();
    b.iter_mut().for_each(|x| *x *= inv);
    Ok(b)
}

/// Normalized amplitudes `b_0..=b_{n_cut}` of `|α, ζ⟩`.
///
/// Fails with [`Error::Precision`] when the truncated, renormalized vector
/// does not reproduce unit norm against the closed-form `b_0`; that covers
/// both a cutoff that is too small and accumulated roundoff.
pub fn amplitudes(alpha: f64, zeta: f64, n_cut: usize) -> Result<Vec<f64>> {
    let point = SqueezedPoint::new(alpha, zeta)?;
    finish(recurse(&point, |n, _| n >= n_cut)?)
}

/// Amplitudes with the cutoff chosen automatically: at least
/// `n̄ + 12√⟨Δn²⟩`, extended until the tail is negligible.
pub fn amplitudes_auto(alpha: f64, zeta: f64) -> Result<Vec<f64>> {
    let point = SqueezedPoint::new(alpha, zeta)?;
    let n_min = (point.nbar + 12.0 * point.number_variance().sqrt()).ceil() as usize + 32;
    finish(recurse(&point, |n, rel_sq| n >= n_min && rel_sq < TAIL_CUT)?)
}

/// `V = 2 - 2Σ b_n b_{n+1} + 2Σ h(n) b_n b_{n+1}`.
pub fn squeezed_variance(alpha: f64, zeta: f64, scheme: &SchemeModel) -> Result<f64> {
    let b = amplitudes_auto(alpha, zeta)?;
    Ok(variance_of_amplitudes(&b, scheme))
}

/// Predicted optimal `n0` for a power law `c m^-p`.
pub fn analytic_n0(c: f64, p: f64, nbar: f64) -> f64 {
    2.0 * (c * p * (p + 1.0)).sqrt() * nbar.powf(1.0 - p / 2.0)
}

/// Optimal n0 for canonical measurement, balancing `n0/(4n̄²)` against
/// `2 erfc(√(2 n0))`: solves `1/(4n̄²) = √(8/(π n0)) e^{-2 n0}`.
fn intrinsic_n0(nbar: f64) -> f64 {
    let mut n0: f64 = 1.0;
    for _ in 0..50 {
        n0 = 0.5 * (4.0 * nbar * nbar * (8.0 / (std::f64::consts::PI * n0)).sqrt()).ln();
        n0 = n0.max(0.5);
    }
    n0
}

const SCAN_POINTS: usize = 41;
const SCAN_HALF_SPAN: f64 = 4.0;

/// Minimizes the squeezed-state phase variance over `n0` at fixed n̄.
pub fn optimize_squeezed(scheme: &SchemeModel, nbar: f64) -> Result<SqueezedPoint> {
    if !(nbar >= 1.0 && nbar.is_finite()) {
        return Err(Error::InvalidArgument(format!("nbar must be >= 1 (got {nbar})")));
    }
    let seed = match scheme.tail() {
        Some(t) if !scheme.is_canonical() => analytic_n0(t.c, t.p, nbar).max(intrinsic_n0(nbar)),
        _ => intrinsic_n0(nbar),
    };
    let u_min = SqueezedPoint::min_n0(nbar).ln() + 1e-9;
    let u_max = nbar.ln() - 1e-9;
    let lo = (seed.ln() - SCAN_HALF_SPAN).max(u_min);
    let hi = (seed.ln() + SCAN_HALF_SPAN).min(u_max);

    let eval = |u: f64| -> Result<f64> {
        let p = SqueezedPoint::from_nbar_n0(nbar, u.exp())?;
        squeezed_variance(p.alpha, p.zeta, scheme)
    };

    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / (SCAN_POINTS - 1) as f64)
        .collect();
    let values = grid.iter().map(|&u| eval(u)).collect::<Result<Vec<f64>>>()?;
    let k = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(k, _)| k)
        .unwrap();
    let a = grid[k.saturating_sub(1)];
    let b = grid[(k + 1).min(SCAN_POINTS - 1)];

    let mut failure = None;
    let (u, v) = golden::minimize(
        |u| match eval(u) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        a,
        b,
        1e-6,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let (u, v) = if v <= values[k] { (u, v) } else { (grid[k], values[k]) };
    let mut point = SqueezedPoint::from_nbar_n0(nbar, u.exp())?;
    point.variance = v;
    Ok(point)
}

/// Brute-force `Σ (n+1)^-p b_n b_{n+1}` next to `n̄^-p [1 + p(p+1)/(2 n0)]`.
pub fn appendix_sum_check(alpha: f64, zeta: f64, p: f64) -> Result<(f64, f64)> {
    let point = SqueezedPoint::new(alpha, zeta)?;
    let b = amplitudes_auto(alpha, zeta)?;
    let numeric: f64 = b
        .windows(2)
        .enumerate()
        .map(|(n, w)| ((n + 1) as f64).powf(-p) * w[0] * w[1])
        .sum();
    let analytic = point.nbar.powf(-p) * (1.0 + p * (p + 1.0) / (2.0 * point.n0));
    Ok((numeric, analytic))
}
