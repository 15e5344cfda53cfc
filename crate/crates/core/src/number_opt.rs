//! Minimum-variance states in the number basis.
//!
//! For a fixed multiplier μ the optimal state is the ground state of
//! `Ŝ + μN̂`, a symmetric tridiagonal matrix with diagonal `2 + μn` and
//! couplings `-(1 - h(n))`. The mean photon number follows from the state;
//! a target n̄ is reached by searching μ on a log scale.

use crate::error::{Error, Result};
use crate::schemes::SchemeModel;
use crate::tridiag::ground_pair;

/// Airy-function first zero magnitude, `-z₁`.
pub const AIRY_ZERO: f64 = 2.338_107_410_459_767;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    /// Real amplitudes `b_n`, n = 0..=cutoff.
    pub amplitudes: Vec<f64>,
    pub cutoff: usize,
    /// Σ b_n² over the top guard band of indices.
    pub tail_mass: f64,
    pub converged: bool,
}

impl StateVector {
    /// Wraps normalized amplitudes, computing the guard-band tail mass.
    pub fn from_amplitudes(amplitudes: Vec<f64>, guard_fraction: f64, tail_tolerance: f64) -> Self {
        let cutoff = amplitudes.len() - 1;
        let tail_mass = guard_band_mass(&amplitudes, guard_fraction);
        Self {
            amplitudes,
            cutoff,
            tail_mass,
            converged: tail_mass <= tail_tolerance,
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|b| b * b).sum()
    }

    pub fn mean_photon_number(&self) -> f64 {
        mean_n(&self.amplitudes)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub mu: f64,
    pub nu: f64,
    pub nbar: f64,
    pub variance: f64,
    pub state: StateVector,
    /// Eigen-solves performed.
    pub iterations: usize,
    pub cutoff_doublings: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub tail_tolerance: f64,
    pub max_cutoff: usize,
    pub guard_fraction: f64,
    /// Half-width of the initial basis in units of the state width.
    pub width_sigmas: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            tail_tolerance: 1e-12,
            max_cutoff: 1 << 24,
            guard_fraction: 0.01,
            width_sigmas: 12.0,
        }
    }
}

fn guard_band_mass(b: &[f64], fraction: f64) -> f64 {
    let g = ((b.len() as f64 * fraction).ceil() as usize).clamp(1, b.len());
    b[b.len() - g..].iter().map(|x| x * x).sum()
}

fn mean_n(b: &[f64]) -> f64 {
    let (num, den) = b
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(num, den), (n, x)| (num + n as f64 * x * x, den + x * x));
    num / den
}

/// Diagonal `2 + μn` (n = 0..=cutoff) and couplings `-(1 - h(n))`.
pub fn build_tridiagonal(scheme: &SchemeModel, mu: f64, cutoff: usize) -> (Vec<f64>, Vec<f64>) {
    let diag = (0..=cutoff).map(|n| 2.0 + mu * n as f64).collect();
    let offdiag = (0..cutoff).map(|n| -(1.0 - scheme.h(n as u64))).collect();
    (diag, offdiag)
}

/// `V = 2 - 2 Σ (1 - h(n)) b_n b_{n+1}` for a normalized state.
pub fn variance_of_state(state: &StateVector, scheme: &SchemeModel) -> Result<f64> {
    let norm_sq = state.norm_sq();
    if (norm_sq - 1.0).abs() > 1e-9 {
        return Err(Error::Unnormalized { norm_sq });
    }
    Ok(variance_of_amplitudes(&state.amplitudes, scheme))
}

/// Phase variance of (possibly unnormalized) amplitudes. Uses
/// `2|b|² - 2Σ b_n b_{n+1} = b_0² + Σ (b_{n+1} - b_n)²`, which avoids the
/// cancellation in `2 - 2⟨cos φ⟩` for narrow phase distributions.
pub(crate) fn variance_of_amplitudes(b: &[f64], scheme: &SchemeModel) -> f64 {
    let n = b.len();
    let mut norm_sq = 0.0;
    let mut spread = b[0] * b[0];
    let mut excess = 0.0;
    for i in 0..n {
        norm_sq += b[i] * b[i];
        let next = if i + 1 < n { b[i + 1] } else { 0.0 };
        let d = next - b[i];
        spread += d * d;
        if !scheme.is_canonical() && i + 1 < n {
            excess += scheme.h(i as u64) * b[i] * next;
        }
    }
    (spread + 2.0 * excess) / norm_sq
}

/// Stationary point `x0` and curvature `f2 = c p (p+1) x0^(-p-2)` of the
/// continuum potential `2h(x) + μx`.
pub(crate) fn stationary_point(c: f64, p: f64, mu: f64) -> (f64, f64) {
    let x0 = (mu / (2.0 * c * p)).powf(-1.0 / (p + 1.0));
    let f2 = c * p * (p + 1.0) * x0.powf(-p - 2.0);
    (x0, f2)
}

fn validate_for_optimizer(scheme: &SchemeModel) -> Result<()> {
    if let Some(t) = scheme.tail() {
        if t.p >= 2.0 {
            return Err(Error::InvalidScheme(format!(
                "fixed-mean optimization needs p < 2 (got p = {})",
                t.p
            )));
        }
    }
    Ok(())
}

impl OptimizerConfig {
    fn initial_cutoff(&self, scheme: &SchemeModel, mu: f64) -> f64 {
        match scheme.tail() {
            Some(t) if !scheme.is_canonical() => {
                let (x0, f2) = stationary_point(t.c, t.p, mu);
                (x0 + self.width_sigmas * f2.powf(-0.25)).ceil().max(16.0)
            }
            // linear potential with a wall at n = 0: Airy decay length μ^(-1/3)
            _ => (16.0 * mu.powf(-1.0 / 3.0)).ceil() + 16.0,
        }
    }

    pub fn optimize_at_mu(&self, scheme: &SchemeModel, mu: f64) -> Result<OptimizationResult> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("mu must be positive (got {mu})")));
        }
        validate_for_optimizer(scheme)?;
        let initial = self.initial_cutoff(scheme, mu);
        if initial.is_nan() || initial > self.max_cutoff as f64 {
            return Err(Error::CutoffExceeded {
                required: if initial.is_finite() { initial as usize } else { usize::MAX },
                max: self.max_cutoff,
            });
        }
        let mut cutoff = initial as usize;
        let mut doublings = 0;
        let mut solves = 0;
        loop {
            let (diag, off) = build_tridiagonal(scheme, mu, cutoff);
            let (nu, b) = ground_pair(&diag, &off)?;
            solves += 1;
            let state = StateVector::from_amplitudes(b, self.guard_fraction, self.tail_tolerance);
            if state.converged {
                let nbar = state.mean_photon_number();
                return Ok(OptimizationResult {
                    mu,
                    nu,
                    nbar,
                    variance: nu - mu * nbar,
                    state,
                    iterations: solves,
                    cutoff_doublings: doublings,
                });
            }
            let next = 2 * cutoff;
            if next > self.max_cutoff {
                return Err(Error::CutoffExceeded {
                    required: next,
                    max: self.max_cutoff,
                });
            }
            cutoff = next;
            doublings += 1;
        }
    }

    pub fn optimize_at_nbar(
        &self,
        scheme: &SchemeModel,
        nbar_target: f64,
        rel_tol: f64,
    ) -> Result<OptimizationResult> {
        check_nbar_request(nbar_target, rel_tol)?;
        validate_for_optimizer(scheme)?;
        let mut solves = 0;
        let (_, mut res) = search_mu(seed_mu(scheme, nbar_target), nbar_target, rel_tol, |mu| {
            let r = self.optimize_at_mu(scheme, mu)?;
            solves += r.iterations;
            Ok((r.nbar, r))
        })?;
        res.iterations = solves;
        Ok(res)
    }

    pub fn optimize_truncated(&self, scheme: &SchemeModel, n_max: usize) -> Result<(f64, StateVector)> {
        if n_max < 1 {
            return Err(Error::InvalidArgument("photon-number limit must be at least 1".into()));
        }
        let (diag, off) = build_tridiagonal(scheme, 0.0, n_max);
        let (v, b) = ground_pair(&diag, &off)?;
        Ok((v, StateVector::from_amplitudes(b, self.guard_fraction, self.tail_tolerance)))
    }
}

pub(crate) fn check_nbar_request(nbar_target: f64, rel_tol: f64) -> Result<()> {
    if !(nbar_target >= 0.5 && nbar_target.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "target mean photon number must be >= 0.5 (got {nbar_target})"
        )));
    }
    if !(rel_tol > 0.0 && rel_tol <= 0.1) {
        return Err(Error::InvalidArgument(format!(
            "relative tolerance must lie in (0, 0.1] (got {rel_tol})"
        )));
    }
    Ok(())
}

/// Initial multiplier for a target n̄: inverts `μ = 2cp x0^-(p+1)`, or the
/// Airy relation `n̄ = (2/3)|z₁| μ^(-1/3)` when there is no power law.
pub(crate) fn seed_mu(scheme: &SchemeModel, nbar: f64) -> f64 {
    match scheme.tail() {
        Some(t) if !scheme.is_canonical() => 2.0 * t.c * t.p * nbar.powf(-(t.p + 1.0)),
        _ => (2.0 * AIRY_ZERO / (3.0 * nbar)).powi(3),
    }
}

const MAX_DOUBLINGS: usize = 60;
const MAX_BISECTIONS: usize = 200;

/// Finds μ with `|n̄(μ) - target| <= rel_tol·target`, bracketing by doubling
/// and then bisecting `ln μ`. `eval` returns `(n̄, payload)`.
pub(crate) fn search_mu<R>(
    seed: f64,
    target: f64,
    rel_tol: f64,
    mut eval: impl FnMut(f64) -> Result<(f64, R)>,
) -> Result<(f64, R)> {
    let tol = rel_tol * target;
    let (n0, r0) = eval(seed)?;
    if (n0 - target).abs() <= tol {
        return Ok((seed, r0));
    }
    // (μ, n̄) at the small-μ end (n̄ above target) and the large-μ end
    let (mut lo, mut hi);
    let mut found = None;
    if n0 > target {
        lo = (seed, n0);
        let mut mu = seed;
        for _ in 0..MAX_DOUBLINGS {
            mu *= 2.0;
            let (n, r) = eval(mu)?;
            if n > lo.1 {
                return Err(Error::NonMonotone {
                    mu_lo: lo.0,
                    nbar_lo: lo.1,
                    mu_hi: mu,
                    nbar_hi: n,
                });
            }
            if (n - target).abs() <= tol {
                return Ok((mu, r));
            }
            if n < target {
                found = Some((mu, n));
                break;
            }
            lo = (mu, n);
        }
        hi = found.ok_or(Error::BracketNotFound {
            target,
            doublings: MAX_DOUBLINGS,
        })?;
    } else {
        hi = (seed, n0);
        let mut mu = seed;
        for _ in 0..MAX_DOUBLINGS {
            mu *= 0.5;
            let (n, r) = eval(mu)?;
            if n < hi.1 {
                return Err(Error::NonMonotone {
                    mu_lo: mu,
                    nbar_lo: n,
                    mu_hi: hi.0,
                    nbar_hi: hi.1,
                });
            }
            if (n - target).abs() <= tol {
                return Ok((mu, r));
            }
            if n > target {
                found = Some((mu, n));
                break;
            }
            hi = (mu, n);
        }
        lo = found.ok_or(Error::BracketNotFound {
            target,
            doublings: MAX_DOUBLINGS,
        })?;
    }

    let mut best: Option<(f64, f64, R)> = None;
    for _ in 0..MAX_BISECTIONS {
        let mid = (lo.0 * hi.0).sqrt();
        if mid <= lo.0 || mid >= hi.0 {
            break;
        }
        let (n, r) = eval(mid)?;
        if n > lo.1 || n < hi.1 {
            return Err(Error::NonMonotone {
                mu_lo: lo.0,
                nbar_lo: lo.1,
                mu_hi: hi.0,
                nbar_hi: hi.1,
            });
        }
        if (n - target).abs() <= tol {
            return Ok((mid, r));
        }
        let better = best
            .as_ref()
            .is_none_or(|(_, bn, _)| (n - target).abs() < (bn - target).abs());
        if n > target {
            lo = (mid, n);
        } else {
            hi = (mid, n);
        }
        if better {
            best = Some((mid, n, r));
        }
    }
    Err(Error::SearchStalled {
        target,
        nbar: best.map_or(f64::NAN, |(_, n, _)| n),
    })
}

pub fn optimize_at_mu(scheme: &SchemeModel, mu: f64) -> Result<OptimizationResult> {
    OptimizerConfig::default().optimize_at_mu(scheme, mu)
}

pub fn optimize_at_nbar(scheme: &SchemeModel, nbar_target: f64, rel_tol: f64) -> Result<OptimizationResult> {
    OptimizerConfig::default().optimize_at_nbar(scheme, nbar_target, rel_tol)
}

/// Ground state of `Ŝ` on the basis `0..=n_max`.
pub fn optimize_truncated(scheme: &SchemeModel, n_max: usize) -> Result<(f64, StateVector)> {
    OptimizerConfig::default().optimize_truncated(scheme, n_max)
}
