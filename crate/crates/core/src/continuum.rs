//! Large-n̄ solver for the continuous form of the optimization,
//! `-y'' + (2h(x) + μx) y = ν y`.
//!
//! The operator is discretized with a three-point stencil on a uniform grid
//! around the stationary point, solved at steps `s`, `s/2`, `s/4`, and
//! projected to zero step assuming an `a s² + b s⁴` error.

use std::thread;

use crate::error::{Error, Result};
use crate::number_opt::{check_nbar_request, search_mu, seed_mu, stationary_point};
use crate::schemes::SchemeModel;
use crate::tridiag::ground_pair;

/// Fraction of grid nodes at each edge treated as the boundary layer.
const EDGE_FRACTION: f64 = 0.01;
const BOUNDARY_MASS_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSolution {
    pub nu: f64,
    pub nbar: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumResult {
    pub mu: f64,
    pub x0: f64,
    pub halfwidth: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    /// Step sizes, coarsest first.
    pub step_sizes: [f64; 3],
    pub raw: [GridSolution; 3],
    pub extrapolated: GridSolution,
    /// Largest fraction of probability found in an edge layer.
    pub boundary_mass: f64,
}

impl ContinuumResult {
    pub fn variance(&self) -> f64 {
        self.extrapolated.variance
    }

    pub fn nbar(&self) -> f64 {
        self.extrapolated.nbar
    }

    /// Difference between the extrapolated and finest-grid variance.
    pub fn error_estimate(&self) -> f64 {
        (self.extrapolated.variance - self.raw[2].variance).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuumConfig {
    pub width_sigmas: f64,
    pub base_intervals: usize,
}

impl Default for ContinuumConfig {
    fn default() -> Self {
        Self {
            width_sigmas: 12.0,
            base_intervals: 4096,
        }
    }
}

/// Central-difference matrix on the interior nodes of `[x_lo, x_hi]` split
/// into `intervals` steps, Dirichlet at both ends.
pub fn discretize(
    scheme: &SchemeModel,
    mu: f64,
    x_lo: f64,
    x_hi: f64,
    intervals: usize,
) -> (Vec<f64>, Vec<f64>) {
    let s = (x_hi - x_lo) / intervals as f64;
    let inv_s2 = 1.0 / (s * s);
    let diag = (1..intervals)
        .map(|i| {
            let x = x_lo + i as f64 * s;
            2.0 * inv_s2 + 2.0 * scheme.h_real(x) + mu * x
        })
        .collect();
    let offdiag = vec![-inv_s2; intervals - 2];
    (diag, offdiag)
}

/// Exact fit of `q(s) = q₀ + a s² + b s⁴` through steps `s, s/2, s/4`.
pub fn richardson(coarse: f64, mid: f64, fine: f64) -> f64 {
    (64.0 * fine - 20.0 * mid + coarse) / 45.0
}

/// Two-point estimate assuming a pure `s²` error, from steps `s` and `s/2`.
pub fn richardson_pair(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

struct GridRun {
    nu: f64,
    nbar: f64,
    edge_mass: f64,
}

fn solve_grid(scheme: &SchemeModel, mu: f64, x_lo: f64, x_hi: f64, intervals: usize) -> Result<GridRun> {
    let (diag, off) = discretize(scheme, mu, x_lo, x_hi, intervals);
    let (nu, y) = ground_pair(&diag, &off)?;
    let s = (x_hi - x_lo) / intervals as f64;
    // trapezoid rule; the boundary samples are zero
    let (num, den) = y.iter().enumerate().fold((0.0, 0.0), |(num, den), (i, v)| {
        let x = x_lo + (i + 1) as f64 * s;
        (num + x * v * v, den + v * v)
    });
    let edge = ((y.len() as f64 * EDGE_FRACTION).ceil() as usize).max(1);
    let left: f64 = y[..edge].iter().map(|v| v * v).sum();
    let right: f64 = y[y.len() - edge..].iter().map(|v| v * v).sum();
    Ok(GridRun {
        nu,
        nbar: num / den,
        edge_mass: left.max(right) / den,
    })
}

impl ContinuumConfig {
    pub fn solve(&self, scheme: &SchemeModel, mu: f64) -> Result<ContinuumResult> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidArgument(format!("mu must be positive (got {mu})")));
        }
        if self.width_sigmas < 8.0 {
            return Err(Error::InvalidArgument(format!(
                "width_sigmas must be at least 8 (got {})",
                self.width_sigmas
            )));
        }
        if self.base_intervals < 256 {
            return Err(Error::InvalidArgument(format!(
                "base_intervals must be at least 256 (got {})",
                self.base_intervals
            )));
        }
        let tail = match scheme.tail() {
            Some(t) if !scheme.is_canonical() => t,
            _ => return Err(Error::NoPowerLaw),
        };
        if tail.p >= 2.0 {
            return Err(Error::InvalidScheme(format!(
                "continuum solver needs p < 2 (got p = {})",
                tail.p
            )));
        }
        let (x0, f2) = stationary_point(tail.c, tail.p, mu);
        let halfwidth = self.width_sigmas * f2.powf(-0.25);
        let x_lo = (x0 - halfwidth).max(0.0);
        let x_hi = x0 + halfwidth;

        let counts = [self.base_intervals, 2 * self.base_intervals, 4 * self.base_intervals];
        let runs: Vec<Result<GridRun>> = thread::scope(|scope| {
            let handles: Vec<_> = counts
                .iter()
                .map(|&n| scope.spawn(move || solve_grid(scheme, mu, x_lo, x_hi, n)))
                .collect();
            handles.into_iter().map(|h| h.join().expect("grid solve panicked")).collect()
        });
        let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;

        let boundary_mass = runs[2].edge_mass;
        if boundary_mass > BOUNDARY_MASS_LIMIT {
            return Err(Error::BoundaryContamination { mass: boundary_mass });
        }

        let raw: [GridSolution; 3] = std::array::from_fn(|k| GridSolution {
            nu: runs[k].nu,
            nbar: runs[k].nbar,
            variance: runs[k].nu - mu * runs[k].nbar,
        });
        let nu = richardson(raw[0].nu, raw[1].nu, raw[2].nu);
        let nbar = richardson(raw[0].nbar, raw[1].nbar, raw[2].nbar);
        let step_sizes = counts.map(|n| (x_hi - x_lo) / n as f64);
        Ok(ContinuumResult {
            mu,
            x0,
            halfwidth,
            x_lo,
            x_hi,
            step_sizes,
            raw,
            extrapolated: GridSolution {
                nu,
                nbar,
                variance: nu - mu * nbar,
            },
            boundary_mass,
        })
    }

    pub fn solve_at_nbar(&self, scheme: &SchemeModel, nbar_target: f64, rel_tol: f64) -> Result<ContinuumResult> {
        check_nbar_request(nbar_target, rel_tol)?;
        let (_, res) = search_mu(seed_mu(scheme, nbar_target), nbar_target, rel_tol, |mu| {
            let r = self.solve(scheme, mu)?;
            Ok((r.extrapolated.nbar, r))
        })?;
        Ok(res)
    }
}

pub fn solve_continuum(
    scheme: &SchemeModel,
    mu: f64,
    width_sigmas: f64,
    base_intervals: usize,
) -> Result<ContinuumResult> {
    ContinuumConfig {
        width_sigmas,
        base_intervals,
    }
    .solve(scheme, mu)
}

pub fn solve_continuum_at_nbar(scheme: &SchemeModel, nbar_target: f64, rel_tol: f64) -> Result<ContinuumResult> {
    ContinuumConfig::default().solve_at_nbar(scheme, nbar_target, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn stencil_entries() {
        let s = SchemeModel::mark_ii();
        let (d, e) = discretize(&s, 0.01, 100.0, 200.0, 16);
        let step: f64 = 100.0 / 16.0;
        assert_eq!(d.len(), 15);
        assert_eq!(e.len(), 14);
        for (i, &di) in d.iter().enumerate() {
            let x = 100.0 + (i + 1) as f64 * step;
            let expect = 2.0 / (step * step) + 2.0 * s.h_real(x) + 0.01 * x;
            assert!((di - expect).abs() < 1e-15);
        }
        assert!(e.iter().all(|&v| v == -1.0 / (step * step)));
    }

    #[test]
    fn particle_in_a_box() {
        let l: f64 = 3.0;
        let exact = (PI / l).powi(2);
        let ev = |n| {
            let (d, e) = discretize(&SchemeModel::canonical(), 0.0, 0.0, l, n);
            ground_pair(&d, &e).unwrap().0
        };
        let (a, b, c) = (ev(64), ev(128), ev(256));
        assert!((c - exact).abs() < (a - exact).abs());
        assert!((richardson(a, b, c) - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn richardson_is_exact_on_even_polynomials() {
        let q = |s: f64| 1.5 + 0.3 * s * s - 0.7 * s.powi(4);
        let r = richardson(q(0.4), q(0.2), q(0.1));
        assert!((r - 1.5).abs() < 1e-14);
        let q2 = |s: f64| 2.0 + 5.0 * s * s;
        assert!((richardson_pair(q2(0.2), q2(0.1)) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_config() {
        let s = SchemeModel::heterodyne();
        assert!(solve_continuum(&s, 1e-8, 4.0, 4096).is_err());
        assert!(solve_continuum(&s, 1e-8, 12.0, 64).is_err());
        assert!(matches!(
            solve_continuum(&SchemeModel::canonical(), 1e-8, 12.0, 4096),
            Err(Error::NoPowerLaw)
        ));
    }

    #[test]
    fn narrow_window_has_edge_mass() {
        let s = SchemeModel::heterodyne();
        let mu = seed_mu(&s, 1e4);
        let (x0, _) = stationary_point(0.125, 1.0, mu);
        let run = solve_grid(&s, mu, x0 - 200.0, x0 + 200.0, 512).unwrap();
        assert!(run.edge_mass > BOUNDARY_MASS_LIMIT);
        let wide = solve_grid(&s, mu, 0.0, x0 + 20_000.0, 4096).unwrap();
        assert!(wide.edge_mass < BOUNDARY_MASS_LIMIT);
    }

    #[test]
    fn extrapolation_tightens_the_estimate() {
        let s = SchemeModel::heterodyne();
        let r = solve_continuum(&s, seed_mu(&s, 1e4), 12.0, 1024).unwrap();
        let finest = r.raw[2].variance;
        let coarsest = r.raw[0].variance;
        assert!((r.extrapolated.variance - finest).abs() <= (finest - coarsest).abs());
        assert!(r.boundary_mass <= BOUNDARY_MASS_LIMIT);
    }
}
