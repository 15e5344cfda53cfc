//! Smallest eigenpair of a real symmetric tridiagonal matrix.
//!
//! The eigenvalue is isolated by bisection on the Sturm sequence count and
//! the eigenvector comes from inverse iteration shifted at the lower end of
//! the final bracket, where `T - σI` is positive semidefinite and the
//! `LDLᵀ` factorization needs no pivoting.

use crate::error::{Error, Result};

const MAX_BISECTIONS: usize = 400;
const MAX_INVERSE_ITERATIONS: usize = 40;
// bisect to (nearly) full double resolution; well inside the 1e-12 target
const REL_TOL: f64 = 4.0 * f64::EPSILON;

/// Number of eigenvalues strictly below `x`.
pub fn sturm_count(diag: &[f64], offdiag: &[f64], x: f64) -> usize {
    let pivmin = pivot_floor(offdiag);
    let mut count = 0;
    let mut q = diag[0] - x;
    if q.abs() < pivmin {
        q = -pivmin;
    }
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let e = offdiag[i - 1];
        q = diag[i] - x - e * e / q;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn pivot_floor(offdiag: &[f64]) -> f64 {
    let emax = offdiag.iter().fold(0.0f64, |m, e| m.max(e * e));
    f64::MIN_POSITIVE * emax.max(1.0)
}

fn inf_norm(diag: &[f64], offdiag: &[f64]) -> f64 {
    (0..diag.len())
        .map(|i| {
            let left = if i > 0 { offdiag[i - 1].abs() } else { 0.0 };
            let right = offdiag.get(i).map_or(0.0, |e| e.abs());
            diag[i].abs() + left + right
        })
        .fold(0.0, f64::max)
}

/// Bracket `[lo, hi]` around the smallest eigenvalue with
/// `sturm_count(lo) == 0` and `sturm_count(hi) >= 1`.
pub fn bisect_lowest(diag: &[f64], offdiag: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let norm = inf_norm(diag, offdiag);
    let mut lo = (0..n)
        .map(|i| {
            let left = if i > 0 { offdiag[i - 1].abs() } else { 0.0 };
            let right = offdiag.get(i).map_or(0.0, |e| e.abs());
            diag[i] - left - right
        })
        .fold(f64::INFINITY, f64::min);
    // λ_min never exceeds the smallest diagonal entry (Rayleigh quotient).
    let mut hi = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    let slack = 4.0 * f64::EPSILON * norm.max(f64::MIN_POSITIVE);
    lo -= slack;
    hi += slack;
    while sturm_count(diag, offdiag, lo) > 0 {
        lo -= slack.max((hi - lo).abs());
    }
    while sturm_count(diag, offdiag, hi) == 0 {
        hi += slack.max((hi - lo).abs());
    }

    let abs_floor = 2.0 * f64::EPSILON * norm;
    for _ in 0..MAX_BISECTIONS {
        let width = hi - lo;
        if width <= (REL_TOL * lo.abs().max(hi.abs())).max(abs_floor) {
            break;
        }
        let mid = lo + 0.5 * width;
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, offdiag, mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Lowest eigenvalue and its unit eigenvector, signed so its entries sum
/// to a nonnegative number.
pub fn ground_pair(diag: &[f64], offdiag: &[f64]) -> Result<(f64, Vec<f64>)> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if offdiag.len() + 1 != n {
        return Err(Error::InvalidArgument(format!(
            "offdiagonal length {} does not match dimension {n}",
            offdiag.len()
        )));
    }
    if n == 1 {
        return Ok((diag[0], vec![1.0]));
    }

    let (lo, hi) = bisect_lowest(diag, offdiag);
    let lambda = 0.5 * (lo + hi);
    // a shift right at λ can drive the factorization to overflow; back off
    // geometrically until the iteration survives
    let unit = f64::EPSILON * inf_norm(diag, offdiag).max(f64::MIN_POSITIVE);
    let mut last = None;
    for k in [0.0, 1e2, 1e4, 1e6, 1e8] {
        match inverse_iteration(diag, offdiag, lo - k * unit, lambda) {
            Ok(v) => return Ok((lambda, v)),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Factor `T - σI = L D Lᵀ`; returns (pivots d, multipliers l).
fn ldl(diag: &[f64], offdiag: &[f64], shift: f64, floor: f64) -> (Vec<f64>, Vec<f64>) {
    let n = diag.len();
    let mut d = Vec::with_capacity(n);
    let mut l = Vec::with_capacity(n - 1);
    let mut piv = diag[0] - shift;
    for i in 0..n {
        if i > 0 {
            let e = offdiag[i - 1];
            let li = e / d[i - 1];
            l.push(li);
            piv = diag[i] - shift - li * e;
        }
        if piv < floor {
            piv = floor;
        }
        d.push(piv);
    }
    (d, l)
}

fn ldl_solve(d: &[f64], l: &[f64], x: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        x[i] -= l[i - 1] * x[i - 1];
    }
    for i in 0..n {
        x[i] /= d[i];
    }
    for i in (0..n - 1).rev() {
        x[i] -= l[i] * x[i + 1];
    }
}

fn normalize_signed(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let sign = if x.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let scale = sign / norm;
    x.iter_mut().for_each(|v| *v *= scale);
}

fn residual(diag: &[f64], offdiag: &[f64], lambda: f64, x: &[f64]) -> f64 {
    let n = diag.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut r = (diag[i] - lambda) * x[i];
        if i > 0 {
            r += offdiag[i - 1] * x[i - 1];
        }
        if i + 1 < n {
            r += offdiag[i] * x[i + 1];
        }
        acc += r * r;
    }
    acc.sqrt()
}

fn inverse_iteration(diag: &[f64], offdiag: &[f64], shift: f64, lambda: f64) -> Result<Vec<f64>> {
    let n = diag.len();
    let norm = inf_norm(diag, offdiag).max(f64::MIN_POSITIVE);
    let floor = f64::EPSILON * norm * 1e-3;
    let (d, l) = ldl(diag, offdiag, shift, floor);

    // positive start with a little structure so it is never orthogonal to
    // the target on a generic matrix
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.25 * ((i as f64) * 0.7).sin()).collect();
    normalize_signed(&mut x);
    let tol = (n as f64).sqrt() * 64.0 * f64::EPSILON;
    let mut prev = x.clone();
    for it in 1..=MAX_INVERSE_ITERATIONS {
        ldl_solve(&d, &l, &mut x);
        if !x.iter().all(|v| v.is_finite()) {
            break;
        }
        normalize_signed(&mut x);
        let change = x
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if change <= tol && it >= 2 {
            return Ok(x);
        }
        prev.copy_from_slice(&x);
    }
    let res = if x.iter().all(|v| v.is_finite()) {
        residual(diag, offdiag, lambda, &x)
    } else {
        f64::INFINITY
    };
    // accept a stalled iterate whose residual is at rounding level
    if res <= 1e3 * f64::EPSILON * norm * (n as f64).sqrt() {
        return Ok(x);
    }
    Err(Error::Solver {
        iterations: MAX_INVERSE_ITERATIONS,
        residual: res,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_canonical() {
        let (l, v) = ground_pair(&[2.0, 2.0], &[-1.0]).unwrap();
        assert!((l - 1.0).abs() < 1e-14);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0] - s).abs() < 1e-12 && (v[1] - s).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_heterodyne() {
        let h0 = crate::schemes::h_het_exact(0);
        let (l, _) = ground_pair(&[2.0, 2.0], &[-(1.0 - h0)]).unwrap();
        assert!((l - (1.0 + h0)).abs() < 1e-14);
        assert!((l - 1.113_773_1).abs() < 1e-7);
    }

    #[test]
    fn diagonal_matrix_gives_unit_vector() {
        let diag = [3.0, 0.5, 2.0, 7.0];
        let (l, v) = ground_pair(&diag, &[0.0, 0.0, 0.0]).unwrap();
        assert!((l - 0.5).abs() < 1e-14);
        assert!((v[1] - 1.0).abs() < 1e-12);
        assert!(v[0].abs() < 1e-12 && v[2].abs() < 1e-12 && v[3].abs() < 1e-12);
    }

    #[test]
    fn one_by_one() {
        assert_eq!(ground_pair(&[4.2], &[]).unwrap(), (4.2, vec![1.0]));
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(ground_pair(&[1.0, 2.0], &[]).is_err());
        assert!(ground_pair(&[], &[]).is_err());
    }

    #[test]
    fn sturm_count_on_laplacian() {
        // eigenvalues of the n×n (2,-1) matrix are 2 - 2cos(kπ/(n+1))
        let n = 9;
        let diag = vec![2.0; n];
        let off = vec![-1.0; n - 1];
        for k in 1..=n {
            let ev = 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert_eq!(sturm_count(&diag, &off, ev - 1e-9), k - 1);
            assert_eq!(sturm_count(&diag, &off, ev + 1e-9), k);
        }
    }

    #[test]
    fn large_laplacian_ground_state_is_positive() {
        let n = 20_000;
        let (l, v) = ground_pair(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n + 1) as f64).cos();
        assert!((l - exact).abs() < 1e-15);
        assert!(v.iter().all(|&x| x > 0.0));
    }
}
