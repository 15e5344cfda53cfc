//! Golden-section search for a minimum of a unimodal function.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Minimizes `f` on `[a, b]` until the bracket is narrower than `tol`.
/// Returns `(x, f(x))` at the best point seen.
pub fn minimize<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_vertex() {
        let (x, fx) = minimize(|x| (x - 1.3) * (x - 1.3) + 2.0, -5.0, 5.0, 1e-10);
        assert!((x - 1.3).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-15);
    }

    #[test]
    fn minimum_at_edge() {
        let (x, _) = minimize(|x| x, 0.0, 1.0, 1e-8);
        assert!(x < 1e-7);
    }
}
