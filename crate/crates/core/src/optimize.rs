//! One-dimensional minimization: golden-section refinement seeded by a
//! uniform scan.

const INV_PHI: f64 = 0.618_033_988_749_894_8; // (√5 − 1)/2

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping once the
/// bracket is narrower than `tol`. Returns `(x, f(x))` for the best point
/// evaluated.
pub fn golden_section<F: FnMut(f64) -> f64>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while (b - a).abs() > tol && iters < 500 {
        if fc <= fd {
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
        iters += 1;
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Evaluates `f` on `points + 1` equispaced nodes of `[lo, hi]`, then refines
/// around the best node with golden-section search to bracket width `tol`.
/// The refined point replaces the scanned one only if it is strictly better,
/// so flat functions return the smallest scanned argmin.
pub fn scan_then_refine<F: FnMut(f64) -> f64>(
    mut f: F,
    lo: f64,
    hi: f64,
    points: usize,
    tol: f64,
) -> (f64, f64) {
    assert!(points >= 2 && hi > lo);
    let step = (hi - lo) / points as f64;
    let mut best_i = 0;
    let mut best = f(lo);
    for i in 1..=points {
        let v = f(lo + step * i as f64);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let x_best = lo + step * best_i as f64;
    let a = lo + step * best_i.saturating_sub(1) as f64;
    let b = (lo + step * (best_i + 1) as f64).min(hi);
    let (x, fx) = golden_section(&mut f, a, b, tol);
    if fx < best {
        (x, fx)
    } else {
        (x_best, best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_minimum() {
        let (x, fx) = golden_section(|x| (x - 0.3).powi(2), -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-9);
        assert!(fx < 1e-18);
    }

    #[test]
    fn scan_avoids_local_minimum() {
        // several local minima on [0, 3]
        let f = |x: f64| (3.0 * x).cos() * (-0.1 * x).exp() - 0.05 * x;
        let (x, _) = scan_then_refine(f, 0.0, 3.0, 64, 1e-10);
        let grid_min = (0..=30_000)
            .map(|i| f(3.0 * i as f64 / 30_000.0))
            .fold(f64::INFINITY, f64::min);
        assert!(f(x) <= grid_min + 1e-12);
    }

    #[test]
    fn flat_function_returns_left_end() {
        let (x, fx) = scan_then_refine(|_| 2.0, 0.0, 1.0, 16, 1e-10);
        assert_eq!(x, 0.0);
        assert_eq!(fx, 2.0);
    }
}
