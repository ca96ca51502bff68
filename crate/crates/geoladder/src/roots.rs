//! Scalar root finding: plain bisection, a bisection-safeguarded Newton
//! corrector, and a sign-change scan used to enumerate equilibria.

/// Bisects `f` on `[lo, hi]` (which must bracket a sign change) until the
/// interval is shorter than `xtol`. Returns the midpoint of the final
/// interval.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, xtol: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    let fhi = f(hi);
    if fhi == 0.0 {
        return hi;
    }
    debug_assert!(flo * fhi < 0.0, "bisect needs a bracket: f({lo})={flo}, f({hi})={fhi}");
    while hi - lo > xtol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval at floating-point resolution
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    0.5 * (lo + hi)
}

/// Newton iteration safeguarded by a bracket: steps that leave `[lo, hi]` or
/// fail to shrink the residual fall back to bisection. `f` returns the value
/// and its derivative. Returns the final abscissa.
pub fn newton_bisect(
    mut f: impl FnMut(f64) -> (f64, f64),
    mut lo: f64,
    mut hi: f64,
    x0: f64,
    xtol: f64,
    max_iter: usize,
) -> f64 {
    let (flo, _) = f(lo);
    if flo == 0.0 {
        return lo;
    }
    let sign_lo = flo.signum();
    let mut x = x0.clamp(lo, hi);
    let (mut fx, mut dfx) = f(x);
    for _ in 0..max_iter {
        if fx == 0.0 || hi - lo <= xtol {
            return x;
        }
        if fx.signum() == sign_lo {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        x = if dfx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        (fx, dfx) = f(x);
    }
    x
}

/// Scans `[lo, hi]` with `cells` uniform subintervals, bisecting every sign
/// change of `f` down to `xtol`, and merges roots closer than `merge_tol`.
/// Exact zeros at grid nodes are kept as roots.
pub fn scan_roots(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    cells: usize,
    xtol: f64,
    merge_tol: f64,
) -> Vec<f64> {
    let mut roots = Vec::new();
    let step = (hi - lo) / cells as f64;
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    for i in 1..=cells {
        let x = if i == cells { hi } else { lo + step * i as f64 };
        let fx = f(x);
        if f_prev == 0.0 {
            roots.push(x_prev);
        } else if !f_prev.is_nan() && !fx.is_nan() && fx != 0.0 && f_prev.signum() != fx.signum()
        {
            roots.push(bisect(&mut f, x_prev, x, xtol));
        }
        x_prev = x;
        f_prev = fx;
    }
    if f_prev == 0.0 {
        roots.push(x_prev);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < merge_tol);
    roots
}
