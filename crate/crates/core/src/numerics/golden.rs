use crate::scalar::Real;

/// Maximises a unimodal `f` on `[lo, hi]` by golden-section search until the
/// bracket is narrower than `tol`. Returns the abscissa of the best
/// evaluated point.
pub fn golden_section_max<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, tol: T) -> T {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        if b - a <= T::epsilon() * (a.abs() + b.abs()) {
            break;
        }
    }
    if fc >= fd {
        c
    } else {
        d
    }
}

/// Coarse scan of `points` equally spaced abscissae over `[lo, hi)` followed
/// by golden-section refinement in the cells adjacent to the best sample.
pub fn grid_then_golden_max<T: Real, F: FnMut(T) -> T>(mut f: F, lo: T, hi: T, points: usize, tol: T) -> T {
    assert!(points >= 2, "grid needs at least two points");
    let step = (hi - lo) / T::count(points);
    let mut best_i = 0;
    let mut best_v = T::neg_infinity();
    for i in 0..points {
        let v = f(lo + step * T::count(i));
        if v > best_v {
            best_v = v;
            best_i = i;
        }
    }
    let centre = lo + step * T::count(best_i);
    let a = (centre - step).max(lo);
    let b = (centre + step).min(hi);
    let x = golden_section_max(&mut f, a, b, tol);
    if f(x) >= best_v {
        x
    } else {
        centre
    }
}
