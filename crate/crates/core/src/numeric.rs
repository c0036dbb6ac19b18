//! Scalar quadrature and root helpers used by the model catalog and the
//! frequency estimators.

// quadrature nodes carry their full published digits
#![allow(clippy::excessive_precision)]

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// Recursion stops when the Richardson estimate of the local error drops
/// below `rtol * |whole| + atol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rtol: f64, atol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, rtol, atol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    rtol: f64,
    atol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * (rtol * whole.abs() + atol) {
        return left + right + err / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, rtol, 0.5 * atol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, rtol, 0.5 * atol, depth - 1)
}

/// Nodes and weights of the 7-point Gauss-Legendre rule on [-1, 1].
pub const GL7_NODES: [f64; 7] = [
    -0.949107912342758524526189684047851,
    -0.741531185599394439863864773280788,
    -0.405845151377397166906606412076961,
    0.0,
    0.405845151377397166906606412076961,
    0.741531185599394439863864773280788,
    0.949107912342758524526189684047851,
];
pub const GL7_WEIGHTS: [f64; 7] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
];

/// 7-point Gauss-Legendre quadrature of `f` on `[a, b]`.
pub fn gl7<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in GL7_NODES.iter().zip(GL7_WEIGHTS.iter()) {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Bisection for a sign change of `f` on `[a, b]` (`f(a)` and `f(b)` must
/// have opposite signs). Returns the midpoint of the final bracket of
/// width `xtol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        if b - a <= xtol {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fa < 0.0) != (fm < 0.0) {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

/// Golden-section minimization of `f` on `[a, b]` down to bracket width
/// `xtol`; returns the abscissa of the smallest sampled value.
pub fn golden_min<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, xtol: f64) -> f64 {
    const INVPHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INVPHI * (b - a);
    let mut d = a + INVPHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..300 {
        if (b - a).abs() <= xtol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INVPHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INVPHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        c
    } else {
        d
    }
}
