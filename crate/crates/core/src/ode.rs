//! Embedded Dormand-Prince 5(4) integrator with dense output for
//! matrix-valued linear systems `X' = A(t) X`.
//!
//! The dense output is the standard quartic continuous extension of the
//! pair, good to the same order as the step error, which is what the
//! conjugate-point bisection needs.

use crate::error::{Error, Result};
use nalgebra::DMatrix;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

// 5th-order solution weights (also the last stage row).
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Error weights: difference between the 5th- and 4th-order solutions.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense-output coefficients.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its dense-output polynomial.
#[derive(Debug, Clone)]
pub struct DenseStep {
    pub t0: f64,
    pub h: f64,
    cont: [DMatrix<f64>; 5],
}

impl DenseStep {
    /// Evaluate the interpolant at `t` inside `[t0, t0 + h]`.
    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        let theta = ((t - self.t0) / self.h).clamp(0.0, 1.0);
        let th1 = 1.0 - theta;
        // c0 + theta*(c1 + th1*(c2 + theta*(c3 + th1*c4)))
        let mut acc = &self.cont[3] + &self.cont[4] * th1;
        acc = &self.cont[2] + acc * theta;
        acc = &self.cont[1] + acc * th1;
        &self.cont[0] + acc * theta
    }
}

/// Dense-output trajectory over one integration interval.
#[derive(Debug, Clone)]
pub struct DenseSolution {
    pub t_start: f64,
    pub t_end: f64,
    pub steps: Vec<DenseStep>,
    pub final_state: DMatrix<f64>,
    pub n_steps: usize,
    pub n_rejected: usize,
}

impl DenseSolution {
    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        debug_assert!(t >= self.t_start - 1e-9 && t <= self.t_end + 1e-9);
        if self.steps.is_empty() || t >= self.t_end {
            return self.final_state.clone();
        }
        let idx = match self
            .steps
            .binary_search_by(|s| s.t0.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) => i - 1,
        };
        self.steps[idx].eval(t)
    }
}

/// Integrate `X' = rhs(t, X)` from `identity`-like initial state `x0` over
/// `[t0, t1]` with the given per-step error tolerances.
///
/// The step size is capped at `span / 64` so that narrow coefficient
/// features (plateau bumps, inserted stretches) are always sampled, even
/// when the local error estimate would allow giant steps.
pub fn integrate_dense<F>(
    rhs: &F,
    t0: f64,
    t1: f64,
    x0: DMatrix<f64>,
    rtol: f64,
    atol: f64,
) -> Result<DenseSolution>
where
    F: Fn(f64, &DMatrix<f64>) -> DMatrix<f64>,
{
    let span = t1 - t0;
    assert!(span > 0.0, "integration span must be positive");
    let h_max = span / 64.0;
    let mut t = t0;
    let mut y = x0;
    let mut k1 = rhs(t, &y);
    let mut h = initial_step(span, rtol).min(h_max);
    let mut steps = Vec::new();
    let mut n_steps = 0usize;
    let mut n_rejected = 0usize;
    let h_min = span * 1e-14;

    while t < t1 {
        if h < h_min {
            return Err(Error::IntegrationFailure { t, h });
        }
        if t + h > t1 {
            h = t1 - t;
        }
        let k2 = rhs(t + C[1] * h, &(&y + &k1 * (A21 * h)));
        let k3 = rhs(t + C[2] * h, &(&y + (&k1 * A31 + &k2 * A32) * h));
        let k4 = rhs(
            t + C[3] * h,
            &(&y + (&k1 * A41 + &k2 * A42 + &k3 * A43) * h),
        );
        let k5 = rhs(
            t + C[4] * h,
            &(&y + (&k1 * A51 + &k2 * A52 + &k3 * A53 + &k4 * A54) * h),
        );
        let k6 = rhs(
            t + C[5] * h,
            &(&y + (&k1 * A61 + &k2 * A62 + &k3 * A63 + &k4 * A64 + &k5 * A65) * h),
        );
        let y_new = &y + (&k1 * B1 + &k3 * B3 + &k4 * B4 + &k5 * B5 + &k6 * B6) * h;
        let k7 = rhs(t + h, &y_new);

        let err_mat = (&k1 * E1 + &k3 * E3 + &k4 * E4 + &k5 * E5 + &k6 * E6 + &k7 * E7) * h;
        let mut err: f64 = 0.0;
        let mut count = 0.0;
        for (e, (a, b)) in err_mat.iter().zip(y.iter().zip(y_new.iter())) {
            let scale = atol + rtol * a.abs().max(b.abs());
            let r = e / scale;
            err += r * r;
            count += 1.0;
        }
        err = (err / count).sqrt();

        if err <= 1.0 {
            // accept; build dense coefficients
            let ydiff = &y_new - &y;
            let bspl = &k1 * h - &ydiff;
            let cont4 = &ydiff - &k7 * h - &bspl;
            let cont5 = (&k1 * D1 + &k3 * D3 + &k4 * D4 + &k5 * D5 + &k6 * D6 + &k7 * D7) * h;
            steps.push(DenseStep {
                t0: t,
                h,
                cont: [y.clone(), ydiff, bspl, cont4, cont5],
            });
            t += h;
            y = y_new;
            k1 = k7;
            n_steps += 1;
        } else {
            n_rejected += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h = (h * factor).min(h_max);
    }

    Ok(DenseSolution {
        t_start: t0,
        t_end: t1,
        steps,
        final_state: y,
        n_steps,
        n_rejected,
    })
}

fn initial_step(span: f64, rtol: f64) -> f64 {
    (span * 1e-3).min(rtol.powf(0.2).max(1e-6))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation_rhs(_t: f64, x: &DMatrix<f64>) -> DMatrix<f64> {
        // X' = [[0,1],[-1,0]] X
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        a * x
    }

    #[test]
    fn harmonic_oscillator_accuracy() {
        let sol = integrate_dense(
            &rotation_rhs,
            0.0,
            20.0,
            DMatrix::identity(2, 2),
            1e-12,
            1e-13,
        )
        .unwrap();
        let x = &sol.final_state;
        let exact = DMatrix::from_row_slice(
            2,
            2,
            &[
                20.0_f64.cos(),
                20.0_f64.sin(),
                -20.0_f64.sin(),
                20.0_f64.cos(),
            ],
        );
        assert!((x - exact).abs().max() < 1e-10);
    }

    #[test]
    fn dense_output_matches_exact() {
        let sol = integrate_dense(
            &rotation_rhs,
            0.0,
            10.0,
            DMatrix::identity(2, 2),
            1e-11,
            1e-12,
        )
        .unwrap();
        for i in 0..=1000 {
            let t = 10.0 * i as f64 / 1000.0;
            let x = sol.eval(t);
            assert!((x[(0, 0)] - t.cos()).abs() < 1e-9, "t = {t}");
            assert!((x[(0, 1)] - t.sin()).abs() < 1e-9, "t = {t}");
        }
    }
}
