//! Embedded Dormand-Prince 5(4) integrator with adaptive step control.
//!
//! Kept deliberately small: dense output is not needed, and every caller in
//! this crate integrates segment by segment so that protocol breakpoints
//! (notably the ramp turning point) land exactly on the grid.

use crate::error::{Error, Result};

// Dormand-Prince RK5(4)7M tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order weights equal the last row of A (FSAL); error weights are b5 - b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
pub struct Rk45 {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step size; also seeds the initial step.
    pub max_step: f64,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

impl Rk45 {
    pub fn new(rel_tol: f64, abs_tol: f64, max_step: f64) -> Self {
        Rk45 {
            rel_tol,
            abs_tol,
            max_step,
        }
    }

    /// Integrate dy/dt = rhs(t, y) from t0 to t1 in place.
    pub fn integrate<F>(&self, mut rhs: F, t0: f64, t1: f64, y: &mut [f64]) -> Result<StepStats>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
    {
        self.integrate_observed(&mut rhs, t0, t1, y, &mut |_, _| {})
    }

    /// Same as `integrate`, calling `observer(t, y)` after every accepted step.
    pub fn integrate_observed<F, O>(
        &self,
        rhs: &mut F,
        t0: f64,
        t1: f64,
        y: &mut [f64],
        observer: &mut O,
    ) -> Result<StepStats>
    where
        F: FnMut(f64, &[f64], &mut [f64]),
        O: FnMut(f64, &[f64]),
    {
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(StepStats::default());
        }
        assert!(span > 0.0, "backward integration not supported");
        let dim = y.len();
        let mut k = vec![vec![0.0_f64; dim]; 7];
        let mut y_stage = vec![0.0_f64; dim];
        let mut y_new = vec![0.0_f64; dim];
        let mut t = t0;
        let mut h = self.max_step.min(span);
        let mut stats = StepStats::default();
        let mut fsal_valid = false;

        // Stop once the remaining sliver is below time resolution; forcing a
        // step across it would spuriously underflow.
        let span_eps = span * 1e-14;
        while t1 - t > span_eps {
            h = h.min(t1 - t).min(self.max_step);
            if h <= t.abs().max(span) * f64::EPSILON * 8.0 {
                return Err(Error::StepUnderflow { t });
            }

            if fsal_valid {
                // k[6] from the previous accepted step equals f(t, y).
                k.swap(0, 6);
            } else {
                rhs(t, y, &mut k[0]);
            }

            for s in 1..7 {
                for i in 0..dim {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += A[s][j] * kj[i];
                    }
                    y_stage[i] = y[i] + h * acc;
                }
                let (head, tail) = k.split_at_mut(s);
                let _ = head;
                rhs(t + C[s] * h, &y_stage, &mut tail[0]);
            }
            // Stage 7 evaluates at (t + h, y5); y_stage currently holds y5.
            y_new.copy_from_slice(&y_stage);

            let mut err_sq = 0.0;
            for i in 0..dim {
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    e += E[j] * kj[i];
                }
                e *= h;
                let scale = self.abs_tol + self.rel_tol * y[i].abs().max(y_new[i].abs());
                let r = e / scale;
                err_sq += r * r;
            }
            let err = (err_sq / dim as f64).sqrt();

            if err <= 1.0 {
                t += h;
                y.copy_from_slice(&y_new);
                fsal_valid = true;
                stats.accepted += 1;
                observer(t, y);
            } else {
                fsal_valid = false;
                stats.rejected += 1;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        }
        Ok(stats)
    }
}
