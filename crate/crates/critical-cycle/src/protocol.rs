//! Cyclic drive protocol: a power-law ramp of the coupling up to its target
//! value and the mirror-image ramp back down.

use crate::error::{Error, Result};

/// The coupling value at which the mode gap closes.
pub const CRITICAL_COUPLING: f64 = 1.0;

/// Parameters of the cycle g(t) = g_f [1 - ((τ-t)/τ)^r] on [0, τ],
/// mirrored about t = τ on (τ, 2τ].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RampSpec {
    /// Peak coupling reached at t = τ; must stay within [0, 1].
    pub g_f: f64,
    /// Nonlinear exponent shaping the approach to the turning point.
    pub r: f64,
    /// Half-cycle duration, in units of 1/ω.
    pub tau: f64,
    /// Mode frequency (the energy unit). Everything downstream assumes 1.
    pub omega: f64,
}

impl RampSpec {
    pub fn new(g_f: f64, r: f64, tau: f64) -> Result<Self> {
        Self::with_omega(g_f, r, tau, 1.0)
    }

    pub fn with_omega(g_f: f64, r: f64, tau: f64, omega: f64) -> Result<Self> {
        if !(0.0..=CRITICAL_COUPLING).contains(&g_f) {
            return Err(Error::InvalidParameter(format!(
                "g_f = {g_f} outside [0, {CRITICAL_COUPLING}]"
            )));
        }
        if !(r > 0.0) {
            return Err(Error::InvalidParameter(format!("r = {r} must be > 0")));
        }
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter(format!("tau = {tau} must be > 0")));
        }
        if !(omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega = {omega} must be > 0"
            )));
        }
        Ok(RampSpec { g_f, r, tau, omega })
    }

    pub fn cycle_duration(&self) -> f64 {
        2.0 * self.tau
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let t_max = self.cycle_duration();
        // Tolerate float drift at the endpoints from adaptive steppers.
        let slack = 1e-12 * t_max.max(1.0);
        if t < -slack || t > t_max + slack {
            return Err(Error::OutOfDomain { t, t_max });
        }
        Ok(())
    }

    /// g(t) for t in [0, 2τ].
    pub fn coupling_at(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        let t = t.clamp(0.0, self.cycle_duration());
        // |τ - t|/τ runs 1 -> 0 -> 1 over the cycle; the power law keeps the
        // drive slow near the turning point for r > 1.
        let u = ((self.tau - t).abs() / self.tau).min(1.0);
        Ok(self.g_f * (1.0 - u.powf(self.r)))
    }

    /// Instantaneous gap ω√(1 - g(t)²).
    pub fn gap_at(&self, t: f64) -> Result<f64> {
        let g = self.coupling_at(t)?;
        Ok(self.omega * (1.0 - g * g).max(0.0).sqrt())
    }

    /// |dg/dt| = g_f r |t-τ|^{r-1} / τ^r. Diverges at t = τ when r < 1.
    pub fn coupling_rate_at(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        let dt = (self.tau - t).abs();
        Ok(self.g_f * self.r * dt.powf(self.r - 1.0) / self.tau.powf(self.r))
    }
}
