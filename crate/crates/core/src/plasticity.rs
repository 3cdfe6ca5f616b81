//! Pair-based STDP with multiplicative depression and power-law potentiation.
//!
//! Each plastic synapse keeps its weight and a pre-synaptic trace `K+`; each
//! post-synaptic neuron keeps a trace `K-`. Traces jump by one at their own
//! spikes and decay exponentially in between, so reading a trace at time `t`
//! equals the sum of `exp(-(t - t_k)/τ)` over earlier spikes.
//!
//! ```text
//! pre spike at t:   w ← max(w_min, w - λ·α·w·K-(t))
//! post spike at t:  w ← w + λ·w_ref^(1-μ)·w^μ·K+(t)
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StdpParams {
    pub lambda: f64,
    pub alpha: f64,
    pub mu: f64,
    /// ms
    pub tau_plus: f64,
    /// ms
    pub tau_minus: f64,
    /// pA
    pub w_ref: f64,
    /// pA
    pub w_min: f64,
}

impl Default for StdpParams {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            alpha: 0.057,
            mu: 0.4,
            tau_plus: 15.0,
            tau_minus: 15.0,
            w_ref: 1.0,
            w_min: 0.0,
        }
    }
}

impl StdpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0) {
            return Err(Error::param("stdp.lambda", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.mu) {
            return Err(Error::param("stdp.mu", "must lie in [0, 1]"));
        }
        if !(self.tau_plus > 0.0 && self.tau_minus > 0.0) {
            return Err(Error::param("stdp.tau", "trace time constants must be positive"));
        }
        if !(self.w_min >= 0.0) {
            return Err(Error::param("stdp.w_min", "must be non-negative"));
        }
        if !(self.w_ref > 0.0) {
            return Err(Error::param("stdp.w_ref", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlasticSynapseState {
    /// pA
    pub w: f64,
    /// ms
    pub last_pre_update: f64,
}

impl PlasticSynapseState {
    pub fn new(w: f64) -> Self {
        Self {
            w,
            last_pre_update: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SpikeTrace {
    pub k: f64,
    pub last_time: f64,
}

impl SpikeTrace {
    /// Trace value at `t_now` without mutating.
    pub fn decay_read(&self, t_now: f64, tau: f64) -> Result<f64> {
        if t_now < self.last_time {
            return Err(Error::TimeRegression {
                now: t_now,
                last: self.last_time,
            });
        }
        if self.k == 0.0 {
            return Ok(0.0);
        }
        Ok(self.k * (-(t_now - self.last_time) / tau).exp())
    }

    /// Registers a spike at `t`.
    pub fn bump(&mut self, t: f64, tau: f64) -> Result<()> {
        self.k = self.decay_read(t, tau)? + 1.0;
        self.last_time = t;
        Ok(())
    }
}

fn check_time(s: &PlasticSynapseState, t: f64) -> Result<()> {
    if t < s.last_pre_update {
        return Err(Error::TimeRegression {
            now: t,
            last: s.last_pre_update,
        });
    }
    Ok(())
}

/// Depression on arrival of a pre-synaptic spike.
pub fn on_pre_spike(
    s: &PlasticSynapseState,
    post_trace: &SpikeTrace,
    p: &StdpParams,
    t: f64,
) -> Result<PlasticSynapseState> {
    check_time(s, t)?;
    let k_minus = post_trace.decay_read(t, p.tau_minus)?;
    let w = (s.w - p.lambda * p.alpha * s.w * k_minus).max(p.w_min);
    Ok(PlasticSynapseState {
        w,
        last_pre_update: t,
    })
}

/// Potentiation on a post-synaptic spike.
pub fn on_post_spike(
    s: &PlasticSynapseState,
    pre_trace: &SpikeTrace,
    p: &StdpParams,
    t: f64,
) -> Result<PlasticSynapseState> {
    check_time(s, t)?;
    let k_plus = pre_trace.decay_read(t, p.tau_plus)?;
    let w = s.w + p.lambda * p.w_ref.powf(1.0 - p.mu) * s.w.powf(p.mu) * k_plus;
    Ok(PlasticSynapseState {
        w: w.max(p.w_min),
        last_pre_update: s.last_pre_update,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit_trace() -> SpikeTrace {
        SpikeTrace {
            k: 1.0,
            last_time: 0.0,
        }
    }

    #[test]
    fn trace_reads() {
        let tr = unit_trace();
        assert_relative_eq!(tr.decay_read(15.0, 15.0).unwrap(), 0.367_879_441_171_442_3, epsilon = 1e-15);
        assert_eq!(tr.decay_read(0.0, 15.0).unwrap(), 1.0);
        let zero = SpikeTrace::default();
        assert_eq!(zero.decay_read(123.0, 15.0).unwrap(), 0.0);
        let later = SpikeTrace { k: 1.0, last_time: 5.0 };
        assert!(matches!(later.decay_read(4.0, 15.0), Err(Error::TimeRegression { .. })));
    }

    #[test]
    fn depression_cases() {
        let p = StdpParams {
            lambda: 0.1,
            alpha: 0.5,
            ..StdpParams::default()
        };
        let s = PlasticSynapseState::new(100.0);
        let none = on_pre_spike(&s, &SpikeTrace::default(), &p, 1.0).unwrap();
        assert_eq!(none.w, 100.0);
        assert_eq!(none.last_pre_update, 1.0);

        let d = on_pre_spike(&s, &unit_trace(), &p, 0.0).unwrap();
        assert_relative_eq!(d.w, 95.0, epsilon = 1e-12);

        let floored = StdpParams {
            lambda: 1.0,
            alpha: 1.0,
            w_min: 10.0,
            ..p
        };
        let big = SpikeTrace { k: 5.0, last_time: 0.0 };
        assert_eq!(on_pre_spike(&s, &big, &floored, 0.0).unwrap().w, 10.0);

        let stale = PlasticSynapseState { w: 1.0, last_pre_update: 3.0 };
        assert!(on_pre_spike(&stale, &unit_trace(), &p, 2.0).is_err());
    }

    #[test]
    fn potentiation_cases() {
        let base = StdpParams {
            lambda: 0.1,
            w_ref: 100.0,
            ..StdpParams::default()
        };
        let s = PlasticSynapseState::new(100.0);
        let p04 = StdpParams { mu: 0.4, ..base };
        assert_relative_eq!(on_post_spike(&s, &unit_trace(), &p04, 0.0).unwrap().w, 110.0, epsilon = 1e-12);

        let s = PlasticSynapseState::new(37.0);
        let mult = StdpParams { mu: 1.0, ..base };
        assert_relative_eq!(on_post_spike(&s, &unit_trace(), &mult, 0.0).unwrap().w, 37.0 * 1.1, epsilon = 1e-12);

        let add = StdpParams { mu: 0.0, ..base };
        assert_relative_eq!(on_post_spike(&s, &unit_trace(), &add, 0.0).unwrap().w, 37.0 + 10.0, epsilon = 1e-12);
    }

    #[test]
    fn zero_rate_freezes_weights() {
        let p = StdpParams { lambda: 0.0, ..StdpParams::default() };
        let s = PlasticSynapseState::new(42.0);
        let big = SpikeTrace { k: 3.0, last_time: 0.0 };
        assert_eq!(on_pre_spike(&s, &big, &p, 1.0).unwrap().w, 42.0);
        assert_eq!(on_post_spike(&s, &big, &p, 1.0).unwrap().w, 42.0);
    }

    #[test]
    fn params_validation() {
        assert!(StdpParams::default().validate().is_ok());
        assert!(StdpParams { mu: 1.5, ..StdpParams::default() }.validate().is_err());
        assert!(StdpParams { lambda: -1.0, ..StdpParams::default() }.validate().is_err());
    }
}
