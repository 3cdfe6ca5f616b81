//! Leaky integrate-and-fire neurons with exponentially decaying synaptic
//! kernels, advanced by exact per-step propagators.
//!
//! Units: time in ms, voltage in mV, current in pA, resistance in MΩ,
//! conductance in nS. `R·I` in MΩ·pA is µV, hence [`MOHM_PA_TO_MV`].
//!
//! Between threshold events the subthreshold system is linear:
//!
//! ```text
//! τ_m du/dt   = -(u - u_rest) + R (I_syn + I_ext)
//! τ_syn dI/dt = -I
//! ```
//!
//! so one step of width `dt` is an exact linear map whose coefficients are
//! computed once in [`Propagators`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// MΩ × pA → mV.
pub const MOHM_PA_TO_MV: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SynapseMode {
    #[default]
    CurrentBased,
    ConductanceBased,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    Excitatory,
    Inhibitory,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NeuronParams {
    /// Membrane time constant (ms).
    pub tau_m: f64,
    /// Resting potential (mV).
    pub u_rest: f64,
    /// Membrane resistance (MΩ).
    pub resistance: f64,
    /// Spike threshold (mV).
    pub theta: f64,
    /// Reset potential (mV).
    pub u_reset: f64,
    /// Absolute refractory period (ms).
    pub t_refractory: f64,
    pub tau_syn_exc: f64,
    pub tau_syn_inh: f64,
    pub synapse_mode: SynapseMode,
    /// Reversal potentials (mV), conductance mode only.
    pub e_syn_exc: f64,
    pub e_syn_inh: f64,
}

impl Default for NeuronParams {
    fn default() -> Self {
        Self {
            tau_m: 10.0,
            u_rest: -65.0,
            resistance: 40.0,
            theta: -50.0,
            u_reset: -65.0,
            t_refractory: 2.0,
            tau_syn_exc: 0.5,
            tau_syn_inh: 0.5,
            synapse_mode: SynapseMode::CurrentBased,
            e_syn_exc: 0.0,
            e_syn_inh: -85.0,
        }
    }
}

impl NeuronParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau_m", self.tau_m),
            ("resistance", self.resistance),
            ("tau_syn_exc", self.tau_syn_exc),
            ("tau_syn_inh", self.tau_syn_inh),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.theta > self.u_reset) {
            return Err(Error::param(
                "theta",
                format!("threshold {} must exceed reset {}", self.theta, self.u_reset),
            ));
        }
        if !(self.t_refractory >= 0.0) {
            return Err(Error::param("t_refractory", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct NeuronState {
    /// Membrane potential (mV).
    pub u: f64,
    /// Excitatory kernel state: pA (current mode) or nS (conductance mode).
    pub syn_exc: f64,
    pub syn_inh: f64,
    pub refractory_steps_left: u32,
    /// Constant external drive (pA).
    pub i_ext: f64,
}

impl NeuronState {
    pub fn at_rest(p: &NeuronParams) -> Self {
        Self {
            u: p.u_rest,
            ..Self::default()
        }
    }

    /// Adds a synaptic event to the kernel selected by `polarity`.
    #[inline]
    pub fn deposit(&mut self, weight: f64, polarity: Polarity) {
        match polarity {
            Polarity::Excitatory => self.syn_exc += weight,
            Polarity::Inhibitory => self.syn_inh += weight,
        }
    }
}

/// Per-step coefficients of the exact subthreshold map.
#[derive(Clone, Debug, PartialEq)]
pub struct Propagators {
    pub dt: f64,
    /// `exp(-dt/τ_m)`.
    pub membrane_decay: f64,
    pub syn_decay_exc: f64,
    pub syn_decay_inh: f64,
    /// Membrane increment (mV) per pA of kernel current at step start.
    pub cross_exc: f64,
    pub cross_inh: f64,
    /// Membrane increment (mV) per pA of constant current held over the step.
    pub drive_gain: f64,
    pub refractory_steps: u32,
}

/// `R·τ_s/(τ_s-τ_m)·(e^{-h/τ_s} - e^{-h/τ_m})`, rewritten through `expm1` so
/// it stays accurate as `τ_s → τ_m` and reduces to `R·(h/τ_m)·e^{-h/τ_m}` at
/// equality.
fn kernel_cross_term(resistance: f64, tau_m: f64, tau_s: f64, h: f64) -> f64 {
    let delta = 1.0 / tau_m - 1.0 / tau_s;
    let decay_m = (-h / tau_m).exp();
    if delta == 0.0 {
        return resistance * decay_m * h / tau_m;
    }
    resistance * decay_m * (h * delta).exp_m1() / (tau_m * delta)
}

pub fn make_propagators(p: &NeuronParams, dt: f64) -> Result<Propagators> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    p.validate()?;
    let r_mv = p.resistance * MOHM_PA_TO_MV;
    Ok(Propagators {
        dt,
        membrane_decay: (-dt / p.tau_m).exp(),
        syn_decay_exc: (-dt / p.tau_syn_exc).exp(),
        syn_decay_inh: (-dt / p.tau_syn_inh).exp(),
        cross_exc: kernel_cross_term(r_mv, p.tau_m, p.tau_syn_exc, dt),
        cross_inh: kernel_cross_term(r_mv, p.tau_m, p.tau_syn_inh, dt),
        drive_gain: -r_mv * (-dt / p.tau_m).exp_m1(),
        refractory_steps: (p.t_refractory / dt).round() as u32,
    })
}

/// Advances one neuron by one step and reports whether it crossed threshold.
///
/// In conductance mode the kernel currents are `g·(E_syn - u)` with `u` taken
/// at the start of the step.
#[inline]
pub fn step_neuron(state: &mut NeuronState, p: &NeuronParams, prop: &Propagators) -> bool {
    if state.refractory_steps_left > 0 {
        state.refractory_steps_left -= 1;
        state.syn_exc *= prop.syn_decay_exc;
        state.syn_inh *= prop.syn_decay_inh;
        state.u = p.u_reset;
        return false;
    }
    let (i_exc, i_inh) = match p.synapse_mode {
        SynapseMode::CurrentBased => (state.syn_exc, state.syn_inh),
        SynapseMode::ConductanceBased => (
            state.syn_exc * (p.e_syn_exc - state.u),
            state.syn_inh * (p.e_syn_inh - state.u),
        ),
    };
    let v = state.u - p.u_rest;
    let v_next = v * prop.membrane_decay
        + prop.cross_exc * i_exc
        + prop.cross_inh * i_inh
        + prop.drive_gain * state.i_ext;
    state.u = p.u_rest + v_next;
    state.syn_exc *= prop.syn_decay_exc;
    state.syn_inh *= prop.syn_decay_inh;
    if state.u >= p.theta {
        state.u = p.u_reset;
        state.refractory_steps_left = prop.refractory_steps;
        return true;
    }
    false
}
