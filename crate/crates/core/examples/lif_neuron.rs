//! One LIF neuron under the exact step map: passive decay, the firing period
//! under constant drive against its closed form, and a single PSP.

use cortex::dynamics::{make_propagators, step_neuron, NeuronParams, NeuronState, Polarity, MOHM_PA_TO_MV};

fn main() -> cortex::Result<()> {
    let p = NeuronParams::default();
    let dt = 0.1;
    let prop = make_propagators(&p, dt)?;

    let mut s = NeuronState::at_rest(&p);
    s.u = p.u_rest + 10.0;
    for _ in 0..100 {
        step_neuron(&mut s, &p, &prop);
    }
    let exact = p.u_rest + 10.0 * (-10.0 / p.tau_m).exp();
    println!("decay over 10 ms: {:.12} mV (closed form {exact:.12})", s.u);

    let i_ext = 500.0;
    let ri = p.resistance * i_ext * MOHM_PA_TO_MV;
    let period = p.t_refractory + p.tau_m * (ri / (ri - (p.theta - p.u_rest))).ln();
    let mut s = NeuronState::at_rest(&p);
    s.i_ext = i_ext;
    let mut spikes = Vec::new();
    for t in 0..5000u32 {
        if step_neuron(&mut s, &p, &prop) {
            spikes.push(t as f64 * dt);
        }
    }
    let measured = (spikes[spikes.len() - 1] - spikes[1]) / (spikes.len() - 2) as f64;
    println!("period at {i_ext} pA: {measured:.3} ms (closed form {period:.3} ms)");

    let mut s = NeuronState::at_rest(&p);
    s.deposit(87.8, Polarity::Excitatory);
    let mut peak = (0.0, p.u_rest);
    for t in 1..200 {
        step_neuron(&mut s, &p, &prop);
        if s.u > peak.1 {
            peak = (t as f64 * dt, s.u);
        }
    }
    println!("PSP of 87.8 pA: peak {:.4} mV at {:.1} ms", peak.1 - p.u_rest, peak.0);
    Ok(())
}
