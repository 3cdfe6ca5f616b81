//! Weight changes of a single plastic synapse for pre/post pairs at
//! different lags.

use cortex::plasticity::{on_post_spike, on_pre_spike, PlasticSynapseState, SpikeTrace, StdpParams};

fn pair(p: &StdpParams, lag: f64) -> cortex::Result<f64> {
    let w0 = 87.8;
    let (mut pre, mut post) = (SpikeTrace::default(), SpikeTrace::default());
    let mut s = PlasticSynapseState::new(w0);
    let (t_pre, t_post) = if lag >= 0.0 { (10.0, 10.0 + lag) } else { (10.0 - lag, 10.0) };
    let mut events = [(t_pre, true), (t_post, false)];
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (t, is_pre) in events {
        if is_pre {
            s = on_pre_spike(&s, &post, p, t)?;
            pre.bump(t, p.tau_plus)?;
        } else {
            s = on_post_spike(&s, &pre, p, t)?;
            post.bump(t, p.tau_minus)?;
        }
    }
    Ok(s.w - w0)
}

fn main() -> cortex::Result<()> {
    let p = StdpParams::default();
    println!("{:>8} {:>12}", "lag_ms", "dw_pA");
    for lag in [-40.0, -20.0, -10.0, -5.0, -1.0, 1.0, 5.0, 10.0, 20.0, 40.0] {
        println!("{lag:>8} {:>12.6}", pair(&p, lag)?);
    }
    let strong = StdpParams { w_ref: 87.8, ..p };
    println!("with w_ref = 87.8 pA, +10 ms: {:.4}", pair(&strong, 10.0)?);
    Ok(())
}
