//! Balanced random network with plastic E→E synapses.
//!
//! cargo run --release --example balanced_stdp -- [scale] [t_ms] [ranks] [threads]

use std::time::Instant;

use cortex::exchange::{simulate, SimulationOptions};
use cortex::netbuild::{build_from_recipe, make_balanced_random_net_with, plan_network, BalancedNetParams, WiringRecipe};

fn main() -> cortex::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, d: f64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let (scale, t_ms) = (arg(0, 0.2), arg(1, 500.0));
    let (ranks, threads) = (arg(2, 2.0) as usize, arg(3, 2.0) as usize);
    let ext_rate = arg(4, BalancedNetParams::default().ext_rate);

    let cfg = make_balanced_random_net_with(&BalancedNetParams {
        scale,
        t_sim: t_ms,
        ext_rate,
        ..BalancedNetParams::default()
    })?;
    let t0 = Instant::now();
    let recipe = WiringRecipe::new(&cfg, None)?;
    let net = build_from_recipe(&cfg, &recipe)?;
    let plan = plan_network(&cfg, &recipe, &net, ranks, threads)?;
    println!(
        "{} neurons, {} synapses ({} plastic), built in {:.1} s",
        net.n_neurons(),
        net.n_edges(),
        net.plastic.iter().filter(|&&p| p).count(),
        t0.elapsed().as_secs_f64()
    );

    let t0 = Instant::now();
    let opts = SimulationOptions {
        n_ranks: ranks,
        n_threads: threads,
        ..SimulationOptions::default()
    };
    let res = simulate(&net, &plan, cfg.n_steps(), &opts)?;
    let n_exc = cfg.areas[0].populations[0].count;
    let exc = res.log.restrict(0..n_exc);
    let inh = res.log.restrict(n_exc..net.n_neurons() as u32);
    let w: Vec<f64> = res.plastic_weights.iter().map(|&(_, w)| w).collect();
    let w_mean = w.iter().sum::<f64>() / w.len().max(1) as f64;
    println!(
        "{:.0} ms in {:.1} s: E {:.2} Hz, I {:.2} Hz, mean plastic weight {:.2} pA",
        t_ms,
        t0.elapsed().as_secs_f64(),
        exc.mean_rate_hz(n_exc as usize, cfg.n_steps()),
        inh.mean_rate_hz(net.n_neurons() - n_exc as usize, cfg.n_steps()),
        w_mean
    );
    // rate in 100 ms windows
    let win = (100.0 / net.dt) as u64;
    let mut counts = vec![0usize; cfg.n_steps().div_ceil(win) as usize];
    for &(s, _) in &exc.events {
        counts[(s / win) as usize] += 1;
    }
    let rates: Vec<String> = counts.iter().map(|&c| format!("{:.1}", c as f64 / n_exc as f64 / 0.1)).collect();
    println!("E rate per 100 ms: {}", rates.join(" "));
    Ok(())
}
