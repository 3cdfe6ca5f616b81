//! Multi-area network of layered microcircuits wired by the toy connectome,
//! simulated on one rank per area, with per-area rates. At this scale most
//! recurrent input is missing, so rates sit well above the full-size model.

use cortex::exchange::{simulate, SimulationOptions};
use cortex::io::area_series;
use cortex::netbuild::{
    build_from_recipe, load_connectome, make_layered_cortex_net, plan_network, LayeredCortexParams, WiringRecipe,
};

fn main() -> cortex::Result<()> {
    let data = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let conn = load_connectome(&data.join("toy_connectome.csv"), Some(&data.join("toy_distances.csv")))?;
    let params = LayeredCortexParams {
        scale: 0.01,
        normalization: 0.02,
        t_sim: 200.0,
        ..LayeredCortexParams::default()
    };
    let cfg = make_layered_cortex_net(&conn, &params)?;
    let recipe = WiringRecipe::new(&cfg, None)?;
    let net = build_from_recipe(&cfg, &recipe)?;
    println!(
        "{} areas, {} neurons, {} synapses, delays {}..={} steps",
        net.areas.len(),
        net.n_neurons(),
        net.n_edges(),
        net.d_min_steps,
        net.d_max_steps
    );
    let ranks = conn.n_areas();
    let plan = plan_network(&cfg, &recipe, &net, ranks, 2)?;
    let opts = SimulationOptions {
        n_ranks: ranks,
        n_threads: 2,
        ..SimulationOptions::default()
    };
    let res = simulate(&net, &plan, cfg.n_steps(), &opts)?;
    for s in area_series(&net, &res.log, cfg.n_steps(), 100) {
        println!("{:>3}: {:>5} spikes, {:.2} Hz", s.name, s.log.len(), s.log.mean_rate_hz(s.n_neurons as usize, cfg.n_steps()));
    }
    for pop in &net.populations {
        let sub = res.log.restrict(pop.vertices.clone());
        let rate = sub.mean_rate_hz(pop.vertices.len(), cfg.n_steps());
        if pop.area == 0 {
            println!("  {}: {rate:.2} Hz", pop.name);
        }
    }
    Ok(())
}
