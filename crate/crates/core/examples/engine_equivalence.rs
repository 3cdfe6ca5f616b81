//! The same network on several rank and thread counts, with and without
//! overlap, against the serial reference. Every run must give the identical
//! spike log.

use std::time::Instant;

use cortex::exchange::{simulate, SimulationOptions};
use cortex::netbuild::{build_from_recipe, parse_config, plan_network, run_reference, WiringRecipe};

const NET: &str = r#"
seed = 42
[[areas]]
name = "net"
[[areas.populations]]
name = "E"
count = 800
drive = { poisson_rate = 8000.0, poisson_weight = 87.8 }
u_init = [-65.0, -50.0]
[[areas.populations]]
name = "I"
count = 200
drive = { poisson_rate = 8000.0, poisson_weight = 87.8 }
u_init = [-65.0, -50.0]
[[projections]]
source = "net/E"
target = "net/E"
rule = { fixed_indegree = 80 }
weight = { constant = 87.8 }
delay = { uniform_steps = { low = 1, high = 15 } }
[[projections]]
source = "net/E"
target = "net/I"
rule = { fixed_indegree = 80 }
weight = { constant = 87.8 }
delay = { uniform_steps = { low = 1, high = 15 } }
[[projections]]
source = "net/I"
target = "net/E"
rule = { fixed_indegree = 20 }
weight = { constant = -439.0 }
delay = { uniform_steps = { low = 1, high = 15 } }
[[projections]]
source = "net/I"
target = "net/I"
rule = { fixed_indegree = 20 }
weight = { constant = -439.0 }
delay = { uniform_steps = { low = 1, high = 15 } }
"#;

fn main() -> cortex::Result<()> {
    let cfg = parse_config(NET)?;
    let recipe = WiringRecipe::new(&cfg, None)?;
    let net = build_from_recipe(&cfg, &recipe)?;
    let steps = 2000;

    let t0 = Instant::now();
    let reference = run_reference(&net, steps)?;
    println!("reference: {} spikes in {:.2} s", reference.len(), t0.elapsed().as_secs_f64());

    for ranks in [1, 2, 4] {
        let plan = plan_network(&cfg, &recipe, &net, ranks, 1)?;
        for threads in [1, 3] {
            for overlap in [true, false] {
                let opts = SimulationOptions {
                    n_ranks: ranks,
                    n_threads: threads,
                    overlap,
                    audit: true,
                    ..SimulationOptions::default()
                };
                let t0 = Instant::now();
                let res = simulate(&net, &plan, steps, &opts)?;
                res.check_conservation()?;
                let max_share = res.audits.iter().map(|a| a.max_threads_per_item()).max().unwrap_or(0);
                let verdict = match res.log.first_divergence(&reference) {
                    None => "identical".to_string(),
                    Some((s, n)) => format!("DIVERGES at step {s}, neuron {n}"),
                };
                println!(
                    "ranks {ranks} threads {threads} overlap {overlap:5}: {verdict}, \
                     max threads per item {max_share}, {:.2} s",
                    t0.elapsed().as_secs_f64()
                );
            }
        }
    }
    Ok(())
}
