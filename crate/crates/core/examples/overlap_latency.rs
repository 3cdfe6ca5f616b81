//! Injected exchange latency with and without computation/communication
//! overlap. Output stays the same; only the wall time moves.

use std::time::Duration;

use cortex::exchange::{simulate, SimulationOptions};
use cortex::netbuild::{build_from_recipe, parse_config, plan_network, WiringRecipe};

const NET: &str = r#"
seed = 2
[[areas]]
name = "net"
[[areas.populations]]
name = "E"
count = 2000
drive = { poisson_rate = 8000.0, poisson_weight = 87.8 }
u_init = [-65.0, -50.0]
[[projections]]
source = "net/E"
target = "net/E"
rule = { fixed_indegree = 200 }
weight = { constant = 20.0 }
delay = { uniform_steps = { low = 5, high = 15 } }
"#;

fn main() -> cortex::Result<()> {
    let cfg = parse_config(NET)?;
    let recipe = WiringRecipe::new(&cfg, None)?;
    let net = build_from_recipe(&cfg, &recipe)?;
    let plan = plan_network(&cfg, &recipe, &net, 4, 1)?;
    let steps = 300;
    let mut first = None;
    for latency_us in [0, 500] {
        for overlap in [true, false] {
            let opts = SimulationOptions {
                n_ranks: 4,
                n_threads: 1,
                overlap,
                latency: Duration::from_micros(latency_us),
                timeline: true,
                ..SimulationOptions::default()
            };
            let res = simulate(&net, &plan, steps, &opts)?;
            let wall = res.reports.iter().map(|r| r.wall).max().unwrap_or_default();
            let wait: Duration = res.reports.iter().map(|r| r.exchange_wait).sum();
            let same = *first.get_or_insert_with(|| res.log.clone()) == res.log;
            println!(
                "latency {latency_us:>3} us, overlap {overlap:5}: wall {:>7.1} ms, summed wait {:>7.1} ms, \
                 {} spikes, same output {same}",
                wall.as_secs_f64() * 1e3,
                wait.as_secs_f64() * 1e3,
                res.log.len()
            );
        }
    }
    Ok(())
}
