//! Sample-based multisection of a 3-D point cloud, and the area-aware plan
//! against a random deal on a two-area network.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cortex::decomposition::{apply_division, multisection_divide, random_equivalent_map, sample_positions, Point};
use cortex::engine::{build_rank_state, RankOptions};
use cortex::netbuild::{build_from_recipe, parse_config, plan_network, WiringRecipe};

const TWO_AREAS: &str = r#"
seed = 3
[[areas]]
name = "A"
extent = [1.0, 1.0, 0.0]
[[areas.populations]]
name = "E"
count = 1000
[[areas]]
name = "B"
origin = [3.0, 0.0, 0.0]
extent = [1.0, 1.0, 0.0]
[[areas.populations]]
name = "E"
count = 1000
[[projections]]
source = "A/E"
target = "A/E"
rule = { pairwise_bernoulli = 0.1 }
weight = { constant = 10.0 }
delay = { constant = 1.0 }
[[projections]]
source = "B/E"
target = "B/E"
rule = { pairwise_bernoulli = 0.1 }
weight = { constant = 10.0 }
delay = { constant = 1.0 }
[[projections]]
source = "A/E"
target = "B/E"
rule = { pairwise_bernoulli = 0.001 }
weight = { constant = 10.0 }
delay = { constant = 2.0 }
[[projections]]
source = "B/E"
target = "A/E"
rule = { pairwise_bernoulli = 0.001 }
weight = { constant = 10.0 }
delay = { constant = 2.0 }
"#;

fn main() -> cortex::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let points: Vec<Point> = (0..100_000).map(|_| [rng.random(), rng.random(), 0.0]).collect();
    let sample_idx = sample_positions(&points, 0.05, 4, 11)?;
    let sample: Vec<Point> = sample_idx.iter().map(|&i| points[i]).collect();
    let grid = multisection_divide(&sample, &[2, 2, 1])?;
    let mut counts = vec![0usize; grid.n_cells()];
    for c in apply_division(&points, &grid) {
        counts[c] += 1;
    }
    println!("{} sampled points, cell populations {counts:?}", sample.len());

    let cfg = parse_config(TWO_AREAS)?;
    let recipe = WiringRecipe::new(&cfg, None)?;
    let net = build_from_recipe(&cfg, &recipe)?;
    for ranks in [2, 4] {
        let area = plan_network(&cfg, &recipe, &net, ranks, 1)?;
        let random = random_equivalent_map(net.n_neurons() as u32, ranks, 1, 9)?;
        let pre = |plan| -> cortex::Result<Vec<usize>> {
            (0..ranks)
                .map(|r| Ok(build_rank_state(&net, plan, r, &RankOptions::default())?.memory().n_pre))
                .collect()
        };
        println!("{ranks} ranks: pre per rank, area mapping {:?}, random {:?}", pre(&area)?, pre(&random)?);
    }
    Ok(())
}
