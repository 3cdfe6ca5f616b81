use std::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::PartitionPlan;
use crate::error::{Error, Result};

/// Contiguous block of ranks per area.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AreaProcessMap {
    pub ranks: Vec<Range<usize>>,
    pub n_procs: usize,
}

impl AreaProcessMap {
    pub fn counts(&self) -> Vec<usize> {
        self.ranks.iter().map(|r| r.len()).collect()
    }

    fn from_counts(counts: &[usize]) -> Self {
        let mut start = 0;
        let ranks = counts
            .iter()
            .map(|&c| {
                let r = start..start + c;
                start += c;
                r
            })
            .collect();
        Self {
            ranks,
            n_procs: start,
        }
    }
}

/// Apportions `n_procs` ranks to areas proportionally to `costs`.
///
/// Largest-remainder rounding with at least one rank per area; ties go to the
/// lowest area index.
pub fn map_areas_to_processes(costs: &[f64], n_procs: usize) -> Result<AreaProcessMap> {
    let n_areas = costs.len();
    if n_areas == 0 || n_procs < n_areas {
        return Err(Error::NotEnoughRanks { n_procs, n_areas });
    }
    if costs.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(Error::param("costs", "must be finite and non-negative"));
    }
    let total: f64 = costs.iter().sum();
    let quotas: Vec<f64> = if total > 0.0 {
        costs.iter().map(|c| c / total * n_procs as f64).collect()
    } else {
        vec![n_procs as f64 / n_areas as f64; n_areas]
    };
    let mut counts: Vec<usize> = quotas.iter().map(|q| (q.floor() as usize).max(1)).collect();
    let mut assigned: usize = counts.iter().sum();

    while assigned < n_procs {
        let best = (0..n_areas)
            .max_by(|&a, &b| {
                let ra = quotas[a] - counts[a] as f64;
                let rb = quotas[b] - counts[b] as f64;
                ra.partial_cmp(&rb).unwrap().then(b.cmp(&a))
            })
            .unwrap();
        counts[best] += 1;
        assigned += 1;
    }
    // the floor of one rank can overshoot; take back from the most
    // over-served area that can spare one
    while assigned > n_procs {
        let worst = (0..n_areas)
            .filter(|&a| counts[a] > 1)
            .max_by(|&a, &b| {
                let ea = counts[a] as f64 - quotas[a];
                let eb = counts[b] as f64 - quotas[b];
                ea.partial_cmp(&eb).unwrap().then(b.cmp(&a))
            })
            .expect("n_procs >= n_areas leaves a spare rank");
        counts[worst] -= 1;
        assigned -= 1;
    }
    Ok(AreaProcessMap::from_counts(&counts))
}

/// Baseline mapping: shuffle all vertices with a seeded RNG and deal them
/// round-robin onto `n_procs` equal cells.
pub fn random_equivalent_map(
    n_vertices: u32,
    n_procs: usize,
    n_threads: usize,
    seed: u64,
) -> Result<PartitionPlan> {
    if n_procs == 0 {
        return Err(Error::param("n_procs", "must be at least 1"));
    }
    let mut order: Vec<u32> = (0..n_vertices).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut rank_of = vec![0u32; n_vertices as usize];
    for (i, &v) in order.iter().enumerate() {
        rank_of[v as usize] = (i % n_procs) as u32;
    }
    PartitionPlan::from_rank_assignment(rank_of, n_procs, n_threads)
}
