use std::fmt::Write as _;
use std::ops::Range;

use super::multisection::{DivisionGrid, Point};
use super::AreaProcessMap;
use crate::error::{Error, Result};

/// An anatomical area: a contiguous block of vertex ids laid out inside an
/// axis-aligned box.
#[derive(Clone, Debug, PartialEq)]
pub struct AreaSpec {
    pub area_id: usize,
    pub name: String,
    pub vertices: Range<u32>,
    /// mm
    pub origin: Point,
    /// mm
    pub extent: Point,
}

impl AreaSpec {
    pub fn n_neurons(&self) -> usize {
        self.vertices.len()
    }
}

/// Vertex → (rank, thread) assignment.
///
/// Within a rank the owned ids are sorted and cut into `n_threads`
/// contiguous runs of near-equal length, remainder to the lowest threads.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionPlan {
    pub n_ranks: usize,
    pub n_threads: usize,
    pub rank_of: Vec<u32>,
    pub thread_of: Vec<u32>,
    /// Sorted owned vertex ids per rank.
    pub owned: Vec<Vec<u32>>,
    /// Per rank, per thread: index range into `owned[rank]`.
    pub thread_ranges: Vec<Vec<Range<usize>>>,
    /// Expected number of remote pre-synaptic neurons per rank, when known
    /// from the wiring recipe.
    pub remote_pre_estimate: Vec<f64>,
    /// Per area: its rank block and the division applied inside it.
    pub grids: Vec<(Range<usize>, DivisionGrid)>,
}

/// Near-equal contiguous split of `len` items over `parts`.
pub fn split_even(len: usize, parts: usize) -> Vec<Range<usize>> {
    let base = len / parts;
    let extra = len % parts;
    let mut start = 0;
    (0..parts)
        .map(|k| {
            let size = base + usize::from(k < extra);
            let r = start..start + size;
            start += size;
            r
        })
        .collect()
}

impl PartitionPlan {
    pub fn from_rank_assignment(rank_of: Vec<u32>, n_ranks: usize, n_threads: usize) -> Result<Self> {
        if n_ranks == 0 || n_threads == 0 {
            return Err(Error::InconsistentPlan("need at least one rank and one thread".into()));
        }
        let mut owned = vec![Vec::new(); n_ranks];
        for (v, &r) in rank_of.iter().enumerate() {
            let r = r as usize;
            if r >= n_ranks {
                return Err(Error::InconsistentPlan(format!(
                    "vertex {v} mapped to rank {r} of {n_ranks}"
                )));
            }
            owned[r].push(v as u32);
        }
        let mut plan = Self {
            n_ranks,
            n_threads,
            thread_of: vec![0; rank_of.len()],
            rank_of,
            owned,
            thread_ranges: Vec::new(),
            remote_pre_estimate: vec![0.0; n_ranks],
            grids: Vec::new(),
        };
        plan.assign_threads(n_threads);
        Ok(plan)
    }

    fn assign_threads(&mut self, n_threads: usize) {
        self.n_threads = n_threads;
        self.thread_ranges = self
            .owned
            .iter()
            .map(|o| split_even(o.len(), n_threads))
            .collect();
        for (r, ranges) in self.thread_ranges.iter().enumerate() {
            for (k, range) in ranges.iter().enumerate() {
                for &v in &self.owned[r][range.clone()] {
                    self.thread_of[v as usize] = k as u32;
                }
            }
        }
    }

    /// Same rank map, thread ranges re-derived for `n_threads`.
    pub fn with_threads(&self, n_threads: usize) -> Self {
        let mut p = self.clone();
        p.assign_threads(n_threads.max(1));
        p
    }

    pub fn n_vertices(&self) -> usize {
        self.rank_of.len()
    }

    /// Owned vertex ids of `(rank, thread)`.
    pub fn thread_vertices(&self, rank: usize, thread: usize) -> &[u32] {
        &self.owned[rank][self.thread_ranges[rank][thread].clone()]
    }

    /// Checks that the cells are pairwise disjoint and cover every vertex, and
    /// that the thread map is consistent with the ranges.
    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.rank_of.len()];
        for (r, cell) in self.owned.iter().enumerate() {
            for &v in cell {
                let slot = seen.get_mut(v as usize).ok_or_else(|| {
                    Error::InconsistentPlan(format!("rank {r} owns unknown vertex {v}"))
                })?;
                if *slot {
                    return Err(Error::InconsistentPlan(format!("vertex {v} owned twice")));
                }
                *slot = true;
                if self.rank_of[v as usize] as usize != r {
                    return Err(Error::InconsistentPlan(format!(
                        "vertex {v} listed under rank {r} but mapped to {}",
                        self.rank_of[v as usize]
                    )));
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::InconsistentPlan(format!("vertex {v} has no owner")));
        }
        for (r, ranges) in self.thread_ranges.iter().enumerate() {
            for (k, range) in ranges.iter().enumerate() {
                for &v in &self.owned[r][range.clone()] {
                    if self.thread_of[v as usize] as usize != k {
                        return Err(Error::InconsistentPlan(format!(
                            "vertex {v} in thread range {k} but tagged {}",
                            self.thread_of[v as usize]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Text dump: owned runs per rank, per-thread runs, and grid cuts.
    ///
    /// ```text
    /// plan ranks=2 threads=2 vertices=8
    /// rank 0 owned 0..3,5..6
    /// rank 0 thread 0 0..2
    /// rank 0 thread 1 2..3,5..6
    /// grid area=0 ranks=0..2 parts=2,1,1
    /// cut area=0 path=- dim=0 values=0.5
    /// ```
    pub fn dump(&self) -> String {
        let mut s = String::new();
        writeln!(
            s,
            "plan ranks={} threads={} vertices={}",
            self.n_ranks,
            self.n_threads,
            self.rank_of.len()
        )
        .unwrap();
        for r in 0..self.n_ranks {
            writeln!(s, "rank {r} owned {}", format_runs(&self.owned[r])).unwrap();
            for k in 0..self.n_threads {
                writeln!(s, "rank {r} thread {k} {}", format_runs(self.thread_vertices(r, k))).unwrap();
            }
        }
        for (a, (ranks, grid)) in self.grids.iter().enumerate() {
            let parts: Vec<String> = grid.parts_per_dim.iter().map(|p| p.to_string()).collect();
            writeln!(s, "grid area={a} ranks={}..{} parts={}", ranks.start, ranks.end, parts.join(",")).unwrap();
            for (path, dim, cuts) in grid.splits() {
                let path = if path.is_empty() {
                    "-".to_string()
                } else {
                    path.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(".")
                };
                let values: Vec<String> = cuts.iter().map(|c| c.to_string()).collect();
                writeln!(s, "cut area={a} path={path} dim={dim} values={}", values.join(",")).unwrap();
            }
        }
        s
    }

    /// Restores the rank and thread assignment from [`dump`](Self::dump)
    /// output. Grid lines are informational and skipped.
    pub fn parse_dump(text: &str) -> Result<Self> {
        let bad = |line: usize, reason: &str| Error::Parse {
            line,
            reason: reason.to_string(),
        };
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty plan"))?;
        let mut kv = header.split_whitespace();
        if kv.next() != Some("plan") {
            return Err(bad(1, "expected `plan` header"));
        }
        let mut fields = [0usize; 3];
        for (slot, key) in fields.iter_mut().zip(["ranks=", "threads=", "vertices="]) {
            *slot = kv
                .next()
                .and_then(|w| w.strip_prefix(key))
                .and_then(|w| w.parse().ok())
                .ok_or_else(|| bad(1, &format!("missing `{key}`")))?;
        }
        let [n_ranks, n_threads, n_vertices] = fields;
        let mut rank_of = vec![u32::MAX; n_vertices];
        let mut thread_of = vec![u32::MAX; n_vertices];
        for (i, line) in lines {
            let words: Vec<&str> = line.split_whitespace().collect();
            match words.as_slice() {
                ["rank", r, "owned", rest @ ..] => {
                    let r: usize = r.parse().map_err(|_| bad(i + 1, "bad rank"))?;
                    let runs = rest.first().copied().unwrap_or("");
                    for v in parse_runs(runs).map_err(|e| bad(i + 1, &e))? {
                        *rank_of.get_mut(v as usize).ok_or_else(|| bad(i + 1, "vertex out of range"))? = r as u32;
                    }
                }
                ["rank", _, "thread", k, rest @ ..] => {
                    let k: u32 = k.parse().map_err(|_| bad(i + 1, "bad thread"))?;
                    let runs = rest.first().copied().unwrap_or("");
                    for v in parse_runs(runs).map_err(|e| bad(i + 1, &e))? {
                        *thread_of.get_mut(v as usize).ok_or_else(|| bad(i + 1, "vertex out of range"))? = k;
                    }
                }
                ["grid", ..] | ["cut", ..] => {}
                _ => return Err(bad(i + 1, "unrecognised line")),
            }
        }
        if rank_of.contains(&u32::MAX) {
            return Err(Error::InconsistentPlan("dump leaves vertices without a rank".into()));
        }
        let plan = Self::from_rank_assignment(rank_of, n_ranks, n_threads)?;
        if plan.thread_of != thread_of {
            return Err(Error::InconsistentPlan(
                "thread runs disagree with the contiguous thread split".into(),
            ));
        }
        Ok(plan)
    }
}

fn format_runs(ids: &[u32]) -> String {
    let mut sorted = ids.to_vec();
    sorted.sort_unstable();
    let mut runs = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let start = sorted[i];
        let mut end = start + 1;
        i += 1;
        while i < sorted.len() && sorted[i] == end {
            end += 1;
            i += 1;
        }
        runs.push(format!("{start}..{end}"));
    }
    if runs.is_empty() {
        "-".into()
    } else {
        runs.join(",")
    }
}

fn parse_runs(s: &str) -> std::result::Result<Vec<u32>, String> {
    if s.is_empty() || s == "-" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for run in s.split(',') {
        let (a, b) = run.split_once("..").ok_or(format!("bad run `{run}`"))?;
        let a: u32 = a.parse().map_err(|_| format!("bad run `{run}`"))?;
        let b: u32 = b.parse().map_err(|_| format!("bad run `{run}`"))?;
        out.extend(a..b);
    }
    Ok(out)
}

/// Combines the area→rank map and the per-area divisions into a vertex
/// assignment. `positions` is indexed by vertex id.
pub fn make_partition_plan(
    areas: &[AreaSpec],
    positions: &[Point],
    map: &AreaProcessMap,
    grids: &[DivisionGrid],
    n_threads: usize,
) -> Result<PartitionPlan> {
    if areas.len() != map.ranks.len() || areas.len() != grids.len() {
        return Err(Error::InconsistentPlan(format!(
            "{} areas, {} rank blocks, {} grids",
            areas.len(),
            map.ranks.len(),
            grids.len()
        )));
    }
    let n_vertices = areas.iter().map(|a| a.vertices.end).max().unwrap_or(0) as usize;
    if positions.len() != n_vertices {
        return Err(Error::InconsistentPlan(format!(
            "{} positions for {n_vertices} vertices",
            positions.len()
        )));
    }
    let mut rank_of = vec![u32::MAX; n_vertices];
    for ((area, block), grid) in areas.iter().zip(&map.ranks).zip(grids) {
        if grid.n_cells() != block.len() {
            return Err(Error::InconsistentPlan(format!(
                "area {} has {} ranks but its grid has {} cells",
                area.name,
                block.len(),
                grid.n_cells()
            )));
        }
        for v in area.vertices.clone() {
            if rank_of[v as usize] != u32::MAX {
                return Err(Error::InconsistentPlan(format!("vertex {v} in two areas")));
            }
            let cell = grid.cell_of(&positions[v as usize]);
            rank_of[v as usize] = (block.start + cell) as u32;
        }
    }
    if let Some(v) = rank_of.iter().position(|&r| r == u32::MAX) {
        return Err(Error::InconsistentPlan(format!("vertex {v} belongs to no area")));
    }
    let mut plan = PartitionPlan::from_rank_assignment(rank_of, map.n_procs, n_threads)?;
    plan.grids = map.ranks.iter().cloned().zip(grids.iter().cloned()).collect();
    Ok(plan)
}
