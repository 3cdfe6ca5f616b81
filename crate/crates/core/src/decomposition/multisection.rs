//! Multisection division with sampling.
//!
//! A subsample of the neuron positions is sorted along the first axis and cut
//! into slabs holding near-equal sample counts; each slab is then cut along
//! the next axis, and so on. The resulting cut planes are applied to the full
//! population, which yields cells of near-equal size as long as the sample is
//! representative.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type Point = [f64; 3];

/// Indices of a seeded uniform subsample without replacement, sorted
/// ascending. Size is `max(ceil(rate·n), n_cells)`, capped at `n`.
pub fn sample_positions(points: &[Point], rate: f64, n_cells: usize, seed: u64) -> Result<Vec<usize>> {
    if points.is_empty() {
        return Err(Error::param("points", "cannot sample an empty point set"));
    }
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::param("sample_rate", format!("must lie in (0, 1], got {rate}")));
    }
    let n = points.len();
    let want = ((rate * n as f64).ceil() as usize).max(n_cells).min(n);
    if want == n {
        return Ok((0..n).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, want).into_vec();
    idx.sort_unstable();
    Ok(idx)
}

#[derive(Clone, Debug, PartialEq)]
pub enum DivisionNode {
    Cell {
        index: usize,
        sample_count: usize,
    },
    Split {
        dim: usize,
        /// Ascending; child `i` covers `(cuts[i-1], cuts[i]]`.
        cuts: Vec<f64>,
        children: Vec<DivisionNode>,
        sample_count: usize,
    },
}

impl DivisionNode {
    pub fn sample_count(&self) -> usize {
        match self {
            DivisionNode::Cell { sample_count, .. } | DivisionNode::Split { sample_count, .. } => {
                *sample_count
            }
        }
    }
}

/// Nested cut planes; leaves are numbered depth-first.
#[derive(Clone, Debug, PartialEq)]
pub struct DivisionGrid {
    pub parts_per_dim: Vec<usize>,
    pub root: DivisionNode,
}

impl DivisionGrid {
    pub fn n_cells(&self) -> usize {
        self.parts_per_dim.iter().product()
    }

    /// Cell containing `p`; points on a cut go to the lower cell and points
    /// outside the sampled extent fall into the nearest boundary cell.
    pub fn cell_of(&self, p: &Point) -> usize {
        let mut node = &self.root;
        loop {
            match node {
                DivisionNode::Cell { index, .. } => return *index,
                DivisionNode::Split {
                    dim, cuts, children, ..
                } => {
                    let x = p[*dim];
                    node = &children[cuts.partition_point(|&c| c < x)];
                }
            }
        }
    }

    /// Every split with its path of child indices from the root, depth-first.
    pub fn splits(&self) -> Vec<(Vec<usize>, usize, &[f64])> {
        fn walk<'a>(node: &'a DivisionNode, path: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, usize, &'a [f64])>) {
            if let DivisionNode::Split { dim, cuts, children, .. } = node {
                out.push((path.clone(), *dim, cuts));
                for (i, c) in children.iter().enumerate() {
                    path.push(i);
                    walk(c, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut Vec::new(), &mut out);
        out
    }

    /// Sample counts of sibling groups, one vector per split.
    pub fn sibling_counts(&self) -> Vec<Vec<usize>> {
        fn walk(node: &DivisionNode, out: &mut Vec<Vec<usize>>) {
            if let DivisionNode::Split { children, .. } = node {
                out.push(children.iter().map(DivisionNode::sample_count).collect());
                for c in children {
                    walk(c, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }
}

/// Recursive coordinate multisection of `sample` into
/// `Π parts_per_dim` cells.
pub fn multisection_divide(sample: &[Point], parts_per_dim: &[usize]) -> Result<DivisionGrid> {
    if sample.is_empty() {
        return Err(Error::param("sample", "multisection needs at least one point"));
    }
    if parts_per_dim.is_empty() || parts_per_dim.len() > 3 || parts_per_dim.contains(&0) {
        return Err(Error::param(
            "parts_per_dim",
            "need one to three positive part counts",
        ));
    }
    let mut idx: Vec<usize> = (0..sample.len()).collect();
    let mut next_cell = 0;
    let root = divide(sample, &mut idx, parts_per_dim, 0, &mut next_cell);
    Ok(DivisionGrid {
        parts_per_dim: parts_per_dim.to_vec(),
        root,
    })
}

fn divide(
    sample: &[Point],
    idx: &mut [usize],
    parts: &[usize],
    dim: usize,
    next_cell: &mut usize,
) -> DivisionNode {
    let count = idx.len();
    if dim == parts.len() {
        let index = *next_cell;
        *next_cell += 1;
        return DivisionNode::Cell {
            index,
            sample_count: count,
        };
    }
    let k = parts[dim];
    if k == 1 {
        return divide(sample, idx, parts, dim + 1, next_cell);
    }
    // ties broken by point index so duplicate coordinates split deterministically
    idx.sort_unstable_by(|&a, &b| sample[a][dim].total_cmp(&sample[b][dim]).then(a.cmp(&b)));
    let base = count / k;
    let extra = count % k;
    let mut bounds = Vec::with_capacity(k + 1);
    bounds.push(0);
    for g in 0..k {
        let size = base + usize::from(g < extra);
        bounds.push(bounds[g] + size);
    }
    let mut cuts = Vec::with_capacity(k - 1);
    for g in 1..k {
        let b = bounds[g];
        let cut = if b == 0 || b >= count {
            // more parts than points; an empty slab collapses onto its neighbour
            sample[idx[b.min(count - 1)]][dim]
        } else {
            0.5 * (sample[idx[b - 1]][dim] + sample[idx[b]][dim])
        };
        cuts.push(cut);
    }
    let mut children = Vec::with_capacity(k);
    for g in 0..k {
        let slab = &mut idx[bounds[g]..bounds[g + 1]];
        children.push(divide(sample, slab, parts, dim + 1, next_cell));
    }
    DivisionNode::Split {
        dim,
        cuts,
        children,
        sample_count: count,
    }
}

/// Cell index of every point under `grid`.
pub fn apply_division(points: &[Point], grid: &DivisionGrid) -> Vec<usize> {
    points.iter().map(|p| grid.cell_of(p)).collect()
}

/// Near-cubic factorisation of `n_parts` over three axes: prime factors,
/// largest first, each go to the axis with the widest current cell.
pub fn factorize_parts(n_parts: usize, extent: Point) -> Vec<usize> {
    let mut factors = Vec::new();
    let mut m = n_parts.max(1);
    let mut f = 2;
    while f * f <= m {
        while m.is_multiple_of(f) {
            factors.push(f);
            m /= f;
        }
        f += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    factors.sort_unstable_by(|a, b| b.cmp(a));
    let mut parts = vec![1usize; 3];
    for f in factors {
        let axis = (0..3)
            .max_by(|&a, &b| {
                let wa = extent[a] / parts[a] as f64;
                let wb = extent[b] / parts[b] as f64;
                wa.total_cmp(&wb).then(b.cmp(&a))
            })
            .unwrap();
        parts[axis] *= f;
    }
    parts
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn uniform(n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| [rng.random(), rng.random(), 0.0]).collect()
    }

    #[test]
    fn sample_cases() {
        let pts = uniform(100_000, 1);
        assert_eq!(sample_positions(&pts[..50], 1.0, 4, 0).unwrap(), (0..50).collect::<Vec<_>>());
        let s = sample_positions(&pts, 0.1, 4, 3).unwrap();
        assert_eq!(s.len(), 10_000);
        assert_eq!(s, sample_positions(&pts, 0.1, 4, 3).unwrap());
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(sample_positions(&pts[..10], 0.01, 4, 0).unwrap().len(), 4);
        assert!(sample_positions(&[], 0.5, 1, 0).is_err());
        assert!(sample_positions(&pts, 0.0, 1, 0).is_err());
    }

    #[test]
    fn collinear_median_split() {
        let pts: Vec<Point> = (0..8).map(|i| [i as f64, 0.0, 0.0]).collect();
        let grid = multisection_divide(&pts, &[2]).unwrap();
        match &grid.root {
            DivisionNode::Split { cuts, .. } => assert_eq!(cuts, &vec![3.5]),
            _ => panic!("expected a split"),
        }
        let cells = apply_division(&pts, &grid);
        assert_eq!(cells, vec![0, 0, 0, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn unit_parts_is_single_cell() {
        let pts = uniform(100, 2);
        let grid = multisection_divide(&pts, &[1, 1, 1]).unwrap();
        assert_eq!(grid.n_cells(), 1);
        assert!(apply_division(&pts, &grid).iter().all(|&c| c == 0));
        assert!(apply_division(&[[1e9, -1e9, 0.0]], &grid) == vec![0]);
    }

    #[test]
    fn boundary_points_go_low() {
        let pts: Vec<Point> = vec![[0.0, 0.0, 0.0], [2.0, 0.0, 0.0]];
        let grid = multisection_divide(&pts, &[2]).unwrap();
        assert_eq!(grid.cell_of(&[1.0, 0.0, 0.0]), 0);
        assert_eq!(grid.cell_of(&[1.0 + 1e-12, 0.0, 0.0]), 1);
        assert_eq!(grid.cell_of(&[-5.0, 0.0, 0.0]), 0);
        assert_eq!(grid.cell_of(&[9.0, 0.0, 0.0]), 1);
    }

    #[test]
    fn square_grid_balances_sample() {
        let pts = uniform(10_000, 5);
        let grid = multisection_divide(&pts, &[2, 2]).unwrap();
        let mut counts = vec![0usize; 4];
        for c in apply_division(&pts, &grid) {
            counts[c] += 1;
        }
        assert!(counts.iter().all(|&c| c == 2500), "{counts:?}");
        for level in grid.sibling_counts() {
            let (lo, hi) = (level.iter().min().unwrap(), level.iter().max().unwrap());
            assert!(hi - lo <= 1);
        }
    }

    #[test]
    fn duplicate_coordinates_split_by_index() {
        let pts: Vec<Point> = vec![[1.0, 0.0, 0.0]; 6];
        let grid = multisection_divide(&pts, &[3]).unwrap();
        assert_eq!(grid.sibling_counts(), vec![vec![2, 2, 2]]);
        assert_eq!(grid, multisection_divide(&pts, &[3]).unwrap());
    }

    #[test]
    fn factorization() {
        assert_eq!(factorize_parts(4, [1.0, 1.0, 0.0]), vec![2, 2, 1]);
        assert_eq!(factorize_parts(6, [3.0, 1.0, 1.0]), vec![6, 1, 1]);
        assert_eq!(factorize_parts(8, [1.0, 1.0, 1.0]), vec![2, 2, 2]);
        assert_eq!(factorize_parts(1, [1.0, 1.0, 1.0]), vec![1, 1, 1]);
        assert_eq!(factorize_parts(7, [1.0, 2.0, 1.0]).iter().product::<usize>(), 7);
    }
}
