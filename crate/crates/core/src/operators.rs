//! Discretised application of the Hardy-kernel operator `K_alpha`, the
//! dyadic model operators `T_alpha` on either shifted grid, and the weighted
//! maximal operator `M_w`.
//!
//! All operators act on [`GridFunction`] values sampled at cell midpoints.
//! Kernel application is a dense `O(N^2)` quadrature sum; the dyadic
//! operators run in two passes over a [`DyadicTree`]: a bottom-up
//! accumulation of per-box integrals followed by a top-down sweep over
//! ancestor chains.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dyadic::{angular_index, node_count, node_index, radial_depth, GridShift};
use crate::error::{HardyError, Result};
use crate::geometry::box_area;
use crate::grid::{GridFunction, PolarGrid};
use crate::kernel::kernel;
use crate::weights::WeightSpec;

/// Deepest truncation generation accepted by tree-based operators (the tree
/// stores `2^{j_max+1} - 1` nodes).
pub const MAX_TREE_GENERATION: u32 = 20;

/// Evaluate a weight at every cell midpoint.
pub fn weight_values(w: &WeightSpec, grid: &PolarGrid) -> Result<Vec<f64>> {
    grid.cells().map(|c| w.eval_checked(c.r, c.theta)).collect()
}

/// `(sum_cells |f|^p * weight * area)^{1/p}`.
pub fn weighted_lp_norm(
    f: &GridFunction,
    weight: &[f64],
    p: f64,
    grid: &PolarGrid,
) -> Result<f64> {
    f.check_compat(grid)?;
    check_weight_len(weight, grid)?;
    if !(p.is_finite() && p >= 1.0) {
        return Err(HardyError::InvalidConfig(format!(
            "norm exponent p must be >= 1, got {p}"
        )));
    }
    let mut acc = 0.0;
    for (c, v) in grid.cells().zip(f.values()) {
        acc += v.norm().powf(p) * weight[c.index] * c.area;
    }
    Ok(acc.powf(1.0 / p))
}

/// Dense application of the kernel operator:
/// `(K_alpha f)(z_i) = sum_j kernel(alpha, z_i, lambda_j) f_j area_j`.
pub fn apply_k(alpha: f64, f: &GridFunction, grid: &PolarGrid) -> Result<GridFunction> {
    apply_k_weighted(alpha, None, f, grid)
}

/// Dense application of the dual-weighted form `K_{alpha,sigma} f =
/// K_alpha(sigma * f)`, with `sigma` evaluated at cell midpoints.
pub fn apply_k_sigma(
    alpha: f64,
    sigma: &WeightSpec,
    f: &GridFunction,
    grid: &PolarGrid,
) -> Result<GridFunction> {
    let sv = weight_values(sigma, grid)?;
    apply_k_weighted(alpha, Some(&sv), f, grid)
}

/// Dense kernel application with an optional per-cell multiplier folded into
/// the source masses.  The cell self-interaction (`j = i`) is integrated on
/// a 2x2 subdivision of the cell so the kernel is never evaluated at
/// coincident nodes; near the boundary this carries most of the
/// near-diagonal quadrature error.
pub fn apply_k_weighted(
    alpha: f64,
    cell_weight: Option<&[f64]>,
    f: &GridFunction,
    grid: &PolarGrid,
) -> Result<GridFunction> {
    check_alpha(alpha)?;
    f.check_compat(grid)?;
    if let Some(wv) = cell_weight {
        check_weight_len(wv, grid)?;
    }

    let n = grid.len();
    let centers: Vec<Complex64> = grid
        .cells()
        .map(|c| Complex64::from_polar(c.r, c.theta))
        .collect();
    let mut masses: Vec<Complex64> = Vec::with_capacity(n);
    for (c, v) in grid.cells().zip(f.values()) {
        let w = cell_weight.map_or(1.0, |wv| wv[c.index]);
        masses.push(v * (w * c.area));
    }
    let fvals = f.values();

    let values: Vec<Complex64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let z = centers[i];
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, m) in masses.iter().enumerate() {
                if j != i {
                    acc += kernel(alpha, z, centers[j]) * m;
                }
            }
            // Self cell on a 2x2 subdivision: midpoints of the quarters are
            // distinct from the cell midpoint z.
            let (r0, r1, t0, t1) = grid.cell_bounds(i);
            let rm = 0.5 * (r0 + r1);
            let tm = 0.5 * (t0 + t1);
            let wi = cell_weight.map_or(1.0, |wv| wv[i]);
            let fi = fvals[i] * wi;
            for (ra, rb) in [(r0, rm), (rm, r1)] {
                let rc = 0.5 * (ra + rb);
                let ring = (rb * rb - ra * ra) / (2.0 * PI);
                for (ta, tb) in [(t0, tm), (tm, t1)] {
                    let lam = Complex64::from_polar(rc, 0.5 * (ta + tb));
                    acc += kernel(alpha, z, lam) * (fi * (ring * (tb - ta)));
                }
            }
            acc
        })
        .collect();

    GridFunction::from_values(grid, values)
}

/// Bottom-up/top-down machinery for one shifted dyadic family truncated at
/// `j_max`: per-cell deepest containing box, per-box aggregation, and
/// ancestor-chain sweeps.  Nodes use heap order `2^j - 1 + k`.
#[derive(Debug, Clone)]
pub struct DyadicTree {
    shift: GridShift,
    j_max: u32,
    nodes: usize,
    /// Heap index of the deepest box containing each cell midpoint.
    deepest: Vec<u32>,
    /// `|Q_I|` per generation (closed form).
    gen_area: Vec<f64>,
}

impl DyadicTree {
    pub fn new(grid: &PolarGrid, shift: GridShift, j_max: u32) -> Result<Self> {
        if j_max == 0 || j_max > MAX_TREE_GENERATION {
            return Err(HardyError::InvalidConfig(format!(
                "tree truncation j_max must lie in 1..={MAX_TREE_GENERATION}, got {j_max}"
            )));
        }
        let deepest = grid
            .cells()
            .map(|c| {
                let j = radial_depth(c.r, j_max);
                node_index(j, angular_index(c.theta, shift, j)) as u32
            })
            .collect();
        let gen_area = (0..=j_max)
            .map(|j| box_area(2f64.powi(1 - j as i32)))
            .collect();
        Ok(DyadicTree {
            shift,
            j_max,
            nodes: node_count(j_max),
            deepest,
            gen_area,
        })
    }

    pub fn shift(&self) -> GridShift {
        self.shift
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    /// Number of tree nodes, `2^{j_max+1} - 1`.
    pub fn node_len(&self) -> usize {
        self.nodes
    }

    /// Generation of a heap node.
    pub fn generation_of(node: usize) -> u32 {
        (node as u64 + 1).ilog2()
    }

    /// Closed-form `|Q_I|` for boxes of the given generation.
    pub fn generation_area(&self, generation: u32) -> f64 {
        self.gen_area[generation as usize]
    }

    /// Heap index of the deepest box containing the midpoint of `cell`.
    pub fn deepest_node(&self, cell: usize) -> usize {
        self.deepest[cell] as usize
    }

    /// Per-box sums of a per-cell quantity: `sums[I] = sum over cells with
    /// midpoint in Q_I`.  Bottom-up pass.
    pub fn box_sums(&self, per_cell: &[f64]) -> Vec<f64> {
        let mut s = vec![0.0; self.nodes];
        for (c, &v) in per_cell.iter().enumerate() {
            s[self.deepest[c] as usize] += v;
        }
        for n in (1..self.nodes).rev() {
            s[(n - 1) / 2] += s[n];
        }
        s
    }

    /// Complex-valued variant of [`DyadicTree::box_sums`].
    pub fn box_sums_complex(&self, per_cell: &[Complex64]) -> Vec<Complex64> {
        let mut s = vec![Complex64::new(0.0, 0.0); self.nodes];
        for (c, &v) in per_cell.iter().enumerate() {
            s[self.deepest[c] as usize] += v;
        }
        for n in (1..self.nodes).rev() {
            let v = s[n];
            s[(n - 1) / 2] += v;
        }
        s
    }

    /// Per-cell sums of a per-node term over each cell's ancestor chain.
    /// Top-down pass.
    pub fn chain_sums(&self, node_term: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(node_term.len(), self.nodes);
        let mut acc = vec![Complex64::new(0.0, 0.0); self.nodes];
        acc[0] = node_term[0];
        for n in 1..self.nodes {
            acc[n] = acc[(n - 1) / 2] + node_term[n];
        }
        self.deepest
            .iter()
            .map(|&d| acc[d as usize])
            .collect()
    }

    /// Per-cell maxima of a per-node value over each cell's ancestor chain;
    /// nodes holding NaN (no data) inherit their parent's running value.
    pub fn chain_max(&self, node_value: &[f64]) -> Vec<f64> {
        debug_assert_eq!(node_value.len(), self.nodes);
        let mut acc = vec![f64::NEG_INFINITY; self.nodes];
        acc[0] = node_value[0];
        for n in 1..self.nodes {
            let parent = acc[(n - 1) / 2];
            acc[n] = if node_value[n].is_nan() {
                parent
            } else {
                parent.max(node_value[n])
            };
        }
        self.deepest
            .iter()
            .map(|&d| acc[d as usize])
            .collect()
    }
}

/// Dyadic model operator on one shifted grid:
/// `(T_alpha f)(z) = sum over boxes Q_I containing z of
/// |Q_I|^{-alpha/2} * integral of f over Q_I`.
pub fn apply_t(
    alpha: f64,
    shift: GridShift,
    f: &GridFunction,
    grid: &PolarGrid,
    j_max: u32,
) -> Result<GridFunction> {
    apply_t_inner(alpha, shift, None, f, grid, j_max)
}

/// Dual-weighted model operator `T_{alpha,sigma} f = T_alpha(sigma * f)`.
pub fn apply_t_sigma(
    alpha: f64,
    shift: GridShift,
    sigma: &WeightSpec,
    f: &GridFunction,
    grid: &PolarGrid,
    j_max: u32,
) -> Result<GridFunction> {
    apply_t_inner(alpha, shift, Some(sigma), f, grid, j_max)
}

fn apply_t_inner(
    alpha: f64,
    shift: GridShift,
    sigma: Option<&WeightSpec>,
    f: &GridFunction,
    grid: &PolarGrid,
    j_max: u32,
) -> Result<GridFunction> {
    check_alpha(alpha)?;
    f.check_compat(grid)?;
    let tree = DyadicTree::new(grid, shift, j_max)?;

    let sv = match sigma {
        Some(s) => Some(weight_values(s, grid)?),
        None => None,
    };
    let mut per_cell: Vec<Complex64> = Vec::with_capacity(grid.len());
    for (c, v) in grid.cells().zip(f.values()) {
        let w = sv.as_ref().map_or(1.0, |sv| sv[c.index]);
        per_cell.push(v * (w * c.area));
    }

    let sums = tree.box_sums_complex(&per_cell);
    let mut node_term = sums;
    for (n, t) in node_term.iter_mut().enumerate() {
        let j = DyadicTree::generation_of(n);
        *t *= tree.generation_area(j).powf(-0.5 * alpha);
    }
    GridFunction::from_values(grid, tree.chain_sums(&node_term))
}

/// Weighted dyadic maximal operator:
/// `(M_w f)(z) = max over boxes Q_I containing z of the w-average of |f|
/// over Q_I`.
pub fn apply_m(
    w: &WeightSpec,
    shift: GridShift,
    f: &GridFunction,
    grid: &PolarGrid,
    j_max: u32,
) -> Result<GridFunction> {
    f.check_compat(grid)?;
    let wv = weight_values(w, grid)?;
    let tree = DyadicTree::new(grid, shift, j_max)?;

    let mut num: Vec<f64> = Vec::with_capacity(grid.len());
    let mut den: Vec<f64> = Vec::with_capacity(grid.len());
    for (c, v) in grid.cells().zip(f.values()) {
        let m = wv[c.index] * c.area;
        num.push(v.norm() * m);
        den.push(m);
    }
    let num_sums = tree.box_sums(&num);
    let den_sums = tree.box_sums(&den);
    let averages: Vec<f64> = num_sums
        .iter()
        .zip(&den_sums)
        .map(|(&n, &d)| if d > 0.0 { n / d } else { f64::NAN })
        .collect();
    let values = tree
        .chain_max(&averages)
        .into_iter()
        .map(|v| Complex64::new(v, 0.0))
        .collect();
    GridFunction::from_values(grid, values)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(HardyError::InvalidConfig(format!(
            "alpha must be finite and positive, got {alpha}"
        )));
    }
    Ok(())
}

fn check_weight_len(weight: &[f64], grid: &PolarGrid) -> Result<()> {
    if weight.len() != grid.len() {
        return Err(HardyError::GridMismatch(format!(
            "weight table holds {} cells, grid has {}",
            weight.len(),
            grid.len()
        )));
    }
    Ok(())
}
