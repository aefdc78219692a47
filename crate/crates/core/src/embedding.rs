//! Discrete Carleson embedding and the Hölder sufficiency chain.
//!
//! Both checks live on the truncated dyadic box tree: the embedding compares
//! the sum of weighted box averages against the ambient weighted `L^p` norm,
//! and the Hölder chain verifies — as exact finite-dimensional algebra — the
//! two inequalities that bound the model-operator pairing by the scanned
//! characteristic times a product of Carleson sums.

use serde::Serialize;

use crate::dyadic::GridShift;
use crate::error::{HardyError, Result};
use crate::grid::{GridFunction, PolarGrid};
use crate::operators::{weight_values, DyadicTree};
use crate::weights::WeightSpec;

/// Relative slack allowed on the chain inequalities; they are exact algebra,
/// so only floating-point roundoff is tolerated.
pub const CHAIN_TOLERANCE: f64 = 1e-12;

/// Ratio of the dyadic Carleson sum to the weighted `L^p` norm:
/// `sum over boxes |Q_I|_w * (avg_{Q_I,w} g)^p  /  integral of g^p w dA`,
/// with boxes of `shift`'s grid truncated at generation `j_max` and all
/// masses taken discretely on `grid`.  Requires `g >= 0` and a
/// not-identically-zero numerator input.
pub fn carleson_embedding_ratio(
    w: &WeightSpec,
    shift: GridShift,
    p: f64,
    g: &GridFunction,
    grid: &PolarGrid,
    j_max: u32,
) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(HardyError::InvalidConfig(format!(
            "p must be finite and >= 1, got {p}"
        )));
    }
    g.check_compat(grid)?;
    let gv = g.nonneg_real_values()?;
    let wv = weight_values(w, grid)?;
    let tree = DyadicTree::new(grid, shift, j_max)?;

    let mut g_mass: Vec<f64> = Vec::with_capacity(grid.len());
    let mut w_mass: Vec<f64> = Vec::with_capacity(grid.len());
    let mut rhs = 0.0;
    for c in grid.cells() {
        let wa = wv[c.index] * c.area;
        g_mass.push(gv[c.index] * wa);
        w_mass.push(wa);
        rhs += gv[c.index].powf(p) * wa;
    }
    if rhs <= 0.0 {
        return Err(HardyError::InvalidConfig(
            "test function is zero against the weight; the ratio is undefined".into(),
        ));
    }

    let num = tree.box_sums(&g_mass);
    let den = tree.box_sums(&w_mass);
    let mut lhs = 0.0;
    for (n, d) in num.iter().zip(&den) {
        if *d > 0.0 {
            lhs += d * (n / d).powf(p);
        }
    }
    Ok(lhs / rhs)
}

/// Result of one run of the sufficiency chain.
#[derive(Debug, Clone, Serialize)]
pub struct HolderReport {
    pub p: f64,
    pub alpha: f64,
    /// Model-operator pairing `sum over boxes |Q_I|^{-alpha/2} F_I G_I`
    /// with `F_I = integral of f sigma`, `G_I = integral of g omega`.
    pub lhs: f64,
    /// Per-box factorized bound:
    /// `char^{1/p} * sum avgF_I avgG_I |Q_I|_w^{1/p'} |Q_I|_s^{1/p}`.
    pub middle: f64,
    /// After discrete Hölder:
    /// `char^{1/p} * (sum avgF^p |Q|_s)^{1/p} (sum avgG^{p'} |Q|_w)^{1/p'}`.
    pub rhs: f64,
    /// Characteristic scanned over the same truncated tree with the same
    /// discrete masses, making the first inequality exact algebra.
    pub characteristic: f64,
    /// Number of chain inequalities violated beyond [`CHAIN_TOLERANCE`].
    pub violations: usize,
}

/// Verify `lhs <= middle <= rhs` on the truncated tree of `shift`'s grid.
/// Both inequalities are exact in real arithmetic: the first bounds each
/// box's ratio by the scanned maximum, the second is Hölder for finite
/// sequences.  Requires `f, g >= 0`.
pub fn holder_chain_check(
    w: &WeightSpec,
    p: f64,
    alpha: f64,
    shift: GridShift,
    f: &GridFunction,
    g: &GridFunction,
    grid: &PolarGrid,
    j_max: u32,
) -> Result<HolderReport> {
    if !(p.is_finite() && p > 1.0) {
        return Err(HardyError::InvalidConfig(format!(
            "p must be finite and > 1, got {p}"
        )));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(HardyError::InvalidConfig(format!(
            "alpha must be finite and positive, got {alpha}"
        )));
    }
    f.check_compat(grid)?;
    g.check_compat(grid)?;
    let fv = f.nonneg_real_values()?;
    let gv = g.nonneg_real_values()?;
    let q = p / (p - 1.0);
    let sigma = w.dual(p)?;
    let wv = weight_values(w, grid)?;
    let sv = weight_values(&sigma, grid)?;
    let tree = DyadicTree::new(grid, shift, j_max)?;

    let mut f_mass = Vec::with_capacity(grid.len());
    let mut g_mass = Vec::with_capacity(grid.len());
    let mut s_mass = Vec::with_capacity(grid.len());
    let mut w_mass = Vec::with_capacity(grid.len());
    for c in grid.cells() {
        let sa = sv[c.index] * c.area;
        let wa = wv[c.index] * c.area;
        f_mass.push(fv[c.index] * sa);
        g_mass.push(gv[c.index] * wa);
        s_mass.push(sa);
        w_mass.push(wa);
    }
    let f_box = tree.box_sums(&f_mass);
    let g_box = tree.box_sums(&g_mass);
    let s_box = tree.box_sums(&s_mass);
    let w_box = tree.box_sums(&w_mass);

    // Characteristic over the same nodes with the same discrete masses.
    let mut characteristic = 0.0f64;
    for n in 0..f_box.len() {
        let area = tree.generation_area(DyadicTree::generation_of(n));
        let ratio = w_box[n] * s_box[n].powf(p - 1.0) / area.powf(0.5 * p * alpha);
        characteristic = characteristic.max(ratio);
    }

    let mut lhs = 0.0;
    let mut mid_sum = 0.0;
    let mut holder_f = 0.0;
    let mut holder_g = 0.0;
    for n in 0..f_box.len() {
        let (ms, mw) = (s_box[n], w_box[n]);
        if ms <= 0.0 || mw <= 0.0 {
            continue;
        }
        let area = tree.generation_area(DyadicTree::generation_of(n));
        let (avg_f, avg_g) = (f_box[n] / ms, g_box[n] / mw);
        lhs += area.powf(-0.5 * alpha) * f_box[n] * g_box[n];
        mid_sum += avg_f * avg_g * mw.powf(1.0 / q) * ms.powf(1.0 / p);
        holder_f += avg_f.powf(p) * ms;
        holder_g += avg_g.powf(q) * mw;
    }
    let cfac = characteristic.powf(1.0 / p);
    let middle = cfac * mid_sum;
    let rhs = cfac * holder_f.powf(1.0 / p) * holder_g.powf(1.0 / q);

    let mut violations = 0;
    if lhs > middle * (1.0 + CHAIN_TOLERANCE) {
        violations += 1;
    }
    if middle > rhs * (1.0 + CHAIN_TOLERANCE) {
        violations += 1;
    }
    Ok(HolderReport {
        p,
        alpha,
        lhs,
        middle,
        rhs,
        characteristic,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CarlesonBox, DiskPoint};
    use crate::weights::parse_weight;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn nonneg_random(grid: &PolarGrid, seed: u64) -> GridFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GridFunction::from_values(
            grid,
            (0..grid.len())
                .map(|_| Complex64::new(rng.random::<f64>() * 3.0, 0.0))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn lebesgue_ratio_has_its_closed_form() {
        let grid = PolarGrid::new(4).unwrap();
        let w = WeightSpec::Constant(1.0);
        let one = GridFunction::constant(&grid, 1.0);
        let j_max = 6;
        let got =
            carleson_embedding_ratio(&w, GridShift::Zero, 2.0, &one, &grid, j_max).unwrap();
        // Generation j >= 1 contributes 2^j boxes of area h^2 - h^3/2 with
        // h = 2^{1-j}; generation 0 contributes the unit disk.
        let mut expected = 1.0;
        for j in 1..=j_max {
            let h = 2f64.powi(1 - j as i32);
            expected += 2.0 * h - h * h;
        }
        assert!(
            (got - expected).abs() < 1e-12 * expected,
            "got {got}, expected {expected}"
        );
    }

    #[test]
    fn ratio_is_invariant_under_weight_scaling() {
        let grid = PolarGrid::new(4).unwrap();
        let g = nonneg_random(&grid, 7);
        let w = parse_weight("radial:t=0.5").unwrap();
        let scaled = WeightSpec::Product(vec![w.clone(), WeightSpec::Constant(137.0)]);
        let a = carleson_embedding_ratio(&w, GridShift::Third, 2.0, &g, &grid, 8).unwrap();
        let b =
            carleson_embedding_ratio(&scaled, GridShift::Third, 2.0, &g, &grid, 8).unwrap();
        assert!((a - b).abs() < 1e-12 * a, "{a} vs {b}");
    }

    #[test]
    fn ratio_is_stable_in_the_truncation_depth() {
        let grid = PolarGrid::new(4).unwrap();
        let g = nonneg_random(&grid, 11);
        let w = parse_weight("radial:t=-0.5").unwrap();
        let mut ratios = Vec::new();
        for j_max in [6u32, 8, 10] {
            ratios
                .push(carleson_embedding_ratio(&w, GridShift::Zero, 2.0, &g, &grid, j_max).unwrap());
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        assert!(hi / lo < 1.10, "ratios {ratios:?}");
        assert!(lo.is_finite() && lo > 0.0);
    }

    #[test]
    fn deep_box_support_gives_a_finite_ratio() {
        let grid = PolarGrid::new(4).unwrap();
        let w = WeightSpec::Constant(1.0);
        let arc = crate::dyadic::DyadicInterval::new(GridShift::Zero, 5, 17)
            .unwrap()
            .materialize();
        let boxx = CarlesonBox::new(arc);
        let g = GridFunction::from_real_fn(&grid, |c| {
            if boxx.contains(&DiskPoint::from_polar(c.r, c.theta).unwrap()) {
                1.0
            } else {
                0.0
            }
        });
        let ratio =
            carleson_embedding_ratio(&w, GridShift::Zero, 2.0, &g, &grid, 8).unwrap();
        assert!(ratio.is_finite() && ratio > 0.0, "ratio {ratio}");
    }

    #[test]
    fn chain_holds_on_random_data_for_all_exponents() {
        let grid = PolarGrid::new(3).unwrap();
        // dual admissibility at every p here needs t/(p - 1) < 1, i.e. t < 0.5
        let w = parse_weight("radial:t=0.3").unwrap();
        for trial in 0..25 {
            let f = nonneg_random(&grid, 100 + trial);
            let g = nonneg_random(&grid, 200 + trial);
            for &p in &[1.5, 2.0, 3.0] {
                for &alpha in &[1.0, 2.0] {
                    let rep = holder_chain_check(
                        &w,
                        p,
                        alpha,
                        GridShift::Third,
                        &f,
                        &g,
                        &grid,
                        6,
                    )
                    .unwrap();
                    assert_eq!(rep.violations, 0, "{rep:?}");
                    assert!(rep.lhs <= rep.middle * (1.0 + CHAIN_TOLERANCE));
                    assert!(rep.middle <= rep.rhs * (1.0 + CHAIN_TOLERANCE));
                }
            }
        }
    }

    #[test]
    fn single_box_data_attains_holder_equality_at_p_two() {
        let grid = PolarGrid::new(4).unwrap();
        let w = WeightSpec::Constant(1.0);
        let arc = crate::dyadic::DyadicInterval::new(GridShift::Zero, 3, 2)
            .unwrap()
            .materialize();
        let boxx = CarlesonBox::new(arc);
        let ind = GridFunction::from_real_fn(&grid, |c| {
            if boxx.contains(&DiskPoint::from_polar(c.r, c.theta).unwrap()) {
                2.5
            } else {
                0.0
            }
        });
        let rep =
            holder_chain_check(&w, 2.0, 1.0, GridShift::Zero, &ind, &ind, &grid, 6).unwrap();
        // With omega = sigma and f = g, the two Hölder factors coincide, so
        // the second inequality is equality.
        assert!(
            (rep.middle - rep.rhs).abs() <= 1e-12 * rep.rhs,
            "middle {} vs rhs {}",
            rep.middle,
            rep.rhs
        );
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let grid = PolarGrid::new(3).unwrap();
        let w = WeightSpec::Constant(1.0);
        let one = GridFunction::constant(&grid, 1.0);
        let neg = GridFunction::constant(&grid, -1.0);
        let zero = GridFunction::constant(&grid, 0.0);
        assert!(carleson_embedding_ratio(&w, GridShift::Zero, 0.5, &one, &grid, 6).is_err());
        assert!(carleson_embedding_ratio(&w, GridShift::Zero, 2.0, &neg, &grid, 6).is_err());
        assert!(carleson_embedding_ratio(&w, GridShift::Zero, 2.0, &zero, &grid, 6).is_err());
        assert!(
            holder_chain_check(&w, 1.0, 1.0, GridShift::Zero, &one, &one, &grid, 6).is_err()
        );
        assert!(
            holder_chain_check(&w, 2.0, -1.0, GridShift::Zero, &one, &one, &grid, 6).is_err()
        );
    }
}
