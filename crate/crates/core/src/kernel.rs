//! The Hardy-type kernel and its dyadic majorants.
//!
//! K_alpha(z, lambda) = (1 - z conj(lambda))^(-alpha) on the principal branch; no
//! branch ambiguity arises because Re(1 - z conj(lambda)) > 0 whenever both points
//! lie in the open disk. The dyadic counterpart of one shifted grid sums
//! |Q|^(-alpha/2) over the boxes of that grid containing both points, and the pair
//! version adds the two shifted grids; it dominates |K_alpha| up to a constant,
//! which is what makes box-counting arguments carry over to the analytic kernel.

use crate::dyadic::{angular_index, radial_depth, GridShift};
use crate::error::{HardyError, Result};
use crate::geometry::box_area;
use num_complex::Complex64;
use std::f64::consts::TAU;

/// K_alpha(z, lambda) = (1 - z conj(lambda))^(-alpha). Integer orders take the
/// exact complex-inverse path; the general case goes through exp/log.
pub fn kernel(alpha: f64, z: Complex64, lambda: Complex64) -> Complex64 {
    let w = Complex64::new(1.0, 0.0) - z * lambda.conj();
    if alpha == 1.0 {
        return w.inv();
    }
    if alpha == 2.0 {
        let i = w.inv();
        return i * i;
    }
    if alpha == 3.0 {
        let i = w.inv();
        return i * i * i;
    }
    if alpha.fract() == 0.0 && alpha.abs() <= 64.0 {
        return w.powi(-(alpha as i32));
    }
    w.powf(-alpha)
}

/// `kernel` with input validation and a near-singularity guard: rejects
/// |1 - z conj(lambda)| < 1e-14, where the power loses all relative accuracy.
pub fn kernel_checked(alpha: f64, z: Complex64, lambda: Complex64) -> Result<Complex64> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(HardyError::InvalidConfig(format!(
            "kernel order must be positive and finite, got {alpha}"
        )));
    }
    if z.norm_sqr() > 1.0 + 4.0 * f64::EPSILON || lambda.norm_sqr() > 1.0 + 4.0 * f64::EPSILON {
        return Err(HardyError::InvalidGeometry(
            "kernel arguments must lie in the closed unit disk".into(),
        ));
    }
    let w = Complex64::new(1.0, 0.0) - z * lambda.conj();
    if w.norm() < 1e-14 {
        return Err(HardyError::NearSingular);
    }
    Ok(kernel(alpha, z, lambda))
}

/// Single-grid dyadic kernel: sum of |Q|^(-alpha/2) over the boxes of `shift`'s
/// grid, generations 0..=j_max, containing both points. The angular walk stops at
/// the first generation where the points fall into different intervals; index
/// agreement is monotone down the tree because each refinement only appends one
/// bit to the interval index.
pub fn dyadic_kernel(alpha: f64, shift: GridShift, z: Complex64, lambda: Complex64, j_max: u32) -> f64 {
    let mz = z.norm();
    let ml = lambda.norm();
    if mz >= 1.0 || ml >= 1.0 {
        return 0.0;
    }
    let j_rad = radial_depth(mz, j_max).min(radial_depth(ml, j_max));
    let tz = z.arg().rem_euclid(TAU);
    let tl = lambda.arg().rem_euclid(TAU);
    let mut acc = 0.0;
    for j in 0..=j_rad {
        if angular_index(tz, shift, j) != angular_index(tl, shift, j) {
            break;
        }
        let q = box_area(2f64.powi(1 - j as i32));
        acc += term(q, alpha);
    }
    acc
}

/// Two-grid dyadic kernel: the sum over both shifted grids.
pub fn dyadic_kernel_pair(alpha: f64, z: Complex64, lambda: Complex64, j_max: u32) -> f64 {
    dyadic_kernel(alpha, GridShift::Zero, z, lambda, j_max)
        + dyadic_kernel(alpha, GridShift::Third, z, lambda, j_max)
}

#[inline]
fn term(q: f64, alpha: f64) -> f64 {
    if alpha == 2.0 {
        1.0 / q
    } else if alpha == 1.0 {
        1.0 / q.sqrt()
    } else if alpha == 3.0 {
        1.0 / (q * q.sqrt())
    } else {
        q.powf(-alpha / 2.0)
    }
}
