//! Geometry underlying the necessity of the characteristic: for a separated
//! pair of equal-length arcs `I = (0, theta)`, `J = (d*theta, (d+1)*theta)`,
//! the kernel is essentially constant on `Q_I` as seen from any `z` in
//! `Q_J`, which forces the lower bound
//! `|K_alpha g(z)| >= C_1 * |Q_I|^{-alpha/2} * integral(g)` for nonnegative
//! `g` supported in `Q_I`.
//!
//! The module exposes the explicit constants of that argument and a sampled
//! verification of each inequality in the chain.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HardyError, Result};
use crate::geometry::{ArcInterval, CarlesonBox};
use crate::kernel::kernel;

/// Fixed RNG seed for the sampled geometry checks, recorded in the report.
pub const GEOMETRY_SEED: u64 = 0x6e65_6365_7373;

/// Number of radial and angular midpoint nodes used to integrate the kernel
/// over `Q_I` when checking the final lower bound.
const QUAD_NODES: usize = 32;

/// The two explicit constants of the separation argument:
/// `a = (2/sqrt(pi)) * (1 - pi/6)` bounding `|1 - z*conj(lambda)|` from
/// below, and `b = 1 + sqrt(5)/(2a)` bounding the segment distortion from
/// above.
pub fn necessity_constants() -> (f64, f64) {
    let a = (2.0 / PI.sqrt()) * (1.0 - PI / 6.0);
    let b = 1.0 + 5f64.sqrt() / (2.0 * a);
    (a, b)
}

/// Smallest admissible separation `d` for the given `alpha`: the least
/// integer `d > 2` with `sqrt(5) * b^{alpha-1} * alpha / (2a(d-1)) <= 1/2`,
/// which makes the kernel perturbation over `Q_I` at most half of the
/// leading term.
pub fn choose_d(alpha: f64) -> u32 {
    let (a, b) = necessity_constants();
    if !(alpha.is_finite() && alpha > 0.0) {
        return 3;
    }
    let need = 1.0 + 5f64.sqrt() * b.powf(alpha - 1.0) * alpha / a;
    (need.ceil() as u32).max(3)
}

/// Extremes of a sampled quantity.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SlackRange {
    pub min: f64,
    pub max: f64,
}

impl SlackRange {
    fn empty() -> Self {
        SlackRange {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }

    fn absorb(&mut self, v: f64) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    fn merge(mut self, other: SlackRange) -> SlackRange {
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
        self
    }
}

/// Sampled verification of the separated-boxes geometry for one
/// `(alpha, theta, d)` configuration.
///
/// Each `SlackRange` is the sampled range of the *slack* of one inequality
/// in the chain (bound minus quantity, or quantity minus bound, oriented so
/// that nonnegative means the inequality holds):
///
/// * `kernel_distance`: `|1 - z*conj(lambda)| - a*(d-1)*theta >= 0`
/// * `center_distance`: `(sqrt(5)/2)*theta - |c - lambda| >= 0`
/// * `segment_ratio`: `b - max_xi |1 - z*conj(xi)| / |1 - z*conj(lambda)| >= 0`
///   over the segment from the box centre `c` to `lambda`
/// * `perturbation`: `1/2 - alpha*|z|*|c-lambda| * W^{alpha-1} / |1-z*conj(lambda)|^alpha >= 0`
///   with `W` the worst `|1 - z*conj(xi)|` over the segment
/// * `bound_margin`: `|K_alpha g(z)| * |Q_I|^{alpha/2 - 1} / C_1` for
///   `g = chi_{Q_I}`, which must be `>= 1` at every sampled `z`
#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    pub alpha: f64,
    pub theta: f64,
    pub d: u32,
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub arc_i: ArcInterval,
    pub arc_j: ArcInterval,
    pub kernel_distance: SlackRange,
    pub center_distance: SlackRange,
    pub segment_ratio: SlackRange,
    pub perturbation: SlackRange,
    pub bound_margin: SlackRange,
}

impl GeometryReport {
    /// True when every sampled slack of the four chain inequalities is
    /// nonnegative.
    pub fn all_slacks_nonnegative(&self) -> bool {
        self.kernel_distance.min >= 0.0
            && self.center_distance.min >= 0.0
            && self.segment_ratio.min >= 0.0
            && self.perturbation.min >= 0.0
    }

    /// True when the final lower bound held at every sampled `z`.
    pub fn bound_holds(&self) -> bool {
        self.bound_margin.min >= 1.0
    }
}

/// Sample the separated-boxes inequalities for `I = (0, theta)` and
/// `J = (d*theta, (d+1)*theta)` at `n_samples` random pairs
/// `(z, lambda) in Q_J x Q_I`, and check the resulting kernel lower bound
/// with `g = chi_{Q_I}` at every sampled `z`.
pub fn necessity_geometry(
    alpha: f64,
    theta: f64,
    d: u32,
    n_samples: usize,
) -> Result<GeometryReport> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(HardyError::InvalidConfig(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if d <= 2 {
        return Err(HardyError::InvalidConfig(format!(
            "separation d must exceed 2, got {d}"
        )));
    }
    if !(theta.is_finite() && theta > 0.0) || (d as f64 + 1.0) * theta >= PI / 2.0 {
        return Err(HardyError::InvalidConfig(format!(
            "need 0 < (d+1)*theta < pi/2, got theta={theta}, d={d}"
        )));
    }
    if n_samples == 0 {
        return Err(HardyError::InvalidConfig(
            "n_samples must be positive".into(),
        ));
    }

    let (a, b) = necessity_constants();
    let c1 = 0.5 * (2.0 * PI.powf(1.5) * (d as f64 + 1.0)).powf(-alpha);

    let arc_i = ArcInterval::new(0.0, theta)?;
    let arc_j = ArcInterval::new(d as f64 * theta, theta)?;
    let box_i = CarlesonBox::new(arc_i);
    let box_j = CarlesonBox::new(arc_j);
    let c = box_i.center().to_complex();
    let area_i = box_i.area();

    // Midpoint tensor quadrature nodes for integral over Q_I of K(z, .) dA,
    // with dA = r dr dtheta / pi.
    let (ri_lo, ri_hi) = box_i.radial_range();
    let dr = (ri_hi - ri_lo) / QUAD_NODES as f64;
    let dt = theta / QUAD_NODES as f64;
    let mut nodes: Vec<(Complex64, f64)> = Vec::with_capacity(QUAD_NODES * QUAD_NODES);
    for ir in 0..QUAD_NODES {
        let r = ri_lo + (ir as f64 + 0.5) * dr;
        let w = r * dr * dt / PI;
        for it in 0..QUAD_NODES {
            let t = (it as f64 + 0.5) * dt;
            nodes.push((Complex64::from_polar(r, t), w));
        }
    }

    // Draw all samples up front so the result is independent of the
    // parallel schedule.
    let mut rng = ChaCha8Rng::seed_from_u64(GEOMETRY_SEED);
    let (rj_lo, rj_hi) = box_j.radial_range();
    let mut samples: Vec<(Complex64, Complex64)> = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let z = sample_box(&mut rng, rj_lo, rj_hi, d as f64 * theta, theta);
        let lambda = sample_box(&mut rng, ri_lo, ri_hi, 0.0, theta);
        samples.push((z, lambda));
    }

    let sep = a * (d as f64 - 1.0) * theta;
    let ranges = samples
        .par_iter()
        .fold(
            || [SlackRange::empty(); 5],
            |mut acc, &(z, lambda)| {
                let one_minus_zl = (Complex64::new(1.0, 0.0) - z * lambda.conj()).norm();
                let one_minus_zc = (Complex64::new(1.0, 0.0) - z * c.conj()).norm();
                acc[0].absorb(one_minus_zl - sep);

                let cl = (c - lambda).norm();
                acc[1].absorb(0.5 * 5f64.sqrt() * theta - cl);

                // xi -> |1 - z*conj(xi)| is convex along the segment from c
                // to lambda, so its maximum sits at an endpoint; for
                // alpha < 1 the perturbation instead needs the segment
                // minimum, the distance from the origin to the chord.
                let endpoint_max = one_minus_zc.max(one_minus_zl);
                acc[2].absorb(b - endpoint_max / one_minus_zl);

                let worst = if alpha >= 1.0 {
                    endpoint_max
                } else {
                    let p = Complex64::new(1.0, 0.0) - z * c.conj();
                    let q = Complex64::new(1.0, 0.0) - z * lambda.conj();
                    segment_distance_to_origin(p, q)
                };
                let pert =
                    alpha * z.norm() * cl * worst.powf(alpha - 1.0) / one_minus_zl.powf(alpha);
                acc[3].absorb(0.5 - pert);

                // Final bound with g = chi_{Q_I}: integral(g) = |Q_I|.
                let mut kg = Complex64::new(0.0, 0.0);
                for &(lam, w) in &nodes {
                    kg += kernel(alpha, z, lam) * w;
                }
                let margin = kg.norm() * area_i.powf(0.5 * alpha - 1.0) / c1;
                acc[4].absorb(margin);
                acc
            },
        )
        .reduce(
            || [SlackRange::empty(); 5],
            |x, y| {
                [
                    x[0].merge(y[0]),
                    x[1].merge(y[1]),
                    x[2].merge(y[2]),
                    x[3].merge(y[3]),
                    x[4].merge(y[4]),
                ]
            },
        );

    Ok(GeometryReport {
        alpha,
        theta,
        d,
        a,
        b,
        c1,
        n_samples,
        seed: GEOMETRY_SEED,
        arc_i,
        arc_j,
        kernel_distance: ranges[0],
        center_distance: ranges[1],
        segment_ratio: ranges[2],
        perturbation: ranges[3],
        bound_margin: ranges[4],
    })
}

/// Area-uniform sample from the box `{r in (r_lo, r_hi), angle in
/// (t0, t0 + len)}`.
fn sample_box(rng: &mut ChaCha8Rng, r_lo: f64, r_hi: f64, t0: f64, len: f64) -> Complex64 {
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let r = (r_lo * r_lo + u * (r_hi * r_hi - r_lo * r_lo)).sqrt();
    Complex64::from_polar(r, t0 + v * len)
}

/// Distance from the origin to the segment from `p` to `q`.
fn segment_distance_to_origin(p: Complex64, q: Complex64) -> f64 {
    let d = q - p;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return p.norm();
    }
    let t = (-(p.re * d.re + p.im * d.im) / len2).clamp(0.0, 1.0);
    (p + d * t).norm()
}
