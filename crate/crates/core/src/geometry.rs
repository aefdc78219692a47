//! Disk points, boundary arcs, Carleson boxes and the exact box-area formula.
//!
//! Conventions used throughout the crate:
//! * angles live in [0, 2pi), arcs are half-open [start, start+len) and may wrap;
//! * the normalized length of an arc is |I| = len_rad/pi, so |T| = 2;
//! * the Carleson box of I is Q_I = { z : z/|z| in I, 1-|I| < |z| < 1 } and its top
//!   half B_I tightens the radial bound to 1-|I|/2 < |z| < 1;
//! * membership is strict on radial bounds; z = 0 belongs to Q_I only when 1-|I| < 0
//!   and I is the full circle (the direction z/|z| is undefined at 0, and only the
//!   full-circle arc contains every limiting direction).

use crate::error::{HardyError, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// A point of the closed unit disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint {
    re: f64,
    im: f64,
}

impl DiskPoint {
    /// Rejects points with |z|^2 > 1 (up to a 4-ulp construction tolerance).
    pub fn new(re: f64, im: f64) -> Result<Self> {
        let m2 = re * re + im * im;
        if !m2.is_finite() || m2 > 1.0 + 4.0 * f64::EPSILON {
            return Err(HardyError::InvalidGeometry(format!(
                "point ({re}, {im}) lies outside the closed unit disk"
            )));
        }
        Ok(Self { re, im })
    }

    /// Polar constructor; `r` in [0, 1].
    pub fn from_polar(r: f64, theta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(HardyError::InvalidGeometry(format!("radius {r} outside [0, 1]")));
        }
        Ok(Self { re: r * theta.cos(), im: r * theta.sin() })
    }

    pub fn re(&self) -> f64 {
        self.re
    }

    pub fn im(&self) -> f64 {
        self.im
    }

    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }

    /// Argument normalized to [0, 2pi).
    pub fn argument(&self) -> f64 {
        self.im.atan2(self.re).rem_euclid(TAU)
    }

    pub fn rotate(&self, phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self { re: self.re * c - self.im * s, im: self.re * s + self.im * c }
    }

    pub fn to_complex(self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re, self.im)
    }
}

/// Half-open boundary arc [start, start + len_rad) with start normalized to [0, 2pi)
/// and 0 < len_rad <= 2pi. Wrap-around is handled by modular arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcInterval {
    start: f64,
    len_rad: f64,
}

impl ArcInterval {
    pub fn new(start: f64, len_rad: f64) -> Result<Self> {
        if !len_rad.is_finite() || len_rad <= 0.0 || len_rad > TAU + 1e-12 {
            return Err(HardyError::InvalidGeometry(format!(
                "arc length {len_rad} outside (0, 2pi]"
            )));
        }
        if !start.is_finite() {
            return Err(HardyError::InvalidGeometry("non-finite arc start".into()));
        }
        Ok(Self { start: start.rem_euclid(TAU), len_rad: len_rad.min(TAU) })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn len_rad(&self) -> f64 {
        self.len_rad
    }

    /// |I| = len_rad / pi, in (0, 2].
    pub fn normalized_length(&self) -> f64 {
        self.len_rad / PI
    }

    pub fn is_full_circle(&self) -> bool {
        self.len_rad >= TAU
    }

    pub fn midpoint(&self) -> f64 {
        (self.start + 0.5 * self.len_rad).rem_euclid(TAU)
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        if self.is_full_circle() {
            return true;
        }
        (theta - self.start).rem_euclid(TAU) < self.len_rad
    }

    /// Set containment of half-open arcs, with a small absolute slack: endpoints are
    /// reduced mod 2pi, so independently computed endpoints of genuinely nested arcs
    /// (e.g. a dyadic interval and its children) can disagree by a few ulps of 2pi.
    /// The slack is well above that rounding scale and well below any arc the crate
    /// distinguishes geometrically.
    pub fn contains_arc(&self, other: &ArcInterval) -> bool {
        const TOL: f64 = 1e-13;
        if self.is_full_circle() {
            return true;
        }
        if other.len_rad > self.len_rad + TOL {
            return false;
        }
        let mut d0 = (other.start - self.start).rem_euclid(TAU);
        if d0 >= TAU - TOL {
            // `other.start` rounded to a hair below `self.start`: same cut point.
            d0 = 0.0;
        }
        d0 + other.len_rad <= self.len_rad + TOL
    }

    pub fn rotate(&self, phi: f64) -> Self {
        Self { start: (self.start + phi).rem_euclid(TAU), len_rad: self.len_rad }
    }
}

/// Exact area of the Carleson box over an arc of normalized length `nl`, under the
/// dA = dx dy / pi normalization:
///   nl^2 - nl^3/2          for 0 < nl <= 1,
///   nl/2                   for 1 < nl <= 2.
/// Both branches give 1/2 at nl = 1, and nl^2/(4 pi) <= area <= nl^2 holds throughout.
pub fn box_area(nl: f64) -> f64 {
    debug_assert!(nl > 0.0 && nl <= 2.0 + 1e-12, "normalized length {nl} outside (0, 2]");
    if nl <= 1.0 {
        nl * nl - nl * nl * nl / 2.0
    } else {
        nl.min(2.0) / 2.0
    }
}

/// Which part of the box a membership test addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoxPart {
    Full,
    TopHalf,
}

/// Carleson box over a boundary arc.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarlesonBox {
    arc: ArcInterval,
}

impl CarlesonBox {
    pub fn new(arc: ArcInterval) -> Self {
        Self { arc }
    }

    pub fn arc(&self) -> &ArcInterval {
        &self.arc
    }

    /// Radial range of |z| values met by the box, clamped to [0, 1).
    pub fn radial_range(&self) -> (f64, f64) {
        ((1.0 - self.arc.normalized_length()).max(0.0), 1.0)
    }

    pub fn area(&self) -> f64 {
        box_area(self.arc.normalized_length())
    }

    /// Center point: radial midpoint of the (clamped) radial range on the arc bisector.
    pub fn center(&self) -> DiskPoint {
        let (lo, hi) = self.radial_range();
        DiskPoint::from_polar(0.5 * (lo + hi), self.arc.midpoint())
            .expect("radial midpoint is interior")
    }

    pub fn contains(&self, z: &DiskPoint) -> bool {
        self.contains_part(z, BoxPart::Full)
    }

    pub fn top_half_contains(&self, z: &DiskPoint) -> bool {
        self.contains_part(z, BoxPart::TopHalf)
    }

    fn contains_part(&self, z: &DiskPoint, part: BoxPart) -> bool {
        let m = z.modulus();
        if m >= 1.0 {
            return false;
        }
        let nl = self.arc.normalized_length();
        let lo = match part {
            BoxPart::Full => 1.0 - nl,
            BoxPart::TopHalf => 1.0 - nl / 2.0,
        };
        if !(lo < m) {
            return false;
        }
        if m == 0.0 {
            // direction undefined: only the full circle contains every limit direction
            return self.arc.is_full_circle();
        }
        self.arc.contains_angle(z.argument())
    }
}

/// Free-function membership test matching `CarlesonBox::contains`/`top_half_contains`.
pub fn in_box(z: &DiskPoint, arc: &ArcInterval, part: BoxPart) -> bool {
    CarlesonBox::new(*arc).contains_part(z, part)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn polar_round_trip() {
        for &(r, th) in &[(0.0, 1.0), (0.5, 3.9), (1.0, 6.2), (0.999999, 0.0)] {
            let z = DiskPoint::from_polar(r, th).unwrap();
            assert!((z.modulus() - r).abs() <= 4.0 * f64::EPSILON);
            if r > 0.0 {
                let d = (z.argument() - th.rem_euclid(TAU)).abs();
                assert!(d.min(TAU - d) < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_exterior_points() {
        assert!(DiskPoint::new(1.0, 0.1).is_err());
        assert!(DiskPoint::new(0.8, 0.8).is_err());
        assert!(DiskPoint::from_polar(1.2, 0.0).is_err());
        assert!(DiskPoint::new(1.0, 0.0).is_ok()); // boundary belongs to the closed disk
    }

    #[test]
    fn arc_wraparound_membership() {
        // arc of length pi/2 starting at 7pi/4 wraps through 0
        let arc = ArcInterval::new(7.0 * PI / 4.0, PI / 2.0).unwrap();
        assert!(arc.contains_angle(0.1));
        assert!(arc.contains_angle(7.0 * PI / 4.0)); // closed at start
        assert!(!arc.contains_angle(PI / 4.0 + 1e-9)); // open at end
        assert!(!arc.contains_angle(PI));
        assert!((arc.midpoint() - 0.0).abs() < 1e-12);
    }

    #[test]
    fn arc_containment_and_rotation() {
        let big = ArcInterval::new(1.0, 2.0).unwrap();
        let small = ArcInterval::new(1.5, 0.5).unwrap();
        assert!(big.contains_arc(&small));
        assert!(!small.contains_arc(&big));
        // rotation preserves containment, including across the wrap point
        let phi = 5.9;
        assert!(big.rotate(phi).contains_arc(&small.rotate(phi)));
        // full circle contains any arc, wrapped or not
        let full = ArcInterval::new(2.2, TAU).unwrap();
        assert!(full.contains_arc(&ArcInterval::new(6.0, 1.0).unwrap()));
    }

    #[test]
    fn box_membership_examples() {
        // |I| < 1: radius 0 excluded by the strict radial bound
        let arc = ArcInterval::new(0.0, 0.5 * PI).unwrap();
        let boxx = CarlesonBox::new(arc);
        assert!(!boxx.contains(&DiskPoint::new(0.0, 0.0).unwrap()));
        assert!(boxx.contains(&DiskPoint::from_polar(0.9, 0.7).unwrap()));
        assert!(!boxx.contains(&DiskPoint::from_polar(0.4, 0.7).unwrap())); // below 1-|I|
        assert!(!boxx.contains(&DiskPoint::from_polar(0.9, 2.0).unwrap())); // outside arc

        // top half of the full circle: punctured disk
        let full = CarlesonBox::new(ArcInterval::new(0.0, TAU).unwrap());
        assert!(full.top_half_contains(&DiskPoint::from_polar(0.3, 1.0).unwrap()));
        assert!(!full.top_half_contains(&DiskPoint::new(0.0, 0.0).unwrap()));
        assert!(full.contains(&DiskPoint::new(0.0, 0.0).unwrap()));
    }

    #[test]
    fn box_center_matches_hand_value() {
        // I = (0, theta) with theta = pi/8: |I| = 1/8, center at radius 1 - 1/16, angle pi/16
        let arc = ArcInterval::new(0.0, PI / 8.0).unwrap();
        let c = CarlesonBox::new(arc).center();
        assert!((c.modulus() - (1.0 - 1.0 / 16.0)).abs() < 1e-12);
        assert!((c.argument() - PI / 16.0).abs() < 1e-12);
    }

    #[test]
    fn area_bounds() {
        for i in 1..=400 {
            let nl = 2.0 * i as f64 / 400.0;
            let a = box_area(nl);
            assert!(a <= nl * nl + 1e-15);
            assert!(a >= nl * nl / (4.0 * PI) - 1e-15);
        }
    }

    proptest! {
        /// chord identity: |1 - z conj(l)|^2 = (1 - r1 r2)^2 + 4 r1 r2 sin^2((t1-t2)/2)
        #[test]
        fn chord_identity(r1 in 0.0..1.0f64, r2 in 0.0..1.0f64,
                          t1 in 0.0..TAU, t2 in 0.0..TAU) {
            let z = DiskPoint::from_polar(r1, t1).unwrap().to_complex();
            let l = DiskPoint::from_polar(r2, t2).unwrap().to_complex();
            let lhs = (num_complex::Complex64::new(1.0, 0.0) - z * l.conj()).norm_sqr();
            let s = ((t1 - t2) / 2.0).sin();
            let rhs = (1.0 - r1 * r2).powi(2) + 4.0 * r1 * r2 * s * s;
            prop_assert!((lhs - rhs).abs() < 1e-12 * lhs.max(1e-30));
        }

        /// rotation invariance of membership
        #[test]
        fn rotation_preserves_membership(start in 0.0..TAU, nl in 0.01..2.0f64,
                                         r in 0.0..1.0f64, t in 0.0..TAU, phi in 0.0..TAU) {
            let arc = ArcInterval::new(start, nl * PI).unwrap();
            let z = DiskPoint::from_polar(r, t).unwrap();
            let before = in_box(&z, &arc, BoxPart::Full);
            // rotate both; fp rounding can flip points within ~1e-12 of an edge, so skip those
            let d_lo = ((t - start).rem_euclid(TAU) - 0.0).abs();
            let d_hi = ((t - start).rem_euclid(TAU) - arc.len_rad()).abs();
            prop_assume!(d_lo > 1e-9 && d_hi > 1e-9);
            prop_assume!((r - (1.0 - nl)).abs() > 1e-9);
            let after = in_box(&z.rotate(phi), &arc.rotate(phi), BoxPart::Full);
            prop_assert_eq!(before, after);
        }

        /// monotonicity: larger arc over same start contains the smaller box
        #[test]
        fn box_monotone_in_arc(start in 0.0..TAU, nl in 0.01..1.0f64,
                               grow in 1.0..2.0f64, r in 0.0..1.0f64, t in 0.0..TAU) {
            let small = ArcInterval::new(start, nl * PI).unwrap();
            let big = ArcInterval::new(start, (nl * grow).min(2.0) * PI).unwrap();
            let z = DiskPoint::from_polar(r, t).unwrap();
            if in_box(&z, &small, BoxPart::Full) {
                prop_assert!(in_box(&z, &big, BoxPart::Full));
            }
        }
    }
}
