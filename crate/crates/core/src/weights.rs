//! Weight specifications, their duals, and quadrature for box masses.
//!
//! A weight is a positive a.e. function on the unit disk. The built-in family is
//! closed under the dual map sigma = omega^(-1/(p-1)) and under rotation:
//! constants, radial powers (1-|z|)^t, boundary-point powers |1 - conj(z) e^{i
//! theta0}|^s = dist(z, e^{i theta0})^s, finite products of these, and
//! grid-tabulated data.
//!
//! Masses are integrals against dA = dx dy / pi. The quadrature is anchored to the
//! arc (panels are placed relative to the arc and to the weight's distinguished
//! angles, never to grid cells), which makes computed masses rotation-covariant to
//! ~1e-13. Radial integrals reaching the boundary are graded geometrically in
//! u = 1-r and finished with a power-law fit of the weight on the last sliver; a
//! fitted exponent <= -1 is reported as `NotIntegrable`, which doubles as a numeric
//! integrability check. Near a singular angle the integration order is swapped
//! (angular first at fixed radius), because along the singular ray the radial
//! integral alone can diverge even when the two-dimensional mass is finite.

use crate::error::{HardyError, Result};
use crate::geometry::ArcInterval;
use crate::grid::{parse_signature_line, GridFunction, PolarGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

/// Golden-angle increment, used wherever a scan wants incommensurable rotations.
pub const GOLDEN_ANGLE: f64 = 2.399963229728653;

#[derive(Debug, Clone)]
pub enum WeightSpec {
    /// w(z) = c with c > 0.
    Constant(f64),
    /// w(z) = (1 - |z|)^t; integrable iff t > -1.
    RadialPower(f64),
    /// w(z) = |1 - conj(z) e^{i theta0}|^s = |z - e^{i theta0}|^s; integrable iff s > -2.
    BoundaryPoint { theta0: f64, s: f64 },
    /// Pointwise product of factors.
    Product(Vec<WeightSpec>),
    /// Cell-wise constant data sampled on a polar grid.
    Tabulated(TabulatedWeight),
}

#[derive(Debug, Clone)]
pub struct TabulatedWeight {
    label: String,
    grid: PolarGrid,
    values: Arc<Vec<f64>>,
}

impl TabulatedWeight {
    /// Values must be strictly positive and finite (zeros would break the dual map).
    pub fn new(label: impl Into<String>, grid: PolarGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(HardyError::GridMismatch(format!(
                "{} values for a {}-cell grid",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(HardyError::InvalidConfig(format!(
                "tabulated weight must be positive and finite; cell {i} holds {}",
                values[i]
            )));
        }
        Ok(Self { label: label.into(), grid, values: Arc::new(values) })
    }

    /// Load from the grid-function CSV format; the grid is rebuilt from the file's
    /// own signature line.
    pub fn from_path(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let sig = parse_signature_line(&text)?;
        let grid = PolarGrid::with_base(sig.depth, sig.angular_base)?;
        if grid.len() != sig.cells {
            return Err(HardyError::Parse {
                position: 0,
                message: format!(
                    "signature declares {} cells but depth={} base={} yields {}",
                    sig.cells,
                    sig.depth,
                    sig.angular_base,
                    grid.len()
                ),
            });
        }
        let f = GridFunction::from_csv(&grid, &text)?;
        Self::new(path, grid, f.nonneg_real_values()?)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn grid(&self) -> &PolarGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn eval(&self, r: f64, theta: f64) -> f64 {
        self.values[self.grid.locate(r, theta)]
    }

    fn map(&self, label: String, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(label, self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }
}

fn pow_fast(base: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e == 1.0 {
        base
    } else if e == 2.0 {
        base * base
    } else if e == -1.0 {
        1.0 / base
    } else if e == 0.5 {
        base.sqrt()
    } else if e == -0.5 {
        1.0 / base.sqrt()
    } else if e.fract() == 0.0 && e.abs() <= 16.0 {
        base.powi(e as i32)
    } else {
        base.powf(e)
    }
}

impl WeightSpec {
    /// Point evaluation; may return infinity at a singular boundary point.
    pub fn eval(&self, r: f64, theta: f64) -> f64 {
        match self {
            WeightSpec::Constant(c) => *c,
            WeightSpec::RadialPower(t) => pow_fast(1.0 - r, *t),
            WeightSpec::BoundaryPoint { theta0, s } => {
                // |z - e^{i theta0}|^2 = (1-r)^2 + 4 r sin^2(delta/2): all terms
                // nonnegative, so no cancellation near the singular point (the
                // textbook 1 - 2 r cos(delta) + r^2 loses every digit there).
                let half_sin = (0.5 * (theta - theta0)).sin();
                let u = 1.0 - r;
                let m2 = u * u + 4.0 * r * half_sin * half_sin;
                pow_fast(m2, 0.5 * s)
            }
            WeightSpec::Product(fs) => fs.iter().map(|f| f.eval(r, theta)).product(),
            WeightSpec::Tabulated(t) => t.eval(r, theta),
        }
    }

    /// Evaluation that turns a non-finite value into an error.
    pub fn eval_checked(&self, r: f64, theta: f64) -> Result<f64> {
        let v = self.eval(r, theta);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(HardyError::Singular)
        }
    }

    /// Structural and integrability validation. For products the rule is joint:
    /// with T the total radial exponent and S_theta the total exponent at a
    /// distinguished angle, integrability needs T > -1 and T + S_theta > -2;
    /// individual factors may violate their standalone bound as long as the
    /// product compensates.
    pub fn validate(&self) -> Result<()> {
        // structural checks per factor
        fn structural(w: &WeightSpec) -> Result<()> {
            match w {
                WeightSpec::Constant(c) => {
                    if !(c.is_finite() && *c > 0.0) {
                        return Err(HardyError::InvalidConfig(format!(
                            "constant weight must be positive and finite, got {c}"
                        )));
                    }
                }
                WeightSpec::RadialPower(t) => {
                    if !t.is_finite() {
                        return Err(HardyError::InvalidConfig("non-finite radial exponent".into()));
                    }
                }
                WeightSpec::BoundaryPoint { theta0, s } => {
                    if !(theta0.is_finite() && s.is_finite()) {
                        return Err(HardyError::InvalidConfig(
                            "non-finite boundary-point parameter".into(),
                        ));
                    }
                }
                WeightSpec::Product(fs) => {
                    if fs.is_empty() {
                        return Err(HardyError::InvalidConfig("empty weight product".into()));
                    }
                    for f in fs {
                        structural(f)?;
                    }
                }
                WeightSpec::Tabulated(_) => {} // validated at construction
            }
            Ok(())
        }
        structural(self)?;
        let t = self.radial_exponent();
        if t <= -1.0 {
            return Err(HardyError::NotIntegrable(format!("radial exponent {t} <= -1")));
        }
        for (theta0, s) in self.angular_exponents() {
            if t + s <= -2.0 {
                return Err(HardyError::NotIntegrable(format!(
                    "corner exponent {} <= -2 at angle {theta0}",
                    t + s
                )));
            }
        }
        Ok(())
    }

    /// Total radial exponent (sum of radial-power exponents over all factors).
    pub fn radial_exponent(&self) -> f64 {
        match self {
            WeightSpec::RadialPower(t) => *t,
            WeightSpec::Product(fs) => fs.iter().map(|f| f.radial_exponent()).sum(),
            _ => 0.0,
        }
    }

    /// Distinguished angles with their total exponents, merged cyclically; entries
    /// with zero exponent are dropped.
    pub fn angular_exponents(&self) -> Vec<(f64, f64)> {
        fn collect(w: &WeightSpec, out: &mut Vec<(f64, f64)>) {
            match w {
                WeightSpec::BoundaryPoint { theta0, s } => {
                    out.push((theta0.rem_euclid(TAU), *s))
                }
                WeightSpec::Product(fs) => fs.iter().for_each(|f| collect(f, out)),
                _ => {}
            }
        }
        let mut raw = Vec::new();
        collect(self, &mut raw);
        let mut merged: Vec<(f64, f64)> = Vec::new();
        'outer: for (th, s) in raw {
            for m in merged.iter_mut() {
                let d = (th - m.0).rem_euclid(TAU);
                if d.min(TAU - d) < 1e-9 {
                    m.1 += s;
                    continue 'outer;
                }
            }
            merged.push((th, s));
        }
        merged.retain(|&(_, s)| s != 0.0);
        merged
    }

    /// True when the weight depends on |z| only.
    pub fn is_radial(&self) -> bool {
        match self {
            WeightSpec::Constant(_) | WeightSpec::RadialPower(_) => true,
            WeightSpec::BoundaryPoint { s, .. } => *s == 0.0,
            WeightSpec::Product(fs) => fs.iter().all(|f| f.is_radial()),
            WeightSpec::Tabulated(_) => false,
        }
    }

    /// Pointwise power w^e.
    pub fn pow(&self, e: f64) -> Result<WeightSpec> {
        Ok(match self {
            WeightSpec::Constant(c) => WeightSpec::Constant(c.powf(e)),
            WeightSpec::RadialPower(t) => WeightSpec::RadialPower(t * e),
            WeightSpec::BoundaryPoint { theta0, s } => {
                WeightSpec::BoundaryPoint { theta0: *theta0, s: s * e }
            }
            WeightSpec::Product(fs) => {
                WeightSpec::Product(fs.iter().map(|f| f.pow(e)).collect::<Result<_>>()?)
            }
            WeightSpec::Tabulated(t) => WeightSpec::Tabulated(
                t.map(format!("{}^{}", t.label, e), |v| v.powf(e))?,
            ),
        })
    }

    /// Dual weight sigma = w^(-1/(p-1)) for 1 < p < infinity. Fails with
    /// `NotIntegrable` when the dual leaves the admissible range, which is exactly
    /// the situation the characteristic flags as an inadmissible dual.
    pub fn dual(&self, p: f64) -> Result<WeightSpec> {
        if !(p.is_finite() && p > 1.0) {
            return Err(HardyError::InvalidConfig(format!(
                "dual weight needs an exponent in (1, inf), got {p}"
            )));
        }
        let sigma = self.pow(-1.0 / (p - 1.0))?;
        sigma.validate().map_err(|e| match e {
            HardyError::NotIntegrable(m) => {
                HardyError::NotIntegrable(format!("dual weight at p={p}: {m}"))
            }
            other => other,
        })?;
        Ok(sigma)
    }

    /// Rotated weight: w_phi(z) = w(z e^{-i phi}). Tabulated data is resampled at
    /// cell midpoints.
    pub fn rotate(&self, phi: f64) -> WeightSpec {
        match self {
            WeightSpec::Constant(_) | WeightSpec::RadialPower(_) => self.clone(),
            WeightSpec::BoundaryPoint { theta0, s } => {
                WeightSpec::BoundaryPoint { theta0: (theta0 + phi).rem_euclid(TAU), s: *s }
            }
            WeightSpec::Product(fs) => {
                WeightSpec::Product(fs.iter().map(|f| f.rotate(phi)).collect())
            }
            WeightSpec::Tabulated(t) => {
                let grid = t.grid.clone();
                let vals: Vec<f64> =
                    grid.cells().map(|c| t.eval(c.r, c.theta - phi)).collect();
                WeightSpec::Tabulated(
                    TabulatedWeight::new(format!("{}@{phi:.6}", t.label), grid, vals)
                        .expect("rotation preserves positivity"),
                )
            }
        }
    }
}

impl fmt::Display for WeightSpec {
    /// Canonical text form; `parse_weight` inverts it for the analytic variants.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSpec::Constant(c) => write!(f, "const:{c}"),
            WeightSpec::RadialPower(t) => write!(f, "radial:t={t}"),
            WeightSpec::BoundaryPoint { theta0, s } => write!(f, "point:theta={theta0},s={s}"),
            WeightSpec::Product(fs) => {
                for (i, w) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{w}")?;
                }
                Ok(())
            }
            WeightSpec::Tabulated(t) => write!(f, "tab:{}", t.label),
        }
    }
}

/// Parse the weight grammar: factors `const:<v>`, `radial:t=<v>`,
/// `point:theta=<v>,s=<v>`, `tab:<path>`, joined by `*`. Errors carry the byte
/// offset into the input.
pub fn parse_weight(text: &str) -> Result<WeightSpec> {
    let mut factors = Vec::new();
    let mut pos = 0usize;
    for piece in text.split('*') {
        let base = pos;
        pos += piece.len() + 1;
        let lead = piece.len() - piece.trim_start().len();
        let body = piece.trim();
        if body.is_empty() {
            return Err(HardyError::Parse { position: base, message: "empty weight factor".into() });
        }
        factors.push(parse_factor(body, base + lead)?);
    }
    Ok(if factors.len() == 1 { factors.pop().unwrap() } else { WeightSpec::Product(factors) })
}

fn parse_factor(body: &str, off: usize) -> Result<WeightSpec> {
    fn num(text: &str, at: usize, what: &str) -> Result<f64> {
        text.trim().parse().map_err(|_| HardyError::Parse {
            position: at,
            message: format!("unparseable {what} `{text}`"),
        })
    }
    if let Some(v) = body.strip_prefix("const:") {
        Ok(WeightSpec::Constant(num(v, off + 6, "constant")?))
    } else if let Some(v) = body.strip_prefix("radial:") {
        let at = off + 7;
        let t = v.strip_prefix("t=").ok_or(HardyError::Parse {
            position: at,
            message: "radial factor takes `t=<value>`".into(),
        })?;
        Ok(WeightSpec::RadialPower(num(t, at + 2, "radial exponent")?))
    } else if let Some(v) = body.strip_prefix("point:") {
        let at = off + 6;
        let (th, s) = v.split_once(',').ok_or(HardyError::Parse {
            position: at,
            message: "point factor takes `theta=<value>,s=<value>`".into(),
        })?;
        let th_v = th.strip_prefix("theta=").ok_or(HardyError::Parse {
            position: at,
            message: "point factor's first field is `theta=<value>`".into(),
        })?;
        let s_at = at + th.len() + 1;
        let s_v = s.strip_prefix("s=").ok_or(HardyError::Parse {
            position: s_at,
            message: "point factor's second field is `s=<value>`".into(),
        })?;
        Ok(WeightSpec::BoundaryPoint {
            theta0: num(th_v, at + 6, "angle")?,
            s: num(s_v, s_at + 2, "point exponent")?,
        })
    } else if let Some(path) = body.strip_prefix("tab:") {
        Ok(WeightSpec::Tabulated(TabulatedWeight::from_path(path.trim())?))
    } else {
        Err(HardyError::Parse {
            position: off,
            message: format!(
                "unknown weight factor `{body}` (expected const:, radial:, point: or tab:)"
            ),
        })
    }
}

// ---------------------------------------------------------------------------
// quadrature
// ---------------------------------------------------------------------------

const GL4: [(f64, f64); 4] = [
    (-0.8611363115940526, 0.34785484513745385),
    (-0.33998104358485626, 0.6521451548625461),
    (0.33998104358485626, 0.6521451548625461),
    (0.8611363115940526, 0.34785484513745385),
];

fn gl4(a: f64, b: f64, f: &mut impl FnMut(f64) -> f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = 0.0;
    for &(x, w) in &GL4 {
        acc += w * f(c + h * x);
    }
    acc * h
}

/// Extrapolated integral of g(u)(1-u) over (0, delta) from a power-law fit
/// g ~ c u^tau sampled at delta/2 and delta/4. A fitted tau <= -1 means the
/// boundary mass diverges.
fn sliver(g: &mut impl FnMut(f64) -> f64, delta: f64) -> Result<f64> {
    let g1 = g(delta * 0.5);
    let g2 = g(delta * 0.25);
    if g1 == 0.0 && g2 == 0.0 {
        return Ok(0.0);
    }
    if !(g1.is_finite() && g2.is_finite() && g1 > 0.0 && g2 > 0.0) {
        return Err(HardyError::NotIntegrable(format!(
            "weight is not power-like near the boundary (samples {g1}, {g2})"
        )));
    }
    let tau = (g1 / g2).log2();
    if !tau.is_finite() || tau <= -1.0 + 1e-9 {
        return Err(HardyError::NotIntegrable(format!(
            "boundary exponent {tau:.6} <= -1; mass diverges"
        )));
    }
    let c = g1 / (delta * 0.5).powf(tau);
    Ok(c * (delta.powf(tau + 1.0) / (tau + 1.0) - delta.powf(tau + 2.0) / (tau + 2.0)))
}

/// Integral of g(u)(1-u) du over (u_lo, u_hi), geometrically graded toward the
/// boundary u = 0; when the range reaches u = 0 the last sliver is extrapolated.
fn radial_like(g: &mut impl FnMut(f64) -> f64, u_lo: f64, u_hi: f64, levels: u32) -> Result<f64> {
    debug_assert!(u_lo >= 0.0 && u_hi > u_lo);
    let mut f = |u: f64| g(u) * (1.0 - u);
    let mut total = 0.0;
    if u_lo > 0.0 {
        let span = u_hi - u_lo;
        let k_max = (((span / u_lo).log2().ceil()) as i64).clamp(2, 48) as u32;
        let mut hi = u_hi;
        for k in 1..=k_max {
            let lo = if k == k_max { u_lo } else { u_lo + span * 0.5f64.powi(k as i32) };
            total += gl4(lo, hi, &mut f);
            hi = lo;
        }
        return Ok(total);
    }
    let mut hi = u_hi;
    for _ in 0..levels {
        let lo = hi * 0.5;
        total += gl4(lo, hi, &mut f);
        hi = lo;
    }
    total += sliver(g, hi)?;
    Ok(total)
}

/// Panels over [a, b] graded geometrically toward the (possibly exterior) point d,
/// never narrower than floor_w near d and never wider than cap_w.
fn graded_panels(a: f64, b: f64, d: f64, floor_w: f64, cap_w: f64) -> Vec<(f64, f64)> {
    debug_assert!(b > a && floor_w > 0.0 && cap_w > 0.0);
    // descending distances from d covering [lo, hi]
    fn side(lo: f64, hi: f64, floor_w: f64) -> Vec<f64> {
        let mut v = vec![hi];
        let stop = lo.max(floor_w);
        let mut x = hi;
        while x * 0.5 > stop {
            x *= 0.5;
            v.push(x);
        }
        if *v.last().unwrap() > lo + 1e-300 {
            v.push(lo);
        }
        v
    }
    let mut panels = Vec::new();
    let mut push = |x1: f64, x2: f64| {
        if x2 - x1 <= cap_w {
            if x2 > x1 {
                panels.push((x1, x2));
            }
        } else {
            let n = ((x2 - x1) / cap_w).ceil() as usize;
            let step = (x2 - x1) / n as f64;
            for i in 0..n {
                panels.push((x1 + i as f64 * step, x1 + (i + 1) as f64 * step));
            }
        }
    };
    if d <= a {
        let v = side(a - d, b - d, floor_w);
        for i in (1..v.len()).rev() {
            push(d + v[i], d + v[i - 1]);
        }
    } else if d >= b {
        let v = side(d - b, d - a, floor_w);
        for w in v.windows(2) {
            push(d - w[0], d - w[1]);
        }
    } else {
        if d > a {
            let v = side(0.0, d - a, floor_w);
            for w in v.windows(2) {
                push(d - w[0], d - w[1]);
            }
        }
        if b > d {
            let v = side(0.0, b - d, floor_w);
            for i in (1..v.len()).rev() {
                push(d + v[i], d + v[i - 1]);
            }
        }
    }
    panels
}

/// Angular features of the weight mapped into the arc's unrolled coordinate.
struct Segment {
    a: f64,
    b: f64,
    /// position and total exponent of the segment's distinguished angle
    target: Option<(f64, f64)>,
}

fn split_segments(arc: &ArcInterval, feats: &[(f64, f64)]) -> Vec<Segment> {
    let len = arc.len_rad();
    if feats.is_empty() {
        return vec![Segment { a: 0.0, b: len, target: None }];
    }
    let mut pos: Vec<(f64, f64)> = if arc.is_full_circle() {
        feats.iter().map(|&(th, s)| ((th - arc.start()).rem_euclid(TAU), s)).collect()
    } else {
        feats
            .iter()
            .map(|&(th, s)| {
                let d0 = (th - arc.start()).rem_euclid(TAU);
                // fold angles behind the start to a negative offset
                if d0 <= len || d0 - len <= TAU - d0 {
                    (d0, s)
                } else {
                    (d0 - TAU, s)
                }
            })
            .collect()
    };
    pos.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut segs = Vec::new();
    if arc.is_full_circle() {
        // cyclic Voronoi: segment i runs between midpoints around feature i
        let n = pos.len();
        for i in 0..n {
            let prev = if i == 0 { pos[n - 1].0 - TAU } else { pos[i - 1].0 };
            let next = if i + 1 == n { pos[0].0 + TAU } else { pos[i + 1].0 };
            let a = 0.5 * (prev + pos[i].0);
            let b = 0.5 * (pos[i].0 + next);
            if b > a + 1e-15 {
                segs.push(Segment { a, b, target: Some(pos[i]) });
            }
        }
    } else {
        let mut cuts = vec![0.0];
        for w in pos.windows(2) {
            let m = 0.5 * (w[0].0 + w[1].0);
            if m > 0.0 && m < len {
                cuts.push(m);
            }
        }
        cuts.push(len);
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            if w[1] <= w[0] + 1e-15 {
                continue;
            }
            let mid = 0.5 * (w[0] + w[1]);
            let tgt = pos
                .iter()
                .min_by(|x, y| (x.0 - mid).abs().total_cmp(&(y.0 - mid).abs()))
                .copied();
            segs.push(Segment { a: w[0], b: w[1], target: tgt });
        }
    }
    segs
}

/// Mass of the weight over the sector {z : arg z in I, r_lo < |z| < r_hi} with
/// respect to dA = dx dy / pi.
pub fn sector_mass(
    w: &WeightSpec,
    arc: &ArcInterval,
    r_lo: f64,
    r_hi: f64,
    _grid: &PolarGrid,
) -> Result<f64> {
    if !(0.0..1.0).contains(&r_lo) || !(r_lo < r_hi && r_hi <= 1.0) {
        return Err(HardyError::InvalidGeometry(format!(
            "sector radii ({r_lo}, {r_hi}) outside 0 <= r_lo < r_hi <= 1"
        )));
    }
    let u_lo = 1.0 - r_hi;
    let u_hi = 1.0 - r_lo;
    let start = arc.start();
    let len = arc.len_rad();
    let feats = w.angular_exponents();
    let negs: Vec<f64> = {
        // negative-exponent positions (with periodic images) for grading decisions
        let mut v = Vec::new();
        for &(th, s) in &feats {
            if s < 0.0 {
                let d0 = (th - start).rem_euclid(TAU);
                v.extend([d0 - TAU, d0, d0 + TAU]);
            }
        }
        v
    };
    let base_w = PI / 16.0;
    let mut total = 0.0;

    // radial grading depth for a panel at angular distance dmin from the nearest
    // negative-exponent angle: slabs must resolve the u ~ dmin transition
    let levels_for = |dmin: f64| -> u32 {
        if negs.is_empty() {
            16
        } else {
            let need = (8.0 * u_hi / dmin.max(1e-300)).log2().ceil();
            (need as i64).clamp(16, 44) as u32
        }
    };
    let tensor_panel = |x1: f64, x2: f64, total: &mut f64| -> Result<()> {
        let dmin = negs
            .iter()
            .map(|&d| if d < x1 { x1 - d } else if d > x2 { d - x2 } else { 0.0 })
            .fold(f64::INFINITY, f64::min);
        let levels = levels_for(dmin);
        let c = 0.5 * (x1 + x2);
        let h = 0.5 * (x2 - x1);
        for &(x, wq) in &GL4 {
            let theta = start + c + h * x;
            let mut g = |u: f64| w.eval(1.0 - u, theta);
            *total += wq * h * radial_like(&mut g, u_lo, u_hi, levels)?;
        }
        Ok(())
    };

    for seg in split_segments(arc, &feats) {
        match seg.target {
            Some((d, s)) if s < 0.0 => {
                // corner window around the singular angle, handled with the
                // angular-inner order; far pieces use the plain tensor order
                let v0 = (len / 8.0).min(0.1);
                let cl = (d - v0).max(seg.a);
                let cr = (d + v0).min(seg.b);
                if cr > cl + 1e-15 {
                    // either flank can be empty when the singular angle sits at
                    // (or within v0 of) a segment edge
                    if cl > seg.a {
                        for (x1, x2) in graded_panels(seg.a, cl, d, v0, base_w) {
                            tensor_panel(x1, x2, &mut total)?;
                        }
                    }
                    total += corner_mass(w, start, d, cl, cr, u_lo, u_hi)?;
                    if seg.b > cr {
                        for (x1, x2) in graded_panels(cr, seg.b, d, v0, base_w) {
                            tensor_panel(x1, x2, &mut total)?;
                        }
                    }
                } else {
                    for (x1, x2) in graded_panels(seg.a, seg.b, d, v0, base_w) {
                        tensor_panel(x1, x2, &mut total)?;
                    }
                }
            }
            Some((d, _)) => {
                // cusp or zero: grading suffices, no order swap needed
                let floor = (seg.b - seg.a) * 2f64.powi(-20);
                for (x1, x2) in graded_panels(seg.a, seg.b, d, floor, base_w) {
                    tensor_panel(x1, x2, &mut total)?;
                }
            }
            None => {
                let n = ((seg.b - seg.a) / base_w).ceil().max(1.0) as usize;
                let step = (seg.b - seg.a) / n as f64;
                for i in 0..n {
                    let x1 = seg.a + i as f64 * step;
                    tensor_panel(x1, x1 + step, &mut total)?;
                }
            }
        }
    }
    Ok(total / PI)
}

/// Swapped-order mass over the corner window [cl, cr] x (u_lo, u_hi) around the
/// singular angle at d: at each radius the angular integral is evaluated first
/// (it is finite for any admissible exponent), and the resulting radial profile
/// g(u) ~ u^(T+S+1) is integrated with grading plus sliver extrapolation — this is
/// what keeps exponents with T+S <= -1 from falsely reporting divergence.
fn corner_mass(
    w: &WeightSpec,
    start: f64,
    d: f64,
    cl: f64,
    cr: f64,
    u_lo: f64,
    u_hi: f64,
) -> Result<f64> {
    let width = cr - cl;
    let mut g = |u: f64| {
        let floor = u.max(width * 2f64.powi(-48)).max(1e-300);
        let mut acc = 0.0;
        for (x1, x2) in graded_panels(cl, cr, d, floor, f64::INFINITY) {
            acc += gl4(x1, x2, &mut |x| w.eval(1.0 - u, start + x));
        }
        acc
    };
    radial_like(&mut g, u_lo, u_hi, 30)
}

/// Mass of the Carleson box over the arc: radial range (1-|I|, 1) clamped at 0.
pub fn box_mass(w: &WeightSpec, arc: &ArcInterval, grid: &PolarGrid) -> Result<f64> {
    let r_lo = (1.0 - arc.normalized_length()).max(0.0);
    sector_mass(w, arc, r_lo, 1.0, grid)
}

/// Mass of the top half B_I: radial range (1-|I|/2, 1).
pub fn top_half_mass(w: &WeightSpec, arc: &ArcInterval, grid: &PolarGrid) -> Result<f64> {
    sector_mass(w, arc, 1.0 - 0.5 * arc.normalized_length(), 1.0, grid)
}

/// Total mass over the disk; doubles as the integrability gate.
pub fn total_mass(w: &WeightSpec, grid: &PolarGrid) -> Result<f64> {
    let full = ArcInterval::new(0.0, TAU).expect("full circle");
    sector_mass(w, &full, 0.0, 1.0, grid)
}

// ---------------------------------------------------------------------------
// doubling diagnostics
// ---------------------------------------------------------------------------

/// Sampled estimate of the ball-doubling constant sup w(B(z,2r) cap D)/w(B(z,r) cap D).
#[derive(Debug, Clone, Serialize)]
pub struct DoublingReport {
    pub constant: f64,
    /// the same supremum over the first half of the sample budget, as a stability hint
    pub half_budget_constant: f64,
    pub witness_center: (f64, f64),
    pub witness_radius: f64,
    pub samples: usize,
}

fn ball_mass(w: &WeightSpec, rz: f64, thz: f64, rho: f64) -> f64 {
    let r_min = (rz - rho).max(0.0);
    let r_max = (rz + rho).min(1.0 - 1e-12);
    if r_max <= r_min {
        return 0.0;
    }
    let half = if rho >= rz { PI } else { (rho / rz).asin() };
    let (nr, na) = (32, 64);
    let dr = (r_max - r_min) / nr as f64;
    let dth = 2.0 * half / na as f64;
    let mut acc = 0.0;
    for i in 0..nr {
        let r = r_min + (i as f64 + 0.5) * dr;
        for j in 0..na {
            let th = thz - half + (j as f64 + 0.5) * dth;
            // |z - zeta|^2 in polar coordinates
            let d2 = rz * rz + r * r - 2.0 * rz * r * (th - thz).cos();
            if d2 <= rho * rho {
                acc += w.eval(r, th) * r;
            }
        }
    }
    acc * dr * dth / PI
}

/// Boundary-biased random scan for the doubling constant. Deterministic in the
/// seed; the half-budget value indicates whether the supremum has stabilized.
pub fn doubling_constant(w: &WeightSpec, seed: u64, budget: usize) -> Result<DoublingReport> {
    w.validate()?;
    let budget = budget.max(8);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    let mut half_best = 0.0f64;
    let mut witness = ((0.0, 0.0), 0.1);
    for i in 0..budget {
        let rz = if rng.random::<f64>() < 0.8 {
            1.0 - 10f64.powf(-4.0 + 3.95 * rng.random::<f64>() * 0.9)
        } else {
            rng.random::<f64>().sqrt()
        };
        let thz = rng.random::<f64>() * TAU;
        let rho = 10f64.powf(-3.0 + 2.7 * rng.random::<f64>());
        let m1 = ball_mass(w, rz, thz, rho);
        let m2 = ball_mass(w, rz, thz, 2.0 * rho);
        if !(m1.is_finite() && m2.is_finite() && m1 > 0.0) {
            continue;
        }
        let ratio = m2 / m1;
        if ratio > best {
            best = ratio;
            witness = ((rz, thz), rho);
        }
        if i < budget / 2 {
            half_best = half_best.max(ratio);
        }
    }
    Ok(DoublingReport {
        constant: best,
        half_budget_constant: half_best,
        witness_center: witness.0,
        witness_radius: witness.1,
        samples: budget,
    })
}

/// Top-half concentration scan: delta = sup over boxes of w(B_I)/w(Q_I).
///
/// Generation 0 is excluded (there B_I = Q_I and the ratio is trivially 1).
/// For the Lebesgue weight the generation-1 ratio is exactly 3/4, and for a
/// radial power (1-|z|)^t the small-box limit is 2^-(t+1).
#[derive(Debug, Clone, Serialize)]
pub struct ReverseDoublingReport {
    pub delta: f64,
    pub witness: ArcInterval,
    /// maximum ratio per generation, index 0 holding generation 1
    pub per_generation: Vec<f64>,
}

pub fn reverse_doubling(
    w: &WeightSpec,
    grid: &PolarGrid,
    j_max: u32,
    rotations: u32,
) -> Result<ReverseDoublingReport> {
    use crate::dyadic::{DyadicInterval, GridShift};
    w.validate()?;
    if j_max == 0 {
        return Err(HardyError::InvalidConfig("top-half scan needs j_max >= 1".into()));
    }
    let radial = w.is_radial();
    let rotations = if radial { 1 } else { rotations.max(1) };
    let mut delta = 0.0f64;
    let mut witness = ArcInterval::new(0.0, TAU).unwrap();
    let mut per_generation = Vec::with_capacity(j_max as usize);
    for j in 1..=j_max {
        let mut gen_best = 0.0f64;
        let shifts: &[GridShift] =
            if radial { &[GridShift::Zero] } else { &GridShift::BOTH };
        for &shift in shifts {
            let indices: Box<dyn Iterator<Item = u64>> =
                if radial { Box::new(std::iter::once(0)) } else { Box::new(0..(1u64 << j)) };
            for k in indices {
                let arc0 = DyadicInterval::new(shift, j, k)?.materialize();
                for m in 0..rotations {
                    let arc = arc0.rotate(m as f64 * GOLDEN_ANGLE);
                    let top = top_half_mass(w, &arc, grid)?;
                    let full = box_mass(w, &arc, grid)?;
                    let ratio = top / full;
                    if ratio > gen_best {
                        gen_best = ratio;
                    }
                    if ratio > delta {
                        delta = ratio;
                        witness = arc;
                    }
                }
            }
        }
        per_generation.push(gen_best);
    }
    Ok(ReverseDoublingReport { delta, witness, per_generation })
}
