//! Acceptance suite: one test per release criterion, each printing a single
//! `ACCEPTANCE <n> PASS/FAIL` line (visible under `--nocapture`) and then
//! asserting both the property and its runtime budget.
//!
//! Run with: cargo test -p hardyk --test acceptance -- --nocapture

use std::f64::consts::{PI, TAU};
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hardyk::characteristic::{box_ratio, characteristic, CharFlag};
use hardyk::domination::domination_check;
use hardyk::dyadic::cover;
use hardyk::embedding::{carleson_embedding_ratio, holder_chain_check};
use hardyk::geometry::{box_area, in_box, ArcInterval, BoxPart, DiskPoint};
use hardyk::grid::{GridFunction, PolarGrid};
use hardyk::necessity::{choose_d, necessity_geometry};
use hardyk::norms::norm_estimate_l2_with_start;
use hardyk::operators::apply_k;
use hardyk::verify::SweepSpec;
use hardyk::weights::{parse_weight, WeightSpec};
use hardyk::{run_theorem_correlation, GridShift};

/// Print the one-line verdict, then enforce it together with the runtime
/// budget for the criterion.
fn conclude(n: u32, name: &str, budget_s: f64, started: Instant, pass: bool, details: &str) {
    let elapsed = started.elapsed().as_secs_f64();
    let verdict = if pass && elapsed < budget_s {
        "PASS"
    } else {
        "FAIL"
    };
    println!("ACCEPTANCE {n} {verdict}: {name} — {details} [{elapsed:.2}s / budget {budget_s:.0}s]");
    assert!(pass, "criterion {n} ({name}) failed: {details}");
    assert!(
        elapsed < budget_s,
        "criterion {n} ({name}) exceeded its {budget_s:.0}s budget: {elapsed:.2}s"
    );
}

fn nonneg_random(grid: &PolarGrid, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len())
        .map(|_| Complex64::new(rng.random::<f64>(), 0.0))
        .collect();
    GridFunction::from_values(grid, values).unwrap()
}

/// Midpoint quadrature of the box area in polar coordinates with `n` panels
/// per axis, deciding membership of each panel centre through `in_box` only;
/// it never references the closed-form area expression.
fn box_quadrature(arc: &ArcInterval, n: usize) -> f64 {
    let nl = arc.normalized_length();
    let r_lo = (1.0 - nl).max(0.0);
    let dr = (1.0 - r_lo) / n as f64;
    let dth = arc.len_rad() / n as f64;
    let mut total = 0.0;
    for i in 0..n {
        let r = r_lo + (i as f64 + 0.5) * dr;
        let mut ring = 0.0;
        for k in 0..n {
            let theta = (arc.start() + (k as f64 + 0.5) * dth).rem_euclid(TAU);
            let z = DiskPoint::from_polar(r, theta).unwrap();
            if in_box(&z, arc, BoxPart::Full) {
                ring += r * dr * dth / PI;
            }
        }
        total += ring;
    }
    total
}

#[test]
fn criterion_01_area_formula() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst_rel = 0.0f64;
    for i in 0..1000 {
        let start = rng.random::<f64>() * TAU;
        // log-uniform lengths across ten dyadic scales, plus edge cases
        let nl = match i {
            0 => 2.0,
            1 => 1.0,
            2 => 1.0 - 1e-9,
            3 => 1.0 + 1e-9,
            _ => 2.0 * 0.5f64.powf(rng.random::<f64>() * 10.0),
        };
        let arc = ArcInterval::new(start, nl * PI).unwrap();
        let exact = box_area(nl);
        let quad = box_quadrature(&arc, 256);
        worst_rel = worst_rel.max((quad - exact).abs() / exact);
    }

    // branch continuity at |I| = 1: both closed-form branches agree exactly
    let left: f64 = 1.0 * 1.0 - (1.0 * 1.0 * 1.0) / 2.0;
    let right: f64 = 1.0 / 2.0;
    let continuous = left == right && box_area(1.0) == right;

    let disk = box_quadrature(&ArcInterval::new(0.0, TAU).unwrap(), 256);
    let disk_err = (disk - 1.0).abs();

    let pass = worst_rel < 1e-3 && continuous && disk_err < 1e-12;
    conclude(
        1,
        "area formula",
        10.0,
        t0,
        pass,
        &format!(
            "1000 intervals, worst quadrature error {worst_rel:.2e} (tol 1e-3), \
             branch continuity exact: {continuous}, whole-disk area error {disk_err:.2e}"
        ),
    );
}

#[test]
fn criterion_02_mei_covering() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let n = 100_000;
    let mut failures = 0usize;
    let mut worst_blowup = 0.0f64;
    for i in 0..n {
        let start = rng.random::<f64>() * TAU;
        // half log-uniform down to generation ~13, half uniform in (0, 2pi]
        let len = if i % 2 == 0 {
            TAU * 0.5f64.powf(rng.random::<f64>() * 13.0)
        } else {
            TAU * (1.0 - rng.random::<f64>()).max(1e-12)
        };
        let arc = ArcInterval::new(start, len).unwrap();
        let j = cover(&arc).materialize();
        let contains = j.contains_arc(&arc);
        let blowup = j.len_rad() / arc.len_rad();
        if !contains || blowup > 6.0 * (1.0 + 1e-12) {
            failures += 1;
        }
        worst_blowup = worst_blowup.max(blowup);
    }
    let pass = failures == 0;
    conclude(
        2,
        "dyadic covering",
        5.0,
        t0,
        pass,
        &format!("{n} intervals, {failures} failures, worst |J|/|I| = {worst_blowup:.4} (bound 6)"),
    );
}

#[test]
fn criterion_03_bergman_projection_oracle() {
    let t0 = Instant::now();
    let w = WeightSpec::Constant(1.0);

    // movement toward the continuum norm 1 across a depth+2 refinement
    // pair ending at the ~4000-cell grid; the grid is self-similar toward
    // the boundary, so once the estimate has converged to within ~1e-4 of 1
    // (already at this cell count) further depth only extends the shell
    // cascade inward and the estimate plateaus, with |1 - estimate| no
    // longer monotone at the 1e-5 scale
    let coarse_grid = PolarGrid::new(5).unwrap();
    let coarse_start = GridFunction::constant(&coarse_grid, 1.0);
    let est_coarse = norm_estimate_l2_with_start(2.0, &w, &coarse_grid, 1e-9, 300, &coarse_start)
        .unwrap()
        .0
        .estimate;

    // ~4000 cells: the window check, the endpoint of the movement check and
    // the idempotence check all live here
    let grid = PolarGrid::new(7).unwrap();
    let start = GridFunction::constant(&grid, 1.0);
    let est = norm_estimate_l2_with_start(2.0, &w, &grid, 1e-9, 300, &start)
        .unwrap()
        .0
        .estimate;
    let moved = (1.0 - est).abs() < (1.0 - est_coarse).abs();

    // idempotence of the projection on 1, lambda, lambda^2
    let areas: Vec<f64> = grid.cells().map(|c| c.area).collect();
    let l2 = |f: &GridFunction| -> f64 {
        f.values()
            .iter()
            .zip(&areas)
            .map(|(v, a)| v.norm_sqr() * a)
            .sum::<f64>()
            .sqrt()
    };
    let mut worst_idem = 0.0f64;
    for power in 0..3u32 {
        let f = GridFunction::from_fn(&grid, |c| {
            Complex64::from_polar(c.r, c.theta).powu(power)
        });
        let kf = apply_k(2.0, &f, &grid).unwrap();
        let kkf = apply_k(2.0, &kf, &grid).unwrap();
        let diff = GridFunction::from_values(
            &grid,
            kkf.values()
                .iter()
                .zip(kf.values())
                .map(|(a, b)| a - b)
                .collect(),
        )
        .unwrap();
        worst_idem = worst_idem.max(l2(&diff) / l2(&kf));
    }

    let in_range = (0.90..=1.05).contains(&est);
    let pass = in_range && moved && worst_idem <= 0.05;
    conclude(
        3,
        "Bergman projection oracle",
        120.0,
        t0,
        pass,
        &format!(
            "norm {est:.6} on {} cells (range [0.90, 1.05]), vs {est_coarse:.6} on {} cells \
             (two depth steps coarser; refinement moves toward 1: {moved}), \
             worst idempotence defect {worst_idem:.4} (tol 0.05)",
            grid.len(),
            coarse_grid.len()
        ),
    );
}

#[test]
fn criterion_04_characteristic_closed_forms() {
    let t0 = Instant::now();
    let w = WeightSpec::Constant(1.0);
    let grid = PolarGrid::new(6).unwrap();

    let mut worst_dev = 0.0f64;
    let mut flags_ok = true;
    for alpha in [1.0, 2.0] {
        let r = characteristic(&w, 2.0, alpha, 10, 4, &grid).unwrap();
        worst_dev = worst_dev.max((r.value - 1.0).abs());
        flags_ok &= r.flag == CharFlag::Finite;
    }

    // alpha = 3: per-generation maxima must grow ~4x per generation
    let r3 = characteristic(&w, 2.0, 3.0, 10, 4, &grid).unwrap();
    let divergent = r3.flag == CharFlag::Divergent;
    let mut growth_ok = true;
    let mut growths = Vec::new();
    for j in 5..=10usize {
        let g = r3.per_generation[j] / r3.per_generation[j - 1];
        growths.push(g);
        growth_ok &= (3.2..=4.8).contains(&g);
    }

    let pass = worst_dev <= 1e-10 && flags_ok && divergent && growth_ok;
    conclude(
        4,
        "characteristic closed forms",
        30.0,
        t0,
        pass,
        &format!(
            "Lebesgue value deviation {worst_dev:.2e} (tol 1e-10) for alpha in {{1,2}}; \
             alpha=3 divergent: {divergent}, generation growths {:?} (range [3.2, 4.8])",
            growths.iter().map(|g| (g * 100.0).round() / 100.0).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_05_kernel_domination() {
    let t0 = Instant::now();
    let mut details = String::new();
    let mut pass = true;
    for alpha in [1.0, 2.0, 3.0] {
        let rep = domination_check(alpha, 1_000_000, 12).unwrap();
        let ok = rep.included > 0
            && rep.sup_ratio.is_finite()
            && rep.doubled_sup_ratio.is_finite()
            && rep.stable;
        pass &= ok;
        details.push_str(&format!(
            "alpha={alpha}: sup {:.3} -> {:.3} doubled ({} pairs included); ",
            rep.sup_ratio, rep.doubled_sup_ratio, rep.included
        ));
    }
    conclude(
        5,
        "kernel domination",
        120.0,
        t0,
        pass,
        &format!("{details}all ratios finite, sup stable under budget doubling"),
    );
}

#[test]
fn criterion_06_necessity_geometry() {
    let t0 = Instant::now();
    let mut pass = true;
    let mut details = String::new();
    for alpha in [1.0, 2.0] {
        let d = choose_d(alpha);
        for theta in [1e-2, 1e-3] {
            let rep = necessity_geometry(alpha, theta, d, 100_000).unwrap();
            let ok = rep.all_slacks_nonnegative() && rep.bound_holds();
            pass &= ok;
            details.push_str(&format!(
                "alpha={alpha}, theta={theta:.0e}, d={d}: slacks ok {}, bound margin {:.3}; ",
                rep.all_slacks_nonnegative(),
                rep.bound_margin.min
            ));
        }
    }
    conclude(
        6,
        "necessity geometry",
        60.0,
        t0,
        pass,
        &format!("{details}all four slacks nonnegative, lower bound at every sample"),
    );
}

#[test]
fn criterion_07_holder_chain() {
    let t0 = Instant::now();
    // dual-admissible at p in {1.5, 2, 3}: needs t/(p-1) < 1, so t < 0.5
    let w = parse_weight("radial:t=0.3").unwrap();
    let grid = PolarGrid::new(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut violations = 0usize;
    let mut checks = 0usize;
    for i in 0..100 {
        let f = nonneg_random(&grid, 10_000 + i);
        let g = nonneg_random(&grid, 20_000 + i);
        let shift = if rng.random::<bool>() {
            GridShift::Zero
        } else {
            GridShift::Third
        };
        for p in [1.5, 2.0, 3.0] {
            let rep = holder_chain_check(&w, p, 1.0, shift, &f, &g, &grid, 6).unwrap();
            violations += rep.violations;
            checks += 1;
        }
    }
    let pass = violations == 0 && checks == 300;
    conclude(
        7,
        "Hoelder chain",
        60.0,
        t0,
        pass,
        &format!("100 random (f, g) pairs x p in {{1.5, 2, 3}}: {violations} violations"),
    );
}

#[test]
fn criterion_08_carleson_embedding() {
    let t0 = Instant::now();
    let grid = PolarGrid::new(5).unwrap();
    let g = nonneg_random(&grid, 808);
    let mut pass = true;
    let mut details = String::new();
    for spec in ["const:1", "radial:t=0.5", "radial:t=-0.5"] {
        let w = parse_weight(spec).unwrap();
        let mut ratios = Vec::new();
        for j_max in [6u32, 8, 10] {
            ratios.push(
                carleson_embedding_ratio(&w, GridShift::Zero, 2.0, &g, &grid, j_max).unwrap(),
            );
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0f64, f64::max);
        let spread = hi / lo;
        pass &= spread < 1.10 && lo.is_finite() && lo > 0.0;
        details.push_str(&format!("{spec}: spread {spread:.4}; "));
    }
    conclude(
        8,
        "Carleson embedding",
        60.0,
        t0,
        pass,
        &format!("{details}ratio varies < 10% across j_max in {{6, 8, 10}}"),
    );
}

#[test]
fn criterion_09_correlation_sweep() {
    let t0 = Instant::now();
    let spec = SweepSpec::default();
    let first = run_theorem_correlation(&spec).unwrap();
    let second = run_theorem_correlation(&spec).unwrap();
    let deterministic = first.to_csv() == second.to_csv();
    let admissible = first.rows.iter().filter(|r| r.admissible).count();
    let pass = first.all_agree && deterministic && admissible > 0;
    conclude(
        9,
        "correlation sweep",
        900.0,
        t0,
        pass,
        &format!(
            "{} configurations ({admissible} admissible) all agree: {}, \
             byte-identical CSV on rerun: {deterministic}",
            first.rows.len(),
            first.all_agree
        ),
    );
}

/// Structural equality on the analytic weight families, exact in every float.
fn weights_identical(a: &WeightSpec, b: &WeightSpec) -> bool {
    match (a, b) {
        (WeightSpec::Constant(x), WeightSpec::Constant(y)) => x == y,
        (WeightSpec::RadialPower(x), WeightSpec::RadialPower(y)) => x == y,
        (
            WeightSpec::BoundaryPoint { theta0: t1, s: s1 },
            WeightSpec::BoundaryPoint { theta0: t2, s: s2 },
        ) => t1 == t2 && s1 == s2,
        (WeightSpec::Product(xs), WeightSpec::Product(ys)) => {
            xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| weights_identical(x, y))
        }
        _ => false,
    }
}

#[test]
fn criterion_10_weight_algebra() {
    let t0 = Instant::now();

    // involution sigma = dual_p(w), w = dual_{p'}(sigma), exact on the
    // closed-form families; p' = p/(p-1) is exact in floating point here
    // every exponent stays dual-admissible at p in {1.5, 2, 3}: radial
    // needs t/(p - 1) < 1, i.e. |t| < 0.5 here
    let families = [
        WeightSpec::Constant(1.0),
        WeightSpec::Constant(4.0),
        WeightSpec::RadialPower(-0.4),
        WeightSpec::BoundaryPoint { theta0: 1.25, s: -0.8 },
        parse_weight("const:4*radial:t=0.25*point:theta=0.3,s=-0.6").unwrap(),
    ];
    let mut involution_ok = true;
    for w in &families {
        for p in [1.5, 2.0, 3.0] {
            let q = p / (p - 1.0);
            let back = w.dual(p).unwrap().dual(q).unwrap();
            involution_ok &= weights_identical(w, &back);
        }
    }

    // box_ratio invariance under w -> c*w
    let grid = PolarGrid::new(5).unwrap();
    let base = parse_weight("radial:t=0.3").unwrap();
    let arcs: Vec<ArcInterval> = [0.05, 0.3, 1.0, 1.7, 2.0]
        .iter()
        .map(|nl| ArcInterval::new(0.4, nl * PI).unwrap())
        .collect();
    let mut worst_rel = 0.0f64;
    for p in [1.5, 2.0, 3.0] {
        let sigma = base.dual(p).unwrap();
        for c in [1e-3, 1.0, 1e3] {
            let scaled = WeightSpec::Product(vec![WeightSpec::Constant(c), base.clone()]);
            let scaled_sigma = scaled.dual(p).unwrap();
            for arc in &arcs {
                let r0 = box_ratio(&base, &sigma, p, 1.0, arc, &grid).unwrap();
                let r1 = box_ratio(&scaled, &scaled_sigma, p, 1.0, arc, &grid).unwrap();
                worst_rel = worst_rel.max((r1 - r0).abs() / r0);
            }
        }
    }

    let pass = involution_ok && worst_rel <= 1e-12;
    conclude(
        10,
        "weight algebra",
        5.0,
        t0,
        pass,
        &format!(
            "dual involution exact on {} families x p in {{1.5, 2, 3}}: {involution_ok}; \
             box_ratio scale deviation {worst_rel:.2e} (tol 1e-12)",
            families.len()
        ),
    );
}
