//! Command-line driver: every verifier and experiment behind one binary,
//! with reproducible configuration.
//!
//! Resolution order for every parameter: explicit flag, then `--config`
//! file, then the built-in default.  `--dump-config` prints the fully
//! resolved configuration as TOML (and runs nothing), so that
//! `hardyk CMD --dump-config > f.toml && hardyk CMD --config f.toml`
//! reproduces the plain `hardyk CMD` run exactly.
//!
//! Exit codes: 0 — run completed (divergence and inadmissibility are
//! results, not errors); 1 — a verification check failed or an iteration
//! did not certify; 2 — configuration error.

use clap::{Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::path::PathBuf;

use crate::characteristic::{characteristic, guo_wang};
use crate::domination::domination_check;
use crate::dyadic::GridShift;
use crate::embedding::carleson_embedding_ratio;
use crate::error::{HardyError, Result};
use crate::grid::{GridFunction, PolarGrid};
use crate::necessity::{choose_d, necessity_geometry};
use crate::norms::{
    norm_estimate_l2, norm_heuristic_lp, norm_lower_bound, OperatorNormReport,
};
use crate::operators::{apply_m, weight_values, weighted_lp_norm};
use crate::report::{
    json_envelope, resolve_out_path, write_text, CsvTable, RunHeader,
};
use crate::verify::{
    run_lemma_suite, run_theorem_correlation, LemmaConfig, SweepSpec, EMBEDDING_SPREAD,
};
use crate::weights::{doubling_constant, parse_weight, reverse_doubling};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "hardyk",
    version,
    about = "Weighted-inequality diagnostics for Hardy-kernel integral operators on the unit disk"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// RNG seed recorded in every output.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism). Results are
    /// identical regardless.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Report body format on stdout and in --out files.
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    /// Also write the report body to this file (relative paths resolve
    /// against $HARDYK_OUT_DIR when set).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML file supplying defaults for the subcommand's parameters.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the fully resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    dump_config: bool,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Scan the weight characteristic over shifted, rotated dyadic arcs.
    Characteristic {
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long = "jmax")]
        j_max: Option<u32>,
        #[arg(long)]
        rotations: Option<usize>,
    },
    /// Scan the two Bergman-space constants at p = 2 (orders 1 and 3/2).
    GuoWang {
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long = "jmax")]
        j_max: Option<u32>,
        #[arg(long)]
        rotations: Option<usize>,
    },
    /// Estimate the weighted operator norm (power iteration at p = 2).
    Norm {
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long = "max-iter")]
        max_iter: Option<usize>,
        /// Also compute the certified box-indicator lower bound.
        #[arg(long)]
        lower: bool,
        #[arg(long = "family-depth")]
        family_depth: Option<u32>,
    },
    /// Empirical sup of |kernel| over the two-grid dyadic kernel.
    Dominate {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long = "jmax")]
        j_max: Option<u32>,
    },
    /// Verify the separated-arc geometry slacks and the lower kernel bound.
    Necessity {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        /// Arc separation count; chosen automatically from alpha if absent.
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Carleson embedding ratios across truncation depths.
    Embedding {
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long = "jmax")]
        j_max: Option<u32>,
    },
    /// Weighted dyadic maximal operator against its p-norm bound.
    Maximal {
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long = "jmax")]
        j_max: Option<u32>,
    },
    /// Doubling and reverse-doubling diagnostics of a weight.
    Doubling {
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long = "jmax")]
        j_max: Option<u32>,
        #[arg(long)]
        rotations: Option<u32>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Run every lemma check against one configuration.
    Lemmas {
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        depth: Option<u32>,
        #[arg(long = "jmax")]
        j_max: Option<u32>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long = "necessity-samples")]
        necessity_samples: Option<usize>,
        #[arg(long)]
        rotations: Option<u32>,
    },
    /// Correlate characteristic finiteness with norm stability over a sweep.
    Sweep {
        /// Write a log-log scatter (characteristic vs norm) to this SVG file.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

/// Entry point; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // A second initialisation (tests, repeated calls) keeps the first
        // pool; determinism does not depend on the pool size.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match dispatch(&cli) {
        Ok((code, body)) => {
            print!("{body}");
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                HardyError::NoConvergence { .. } => 1,
                _ => 2,
            }
        }
    }
}

fn load_config<T: DeserializeOwned + Default>(path: Option<&PathBuf>) -> Result<T> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            toml::from_str(&text).map_err(|e| HardyError::Parse {
                position: e.span().map_or(0, |s| s.start),
                message: e.message().to_string(),
            })
        }
        None => Ok(T::default()),
    }
}

fn ov<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

struct Emit<'a> {
    format: OutFormat,
    out: &'a Option<PathBuf>,
}

impl Emit<'_> {
    /// Assemble stdout (header first, then the body) and write `--out`.
    fn emit<C: Serialize, R: Serialize>(
        &self,
        header: &RunHeader<C>,
        summary: &str,
        report: &R,
        csv: impl FnOnce() -> String,
        default_name: &str,
    ) -> Result<String> {
        let body = match self.format {
            OutFormat::Json => json_envelope(header, report),
            OutFormat::Csv => csv(),
        };
        if self.out.is_some() {
            let path = resolve_out_path(self.out.as_deref(), default_name);
            write_text(&path, &body)?;
        }
        let mut text = header.render_text();
        text.push_str(&format!("# result: {summary}\n"));
        text.push_str(&body);
        if !body.ends_with('\n') {
            text.push('\n');
        }
        Ok(text)
    }
}

/// If `--dump-config` was given, render the resolved config instead of
/// running.
fn dump<C: Serialize>(cfg: &C) -> Result<(i32, String)> {
    Ok((0, toml::to_string_pretty(cfg).expect("config serializes")))
}

fn dispatch(cli: &Cli) -> Result<(i32, String)> {
    let emit = Emit {
        format: cli.format.unwrap_or(OutFormat::Json),
        out: &cli.out,
    };
    match &cli.cmd {
        Cmd::Characteristic {
            weight,
            p,
            alpha,
            depth,
            j_max,
            rotations,
        } => {
            let mut cfg: CharacteristicConfig = load_config(cli.config.as_ref())?;
            ov(&mut cfg.weight, weight.clone());
            ov(&mut cfg.p, *p);
            ov(&mut cfg.alpha, *alpha);
            ov(&mut cfg.depth, *depth);
            ov(&mut cfg.j_max, *j_max);
            ov(&mut cfg.rotations, *rotations);
            ov(&mut cfg.seed, cli.seed);
            if cli.dump_config {
                return dump(&cfg);
            }
            let w = parse_weight(&cfg.weight)?;
            let grid = PolarGrid::new(cfg.depth)?;
            let rep = characteristic(&w, cfg.p, cfg.alpha, cfg.j_max, cfg.rotations, &grid)?;
            let header = RunHeader::new(cfg.seed, cfg.clone());
            let body = emit.emit(
                &header,
                &format!("value={:.12e} flag={:?}", rep.value, rep.flag),
                &rep,
                || rep.per_generation_csv(),
                "characteristic.csv",
            )?;
            Ok((0, body))
        }

        Cmd::GuoWang {
            weight,
            depth,
            j_max,
            rotations,
        } => {
            let mut cfg: GuoWangConfig = load_config(cli.config.as_ref())?;
            ov(&mut cfg.weight, weight.clone());
            ov(&mut cfg.depth, *depth);
            ov(&mut cfg.j_max, *j_max);
            ov(&mut cfg.rotations, *rotations);
            ov(&mut cfg.seed, cli.seed);
            if cli.dump_config {
                return dump(&cfg);
            }
            let w = parse_weight(&cfg.weight)?;
            let grid = PolarGrid::new(cfg.depth)?;
            let rep = guo_wang(&w, cfg.j_max, cfg.rotations, &grid)?;
            let header = RunHeader::new(cfg.seed, cfg.clone());
            let body = emit.emit(
                &header,
                &format!(
                    "conjectured={:.12e} ({:?}) sufficient={:.12e} ({:?})",
                    rep.conjectured.value,
                    rep.conjectured.flag,
                    rep.sufficient.value,
                    rep.sufficient.flag
                ),
                &rep,
                || {
                    let mut t = CsvTable::new(["constant", "value", "flag"]);
                    t.push_row([
                        "conjectured".to_string(),
                        format!("{:.12e}", rep.conjectured.value),
                        format!("{:?}", rep.conjectured.flag),
                    ]);
                    t.push_row([
                        "sufficient".to_string(),
                        format!("{:.12e}", rep.sufficient.value),
                        format!("{:?}", rep.sufficient.flag),
                    ]);
                    t.render()
                },
                "guo_wang.csv",
            )?;
            Ok((0, body))
        }

        Cmd::Norm {
            weight,
            p,
            alpha,
            depth,
            tol,
            max_iter,
            lower,
            family_depth,
        } => {
            let mut cfg: NormConfig = load_config(cli.config.as_ref())?;
            ov(&mut cfg.weight, weight.clone());
            ov(&mut cfg.p, *p);
            ov(&mut cfg.alpha, *alpha);
            ov(&mut cfg.depth, *depth);
            ov(&mut cfg.tol, *tol);
            ov(&mut cfg.max_iter, *max_iter);
            if *lower {
                cfg.lower = true;
            }
            ov(&mut cfg.family_depth, *family_depth);
            ov(&mut cfg.seed, cli.seed);
            if cli.dump_config {
                return dump(&cfg);
            }
            let w = parse_weight(&cfg.weight)?;
            let grid = PolarGrid::new(cfg.depth)?;
            let estimate = if (cfg.p - 2.0).abs() < 1e-12 {
                norm_estimate_l2(cfg.alpha, &w, &grid, cfg.tol, cfg.max_iter)?
            } else {
                norm_heuristic_lp(cfg.alpha, &w, cfg.p, &grid, cfg.tol, cfg.max_iter)?
            };
            let lower_bound = if cfg.lower {
                Some(norm_lower_bound(
                    cfg.alpha,
                    &w,
                    cfg.p,
                    &grid,
                    cfg.family_depth,
                )?)
            } else {
                None
            };
            let rep = NormCliReport {
                estimate,
                lower_bound,
            };
            let header = RunHeader::new(cfg.seed, cfg.clone());
            let summary = match &rep.lower_bound {
                Some(lb) => format!(
                    "estimate={:.12e} lower_bound={:.12e}",
                    rep.estimate.estimate, lb.estimate
                ),
                None => format!("estimate={:.12e}", rep.estimate.estimate),
            };
            let body = emit.emit(
                &header,
                &summary,
                &rep,
                || {
                    let mut t = CsvTable::new(["quantity", "value"]);
                    t.push_row([
                        "estimate".to_string(),
                        format!("{:.12e}", rep.estimate.estimate),
                    ]);
                    t.push_row(["method".to_string(), format!("{:?}", rep.estimate.method)]);
                    t.push_row([
                        "iterations".to_string(),
                        rep.estimate.iterations.to_string(),
                    ]);
                    t.push_row([
                        "residual".to_string(),
                        format!("{:.12e}", rep.estimate.residual),
                    ]);
                    if let Some(lb) = &rep.lower_bound {
                        t.push_row([
                            "lower_bound".to_string(),
                            format!("{:.12e}", lb.estimate),
                        ]);
                    }
                    t.render()
                },
                "norm.csv",
            )?;
            Ok((0, body))
        }

        Cmd::Dominate {
            alpha,
            samples,
            j_max,
        } => {
            let mut cfg: DominateConfig = load_config(cli.config.as_ref())?;
            ov(&mut cfg.alpha, *alpha);
            ov(&mut cfg.samples, *samples);
            ov(&mut cfg.j_max, *j_max);
            ov(&mut cfg.seed, cli.seed);
            if cli.dump_config {
                return dump(&cfg);
            }
            let rep = domination_check(cfg.alpha, cfg.samples, cfg.j_max)?;
            let pass = rep.stable && rep.sup_ratio.is_finite();
            let header = RunHeader::new(cfg.seed, cfg.clone());
            let body = emit.emit(
                &header,
                &format!(
                    "sup={:.12e} doubled={:.12e} stable={}",
                    rep.sup_ratio, rep.doubled_sup_ratio, rep.stable
                ),
                &rep,
                || {
                    let mut t = CsvTable::new(["quantity", "value"]);
                    t.push_row(["sup_ratio".to_string(), format!("{:.12e}", rep.sup_ratio)]);
                    t.push_row([
                        "doubled_sup_ratio".to_string(),
                        format!("{:.12e}", rep.doubled_sup_ratio),
                    ]);
                    t.push_row([
                        "implied_c4".to_string(),
                        format!("{:.12e}", rep.implied_c4),
                    ]);
                    t.push_row(["included".to_string(), rep.included.to_string()]);
                    t.push_row(["excluded".to_string(), rep.excluded.to_string()]);
                    t.push_row(["stable".to_string(), rep.stable.to_string()]);
                    t.render()
                },
                "dominate.csv",
            )?;
            Ok((if pass { 0 } else { 1 }, body))
        }

        Cmd::Necessity {
            alpha,
            theta,
            d,
            samples,
        } => {
            let mut cfg: NecessityConfig = load_config(cli.config.as_ref())?;
            ov(&mut cfg.alpha, *alpha);
            ov(&mut cfg.theta, *theta);
            if d.is_some() {
                cfg.d = *d;
            }
            ov(&mut cfg.samples, *samples);
            ov(&mut cfg.seed, cli.seed);
            // Auto-selection is part of resolution, so dumps pin the value.
            let d_resolved = cfg.d.unwrap_or_else(|| choose_d(cfg.alpha));
            cfg.d = Some(d_resolved);
            if cli.dump_config {
                return dump(&cfg);
            }
            let rep = necessity_geometry(cfg.alpha, cfg.theta, d_resolved, cfg.samples)?;
            let pass = rep.all_slacks_nonnegative() && rep.bound_holds();
            let header = RunHeader::new(cfg.seed, cfg.clone());
            let body = emit.emit(
                &header,
                &format!(
                    "a={:.12e} b={:.12e} d={} c1={:.12e} min_margin={:.12e} pass={}",
                    rep.a, rep.b, rep.d, rep.c1, rep.bound_margin.min, pass
                ),
                &rep,
                || {
                    let mut t = CsvTable::new(["quantity", "min", "max"]);
                    let mut kv = |name: &str, v: f64| {
                        t.push_row([name.to_string(), format!("{v:.12e}"), format!("{v:.12e}")]);
                    };
                    kv("a", rep.a);
                    kv("b", rep.b);
                    kv("d", rep.d as f64);
                    kv("c1", rep.c1);
                    let mut range = |name: &str, r: &crate::necessity::SlackRange| {
                        t.push_row([
                            name.to_string(),
                            format!("{:.12e}", r.min),
                            format!("{:.12e}", r.max),
                        ]);
                    };
                    range("kernel_distance", &rep.kernel_distance);
                    range("center_distance", &rep.center_distance);
                    range("segment_ratio", &rep.segment_ratio);
                    range("perturbation", &rep.perturbation);
                    range("bound_margin", &rep.bound_margin);
                    t.render()
                },
                "necessity.csv",
            )?;
            Ok((if pass { 0 } else { 1 }, body))
        }

        Cmd::Embedding {
            weight,
            p,
            depth,
            j_max,
        } => {
            let mut cfg: EmbeddingConfig = load_config(cli.config.as_ref())?;
            ov(&mut cfg.weight, weight.clone());
            ov(&mut cfg.p, *p);
            ov(&mut cfg.depth, *depth);
            ov(&mut cfg.j_max, *j_max);
            ov(&mut cfg.seed, cli.seed);
            if cli.dump_config {
                return dump(&cfg);
            }
            let w = parse_weight(&cfg.weight)?;
            let grid = PolarGrid::new(cfg.depth)?;
            let g = random_nonneg(&grid, cfg.seed);
            let jm = cfg.j_max.max(5);
            let mut rows = Vec::new();
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for j in [jm - 4, jm - 2, jm] {
                for shift in GridShift::BOTH {
                    let ratio = carleson_embedding_ratio(&w, shift, cfg.p, &g, &grid, j)?;
                    lo = lo.min(ratio);
                    hi = hi.max(ratio);
                    rows.push(EmbeddingRow {
                        shift: shift.label(),
                        j_max: j,
                        ratio,
                    });
                }
            }
            let rep = EmbeddingCliReport {
                rows,
                spread: hi / lo,
                stable: hi / lo < EMBEDDING_SPREAD,
            };
            let pass = rep.stable;
            let header = RunHeader::new(cfg.seed, cfg.clone());
            let body = emit.emit(
                &header,
                &format!("spread={:.6} stable={}", rep.spread, rep.stable),
                &rep,
                || {
                    let mut t = CsvTable::new(["shift", "j_max", "ratio"]);
                    for r in &rep.rows {
                        t.push_row([
                            r.shift.to_string(),
                            r.j_max.to_string(),
                            format!("{:.12e}", r.ratio),
                        ]);
                    }
                    t.render()
                },
                "embedding.csv",
            )?;
            Ok((if pass { 0 } else { 1 }, body))
        }

        Cmd::Maximal {
            weight,
            p,
            depth,
            j_max,
        } => {
            let mut cfg: MaximalConfig = load_config(cli.config.as_ref())?;
            ov(&mut cfg.weight, weight.clone());
            ov(&mut cfg.p, *p);
            ov(&mut cfg.depth, *depth);
            ov(&mut cfg.j_max, *j_max);
            ov(&mut cfg.seed, cli.seed);
            if cli.dump_config {
                return dump(&cfg);
            }
            let w = parse_weight(&cfg.weight)?;
            let grid = PolarGrid::new(cfg.depth)?;
            let f = random_complex(&grid, cfg.seed);
            let wv = weight_values(&w, &grid)?;
            let fnorm = weighted_lp_norm(&f, &wv, cfg.p, &grid)?;
            let bound = (cfg.p * 2f64.powf(cfg.p) / (cfg.p - 1.0)).powf(1.0 / cfg.p);
            let mut rows = Vec::new();
            let mut pass = true;
            for shift in GridShift::BOTH {
                let m = apply_m(&w, shift, &f, &grid, cfg.j_max)?;
                let ratio = weighted_lp_norm(&m, &wv, cfg.p, &grid)? / fnorm;
                pass &= ratio <= bound;
                rows.push(MaximalRow {
                    shift: shift.label(),
                    norm_ratio: ratio,
                });
            }
            let rep = MaximalCliReport { rows, bound, pass };
            let header = RunHeader::new(cfg.seed, cfg.clone());
            let body = emit.emit(
                &header,
                &format!("bound={bound:.6e} pass={pass}"),
                &rep,
                || {
                    let mut t = CsvTable::new(["shift", "norm_ratio", "bound"]);
                    for r in &rep.rows {
                        t.push_row([
                            r.shift.to_string(),
                            format!("{:.12e}", r.norm_ratio),
                            format!("{:.12e}", rep.bound),
                        ]);
                    }
                    t.render()
                },
                "maximal.csv",
            )?;
            Ok((if pass { 0 } else { 1 }, body))
        }

        Cmd::Doubling {
            weight,
            depth,
            j_max,
            rotations,
            budget,
        } => {
            let mut cfg: DoublingConfig = load_config(cli.config.as_ref())?;
            ov(&mut cfg.weight, weight.clone());
            ov(&mut cfg.depth, *depth);
            ov(&mut cfg.j_max, *j_max);
            ov(&mut cfg.rotations, *rotations);
            ov(&mut cfg.budget, *budget);
            ov(&mut cfg.seed, cli.seed);
            if cli.dump_config {
                return dump(&cfg);
            }
            let w = parse_weight(&cfg.weight)?;
            let grid = PolarGrid::new(cfg.depth)?;
            let ball = doubling_constant(&w, cfg.seed, cfg.budget)?;
            let reverse = reverse_doubling(&w, &grid, cfg.j_max, cfg.rotations)?;
            let rep = DoublingCliReport { ball, reverse };
            let header = RunHeader::new(cfg.seed, cfg.clone());
            let body = emit.emit(
                &header,
                &format!(
                    "doubling={:.6e} reverse_delta={:.6e}",
                    rep.ball.constant, rep.reverse.delta
                ),
                &rep,
                || {
                    let mut t = CsvTable::new(["quantity", "value"]);
                    t.push_row([
                        "doubling_constant".to_string(),
                        format!("{:.12e}", rep.ball.constant),
                    ]);
                    t.push_row([
                        "doubling_half_budget".to_string(),
                        format!("{:.12e}", rep.ball.half_budget_constant),
                    ]);
                    t.push_row([
                        "reverse_doubling_delta".to_string(),
                        format!("{:.12e}", rep.reverse.delta),
                    ]);
                    for (i, g) in rep.reverse.per_generation.iter().enumerate() {
                        t.push_row([
                            format!("reverse_generation_{}", i + 1),
                            format!("{g:.12e}"),
                        ]);
                    }
                    t.render()
                },
                "doubling.csv",
            )?;
            Ok((0, body))
        }

        Cmd::Lemmas {
            weight,
            p,
            alpha,
            depth,
            j_max,
            samples,
            necessity_samples,
            rotations,
        } => {
            let mut cfg: LemmaConfig = load_config(cli.config.as_ref())?;
            ov(&mut cfg.weight, weight.clone());
            ov(&mut cfg.p, *p);
            ov(&mut cfg.alpha, *alpha);
            ov(&mut cfg.depth, *depth);
            ov(&mut cfg.j_max, *j_max);
            ov(&mut cfg.samples, *samples);
            ov(&mut cfg.necessity_samples, *necessity_samples);
            ov(&mut cfg.rotations, *rotations);
            ov(&mut cfg.seed, cli.seed);
            if cli.dump_config {
                return dump(&cfg);
            }
            let rep = run_lemma_suite(&cfg)?;
            let header = RunHeader::new(cfg.seed, cfg.clone());
            let body = emit.emit(
                &header,
                &format!(
                    "pass={} admissible_weight={} admissible_dual={}",
                    rep.pass, rep.admissible_weight, rep.admissible_dual
                ),
                &rep,
                || rep.to_csv(),
                "lemmas.csv",
            )?;
            Ok((if rep.pass { 0 } else { 1 }, body))
        }

        Cmd::Sweep { svg } => {
            let mut spec: SweepSpec = load_config(cli.config.as_ref())?;
            ov(&mut spec.seed, cli.seed);
            if cli.dump_config {
                return dump(&spec);
            }
            let rep = run_theorem_correlation(&spec)?;
            let header = RunHeader::new(spec.seed, spec.clone());
            if let Some(svg_path) = svg {
                let path = resolve_out_path(Some(svg_path), "sweep.svg");
                let chart = crate::report::svg_scatter_loglog(
                    "characteristic vs operator norm",
                    "characteristic value",
                    "norm estimate (finest depth)",
                    &rep.scatter_points(),
                );
                write_text(&path, &chart)?;
            }
            let body = emit.emit(
                &header,
                &format!("configs={} all_agree={}", rep.rows.len(), rep.all_agree),
                &rep,
                || rep.to_csv(),
                "sweep.csv",
            )?;
            Ok((if rep.all_agree { 0 } else { 1 }, body))
        }
    }
}

// ---------------------------------------------------------------------------
// Per-command configuration (TOML-loadable, dumpable)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct CharacteristicConfig {
    pub weight: String,
    pub p: f64,
    pub alpha: f64,
    pub depth: u32,
    pub j_max: u32,
    pub rotations: usize,
    pub seed: u64,
}

impl Default for CharacteristicConfig {
    fn default() -> Self {
        Self {
            weight: "const:1".into(),
            p: 2.0,
            alpha: 1.0,
            depth: 4,
            j_max: 10,
            rotations: 8,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GuoWangConfig {
    pub weight: String,
    pub depth: u32,
    pub j_max: u32,
    pub rotations: usize,
    pub seed: u64,
}

impl Default for GuoWangConfig {
    fn default() -> Self {
        Self {
            weight: "const:1".into(),
            depth: 4,
            j_max: 10,
            rotations: 8,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct NormConfig {
    pub weight: String,
    pub p: f64,
    pub alpha: f64,
    pub depth: u32,
    pub tol: f64,
    pub max_iter: usize,
    pub lower: bool,
    pub family_depth: u32,
    pub seed: u64,
}

impl Default for NormConfig {
    fn default() -> Self {
        Self {
            weight: "const:1".into(),
            p: 2.0,
            alpha: 2.0,
            depth: 4,
            tol: 1e-5,
            max_iter: 500,
            lower: false,
            family_depth: 5,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DominateConfig {
    pub alpha: f64,
    pub samples: usize,
    pub j_max: u32,
    pub seed: u64,
}

impl Default for DominateConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            samples: 200_000,
            j_max: 12,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct NecessityConfig {
    pub alpha: f64,
    pub theta: f64,
    /// `None` selects the minimal admissible separation for `alpha`.
    pub d: Option<u32>,
    pub samples: usize,
    pub seed: u64,
}

impl Default for NecessityConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            theta: 0.01,
            d: None,
            samples: 100_000,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EmbeddingConfig {
    pub weight: String,
    pub p: f64,
    pub depth: u32,
    pub j_max: u32,
    pub seed: u64,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            weight: "const:1".into(),
            p: 2.0,
            depth: 4,
            j_max: 10,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MaximalConfig {
    pub weight: String,
    pub p: f64,
    pub depth: u32,
    pub j_max: u32,
    pub seed: u64,
}

impl Default for MaximalConfig {
    fn default() -> Self {
        Self {
            weight: "const:1".into(),
            p: 2.0,
            depth: 4,
            j_max: 10,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DoublingConfig {
    pub weight: String,
    pub depth: u32,
    pub j_max: u32,
    pub rotations: u32,
    pub budget: usize,
    pub seed: u64,
}

impl Default for DoublingConfig {
    fn default() -> Self {
        Self {
            weight: "const:1".into(),
            depth: 4,
            j_max: 6,
            rotations: 8,
            budget: 4_000,
            seed: 42,
        }
    }
}

// ---------------------------------------------------------------------------
// CLI-level report wrappers
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
struct NormCliReport {
    estimate: OperatorNormReport,
    lower_bound: Option<OperatorNormReport>,
}

#[derive(Debug, Clone, Serialize)]
struct EmbeddingRow {
    shift: &'static str,
    j_max: u32,
    ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
struct EmbeddingCliReport {
    rows: Vec<EmbeddingRow>,
    spread: f64,
    stable: bool,
}

#[derive(Debug, Clone, Serialize)]
struct MaximalRow {
    shift: &'static str,
    norm_ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
struct MaximalCliReport {
    rows: Vec<MaximalRow>,
    bound: f64,
    pass: bool,
}

#[derive(Debug, Clone, Serialize)]
struct DoublingCliReport {
    ball: crate::weights::DoublingReport,
    reverse: crate::weights::ReverseDoublingReport,
}

fn random_complex(grid: &PolarGrid, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GridFunction::from_values(
        grid,
        (0..grid.len())
            .map(|_| {
                Complex64::new(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0)
            })
            .collect(),
    )
    .expect("length matches")
}

fn random_nonneg(grid: &PolarGrid, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GridFunction::from_values(
        grid,
        (0..grid.len())
            .map(|_| Complex64::new(rng.random::<f64>() * 2.0, 0.0))
            .collect(),
    )
    .expect("length matches")
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_subcommand_is_exposed() {
        let cmd = Cli::command();
        let names: Vec<&str> = cmd.get_subcommands().map(|s| s.get_name()).collect();
        for expected in [
            "characteristic",
            "guo-wang",
            "norm",
            "dominate",
            "necessity",
            "embedding",
            "maximal",
            "doubling",
            "lemmas",
            "sweep",
        ] {
            assert!(names.contains(&expected), "missing subcommand {expected}");
        }
        assert_eq!(names.len(), 10);
    }

    #[test]
    fn config_structs_round_trip_through_toml() {
        let cfg = CharacteristicConfig::default();
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back: CharacteristicConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg.weight, back.weight);
        assert_eq!(cfg.j_max, back.j_max);

        let cfg = NecessityConfig {
            d: Some(6),
            ..NecessityConfig::default()
        };
        let text = toml::to_string_pretty(&cfg).unwrap();
        let back: NecessityConfig = toml::from_str(&text).unwrap();
        assert_eq!(back.d, Some(6));
    }

    #[test]
    fn partial_config_files_fill_from_defaults() {
        let cfg: NormConfig = toml::from_str("alpha = 3.0").unwrap();
        assert_eq!(cfg.alpha, 3.0);
        assert_eq!(cfg.weight, "const:1");
        assert_eq!(cfg.max_iter, 500);
    }
}
