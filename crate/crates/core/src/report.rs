//! Report plumbing shared by the CLI and the sweep driver: a reproducibility
//! header, schema-versioned JSON envelopes, CSV tables, output-path
//! resolution, and a minimal log-log SVG scatter writer.
//!
//! Nothing here embeds wall-clock time or hostnames: identical inputs must
//! produce byte-identical outputs.

use serde::Serialize;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// Version tag embedded in every structured output.
pub const SCHEMA: &str = "hardyk/v1";

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HARDYK_OUT_DIR";

/// Crate version as compiled.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Reproducibility header: tool version, RNG seed, and the fully resolved
/// configuration the run executed with.
#[derive(Debug, Clone, Serialize)]
pub struct RunHeader<C: Serialize> {
    pub schema: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub config: C,
}

impl<C: Serialize> RunHeader<C> {
    pub fn new(seed: u64, config: C) -> Self {
        Self {
            schema: SCHEMA,
            version: VERSION,
            seed,
            config,
        }
    }

    /// Text form printed at the start of every CLI run, one `#`-prefixed
    /// line per item, with the config rendered as TOML.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# hardyk {} ({})", self.version, self.schema);
        let _ = writeln!(out, "# seed {}", self.seed);
        let toml = toml::to_string(&self.config)
            .unwrap_or_else(|e| format!("<unserializable config: {e}>"));
        for line in toml.lines() {
            let _ = writeln!(out, "# {line}");
        }
        out
    }
}

/// Wrap a payload in the versioned JSON envelope
/// `{schema, version, seed, config, report}`.
pub fn json_envelope<C: Serialize, T: Serialize>(
    header: &RunHeader<C>,
    report: &T,
) -> String {
    let value = serde_json::json!({
        "schema": header.schema,
        "version": header.version,
        "seed": header.seed,
        "config": header.config,
        "report": report,
    });
    serde_json::to_string_pretty(&value).expect("report serialization cannot fail")
}

/// Resolve where an output file goes: absolute paths win; relative paths and
/// bare defaults land under `$HARDYK_OUT_DIR` when set, else the working
/// directory.
pub fn resolve_out_path(requested: Option<&Path>, default_name: &str) -> PathBuf {
    let base = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from);
    match requested {
        Some(p) if p.is_absolute() => p.to_path_buf(),
        Some(p) => match base {
            Some(b) => b.join(p),
            None => p.to_path_buf(),
        },
        None => match base {
            Some(b) => b.join(default_name),
            None => PathBuf::from(default_name),
        },
    }
}

/// In-memory CSV table with RFC 4180 quoting and `\n` line endings.
#[derive(Debug, Clone)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row<S: Into<String>>(&mut self, row: impl IntoIterator<Item = S>) {
        let row: Vec<String> = row.into_iter().map(Into::into).collect();
        assert_eq!(
            row.len(),
            self.header.len(),
            "CSV row width must match the header"
        );
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let write_line = |cells: &[String], out: &mut String| {
            for (i, c) in cells.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&csv_escape(c));
            }
            out.push('\n');
        };
        write_line(&self.header, &mut out);
        for r in &self.rows {
            write_line(r, &mut out);
        }
        out
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                std::fs::create_dir_all(dir)?;
            }
        }
        std::fs::write(path, self.render())?;
        Ok(())
    }
}

fn csv_escape(cell: &str) -> String {
    if cell.contains(',') || cell.contains('"') || cell.contains('\n') {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// One marker on the scatter plot.
#[derive(Debug, Clone)]
pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
    pub label: String,
    /// Flagged points render in a warning colour.
    pub flagged: bool,
}

/// Render a log-log scatter chart as a standalone SVG document.  Points with
/// a nonpositive or non-finite coordinate cannot be placed on log axes; they
/// are dropped and counted in a footnote.
pub fn svg_scatter_loglog(
    title: &str,
    x_label: &str,
    y_label: &str,
    points: &[ScatterPoint],
) -> String {
    const W: f64 = 640.0;
    const H: f64 = 480.0;
    const ML: f64 = 70.0; // left margin
    const MR: f64 = 20.0;
    const MT: f64 = 40.0;
    const MB: f64 = 55.0;

    let usable: Vec<&ScatterPoint> = points
        .iter()
        .filter(|p| p.x.is_finite() && p.y.is_finite() && p.x > 0.0 && p.y > 0.0)
        .collect();
    let dropped = points.len() - usable.len();

    let (mut x0, mut x1, mut y0, mut y1) = (-1.0f64, 1.0f64, -1.0f64, 1.0f64);
    if !usable.is_empty() {
        x0 = usable.iter().map(|p| p.x.log10()).fold(f64::INFINITY, f64::min);
        x1 = usable.iter().map(|p| p.x.log10()).fold(f64::NEG_INFINITY, f64::max);
        y0 = usable.iter().map(|p| p.y.log10()).fold(f64::INFINITY, f64::min);
        y1 = usable.iter().map(|p| p.y.log10()).fold(f64::NEG_INFINITY, f64::max);
    }
    // Pad degenerate ranges so a single point sits mid-axis.
    if x1 - x0 < 0.5 {
        let m = 0.5 * (x0 + x1);
        x0 = m - 0.5;
        x1 = m + 0.5;
    }
    if y1 - y0 < 0.5 {
        let m = 0.5 * (y0 + y1);
        y0 = m - 0.5;
        y1 = m + 0.5;
    }
    let px = |lx: f64| ML + (lx - x0) / (x1 - x0) * (W - ML - MR);
    let py = |ly: f64| H - MB - (ly - y0) / (y1 - y0) * (H - MT - MB);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{W}" height="{H}" fill="white"/>
<text x="{tx}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>"#,
        tx = W / 2.0,
        title = xml_escape(title),
    );
    // Axes.
    let _ = writeln!(
        s,
        r#"<line x1="{ml}" y1="{hb}" x2="{wr}" y2="{hb}" stroke="black"/>
<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{hb}" stroke="black"/>"#,
        ml = ML,
        mt = MT,
        hb = H - MB,
        wr = W - MR,
    );
    // Decade ticks.
    for d in (x0.ceil() as i64)..=(x1.floor() as i64) {
        let x = px(d as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{hb}" x2="{x:.1}" y2="{hb2}" stroke="black"/>
<text x="{x:.1}" y="{ty}" text-anchor="middle" font-family="sans-serif" font-size="11">1e{d}</text>"#,
            hb = H - MB,
            hb2 = H - MB + 5.0,
            ty = H - MB + 18.0,
        );
    }
    for d in (y0.ceil() as i64)..=(y1.floor() as i64) {
        let y = py(d as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{ml2}" y1="{y:.1}" x2="{ml}" y2="{y:.1}" stroke="black"/>
<text x="{tx}" y="{ty:.1}" text-anchor="end" font-family="sans-serif" font-size="11">1e{d}</text>"#,
            ml = ML,
            ml2 = ML - 5.0,
            tx = ML - 8.0,
            ty = y + 4.0,
        );
    }
    // Axis labels.
    let _ = writeln!(
        s,
        r#"<text x="{tx}" y="{ty}" text-anchor="middle" font-family="sans-serif" font-size="13">{xl}</text>
<text x="16" y="{my}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {my})">{yl}</text>"#,
        tx = (ML + W - MR) / 2.0,
        ty = H - 14.0,
        xl = xml_escape(x_label),
        my = (MT + H - MB) / 2.0,
        yl = xml_escape(y_label),
    );
    // Points.
    for p in &usable {
        let (cx, cy) = (px(p.x.log10()), py(p.y.log10()));
        let fill = if p.flagged { "#c0392b" } else { "#2c6aa0" };
        let _ = writeln!(
            s,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="4" fill="{fill}" fill-opacity="0.8"><title>{t}</title></circle>"#,
            t = xml_escape(&p.label),
        );
    }
    if dropped > 0 {
        let _ = writeln!(
            s,
            r##"<text x="{wr}" y="{mt}" text-anchor="end" font-family="sans-serif" font-size="11" fill="#666">{dropped} point(s) off log scale</text>"##,
            wr = W - MR,
            mt = MT - 8.0,
        );
    }
    s.push_str("</svg>\n");
    s
}

fn xml_escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Write a string to `path`, creating parent directories as needed.
pub fn write_text(path: &Path, body: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, body)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Serialize;

    #[derive(Serialize, Clone)]
    struct Cfg {
        p: f64,
        weight: String,
    }

    #[test]
    fn header_text_carries_version_seed_and_config() {
        let h = RunHeader::new(
            42,
            Cfg {
                p: 2.0,
                weight: "const:1".into(),
            },
        );
        let text = h.render_text();
        assert!(text.contains("# hardyk"));
        assert!(text.contains("# seed 42"));
        assert!(text.contains("weight = \"const:1\""));
        assert!(text.lines().all(|l| l.starts_with('#')));
    }

    #[test]
    fn json_envelope_is_schema_versioned() {
        let h = RunHeader::new(7, Cfg { p: 1.5, weight: "radial:t=0.5".into() });
        let body = json_envelope(&h, &serde_json::json!({"ok": true}));
        let v: serde_json::Value = serde_json::from_str(&body).unwrap();
        assert_eq!(v["schema"], "hardyk/v1");
        assert_eq!(v["seed"], 7);
        assert_eq!(v["config"]["p"], 1.5);
        assert_eq!(v["report"]["ok"], true);
    }

    #[test]
    fn csv_quotes_only_when_needed() {
        let mut t = CsvTable::new(["a", "b"]);
        t.push_row(["plain", "has,comma"]);
        t.push_row(["has\"quote", "x"]);
        let body = t.render();
        assert_eq!(
            body,
            "a,b\nplain,\"has,comma\"\n\"has\"\"quote\",x\n"
        );
    }

    #[test]
    fn out_path_resolution_honours_the_environment() {
        // No env override in-process: relative stays relative.
        let p = resolve_out_path(Some(Path::new("sub/x.csv")), "d.csv");
        assert!(p.ends_with("sub/x.csv"));
        let d = resolve_out_path(None, "d.csv");
        assert!(d.ends_with("d.csv"));
        let abs = resolve_out_path(Some(Path::new("/tmp/z.csv")), "d.csv");
        assert_eq!(abs, PathBuf::from("/tmp/z.csv"));
    }

    #[test]
    fn scatter_handles_infinite_points() {
        let pts = vec![
            ScatterPoint { x: 1.0, y: 2.0, label: "a".into(), flagged: false },
            ScatterPoint { x: f64::INFINITY, y: 2.0, label: "b".into(), flagged: true },
            ScatterPoint { x: 10.0, y: 0.5, label: "c<d>".into(), flagged: true },
        ];
        let svg = svg_scatter_loglog("t", "x", "y", &pts);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("1 point(s) off log scale"));
        assert!(svg.contains("c&lt;d&gt;"));
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
