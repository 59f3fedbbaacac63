use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;

use crate::run::RunRecord;
use crate::Failure;

#[derive(Args, Debug, Clone)]
pub struct PlotArgs {
    /// Directory of result files written by `explain` or `bench`.
    #[arg(long)]
    pub results: PathBuf,
    /// Output directory; defaults to the results directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 4] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728"];

fn color(method: u8) -> &'static str {
    COLORS[(method as usize + 3) % COLORS.len()]
}

/// Every parseable run record in `dir`, in file-name order.
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>, Failure> {
    let entries = fs::read_dir(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let text = fs::read_to_string(&p)?;
        match serde_json::from_str::<RunRecord>(&text) {
            Ok(r) => out.push(r),
            Err(e) => log::debug!("skipping {}: {e}", p.display()),
        }
    }
    Ok(out)
}

/// One point per run: runs sorted by time, x is the accumulated time and y
/// the number solved so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub time_s: f64,
    pub accumulated_s: f64,
    pub solved: usize,
    pub status: &'static str,
}

pub fn curve(records: &[&RunRecord]) -> Vec<Point> {
    let mut sorted: Vec<&&RunRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.time_s.total_cmp(&b.time_s).then_with(|| a.exec.cmp(&b.exec)));
    let (mut solved, mut acc) = (0, 0.0);
    sorted
        .into_iter()
        .map(|r| {
            acc += r.time_s;
            if r.solved {
                solved += 1;
            }
            let status = if r.solved { "solved" } else { "unsolved" };
            Point { time_s: r.time_s, accumulated_s: acc, solved, status }
        })
        .collect()
}

/// Linear scale from `[lo, hi]` to `[a, b]`, widening an empty range.
fn scale(v: f64, lo: f64, hi: f64, a: f64, b: f64) -> f64 {
    let span = if hi > lo { hi - lo } else { 1.0 };
    a + (v - lo) / span * (b - a)
}

fn axes(svg: &mut String, title: &str, xlabel: &str, ylabel: &str, xmax: f64, ymax: f64) {
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN / 2.0, MARGIN / 2.0);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="16" text-anchor="middle" font-size="13">{title}</text>"#, WIDTH / 2.0);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>"#);
    let _ = writeln!(svg, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for t in 0..=4 {
        let f = t as f64 / 4.0;
        let x = scale(f, 0.0, 1.0, x0, x1);
        let y = scale(f, 0.0, 1.0, y0, y1);
        let _ = writeln!(svg, r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle">{:.3}</text>"#, y0 + 16.0, f * xmax);
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{y:.1}" text-anchor="end">{:.1}</text>"#, x0 - 6.0, f * ymax);
    }
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xlabel}</text>"#, (x0 + x1) / 2.0, HEIGHT - 10.0);
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{ylabel}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
}

fn legend(svg: &mut String, methods: &[u8]) {
    for (i, m) in methods.iter().enumerate() {
        let y = MARGIN / 2.0 + 14.0 * i as f64;
        let x = MARGIN + 10.0;
        let _ = writeln!(svg, r#"<rect x="{x}" y="{:.1}" width="10" height="10" fill="{}"/>"#, y, color(*m));
        let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}">method {m}</text>"#, x + 14.0, y + 9.0);
    }
}

fn curves_svg(groups: &BTreeMap<u8, Vec<Point>>) -> String {
    let xmax = groups.values().flatten().map(|p| p.accumulated_s).fold(0.0, f64::max).max(1e-3);
    let ymax = groups.values().flatten().map(|p| p.solved).max().unwrap_or(0).max(1) as f64;
    let mut svg = String::new();
    axes(&mut svg, "solved instances over accumulated time", "accumulated time (s)", "solved", xmax, ymax);
    for (m, pts) in groups {
        let coords: Vec<(f64, f64)> = pts
            .iter()
            .map(|p| {
                (
                    scale(p.accumulated_s, 0.0, xmax, MARGIN, WIDTH - MARGIN / 2.0),
                    scale(p.solved as f64, 0.0, ymax, HEIGHT - MARGIN, MARGIN / 2.0),
                )
            })
            .collect();
        let line: Vec<String> = coords.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{}" stroke-width="2" points="{}"/>"#, color(*m), line.join(" "));
        for (x, y) in coords {
            let _ = writeln!(svg, r#"<circle cx="{x:.1}" cy="{y:.1}" r="3" fill="{}"/>"#, color(*m));
        }
    }
    legend(&mut svg, &groups.keys().copied().collect::<Vec<_>>());
    svg.push_str("</svg>\n");
    svg
}

fn sizes_svg(hist: &BTreeMap<u8, BTreeMap<usize, usize>>) -> String {
    let smax = hist.values().flat_map(|h| h.keys()).copied().max().unwrap_or(0);
    let cmax = hist.values().flat_map(|h| h.values()).copied().max().unwrap_or(0).max(1) as f64;
    let mut svg = String::new();
    axes(&mut svg, "explanation sizes", "size", "runs", smax as f64, cmax);
    let slots = (smax + 1) as f64;
    let slot = (WIDTH - 1.5 * MARGIN) / slots;
    let bar = slot / (hist.len().max(1) as f64 + 1.0);
    for (i, (m, h)) in hist.iter().enumerate() {
        for (&s, &c) in h {
            let x = MARGIN + s as f64 / slots * (WIDTH - 1.5 * MARGIN) + bar * i as f64;
            let y = scale(c as f64, 0.0, cmax, HEIGHT - MARGIN, MARGIN / 2.0);
            let _ = writeln!(
                svg,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{bar:.1}" height="{:.1}" fill="{}"/>"#,
                HEIGHT - MARGIN - y,
                color(*m)
            );
        }
    }
    legend(&mut svg, &hist.keys().copied().collect::<Vec<_>>());
    svg.push_str("</svg>\n");
    svg
}

pub fn run(a: &PlotArgs) -> Result<u8, Failure> {
    let records = load_records(&a.results)?;
    if records.is_empty() {
        return Err(Failure::input(format!("{}: no result files", a.results.display())));
    }
    let out = a.out.clone().unwrap_or_else(|| a.results.clone());
    fs::create_dir_all(&out)?;

    let mut by_method: BTreeMap<u8, Vec<&RunRecord>> = BTreeMap::new();
    for r in &records {
        by_method.entry(r.method).or_default().push(r);
    }
    let groups: BTreeMap<u8, Vec<Point>> = by_method.iter().map(|(m, rs)| (*m, curve(rs))).collect();
    let mut csv = String::from("method,time_s,accumulated_time_s,cumulative_solved,status\n");
    for (m, pts) in &groups {
        for p in pts {
            let _ = writeln!(csv, "{m},{},{},{},{}", p.time_s, p.accumulated_s, p.solved, p.status);
        }
    }
    fs::write(out.join("solved.csv"), csv)?;
    fs::write(out.join("solved.svg"), curves_svg(&groups))?;

    let mut hist: BTreeMap<u8, BTreeMap<usize, usize>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.solved) {
        *hist.entry(r.method).or_default().entry(r.size.unwrap_or(0)).or_default() += 1;
    }
    let mut csv = String::from("method,size,count\n");
    for (m, h) in &hist {
        for (s, c) in h {
            let _ = writeln!(csv, "{m},{s},{c}");
        }
    }
    fs::write(out.join("sizes.csv"), csv)?;
    fs::write(out.join("sizes.svg"), sizes_svg(&hist))?;
    println!("{} results plotted into {}", records.len(), out.display());
    Ok(0)
}
