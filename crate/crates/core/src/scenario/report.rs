use super::{CheckReport, ComparisonReport, IdentityReport, InclusionReport, ScenarioError, SolveReport, SweepReport};
use crate::hypotheses::MonotonicityProfile;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Report {
    Check(CheckReport),
    Solve(SolveReport),
    Compare(ComparisonReport),
    Sweep(SweepReport),
    Identity(IdentityReport),
    Inclusion(InclusionReport),
}

/// Versioned top-level JSON document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub schema: u32,
    #[serde(flatten)]
    pub report: Report,
}

impl ReportFile {
    pub fn new(report: Report) -> Self {
        ReportFile { schema: SCHEMA_VERSION, report }
    }

    pub fn name(&self) -> &str {
        match &self.report {
            Report::Check(r) => &r.name,
            Report::Solve(r) => &r.name,
            Report::Compare(r) => &r.name,
            Report::Sweep(r) => &r.name,
            Report::Identity(r) => &r.name,
            Report::Inclusion(r) => &r.name,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let f = |x: f64| format!("{x:.12e}");
        match &self.report {
            Report::Check(r) => {
                w.write_record(["arc", "s", "value", "derivative"]).unwrap();
                for a in &r.profile.arcs {
                    for s in &a.samples {
                        w.write_record([a.arc.to_string(), f(s.s), f(s.value), f(s.derivative)]).unwrap();
                    }
                }
            }
            Report::Solve(r) => {
                w.write_record(["level", "h", "h_max", "lambda", "residual", "n_dofs", "iterations"]).unwrap();
                for l in &r.study.levels {
                    w.write_record([
                        l.level.to_string(),
                        f(l.h),
                        f(l.h_max),
                        f(l.lambda),
                        f(l.residual),
                        l.n_dofs.to_string(),
                        l.iterations.to_string(),
                    ])
                    .unwrap();
                }
            }
            Report::Compare(r) => {
                w.write_record(["level", "h", "lambda_gamma", "lambda_gamma_prime", "margin", "bound"]).unwrap();
                for ((a, b), m) in r.study_gamma.levels.iter().zip(&r.study_gamma_prime.levels).zip(&r.level_margins) {
                    w.write_record([a.level.to_string(), f(a.h), f(a.lambda), f(b.lambda), f(m.margin), f(m.bound)]).unwrap();
                }
            }
            Report::Sweep(r) => {
                w.write_record([
                    "index",
                    "parameter",
                    "comparison",
                    "classification",
                    "lambda_gamma",
                    "err_gamma",
                    "lambda_gamma_prime",
                    "err_gamma_prime",
                    "margin",
                    "bound",
                    "verdict",
                    "error",
                ])
                .unwrap();
                for p in &r.points {
                    let mut row = vec![p.index.to_string(), format!("{}", p.parameter), p.comparison.label.clone()];
                    match &p.report {
                        Some(c) => row.extend([
                            serde_json::to_value(c.hypotheses.classification).unwrap().as_str().unwrap().to_string(),
                            f(c.study_gamma.best_lambda()),
                            f(c.study_gamma.error_estimate()),
                            f(c.study_gamma_prime.best_lambda()),
                            f(c.study_gamma_prime.error_estimate()),
                            f(c.margin),
                            f(c.bound),
                            c.verdict.name().to_string(),
                            String::new(),
                        ]),
                        None => {
                            row.extend(std::iter::repeat_n(String::new(), 8));
                            row.push(p.error.clone().unwrap_or_default());
                        }
                    }
                    w.write_record(row).unwrap();
                }
            }
            Report::Identity(r) => {
                w.write_record(["term_mixed", "term_cross", "term_curv", "residual", "membership", "pass"]).unwrap();
                let b = &r.breakdown;
                w.write_record([
                    f(b.term_mixed),
                    f(b.term_cross),
                    f(b.term_curv),
                    f(b.residual),
                    r.membership.pass.to_string(),
                    r.pass.to_string(),
                ])
                .unwrap();
            }
            Report::Inclusion(r) => {
                w.write_record(["level", "h", "lambda_smaller", "lambda_larger", "monotone"]).unwrap();
                for l in &r.levels {
                    w.write_record([l.level.to_string(), f(l.h), f(l.lambda_smaller), f(l.lambda_larger), l.monotone.to_string()]).unwrap();
                }
            }
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    /// SVG figures as `(file suffix, document)` pairs.
    pub fn to_svgs(&self) -> Vec<(&'static str, String)> {
        match &self.report {
            Report::Check(r) => vec![("profile", profile_svg(&r.profile, &r.name))],
            Report::Solve(r) => {
                let pts = r.study.levels.iter().map(|l| (l.h, l.lambda)).collect();
                let mut p = Plot::new(&format!("{}: lambda vs h", r.name), "h", "lambda");
                p.series.push(Series::line("lambda_h", "#1f77b4", pts));
                if let Some(e) = r.study.extrapolation {
                    p.hlines.push(("extrapolated", "#1f77b4", e.lambda_inf));
                }
                vec![("lambda", p.render())]
            }
            Report::Compare(r) => {
                let mut p = Plot::new(&format!("{}: lambda vs h", r.name), "h", "lambda");
                for (study, label, color) in [(&r.study_gamma, "gamma", "#d62728"), (&r.study_gamma_prime, "gamma_prime", "#1f77b4")] {
                    p.series.push(Series::line(label, color, study.levels.iter().map(|l| (l.h, l.lambda)).collect()));
                    if let Some(e) = study.extrapolation {
                        p.hlines.push((label, color, e.lambda_inf));
                    }
                }
                let mut out = vec![("lambda", p.render())];
                if let Some(profile) = &r.profile {
                    out.push(("profile", profile_svg(profile, &r.name)));
                }
                out
            }
            Report::Sweep(r) => {
                let mut p = Plot::new(&format!("{}: margin and bound per grid point", r.name), "grid index", "lambda gap");
                let pick = |g: fn(&ComparisonReport) -> f64| {
                    r.points.iter().filter_map(|pt| pt.report.as_ref().map(|c| (pt.index as f64, g(c)))).collect::<Vec<_>>()
                };
                p.series.push(Series::markers("margin", "#2ca02c", pick(|c| c.margin)));
                p.series.push(Series::markers("3 x error", "#7f7f7f", pick(|c| c.bound)));
                vec![("sweep", p.render())]
            }
            Report::Inclusion(r) => {
                let mut p = Plot::new(&format!("{}: lambda vs h", r.name), "h", "lambda");
                p.series.push(Series::line("smaller set", "#1f77b4", r.levels.iter().map(|l| (l.h, l.lambda_smaller)).collect()));
                p.series.push(Series::line("larger set", "#d62728", r.levels.iter().map(|l| (l.h, l.lambda_larger)).collect()));
                vec![("lambda", p.render())]
            }
            Report::Identity(_) => Vec::new(),
        }
    }
}

fn file_stem(name: &str) -> String {
    let s: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect();
    if s.is_empty() {
        "report".into()
    } else {
        s
    }
}

/// Writes the report in each requested format to `dir`; returns the written paths.
pub fn emit_report(report: &ReportFile, formats: &[Format], dir: &Path) -> Result<Vec<PathBuf>, ScenarioError> {
    let io = |path: &Path, e: std::io::Error| ScenarioError::Io { path: path.display().to_string(), source: e };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let stem = file_stem(report.name());
    let mut written = Vec::new();
    let mut put = |path: PathBuf, body: String| -> Result<(), ScenarioError> {
        std::fs::write(&path, body).map_err(|e| io(&path, e))?;
        written.push(path);
        Ok(())
    };
    for fmt in formats {
        match fmt {
            Format::Json => put(dir.join(format!("{stem}.json")), report.to_json())?,
            Format::Csv => put(dir.join(format!("{stem}.csv")), report.to_csv())?,
            Format::Svg => {
                for (suffix, doc) in report.to_svgs() {
                    put(dir.join(format!("{stem}_{suffix}.svg")), doc)?;
                }
            }
        }
    }
    Ok(written)
}

/// Profile `t(s)` along the remainder with one-sided corner limits; up-jumps are marked red.
fn profile_svg(profile: &MonotonicityProfile, name: &str) -> String {
    let mut p = Plot::new(&format!("{name}: (b.tau)(b.nu) along the remainder"), "arclength from P0", "t");
    let mut offset = 0.0;
    for (k, a) in profile.arcs.iter().enumerate() {
        let pts: Vec<(f64, f64)> = a.samples.iter().map(|s| (offset + s.s, s.value)).collect();
        let len = a.samples.last().map_or(0.0, |s| s.s);
        let color = if a.is_gamma_prime { "#7f7f7f" } else { "#1f77b4" };
        p.series.push(Series::line(&format!("arc {}", a.arc), color, pts));
        offset += len;
        if let Some(c) = profile.corners.get(k) {
            let up = c.right > c.left;
            p.jumps.push(Jump { x: offset, from: c.left, to: c.right, up });
        }
    }
    p.render()
}

struct Series {
    label: String,
    color: &'static str,
    points: Vec<(f64, f64)>,
    line: bool,
}

impl Series {
    fn line(label: &str, color: &'static str, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), color, points, line: true }
    }
    fn markers(label: &str, color: &'static str, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.into(), color, points, line: false }
    }
}

struct Jump {
    x: f64,
    from: f64,
    to: f64,
    up: bool,
}

struct Plot {
    title: String,
    xlabel: String,
    ylabel: String,
    series: Vec<Series>,
    hlines: Vec<(&'static str, &'static str, f64)>,
    jumps: Vec<Jump>,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 150.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

impl Plot {
    fn new(title: &str, xlabel: &str, ylabel: &str) -> Self {
        Plot { title: title.into(), xlabel: xlabel.into(), ylabel: ylabel.into(), series: vec![], hlines: vec![], jumps: vec![] }
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let xs = self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).chain(self.jumps.iter().map(|j| j.x));
        let ys = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().map(|p| p.1))
            .chain(self.hlines.iter().map(|h| h.2))
            .chain(self.jumps.iter().flat_map(|j| [j.from, j.to]));
        let span = |it: &mut dyn Iterator<Item = f64>| {
            let (lo, hi) = it.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo <= 1e-14 * lo.abs().max(1.0) {
                (lo - 0.5, hi + 0.5)
            } else {
                let pad = 0.05 * (hi - lo);
                (lo - pad, hi + pad)
            }
        };
        let (x0, x1) = span(&mut xs.into_iter());
        let (y0, y1) = span(&mut ys.into_iter());
        (x0, x1, y0, y1)
    }

    fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let (pw, ph) = (W - MARGIN_L - MARGIN_R, H - MARGIN_T - MARGIN_B);
        let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| MARGIN_T + (y1 - y) / (y1 - y0) * ph;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="20" font-size="13">{}</text>"#, MARGIN_L, esc(&self.title));
        let _ = writeln!(s, r#"<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for k in 0..=4 {
            let fx = x0 + (x1 - x0) * k as f64 / 4.0;
            let fy = y0 + (y1 - y0) * k as f64 / 4.0;
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, sx(fx), H - MARGIN_B + 15.0, tick(fx));
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, MARGIN_L - 5.0, sy(fy) + 4.0, tick(fy));
        }
        let _ =
            writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, MARGIN_L + pw / 2.0, H - 12.0, esc(&self.xlabel));
        let _ = writeln!(
            s,
            r#"<text x="15" y="{:.1}" text-anchor="middle" transform="rotate(-90 15 {:.1})">{}</text>"#,
            MARGIN_T + ph / 2.0,
            MARGIN_T + ph / 2.0,
            esc(&self.ylabel)
        );
        let mut legend_y = MARGIN_T + 10.0;
        let mut legend = |s: &mut String, color: &str, label: &str| {
            let _ = writeln!(s, r#"<rect x="{:.1}" y="{:.1}" width="12" height="3" fill="{color}"/>"#, W - MARGIN_R + 10.0, legend_y - 4.0);
            let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, W - MARGIN_R + 28.0, legend_y, esc(label));
            legend_y += 16.0;
        };
        for se in &self.series {
            if se.line && se.points.len() > 1 {
                let pts: Vec<String> = se.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                let _ = writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#, se.color, pts.join(" "));
            }
            if !se.line || se.points.len() <= 8 {
                for &(x, y) in &se.points {
                    let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{}"/>"#, sx(x), sy(y), se.color);
                }
            }
            legend(&mut s, se.color, &se.label);
        }
        for &(label, color, y) in &self.hlines {
            let _ = writeln!(
                s,
                r#"<line x1="{MARGIN_L}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="5,4"/>"#,
                sy(y),
                MARGIN_L + pw,
                sy(y)
            );
            legend(&mut s, color, &format!("{label} limit"));
        }
        let mut any_up = false;
        for j in &self.jumps {
            let color = if j.up { "#d62728" } else { "#555555" };
            any_up |= j.up;
            let _ = writeln!(
                s,
                r#"<line class="{}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="3,3" stroke-width="1.5"/>"#,
                if j.up { "up-jump" } else { "corner" },
                sx(j.x),
                sy(j.from),
                sx(j.x),
                sy(j.to)
            );
            if j.up {
                let _ = writeln!(
                    s,
                    r#"<circle class="up-jump" cx="{:.2}" cy="{:.2}" r="5" fill="none" stroke="{color}" stroke-width="2"/>"#,
                    sx(j.x),
                    sy(j.to)
                );
            }
        }
        if any_up {
            legend(&mut s, "#d62728", "corner up-jump");
        }
        s.push_str("</svg>\n");
        s
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn esc(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainBoundary, Point2};
    use crate::hypotheses::{monotonicity_profile, BoundaryPartition};

    #[test]
    fn equilateral_profile_has_up_jump_marker() {
        let h = 3f64.sqrt() / 2.0;
        let d = DomainBoundary::polygon(&[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.5, h)]).unwrap();
        let part = BoundaryPartition::new(&d, &[0], 1).unwrap();
        let prof = monotonicity_profile(&d, &part, 16).unwrap();
        let svg = profile_svg(&prof, "equilateral");
        assert!(svg.contains(r#"class="up-jump""#));
        assert!(svg.starts_with("<svg"));
    }

    #[test]
    fn stems_are_sanitized() {
        assert_eq!(file_stem("a b/c"), "a_b_c");
        assert_eq!(file_stem(""), "report");
    }
}
