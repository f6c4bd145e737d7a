//! Experiment results: rows, checks, CSV and SVG emission.

use std::fmt::Write as _;
use std::path::Path;

use crate::deform::Hypotheses;
use crate::error::{Error, Result};

use super::config::ExperimentKind;
use super::fit::ExponentFit;

pub const CSV_HEADER: &str =
    "rung,bandwidth,tau_sup,jacobian_sup,input_error,feature_error,fitted_alpha,fitted_log_constant,fitted_error,hypotheses";

/// Independent variable of a fitted group of rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variable {
    Tau,
    Bandwidth,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitGroup {
    pub variable: Variable,
    pub fit: Option<ExponentFit>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub rung: usize,
    pub bandwidth: Option<f64>,
    pub tau_sup: f64,
    pub jacobian_sup: f64,
    pub input_error: f64,
    pub feature_error: f64,
    pub hypotheses: Hypotheses,
    /// Index into [`Report::groups`].
    pub group: usize,
}

impl Row {
    pub fn abscissa(&self, v: Variable) -> f64 {
        match v {
            Variable::Tau => self.tau_sup,
            Variable::Bandwidth => self.bandwidth.unwrap_or(f64::NAN),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub rows: Vec<Row>,
    pub groups: Vec<FitGroup>,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Fit of the first group.
    pub fn fit(&self) -> Option<&ExponentFit> {
        self.groups.first().and_then(|g| g.fit.as_ref())
    }

    pub fn group_rows(&self, group: usize) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(move |r| r.group == group)
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let g = &self.groups[r.group];
            let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.17e}"));
            let (alpha, logc, pred) = match &g.fit {
                Some(f) => (
                    Some(f.alpha),
                    Some(f.log_constant),
                    Some(f.predict(r.abscissa(g.variable))),
                ),
                None => (None, None, None),
            };
            let _ = writeln!(
                out,
                "{},{},{:.17e},{:.17e},{:.17e},{:.17e},{},{},{},{}",
                r.rung,
                opt(r.bandwidth),
                r.tau_sup,
                r.jacobian_sup,
                r.input_error,
                r.feature_error,
                opt(alpha),
                opt(logc),
                opt(pred),
                r.hypotheses.tag()
            );
        }
        out
    }

    /// Log-log plot of the first group: input errors, feature errors and
    /// the fitted line.
    pub fn to_svg(&self) -> String {
        let variable = self.groups.first().map_or(Variable::Tau, |g| g.variable);
        let pts: Vec<(f64, f64, f64)> = self
            .group_rows(0)
            .map(|r| (r.abscissa(variable), r.input_error, r.feature_error))
            .filter(|p| p.0 > 0.0)
            .collect();
        let xlabel = match variable {
            Variable::Tau => "|tau|_inf",
            Variable::Bandwidth => "bandwidth R",
        };
        let title = format!("{} experiment", self.experiment.name());
        let fit_line = self.fit().map(|f| {
            let lo = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
            let hi = pts.iter().map(|p| p.0).fold(0.0, f64::max);
            [(lo, f.predict(lo)), (hi, f.predict(hi))]
        });
        loglog_svg(&title, xlabel, "error", &pts, fit_line)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let csv = dir.join("results.csv");
        std::fs::write(&csv, self.to_csv()).map_err(|e| Error::io(&csv, e))?;
        let svg = dir.join("plot.svg");
        std::fs::write(&svg, self.to_svg()).map_err(|e| Error::io(&svg, e))?;
        Ok(())
    }
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 70.0;

fn loglog_svg(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    pts: &[(f64, f64, f64)],
    fit: Option<[(f64, f64); 2]>,
) -> String {
    let mut ys: Vec<f64> = pts
        .iter()
        .flat_map(|p| [p.1, p.2])
        .filter(|v| *v > 0.0)
        .collect();
    if let Some(line) = &fit {
        ys.extend(
            line.iter()
                .map(|p| p.1)
                .filter(|v| *v > 0.0 && v.is_finite()),
        );
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let range = |v: &[f64]| {
        if v.is_empty() {
            return (0.0, 1.0);
        }
        let lo = v
            .iter()
            .map(|x| x.log10())
            .fold(f64::INFINITY, f64::min)
            .floor();
        let hi = v
            .iter()
            .map(|x| x.log10())
            .fold(f64::NEG_INFINITY, f64::max)
            .ceil();
        if hi > lo {
            (lo, hi)
        } else {
            (lo, lo + 1.0)
        }
    };
    let (x0, x1) = range(&xs);
    let (y0, y1) = range(&ys);
    let sx = |x: f64| MARGIN + (x.log10() - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let sy = |y: f64| H - MARGIN - (y.log10() - y0) / (y1 - y0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{title}</text>"#,
        W / 2.0
    );
    // axes and decade ticks
    let _ = writeln!(
        s,
        r#"<path d="M{m} {t} L{m} {b} L{r} {b}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    for k in (x0 as i32)..=(x1 as i32) {
        let x = sx(10f64.powi(k));
        let _ = writeln!(
            s,
            r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#ddd"/><text x="{x:.2}" y="{}" text-anchor="middle">1e{k}</text>"##,
            MARGIN,
            H - MARGIN,
            H - MARGIN + 18.0
        );
    }
    for k in (y0 as i32)..=(y1 as i32) {
        let y = sy(10f64.powi(k));
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{k}</text>"##,
            MARGIN,
            W - MARGIN,
            MARGIN - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{xlabel}</text>"#,
        W / 2.0,
        H - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{}" text-anchor="middle" transform="rotate(-90 20 {})">{ylabel}</text>"#,
        H / 2.0,
        H / 2.0
    );
    let series = |s: &mut String, pick: fn(&(f64, f64, f64)) -> f64, colour: &str| {
        let kept: Vec<(f64, f64)> = pts
            .iter()
            .filter(|p| pick(p) > 0.0)
            .map(|p| (sx(p.0), sy(pick(p))))
            .collect();
        if kept.is_empty() {
            return;
        }
        let d: Vec<String> = kept.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" stroke="{colour}" fill="none"/>"#,
            d.join(" ")
        );
        for (x, y) in kept {
            let _ = writeln!(
                s,
                r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{colour}"/>"#
            );
        }
    };
    series(&mut s, |p| p.1, "gray");
    series(&mut s, |p| p.2, "steelblue");
    if let Some([(a, fa), (b, fb)]) = fit {
        if fa > 0.0 && fb > 0.0 && a > 0.0 && b > 0.0 {
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson" stroke-dasharray="6 4"/>"#,
                sx(a),
                sy(fa),
                sx(b),
                sy(fb)
            );
        }
    }
    let legend = [
        ("gray", "input error"),
        ("steelblue", "feature error"),
        ("crimson", "fit"),
    ];
    for (i, (c, label)) in legend.iter().enumerate() {
        let y = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="10" height="10" fill="{c}"/><text x="{}" y="{}">{label}</text>"#,
            W - MARGIN - 110.0,
            y,
            W - MARGIN - 95.0,
            y + 9.0
        );
    }
    s.push_str("</svg>\n");
    s
}
