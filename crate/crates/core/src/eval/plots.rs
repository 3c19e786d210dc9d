//! Interval-plot and boxplot summaries of per-model MRE samples, written as
//! CSV with a plain SVG rendering alongside.
//!
//! `interval.csv` columns: `model,n,mean,std_dev,t_quantile,ci_lower,ci_upper`.
//! `boxplot.csv` columns:
//! `model,n,min,q1,median,q3,max,whisker_low,whisker_high,outliers`, where
//! `outliers` is a semicolon-separated list.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};
use crate::eval::metrics::median;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntervalRecord {
    pub model: String,
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub t_quantile: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoxRecord {
    pub model: String,
    pub n: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

fn nonempty(model: &str, sample: &[f64]) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::Argument(format!("no values for model {model}")));
    }
    if sample.iter().any(|v| !v.is_finite()) {
        return Err(Error::Argument(format!("non-finite value for model {model}")));
    }
    Ok(())
}

/// Mean with a 95% Student-t confidence interval; a single value or a
/// constant sample gives a zero-width interval.
pub fn interval(model: &str, sample: &[f64]) -> Result<IntervalRecord> {
    nonempty(model, sample)?;
    let n = sample.len();
    let constant = sample.iter().all(|v| *v == sample[0]);
    let mean = if constant {
        sample[0]
    } else {
        sample.iter().sum::<f64>() / n as f64
    };
    if n == 1 || constant {
        return Ok(IntervalRecord {
            model: model.into(),
            n,
            mean,
            std_dev: 0.0,
            t_quantile: if n == 1 { 0.0 } else { t_975(n - 1) },
            ci_lower: mean,
            ci_upper: mean,
        });
    }
    let var = sample.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    let sd = var.sqrt();
    let t = t_975(n - 1);
    let half = t * sd / (n as f64).sqrt();
    Ok(IntervalRecord {
        model: model.into(),
        n,
        mean,
        std_dev: sd,
        t_quantile: t,
        ci_lower: mean - half,
        ci_upper: mean + half,
    })
}

fn t_975(dof: usize) -> f64 {
    StudentsT::new(0.0, 1.0, dof as f64)
        .expect("degrees of freedom are positive")
        .inverse_cdf(0.975)
}

/// Five-number summary with Tukey hinges (the median is shared by both
/// halves when the count is odd) and 1.5 IQR fences.
pub fn boxplot(model: &str, sample: &[f64]) -> Result<BoxRecord> {
    nonempty(model, sample)?;
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let half = n.div_ceil(2);
    let q1 = median(&v[..half]);
    let q3 = median(&v[n - half..]);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside: Vec<f64> = v.iter().copied().filter(|x| *x >= lo_fence && *x <= hi_fence).collect();
    Ok(BoxRecord {
        model: model.into(),
        n,
        min: v[0],
        q1,
        median: median(&v),
        q3,
        max: v[n - 1],
        whisker_low: inside.first().copied().unwrap_or(q1),
        whisker_high: inside.last().copied().unwrap_or(q3),
        outliers: v.iter().copied().filter(|x| *x < lo_fence || *x > hi_fence).collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotFiles {
    pub interval_csv: PathBuf,
    pub boxplot_csv: PathBuf,
    pub interval_svg: PathBuf,
    pub boxplot_svg: PathBuf,
}

/// Writes `interval.csv`, `boxplot.csv`, `interval.svg` and `boxplot.svg`
/// into `out_dir` (created if missing), one row or glyph per model.
pub fn emit_plot_data(samples: &BTreeMap<String, Vec<f64>>, out_dir: &Path) -> Result<PlotFiles> {
    if samples.is_empty() {
        return Err(Error::Argument("no models to plot".into()));
    }
    let intervals: Vec<IntervalRecord> = samples.iter().map(|(m, s)| interval(m, s)).collect::<Result<_>>()?;
    let boxes: Vec<BoxRecord> = samples.iter().map(|(m, s)| boxplot(m, s)).collect::<Result<_>>()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = PlotFiles {
        interval_csv: out_dir.join("interval.csv"),
        boxplot_csv: out_dir.join("boxplot.csv"),
        interval_svg: out_dir.join("interval.svg"),
        boxplot_svg: out_dir.join("boxplot.svg"),
    };

    let mut w = csv::Writer::from_path(&files.interval_csv).map_err(|e| csv_io(&files.interval_csv, e))?;
    w.write_record(["model", "n", "mean", "std_dev", "t_quantile", "ci_lower", "ci_upper"])?;
    for r in &intervals {
        w.write_record([
            r.model.clone(),
            r.n.to_string(),
            r.mean.to_string(),
            r.std_dev.to_string(),
            r.t_quantile.to_string(),
            r.ci_lower.to_string(),
            r.ci_upper.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&files.interval_csv, e))?;

    let mut w = csv::Writer::from_path(&files.boxplot_csv).map_err(|e| csv_io(&files.boxplot_csv, e))?;
    w.write_record([
        "model",
        "n",
        "min",
        "q1",
        "median",
        "q3",
        "max",
        "whisker_low",
        "whisker_high",
        "outliers",
    ])?;
    for r in &boxes {
        let outliers: Vec<String> = r.outliers.iter().map(f64::to_string).collect();
        w.write_record([
            r.model.clone(),
            r.n.to_string(),
            r.min.to_string(),
            r.q1.to_string(),
            r.median.to_string(),
            r.q3.to_string(),
            r.max.to_string(),
            r.whisker_low.to_string(),
            r.whisker_high.to_string(),
            outliers.join(";"),
        ])?;
    }
    w.flush().map_err(|e| Error::io(&files.boxplot_csv, e))?;

    write(&files.interval_svg, &interval_svg(&intervals))?;
    write(&files.boxplot_svg, &boxplot_svg(&boxes))?;
    Ok(files)
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::other(format!("{other:?}")),
        },
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 48.0;

struct Scale {
    lo: f64,
    hi: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64) -> Scale {
        let pad = if hi > lo {
            0.05 * (hi - lo)
        } else {
            0.5f64.max(hi.abs() * 0.1)
        };
        Scale {
            lo: lo - pad,
            hi: hi + pad,
        }
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - MARGIN - (v - self.lo) / (self.hi - self.lo) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn frame(title: &str, scale: &Scale, labels: &[&str], body: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{title}</text>"#,
        WIDTH / 2.0
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{}" stroke="black"/>"#,
        HEIGHT - MARGIN
    );
    for k in 0..=4 {
        let v = scale.lo + (scale.hi - scale.lo) * k as f64 / 4.0;
        let y = scale.y(v);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{y:.1}" text-anchor="end">{v:.3}</text>"#,
            MARGIN - 4.0
        );
    }
    let slot = (WIDTH - 2.0 * MARGIN) / labels.len() as f64;
    for (i, l) in labels.iter().enumerate() {
        let x = MARGIN + slot * (i as f64 + 0.5);
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{}" text-anchor="middle">{l}</text>"#,
            HEIGHT - MARGIN + 16.0
        );
    }
    s.push_str(body);
    s.push_str("</svg>\n");
    s
}

fn slot_x(i: usize, count: usize) -> f64 {
    MARGIN + (WIDTH - 2.0 * MARGIN) / count as f64 * (i as f64 + 0.5)
}

fn interval_svg(rows: &[IntervalRecord]) -> String {
    let lo = rows.iter().map(|r| r.ci_lower).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.ci_upper).fold(f64::NEG_INFINITY, f64::max);
    let scale = Scale::new(lo, hi);
    let mut body = String::new();
    for (i, r) in rows.iter().enumerate() {
        let x = slot_x(i, rows.len());
        let (y0, y1, ym) = (scale.y(r.ci_lower), scale.y(r.ci_upper), scale.y(r.mean));
        let _ = writeln!(
            body,
            r#"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{y1:.1}" stroke="black"/>"#
        );
        for y in [y0, y1] {
            let _ = writeln!(
                body,
                r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black"/>"#,
                x - 10.0,
                x + 10.0
            );
        }
        let _ = writeln!(body, r#"<circle cx="{x:.1}" cy="{ym:.1}" r="3"/>"#);
    }
    let labels: Vec<&str> = rows.iter().map(|r| r.model.as_str()).collect();
    frame("Mean MRE with 95% CI", &scale, &labels, &body)
}

fn boxplot_svg(rows: &[BoxRecord]) -> String {
    let lo = rows.iter().map(|r| r.min).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.max).fold(f64::NEG_INFINITY, f64::max);
    let scale = Scale::new(lo, hi);
    let mut body = String::new();
    for (i, r) in rows.iter().enumerate() {
        let x = slot_x(i, rows.len());
        let (q1, q3, md) = (scale.y(r.q1), scale.y(r.q3), scale.y(r.median));
        let (wl, wh) = (scale.y(r.whisker_low), scale.y(r.whisker_high));
        let _ = writeln!(
            body,
            r#"<rect x="{:.1}" y="{q3:.1}" width="40" height="{:.1}" fill="none" stroke="black"/>"#,
            x - 20.0,
            (q1 - q3).max(0.0)
        );
        let _ = writeln!(
            body,
            r#"<line x1="{:.1}" y1="{md:.1}" x2="{:.1}" y2="{md:.1}" stroke="black" stroke-width="2"/>"#,
            x - 20.0,
            x + 20.0
        );
        let _ = writeln!(
            body,
            r#"<line x1="{x:.1}" y1="{q3:.1}" x2="{x:.1}" y2="{wh:.1}" stroke="black"/>"#
        );
        let _ = writeln!(
            body,
            r#"<line x1="{x:.1}" y1="{q1:.1}" x2="{x:.1}" y2="{wl:.1}" stroke="black"/>"#
        );
        for o in &r.outliers {
            let _ = writeln!(
                body,
                r#"<circle cx="{x:.1}" cy="{:.1}" r="2.5" fill="none" stroke="black"/>"#,
                scale.y(*o)
            );
        }
    }
    let labels: Vec<&str> = rows.iter().map(|r| r.model.as_str()).collect();
    frame("MRE distribution", &scale, &labels, &body)
}
