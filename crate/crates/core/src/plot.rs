//! Minimal SVG rendering of class bands and training curves.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cgan::TrainingHistory;
use crate::data::ClassBandStats;
use crate::error::{Error, Result};
use crate::SERIES_LEN;

/// Image size in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotSize {
    pub width: f64,
    pub height: f64,
}

impl Default for PlotSize {
    fn default() -> Self {
        Self {
            width: 640.0,
            height: 400.0,
        }
    }
}

impl PlotSize {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64, min: f64| v.is_finite() && v >= min;
        if !ok(self.width, 200.0) || !ok(self.height, 160.0) {
            return Err(Error::Config(format!(
                "plot size must be at least 200x160 pixels, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }
}

const MARGIN_L: f64 = 60.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 60.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64), left: f64, top: f64, width: f64, height: f64) -> Self {
        let (mut y0, mut y1) = y;
        if !(y1 > y0) {
            y0 -= 1.0;
            y1 += 1.0;
        }
        Frame {
            x0: x.0,
            x1: x.1,
            y0,
            y1,
            left,
            top,
            width,
            height,
        }
    }

    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0).max(f64::MIN_POSITIVE) * self.width
    }

    fn py(&self, y: f64) -> f64 {
        self.top + self.height - (y - self.y0) / (self.y1 - self.y0) * self.height
    }

    fn polyline(&self, xs: &[f64], ys: &[f64]) -> String {
        let mut s = String::new();
        for (x, y) in xs.iter().zip(ys) {
            write!(s, "{:.2},{:.2} ", self.px(*x), self.py(*y)).expect("string write");
        }
        s.trim_end().to_string()
    }

    fn band(&self, xs: &[f64], lo: &[f64], hi: &[f64]) -> String {
        let mut s = String::new();
        for (x, y) in xs.iter().zip(hi) {
            write!(s, "{:.2},{:.2} ", self.px(*x), self.py(*y)).expect("string write");
        }
        for (x, y) in xs.iter().zip(lo).rev() {
            write!(s, "{:.2},{:.2} ", self.px(*x), self.py(*y)).expect("string write");
        }
        s.trim_end().to_string()
    }

    fn axes(&self, out: &mut String, x_label: &str, y_label: &str, x_ticks: &[f64]) {
        let (l, t, w, h) = (self.left, self.top, self.width, self.height);
        writeln!(
            out,
            r#"<rect x="{l}" y="{t}" width="{w}" height="{h}" fill="none" stroke="black"/>"#
        )
        .expect("string write");
        for &x in x_ticks {
            let px = self.px(x);
            writeln!(
                out,
                r#"<line x1="{px:.2}" y1="{b}" x2="{px:.2}" y2="{b2}" stroke="black"/><text x="{px:.2}" y="{ty}" font-size="11" text-anchor="middle">{x}</text>"#,
                b = t + h,
                b2 = t + h + 4.0,
                ty = t + h + 16.0
            )
            .expect("string write");
        }
        for i in 0..=4 {
            let v = self.y0 + (self.y1 - self.y0) * i as f64 / 4.0;
            let py = self.py(v);
            writeln!(
                out,
                r#"<line x1="{x1}" y1="{py:.2}" x2="{l}" y2="{py:.2}" stroke="black"/><text x="{tx}" y="{ty:.2}" font-size="11" text-anchor="end">{v:.3}</text>"#,
                x1 = l - 4.0,
                tx = l - 6.0,
                ty = py + 4.0
            )
            .expect("string write");
        }
        writeln!(
            out,
            r#"<text x="{cx}" y="{by}" font-size="12" text-anchor="middle">{x_label}</text>"#,
            cx = l + w / 2.0,
            by = t + h + 32.0
        )
        .expect("string write");
        writeln!(
            out,
            r#"<text x="14" y="{cy}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {cy})">{y_label}</text>"#,
            cy = t + h / 2.0
        )
        .expect("string write");
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str, size: PlotSize) {
    let PlotSize { width, height } = size;
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    )
    .expect("string write");
    writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#).expect("string write");
    writeln!(
        out,
        r#"<text x="{}" y="22" font-size="14" text-anchor="middle">{}</text>"#,
        size.width / 2.0,
        escape(title)
    )
    .expect("string write");
}

/// Hourly band plot: min-max envelope, mean ± stdev band and mean line,
/// optionally overlaid with a dashed reference mean. Negative values are
/// drawn at zero and noted in a caption.
pub fn band_plot_svg(
    stats: &ClassBandStats,
    real_mean: Option<&[f64; SERIES_LEN]>,
    title: &str,
    size: PlotSize,
) -> String {
    let PlotSize { width, height } = size;
    let hours: Vec<f64> = (0..SERIES_LEN).map(|h| h as f64).collect();
    let mut clipped = false;
    let mut clip = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|&x| {
                if x < 0.0 {
                    clipped = true;
                    0.0
                } else {
                    x
                }
            })
            .collect()
    };
    let lo = clip(&stats.min);
    let hi = clip(&stats.max);
    let sd_lo = clip(&std::array::from_fn::<f64, SERIES_LEN, _>(|h| stats.mean[h] - stats.stdev[h]));
    let sd_hi = clip(&std::array::from_fn::<f64, SERIES_LEN, _>(|h| stats.mean[h] + stats.stdev[h]));
    let mean = clip(&stats.mean);
    let reference = real_mean.map(|m| clip(m));

    let mut y_max = hi.iter().chain(&sd_hi).copied().fold(0.0, f64::max);
    if let Some(r) = &reference {
        y_max = r.iter().copied().fold(y_max, f64::max);
    }
    let frame = Frame::new(
        (0.0, (SERIES_LEN - 1) as f64),
        (0.0, y_max * 1.05),
        MARGIN_L,
        MARGIN_T,
        width - MARGIN_L - MARGIN_R,
        height - MARGIN_T - MARGIN_B,
    );

    let mut out = String::new();
    header(&mut out, title, size);
    writeln!(
        out,
        r##"<polygon points="{}" fill="#9ecae1" fill-opacity="0.5" stroke="none"/>"##,
        frame.band(&hours, &lo, &hi)
    )
    .expect("string write");
    writeln!(
        out,
        r##"<polygon points="{}" fill="#3182bd" fill-opacity="0.5" stroke="none"/>"##,
        frame.band(&hours, &sd_lo, &sd_hi)
    )
    .expect("string write");
    writeln!(
        out,
        r##"<polyline points="{}" fill="none" stroke="#08306b" stroke-width="2"/>"##,
        frame.polyline(&hours, &mean)
    )
    .expect("string write");
    if let Some(r) = &reference {
        writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#d62728" stroke-width="2" stroke-dasharray="6,4"/>"##,
            frame.polyline(&hours, r)
        )
        .expect("string write");
    }
    let ticks: Vec<f64> = (0..SERIES_LEN).step_by(3).map(|h| h as f64).collect();
    frame.axes(&mut out, "hour", "NO2 (µg/m³)", &ticks);
    let mut caption = format!("n = {}", stats.count);
    if reference.is_some() {
        caption.push_str("; dashed: real mean");
    }
    if clipped {
        caption.push_str("; values below 0 drawn at 0");
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">{}</text>"#,
        width / 2.0,
        height - 8.0,
        escape(&caption)
    )
    .expect("string write");
    out.push_str("</svg>\n");
    out
}

/// Two stacked panels: both losses per epoch, and mean RMSE per epoch.
pub fn history_plot_svg(history: &TrainingHistory, title: &str, size: PlotSize) -> Result<String> {
    let PlotSize { width, height } = size;
    let recs = &history.records;
    if recs.is_empty() {
        return Err(Error::Data("training history is empty".into()));
    }
    let epochs: Vec<f64> = recs.iter().map(|r| r.epoch as f64).collect();
    let d: Vec<f64> = recs.iter().map(|r| r.d_loss).collect();
    let g: Vec<f64> = recs.iter().map(|r| r.g_loss).collect();
    let e: Vec<f64> = recs.iter().map(|r| r.mean_rmse).collect();
    let range = |v: &[f64]| {
        let lo = v.iter().copied().filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().filter(|x| x.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() {
            (lo, hi)
        } else {
            (0.0, 1.0)
        }
    };
    let (dl, dh) = range(&d);
    let (gl, gh) = range(&g);
    let x = (epochs[0], *epochs.last().expect("non-empty"));
    let x = if x.1 > x.0 { x } else { (x.0 - 1.0, x.0 + 1.0) };
    let panel_h = (height - MARGIN_T - 2.0 * MARGIN_B + 20.0) / 2.0;
    let w = width - MARGIN_L - MARGIN_R;
    let top = Frame::new(x, (dl.min(gl), dh.max(gh)), MARGIN_L, MARGIN_T, w, panel_h);
    let bottom = Frame::new(x, range(&e), MARGIN_L, MARGIN_T + panel_h + MARGIN_B - 10.0, w, panel_h);

    let mut out = String::new();
    header(&mut out, title, size);
    let ticks: Vec<f64> = (0..=4).map(|i| (x.0 + (x.1 - x.0) * i as f64 / 4.0).round()).collect();
    for (frame, series) in [
        (&top, vec![(&d, "#1f77b4", "D loss"), (&g, "#ff7f0e", "G loss")]),
        (&bottom, vec![(&e, "#2ca02c", "mean RMSE")]),
    ] {
        for (k, (ys, colour, name)) in series.iter().enumerate() {
            writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
                frame.polyline(&epochs, ys)
            )
            .expect("string write");
            writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="11" fill="{colour}" text-anchor="end">{name}</text>"#,
                frame.left + frame.width - 6.0,
                frame.top + 14.0 + 14.0 * k as f64
            )
            .expect("string write");
        }
    }
    top.axes(&mut out, "epoch", "loss", &ticks);
    bottom.axes(&mut out, "epoch", "RMSE", &ticks);
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn save_svg(svg: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}
