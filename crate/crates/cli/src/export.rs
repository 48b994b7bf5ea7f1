//! Sampled tables and static SVG plots.
//!
//! The SVG has three panels: the planar projection `(x, y)`, the height
//! profile `z(t)`, and the tantrix under stereographic projection from the
//! north pole drawn together with its antipodal image. A skew loop is one
//! whose tantrix never meets that image.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use skewloop_core::io::Document;
use skewloop_core::oval::make_support_oval;
use skewloop_core::{SpaceCurve, Vec3};

use crate::config::Format;
use crate::CliError;

const PANEL: f64 = 300.0;
const PAD: f64 = 20.0;
/// Stereographic images farther out than this are clipped.
const STEREO_CLIP: f64 = 3.0;

pub struct Samples {
    pub t: Vec<f64>,
    pub p: Vec<Vec3>,
    pub v: Vec<Vec3>,
    pub tangent: Vec<Option<Vec3>>,
}

fn curve_of(doc: &Document) -> Result<SpaceCurve, CliError> {
    match doc {
        Document::Trigpoly(_) => {
            let h = doc.to_trigpoly()?;
            let s = make_support_oval(h).map_err(|e| CliError::Input(e.to_string()))?;
            Ok(s.to_curve())
        }
        _ => Ok(doc.to_curve()?),
    }
}

pub fn sample(curve: &SpaceCurve, n: usize) -> Samples {
    let period = curve.period();
    let t: Vec<f64> = (0..n).map(|j| period * j as f64 / n as f64).collect();
    let p = t.iter().map(|&s| curve.eval(s)).collect();
    let v: Vec<Vec3> = t.iter().map(|&s| curve.velocity(s)).collect();
    let tangent = v
        .iter()
        .map(|d| {
            let n = d.norm();
            (n > 0.0).then(|| d / n)
        })
        .collect();
    Samples { t, p, v, tangent }
}

pub fn render(doc: &Document, format: Format, n: usize) -> Result<String, CliError> {
    let curve = curve_of(doc)?;
    let s = sample(&curve, n);
    match format {
        Format::Csv => csv_table(&s),
        Format::Svg => Ok(svg(&s, curve.period())),
        Format::Json => Err(CliError::Input("export supports csv or svg".into())),
    }
}

fn csv_table(s: &Samples) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(["t", "x", "y", "z", "dx", "dy", "dz", "tx", "ty", "tz"])
        .map_err(io_err)?;
    for i in 0..s.t.len() {
        let tan = s.tangent[i].unwrap_or(Vec3::new(f64::NAN, f64::NAN, f64::NAN));
        let row = [
            s.t[i], s.p[i].x, s.p[i].y, s.p[i].z, s.v[i].x, s.v[i].y, s.v[i].z, tan.x, tan.y, tan.z,
        ];
        w.write_record(row.iter().map(|x| x.to_string())).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// Maps data coordinates into one panel, preserving aspect ratio when asked.
struct Frame {
    x0: f64,
    sx: f64,
    cx: f64,
    sy: f64,
    cy: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = (f64, f64)> + Clone, x0: f64, equal: bool) -> Self {
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for (x, y) in xs {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        if xmin > xmax {
            (xmin, xmax, ymin, ymax) = (-1.0, 1.0, -1.0, 1.0);
        }
        let span = PANEL - 2.0 * PAD;
        let wx = (xmax - xmin).max(1e-12);
        let wy = (ymax - ymin).max(1e-12);
        let (sx, sy) = if equal {
            let s = span / wx.max(wy);
            (s, s)
        } else {
            (span / wx, span / wy)
        };
        Frame {
            x0,
            sx,
            cx: 0.5 * (xmin + xmax),
            sy,
            cy: 0.5 * (ymin + ymax),
        }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.x0 + PANEL / 2.0 + self.sx * (x - self.cx),
            PANEL / 2.0 - self.sy * (y - self.cy),
        )
    }
}

/// SVG path data; `None` entries break the path.
fn path_data(frame: &Frame, pts: &[Option<(f64, f64)>], closed: bool) -> String {
    let mut d = String::new();
    let mut pen_down = false;
    for p in pts {
        match p {
            Some((x, y)) => {
                let (u, v) = frame.map(*x, *y);
                let _ = write!(d, "{}{u:.3} {v:.3} ", if pen_down { "L" } else { "M" });
                pen_down = true;
            }
            None => pen_down = false,
        }
    }
    if closed && pts.iter().all(Option::is_some) {
        d.push('Z');
    }
    d
}

fn stereographic(u: &Vec3) -> Option<(f64, f64)> {
    let denom = 1.0 - u.z;
    if denom <= 1e-12 {
        return None;
    }
    let (x, y) = (u.x / denom, u.y / denom);
    (x.hypot(y) <= STEREO_CLIP).then_some((x, y))
}

fn svg(s: &Samples, period: f64) -> String {
    let width = 3.0 * PANEL;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL}" viewBox="0 0 {width} {PANEL}">"#
    );
    let _ = writeln!(out, r#"<rect width="{width}" height="{PANEL}" fill="white"/>"#);

    let planar: Vec<Option<(f64, f64)>> = s.p.iter().map(|p| Some((p.x, p.y))).collect();
    let f1 = Frame::fit(planar.iter().flatten().copied(), 0.0, true);
    let _ = writeln!(
        out,
        r#"<path d="{}" fill="none" stroke="black" stroke-width="1.5"/>"#,
        path_data(&f1, &planar, true)
    );

    let mut height: Vec<Option<(f64, f64)>> = s.t.iter().zip(&s.p).map(|(&t, p)| Some((t, p.z))).collect();
    height.push(Some((period, s.p[0].z)));
    let f2 = Frame::fit(
        height.iter().flatten().copied().chain([(0.0, 0.0), (period, 0.0)]),
        PANEL,
        false,
    );
    let axis = path_data(&f2, &[Some((0.0, 0.0)), Some((period, 0.0))], false);
    let _ = writeln!(out, r#"<path d="{axis}" stroke="gray" stroke-dasharray="4 3"/>"#);
    let _ = writeln!(
        out,
        r#"<path d="{}" fill="none" stroke="navy" stroke-width="1.5"/>"#,
        path_data(&f2, &height, false)
    );

    let f3 = Frame::fit(
        [(-STEREO_CLIP, -STEREO_CLIP), (STEREO_CLIP, STEREO_CLIP)].into_iter(),
        2.0 * PANEL,
        true,
    );
    let equator: Vec<Option<(f64, f64)>> = (0..=128)
        .map(|j| {
            let a = TAU * j as f64 / 128.0;
            Some((a.cos(), a.sin()))
        })
        .collect();
    let _ = writeln!(
        out,
        r#"<path d="{}" fill="none" stroke="gray" stroke-dasharray="2 3"/>"#,
        path_data(&f3, &equator, false)
    );
    for (sign, colour) in [(1.0, "firebrick"), (-1.0, "seagreen")] {
        let pts: Vec<Option<(f64, f64)>> = s
            .tangent
            .iter()
            .map(|u| u.and_then(|u| stereographic(&(u * sign))))
            .collect();
        let _ = writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{colour}" stroke-width="1.2"/>"#,
            path_data(&f3, &pts, true)
        );
    }

    for (i, label) in ["planar projection", "height profile", "tantrix (red) and antipodal image (green)"]
        .iter()
        .enumerate()
    {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="14" font-family="sans-serif" font-size="12" text-anchor="middle">{label}</text>"#,
            PANEL * (i as f64 + 0.5)
        );
    }
    out.push_str("</svg>\n");
    out
}
