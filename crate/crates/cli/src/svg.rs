//! Minimal SVG line plots: polylines, axes, ticks, and a legend. Figure
//! conventions follow the experiments: solid slave, dashed/dotted master.

use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LineStyle {
    Solid,
    Dashed,
    Dotted,
}

impl LineStyle {
    fn dash_array(self) -> &'static str {
        match self {
            LineStyle::Solid => "none",
            LineStyle::Dashed => "7 4",
            LineStyle::Dotted => "1.5 3.5",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub style: LineStyle,
    pub color: &'static str,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

const MARGIN_L: f64 = 52.0;
const MARGIN_R: f64 = 12.0;
const MARGIN_T: f64 = 28.0;
const MARGIN_B: f64 = 40.0;

fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi - lo).is_finite() || hi <= lo {
        return vec![lo];
    }
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    } * mag;
    let first = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut t = first;
    while t <= hi + 1e-9 * step {
        // Snap tiny roundoff to exact zero so labels stay clean.
        ticks.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.3}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

/// Render panels side by side into a standalone SVG document.
pub fn render(panels: &[Panel], width: u32, height: u32) -> String {
    let mut svg = String::new();
    let _ = write!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"11\">\n"
    );
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    let panel_w = width as f64 / panels.len().max(1) as f64;
    for (idx, panel) in panels.iter().enumerate() {
        let x_off = idx as f64 * panel_w;
        render_panel(&mut svg, panel, x_off, panel_w, height as f64);
    }
    svg.push_str("</svg>\n");
    svg
}

fn data_range(series: &[Series]) -> ((f64, f64), (f64, f64)) {
    let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
    let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
    for s in series {
        for &(x, y) in &s.points {
            if x.is_finite() {
                xr.0 = xr.0.min(x);
                xr.1 = xr.1.max(x);
            }
            if y.is_finite() {
                yr.0 = yr.0.min(y);
                yr.1 = yr.1.max(y);
            }
        }
    }
    if !xr.0.is_finite() {
        xr = (0.0, 1.0);
    }
    if !yr.0.is_finite() {
        yr = (0.0, 1.0);
    }
    if xr.1 <= xr.0 {
        xr.1 = xr.0 + 1.0;
    }
    let pad = 0.05 * (yr.1 - yr.0).max(1e-12);
    ((xr.0, xr.1), (yr.0 - pad, yr.1 + pad))
}

fn render_panel(svg: &mut String, panel: &Panel, x_off: f64, panel_w: f64, panel_h: f64) {
    let ((x_lo, x_hi), (y_lo, y_hi)) = data_range(&panel.series);
    let plot_x = x_off + MARGIN_L;
    let plot_y = MARGIN_T;
    let plot_w = panel_w - MARGIN_L - MARGIN_R;
    let plot_h = panel_h - MARGIN_T - MARGIN_B;
    let sx = move |x: f64| plot_x + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = move |y: f64| plot_y + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

    // Frame and title.
    let _ = write!(
        svg,
        "<rect x=\"{plot_x:.2}\" y=\"{plot_y:.2}\" width=\"{plot_w:.2}\" height=\"{plot_h:.2}\" \
         fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n"
    );
    let _ = write!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
        plot_x + plot_w / 2.0,
        MARGIN_T - 10.0,
        xml_escape(&panel.title)
    );

    // Ticks.
    for t in nice_ticks(x_lo, x_hi, 6) {
        let x = sx(t);
        let _ = write!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#444\"/>\n",
            plot_y + plot_h,
            plot_y + plot_h + 4.0
        );
        let _ = write!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
            plot_y + plot_h + 16.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(y_lo, y_hi, 5) {
        let y = sy(t);
        let _ = write!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#444\"/>\n",
            plot_x - 4.0,
            plot_x
        );
        let _ = write!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>\n",
            plot_x - 7.0,
            y + 3.5,
            fmt_tick(t)
        );
    }

    // Axis labels.
    let _ = write!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
        plot_x + plot_w / 2.0,
        plot_y + plot_h + 32.0,
        xml_escape(&panel.x_label)
    );
    let _ = write!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 {:.2} {:.2})\">{}</text>\n",
        x_off + 14.0,
        plot_y + plot_h / 2.0,
        x_off + 14.0,
        plot_y + plot_h / 2.0,
        xml_escape(&panel.y_label)
    );

    // Series.
    for s in &panel.series {
        if s.points.is_empty() {
            continue;
        }
        let mut d = String::new();
        for (k, &(x, y)) in s.points.iter().enumerate() {
            let _ = write!(d, "{}{:.2},{:.2} ", if k == 0 { "" } else { "" }, sx(x), sy(y));
        }
        let _ = write!(
            svg,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" \
             stroke-dasharray=\"{}\"/>\n",
            d.trim_end(),
            s.color,
            s.style.dash_array()
        );
    }

    // Legend, top-right inside the frame.
    let mut ly = plot_y + 14.0;
    for s in &panel.series {
        let lx = plot_x + plot_w - 110.0;
        let _ = write!(
            svg,
            "<line x1=\"{lx:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{}\" \
             stroke-width=\"1.2\" stroke-dasharray=\"{}\"/>\n",
            ly - 3.5,
            lx + 24.0,
            ly - 3.5,
            s.color,
            s.style.dash_array()
        );
        let _ = write!(
            svg,
            "<text x=\"{:.2}\" y=\"{ly:.2}\">{}</text>\n",
            lx + 30.0,
            xml_escape(&s.label)
        );
        ly += 14.0;
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Thin out a sampled curve to at most `max_points` vertices.
pub fn decimate(points: Vec<(f64, f64)>, max_points: usize) -> Vec<(f64, f64)> {
    if points.len() <= max_points {
        return points;
    }
    let stride = points.len().div_ceil(max_points);
    let mut out: Vec<(f64, f64)> = points.iter().step_by(stride).copied().collect();
    if let (Some(&last), Some(&tail)) = (points.last(), out.last()) {
        if tail != last {
            out.push(last);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_document_is_wellformed_enough() {
        let panel = Panel {
            title: "demo".into(),
            x_label: "t".into(),
            y_label: "x".into(),
            series: vec![Series {
                label: "x1".into(),
                style: LineStyle::Solid,
                color: "#000",
                points: (0..100).map(|k| (k as f64 * 0.1, (k as f64 * 0.1).sin())).collect(),
            }],
        };
        let svg = render(&[panel.clone(), panel], 900, 360);
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("</svg>").count(), 1);
    }

    #[test]
    fn decimation_keeps_endpoints() {
        let pts: Vec<(f64, f64)> = (0..10_000).map(|k| (k as f64, k as f64)).collect();
        let dec = decimate(pts.clone(), 500);
        assert!(dec.len() <= 502);
        assert_eq!(dec.first(), pts.first());
        assert_eq!(dec.last(), pts.last());
    }

    #[test]
    fn ticks_cover_range_with_nice_steps() {
        let ticks = nice_ticks(0.0, 9.83, 6);
        assert!(ticks.len() >= 4 && ticks.len() <= 12);
        assert!(ticks.windows(2).all(|w| w[1] > w[0]));
    }
}
