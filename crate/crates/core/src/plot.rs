//! Four-panel time-series figure (position, velocity, acceleration,
//! physical gap) rendered as a self-contained SVG: one polyline per
//! vehicle, a shared legend, and collision events marked on the position
//! panel.

use thiserror::Error;

use crate::engine::{CollisionEvent, TrajectoryLog};

#[derive(Debug, Error, PartialEq)]
pub enum PlotError {
    #[error("cannot render an empty trajectory log")]
    EmptyLog,
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

const PANEL_W: f64 = 760.0;
const PANEL_H: f64 = 180.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_TOP: f64 = 30.0;
const PANEL_GAP: f64 = 50.0;
const LEGEND_W: f64 = 110.0;

struct Panel {
    title: &'static str,
    y_label: &'static str,
    /// (t, value) series per vehicle, gaps in the data split the polyline
    series: Vec<(usize, Vec<(f64, f64)>)>,
}

fn data_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        // degenerate (single point or constant series)
        return (lo - 0.5, hi + 0.5);
    }
    let margin = (hi - lo) * 0.05;
    (lo - margin, hi + margin)
}

fn fmt(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    format!("{v:.2}")
}

/// Render the trajectory log and collision events as one SVG document with
/// four stacked panels. No external resources are referenced.
pub fn render_timeseries_svg(
    log: &TrajectoryLog,
    events: &[CollisionEvent],
) -> Result<String, PlotError> {
    if log.records.is_empty() {
        return Err(PlotError::EmptyLog);
    }
    let ids = log.vehicle_ids();
    let collect = |f: fn(&crate::engine::LogRecord) -> Option<f64>| -> Vec<(usize, Vec<(f64, f64)>)> {
        ids.iter()
            .map(|&id| {
                let pts = log
                    .series(id)
                    .iter()
                    .filter_map(|r| f(r).map(|v| (r.t, v)))
                    .collect();
                (id, pts)
            })
            .collect()
    };
    let panels = [
        Panel {
            title: "Position",
            y_label: "x [m]",
            series: collect(|r| Some(r.x)),
        },
        Panel {
            title: "Velocity",
            y_label: "v [m/s]",
            series: collect(|r| Some(r.v)),
        },
        Panel {
            title: "Acceleration",
            y_label: "a [m/s^2]",
            series: collect(|r| Some(r.accel)),
        },
        Panel {
            title: "Gap to leading vehicle",
            y_label: "gap [m]",
            series: collect(|r| r.gap),
        },
    ];

    let (t_lo, t_hi) = data_range(log.records.iter().map(|r| r.t));
    let total_w = MARGIN_LEFT + PANEL_W + LEGEND_W + 20.0;
    let total_h = MARGIN_TOP + 4.0 * (PANEL_H + PANEL_GAP);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{total_w:.0}\" height=\"{total_h:.0}\" \
         viewBox=\"0 0 {total_w:.0} {total_h:.0}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    for (pi, panel) in panels.iter().enumerate() {
        let top = MARGIN_TOP + pi as f64 * (PANEL_H + PANEL_GAP);
        let (y_lo, y_hi) = data_range(
            panel
                .series
                .iter()
                .flat_map(|(_, pts)| pts.iter().map(|&(_, v)| v)),
        );
        let sx = |t: f64| MARGIN_LEFT + (t - t_lo) / (t_hi - t_lo) * PANEL_W;
        let sy = |v: f64| top + PANEL_H - (v - y_lo) / (y_hi - y_lo) * PANEL_H;

        svg.push_str(&format!(
            "<rect x=\"{MARGIN_LEFT}\" y=\"{top}\" width=\"{PANEL_W}\" height=\"{PANEL_H}\" \
             fill=\"none\" stroke=\"black\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-weight=\"bold\">{}</text>\n",
            MARGIN_LEFT,
            top - 8.0,
            panel.title
        ));
        // axis extremes
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 6.0,
            top + 12.0,
            fmt(y_hi)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT - 6.0,
            top + PANEL_H,
            fmt(y_lo)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\" transform=\"rotate(-90 {} {})\">{}</text>\n",
            MARGIN_LEFT - 40.0,
            top + PANEL_H / 2.0,
            MARGIN_LEFT - 40.0,
            top + PANEL_H / 2.0,
            panel.y_label
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\">{}</text>\n<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_LEFT,
            top + PANEL_H + 16.0,
            fmt(t_lo),
            MARGIN_LEFT + PANEL_W,
            top + PANEL_H + 16.0,
            fmt(t_hi)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">t [s]</text>\n",
            MARGIN_LEFT + PANEL_W / 2.0,
            top + PANEL_H + 16.0
        ));

        for (si, (id, pts)) in panel.series.iter().enumerate() {
            if pts.is_empty() {
                continue;
            }
            let color = PALETTE[si % PALETTE.len()];
            if pts.len() == 1 {
                svg.push_str(&format!(
                    "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>\n",
                    sx(pts[0].0),
                    sy(pts[0].1)
                ));
                continue;
            }
            let points: Vec<String> = pts
                .iter()
                .map(|&(t, v)| format!("{:.2},{:.2}", sx(t), sy(v)))
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\" points=\"{}\">\
                 <title>vehicle {id}</title></polyline>\n",
                points.join(" ")
            ));
        }

        // collision marks belong on the position panel
        if pi == 0 {
            for e in events {
                let x_at = log
                    .series(e.follower)
                    .iter()
                    .min_by(|a, b| (a.t - e.t).abs().total_cmp(&(b.t - e.t).abs()))
                    .map(|r| r.x);
                if let Some(x) = x_at {
                    let (cx, cy) = (sx(e.t), sy(x));
                    svg.push_str(&format!(
                        "<g stroke=\"red\" stroke-width=\"2\">\
                         <line x1=\"{a:.2}\" y1=\"{b:.2}\" x2=\"{c:.2}\" y2=\"{d:.2}\"/>\
                         <line x1=\"{a:.2}\" y1=\"{d:.2}\" x2=\"{c:.2}\" y2=\"{b:.2}\"/>\
                         </g>\n<circle cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"7\" fill=\"none\" stroke=\"red\"/>\n",
                        a = cx - 5.0,
                        b = cy - 5.0,
                        c = cx + 5.0,
                        d = cy + 5.0,
                    ));
                }
            }
        }
    }

    // legend
    let lx = MARGIN_LEFT + PANEL_W + 15.0;
    for (si, id) in ids.iter().enumerate() {
        let ly = MARGIN_TOP + 14.0 * si as f64 + 10.0;
        let color = PALETTE[si % PALETTE.len()];
        svg.push_str(&format!(
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" stroke-width=\"2\"/>\
             <text x=\"{}\" y=\"{}\">vehicle {id}</text>\n",
            lx + 18.0,
            lx + 24.0,
            ly + 4.0
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}
