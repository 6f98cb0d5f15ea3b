//! Minimal SVG plotting: line charts with optional log axes and polar
//! heatmaps. Written directly so runs have no plotting dependencies.

use germkit_core::PolarGrid;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;

pub struct Series<'a> {
    pub name: &'a str,
    pub color: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn fmt(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 0.01 && v.abs() < 10000.0 {
        format!("{v:.4}")
    } else {
        format!("{v:.2e}")
    }
}

fn transform(v: f64, log: bool) -> f64 {
    if log {
        v.max(1e-300).log10()
    } else {
        v
    }
}

/// Polyline chart. Log-scaled axes take log10 of the data; nonpositive
/// values are clamped.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    log_x: bool,
    log_y: bool,
    series: &[Series],
) -> String {
    let mut xs: Vec<f64> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if y.is_finite() && x.is_finite() {
                xs.push(transform(x, log_x));
                ys.push(transform(y, log_y));
            }
        }
    }
    if xs.is_empty() {
        return String::from("<svg xmlns=\"http://www.w3.org/2000/svg\"/>");
    }
    let (x0, x1) = bounds(&xs);
    let (y0, y1) = bounds(&ys);
    let sx = |x: f64| MARGIN + (transform(x, log_x) - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (transform(y, log_y) - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"28\" font-size=\"16\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    );

    // Axes with five ticks each.
    out.push_str(&format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n\
         <line x1=\"{m}\" y1=\"{t}\" x2=\"{m}\" y2=\"{b}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN
    ));
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x0 + f * (x1 - x0);
        let yv = y0 + f * (y1 - y0);
        let x_val = if log_x { 10f64.powf(xv) } else { xv };
        let y_val = if log_y { 10f64.powf(yv) } else { yv };
        let px = MARGIN + f * (WIDTH - 2.0 * MARGIN);
        let py = HEIGHT - MARGIN - f * (HEIGHT - 2.0 * MARGIN);
        out.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{b}\" x2=\"{px:.1}\" y2=\"{b2}\" stroke=\"black\"/>\n\
             <text x=\"{px:.1}\" y=\"{ty}\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>\n",
            fmt(x_val),
            b = HEIGHT - MARGIN,
            b2 = HEIGHT - MARGIN + 6.0,
            ty = HEIGHT - MARGIN + 20.0,
        ));
        out.push_str(&format!(
            "<line x1=\"{m2}\" y1=\"{py:.1}\" x2=\"{m}\" y2=\"{py:.1}\" stroke=\"black\"/>\n\
             <text x=\"{tx}\" y=\"{py2:.1}\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">{}</text>\n",
            fmt(y_val),
            m = MARGIN,
            m2 = MARGIN - 6.0,
            tx = MARGIN - 10.0,
            py2 = py + 4.0,
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>\n",
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    ));

    for (si, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            s.color,
            pts.join(" ")
        ));
        let ly = MARGIN + 16.0 * si as f64;
        out.push_str(&format!(
            "<line x1=\"{x}\" y1=\"{ly:.1}\" x2=\"{x2}\" y2=\"{ly:.1}\" stroke=\"{}\" stroke-width=\"2\"/>\n\
             <text x=\"{tx}\" y=\"{ty:.1}\" font-size=\"12\" font-family=\"sans-serif\">{}</text>\n",
            s.color,
            escape(s.name),
            x = WIDTH - MARGIN - 150.0,
            x2 = WIDTH - MARGIN - 120.0,
            tx = WIDTH - MARGIN - 112.0,
            ty = ly + 4.0,
        ));
    }
    out.push_str("</svg>\n");
    out
}

fn bounds(vals: &[f64]) -> (f64, f64) {
    let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if (hi - lo).abs() < 1e-300 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Annular-sector heatmap of per-node values on a polar grid. `None` nodes
/// are left unfilled. Radii are drawn on a log scale so log-spaced grids
/// render with even rings.
pub fn polar_heatmap(title: &str, grid: &PolarGrid, values: &[Option<f64>], log_color: bool) -> String {
    let size = 560.0;
    let cx = size / 2.0;
    let cy = size / 2.0 + 14.0;
    let rad_max = size / 2.0 - 50.0;

    let finite: Vec<f64> = values
        .iter()
        .flatten()
        .copied()
        .filter(|v| v.is_finite())
        .collect();
    let (mut lo, mut hi) = if finite.is_empty() {
        (0.0, 1.0)
    } else {
        bounds(&finite)
    };
    if log_color {
        lo = lo.max(1e-300).log10();
        hi = hi.max(1e-290).log10();
        if hi - lo < 1e-12 {
            hi = lo + 1.0;
        }
    }

    let r_lo = grid.inner_radius().ln();
    let r_hi = grid.outer_radius().ln();
    let r_of = |r: f64| -> f64 {
        if r_hi - r_lo < 1e-12 {
            rad_max
        } else {
            (0.15 + 0.85 * (r.ln() - r_lo) / (r_hi - r_lo)) * rad_max
        }
    };

    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{h}\" viewBox=\"0 0 {size} {h}\">\n\
         <rect width=\"{size}\" height=\"{h}\" fill=\"white\"/>\n\
         <text x=\"{cx:.1}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>\n",
        escape(title),
        h = size + 40.0,
    );

    let rings = grid.rings();
    let angles = grid.angles_per_ring;
    for (i, (ring, angle, _)) in grid.nodes().enumerate() {
        let v = match values[i] {
            Some(v) if v.is_finite() => v,
            _ => continue,
        };
        let vv = if log_color { v.max(1e-300).log10() } else { v };
        let t = ((vv - lo) / (hi - lo)).clamp(0.0, 1.0);
        // Sector between ring midpoints.
        let r_in = if ring == 0 {
            r_of(grid.radii[0]) * 0.92
        } else {
            (r_of(grid.radii[ring - 1]) + r_of(grid.radii[ring])) / 2.0
        };
        let r_out = if ring + 1 == rings {
            r_of(grid.radii[ring])
        } else {
            (r_of(grid.radii[ring]) + r_of(grid.radii[ring + 1])) / 2.0
        };
        let a0 = grid.theta(angle) - std::f64::consts::PI / angles as f64;
        let a1 = grid.theta(angle) + std::f64::consts::PI / angles as f64;
        let (x0, y0) = (cx + r_in * a0.cos(), cy - r_in * a0.sin());
        let (x1, y1) = (cx + r_out * a0.cos(), cy - r_out * a0.sin());
        let (x2, y2) = (cx + r_out * a1.cos(), cy - r_out * a1.sin());
        let (x3, y3) = (cx + r_in * a1.cos(), cy - r_in * a1.sin());
        out.push_str(&format!(
            "<path d=\"M{x0:.2},{y0:.2} L{x1:.2},{y1:.2} A{r_out:.2},{r_out:.2} 0 0 0 {x2:.2},{y2:.2} L{x3:.2},{y3:.2} A{r_in:.2},{r_in:.2} 0 0 1 {x0:.2},{y0:.2} Z\" fill=\"{}\"/>\n",
            colormap(t)
        ));
    }

    let lo_label = if log_color { 10f64.powf(lo) } else { lo };
    let hi_label = if log_color { 10f64.powf(hi) } else { hi };
    out.push_str(&format!(
        "<text x=\"12\" y=\"{y:.1}\" font-size=\"12\" font-family=\"sans-serif\">min {}</text>\n\
         <text x=\"12\" y=\"{y2:.1}\" font-size=\"12\" font-family=\"sans-serif\">max {}</text>\n",
        fmt(lo_label),
        fmt(hi_label),
        y = size + 16.0,
        y2 = size + 32.0,
    ));
    out.push_str("</svg>\n");
    out
}

/// Five-stop blue-to-yellow ramp.
fn colormap(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let x = t.clamp(0.0, 1.0) * (STOPS.len() - 1) as f64;
    let i = (x.floor() as usize).min(STOPS.len() - 2);
    let f = x - i as f64;
    let (r0, g0, b0) = STOPS[i];
    let (r1, g1, b1) = STOPS[i + 1];
    format!(
        "rgb({},{},{})",
        (r0 + f * (r1 - r0)) as u8,
        (g0 + f * (g1 - g0)) as u8,
        (b0 + f * (b1 - b0)) as u8
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
