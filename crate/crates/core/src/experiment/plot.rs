//! Minimal self-contained SVG charts. Output depends only on the inputs, so
//! plots are byte-for-byte reproducible and diffable.

const W: f64 = 720.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 90.0;
const PALETTE: [&str; 4] = ["#4477aa", "#ee6677", "#228833", "#ccbb44"];

#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub label: String,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    /// (x, y, error)
    pub points: Vec<(f64, f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Y range padded to whole multiples of 5 around the data (errors included).
fn y_range(values: impl Iterator<Item = (f64, f64)>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (v, e) in values {
        lo = lo.min(v - e);
        hi = hi.max(v + e);
    }
    if !lo.is_finite() {
        return (0.0, 100.0);
    }
    let lo = ((lo / 5.0).floor() * 5.0 - 5.0).max(0.0);
    let hi = ((hi / 5.0).ceil() * 5.0).min(100.0).max(lo + 5.0);
    (lo, hi)
}

fn header(title: &str, y_label: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n\
         <text transform=\"translate(18 {}) rotate(-90)\" text-anchor=\"middle\">{}</text>\n",
        W / 2.0,
        escape(title),
        TOP + (H - TOP - BOTTOM) / 2.0,
        escape(y_label)
    )
}

fn y_axis(s: &mut String, lo: f64, hi: f64, y: &dyn Fn(f64) -> f64) {
    let step = if hi - lo > 30.0 { 10.0 } else { 5.0 };
    let mut t = lo;
    while t <= hi + 1e-9 {
        s.push_str(&format!(
            "<line x1=\"{LEFT}\" x2=\"{}\" y1=\"{:.1}\" y2=\"{:.1}\" stroke=\"#dddddd\"/>\n\
             <text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\">{t}</text>\n",
            W - RIGHT,
            y(t),
            y(t),
            LEFT - 6.0,
            y(t) + 4.0
        ));
        t += step;
    }
    s.push_str(&format!(
        "<line x1=\"{LEFT}\" x2=\"{LEFT}\" y1=\"{TOP}\" y2=\"{}\" stroke=\"black\"/>\n\
         <line x1=\"{LEFT}\" x2=\"{}\" y1=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        H - BOTTOM,
        W - RIGHT,
        H - BOTTOM,
        H - BOTTOM
    ));
}

/// Vertical bars with ±error whiskers and the value printed above each bar.
pub fn bar_chart(title: &str, y_label: &str, bars: &[Bar]) -> String {
    let (lo, hi) = y_range(bars.iter().map(|b| (b.value, b.error)));
    let plot_h = H - TOP - BOTTOM;
    let y = move |v: f64| H - BOTTOM - (v - lo) / (hi - lo) * plot_h;
    let mut s = header(title, y_label);
    y_axis(&mut s, lo, hi, &y);
    let slot = (W - LEFT - RIGHT) / bars.len().max(1) as f64;
    for (i, b) in bars.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let bw = slot * 0.6;
        let top = y(b.value.clamp(lo, hi));
        s.push_str(&format!(
            "<rect x=\"{:.1}\" y=\"{top:.1}\" width=\"{bw:.1}\" height=\"{:.1}\" fill=\"{}\"/>\n",
            cx - bw / 2.0,
            (H - BOTTOM - top).max(0.0),
            PALETTE[0]
        ));
        if b.error > 0.0 {
            let (y0, y1) = (y((b.value - b.error).max(lo)), y((b.value + b.error).min(hi)));
            s.push_str(&format!(
                "<line x1=\"{cx:.1}\" x2=\"{cx:.1}\" y1=\"{y0:.1}\" y2=\"{y1:.1}\" stroke=\"black\"/>\n"
            ));
        }
        s.push_str(&format!(
            "<text x=\"{cx:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"10\">{:.2}</text>\n\
             <text transform=\"translate({cx:.1} {}) rotate(35)\" font-size=\"11\">{}</text>\n",
            top - 4.0,
            b.value,
            H - BOTTOM + 14.0,
            escape(&b.label)
        ));
    }
    s.push_str("</svg>\n");
    s
}

/// Polylines with markers and error whiskers; x positions are linear in x.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let (lo, hi) = y_range(series.iter().flat_map(|s| s.points.iter().map(|p| (p.1, p.2))));
    let xs: Vec<f64> = series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let (xmin, xmax) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let (xmin, xmax) = if xmin.is_finite() && xmax > xmin { (xmin, xmax) } else { (xmin.min(0.0), xmin.max(0.0) + 1.0) };
    let plot_h = H - TOP - BOTTOM;
    let plot_w = W - LEFT - RIGHT - 40.0;
    let y = move |v: f64| H - BOTTOM - (v - lo) / (hi - lo) * plot_h;
    let x = move |v: f64| LEFT + 20.0 + (v - xmin) / (xmax - xmin) * plot_w;
    let mut s = header(title, y_label);
    y_axis(&mut s, lo, hi, &y);
    let mut ticks: Vec<f64> = xs.clone();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for t in ticks {
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{}\" text-anchor=\"middle\">{t}</text>\n",
            x(t),
            H - BOTTOM + 16.0
        ));
    }
    s.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        LEFT + (W - LEFT - RIGHT) / 2.0,
        H - BOTTOM + 40.0,
        escape(x_label)
    ));
    for (k, ser) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = ser
            .points
            .iter()
            .map(|p| format!("{:.1},{:.1}", x(p.0), y(p.1)))
            .collect();
        s.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"2\"/>\n",
            pts.join(" ")
        ));
        for p in &ser.points {
            s.push_str(&format!(
                "<line x1=\"{0:.1}\" x2=\"{0:.1}\" y1=\"{1:.1}\" y2=\"{2:.1}\" stroke=\"{colour}\"/>\n\
                 <circle cx=\"{0:.1}\" cy=\"{3:.1}\" r=\"4\" fill=\"{colour}\"/>\n",
                x(p.0),
                y((p.1 - p.2).max(lo)),
                y((p.1 + p.2).min(hi)),
                y(p.1)
            ));
        }
        s.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" fill=\"{colour}\">{}</text>\n",
            W - RIGHT - 120.0,
            TOP + 14.0 * (k as f64 + 1.0),
            escape(&ser.name)
        ));
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bar_chart_is_well_formed_and_deterministic() {
        let bars = vec![
            Bar { label: "a<b".into(), value: 80.0, error: 2.0 },
            Bar { label: "c".into(), value: 90.5, error: 1.0 },
        ];
        let s = bar_chart("t", "acc", &bars);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
        assert_eq!(s.matches("<rect").count(), 3);
        assert!(s.contains("a&lt;b"));
        assert_eq!(s, bar_chart("t", "acc", &bars));
    }

    #[test]
    fn line_chart_handles_single_point() {
        let s = line_chart(
            "t",
            "latent",
            "acc",
            &[Series { name: "cnn".into(), points: vec![(200.0, 90.0, 1.0)] }],
        );
        assert!(s.contains("<circle"));
        assert!(!s.contains("NaN"));
    }
}
