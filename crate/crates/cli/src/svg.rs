//! Minimal static SVG: empirical points with error bars over a theory polyline.

use shellzeros::pointprocess::CorrelationEstimate;

const W: f64 = 640.0;
const H: f64 = 400.0;
const MARGIN: f64 = 50.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn correlation_figure(est: &CorrelationEstimate, curve: &[(f64, f64)], title: &str) -> String {
    let x_max = est.bin_edges.last().copied().unwrap_or(1.0).max(1e-12);
    let y_top = est
        .khat
        .iter()
        .zip(&est.stderr)
        .map(|(k, s)| k + s)
        .chain(curve.iter().map(|p| p.1))
        .fold(1.2f64, f64::max)
        .min(3.0);
    let sx = |x: f64| MARGIN + (W - 2.0 * MARGIN) * x / x_max;
    let sy = |y: f64| H - MARGIN - (H - 2.0 * MARGIN) * (y.clamp(0.0, y_top) / y_top);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        esc(title)
    );
    // axes and ticks
    s += &format!(
        "<line x1=\"{m}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{m}\" y1=\"{b}\" x2=\"{m}\" y2=\"{m}\" stroke=\"black\"/>\n",
        m = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    for k in 0..=5 {
        let x = x_max * k as f64 / 5.0;
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{:.3}</text>\n",
            sx(x),
            H - MARGIN + 16.0,
            x
        );
        let y = y_top * k as f64 / 5.0;
        s += &format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{:.2}</text>\n",
            MARGIN - 6.0,
            sy(y) + 4.0,
            y
        );
    }
    s += &format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">|w1-w2|^2</text>\n",
        W / 2.0,
        H - 12.0
    );
    s += &format!(
        "<line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"gray\" stroke-dasharray=\"4 4\"/>\n",
        sx(0.0),
        sx(x_max),
        y = sy(1.0)
    );
    if !curve.is_empty() {
        let pts: Vec<String> = curve.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        s += &format!("<polyline fill=\"none\" stroke=\"red\" stroke-width=\"2\" points=\"{}\"/>\n", pts.join(" "));
    }
    for (k, x) in est.bin_midpoints().iter().enumerate() {
        let (y, e) = (est.khat[k], est.stderr[k]);
        s += &format!(
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"steelblue\"/>\n<circle cx=\"{x:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"steelblue\"/>\n",
            sy(y - e),
            sy(y + e),
            sy(y),
            x = sx(*x)
        );
    }
    s += "</svg>\n";
    s
}
