//! CSV tables and static SVG line plots.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::factorization::FactorPair;
use crate::inversion::DistributionTable;

pub const SCHEMA_VERSION: u32 = 1;

/// `phi.csv`: both factors, `g` and the residual at every grid node.
pub fn phi_csv(pair: &FactorPair, g: &[Complex64]) -> String {
    let mut s = String::new();
    writeln!(s, "# levy-extrema phi v{SCHEMA_VERSION} method={}", pair.method.as_str()).unwrap();
    writeln!(s, "omega,re_phi_plus,im_phi_plus,re_phi_minus,im_phi_minus,re_g,im_g,residual").unwrap();
    let residuals = pair.residuals(g);
    for (j, w) in pair.grid.nodes().into_iter().enumerate() {
        let (p, m) = (pair.phi_plus[j], pair.phi_minus[j]);
        writeln!(
            s,
            "{w},{},{},{},{},{},{},{}",
            p.re, p.im, m.re, m.im, g[j].re, g[j].im, residuals[j]
        )
        .unwrap();
    }
    s
}

/// `dist_sup.csv` / `dist_inf.csv`, with the atom in the header line.
pub fn distribution_csv(table: &DistributionTable) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "# levy-extrema distribution v{SCHEMA_VERSION} side={} atom_at_zero={}",
        table.side.as_str(),
        table.atom_at_zero
    )
    .unwrap();
    writeln!(s, "x,cdf,density").unwrap();
    for (k, x) in table.abscissae.iter().enumerate() {
        let d = table.density.as_ref().map_or(f64::NAN, |d| d[k]);
        writeln!(s, "{x},{},{d}", table.cdf[k]).unwrap();
    }
    s
}

/// One row of `verify.csv`.
#[derive(Debug, Clone, Copy)]
pub struct VerifyRow {
    pub omega: f64,
    pub analytic: Complex64,
    pub empirical: Complex64,
    pub empirical_product: Complex64,
}

pub fn verify_csv(rows: &[VerifyRow]) -> String {
    let mut s = String::new();
    writeln!(s, "# levy-extrema verify v{SCHEMA_VERSION}").unwrap();
    writeln!(
        s,
        "omega,re_analytic,im_analytic,re_empirical,im_empirical,deviation,re_empirical_product,im_empirical_product,independence_deviation"
    )
    .unwrap();
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            r.omega,
            r.analytic.re,
            r.analytic.im,
            r.empirical.re,
            r.empirical.im,
            (r.analytic - r.empirical).norm(),
            r.empirical_product.re,
            r.empirical_product.im,
            (r.empirical_product - r.empirical).norm()
        )
        .unwrap();
    }
    s
}

/// A single polyline on linear axes, labelled with the data range.
pub fn line_plot_svg(title: &str, x_label: &str, xs: &[f64], ys: &[f64]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 400.0;
    const PAD: f64 = 50.0;
    let finite = |v: &&f64| v.is_finite();
    let (x0, x1) = bounds(xs.iter().filter(finite));
    let (y0, y1) = bounds(ys.iter().filter(finite));
    let px = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#).unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    writeln!(s, r#"<text x="{}" y="25" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#, W / 2.0, escape(title)).unwrap();
    writeln!(
        s,
        r#"<path d="M{PAD},{PAD} L{PAD},{} L{},{}" fill="none" stroke="black"/>"#,
        H - PAD,
        W - PAD,
        H - PAD
    )
    .unwrap();
    let label = |s: &mut String, x: f64, y: f64, anchor: &str, text: String| {
        writeln!(s, r#"<text x="{x:.1}" y="{y:.1}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{text}</text>"#).unwrap();
    };
    label(&mut s, PAD, H - PAD + 18.0, "middle", format!("{x0:.3}"));
    label(&mut s, W - PAD, H - PAD + 18.0, "middle", format!("{x1:.3}"));
    label(&mut s, W / 2.0, H - 10.0, "middle", escape(x_label));
    label(&mut s, PAD - 6.0, H - PAD, "end", format!("{y0:.3}"));
    label(&mut s, PAD - 6.0, PAD + 4.0, "end", format!("{y1:.3}"));

    let mut points = String::new();
    for (x, y) in xs.iter().zip(ys).filter(|(x, y)| x.is_finite() && y.is_finite()) {
        write!(points, "{:.2},{:.2} ", px(*x), py(*y)).unwrap();
    }
    writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#, points.trim_end()).unwrap();
    writeln!(s, "</svg>").unwrap();
    s
}

fn bounds<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inversion::Side;

    #[test]
    fn distribution_header_carries_atom() {
        let table = DistributionTable {
            side: Side::Supremum,
            abscissae: vec![0.0, 1.0],
            cdf: vec![0.25, 1.0],
            density: Some(vec![0.5, 0.0]),
            atom_at_zero: 0.25,
            projection_correction: 0.0,
        };
        let csv = distribution_csv(&table);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "# levy-extrema distribution v1 side=sup atom_at_zero=0.25");
        assert_eq!(lines.next().unwrap(), "x,cdf,density");
        assert_eq!(lines.next().unwrap(), "0,0.25,0.5");
    }

    #[test]
    fn plot_is_well_formed() {
        let svg = line_plot_svg("cdf <sup>", "x", &[0.0, 1.0, 2.0], &[0.0, 0.5, 1.0]);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("cdf &lt;sup&gt;"));
        assert!(svg.contains("polyline"));
    }

    #[test]
    fn flat_series_does_not_divide_by_zero() {
        let svg = line_plot_svg("flat", "x", &[0.0, 1.0], &[1.0, 1.0]);
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
