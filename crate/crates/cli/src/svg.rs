use std::fmt::Write;

const PIXELS: f64 = 400.0;

fn color(t: f64) -> String {
    // dark blue to yellow
    let (r0, g0, b0) = (0x30 as f64, 0x12 as f64, 0x6e as f64);
    let (r1, g1, b1) = (0xf5 as f64, 0xe0 as f64, 0x2a as f64);
    let lerp = |a: f64, b: f64| (a + (b - a) * t.clamp(0.0, 1.0)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(r0, r1), lerp(g0, g1), lerp(b0, b1))
}

/// Square-cell raster of `(y, z, value)` samples over the unit disk, with
/// `y` to the right and `z` up.
pub fn heatmap(points: &[(f64, f64, f64)], spacing: f64) -> String {
    let lo = points.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let hi = points.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cell = PIXELS / 2.0 * spacing;
    let size = PIXELS + cell;
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">"#);
    let _ = writeln!(s, r#"<circle cx="{0}" cy="{0}" r="{1}" fill="none" stroke="black"/>"#, size / 2.0, PIXELS / 2.0);
    for &(y, z, v) in points {
        let px = (y + 1.0) * PIXELS / 2.0;
        let py = (1.0 - z) * PIXELS / 2.0;
        let _ = writeln!(
            s,
            r#"<rect x="{px:.3}" y="{py:.3}" width="{cell:.3}" height="{cell:.3}" fill="{}"/>"#,
            color((v - lo) / span)
        );
    }
    let _ = writeln!(s, "<!-- range {lo:.6e} .. {hi:.6e} -->");
    s.push_str("</svg>\n");
    s
}
