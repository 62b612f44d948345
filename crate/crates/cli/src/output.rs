use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

/// Writes artifacts into one directory, each through a temporary file that
/// is renamed into place.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).with_context(|| format!("cannot create output directory {}", root.display()))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn write(&self, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let target = self.root.join(name);
        let mut tmp = tempfile::NamedTempFile::new_in(&self.root)
            .with_context(|| format!("cannot create a temporary file in {}", self.root.display()))?;
        tmp.write_all(contents)?;
        tmp.as_file().sync_all()?;
        tmp.persist(&target).with_context(|| format!("cannot move output into {}", target.display()))?;
        Ok(target)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
}

/// File-name-safe form of a label.
pub fn slug(label: &str) -> String {
    let mut out = String::with_capacity(label.len());
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            out.push(c.to_ascii_lowercase());
        } else if !out.ends_with('-') {
            out.push('-');
        }
    }
    let trimmed = out.trim_matches('-');
    if trimmed.is_empty() {
        "field".into()
    } else {
        trimmed.into()
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 64.0;

/// Log-log plot of `H(r)/r` against `r`, with the fitted line
/// `log(H/r) = 2 alpha log r + c` when a fit is given.
pub fn loglog_svg(title: &str, radii: &[f64], values: &[f64], fit: Option<(f64, f64)>) -> String {
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(values)
        .filter(|(r, v)| **r > 0.0 && **v > 0.0 && v.is_finite())
        .map(|(r, v)| (r.log10(), v.log10()))
        .collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    if pts.is_empty() {
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">no positive heights</text>"#,
            WIDTH / 2.0,
            HEIGHT / 2.0
        );
        svg.push_str("</svg>\n");
        return svg;
    }
    let (mut x0, mut x1) = bounds(pts.iter().map(|p| p.0));
    let (mut y0, mut y1) = bounds(pts.iter().map(|p| p.1));
    pad(&mut x0, &mut x1);
    pad(&mut y0, &mut y1);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let _ = writeln!(
        svg,
        r#"<path d="M{:.2},{:.2} L{:.2},{:.2} L{:.2},{:.2}" fill="none" stroke="black"/>"#,
        MARGIN,
        MARGIN,
        MARGIN,
        HEIGHT - MARGIN,
        WIDTH - MARGIN,
        HEIGHT - MARGIN
    );
    for k in x0.ceil() as i64..=x1.floor() as i64 {
        let x = sx(k as f64);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="middle">1e{k}</text>"#,
            HEIGHT - MARGIN,
            HEIGHT - MARGIN + 5.0,
            HEIGHT - MARGIN + 18.0
        );
    }
    for k in y0.ceil() as i64..=y1.floor() as i64 {
        let y = sy(k as f64);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">1e{k}</text>"#,
            MARGIN - 5.0,
            MARGIN,
            MARGIN - 8.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle">r</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.1}" font-family="sans-serif" font-size="13" text-anchor="middle" transform="rotate(-90 18 {:.1})">H(r)/r</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    let line: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
    let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#, line.join(" "));
    for &(x, y) in &pts {
        let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="steelblue"/>"#, sx(x), sy(y));
    }
    if let Some((alpha, intercept)) = fit {
        // log10(H/r) = 2 alpha log10(r) + intercept / ln 10
        let c = intercept / std::f64::consts::LN_10;
        let (ya, yb) = (2.0 * alpha * x0 + c, 2.0 * alpha * x1 + c);
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-dasharray="6 4"/>"#,
            sx(x0),
            sy(ya),
            sx(x1),
            sy(yb)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="13" fill="firebrick">slope {:.4}, exponent {:.4}</text>"#,
            MARGIN + 12.0,
            MARGIN + 16.0,
            2.0 * alpha,
            alpha
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn pad(lo: &mut f64, hi: &mut f64) {
    let span = (*hi - *lo).max(1e-9);
    *lo -= 0.05 * span;
    *hi += 0.05 * span;
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("branch(2,3)"), "branch-2-3");
        assert_eq!(slug("{z,z^2}"), "z-z-2");
        assert_eq!(slug("***"), "field");
    }

    #[test]
    fn svg_is_deterministic_and_well_formed() {
        let r = [0.01, 0.1, 1.0];
        let v = [1e-3, 1e-2, 1e-1];
        let a = loglog_svg("t<1>", &r, &v, Some((0.5, 0.0)));
        assert_eq!(a, loglog_svg("t<1>", &r, &v, Some((0.5, 0.0))));
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("t&lt;1&gt;"));
        assert!(a.contains("<polyline"));
        assert!(loglog_svg("empty", &[1.0], &[0.0], None).contains("no positive heights"));
    }

    #[test]
    fn atomic_writes_land_in_place() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutDir::create(&dir.path().join("nested")).unwrap();
        let p = out.write("a.txt", b"one").unwrap();
        out.write("a.txt", b"two").unwrap();
        assert_eq!(fs::read_to_string(p).unwrap(), "two");
        assert_eq!(fs::read_dir(dir.path().join("nested")).unwrap().count(), 1);
    }
}
