//! Result records and their CSV, JSON and SVG renderings. Files are written
//! to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use num_complex::Complex64;
use serde::Serialize;

/// One result row: the CSV projection plus JSON-only detail.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRecord {
    pub experiment_id: String,
    pub space: String,
    /// Ordered `(name, value)` pairs; every row of a file shares the names.
    pub params: Vec<(String, String)>,
    pub value_re: f64,
    pub value_im: f64,
    pub err_est: f64,
    pub truth: Option<f64>,
    pub rel_err: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    /// Regularization record, `ε` ladders and similar.
    pub detail: serde_json::Value,
    pub config_hash: String,
}

/// A record before the experiment context is attached.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub params: Vec<(String, String)>,
    pub value: Complex64,
    pub err_est: f64,
    pub truth: Option<f64>,
    pub rel_err: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: serde_json::Value,
}

impl Row {
    pub fn new(params: &[(&str, String)], value: Complex64, err_est: f64) -> Self {
        Self {
            params: params.iter().map(|(k, v)| (k.to_string(), v.clone())).collect(),
            value,
            err_est,
            truth: None,
            rel_err: None,
            tolerance: f64::NAN,
            pass: true,
            detail: serde_json::Value::Null,
        }
    }

    /// Compares `value` with a real truth; `scale` replaces `|truth|` when the truth vanishes.
    pub fn against(mut self, truth: f64, scale: f64, tolerance: f64) -> Self {
        let denom = if truth != 0.0 { truth.abs() } else { scale };
        let err = (self.value - truth).norm() / denom;
        self.truth = Some(truth);
        self.rel_err = Some(err);
        self.tolerance = tolerance;
        self.pass = err <= tolerance;
        self
    }

    /// A check whose metric and verdict the caller has already computed.
    pub fn verdict(mut self, metric: f64, tolerance: f64, pass: bool) -> Self {
        self.rel_err = Some(metric);
        self.tolerance = tolerance;
        self.pass = pass;
        self
    }

    pub fn with_detail(mut self, detail: serde_json::Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn record(self, experiment_id: &str, space: &str, config_hash: &str) -> ResultRecord {
        ResultRecord {
            experiment_id: experiment_id.into(),
            space: space.into(),
            params: self.params,
            value_re: self.value.re,
            value_im: self.value.im,
            err_est: self.err_est,
            truth: self.truth,
            rel_err: self.rel_err,
            tolerance: self.tolerance,
            pass: self.pass,
            detail: self.detail,
            config_hash: config_hash.into(),
        }
    }
}

/// Shortest round-trip representation, so equal bits give equal bytes.
fn num(v: f64) -> String {
    format!("{v:e}")
}

fn field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `experiment_id, space, param…, value_re, value_im, err_est, truth, rel_err, pass`.
pub fn csv(records: &[ResultRecord]) -> String {
    let mut out = String::from("experiment_id,space");
    let names: Vec<&str> = records.first().map(|r| r.params.iter().map(|(k, _)| k.as_str()).collect()).unwrap_or_default();
    for n in &names {
        out.push(',');
        out.push_str(&field(n));
    }
    out.push_str(",value_re,value_im,err_est,truth,rel_err,pass\n");
    for r in records {
        debug_assert!(r.params.iter().map(|(k, _)| k.as_str()).eq(names.iter().copied()));
        let _ = write!(out, "{},{}", field(&r.experiment_id), field(&r.space));
        for (_, v) in &r.params {
            out.push(',');
            out.push_str(&field(v));
        }
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{}",
            num(r.value_re),
            num(r.value_im),
            num(r.err_est),
            opt(r.truth),
            opt(r.rel_err),
            r.pass
        );
    }
    out
}

#[derive(Serialize)]
pub struct Document<'a, C: Serialize> {
    pub experiment_id: &'a str,
    pub command: &'a str,
    pub config_hash: &'a str,
    pub seed: u64,
    pub config: &'a C,
    pub wall_time_s: f64,
    pub records: &'a [ResultRecord],
}

/// One polyline per series on shared log-free axes; the caller chooses the transform.
pub fn svg_polylines(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const M: f64 = 60.0;
    let pts = series.iter().flat_map(|(_, s)| s.iter()).filter(|(x, y)| x.is_finite() && y.is_finite());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 == x0 {
        x1 = x0 + 1.0;
    }
    if y1 == y0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, xml(title));
    let _ = writeln!(
        out,
        r#"<path d="M{M} {} H{} M{M} {} V{}" stroke="black" fill="none"/>"#,
        H - M,
        W - M,
        H - M,
        M
    );
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 15.0, xml(x_label));
    let _ = writeln!(
        out,
        r#"<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        xml(y_label)
    );
    for (v, anchor, x, y) in [(x0, "middle", sx(x0), H - M + 16.0), (x1, "middle", sx(x1), H - M + 16.0)] {
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}">{v:.3}</text>"#);
    }
    for v in [y0, y1] {
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.3}</text>"#, M - 6.0, sy(v) + 4.0);
    }
    for (k, (name, s)) in series.iter().enumerate() {
        let colour = palette[k % palette.len()];
        let coords: Vec<String> = s
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(out, r#"<polyline points="{}" stroke="{colour}" fill="none" stroke-width="1.5"/>"#, coords.join(" "));
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" fill="{colour}">{}</text>"#,
            W - M + 4.0,
            M + 14.0 * k as f64,
            xml(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes every file to a temporary sibling first, then renames them all.
/// Nothing is renamed unless every temporary write succeeded.
pub fn write_atomic(dir: &Path, files: &[(String, String)]) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, body) in files {
        let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("staging {name}"))?;
        tmp.write_all(body.as_bytes())?;
        tmp.as_file().sync_all()?;
        staged.push((tmp, dir.join(name)));
    }
    staged
        .into_iter()
        .map(|(tmp, path)| {
            tmp.persist(&path).with_context(|| format!("renaming into {}", path.display()))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout_and_quoting() {
        let r = Row::new(&[("section", "0".into()), ("label", "a,b".into())], Complex64::new(1.5, -0.25), 1e-9)
            .against(1.5, 1.0, 1e-3)
            .record("id", "X(3,0)", "h");
        let text = csv(&[r]);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("experiment_id,space,section,label,value_re,value_im,err_est,truth,rel_err,pass"));
        assert_eq!(lines.next(), Some("id,\"X(3,0)\",0,\"a,b\",1.5e0,-2.5e-1,1e-9,1.5e0,1.6666666666666666e-1,false"));
    }

    #[test]
    fn vanishing_truth_uses_the_scale() {
        let r = Row::new(&[], Complex64::new(1e-5, 0.0), 0.0).against(0.0, 0.5, 1e-3);
        assert_eq!(r.rel_err, Some(2e-5));
        assert!(r.pass);
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let s = svg_polylines("t", "x", "y", &[("a".into(), vec![(0.0, 1.0), (1.0, 2.0)]), ("b".into(), vec![(0.0, 0.0)])]);
        assert_eq!(s.matches("<polyline").count(), 2);
        assert!(s.starts_with("<svg") && s.ends_with("</svg>\n"));
    }

    #[test]
    fn atomic_write_leaves_only_final_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = write_atomic(dir.path(), &[("a.csv".into(), "x\n".into()), ("a.json".into(), "{}".into())]).unwrap();
        assert_eq!(out.len(), 2);
        let mut names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert_eq!(names, ["a.csv", "a.json"]);
    }
}
