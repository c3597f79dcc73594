//! Run manifests and the files a run leaves behind: JSON envelopes, CSV tables
//! and SVG plots, each stamped with the manifest hash and written atomically.

use crate::bubbles::{default_delta, eps_sweep, BubbleSweep, DEFAULT_CUTOFF_RADIUS};
use crate::error::{Error, Result};
use crate::functional::ProblemParams;
use crate::radial::{RadialField, RadialGrid};
use crate::solvers::{PATH_POINTS, TOL_MIN, TOL_MP};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub dim: usize,
    pub radius: f64,
    pub node_count: usize,
    pub lambda: f64,
    pub mu: f64,
    pub theta: f64,
    pub rho_override: Option<f64>,
    pub cutoff_radius: f64,
    pub eps_from: f64,
    pub eps_to: f64,
    pub eps_count: usize,
    pub delta: Option<f64>,
    pub tol_min: f64,
    pub tol_mp: f64,
    pub path_points: usize,
    pub rng_seed: u64,
    pub out_dir: PathBuf,
    pub svg: bool,
}

impl Default for RunManifest {
    fn default() -> Self {
        Self {
            dim: 4,
            radius: 1.0,
            node_count: 4096,
            lambda: 0.0,
            mu: 1.0,
            theta: -0.5,
            rho_override: None,
            cutoff_radius: DEFAULT_CUTOFF_RADIUS,
            eps_from: DEFAULT_CUTOFF_RADIUS / 16.0,
            eps_to: DEFAULT_CUTOFF_RADIUS / 4096.0,
            eps_count: 9,
            delta: None,
            tol_min: TOL_MIN,
            tol_mp: TOL_MP,
            path_points: PATH_POINTS,
            rng_seed: 7,
            out_dir: PathBuf::from("out"),
            svg: false,
        }
    }
}

impl RunManifest {
    pub fn params(&self) -> Result<ProblemParams> {
        ProblemParams::new(self.dim, self.lambda, self.mu, self.theta)
    }

    /// `delta`, falling back to the dimension default.
    pub fn delta(&self) -> Option<f64> {
        if self.dim == 4 {
            None
        } else {
            self.delta.or_else(|| default_delta(self.dim))
        }
    }

    pub fn eps_list(&self) -> Result<Vec<f64>> {
        eps_sweep(self.eps_from, self.eps_to, self.eps_count)
    }

    /// Lower-case hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("manifest serialises");
        Sha256::digest(&bytes).iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

/// JSON file layout: the manifest, its hash and the payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub manifest_hash: String,
    pub manifest: RunManifest,
    pub result: T,
}

impl<T> Envelope<T> {
    pub fn new(manifest: &RunManifest, result: T) -> Self {
        Self {
            manifest_hash: manifest.hash(),
            manifest: manifest.clone(),
            result,
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

pub fn to_json<T: Serialize>(manifest: &RunManifest, result: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(&Envelope::new(manifest, result))?)
}

pub fn write_json<T: Serialize>(path: &Path, manifest: &RunManifest, result: &T) -> Result<()> {
    let mut s = to_json(manifest, result)?;
    s.push('\n');
    write_atomic(path, s.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<Envelope<T>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn csv_with_header<F>(manifest: &RunManifest, header: [&str; 2], body: F) -> Result<String>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<()>,
{
    let mut buf = format!("# manifest sha256 {}\n", manifest.hash()).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header)?;
        body(&mut w)?;
        w.flush()?;
    }
    String::from_utf8(buf).map_err(|e| Error::Rejected(e.to_string()))
}

/// `r,u` table of a profile.
pub fn profile_csv(manifest: &RunManifest, grid: &RadialGrid, u: &RadialField) -> Result<String> {
    if u.len() != grid.node_count() {
        return Err(Error::LengthMismatch {
            expected: grid.node_count(),
            got: u.len(),
        });
    }
    csv_with_header(manifest, ["r", "u"], |w| {
        for (r, v) in grid.nodes().iter().zip(u.values()) {
            w.write_record([r.to_string(), v.to_string()])?;
        }
        Ok(())
    })
}

/// Long-format `eps,quantity,value` table of a sweep.
pub fn sweep_csv(manifest: &RunManifest, sweep: &BubbleSweep) -> Result<String> {
    let mut buf = format!("# manifest sha256 {}\n", manifest.hash()).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["eps", "quantity", "value"])?;
        for rec in &sweep.records {
            for (q, v) in &rec.values {
                w.write_record([rec.eps.to_string(), q.label().to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
    }
    String::from_utf8(buf).map_err(|e| Error::Rejected(e.to_string()))
}

/// Reads an `r,u` table back; comment lines are skipped.
pub fn read_profile_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in rdr.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

/// Manifest hash embedded in a CSV or SVG file, if any.
pub fn embedded_hash(text: &str) -> Option<&str> {
    let start = text.find("manifest sha256 ")? + "manifest sha256 ".len();
    text.get(start..start + 64)
}

/// One labelled profile.
pub struct Curve<'a> {
    pub label: &'a str,
    pub r: &'a [f64],
    pub u: &'a [f64],
}

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
const W: f64 = 480.0;
const H: f64 = 320.0;
const PAD: f64 = 48.0;

fn panel(out: &mut String, x0: f64, title: &str, xlabel: &str, ylabel: &str, series: &[(&str, Vec<(f64, f64)>)], marker: Option<(f64, f64)>) {
    let pts = series.iter().flat_map(|(_, s)| s.iter());
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    if !(xmax > xmin) {
        xmax = xmin + 1.0;
    }
    if !(ymax > ymin) {
        ymax = ymin + 1.0;
    }
    let sx = |x: f64| x0 + PAD + (x - xmin) / (xmax - xmin) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - ymin) / (ymax - ymin) * (H - 2.0 * PAD);
    let _ = writeln!(
        out,
        r##"<g><rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="#444"/>"##,
        x0 + PAD,
        PAD,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{title}</text>"#, x0 + W / 2.0, PAD - 16.0);
    let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{xlabel}</text>"#, x0 + W / 2.0, H - 12.0);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{ylabel}</text>"#,
        x0 + 14.0,
        H / 2.0,
        x0 + 14.0,
        H / 2.0
    );
    for (v, anchor, x, y) in [
        (xmin, "start", sx(xmin), H - PAD + 14.0),
        (xmax, "end", sx(xmax), H - PAD + 14.0),
    ] {
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" font-size="10">{v:.3e}</text>"#);
    }
    for (v, y) in [(ymin, sy(ymin)), (ymax, sy(ymax))] {
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{v:.3e}</text>"#,
            x0 + PAD - 4.0,
            y + 3.0
        );
    }
    for (k, (label, s)) in series.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        let path = s
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{path}"/>"#);
        if series.len() > 1 {
            let ly = PAD + 14.0 + 14.0 * k as f64;
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{ly:.1}" text-anchor="end" fill="{colour}" font-size="11">{label}</text>"#,
                x0 + W - PAD - 6.0
            );
        }
    }
    if let Some((x, y)) = marker {
        let _ = writeln!(out, r##"<circle cx="{:.2}" cy="{:.2}" r="3" fill="#000"/>"##, sx(x), sy(y));
    }
    out.push_str("</g>\n");
}

/// Profiles `u(r)` and, when given, the path energies `J(γ(t_j))` against `j`
/// with the candidate index marked. Output depends only on the inputs.
pub fn plot_profiles(manifest_hash: &str, curves: &[Curve<'_>], path: Option<(&[f64], usize)>) -> String {
    let panels = if path.is_some() { 2.0 } else { 1.0 };
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{H:.0}" font-family="sans-serif" font-size="12">"#,
        W * panels
    );
    let _ = writeln!(out, "<!-- manifest sha256 {manifest_hash} -->");
    let series: Vec<(&str, Vec<(f64, f64)>)> = curves
        .iter()
        .map(|c| (c.label, c.r.iter().copied().zip(c.u.iter().copied()).collect()))
        .collect();
    panel(&mut out, 0.0, "profiles", "r", "u", &series, None);
    if let Some((energies, k)) = path {
        let s: Vec<(f64, f64)> = energies.iter().enumerate().map(|(j, &e)| (j as f64, e)).collect();
        let marker = energies.get(k).map(|&e| (k as f64, e));
        panel(&mut out, W, "path energy", "j", "J", &[("path", s)], marker);
    }
    out.push_str("</svg>\n");
    out
}

/// One row of the verification table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub key: String,
    pub pass: bool,
    pub detail: serde_json::Value,
}

/// Rows keyed by result label, in evaluation order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyTable {
    pub rows: Vec<VerifyRow>,
}

impl VerifyTable {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.rows.iter().filter(|r| !r.pass).map(|r| r.key.as_str()).collect()
    }

    /// `key → pass` map, the part that must not depend on the seed.
    pub fn verdicts(&self) -> Vec<(String, bool)> {
        self.rows.iter().map(|r| (r.key.clone(), r.pass)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::build_grid;

    #[test]
    fn hash_is_stable_and_sensitive() {
        let m = RunManifest::default();
        assert_eq!(m.hash(), m.clone().hash());
        assert_eq!(m.hash().len(), 64);
        let n = RunManifest {
            theta: -0.6,
            ..m.clone()
        };
        assert_ne!(m.hash(), n.hash());
    }

    #[test]
    fn profile_csv_round_trip() {
        let m = RunManifest::default();
        let g = build_grid(4, 1.0, 32).unwrap();
        let u = RadialField::from_fn(&g, |r| (1.0 - r * r) / 3.0);
        let text = profile_csv(&m, &g, &u).unwrap();
        assert_eq!(embedded_hash(&text), Some(m.hash().as_str()));
        let rows = read_profile_csv(&text).unwrap();
        assert_eq!(rows.len(), g.node_count());
        for ((r, v), (r0, v0)) in rows.iter().zip(g.nodes().iter().zip(u.values())) {
            assert_eq!(r.to_bits(), r0.to_bits());
            assert_eq!(v.to_bits(), v0.to_bits());
        }
    }

    #[test]
    fn svg_is_deterministic() {
        let r = [0.0, 0.5, 1.0];
        let u = [1.0, 0.5, 0.0];
        let c = [Curve { label: "u0", r: &r, u: &u }];
        let a = plot_profiles("abc", &c, Some((&[0.0, 1.0, 0.0], 1)));
        assert_eq!(a, plot_profiles("abc", &c, Some((&[0.0, 1.0, 0.0], 1))));
        assert!(a.contains(">r</text>") && a.contains(">u</text>"));
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
    }
}
