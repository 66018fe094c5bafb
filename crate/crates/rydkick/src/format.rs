//! On-disk formats: columnar text series and little-endian histogram blobs.
//!
//! A series file starts with `#`-prefixed metadata lines, then a header
//! row naming the columns, then one row per checkpoint. Floats are written
//! in shortest round-trip form so reading a file back is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rydkick_core::series::{EngineTag, NHistogram, ObservableSeries, Observables};
use rydkick_core::SystemParams;
use sha2::{Digest, Sha256};

use crate::{Error, Result};

pub const SERIES_FILE: &str = "series.txt";
pub const HISTOGRAM_FILE: &str = "histograms.bin";
pub const COLUMNS: [&str; 7] = ["K", "t_au", "P_sur", "mean_n", "norm", "t_kepler", "n0"];

fn engine_from_str(s: &str) -> Option<EngineTag> {
    match s {
        "quantum" => Some(EngineTag::Quantum),
        "classical" => Some(EngineTag::Classical),
        _ => None,
    }
}

/// Text rendering of a series. `t_kepler` is time in initial Kepler
/// periods and `n0 = <n>/n_i`.
pub fn series_to_text(series: &ObservableSeries, params: &SystemParams) -> String {
    let n = params.n_i as f64;
    let kepler = std::f64::consts::TAU * n * n * n;
    let mut s = String::new();
    let _ = writeln!(s, "# engine {}", series.engine.as_str());
    let _ = writeln!(
        s,
        "# n_i {} nu0 {:e} f0av {:e} dp0 {:e} period {:e} dp {:e}",
        params.n_i, params.nu0, params.f0av, params.dp0, params.period, params.dp
    );
    let _ = writeln!(s, "{}", COLUMNS.join(" "));
    for r in &series.rows {
        let mn = r.mean_n.unwrap_or(f64::NAN);
        let _ = writeln!(
            s,
            "{} {:e} {:e} {:e} {:e} {:e} {:e}",
            r.k,
            r.t_au,
            r.p_sur,
            mn,
            r.norm,
            r.t_au / kepler,
            mn / n
        );
    }
    s
}

pub fn series_from_text(text: &str, path: &Path) -> Result<ObservableSeries> {
    let bad = |m: String| Error::format(path, m);
    let mut engine = None;
    let mut header_seen = false;
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(meta) = line.strip_prefix('#') {
            let mut it = meta.split_whitespace();
            if it.next() == Some("engine") {
                engine = it.next().and_then(engine_from_str);
            }
            continue;
        }
        if !header_seen {
            if line.split_whitespace().collect::<Vec<_>>() != COLUMNS {
                return Err(bad(format!("unexpected column header {line:?}")));
            }
            header_seen = true;
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != COLUMNS.len() {
            return Err(bad(format!("row has {} fields: {line:?}", f.len())));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| bad(format!("{s}: {e}")));
        let mean_n = num(f[3])?;
        rows.push(Observables {
            k: f[0].parse().map_err(|e| bad(format!("{}: {e}", f[0])))?,
            t_au: num(f[1])?,
            p_sur: num(f[2])?,
            mean_n: (!mean_n.is_nan()).then_some(mean_n),
            norm: num(f[4])?,
            histogram: None,
        });
    }
    let engine = engine.ok_or_else(|| bad("missing engine line".into()))?;
    Ok(ObservableSeries { engine, rows })
}

/// Histograms of every row, or `None` if any row lacks one. Layout: row
/// count and bins per row as little-endian `u64`, then per row the bins
/// followed by the overflow, all little-endian `f64`.
pub fn histograms_to_bytes(series: &ObservableSeries) -> Option<Vec<u8>> {
    let hists: Vec<&NHistogram> = series
        .rows
        .iter()
        .map(|r| r.histogram.as_ref())
        .collect::<Option<_>>()?;
    let bins = hists.first().map_or(0, |h| h.bins.len());
    let mut out = Vec::with_capacity(16 + hists.len() * (bins + 1) * 8);
    out.extend_from_slice(&(hists.len() as u64).to_le_bytes());
    out.extend_from_slice(&(bins as u64).to_le_bytes());
    for h in hists {
        for &b in h.bins.iter().chain(std::iter::once(&h.overflow)) {
            out.extend_from_slice(&b.to_le_bytes());
        }
    }
    Some(out)
}

pub fn histograms_from_bytes(bytes: &[u8], path: &Path) -> Result<Vec<NHistogram>> {
    let word = |i: usize| -> Result<[u8; 8]> {
        bytes
            .get(8 * i..8 * i + 8)
            .map(|s| s.try_into().expect("slice of eight"))
            .ok_or_else(|| Error::format(path, "truncated histogram file"))
    };
    let rows = u64::from_le_bytes(word(0)?) as usize;
    let bins = u64::from_le_bytes(word(1)?) as usize;
    if bytes.len() != 16 + rows * (bins + 1) * 8 {
        return Err(Error::format(
            path,
            "histogram file size does not match its header",
        ));
    }
    let mut out = Vec::with_capacity(rows);
    let mut i = 2;
    for _ in 0..rows {
        let mut h = NHistogram::new(bins.saturating_sub(1));
        h.bins.resize(bins, 0.0);
        for b in h.bins.iter_mut() {
            *b = f64::from_le_bytes(word(i)?);
            i += 1;
        }
        h.overflow = f64::from_le_bytes(word(i)?);
        i += 1;
        out.push(h);
    }
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary sibling and renames, so a killed process
/// never leaves a half-written file under the final name.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let tmp = path.with_extension("partial");
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Deletes temporaries left by writes that were interrupted.
pub fn remove_partials(root: &Path) -> Result<usize> {
    let mut removed = 0;
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let path = entry.map_err(|e| Error::io(&dir, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().is_some_and(|x| x == "partial") {
                fs::remove_file(&path).map_err(|e| Error::io(&path, e))?;
                removed += 1;
            }
        }
    }
    Ok(removed)
}

/// Directory name for a frequency: shortest round-trip decimal.
pub fn nu0_dir(nu0: f64) -> String {
    format!("{nu0}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (ObservableSeries, SystemParams) {
        let params = SystemParams::new(10, 1.45, 0.005).unwrap();
        let mut series = ObservableSeries::new(EngineTag::Classical);
        for (j, k) in [0u64, 1, 7, 100].into_iter().enumerate() {
            let mut h = NHistogram::new(5);
            h.add(3.0, 0.1 * j as f64);
            h.add(50.0, 0.01);
            series.rows.push(Observables {
                k,
                t_au: k as f64 * params.period,
                p_sur: 1.0 / (1.0 + j as f64 * 0.3),
                mean_n: (j != 3).then_some(10.0 - 0.1 * j as f64),
                norm: 1.0,
                histogram: Some(h),
            });
        }
        (series, params)
    }

    #[test]
    fn series_round_trip() {
        let (series, params) = sample();
        let text = series_to_text(&series, &params);
        let back = series_from_text(&text, Path::new("x")).unwrap();
        assert_eq!(back.engine, series.engine);
        for (a, b) in back.rows.iter().zip(&series.rows) {
            assert_eq!(
                (a.k, a.t_au, a.p_sur, a.mean_n, a.norm),
                (b.k, b.t_au, b.p_sur, b.mean_n, b.norm)
            );
        }
        assert!(text
            .lines()
            .nth(2)
            .unwrap()
            .starts_with("K t_au P_sur mean_n norm"));
    }

    #[test]
    fn histogram_round_trip() {
        let (series, _) = sample();
        let bytes = histograms_to_bytes(&series).unwrap();
        let back = histograms_from_bytes(&bytes, Path::new("x")).unwrap();
        for (a, b) in back.iter().zip(&series.rows) {
            assert_eq!(Some(a), b.histogram.as_ref());
        }
        assert!(histograms_from_bytes(&bytes[..bytes.len() - 1], Path::new("x")).is_err());
    }

    #[test]
    fn malformed_series_is_reported() {
        assert!(series_from_text("# engine quantum\nK t_au\n", Path::new("x")).is_err());
        assert!(
            series_from_text("K t_au P_sur mean_n norm t_kepler n0\n", Path::new("x")).is_err()
        );
    }
}
