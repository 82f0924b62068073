//! CSV serialization of level sequences and curves.
//!
//! Files carry `# key: value` metadata lines ahead of the header. Floats are
//! written with 17 significant digits so every value round-trips exactly.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{CurveWithErrors, LevelSequence, SpectralEnsemble, Unit};
use crate::error::{Error, Result};

/// Ordered `# key: value` metadata.
pub type Metadata = BTreeMap<String, String>;

/// Float formatting used in every output file.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_meta(out: &mut String, meta: &[(&str, String)]) {
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}: {v}");
    }
}

/// Renders a level sequence; `extra` lines follow the built-in metadata.
pub fn levels_to_string(seq: &LevelSequence, extra: &[(&str, String)]) -> String {
    let mut out = String::new();
    let mut meta = vec![("unit", seq.unit().to_string())];
    if let Some(phi) = seq.phi() {
        meta.push(("phi", fmt_f64(phi)));
    }
    if !seq.provenance().is_empty() {
        meta.push(("provenance", seq.provenance().to_string()));
    }
    meta.extend(extra.iter().cloned());
    write_meta(&mut out, &meta);
    out.push_str("index,value\n");
    for (i, v) in seq.values().iter().enumerate() {
        let _ = writeln!(out, "{i},{}", fmt_f64(*v));
    }
    out
}

/// Renders a curve with `x,y,err` columns.
pub fn curve_to_string(curve: &CurveWithErrors, meta: &[(&str, String)]) -> String {
    let mut out = String::new();
    write_meta(&mut out, meta);
    out.push_str("x,y,err\n");
    for (x, y, e) in curve.iter() {
        let _ = writeln!(out, "{},{},{}", fmt_f64(x), fmt_f64(y), fmt_f64(e));
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_levels(
    path: impl AsRef<Path>,
    seq: &LevelSequence,
    extra: &[(&str, String)],
) -> Result<()> {
    write_file(path.as_ref(), &levels_to_string(seq, extra))
}

pub fn write_curve(
    path: impl AsRef<Path>,
    curve: &CurveWithErrors,
    meta: &[(&str, String)],
) -> Result<()> {
    write_file(path.as_ref(), &curve_to_string(curve, meta))
}

/// Splits metadata lines from the CSV body and parses the numeric columns.
fn parse_table(text: &str, path: &Path, header: &[&str]) -> Result<(Metadata, Vec<Vec<f64>>)> {
    let mut meta = Metadata::new();
    let mut body = String::new();
    for line in text.lines() {
        if let Some(rest) = line.trim_start().strip_prefix('#') {
            if let Some((k, v)) = rest.split_once(':') {
                meta.insert(k.trim().to_string(), v.trim().to_string());
            }
        } else if !line.trim().is_empty() {
            body.push_str(line);
            body.push('\n');
        }
    }
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(body.as_bytes());
    let found: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::parse(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if found != header {
        return Err(Error::parse(
            path,
            format!(
                "expected header '{}', found '{}'",
                header.join(","),
                found.join(",")
            ),
        ));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::parse(path, e.to_string()))?;
        let row = rec
            .iter()
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::parse(path, format!("row {}: {e}", line + 1)))?;
        rows.push(row);
    }
    Ok((meta, rows))
}

/// Parses a level CSV, returning the sequence and all metadata lines.
pub fn parse_levels(text: &str, path: &Path) -> Result<(LevelSequence, Metadata)> {
    let (meta, rows) = parse_table(text, path, &["index", "value"])?;
    let unit: Unit = meta
        .get("unit")
        .ok_or_else(|| Error::parse(path, "missing '# unit:' line"))?
        .parse()
        .map_err(|e: Error| Error::parse(path, e.to_string()))?;
    let phi = meta
        .get("phi")
        .map(|p| {
            p.parse::<f64>()
                .map_err(|e| Error::parse(path, format!("phi: {e}")))
        })
        .transpose()?;
    let values = rows.into_iter().map(|r| r[1]).collect();
    let seq = LevelSequence::new(values, unit)
        .map_err(|e| Error::parse(path, e.to_string()))?
        .with_phi(phi)
        .with_provenance(meta.get("provenance").cloned().unwrap_or_default());
    Ok((seq, meta))
}

pub fn parse_curve(text: &str, path: &Path) -> Result<(CurveWithErrors, Metadata)> {
    let (meta, rows) = parse_table(text, path, &["x", "y", "err"])?;
    let (mut x, mut y, mut err) = (Vec::new(), Vec::new(), Vec::new());
    for r in rows {
        x.push(r[0]);
        y.push(r[1]);
        err.push(r[2]);
    }
    let curve = CurveWithErrors::new(x, y, err).map_err(|e| Error::parse(path, e.to_string()))?;
    Ok((curve, meta))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_levels(path: impl AsRef<Path>) -> Result<(LevelSequence, Metadata)> {
    let path = path.as_ref();
    parse_levels(&read_text(path)?, path)
}

pub fn read_curve(path: impl AsRef<Path>) -> Result<(CurveWithErrors, Metadata)> {
    let path = path.as_ref();
    parse_curve(&read_text(path)?, path)
}

/// Member files are named `<prefix>_<index>.csv` with zero-padded indices.
pub fn write_ensemble(
    dir: impl AsRef<Path>,
    ens: &SpectralEnsemble,
    prefix: &str,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let width = ens.len().saturating_sub(1).to_string().len().max(4);
    ens.members()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let p = dir.join(format!("{prefix}_{i:0width$}.csv"));
            write_levels(&p, m, &[])?;
            Ok(p)
        })
        .collect()
}

/// Loads every `*.csv` in `dir`, in file-name order, as one ensemble.
pub fn read_ensemble(dir: impl AsRef<Path>) -> Result<SpectralEnsemble> {
    let dir = dir.as_ref();
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::invalid(format!(
            "no level files in {}",
            dir.display()
        )));
    }
    let members = files
        .iter()
        .map(|p| read_levels(p).map(|(s, _)| s))
        .collect::<Result<Vec<_>>>()?;
    SpectralEnsemble::new(members, dir.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_round_trip() {
        let seq = LevelSequence::new(
            vec![0.1, 1.0 / 3.0, std::f64::consts::PI, 1e300],
            Unit::Unfolded,
        )
        .unwrap()
        .with_phi(Some(0.95))
        .with_provenance("gse dim=200 seed=7");
        let text = levels_to_string(&seq, &[("total_length", fmt_f64(6.68))]);
        let (back, meta) = parse_levels(&text, Path::new("mem")).unwrap();
        assert_eq!(back, seq);
        assert_eq!(meta["total_length"].parse::<f64>().unwrap(), 6.68);
        assert!(text.starts_with("# unit: unfolded\n# phi: 9.4999999999999996e-1\n"));
    }

    #[test]
    fn curve_round_trip() {
        let c = CurveWithErrors::new(vec![0.1, 0.2], vec![1.0 / 7.0, -2.5e-17], vec![0.0, 1e-3])
            .unwrap();
        let text = curve_to_string(&c, &[("class", "gse".into())]);
        let (back, meta) = parse_curve(&text, Path::new("mem")).unwrap();
        assert_eq!(back, c);
        assert_eq!(meta["class"], "gse");
    }

    #[test]
    fn rejects_bad_files() {
        let p = Path::new("bad.csv");
        assert!(parse_levels("index,value\n0,1\n", p).is_err());
        assert!(parse_levels("# unit: unfolded\nidx,value\n0,1\n", p).is_err());
        assert!(parse_levels("# unit: unfolded\nindex,value\n0,1\n1,abc\n", p).is_err());
        assert!(parse_levels("# unit: unfolded\nindex,value\n0,2\n1,1\n", p).is_err());
        assert!(parse_curve("x,y\n1,2\n", p).is_err());
    }

    #[test]
    fn ensemble_directory_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let members = (0..3)
            .map(|m| {
                LevelSequence::new(
                    (0..10).map(|i| i as f64 + 0.1 * m as f64).collect(),
                    Unit::Unfolded,
                )
                .unwrap()
            })
            .collect();
        let ens = SpectralEnsemble::new(members, "x").unwrap();
        write_ensemble(dir.path(), &ens, "member").unwrap();
        let back = read_ensemble(dir.path()).unwrap();
        assert_eq!(back.members(), ens.members());
    }
}
