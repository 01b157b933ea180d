//! CSV emission, atomic writes and the resumable partial-file format.
//!
//! Output rules: a header row is always written, numbers use '.' as the
//! decimal point with no locale formatting, and records end in '\n'.
//!
//! While a Monte Carlo sweep runs with `--out FILE`, the rows finished so far
//! are kept in `FILE.partial`, rewritten atomically after every point and
//! closed by a marker line:
//!
//! ```text
//! # progress: done=3 total=16 seed=1 fingerprint=9f2c...
//! ```
//!
//! `--resume` reloads those rows when the fingerprint (a hash of everything
//! that determines the numbers) matches, and continues with the next point.
//! Each point's random stream depends only on the master seed and the point
//! index, so a resumed file is byte-identical to an uninterrupted one.

use crate::CliError;
use sha2::{Digest, Sha256};
use std::fs;
use std::path::{Path, PathBuf};

/// Shortest round-trip decimal form; exponent notation outside `[1e-4, 1e6)`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if (1e-4..1e6).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Header plus string rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.header).expect("writing to memory");
        for r in &self.rows {
            w.write_record(r).expect("writing to memory");
        }
        w.into_inner().expect("writing to memory")
    }
}

/// Writes `bytes` to a sibling temporary file, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path).map_err(|e| CliError::Io(format!("cannot rename to {}: {e}", path.display())))
}

pub fn partial_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".partial");
    PathBuf::from(p)
}

/// First 16 hex digits of SHA-256 over `text`.
pub fn fingerprint(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Progress marker contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Progress {
    pub done: usize,
    pub total: usize,
    pub seed: u64,
    pub fingerprint: String,
}

impl Progress {
    pub fn marker_line(&self) -> String {
        format!(
            "# progress: done={} total={} seed={} fingerprint={}\n",
            self.done, self.total, self.seed, self.fingerprint
        )
    }

    pub fn parse(line: &str) -> Option<Self> {
        let rest = line.trim_end().strip_prefix("# progress:")?;
        let mut done = None;
        let mut total = None;
        let mut seed = None;
        let mut fp = None;
        for kv in rest.split_whitespace() {
            let (k, v) = kv.split_once('=')?;
            match k {
                "done" => done = v.parse().ok(),
                "total" => total = v.parse().ok(),
                "seed" => seed = v.parse().ok(),
                "fingerprint" => fp = Some(v.to_string()),
                _ => {}
            }
        }
        Some(Self { done: done?, total: total?, seed: seed?, fingerprint: fp? })
    }
}

pub fn write_partial(path: &Path, table: &Table, progress: &Progress) -> Result<(), CliError> {
    let mut bytes = table.to_csv();
    bytes.extend_from_slice(progress.marker_line().as_bytes());
    write_atomic(path, &bytes)
}

/// Loads rows from a partial file written for the same fingerprint.
///
/// Returns `Ok(None)` when there is no partial file.
pub fn read_partial(path: &Path, header: &[&str], fingerprint: &str) -> Result<Option<Vec<Vec<String>>>, CliError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(CliError::Io(format!("cannot read {}: {e}", path.display()))),
    };
    let bad = |why: &str| CliError::Config(format!("cannot resume from {}: {why}", path.display()));
    let progress = text
        .lines()
        .rev()
        .find_map(Progress::parse)
        .ok_or_else(|| bad("no progress marker line"))?;
    if progress.fingerprint != fingerprint {
        return Err(bad("it was written for a different configuration"));
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let file_header: Vec<String> = reader
        .headers()
        .map_err(|e| bad(&e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if file_header != header {
        return Err(bad("header does not match"));
    }
    let rows = reader
        .records()
        .map(|r| r.map(|r| r.iter().map(str::to_string).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| bad(&e.to_string()))?;
    if rows.len() != progress.done || progress.done > progress.total {
        return Err(bad("row count does not match the progress marker"));
    }
    Ok(Some(rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(-0.0), "0");
        assert_eq!(fmt_num(20.0), "20");
        assert_eq!(fmt_num(0.05), "0.05");
        assert_eq!(fmt_num(0.15), "0.15");
        assert_eq!(fmt_num(1.25e-5), "1.25e-5");
        assert_eq!(fmt_num(-2.5), "-2.5");
        assert_eq!(fmt_num(1e7), "1e7");
        assert_eq!(fmt_num(f64::INFINITY), "inf");
        for x in [0.1 + 0.2, 1.0 / 3.0, 7.3e-9, 0.499_999_999_999] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(vec!["a", "b"]);
        t.rows.push(vec!["1".into(), "0.5".into()]);
        assert_eq!(t.to_csv(), b"a,b\n1,0.5\n");
        assert_eq!(Table::new(vec!["x"]).to_csv(), b"x\n");
    }

    #[test]
    fn partial_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("o.csv.partial");
        let mut t = Table::new(vec!["a", "b"]);
        t.rows.push(vec!["1".into(), "2".into()]);
        let p = Progress { done: 1, total: 3, seed: 7, fingerprint: "abc".into() };
        write_partial(&path, &t, &p).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.ends_with("# progress: done=1 total=3 seed=7 fingerprint=abc\n"));
        assert_eq!(read_partial(&path, &["a", "b"], "abc").unwrap().unwrap(), t.rows);
        assert!(read_partial(&path, &["a", "b"], "xyz").is_err());
        assert!(read_partial(&path, &["a", "c"], "abc").is_err());
        assert!(read_partial(&dir.path().join("none"), &["a"], "abc").unwrap().is_none());
        assert_eq!(Progress::parse(&p.marker_line()), Some(p));
    }

    #[test]
    fn fingerprint_stable() {
        assert_eq!(fingerprint("x"), fingerprint("x"));
        assert_ne!(fingerprint("x"), fingerprint("y"));
        assert_eq!(fingerprint("x").len(), 16);
    }
}
