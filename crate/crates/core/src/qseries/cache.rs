//! On-disk coefficient tables.
//!
//! One file per (constructor, parameters). The file starts with a versioned
//! header and a SHA-256 checksum of the coefficient block, then one decimal
//! coefficient per line:
//!
//! ```text
//! signeq-series v1
//! constructor delta
//! params -
//! truncation 10
//! offset24 0
//! checksum sha256:5d1c...
//! ---
//! 0
//! 1
//! -24
//! ...
//! ```
//!
//! The checksum covers the coefficient lines exactly as written, each
//! terminated by `\n`.

use std::fs;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::QSeries;

const MAGIC: &str = "signeq-series v1";

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache i/o error at {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("malformed cache file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("checksum mismatch in {0}")]
    Checksum(PathBuf),
    #[error("rebuilt series disagrees with cached prefix of {path} at index {index}")]
    PrefixMismatch { path: PathBuf, index: usize },
}

/// Identifies a cached table: a constructor name and a canonical parameter
/// string (`-` when there are none).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SeriesKey {
    pub constructor: String,
    pub params: String,
}

impl SeriesKey {
    pub fn new(constructor: impl Into<String>, params: impl Into<String>) -> Self {
        let params = params.into();
        SeriesKey {
            constructor: constructor.into(),
            params: if params.is_empty() { "-".to_string() } else { params },
        }
    }

    fn file_name(&self) -> String {
        let clean = |s: &str| -> String {
            s.chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
                .collect()
        };
        format!("{}__{}.series", clean(&self.constructor), clean(&self.params))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    /// An existing file covered the request and its checksum verified.
    Valid,
    /// No file existed; the table was built and written.
    Built,
    /// A shorter table existed; it was rebuilt at the new truncation, the
    /// old prefix was confirmed, and the file replaced.
    Extended,
}

#[derive(Clone, Debug)]
pub struct SeriesCache {
    dir: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CacheError + '_ {
    move |source| CacheError::Io { path: path.to_path_buf(), source }
}

fn checksum(lines: &[String]) -> String {
    let mut h = Sha256::new();
    for l in lines {
        h.update(l.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

impl SeriesCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        SeriesCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, key: &SeriesKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    pub fn exists(&self, key: &SeriesKey) -> bool {
        self.path(key).is_file()
    }

    /// Reads and verifies a cached table; `Ok(None)` if there is no file.
    pub fn load(&self, key: &SeriesKey) -> Result<Option<QSeries>, CacheError> {
        let path = self.path(key);
        let file = match fs::File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(io_err(&path)(e)),
        };
        let malformed = |reason: String| CacheError::Malformed { path: path.clone(), reason };
        let mut lines = BufReader::new(file).lines();
        let mut next = || -> Result<String, CacheError> {
            match lines.next() {
                Some(l) => l.map_err(io_err(&path)),
                None => Err(CacheError::Malformed { path: path.clone(), reason: "unexpected end of file".into() }),
            }
        };
        if next()? != MAGIC {
            return Err(malformed("missing or unsupported header".into()));
        }
        let mut field = |name: &str| -> Result<String, CacheError> {
            let line = next()?;
            line.strip_prefix(name)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| CacheError::Malformed { path: path.clone(), reason: format!("expected field `{name}`") })
        };
        let constructor = field("constructor")?;
        let params = field("params")?;
        if constructor != key.constructor || params != key.params {
            return Err(malformed(format!("file holds {constructor} {params}")));
        }
        let truncation: usize = field("truncation")?.parse().map_err(|_| malformed("bad truncation".into()))?;
        let offset24: i64 = field("offset24")?.parse().map_err(|_| malformed("bad offset24".into()))?;
        let sum = field("checksum")?;
        let sum = sum.strip_prefix("sha256:").ok_or_else(|| malformed("bad checksum field".into()))?.to_string();
        if next()? != "---" {
            return Err(malformed("missing separator".into()));
        }
        let mut body = Vec::with_capacity(truncation + 1);
        for line in lines {
            body.push(line.map_err(io_err(&path))?);
        }
        if body.len() != truncation + 1 {
            return Err(malformed(format!("expected {} coefficients, found {}", truncation + 1, body.len())));
        }
        if checksum(&body) != sum {
            return Err(CacheError::Checksum(path));
        }
        let coeffs = body
            .iter()
            .map(|l| l.parse::<BigInt>().map_err(|_| malformed(format!("bad coefficient `{l}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Some(QSeries::new(offset24, coeffs)))
    }

    /// Writes a table, replacing any previous file atomically.
    pub fn store(&self, key: &SeriesKey, series: &QSeries) -> Result<PathBuf, CacheError> {
        fs::create_dir_all(&self.dir).map_err(io_err(&self.dir))?;
        let path = self.path(key);
        let body: Vec<String> = series.coeffs().iter().map(|c| c.to_string()).collect();
        let mut text = String::new();
        text.push_str(MAGIC);
        text.push('\n');
        text.push_str(&format!("constructor {}\n", key.constructor));
        text.push_str(&format!("params {}\n", key.params));
        text.push_str(&format!("truncation {}\n", series.truncation()));
        text.push_str(&format!("offset24 {}\n", series.offset24()));
        text.push_str(&format!("checksum sha256:{}\n---\n", checksum(&body)));
        for l in &body {
            text.push_str(l);
            text.push('\n');
        }
        let tmp = path.with_extension("series.tmp");
        let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
        f.write_all(text.as_bytes()).map_err(io_err(&tmp))?;
        f.sync_all().map_err(io_err(&tmp))?;
        fs::rename(&tmp, &path).map_err(io_err(&path))?;
        Ok(path)
    }

    /// Returns the table truncated at `truncation`, building or extending
    /// the cached file as needed.
    pub fn get_or_build(
        &self,
        key: &SeriesKey,
        truncation: usize,
        build: impl FnOnce(usize) -> QSeries,
    ) -> Result<(QSeries, CacheStatus), CacheError> {
        match self.load(key)? {
            Some(cached) if cached.truncation() >= truncation => {
                let mut coeffs = cached.coeffs()[..=truncation].to_vec();
                coeffs.shrink_to_fit();
                Ok((QSeries::new(cached.offset24(), coeffs), CacheStatus::Valid))
            }
            Some(cached) => {
                let fresh = build(truncation);
                if let Some(index) = cached.coeffs().iter().zip(fresh.coeffs()).position(|(a, b)| a != b) {
                    return Err(CacheError::PrefixMismatch { path: self.path(key), index });
                }
                if cached.offset24() != fresh.offset24() {
                    return Err(CacheError::Malformed {
                        path: self.path(key),
                        reason: "offset changed on rebuild".into(),
                    });
                }
                self.store(key, &fresh)?;
                Ok((fresh, CacheStatus::Extended))
            }
            None => {
                let fresh = build(truncation);
                self.store(key, &fresh)?;
                Ok((fresh, CacheStatus::Built))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qseries::delta;

    #[test]
    fn roundtrip_and_statuses() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SeriesCache::new(dir.path());
        let key = SeriesKey::new("delta", "");
        assert!(cache.load(&key).unwrap().is_none());

        let (s, st) = cache.get_or_build(&key, 50, delta).unwrap();
        assert_eq!(st, CacheStatus::Built);
        assert_eq!(s.coeff(2), BigInt::from(-24));
        assert_eq!(cache.load(&key).unwrap().unwrap(), s);

        let (s2, st) = cache.get_or_build(&key, 50, |_| unreachable!()).unwrap();
        assert_eq!((s2, st), (s.clone(), CacheStatus::Valid));

        let (small, st) = cache.get_or_build(&key, 10, |_| unreachable!()).unwrap();
        assert_eq!(st, CacheStatus::Valid);
        assert_eq!(small, delta(10));

        let (big, st) = cache.get_or_build(&key, 120, delta).unwrap();
        assert_eq!(st, CacheStatus::Extended);
        assert_eq!(big.truncation(), 120);
        assert_eq!(cache.load(&key).unwrap().unwrap().truncation(), 120);
    }

    #[test]
    fn tampering_is_detected() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SeriesCache::new(dir.path());
        let key = SeriesKey::new("delta", "");
        let path = cache.store(&key, &delta(20)).unwrap();
        let text = fs::read_to_string(&path).unwrap().replace("\n-24\n", "\n-25\n");
        fs::write(&path, text).unwrap();
        assert!(matches!(cache.load(&key), Err(CacheError::Checksum(_))));

        fs::write(&path, "not a cache\n").unwrap();
        assert!(matches!(cache.load(&key), Err(CacheError::Malformed { .. })));
    }

    #[test]
    fn prefix_mismatch_on_extension() {
        let dir = tempfile::tempdir().unwrap();
        let cache = SeriesCache::new(dir.path());
        let key = SeriesKey::new("delta", "");
        cache.store(&key, &QSeries::from_i64(0, &[0, 1, -23], 2)).unwrap();
        let err = cache.get_or_build(&key, 20, delta).unwrap_err();
        assert!(matches!(err, CacheError::PrefixMismatch { index: 2, .. }));
    }
}
