//! Content-addressed on-disk store for dense complex matrices.
//!
//! One file per object, `<root>/<f-hash hex>/<kind>_<a>_<b>_<c>.fqgc`, with a
//! fixed little-endian header followed by column-major `(re, im)` pairs, and a
//! `.sha256` sidecar holding the hex digest of the file bytes. Writes go to a
//! temporary file in the same directory and are renamed into place.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{FqgError, Result};
use crate::linalg::{C64, CMat};

pub const MAGIC: &[u8; 4] = b"FQGC";
pub const FORMAT_VERSION: u32 = 1;
pub const HEADER_LEN: usize = 4 + 4 + 4 + 32 + 1 + 12 + 4 + 4;
const EXT: &str = "fqgc";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[repr(u8)]
pub enum Kind {
    Projection = 1,
    Basis = 2,
    Fusion = 3,
    Conjugation = 4,
    Block = 10,
}

impl Kind {
    pub fn from_u8(v: u8) -> Option<Kind> {
        Some(match v {
            1 => Kind::Projection,
            2 => Kind::Basis,
            3 => Kind::Fusion,
            4 => Kind::Conjugation,
            10 => Kind::Block,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Projection => "projection",
            Kind::Basis => "basis",
            Kind::Fusion => "fusion",
            Kind::Conjugation => "conjugation",
            Kind::Block => "block",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Key {
    pub big_n: u32,
    pub f_hash: [u8; 32],
    pub kind: Kind,
    pub levels: [u32; 3],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Header {
    pub version: u32,
    pub key: Key,
    pub rows: u32,
    pub cols: u32,
}

pub fn encode(key: &Key, m: &CMat) -> Vec<u8> {
    let (r, c) = (m.nrows(), m.ncols());
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * r * c);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&key.big_n.to_le_bytes());
    out.extend_from_slice(&key.f_hash);
    out.push(key.kind as u8);
    for l in key.levels {
        out.extend_from_slice(&l.to_le_bytes());
    }
    out.extend_from_slice(&(r as u32).to_le_bytes());
    out.extend_from_slice(&(c as u32).to_le_bytes());
    for j in 0..c {
        for z in m.col_as_slice(j) {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn u32_at(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes(b[off..off + 4].try_into().unwrap())
}

pub fn decode_header(b: &[u8]) -> Result<Header> {
    if b.len() < HEADER_LEN || &b[..4] != MAGIC {
        return Err(FqgError::Shape("not an FQGC file".into()));
    }
    let version = u32_at(b, 4);
    let big_n = u32_at(b, 8);
    let f_hash: [u8; 32] = b[12..44].try_into().unwrap();
    let kind = Kind::from_u8(b[44]).ok_or_else(|| FqgError::Shape(format!("unknown kind {}", b[44])))?;
    let levels = [u32_at(b, 45), u32_at(b, 49), u32_at(b, 53)];
    let rows = u32_at(b, 57);
    let cols = u32_at(b, 61);
    Ok(Header { version, key: Key { big_n, f_hash, kind, levels }, rows, cols })
}

pub fn decode(b: &[u8]) -> Result<(Header, CMat)> {
    let h = decode_header(b)?;
    let (r, c) = (h.rows as usize, h.cols as usize);
    if b.len() != HEADER_LEN + 16 * r * c {
        return Err(FqgError::Shape(format!(
            "payload length {} does not match {}x{}",
            b.len() - HEADER_LEN,
            r,
            c
        )));
    }
    let mut m = CMat::zeros(r, c);
    let mut off = HEADER_LEN;
    for j in 0..c {
        for z in m.col_as_slice_mut(j) {
            let re = f64::from_le_bytes(b[off..off + 8].try_into().unwrap());
            let im = f64::from_le_bytes(b[off + 8..off + 16].try_into().unwrap());
            *z = C64::new(re, im);
            off += 16;
        }
    }
    Ok((h, m))
}

fn digest_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Serialize)]
pub struct Entry {
    pub path: PathBuf,
    pub f_hash: String,
    pub kind: &'static str,
    pub levels: [u32; 3],
    pub rows: u32,
    pub cols: u32,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum VerifyStatus {
    Ok,
    MissingChecksum,
    ChecksumMismatch,
    BadHeader(String),
}

#[derive(Clone, Debug)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, key: &Key) -> PathBuf {
        let [a, b, c] = key.levels;
        self.root
            .join(hex::encode(key.f_hash))
            .join(format!("{}_{}_{}_{}.{EXT}", key.kind as u8, a, b, c))
    }

    /// A miss is returned for absent files, foreign versions, mismatched headers and
    /// corrupted contents; the caller recomputes and overwrites.
    pub fn get(&self, key: &Key) -> Result<Option<CMat>> {
        let path = self.path(key);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        if let Ok(sum) = fs::read_to_string(sidecar(&path)) {
            if sum.trim() != digest_hex(&bytes) {
                return Ok(None);
            }
        }
        match decode(&bytes) {
            Ok((h, m)) if h.version == FORMAT_VERSION && h.key == *key => Ok(Some(m)),
            _ => Ok(None),
        }
    }

    pub fn put(&self, key: &Key, m: &CMat) -> Result<()> {
        let path = self.path(key);
        let dir = path.parent().unwrap();
        fs::create_dir_all(dir)?;
        let bytes = encode(key, m);
        let sum = digest_hex(&bytes);
        write_atomic(&sidecar(&path), sum.as_bytes())?;
        write_atomic(&path, &bytes)?;
        Ok(())
    }

    fn files(&self) -> Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        if !self.root.exists() {
            return Ok(out);
        }
        for d in fs::read_dir(&self.root)? {
            let d = d?.path();
            if !d.is_dir() {
                continue;
            }
            for f in fs::read_dir(&d)? {
                let f = f?.path();
                if f.extension().and_then(|e| e.to_str()) == Some(EXT) {
                    out.push(f);
                }
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn list(&self) -> Result<Vec<Entry>> {
        let mut out = Vec::new();
        for p in self.files()? {
            let mut head = vec![0u8; HEADER_LEN];
            let mut f = fs::File::open(&p)?;
            let bytes = f.metadata()?.len();
            if std::io::Read::read_exact(&mut f, &mut head).is_err() {
                continue;
            }
            if let Ok(h) = decode_header(&head) {
                out.push(Entry {
                    path: p,
                    f_hash: hex::encode(h.key.f_hash),
                    kind: h.key.kind.name(),
                    levels: h.key.levels,
                    rows: h.rows,
                    cols: h.cols,
                    bytes,
                });
            }
        }
        Ok(out)
    }

    pub fn verify(&self) -> Result<Vec<(PathBuf, VerifyStatus)>> {
        let mut out = Vec::new();
        for p in self.files()? {
            let bytes = fs::read(&p)?;
            let st = match decode(&bytes) {
                Err(e) => VerifyStatus::BadHeader(e.to_string()),
                Ok(_) => match fs::read_to_string(sidecar(&p)) {
                    Err(_) => VerifyStatus::MissingChecksum,
                    Ok(s) if s.trim() == digest_hex(&bytes) => VerifyStatus::Ok,
                    Ok(_) => VerifyStatus::ChecksumMismatch,
                },
            };
            out.push((p, st));
        }
        Ok(out)
    }

    /// Removes every object of one parameter family (by F-hash hex prefix), or all
    /// objects when `f_hash` is `None`. Returns the number of removed objects.
    pub fn purge(&self, f_hash: Option<&str>) -> Result<usize> {
        let mut n = 0;
        for p in self.files()? {
            let fam = p.parent().and_then(|d| d.file_name()).and_then(|s| s.to_str()).unwrap_or("");
            if f_hash.map_or(true, |h| fam.starts_with(h)) {
                fs::remove_file(&p)?;
                let _ = fs::remove_file(sidecar(&p));
                n += 1;
            }
        }
        Ok(n)
    }
}

fn sidecar(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".sha256");
    PathBuf::from(s)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap();
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        path.file_name().unwrap().to_string_lossy(),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}
