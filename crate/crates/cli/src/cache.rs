//! On-disk cache of f-tables.
//!
//! Enabled by pointing `XXBATH_CACHE_DIR` at a directory. Entries are keyed
//! by a SHA-256 over the format version, `N`, `m` and the coupling profile;
//! uniform couplings share one entry per `(N, m)` since their tables are
//! stored in units of `g`. Unreadable or mismatched entries are rebuilt.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use xxbath::{Complex64, Coupling, FTable, FTableSet, TableBuildOptions};

pub const CACHE_ENV: &str = "XXBATH_CACHE_DIR";
const MAGIC: &[u8; 4] = b"XXFT";
const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 4 + 8 + 8;

#[derive(Clone, Debug, Default)]
pub struct TableCache {
    dir: Option<PathBuf>,
}

impl TableCache {
    pub fn disabled() -> Self {
        Self { dir: None }
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        Self { dir: Some(dir.into()) }
    }

    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::at(d),
            _ => Self::disabled(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn entry_path(&self, n_sites: usize, m: usize, coupling: &Coupling) -> Option<PathBuf> {
        let dir = self.dir.as_ref()?;
        let mut hasher = Sha256::new();
        hasher.update(b"xxbath-ftable");
        hasher.update(FORMAT_VERSION.to_le_bytes());
        hasher.update((n_sites as u64).to_le_bytes());
        hasher.update((m as u64).to_le_bytes());
        match coupling {
            Coupling::Uniform(_) => hasher.update(b"uniform"),
            Coupling::PerSite(gs) => {
                hasher.update(b"per-site");
                for g in gs {
                    hasher.update(g.to_bits().to_le_bytes());
                }
            }
        }
        let digest = hasher.finalize();
        let hex: String = digest.iter().take(16).map(|b| format!("{b:02x}")).collect();
        Some(dir.join(format!("ftable-n{n_sites}-m{m}-{hex}.bin")))
    }

    fn read(path: &Path, n_sites: usize, m: usize, coupling: &Coupling) -> Option<FTable> {
        let bytes = fs::read(path).ok()?;
        if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
            return None;
        }
        let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
        let long = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        if word(4) != FORMAT_VERSION || word(8) as usize != n_sites || word(12) as usize != m {
            return None;
        }
        let count = (long(16) * long(24)) as usize;
        let body = &bytes[HEADER_LEN..];
        if body.len() != count * 16 {
            return None;
        }
        let values = body
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        FTable::from_values(n_sites, m, coupling.clone(), values).ok()
    }

    fn write(path: &Path, table: &FTable) -> std::io::Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let mut buf = Vec::with_capacity(HEADER_LEN + 16 * table.values().len());
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(table.n_sites() as u32).to_le_bytes());
        buf.extend_from_slice(&(table.m() as u32).to_le_bytes());
        buf.extend_from_slice(&(table.rows() as u64).to_le_bytes());
        buf.extend_from_slice(&(table.cols() as u64).to_le_bytes());
        for v in table.values() {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
        // write-then-rename so concurrent runs never see a partial entry
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        fs::File::create(&tmp)?.write_all(&buf)?;
        fs::rename(&tmp, path)
    }

    /// Loads the table from the cache or builds (and stores) it.
    pub fn table(&self, n_sites: usize, m: usize, coupling: &Coupling, opts: &TableBuildOptions) -> xxbath::Result<FTable> {
        let path = self.entry_path(n_sites, m, coupling);
        if let Some(table) = path.as_deref().and_then(|p| Self::read(p, n_sites, m, coupling)) {
            return Ok(table);
        }
        let table = FTable::build(n_sites, m, coupling, opts)?;
        if let Some(p) = &path {
            // a failed store only costs a rebuild next time
            let _ = Self::write(p, &table);
        }
        Ok(table)
    }

    pub fn table_set(&self, n_sites: usize, coupling: &Coupling, ms: &[usize]) -> xxbath::Result<FTableSet> {
        let opts = TableBuildOptions::default();
        let mut set = FTableSet::new();
        for &m in ms {
            set.insert(self.table(n_sites, m, coupling, &opts)?);
        }
        Ok(set)
    }
}
