//! Word pool, catalog and feedback-table files.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;
use wordlab_core::agent::{Catalog, CatalogError};
use wordlab_core::entropy::FeedbackTable;
use wordlab_core::word::PoolError;
use wordlab_core::{Lexicon, PoolKind, WordPool};

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Pool { path: PathBuf, source: PoolError },
    #[error("{path}: {source}")]
    Catalog { path: PathBuf, source: CatalogError },
    #[error("solutions are not a subset of guesses: {0}")]
    Lexicon(PoolError),
}

fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Newline-delimited pool file, order preserved.
pub fn load_pool(path: &Path, kind: PoolKind) -> Result<WordPool, LoadError> {
    WordPool::parse(kind, &read(path)?).map_err(|source| LoadError::Pool {
        path: path.to_owned(),
        source,
    })
}

pub fn load_lexicon(guesses: &Path, solutions: &Path) -> Result<Lexicon, LoadError> {
    let g = load_pool(guesses, PoolKind::Guesses)?;
    let s = load_pool(solutions, PoolKind::Solutions)?;
    Lexicon::new(g, s).map_err(LoadError::Lexicon)
}

pub fn load_catalog(path: &Path) -> Result<Catalog, LoadError> {
    Catalog::parse(&read(path)?).map_err(|source| LoadError::Catalog {
        path: path.to_owned(),
        source,
    })
}

const TABLE_MAGIC: &[u8; 4] = b"WFT1";
const HEADER_LEN: usize = 16;

/// First six bytes of the SHA-256 of a pool's canonical text.
pub fn pool_digest(pool: &WordPool) -> [u8; 6] {
    let hash = Sha256::digest(pool.to_text().as_bytes());
    let mut out = [0u8; 6];
    out.copy_from_slice(&hash[..6]);
    out
}

fn table_header(lexicon: &Lexicon) -> [u8; HEADER_LEN] {
    let mut h = [0u8; HEADER_LEN];
    h[..4].copy_from_slice(TABLE_MAGIC);
    h[4..10].copy_from_slice(&pool_digest(lexicon.guesses()));
    h[10..].copy_from_slice(&pool_digest(lexicon.solutions()));
    h
}

/// Writes the table as a 16-byte header (magic, guess digest, solution
/// digest) followed by the guess-major code matrix.
pub fn write_table(path: &Path, lexicon: &Lexicon, table: &FeedbackTable) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = io::BufWriter::new(fs::File::create(&tmp)?);
        f.write_all(&table_header(lexicon))?;
        f.write_all(table.as_bytes())?;
        f.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    }
    fs::rename(tmp, path)
}

/// Reads a cached table; `None` if the file is missing, truncated, or was
/// built from different pools.
pub fn read_table(path: &Path, lexicon: &Lexicon) -> Option<FeedbackTable> {
    let mut f = fs::File::open(path).ok()?;
    let mut header = [0u8; HEADER_LEN];
    f.read_exact(&mut header).ok()?;
    if header != table_header(lexicon) {
        return None;
    }
    let (g, s) = (lexicon.guesses().len(), lexicon.solutions().len());
    let mut codes = Vec::with_capacity(g * s);
    f.read_to_end(&mut codes).ok()?;
    FeedbackTable::from_raw(g, s, codes)
}

/// Cached table if valid, else a fresh build written back to `path`.
pub fn load_or_build_table(path: &Path, lexicon: &Lexicon) -> FeedbackTable {
    if let Some(t) = read_table(path, lexicon) {
        return t;
    }
    let table = FeedbackTable::build(lexicon);
    if let Err(e) = write_table(path, lexicon, &table) {
        log::warn!("could not cache feedback table at {}: {e}", path.display());
    }
    table
}
