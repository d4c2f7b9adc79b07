//! Index directories: one `NAME.mrs` file per set plus `manifest.json`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use mrset::evalexpr::{Catalog, EvalConfig};
use mrset::{Expr, MotherHash, MultiResSet, QueryStats, WordWidth};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};
use crate::input;

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entry {
    pub file: String,
    pub n1: u64,
    pub dedup: u64,
    pub w: u32,
    #[serde(rename = "W")]
    pub word_bits: u32,
    pub seed_digest: String,
    #[serde(rename = "C")]
    pub c: u32,
    pub binary: bool,
}

/// Shared parameters and per-set entries of an index directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub w: u32,
    #[serde(rename = "W")]
    pub word_bits: u32,
    pub seed: String,
    pub seed_digest: String,
    pub sets: BTreeMap<String, Entry>,
}

pub fn seed_digest(seed: &[u8; 16]) -> String {
    hex::encode(Sha256::digest(seed))
}

impl Manifest {
    /// Reads `dir/manifest.json`; `None` if it does not exist.
    pub fn load(dir: &Path) -> Result<Option<Manifest>> {
        let path = dir.join(MANIFEST);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(CliError::io(&path)(e)),
        };
        serde_json::from_str(&text)
            .map(Some)
            .map_err(|e| CliError::Corrupt { path, msg: e.to_string() })
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(MANIFEST);
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(&path, text).map_err(CliError::io(path))
    }

    fn hash(&self) -> Result<MotherHash> {
        let seed: [u8; 16] = hex::decode(&self.seed)
            .ok()
            .and_then(|b| b.try_into().ok())
            .ok_or_else(|| CliError::Corrupt {
                path: MANIFEST.into(),
                msg: "bad seed".into(),
            })?;
        Ok(MotherHash::new(seed, self.w)?)
    }
}

/// Options for [`build`]. `None` fields default to the existing manifest's
/// values, or to `w = 64`, `W = 64`, seed 0.
#[derive(Clone, Debug, Default)]
pub struct BuildOptions {
    pub w: Option<u32>,
    pub word_bits: Option<u32>,
    pub seed: Option<[u8; 16]>,
    pub c: Option<u32>,
    pub binary: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildReport {
    pub path: PathBuf,
    pub n1: u64,
    pub dedup: u64,
}

/// Preprocesses the elements of `input` into `dir/name.mrs` and records it
/// in the manifest.
pub fn build(input: &Path, name: &str, dir: &Path, opts: &BuildOptions) -> Result<BuildReport> {
    input::check_name(name)?;
    let existing = Manifest::load(dir)?;
    let (w, word_bits, seed) = match &existing {
        Some(m) => {
            let seed = m.hash()?.seed();
            let want = (opts.w.unwrap_or(m.w), opts.word_bits.unwrap_or(m.word_bits), opts.seed.unwrap_or(seed));
            if want != (m.w, m.word_bits, seed) {
                return Err(CliError::SeedMismatch(format!(
                    "{} was built with w={}, W={}, seed digest {}",
                    dir.display(),
                    m.w,
                    m.word_bits,
                    m.seed_digest
                )));
            }
            want
        }
        None => (opts.w.unwrap_or(64), opts.word_bits.unwrap_or(64), opts.seed.unwrap_or([0; 16])),
    };
    let hash = MotherHash::new(seed, w)?;
    let width = WordWidth::new(word_bits)?;
    let raw = fs::read(input).map_err(CliError::io(input))?;
    let elems = if opts.binary {
        input::parse_binary(&raw, w)?
    } else {
        let text = String::from_utf8(raw).map_err(|e| CliError::Parse(format!("{}: {e}", input.display())))?;
        input::parse_text(&text, w)?
    };
    let set = MultiResSet::build(name, &elems, &hash, width)?;
    let c = opts.c.unwrap_or(mrset::multires::DEFAULT_C);
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let file = format!("{name}.mrs");
    let path = dir.join(&file);
    fs::write(&path, set.to_bytes(c)).map_err(CliError::io(&path))?;
    let digest = seed_digest(&seed);
    let mut manifest = existing.unwrap_or_else(|| Manifest {
        w,
        word_bits,
        seed: hex::encode(seed),
        seed_digest: digest.clone(),
        sets: BTreeMap::new(),
    });
    manifest.sets.insert(
        name.to_string(),
        Entry {
            file,
            n1: set.len() as u64,
            dedup: set.dedup_count(),
            w,
            word_bits,
            seed_digest: digest,
            c,
            binary: opts.binary,
        },
    );
    manifest.save(dir)?;
    Ok(BuildReport {
        path,
        n1: set.len() as u64,
        dedup: set.dedup_count(),
    })
}

/// Loads the named sets of an index directory. Returns the catalog and the
/// resolution constant stored with the first set.
pub fn load(dir: &Path, names: &[&str]) -> Result<(Catalog, u32)> {
    let manifest = Manifest::load(dir)?.ok_or_else(|| CliError::Io {
        path: dir.join(MANIFEST),
        source: std::io::ErrorKind::NotFound.into(),
    })?;
    let mut cat = Catalog::new();
    let mut c = None;
    for &name in names {
        if cat.get(name).is_some() {
            continue;
        }
        let entry = manifest
            .sets
            .get(name)
            .ok_or_else(|| CliError::UnknownSet(name.to_string()))?;
        if entry.seed_digest != manifest.seed_digest || (entry.w, entry.word_bits) != (manifest.w, manifest.word_bits)
        {
            return Err(CliError::SeedMismatch(format!("manifest entry `{name}` disagrees with the index")));
        }
        let path = dir.join(&entry.file);
        let bytes = fs::read(&path).map_err(CliError::io(&path))?;
        let (set, sc) = MultiResSet::from_bytes(name, &bytes).map_err(|e| CliError::Corrupt {
            path: path.clone(),
            msg: e.to_string(),
        })?;
        if seed_digest(&set.mother_hash().seed()) != manifest.seed_digest {
            return Err(CliError::SeedMismatch(format!("{} has a different seed", path.display())));
        }
        c.get_or_insert(sc);
        cat.insert(set)?;
    }
    Ok((cat, c.unwrap_or(mrset::multires::DEFAULT_C)))
}

/// Parses and answers `expr` over the sets in `dir`. `cfg.c` is replaced
/// by the stored constant unless `keep_c` is set.
pub fn query(dir: &Path, expr: &str, cfg: &EvalConfig, keep_c: bool) -> Result<(Vec<u64>, QueryStats)> {
    let expr: Expr = expr.parse().map_err(|e: mrset::ParseError| CliError::Parse(e.to_string()))?;
    let (cat, c) = load(dir, &expr.leaves())?;
    let cfg = EvalConfig {
        c: if keep_c { cfg.c } else { c },
        ..cfg.clone()
    };
    Ok(mrset::query(&expr, &cat, &cfg)?)
}
