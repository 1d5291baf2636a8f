use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Read};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use sha2::{Digest, Sha256};

use super::registry::{lookup, DatasetEntry};
use super::{load_csv, DataTable};
use crate::error::{Error, IoContext, Result};

pub const CACHE_DIR_ENV: &str = "TABENC_CACHE_DIR";
pub const MIRROR_ENV: &str = "TABENC_MIRROR";
pub const OFFLINE_ENV: &str = "TABENC_OFFLINE";

const LOCK_TIMEOUT: Duration = Duration::from_secs(600);
const MAX_DOWNLOAD: u64 = 512 * 1024 * 1024;

#[derive(Clone, Debug)]
pub struct FetchOptions {
    pub cache_dir: PathBuf,
    /// Use only what is already cached.
    pub offline: bool,
    /// Directory or base URL holding files under their registry file names;
    /// tried instead of the upstream URL.
    pub mirror: Option<String>,
}

impl FetchOptions {
    pub fn new(cache_dir: impl Into<PathBuf>) -> Self {
        FetchOptions {
            cache_dir: cache_dir.into(),
            offline: false,
            mirror: None,
        }
    }

    /// `TABENC_CACHE_DIR` (default `~/.cache/tabenc`), `TABENC_MIRROR`,
    /// `TABENC_OFFLINE=1`.
    pub fn from_env() -> Self {
        FetchOptions {
            cache_dir: default_cache_dir(),
            offline: std::env::var(OFFLINE_ENV).is_ok_and(|v| v == "1" || v == "true"),
            mirror: std::env::var(MIRROR_ENV).ok().filter(|m| !m.is_empty()),
        }
    }
}

pub fn default_cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_DIR_ENV) {
        return PathBuf::from(dir);
    }
    let home = std::env::var_os("HOME").map_or_else(|| PathBuf::from("."), PathBuf::from);
    home.join(".cache").join("tabenc")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Exclusive lock on a cache subdirectory, held until dropped.
pub struct CacheLock {
    path: PathBuf,
}

impl CacheLock {
    pub fn acquire(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).at(dir)?;
        let path = dir.join(".lock");
        let start = Instant::now();
        loop {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(_) => return Ok(CacheLock { path }),
                Err(e) if e.kind() == ErrorKind::AlreadyExists => {
                    if start.elapsed() > LOCK_TIMEOUT {
                        return Err(Error::Fetch {
                            dataset: dir.display().to_string(),
                            message: format!("timed out waiting for lock {}", path.display()),
                        });
                    }
                    std::thread::sleep(Duration::from_millis(100));
                }
                Err(e) => return Err(e).at(&path),
            }
        }
    }
}

impl Drop for CacheLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

fn sidecar(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".sha256");
    path.with_file_name(name)
}

/// Checks `path` against the pinned digest, or against the digest recorded
/// when the file was first fetched (recording it if there is none yet).
fn verify(entry: &DatasetEntry, path: &Path) -> Result<()> {
    let bytes = fs::read(path).at(path)?;
    let actual = sha256_hex(&bytes);
    let side = sidecar(path);
    let expected = match &entry.sha256 {
        Some(pinned) => pinned.clone(),
        None if side.exists() => fs::read_to_string(&side).at(&side)?.trim().to_string(),
        None => {
            fs::write(&side, format!("{actual}\n")).at(&side)?;
            return Ok(());
        }
    };
    if expected != actual {
        return Err(Error::Integrity {
            path: path.to_path_buf(),
            expected,
            actual,
        });
    }
    Ok(())
}

fn http_get(url: &str) -> std::result::Result<Vec<u8>, String> {
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(Duration::from_secs(300)))
        .build()
        .into();
    let mut resp = agent.get(url).call().map_err(|e| e.to_string())?;
    resp.body_mut()
        .with_config()
        .limit(MAX_DOWNLOAD)
        .read_to_vec()
        .map_err(|e| e.to_string())
}

fn unzip_member(archive: &[u8], member: &str) -> std::result::Result<Vec<u8>, String> {
    let mut zip = zip::ZipArchive::new(std::io::Cursor::new(archive)).map_err(|e| e.to_string())?;
    let mut file = zip.by_name(member).map_err(|e| format!("{member}: {e}"))?;
    let mut out = Vec::new();
    file.read_to_end(&mut out).map_err(|e| e.to_string())?;
    Ok(out)
}

fn download(entry: &DatasetEntry, mirror: Option<&str>) -> std::result::Result<Vec<u8>, String> {
    if let Some(base) = mirror {
        if base.starts_with("http://") || base.starts_with("https://") {
            return http_get(&format!("{}/{}", base.trim_end_matches('/'), entry.file));
        }
        let path = Path::new(base).join(&entry.file);
        return fs::read(&path).map_err(|e| format!("{}: {e}", path.display()));
    }
    let body = http_get(&entry.url)?;
    match &entry.member {
        Some(member) => unzip_member(&body, member),
        None => Ok(body),
    }
}

/// Local path of a dataset's raw file, downloading it into the cache first
/// if needed.
pub fn fetch_dataset(name: &str, options: &FetchOptions) -> Result<PathBuf> {
    let entry = lookup(name)?;
    let dir = options.cache_dir.join(&entry.name);
    let path = dir.join(&entry.file);
    if path.exists() {
        verify(&entry, &path)?;
        return Ok(path);
    }
    if options.offline {
        return Err(Error::Fetch {
            dataset: name.to_string(),
            message: format!("offline and {} is not cached", path.display()),
        });
    }
    let _lock = CacheLock::acquire(&dir)?;
    if path.exists() {
        verify(&entry, &path)?;
        return Ok(path);
    }
    log::info!("fetching {name}");
    let bytes = download(&entry, options.mirror.as_deref()).map_err(|message| Error::Fetch {
        dataset: name.to_string(),
        message,
    })?;
    let tmp = dir.join(format!("{}.partial", entry.file));
    fs::write(&tmp, &bytes).at(&tmp)?;
    if let Err(e) = verify(&entry, &tmp) {
        let _ = fs::remove_file(&tmp);
        let _ = fs::remove_file(sidecar(&tmp));
        return Err(e);
    }
    if entry.sha256.is_none() {
        fs::rename(sidecar(&tmp), sidecar(&path)).at(&path)?;
    }
    fs::rename(&tmp, &path).at(&path)?;
    Ok(path)
}

/// Fetches (or finds in the cache) and parses a registry dataset.
pub fn load_dataset(name: &str, options: &FetchOptions) -> Result<DataTable> {
    let entry = lookup(name)?;
    let path = fetch_dataset(name, options)?;
    load_csv(&path, &entry.target, &entry.csv_options())
}
