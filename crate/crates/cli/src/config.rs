//! Layered settings: flags, then `CTF_*` environment variables (both
//! resolved by clap), then the TOML config file, then defaults.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ctf_core::referee::WindowConfig;
use serde::Deserialize;

pub const DEFAULT_STORE: &str = "leaderboard.json";

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub data_root: Option<PathBuf>,
    pub store: Option<PathBuf>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub windows: WindowOverrides,
}

#[derive(Debug, Default, Clone, Copy, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct WindowOverrides {
    /// Leading rows for short-time forecast scores
    #[arg(long, env = "CTF_SHORT_K")]
    pub short_k: Option<usize>,
    /// Trailing rows for long-time scores
    #[arg(long, env = "CTF_LONG_K")]
    pub long_k: Option<usize>,
    /// Wavenumber half-width for the spectral score
    #[arg(long, env = "CTF_KMAX")]
    pub kmax: Option<usize>,
    /// Histogram bins for the Lorenz long-time score
    #[arg(long, env = "CTF_BINS")]
    pub bins: Option<usize>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<FileConfig> {
        let Some(path) = path else { return Ok(FileConfig::default()) };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Settings after layering.
#[derive(Debug, Clone)]
pub struct Settings {
    pub data_root: Option<PathBuf>,
    pub store: PathBuf,
    pub seed: Option<u64>,
    pub windows: WindowConfig,
}

impl Settings {
    pub fn resolve(
        file: FileConfig,
        data_root: Option<PathBuf>,
        store: Option<PathBuf>,
        windows: WindowOverrides,
    ) -> Result<Settings> {
        let d = WindowConfig::default();
        let fw = file.windows;
        let windows = WindowConfig {
            forecast_short_k: windows.short_k.or(fw.short_k).unwrap_or(d.forecast_short_k),
            long_k: windows.long_k.or(fw.long_k).unwrap_or(d.long_k),
            kmax: windows.kmax.or(fw.kmax).unwrap_or(d.kmax),
            bins: windows.bins.or(fw.bins).unwrap_or(d.bins),
        };
        windows.validate()?;
        let data_root = data_root.or(file.data_root);
        let store = store.or(file.store).unwrap_or_else(|| PathBuf::from(DEFAULT_STORE));
        Ok(Settings {
            store: resolve_path(data_root.as_deref(), &store),
            data_root,
            seed: file.seed,
            windows,
        })
    }

    /// Relative paths are taken against the data root when one is set.
    pub fn path(&self, p: &Path) -> PathBuf {
        resolve_path(self.data_root.as_deref(), p)
    }
}

fn resolve_path(root: Option<&Path>, p: &Path) -> PathBuf {
    match root {
        Some(root) if p.is_relative() => root.join(p),
        _ => p.to_path_buf(),
    }
}
