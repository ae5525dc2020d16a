//! Optional TOML configuration for the command-line tool. Flags given on
//! the command line take precedence.
//!
//! ```toml
//! index = "repo.elidx"
//! model = "model.elimdl"
//!
//! [session]
//! retrieval_m = 5
//! min_tokens = 5
//!
//! [session.window]
//! token_budget = 200
//!
//! [train.hyper]
//! lambda = 0.001
//! epochs = 50
//!
//! [serve]
//! port = 8080
//! log_dir = "sessions"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use elicit_core::classify::TrainConfig;
use elicit_core::session::SessionConfig;

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeConfig {
    pub host: String,
    pub port: u16,
    pub log_dir: Option<PathBuf>,
}

impl Default for ServeConfig {
    fn default() -> Self {
        ServeConfig {
            host: "127.0.0.1".into(),
            port: 8080,
            log_dir: None,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub index: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub session: SessionConfig,
    pub train: TrainConfig,
    pub serve: ServeConfig,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        toml::from_str(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }
}
