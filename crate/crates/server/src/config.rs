//! Server settings from a TOML file, environment variables and flags.
//!
//! Precedence, highest first: command-line flags, environment, file,
//! defaults. The key itself is never part of the configuration; only the
//! name of the variable that carries it.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use onboard_core::gateway::{ProviderConfig, ProviderMode, DEFAULT_KEY_ENV_VAR};
use onboard_core::orchestrator::DEFAULT_HISTORY_WINDOW;
use serde::Deserialize;

pub const ENV_PORT: &str = "ONBOARD_PORT";
pub const ENV_PROVIDER: &str = "ONBOARD_PROVIDER";
pub const ENV_KEY_VAR: &str = "ONBOARD_KEY_VAR";
pub const ENV_ENDPOINT: &str = "ONBOARD_ENDPOINT";
pub const ENV_MODEL: &str = "ONBOARD_MODEL";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config file {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid value for {name}: {message}")]
    Value { name: String, message: String },
}

/// `[provider]` table of the config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ProviderSection {
    mode: Option<String>,
    endpoint_url: Option<String>,
    model_name: Option<String>,
    api_key_env_var: Option<String>,
    request_timeout_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    bind: Option<String>,
    port: Option<u16>,
    dashboards: Vec<PathBuf>,
    data_dir: Option<PathBuf>,
    history_window: Option<usize>,
    provider: ProviderSection,
}

/// Values given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub port: Option<u16>,
    pub provider: Option<ProviderMode>,
    pub dashboards: Vec<PathBuf>,
    pub data_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServerConfig {
    pub bind: String,
    pub port: u16,
    pub dashboards: Vec<PathBuf>,
    /// Where dashboards and session logs persist across restarts.
    pub data_dir: Option<PathBuf>,
    pub history_window: usize,
    pub provider: ProviderConfig,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1".into(),
            port: 8080,
            dashboards: Vec::new(),
            data_dir: None,
            history_window: DEFAULT_HISTORY_WINDOW,
            provider: ProviderConfig::default(),
        }
    }
}

impl ServerConfig {
    pub fn socket_addr(&self) -> Result<SocketAddr, ConfigError> {
        format!("{}:{}", self.bind, self.port)
            .parse()
            .map_err(|e| ConfigError::Value {
                name: "bind".into(),
                message: format!("{e}"),
            })
    }

    /// Reads `path` if given, then applies `env` and `overrides`.
    pub fn load(
        path: Option<&Path>,
        env: impl Fn(&str) -> Option<String>,
        overrides: Overrides,
    ) -> Result<Self, ConfigError> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Read {
                    path: p.to_path_buf(),
                    source,
                })?;
                toml::from_str::<FileConfig>(&text).map_err(|e| ConfigError::Parse {
                    path: p.to_path_buf(),
                    message: e.to_string(),
                })?
            }
            None => FileConfig::default(),
        };
        Self::merge(file, env, overrides)
    }

    fn merge(
        file: FileConfig,
        env: impl Fn(&str) -> Option<String>,
        overrides: Overrides,
    ) -> Result<Self, ConfigError> {
        let mut cfg = ServerConfig::default();
        let p = file.provider;

        if let Some(bind) = file.bind {
            cfg.bind = bind;
        }
        if let Some(port) = file.port {
            cfg.port = port;
        }
        cfg.dashboards = file.dashboards;
        cfg.data_dir = file.data_dir;
        if let Some(w) = file.history_window {
            cfg.history_window = w;
        }
        if let Some(mode) = p.mode {
            cfg.provider.mode = parse_mode("provider.mode", &mode)?;
        }
        cfg.provider.endpoint_url = p.endpoint_url;
        if let Some(m) = p.model_name {
            cfg.provider.model_name = m;
        }
        if let Some(v) = p.api_key_env_var {
            cfg.provider.api_key_env_var = v;
        }
        if let Some(t) = p.request_timeout_ms {
            cfg.provider.request_timeout_ms = t;
        }

        if let Some(port) = env(ENV_PORT) {
            cfg.port = port.trim().parse().map_err(|e| ConfigError::Value {
                name: ENV_PORT.into(),
                message: format!("{e}"),
            })?;
        }
        if let Some(mode) = env(ENV_PROVIDER) {
            cfg.provider.mode = parse_mode(ENV_PROVIDER, &mode)?;
        }
        if let Some(var) = env(ENV_KEY_VAR).filter(|v| !v.is_empty()) {
            cfg.provider.api_key_env_var = var;
        }
        if let Some(url) = env(ENV_ENDPOINT).filter(|v| !v.is_empty()) {
            cfg.provider.endpoint_url = Some(url);
        }
        if let Some(model) = env(ENV_MODEL).filter(|v| !v.is_empty()) {
            cfg.provider.model_name = model;
        }

        if let Some(port) = overrides.port {
            cfg.port = port;
        }
        if let Some(mode) = overrides.provider {
            cfg.provider.mode = mode;
        }
        cfg.dashboards.extend(overrides.dashboards);
        if overrides.data_dir.is_some() {
            cfg.data_dir = overrides.data_dir;
        }
        if cfg.provider.api_key_env_var.is_empty() {
            cfg.provider.api_key_env_var = DEFAULT_KEY_ENV_VAR.into();
        }
        if cfg.history_window == 0 {
            return Err(ConfigError::Value {
                name: "history_window".into(),
                message: "must be at least 1".into(),
            });
        }
        Ok(cfg)
    }
}

fn parse_mode(name: &str, value: &str) -> Result<ProviderMode, ConfigError> {
    value.parse().map_err(|message| ConfigError::Value {
        name: name.into(),
        message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn env_of(pairs: &[(&str, &str)]) -> impl Fn(&str) -> Option<String> {
        let map: HashMap<String, String> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        move |k| map.get(k).cloned()
    }

    fn file(text: &str) -> FileConfig {
        toml::from_str(text).unwrap()
    }

    #[test]
    fn defaults_without_file_or_env() {
        let cfg = ServerConfig::merge(FileConfig::default(), env_of(&[]), Overrides::default()).unwrap();
        assert_eq!(cfg, ServerConfig::default());
        assert_eq!(cfg.provider.mode, ProviderMode::Mock);
    }

    #[test]
    fn env_beats_file_and_flags_beat_env() {
        let f = file(
            r#"
            port = 9000
            [provider]
            mode = "mock"
            api_key_env_var = "FILE_KEY"
            "#,
        );
        let env = env_of(&[(ENV_PORT, "9100"), (ENV_PROVIDER, "http"), (ENV_KEY_VAR, "ENV_KEY")]);
        let cfg = ServerConfig::merge(f.clone(), &env, Overrides::default()).unwrap();
        assert_eq!(cfg.port, 9100);
        assert_eq!(cfg.provider.mode, ProviderMode::Http);
        assert_eq!(cfg.provider.api_key_env_var, "ENV_KEY");

        let flags = Overrides {
            port: Some(9200),
            provider: Some(ProviderMode::Mock),
            ..Default::default()
        };
        let cfg = ServerConfig::merge(f, &env, flags).unwrap();
        assert_eq!(cfg.port, 9200);
        assert_eq!(cfg.provider.mode, ProviderMode::Mock);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(ServerConfig::merge(
            FileConfig::default(),
            env_of(&[(ENV_PORT, "eighty")]),
            Overrides::default()
        )
        .is_err());
        assert!(ServerConfig::merge(file("[provider]\nmode = \"grpc\""), env_of(&[]), Overrides::default()).is_err());
        assert!(toml::from_str::<FileConfig>("api_key = \"x\"").is_err());
    }

    #[test]
    fn example_file_parses() {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("onboard.example.toml");
        let cfg = ServerConfig::load(Some(&path), env_of(&[]), Overrides::default()).unwrap();
        assert_eq!(cfg.provider.mode, ProviderMode::Mock);
        assert_eq!(cfg.history_window, 12);
    }

    #[test]
    fn reads_file_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("onboard.toml");
        std::fs::write(&path, "bind = \"0.0.0.0\"\ndashboards = [\"a.json\"]\n").unwrap();
        let cfg = ServerConfig::load(Some(&path), env_of(&[]), Overrides::default()).unwrap();
        assert_eq!(cfg.bind, "0.0.0.0");
        assert_eq!(cfg.dashboards, vec![PathBuf::from("a.json")]);
        assert!(ServerConfig::load(
            Some(&dir.path().join("missing.toml")),
            env_of(&[]),
            Overrides::default()
        )
        .is_err());
    }
}
