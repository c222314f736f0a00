//! Server configuration file.
//!
//! ```toml
//! port = 8080
//! solverCommand = "z3 -in"
//! loopUnroll = 8
//! maxPaths = 10000
//! intBound = 1000000
//! stringLenBound = 256
//! corsAllowlist = ["http://localhost:5173"]
//! ```

use std::path::Path;
use std::time::Duration;

use pcw_core::symexec::{Bounds, ProcessBackend, SolverConfig};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Syntax(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct ServerConfig {
    /// 0 binds an ephemeral port.
    pub port: u32,
    pub bind: String,
    pub solver_command: Option<String>,
    pub solver_timeout_ms: u64,
    pub loop_unroll: usize,
    pub max_paths: usize,
    pub inline_depth: usize,
    pub int_bound: i64,
    pub string_len_bound: usize,
    pub cors_allowlist: Vec<String>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        let bounds = Bounds::default();
        let solver = SolverConfig::default();
        ServerConfig {
            port: 8080,
            bind: "127.0.0.1".into(),
            solver_command: None,
            solver_timeout_ms: 10_000,
            loop_unroll: bounds.loop_unroll,
            max_paths: bounds.max_paths,
            inline_depth: bounds.inline_depth,
            int_bound: solver.int_bound,
            string_len_bound: solver.max_string_len,
            cors_allowlist: Vec::new(),
        }
    }
}

impl ServerConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: ServerConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.port > u32::from(u16::MAX) {
            return Err(ConfigError::Invalid(format!("port {} is out of range", self.port)));
        }
        let positive = [
            ("loopUnroll", self.loop_unroll as i64),
            ("maxPaths", self.max_paths as i64),
            ("inlineDepth", self.inline_depth as i64),
            ("intBound", self.int_bound),
            ("stringLenBound", self.string_len_bound as i64),
            ("solverTimeoutMs", self.solver_timeout_ms as i64),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v <= 0) {
            return Err(ConfigError::Invalid(format!("{name} must be positive")));
        }
        if matches!(&self.solver_command, Some(c) if c.trim().is_empty()) {
            return Err(ConfigError::Invalid("solverCommand is empty".into()));
        }
        Ok(())
    }

    pub fn bounds(&self) -> Bounds {
        Bounds { loop_unroll: self.loop_unroll, max_paths: self.max_paths, inline_depth: self.inline_depth }
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            int_bound: self.int_bound,
            max_string_len: self.string_len_bound,
            backend: self
                .solver_command
                .as_deref()
                .and_then(|c| ProcessBackend::from_command(c, Duration::from_millis(self.solver_timeout_ms))),
            ..SolverConfig::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = ServerConfig::parse("port = 9000\nmaxPaths = 5\ncorsAllowlist = [\"http://a\"]\n").unwrap();
        assert_eq!(c.port, 9000);
        assert_eq!(c.bounds().max_paths, 5);
        assert_eq!(c.bounds().loop_unroll, 8);
        assert_eq!(c.cors_allowlist, ["http://a"]);
        assert!(c.solver().backend.is_none());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(ServerConfig::parse("port = 70000"), Err(ConfigError::Invalid(_))));
        assert!(matches!(ServerConfig::parse("loopUnroll = 0"), Err(ConfigError::Invalid(_))));
        assert!(matches!(ServerConfig::parse("intBound = -3"), Err(ConfigError::Invalid(_))));
        assert!(matches!(ServerConfig::parse("colour = 1"), Err(ConfigError::Syntax(_))));
        assert!(matches!(ServerConfig::parse("solverCommand = \" \""), Err(ConfigError::Invalid(_))));
    }
}
