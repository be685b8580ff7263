use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

pub const CONFIG_ENV: &str = "BAIRE_CONFIG";

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub grid: usize,
    pub tol: f64,
    pub precision_cap: u32,
    pub schedule_cap: u32,
    /// "auto" or a rational such as "11/40".
    pub a: String,
    /// Orders n used when A is estimated.
    pub a_estimate_n: Vec<u32>,
    pub a_estimate_grid: usize,
    pub threads: Option<usize>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            grid: 2048,
            tol: 1e-8,
            precision_cap: 4096,
            schedule_cap: 256,
            a: "auto".into(),
            a_estimate_n: vec![8, 16],
            a_estimate_grid: 2048,
            threads: None,
        }
    }
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let from_env = std::env::var_os(CONFIG_ENV);
        let path = path.map(Path::to_path_buf).or_else(|| from_env.map(Into::into));
        match path {
            None => Ok(Config::default()),
            Some(p) => {
                let s = std::fs::read_to_string(&p).with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&s).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }
}
