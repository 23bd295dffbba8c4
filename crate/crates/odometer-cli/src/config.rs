//! Run configuration: defaults, config-file overlay, then flag overrides.

use num::BigRational;
use std::path::{Path, PathBuf};

use crate::run::CliError;

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub tol: BigRational,
    pub depth_cap: u64,
    pub seed: u64,
    pub threads: usize,
    pub output: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tol: odometer_core::default_tol(),
            depth_cap: 4096,
            seed: 1,
            threads: 0,
            output: None,
            csv: None,
        }
    }
}

impl RunConfig {
    /// Defaults, overlaid by the config file (explicit path or
    /// `$ODOMETER_CONFIG`), overlaid by command-line flags. Flags win.
    pub fn resolve(cli: &crate::Cli) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let path = cli
            .config
            .clone()
            .or_else(|| std::env::var_os("ODOMETER_CONFIG").map(PathBuf::from));
        if let Some(p) = path {
            cfg.apply_file(&p)?;
        }
        if let Some(t) = &cli.tol {
            cfg.tol = parse_rational(t)?;
        }
        if let Some(d) = cli.depth_cap {
            cfg.depth_cap = d;
        }
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        if let Some(t) = cli.threads {
            cfg.threads = t;
        }
        if let Some(o) = &cli.output {
            cfg.output = Some(o.clone());
        }
        if let Some(c) = &cli.csv {
            cfg.csv = Some(c.clone());
        }
        if !num_traits::Signed::is_positive(&cfg.tol) {
            return Err(CliError::Usage("tolerance must be positive".into()));
        }
        Ok(cfg)
    }

    fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path).map_err(CliError::Io)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "config line {} is not key=value: {line}",
                    lineno + 1
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "tol" => self.tol = parse_rational(value)?,
                "depth_cap" => self.depth_cap = parse_u64(key, value)?,
                "seed" => self.seed = parse_u64(key, value)?,
                "threads" => {
                    self.threads = parse_u64(key, value)? as usize;
                }
                "output" => self.output = Some(PathBuf::from(value)),
                "csv" => self.csv = Some(PathBuf::from(value)),
                other => {
                    return Err(CliError::Usage(format!("unknown config key: {other}")));
                }
            }
        }
        Ok(())
    }
}

fn parse_u64(key: &str, value: &str) -> Result<u64, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("{key} expects an integer, got {value}")))
}

/// Parse `num/den` or a plain integer into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, CliError> {
    let bad = || CliError::Usage(format!("not a rational (num/den): {s}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: num::BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: num::BigInt = d.trim().parse().map_err(|_| bad())?;
    if num_traits::Zero::is_zero(&d) {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}
