//! `key = value` run configuration, merged with command-line flags.
//!
//! Precedence is flag, then config file, then built-in default. The master
//! seed defaults to `$CREMBO_SEED`, else 0. Every resolved value is recorded
//! as a string so artifacts can echo the exact configuration that made them;
//! writing that map back out with [`render`] reproduces the run.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, Result};

pub const SEED_ENV: &str = "CREMBO_SEED";

/// Parses `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", n + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", n + 1)));
        }
        out.insert(key.to_owned(), value.trim().to_owned());
    }
    Ok(out)
}

/// Inverse of [`parse`] for resolved configurations.
pub fn render(config: &BTreeMap<String, String>) -> String {
    config.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// Resolves the settings of one command.
#[derive(Debug, Default)]
pub struct Resolver {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(file: BTreeMap<String, String>) -> Self {
        Resolver { file, resolved: BTreeMap::new() }
    }

    pub fn from_path(path: Option<&Path>) -> Result<Self> {
        let file = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| CliError::Read { path: p.into(), source })?;
                parse(&text)?
            }
            None => BTreeMap::new(),
        };
        Ok(Resolver::new(file))
    }

    fn lookup<T: FromStr>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            self.file.remove(key);
            return Ok(flag);
        }
        match self.file.remove(key) {
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key `{key}`: cannot parse `{raw}`: {e}"))),
            None => Ok(None),
        }
    }

    /// Flag, else file, else `default`.
    pub fn value<T: FromStr + fmt::Display>(&mut self, key: &str, flag: Option<T>, default: impl FnOnce() -> T) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let v = self.lookup(key, flag)?.unwrap_or_else(default);
        self.resolved.insert(key.to_owned(), v.to_string());
        Ok(v)
    }

    /// Like [`Resolver::value`] with no default; unset keys are not recorded.
    pub fn optional<T: FromStr + fmt::Display>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        let v = self.lookup(key, flag)?;
        if let Some(v) = &v {
            self.resolved.insert(key.to_owned(), v.to_string());
        }
        Ok(v)
    }

    pub fn required<T: FromStr + fmt::Display>(&mut self, key: &str, flag: Option<T>) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.optional(key, flag)?
            .ok_or_else(|| CliError::Usage(format!("missing `--{key}` (flag or config key)")))
    }

    /// The master seed: `--seed`, `seed` in the file, `$CREMBO_SEED`, or 0.
    pub fn seed(&mut self, flag: Option<u64>) -> Result<u64> {
        let env = std::env::var(SEED_ENV).ok();
        let from_env = match env {
            Some(raw) => Some(raw.parse::<u64>().map_err(|e| CliError::Usage(format!("{SEED_ENV}: {e}")))?),
            None => None,
        };
        self.value("seed", flag, || from_env.unwrap_or(0))
    }

    /// The resolved settings. Fails on config keys the command never read.
    pub fn finish(self) -> Result<BTreeMap<String, String>> {
        if let Some(key) = self.file.keys().next() {
            return Err(CliError::Usage(format!("unknown config key `{key}`")));
        }
        Ok(self.resolved)
    }
}

/// Comma-separated list of reals, e.g. a trimming grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{}`: {e}", p.trim())))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(Grid)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(f64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beats_default() {
        let mut r = Resolver::new(parse("repeats = 5\n# comment\nfolds = 4 # trailing\n").unwrap());
        assert_eq!(r.value("repeats", Some(7usize), || 20).unwrap(), 7);
        assert_eq!(r.value("folds", None::<usize>, || 10).unwrap(), 4);
        assert_eq!(r.value("trees", None::<usize>, || 100).unwrap(), 100);
        let resolved = r.finish().unwrap();
        assert_eq!(render(&resolved), "folds = 4\nrepeats = 7\ntrees = 100\n");
    }

    #[test]
    fn unknown_and_malformed_keys() {
        let r = Resolver::new(parse("typo = 1").unwrap());
        assert!(matches!(r.finish(), Err(CliError::Usage(_))));
        assert!(matches!(parse("no equals sign"), Err(CliError::Usage(_))));
        let mut r = Resolver::new(parse("repeats = many").unwrap());
        assert!(r.value("repeats", None::<usize>, || 1).is_err());
    }

    #[test]
    fn grid_round_trips() {
        let g: Grid = "0, 0.01,0.1".parse().unwrap();
        assert_eq!(g.0, vec![0.0, 0.01, 0.1]);
        assert_eq!(g.to_string().parse::<Grid>().unwrap(), g);
    }
}
