//! Minimal flag parser with the stable exit-code contract:
//! 0 success, 1 usage, 2 I/O or parse, 3 numerical failure.

use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Parsed `--flag value` pairs (repeatable flags keep every value) plus
/// bare positionals.
#[derive(Debug, Default)]
pub struct Args {
    flags: BTreeMap<String, Vec<String>>,
    pub positionals: Vec<String>,
}

impl Args {
    pub fn parse(raw: &[String], boolean_flags: &[&str]) -> Result<Args, UsageError> {
        let mut args = Args::default();
        let mut it = raw.iter().peekable();
        while let Some(token) = it.next() {
            if let Some(name) = token.strip_prefix("--") {
                if boolean_flags.contains(&name) {
                    args.flags.entry(name.to_string()).or_default().push("true".into());
                } else {
                    let value = it
                        .next()
                        .ok_or_else(|| UsageError(format!("--{name} needs a value")))?;
                    args.flags
                        .entry(name.to_string())
                        .or_default()
                        .push(value.clone());
                }
            } else {
                args.positionals.push(token.clone());
            }
        }
        Ok(args)
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.flags.get(name).and_then(|v| v.last()).map(|s| s.as_str())
    }

    pub fn get_all(&self, name: &str) -> impl Iterator<Item = &str> {
        self.flags.get(name).into_iter().flatten().map(|s| s.as_str())
    }

    pub fn has(&self, name: &str) -> bool {
        self.flags.contains_key(name)
    }

    pub fn require(&self, name: &str) -> Result<&str, UsageError> {
        self.get(name)
            .ok_or_else(|| UsageError(format!("missing required flag --{name}")))
    }

    pub fn path(&self, name: &str) -> Result<PathBuf, UsageError> {
        Ok(PathBuf::from(self.require(name)?))
    }

    pub fn parse_f64(&self, name: &str, default: f64) -> Result<f64, UsageError> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| UsageError(format!("--{name} expects a number, got `{v}`"))),
        }
    }

    pub fn parse_u64(&self, name: &str, default: u64) -> Result<u64, UsageError> {
        match self.get(name) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| UsageError(format!("--{name} expects an integer, got `{v}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strs(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn flags_positionals_and_booleans() {
        let args = Args::parse(
            &strs(&["closure", "--seed", "7", "--median-scale", "--tol", "a=1", "--tol", "b=2"]),
            &["median-scale"],
        )
        .unwrap();
        assert_eq!(args.positionals, vec!["closure"]);
        assert_eq!(args.get("seed"), Some("7"));
        assert!(args.has("median-scale"));
        let tols: Vec<&str> = args.get_all("tol").collect();
        assert_eq!(tols, vec!["a=1", "b=2"]);
        assert_eq!(args.parse_u64("seed", 0).unwrap(), 7);
    }

    #[test]
    fn missing_value_is_usage_error() {
        assert!(Args::parse(&strs(&["--seed"]), &[]).is_err());
    }
}
