use std::collections::BTreeMap;
use std::str::FromStr;

/// Keys a config file may set. Each names the long flag it defaults.
pub const KEYS: [&str; 11] = [
    "domain",
    "mode",
    "seed",
    "trials",
    "max-term-depth",
    "max-vars",
    "multiplicity-cap",
    "jobs",
    "omega-cap",
    "max-iterations",
    "json",
];

/// `key = value` lines; `#` starts a comment.
#[derive(Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value", n + 1))?;
            let key = key.trim();
            if !KEYS.contains(&key) {
                return Err(format!("config line {}: unknown key {key:?}", n + 1));
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Config { values })
    }

    /// The flag value if given, else the config value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.values.get(key) {
            None => Ok(default),
            Some(text) => text.parse().map_err(|e| format!("config key {key}: {e}")),
        }
    }

    pub fn flag(&self, set: bool, key: &str) -> Result<bool, String> {
        if set {
            return Ok(true);
        }
        self.pick(None, key, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let c = Config::parse("# defaults\nseed = 7\ntrials=10 # inline\n\njson = true\n").unwrap();
        assert_eq!(c.pick(None, "seed", 42u64).unwrap(), 7);
        assert_eq!(c.pick(Some(9), "seed", 42u64).unwrap(), 9);
        assert_eq!(c.pick(None, "jobs", 0usize).unwrap(), 0);
        assert_eq!(c.pick(None, "trials", 1usize).unwrap(), 10);
        assert!(c.flag(false, "json").unwrap());
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(Config::parse("seed 7").is_err());
        assert!(Config::parse("colour = red").is_err());
        let c = Config::parse("seed = many").unwrap();
        assert!(c.pick(None, "seed", 0u64).is_err());
    }
}
