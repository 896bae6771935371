//! Scenario files: flat key=value text with bracketed lists.
//!
//! ```text
//! # comment
//! name = df-m2f2
//! command = df-check
//! ring = F2
//! d = 2
//! seed = 1
//! budget = 1048576
//! expect_status = pass
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use stabfin_core::Error;

pub const DEFAULT_BUDGET: u64 = 1 << 20;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub command: String,
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub budget: u64,
    pub window: Option<i64>,
    /// Status the scenario is expected to produce (suite aggregation).
    pub expect_status: Option<String>,
}

impl Scenario {
    pub fn from_parts(
        name: String,
        command: String,
        params: BTreeMap<String, String>,
        seed: Option<u64>,
        budget: Option<u64>,
        window: Option<i64>,
    ) -> Scenario {
        Scenario {
            name,
            command,
            params,
            seed: seed.unwrap_or(0),
            budget: budget.unwrap_or(DEFAULT_BUDGET),
            window,
            expect_status: None,
        }
    }

    pub fn parse(text: &str, default_name: &str) -> Result<Scenario, Error> {
        let mut params = BTreeMap::new();
        let mut name = default_name.to_string();
        let mut command = None;
        let mut seed = 0u64;
        let mut budget = DEFAULT_BUDGET;
        let mut window = None;
        let mut expect_status = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::UsageError(format!(
                    "line {}: expected key = value",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim().to_string();
            match key {
                "name" => name = value,
                "command" => command = Some(value),
                "seed" => {
                    seed = value
                        .parse()
                        .map_err(|_| Error::UsageError("seed must be an integer".into()))?
                }
                "budget" => {
                    budget = value
                        .parse()
                        .map_err(|_| Error::UsageError("budget must be an integer".into()))?
                }
                "window" => {
                    window = Some(value.parse().map_err(|_| {
                        Error::UsageError("window must be an integer".into())
                    })?)
                }
                "expect_status" => expect_status = Some(value),
                _ => {
                    params.insert(key.to_string(), value);
                }
            }
        }
        let command = command.ok_or_else(|| {
            Error::UsageError("missing required key: command".into())
        })?;
        Ok(Scenario {
            name,
            command,
            params,
            seed,
            budget,
            window,
            expect_status,
        })
    }

    pub fn load(path: &Path) -> Result<Scenario, Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::UsageError(format!("cannot read {}: {e}", path.display())))?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| "scenario".into());
        Scenario::parse(&text, &stem)
    }
}

/// Typed access to scenario parameters; unknown keys are rejected by
/// the command schemas via `finish()`.
pub struct Params<'a> {
    map: &'a BTreeMap<String, String>,
    used: std::cell::RefCell<Vec<String>>,
}

impl<'a> Params<'a> {
    pub fn new(map: &'a BTreeMap<String, String>) -> Params<'a> {
        Params {
            map,
            used: std::cell::RefCell::new(Vec::new()),
        }
    }

    pub fn get(&self, key: &str) -> Option<&'a str> {
        self.used.borrow_mut().push(key.to_string());
        self.map.get(key).map(|s| s.as_str())
    }

    pub fn required(&self, key: &str) -> Result<&'a str, Error> {
        self.get(key)
            .ok_or_else(|| Error::UsageError(format!("missing required parameter: {key}")))
    }

    pub fn get_u64(&self, key: &str, default: u64) -> Result<u64, Error> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::UsageError(format!("parameter {key} must be an integer"))),
        }
    }

    pub fn get_usize(&self, key: &str, default: usize) -> Result<usize, Error> {
        Ok(self.get_u64(key, default as u64)? as usize)
    }

    /// Errors on any parameter not consumed by the command schema.
    pub fn finish(&self) -> Result<(), Error> {
        let used = self.used.borrow();
        for key in self.map.keys() {
            if !used.iter().any(|u| u == key) {
                return Err(Error::UsageError(format!("unknown parameter: {key}")));
            }
        }
        Ok(())
    }
}

/// Parses a bracketed integer list like `[1, 0, 2]`.
pub fn parse_usize_list(text: &str) -> Result<Vec<usize>, Error> {
    let inner = text
        .trim()
        .strip_prefix('[')
        .and_then(|t| t.strip_suffix(']'))
        .ok_or_else(|| Error::UsageError(format!("expected a bracketed list, got {text:?}")))?;
    if inner.trim().is_empty() {
        return Ok(vec![]);
    }
    inner
        .split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| Error::UsageError(format!("bad list entry {p:?}")))
        })
        .collect()
}
