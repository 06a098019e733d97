//! Run configuration: a flat key→value map merged from an optional config
//! file and command-line flags (flags win), plus zero or more grid axes.
//!
//! Config files are UTF-8 text with one `key = value` pair per line; blank
//! lines and lines starting with `#` are ignored. Grid axes are repeated
//! `grid = name,min,max,count,lin|log` entries. Unknown keys are rejected
//! with a message naming the offending key.

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::path::Path;

use crate::table::Failure;

/// One sweep axis: `count` points from `min` to `max`, linearly or
/// logarithmically spaced.
#[derive(Debug, Clone)]
pub struct GridAxis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl GridAxis {
    pub fn linear(name: &str, min: f64, max: f64, count: usize) -> Self {
        GridAxis {
            name: name.to_string(),
            min,
            max,
            count,
            log: false,
        }
    }

    pub fn logarithmic(name: &str, min: f64, max: f64, count: usize) -> Self {
        GridAxis {
            name: name.to_string(),
            min,
            max,
            count,
            log: true,
        }
    }

    /// Parse `name,min,max,count,lin|log`.
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let parts: Vec<&str> = text.split(',').map(str::trim).collect();
        if parts.len() != 5 {
            return Err(Failure::config(
                "grid",
                format!("expected `name,min,max,count,lin|log`, got `{text}`"),
            ));
        }
        let name = parts[0].to_string();
        if name.is_empty() {
            return Err(Failure::config("grid", "axis name must not be empty"));
        }
        let min: f64 = parts[1]
            .parse()
            .map_err(|_| Failure::config("grid", format!("invalid minimum `{}`", parts[1])))?;
        let max: f64 = parts[2]
            .parse()
            .map_err(|_| Failure::config("grid", format!("invalid maximum `{}`", parts[2])))?;
        let count: usize = parts[3]
            .parse()
            .map_err(|_| Failure::config("grid", format!("invalid count `{}`", parts[3])))?;
        let log = match parts[4] {
            "lin" => false,
            "log" => true,
            other => {
                return Err(Failure::config(
                    "grid",
                    format!("spacing must be `lin` or `log`, got `{other}`"),
                ))
            }
        };
        let axis = GridAxis {
            name,
            min,
            max,
            count,
            log,
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.count < 2 {
            return Err(Failure::config(
                "grid",
                format!("axis `{}` needs at least 2 points", self.name),
            ));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return Err(Failure::config(
                "grid",
                format!("axis `{}` needs finite min < max", self.name),
            ));
        }
        if self.log && self.min <= 0.0 {
            return Err(Failure::config(
                "grid",
                format!("logarithmic axis `{}` needs min > 0", self.name),
            ));
        }
        Ok(())
    }

    /// The grid points, deterministically computed with the symmetric lerp
    /// `(min·(n−1−i) + max·i)/(n−1)`, which hits both endpoints exactly and
    /// keeps interior points exact whenever the rational arithmetic cancels.
    pub fn values(&self) -> Vec<f64> {
        let n1 = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                // Endpoints exactly as given: the ln/exp round trip of the log
                // branch would otherwise miss them by an ulp.
                if i == 0 {
                    return self.min;
                }
                if i == self.count - 1 {
                    return self.max;
                }
                let (a, b) = (n1 - i as f64, i as f64);
                if self.log {
                    ((self.min.ln() * a + self.max.ln() * b) / n1).exp()
                } else {
                    (self.min * a + self.max * b) / n1
                }
            })
            .collect()
    }

    /// Short human-readable description used in metadata headers.
    pub fn describe(&self) -> String {
        format!(
            "{} = {}..{} x{} {}",
            self.name,
            self.min,
            self.max,
            self.count,
            if self.log { "log" } else { "lin" }
        )
    }
}

/// The merged configuration for one command invocation.
///
/// Typed getters record every value they resolve — including defaults — so
/// the output header can list the full effective parameter set.
pub struct Settings {
    map: BTreeMap<String, String>,
    grids: Vec<GridAxis>,
    resolved: Mutex<BTreeMap<String, String>>,
}

impl Settings {
    /// Build settings from an optional config file plus flag overrides,
    /// validating every key against the command's allowed set.
    pub fn load(
        config_path: Option<&Path>,
        overrides: Vec<(&'static str, String)>,
        grid_flags: &[String],
        allowed_keys: &[&str],
        allowed_grids: &[&str],
    ) -> Result<Self, Failure> {
        let mut map = BTreeMap::new();
        let mut grids: Vec<GridAxis> = Vec::new();

        if let Some(path) = config_path {
            let text = std::fs::read_to_string(path).map_err(|e| {
                Failure::config("config", format!("cannot read `{}`: {e}", path.display()))
            })?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    return Err(Failure::config(
                        "config",
                        format!("line {}: expected `key = value`, got `{line}`", lineno + 1),
                    ));
                };
                let key = key.trim().to_string();
                let value = value.trim().to_string();
                if key == "grid" {
                    grids.push(GridAxis::parse(&value)?);
                } else {
                    // Later lines override earlier ones.
                    map.insert(key, value);
                }
            }
        }

        // Command-line flags override file entries; repeated --grid flags
        // replace any file-declared axis of the same name.
        for text in grid_flags {
            let axis = GridAxis::parse(text)?;
            grids.retain(|g| g.name != axis.name);
            grids.push(axis);
        }
        for (key, value) in overrides {
            map.insert(key.to_string(), value);
        }

        for key in map.keys() {
            if !allowed_keys.contains(&key.as_str()) {
                return Err(Failure::config(
                    key.clone(),
                    format!(
                        "unknown parameter `{key}` for this command (allowed: {})",
                        allowed_keys.join(", ")
                    ),
                ));
            }
        }
        for axis in &grids {
            if !allowed_grids.contains(&axis.name.as_str()) {
                return Err(Failure::config(
                    "grid",
                    format!(
                        "axis `{}` is not sweepable here (allowed: {})",
                        axis.name,
                        if allowed_grids.is_empty() {
                            "none".to_string()
                        } else {
                            allowed_grids.join(", ")
                        }
                    ),
                ));
            }
        }
        let mut seen = Vec::new();
        for axis in &grids {
            if seen.contains(&axis.name) {
                return Err(Failure::config(
                    "grid",
                    format!("axis `{}` given more than once", axis.name),
                ));
            }
            seen.push(axis.name.clone());
        }

        Ok(Settings {
            map,
            grids,
            resolved: Mutex::new(BTreeMap::new()),
        })
    }

    fn note(&self, key: &str, value: String) {
        self.resolved
            .lock()
            .expect("resolved-parameter map lock")
            .insert(key.to_string(), value);
    }

    /// Canonical header rendering of a numeric value: shortest round-trip form,
    /// with negative zero normalized so computed values like -0.0 don't print
    /// as `-0`.
    pub fn canon_f64(x: f64) -> String {
        let x = if x == 0.0 { 0.0 } else { x };
        format!("{x}")
    }

    /// Record a value chosen by the tool itself (e.g. an auto-selected pump)
    /// so it appears in the output header.
    pub fn note_auto(&self, key: &str, value: String) {
        self.note(key, value);
    }

    pub fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn parse_f64(&self, key: &str, raw: &str) -> Result<f64, Failure> {
        raw.parse::<f64>()
            .map_err(|_| Failure::config(key, format!("expected a number, got `{raw}`")))
    }

    /// A required numeric parameter.
    pub fn f64_req(&self, key: &str) -> Result<f64, Failure> {
        match self.map.get(key) {
            Some(raw) => {
                let x = self.parse_f64(key, raw)?;
                self.note(key, Self::canon_f64(x));
                Ok(x)
            }
            None => Err(Failure::config(
                key,
                format!("missing required parameter `{key}`"),
            )),
        }
    }

    /// A numeric parameter with a default.
    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64, Failure> {
        let x = match self.map.get(key) {
            Some(raw) => self.parse_f64(key, raw)?,
            None => default,
        };
        self.note(key, Self::canon_f64(x));
        Ok(x)
    }

    /// An optional numeric parameter; recorded only when present.
    pub fn f64_opt(&self, key: &str) -> Result<Option<f64>, Failure> {
        match self.map.get(key) {
            Some(raw) => {
                let x = self.parse_f64(key, raw)?;
                self.note(key, Self::canon_f64(x));
                Ok(Some(x))
            }
            None => Ok(None),
        }
    }

    /// An integer parameter with a default.
    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize, Failure> {
        let x = match self.map.get(key) {
            Some(raw) => raw
                .parse::<usize>()
                .map_err(|_| Failure::config(key, format!("expected an integer, got `{raw}`")))?,
            None => default,
        };
        self.note(key, format!("{x}"));
        Ok(x)
    }

    /// A string parameter with a default.
    pub fn str_or(&self, key: &str, default: &str) -> Result<String, Failure> {
        let s = self
            .map
            .get(key)
            .cloned()
            .unwrap_or_else(|| default.to_string());
        self.note(key, s.clone());
        Ok(s)
    }

    pub fn grid(&self, name: &str) -> Option<&GridAxis> {
        self.grids.iter().find(|axis| axis.name == name)
    }

    pub fn grids(&self) -> &[GridAxis] {
        &self.grids
    }

    /// The sorted resolved parameter set for the metadata header.
    pub fn resolved_params(&self) -> Vec<(String, String)> {
        self.resolved
            .lock()
            .expect("resolved-parameter map lock")
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}
