//! Flat `key=value` settings with precedence flags > config file >
//! `POOLDECODE_SEED` > built-in defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::str::FromStr;

use pooldecode_core::harness::{DecoderId, ExperimentSpec, SearchOptions};
use pooldecode_core::{NoiseParams, TieRule};

pub const SEED_ENV: &str = "POOLDECODE_SEED";

/// Every recognized key with its default, in echo order.
pub const DEFAULTS: &[(&str, &str)] = &[
    ("N", "256"),
    ("K", "16"),
    ("L", "64"),
    ("M", "150"),
    ("u", "0.05"),
    ("q", "0.1"),
    ("decoder", "coal"),
    ("trials", "500"),
    ("seed", "0"),
    ("k_hat", "auto"),
    ("eps0", "0.01"),
    ("psi", "auto"),
    ("tie_rule", "random"),
    ("u_known", "false"),
    ("target", "0.1"),
    ("m_lo", "1"),
    ("m_hi", "4096"),
    ("probe_trials", "500"),
    ("final_trials", "2000"),
    ("grid_points", "12"),
    ("axis", "m"),
    ("grid", "10,20,30,40,50,60,70,80"),
    ("deltas", "0.75,1.5,2.0"),
    ("c0", "1"),
];

#[derive(Debug)]
pub struct ConfigError(pub String);

impl Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn known(key: &str) -> bool {
    DEFAULTS.iter().any(|(k, _)| *k == key)
}

/// Parse a config file body. Blank lines and `#` lines are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key=value, got {line:?}", no + 1)))?;
        let key = key.trim();
        if !known(key) {
            return Err(ConfigError(format!("line {}: unknown key {key:?}", no + 1)));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

/// Fully resolved settings.
#[derive(Clone, Debug, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn resolve(
        flags: &BTreeMap<String, String>,
        file: &BTreeMap<String, String>,
        env_seed: Option<String>,
    ) -> Result<Self, ConfigError> {
        let mut values: BTreeMap<String, String> =
            DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        if let Some(seed) = env_seed {
            values.insert("seed".into(), seed);
        }
        for (k, v) in file.iter().chain(flags) {
            if !known(k) {
                return Err(ConfigError(format!("unknown key {k:?}")));
            }
            values.insert(k.clone(), v.clone());
        }
        let settings = Self { values };
        settings.check()?;
        Ok(settings)
    }

    fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or_default()
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: Display,
    {
        self.raw(key)
            .parse()
            .map_err(|e| ConfigError(format!("bad value {:?} for {key}: {e}", self.raw(key))))
    }

    fn optional<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: Display,
    {
        if self.raw(key) == "auto" {
            Ok(None)
        } else {
            self.get(key).map(Some)
        }
    }

    pub fn list<T: FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError>
    where
        T::Err: Display,
    {
        self.raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|e| ConfigError(format!("bad entry {s:?} in {key}: {e}"))))
            .collect()
    }

    pub fn decoders(&self) -> Result<Vec<DecoderId>, ConfigError> {
        let ids = self.list::<DecoderId>("decoder")?;
        if ids.is_empty() {
            return Err(ConfigError("no decoder given".into()));
        }
        Ok(ids)
    }

    pub fn noise(&self) -> Result<NoiseParams, ConfigError> {
        NoiseParams::new(self.get("u")?, self.get("q")?).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn tie_rule(&self) -> Result<TieRule, ConfigError> {
        match self.raw("tie_rule") {
            "random" => Ok(TieRule::SeededRandom),
            "lowest" => Ok(TieRule::LowestIndex),
            other => Err(ConfigError(format!("tie_rule must be random or lowest, got {other:?}"))),
        }
    }

    /// Experiment spec for the first listed decoder.
    pub fn spec(&self) -> Result<ExperimentSpec, ConfigError> {
        let decoder = self.decoders()?[0];
        let mut spec =
            ExperimentSpec::new(self.get("N")?, self.get("K")?, self.get("L")?, self.get("M")?, self.noise()?, decoder);
        spec.trials = self.get("trials")?;
        spec.root_seed = self.get("seed")?;
        spec.k_hat = self.optional("k_hat")?;
        spec.eps0 = self.get("eps0")?;
        spec.psi = self.optional("psi")?;
        spec.tie_rule = self.tie_rule()?;
        spec.u_known = self.get("u_known")?;
        Ok(spec)
    }

    pub fn search(&self) -> Result<SearchOptions, ConfigError> {
        Ok(SearchOptions {
            target: self.get("target")?,
            m_lo: self.get("m_lo")?,
            m_hi: self.get("m_hi")?,
            probe_trials: self.get("probe_trials")?,
            final_trials: self.get("final_trials")?,
            grid_points: self.get("grid_points")?,
        })
    }

    /// Parse everything once so bad values surface as usage errors up front.
    fn check(&self) -> Result<(), ConfigError> {
        self.spec()?;
        self.search()?.validate().map_err(|e| ConfigError(e.to_string()))?;
        self.get::<f64>("c0")?;
        self.list::<f64>("grid")?;
        self.list::<f64>("deltas")?;
        match self.raw("axis") {
            "m" | "l" | "u" | "q" => Ok(()),
            other => Err(ConfigError(format!("axis must be one of m, l, u, q; got {other:?}"))),
        }
    }

    /// `key=value` lines in a fixed order; feeding them back via `--config`
    /// reproduces these settings.
    pub fn lines(&self) -> Vec<String> {
        DEFAULTS.iter().map(|(k, _)| format!("{k}={}", self.raw(k))).collect()
    }
}
