//! Experiment configuration.
//!
//! A TOML document with four sections. Every key can also be given on the
//! command line as `section.key=value`, which wins over the file.
//!
//! ```toml
//! [mesh]
//! dims = "4x4x4"
//! buffer_depth = 4
//! protection = "SERA"        # single runs only
//!
//! [traffic]
//! pattern = "UNIFORM"        # single runs only
//! packets_per_node = 100
//! packet_length = 5
//! injection_interval = 20
//!
//! [fault]
//! p_npc = "8.33%"            # single runs only
//! p_sa = 0.0833
//! mode = "SINGLE_PER_TRIPLE"
//!
//! [experiment]
//! benchmarks = ["TRANSPOSE", "UNIFORM", "MATMUL"]
//! modes = "BASELINE, TMR, SERA"
//! rates = "0, 8.33%, 16.67%, 11.11%&6.67%, 33%"
//! seeds = "1..=20"
//! seed = 1                   # single runs only
//! watchdog = 1000000
//! stall_limit = 10000
//! output = "sweep.csv"
//! ```
//!
//! A rate `a&b` sets the next-port computation to `a` and switch allocation
//! to `b`; a bare rate applies to both.

use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;
use toml::{Table, Value};

use crate::fault::{FaultMode, FaultPlan, ProtectionMode};
use crate::noc::{Dims, MeshConfig, STALL_THRESHOLD};
use crate::traffic::{Pattern, TrafficSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("override `{0}` is not of the form section.key=value")]
    BadOverride(String),
    #[error("`{key}`: {message}")]
    Field { key: String, message: String },
}

fn field(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Field { key: key.to_string(), message: message.into() }
}

const KEYS: &[(&str, &[&str])] = &[
    ("mesh", &["dims", "buffer_depth", "protection"]),
    ("traffic", &["pattern", "packets_per_node", "packet_length", "injection_interval"]),
    ("fault", &["p_npc", "p_sa", "mode"]),
    ("experiment", &["benchmarks", "modes", "rates", "seeds", "seed", "watchdog", "stall_limit", "output"]),
];

/// The injection-rate grid of the standard sweep.
pub const DEFAULT_RATES: &str = "0, 8.33%, 16.67%, 11.11%&6.67%, 33%";

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Network, plus protection mode and fault plan for single runs. Sweeps
    /// take the fault mode from here and override the rest per job.
    pub mesh: MeshConfig,
    pub traffic: TrafficSpec,
    pub benchmarks: Vec<Pattern>,
    pub modes: Vec<ProtectionMode>,
    /// (p_npc, p_sa) pairs.
    pub rates: Vec<(f64, f64)>,
    pub seeds: Vec<u64>,
    /// Seed of a single run.
    pub seed: u64,
    pub watchdog: u64,
    pub stall_limit: u64,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mesh: MeshConfig::default(),
            traffic: TrafficSpec::default(),
            benchmarks: Pattern::ALL.to_vec(),
            modes: ProtectionMode::ALL.to_vec(),
            rates: parse_rates(DEFAULT_RATES).expect("default rate grid parses"),
            seeds: (1..=20).collect(),
            seed: 1,
            watchdog: 1_000_000,
            stall_limit: 10_000,
            output: None,
        }
    }
}

impl ExperimentConfig {
    /// Parses `text` (possibly empty), applies `overrides` in order and
    /// validates the result.
    pub fn load(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut doc: Table = text.parse().map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        Self::from_table(&doc)
    }

    fn from_table(doc: &Table) -> Result<Self, ConfigError> {
        for (section, value) in doc {
            let Some((_, keys)) = KEYS.iter().find(|(s, _)| s == section) else {
                return Err(ConfigError::UnknownKey(section.clone()));
            };
            let Value::Table(t) = value else {
                return Err(field(section, "expected a section"));
            };
            if let Some(k) = t.keys().find(|k| !keys.contains(&k.as_str())) {
                return Err(ConfigError::UnknownKey(format!("{section}.{k}")));
            }
        }
        let get = |section: &str, key: &str| doc.get(section).and_then(|s| s.get(key));

        let mut c = Self::default();
        if let Some(v) = get("mesh", "dims") {
            c.mesh.dims = dims(v)?;
        }
        if let Some(v) = get("mesh", "buffer_depth") {
            c.mesh.buffer_depth = uint(v, "mesh.buffer_depth")? as usize;
        }
        if let Some(v) = get("mesh", "protection") {
            c.mesh.protection = parsed(v, "mesh.protection")?;
        }
        if let Some(v) = get("traffic", "pattern") {
            c.traffic.pattern = parsed(v, "traffic.pattern")?;
        }
        if let Some(v) = get("traffic", "packets_per_node") {
            c.traffic.packets_per_node = narrow(uint(v, "traffic.packets_per_node")?, "traffic.packets_per_node")?;
        }
        if let Some(v) = get("traffic", "packet_length") {
            c.traffic.packet_length = narrow(uint(v, "traffic.packet_length")?, "traffic.packet_length")?;
        }
        if let Some(v) = get("traffic", "injection_interval") {
            c.traffic.injection_interval = uint(v, "traffic.injection_interval")?;
        }
        if let Some(v) = get("fault", "p_npc") {
            c.mesh.fault.p_npc = probability(v, "fault.p_npc")?;
        }
        if let Some(v) = get("fault", "p_sa") {
            c.mesh.fault.p_sa = probability(v, "fault.p_sa")?;
        }
        if let Some(v) = get("fault", "mode") {
            c.mesh.fault.mode = parsed::<FaultMode>(v, "fault.mode")?;
        }
        if let Some(v) = get("experiment", "benchmarks") {
            c.benchmarks = list(v, "experiment.benchmarks")?;
        }
        if let Some(v) = get("experiment", "modes") {
            c.modes = list(v, "experiment.modes")?;
        }
        if let Some(v) = get("experiment", "rates") {
            c.rates = rates(v)?;
        }
        if let Some(v) = get("experiment", "seeds") {
            c.seeds = seeds(v)?;
        }
        if let Some(v) = get("experiment", "seed") {
            c.seed = uint(v, "experiment.seed")?;
        }
        if let Some(v) = get("experiment", "watchdog") {
            c.watchdog = uint(v, "experiment.watchdog")?;
        }
        if let Some(v) = get("experiment", "stall_limit") {
            c.stall_limit = uint(v, "experiment.stall_limit")?;
        }
        if let Some(v) = get("experiment", "output") {
            c.output = Some(PathBuf::from(string(v, "experiment.output")?));
        }
        c.mesh.fault.seed = c.seed;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let d = self.mesh.dims;
        if d.x == 0 || d.y == 0 || d.z == 0 {
            return Err(field("mesh.dims", format!("every extent must be at least 1, got {d}")));
        }
        if self.mesh.buffer_depth < STALL_THRESHOLD {
            return Err(field(
                "mesh.buffer_depth",
                format!("must be at least the stall threshold {STALL_THRESHOLD}, got {}", self.mesh.buffer_depth),
            ));
        }
        if self.traffic.packet_length == 0 {
            return Err(field("traffic.packet_length", "must be at least 1"));
        }
        if self.traffic.injection_interval == 0 {
            return Err(field("traffic.injection_interval", "must be at least 1"));
        }
        if self.traffic.packets_per_node > 0 && d.nodes() < 2 {
            return Err(field("mesh.dims", "a single-node mesh has nowhere to send packets"));
        }
        for (key, empty) in [
            ("experiment.benchmarks", self.benchmarks.is_empty()),
            ("experiment.modes", self.modes.is_empty()),
            ("experiment.rates", self.rates.is_empty()),
            ("experiment.seeds", self.seeds.is_empty()),
        ] {
            if empty {
                return Err(field(key, "must not be empty"));
            }
        }
        if self.watchdog == 0 {
            return Err(field("experiment.watchdog", "must be at least 1"));
        }
        Ok(())
    }

    /// Mesh configuration of one job.
    pub fn job_mesh(&self, mode: ProtectionMode, rate: (f64, f64), seed: u64) -> MeshConfig {
        MeshConfig {
            protection: mode,
            fault: FaultPlan { p_npc: rate.0, p_sa: rate.1, mode: self.mesh.fault.mode, seed },
            ..self.mesh
        }
    }
}

fn apply_override(doc: &mut Table, spec: &str) -> Result<(), ConfigError> {
    let bad = || ConfigError::BadOverride(spec.to_string());
    let (path, raw) = spec.split_once('=').ok_or_else(bad)?;
    let (section, key) = path.trim().split_once('.').ok_or_else(bad)?;
    if section.is_empty() || key.is_empty() || key.contains('.') {
        return Err(bad());
    }
    let raw = raw.trim();
    // TOML literal when it parses as one, otherwise a bare string.
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let entry = doc.entry(section.to_string()).or_insert_with(|| Value::Table(Table::new()));
    match entry {
        Value::Table(t) => {
            t.insert(key.to_string(), value);
            Ok(())
        }
        _ => Err(field(section, "expected a section")),
    }
}

fn string<'a>(v: &'a Value, key: &str) -> Result<&'a str, ConfigError> {
    v.as_str().ok_or_else(|| field(key, format!("expected a string, got {v}")))
}

fn uint(v: &Value, key: &str) -> Result<u64, ConfigError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(field(key, format!("expected a non-negative integer, got {v}"))),
    }
}

fn narrow<N: TryFrom<u64>>(n: u64, key: &str) -> Result<N, ConfigError> {
    N::try_from(n).map_err(|_| field(key, format!("{n} is out of range")))
}

fn parsed<T: FromStr<Err = String>>(v: &Value, key: &str) -> Result<T, ConfigError> {
    string(v, key)?.parse().map_err(|e| field(key, e))
}

fn dims(v: &Value) -> Result<Dims, ConfigError> {
    const KEY: &str = "mesh.dims";
    match v {
        Value::String(s) => s.parse().map_err(|e| field(KEY, e)),
        Value::Array(a) if a.len() == 3 => {
            let n: Vec<u16> = a.iter().map(|x| uint(x, KEY).and_then(|n| narrow(n, KEY))).collect::<Result<_, _>>()?;
            Ok(Dims::new(n[0], n[1], n[2]))
        }
        _ => Err(field(KEY, format!("expected \"XxYxZ\" or [x, y, z], got {v}"))),
    }
}

/// A string list, either as an array or as one comma-separated string.
fn list<T: FromStr<Err = String>>(v: &Value, key: &str) -> Result<Vec<T>, ConfigError> {
    let items: Vec<String> = match v {
        Value::String(s) => s.split(',').map(|p| p.trim().to_string()).filter(|p| !p.is_empty()).collect(),
        Value::Array(a) => a.iter().map(|x| string(x, key).map(str::to_string)).collect::<Result<_, _>>()?,
        _ => return Err(field(key, format!("expected a list, got {v}"))),
    };
    items.iter().map(|s| s.parse().map_err(|e| field(key, e))).collect()
}

/// `0.0833` or `"8.33%"`.
pub fn parse_probability(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let p = match s.strip_suffix('%') {
        // Parsed as `<pct>e-2` so "8.33%" is exactly 0.0833.
        Some(pct) => format!("{}e-2", pct.trim()).parse::<f64>(),
        None => s.parse::<f64>(),
    }
    .map_err(|_| format!("`{s}` is not a probability"))?;
    if !(0.0..=1.0).contains(&p) {
        return Err(format!("{s} is outside [0, 1]"));
    }
    Ok(p)
}

fn probability(v: &Value, key: &str) -> Result<f64, ConfigError> {
    let p = match v {
        Value::Float(f) => *f,
        Value::Integer(i) => *i as f64,
        Value::String(s) => return parse_probability(s).map_err(|e| field(key, e)),
        _ => return Err(field(key, format!("expected a probability, got {v}"))),
    };
    if !(0.0..=1.0).contains(&p) {
        return Err(field(key, format!("{p} is outside [0, 1]")));
    }
    Ok(p)
}

fn parse_rate(s: &str) -> Result<(f64, f64), String> {
    match s.split_once('&') {
        Some((a, b)) => Ok((parse_probability(a)?, parse_probability(b)?)),
        None => parse_probability(s).map(|p| (p, p)),
    }
}

/// Comma-separated rates, each `p` or `p_npc&p_sa`.
pub fn parse_rates(s: &str) -> Result<Vec<(f64, f64)>, String> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(parse_rate).collect()
}

fn rates(v: &Value) -> Result<Vec<(f64, f64)>, ConfigError> {
    const KEY: &str = "experiment.rates";
    match v {
        Value::String(s) => parse_rates(s).map_err(|e| field(KEY, e)),
        Value::Array(a) => a
            .iter()
            .map(|x| match x {
                Value::String(s) => parse_rate(s).map_err(|e| field(KEY, e)),
                Value::Array(pair) if pair.len() == 2 => Ok((probability(&pair[0], KEY)?, probability(&pair[1], KEY)?)),
                other => probability(other, KEY).map(|p| (p, p)),
            })
            .collect(),
        other => probability(other, KEY).map(|p| vec![(p, p)]),
    }
}

/// `"1..=20"`, `"1..21"`, `"3, 5, 8"` or an integer array.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("`{}` is not a seed", t.trim()));
    if let Some((a, b)) = s.split_once("..=") {
        Ok((num(a)?..=num(b)?).collect())
    } else if let Some((a, b)) = s.split_once("..") {
        Ok((num(a)?..num(b)?).collect())
    } else {
        s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(num).collect()
    }
}

fn seeds(v: &Value) -> Result<Vec<u64>, ConfigError> {
    const KEY: &str = "experiment.seeds";
    match v {
        Value::String(s) => parse_seeds(s).map_err(|e| field(KEY, e)),
        Value::Array(a) => a.iter().map(|x| uint(x, KEY)).collect(),
        Value::Integer(_) => Ok(vec![uint(v, KEY)?]),
        _ => Err(field(KEY, format!("expected a seed list, got {v}"))),
    }
}

/// `8.33%`, or `11.11%&6.67%` when the two sites differ.
pub fn rate_label(rate: (f64, f64)) -> String {
    let pct = |p: f64| format!("{}%", (p * 10_000.0).round() / 100.0);
    if rate.0 == rate.1 {
        pct(rate.0)
    } else {
        format!("{}&{}", pct(rate.0), pct(rate.1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str, sets: &[&str]) -> Result<ExperimentConfig, ConfigError> {
        let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
        ExperimentConfig::load(text, &sets)
    }

    #[test]
    fn empty_document_gives_the_standard_sweep() {
        let c = load("", &[]).unwrap();
        assert_eq!(c.benchmarks.len() * c.modes.len() * c.rates.len(), 45);
        assert_eq!(c.seeds, (1..=20).collect::<Vec<_>>());
        assert_eq!(c.rates, vec![(0.0, 0.0), (0.0833, 0.0833), (0.1667, 0.1667), (0.1111, 0.0667), (0.33, 0.33)]);
    }

    #[test]
    fn file_values_and_overrides_combine() {
        let text = "[mesh]\ndims = \"2x3x1\"\n[traffic]\npacket_length = 8\n[fault]\np_npc = \"10%\"\n";
        let c = load(text, &["traffic.packet_length=2", "experiment.seeds=1..4", "mesh.protection=sera"]).unwrap();
        assert_eq!(c.mesh.dims, Dims::new(2, 3, 1));
        assert_eq!(c.traffic.packet_length, 2);
        assert_eq!(c.seeds, vec![1, 2, 3]);
        assert_eq!(c.mesh.protection, ProtectionMode::Sera);
        assert_eq!(c.mesh.fault.p_npc, 0.1);
    }

    #[test]
    fn dotted_top_level_keys_are_accepted() {
        let c = load("mesh.buffer_depth = 6\nexperiment.modes = [\"TMR\"]\n", &[]).unwrap();
        assert_eq!(c.mesh.buffer_depth, 6);
        assert_eq!(c.modes, vec![ProtectionMode::Tmr]);
    }

    #[test]
    fn empty_seed_list_names_the_field() {
        let err = load("[experiment]\nseeds = []\n", &[]).unwrap_err();
        assert_eq!(err, field("experiment.seeds", "must not be empty"));
        assert!(err.to_string().contains("experiment.seeds"));
    }

    #[test]
    fn errors_are_field_precise() {
        assert!(
            matches!(load("[mesh]\nbuffer_depth = 2\n", &[]), Err(ConfigError::Field { key, .. }) if key == "mesh.buffer_depth")
        );
        assert!(matches!(load("", &["fault.p_sa=1.5"]), Err(ConfigError::Field { key, .. }) if key == "fault.p_sa"));
        assert!(
            matches!(load("", &["traffic.pattern=zigzag"]), Err(ConfigError::Field { key, .. }) if key == "traffic.pattern")
        );
        assert_eq!(load("", &["mesh.colour=red"]), Err(ConfigError::UnknownKey("mesh.colour".into())));
        assert_eq!(load("", &["nodots=1"]), Err(ConfigError::BadOverride("nodots=1".into())));
        let parse = load("[mesh\n", &[]).unwrap_err();
        assert!(matches!(parse, ConfigError::Parse(ref m) if m.contains("line 1")), "{parse}");
    }

    #[test]
    fn rates_accept_strings_numbers_and_pairs() {
        let c = load("[experiment]\nrates = [0, \"8.33%\", [0.1111, 0.0667], \"5%&1%\"]\n", &[]).unwrap();
        assert_eq!(c.rates, vec![(0.0, 0.0), (0.0833, 0.0833), (0.1111, 0.0667), (0.05, 0.01)]);
    }

    #[test]
    fn rate_labels_distinguish_asymmetric_rates() {
        assert_eq!(rate_label((0.0833, 0.0833)), "8.33%");
        assert_eq!(rate_label((0.1111, 0.0667)), "11.11%&6.67%");
        assert_eq!(rate_label((0.0, 0.0)), "0%");
    }
}
