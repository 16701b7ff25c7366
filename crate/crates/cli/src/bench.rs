//! `security-bench`: attacker sweep curves.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use dstrust_core::bench::{self, Attack, SweepConfig};
use serde::{Deserialize, Serialize};

use crate::args::BenchArgs;
use crate::{config_record_path, split_override, CliError, Result};

/// What `<out>.config.toml` holds. It loads back through `--config`.
#[derive(Debug, Serialize, Deserialize)]
struct BenchRecord {
    #[serde(flatten)]
    sweep: SweepConfig,
    wiring: BTreeMap<String, String>,
}

pub fn run(args: &BenchArgs) -> Result<()> {
    let cfg = resolve(args)?;
    let curves = bench::run_sweep(&cfg)?;
    bench::write_curves(&curves, &args.out).map_err(CliError::io(&args.out))?;
    write_record(&cfg, &args.out)?;
    for curve in &curves {
        match curve.crossing_index {
            Some(k) => println!("{} {}: crosses at {k}", curve.scheme, curve.attack),
            None => println!("{} {}: never crosses", curve.scheme, curve.attack),
        }
    }
    Ok(())
}

/// Defaults for the attack, then the file, then `--scheme`, then `--set`.
pub fn resolve(args: &BenchArgs) -> Result<SweepConfig> {
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(CliError::io(path))?;
            Some(
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?,
            )
        }
        None => None,
    };
    let attack: Attack = match (&args.attack, file.as_ref().and_then(|t| t.get("attack"))) {
        (Some(flag), _) => flag.parse()?,
        (None, Some(toml::Value::String(s))) => s.parse()?,
        (None, Some(other)) => return Err(CliError::Config(format!("attack: expected a string, got {other}"))),
        (None, None) => Attack::Badmouth,
    };
    let mut cfg = SweepConfig::for_attack(attack);
    if let Some(mut table) = file {
        table.remove("wiring");
        table.remove("attack");
        cfg = merge(&cfg, table)?;
    }
    if let Some(list) = &args.scheme {
        cfg.schemes = bench::parse_scheme_list(list)?;
    }
    for text in &args.overrides {
        let (key, value) = split_override(text)?;
        cfg.apply_override(key, value)?;
    }
    if cfg.schemes.is_empty() {
        return Err(CliError::Config("no schemes selected".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn merge(base: &SweepConfig, file: toml::Table) -> Result<SweepConfig> {
    let bad = |e: String| CliError::Config(e);
    let mut root = toml::Table::try_from(base).map_err(|e| bad(e.to_string()))?;
    merge_table(&mut root, file, "")?;
    root.try_into().map_err(|e: toml::de::Error| bad(e.to_string()))
}

fn merge_table(into: &mut toml::Table, from: toml::Table, prefix: &str) -> Result<()> {
    for (key, value) in from {
        let path = format!("{prefix}{key}");
        match (into.get_mut(&key), value) {
            (None, _) => return Err(CliError::Config(format!("unknown key `{path}`"))),
            (Some(toml::Value::Table(inner)), toml::Value::Table(v)) => merge_table(inner, v, &format!("{path}."))?,
            (Some(slot), v) => *slot = v,
        }
    }
    Ok(())
}

fn write_record(cfg: &SweepConfig, out: &Path) -> Result<()> {
    let record = BenchRecord {
        sweep: cfg.clone(),
        wiring: cfg
            .schemes
            .iter()
            .map(|s| (s.to_string(), s.wiring().to_string()))
            .collect(),
    };
    let text = toml::to_string(&record).map_err(|e| CliError::Runtime(e.to_string()))?;
    let path = config_record_path(out);
    fs::write(&path, text).map_err(CliError::io(path))
}
