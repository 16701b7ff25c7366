//! `netsim` and `sweep`: simulator runs written as CSV rows.

use std::fs::{self, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use dstrust_netsim::config::{Attack, Scheme, SimConfig};
use dstrust_netsim::{rng, run_simulation, MetricsReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::args::SimArgs;
use crate::{config_record_path, split_override, CliError, Result};

pub const HEADER: &str = "scheme,seed,n_attackers,attack,drop_prob,pdr,nro,throughput_bps,fpr";

/// What `<out>.config.toml` holds: every row in the results file is
/// reproduced by one of these seeds, one of these schemes and one point of
/// `config.sweep` (or `config` itself when there is no sweep).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seeds: Vec<u64>,
    pub schemes: Vec<Scheme>,
    pub config: SimConfig,
}

/// One simulation: a fully resolved config and its seed.
#[derive(Debug, Clone)]
pub struct Job {
    pub config: SimConfig,
    pub seed: u64,
}

pub fn run(args: &SimArgs, require_sweep: bool) -> Result<()> {
    let record = resolve(args)?;
    if require_sweep && record.config.sweep.is_none() {
        return Err(CliError::Config("`sweep` needs a [sweep] table in the config".into()));
    }
    let jobs = plan(&record)?;
    let record = if args.append {
        merged_record(&args.out, record)?
    } else {
        record
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let batch = pool.current_num_threads().max(1);

    let record_path = config_record_path(&args.out);
    let text = toml::to_string(&record).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(&record_path, text).map_err(CliError::io(&record_path))?;

    let mut out = open_results(&args.out, args.append)?;
    let mut done = 0;
    for chunk in jobs.chunks(batch) {
        let reports: Vec<_> = pool.install(|| {
            chunk
                .par_iter()
                .map(|job| run_simulation(&job.config, job.seed))
                .collect()
        });
        for (job, report) in chunk.iter().zip(reports) {
            let report = report?;
            writeln!(out, "{}", row(job, &report)).map_err(CliError::io(&args.out))?;
        }
        out.flush().map_err(CliError::io(&args.out))?;
        done += chunk.len();
        eprintln!("{done}/{} runs", jobs.len());
    }
    println!("wrote {} rows to {}", jobs.len(), args.out.display());
    Ok(())
}

/// File, then `--set`, then `--scheme` and `--seed`.
pub fn resolve(args: &SimArgs) -> Result<RunRecord> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(CliError::io(path))?;
            load_config(&text).map_err(|e| match e {
                CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
                other => other,
            })?
        }
        None => SimConfig::default(),
    };
    for text in &args.overrides {
        let (key, value) = split_override(text)?;
        config.apply_override(key, value)?;
    }
    let schemes = match (&args.scheme, &config.sweep) {
        (Some(list), _) => parse_schemes(list)?,
        (None, Some(sweep)) => sweep.schemes.clone(),
        (None, None) => vec![config.scheme],
    };
    if schemes.is_empty() {
        return Err(CliError::Config("no schemes selected".into()));
    }
    let seeds = if args.seed.is_empty() {
        (0..config.runs)
            .map(|i| rng::run_seed(config.master_seed, i as u64))
            .collect()
    } else {
        args.seed.clone()
    };
    if seeds.is_empty() {
        return Err(CliError::Config("no seeds: set runs > 0 or pass --seed".into()));
    }
    Ok(RunRecord { seeds, schemes, config })
}

/// Accepts either a plain config or a previously written run record.
fn load_config(text: &str) -> Result<SimConfig> {
    if let Ok(record) = toml::from_str::<RunRecord>(text) {
        record.config.validate()?;
        return Ok(record.config);
    }
    Ok(SimConfig::from_toml(text)?)
}

fn parse_schemes(list: &str) -> Result<Vec<Scheme>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(CliError::from))
        .collect()
}

/// Every run in output order: sweep point, then scheme, then seed.
pub fn plan(record: &RunRecord) -> Result<Vec<Job>> {
    let base = SimConfig {
        sweep: None,
        ..record.config.clone()
    };
    let points: Vec<SimConfig> = match &record.config.sweep {
        None => vec![base],
        Some(sweep) if !sweep.n_attackers.is_empty() => sweep
            .n_attackers
            .iter()
            .map(|&n| SimConfig {
                n_attackers: n,
                ..base.clone()
            })
            .collect(),
        Some(sweep) => sweep
            .drop_probs
            .iter()
            .map(|&p| SimConfig {
                drop_prob: p,
                ..base.clone()
            })
            .collect(),
    };
    let mut jobs = Vec::with_capacity(points.len() * record.schemes.len() * record.seeds.len());
    for point in &points {
        for &scheme in &record.schemes {
            let config = SimConfig {
                scheme,
                ..point.clone()
            };
            config.validate()?;
            jobs.extend(record.seeds.iter().map(|&seed| Job {
                config: config.clone(),
                seed,
            }));
        }
    }
    Ok(jobs)
}

pub fn row(job: &Job, report: &MetricsReport) -> String {
    let cfg = &job.config;
    let (n_attackers, drop_prob) = if cfg.attackers.is_empty() {
        match cfg.attack {
            Attack::None => (0, 0.0),
            Attack::Blackhole => (cfg.n_attackers, 1.0),
            Attack::Grayhole => (cfg.n_attackers, cfg.drop_prob),
        }
    } else {
        (cfg.attackers.len(), cfg.drop_prob)
    };
    let nro = report.nro.map_or_else(|| "NA".to_string(), |v| v.to_string());
    format!(
        "{},{},{},{},{},{},{},{},{}",
        cfg.scheme,
        job.seed,
        n_attackers,
        cfg.attack,
        drop_prob,
        report.pdr,
        nro,
        report.throughput_bps,
        report.false_positive_rate
    )
}

fn open_results(path: &Path, append: bool) -> Result<BufWriter<fs::File>> {
    let existing = append && fs::metadata(path).is_ok_and(|m| m.len() > 0);
    if existing {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        if text.lines().next() != Some(HEADER) {
            return Err(CliError::Config(format!(
                "{}: not a results file from this tool",
                path.display()
            )));
        }
        if !text.ends_with('\n') {
            return Err(CliError::Config(format!("{}: last row is incomplete", path.display())));
        }
    }
    let file = OpenOptions::new()
        .create(true)
        .write(true)
        .append(append)
        .truncate(!append)
        .open(path)
        .map_err(CliError::io(path))?;
    let mut out = BufWriter::new(file);
    if !existing {
        writeln!(out, "{HEADER}").map_err(CliError::io(path))?;
    }
    Ok(out)
}

/// When appending, the earlier record must describe the same config; the
/// seed and scheme lists are unioned so the record still covers every row.
fn merged_record(out: &Path, record: RunRecord) -> Result<RunRecord> {
    let path = config_record_path(out);
    if !fs::metadata(out).is_ok_and(|m| m.len() > 0) {
        return Ok(record);
    }
    let text = fs::read_to_string(&path).map_err(CliError::io(&path))?;
    let mut old: RunRecord = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if old.config != record.config {
        return Err(CliError::Config(format!(
            "{}: refusing to append rows from a different config",
            out.display()
        )));
    }
    for s in record.seeds {
        if !old.seeds.contains(&s) {
            old.seeds.push(s);
        }
    }
    for s in record.schemes {
        if !old.schemes.contains(&s) {
            old.schemes.push(s);
        }
    }
    Ok(old)
}
