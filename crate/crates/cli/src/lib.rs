//! Command-line experiment runner.
//!
//! `security-bench` writes attacker sweep curves, `netsim` and `sweep` run
//! the packet-level simulator over seeds, schemes and sweep points. Every
//! output file is accompanied by `<out>.config.toml`, the fully resolved
//! configuration needed to reproduce it.

pub mod args;
pub mod bench;
pub mod error;
pub mod experiment;

pub use args::{Cli, Command};
pub use error::{CliError, Result};

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::SecurityBench(a) => bench::run(&a),
        Command::Netsim(a) => experiment::run(&a, false),
        Command::Sweep(a) => experiment::run(&a, true),
    }
}

/// Path of the resolved-config record written next to `out`.
pub fn config_record_path(out: &std::path::Path) -> std::path::PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".config.toml");
    name.into()
}

/// Splits `key=value`.
pub fn split_override(text: &str) -> Result<(&str, &str)> {
    text.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .filter(|(k, _)| !k.is_empty())
        .ok_or_else(|| CliError::Config(format!("override `{text}` is not of the form key=value")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_path_appends_suffix() {
        assert_eq!(
            config_record_path(std::path::Path::new("out/run.csv")),
            std::path::PathBuf::from("out/run.csv.config.toml")
        );
    }

    #[test]
    fn overrides_split_on_first_equals() {
        assert_eq!(split_override("a.b = x=y").unwrap(), ("a.b", "x=y"));
        assert!(split_override("novalue").is_err());
        assert!(split_override("=3").is_err());
    }
}
