//! Experiment files: a flat TOML table whose keys are the command-line flags
//! with `_` for `-`, plus `experiment` naming the subcommand.
//!
//! ```toml
//! experiment = "maxfid"
//! n_min = 10
//! n_max = 100
//! T = 4000
//! ```
//!
//! The table is turned back into an argument list and parsed by the same
//! parser as the command line, so defaults and validation are shared.

use crate::error::{CliError, CliResult};

pub fn argv_from_config(text: &str) -> CliResult<Vec<String>> {
    let table: toml::Table = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
    let experiment = match table.get("experiment") {
        Some(toml::Value::String(s)) => s.clone(),
        Some(_) => return Err(CliError::config("`experiment` must be a string")),
        None => return Err(CliError::config("missing key `experiment`")),
    };
    if experiment == "run" {
        return Err(CliError::config("an experiment file cannot run another one"));
    }
    let mut argv = vec!["qst".to_string(), experiment];
    for (key, value) in &table {
        if key == "experiment" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match value {
            toml::Value::Boolean(true) => argv.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) => {
                let parts = items.iter().map(|v| scalar(key, v)).collect::<CliResult<Vec<_>>>()?;
                argv.push(flag);
                argv.push(parts.join(","));
            }
            v => {
                argv.push(flag);
                argv.push(scalar(key, v)?);
            }
        }
    }
    Ok(argv)
}

fn scalar(key: &str, value: &toml::Value) -> CliResult<String> {
    match value {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(f.to_string()),
        _ => Err(CliError::config(format!("key `{key}`: expected a number, string or list of them"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_become_flags() {
        let argv = argv_from_config("experiment = \"ebit\"\nn = 33\nomega = [5, 15.5]\nT = 100.0\n").unwrap();
        assert_eq!(argv, ["qst", "ebit", "--T", "100", "--n", "33", "--omega", "5,15.5"]);
    }

    #[test]
    fn booleans_are_switches() {
        let argv = argv_from_config("experiment = \"disorder\"\nfull_scale = true\nsummary = false\n").unwrap();
        assert_eq!(argv, ["qst", "disorder", "--full-scale"]);
    }

    #[test]
    fn shipped_configs_parse() {
        use clap::Parser;
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut seen = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            let argv = argv_from_config(&std::fs::read_to_string(&path).unwrap()).unwrap();
            if let Err(e) = crate::args::Cli::try_parse_from(&argv) {
                panic!("{}: {e}", path.display());
            }
            seen += 1;
        }
        assert!(seen >= 10);
    }

    #[test]
    fn rejects_bad_files() {
        assert_eq!(argv_from_config("n = 3").unwrap_err().error, "invalid-config");
        assert!(argv_from_config("experiment = \"run\"").is_err());
        assert!(argv_from_config("experiment = \"ipr\"\n[nested]\nx = 1").is_err());
        assert!(argv_from_config("experiment = ").is_err());
    }
}
