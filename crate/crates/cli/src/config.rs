//! `key=value` config files. Every key names a long flag; the lines are
//! spliced in right after the subcommand so that flags given on the command
//! line come later and win.

use std::fs;

use crate::error::CliError;

/// Splits `--config PATH` / `--config=PATH` out of `args`.
fn take_config(args: &[String]) -> Result<(Vec<String>, Option<String>), CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            let p = it
                .next()
                .ok_or_else(|| CliError::Validation("--config needs a path".into()))?;
            path = Some(p.clone());
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a.clone());
        }
    }
    Ok((rest, path))
}

/// Turns config text into flags. `true` enables a switch, `false` drops it.
pub fn parse_config(text: &str) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("config line {}: expected key=value", no + 1)))?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim();
        if key.is_empty() {
            return Err(CliError::Validation(format!("config line {}: empty key", no + 1)));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => out.push(format!("--{key}={v}")),
        }
    }
    Ok(out)
}

/// Full argument vector with the config file applied.
pub fn expand_args(args: &[String], subcommands: &[&str]) -> Result<Vec<String>, CliError> {
    let (mut rest, path) = take_config(args)?;
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Validation(format!("cannot read config {path}: {e}")))?;
    let extra = parse_config(&text)?;
    let at = rest
        .iter()
        .position(|a| subcommands.contains(&a.as_str()))
        .map_or(rest.len(), |i| i + 1);
    rest.splice(at..at, extra);
    Ok(rest)
}
