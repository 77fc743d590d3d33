//! `--config file.json` support. The file holds one object: an optional
//! `command`, an optional `action` and flag values keyed by long flag name.
//! Its flags are spliced in right after the subcommand, ahead of the flags
//! typed by the user, and every argument overrides itself, so the command
//! line wins.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::CommandFactory;
use serde_json::{Map, Value};

use crate::args::Cli;
use crate::CliError;

const ACTION_COMMANDS: [&str; 2] = ["spectra", "width"];

/// Splits `--config FILE` / `--config=FILE` out of the raw arguments.
fn take_config(args: &[OsString]) -> Result<(Option<PathBuf>, Vec<OsString>), CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            let v = it
                .next()
                .ok_or_else(|| CliError::Usage("--config needs a file".into()))?;
            path = Some(PathBuf::from(v));
        } else if let Some(v) = s.strip_prefix("--config=") {
            path = Some(PathBuf::from(v));
        } else {
            rest.push(a.clone());
        }
    }
    Ok((path, rest))
}

fn load(path: &Path) -> Result<Map<String, Value>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(CliError::Usage("config must be a JSON object".into())),
        Err(e) => Err(CliError::Usage(format!("config {}: {e}", path.display()))),
    }
}

fn scalar(key: &str, v: &Value) -> Result<Option<String>, CliError> {
    Ok(match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(true) => None,
        Value::Array(items) => {
            let parts: Vec<String> = items
                .iter()
                .map(|x| match x {
                    Value::String(s) => Ok(s.clone()),
                    Value::Number(n) => Ok(n.to_string()),
                    _ => Err(CliError::Usage(format!("config key `{key}`: list items must be numbers or strings"))),
                })
                .collect::<Result<_, _>>()?;
            Some(parts.join(","))
        }
        _ => return Err(CliError::Usage(format!("config key `{key}` has an unsupported value"))),
    })
}

fn is_flag(s: &OsString) -> bool {
    s.to_string_lossy().starts_with('-')
}

/// Raw arguments (program name first) with the config file merged in.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let (path, args) = take_config(&args)?;
    let Some(path) = path else {
        return Ok(args);
    };
    let mut cfg = load(&path)?;
    let cfg_command = match cfg.remove("command") {
        Some(Value::String(s)) => Some(s),
        None => None,
        Some(_) => return Err(CliError::Usage("config `command` must be a string".into())),
    };
    let cfg_action = match cfg.remove("action") {
        Some(Value::String(s)) => Some(s),
        None => None,
        Some(_) => return Err(CliError::Usage("config `action` must be a string".into())),
    };

    let pos = args.iter().skip(1).position(|a| !is_flag(a)).map(|p| p + 1);
    let user_command = pos.map(|p| args[p].to_string_lossy().into_owned());
    let command = match (&user_command, &cfg_command) {
        (Some(u), Some(c)) if u != c => {
            return Err(CliError::Usage(format!("config is for `{c}`, command line asks for `{u}`")))
        }
        (Some(u), _) => u.clone(),
        (None, Some(c)) => c.clone(),
        (None, None) => return Err(CliError::Usage("no command given".into())),
    };

    let root = Cli::command();
    let sub = root
        .find_subcommand(&command)
        .ok_or_else(|| CliError::Usage(format!("unknown command `{command}`")))?;
    let known: Vec<String> = sub
        .get_arguments()
        .filter_map(|a| a.get_long().map(str::to_string))
        .collect();

    let mut injected: Vec<OsString> = Vec::new();
    let (head, tail): (Vec<OsString>, Vec<OsString>) = match pos {
        Some(p) => (args[..=p].to_vec(), args[p + 1..].to_vec()),
        None => {
            let mut h = args.clone();
            h.push(command.clone().into());
            (h, Vec::new())
        }
    };
    let user_has_action = tail.first().is_some_and(|a| !is_flag(a));
    if let Some(action) = cfg_action {
        if !ACTION_COMMANDS.contains(&command.as_str()) {
            return Err(CliError::Usage(format!("`{command}` takes no action")));
        }
        if !user_has_action {
            injected.push(action.into());
        }
    }
    for (key, value) in &cfg {
        let flag = key.replace('_', "-");
        if !known.contains(&flag) || flag == "config" {
            return Err(CliError::Usage(format!("unknown config key `{key}` for `{command}`")));
        }
        if let Some(v) = scalar(key, value)? {
            injected.push(format!("--{flag}").into());
            injected.push(v.into());
        } else if matches!(value, Value::Bool(true)) {
            injected.push(format!("--{flag}").into());
        }
    }

    let mut out = head;
    if user_has_action {
        let mut t = tail.into_iter();
        out.push(t.next().expect("checked above"));
        out.extend(injected);
        out.extend(t);
    } else {
        out.extend(injected);
        out.extend(tail);
    }
    Ok(out)
}
