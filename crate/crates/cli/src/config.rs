//! `--config <file>` support and the config echo written into output headers.

use std::fmt::Write as _;
use std::fs;

/// Splices options from a `key=value` file in right after the subcommand, so
/// anything given on the command line (which comes later) wins.
///
/// Blank lines and `#` comments are skipped. `key=true` becomes a bare flag
/// and `key=false` is dropped.
pub fn expand_config_args(args: Vec<String>) -> Result<Vec<String>, String> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or("--config needs a file path")?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let injected = parse_config(&text)?;
    // argv[0], subcommand, then injected options, then the user's options.
    let split = rest.len().min(2);
    let mut out: Vec<String> = rest[..split].to_vec();
    out.extend(injected);
    out.extend_from_slice(&rest[split..]);
    Ok(out)
}

fn parse_config(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value", no + 1))?;
        let key = k.trim().replace('_', "-");
        match v.trim() {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => {
                out.push(format!("--{key}"));
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}

/// Effective configuration of one run, in a fixed order.
#[derive(Debug, Default, Clone)]
pub struct Echo(Vec<(String, String)>);

impl Echo {
    pub fn new(command: &str) -> Self {
        Self(vec![("command".into(), command.into())])
    }

    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.0.push((key.into(), value.to_string()));
        self
    }

    /// Comment block that opens every CSV file.
    pub fn csv_header(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.0 {
            let _ = writeln!(s, "# {k}={v}");
        }
        s
    }
}
