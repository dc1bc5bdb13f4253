//! Solve configuration files.

use biharmonic_core::{Config, Domain};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::CliError;

/// Contents of a `solve` config: a `domain` object plus solver fields at the top level.
///
/// ```json
/// { "domain": { "kind": "unit_ball", "n": 2 }, "alpha": 0.5, "nodes": 512 }
/// ```
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub domain: Domain,
    pub solver: Config,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            domain: Domain::unit_ball(2).expect("disk is valid"),
            solver: Config::default(),
        }
    }
}

/// Parses and validates a config; diagnostics name the file, line and field.
pub fn parse(text: &str, origin: &str) -> Result<RunConfig, CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        CliError::usage(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
    })?;
    let Value::Object(mut map) = value else {
        return Err(CliError::usage(format!("{origin}: config must be a JSON object")));
    };
    let domain = match map.remove("domain") {
        None => RunConfig::default().domain,
        Some(v) => {
            let d: Domain = serde_json::from_value(v)
                .map_err(|e| field_error(text, origin, "domain", &e.to_string()))?;
            d.validate().map_err(|e| field_error(text, origin, "domain", &e.to_string()))?;
            d
        }
    };
    let solver = solver_from(map, text, origin)?;
    Ok(RunConfig { domain, solver })
}

fn solver_from(map: Map<String, Value>, text: &str, origin: &str) -> Result<Config, CliError> {
    let solver: Config = serde_json::from_value(Value::Object(map)).map_err(|e| {
        let msg = e.to_string();
        let field = msg
            .split('`')
            .nth(1)
            .map(str::to_string)
            .unwrap_or_default();
        field_error(text, origin, &field, &msg)
    })?;
    solver.validate().map_err(|e| {
        let msg = e.to_string();
        let field = msg
            .split_whitespace()
            .find(|w| {
                w.chars().all(|c| c.is_ascii_lowercase() || c == '_') && text.contains(&format!("\"{w}\""))
            })
            .unwrap_or("")
            .to_string();
        field_error(text, origin, &field, &msg)
    })?;
    Ok(solver)
}

fn field_error(text: &str, origin: &str, field: &str, msg: &str) -> CliError {
    // the last occurrence wins for duplicate keys
    let needle = format!("\"{field}\"");
    let line = (!field.is_empty())
        .then(|| text.lines().enumerate().filter(|(_, l)| l.contains(&needle)).last().map(|(i, _)| i))
        .flatten();
    match line {
        Some(l) => CliError::usage(format!("{origin}:{}: field `{field}`: {msg}", l + 1)),
        None => CliError::usage(format!("{origin}: {msg}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_to_disk() {
        let c = parse("{}", "c.json").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn alpha_out_of_range_names_line() {
        let e = parse("{\n  \"alpha\": 1.2\n}", "c.json").unwrap_err();
        assert_eq!(e.code, 1);
        assert!(e.message.contains("alpha out of range (0,1)"), "{}", e.message);
        assert!(e.message.starts_with("c.json:2:"), "{}", e.message);
    }

    #[test]
    fn unknown_field_names_line() {
        let e = parse("{\n  \"alpha\": 0.5,\n  \"nodez\": 3\n}", "c.json").unwrap_err();
        assert!(e.message.starts_with("c.json:3: field `nodez`"), "{}", e.message);
    }

    #[test]
    fn syntax_error_has_position() {
        let e = parse("{\n  \"alpha\": ,\n}", "c.json").unwrap_err();
        assert!(e.message.starts_with("c.json:2:"), "{}", e.message);
    }

    #[test]
    fn iteration_cap_alias() {
        let c = parse(r#"{"max_iter": 1}"#, "c.json").unwrap();
        assert_eq!(c.solver.max_iterations, 1);
    }
}
