//! Plain-text system format, one equation per line:
//!
//! ```text
//! x<K> = 1
//! x<I> + x<J> = x<K>
//! x<I> * x<J> = x<K>
//! ```
//!
//! Tokens are separated by single spaces. The variable count is the largest
//! index used unless an optional leading header line `n = <N>` is present.

use std::fmt::Write as _;

use crate::equation::{EnSystem, Equation, VarIndex};
use crate::error::{Error, Result};

pub fn system_to_text(system: &EnSystem) -> String {
    let mut out = String::new();
    if system.n() != system.max_index() {
        // Padded variables would be lost without an explicit count.
        let _ = writeln!(out, "n = {}", system.n());
    }
    for eq in system.equations() {
        let _ = writeln!(out, "{eq}");
    }
    out
}

pub fn system_from_text(input: &str) -> Result<EnSystem> {
    let mut declared_n: Option<VarIndex> = None;
    let mut equations = Vec::new();
    let mut saw_equation = false;

    for (lineno, raw) in input.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split(' ').collect();
        match tokens.as_slice() {
            ["n", "=", count] => {
                if saw_equation || declared_n.is_some() {
                    return Err(parse_err(lineno, "header `n = <N>` must come first"));
                }
                let n = parse_count(lineno, count)?;
                declared_n = Some(n);
            }
            [lhs, "=", "1"] => {
                equations.push(Equation::unit(parse_var(lineno, lhs)?)?);
                saw_equation = true;
            }
            [a, "+", b, "=", c] => {
                equations.push(Equation::sum(
                    parse_var(lineno, a)?,
                    parse_var(lineno, b)?,
                    parse_var(lineno, c)?,
                )?);
                saw_equation = true;
            }
            [a, "*", b, "=", c] => {
                equations.push(Equation::prod(
                    parse_var(lineno, a)?,
                    parse_var(lineno, b)?,
                    parse_var(lineno, c)?,
                )?);
                saw_equation = true;
            }
            _ => {
                return Err(parse_err(lineno, &format!("unrecognized line `{line}`")));
            }
        }
    }

    match declared_n {
        Some(n) => EnSystem::new(n, equations),
        None if equations.is_empty() => Err(Error::Parse(
            "empty input: need at least one equation or a header line".into(),
        )),
        None => EnSystem::from_equations(equations),
    }
}

fn parse_err(lineno: usize, msg: &str) -> Error {
    Error::Parse(format!("line {}: {msg}", lineno + 1))
}

fn parse_var(lineno: usize, token: &str) -> Result<VarIndex> {
    let digits = token
        .strip_prefix('x')
        .ok_or_else(|| parse_err(lineno, &format!("expected a variable, got `{token}`")))?;
    let idx: VarIndex = digits
        .parse()
        .map_err(|_| parse_err(lineno, &format!("bad variable index `{token}`")))?;
    if idx == 0 {
        return Err(parse_err(lineno, "variable indices start at 1"));
    }
    Ok(idx)
}

fn parse_count(lineno: usize, token: &str) -> Result<VarIndex> {
    let n: VarIndex = token
        .parse()
        .map_err(|_| parse_err(lineno, &format!("bad variable count `{token}`")))?;
    if n == 0 {
        return Err(parse_err(lineno, "variable count must be positive"));
    }
    Ok(n)
}
