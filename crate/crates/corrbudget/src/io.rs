//! File formats: the two-column correlation CSV, the flat key=value
//! config, and the record/CSV emitters. All reals print with 12
//! significant digits so output round-trips and reruns are byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use corrbudget_core::{BudgetPlan, FitResult};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
}

/// Formats a real with 12 significant digits.
pub fn fmt_real(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x:.11e}")
}

/// Loads a `l,epsilon_l` CSV: header row required, `l` starting at 1,
/// strictly increasing with no gaps. Returns the epsilon values in order.
pub fn load_epsilon_csv(path: &Path) -> Result<Vec<f64>, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let parse_err = |line: usize, message: String| IoError::Parse {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    let header_fields: Vec<&str> = header.split(',').map(str::trim).collect();
    if header_fields != ["l", "epsilon_l"] {
        return Err(parse_err(1, format!("expected header `l,epsilon_l`, got `{header}`")));
    }
    let mut eps = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(parse_err(line_no, format!("expected 2 fields, got {}", fields.len())));
        }
        let l: u64 = fields[0]
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad separation `{}`: {e}", fields[0])))?;
        if l != eps.len() as u64 + 1 {
            return Err(parse_err(
                line_no,
                format!("separations must run 1, 2, ... without gaps; got {l}"),
            ));
        }
        let value: f64 = fields[1]
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad epsilon `{}`: {e}", fields[1])))?;
        eps.push(value);
    }
    Ok(eps)
}

/// Parses a flat `key=value` config file; `#` starts a comment.
pub fn load_config(path: &Path) -> Result<Vec<(String, String)>, IoError> {
    let text = std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| IoError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message: format!("expected `key=value`, got `{line}`"),
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// The plan as a flat key=value record.
pub fn plan_record(plan: &BudgetPlan) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "N={}", plan.n);
    let _ = writeln!(s, "l_e={}", plan.l_e);
    let _ = writeln!(s, "sqrt_delta_le={}", fmt_real(plan.sqrt_delta_le));
    let _ = writeln!(s, "d={}", fmt_real(plan.d));
    let _ = writeln!(s, "eps_sec={}", fmt_real(plan.eps_sec));
    let _ = writeln!(s, "eps_total={}", fmt_real(plan.eps_total));
    let _ = writeln!(s, "vacuous={}", plan.vacuous);
    s
}

/// The plan as a one-row CSV (with header).
pub fn plan_csv(plan: &BudgetPlan) -> String {
    format!(
        "N,l_e,sqrt_delta_le,d,eps_sec,eps_total,vacuous\n{},{},{},{},{},{},{}\n",
        plan.n,
        plan.l_e,
        fmt_real(plan.sqrt_delta_le),
        fmt_real(plan.d),
        fmt_real(plan.eps_sec),
        fmt_real(plan.eps_total),
        plan.vacuous
    )
}

/// The fit as a flat key=value record.
pub fn fit_record(fit: &FitResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "epsilon1={}", fmt_real(fit.epsilon1));
    let _ = writeln!(s, "decay_C={}", fmt_real(fit.decay_c));
    let _ = writeln!(s, "max_log_residual={}", fmt_real(fit.max_log_residual));
    s
}
