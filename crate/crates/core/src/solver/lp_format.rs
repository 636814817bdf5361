//! Reader and writer for the plain-text LP format used by MILP solvers.
//!
//! Only the subset needed for 0-1 maximization models is supported:
//! a `Maximize` objective, `<=`/`>=`/`=` rows with integer coefficients and
//! integer right-hand sides, and a `Binary` section.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing section `{0}`")]
    MissingSection(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpConstraint {
    pub name: String,
    pub terms: Vec<(i64, String)>,
    pub sense: Sense,
    pub rhs: i64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<(f64, String)>,
    pub constraints: Vec<LpConstraint>,
    pub binaries: Vec<String>,
}

const TERMS_PER_LINE: usize = 8;

/// Formats `value` with 12 significant digits in fixed notation.
pub fn format_coefficient(value: f64) -> String {
    if value == 0.0 || !value.is_finite() {
        return format!("{:.11}", 0.0);
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

fn write_term(out: &mut String, first: bool, coef: i64, name: &str) {
    let sign = if coef < 0 { '-' } else { '+' };
    let abs = coef.unsigned_abs();
    if first {
        match (coef < 0, abs) {
            (false, 1) => out.push_str(name),
            (true, 1) => {
                let _ = write!(out, "- {name}");
            }
            _ => {
                let _ = write!(out, "{coef} {name}");
            }
        }
    } else if abs == 1 {
        let _ = write!(out, " {sign} {name}");
    } else {
        let _ = write!(out, " {sign} {abs} {name}");
    }
}

impl LpProblem {
    pub fn write(&self) -> String {
        let mut out = String::from("Maximize\n obj:\n");
        for (coef, name) in &self.objective {
            let _ = writeln!(out, "   + {} {name}", format_coefficient(*coef));
        }
        out.push_str("Subject To\n");
        for row in &self.constraints {
            let _ = write!(out, " {}: ", row.name);
            for (k, (coef, name)) in row.terms.iter().enumerate() {
                if k > 0 && k % TERMS_PER_LINE == 0 {
                    out.push_str("\n  ");
                }
                write_term(&mut out, k == 0, *coef, name);
            }
            let _ = writeln!(out, " {} {}", row.sense.symbol(), row.rhs);
        }
        out.push_str("Binary\n");
        for name in &self.binaries {
            let _ = writeln!(out, " {name}");
        }
        out.push_str("End\n");
        out
    }

    pub fn parse(text: &str) -> Result<Self, LpError> {
        #[derive(PartialEq)]
        enum Section {
            Start,
            Objective,
            Constraints,
            Binary,
            End,
        }
        let mut problem = LpProblem::default();
        let mut section = Section::Start;
        let mut pending: Option<(usize, String)> = None;
        let mut seen_objective = false;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('\\') {
                continue;
            }
            match trimmed {
                "Maximize" => {
                    section = Section::Objective;
                    continue;
                }
                "Subject To" => {
                    section = Section::Constraints;
                    continue;
                }
                "Binary" | "Binaries" => {
                    if let Some((l, _)) = pending {
                        return Err(syntax(l, "unterminated constraint"));
                    }
                    section = Section::Binary;
                    continue;
                }
                "End" => {
                    section = Section::End;
                    continue;
                }
                _ => {}
            }
            match section {
                Section::Start => return Err(syntax(line, "expected `Maximize`")),
                Section::End => return Err(syntax(line, "content after `End`")),
                Section::Objective => {
                    if !seen_objective {
                        let rest = trimmed
                            .strip_prefix("obj:")
                            .ok_or_else(|| syntax(line, "objective must be named `obj`"))?;
                        seen_objective = true;
                        if rest.trim().is_empty() {
                            continue;
                        }
                        parse_objective_terms(rest, line, &mut problem.objective)?;
                    } else {
                        parse_objective_terms(trimmed, line, &mut problem.objective)?;
                    }
                }
                Section::Constraints => {
                    let (start, mut buffer) = pending.take().unwrap_or((line, String::new()));
                    buffer.push(' ');
                    buffer.push_str(trimmed);
                    if ["<=", ">=", "="].iter().any(|op| buffer.contains(op)) {
                        problem.constraints.push(parse_constraint(&buffer, start)?);
                    } else {
                        pending = Some((start, buffer));
                    }
                }
                Section::Binary => problem.binaries.extend(trimmed.split_whitespace().map(String::from)),
            }
        }
        if section != Section::End {
            return Err(LpError::MissingSection("End"));
        }
        if !seen_objective {
            return Err(LpError::MissingSection("Maximize"));
        }
        Ok(problem)
    }
}

fn syntax(line: usize, message: impl Into<String>) -> LpError {
    LpError::Syntax { line, message: message.into() }
}

fn parse_objective_terms(text: &str, line: usize, out: &mut Vec<(f64, String)>) -> Result<(), LpError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    let mut k = 0;
    while k < tokens.len() {
        let mut sign = 1.0;
        if tokens[k] == "+" || tokens[k] == "-" {
            if tokens[k] == "-" {
                sign = -1.0;
            }
            k += 1;
        }
        let coef_token = tokens.get(k).ok_or_else(|| syntax(line, "dangling sign"))?;
        match coef_token.parse::<f64>() {
            Ok(c) => {
                let name = tokens.get(k + 1).ok_or_else(|| syntax(line, "coefficient without variable"))?;
                out.push((sign * c, name.to_string()));
                k += 2;
            }
            Err(_) => {
                out.push((sign, coef_token.to_string()));
                k += 1;
            }
        }
    }
    Ok(())
}

fn parse_constraint(text: &str, line: usize) -> Result<LpConstraint, LpError> {
    let (name, body) = text.split_once(':').ok_or_else(|| syntax(line, "constraint without name"))?;
    let (sense, op) = if body.contains("<=") {
        (Sense::Le, "<=")
    } else if body.contains(">=") {
        (Sense::Ge, ">=")
    } else {
        (Sense::Eq, "=")
    };
    let (lhs, rhs) = body.split_once(op).expect("operator present");
    let rhs: i64 = rhs.trim().parse().map_err(|_| syntax(line, format!("bad right-hand side `{}`", rhs.trim())))?;
    let tokens: Vec<&str> = lhs.split_whitespace().collect();
    let mut terms = Vec::new();
    let mut k = 0;
    while k < tokens.len() {
        let mut sign = 1;
        if tokens[k] == "+" || tokens[k] == "-" {
            if tokens[k] == "-" {
                sign = -1;
            }
            k += 1;
        }
        let token = tokens.get(k).ok_or_else(|| syntax(line, "dangling sign"))?;
        match token.parse::<i64>() {
            Ok(c) => {
                let var = tokens.get(k + 1).ok_or_else(|| syntax(line, "coefficient without variable"))?;
                terms.push((sign * c, var.to_string()));
                k += 2;
            }
            Err(_) => {
                terms.push((sign, token.to_string()));
                k += 1;
            }
        }
    }
    Ok(LpConstraint { name: name.trim().to_string(), terms, sense, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_model() {
        let text = LpProblem::default().write();
        assert_eq!(text, "Maximize\n obj:\nSubject To\nBinary\nEnd\n");
        assert_eq!(LpProblem::parse(&text).unwrap(), LpProblem::default());
    }

    #[test]
    fn coefficient_format() {
        assert_eq!(format_coefficient(3.0), "3.00000000000");
        assert_eq!(format_coefficient(0.5), "0.500000000000");
        assert_eq!(format_coefficient(12.5), "12.5000000000");
        assert_eq!(format_coefficient(1.0 / 3.0), "0.333333333333");
    }

    #[test]
    fn round_trip_with_wrapping() {
        let names: Vec<String> = (0..11).map(|k| format!("x{k}")).collect();
        let problem = LpProblem {
            objective: vec![(3.0, "b1".into()), (0.793700525984, "b2".into())],
            constraints: vec![
                LpConstraint {
                    name: "c02_0".into(),
                    terms: vec![(2, "b1".into()), (-1, "a1".into()), (-1, "a2".into())],
                    sense: Sense::Le,
                    rhs: 0,
                },
                LpConstraint {
                    name: "long".into(),
                    terms: names.iter().map(|n| (1, n.clone())).collect(),
                    sense: Sense::Le,
                    rhs: 1,
                },
            ],
            binaries: vec!["a1".into(), "a2".into(), "b1".into(), "b2".into()],
        };
        let text = problem.write();
        assert!(text.contains(" c02_0: 2 b1 - a1 - a2 <= 0\n"));
        let back = LpProblem::parse(&text).unwrap();
        assert_eq!(back, problem);
        assert_eq!(back.write(), text);
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let err = LpProblem::parse("Maximize\n obj:\nSubject To\n c: x <= y\nBinary\nEnd\n").unwrap_err();
        assert!(matches!(err, LpError::Syntax { line: 4, .. }));
        assert_eq!(LpProblem::parse("Maximize\n obj:\n"), Err(LpError::MissingSection("End")));
    }
}
