//! CPLEX-LP text export and a matching reader.
//!
//! The writer emits a deterministic file for a given model: variables and
//! rows appear in model order, every number is printed to at most twelve
//! significant digits in plain decimal notation, and equal models produce
//! byte-identical text. The reader parses the same dialect back (plus the
//! usual section spellings and bound forms), which lets tests and the CLI
//! confirm that an exported file reproduces the model it came from.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::milp::{MilpModel, Sense};

/// Longest line the writer will produce before wrapping a row.
const MAX_LINE: usize = 200;

/// Formats a number to at most twelve significant digits, shortest form,
/// plain decimal. The rounding makes output stable across platforms; the
/// shortest-form printing keeps short decimals byte-identical to their
/// inputs (`0.5` stays `0.5`, `137760` stays `137760`).
pub fn fmt_num(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().expect("self-formatted float");
    // Normalize the sign of zero so -0.0 prints as 0.
    let canon = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{canon}")
}

fn push_wrapped(out: &mut String, line: &mut String, token: &str) {
    if line.len() + 1 + token.len() > MAX_LINE {
        out.push_str(line);
        out.push('\n');
        line.clear();
        line.push(' ');
    }
    line.push(' ');
    line.push_str(token);
}

fn write_terms(out: &mut String, label: &str, terms: &[(String, f64)], tail: Option<(Sense, f64)>) {
    let mut line = format!(" {label}:");
    for (i, (name, coef)) in terms.iter().enumerate() {
        let sign = if *coef < 0.0 {
            "-"
        } else if i == 0 {
            ""
        } else {
            "+"
        };
        let mag = coef.abs();
        let token = if mag == 1.0 {
            format!("{sign}{space}{name}", space = if sign.is_empty() { "" } else { " " })
        } else {
            format!(
                "{sign}{space}{} {name}",
                fmt_num(mag),
                space = if sign.is_empty() { "" } else { " " }
            )
        };
        // Sign and magnitude stay on one line; wrapping happens between terms.
        push_wrapped(out, &mut line, &token);
    }
    if let Some((sense, rhs)) = tail {
        push_wrapped(out, &mut line, &format!("{sense} {}", fmt_num(rhs)));
    }
    out.push_str(&line);
    out.push('\n');
}

/// Renders the model as CPLEX-LP text. Deterministic: model order in,
/// identical bytes out.
pub fn export_lp(model: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str("\\ car-to-train assignment model\n");
    let _ = writeln!(
        out,
        "\\ net objective = gross objective - {}",
        fmt_num(model.constant_offset)
    );
    out.push_str("Maximize\n");
    let obj_terms: Vec<(String, f64)> = model
        .objective
        .iter()
        .map(|&(v, c)| (model.variables[v].name.clone(), c))
        .collect();
    write_terms(&mut out, "obj", &obj_terms, None);
    out.push_str("Subject To\n");
    for row in &model.constraints {
        let terms: Vec<(String, f64)> = row
            .terms
            .iter()
            .map(|&(v, c)| (model.variables[v].name.clone(), c))
            .collect();
        write_terms(&mut out, &row.label, &terms, Some((row.sense, row.rhs)));
    }
    out.push_str("Bounds\n");
    for var in &model.variables {
        if !var.binary {
            let _ = writeln!(
                out,
                " {} <= {} <= {}",
                fmt_num(var.lower),
                var.name,
                fmt_num(var.upper)
            );
        }
    }
    out.push_str("Binaries\n");
    for var in &model.variables {
        if var.binary {
            let _ = writeln!(out, " {}", var.name);
        }
    }
    out.push_str("End\n");
    out
}

/// A parsed constraint row.
#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub label: Option<String>,
    pub terms: Vec<(String, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A parsed LP file.
#[derive(Debug, Clone, PartialEq)]
pub struct LpFile {
    pub maximize: bool,
    pub objective_label: Option<String>,
    pub objective: Vec<(String, f64)>,
    /// Constant term in the objective, if the file carries one.
    pub objective_constant: f64,
    pub rows: Vec<LpRow>,
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub binaries: BTreeSet<String>,
    pub generals: BTreeSet<String>,
}

impl LpFile {
    /// Every variable name the file mentions anywhere.
    pub fn variable_names(&self) -> BTreeSet<&str> {
        let mut names: BTreeSet<&str> = BTreeSet::new();
        names.extend(self.objective.iter().map(|(n, _)| n.as_str()));
        for row in &self.rows {
            names.extend(row.terms.iter().map(|(n, _)| n.as_str()));
        }
        names.extend(self.bounds.keys().map(String::as_str));
        names.extend(self.binaries.iter().map(String::as_str));
        names.extend(self.generals.iter().map(String::as_str));
        names
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LpParseError {
    #[error("line {line}: unexpected character {found:?}")]
    BadCharacter { line: usize, found: char },
    #[error("line {line}: malformed number {text:?}")]
    BadNumber { line: usize, text: String },
    #[error("line {line}: expected {expected}, found {found}")]
    Unexpected {
        line: usize,
        expected: String,
        found: String,
    },
    #[error("line {line}: content before the first section header")]
    ContentBeforeSections { line: usize },
    #[error("line {line}: content after End")]
    ContentAfterEnd { line: usize },
    #[error("line {line}: malformed bound")]
    BadBound { line: usize },
    #[error("file has no objective section")]
    NoObjective,
    #[error("line {line}: input ended inside a constraint row")]
    TruncatedRow { line: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    Num(f64),
    Plus,
    Minus,
    Colon,
    Cmp(Sense),
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("name {n:?}"),
            Tok::Num(v) => format!("number {v}"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Colon => "':'".into(),
            Tok::Cmp(s) => format!("'{s}'"),
        }
    }
}

fn tokenize(line: &str, line_no: usize, out: &mut Vec<(usize, Tok)>) -> Result<(), LpParseError> {
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == ':' {
            chars.next();
            // Accept the "::" some emitters use after labels.
            if chars.peek() == Some(&':') {
                chars.next();
            }
            out.push((line_no, Tok::Colon));
        } else if c == '+' {
            chars.next();
            out.push((line_no, Tok::Plus));
        } else if c == '-' {
            chars.next();
            out.push((line_no, Tok::Minus));
        } else if c == '<' {
            chars.next();
            if chars.peek() == Some(&'=') {
                chars.next();
            }
            out.push((line_no, Tok::Cmp(Sense::Le)));
        } else if c == '>' {
            chars.next();
            if chars.peek() == Some(&'=') {
                chars.next();
            }
            out.push((line_no, Tok::Cmp(Sense::Ge)));
        } else if c == '=' {
            chars.next();
            match chars.peek() {
                Some('<') => {
                    chars.next();
                    out.push((line_no, Tok::Cmp(Sense::Le)));
                }
                Some('>') => {
                    chars.next();
                    out.push((line_no, Tok::Cmp(Sense::Ge)));
                }
                _ => out.push((line_no, Tok::Cmp(Sense::Eq))),
            }
        } else if c.is_ascii_digit() || c == '.' {
            let mut text = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_digit() || d == '.' {
                    text.push(d);
                    chars.next();
                } else if d == 'e' || d == 'E' {
                    // Only consume as an exponent when one actually follows.
                    let mut ahead = chars.clone();
                    ahead.next();
                    match ahead.peek() {
                        Some(&x) if x.is_ascii_digit() || x == '+' || x == '-' => {
                            text.push(d);
                            chars.next();
                            let &sign_or_digit = chars.peek().expect("peeked above");
                            if sign_or_digit == '+' || sign_or_digit == '-' {
                                text.push(sign_or_digit);
                                chars.next();
                            }
                        }
                        _ => break,
                    }
                } else {
                    break;
                }
            }
            let value: f64 = text
                .parse()
                .map_err(|_| LpParseError::BadNumber {
                    line: line_no,
                    text: text.clone(),
                })?;
            out.push((line_no, Tok::Num(value)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut text = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    text.push(d);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push((line_no, Tok::Name(text)));
        } else {
            return Err(LpParseError::BadCharacter {
                line: line_no,
                found: c,
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Objective { maximize: bool },
    Constraints,
    Bounds,
    Binaries,
    Generals,
    End,
}

fn section_of(line: &str) -> Option<Section> {
    let squashed: String = line
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_ascii_lowercase();
    match squashed.as_str() {
        "maximize" | "maximise" | "max" => Some(Section::Objective { maximize: true }),
        "minimize" | "minimise" | "min" => Some(Section::Objective { maximize: false }),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
        "bounds" | "bound" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "generals" | "general" | "gen" => Some(Section::Generals),
        "end" => Some(Section::End),
        _ => None,
    }
}

/// Token-stream cursor with one-token lookahead.
struct Cursor<'t> {
    toks: &'t [(usize, Tok)],
    at: usize,
}

impl<'t> Cursor<'t> {
    fn peek(&self) -> Option<&'t Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&'t Tok> {
        self.toks.get(self.at + 1).map(|(_, t)| t)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.at.min(self.toks.len().saturating_sub(1)))
            .map(|&(l, _)| l)
            .unwrap_or(0)
    }

    fn next(&mut self) -> Option<&'t Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t);
        self.at += 1;
        t
    }

    /// Signed number: optional sign tokens, then a number.
    fn signed_number(&mut self) -> Result<f64, LpParseError> {
        let mut sign = 1.0;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.next();
                }
                Some(Tok::Minus) => {
                    sign = -sign;
                    self.next();
                }
                Some(Tok::Num(v)) => {
                    let v = *v;
                    self.next();
                    return Ok(sign * v);
                }
                other => {
                    return Err(LpParseError::Unexpected {
                        line: self.line(),
                        expected: "a number".into(),
                        found: other.map_or("end of input".into(), Tok::describe),
                    })
                }
            }
        }
    }
}

/// Linear expression: signed, optionally-scaled names. A bare number (no
/// name following) is returned through `constant` when allowed, otherwise
/// rejected. Stops before any token that cannot continue the expression.
fn parse_expr(
    cur: &mut Cursor<'_>,
    allow_constant: bool,
) -> Result<(Vec<(String, f64)>, f64), LpParseError> {
    let mut terms = Vec::new();
    let mut constant = 0.0;
    loop {
        let mut sign = 1.0;
        let mut saw_sign = false;
        while let Some(t) = cur.peek() {
            match t {
                Tok::Plus => {
                    cur.next();
                    saw_sign = true;
                }
                Tok::Minus => {
                    sign = -sign;
                    cur.next();
                    saw_sign = true;
                }
                _ => break,
            }
        }
        match cur.peek() {
            Some(Tok::Num(v)) => {
                let v = *v;
                cur.next();
                match cur.peek() {
                    Some(Tok::Name(name)) => {
                        let name = name.clone();
                        cur.next();
                        terms.push((name, sign * v));
                    }
                    _ if allow_constant => constant += sign * v,
                    other => {
                        return Err(LpParseError::Unexpected {
                            line: cur.line(),
                            expected: "a variable name after the coefficient".into(),
                            found: other.map_or("end of input".into(), Tok::describe),
                        })
                    }
                }
            }
            Some(Tok::Name(name)) => {
                let name = name.clone();
                cur.next();
                terms.push((name, sign));
            }
            _ if saw_sign => {
                return Err(LpParseError::Unexpected {
                    line: cur.line(),
                    expected: "a term after the sign".into(),
                    found: cur.peek().map_or("end of input".into(), Tok::describe),
                })
            }
            _ => return Ok((terms, constant)),
        }
    }
}

/// Parses CPLEX-LP text.
pub fn parse_lp(text: &str) -> Result<LpFile, LpParseError> {
    let mut section: Option<Section> = None;
    let mut obj_toks: Vec<(usize, Tok)> = Vec::new();
    let mut row_toks: Vec<(usize, Tok)> = Vec::new();
    let mut maximize = true;
    let mut saw_objective = false;
    let mut bounds: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    let mut binaries: BTreeSet<String> = BTreeSet::new();
    let mut generals: BTreeSet<String> = BTreeSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('\\') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        if let Some(s) = section_of(line) {
            if let Section::Objective { maximize: m } = s {
                maximize = m;
                saw_objective = true;
            }
            if section == Some(Section::End) {
                return Err(LpParseError::ContentAfterEnd { line: line_no });
            }
            section = Some(s);
            continue;
        }
        match section {
            None => return Err(LpParseError::ContentBeforeSections { line: line_no }),
            Some(Section::Objective { .. }) => tokenize(line, line_no, &mut obj_toks)?,
            Some(Section::Constraints) => tokenize(line, line_no, &mut row_toks)?,
            Some(Section::Bounds) => {
                let mut toks = Vec::new();
                tokenize(line, line_no, &mut toks)?;
                parse_bound_line(&toks, line_no, &mut bounds)?;
            }
            Some(Section::Binaries) | Some(Section::Generals) => {
                let mut toks = Vec::new();
                tokenize(line, line_no, &mut toks)?;
                let set = if section == Some(Section::Binaries) {
                    &mut binaries
                } else {
                    &mut generals
                };
                for (l, t) in toks {
                    match t {
                        Tok::Name(n) => {
                            set.insert(n);
                        }
                        other => {
                            return Err(LpParseError::Unexpected {
                                line: l,
                                expected: "a variable name".into(),
                                found: other.describe(),
                            })
                        }
                    }
                }
            }
            Some(Section::End) => return Err(LpParseError::ContentAfterEnd { line: line_no }),
        }
    }

    if !saw_objective {
        return Err(LpParseError::NoObjective);
    }

    // Objective: optional label, then one expression (constants allowed).
    let mut cur = Cursor {
        toks: &obj_toks,
        at: 0,
    };
    let mut objective_label = None;
    if let (Some(Tok::Name(n)), Some(Tok::Colon)) = (cur.peek(), cur.peek2()) {
        objective_label = Some(n.clone());
        cur.next();
        cur.next();
    }
    let (objective, objective_constant) = parse_expr(&mut cur, true)?;
    if let Some(t) = cur.peek() {
        return Err(LpParseError::Unexpected {
            line: cur.line(),
            expected: "end of the objective".into(),
            found: t.describe(),
        });
    }

    // Constraint rows: optional label, expression, sense, rhs; repeat.
    let mut rows = Vec::new();
    let mut cur = Cursor {
        toks: &row_toks,
        at: 0,
    };
    while cur.peek().is_some() {
        let mut label = None;
        if let (Some(Tok::Name(n)), Some(Tok::Colon)) = (cur.peek(), cur.peek2()) {
            label = Some(n.clone());
            cur.next();
            cur.next();
        }
        let (terms, _) = parse_expr(&mut cur, false)?;
        let sense = match cur.next() {
            Some(Tok::Cmp(s)) => *s,
            Some(other) => {
                return Err(LpParseError::Unexpected {
                    line: cur.line(),
                    expected: "a comparison".into(),
                    found: other.describe(),
                })
            }
            None => return Err(LpParseError::TruncatedRow { line: cur.line() }),
        };
        let rhs = cur.signed_number()?;
        rows.push(LpRow {
            label,
            terms,
            sense,
            rhs,
        });
    }

    Ok(LpFile {
        maximize,
        objective_label,
        objective,
        objective_constant,
        rows,
        bounds,
        binaries,
        generals,
    })
}

fn parse_bound_line(
    toks: &[(usize, Tok)],
    line_no: usize,
    bounds: &mut BTreeMap<String, (f64, f64)>,
) -> Result<(), LpParseError> {
    let mut cur = Cursor { toks, at: 0 };
    let bad = || LpParseError::BadBound { line: line_no };
    // Either `name ...` or `number <= name ...`.
    match cur.peek() {
        Some(Tok::Name(_)) => {
            let Some(Tok::Name(name)) = cur.next() else {
                unreachable!()
            };
            let name = name.clone();
            match cur.next() {
                Some(Tok::Name(kw)) if kw.eq_ignore_ascii_case("free") => {
                    bounds.insert(name, (f64::NEG_INFINITY, f64::INFINITY));
                }
                Some(Tok::Cmp(sense)) => {
                    let sense = *sense;
                    let v = cur.signed_number().map_err(|_| bad())?;
                    let entry = bounds.entry(name).or_insert((0.0, f64::INFINITY));
                    match sense {
                        Sense::Le => entry.1 = v,
                        Sense::Ge => entry.0 = v,
                        Sense::Eq => *entry = (v, v),
                    }
                }
                _ => return Err(bad()),
            }
        }
        Some(Tok::Num(_)) | Some(Tok::Plus) | Some(Tok::Minus) => {
            let lo = cur.signed_number().map_err(|_| bad())?;
            match cur.next() {
                Some(Tok::Cmp(Sense::Le)) => {
                    let Some(Tok::Name(name)) = cur.next() else {
                        return Err(bad());
                    };
                    let name = name.clone();
                    let entry = bounds.entry(name).or_insert((0.0, f64::INFINITY));
                    entry.0 = lo;
                    if let Some(Tok::Cmp(Sense::Le)) = cur.peek() {
                        cur.next();
                        entry.1 = cur.signed_number().map_err(|_| bad())?;
                    }
                }
                Some(Tok::Cmp(Sense::Ge)) => {
                    // `number >= name`: an upper bound written backwards.
                    let Some(Tok::Name(name)) = cur.next() else {
                        return Err(bad());
                    };
                    let entry = bounds.entry(name.clone()).or_insert((0.0, f64::INFINITY));
                    entry.1 = lo;
                }
                _ => return Err(bad()),
            }
        }
        _ => return Err(bad()),
    }
    if cur.peek().is_some() {
        return Err(bad());
    }
    Ok(())
}

fn merge_terms(terms: &[(String, f64)]) -> BTreeMap<&str, f64> {
    let mut merged: BTreeMap<&str, f64> = BTreeMap::new();
    for (name, coef) in terms {
        *merged.entry(name.as_str()).or_insert(0.0) += coef;
    }
    merged
}

/// Confirms that a parsed file is the given model: same row count and
/// labels in order, identical coefficient multisets per row and in the
/// objective, the same senses and right-hand sides, the same binary set,
/// and the same boxes on the continuous variables. Numbers are compared
/// exactly; the writer's twelve-digit policy is the round-trip contract.
pub fn lp_matches_model(lp: &LpFile, model: &MilpModel) -> Result<(), String> {
    if !lp.maximize {
        return Err("file is a minimization".into());
    }
    let model_names: BTreeSet<&str> = model.variables.iter().map(|v| v.name.as_str()).collect();
    let lp_names = lp.variable_names();
    if lp_names != model_names {
        return Err(format!(
            "variable sets differ: file has {}, model has {}",
            lp_names.len(),
            model_names.len()
        ));
    }
    if lp.rows.len() != model.constraints.len() {
        return Err(format!(
            "row counts differ: file has {}, model has {}",
            lp.rows.len(),
            model.constraints.len()
        ));
    }

    let model_obj: Vec<(String, f64)> = model
        .objective
        .iter()
        .map(|&(v, c)| (model.variables[v].name.clone(), c))
        .collect();
    if merge_terms(&lp.objective) != merge_terms(&model_obj) {
        return Err("objective terms differ".into());
    }

    for (row, expect) in lp.rows.iter().zip(&model.constraints) {
        let label = row.label.as_deref().unwrap_or("<unlabeled>");
        if label != expect.label {
            return Err(format!("row {label} out of place, expected {}", expect.label));
        }
        let expect_terms: Vec<(String, f64)> = expect
            .terms
            .iter()
            .map(|&(v, c)| (model.variables[v].name.clone(), c))
            .collect();
        if merge_terms(&row.terms) != merge_terms(&expect_terms) {
            return Err(format!("row {label}: coefficients differ"));
        }
        if row.sense != expect.sense || row.rhs != expect.rhs {
            return Err(format!("row {label}: sense or rhs differs"));
        }
    }

    for var in &model.variables {
        if var.binary {
            if !lp.binaries.contains(&var.name) {
                return Err(format!("{} missing from Binaries", var.name));
            }
        } else {
            match lp.bounds.get(&var.name) {
                Some(&(lo, hi)) if lo == var.lower && hi == var.upper => {}
                Some(&(lo, hi)) => {
                    return Err(format!(
                        "{}: bounds [{lo}, {hi}] differ from [{}, {}]",
                        var.name, var.lower, var.upper
                    ))
                }
                None => return Err(format!("{} has no bounds entry", var.name)),
            }
        }
    }
    Ok(())
}
