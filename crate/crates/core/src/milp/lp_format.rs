//! CPLEX-style LP text format.
//!
//! Grammar accepted by [`parse_lp`] (keywords are case-insensitive,
//! `\` starts a comment that runs to the end of the line):
//!
//! ```text
//! file       := objsense objective [ "Subject To" row* ] [ "Bounds" bound* ]
//!               [ "Binaries" name* ] "End"
//! objsense   := "Maximize" | "Minimize"
//! objective  := [ name ":" ] term*
//! row        := [ name ":" ] term+ ( "<=" | ">=" | "=" ) number
//! term       := [ "+" | "-" ] [ number ] name
//! bound      := number "<=" name "<=" number | name ( ">=" | "<=" | "=" ) number
//!             | name "free"                         (one bound per line)
//! ```
//!
//! Variables without a bound line default to `[0, +inf)`. Variable order is
//! the order of the Bounds section followed by first appearance elsewhere,
//! which makes `export -> parse -> export` byte-identical for exported
//! models.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::model::{Constraint, MilpModel, ObjSense, Sense, VarKind, Variable};
use crate::error::{Error, Result};

const TERMS_PER_LINE: usize = 8;

fn write_terms(out: &mut String, model: &MilpModel, terms: &[(usize, f64)]) {
    for (idx, &(v, a)) in terms.iter().enumerate() {
        if idx > 0 && idx % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if a.is_sign_negative() { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", a.abs(), model.variables[v].name);
    }
}

fn fmt_bound(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

/// Writes `model` in LP text format.
pub fn export_lp(model: &MilpModel) -> String {
    let mut out = String::from("\\ reduced facility location and pricing model\n");
    out.push_str(match model.sense {
        ObjSense::Maximize => "Maximize\n",
        ObjSense::Minimize => "Minimize\n",
    });
    out.push_str(" obj:");
    write_terms(&mut out, model, &model.objective);
    out.push('\n');

    out.push_str("Subject To\n");
    for row in &model.constraints {
        let _ = write!(out, " {}:", row.name);
        write_terms(&mut out, model, &row.terms);
        let _ = writeln!(out, " {} {}", row.sense, row.rhs);
    }

    out.push_str("Bounds\n");
    for v in &model.variables {
        let line = match (v.lower, v.upper) {
            (l, u) if l == f64::NEG_INFINITY && u == f64::INFINITY => format!(" {} free", v.name),
            (l, u) if u == f64::INFINITY => format!(" {} >= {}", v.name, fmt_bound(l)),
            (l, u) if l == u => format!(" {} = {}", v.name, l),
            (l, u) => format!(" {} <= {} <= {}", fmt_bound(l), v.name, fmt_bound(u)),
        };
        out.push_str(&line);
        out.push('\n');
    }

    let binaries: Vec<&str> = model
        .variables
        .iter()
        .filter(|v| v.kind == VarKind::Binary)
        .map(|v| v.name.as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(TERMS_PER_LINE) {
            out.push(' ');
            out.push_str(&chunk.join(" "));
            out.push('\n');
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Name(String),
    Plus,
    Minus,
    Colon,
    Op(Sense),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    Objective,
    Rows,
    Bounds,
    Binaries,
    End,
}

fn section_keyword(line: &str) -> Option<Section> {
    let l = line.trim().to_ascii_lowercase();
    let l = l.split_whitespace().collect::<Vec<_>>().join(" ");
    match l.as_str() {
        "maximize" | "maximise" | "maximum" | "max" | "minimize" | "minimise" | "minimum" | "min" => {
            Some(Section::Objective)
        }
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Rows),
        "bounds" | "bound" => Some(Section::Bounds),
        "binaries" | "binary" | "bin" => Some(Section::Binaries),
        "end" => Some(Section::End),
        _ => None,
    }
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || "_.[]{}()!\"#$%&/,;?@'`|~".contains(c)
}

fn tokenize(line: &str, lineno: usize) -> Result<Vec<Tok>> {
    let err = |message: String| Error::LpParse { line: lineno, message };
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            ':' => {
                out.push(Tok::Colon);
                i += 1;
            }
            '<' | '>' | '=' => {
                let mut op = String::from(c);
                i += 1;
                if i < chars.len() && matches!(chars[i], '<' | '>' | '=') {
                    op.push(chars[i]);
                    i += 1;
                }
                let sense = match op.as_str() {
                    "<" | "<=" | "=<" => Sense::Le,
                    ">" | ">=" | "=>" => Sense::Ge,
                    "=" | "==" => Sense::Eq,
                    _ => return Err(err(format!("unknown operator `{op}`"))),
                };
                out.push(Tok::Op(sense));
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && matches!(chars[i], 'e' | 'E') {
                    let mut k = i + 1;
                    if k < chars.len() && matches!(chars[k], '+' | '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        i = k;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v = text
                    .parse::<f64>()
                    .map_err(|_| err(format!("bad number `{text}`")))?;
                out.push(Tok::Num(v));
            }
            c if is_name_char(c) => {
                let start = i;
                while i < chars.len() && is_name_char(chars[i]) {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                match text.to_ascii_lowercase().as_str() {
                    "inf" | "infinity" => out.push(Tok::Num(f64::INFINITY)),
                    _ => out.push(Tok::Name(text)),
                }
            }
            other => return Err(err(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Builder {
    index: HashMap<String, usize>,
    vars: Vec<(String, Option<(f64, f64)>, bool)>,
}

impl Builder {
    fn var(&mut self, name: &str) -> usize {
        if let Some(&v) = self.index.get(name) {
            return v;
        }
        self.vars.push((name.to_string(), None, false));
        self.index.insert(name.to_string(), self.vars.len() - 1);
        self.vars.len() - 1
    }
}

/// Parses `[name :] terms [op rhs]` from a statement's tokens.
fn parse_linear(
    toks: &[(Tok, usize)],
    b: &mut Builder,
    want_rhs: bool,
) -> Result<(Option<String>, Vec<(usize, f64)>, Option<(Sense, f64)>)> {
    let line = toks.first().map_or(0, |t| t.1);
    let err = |line: usize, message: &str| Error::LpParse { line, message: message.into() };
    let mut pos = 0;
    let mut name = None;
    if let (Some((Tok::Name(n), _)), Some((Tok::Colon, _))) = (toks.first(), toks.get(1)) {
        name = Some(n.clone());
        pos = 2;
    }
    let mut terms = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    let mut rel = None;
    while pos < toks.len() {
        let (tok, l) = &toks[pos];
        match tok {
            Tok::Plus => {}
            Tok::Minus => sign = -sign,
            Tok::Num(v) => {
                if coef.is_some() {
                    return Err(err(*l, "two numbers in a row"));
                }
                coef = Some(*v);
            }
            Tok::Name(n) => {
                let v = b.var(n);
                terms.push((v, sign * coef.unwrap_or(1.0)));
                sign = 1.0;
                coef = None;
            }
            Tok::Op(s) => {
                if coef.is_some() {
                    return Err(err(*l, "constant terms on the left-hand side are not supported"));
                }
                let mut rsign = 1.0;
                let mut k = pos + 1;
                while let Some((t, _)) = toks.get(k) {
                    match t {
                        Tok::Plus => {}
                        Tok::Minus => rsign = -rsign,
                        _ => break,
                    }
                    k += 1;
                }
                let Some((Tok::Num(v), _)) = toks.get(k) else {
                    return Err(err(*l, "expected a number after the relational operator"));
                };
                if k + 1 != toks.len() {
                    return Err(err(toks[k + 1].1, "unexpected tokens after the right-hand side"));
                }
                rel = Some((*s, rsign * v));
                break;
            }
            Tok::Colon => return Err(err(*l, "unexpected `:`")),
        }
        pos += 1;
    }
    if rel.is_none() && coef.is_some() {
        return Err(err(line, "dangling number"));
    }
    if want_rhs && rel.is_none() {
        return Err(err(line, "constraint has no relational operator"));
    }
    if !want_rhs && rel.is_some() {
        return Err(err(line, "objective cannot contain a relational operator"));
    }
    Ok((name, terms, rel))
}

/// Reads a model written in LP text format.
pub fn parse_lp(text: &str) -> Result<MilpModel> {
    let mut sense = None;
    let mut section: Option<Section> = None;
    let mut objective_toks: Vec<(Tok, usize)> = Vec::new();
    let mut rows: Vec<Vec<(Tok, usize)>> = Vec::new();
    let mut current: Vec<(Tok, usize)> = Vec::new();
    let mut bounds: Vec<(Vec<Tok>, usize)> = Vec::new();
    let mut binaries: Vec<(String, usize)> = Vec::new();
    let mut saw_end = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if let Some(s) = section_keyword(line) {
            if s == Section::Objective {
                if sense.is_some() {
                    return Err(Error::LpParse { line: lineno, message: "second objective section".into() });
                }
                let l = line.trim().to_ascii_lowercase();
                sense = Some(if l.starts_with("max") { ObjSense::Maximize } else { ObjSense::Minimize });
            } else if sense.is_none() {
                return Err(Error::LpParse { line: lineno, message: "file must start with Maximize or Minimize".into() });
            }
            if !current.is_empty() {
                return Err(Error::LpParse { line: current[0].1, message: "incomplete constraint before section".into() });
            }
            section = Some(s);
            if s == Section::End {
                saw_end = true;
                break;
            }
            continue;
        }
        let toks = tokenize(line, lineno)?;
        match section {
            None => {
                return Err(Error::LpParse { line: lineno, message: "file must start with Maximize or Minimize".into() })
            }
            Some(Section::Objective) => objective_toks.extend(toks.into_iter().map(|t| (t, lineno))),
            Some(Section::Rows) => {
                // a row ends with the number following its relational operator
                for t in toks {
                    current.push((t, lineno));
                    let n = current.len();
                    if n >= 2 && matches!(current[n - 1].0, Tok::Num(_)) {
                        let op_at = current.iter().rposition(|(t, _)| matches!(t, Tok::Op(_)));
                        if let Some(op) = op_at {
                            if current[op + 1..n - 1].iter().all(|(t, _)| matches!(t, Tok::Plus | Tok::Minus)) {
                                rows.push(std::mem::take(&mut current));
                            }
                        }
                    }
                }
            }
            Some(Section::Bounds) => bounds.push((toks, lineno)),
            Some(Section::Binaries) => {
                for t in toks {
                    match t {
                        Tok::Name(n) => binaries.push((n, lineno)),
                        _ => return Err(Error::LpParse { line: lineno, message: "expected variable names".into() }),
                    }
                }
            }
            Some(Section::End) => unreachable!(),
        }
    }
    if !current.is_empty() {
        return Err(Error::LpParse { line: current[0].1, message: "incomplete constraint".into() });
    }
    if !saw_end {
        return Err(Error::LpParse { line: text.lines().count(), message: "missing End".into() });
    }
    let Some(sense) = sense else {
        return Err(Error::LpParse { line: 1, message: "missing objective section".into() });
    };

    let mut b = Builder { index: HashMap::new(), vars: Vec::new() };
    // bounds first so that their order fixes the variable order
    for (toks, lineno) in &bounds {
        let err = |m: &str| Error::LpParse { line: *lineno, message: m.into() };
        let mut t = toks.clone();
        // fold unary signs into numbers
        let mut folded = Vec::new();
        let mut neg = false;
        for tok in t.drain(..) {
            match tok {
                Tok::Minus => neg = !neg,
                Tok::Plus => {}
                Tok::Num(v) => {
                    folded.push(Tok::Num(if neg { -v } else { v }));
                    neg = false;
                }
                other => folded.push(other),
            }
        }
        let (name, lo, hi) = match folded.as_slice() {
            [Tok::Num(l), Tok::Op(Sense::Le), Tok::Name(n), Tok::Op(Sense::Le), Tok::Num(u)] => (n, Some(*l), Some(*u)),
            [Tok::Name(n), Tok::Op(Sense::Ge), Tok::Num(l)] => (n, Some(*l), None),
            [Tok::Num(l), Tok::Op(Sense::Le), Tok::Name(n)] => (n, Some(*l), None),
            [Tok::Name(n), Tok::Op(Sense::Le), Tok::Num(u)] => (n, None, Some(*u)),
            [Tok::Name(n), Tok::Op(Sense::Eq), Tok::Num(v)] => (n, Some(*v), Some(*v)),
            [Tok::Name(n), Tok::Name(f)] if f.eq_ignore_ascii_case("free") => (n, Some(f64::NEG_INFINITY), Some(f64::INFINITY)),
            _ => return Err(err("unrecognised bound")),
        };
        let v = b.var(name);
        let cur = b.vars[v].1.unwrap_or((0.0, f64::INFINITY));
        b.vars[v].1 = Some((lo.unwrap_or(cur.0), hi.unwrap_or(cur.1)));
    }

    let (_, objective, _) = parse_linear(&objective_toks, &mut b, false)?;
    let mut constraints = Vec::with_capacity(rows.len());
    for (r, toks) in rows.iter().enumerate() {
        let (name, terms, rel) = parse_linear(toks, &mut b, true)?;
        let (s, rhs) = rel.expect("checked by parse_linear");
        if terms.is_empty() {
            return Err(Error::LpParse { line: toks[0].1, message: "constraint without variables".into() });
        }
        constraints.push(Constraint::new(name.unwrap_or_else(|| format!("c{r}")), terms, s, rhs));
    }
    for (n, lineno) in &binaries {
        let Some(&v) = b.index.get(n.as_str()) else {
            return Err(Error::LpParse { line: *lineno, message: format!("binary `{n}` is not used by the model") });
        };
        b.vars[v].2 = true;
    }
    if b.vars.is_empty() {
        return Err(Error::LpParse { line: 1, message: "model has no variables".into() });
    }

    let variables = b
        .vars
        .into_iter()
        .map(|(name, bounds, binary)| {
            let kind = if binary { VarKind::Binary } else { VarKind::Continuous };
            let (lo, hi) = match (bounds, binary) {
                (Some(bd), _) => bd,
                (None, true) => (0.0, 1.0),
                (None, false) => (0.0, f64::INFINITY),
            };
            Variable::new(name, kind, lo, hi)
        })
        .collect();
    Ok(MilpModel { variables, constraints, objective, sense })
}
