use std::fmt;

use super::ast::{Bound, Category, Constant, Expr, Func, Index, Relation};
use crate::govorkov::generator_arity;
use crate::report::{Expectation, DEFAULT_MIN_FAIL};

/// Quantifiers, both sides and category of a parsed relation.
type RelationParts = (Vec<(String, Bound)>, Expr, Expr, Category);

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub struct ParseError {
    pub file: String,
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: {}", self.file, self.line, self.col, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num { value: f64, int: Option<usize> },
    Sym(&'static str),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num { value, .. } => format!("number {value}"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::End => "end of line".into(),
        }
    }
}

const SYMBOLS: [&str; 11] = ["==", "..", "(", ")", ",", ":", "+", "-", "*", "/", "@"];

/// Splits one logical line into tokens with 1-based columns.
fn lex(text: &str, err: &dyn Fn(usize, String, Vec<String>) -> ParseError) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else if c.is_ascii_digit() {
            let start = i;
            let mut is_int = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                is_int = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_int = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let value: f64 = s.parse().map_err(|_| err(col, format!("malformed number `{s}`"), vec![]))?;
            let int = if is_int { s.parse().ok() } else { None };
            out.push((Tok::Num { value, int }, col));
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(*s)) {
                Some(s) => {
                    out.push((Tok::Sym(s), col));
                    i += s.len();
                }
                None => return Err(err(col, format!("unexpected character `{c}`"), vec![])),
            }
        }
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    scope: Vec<String>,
    file: &'a str,
    line: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        ParseError {
            file: self.file.to_string(),
            line: self.line,
            col: self.col(),
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        self.error(format!("unexpected {}", self.peek().describe()), expected)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == s)
    }

    fn expect_sym(&mut self, s: &'static str) -> Result<(), ParseError> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[s]))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(&["identifier"])),
        }
    }

    fn relation(&mut self) -> Result<RelationParts, ParseError> {
        let mut quantifiers = Vec::new();
        if self.is_ident("forall") {
            self.bump();
            loop {
                let mut names = vec![self.ident()?];
                while self.is_sym(",") {
                    self.bump();
                    names.push(self.ident()?);
                }
                if !self.is_ident("in") {
                    return Err(self.unexpected(&[",", "in"]));
                }
                self.bump();
                let bound = self.range()?;
                for n in names {
                    if quantifiers.iter().any(|(q, _)| *q == n) {
                        return Err(self.error(format!("index `{n}` bound twice"), &[]));
                    }
                    quantifiers.push((n, bound.clone()));
                }
                if self.is_sym(",") {
                    self.bump();
                } else if self.is_sym(":") {
                    self.bump();
                    break;
                } else {
                    return Err(self.unexpected(&[",", ":"]));
                }
            }
        }
        self.scope = quantifiers.iter().map(|(n, _)| n.clone()).collect();
        let lhs = self.expr()?;
        if !self.is_sym("==") {
            return Err(self.unexpected(&["==", "+", "-", "*", "/"]));
        }
        self.bump();
        let rhs = self.expr()?;
        if !self.is_sym("@") {
            return Err(self.unexpected(&["@", "+", "-", "*", "/"]));
        }
        self.bump();
        let category = match self.peek() {
            Tok::Ident(s) if s == "operator" => Category::Operator,
            Tok::Ident(s) if s == "vacuum" => Category::Vacuum,
            _ => return Err(self.unexpected(&["operator", "vacuum"])),
        };
        self.bump();
        if *self.peek() != Tok::End {
            return Err(self.unexpected(&["end of line"]));
        }
        Ok((quantifiers, lhs, rhs, category))
    }

    fn range(&mut self) -> Result<Bound, ParseError> {
        match self.peek() {
            Tok::Num { int: Some(1), .. } => {
                self.bump();
            }
            Tok::Num { .. } => return Err(self.error("index ranges start at 1", &["1"])),
            _ => return Err(self.unexpected(&["1"])),
        }
        self.expect_sym("..")?;
        let b = match self.peek().clone() {
            Tok::Ident(s) if s == "M" => Bound::M,
            Tok::Ident(s) if s == "S" => Bound::S,
            Tok::Num { int: Some(n), .. } => Bound::Lit(n),
            _ => return Err(self.unexpected(&["M", "S", "integer"])),
        };
        self.bump();
        Ok(b)
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.term()?;
        loop {
            if self.is_sym("+") {
                self.bump();
                e = Expr::Add(Box::new(e), Box::new(self.term()?));
            } else if self.is_sym("-") {
                self.bump();
                e = Expr::Sub(Box::new(e), Box::new(self.term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.unary()?;
        loop {
            if self.is_sym("*") {
                self.bump();
                e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
            } else if self.is_sym("/") {
                self.bump();
                e = Expr::Div(Box::new(e), Box::new(self.unary()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.is_sym("-") {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn index(&mut self) -> Result<Index, ParseError> {
        match self.peek().clone() {
            Tok::Num { int: Some(n), .. } if n >= 1 => {
                self.bump();
                Ok(Index::Lit(n))
            }
            Tok::Ident(v) => {
                if !self.scope.contains(&v) {
                    return Err(self.error(format!("unbound index {v}"), &[]));
                }
                self.bump();
                Ok(Index::Var(v))
            }
            _ => Err(self.unexpected(&["index variable", "positive integer"])),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        const START: &[&str] = &["number", "name", "(", "-"];
        let name = match self.peek().clone() {
            Tok::Num { value, .. } => {
                self.bump();
                return Ok(Expr::Num(value));
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                return Ok(e);
            }
            Tok::Ident(s) => s,
            _ => return Err(self.unexpected(START)),
        };
        let start = self.pos;
        self.bump();
        match name.as_str() {
            "comm" | "acomm" => {
                self.expect_sym("(")?;
                let a = Box::new(self.expr()?);
                self.expect_sym(",")?;
                let b = Box::new(self.expr()?);
                self.expect_sym(")")?;
                Ok(if name == "comm" { Expr::Comm(a, b) } else { Expr::Acomm(a, b) })
            }
            "dag" | "exp" => {
                self.expect_sym("(")?;
                let a = Box::new(self.expr()?);
                self.expect_sym(")")?;
                Ok(if name == "dag" { Expr::Dag(a) } else { Expr::Exp(a) })
            }
            "delta" => {
                self.expect_sym("(")?;
                let i = self.index()?;
                self.expect_sym(",")?;
                let j = self.index()?;
                self.expect_sym(")")?;
                Ok(Expr::Delta(i, j))
            }
            "sum" => {
                self.expect_sym("(")?;
                let var = self.ident()?;
                let bound = if self.is_ident("in") {
                    self.bump();
                    self.range()?
                } else {
                    Bound::M
                };
                self.expect_sym(":")?;
                self.scope.push(var.clone());
                let body = self.expr();
                self.scope.pop();
                let body = Box::new(body?);
                self.expect_sym(")")?;
                Ok(Expr::Sum { var, bound, body })
            }
            _ => {
                if let Some(f) = Func::from_name(&name) {
                    self.expect_sym("(")?;
                    let a = Box::new(self.expr()?);
                    self.expect_sym(")")?;
                    return Ok(Expr::Func(f, a));
                }
                if let Some(c) = Constant::from_name(&name) {
                    return Ok(Expr::Const(c));
                }
                let Some(arity) = generator_arity(&name) else {
                    self.pos = start;
                    return Err(self.error(format!("unknown name `{name}`"), &[]));
                };
                let mut idx = Vec::new();
                if arity > 0 {
                    self.expect_sym("(")?;
                    for n in 0..arity {
                        if n > 0 {
                            self.expect_sym(",")?;
                        }
                        idx.push(self.index()?);
                    }
                    if self.is_sym(",") {
                        return Err(self.error(format!("`{name}` takes {arity} indices"), &[")"]));
                    }
                    self.expect_sym(")")?;
                }
                Ok(Expr::Gen { name, idx })
            }
        }
    }
}

/// Parses one relation line with no file context.
pub fn parse_relation(text: &str) -> Result<Relation, ParseError> {
    let mut rels = parse_file("<input>", text)?;
    match rels.len() {
        1 => Ok(rels.remove(0)),
        n => Err(ParseError {
            file: "<input>".into(),
            line: 1,
            col: 1,
            message: format!("expected exactly one relation, found {n}"),
            expected: vec![],
        }),
    }
}

/// Parses a relation file.
///
/// Besides relations and `#` comments, a file may contain `#: label` lines
/// naming the next relation and `#! key=value` pragmas (`tol`, `expect`,
/// `min`) that hold until changed. A trailing `\` continues a line.
pub fn parse_file(file: &str, text: &str) -> Result<Vec<Relation>, ParseError> {
    let mut out = Vec::new();
    let mut label: Option<String> = None;
    let mut tol: Option<f64> = None;
    let mut expect = Expectation::Pass;
    let mut min_fail = DEFAULT_MIN_FAIL;
    let lines: Vec<&str> = text.lines().collect();
    let mut n = 0;
    while n < lines.len() {
        let line_no = n + 1;
        let mut logical = lines[n].trim_end().to_string();
        n += 1;
        while logical.ends_with('\\') && n < lines.len() {
            logical.pop();
            logical.push(' ');
            logical.push_str(lines[n].trim_end());
            n += 1;
        }
        let err = |col: usize, message: String, expected: Vec<String>| ParseError {
            file: file.to_string(),
            line: line_no,
            col,
            message,
            expected,
        };
        let trimmed = logical.trim_start();
        let indent = logical.len() - trimmed.len();
        if let Some(rest) = trimmed.strip_prefix("#:") {
            label = Some(rest.trim().to_string());
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("#!") {
            for kv in rest.split_whitespace() {
                let col = indent + 1 + logical[indent..].find(kv).unwrap_or(0);
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| err(col, format!("malformed pragma `{kv}`"), vec!["key=value".into()]))?;
                match k {
                    "tol" if v == "default" => tol = None,
                    "tol" => {
                        tol = Some(
                            v.parse()
                                .ok()
                                .filter(|t: &f64| *t > 0.0)
                                .ok_or_else(|| err(col, format!("tolerance must be a positive number, got `{v}`"), vec![]))?,
                        )
                    }
                    "min" => {
                        min_fail = v
                            .parse()
                            .map_err(|_| err(col, format!("`min` must be a number, got `{v}`"), vec![]))?
                    }
                    "expect" => {
                        expect = match v {
                            "pass" => Expectation::Pass,
                            "fail" => Expectation::Fail,
                            "report" => Expectation::Report,
                            _ => {
                                return Err(err(
                                    col,
                                    format!("unknown expectation `{v}`"),
                                    vec!["pass".into(), "fail".into(), "report".into()],
                                ))
                            }
                        }
                    }
                    _ => {
                        return Err(err(
                            col,
                            format!("unknown pragma `{k}`"),
                            vec!["tol".into(), "expect".into(), "min".into()],
                        ))
                    }
                }
            }
            continue;
        }
        let body = match logical.find('#') {
            Some(p) => &logical[..p],
            None => &logical[..],
        };
        if body.trim().is_empty() {
            continue;
        }
        let toks = lex(body, &err)?;
        let mut p = Parser {
            toks,
            pos: 0,
            scope: Vec::new(),
            file,
            line: line_no,
        };
        let (quantifiers, lhs, rhs, category) = p.relation()?;
        out.push(Relation {
            quantifiers,
            lhs,
            rhs,
            category,
            source: label.take().unwrap_or_else(|| format!("{file}:{line_no}")),
            line: line_no,
            expect,
            min_fail,
            tol,
        });
    }
    Ok(out)
}
