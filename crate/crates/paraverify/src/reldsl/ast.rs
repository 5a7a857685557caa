use std::collections::BTreeMap;
use std::fmt;

use crate::kernel::C64;
use crate::report::Expectation;

/// Upper end of an index range; ranges always start at 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Bound {
    /// Number of field modes.
    M,
    /// Number of Grassmann sets.
    S,
    Lit(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Index {
    Var(String),
    Lit(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Constant {
    I,
    Pi,
    M,
    S,
    /// `λ`
    Lam,
    /// `Λ`
    BigLam,
    /// `Λ̃`
    LamT,
    /// `c`
    Cst,
    Kappa,
    P,
}

impl Constant {
    pub const ALL: [(Constant, &'static str); 10] = [
        (Constant::I, "i"),
        (Constant::Pi, "pi"),
        (Constant::M, "M"),
        (Constant::S, "S"),
        (Constant::Lam, "lam"),
        (Constant::BigLam, "Lam"),
        (Constant::LamT, "LamT"),
        (Constant::Cst, "cst"),
        (Constant::Kappa, "kappa"),
        (Constant::P, "p"),
    ];

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().find(|(_, n)| *n == s).map(|&(c, _)| c)
    }

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(c, _)| *c == self).map(|&(_, n)| n).unwrap_or("?")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Cexp,
    Cos,
    Sin,
    Sqrt,
    Conj,
}

impl Func {
    pub const ALL: [(Func, &'static str); 5] = [
        (Func::Cexp, "cexp"),
        (Func::Cos, "cos"),
        (Func::Sin, "sin"),
        (Func::Sqrt, "sqrt"),
        (Func::Conj, "conj"),
    ];

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.iter().find(|(_, n)| *n == s).map(|&(f, _)| f)
    }

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(f, _)| *f == self).map(|&(_, n)| n).unwrap_or("?")
    }

    pub fn apply(self, z: C64) -> C64 {
        match self {
            Func::Cexp => z.exp(),
            Func::Cos => z.cos(),
            Func::Sin => z.sin(),
            Func::Sqrt => z.sqrt(),
            Func::Conj => z.conj(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    Gen { name: String, idx: Vec<Index> },
    Delta(Index, Index),
    Comm(Box<Expr>, Box<Expr>),
    Acomm(Box<Expr>, Box<Expr>),
    Dag(Box<Expr>),
    Exp(Box<Expr>),
    Func(Func, Box<Expr>),
    Sum { var: String, bound: Bound, body: Box<Expr> },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Category {
    Operator,
    Vacuum,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Operator => "operator",
            Category::Vacuum => "vacuum",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Relation {
    pub quantifiers: Vec<(String, Bound)>,
    pub lhs: Expr,
    pub rhs: Expr,
    pub category: Category,
    /// Label from a preceding `#:` line, or `file:line`.
    pub source: String,
    pub line: usize,
    pub expect: Expectation,
    pub min_fail: f64,
    /// Tolerance from a `#! tol=` pragma.
    pub tol: Option<f64>,
}

impl Relation {
    pub fn uses_exp(&self) -> bool {
        self.lhs.uses_exp() || self.rhs.uses_exp()
    }
}

impl Expr {
    pub fn uses_exp(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::Exp(_)));
        found
    }

    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Comm(a, b) | Expr::Acomm(a, b) | Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.walk(f);
                b.walk(f);
            }
            Expr::Dag(a) | Expr::Exp(a) | Expr::Func(_, a) | Expr::Neg(a) => a.walk(f),
            Expr::Sum { body, .. } => body.walk(f),
            Expr::Num(_) | Expr::Const(_) | Expr::Gen { .. } | Expr::Delta(..) => {}
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::M => f.write_str("1..M"),
            Bound::S => f.write_str("1..S"),
            Bound::Lit(n) => write!(f, "1..{n}"),
        }
    }
}

/// Pretty-printer; indices found in `env` are replaced by their values.
pub struct Printer<'a> {
    pub env: Option<&'a BTreeMap<String, usize>>,
}

impl Printer<'_> {
    pub fn index(&self, i: &Index) -> String {
        match i {
            Index::Lit(n) => n.to_string(),
            Index::Var(v) => match self.env.and_then(|e| e.get(v)) {
                Some(n) => n.to_string(),
                None => v.clone(),
            },
        }
    }

    pub fn expr(&self, e: &Expr) -> String {
        let mut s = String::new();
        self.write(e, &mut s);
        s
    }

    fn write(&self, e: &Expr, s: &mut String) {
        let paren = |p: &Self, e: &Expr, s: &mut String, wrap: bool| {
            if wrap {
                s.push('(');
                p.write(e, s);
                s.push(')');
            } else {
                p.write(e, s);
            }
        };
        let is_sum = |e: &Expr| matches!(e, Expr::Add(..) | Expr::Sub(..));
        let is_prod = |e: &Expr| matches!(e, Expr::Mul(..) | Expr::Div(..));
        match e {
            Expr::Num(x) => s.push_str(&format!("{x:?}")),
            Expr::Const(c) => s.push_str(c.name()),
            Expr::Gen { name, idx } => {
                s.push_str(name);
                if !idx.is_empty() {
                    let parts: Vec<_> = idx.iter().map(|i| self.index(i)).collect();
                    s.push('(');
                    s.push_str(&parts.join(","));
                    s.push(')');
                }
            }
            Expr::Delta(i, j) => s.push_str(&format!("delta({},{})", self.index(i), self.index(j))),
            Expr::Comm(a, b) | Expr::Acomm(a, b) => {
                s.push_str(if matches!(e, Expr::Comm(..)) { "comm(" } else { "acomm(" });
                self.write(a, s);
                s.push_str(", ");
                self.write(b, s);
                s.push(')');
            }
            Expr::Dag(a) => {
                s.push_str("dag(");
                self.write(a, s);
                s.push(')');
            }
            Expr::Exp(a) => {
                s.push_str("exp(");
                self.write(a, s);
                s.push(')');
            }
            Expr::Func(f, a) => {
                s.push_str(f.name());
                s.push('(');
                self.write(a, s);
                s.push(')');
            }
            Expr::Sum { var, bound, body } => {
                s.push_str(&format!("sum({var} in {bound} : "));
                // The summation variable shadows any outer assignment.
                let inner = self.env.map(|e| {
                    let mut e = e.clone();
                    e.remove(var);
                    e
                });
                let p = Printer { env: inner.as_ref() };
                p.write(body, s);
                s.push(')');
            }
            Expr::Neg(a) => {
                s.push('-');
                paren(self, a, s, is_sum(a) || is_prod(a) || matches!(**a, Expr::Neg(_)));
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                self.write(a, s);
                s.push_str(if matches!(e, Expr::Add(..)) { " + " } else { " - " });
                paren(self, b, s, is_sum(b));
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                paren(self, a, s, is_sum(a));
                s.push_str(if matches!(e, Expr::Mul(..)) { "*" } else { "/" });
                paren(self, b, s, is_sum(b) || is_prod(b));
            }
        }
    }

    pub fn relation(&self, r: &Relation) -> String {
        let mut s = String::new();
        if !r.quantifiers.is_empty() {
            s.push_str("forall ");
            let mut groups: Vec<(Vec<&str>, &Bound)> = Vec::new();
            for (v, b) in &r.quantifiers {
                match groups.last_mut() {
                    Some((vs, gb)) if *gb == b => vs.push(v),
                    _ => groups.push((vec![v], b)),
                }
            }
            let parts: Vec<_> = groups.iter().map(|(vs, b)| format!("{} in {b}", vs.join(","))).collect();
            s.push_str(&parts.join(", "));
            s.push_str(" : ");
        }
        s.push_str(&self.expr(&r.lhs));
        s.push_str(" == ");
        s.push_str(&self.expr(&r.rhs));
        s.push_str(" @");
        s.push_str(r.category.name());
        s
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Printer { env: None }.expr(self))
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Printer { env: None }.relation(self))
    }
}
