use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::ast::{Bound, Category, Constant, Expr, Index, Printer, Relation};
use crate::error::{Error, Result};
use crate::govorkov::Realization;
use crate::kernel::{ComplexMatrix, C64, I, ZERO};
use crate::report::{ReportEntry, VerificationReport};

/// Tolerance for relations without `exp`.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Tolerance for relations containing `exp`.
pub const DEFAULT_EXP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub polynomial: f64,
    pub exponential: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            polynomial: DEFAULT_TOL,
            exponential: DEFAULT_EXP_TOL,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Value<'a> {
    Scalar(C64),
    Matrix(Cow<'a, ComplexMatrix>),
}

impl Value<'_> {
    fn owned(m: ComplexMatrix) -> Self {
        Value::Matrix(Cow::Owned(m))
    }
}

/// Evaluates relations against one realization, caching matrix exponentials
/// by the canonical text of their argument.
pub struct Evaluator<'r> {
    r: &'r Realization,
    cache: Mutex<HashMap<String, Arc<ComplexMatrix>>>,
}

impl<'r> Evaluator<'r> {
    pub fn new(r: &'r Realization) -> Self {
        Evaluator {
            r,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn realization(&self) -> &'r Realization {
        self.r
    }

    pub fn cached_exponentials(&self) -> usize {
        self.cache.lock().map(|c| c.len()).unwrap_or(0)
    }

    fn bound(&self, b: &Bound) -> usize {
        match b {
            Bound::M => self.r.m(),
            Bound::S => self.r.sets(),
            Bound::Lit(n) => *n,
        }
    }

    fn constant(&self, c: Constant) -> C64 {
        let k = self.r.constants();
        match c {
            Constant::I => I,
            Constant::Pi => C64::new(std::f64::consts::PI, 0.0),
            Constant::M => C64::new(self.r.m() as f64, 0.0),
            Constant::S => C64::new(self.r.sets() as f64, 0.0),
            Constant::Lam => k.lambda,
            Constant::BigLam => k.big_lambda,
            Constant::LamT => k.lambda_tilde,
            Constant::Cst => k.c,
            Constant::Kappa => C64::new(f64::from(self.r.kappa()), 0.0),
            Constant::P => k.p,
        }
    }

    fn index(i: &Index, env: &BTreeMap<String, usize>) -> Result<usize> {
        match i {
            Index::Lit(n) => Ok(*n),
            Index::Var(v) => env.get(v).copied().ok_or_else(|| Error::Eval(format!("unbound index {v}"))),
        }
    }

    fn promote(&self, z: C64) -> ComplexMatrix {
        ComplexMatrix::scalar(self.r.dim(), z)
    }

    /// Evaluates `e` under the index assignment `env`.
    pub fn eval(&self, e: &Expr, env: &BTreeMap<String, usize>) -> Result<Value<'r>> {
        use Value::{Matrix, Scalar};
        Ok(match e {
            Expr::Num(x) => Scalar(C64::new(*x, 0.0)),
            Expr::Const(c) => Scalar(self.constant(*c)),
            Expr::Gen { name, idx } => {
                let idx = idx.iter().map(|i| Self::index(i, env)).collect::<Result<Vec<_>>>()?;
                Matrix(Cow::Borrowed(self.r.generator(name, &idx)?))
            }
            Expr::Delta(i, j) => {
                let same = Self::index(i, env)? == Self::index(j, env)?;
                Scalar(if same { C64::new(1.0, 0.0) } else { ZERO })
            }
            Expr::Comm(a, b) | Expr::Acomm(a, b) => {
                let anti = matches!(e, Expr::Acomm(..));
                match (self.eval(a, env)?, self.eval(b, env)?) {
                    (Scalar(x), Scalar(y)) => Scalar(if anti { x * y * 2.0 } else { ZERO }),
                    (Scalar(z), Matrix(m)) | (Matrix(m), Scalar(z)) => {
                        if anti {
                            Value::owned(m.scale(z * 2.0))
                        } else {
                            Scalar(ZERO)
                        }
                    }
                    (Matrix(x), Matrix(y)) => {
                        let xy = x.try_mul(&y)?;
                        let yx = y.try_mul(&x)?;
                        Value::owned(if anti { xy + yx } else { xy - yx })
                    }
                }
            }
            Expr::Dag(a) => match self.eval(a, env)? {
                Scalar(z) => Scalar(z.conj()),
                Matrix(m) => Value::owned(m.dagger()),
            },
            Expr::Exp(a) => match self.eval(a, env)? {
                Scalar(z) => Scalar(z.exp()),
                Matrix(m) => {
                    let key = Printer { env: Some(env) }.expr(a);
                    let hit = self.cache.lock().ok().and_then(|c| c.get(&key).cloned());
                    let value = match hit {
                        Some(v) => v,
                        None => {
                            let v = Arc::new(m.expm()?);
                            if let Ok(mut c) = self.cache.lock() {
                                c.entry(key).or_insert_with(|| v.clone());
                            }
                            v
                        }
                    };
                    Value::owned((*value).clone())
                }
            },
            Expr::Func(f, a) => match self.eval(a, env)? {
                Scalar(z) => Scalar(f.apply(z)),
                Matrix(_) => return Err(Error::Eval(format!("`{}` applies to scalars only", f.name()))),
            },
            Expr::Sum { var, bound, body } => {
                let mut inner = env.clone();
                let mut acc = Scalar(ZERO);
                for v in 1..=self.bound(bound) {
                    inner.insert(var.clone(), v);
                    acc = self.add(acc, self.eval(body, &inner)?, 1.0)?;
                }
                acc
            }
            Expr::Neg(a) => match self.eval(a, env)? {
                Scalar(z) => Scalar(-z),
                Matrix(m) => Value::owned(-&*m),
            },
            Expr::Add(a, b) => self.add(self.eval(a, env)?, self.eval(b, env)?, 1.0)?,
            Expr::Sub(a, b) => self.add(self.eval(a, env)?, self.eval(b, env)?, -1.0)?,
            Expr::Mul(a, b) => match (self.eval(a, env)?, self.eval(b, env)?) {
                (Scalar(x), Scalar(y)) => Scalar(x * y),
                (Scalar(z), Matrix(m)) | (Matrix(m), Scalar(z)) => Value::owned(m.scale(z)),
                (Matrix(x), Matrix(y)) => Value::owned(x.try_mul(&y)?),
            },
            Expr::Div(a, b) => match (self.eval(a, env)?, self.eval(b, env)?) {
                (_, Matrix(_)) => return Err(Error::Eval("division by an operator".into())),
                (_, Scalar(z)) if z == ZERO => return Err(Error::Eval("division by zero".into())),
                (Scalar(x), Scalar(y)) => Scalar(x / y),
                (Matrix(m), Scalar(z)) => Value::owned(m.scale(z.inv())),
            },
        })
    }

    /// `x + sign·y`, promoting scalars to multiples of the identity.
    fn add(&self, x: Value<'r>, y: Value<'r>, sign: f64) -> Result<Value<'r>> {
        use Value::{Matrix, Scalar};
        Ok(match (x, y) {
            (Scalar(a), Scalar(b)) => Scalar(a + b * sign),
            (Matrix(m), Scalar(z)) => {
                let mut m = m.into_owned();
                m.axpy(C64::new(sign, 0.0), &self.promote(z));
                Value::owned(m)
            }
            (Scalar(z), Matrix(m)) => {
                let mut out = self.promote(z);
                out.axpy(C64::new(sign, 0.0), &m);
                Value::owned(out)
            }
            (Matrix(a), Matrix(b)) => {
                if a.dim() != b.dim() {
                    return Err(Error::DimensionMismatch(a.dim(), b.dim()));
                }
                let mut out = a.into_owned();
                out.axpy(C64::new(sign, 0.0), &b);
                Value::owned(out)
            }
        })
    }

    /// Deviation of one relation at one assignment.
    pub fn deviation(&self, rel: &Relation, env: &BTreeMap<String, usize>) -> Result<f64> {
        let diff = self.add(self.eval(&rel.lhs, env)?, self.eval(&rel.rhs, env)?, -1.0)?;
        Ok(match (diff, rel.category) {
            (Value::Scalar(z), _) => z.norm(),
            (Value::Matrix(m), Category::Operator) => m.max_abs(),
            (Value::Matrix(m), Category::Vacuum) => self.r.vacuum_block_max(&m),
        })
    }

    /// Every assignment of the relation's quantified indices, in
    /// lexicographic order.
    pub fn assignments(&self, rel: &Relation) -> Vec<BTreeMap<String, usize>> {
        let mut out = vec![BTreeMap::new()];
        for (var, bound) in &rel.quantifiers {
            let n = self.bound(bound);
            out = out
                .into_iter()
                .flat_map(|env| {
                    (1..=n).map(move |v| {
                        let mut e = env.clone();
                        e.insert(var.clone(), v);
                        e
                    })
                })
                .collect();
        }
        out
    }

    pub fn tolerance(&self, rel: &Relation, tols: Tolerances) -> f64 {
        rel.tol.unwrap_or(if rel.uses_exp() { tols.exponential } else { tols.polynomial })
    }

    /// Checks one relation over all assignments.
    pub fn check(&self, rel: &Relation, tols: Tolerances) -> Result<ReportEntry> {
        let tol = self.tolerance(rel, tols);
        let category = rel.category.name();
        if let Some(skip) = self.skip_reason(rel) {
            return Ok(ReportEntry::skipped(&rel.source, category, tol, skip));
        }
        let mut worst = (0.0_f64, BTreeMap::new());
        for env in self.assignments(rel) {
            let d = self.deviation(rel, &env)?;
            if d > worst.0 || d.is_nan() || worst.1.is_empty() {
                let nan = d.is_nan();
                worst = (d, env);
                if nan {
                    break;
                }
            }
        }
        let mut entry = ReportEntry::new(&rel.source, category, worst.0, tol).with_assignment(worst.1);
        entry.expect = rel.expect;
        entry.min_fail = rel.min_fail;
        Ok(entry)
    }

    fn skip_reason(&self, rel: &Relation) -> Option<String> {
        let mut needs_sets = false;
        let mut check = |e: &Expr| {
            if let Expr::Gen { idx, .. } = e {
                needs_sets |= idx.len() == 2;
            }
            if let Expr::Sum { bound: Bound::S, .. } = e {
                needs_sets = true;
            }
        };
        rel.lhs.walk(&mut check);
        rel.rhs.walk(&mut check);
        needs_sets |= rel.quantifiers.iter().any(|(_, b)| *b == Bound::S);
        if needs_sets && self.r.sets() == 0 {
            return Some("no Grassmann sets".into());
        }
        let empty = rel.quantifiers.iter().any(|(_, b)| self.bound(b) == 0);
        empty.then(|| "empty index range".into())
    }

    /// Checks relations in parallel; entries keep the input order.
    pub fn check_all(&self, rels: &[Relation], tols: Tolerances) -> Result<VerificationReport> {
        let entries = rels.par_iter().map(|r| self.check(r, tols)).collect::<Result<Vec<_>>>()?;
        Ok(VerificationReport { entries })
    }
}
