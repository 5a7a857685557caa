//! A small language for operator relations and a runner for relation files.
//!
//! ```text
//! forall k,m in 1..M : acomm(a(k), ad(m)) == 2*delta(k,m) @operator
//! forall s in 1..S, k in 1..M : comm(Om, xi(s,k)) == 0 @vacuum
//! ```

mod ast;
mod eval;
mod parser;

use std::path::{Path, PathBuf};

pub use ast::{Bound, Category, Constant, Expr, Func, Index, Printer, Relation};
pub use eval::{Evaluator, Tolerances, Value, DEFAULT_EXP_TOL, DEFAULT_TOL};
pub use parser::{parse_file, parse_relation, ParseError};

use crate::error::{Error, Result};
use crate::govorkov::Realization;
use crate::report::VerificationReport;

/// `.rel` files under `path` in name order, or `path` itself if it is a file.
pub fn corpus_files(path: &Path) -> Result<Vec<PathBuf>> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    if path.is_file() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    for entry in std::fs::read_dir(path).map_err(io)? {
        let p = entry.map_err(io)?.path();
        if p.extension().is_some_and(|e| e == "rel") {
            files.push(p);
        }
    }
    files.sort();
    Ok(files)
}

/// Parses every relation file under `path`.
pub fn load_corpus(path: &Path) -> Result<Vec<Relation>> {
    let mut rels = Vec::new();
    for f in corpus_files(path)? {
        let text = std::fs::read_to_string(&f).map_err(|source| Error::Io { path: f.clone(), source })?;
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        rels.extend(parse_file(&name, &text)?);
    }
    Ok(rels)
}

/// Parses and checks a corpus against `r`.
pub fn run_corpus(path: &Path, r: &Realization, tols: Tolerances) -> Result<VerificationReport> {
    let rels = load_corpus(path)?;
    Evaluator::new(r).check_all(&rels, tols)
}
