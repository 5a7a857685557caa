//! Oscillator realization of su(2M+1) on 2M+1 fermion modes, the relation
//! set in terms of β_μ = iF_μ0 and ζ_μ = F̃_μ0, and a search for para-vacua
//! of the fields built from them.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{check_cap, comm, kron_all, pauli_z, sigma_minus, ComplexMatrix, ComplexVector, C64, I, ONE, ZERO};
use crate::report::{ReportEntry, VerificationReport};

pub const MAX_M: usize = 3;
const TOL: f64 = 1e-11;
/// Singular values at or below this count as zero in the nullspace search.
pub const NULL_TOL: f64 = 1e-9;
/// Largest fit residual for which a nullspace vector counts as a para-vacuum.
pub const FIT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SuRealization {
    m: usize,
    x: Vec<ComplexMatrix>,
    f: Vec<ComplexMatrix>,
    ft: Vec<ComplexMatrix>,
    beta: Vec<ComplexMatrix>,
    zeta: Vec<ComplexMatrix>,
    a: Vec<ComplexMatrix>,
    b: Vec<ComplexMatrix>,
    number: ComplexMatrix,
}

pub fn build_su(m: usize) -> Result<SuRealization> {
    if m == 0 || m > MAX_M {
        return Err(Error::Config(format!("su(2M+1) realization supports 1 ≤ M ≤ {MAX_M}, got {m}")));
    }
    let n = 2 * m + 1;
    check_cap(1 << n)?;
    let id2 = ComplexMatrix::identity(2);
    let modes = (0..n)
        .map(|k| {
            let mut factors = vec![pauli_z(); k];
            factors.push(sigma_minus());
            factors.extend(std::iter::repeat_n(id2.clone(), n - k - 1));
            kron_all(&factors)
        })
        .collect::<Result<Vec<_>>>()?;
    let dim = 1 << n;
    let number = modes.iter().fold(ComplexMatrix::zeros(dim), |acc, c| &acc + &(&c.dagger() * c));
    let trace_part = number.scale_real(1.0 / n as f64);
    let mut x = Vec::with_capacity(n * n);
    for mu in 0..n {
        for nu in 0..n {
            let mut e = &modes[mu].dagger() * &modes[nu];
            if mu == nu {
                e -= &trace_part;
            }
            x.push(e);
        }
    }
    let at = |mu: usize, nu: usize| &x[mu * n + nu];
    let mut f = Vec::with_capacity(n * n);
    let mut ft = Vec::with_capacity(n * n);
    for mu in 0..n {
        for nu in 0..n {
            f.push(at(mu, nu) - at(nu, mu));
            ft.push(at(mu, nu) + at(nu, mu));
        }
    }
    let beta: Vec<_> = (0..n).map(|mu| f[mu * n].scale(I)).collect();
    let zeta: Vec<_> = (0..n).map(|mu| ft[mu * n].clone()).collect();
    let a = (1..=m).map(|k| &beta[2 * k - 1] - &beta[2 * k].scale(I)).collect();
    let b = (1..=m).map(|k| &zeta[2 * k - 1] - &zeta[2 * k].scale(I)).collect();
    Ok(SuRealization {
        m,
        x,
        f,
        ft,
        beta,
        zeta,
        a,
        b,
        number,
    })
}

impl SuRealization {
    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of fermion modes, `2M + 1`.
    pub fn n(&self) -> usize {
        2 * self.m + 1
    }

    pub fn dim(&self) -> usize {
        1 << self.n()
    }

    pub fn x(&self, mu: usize, nu: usize) -> &ComplexMatrix {
        &self.x[mu * self.n() + nu]
    }

    pub fn f(&self, mu: usize, nu: usize) -> &ComplexMatrix {
        &self.f[mu * self.n() + nu]
    }

    pub fn ftilde(&self, mu: usize, nu: usize) -> &ComplexMatrix {
        &self.ft[mu * self.n() + nu]
    }

    pub fn beta(&self, mu: usize) -> &ComplexMatrix {
        &self.beta[mu]
    }

    pub fn zeta(&self, mu: usize) -> &ComplexMatrix {
        &self.zeta[mu]
    }

    pub fn zeta0(&self) -> &ComplexMatrix {
        &self.zeta[0]
    }

    /// `a_k = β_{2k−1} − iβ_{2k}`, `k` 1-based.
    pub fn a(&self, k: usize) -> &ComplexMatrix {
        &self.a[k - 1]
    }

    /// `b_k = ζ_{2k−1} − iζ_{2k}`, `k` 1-based.
    pub fn b(&self, k: usize) -> &ComplexMatrix {
        &self.b[k - 1]
    }

    /// Total fermion number.
    pub fn number(&self) -> &ComplexMatrix {
        &self.number
    }
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

type Residual<'a> = Box<dyn Fn(&[usize]) -> ComplexMatrix + Sync + 'a>;

enum Expect {
    Pass,
    Fail,
}

struct Check<'a> {
    name: &'static str,
    arity: usize,
    /// Smallest index value; 0 for the full range, 1 to exclude the 0 index.
    lo: usize,
    expect: Expect,
    residual: Residual<'a>,
}

/// Largest residual over all index tuples, with the worst tuple.
fn worst(n: usize, c: &Check<'_>) -> (f64, Vec<usize>) {
    let span = n - c.lo;
    let count = span.pow(c.arity as u32);
    (0..count)
        .into_par_iter()
        .map(|mut t| {
            let mut idx = vec![0; c.arity];
            for slot in idx.iter_mut().rev() {
                *slot = c.lo + t % span;
                t /= span;
            }
            ((c.residual)(&idx).max_abs(), idx)
        })
        .reduce(
            || (f64::NEG_INFINITY, Vec::new()),
            |p, q| if q.0 > p.0 || q.0.is_nan() { q } else { p },
        )
}

fn checks<'a>(su: &'a SuRealization) -> Vec<Check<'a>> {
    let n = su.n();
    let (x, f, ft, be, ze) = (
        |m: usize, v: usize| su.x(m, v),
        |m: usize, v: usize| su.f(m, v),
        |m: usize, v: usize| su.ftilde(m, v),
        |m: usize| su.beta(m),
        |m: usize| su.zeta(m),
    );
    let z0 = su.zeta0();
    let d = delta;
    let lin = |terms: &[(f64, &ComplexMatrix)]| {
        let mut out = ComplexMatrix::zeros(su.dim());
        for &(c, m) in terms {
            if c != 0.0 {
                out.axpy(C64::new(c, 0.0), m);
            }
        }
        out
    };
    let ilin = move |terms: &[(C64, &ComplexMatrix)]| {
        let mut out = ComplexMatrix::zeros(su.dim());
        for &(c, m) in terms {
            if c != ZERO {
                out.axpy(c, m);
            }
        }
        out
    };
    let mut v: Vec<Check<'a>> = Vec::new();
    let mut push = |name: &'static str, arity: usize, lo: usize, expect: Expect, residual: Residual<'a>| {
        v.push(Check {
            name,
            arity,
            lo,
            expect,
            residual,
        })
    };
    use Expect::{Fail, Pass};

    push(
        "unitary algebra commutators",
        4,
        0,
        Pass,
        Box::new(move |t| {
            let (m, nu, s, l) = (t[0], t[1], t[2], t[3]);
            comm(x(m, nu), x(s, l)) - lin(&[(d(nu, s), x(m, l)), (-d(m, l), x(s, nu))])
        }),
    );
    push(
        "generators are traceless",
        0,
        0,
        Pass,
        Box::new(move |_| (0..n).fold(ComplexMatrix::zeros(su.dim()), |acc, m| &acc + x(m, m))),
    );
    push(
        "antisymmetric generators close",
        4,
        0,
        Pass,
        Box::new(move |t| {
            let (m, nu, s, l) = (t[0], t[1], t[2], t[3]);
            comm(f(m, nu), f(s, l)) - lin(&[(d(nu, s), f(m, l)), (d(m, l), f(nu, s)), (-d(m, s), f(nu, l)), (-d(nu, l), f(m, s))])
        }),
    );
    push(
        "symmetric generators commute into antisymmetric ones",
        4,
        0,
        Pass,
        Box::new(move |t| {
            let (m, nu, s, l) = (t[0], t[1], t[2], t[3]);
            comm(ft(m, nu), ft(s, l)) - lin(&[(d(nu, s), f(m, l)), (d(m, l), f(nu, s)), (d(m, s), f(nu, l)), (d(nu, l), f(m, s))])
        }),
    );
    push(
        "antisymmetric with symmetric generators",
        4,
        0,
        Pass,
        Box::new(move |t| {
            let (m, nu, s, l) = (t[0], t[1], t[2], t[3]);
            comm(f(m, nu), ft(s, l))
                - lin(&[
                    (d(nu, s), ft(m, l)),
                    (-d(m, l), ft(nu, s)),
                    (-d(m, s), ft(nu, l)),
                    (d(nu, l), ft(m, s)),
                ])
        }),
    );
    push(
        "symmetric generators have zero trace sum",
        0,
        0,
        Pass,
        Box::new(move |_| (0..n).fold(ComplexMatrix::zeros(su.dim()), |acc, m| &acc + ft(m, m))),
    );
    push("beta_0 vanishes", 0, 0, Pass, Box::new(move |_| be(0).clone()));
    push(
        "F from beta commutators",
        2,
        0,
        Pass,
        Box::new(move |t| {
            let (m, nu) = (t[0], t[1]);
            f(m, nu) - &(comm(be(m), be(nu)) - ilin(&[(I * d(0, nu), be(m)), (-I * d(0, m), be(nu))]))
        }),
    );
    push(
        "F from beta commutators without the 0-index terms",
        2,
        0,
        Fail,
        Box::new(move |t| f(t[0], t[1]) - &comm(be(t[0]), be(t[1]))),
    );
    push(
        "zeta commutators",
        2,
        0,
        Pass,
        Box::new(move |t| {
            let (m, nu) = (t[0], t[1]);
            comm(ze(m), ze(nu)) - (comm(be(m), be(nu)) - ilin(&[(I * 2.0 * d(0, nu), be(m)), (-I * 2.0 * d(0, m), be(nu))]))
        }),
    );
    push(
        "zeta commutators without the factor 2",
        2,
        0,
        Fail,
        Box::new(move |t| {
            let (m, nu) = (t[0], t[1]);
            comm(ze(m), ze(nu)) - (comm(be(m), be(nu)) - ilin(&[(I * d(0, nu), be(m)), (-I * d(0, m), be(nu))]))
        }),
    );
    push(
        "zeta with beta",
        2,
        0,
        Pass,
        Box::new(move |t| {
            let (m, nu) = (t[0], t[1]);
            comm(ze(m), be(nu)) - ilin(&[(-I, ft(m, nu)), (I * d(m, nu), z0), (I * d(0, nu), ze(m)), (-I * d(0, m), ze(nu))])
        }),
    );
    push(
        "zeta with beta missing the delta_0nu term",
        2,
        0,
        Fail,
        Box::new(move |t| {
            let (m, nu) = (t[0], t[1]);
            comm(ze(m), be(nu)) - ilin(&[(-I, ft(m, nu)), (I * d(m, nu), z0), (-I * d(0, m), ze(nu))])
        }),
    );
    push(
        "antisymmetric part of zeta with beta",
        2,
        0,
        Pass,
        Box::new(move |t| {
            let (m, nu) = (t[0], t[1]);
            comm(ze(m), be(nu)) - comm(ze(nu), be(m)) - ilin(&[(I * 2.0 * d(0, nu), ze(m)), (-I * 2.0 * d(0, m), ze(nu))])
        }),
    );
    push(
        "zeta_0 from zeta-beta commutators",
        0,
        0,
        Pass,
        Box::new(move |_| {
            let s = (1..n).fold(ComplexMatrix::zeros(su.dim()), |acc, m| &acc + &comm(ze(m), be(m)));
            z0 - &s.scale(-I / n as f64)
        }),
    );
    push(
        "beta triple commutator",
        3,
        1,
        Pass,
        Box::new(move |t| {
            let (l, m, nu) = (t[0], t[1], t[2]);
            comm(be(l), &comm(be(m), be(nu))) - lin(&[(d(l, m), be(nu)), (-d(l, nu), be(m))])
        }),
    );
    push(
        "zeta triple commutator",
        3,
        1,
        Pass,
        Box::new(move |t| {
            let (l, m, nu) = (t[0], t[1], t[2]);
            comm(ze(l), &comm(ze(m), ze(nu))) - lin(&[(d(l, m), ze(nu)), (-d(l, nu), ze(m))])
        }),
    );
    push(
        "zeta zeta beta triple commutator",
        3,
        1,
        Pass,
        Box::new(move |t| {
            let (l, m, nu) = (t[0], t[1], t[2]);
            comm(ze(l), &comm(ze(m), be(nu))) - lin(&[(2.0 * d(m, nu), be(l)), (d(l, nu), be(m)), (d(l, m), be(nu))])
        }),
    );
    push(
        "beta zeta beta triple commutator",
        3,
        1,
        Pass,
        Box::new(move |t| {
            let (l, m, nu) = (t[0], t[1], t[2]);
            comm(be(l), &comm(ze(m), be(nu))) - lin(&[(-2.0 * d(m, nu), ze(l)), (-d(l, nu), ze(m)), (-d(l, m), ze(nu))])
        }),
    );
    push(
        "beta and zeta commutators agree",
        2,
        1,
        Pass,
        Box::new(move |t| comm(be(t[0]), be(t[1])) - comm(ze(t[0]), ze(t[1]))),
    );
    push(
        "zeta-beta commutator is symmetric",
        2,
        1,
        Pass,
        Box::new(move |t| comm(ze(t[0]), be(t[1])) - comm(ze(t[1]), be(t[0]))),
    );
    push(
        "beta and zeta commutators agree with a 0 index",
        1,
        1,
        Fail,
        Box::new(move |t| comm(be(t[0]), be(0)) - comm(ze(t[0]), z0)),
    );
    push(
        "zeta-beta commutator is symmetric with a 0 index",
        1,
        1,
        Fail,
        Box::new(move |t| comm(ze(t[0]), be(0)) - comm(z0, be(t[0]))),
    );
    push(
        "zeta with zeta_0",
        1,
        1,
        Pass,
        Box::new(move |t| comm(ze(t[0]), z0) + be(t[0]).scale(2.0 * I)),
    );
    push(
        "beta with zeta_0",
        1,
        1,
        Pass,
        Box::new(move |t| comm(be(t[0]), z0) - ze(t[0]).scale(2.0 * I)),
    );
    push(
        "beta triple commutator over all indices",
        3,
        0,
        Pass,
        Box::new(move |t| {
            let (l, m, nu) = (t[0], t[1], t[2]);
            comm(be(l), &comm(be(m), be(nu)))
                - lin(&[
                    (d(l, m), be(nu)),
                    (-d(l, nu), be(m)),
                    (d(0, nu) * d(0, l), be(m)),
                    (-d(0, nu) * d(0, m), be(l)),
                    (-d(0, m) * d(0, l), be(nu)),
                    (d(0, m) * d(0, nu), be(l)),
                ])
        }),
    );
    push(
        "zeta triple commutator over all indices",
        3,
        0,
        Pass,
        Box::new(move |t| {
            let (l, m, nu) = (t[0], t[1], t[2]);
            let bilinear = &comm(be(m), ze(l)).scale(I * 2.0 * d(0, nu)) - &comm(be(nu), ze(l)).scale(I * 2.0 * d(0, m));
            comm(ze(l), &comm(ze(m), ze(nu)))
                - lin(&[
                    (d(l, m), ze(nu)),
                    (-d(l, nu), ze(m)),
                    (d(0, nu) * d(0, l), ze(m)),
                    (-d(0, nu) * d(0, m), ze(l)),
                    (-d(0, nu) * d(m, l), z0),
                    (-d(0, m) * d(0, l), ze(nu)),
                    (d(0, m) * d(0, nu), ze(l)),
                    (d(0, m) * d(nu, l), z0),
                ])
                - bilinear
        }),
    );
    push(
        "zeta zeta beta triple commutator over all indices",
        3,
        0,
        Pass,
        Box::new(move |t| {
            let (l, m, nu) = (t[0], t[1], t[2]);
            comm(ze(l), &comm(ze(m), be(nu)))
                - lin(&[
                    (2.0 * d(m, nu), be(l)),
                    (d(l, nu), be(m)),
                    (d(l, m), be(nu)),
                    (-d(0, nu) * d(0, l), be(m)),
                    (d(0, nu) * d(0, m), be(l)),
                    (-d(0, m) * d(0, l), be(nu)),
                    (d(0, m) * d(0, nu), be(l)),
                ])
                - comm(ze(nu), ze(l)).scale(I * 2.0 * d(0, m))
        }),
    );
    v
}

/// Evaluates the relation set over full index ranges, including the
/// uncorrected forms, which must fail.
pub fn verify_relation_set(su: &SuRealization) -> VerificationReport {
    let n = su.n();
    let mut rep = VerificationReport::new();
    for c in checks(su) {
        let (dev, idx) = worst(n, &c);
        let names = ["i", "j", "k", "l"];
        let assign = idx.iter().enumerate().map(|(p, &v)| (names[p].to_string(), v)).collect();
        let e = ReportEntry::operator(c.name, dev, TOL).with_assignment(assign);
        rep.push(match c.expect {
            Expect::Pass => e,
            Expect::Fail => e.expect_fail(crate::report::DEFAULT_MIN_FAIL),
        });
    }
    rep
}

#[derive(Clone, Debug)]
pub struct ParaVacuum {
    /// Fermion number of the sector the vector lies in.
    pub sector: usize,
    pub vector: ComplexVector,
    /// Fitted `p` in `a_k a_l† v ≈ p δ_kl v`.
    pub p: C64,
    /// `max_kl ‖a_k a_l† v − p δ_kl v‖`.
    pub residual: f64,
    pub is_para_vacuum: bool,
}

fn to_nalgebra(rows: &[&ComplexMatrix], cols: &[usize]) -> DMatrix<C64> {
    let dim = rows[0].dim();
    DMatrix::from_fn(rows.len() * dim, cols.len(), |r, c| rows[r / dim].get(r % dim, cols[c]))
}

/// Orthonormal basis of the joint nullspace of all `a_k`, `b_k` within one
/// fermion-number sector: the nullspace projections of the sector's basis
/// states, Gram–Schmidt orthonormalized in basis order.
fn sector_nullspace(ops: &[&ComplexMatrix], cols: &[usize]) -> Vec<Vec<C64>> {
    let stacked = to_nalgebra(ops, cols);
    let svd = stacked.svd(false, true);
    let vt = svd.v_t.expect("right singular vectors were requested");
    let k = cols.len();
    let mut null: Vec<Vec<C64>> = Vec::new();
    for (row, &s) in svd.singular_values.iter().enumerate() {
        if s <= NULL_TOL {
            null.push((0..k).map(|c| vt[(row, c)].conj()).collect());
        }
    }
    // Columns beyond the row count are always null directions.
    for row in svd.singular_values.len()..k {
        null.push((0..k).map(|c| vt[(row, c)].conj()).collect());
    }
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for i in 0..k {
        let mut w: Vec<C64> = vec![ZERO; k];
        for q in &null {
            let coef = q[i].conj();
            for (wj, qj) in w.iter_mut().zip(q) {
                *wj += coef * qj;
            }
        }
        for q in &basis {
            let ov: C64 = q.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            for (wj, qj) in w.iter_mut().zip(q) {
                *wj -= ov * qj;
            }
        }
        let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > NULL_TOL.sqrt() {
            basis.push(w.into_iter().map(|z| z / norm).collect());
        }
        if basis.len() == null.len() {
            break;
        }
    }
    basis
}

/// Joint nullspace of `{a_k, b_k}`, sector by sector, with a fit of `p` for
/// each basis vector.
pub fn para_vacuum_search(su: &SuRealization) -> Vec<ParaVacuum> {
    let dim = su.dim();
    let ops: Vec<&ComplexMatrix> = su.a.iter().chain(&su.b).collect();
    let creators: Vec<ComplexMatrix> = su.a.iter().map(ComplexMatrix::dagger).collect();
    let mut out = Vec::new();
    for sector in 0..=su.n() {
        let cols: Vec<usize> = (0..dim).filter(|&j| j.count_ones() as usize == sector).collect();
        for w in sector_nullspace(&ops, &cols) {
            let mut data = vec![ZERO; dim];
            for (&j, &z) in cols.iter().zip(&w) {
                data[j] = z;
            }
            let v = ComplexVector::from_vec(data);
            let images: Vec<Vec<ComplexVector>> = (0..su.m)
                .map(|k| creators.iter().map(|ad| su.a[k].matvec(&ad.matvec(&v))).collect())
                .collect();
            let p = (0..su.m).map(|k| v.dot(&images[k][k])).sum::<C64>() / su.m as f64;
            let mut residual = 0.0_f64;
            for (k, row) in images.iter().enumerate() {
                for (l, img) in row.iter().enumerate() {
                    let target = if k == l { v.scale(p) } else { ComplexVector::zeros(dim) };
                    residual = residual.max(img.sub(&target).norm());
                }
            }
            out.push(ParaVacuum {
                sector,
                vector: v,
                p,
                residual,
                is_para_vacuum: residual <= FIT_TOL,
            });
        }
    }
    out
}

/// Sectors whose every nullspace vector is a para-vacuum with the given `p`.
pub fn sectors_with_p(found: &[ParaVacuum], p: f64) -> Vec<usize> {
    let mut sectors: Vec<usize> = found.iter().map(|v| v.sector).collect();
    sectors.dedup();
    sectors
        .into_iter()
        .filter(|&s| {
            found
                .iter()
                .filter(|v| v.sector == s)
                .all(|v| v.is_para_vacuum && (v.p - ONE * p).norm() <= FIT_TOL)
        })
        .collect()
}

/// Reports where the `p = 2` para-vacua sit; they are expected in the
/// sectors holding `M` and `M + 1` fermions.
pub fn para_vacuum_report(su: &SuRealization) -> VerificationReport {
    let found = para_vacuum_search(su);
    let sectors = sectors_with_p(&found, 2.0);
    let m = su.m();
    let residual = found
        .iter()
        .filter(|v| sectors.contains(&v.sector))
        .map(|v| v.residual)
        .fold(0.0, f64::max);
    let listed = sectors.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ");
    let mut rep = VerificationReport::new();
    rep.push(
        ReportEntry::new(
            format!("p = 2 para-vacua in fermion-number sectors [{listed}]"),
            "para-vacuum",
            if sectors == [m, m + 1] { residual } else { 1.0 },
            FIT_TOL,
        )
        .report_only(),
    );
    rep
}
