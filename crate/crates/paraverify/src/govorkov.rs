//! Order-2 realization of two coupled para-Fermi fields.
//!
//! Two ordinary fermion blocks `A1`, `A2` carry the Green components of
//! both fields; the `b` field reuses them through the ancilla flip `K`.
//! Grassmann families live on their own `G1`, `G2` modes.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::{build_modes, FermionSet, JwOp, ModeRegistry, Sector};
use crate::kernel::{acomm, check_cap, comm, ComplexMatrix, ComplexVector, C64, I, ZERO};
use crate::report::{ReportEntry, Tally, VerificationReport};

/// Largest number of fermion modes a realization may use.
pub const MAX_MODES: usize = 13;

/// Rough ceiling on dense operator storage for one realization.
const STORAGE_BUDGET: usize = 6 << 30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LambdaPolicy {
    /// `λ = c`, which makes `Ñ` annihilate the vacuum.
    Auto,
    Fixed(C64),
}

impl FromStr for LambdaPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(LambdaPolicy::Auto);
        }
        let v = s.strip_prefix("fixed:").unwrap_or(s);
        parse_complex(v).map(LambdaPolicy::Fixed).ok_or_else(|| {
            Error::Config(format!(
                "invalid lambda policy `{s}` (expected `auto`, `fixed:<value>` or a complex literal)"
            ))
        })
    }
}

impl fmt::Display for LambdaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaPolicy::Auto => f.write_str("auto"),
            LambdaPolicy::Fixed(z) => write!(f, "fixed:{}", format_complex(*z)),
        }
    }
}

/// Parses `3`, `-1.5`, `2i`, `i`, `-i`, `1+2i`, `0.5-1e-3i`.
pub fn parse_complex(s: &str) -> Option<C64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return None;
    }
    if let Some(body) = s.strip_suffix('i') {
        // Split at the last sign that is not part of an exponent.
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&j| (bytes[j] == b'+' || bytes[j] == b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
        let (re, im) = match split {
            Some(j) => (&body[..j], &body[j..]),
            None => ("", body),
        };
        let re = if re.is_empty() { 0.0 } else { re.parse::<f64>().ok()? };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            t => t.parse::<f64>().ok()?,
        };
        Some(C64::new(re, im))
    } else {
        s.parse::<f64>().ok().map(|re| C64::new(re, 0.0))
    }
}

pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        match z.im {
            1.0 => "i".into(),
            -1.0 => "-i".into(),
            im => format!("{im}i"),
        }
    } else {
        format!("{}{:+}i", z.re, z.im)
    }
}

/// Vacuum-sector scalars of a realization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constants {
    /// `b_m a_k† |0⟩ = c δ_mk |0⟩`
    pub c: C64,
    /// `Λ = c/2`
    pub big_lambda: C64,
    /// `Λ̃ = M(2Λ − λ)/(2M+1)`
    pub lambda_tilde: C64,
    /// `a_k a_l† |0⟩ = p δ_kl |0⟩`
    pub p: C64,
    pub lambda: C64,
    /// Largest off-fit residual of the two scalar fits.
    pub residual: f64,
}

/// Generators the relation language may name, with their index counts.
pub const GENERATORS: &[(&str, usize)] = &[
    ("a", 1),
    ("ad", 1),
    ("b", 1),
    ("bd", 1),
    ("a1", 1),
    ("a2", 1),
    ("b1", 1),
    ("b2", 1),
    ("ad1", 1),
    ("ad2", 1),
    ("bd1", 1),
    ("bd2", 1),
    ("A1", 1),
    ("A2", 1),
    ("B1", 1),
    ("B2", 1),
    ("xi", 2),
    ("xid", 2),
    ("xi1", 2),
    ("xi2", 2),
    ("xid1", 2),
    ("xid2", 2),
    ("Om", 0),
    ("Omt", 0),
    ("Nt", 0),
    ("z0", 0),
    ("Nop", 0),
    ("HA2", 0),
    ("HB1", 0),
    ("K", 0),
    ("P1", 0),
    ("Id", 0),
];

pub fn generator_arity(name: &str) -> Option<usize> {
    GENERATORS.iter().find(|(n, _)| *n == name).map(|&(_, a)| a)
}

/// Every operator of the realization as a dense matrix.
#[derive(Clone, Debug)]
pub struct Realization {
    m: usize,
    sets: usize,
    kappa: i8,
    policy: LambdaPolicy,
    fermions: FermionSet,
    indexed: BTreeMap<&'static str, Vec<ComplexMatrix>>,
    grassmann: BTreeMap<&'static str, Vec<Vec<ComplexMatrix>>>,
    single: BTreeMap<&'static str, ComplexMatrix>,
    vacuum: ComplexVector,
    constants: Constants,
}

fn dense(op: &JwOp) -> Result<ComplexMatrix> {
    op.to_dense()
}

/// Builds the realization for `m` modes and `sets` Grassmann families.
pub fn build(m: usize, sets: usize, kappa: i8, policy: LambdaPolicy) -> Result<Realization> {
    if m == 0 {
        return Err(Error::Config("m must be ≥ 1".into()));
    }
    if kappa != 1 && kappa != -1 {
        return Err(Error::Config("kappa must be +1 or -1".into()));
    }
    let modes = 2 * m + 2 * m * sets;
    if modes > MAX_MODES {
        return Err(Error::Config(format!("2M + 2MS = {modes} exceeds the limit of {MAX_MODES} modes")));
    }
    let registry = ModeRegistry::standard(m, sets, true);
    let dim = registry.dim();
    check_cap(dim)?;
    let count = 20 * m + 6 * m * sets + 12;
    if count.saturating_mul(dim * dim * 16) > STORAGE_BUDGET {
        return Err(Error::Config(format!(
            "dimension {dim} needs more than {} GiB of dense operator storage",
            STORAGE_BUDGET >> 30
        )));
    }
    let fs = build_modes(registry)?;
    let reg = fs.registry().clone();
    let a1_labels = reg.labels_where(|s| *s == Sector::A1);
    let a2_labels = reg.labels_where(|s| *s == Sector::A2);
    let p1_labels = reg.labels_where(|s| matches!(s, Sector::A1 | Sector::G1(_)));
    let ha = fs.parity_op(&a2_labels)?;
    let hb = fs.parity_op(&a1_labels)?;
    let k = fs.ancilla_flip_op()?;
    let p1 = fs.parity_op(&p1_labels)?;
    let half_i = C64::new(0.0, 0.5);

    let mut indexed: BTreeMap<&'static str, Vec<ComplexMatrix>> = BTreeMap::new();
    let mut push = |name: &'static str, op: JwOp| -> Result<()> {
        let d = dense(&op.dagger())?;
        indexed.entry(name).or_default().push(dense(&op)?);
        let dname = match name {
            "a1" => "ad1",
            "a2" => "ad2",
            "b1" => "bd1",
            "b2" => "bd2",
            _ => return Ok(()),
        };
        indexed.entry(dname).or_default().push(d);
        Ok(())
    };
    for kk in 1..=m {
        let ca1 = fs.op(&format!("A1_{kk}"))?;
        let ca2 = fs.op(&format!("A2_{kk}"))?;
        push("a1", ca1.mul(&ha))?;
        push("a2", ca2.mul(&ha).scale(I))?;
        push("b1", ca1.mul(&k).mul(&hb).scale(-I))?;
        push("b2", ca2.mul(&k).mul(&hb))?;
        push("A1", ca1.clone())?;
        push("A2", ca2.clone())?;
        push("B1", ca1.mul(&k))?;
        push("B2", ca2.mul(&k))?;
    }
    let sum_of = |x: &str, y: &str, idx: &BTreeMap<&'static str, Vec<ComplexMatrix>>| -> Vec<ComplexMatrix> {
        idx[x].iter().zip(&idx[y]).map(|(p, q)| p + q).collect()
    };
    let a = sum_of("a1", "a2", &indexed);
    let b = sum_of("b1", "b2", &indexed);
    let ad = sum_of("ad1", "ad2", &indexed);
    let bd = sum_of("bd1", "bd2", &indexed);
    indexed.insert("a", a);
    indexed.insert("b", b);
    indexed.insert("ad", ad);
    indexed.insert("bd", bd);

    let mut grassmann: BTreeMap<&'static str, Vec<Vec<ComplexMatrix>>> = BTreeMap::new();
    for s in 1..=sets {
        let mut xi1 = Vec::new();
        let mut xi2 = Vec::new();
        let mut xid1 = Vec::new();
        let mut xid2 = Vec::new();
        for kk in 1..=m {
            let g1 = fs.op(&format!("G1_{s}_{kk}"))?.mul(&ha);
            let g2 = fs.op(&format!("G2_{s}_{kk}"))?.mul(&p1);
            xid1.push(dense(&g1.dagger())?);
            xid2.push(dense(&g2.dagger())?);
            xi1.push(dense(&g1)?);
            xi2.push(dense(&g2)?);
        }
        let xi: Vec<_> = xi1.iter().zip(&xi2).map(|(p, q)| p + q).collect();
        let xid: Vec<_> = xid1.iter().zip(&xid2).map(|(p, q)| p + q).collect();
        for (name, v) in [("xi1", xi1), ("xi2", xi2), ("xid1", xid1), ("xid2", xid2), ("xi", xi), ("xid", xid)] {
            grassmann.entry(name).or_default().push(v);
        }
    }

    let mut single: BTreeMap<&'static str, ComplexMatrix> = BTreeMap::new();
    single.insert("Om", dense(&ha.mul(&k).mul(&hb).scale(half_i))?);
    single.insert("Omt", dense(&k.scale(half_i))?);
    single.insert("HA2", dense(&ha)?);
    single.insert("HB1", dense(&hb)?);
    single.insert("K", dense(&k)?);
    single.insert("P1", dense(&p1)?);
    single.insert("Id", ComplexMatrix::identity(dim));

    let vacuum = fs.vacuum(kappa);
    let mut r = Realization {
        m,
        sets,
        kappa,
        policy,
        fermions: fs,
        indexed,
        grassmann,
        single,
        vacuum,
        constants: Constants {
            c: ZERO,
            big_lambda: ZERO,
            lambda_tilde: ZERO,
            p: ZERO,
            lambda: ZERO,
            residual: 0.0,
        },
    };
    r.constants = compute_constants(&r)?;
    let lam = r.constants.lambda;
    let p = r.constants.p;
    let rho = 1.0 / (2.0 * (2 * m + 1) as f64);
    let id = ComplexMatrix::identity(dim);
    let mut nop = ComplexMatrix::zeros(dim);
    let mut nt = ComplexMatrix::zeros(dim);
    let mut z0 = ComplexMatrix::zeros(dim);
    for kk in 0..m {
        let (a, ad, b, bd) = (&r.indexed["a"][kk], &r.indexed["ad"][kk], &r.indexed["b"][kk], &r.indexed["bd"][kk]);
        nop += &comm(ad, a);
        nop.axpy(p, &id);
        let adb = comm(ad, b);
        nt += &adb;
        nt.axpy(lam, &id);
        z0 += &adb;
        z0 -= &comm(bd, a);
    }
    r.single.insert("Nop", nop.scale_real(0.5));
    r.single.insert("Nt", nt.scale(C64::new(0.0, rho)));
    r.single.insert("z0", z0.scale(C64::new(0.0, rho)));
    Ok(r)
}

/// Fits `c` and `p` from the vacuum conditions and derives `Λ`, `Λ̃`, `λ`.
pub fn compute_constants(r: &Realization) -> Result<Constants> {
    let v = &r.vacuum;
    let fit = |x: &[ComplexMatrix], y: &[ComplexMatrix]| -> (C64, f64) {
        let mut diag = Vec::new();
        let mut resid = 0.0_f64;
        let mut images = Vec::new();
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                let w = xi.matvec(&yj.matvec(v));
                if i == j {
                    diag.push(v.dot(&w));
                }
                images.push((i == j, w));
            }
        }
        let c = diag.iter().sum::<C64>() / diag.len() as f64;
        for (on, w) in images {
            let target = if on { v.scale(c) } else { ComplexVector::zeros(v.dim()) };
            resid = resid.max(w.sub(&target).max_abs());
        }
        (c, resid)
    };
    let (c, rc) = fit(&r.indexed["b"], &r.indexed["ad"]);
    let (p, rp) = fit(&r.indexed["a"], &r.indexed["ad"]);
    let residual = rc.max(rp);
    if residual > 1e-10 {
        return Err(Error::Structural(format!(
            "vacuum scalar fit residual {residual:.3e} exceeds 1e-10"
        )));
    }
    let lambda = match r.policy {
        LambdaPolicy::Auto => c,
        LambdaPolicy::Fixed(z) => z,
    };
    let m = r.m as f64;
    let big_lambda = c / 2.0;
    Ok(Constants {
        c,
        big_lambda,
        lambda_tilde: (big_lambda * 2.0 - lambda) * (m / (2.0 * m + 1.0)),
        p,
        lambda,
        residual,
    })
}

impl Realization {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sets(&self) -> usize {
        self.sets
    }

    pub fn kappa(&self) -> i8 {
        self.kappa
    }

    pub fn policy(&self) -> LambdaPolicy {
        self.policy
    }

    pub fn dim(&self) -> usize {
        self.fermions.dim()
    }

    pub fn fermions(&self) -> &FermionSet {
        &self.fermions
    }

    pub fn constants(&self) -> &Constants {
        &self.constants
    }

    pub fn vacuum(&self) -> &ComplexVector {
        &self.vacuum
    }

    /// Looks up a generator by name with 1-based indices (`set, k` for
    /// Grassmann symbols, `k` for field operators).
    pub fn generator(&self, name: &str, idx: &[usize]) -> Result<&ComplexMatrix> {
        let arity = generator_arity(name).ok_or_else(|| Error::Eval(format!("unknown generator `{name}`")))?;
        if idx.len() != arity {
            return Err(Error::Eval(format!("`{name}` takes {arity} indices, got {}", idx.len())));
        }
        let out_of_range = || Error::Eval(format!("index out of range in `{name}{idx:?}`"));
        match arity {
            0 => Ok(&self.single[name]),
            1 => {
                let k = idx[0].checked_sub(1).ok_or_else(out_of_range)?;
                self.indexed[name].get(k).ok_or_else(out_of_range)
            }
            _ => {
                let s = idx[0].checked_sub(1).ok_or_else(out_of_range)?;
                let k = idx[1].checked_sub(1).ok_or_else(out_of_range)?;
                let sets = self
                    .grassmann
                    .get(name)
                    .ok_or_else(|| Error::Eval(format!("`{name}` needs at least one Grassmann set")))?;
                sets.get(s).and_then(|v| v.get(k)).ok_or_else(out_of_range)
            }
        }
    }

    fn op(&self, name: &str, k: usize) -> &ComplexMatrix {
        &self.indexed[name][k]
    }

    fn xi(&self, name: &str, s: usize, k: usize) -> &ComplexMatrix {
        &self.grassmann[name][s][k]
    }

    pub fn single(&self, name: &str) -> &ComplexMatrix {
        &self.single[name]
    }

    /// Number of Grassmann (G) modes; the G sector has `2^n` basis states.
    pub fn grassmann_modes(&self) -> usize {
        2 * self.m * self.sets
    }

    fn vacuum_stride(&self) -> usize {
        1 << (2 * self.m + 1)
    }

    /// Columns of `X·V`, where `V` embeds the G sector next to the empty
    /// A modes and the ancilla `κ` state.
    pub fn apply_vacuum_block(&self, x: &ComplexMatrix) -> Vec<ComplexVector> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let kap = f64::from(self.kappa);
        let n = x.dim();
        (0..1usize << self.grassmann_modes())
            .map(|g| {
                let c0 = g * self.vacuum_stride();
                ComplexVector::from_vec((0..n).map(|r| (x.get(r, c0) + x.get(r, c0 + 1) * kap) * h).collect())
            })
            .collect()
    }

    /// `max |X·V|` over all entries.
    pub fn vacuum_block_max(&self, x: &ComplexMatrix) -> f64 {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let kap = f64::from(self.kappa);
        let mut worst = 0.0_f64;
        for g in 0..1usize << self.grassmann_modes() {
            let c0 = g * self.vacuum_stride();
            for r in 0..x.dim() {
                worst = worst.max(((x.get(r, c0) + x.get(r, c0 + 1) * kap) * h).norm());
            }
        }
        worst
    }

    /// Partial vacuum expectation `V†·X·V`, an operator on the G sector.
    pub fn pve(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let kap = f64::from(self.kappa);
        let stride = self.vacuum_stride();
        ComplexMatrix::from_fn(1 << self.grassmann_modes(), |g, h| {
            let (r0, c0) = (g * stride, h * stride);
            (x.get(r0, c0) + x.get(r0, c0 + 1) * kap + x.get(r0 + 1, c0) * kap + x.get(r0 + 1, c0 + 1)) * 0.5
        })
    }

    /// `iÑ`
    pub fn i_nt(&self) -> ComplexMatrix {
        self.single["Nt"].scale(I)
    }
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// Structural invariants plus spot checks of the field trilinears.
pub fn structure_check(r: &Realization) -> VerificationReport {
    let mut t = Tally::new();
    let om = r.single("Om");
    let id = r.single("Id");
    t.rec("Omega is anti-Hermitian", 1e-13, "operator", (om + &om.dagger()).max_abs(), &[]);
    t.rec(
        "Omega squares to -1/4",
        1e-13,
        "operator",
        (&(om * om) + &id.scale_real(0.25)).max_abs(),
        &[],
    );
    let m = r.m();
    for k in 0..m {
        let kk = [("k", k + 1)];
        t.rec(
            "a is the sum of its Green components",
            0.0,
            "operator",
            (r.op("a", k) - &(r.op("a1", k) + r.op("a2", k))).max_abs(),
            &kk,
        );
        t.rec(
            "b is the sum of its Green components",
            0.0,
            "operator",
            (r.op("b", k) - &(r.op("b1", k) + r.op("b2", k))).max_abs(),
            &kk,
        );
        for (alpha, (an, bn)) in [("a1", "b1"), ("a2", "b2")].iter().enumerate() {
            let ka = [("k", k + 1), ("alpha", alpha + 1)];
            t.rec(
                "[Om, a^(alpha)_k] = b^(alpha)_k",
                1e-13,
                "operator",
                (&comm(om, r.op(an, k)) - r.op(bn, k)).max_abs(),
                &ka,
            );
            t.rec(
                "[Om, b^(alpha)_k] = -a^(alpha)_k",
                1e-13,
                "operator",
                (&comm(om, r.op(bn, k)) + r.op(an, k)).max_abs(),
                &ka,
            );
        }
    }
    for k in 0..m {
        for l in 0..m {
            for mm in 0..m {
                let asg = [("k", k + 1), ("l", l + 1), ("m", mm + 1)];
                let (a, ad, b) = (&r.indexed["a"], &r.indexed["ad"], &r.indexed["b"]);
                let lhs = comm(&comm(&b[mm], &ad[k]), &a[l]);
                let rhs = b[mm].scale_real(2.0 * delta(k, l)) + b[l].scale_real(4.0 * delta(k, mm));
                t.rec(
                    "[[b_m, ad_k], a_l] = 2 d_kl b_m + 4 d_km b_l",
                    1e-12,
                    "operator",
                    (&lhs - &rhs).max_abs(),
                    &asg,
                );
                let lhs = comm(&comm(&ad[k], &a[l]), &b[mm]);
                let rhs = b[l].scale_real(-2.0 * delta(k, mm));
                t.rec("[[ad_k, a_l], b_m] = -2 d_km b_l", 1e-12, "operator", (&lhs - &rhs).max_abs(), &asg);
            }
        }
    }
    let e = r.single("Nop").scale(C64::new(0.0, std::f64::consts::PI)).expm();
    for k in 0..m {
        let d = match &e {
            Ok(e) => acomm(e, r.op("a", k)).max_abs().max(acomm(e, r.op("b", k)).max_abs()),
            Err(_) => f64::NAN,
        };
        t.rec("exp(i pi N) anticommutes with a_k and b_k", 1e-9, "operator", d, &[("k", k + 1)]);
    }
    t.report()
}

/// The Green-component and Klein-operator relations of the dressed blocks.
pub fn klein_check(r: &Realization) -> VerificationReport {
    let mut t = Tally::new();
    let m = r.m();
    let id = r.single("Id");
    let ha = r.single("HA2");
    let hb = r.single("HB1");
    let omt = r.single("Omt");
    let om = r.single("Om");
    let tol = 1e-13;
    let names = [("A1", "B1"), ("A2", "B2")];
    t.rec(
        "H_A^2 = H_B^2 = I, [H_A, H_B] = 0",
        tol,
        "operator",
        (&(ha * ha) - id)
            .max_abs()
            .max((&(hb * hb) - id).max_abs())
            .max(comm(ha, hb).max_abs()),
        &[],
    );
    t.rec("Omega = H_A Omt H_B", tol, "operator", (&(&(ha * omt) * hb) - om).max_abs(), &[]);
    for alpha in 0..2 {
        for beta in 0..2 {
            for k in 0..m {
                for l in 0..m {
                    let asg = [("alpha", alpha + 1), ("beta", beta + 1), ("k", k + 1), ("l", l + 1)];
                    for fam in 0..2 {
                        let x = r.op([names[alpha].0, names[alpha].1][fam], k);
                        let y = r.op([names[beta].0, names[beta].1][fam], l);
                        let same = alpha == beta;
                        let e = if same && k == l { 1.0 } else { 0.0 };
                        let d1 = (&acomm(x, &y.dagger()) - &id.scale_real(e)).max_abs();
                        let d2 = acomm(x, y).max_abs();
                        t.rec("normal anticommutation of the A and B blocks", tol, "operator", d1.max(d2), &asg);
                    }
                    if alpha == beta {
                        let (ak, bl) = (r.op(names[alpha].0, k), r.op(names[alpha].1, l));
                        let d = (&acomm(bl, &ak.dagger()) - &omt.scale(C64::new(0.0, -2.0 * delta(k, l)))).max_abs();
                        t.rec("{B^(alpha)_m, A^(alpha)_k dagger} = (2/i) d_mk Omt", tol, "operator", d, &asg);
                        let d = acomm(ak, bl).max_abs().max(acomm(&ak.dagger(), &bl.dagger()).max_abs());
                        t.rec("{A^(alpha)_k, B^(alpha)_m} = 0 and its conjugate", tol, "operator", d, &asg);
                    }
                }
            }
        }
    }
    for (alpha, (an, bn)) in names.iter().enumerate() {
        for k in 0..m {
            let asg = [("alpha", alpha + 1), ("k", k + 1)];
            let (ak, bk) = (r.op(an, k), r.op(bn, k));
            t.rec(
                "{A^(alpha)_k, Omt} = i B^(alpha)_k",
                tol,
                "operator",
                (&acomm(ak, omt) - &bk.scale(I)).max_abs(),
                &asg,
            );
            t.rec(
                "{B^(alpha)_k, Omt} = i A^(alpha)_k",
                tol,
                "operator",
                (&acomm(bk, omt) - &ak.scale(I)).max_abs(),
                &asg,
            );
            // Which Klein operator each block anticommutes with.
            let (anti_a, comm_a) = if alpha == 0 { (hb, ha) } else { (ha, hb) };
            let (anti_b, comm_b) = if alpha == 0 { (hb, ha) } else { (ha, hb) };
            let d = acomm(ak, anti_a).max_abs().max(comm(ak, comm_a).max_abs());
            t.rec("A blocks against the Klein operators", tol, "operator", d, &asg);
            let d = acomm(bk, anti_b).max_abs().max(comm(bk, comm_b).max_abs());
            t.rec("B blocks against the Klein operators", tol, "operator", d, &asg);
            let d = if alpha == 0 {
                acomm(ak, hb).max_abs()
            } else {
                acomm(bk, ha).max_abs()
            };
            t.rec("{A^(1)_k, H_B} = 0 and {B^(2)_k, H_A} = 0", tol, "operator", d, &asg);
        }
    }
    for k in 0..m {
        let asg = [("k", k + 1)];
        let d = [
            (r.op("a1", k) - &(r.op("A1", k) * ha)).max_abs(),
            (r.op("a2", k) - &(r.op("A2", k) * ha).scale(I)).max_abs(),
            (r.op("b1", k) - &(r.op("B1", k) * hb).scale(-I)).max_abs(),
            (r.op("b2", k) - &(r.op("B2", k) * hb)).max_abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        t.rec("dressing of the Green components", tol, "operator", d, &asg);
        for l in 0..m {
            let asg = [("k", k + 1), ("m", l + 1)];
            let lhs = comm(r.op("b1", l), r.op("ad1", k));
            let mid = &(ha * &acomm(r.op("B1", l), &r.op("A1", k).dagger())) * hb;
            let d = (&lhs - &mid.scale(I))
                .max_abs()
                .max((&lhs - &om.scale_real(2.0 * delta(k, l))).max_abs());
            t.rec(
                "[b^(1)_m, ad^(1)_k] = i H_A {B^(1)_m, A^(1)_k dagger} H_B = 2 d_mk Omega",
                tol,
                "operator",
                d,
                &asg,
            );
        }
    }
    // The b-field number operator splits into two ordinary fermion counts.
    let half_m = C64::new(0.5 * m as f64, 0.0);
    let mut nb = ComplexMatrix::zeros(r.dim());
    let mut split = ComplexMatrix::zeros(r.dim());
    for k in 0..m {
        nb += &comm(r.op("bd", k), r.op("b", k));
        for bn in ["B1", "B2"] {
            let bk = r.op(bn, k);
            split += &comm(&bk.dagger(), bk);
        }
    }
    let mut nb = nb.scale_real(0.5);
    nb.axpy(half_m * 2.0, id);
    let mut split = split.scale_real(0.5);
    split.axpy(half_m * 2.0, id);
    t.rec("N_b = N_B^(1) + N_B^(2)", tol, "operator", (&nb - &split).max_abs(), &[]);
    t.report()
}

/// Action of `iÑ` on the fields and on their Green components.
pub fn n_tilde_action_check(r: &Realization) -> VerificationReport {
    let mut t = Tally::new();
    let int = r.i_nt();
    let m = r.m();
    let q = 1.0 / (2 * m + 1) as f64;
    let big = 2.0 * m as f64 * q;
    for k in 0..m {
        let asg = [("k", k + 1)];
        t.rec(
            "[iNt, a_k] = b_k",
            1e-12,
            "operator",
            (&comm(&int, r.op("a", k)) - r.op("b", k)).max_abs(),
            &asg,
        );
        t.rec(
            "[iNt, b_k] = -a_k",
            1e-12,
            "operator",
            (&comm(&int, r.op("b", k)) + r.op("a", k)).max_abs(),
            &asg,
        );
        for (x, y) in [("a1", "a2"), ("a2", "a1")] {
            let (bx, by) = (x.replace('a', "b"), y.replace('a', "b"));
            let rhs = r.op(&bx, k).scale_real(big) + r.op(&by, k).scale_real(q);
            t.rec(
                "[iNt, a^(alpha)_k] = (2M b^(alpha)_k + b^(other)_k)/(2M+1)",
                1e-12,
                "operator",
                (&comm(&int, r.op(x, k)) - &rhs).max_abs(),
                &asg,
            );
            let rhs = r.op(x, k).scale_real(-big) - r.op(y, k).scale_real(q);
            t.rec(
                "[iNt, b^(alpha)_k] = -(2M a^(alpha)_k + a^(other)_k)/(2M+1)",
                1e-12,
                "operator",
                (&comm(&int, r.op(&bx, k)) - &rhs).max_abs(),
                &asg,
            );
        }
    }
    let nt = r.single("Nt");
    t.rec("Nt is Hermitian", 1e-13, "operator", (nt - &nt.dagger()).max_abs(), &[]);
    t.rec("Nt annihilates the vacuum", 1e-12, "vacuum", nt.matvec(r.vacuum()).max_abs(), &[]);
    let mut rep = t.report();
    if r.policy() != LambdaPolicy::Auto {
        if let Some(e) = rep.entries.last_mut() {
            *e = e.clone().report_only();
        }
    }
    rep
}

/// `max_k ‖[iÑ′, a′_k] − b′_k‖` and `‖[iÑ′, b′_k] + a′_k‖` under
/// `a′ = a + αb`, `b′ = b − αa`.
pub fn invariance_deviation(r: &Realization, alpha: &[Vec<C64>]) -> f64 {
    let m = r.m();
    let (a, b) = (&r.indexed["a"], &r.indexed["b"]);
    let mut ap = Vec::with_capacity(m);
    let mut bp = Vec::with_capacity(m);
    for k in 0..m {
        let mut x = a[k].clone();
        let mut y = b[k].clone();
        for l in 0..m {
            x.axpy(alpha[k][l], &b[l]);
            y.axpy(-alpha[k][l], &a[l]);
        }
        ap.push(x);
        bp.push(y);
    }
    let rho = 1.0 / (2.0 * (2 * m + 1) as f64);
    let mut nt = ComplexMatrix::zeros(r.dim());
    for k in 0..m {
        nt += &comm(&ap[k].dagger(), &bp[k]);
        nt.axpy(r.constants().lambda, r.single("Id"));
    }
    let int = nt.scale_real(-rho);
    (0..m)
        .map(|k| {
            (&comm(&int, &ap[k]) - &bp[k])
                .max_abs()
                .max((&comm(&int, &bp[k]) + &ap[k]).max_abs())
        })
        .fold(0.0, f64::max)
}

/// Seeded `M×M` mixing matrix with unit max-entry, Hermitian or
/// anti-Hermitian.
pub fn mixing_matrix(m: usize, seed: u64, hermitian: bool) -> Vec<Vec<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<Vec<C64>> = (0..m)
        .map(|_| {
            (0..m)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    let sign = if hermitian { 1.0 } else { -1.0 };
    let mut out: Vec<Vec<C64>> = (0..m)
        .map(|k| (0..m).map(|l| (g[k][l] + g[l][k].conj() * sign) * 0.5).collect())
        .collect();
    let max = out.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max);
    for z in out.iter_mut().flatten() {
        *z /= max;
    }
    out
}

fn scaled(alpha: &[Vec<C64>], eps: f64) -> Vec<Vec<C64>> {
    alpha.iter().map(|row| row.iter().map(|z| z * eps).collect()).collect()
}

/// Second-order invariance of the `iÑ` action under an infinitesimal
/// mixing of `a` and `b`, measured by halving `eps`.
///
/// The gated mixing matrix is Hermitian; the anti-Hermitian choice breaks
/// the action at first order and is reported alongside.
pub fn invariance_check(r: &Realization, eps: f64, seed: u64) -> Result<VerificationReport> {
    if !(0.0..=1e-2).contains(&eps) || eps.is_nan() {
        return Err(Error::Config(format!("eps must lie in [0, 1e-2], got {eps}")));
    }
    let mut rep = VerificationReport::new();
    let herm = mixing_matrix(r.m(), seed, true);
    let d0 = invariance_deviation(r, &scaled(&herm, 0.0));
    rep.push(ReportEntry::operator("invariance at eps = 0", d0, 1e-12));
    if eps == 0.0 {
        return Ok(rep);
    }
    let d1 = invariance_deviation(r, &scaled(&herm, eps));
    let d2 = invariance_deviation(r, &scaled(&herm, eps / 2.0));
    let ratio = d1 / d2;
    let c = d2 / (eps / 2.0).powi(2);
    let mut e = ReportEntry::new(
        format!("halving ratio of the invariance deviation = 4 (eps = {eps:e}, ratio = {ratio:.4})"),
        "scaling",
        (ratio - 4.0).abs(),
        0.5,
    );
    e.worst_assignment.insert("M".into(), r.m());
    rep.push(e);
    rep.push(ReportEntry::new(
        format!("invariance deviation within 2 C eps^2 (C = {c:.4e})"),
        "scaling",
        d1,
        2.0 * c * eps * eps,
    ));
    let anti = mixing_matrix(r.m(), seed, false);
    let a1 = invariance_deviation(r, &scaled(&anti, eps));
    let a2 = invariance_deviation(r, &scaled(&anti, eps / 2.0));
    rep.push(
        ReportEntry::new(
            format!("anti-Hermitian mixing halving ratio (ratio = {:.4})", a1 / a2),
            "scaling",
            (a1 / a2 - 4.0).abs(),
            0.5,
        )
        .report_only(),
    );
    Ok(rep)
}

/// Same-component anticommutation and cross-component commutation of the
/// Grassmann symbols with the fields and with each other.
pub fn grassmann_statistics_check(r: &Realization) -> Result<VerificationReport> {
    if r.sets() == 0 {
        return Err(Error::Config("Grassmann checks need at least one set".into()));
    }
    let mut t = Tally::new();
    let m = r.m();
    let tol = 1e-13;
    let fields: [(&str, &str); 4] = [("a1", "a2"), ("b1", "b2"), ("ad1", "ad2"), ("bd1", "bd2")];
    for s in 0..r.sets() {
        for k in 0..m {
            for l in 0..m {
                let asg = [("s", s + 1), ("k", k + 1), ("l", l + 1)];
                let (x1, x2) = (r.xi("xi1", s, l), r.xi("xi2", s, l));
                for (f1, f2) in fields {
                    let (y1, y2) = (r.op(f1, k), r.op(f2, k));
                    t.rec(
                        "field and Grassmann components, same alpha: anticommute",
                        tol,
                        "operator",
                        acomm(y1, x1).max_abs().max(acomm(y2, x2).max_abs()),
                        &asg,
                    );
                    t.rec(
                        "field and Grassmann components, alpha != beta: commute",
                        tol,
                        "operator",
                        comm(y1, x2).max_abs().max(comm(y2, x1).max_abs()),
                        &asg,
                    );
                }
                for s2 in 0..r.sets() {
                    let asg = [("s", s + 1), ("t", s2 + 1), ("k", k + 1), ("l", l + 1)];
                    let (y1, y2) = (r.xi("xi1", s2, k), r.xi("xi2", s2, k));
                    let (w1, w2) = (r.xi("xid1", s2, k), r.xi("xid2", s2, k));
                    let (z1d, z2d) = (r.xi("xid1", s, l), r.xi("xid2", s, l));
                    let mut pairs = vec![(x1, x2, y1, y2), (z1d, z2d, w1, w2)];
                    if s != s2 {
                        // A conjugate symbol only behaves as Grassmann against other sets.
                        pairs.push((z1d, z2d, y1, y2));
                    }
                    for (z1, z2, y1, y2) in pairs {
                        t.rec(
                            "Grassmann components, same alpha: anticommute",
                            tol,
                            "operator",
                            acomm(z1, y1).max_abs().max(acomm(z2, y2).max_abs()),
                            &asg,
                        );
                        t.rec(
                            "Grassmann components, alpha != beta: commute",
                            tol,
                            "operator",
                            comm(z1, y2).max_abs().max(comm(z2, y1).max_abs()),
                            &asg,
                        );
                    }
                }
            }
        }
        for k in 0..m {
            for l in 0..m {
                for n in 0..m {
                    let asg = [("s", s + 1), ("k", k + 1), ("l", l + 1), ("m", n + 1)];
                    let (xk, xl, xm) = (r.xi("xi", s, k), r.xi("xi", s, l), r.xi("xi", s, n));
                    let d = (&(&(xk * xl) * xm) + &(&(xm * xl) * xk)).max_abs();
                    t.rec("xi_k xi_l xi_m + xi_m xi_l xi_k = 0", tol, "operator", d, &asg);
                }
            }
            let x = r.xi("xi", s, k);
            t.rec(
                "xi_k cubed vanishes",
                0.0,
                "operator",
                (&(x * x) * x).max_abs(),
                &[("s", s + 1), ("k", k + 1)],
            );
        }
    }
    Ok(t.report())
}

/// The vacuum-sector postulates for the Grassmann symbols, evaluated on
/// the full vacuum block; `[Ω, ξ] = 0` as an operator identity.
pub fn vacuum_postulate_check(r: &Realization) -> Result<VerificationReport> {
    if r.sets() == 0 {
        return Err(Error::Config("Grassmann checks need at least one set".into()));
    }
    let mut t = Tally::new();
    let om = r.single("Om");
    let int = r.i_nt();
    let c = r.constants();
    for s in 0..r.sets() {
        for l in 0..r.m() {
            let asg = [("s", s + 1), ("l", l + 1)];
            let x = r.xi("xi", s, l);
            t.rec(
                "({xi_l, Om} - Lam xi_l)|0> = 0",
                1e-12,
                "vacuum",
                r.vacuum_block_max(&(&acomm(x, om) - &x.scale(c.big_lambda))),
                &asg,
            );
            t.rec(
                "({xi_l, iNt} - LamT xi_l)|0> = 0",
                1e-12,
                "vacuum",
                r.vacuum_block_max(&(&acomm(x, &int) - &x.scale(c.lambda_tilde))),
                &asg,
            );
            t.rec("[Om, xi_l] = 0", 1e-13, "operator", comm(om, x).max_abs(), &asg);
        }
    }
    Ok(t.report())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_complex_forms() {
        assert_eq!(parse_complex("2"), Some(C64::new(2.0, 0.0)));
        assert_eq!(parse_complex("-i"), Some(C64::new(0.0, -1.0)));
        assert_eq!(parse_complex("2i"), Some(C64::new(0.0, 2.0)));
        assert_eq!(parse_complex("1.5-2i"), Some(C64::new(1.5, -2.0)));
        assert_eq!(parse_complex("1e-3+1e-2i"), Some(C64::new(1e-3, 1e-2)));
        assert_eq!(parse_complex("x"), None);
        assert_eq!(
            "fixed:0.5".parse::<LambdaPolicy>().unwrap(),
            LambdaPolicy::Fixed(C64::new(0.5, 0.0))
        );
        assert!("bogus".parse::<LambdaPolicy>().is_err());
    }

    #[test]
    fn smallest_realization() {
        let r = build(1, 0, 1, LambdaPolicy::Auto).unwrap();
        assert_eq!(r.dim(), 8);
        let v = r.vacuum();
        assert_eq!(r.generator("a", &[1]).unwrap().matvec(v).max_abs(), 0.0);
        let aad = r.generator("a", &[1]).unwrap() * r.generator("ad", &[1]).unwrap();
        assert!(aad.matvec(v).sub(&v.scale(C64::new(2.0, 0.0))).max_abs() <= 1e-14);
    }

    #[test]
    fn constants_follow_kappa() {
        for kappa in [1i8, -1] {
            let r = build(1, 0, kappa, LambdaPolicy::Auto).unwrap();
            let c = r.constants();
            assert!((c.c - C64::new(0.0, 2.0 * f64::from(kappa))).norm() <= 1e-12);
            assert!((c.p - C64::new(2.0, 0.0)).norm() <= 1e-12);
            assert!((c.big_lambda - c.c / 2.0).norm() == 0.0);
            assert!(c.lambda_tilde.norm() <= 1e-15);
        }
    }

    #[test]
    fn structure_and_klein() {
        for (m, s) in [(1, 1), (2, 0)] {
            let r = build(m, s, 1, LambdaPolicy::Auto).unwrap();
            let rep = structure_check(&r);
            assert!(rep.all_ok(), "{}", rep.to_markdown());
            let rep = klein_check(&r);
            assert!(rep.all_ok(), "{}", rep.to_markdown());
        }
    }

    #[test]
    fn n_tilde_action() {
        for m in [1, 2] {
            let r = build(m, 0, 1, LambdaPolicy::Auto).unwrap();
            let rep = n_tilde_action_check(&r);
            assert!(rep.all_ok(), "{}", rep.to_markdown());
        }
    }

    #[test]
    fn grassmann_statistics() {
        let r = build(1, 2, -1, LambdaPolicy::Auto).unwrap();
        let rep = grassmann_statistics_check(&r).unwrap();
        assert!(rep.all_ok(), "{}", rep.to_markdown());
        let rep = vacuum_postulate_check(&r).unwrap();
        assert!(rep.all_ok(), "{}", rep.to_markdown());
    }

    #[test]
    fn invariance_zero_eps() {
        let r = build(1, 0, 1, LambdaPolicy::Auto).unwrap();
        let rep = invariance_check(&r, 0.0, 1).unwrap();
        assert!(rep.all_ok());
        assert!(invariance_check(&r, 0.5, 1).is_err());
    }

    #[test]
    fn pve_of_identity_is_identity() {
        let r = build(1, 1, 1, LambdaPolicy::Auto).unwrap();
        let p = r.pve(r.single("Id"));
        assert_eq!(p.dim(), 4);
        assert!((&p - &ComplexMatrix::identity(4)).max_abs() <= 1e-15);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(build(0, 0, 1, LambdaPolicy::Auto), Err(Error::Config(msg)) if msg.contains("m must be")));
        assert!(build(1, 0, 2, LambdaPolicy::Auto).is_err());
        assert!(build(2, 3, 1, LambdaPolicy::Auto).is_err());
    }
}
