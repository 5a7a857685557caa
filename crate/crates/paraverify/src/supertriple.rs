//! The field operators as a Lie-supertriple system: a grade-0 superspace
//! spanned by `a_k, a_k†, b_k, b_k†`, the map `P` exchanging the two
//! fields, a symmetric bilinear form, and the triple product built from
//! them, compared against matrix double commutators.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use serde::Serialize;

use crate::govorkov::Realization;
use crate::kernel::{comm, ComplexMatrix, C64};
use crate::report::{ReportEntry, VerificationReport};

const TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Kind {
    A,
    Ad,
    B,
    Bd,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::A, Kind::Ad, Kind::B, Kind::Bd];

    /// Generator name in a [`Realization`].
    pub fn name(self) -> &'static str {
        match self {
            Kind::A => "a",
            Kind::Ad => "ad",
            Kind::B => "b",
            Kind::Bd => "bd",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct GeneratorTag {
    pub kind: Kind,
    /// 1-based mode index.
    pub index: usize,
}

impl GeneratorTag {
    pub fn new(kind: Kind, index: usize) -> Self {
        GeneratorTag { kind, index }
    }

    /// Every generator is even.
    pub fn grade(self) -> u8 {
        0
    }

    pub fn all(m: usize) -> Vec<GeneratorTag> {
        Kind::ALL
            .iter()
            .flat_map(|&k| (1..=m).map(move |i| GeneratorTag::new(k, i)))
            .collect()
    }
}

impl fmt::Display for GeneratorTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.kind.name(), self.index)
    }
}

/// Formal linear combination of generators with exact coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Combination(BTreeMap<GeneratorTag, Rational64>);

impl Combination {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn term(c: impl Into<Rational64>, t: GeneratorTag) -> Self {
        let mut out = Self::zero();
        out.add(c.into(), t);
        out
    }

    pub fn add(&mut self, c: Rational64, t: GeneratorTag) {
        if c == Rational64::from(0) {
            return;
        }
        let e = self.0.entry(t).or_insert_with(|| Rational64::from(0));
        *e += c;
        if *e == Rational64::from(0) {
            self.0.remove(&t);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GeneratorTag, &Rational64)> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// The combination as an operator in `r`.
    pub fn realize(&self, r: &Realization) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(r.dim());
        for (t, c) in &self.0 {
            let g = r.generator(t.kind.name(), &[t.index]).expect("generator indices are within 1..M");
            out.axpy(C64::new(*c.numer() as f64 / *c.denom() as f64, 0.0), g);
        }
        out
    }
}

impl fmt::Display for Combination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("0");
        }
        for (n, (t, c)) in self.0.iter().enumerate() {
            let neg = *c < Rational64::from(0);
            match (n, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let a = if neg { -*c } else { *c };
            if a != Rational64::from(1) {
                write!(f, "{a}*")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// `P a = b`, `P b = −a`, `P a† = b†`, `P b† = −a†`.
pub fn p_map(x: GeneratorTag) -> (Rational64, GeneratorTag) {
    let (s, k): (i64, Kind) = match x.kind {
        Kind::A => (1, Kind::B),
        Kind::B => (-1, Kind::A),
        Kind::Ad => (1, Kind::Bd),
        Kind::Bd => (-1, Kind::Ad),
    };
    (Rational64::from(s), GeneratorTag::new(k, x.index))
}

/// Symmetric bilinear form on the generators; pairs absent from the table
/// are zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearFormTable {
    entries: BTreeMap<(GeneratorTag, GeneratorTag), Rational64>,
}

impl BilinearFormTable {
    /// `⟨x|y⟩ = v·δ_km` for `(x, y)` = `(a_k†, a_m)` and `(b_k†, b_m)`,
    /// in both orders.
    fn paired(m: usize, a_value: i64, b_value: Option<i64>) -> Self {
        let mut entries = BTreeMap::new();
        for k in 1..=m {
            let mut put = |x: Kind, y: Kind, v: i64| {
                let (x, y) = (GeneratorTag::new(x, k), GeneratorTag::new(y, k));
                entries.insert((x, y), Rational64::from(v));
                entries.insert((y, x), Rational64::from(v));
            };
            put(Kind::Ad, Kind::A, a_value);
            if let Some(v) = b_value {
                put(Kind::Bd, Kind::B, v);
            }
        }
        BilinearFormTable { entries }
    }

    /// The form that turns the triple product into the two-field relations:
    /// `⟨a_k†|a_m⟩ = ⟨b_k†|b_m⟩ = −2δ_km`.
    pub fn two_field(m: usize) -> Self {
        Self::paired(m, -2, Some(-2))
    }

    /// The single-field form `⟨a_k†|a_m⟩ = δ_km`, used with `λ = 2`.
    pub fn single_field(m: usize) -> Self {
        Self::paired(m, 1, Some(1))
    }

    pub fn get(&self, x: GeneratorTag, y: GeneratorTag) -> Rational64 {
        self.entries.get(&(x, y)).copied().unwrap_or_else(|| Rational64::from(0))
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (&(GeneratorTag, GeneratorTag), &Rational64)> {
        self.entries.iter()
    }

    fn with_p(&self, x: GeneratorTag, y: GeneratorTag) -> Rational64 {
        let (s, py) = p_map(y);
        s * self.get(x, py)
    }
}

/// `P² = λ` for the exchange map.
pub const LAMBDA: i64 = -1;

/// `[x,y,z] = ⟨y|Pz⟩Px − ⟨x|Pz⟩Py − 2⟨x|Py⟩Pz + λ⟨y|z⟩x − λ⟨x|z⟩y`,
/// with every grade sign equal to `+1`.
pub fn triple_product(form: &BilinearFormTable, x: GeneratorTag, y: GeneratorTag, z: GeneratorTag) -> Combination {
    let lam = Rational64::from(LAMBDA);
    let mut out = Combination::zero();
    let mut add_p = |c: Rational64, t: GeneratorTag| {
        let (s, pt) = p_map(t);
        out.add(c * s, pt);
    };
    add_p(form.with_p(y, z), x);
    add_p(-form.with_p(x, z), y);
    add_p(Rational64::from(-2) * form.with_p(x, y), z);
    out.add(lam * form.get(y, z), x);
    out.add(-lam * form.get(x, z), y);
    out
}

/// `[x,y,z] = λ(⟨y|z⟩x − ⟨x|z⟩y)`, the last two terms of the full product.
pub fn reduced_product(form: &BilinearFormTable, lambda: i64, x: GeneratorTag, y: GeneratorTag, z: GeneratorTag) -> Combination {
    let lam = Rational64::from(lambda);
    let mut out = Combination::zero();
    out.add(lam * form.get(y, z), x);
    out.add(-lam * form.get(x, z), y);
    out
}

/// `λ(⟨y|z⟩x − λ⟨x|z⟩y)`, with `λ` applied twice to the second term.
pub fn reduced_product_doubled(form: &BilinearFormTable, lambda: i64, x: GeneratorTag, y: GeneratorTag, z: GeneratorTag) -> Combination {
    let lam = Rational64::from(lambda);
    let mut out = Combination::zero();
    out.add(lam * form.get(y, z), x);
    out.add(-lam * lam * form.get(x, z), y);
    out
}

/// Kind patterns `(x, y, z)` whose products are compared with the matrix
/// double commutators `[[x, y], z]`.
pub const LISTED_PATTERNS: [(Kind, Kind, Kind); 4] = [
    (Kind::Ad, Kind::A, Kind::B),
    (Kind::B, Kind::Ad, Kind::A),
    (Kind::A, Kind::B, Kind::Ad),
    (Kind::Ad, Kind::A, Kind::A),
];

fn delta(i: usize, j: usize) -> i64 {
    i64::from(i == j)
}

/// Closed-form result of listed pattern `pattern`; `i`, `j`, `k` are the
/// indices of `x`, `y`, `z`.
pub fn expected_listed(pattern: usize, i: usize, j: usize, k: usize) -> Combination {
    let t = GeneratorTag::new;
    let mut out = Combination::zero();
    match pattern {
        // [a_k†, a_l, b_m] = −2δ_km b_l
        0 => out.add(Rational64::from(-2 * delta(i, k)), t(Kind::B, j)),
        // [b_m, a_k†, a_l] = 4δ_mk b_l + 2δ_kl b_m
        1 => {
            out.add(Rational64::from(4 * delta(i, j)), t(Kind::B, k));
            out.add(Rational64::from(2 * delta(j, k)), t(Kind::B, i));
        }
        // [a_l, b_m, a_k†] = −2δ_kl b_m − 2δ_km b_l
        2 => {
            out.add(Rational64::from(-2 * delta(k, i)), t(Kind::B, j));
            out.add(Rational64::from(-2 * delta(k, j)), t(Kind::B, i));
        }
        // [a_k†, a_l, a_m] = −2δ_km a_l
        3 => out.add(Rational64::from(-2 * delta(i, k)), t(Kind::A, j)),
        _ => panic!("pattern {pattern} is not listed"),
    }
    out
}

fn triples(m: usize) -> impl Iterator<Item = (usize, usize, usize)> {
    (1..=m).flat_map(move |i| (1..=m).flat_map(move |j| (1..=m).map(move |k| (i, j, k))))
}

fn pattern_name(p: (Kind, Kind, Kind)) -> String {
    format!("{},{},{}", p.0.name(), p.1.name(), p.2.name())
}

/// Exact algebraic checks of the form, the map and the listed products.
pub fn symbolic_checks(m: usize) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let form = BilinearFormTable::two_field(m);
    let tags = GeneratorTag::all(m);
    let bool_entry = |name: &str, ok: bool| ReportEntry::operator(name, if ok { 0.0 } else { 1.0 }, 0.0);

    let p_squared = tags.iter().all(|&x| {
        let (s1, px) = p_map(x);
        let (s2, ppx) = p_map(px);
        ppx == x && s1 * s2 == Rational64::from(LAMBDA)
    });
    rep.push(bool_entry("P squared is lambda = -1", p_squared));
    let symmetric = tags.iter().all(|&x| tags.iter().all(|&y| form.get(x, y) == form.get(y, x)));
    rep.push(bool_entry("bilinear form is symmetric", symmetric));
    let skew = tags.iter().all(|&x| {
        tags.iter().all(|&y| {
            let (sx, px) = p_map(x);
            form.with_p(x, y) + sx * form.get(px, y) == Rational64::from(0)
        })
    });
    rep.push(bool_entry("P is skew with respect to the form", skew));
    let graded = tags.iter().all(|t| t.grade() == 0);
    rep.push(bool_entry("all generators are even", graded));

    for (n, &(kx, ky, kz)) in LISTED_PATTERNS.iter().enumerate() {
        let ok = triples(m).all(|(i, j, k)| {
            let got = triple_product(&form, GeneratorTag::new(kx, i), GeneratorTag::new(ky, j), GeneratorTag::new(kz, k));
            got == expected_listed(n, i, j, k)
        });
        rep.push(bool_entry(
            &format!("closed form of the {} product", pattern_name((kx, ky, kz))),
            ok,
        ));
    }
    rep
}

fn max_dev(
    r: &Realization,
    pattern: (Kind, Kind, Kind),
    product: impl Fn(GeneratorTag, GeneratorTag, GeneratorTag) -> Combination,
) -> (f64, BTreeMap<String, usize>) {
    let mut worst = (f64::NEG_INFINITY, BTreeMap::new());
    for (i, j, k) in triples(r.m()) {
        let (x, y, z) = (
            GeneratorTag::new(pattern.0, i),
            GeneratorTag::new(pattern.1, j),
            GeneratorTag::new(pattern.2, k),
        );
        let g = |t: GeneratorTag| r.generator(t.kind.name(), &[t.index]).expect("generator indices are within 1..M");
        let lhs = comm(&comm(g(x), g(y)), g(z));
        let d = (&lhs - &product(x, y, z).realize(r)).max_abs();
        if d > worst.0 || d.is_nan() {
            worst = (d, [("i", i), ("j", j), ("k", k)].iter().map(|&(n, v)| (n.to_string(), v)).collect());
        }
    }
    worst
}

/// Compares the triple products with `[[x, y], z]` in the realization: the
/// listed patterns are gated, every other pattern is reported.
pub fn check_against_matrices(r: &Realization) -> VerificationReport {
    let m = r.m();
    let form = BilinearFormTable::two_field(m);
    let single = BilinearFormTable::single_field(m);
    let mut rep = symbolic_checks(m);

    for &p in &LISTED_PATTERNS {
        let (d, at) = max_dev(r, p, |x, y, z| triple_product(&form, x, y, z));
        rep.push(
            ReportEntry::operator(format!("triple product {} matches the double commutator", pattern_name(p)), d, TOL).with_assignment(at),
        );
    }

    let (d, at) = max_dev(r, (Kind::Ad, Kind::A, Kind::A), |x, y, z| reduced_product(&single, 2, x, y, z));
    rep.push(ReportEntry::operator("single-field product with lambda = 2 on ad,a,a", d, TOL).with_assignment(at));
    let (d, at) = max_dev(r, (Kind::B, Kind::Ad, Kind::A), |x, y, z| reduced_product(&single, 2, x, y, z));
    rep.push(
        ReportEntry::operator("single-field product with lambda = 2 on b,ad,a", d, TOL)
            .with_assignment(at)
            .expect_fail(crate::report::DEFAULT_MIN_FAIL),
    );
    let (d, at) = max_dev(r, (Kind::Ad, Kind::A, Kind::A), |x, y, z| {
        reduced_product_doubled(&single, 2, x, y, z)
    });
    rep.push(
        ReportEntry::operator("single-field product with lambda applied twice on ad,a,a", d, TOL)
            .with_assignment(at)
            .report_only(),
    );

    for &kx in &Kind::ALL {
        for &ky in &Kind::ALL {
            for &kz in &Kind::ALL {
                let p = (kx, ky, kz);
                if LISTED_PATTERNS.contains(&p) {
                    continue;
                }
                let (d, at) = max_dev(r, p, |x, y, z| triple_product(&form, x, y, z));
                rep.push(
                    ReportEntry::operator(format!("scan {}", pattern_name(p)), d, TOL)
                        .with_assignment(at)
                        .report_only(),
                );
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(k: Kind, i: usize) -> GeneratorTag {
        GeneratorTag::new(k, i)
    }

    #[test]
    fn p_map_examples() {
        assert_eq!(p_map(t(Kind::A, 1)), (Rational64::from(1), t(Kind::B, 1)));
        assert_eq!(p_map(t(Kind::Bd, 2)), (Rational64::from(-1), t(Kind::Ad, 2)));
    }

    #[test]
    fn form_table_has_only_paired_entries() {
        let f = BilinearFormTable::two_field(2);
        assert_eq!(f.nonzero().count(), 8);
        assert_eq!(f.get(t(Kind::Ad, 1), t(Kind::A, 2)), Rational64::from(0));
        assert_eq!(f.get(t(Kind::B, 2), t(Kind::Bd, 2)), Rational64::from(-2));
    }

    #[test]
    fn combination_display() {
        let mut c = Combination::term(4, t(Kind::B, 1));
        c.add(Rational64::from(2), t(Kind::B, 2));
        assert_eq!(c.to_string(), "4*b(1) + 2*b(2)");
        c.add(Rational64::from(-4), t(Kind::B, 1));
        assert_eq!(c.to_string(), "2*b(2)");
    }

    #[test]
    fn symbolic_suite_passes() {
        for m in 1..=3 {
            assert!(symbolic_checks(m).all_ok());
        }
    }
}
