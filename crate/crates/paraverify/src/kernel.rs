//! Dense complex linear algebra.
//!
//! Every operator in the crate is a [`ComplexMatrix`]: a square, row-major
//! block of `Complex64`. Products skip exact zeros, which keeps the very
//! sparse Jordan–Wigner operators cheap without a separate sparse format.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::report::{ReportEntry, VerificationReport};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub const DEFAULT_DIM_CAP: usize = 8192;

/// Largest Hilbert-space dimension any constructor may produce.
///
/// Reads `PARAVERIFY_DIM_CAP` when set to a positive integer.
pub fn dim_cap() -> usize {
    std::env::var("PARAVERIFY_DIM_CAP")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&v| v > 0)
        .unwrap_or(DEFAULT_DIM_CAP)
}

pub fn check_cap(dim: usize) -> Result<()> {
    let cap = dim_cap();
    if dim > cap {
        Err(Error::DimCap { dim, cap })
    } else {
        Ok(())
    }
}

#[inline]
fn is_zero(z: &C64) -> bool {
    z.re == 0.0 && z.im == 0.0
}

const PAR_THRESHOLD: usize = 64;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim > 8 {
            return write!(f, "ComplexMatrix({}x{}, max_abs={:.3e})", self.dim, self.dim, self.max_abs());
        }
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|j| {
                    let z = self.get(i, j);
                    format!("{:+.3}{:+.3}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        ComplexMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, ONE)
    }

    pub fn scalar(dim: usize, z: C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = z;
        }
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &z) in entries.iter().enumerate() {
            m.data[i * entries.len() + i] = z;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch(dim * dim, data.len()));
        }
        Ok(ComplexMatrix { dim, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch(dim, r.len()));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(dim, data)
    }

    pub fn random(dim: usize, rng: &mut impl Rng) -> Self {
        Self::from_fn(dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.dim + j] = z;
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, z: C64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * z).collect(),
        }
    }

    pub fn scale_real(&self, r: f64) -> Self {
        self.scale(C64::new(r, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        self.data
            .chunks(self.dim)
            .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|z| !is_zero(z)).count()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(is_zero)
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            Err(Error::DimensionMismatch(self.dim, other.dim))
        } else {
            Ok(())
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    fn zip(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// `self += z * other`
    pub fn axpy(&mut self, z: C64, other: &Self) {
        assert_eq!(self.dim, other.dim, "dimension mismatch in axpy");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += z * b;
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Ok(ComplexMatrix {
            dim: self.dim,
            data: matmul(&self.data, &other.data, self.dim),
        })
    }

    pub fn try_matvec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if v.dim() != self.dim {
            return Err(Error::DimensionMismatch(self.dim, v.dim()));
        }
        let n = self.dim;
        let x = v.data();
        let out = self
            .data
            .chunks(n)
            .map(|row| row.iter().zip(x).filter(|(a, _)| !is_zero(a)).map(|(a, b)| a * b).sum::<C64>())
            .collect();
        Ok(ComplexVector::from_vec(out))
    }

    pub fn matvec(&self, v: &ComplexVector) -> ComplexVector {
        self.try_matvec(v).expect("dimension mismatch in matvec")
    }

    /// Kronecker product with `self` as the slower-varying factor.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let (p, q) = (self.dim, other.dim);
        let n = p.checked_mul(q).ok_or(Error::DimCap {
            dim: usize::MAX,
            cap: dim_cap(),
        })?;
        check_cap(n)?;
        let mut out = Self::zeros(n);
        for i in 0..p {
            for j in 0..p {
                let a = self.data[i * p + j];
                if is_zero(&a) {
                    continue;
                }
                for k in 0..q {
                    let row = (i * q + k) * n + j * q;
                    for l in 0..q {
                        out.data[row + l] = a * other.data[k * q + l];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn powi(&self, k: usize) -> Self {
        let mut out = Self::identity(self.dim);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Matrix exponential by scaling and squaring around a Taylor core.
    pub fn expm(&self) -> Result<Self> {
        if !self.is_finite() {
            return Err(Error::NonFinite("expm input"));
        }
        let norm = self.norm_inf();
        let mut squarings = 0u32;
        if norm > 0.5 {
            squarings = (norm / 0.5).log2().ceil() as u32;
        }
        let scaled = self.scale_real(0.5_f64.powi(squarings as i32));
        let mut sum = Self::identity(self.dim);
        let mut term = Self::identity(self.dim);
        for k in 1..=40 {
            term = (&term * &scaled).scale_real(1.0 / k as f64);
            sum += &term;
            if term.max_abs() <= 1e-18 * sum.max_abs() {
                break;
            }
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        if !sum.is_finite() {
            return Err(Error::NonFinite("expm result"));
        }
        Ok(sum)
    }
}

/// Result of summing a power series in a nilpotent matrix.
#[derive(Clone, Debug)]
pub struct SeriesSum {
    pub value: ComplexMatrix,
    /// Number of nonzero powers `X^0 .. X^{terms-1}` that were summed.
    pub terms: usize,
    /// `max_abs` of the first omitted power.
    pub next_term: f64,
}

/// Sums `Σ_s coeff(s) X^s` until `X^s` vanishes.
///
/// Fails when the matrix is not nilpotent within `max_terms` powers.
pub fn nilpotent_series(x: &ComplexMatrix, coeff: impl Fn(usize) -> C64, max_terms: usize) -> Result<SeriesSum> {
    let mut power = ComplexMatrix::identity(x.dim());
    let mut value = ComplexMatrix::zeros(x.dim());
    for s in 0..max_terms {
        if power.max_abs() <= 1e-13 {
            return Ok(SeriesSum {
                value,
                terms: s,
                next_term: power.max_abs(),
            });
        }
        value.axpy(coeff(s), &power);
        power = &power * x;
    }
    Err(Error::Structural(format!(
        "series exponent is not nilpotent within {max_terms} powers"
    )))
}

/// `exp(X)` for nilpotent `X`, by the terminating Taylor series.
pub fn exp_nilpotent(x: &ComplexMatrix) -> Result<SeriesSum> {
    nilpotent_series(x, |s| ONE / factorial(s), 64)
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn matmul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut c = vec![ZERO; n * n];
    let nnz_b = b.iter().filter(|z| !is_zero(z)).count();
    if nnz_b * 4 < n * n {
        let rows: Vec<Vec<(usize, C64)>> = b
            .chunks(n)
            .map(|r| r.iter().enumerate().filter(|(_, z)| !is_zero(z)).map(|(j, &z)| (j, z)).collect())
            .collect();
        let kernel = |(i, crow): (usize, &mut [C64])| {
            let arow = &a[i * n..(i + 1) * n];
            for (k, aik) in arow.iter().enumerate() {
                if is_zero(aik) {
                    continue;
                }
                for &(j, v) in &rows[k] {
                    crow[j] += aik * v;
                }
            }
        };
        if n >= PAR_THRESHOLD {
            c.par_chunks_mut(n).enumerate().for_each(kernel);
        } else {
            c.chunks_mut(n).enumerate().for_each(kernel);
        }
    } else {
        let kernel = |(i, crow): (usize, &mut [C64])| {
            let arow = &a[i * n..(i + 1) * n];
            for (k, aik) in arow.iter().enumerate() {
                if is_zero(aik) {
                    continue;
                }
                let brow = &b[k * n..(k + 1) * n];
                for (cj, bj) in crow.iter_mut().zip(brow) {
                    *cj += aik * bj;
                }
            }
        };
        if n >= PAR_THRESHOLD {
            c.par_chunks_mut(n).enumerate().for_each(kernel);
        } else {
            c.chunks_mut(n).enumerate().for_each(kernel);
        }
    }
    c
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_mul(rhs).expect("dimension mismatch in matrix product")
    }
}

impl Mul<&ComplexMatrix> for C64 {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        rhs.scale(self)
    }
}

impl Mul<&ComplexMatrix> for f64 {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        rhs.scale_real(self)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_add(rhs).expect("dimension mismatch in matrix sum")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.try_sub(rhs).expect("dimension mismatch in matrix difference")
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(mut self, rhs: ComplexMatrix) -> ComplexMatrix {
        self += &rhs;
        self
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(mut self, rhs: ComplexMatrix) -> ComplexMatrix {
        self -= &rhs;
        self
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.axpy(ONE, rhs);
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        self.axpy(-ONE, rhs);
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector {
    data: Vec<C64>,
}

impl ComplexVector {
    pub fn zeros(dim: usize) -> Self {
        ComplexVector { data: vec![ZERO; dim] }
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.data[i] = ONE;
        v
    }

    pub fn from_vec(data: Vec<C64>) -> Self {
        ComplexVector { data }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize) -> C64 {
        self.data[i]
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    pub fn scale(&self, z: C64) -> Self {
        ComplexVector {
            data: self.data.iter().map(|&x| x * z).collect(),
        }
    }

    /// `⟨self|other⟩`, antilinear in `self`.
    pub fn dot(&self, other: &Self) -> C64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in inner product");
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in vector difference");
        ComplexVector {
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut data = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.data {
            for b in &other.data {
                data.push(a * b);
            }
        }
        ComplexVector { data }
    }
}

pub fn dagger(x: &ComplexMatrix) -> ComplexMatrix {
    x.dagger()
}

pub fn mul(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    x.try_mul(y)
}

pub fn kron(x: &ComplexMatrix, y: &ComplexMatrix) -> Result<ComplexMatrix> {
    x.kron(y)
}

pub fn kron_all(factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let mut out = ComplexMatrix::identity(1);
    for f in factors {
        out = out.kron(f)?;
    }
    Ok(out)
}

/// `XY − YX`
pub fn comm(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    let mut out = x * y;
    out -= &(y * x);
    out
}

/// `XY + YX`
pub fn acomm(x: &ComplexMatrix, y: &ComplexMatrix) -> ComplexMatrix {
    let mut out = x * y;
    out += &(y * x);
    out
}

pub fn max_abs(x: &ComplexMatrix) -> f64 {
    x.max_abs()
}

pub fn matvec(x: &ComplexMatrix, v: &ComplexVector) -> Result<ComplexVector> {
    x.try_matvec(v)
}

pub fn expm(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    x.expm()
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| if i != j { ONE } else { ZERO })
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| match (i, j) {
        (0, 1) => -I,
        (1, 0) => I,
        _ => ZERO,
    })
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::diag(&[ONE, -ONE])
}

/// Lowering matrix `[[0,1],[0,0]]`; annihilates basis state 0.
pub fn sigma_minus() -> ComplexMatrix {
    ComplexMatrix::from_fn(2, |i, j| if i == 0 && j == 1 { ONE } else { ZERO })
}

/// `Σ_k c_k ad_X^k(Y)` with `c_k = 1/k!`, where `ad` is the commutator or
/// the anticommutator with `X`; stops once terms drop below `1e-17`.
fn nested_series(x: &ComplexMatrix, y: &ComplexMatrix, bracket: fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix) -> ComplexMatrix {
    let mut sum = y.clone();
    let mut term = y.clone();
    for k in 1..80 {
        term = bracket(x, &term).scale_real(1.0 / k as f64);
        sum += &term;
        if term.max_abs() < 1e-17 {
            break;
        }
    }
    sum
}

/// Evaluates the nine bracket and exponential identities on seeded random
/// matrices of the given dimension.
pub fn verify_b_identities(dim: usize, seed: u64) -> Result<VerificationReport> {
    if dim < 2 {
        return Err(Error::Config("dimension must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = ComplexMatrix::random(dim, &mut rng);
    let b = ComplexMatrix::random(dim, &mut rng);
    let c = ComplexMatrix::random(dim, &mut rng);
    let unit = |m: ComplexMatrix| {
        let n = m.norm_inf();
        m.scale_real(1.0 / n)
    };
    let x = unit(ComplexMatrix::random(dim, &mut rng));
    let y = unit(ComplexMatrix::random(dim, &mut rng));

    let poly = 1e-10;
    let expo = 1e-9;
    let mut rep = VerificationReport::default();
    let mut add = |name: &str, lhs: ComplexMatrix, rhs: ComplexMatrix, tol: f64| {
        rep.push(ReportEntry::operator(format!("{name} (dim {dim})"), (&lhs - &rhs).max_abs(), tol));
    };

    add(
        "jacobi identity",
        comm(&a, &comm(&b, &c)),
        -&(comm(&b, &comm(&c, &a)) + comm(&c, &comm(&a, &b))),
        poly,
    );
    add(
        "double commutator via anticommutators",
        comm(&a, &comm(&b, &c)),
        acomm(&c, &acomm(&a, &b)) - acomm(&b, &acomm(&a, &c)),
        poly,
    );
    add(
        "anticommutator of a commutator",
        acomm(&a, &comm(&b, &c)),
        acomm(&b, &comm(&c, &a)) - comm(&c, &acomm(&a, &b)),
        poly,
    );
    add(
        "commutator of an anticommutator",
        comm(&a, &acomm(&b, &c)),
        -&(comm(&b, &acomm(&c, &a)) + comm(&c, &acomm(&a, &b))),
        poly,
    );
    let bc = &b * &c;
    add(
        "commutator with a product, first form",
        comm(&a, &bc),
        &acomm(&a, &b) * &c - &b * &acomm(&a, &c),
        poly,
    );
    add(
        "commutator with a product, second form",
        comm(&a, &bc),
        &b * &comm(&a, &c) + &comm(&a, &b) * &c,
        poly,
    );
    add(
        "anticommutator with a product, first form",
        acomm(&a, &bc),
        &acomm(&a, &b) * &c - &b * &comm(&a, &c),
        poly,
    );
    add(
        "anticommutator with a product, second form",
        acomm(&a, &bc),
        &b * &acomm(&a, &c) + &comm(&a, &b) * &c,
        poly,
    );

    let ex = x.expm()?;
    let emx = (-&x).expm()?;
    add("conjugation series", &(&ex * &y) * &emx, nested_series(&x, &y, comm), expo);
    add(
        "two-sided anticommutator series",
        &(&ex * &y) * &ex,
        nested_series(&x, &y, acomm),
        expo,
    );
    let ey = y.expm()?;
    add(
        "exponential of a conjugate",
        &(&ex * &ey) * &emx,
        (&(&ex * &y) * &emx).expm()?,
        expo,
    );
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
        let n = a.dim();
        ComplexMatrix::from_fn(n, |i, j| (0..n).map(|k| a.get(i, k) * b.get(k, j)).sum())
    }

    #[test]
    fn product_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = ComplexMatrix::random(8, &mut rng);
        let b = ComplexMatrix::random(8, &mut rng);
        assert!((&(&a * &b) - &naive(&a, &b)).max_abs() <= 1e-14);
    }

    #[test]
    fn sparse_product_path_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = ComplexMatrix::random(70, &mut rng);
        let b = ComplexMatrix::from_fn(70, |i, j| {
            if (i + 3 * j) % 11 == 0 {
                C64::new(i as f64, -(j as f64))
            } else {
                ZERO
            }
        });
        assert!((&(&a * &b) - &naive(&a, &b)).max_abs() <= 1e-10);
        assert!((&(&b * &a) - &naive(&b, &a)).max_abs() <= 1e-10);
    }

    #[test]
    fn identity_and_nilpotent_products() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(&i2 * &i2, i2);
        let n = sigma_minus();
        assert!((&n * &n).is_zero());
        assert!(mul(&i2, &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn kron_closed_forms() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.kron(&i2).unwrap(), ComplexMatrix::identity(4));
        let z = pauli_z().kron(&i2).unwrap();
        assert_eq!(z, ComplexMatrix::diag(&[ONE, ONE, -ONE, -ONE]));
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m: Vec<_> = (0..4).map(|_| ComplexMatrix::random(2, &mut rng)).collect();
        let lhs = &m[0].kron(&m[1]).unwrap() * &m[2].kron(&m[3]).unwrap();
        let rhs = (&m[0] * &m[2]).kron(&(&m[1] * &m[3])).unwrap();
        assert!((&lhs - &rhs).max_abs() <= 1e-14);
    }

    #[test]
    fn pauli_commutator() {
        let d = &comm(&pauli_x(), &pauli_y()) - &pauli_z().scale(C64::new(0.0, 2.0));
        assert!(d.max_abs() <= 1e-15);
    }

    #[test]
    fn expm_closed_forms() {
        assert_eq!(ComplexMatrix::zeros(3).expm().unwrap(), ComplexMatrix::identity(3));
        let e = ComplexMatrix::diag(&[C64::new(0.0, std::f64::consts::PI), ZERO]).expm().unwrap();
        assert!((&e - &ComplexMatrix::diag(&[-ONE, ONE])).max_abs() <= 1e-13);
    }

    #[test]
    fn expm_inverse_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = ComplexMatrix::random(16, &mut rng);
        let x = x.scale_real(5.0 / x.norm_inf());
        let prod = &x.expm().unwrap() * &(-&x).expm().unwrap();
        assert!((&prod - &ComplexMatrix::identity(16)).max_abs() <= 1e-11);
    }

    #[test]
    fn expm_rejects_non_finite() {
        let x = ComplexMatrix::scalar(2, C64::new(f64::NAN, 0.0));
        assert!(x.expm().is_err());
    }

    #[test]
    fn nilpotent_series_terminates() {
        let s = exp_nilpotent(&sigma_minus()).unwrap();
        assert_eq!(s.terms, 2);
        assert_eq!(s.value, &ComplexMatrix::identity(2) + &sigma_minus());
        assert!(exp_nilpotent(&pauli_x()).is_err());
    }

    #[test]
    fn kron_respects_cap() {
        let big = ComplexMatrix::identity(128);
        assert!(matches!(big.kron(&big), Err(Error::DimCap { .. })));
    }

    #[test]
    fn b_identities_small_dims() {
        for dim in [2, 4] {
            let rep = verify_b_identities(dim, 5).unwrap();
            assert_eq!(rep.entries.len(), 11);
            assert!(rep.all_ok(), "{}", rep.to_markdown());
        }
    }

    #[test]
    fn commuting_diagonals_give_exact_zero() {
        let a = ComplexMatrix::diag(&[ONE, C64::new(2.0, 1.0)]);
        let b = ComplexMatrix::diag(&[C64::new(-3.0, 0.5), I]);
        let c = ComplexMatrix::diag(&[C64::new(0.25, 0.0), -ONE]);
        let lhs = comm(&a, &comm(&b, &c));
        let rhs = acomm(&c, &acomm(&a, &b)) - acomm(&b, &acomm(&a, &c));
        assert_eq!((&lhs - &rhs).max_abs(), 0.0);
    }
}
