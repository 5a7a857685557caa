//! Fermion modes on a labeled Jordan–Wigner chain.
//!
//! Mode `i` is tensor factor `i` (slowest-varying first); the optional
//! ancilla qubit is the last, fastest factor. A local state `1` means the
//! mode is occupied, so `σ⁻ = [[0,1],[0,0]]` annihilates and the empty
//! Fock state is basis vector 0.
//!
//! Every single-mode operator, and every product of them, is a partial
//! signed permutation of the occupation basis. [`JwOp`] stores exactly
//! that, so products and canonical-anticommutation tables stay linear in
//! the dimension; [`JwOp::to_dense`] materializes a matrix when needed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{check_cap, ComplexMatrix, ComplexVector, C64, ONE, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sector {
    A1,
    A2,
    G1(usize),
    G2(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mode {
    pub label: String,
    pub sector: Sector,
}

/// Ordered mode list plus an optional trailing ancilla qubit.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeRegistry {
    modes: Vec<Mode>,
    ancilla: bool,
}

impl ModeRegistry {
    pub fn new(ancilla: bool) -> Self {
        ModeRegistry {
            modes: Vec::new(),
            ancilla,
        }
    }

    pub fn push(&mut self, label: impl Into<String>, sector: Sector) -> Result<()> {
        let label = label.into();
        if self.position(&label).is_some() {
            return Err(Error::Config(format!("duplicate mode label `{label}`")));
        }
        self.modes.push(Mode { label, sector });
        Ok(())
    }

    /// Registry for `m` field modes and `sets` Grassmann families: for each
    /// set its G1 then G2 modes, then all A1, then all A2 modes.
    ///
    /// Labels are `G1_s_k`, `G2_s_k`, `A1_k`, `A2_k` with 1-based `s`, `k`.
    pub fn standard(m: usize, sets: usize, ancilla: bool) -> Self {
        let mut reg = Self::new(ancilla);
        for s in 1..=sets {
            for k in 1..=m {
                reg.modes.push(Mode {
                    label: format!("G1_{s}_{k}"),
                    sector: Sector::G1(s),
                });
            }
            for k in 1..=m {
                reg.modes.push(Mode {
                    label: format!("G2_{s}_{k}"),
                    sector: Sector::G2(s),
                });
            }
        }
        for k in 1..=m {
            reg.modes.push(Mode {
                label: format!("A1_{k}"),
                sector: Sector::A1,
            });
        }
        for k in 1..=m {
            reg.modes.push(Mode {
                label: format!("A2_{k}"),
                sector: Sector::A2,
            });
        }
        reg
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn has_ancilla(&self) -> bool {
        self.ancilla
    }

    pub fn dim(&self) -> usize {
        (1usize << self.modes.len()) * if self.ancilla { 2 } else { 1 }
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.label == label)
    }

    pub fn labels_where(&self, pred: impl Fn(&Sector) -> bool) -> Vec<String> {
        self.modes.iter().filter(|m| pred(&m.sector)).map(|m| m.label.clone()).collect()
    }

    /// Bit of the basis index that holds the occupation of mode `i`.
    fn bit(&self, i: usize) -> usize {
        let shift = usize::from(self.ancilla);
        shift + self.modes.len() - 1 - i
    }
}

const NONE: u32 = u32::MAX;

/// A partial signed permutation: column `j` maps to `coeff[j]·|target[j]⟩`,
/// or to zero when `target[j]` is empty.
#[derive(Clone, Debug, PartialEq)]
pub struct JwOp {
    target: Vec<u32>,
    coeff: Vec<C64>,
}

impl JwOp {
    pub fn identity(dim: usize) -> Self {
        JwOp {
            target: (0..dim as u32).collect(),
            coeff: vec![ONE; dim],
        }
    }

    pub fn diagonal(dim: usize, f: impl Fn(usize) -> C64) -> Self {
        JwOp {
            target: (0..dim as u32).collect(),
            coeff: (0..dim).map(f).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    /// Image of basis vector `j`.
    pub fn apply(&self, j: usize) -> Option<(usize, C64)> {
        let t = self.target[j];
        (t != NONE).then(|| (t as usize, self.coeff[j]))
    }

    pub fn mul(&self, rhs: &JwOp) -> JwOp {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in monomial product");
        let mut target = vec![NONE; rhs.dim()];
        let mut coeff = vec![ZERO; rhs.dim()];
        for j in 0..rhs.dim() {
            if let Some((t, c)) = rhs.apply(j) {
                if let Some((u, d)) = self.apply(t) {
                    target[j] = u as u32;
                    coeff[j] = c * d;
                }
            }
        }
        JwOp { target, coeff }
    }

    pub fn scale(&self, z: C64) -> JwOp {
        JwOp {
            target: self.target.clone(),
            coeff: self.coeff.iter().map(|&c| c * z).collect(),
        }
    }

    pub fn dagger(&self) -> JwOp {
        let mut target = vec![NONE; self.dim()];
        let mut coeff = vec![ZERO; self.dim()];
        for j in 0..self.dim() {
            if let Some((t, c)) = self.apply(j) {
                assert_eq!(target[t], NONE, "monomial operator is not injective");
                target[t] = j as u32;
                coeff[t] = c.conj();
            }
        }
        JwOp { target, coeff }
    }

    pub fn to_dense(&self) -> Result<ComplexMatrix> {
        let n = self.dim();
        check_cap(n)?;
        let mut m = ComplexMatrix::zeros(n);
        for j in 0..n {
            if let Some((t, c)) = self.apply(j) {
                m.set(t, j, c);
            }
        }
        Ok(m)
    }
}

/// `max_abs(Σ_t z_t·X_t − e·I)` for monomial terms, column by column.
pub fn monomial_sum_deviation(terms: &[(C64, &JwOp)], e: C64) -> f64 {
    let dim = terms.first().map_or(0, |t| t.1.dim());
    let mut worst = 0.0_f64;
    let mut col: Vec<(usize, C64)> = Vec::with_capacity(terms.len() + 1);
    for j in 0..dim {
        col.clear();
        col.push((j, -e));
        for (z, op) in terms {
            if let Some((t, c)) = op.apply(j) {
                match col.iter_mut().find(|(r, _)| *r == t) {
                    Some(entry) => entry.1 += z * c,
                    None => col.push((t, z * c)),
                }
            }
        }
        for (_, v) in &col {
            worst = worst.max(v.norm());
        }
    }
    worst
}

/// Annihilation operators for every registered mode.
#[derive(Clone, Debug)]
pub struct FermionSet {
    registry: ModeRegistry,
    ops: BTreeMap<String, JwOp>,
}

/// Builds `c_i = Z⊗…⊗Z⊗σ⁻⊗I⊗…⊗I` for every mode.
pub fn build_modes(registry: ModeRegistry) -> Result<FermionSet> {
    if registry.is_empty() {
        return Err(Error::Config("at least one mode is required".into()));
    }
    if registry.len() > 24 {
        return Err(Error::DimCap {
            dim: registry.dim(),
            cap: 1 << 24,
        });
    }
    let dim = registry.dim();
    let mut ops = BTreeMap::new();
    for (i, mode) in registry.modes.iter().enumerate() {
        let bit = registry.bit(i);
        let higher = !((1usize << (bit + 1)) - 1);
        let mut target = vec![NONE; dim];
        let mut coeff = vec![ZERO; dim];
        for j in 0..dim {
            if j >> bit & 1 == 1 {
                target[j] = (j & !(1 << bit)) as u32;
                coeff[j] = if (j & higher).count_ones().is_multiple_of(2) { ONE } else { -ONE };
            }
        }
        ops.insert(mode.label.clone(), JwOp { target, coeff });
    }
    Ok(FermionSet { registry, ops })
}

impl FermionSet {
    pub fn registry(&self) -> &ModeRegistry {
        &self.registry
    }

    pub fn dim(&self) -> usize {
        self.registry.dim()
    }

    pub fn op(&self, label: &str) -> Result<&JwOp> {
        self.ops.get(label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Dense annihilation matrix for `label`.
    pub fn matrix(&self, label: &str) -> Result<ComplexMatrix> {
        self.op(label)?.to_dense()
    }

    fn mask(&self, subset: &[impl AsRef<str>]) -> Result<usize> {
        let mut mask = 0usize;
        for l in subset {
            let i = self
                .registry
                .position(l.as_ref())
                .ok_or_else(|| Error::UnknownLabel(l.as_ref().to_string()))?;
            mask |= 1 << self.registry.bit(i);
        }
        Ok(mask)
    }

    /// `(−1)^{Σ n_i}` over `subset`, as a monomial.
    pub fn parity_op(&self, subset: &[impl AsRef<str>]) -> Result<JwOp> {
        let mask = self.mask(subset)?;
        Ok(JwOp::diagonal(self.dim(), |j| {
            if (j & mask).count_ones() % 2 == 0 {
                ONE
            } else {
                -ONE
            }
        }))
    }

    pub fn parity(&self, subset: &[impl AsRef<str>]) -> Result<ComplexMatrix> {
        self.parity_op(subset)?.to_dense()
    }

    /// Total occupation of `subset`.
    pub fn number(&self, subset: &[impl AsRef<str>]) -> Result<ComplexMatrix> {
        let mask = self.mask(subset)?;
        JwOp::diagonal(self.dim(), |j| C64::new((j & mask).count_ones() as f64, 0.0)).to_dense()
    }

    /// `σx` on the ancilla factor, as a monomial.
    pub fn ancilla_flip_op(&self) -> Result<JwOp> {
        if !self.registry.ancilla {
            return Err(Error::NoAncilla);
        }
        Ok(JwOp {
            target: (0..self.dim() as u32).map(|j| j ^ 1).collect(),
            coeff: vec![ONE; self.dim()],
        })
    }

    pub fn ancilla_flip(&self) -> Result<ComplexMatrix> {
        self.ancilla_flip_op()?.to_dense()
    }

    /// Empty Fock state, tensored with `(1, κ)/√2` on the ancilla if present.
    pub fn vacuum(&self, kappa: i8) -> ComplexVector {
        let mut data = vec![ZERO; self.dim()];
        if self.registry.ancilla {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            data[0] = C64::new(h, 0.0);
            data[1] = C64::new(h * f64::from(kappa.signum()), 0.0);
        } else {
            data[0] = ONE;
        }
        ComplexVector::from_vec(data)
    }

    /// Largest deviation over the full canonical anticommutation table.
    pub fn car_deviation(&self) -> f64 {
        let ops: Vec<&JwOp> = self.ops.values().collect();
        let daggers: Vec<JwOp> = ops.iter().map(|c| c.dagger()).collect();
        let mut worst = 0.0_f64;
        for i in 0..ops.len() {
            for j in i..ops.len() {
                let (p, q) = (ops[i].mul(ops[j]), ops[j].mul(ops[i]));
                worst = worst.max(monomial_sum_deviation(&[(ONE, &p), (ONE, &q)], ZERO));
                for (x, y) in [(i, j), (j, i)] {
                    let p = ops[x].mul(&daggers[y]);
                    let q = daggers[y].mul(ops[x]);
                    let e = if x == y { ONE } else { ZERO };
                    worst = worst.max(monomial_sum_deviation(&[(ONE, &p), (ONE, &q)], e));
                }
            }
        }
        worst
    }

    pub fn labels(&self) -> Vec<String> {
        self.registry.modes.iter().map(|m| m.label.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{acomm, comm, pauli_x, pauli_z, sigma_minus};

    fn chain(n: usize, ancilla: bool) -> FermionSet {
        let mut reg = ModeRegistry::new(ancilla);
        for i in 0..n {
            reg.push(format!("c{i}"), Sector::A1).unwrap();
        }
        build_modes(reg).unwrap()
    }

    #[test]
    fn single_mode_is_sigma_minus() {
        assert_eq!(chain(1, false).matrix("c0").unwrap(), sigma_minus());
    }

    #[test]
    fn two_mode_car() {
        let f = chain(2, false);
        let c1 = f.matrix("c0").unwrap();
        let c2 = f.matrix("c1").unwrap();
        assert!(acomm(&c1, &c2).max_abs() <= 1e-15);
        assert!(acomm(&c1, &c2.dagger()).max_abs() <= 1e-15);
        assert!((&acomm(&c1, &c1.dagger()) - &ComplexMatrix::identity(4)).max_abs() <= 1e-15);
    }

    #[test]
    fn middle_mode_matches_occupation_basis() {
        let f = chain(3, false);
        let c = f.matrix("c1").unwrap();
        // Occupation-basis oracle: bit 1 of the index is mode 1.
        let oracle = ComplexMatrix::from_fn(8, |r, s| {
            let occupied = s >> 1 & 1 == 1;
            if occupied && r == s & !2 {
                if s >> 2 & 1 == 1 {
                    -ONE
                } else {
                    ONE
                }
            } else {
                ZERO
            }
        });
        assert_eq!(c, oracle);
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(c, pauli_z().kron(&sigma_minus()).unwrap().kron(&i2).unwrap());
    }

    #[test]
    fn parity_rules() {
        let f = chain(4, true);
        assert_eq!(f.parity(&[] as &[&str]).unwrap(), ComplexMatrix::identity(32));
        let p = f.parity(&["c1", "c3"]).unwrap();
        for (i, l) in f.labels().iter().enumerate() {
            let c = f.matrix(l).unwrap();
            let dev = if i == 1 || i == 3 {
                acomm(&p, &c).max_abs()
            } else {
                comm(&p, &c).max_abs()
            };
            assert!(dev <= 1e-13);
        }
        let one = f.parity(&["c2"]).unwrap();
        let c2 = f.matrix("c2").unwrap();
        assert_eq!(&(&one * &c2) * &one, -&c2);
        assert!(f.parity(&["zz"]).is_err());
    }

    #[test]
    fn ancilla_flip_properties() {
        let f = chain(2, true);
        let k = f.ancilla_flip().unwrap();
        assert_eq!(&k * &k, ComplexMatrix::identity(8));
        assert_eq!(k, ComplexMatrix::identity(4).kron(&pauli_x()).unwrap());
        for l in f.labels() {
            assert!(comm(&k, &f.matrix(&l).unwrap()).is_zero());
        }
        for kappa in [1, -1] {
            let v = f.vacuum(kappa);
            let kv = k.matvec(&v);
            assert!(kv.sub(&v.scale(C64::new(f64::from(kappa), 0.0))).max_abs() <= 1e-15);
        }
        assert!(matches!(chain(1, false).ancilla_flip(), Err(Error::NoAncilla)));
    }

    #[test]
    fn vacuum_is_annihilated() {
        let f = chain(3, true);
        let v = f.vacuum(1);
        assert!((v.norm() - 1.0).abs() <= 1e-15);
        for l in f.labels() {
            assert!(f.matrix(&l).unwrap().matvec(&v).max_abs() == 0.0);
        }
        let labels = f.labels();
        assert!(f.number(&labels).unwrap().matvec(&v).max_abs() == 0.0);
    }

    #[test]
    fn car_table_monomial_matches_dense() {
        let f = chain(4, true);
        assert_eq!(f.car_deviation(), 0.0);
        let a = f.op("c1").unwrap();
        assert_eq!(a.dagger().to_dense().unwrap(), a.to_dense().unwrap().dagger());
        let b = f.op("c3").unwrap();
        assert_eq!(a.mul(b).to_dense().unwrap(), &a.to_dense().unwrap() * &b.to_dense().unwrap());
    }

    #[test]
    fn standard_registry_order() {
        let reg = ModeRegistry::standard(2, 1, true);
        let labels: Vec<_> = reg.modes().iter().map(|m| m.label.as_str()).collect();
        assert_eq!(labels, ["G1_1_1", "G1_1_2", "G2_1_1", "G2_1_2", "A1_1", "A1_2", "A2_1", "A2_2"]);
        assert_eq!(reg.dim(), 512);
        let mut reg = ModeRegistry::new(false);
        reg.push("x", Sector::A1).unwrap();
        assert!(reg.push("x", Sector::A2).is_err());
    }
}
