//! Spin-1 Duffin–Kemmer–Petiau matrices in `d = 2M` Euclidean dimensions,
//! the ε-contraction `ω`, `ζ_μ = i[β_μ, ω]`, and the relations that fail
//! when `β_μ`, `ζ_μ` are identified with the su(2M+1) generators.

use crate::error::{Error, Result};
use crate::kernel::{comm, ComplexMatrix, C64, I, ONE};
use crate::report::{ReportEntry, VerificationReport};

const TOL: f64 = 1e-12;

/// Candidate normalizations of the vector–tensor block.
pub const NORMALIZATIONS: [f64; 3] = [0.5, std::f64::consts::FRAC_1_SQRT_2, 1.0];

#[derive(Clone, Debug)]
pub struct DkpRealization {
    d: usize,
    normalization: f64,
    beta: Vec<ComplexMatrix>,
    omega: ComplexMatrix,
    zeta: Vec<ComplexMatrix>,
}

/// Antisymmetric slot pairs `(ρ, σ)`, `ρ < σ`, in lexicographic order.
fn tensor_slots(d: usize) -> Vec<(usize, usize)> {
    (0..d).flat_map(|r| (r + 1..d).map(move |s| (r, s))).collect()
}

/// `β_μ` with `(β_μ)_{ν,[ρσ]} = (β_μ)_{[ρσ],ν} = n(δ_μρ δ_νσ − δ_μσ δ_νρ)`.
fn beta_ansatz(d: usize, n: f64) -> Vec<ComplexMatrix> {
    let slots = tensor_slots(d);
    let dim = d + slots.len();
    (0..d)
        .map(|mu| {
            let mut b = ComplexMatrix::zeros(dim);
            for nu in 0..d {
                for (j, &(r, s)) in slots.iter().enumerate() {
                    let v = n * (f64::from(u8::from(mu == r && nu == s)) - f64::from(u8::from(mu == s && nu == r)));
                    if v != 0.0 {
                        b.set(nu, d + j, C64::new(v, 0.0));
                        b.set(d + j, nu, C64::new(v, 0.0));
                    }
                }
            }
            b
        })
        .collect()
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// `max |X_μ X_ν X_λ + X_λ X_ν X_μ − δ_μν X_λ − δ_λν X_μ|` over all triples.
pub fn dkp_residual(x: &[ComplexMatrix]) -> f64 {
    let d = x.len();
    let mut worst = 0.0_f64;
    for mu in 0..d {
        for nu in 0..d {
            let mn = &x[mu] * &x[nu];
            for la in 0..d {
                let mut r = &(&mn * &x[la]) + &(&(&x[la] * &x[nu]) * &x[mu]);
                r.axpy(C64::new(-delta(mu, nu), 0.0), &x[la]);
                r.axpy(C64::new(-delta(la, nu), 0.0), &x[mu]);
                worst = worst.max(r.max_abs());
            }
        }
    }
    worst
}

/// Sign of a permutation of `0..n`, by inversion count.
pub fn permutation_sign(p: &[usize]) -> f64 {
    let inversions = (0..p.len())
        .flat_map(|i| (i + 1..p.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| p[i] > p[j])
        .count();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { break };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("a larger element follows the pivot");
        p.swap(i - 1, j);
        p[i..].reverse();
    }
    out
}

/// `(1/(M!)²) ε_{μ1…μd} β_μ1 ⋯ β_μd`, without any phase.
pub fn epsilon_contraction(beta: &[ComplexMatrix]) -> ComplexMatrix {
    let d = beta.len();
    let m = d / 2;
    let norm = crate::kernel::factorial(m).powi(2);
    let mut out = ComplexMatrix::zeros(beta[0].dim());
    for p in permutations(d) {
        let prod = p[1..].iter().fold(beta[p[0]].clone(), |acc, &i| &acc * &beta[i]);
        out.axpy(C64::new(permutation_sign(&p) / norm, 0.0), &prod);
    }
    out
}

/// Builds the realization for `d ∈ {2, 4}`, taking the first normalization
/// under which the DKP algebra holds.
pub fn build_dkp(d: usize) -> Result<DkpRealization> {
    if d != 2 && d != 4 {
        return Err(Error::Config(format!("DKP realization supports d = 2 or 4, got {d}")));
    }
    let (normalization, beta) = NORMALIZATIONS
        .iter()
        .map(|&n| (n, beta_ansatz(d, n)))
        .find(|(_, b)| dkp_residual(b) <= TOL)
        .ok_or_else(|| Error::Structural(format!("no normalization satisfies the DKP algebra at d = {d}")))?;
    let omega = build_omega(&beta);
    let zeta = beta.iter().map(|b| comm(b, &omega).scale(I)).collect();
    Ok(DkpRealization {
        d,
        normalization,
        beta,
        omega,
        zeta,
    })
}

/// The ε-contraction times `i` when `M = d/2` is odd, which makes `ω`
/// Hermitian in every dimension. Each checked relation is invariant under
/// `ω → −ω`, so only the parity of the phase matters.
pub fn build_omega(beta: &[ComplexMatrix]) -> ComplexMatrix {
    let raw = epsilon_contraction(beta);
    if (beta.len() / 2) % 2 == 1 {
        raw.scale(I)
    } else {
        raw
    }
}

impl DkpRealization {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn m(&self) -> usize {
        self.d / 2
    }

    pub fn dim(&self) -> usize {
        self.omega.dim()
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn beta(&self, mu: usize) -> &ComplexMatrix {
        &self.beta[mu]
    }

    pub fn zeta(&self, mu: usize) -> &ComplexMatrix {
        &self.zeta[mu]
    }

    pub fn omega(&self) -> &ComplexMatrix {
        &self.omega
    }

    /// `W = i/(2(2M+1)) Σ_μ [ζ_μ, β_μ]`.
    pub fn w(&self) -> ComplexMatrix {
        let m = self.m() as f64;
        let s = (0..self.d).fold(ComplexMatrix::zeros(self.dim()), |acc, mu| {
            &acc + &comm(&self.zeta[mu], &self.beta[mu])
        });
        s.scale(I / (2.0 * (2.0 * m + 1.0)))
    }
}

fn max_over<const N: usize>(d: usize, f: impl Fn([usize; N]) -> f64) -> f64 {
    let mut worst = 0.0_f64;
    for t in 0..d.pow(N as u32) {
        let mut idx = [0; N];
        let mut r = t;
        for slot in idx.iter_mut().rev() {
            *slot = r % d;
            r /= d;
        }
        worst = worst.max(f(idx));
    }
    worst
}

/// DKP-side relations, the unitary-quantization relations they violate,
/// and the inconsistent trace formula for `ω`.
pub fn inconsistency_report(k: &DkpRealization) -> VerificationReport {
    let d = k.d;
    let (be, ze, om) = (&k.beta, &k.zeta, &k.omega);
    let mut rep = VerificationReport::new();
    let push = |rep: &mut VerificationReport, name: &str, dev: f64| rep.push(ReportEntry::operator(name, dev, TOL));
    let lin = |terms: &[(f64, &ComplexMatrix)]| {
        let mut out = ComplexMatrix::zeros(k.dim());
        for &(c, m) in terms {
            out.axpy(C64::new(c, 0.0), m);
        }
        out
    };

    push(&mut rep, "DKP algebra for beta", dkp_residual(be));
    push(&mut rep, "DKP algebra for zeta", dkp_residual(ze));
    push(&mut rep, "omega is Hermitian", (om - &om.dagger()).max_abs());
    let om2 = om * om;
    push(
        &mut rep,
        "omega squared anticommutes into beta",
        max_over(d, |[m]| (&(&(&om2 * &be[m]) + &(&be[m] * &om2)) - &be[m]).max_abs()),
    );
    push(
        &mut rep,
        "omega beta omega vanishes",
        max_over(d, |[m]| (&(om * &be[m]) * om).max_abs()),
    );
    push(
        &mut rep,
        "zeta with omega gives i beta",
        max_over(d, |[m]| (&comm(&ze[m], om) - &be[m].scale(I)).max_abs()),
    );
    push(
        &mut rep,
        "omega commutes with beta commutators",
        max_over(d, |[m, n]| comm(om, &comm(&be[m], &be[n])).max_abs()),
    );
    push(
        &mut rep,
        "zeta-beta commutator is symmetric",
        max_over(d, |[m, n]| (&comm(&ze[m], &be[n]) - &comm(&ze[n], &be[m])).max_abs()),
    );
    push(
        &mut rep,
        "zeta with beta gives -i omega delta",
        max_over(d, |[m, n]| (&comm(&ze[m], &be[n]) + &om.scale(I * delta(m, n))).max_abs()),
    );
    push(
        &mut rep,
        "beta and zeta commutators agree",
        max_over(d, |[m, n]| (&comm(&be[m], &be[n]) - &comm(&ze[m], &ze[n])).max_abs()),
    );
    push(
        &mut rep,
        "beta triple commutator",
        max_over(d, |[l, m, n]| {
            (&comm(&be[l], &comm(&be[m], &be[n])) - &lin(&[(delta(l, m), &be[n]), (-delta(l, n), &be[m])])).max_abs()
        }),
    );
    push(
        &mut rep,
        "zeta triple commutator",
        max_over(d, |[l, m, n]| {
            (&comm(&ze[l], &comm(&ze[m], &ze[n])) - &lin(&[(delta(l, m), &ze[n]), (-delta(l, n), &ze[m])])).max_abs()
        }),
    );
    push(
        &mut rep,
        "zeta zeta beta triple commutator in the DKP form",
        max_over(d, |[l, m, n]| {
            (&comm(&ze[l], &comm(&ze[m], &be[n])) - &be[l].scale(ONE * delta(m, n))).max_abs()
        }),
    );
    push(
        &mut rep,
        "beta zeta beta triple commutator in the DKP form",
        max_over(d, |[l, m, n]| {
            (&comm(&be[l], &comm(&ze[m], &be[n])) + &ze[l].scale(ONE * delta(m, n))).max_abs()
        }),
    );
    let unitary_zzb = max_over(d, |[l, m, n]| {
        (&comm(&ze[l], &comm(&ze[m], &be[n])) - &lin(&[(2.0 * delta(m, n), &be[l]), (delta(l, n), &be[m]), (delta(l, m), &be[n])]))
            .max_abs()
    });
    rep.push(
        ReportEntry::operator("zeta zeta beta triple commutator in the unitary form", unitary_zzb, TOL)
            .expect_fail(crate::report::DEFAULT_MIN_FAIL),
    );
    let unitary_bzb = max_over(d, |[l, m, n]| {
        (&comm(&be[l], &comm(&ze[m], &be[n])) + &lin(&[(2.0 * delta(m, n), &ze[l]), (delta(l, n), &ze[m]), (delta(l, m), &ze[n])]))
            .max_abs()
    });
    rep.push(
        ReportEntry::operator("beta zeta beta triple commutator in the unitary form", unitary_bzb, TOL)
            .expect_fail(crate::report::DEFAULT_MIN_FAIL),
    );

    let w = k.w();
    let m = k.m() as f64;
    push(
        &mut rep,
        "trace formula gives M/(2M+1) omega",
        (&w - &om.scale_real(m / (2.0 * m + 1.0))).max_abs(),
    );
    rep.push(ReportEntry::operator("trace formula gives omega", (&w - om).max_abs(), TOL).expect_fail(0.1 * om.max_abs()));

    let raw = epsilon_contraction(be);
    let raw2 = &raw * &raw;
    let raw_dev = max_over(d, |[m]| (&(&(&raw2 * &be[m]) + &(&be[m] * &raw2)) - &be[m]).max_abs());
    rep.push(ReportEntry::operator("unphased contraction: omega squared anticommutes into beta", raw_dev, TOL).report_only());
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_and_normalization() {
        let k2 = build_dkp(2).unwrap();
        let k4 = build_dkp(4).unwrap();
        assert_eq!((k2.dim(), k4.dim()), (3, 10));
        assert_eq!(k4.normalization(), 1.0);
        assert!(build_dkp(3).is_err());
    }

    #[test]
    fn permutations_are_complete_and_signed() {
        let ps = permutations(4);
        assert_eq!(ps.len(), 24);
        assert_eq!(ps.iter().map(|p| permutation_sign(p)).sum::<f64>(), 0.0);
        for p in &ps {
            let mut q = p.clone();
            q.swap(0, 1);
            assert_eq!(permutation_sign(&q), -permutation_sign(p));
        }
    }

    #[test]
    fn two_dimensional_contraction_is_a_commutator() {
        let k = build_dkp(2).unwrap();
        let raw = epsilon_contraction(&k.beta);
        assert_eq!((&raw - &comm(k.beta(0), k.beta(1))).max_abs(), 0.0);
    }

    #[test]
    fn beta_cubes_to_itself() {
        let k = build_dkp(4).unwrap();
        for mu in 0..4 {
            let b = k.beta(mu);
            assert!((&(&(b * b) * b) - b).max_abs() < 1e-12);
        }
    }
}
