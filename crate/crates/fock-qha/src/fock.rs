//! Truncated Fock-space foundation: multi-indices, the normalized monomial
//! basis, reproducing kernels and the parity operator.
//!
//! The ambient space is the Fock space of entire functions on C^n that are
//! square integrable against `e^{-pi |z|^2} dm(z)`. The monomials
//! `e_m(z) = sqrt(pi^m / m!) z^m` form an orthonormal basis; everything in
//! this crate lives in the span of the `e_m` with total degree `|m| <= K`.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};

/// Multi-index `m` in N_0^n addressing the basis monomial `e_m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    entries: Vec<usize>,
}

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        MultiIndex { entries }
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Total degree `|m|`.
    pub fn degree(&self) -> usize {
        self.entries.iter().sum()
    }

    /// Graded lexicographic order: by total degree first, then
    /// lexicographically on the entry tuple.
    pub fn graded_lex_cmp(&self, other: &MultiIndex) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.entries.cmp(&other.entries))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Sign of the parity operator `(Uf)(z) = f(-z)` on the basis vector `e_m`,
/// i.e. `(-1)^{|m|}`.
pub fn parity_sign(m: &MultiIndex) -> i32 {
    if m.degree().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Enumerate all multi-indices with `|m| <= K` in `n` variables in graded
/// lexicographic order (lexicographic tie-break inside each degree).
pub fn enumerate_indices(n: usize, k_max: usize) -> Result<Vec<MultiIndex>> {
    if n == 0 {
        return Err(FockError::InvalidArgument(
            "complex dimension n must be >= 1".into(),
        ));
    }
    let mut out = Vec::with_capacity(binomial(k_max + n, n));
    let mut scratch = vec![0usize; n];
    for degree in 0..=k_max {
        compositions(degree, 0, &mut scratch, &mut out);
    }
    Ok(out)
}

/// Append, in lexicographic order, every way of writing `remaining` as the
/// sum of the entries `scratch[pos..]`.
fn compositions(remaining: usize, pos: usize, scratch: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
    if pos + 1 == scratch.len() {
        scratch[pos] = remaining;
        out.push(MultiIndex::new(scratch.clone()));
        return;
    }
    for first in 0..=remaining {
        scratch[pos] = first;
        compositions(remaining - first, pos + 1, scratch, out);
    }
}

fn binomial(top: usize, bottom: usize) -> usize {
    let bottom = bottom.min(top - bottom);
    let mut acc: u128 = 1;
    for i in 0..bottom {
        acc = acc * (top - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

struct TruncationData {
    n: usize,
    k_max: usize,
    indices: Vec<MultiIndex>,
    degrees: Vec<usize>,
    /// ln(m!) for m = 0..=k_max, accumulated as a running sum of logs.
    ln_factorial: Vec<f64>,
}

/// A fixed finite-dimensional truncation of the Fock space: all basis
/// monomials of total degree at most `K`, in graded lexicographic order.
///
/// Cheap to clone (shared internally); immutable after construction.
#[derive(Clone)]
pub struct BasisTruncation {
    data: Arc<TruncationData>,
}

impl fmt::Debug for BasisTruncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BasisTruncation")
            .field("n", &self.n())
            .field("k_max", &self.k_max())
            .field("dim", &self.dim())
            .finish()
    }
}

impl PartialEq for BasisTruncation {
    fn eq(&self, other: &Self) -> bool {
        self.n() == other.n() && self.k_max() == other.k_max()
    }
}

impl BasisTruncation {
    pub fn new(n: usize, k_max: usize) -> Result<Self> {
        let indices = enumerate_indices(n, k_max)?;
        debug_assert_eq!(indices.len(), binomial(k_max + n, n));
        let degrees = indices.iter().map(|m| m.degree()).collect();
        let mut ln_factorial = Vec::with_capacity(k_max + 1);
        let mut acc = 0.0f64;
        ln_factorial.push(0.0);
        for j in 1..=k_max {
            acc += (j as f64).ln();
            ln_factorial.push(acc);
        }
        Ok(BasisTruncation {
            data: Arc::new(TruncationData {
                n,
                k_max,
                indices,
                degrees,
                ln_factorial,
            }),
        })
    }

    /// Complex dimension of the underlying space C^n.
    pub fn n(&self) -> usize {
        self.data.n
    }

    /// Maximum total degree retained.
    pub fn k_max(&self) -> usize {
        self.data.k_max
    }

    /// Dimension `D = binomial(K + n, n)` of the truncated space.
    pub fn dim(&self) -> usize {
        self.data.indices.len()
    }

    /// All retained multi-indices in graded lexicographic order.
    pub fn indices(&self) -> &[MultiIndex] {
        &self.data.indices
    }

    /// Total degree of the multi-index at the given basis position.
    pub fn degree_at(&self, position: usize) -> usize {
        self.data.degrees[position]
    }

    /// Position of a multi-index in the fixed basis order, if retained.
    pub fn index_of(&self, m: &MultiIndex) -> Option<usize> {
        self.data
            .indices
            .binary_search_by(|probe| probe.graded_lex_cmp(m))
            .ok()
    }

    /// ln(m!) lookup for single-coordinate degrees up to `K`.
    pub fn ln_factorial(&self, m: usize) -> f64 {
        self.data.ln_factorial[m]
    }

    pub(crate) fn assert_same(&self, other: &BasisTruncation) -> Result<()> {
        if self != other {
            return Err(FockError::TruncationMismatch {
                n_left: self.n(),
                k_left: self.k_max(),
                n_right: other.n(),
                k_right: other.k_max(),
            });
        }
        Ok(())
    }

    /// Values of all retained basis monomials at `z`, in basis order.
    ///
    /// Built from per-coordinate recurrences
    /// `v_{p+1} = v_p * z_j * sqrt(pi / (p+1))`, which keeps every factor
    /// `sqrt(pi^p / p!) z^p` in range for degrees up to a few hundred.
    pub fn monomial_values(&self, z: &[C64]) -> DVector<C64> {
        assert_eq!(z.len(), self.n(), "point dimension mismatch");
        let k = self.k_max();
        // tables[j][p] = sqrt(pi^p/p!) z_j^p
        let mut tables: Vec<Vec<C64>> = Vec::with_capacity(self.n());
        for &zj in z {
            let mut col = Vec::with_capacity(k + 1);
            let mut v = C64::new(1.0, 0.0);
            col.push(v);
            for p in 0..k {
                v *= zj * (std::f64::consts::PI / (p as f64 + 1.0)).sqrt();
                col.push(v);
            }
            tables.push(col);
        }
        DVector::from_iterator(
            self.dim(),
            self.indices().iter().map(|m| {
                let mut prod = C64::new(1.0, 0.0);
                for (j, &mj) in m.entries().iter().enumerate() {
                    prod *= tables[j][mj];
                }
                prod
            }),
        )
    }
}

/// Value of the normalized basis monomial `e_m(z) = prod_j
/// sqrt(pi^{m_j}/m_j!) z_j^{m_j}`.
///
/// Moduli are accumulated as running logarithms and exponentiated once, so
/// the value stays representable for degrees up to a few hundred.
pub fn monomial_value(m: &MultiIndex, z: &[C64]) -> C64 {
    assert_eq!(m.len(), z.len(), "point dimension mismatch");
    let mut log_mod = 0.0f64;
    let mut phase = 0.0f64;
    for (&mj, &zj) in m.entries().iter().zip(z) {
        if mj == 0 {
            continue;
        }
        let r = zj.norm();
        if r == 0.0 {
            return C64::new(0.0, 0.0);
        }
        log_mod += 0.5 * (mj as f64 * std::f64::consts::PI.ln() - ln_factorial(mj))
            + mj as f64 * r.ln();
        phase += mj as f64 * zj.arg();
    }
    C64::from_polar(log_mod.exp(), phase)
}

fn ln_factorial(m: usize) -> f64 {
    let mut acc = 0.0;
    for j in 2..=m {
        acc += (j as f64).ln();
    }
    acc
}

/// A vector in the truncated space, stored as coefficients against the
/// orthonormal basis `{e_m}` in the fixed order of the truncation.
#[derive(Debug, Clone)]
pub struct FockVector {
    pub coeffs: DVector<C64>,
    pub truncation: BasisTruncation,
}

impl FockVector {
    pub fn new(coeffs: DVector<C64>, truncation: BasisTruncation) -> Self {
        assert_eq!(coeffs.len(), truncation.dim());
        FockVector { coeffs, truncation }
    }

    /// Squared norm, i.e. the Parseval sum of squared coefficient moduli.
    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &FockVector) -> C64 {
        self.coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    /// Apply the parity operator `U e_m = (-1)^{|m|} e_m` in place.
    pub fn apply_parity(&mut self) {
        for (pos, c) in self.coeffs.iter_mut().enumerate() {
            if self.truncation.data.degrees[pos] % 2 == 1 {
                *c = -*c;
            }
        }
    }
}

/// Coefficients of the truncated normalized reproducing kernel `k_z`.
///
/// The coefficient at `m` is
/// `e^{-pi |z|^2 / 2} * prod_j sqrt(pi^{m_j}/m_j!) conj(z_j)^{m_j}`.
/// The returned vector has norm at most 1; the deficiency
/// `1 - ||.||^2` is the truncation leakage of `k_z`.
pub fn kernel_coefficients(z: &[C64], trunc: &BasisTruncation) -> FockVector {
    assert_eq!(z.len(), trunc.n(), "point dimension mismatch");
    let norm_sq: f64 = z.iter().map(|zj| zj.norm_sqr()).sum();
    let damp = (-0.5 * std::f64::consts::PI * norm_sq).exp();
    let zbar: Vec<C64> = z.iter().map(|zj| zj.conj()).collect();
    let mut coeffs = trunc.monomial_values(&zbar);
    coeffs *= C64::new(damp, 0.0);
    FockVector::new(coeffs, trunc.clone())
}

/// Truncation leakage `1 - ||P_D k_z||^2` of the normalized kernel at `z`.
pub fn kernel_leakage(z: &[C64], trunc: &BasisTruncation) -> f64 {
    (1.0 - kernel_coefficients(z, trunc).norm_sq()).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn enumerate_small_cases() {
        let idx = enumerate_indices(1, 2).unwrap();
        assert_eq!(
            idx,
            vec![
                MultiIndex::new(vec![0]),
                MultiIndex::new(vec![1]),
                MultiIndex::new(vec![2])
            ]
        );

        let idx = enumerate_indices(2, 1).unwrap();
        assert_eq!(
            idx,
            vec![
                MultiIndex::new(vec![0, 0]),
                MultiIndex::new(vec![0, 1]),
                MultiIndex::new(vec![1, 0])
            ]
        );

        // |m| <= 3 in two variables: C(5,2) = 10 indices.
        assert_eq!(enumerate_indices(2, 3).unwrap().len(), 10);
    }

    #[test]
    fn enumerate_rejects_zero_dimension() {
        assert!(enumerate_indices(0, 3).is_err());
    }

    #[test]
    fn truncation_counts_and_order() {
        let tr = BasisTruncation::new(3, 4).unwrap();
        // C(7,3) = 35
        assert_eq!(tr.dim(), 35);
        assert_eq!(tr.indices()[0], MultiIndex::new(vec![0, 0, 0]));
        for w in tr.indices().windows(2) {
            assert_eq!(w[0].graded_lex_cmp(&w[1]), Ordering::Less);
        }
        for (pos, m) in tr.indices().iter().enumerate() {
            assert_eq!(tr.index_of(m), Some(pos));
        }
        assert_eq!(tr.index_of(&MultiIndex::new(vec![5, 0, 0])), None);
    }

    #[test]
    fn monomial_values_match_formula() {
        // e_0 = 1 everywhere
        let m0 = MultiIndex::new(vec![0]);
        assert_eq!(monomial_value(&m0, &[c(3.0, -2.0)]), c(1.0, 0.0));

        // e_1(1) = sqrt(pi)
        let m1 = MultiIndex::new(vec![1]);
        let v = monomial_value(&m1, &[c(1.0, 0.0)]);
        assert!((v.re - std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!(v.im.abs() < 1e-14);

        // e_2(i) = sqrt(pi^2/2) i^2 = -pi/sqrt(2)
        let m2 = MultiIndex::new(vec![2]);
        let v = monomial_value(&m2, &[c(0.0, 1.0)]);
        let expected = -std::f64::consts::PI / 2.0f64.sqrt();
        assert!((v.re - expected).abs() < 1e-12, "{v}");
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn monomial_table_agrees_with_log_path() {
        let tr = BasisTruncation::new(2, 7).unwrap();
        let z = [c(0.7, -0.3), c(-1.2, 0.5)];
        let table = tr.monomial_values(&z);
        for (pos, m) in tr.indices().iter().enumerate() {
            let direct = monomial_value(m, &z);
            assert!((table[pos] - direct).norm() < 1e-12 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn parity_signs() {
        assert_eq!(parity_sign(&MultiIndex::new(vec![0, 0])), 1);
        assert_eq!(parity_sign(&MultiIndex::new(vec![3])), -1);
        assert_eq!(parity_sign(&MultiIndex::new(vec![1, 2])), -1);
    }

    #[test]
    fn kernel_at_origin_is_ground_state() {
        let tr = BasisTruncation::new(1, 6).unwrap();
        let kv = kernel_coefficients(&[c(0.0, 0.0)], &tr);
        assert_eq!(kv.coeffs[0], c(1.0, 0.0));
        for i in 1..kv.coeffs.len() {
            assert_eq!(kv.coeffs[i], c(0.0, 0.0));
        }
        assert!(kernel_leakage(&[c(0.0, 0.0)], &tr) == 0.0);
    }

    #[test]
    fn kernel_partial_mass_matches_exponential_tail() {
        // || P_D k_1 ||^2 = e^{-pi} sum_{j<=K} pi^j/j!
        let k_max = 9;
        let tr = BasisTruncation::new(1, k_max).unwrap();
        let kv = kernel_coefficients(&[c(1.0, 0.0)], &tr);
        let mut partial = 0.0;
        let mut term = 1.0f64;
        for j in 0..=k_max {
            if j > 0 {
                term *= std::f64::consts::PI / j as f64;
            }
            partial += term;
        }
        let expected = (-std::f64::consts::PI).exp() * partial;
        assert!((kv.norm_sq() - expected).abs() < 1e-14);
    }

    #[test]
    fn kernel_overlap_with_ground_state() {
        // <k_z, e_0> = e^{-pi |z|^2 / 2}; at z = 1 this is e^{-pi/2}
        let tr = BasisTruncation::new(1, 12).unwrap();
        let kv = kernel_coefficients(&[c(1.0, 0.0)], &tr);
        let expected = (-std::f64::consts::PI / 2.0).exp();
        assert!((kv.coeffs[0].re - expected).abs() < 1e-15);
    }

    #[test]
    fn truncated_kernel_reproduces_polynomials() {
        // <f, K_z> = f(z) for polynomials of degree <= K, where
        // K_z = e^{pi |z|^2 / 2} k_z.
        let tr = BasisTruncation::new(1, 8).unwrap();
        let coeffs: Vec<C64> = (0..tr.dim())
            .map(|j| c(0.3 * j as f64 - 1.0, 0.1 * (j as f64).sin()))
            .collect();
        for z in [c(0.4, 0.2), c(-1.1, 0.9), c(0.0, -1.5)] {
            let kv = kernel_coefficients(&[z], &tr);
            let scale = (0.5 * std::f64::consts::PI * z.norm_sqr()).exp();
            let via_kernel: C64 = coeffs
                .iter()
                .zip(kv.coeffs.iter())
                .map(|(f, k)| f * k.conj() * scale)
                .sum();
            let direct: C64 = tr
                .indices()
                .iter()
                .zip(coeffs.iter())
                .map(|(m, f)| f * monomial_value(m, &[z]))
                .sum();
            assert!(
                (via_kernel - direct).norm() < 1e-12 * (1.0 + direct.norm()),
                "z = {z}: {via_kernel} vs {direct}"
            );
        }
    }

    proptest! {
        #[test]
        fn parity_is_an_involution(entries in proptest::collection::vec(0usize..6, 1..4)) {
            let m = MultiIndex::new(entries);
            let s = parity_sign(&m);
            prop_assert_eq!(s * s, 1);
        }

        #[test]
        fn parity_twice_fixes_vectors(seed in 0u64..1000) {
            let tr = BasisTruncation::new(2, 3).unwrap();
            let coeffs = DVector::from_iterator(
                tr.dim(),
                (0..tr.dim()).map(|j| {
                    let x = ((seed as f64 + 1.3) * (j as f64 + 0.7)).sin();
                    C64::new(x, x * 0.5)
                }),
            );
            let v = FockVector::new(coeffs, tr);
            let mut w = v.clone();
            w.apply_parity();
            w.apply_parity();
            for (a, b) in v.coeffs.iter().zip(w.coeffs.iter()) {
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn enumeration_count_is_binomial(n in 1usize..4, k in 0usize..7) {
            let idx = enumerate_indices(n, k).unwrap();
            prop_assert_eq!(idx.len(), binomial(k + n, n));
        }
    }
}
