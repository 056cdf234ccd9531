//! Norms and spectra of truncated operators: operator norm, Schatten
//! p-norms, trace, trace norm and singular-value decay diagnostics, plus
//! truncation-convergence tables.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{FockError, Result};
use crate::fock::BasisTruncation;
use crate::operators::FockOperator;

/// Singular values and derived norms of a truncated operator.
#[derive(Debug, Clone)]
pub struct SpectralSummary {
    /// Descending, all nonnegative.
    pub singular_values: Vec<f64>,
    /// Largest singular value.
    pub op_norm: f64,
    pub trace: C64,
    /// Requested (p, Schatten-p norm) pairs, in request order.
    pub schatten: Vec<(f64, f64)>,
    pub truncation: BasisTruncation,
}

impl SpectralSummary {
    pub fn schatten_norm(&self, p: f64) -> Option<f64> {
        self.schatten
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, v)| *v)
    }
}

fn schatten_from_singular_values(sv: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return sv.first().copied().unwrap_or(0.0);
    }
    // log-free power sum; singular values here are O(1) and the truncated
    // dimension is small
    let sum: f64 = sv.iter().map(|s| s.powf(p)).sum();
    sum.powf(1.0 / p)
}

/// Compute singular values, operator norm, trace and the requested
/// Schatten norms.
///
/// Diagonal operators take the fast path (singular values are the sorted
/// eigenvalue moduli); dense operators go through the full SVD.
pub fn spectral_summary(s: &FockOperator, ps: &[f64]) -> Result<SpectralSummary> {
    if ps.is_empty() {
        return Err(FockError::InvalidArgument(
            "at least one Schatten exponent is required".into(),
        ));
    }
    for &p in ps {
        if p.is_nan() || p < 1.0 {
            return Err(FockError::InvalidArgument(format!(
                "Schatten exponent must satisfy p >= 1, got {p}"
            )));
        }
    }
    let mut sv = match s {
        FockOperator::Diagonal(d) => d.eigenvalues.iter().map(|ev| ev.norm()).collect::<Vec<_>>(),
        FockOperator::Dense(m) => {
            let svd = nalgebra::SVD::try_new(
                m.entries.clone(),
                false,
                false,
                f64::EPSILON,
                0,
            )
            .ok_or_else(|| FockError::SvdFailure {
                provenance: m.provenance.to_string(),
            })?;
            svd.singular_values.iter().copied().collect()
        }
    };
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let op_norm = sv.first().copied().unwrap_or(0.0);
    let schatten = ps
        .iter()
        .map(|&p| (p, schatten_from_singular_values(&sv, p)))
        .collect();
    Ok(SpectralSummary {
        singular_values: sv,
        op_norm,
        trace: s.trace(),
        schatten,
        truncation: s.truncation().clone(),
    })
}

/// One row of a truncation-convergence study.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub k_max: usize,
    pub op_norm: f64,
    pub schatten: Vec<(f64, f64)>,
}

/// Norms of a family of operators built at increasing truncation degrees.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Column of op-norm values in row order.
    pub fn op_norms(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.op_norm).collect()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("k_max,op_norm");
        if let Some(first) = self.rows.first() {
            for (p, _) in &first.schatten {
                out.push_str(&format!(",schatten_{p}"));
            }
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{},{}", row.k_max, row.op_norm));
            for (_, v) in &row.schatten {
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Build the operator at each `K` in `ks` (strictly increasing) and
/// tabulate its norms; the basis for every K-extrapolation in the
/// verification harness.
pub fn convergence_table<B>(builder: B, ks: &[usize], ps: &[f64]) -> Result<ConvergenceTable>
where
    B: Fn(usize) -> Result<FockOperator>,
{
    if ks.is_empty() {
        return Err(FockError::InvalidArgument(
            "at least one truncation degree is required".into(),
        ));
    }
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FockError::InvalidArgument(
            "truncation degrees must be strictly increasing".into(),
        ));
    }
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let op = builder(k)?;
        let summary = spectral_summary(&op, ps)?;
        rows.push(ConvergenceRow {
            k_max: k,
            op_norm: summary.op_norm,
            schatten: summary.schatten,
        });
    }
    Ok(ConvergenceTable { rows })
}

/// Truncation-extrapolation rule: a norm column counts as converged when
/// two consecutive values differ by less than `rtol` in relative terms;
/// the last value is then the K -> infinity estimate.
pub fn converged_value(values: &[f64], rtol: f64) -> Option<f64> {
    for w in values.windows(2) {
        let scale = w[1].abs().max(1e-300);
        if (w[1] - w[0]).abs() / scale < rtol {
            return Some(w[1]);
        }
    }
    None
}

/// Growth classification for a convergence table column: does the op-norm
/// keep growing as K increases?
pub fn classify_growth(op_norms: &[f64], rtol: f64) -> GrowthClass {
    if op_norms.len() < 2 {
        return GrowthClass::Undetermined;
    }
    let first = op_norms.first().unwrap();
    let last = op_norms.last().unwrap();
    if *last > first * (1.0 + rtol) {
        GrowthClass::Growing
    } else {
        GrowthClass::Bounded
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GrowthClass {
    Bounded,
    Growing,
    Undetermined,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{
        gaussian_toeplitz, heat_semigroup, toeplitz_radial, translate_operator,
        DiagonalOperator,
    };
    use crate::quadrature::build_grid;
    use crate::symbols::Symbol;
    use proptest::prelude::*;

    const PI: f64 = std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn heat_semigroup_norms_at_k60() {
        let trunc = BasisTruncation::new(1, 60).unwrap();
        let op = FockOperator::Diagonal(heat_semigroup(1.0, &trunc).unwrap());
        let summary = spectral_summary(&op, &[1.0, 2.0]).unwrap();
        assert!((summary.op_norm - 0.5).abs() < 1e-15);
        let expected_trace_norm = 1.0 - 2.0f64.powi(-61);
        assert!((summary.schatten_norm(1.0).unwrap() - expected_trace_norm).abs() < 1e-15);
        // ||Phi_1||_2 = 3^{-1/2} up to the 4^{-61} tail
        assert!((summary.schatten_norm(2.0).unwrap() - 3.0f64.powf(-0.5)).abs() < 1e-14);
    }

    #[test]
    fn negative_time_trace_norm_converges() {
        let trunc = BasisTruncation::new(1, 200).unwrap();
        let op = FockOperator::Diagonal(heat_semigroup(-0.25, &trunc).unwrap());
        let summary = spectral_summary(&op, &[1.0]).unwrap();
        assert!((summary.schatten_norm(1.0).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn identity_schatten_two_is_sqrt_dim() {
        let trunc = BasisTruncation::new(2, 5).unwrap();
        let op = FockOperator::Diagonal(DiagonalOperator::identity(&trunc));
        let summary = spectral_summary(&op, &[2.0]).unwrap();
        let expected = (trunc.dim() as f64).sqrt();
        assert!((summary.schatten_norm(2.0).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn svd_and_modulus_paths_agree_for_diagonals() {
        let trunc = BasisTruncation::new(1, 24).unwrap();
        let diag = gaussian_toeplitz(c(0.0, 1.0), &trunc).unwrap();
        let via_moduli = spectral_summary(&FockOperator::Diagonal(diag.clone()), &[1.0, 3.0])
            .unwrap();
        let via_svd =
            spectral_summary(&FockOperator::Dense(diag.to_matrix()), &[1.0, 3.0]).unwrap();
        for (a, b) in via_moduli
            .singular_values
            .iter()
            .zip(via_svd.singular_values.iter())
        {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
        assert!(
            (via_moduli.schatten_norm(1.0).unwrap() - via_svd.schatten_norm(1.0).unwrap()).abs()
                < 1e-12
        );
    }

    #[test]
    fn schatten_is_monotone_in_p() {
        let trunc = BasisTruncation::new(1, 30).unwrap();
        let ops: Vec<FockOperator> = vec![
            FockOperator::Diagonal(heat_semigroup(0.7, &trunc).unwrap()),
            FockOperator::Diagonal(gaussian_toeplitz(c(0.4, 0.6), &trunc).unwrap()),
            FockOperator::Dense(crate::operators::kernel_projection(
                &[c(0.5, -0.2)],
                &trunc,
            )),
        ];
        let ps = [1.0, 1.5, 2.0, 4.0, 8.0];
        for op in &ops {
            let summary = spectral_summary(op, &ps).unwrap();
            for w in summary.schatten.windows(2) {
                assert!(
                    w[1].1 <= w[0].1 + 1e-12,
                    "{}: p={} -> {}, p={} -> {}",
                    op.provenance(),
                    w[0].0,
                    w[0].1,
                    w[1].0,
                    w[1].1
                );
            }
        }
    }

    #[test]
    fn unitary_invariance_within_weighted_leakage() {
        let trunc = BasisTruncation::new(1, 32).unwrap();
        let diag = heat_semigroup(1.0, &trunc).unwrap();
        let base = spectral_summary(&FockOperator::Diagonal(diag.clone()), &[2.0]).unwrap();
        for z in [[c(0.5, 0.0)], [c(-0.7, 0.7)]] {
            let (translated, _) = translate_operator(&z, &diag.to_matrix()).unwrap();
            // eigenvalue-weighted displaced leakage governs the drift
            let col_leak = crate::operators::displacement_column_leakage(&z, &trunc);
            let weighted: f64 = diag
                .eigenvalues
                .iter()
                .zip(col_leak.iter())
                .map(|(ev, l)| ev.norm() * l)
                .sum();
            let summary =
                spectral_summary(&FockOperator::Dense(translated), &[2.0]).unwrap();
            let tol = 10.0 * weighted + 1e-10;
            assert!(
                (summary.op_norm - base.op_norm).abs() < tol,
                "z={z:?}: op_norm {} vs {} (tol {tol})",
                summary.op_norm,
                base.op_norm
            );
            assert!(
                (summary.schatten_norm(2.0).unwrap() - base.schatten_norm(2.0).unwrap()).abs()
                    < tol
            );
        }
    }

    #[test]
    fn convergence_table_constant_and_diverging_columns() {
        // heat semigroup at t = 1: constant op-norm column 0.5
        let table = convergence_table(
            |k| {
                let trunc = BasisTruncation::new(1, k)?;
                Ok(FockOperator::Diagonal(heat_semigroup(1.0, &trunc)?))
            },
            &[8, 16, 32],
            &[1.0],
        )
        .unwrap();
        for row in &table.rows {
            assert!((row.op_norm - 0.5).abs() < 1e-15);
        }
        assert_eq!(converged_value(&table.op_norms(), 1e-8), Some(0.5));
        assert_eq!(classify_growth(&table.op_norms(), 1e-9), GrowthClass::Bounded);

        // number operator: op-norm K + 1 diverges
        let table = convergence_table(
            |k| {
                let trunc = BasisTruncation::new(1, k)?;
                Ok(FockOperator::Diagonal(toeplitz_radial(
                    |r| c(PI * r * r, 0.0),
                    &trunc,
                )?))
            },
            &[4, 8, 16],
            &[1.0],
        )
        .unwrap();
        for row in &table.rows {
            assert!((row.op_norm - (row.k_max as f64 + 1.0)).abs() < 1e-8);
        }
        assert_eq!(converged_value(&table.op_norms(), 1e-8), None);
        assert_eq!(classify_growth(&table.op_norms(), 1e-9), GrowthClass::Growing);

        // gaussian xi = i: constant column 2^{-1/2}
        let table = convergence_table(
            |k| {
                let trunc = BasisTruncation::new(1, k)?;
                Ok(FockOperator::Diagonal(gaussian_toeplitz(
                    c(0.0, 1.0),
                    &trunc,
                )?))
            },
            &[8, 16, 32],
            &[1.0],
        )
        .unwrap();
        for row in &table.rows {
            assert!((row.op_norm - 2.0f64.powf(-0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn convergence_table_rejects_unsorted_ks() {
        let result = convergence_table(
            |k| {
                let trunc = BasisTruncation::new(1, k)?;
                Ok(FockOperator::Diagonal(heat_semigroup(1.0, &trunc)?))
            },
            &[16, 8],
            &[1.0],
        );
        assert!(result.is_err());
    }

    #[test]
    fn csv_rendering_is_deterministic() {
        let build = || {
            convergence_table(
                |k| {
                    let trunc = BasisTruncation::new(1, k)?;
                    Ok(FockOperator::Diagonal(heat_semigroup(0.5, &trunc)?))
                },
                &[4, 8],
                &[1.0, 2.0],
            )
            .unwrap()
        };
        assert_eq!(build().to_csv_string(), build().to_csv_string());
        assert!(build().to_csv_string().starts_with("k_max,op_norm,schatten_1"));
    }

    #[test]
    fn toeplitz_quadrature_respects_symbol_norms() {
        // sanity link to the operators module: op norm of T_{phi_1} is 1/2
        let trunc = BasisTruncation::new(1, 16).unwrap();
        let grid = build_grid(1, 32).unwrap();
        let a = crate::symbols::heat_kernel_real(1.0, 1).unwrap();
        let t = crate::operators::toeplitz_quadrature(&a, &trunc, &grid).unwrap();
        let summary = spectral_summary(&FockOperator::Dense(t), &[1.0]).unwrap();
        assert!((summary.op_norm - 0.5).abs() < 1e-10);
        let _ = Symbol::constant(c(1.0, 0.0), 1);
    }

    proptest! {
        #[test]
        fn schatten_monotone_on_random_diagonals(seed in 0u64..500) {
            let trunc = BasisTruncation::new(1, 12).unwrap();
            let eigenvalues: Vec<C64> = (0..trunc.dim())
                .map(|j| {
                    let x = ((seed as f64 + 1.0) * (j as f64 + 0.31)).sin();
                    let y = ((seed as f64 + 2.0) * (j as f64 + 0.77)).cos();
                    C64::new(x, y)
                })
                .collect();
            let diag = DiagonalOperator {
                eigenvalues,
                truncation: trunc,
                provenance: crate::operators::Provenance::new("random"),
            };
            let summary = spectral_summary(
                &FockOperator::Diagonal(diag),
                &[1.0, 2.0, 3.0, 10.0],
            )
            .unwrap();
            for w in summary.schatten.windows(2) {
                prop_assert!(w[1].1 <= w[0].1 + 1e-12);
            }
        }
    }
}
