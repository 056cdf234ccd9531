//! Quantum-harmonic-analysis convolutions in the truncated basis:
//! function * operator, operator * operator, the Berezin transform, the
//! heat flow of a Toeplitz operator, and the Berger-Coburn reconstruction.
//!
//! Weak (Pettis) integrals of the continuous theory become entrywise
//! quadrature here; the truncated space is finite-dimensional, where weak
//! and norm integrals coincide. Truncation error is tracked through the
//! leakage diagnostics attached to every result.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{FockError, Result};
use crate::fock::{kernel_coefficients, kernel_leakage, BasisTruncation};
use crate::operators::{
    displacement_entries, heat_semigroup, FockOperator, OperatorMatrix, Provenance,
};
use crate::quadrature::QuadratureGrid;
use crate::symbols::{SampleMeta, SampledFunction, Symbol};

const PI: f64 = std::f64::consts::PI;

/// Thresholds for the leakage error model.
#[derive(Debug, Clone, Copy)]
pub struct ConvOptions {
    /// Above this the result is marked degraded.
    pub degraded_threshold: f64,
    /// Above this the convolution refuses to return a result.
    pub error_threshold: f64,
}

impl Default for ConvOptions {
    fn default() -> Self {
        ConvOptions {
            degraded_threshold: 1e-6,
            error_threshold: 1e-2,
        }
    }
}

/// A convolution result together with the truncation-leakage diagnostic
/// that qualifies it.
#[derive(Debug, Clone)]
pub struct ConvolutionResult<T> {
    pub payload: T,
    /// Maximum (or mass-weighted, for quadrature results) truncation
    /// leakage encountered; always in [0, 1].
    pub leakage: f64,
    /// Set when the leakage exceeded the configured threshold.
    pub degraded: bool,
    /// Quadrature / construction parameters, in a fixed order.
    pub quad_meta: Vec<(String, String)>,
}

impl<T> ConvolutionResult<T> {
    fn new(payload: T, leakage: f64, opts: &ConvOptions, quad_meta: Vec<(String, String)>) -> Self {
        ConvolutionResult {
            payload,
            leakage,
            degraded: leakage > opts.degraded_threshold,
            quad_meta,
        }
    }
}

/// Column weights of an operator, used to weight per-column displacement
/// leakage by how much each basis column actually matters to `S`.
fn column_weights(s: &FockOperator) -> Vec<f64> {
    match s {
        FockOperator::Diagonal(d) => d.eigenvalues.iter().map(|ev| ev.norm()).collect(),
        FockOperator::Dense(m) => (0..m.dim())
            .map(|q| m.entries.column(q).iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt())
            .collect(),
    }
}

/// Function * operator convolution
/// `(a * S) = int a(z) alpha_z(S) dm(z)`, computed entrywise by tensor
/// Gauss-Hermite quadrature.
///
/// The matrix elements of `alpha_z(S)` carry the Gaussian factor
/// `e^{-pi |z|^2}` through the displacement overlaps; the quadrature is
/// run on the Gaussian-stripped displacement matrices so the rule's weight
/// absorbs it exactly.
pub fn convolve_fn_op(
    a: &Symbol,
    s: &FockOperator,
    grid: &QuadratureGrid,
) -> Result<ConvolutionResult<OperatorMatrix>> {
    convolve_fn_op_with(a, s, grid, ConvOptions::default())
}

pub fn convolve_fn_op_with(
    a: &Symbol,
    s: &FockOperator,
    grid: &QuadratureGrid,
    opts: ConvOptions,
) -> Result<ConvolutionResult<OperatorMatrix>> {
    let trunc = s.truncation().clone();
    if a.n() != trunc.n() || grid.n() != trunc.n() {
        return Err(FockError::InvalidArgument(
            "symbol, operator and grid must share the ambient dimension".into(),
        ));
    }
    let d = trunc.dim();
    let weights = {
        let mut w = column_weights(s);
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            for x in w.iter_mut() {
                *x /= total;
            }
        }
        w
    };

    let dense = match s {
        FockOperator::Dense(m) => Some(&m.entries),
        FockOperator::Diagonal(_) => None,
    };
    let diag = s.as_diagonal();

    let mut sum = DMatrix::<C64>::zeros(d, d);
    let mut comp = DMatrix::<C64>::zeros(d, d);
    let mut leak_num = 0.0f64;
    let mut leak_den = 0.0f64;

    for (j, (node, &w)) in grid.nodes().iter().zip(grid.weights().iter()).enumerate() {
        let a_val = a.eval(node);
        if !a_val.re.is_finite() || !a_val.im.is_finite() {
            return Err(FockError::NonFiniteIntegrand {
                context: format!("convolve_fn_op symbol {}", a.name()),
                node_index: j,
                node: format!("{node:?}"),
            });
        }
        // Gaussian-stripped displacement: w_hat = e^{+s/2} W_z.
        let w_hat = displacement_entries(node, &trunc, true);

        // m_hat = w_hat S w_hat^*  ( = e^{pi |z|^2} alpha_z(S) entrywise)
        let m_hat = match (dense, diag) {
            (Some(entries), _) => &w_hat * entries * w_hat.adjoint(),
            (None, Some(dg)) => {
                let mut scaled = w_hat.clone();
                for q in 0..d {
                    let ev = dg.eigenvalues[q];
                    for k in 0..d {
                        scaled[(k, q)] *= ev;
                    }
                }
                scaled * w_hat.adjoint()
            }
            _ => unreachable!(),
        };

        let amp = a_val * w;
        for k in 0..d {
            for m in 0..d {
                let term = amp * m_hat[(k, m)];
                let y = term - comp[(k, m)];
                let t = sum[(k, m)] + y;
                comp[(k, m)] = (t - sum[(k, m)]) - y;
                sum[(k, m)] = t;
            }
        }

        // Column-weighted displacement leakage at this node. The stripped
        // columns satisfy ||P W_z e_q||^2 = e^{-pi |z|^2} sum_k |w_hat_kq|^2.
        let s_node: f64 = node.iter().map(|zj| zj.norm_sqr()).sum::<f64>() * PI;
        let damp = (-s_node).exp();
        let mut node_leak = 0.0f64;
        for q in 0..d {
            if weights[q] == 0.0 {
                continue;
            }
            let col: f64 = (0..d).map(|k| w_hat[(k, q)].norm_sqr()).sum();
            node_leak += weights[q] * (1.0 - damp * col).max(0.0);
        }
        let mass = w * a_val.norm();
        leak_num += mass * node_leak;
        leak_den += mass;
    }

    let leakage = if leak_den > 0.0 {
        (leak_num / leak_den).clamp(0.0, 1.0)
    } else {
        0.0
    };
    if leakage > opts.error_threshold {
        return Err(FockError::LeakageExceeded {
            context: format!("convolve_fn_op({}, {})", a.name(), s.provenance()),
            leakage,
            threshold: opts.error_threshold,
        });
    }

    let provenance = Provenance::new("convolve_fn_op")
        .with("symbol", a.name())
        .with("inner", s.provenance())
        .with("quad_points_per_axis", grid.points_per_axis());
    let quad_meta = vec![
        ("quad_points_per_axis".to_string(), grid.points_per_axis().to_string()),
        ("k_max".to_string(), trunc.k_max().to_string()),
        ("leakage".to_string(), format!("{leakage:e}")),
    ];
    Ok(ConvolutionResult::new(
        OperatorMatrix::new(sum, trunc, provenance),
        leakage,
        &opts,
        quad_meta,
    ))
}

/// Operator * operator convolution
/// `(S * T)(z) = Tr(S alpha_z(U T U))`, sampled at `points`.
///
/// `T` is the trace-class factor (automatic in the truncation; its trace
/// norm is reported in the meta block). For diagonal `T` the parity
/// conjugation `U T U` is skipped: parity acts on a diagonal operator as
/// the identity. [`convolve_op_op_general`] never skips; the two paths
/// agree bitwise.
pub fn convolve_op_op(
    s: &FockOperator,
    t: &FockOperator,
    points: &[Vec<C64>],
) -> Result<ConvolutionResult<SampledFunction>> {
    convolve_op_op_with(s, t, points, ConvOptions::default(), true)
}

/// As [`convolve_op_op`], but always applies the parity conjugation, even
/// to diagonal operators (where it multiplies every eigenvalue by +1).
pub fn convolve_op_op_general(
    s: &FockOperator,
    t: &FockOperator,
    points: &[Vec<C64>],
) -> Result<ConvolutionResult<SampledFunction>> {
    convolve_op_op_with(s, t, points, ConvOptions::default(), false)
}

fn convolve_op_op_with(
    s: &FockOperator,
    t: &FockOperator,
    points: &[Vec<C64>],
    opts: ConvOptions,
    skip_diagonal_parity: bool,
) -> Result<ConvolutionResult<SampledFunction>> {
    s.truncation().assert_same(t.truncation())?;
    let trunc = s.truncation().clone();
    let d = trunc.dim();

    // U T U: parity conjugation of the trace-class factor.
    let t_conj: FockOperator = match t {
        FockOperator::Diagonal(dg) => {
            if skip_diagonal_parity {
                FockOperator::Diagonal(dg.clone())
            } else {
                // entry (q, q) picks up (-1)^{2 |q|} = +1
                let mut out = dg.clone();
                for ev in out.eigenvalues.iter_mut() {
                    *ev *= 1.0;
                }
                FockOperator::Diagonal(out)
            }
        }
        FockOperator::Dense(m) => FockOperator::Dense(m.parity_conjugate()),
    };

    let trace_norm_t = trace_norm(t);

    // Column weights of the trace-class factor: the truncation error of
    // Tr(S alpha_z(U T U)) is controlled by the displaced leakage of the
    // columns T actually occupies.
    let t_weights = {
        let mut w = column_weights(t);
        let total: f64 = w.iter().sum();
        if total > 0.0 {
            for x in w.iter_mut() {
                *x /= total;
            }
        }
        w
    };

    let mut values = Vec::with_capacity(points.len());
    let mut max_leak = 0.0f64;
    let mut max_kernel_leak = 0.0f64;
    for p in points {
        if p.len() != trunc.n() {
            return Err(FockError::InvalidArgument(
                "sample point dimension mismatch".into(),
            ));
        }
        let w = displacement_entries(p, &trunc, false);
        // Trace-norm error model: replacing alpha_z(U T U) by its
        // truncation perturbs each rank-one piece by at most
        // 2 sqrt(leak_q) in trace norm, so the weighted sqrt-leakage
        // bounds the per-point error relative to ||S|| ||T||_1.
        let mut weighted_leak = 0.0f64;
        for q in 0..d {
            if t_weights[q] == 0.0 {
                continue;
            }
            let col: f64 = (0..d).map(|k| w[(k, q)].norm_sqr()).sum();
            weighted_leak += t_weights[q] * (1.0 - col).max(0.0).sqrt();
        }
        max_leak = max_leak.max(weighted_leak);
        let value = match (&t_conj, s) {
            (FockOperator::Diagonal(td), FockOperator::Diagonal(sd)) => {
                // Tr(S W T W*) = sum_{p,q} lambda^S_p lambda^T_q |W_pq|^2
                let mut acc = crate::quadrature::KahanSum::new();
                for pp in 0..d {
                    let sp = sd.eigenvalues[pp];
                    if sp == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut inner = C64::new(0.0, 0.0);
                    for q in 0..d {
                        inner += td.eigenvalues[q] * w[(pp, q)].norm_sqr();
                    }
                    acc.add(sp * inner);
                }
                acc.value()
            }
            (tc, sop) => {
                let m = match tc {
                    FockOperator::Diagonal(td) => {
                        let mut scaled = w.clone();
                        for q in 0..d {
                            let ev = td.eigenvalues[q];
                            for k in 0..d {
                                scaled[(k, q)] *= ev;
                            }
                        }
                        scaled * w.adjoint()
                    }
                    FockOperator::Dense(tm) => &w * &tm.entries * w.adjoint(),
                };
                match sop {
                    FockOperator::Diagonal(sd) => {
                        let mut acc = crate::quadrature::KahanSum::new();
                        for k in 0..d {
                            acc.add(sd.eigenvalues[k] * m[(k, k)]);
                        }
                        acc.value()
                    }
                    FockOperator::Dense(sm) => {
                        let mut acc = crate::quadrature::KahanSum::new();
                        for k in 0..d {
                            for q in 0..d {
                                acc.add(sm.entries[(k, q)] * m[(q, k)]);
                            }
                        }
                        acc.value()
                    }
                }
            }
        };
        values.push(value);
        max_kernel_leak = max_kernel_leak.max(kernel_leakage(p, &trunc));
    }

    let mut meta = SampleMeta {
        n: trunc.n(),
        description: format!("({}) * ({})", s.provenance(), t.provenance()),
        params: Vec::new(),
    };
    meta.push("k_max", trunc.k_max());
    meta.push("trace_norm_T", format!("{trace_norm_t:.12e}"));
    meta.push("max_weighted_sqrt_leakage", format!("{max_leak:e}"));
    meta.push("max_kernel_leakage", format!("{max_kernel_leak:e}"));
    let quad_meta = meta.params.clone();
    Ok(ConvolutionResult::new(
        SampledFunction {
            points: points.to_vec(),
            values,
            meta,
        },
        max_leak.clamp(0.0, 1.0),
        &opts,
        quad_meta,
    ))
}

fn trace_norm(t: &FockOperator) -> f64 {
    match t {
        FockOperator::Diagonal(d) => d.trace_norm(),
        FockOperator::Dense(m) => m
            .entries
            .clone()
            .singular_values()
            .iter()
            .sum(),
    }
}

/// Berezin transform `B(S)(z) = <S k_z, k_z>` via kernel coefficients.
///
/// Agrees with `convolve_op_op(S, Phi)` (the ground-state projection)
/// within the kernel truncation leakage.
pub fn berezin(s: &FockOperator, points: &[Vec<C64>]) -> Result<SampledFunction> {
    let trunc = s.truncation().clone();
    let mut values = Vec::with_capacity(points.len());
    let mut max_leak = 0.0f64;
    for p in points {
        if p.len() != trunc.n() {
            return Err(FockError::InvalidArgument(
                "sample point dimension mismatch".into(),
            ));
        }
        let kv = kernel_coefficients(p, &trunc);
        let value = match s {
            FockOperator::Diagonal(d) => {
                let mut acc = crate::quadrature::KahanSum::new();
                for (q, ev) in d.eigenvalues.iter().enumerate() {
                    acc.add(ev * kv.coeffs[q].norm_sqr());
                }
                acc.value()
            }
            FockOperator::Dense(m) => {
                // <S k_z, k_z> = sum_{k,q} conj(c_k) S_{kq} c_q
                let mut acc = crate::quadrature::KahanSum::new();
                for k in 0..trunc.dim() {
                    let row = kv.coeffs[k].conj();
                    for q in 0..trunc.dim() {
                        acc.add(row * m.entries[(k, q)] * kv.coeffs[q]);
                    }
                }
                acc.value()
            }
        };
        values.push(value);
        max_leak = max_leak.max(1.0 - kv.norm_sq());
    }
    let mut meta = SampleMeta {
        n: trunc.n(),
        description: format!("berezin({})", s.provenance()),
        params: Vec::new(),
    };
    meta.push("k_max", trunc.k_max());
    meta.push("max_kernel_leakage", format!("{max_leak:e}"));
    Ok(SampledFunction {
        points: points.to_vec(),
        values,
        meta,
    })
}

/// Heat flow of a (Toeplitz) operator: `B_t(a) = T_a * Phi_{t-1}` for
/// `t > 1/2`, sampled at `points`.
pub fn heat_flow_operator(
    ta: &FockOperator,
    t: f64,
    points: &[Vec<C64>],
) -> Result<ConvolutionResult<SampledFunction>> {
    if t <= 0.5 {
        return Err(FockError::InvalidArgument(format!(
            "heat flow requires t > 1/2 (Phi_(t-1) must be trace-class), got t = {t}"
        )));
    }
    let phi = heat_semigroup(t - 1.0, ta.truncation())?;
    let mut result = convolve_op_op(ta, &FockOperator::Diagonal(phi), points)?;
    result
        .payload
        .meta
        .params
        .insert(0, ("heat_flow_t".to_string(), t.to_string()));
    Ok(result)
}

/// Berger-Coburn reconstruction `T_a = B_t(a) * Phi_{-t}` for
/// `t in (0, 1/2)`: the explicit bounded extension of the Toeplitz
/// operator from its heat transform.
///
/// `bta` is the heat transform `B_t(a)` as a symbol: a closed form, a
/// lazily quadrature-backed symbol (see
/// [`crate::symbols::heat_transform_symbol`]) or an interpolant built from
/// a [`SampledFunction`].
pub fn reconstruct_toeplitz(
    bta: &Symbol,
    t: f64,
    trunc: &BasisTruncation,
    grid: &QuadratureGrid,
) -> Result<ConvolutionResult<OperatorMatrix>> {
    if !(0.0 < t && t < 0.5) {
        return Err(FockError::InvalidArgument(format!(
            "reconstruction requires t in (0, 1/2), got t = {t}"
        )));
    }
    let phi_neg = heat_semigroup(-t, trunc)?;
    let mut result = convolve_fn_op(bta, &FockOperator::Diagonal(phi_neg), grid)?;
    result
        .quad_meta
        .insert(0, ("reconstruction_t".to_string(), t.to_string()));
    Ok(result)
}

/// Eigenvalue tail share `sum_{q > K} |lambda_q| / sum_q |lambda_q|` of a
/// heat-semigroup member, estimated from the geometric decay ratio; the
/// truncation-tail counterpart of the displacement leakage for
/// operator * operator results.
pub fn semigroup_tail_share(t: f64, trunc: &BasisTruncation) -> f64 {
    let ratio = (t / (1.0 + t)).abs();
    if ratio >= 1.0 {
        return 1.0;
    }
    // |lambda_K| r / (1 - r) relative to the full sum (n = 1 geometric).
    let k = trunc.k_max() as i32;
    let lead = ratio.powi(k + 1);
    (lead / (1.0 - ratio)).min(1.0)
}
