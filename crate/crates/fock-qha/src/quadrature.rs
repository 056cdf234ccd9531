//! Tensor Gauss-Hermite quadrature for integrals of the form
//! `int_{C^n} f(z) e^{-pi |z|^2} dm(z)`.
//!
//! Nodes and weights for the normalized weight are produced by the
//! Golub-Welsch eigenvalue method and then polished with two Newton steps
//! on the orthonormal three-term recurrence, which brings both back to
//! machine precision. The same machinery yields generalized Gauss-Laguerre
//! rules for the normalized measure `u^alpha e^{-u} / Gamma(alpha+1)`,
//! used by the radial Toeplitz path.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{FockError, Result};

/// Default cap on the total tensor node count `Q^{2n}`.
pub const DEFAULT_NODE_BUDGET: u128 = 100_000_000;

/// Compensated (Kahan) accumulator for complex values.
///
/// Summation order is fixed by the caller, so results are bit-identical
/// across runs.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: C64,
    comp: C64,
}

impl KahanSum {
    pub fn new() -> Self {
        KahanSum::default()
    }

    #[inline]
    pub fn add(&mut self, value: C64) {
        let y = value - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> C64 {
        self.sum
    }
}

/// Nodes and weights of a Gaussian rule on a general orthonormal
/// three-term recurrence `p_{k+1} = ((x - a_k) p_k - b_k p_{k-1}) / b_{k+1}`
/// for a normalized measure (weights sum to 1).
fn golub_welsch(a: &[f64], b: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let q = a.len();
    let mut jac = DMatrix::<f64>::zeros(q, q);
    for i in 0..q {
        jac[(i, i)] = a[i];
        if i + 1 < q {
            jac[(i, i + 1)] = b[i + 1];
            jac[(i + 1, i)] = b[i + 1];
        }
    }
    let eig = SymmetricEigen::new(jac);
    let mut pairs: Vec<(f64, f64)> = (0..q)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], v0 * v0)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    pairs.into_iter().unzip()
}

/// Evaluate the orthonormal polynomials `p_0..=p_q` at `x`; returns
/// `(p_{q-1}(x), p_q(x), sum_{k<q} p_k(x)^2)`.
fn recurrence_eval(a: &[f64], b: &[f64], q: usize, x: f64) -> (f64, f64, f64) {
    let mut pm = 0.0f64;
    let mut p = 1.0f64;
    let mut christoffel = 0.0f64;
    for k in 0..q {
        christoffel += p * p;
        let next = ((x - a[k]) * p - if k == 0 { 0.0 } else { b[k] * pm }) / b[k + 1];
        pm = p;
        p = next;
    }
    (pm, p, christoffel)
}

/// Gauss-Hermite rule for the normalized weight `e^{-x^2} / sqrt(pi)`;
/// weights sum to 1.
pub fn gauss_hermite_normalized(q: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 1);
    // a_k = 0, b_k = sqrt(k/2); b has one extra entry for the recurrence.
    let a = vec![0.0f64; q];
    let mut b = Vec::with_capacity(q + 1);
    for k in 0..=q {
        b.push((k as f64 / 2.0).sqrt());
    }
    let (mut nodes, _) = golub_welsch(&a, &b[..q]);
    // Newton polish: p_q'(x) = sqrt(2q) p_{q-1}(x) for Hermite.
    let dcoef = (2.0 * q as f64).sqrt();
    for x in nodes.iter_mut() {
        for _ in 0..2 {
            let (pm, p, _) = recurrence_eval(&a, &b, q, *x);
            let dp = dcoef * pm;
            if dp != 0.0 {
                *x -= p / dp;
            }
        }
    }
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let weights = nodes
        .iter()
        .map(|&x| {
            let (_, _, christoffel) = recurrence_eval(&a, &b, q, x);
            1.0 / christoffel
        })
        .collect();
    (nodes, weights)
}

/// Generalized Gauss-Laguerre rule for the normalized measure
/// `u^alpha e^{-u} / Gamma(alpha + 1)` on (0, inf); weights sum to 1.
pub fn gauss_laguerre_normalized(q: usize, alpha: f64) -> (Vec<f64>, Vec<f64>) {
    assert!(q >= 1);
    assert!(alpha > -1.0);
    let a: Vec<f64> = (0..q).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let mut b = Vec::with_capacity(q + 1);
    for k in 0..=q {
        b.push((k as f64 * (k as f64 + alpha)).sqrt());
    }
    let (mut nodes, _) = golub_welsch(&a, &b[..q]);
    // Newton polish via x p_q'(x) = q p_q(x) - sqrt(q (q + alpha)) p_{q-1}(x).
    let dcoef = (q as f64 * (q as f64 + alpha)).sqrt();
    for x in nodes.iter_mut() {
        for _ in 0..2 {
            let (pm, p, _) = recurrence_eval(&a, &b, q, *x);
            let dp = (q as f64 * p - dcoef * pm) / *x;
            if dp != 0.0 {
                *x -= p / dp;
            }
        }
    }
    nodes.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let weights = nodes
        .iter()
        .map(|&x| {
            let (_, _, christoffel) = recurrence_eval(&a, &b, q, x);
            1.0 / christoffel
        })
        .collect();
    (nodes, weights)
}

/// Tensor quadrature grid approximating
/// `int_{C^n} f(z) e^{-pi |z|^2} dm(z) ~= sum_j w_j f(z_j)`.
///
/// Since the Gaussian is a probability measure on C^n, the weights sum
/// to 1. Polynomials in `Re z_j`, `Im z_j` of per-axis degree at most
/// `2Q - 1` are integrated exactly. Immutable after construction.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    n: usize,
    q: usize,
    nodes: Vec<Vec<C64>>,
    weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Points per real axis.
    pub fn points_per_axis(&self) -> usize {
        self.q
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec<C64>] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Build the tensor Gauss-Hermite grid for C^n with `q` points per real
/// axis, under the default node budget.
pub fn build_grid(n: usize, q: usize) -> Result<QuadratureGrid> {
    build_grid_with_budget(n, q, DEFAULT_NODE_BUDGET)
}

pub fn build_grid_with_budget(n: usize, q: usize, budget: u128) -> Result<QuadratureGrid> {
    if n == 0 {
        return Err(FockError::InvalidArgument(
            "complex dimension n must be >= 1".into(),
        ));
    }
    if q == 0 {
        return Err(FockError::InvalidArgument(
            "quadrature order Q must be >= 1".into(),
        ));
    }
    let total = (q as u128).checked_pow(2 * n as u32).unwrap_or(u128::MAX);
    if total > budget {
        return Err(FockError::NodeBudget {
            requested: total,
            budget,
        });
    }
    let (raw_nodes, weights_1d) = gauss_hermite_normalized(q);
    // Rescale e^{-x^2} nodes to the e^{-pi x^2} axis: x -> x / sqrt(pi).
    let scale = 1.0 / std::f64::consts::PI.sqrt();
    let nodes_1d: Vec<f64> = raw_nodes.iter().map(|x| x * scale).collect();

    let total = total as usize;
    let mut nodes = Vec::with_capacity(total);
    let mut weights = Vec::with_capacity(total);
    // Odometer over the 2n real axes, last axis fastest; this fixes the
    // node order used by every compensated reduction downstream.
    let axes = 2 * n;
    let mut counter = vec![0usize; axes];
    loop {
        let mut w = 1.0f64;
        let mut point = Vec::with_capacity(n);
        for j in 0..n {
            let ix = counter[2 * j];
            let iy = counter[2 * j + 1];
            w *= weights_1d[ix] * weights_1d[iy];
            point.push(C64::new(nodes_1d[ix], nodes_1d[iy]));
        }
        nodes.push(point);
        weights.push(w);

        let mut axis = axes;
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            counter[axis] += 1;
            if counter[axis] < q {
                break;
            }
            counter[axis] = 0;
        }
        if counter.iter().all(|&c| c == 0) {
            break;
        }
    }
    Ok(QuadratureGrid {
        n,
        q,
        nodes,
        weights,
    })
}

/// Quadrature sum `sum_j w_j f(z_j)` with compensated summation in the
/// fixed node order.
///
/// The full integrand is `f(z) e^{-pi |z|^2}`; the Gaussian factor is the
/// weight of the rule and must not be included in `f`.
pub fn integrate<F>(grid: &QuadratureGrid, mut f: F) -> Result<C64>
where
    F: FnMut(&[C64]) -> C64,
{
    integrate_named(grid, &mut f, "integrate")
}

fn integrate_named<F>(grid: &QuadratureGrid, f: &mut F, context: &str) -> Result<C64>
where
    F: FnMut(&[C64]) -> C64,
{
    let mut acc = KahanSum::new();
    for (j, (node, &w)) in grid.nodes.iter().zip(grid.weights.iter()).enumerate() {
        let value = f(node);
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(FockError::NonFiniteIntegrand {
                context: context.to_string(),
                node_index: j,
                node: format_node(node),
            });
        }
        acc.add(value * w);
    }
    Ok(acc.value())
}

/// Quadrature of an integrand that factors as
/// `g(z) * smooth_factor(z) * e^{-pi |z|^2}` over Lebesgue measure.
///
/// The caller is responsible for the factorization being exact; the sum
/// computed is `sum_j w_j g(z_j) smooth_factor(z_j)`.
pub fn integrate_shifted<F, G>(
    grid: &QuadratureGrid,
    mut g: F,
    mut smooth_factor: G,
) -> Result<C64>
where
    F: FnMut(&[C64]) -> C64,
    G: FnMut(&[C64]) -> C64,
{
    integrate_named(grid, &mut |z: &[C64]| g(z) * smooth_factor(z), "integrate_shifted")
}

fn format_node(node: &[C64]) -> String {
    let parts: Vec<String> = node.iter().map(|z| format!("{z}")).collect();
    format!("[{}]", parts.join(", "))
}
