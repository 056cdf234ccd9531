//! Concrete operators in the truncated basis: Toeplitz operators (three
//! construction paths), Weyl/displacement operators and the induced
//! operator translation, the operator heat semigroup including its
//! negative-time extension, and the basic projections.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{FockError, Result};
use crate::fock::{kernel_coefficients, BasisTruncation, MultiIndex};
use crate::quadrature::{gauss_laguerre_normalized, QuadratureGrid};
use crate::symbols::{gaussian_admissibility, Symbol, SymbolKind};

const PI: f64 = std::f64::consts::PI;

/// Construction record attached to every operator.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Provenance {
    pub construction: String,
    /// (key, value) pairs in a fixed order.
    pub params: Vec<(String, String)>,
}

impl Provenance {
    pub fn new(construction: &str) -> Self {
        Provenance {
            construction: construction.to_string(),
            params: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl std::fmt::Display) -> Self {
        self.params.push((key.to_string(), value.to_string()));
        self
    }

    pub fn push(&mut self, key: &str, value: impl std::fmt::Display) {
        self.params.push((key.to_string(), value.to_string()));
    }
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.construction)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

/// Dense operator in the fixed truncated basis; `entries[(k, m)]` is
/// `<S e_m, e_k>`. Immutable once constructed.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub entries: DMatrix<C64>,
    pub truncation: BasisTruncation,
    pub provenance: Provenance,
}

impl OperatorMatrix {
    pub fn new(entries: DMatrix<C64>, truncation: BasisTruncation, provenance: Provenance) -> Self {
        assert_eq!(entries.nrows(), truncation.dim());
        assert_eq!(entries.ncols(), truncation.dim());
        OperatorMatrix {
            entries,
            truncation,
            provenance,
        }
    }

    pub fn dim(&self) -> usize {
        self.truncation.dim()
    }

    pub fn identity(truncation: &BasisTruncation) -> Self {
        OperatorMatrix::new(
            DMatrix::identity(truncation.dim(), truncation.dim()),
            truncation.clone(),
            Provenance::new("identity"),
        )
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry_diff(&self, other: &OperatorMatrix) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Relative Frobenius distance `||A - B||_F / ||B||_F`.
    pub fn relative_frobenius_distance(&self, reference: &OperatorMatrix) -> f64 {
        let denom = reference.frobenius_norm();
        let num = self
            .entries
            .iter()
            .zip(reference.entries.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if denom == 0.0 {
            num
        } else {
            num / denom
        }
    }

    /// Conjugation by the parity operator: entry `(k, m)` picks up the
    /// sign `(-1)^{|k| + |m|}`.
    pub fn parity_conjugate(&self) -> OperatorMatrix {
        let d = self.dim();
        let mut entries = self.entries.clone();
        for k in 0..d {
            for m in 0..d {
                if (self.truncation.degree_at(k) + self.truncation.degree_at(m)) % 2 == 1 {
                    entries[(k, m)] = -entries[(k, m)];
                }
            }
        }
        OperatorMatrix::new(
            entries,
            self.truncation.clone(),
            self.provenance.clone().with("parity_conjugated", true),
        )
    }
}

/// Operator diagonal in the monomial basis, stored by its eigenvalue at
/// each basis position. Radial operators (eigenvalue a function of the
/// total degree only) are the main instance.
#[derive(Debug, Clone)]
pub struct DiagonalOperator {
    pub eigenvalues: Vec<C64>,
    pub truncation: BasisTruncation,
    pub provenance: Provenance,
}

impl DiagonalOperator {
    /// Build from a function of the total degree `|m|`; the result is
    /// radial by construction.
    pub fn from_degree_fn<F>(truncation: &BasisTruncation, provenance: Provenance, f: F) -> Self
    where
        F: Fn(usize) -> C64,
    {
        let eigenvalues = (0..truncation.dim())
            .map(|pos| f(truncation.degree_at(pos)))
            .collect();
        DiagonalOperator {
            eigenvalues,
            truncation: truncation.clone(),
            provenance,
        }
    }

    pub fn dim(&self) -> usize {
        self.truncation.dim()
    }

    pub fn identity(truncation: &BasisTruncation) -> Self {
        DiagonalOperator::from_degree_fn(truncation, Provenance::new("identity"), |_| {
            C64::new(1.0, 0.0)
        })
    }

    /// True when the eigenvalue depends only on the total degree.
    pub fn is_radial(&self) -> bool {
        let mut by_degree: Vec<Option<C64>> = vec![None; self.truncation.k_max() + 1];
        for (pos, ev) in self.eigenvalues.iter().enumerate() {
            let d = self.truncation.degree_at(pos);
            match by_degree[d] {
                None => by_degree[d] = Some(*ev),
                Some(seen) => {
                    if seen != *ev {
                        return false;
                    }
                }
            }
        }
        true
    }

    pub fn trace(&self) -> C64 {
        self.eigenvalues.iter().sum()
    }

    /// Trace norm of the truncated operator, `sum_m |lambda_m|`.
    pub fn trace_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|ev| ev.norm()).sum()
    }

    /// Operator norm of the truncated operator, `max_m |lambda_m|`.
    pub fn op_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|ev| ev.norm()).fold(0.0, f64::max)
    }

    pub fn to_matrix(&self) -> OperatorMatrix {
        let d = self.dim();
        let mut entries = DMatrix::zeros(d, d);
        for (pos, ev) in self.eigenvalues.iter().enumerate() {
            entries[(pos, pos)] = *ev;
        }
        OperatorMatrix::new(entries, self.truncation.clone(), self.provenance.clone())
    }
}

/// Either operator representation, for interfaces that accept both.
#[derive(Debug, Clone)]
pub enum FockOperator {
    Dense(OperatorMatrix),
    Diagonal(DiagonalOperator),
}

impl FockOperator {
    pub fn truncation(&self) -> &BasisTruncation {
        match self {
            FockOperator::Dense(m) => &m.truncation,
            FockOperator::Diagonal(d) => &d.truncation,
        }
    }

    pub fn provenance(&self) -> &Provenance {
        match self {
            FockOperator::Dense(m) => &m.provenance,
            FockOperator::Diagonal(d) => &d.provenance,
        }
    }

    pub fn dim(&self) -> usize {
        self.truncation().dim()
    }

    pub fn as_diagonal(&self) -> Option<&DiagonalOperator> {
        match self {
            FockOperator::Diagonal(d) => Some(d),
            FockOperator::Dense(_) => None,
        }
    }

    pub fn to_dense(&self) -> OperatorMatrix {
        match self {
            FockOperator::Dense(m) => m.clone(),
            FockOperator::Diagonal(d) => d.to_matrix(),
        }
    }

    pub fn trace(&self) -> C64 {
        match self {
            FockOperator::Dense(m) => m.trace(),
            FockOperator::Diagonal(d) => d.trace(),
        }
    }
}

impl From<OperatorMatrix> for FockOperator {
    fn from(m: OperatorMatrix) -> Self {
        FockOperator::Dense(m)
    }
}

impl From<DiagonalOperator> for FockOperator {
    fn from(d: DiagonalOperator) -> Self {
        FockOperator::Diagonal(d)
    }
}

/// Toeplitz operator by entrywise quadrature:
/// `entries[(k, m)] = int a(z) e_m(z) conj(e_k(z)) dlambda(z)`.
///
/// Requires `Q > K` so that the polynomial part of the integrand is
/// integrated exactly. Real-valued symbols yield Hermitian matrices; the
/// matrix is symmetrized after quadrature and the pre-symmetrization
/// asymmetry is recorded as a diagnostic.
pub fn toeplitz_quadrature(
    a: &Symbol,
    trunc: &BasisTruncation,
    grid: &QuadratureGrid,
) -> Result<OperatorMatrix> {
    if grid.n() != trunc.n() {
        return Err(FockError::InvalidArgument(
            "quadrature grid dimension does not match the truncation".into(),
        ));
    }
    if a.n() != trunc.n() {
        return Err(FockError::InvalidArgument(
            "symbol dimension does not match the truncation".into(),
        ));
    }
    if grid.points_per_axis() <= trunc.k_max() {
        return Err(FockError::QuadratureOrder {
            q: grid.points_per_axis(),
            k: trunc.k_max(),
        });
    }
    let d = trunc.dim();
    let mut sum = DMatrix::<C64>::zeros(d, d);
    let mut comp = DMatrix::<C64>::zeros(d, d);
    for (j, (node, &w)) in grid.nodes().iter().zip(grid.weights().iter()).enumerate() {
        let value = a.eval(node);
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(FockError::NonFiniteIntegrand {
                context: format!("toeplitz_quadrature of {}", a.name()),
                node_index: j,
                node: format!("{node:?}"),
            });
        }
        let basis = trunc.monomial_values(node);
        let scaled = value * w;
        for k in 0..d {
            let row_factor = basis[k].conj() * scaled;
            for m in 0..d {
                // Kahan step per entry, node order fixed by the grid.
                let term = row_factor * basis[m];
                let y = term - comp[(k, m)];
                let t = sum[(k, m)] + y;
                comp[(k, m)] = (t - sum[(k, m)]) - y;
                sum[(k, m)] = t;
            }
        }
    }
    let mut provenance = Provenance::new("toeplitz_quadrature")
        .with("symbol", a.name())
        .with("quad_points_per_axis", grid.points_per_axis());
    if a.is_real_valued() {
        let mut asym = 0.0f64;
        for k in 0..d {
            for m in 0..=k {
                let delta = (sum[(k, m)] - sum[(m, k)].conj()).norm();
                asym = asym.max(delta);
                let avg = (sum[(k, m)] + sum[(m, k)].conj()) * 0.5;
                sum[(k, m)] = avg;
                sum[(m, k)] = avg.conj();
            }
        }
        provenance.push("hermitian_asymmetry", format!("{asym:e}"));
    }
    Ok(OperatorMatrix::new(sum, trunc.clone(), provenance))
}

/// Radial Toeplitz operator on C^1: diagonal with
/// `lambda_m = (pi^m / m!) int_0^inf profile(r) r^{2m} e^{-pi r^2} 2 pi r dr`.
///
/// After the substitution `u = pi r^2` the integral is the mean of
/// `profile(sqrt(u/pi))` under the Gamma(m+1) distribution, evaluated with
/// a generalized Gauss-Laguerre rule of parameter `alpha = m` (the
/// normalization makes the `m!` cancel exactly).
pub fn toeplitz_radial<F>(profile: F, trunc: &BasisTruncation) -> Result<DiagonalOperator>
where
    F: Fn(f64) -> C64,
{
    if trunc.n() != 1 {
        return Err(FockError::InvalidArgument(
            "toeplitz_radial is the n = 1 fast path; route general n through \
             toeplitz_quadrature"
                .into(),
        ));
    }
    let q = (trunc.k_max() + 48).max(96);
    let mut eigenvalues = Vec::with_capacity(trunc.dim());
    for m in 0..=trunc.k_max() {
        let (nodes, weights) = gauss_laguerre_normalized(q, m as f64);
        let mut acc = crate::quadrature::KahanSum::new();
        for (&u, &w) in nodes.iter().zip(weights.iter()) {
            let value = profile((u / PI).sqrt());
            if !value.re.is_finite() || !value.im.is_finite() {
                return Err(FockError::NonFiniteIntegrand {
                    context: "toeplitz_radial profile".into(),
                    node_index: m,
                    node: format!("r = {}", (u / PI).sqrt()),
                });
            }
            acc.add(value * w);
        }
        eigenvalues.push(acc.value());
    }
    let provenance = Provenance::new("toeplitz_radial").with("laguerre_points", q);
    Ok(DiagonalOperator {
        eigenvalues,
        truncation: trunc.clone(),
        provenance,
    })
}

/// Toeplitz operator of the generalized Gaussian `phi_xi` by its closed
/// form: diagonal with `lambda_m = xi^{-n} (1 + 1/xi)^{-(|m| + n)}`
/// (principal branches).
pub fn gaussian_toeplitz(xi: C64, trunc: &BasisTruncation) -> Result<DiagonalOperator> {
    let ratio = gaussian_admissibility(xi);
    if ratio <= -0.5 {
        return Err(FockError::InadmissibleGaussian { xi, ratio });
    }
    let n = trunc.n() as f64;
    let log_xi = xi.ln();
    let log_base = (C64::new(1.0, 0.0) + C64::new(1.0, 0.0) / xi).ln();
    let provenance = Provenance::new("gaussian_toeplitz").with("xi", xi);
    Ok(DiagonalOperator::from_degree_fn(trunc, provenance, |deg| {
        (-n * log_xi - (deg as f64 + n) * log_base).exp()
    }))
}

/// Exact modulus ratio `|lambda_{m+1} / lambda_m| = |1 + 1/xi|^{-1}` of
/// consecutive Gaussian-Toeplitz eigenvalues.
pub fn gaussian_eigenvalue_ratio(xi: C64) -> f64 {
    1.0 / (C64::new(1.0, 0.0) + C64::new(1.0, 0.0) / xi).norm()
}

/// Guard band next to the trace-class boundary t = -1/2.
const SEMIGROUP_GUARD: f64 = 1e-6;

/// Operator heat semigroup: diagonal with eigenvalue
/// `t^{|m|} / (1 + t)^{n + |m|}` (with `0^0 = 1`, so `t = 0` is the
/// rank-one ground-state projection). Defined for `t > -1/2`.
pub fn heat_semigroup(t: f64, trunc: &BasisTruncation) -> Result<DiagonalOperator> {
    if t <= -0.5 {
        return Err(FockError::SemigroupParameter {
            t,
            reason: "the semigroup is trace-class only for t > -1/2 (at t = -1/2 it \
                     is no longer trace-class, merely bounded)"
                .into(),
        });
    }
    if t <= -0.5 + SEMIGROUP_GUARD {
        return Err(FockError::SemigroupParameter {
            t,
            reason: format!(
                "within the guard band (-1/2, -1/2 + {SEMIGROUP_GUARD}]: trace norm \
                 (1+2t)^-n blows up and conditioning degrades"
            ),
        });
    }
    if t < -0.45 {
        log::warn!(
            "heat_semigroup(t = {t}): trace norm (1+2t)^-n is large; expect \
             slow truncation convergence"
        );
    }
    let n = trunc.n() as i32;
    let provenance = Provenance::new("heat_semigroup").with("t", t);
    Ok(DiagonalOperator::from_degree_fn(trunc, provenance, |deg| {
        let num = t.powi(deg as i32);
        let den = (1.0 + t).powi(n + deg as i32);
        C64::new(num / den, 0.0)
    }))
}

/// Closed-form trace norm of the heat semigroup member at time `t`:
/// 1 for `t >= 0` and `(1 + 2t)^{-n}` for `t` in `(-1/2, 0)`.
pub fn heat_semigroup_trace_norm(t: f64, n: usize) -> f64 {
    if t >= 0.0 {
        1.0
    } else {
        (1.0 + 2.0 * t).powi(-(n as i32))
    }
}

/// Matrix elements of the Weyl (displacement) operator
/// `W_z f(w) = k_z(w) f(w - z)` in one coordinate, for degrees up to
/// `k_max`. With `s = pi |z|^2` and `p = min(m, k)`, `d = |k - m|`:
///
/// ```text
/// <W_z e_m, e_k> = sqrt(p!/(p+d)!) e^{-s/2} L_p^{(d)}(s) *
///                  (sqrt(pi) conj(z))^{k-m}   for k >= m,
///                  (-sqrt(pi) z)^{m-k}        for k <  m,
/// ```
///
/// where `L_p^{(d)}` is the associated Laguerre polynomial. With
/// `strip_gaussian` the factor `e^{-s/2}` is omitted (used by the
/// convolution quadrature, whose rule carries the Gaussian weight).
fn displacement_block(z: C64, k_max: usize, trunc: &BasisTruncation, strip_gaussian: bool) -> DMatrix<C64> {
    let dim = k_max + 1;
    let s = PI * z.norm_sqr();
    if s == 0.0 {
        return DMatrix::identity(dim, dim);
    }
    let r = z.norm();
    let log_amp = r.ln() + 0.5 * PI.ln();
    let damp = if strip_gaussian { 0.0 } else { -0.5 * s };
    // unit phases (conj z / |z|)^d and (-z / |z|)^d
    let up_unit = z.conj() / r;
    let dn_unit = -z / r;
    let mut up_pow = Vec::with_capacity(dim);
    let mut dn_pow = Vec::with_capacity(dim);
    let mut up = C64::new(1.0, 0.0);
    let mut dn = C64::new(1.0, 0.0);
    for _ in 0..dim {
        up_pow.push(up);
        dn_pow.push(dn);
        up *= up_unit;
        dn *= dn_unit;
    }
    let mut w = DMatrix::<C64>::zeros(dim, dim);
    for d in 0..dim {
        // upward recurrence for L_p^{(d)}(s)
        let mut l_prev = 0.0f64;
        let mut l = 1.0f64;
        for p in 0..dim - d {
            if p > 0 {
                let pf = p as f64;
                let next = ((2.0 * pf - 1.0 + d as f64 - s) * l
                    - (pf - 1.0 + d as f64) * l_prev)
                    / pf;
                l_prev = l;
                l = next;
            }
            let log_mag = 0.5 * (trunc.ln_factorial(p) - trunc.ln_factorial(p + d))
                + d as f64 * log_amp
                + damp;
            let mag = log_mag.exp() * l;
            w[(p + d, p)] = mag * up_pow[d];
            if d > 0 {
                w[(p, p + d)] = mag * dn_pow[d];
            }
        }
    }
    w
}

/// Full displacement matrix on the graded truncation, assembled as the
/// tensor product of per-coordinate blocks.
pub(crate) fn displacement_entries(
    z: &[C64],
    trunc: &BasisTruncation,
    strip_gaussian: bool,
) -> DMatrix<C64> {
    assert_eq!(z.len(), trunc.n());
    if trunc.n() == 1 {
        return displacement_block(z[0], trunc.k_max(), trunc, strip_gaussian);
    }
    let blocks: Vec<DMatrix<C64>> = z
        .iter()
        .map(|&zj| displacement_block(zj, trunc.k_max(), trunc, strip_gaussian))
        .collect();
    let d = trunc.dim();
    let mut w = DMatrix::<C64>::zeros(d, d);
    let indices = trunc.indices();
    for (row, mi_row) in indices.iter().enumerate() {
        for (col, mi_col) in indices.iter().enumerate() {
            let mut prod = C64::new(1.0, 0.0);
            for (j, block) in blocks.iter().enumerate() {
                prod *= block[(mi_row.entries()[j], mi_col.entries()[j])];
                if prod == C64::new(0.0, 0.0) {
                    break;
                }
            }
            w[(row, col)] = prod;
        }
    }
    w
}

/// Weyl (displacement) operator `W_z` in the truncated basis, from the
/// associated-Laguerre closed form (validated against the quadrature
/// oracle; see [`displacement_matrix_quadrature`]).
pub fn displacement_matrix(z: &[C64], trunc: &BasisTruncation) -> OperatorMatrix {
    let entries = displacement_entries(z, trunc, false);
    let provenance = Provenance::new("displacement_matrix").with("z", format!("{z:?}"));
    OperatorMatrix::new(entries, trunc.clone(), provenance)
}

/// Brute-force quadrature oracle for the displacement matrix:
/// `<W_z e_m, e_k> = int k_z(w) e_m(w - z) conj(e_k(w)) dlambda(w)`.
///
/// Kept alongside the closed form as an independent route; used by the
/// validation suite, not by production paths (a quadrature-built
/// displacement at every convolution node would dominate runtime).
pub fn displacement_matrix_quadrature(
    z: &[C64],
    trunc: &BasisTruncation,
    grid: &QuadratureGrid,
) -> Result<OperatorMatrix> {
    if grid.n() != trunc.n() {
        return Err(FockError::InvalidArgument(
            "quadrature grid dimension does not match the truncation".into(),
        ));
    }
    let d = trunc.dim();
    let n = trunc.n();
    let z_norm_sq: f64 = z.iter().map(|zj| zj.norm_sqr()).sum();
    let mut sum = DMatrix::<C64>::zeros(d, d);
    let mut comp = DMatrix::<C64>::zeros(d, d);
    let mut shifted = vec![C64::new(0.0, 0.0); n];
    for (node, &weight) in grid.nodes().iter().zip(grid.weights().iter()) {
        // k_z(w) = exp(pi conj(z) . w - pi |z|^2 / 2)
        let dot: C64 = z.iter().zip(node.iter()).map(|(zj, wj)| zj.conj() * wj).sum();
        let kz = (PI * dot - 0.5 * PI * z_norm_sq).exp();
        for j in 0..n {
            shifted[j] = node[j] - z[j];
        }
        let basis_shifted = trunc.monomial_values(&shifted);
        let basis = trunc.monomial_values(node);
        let scaled = kz * weight;
        for k in 0..d {
            let row_factor = basis[k].conj() * scaled;
            for m in 0..d {
                let term = row_factor * basis_shifted[m];
                let y = term - comp[(k, m)];
                let t = sum[(k, m)] + y;
                comp[(k, m)] = (t - sum[(k, m)]) - y;
                sum[(k, m)] = t;
            }
        }
    }
    let provenance = Provenance::new("displacement_matrix_quadrature")
        .with("z", format!("{z:?}"))
        .with("quad_points_per_axis", grid.points_per_axis());
    Ok(OperatorMatrix::new(sum, trunc.clone(), provenance))
}

/// Truncation leakage `1 - ||P_D W_z e_m||^2` per basis column.
pub fn displacement_column_leakage(z: &[C64], trunc: &BasisTruncation) -> Vec<f64> {
    let w = displacement_entries(z, trunc, false);
    (0..trunc.dim())
        .map(|m| {
            let col_norm_sq: f64 = (0..trunc.dim()).map(|k| w[(k, m)].norm_sqr()).sum();
            (1.0 - col_norm_sq).max(0.0)
        })
        .collect()
}

/// QHA translation `alpha_z(S) = W_z S W_z^*` in the truncated basis.
///
/// Returns the translated operator together with the leakage diagnostic
/// `max_m (1 - ||P_D W_z e_m||^2)`.
pub fn translate_operator(z: &[C64], s: &OperatorMatrix) -> Result<(OperatorMatrix, f64)> {
    if z.len() != s.truncation.n() {
        return Err(FockError::InvalidArgument(
            "translation point dimension does not match the operator".into(),
        ));
    }
    let w = displacement_matrix(z, &s.truncation);
    let leakage = displacement_column_leakage(z, &s.truncation)
        .into_iter()
        .fold(0.0, f64::max);
    let entries = &w.entries * &s.entries * w.entries.adjoint();
    let provenance = Provenance::new("translate_operator")
        .with("z", format!("{z:?}"))
        .with("inner", &s.provenance)
        .with("leakage", format!("{leakage:e}"));
    Ok((
        OperatorMatrix::new(entries, s.truncation.clone(), provenance),
        leakage,
    ))
}

/// Basic projection `E_m f = <f, e_m> e_m`.
pub fn basic_projection(m: &MultiIndex, trunc: &BasisTruncation) -> Result<DiagonalOperator> {
    let pos = trunc.index_of(m).ok_or_else(|| {
        FockError::InvalidArgument(format!(
            "multi-index {m} of degree {} exceeds the truncation K = {}",
            m.degree(),
            trunc.k_max()
        ))
    })?;
    let mut eigenvalues = vec![C64::new(0.0, 0.0); trunc.dim()];
    eigenvalues[pos] = C64::new(1.0, 0.0);
    Ok(DiagonalOperator {
        eigenvalues,
        truncation: trunc.clone(),
        provenance: Provenance::new("basic_projection").with("m", m),
    })
}

/// Rank-one operator `k_z (x) k_z` (the translated ground-state
/// projection), built directly from kernel coefficients.
pub fn kernel_projection(z: &[C64], trunc: &BasisTruncation) -> OperatorMatrix {
    let coeffs = kernel_coefficients(z, trunc).coeffs;
    let d = trunc.dim();
    let mut entries = DMatrix::<C64>::zeros(d, d);
    for k in 0..d {
        for m in 0..d {
            entries[(k, m)] = coeffs[k] * coeffs[m].conj();
        }
    }
    OperatorMatrix::new(
        entries,
        trunc.clone(),
        Provenance::new("kernel_projection").with("z", format!("{z:?}")),
    )
}

/// Toeplitz operator of a [`Symbol`], choosing the fastest exact path:
/// Gaussian closed form when available, else entrywise quadrature.
pub fn toeplitz_of_symbol(
    a: &Symbol,
    trunc: &BasisTruncation,
    grid: &QuadratureGrid,
) -> Result<FockOperator> {
    match a.kind() {
        SymbolKind::Gaussian { xi } => Ok(FockOperator::Diagonal(gaussian_toeplitz(*xi, trunc)?)),
        _ => Ok(FockOperator::Dense(toeplitz_quadrature(a, trunc, grid)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::build_grid;
    use crate::symbols::heat_kernel_real;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Composite-Simpson radial oracle for diagonal Toeplitz eigenvalues:
    /// (pi^m/m!) int profile(r) r^{2m} e^{-pi r^2} 2 pi r dr, evaluated in
    /// log space.
    fn radial_eigenvalue_oracle<F: Fn(f64) -> f64>(profile: F, m: usize) -> f64 {
        let ln_fact: f64 = (2..=m).map(|j| (j as f64).ln()).sum();
        let steps = 40_000;
        let hi = 7.0;
        let h = hi / steps as f64;
        let integrand = |r: f64| {
            if r == 0.0 {
                return 0.0;
            }
            let log_weight = m as f64 * PI.ln() - ln_fact + (2 * m + 1) as f64 * r.ln()
                - PI * r * r
                + (2.0 * PI).ln();
            profile(r) * log_weight.exp()
        };
        let mut acc = integrand(0.0) + integrand(hi);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * integrand(i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn toeplitz_of_one_is_identity() {
        let trunc = BasisTruncation::new(1, 10).unwrap();
        let grid = build_grid(1, 16).unwrap();
        let one = Symbol::constant(c(1.0, 0.0), 1);
        let t = toeplitz_quadrature(&one, &trunc, &grid).unwrap();
        let id = OperatorMatrix::identity(&trunc);
        assert!(t.max_abs_entry_diff(&id) < 1e-12);
    }

    #[test]
    fn toeplitz_rejects_low_quadrature_order() {
        let trunc = BasisTruncation::new(1, 16).unwrap();
        let grid = build_grid(1, 16).unwrap();
        let one = Symbol::constant(c(1.0, 0.0), 1);
        match toeplitz_quadrature(&one, &trunc, &grid) {
            Err(FockError::QuadratureOrder { q: 16, k: 16 }) => {}
            other => panic!("expected order error, got {other:?}"),
        }
    }

    #[test]
    fn toeplitz_of_radial_power_is_number_operator() {
        // oracle first: the radial integral equals m + 1
        for m in [0usize, 1, 4, 9] {
            let oracle = radial_eigenvalue_oracle(|r| PI * r * r, m);
            assert!(
                (oracle - (m as f64 + 1.0)).abs() < 1e-9,
                "oracle m={m}: {oracle}"
            );
        }
        let trunc = BasisTruncation::new(1, 10).unwrap();
        let grid = build_grid(1, 24).unwrap();
        let a = Symbol::radial_power(1, 1);
        let t = toeplitz_quadrature(&a, &trunc, &grid).unwrap();
        for pos in 0..trunc.dim() {
            let expected = pos as f64 + 1.0;
            assert!(
                (t.entries[(pos, pos)] - c(expected, 0.0)).norm() < 1e-10 * expected,
                "m={pos}: {}",
                t.entries[(pos, pos)]
            );
        }
        // off-diagonal entries vanish for radial symbols
        for k in 0..trunc.dim() {
            for m in 0..trunc.dim() {
                if k != m {
                    assert!(t.entries[(k, m)].norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn toeplitz_of_heat_kernel_is_geometric() {
        let trunc = BasisTruncation::new(1, 12).unwrap();
        let grid = build_grid(1, 48).unwrap();
        let a = heat_kernel_real(1.0, 1).unwrap();
        let t = toeplitz_quadrature(&a, &trunc, &grid).unwrap();
        for pos in 0..trunc.dim() {
            let expected = 0.5f64.powi(pos as i32 + 1);
            assert!(
                (t.entries[(pos, pos)] - c(expected, 0.0)).norm() < 1e-12 + 1e-10 * expected,
                "m={pos}: {} vs {expected}",
                t.entries[(pos, pos)]
            );
        }
    }

    #[test]
    fn radial_path_matches_oracles() {
        let trunc = BasisTruncation::new(1, 40).unwrap();

        let flat = toeplitz_radial(|_| c(1.0, 0.0), &trunc).unwrap();
        for ev in &flat.eigenvalues {
            assert!((ev - c(1.0, 0.0)).norm() < 1e-12);
        }

        let number = toeplitz_radial(|r| c(PI * r * r, 0.0), &trunc).unwrap();
        for (m, ev) in number.eigenvalues.iter().enumerate() {
            assert!(
                (ev - c(m as f64 + 1.0, 0.0)).norm() < 1e-10 * (m as f64 + 1.0),
                "m={m}: {ev}"
            );
        }

        for t in [0.5f64, 2.7] {
            let phi = toeplitz_radial(
                move |r| c((-PI * r * r / t).exp() / t, 0.0),
                &trunc,
            )
            .unwrap();
            for (m, ev) in phi.eigenvalues.iter().enumerate() {
                let expected = t.powi(m as i32) / (1.0 + t).powi(m as i32 + 1);
                assert!(
                    (ev - c(expected, 0.0)).norm() < 1e-10 * expected.max(1e-12),
                    "t={t} m={m}: {ev} vs {expected}"
                );
            }
        }
    }

    #[test]
    fn gaussian_toeplitz_closed_forms() {
        let trunc = BasisTruncation::new(1, 20).unwrap();
        let unit = gaussian_toeplitz(c(1.0, 0.0), &trunc).unwrap();
        for (m, ev) in unit.eigenvalues.iter().enumerate() {
            let expected = 0.5f64.powi(m as i32 + 1);
            assert!((ev - c(expected, 0.0)).norm() < 1e-15, "m={m}: {ev}");
        }

        let imag = gaussian_toeplitz(c(0.0, 1.0), &trunc).unwrap();
        for (m, ev) in imag.eigenvalues.iter().enumerate() {
            let expected = 2.0f64.powf(-((m as f64) + 1.0) / 2.0);
            assert!((ev.norm() - expected).abs() < 1e-14, "m={m}: {ev}");
        }
        assert!((gaussian_eigenvalue_ratio(c(0.0, 1.0)) - 2.0f64.powf(-0.5)).abs() < 1e-15);

        assert!(gaussian_toeplitz(c(-0.2, 0.0), &trunc).is_err());
    }

    #[test]
    fn gaussian_branch_validated_against_quadrature() {
        // principal-branch closed form vs the quadrature route for a
        // sample of admissible complex parameters
        let trunc = BasisTruncation::new(1, 10).unwrap();
        let grid = build_grid(1, 64).unwrap();
        for xi in [c(0.3, 0.4), c(0.0, 1.0), c(1.0, 0.5), c(2.0, -1.0)] {
            let closed = gaussian_toeplitz(xi, &trunc).unwrap();
            let sym = crate::symbols::heat_kernel(xi, 1).unwrap();
            let quad = toeplitz_quadrature(&sym, &trunc, &grid).unwrap();
            for (m, ev) in closed.eigenvalues.iter().enumerate() {
                assert!(
                    (quad.entries[(m, m)] - ev).norm() < 1e-8,
                    "xi={xi} m={m}: {} vs {ev}",
                    quad.entries[(m, m)]
                );
            }
        }
    }

    #[test]
    fn heat_semigroup_eigenvalues_and_guards() {
        let trunc = BasisTruncation::new(1, 30).unwrap();

        let zero = heat_semigroup(0.0, &trunc).unwrap();
        assert_eq!(zero.eigenvalues[0], c(1.0, 0.0));
        for ev in &zero.eigenvalues[1..] {
            assert_eq!(*ev, c(0.0, 0.0));
        }

        let one = heat_semigroup(1.0, &trunc).unwrap();
        for (m, ev) in one.eigenvalues.iter().enumerate() {
            assert!((ev - c(0.5f64.powi(m as i32 + 1), 0.0)).norm() < 1e-15);
        }

        let neg = heat_semigroup(-0.25, &trunc).unwrap();
        assert!((neg.eigenvalues[0] - c(4.0 / 3.0, 0.0)).norm() < 1e-15);
        assert!((neg.eigenvalues[1] - c(-4.0 / 9.0, 0.0)).norm() < 1e-15);
        assert!((neg.eigenvalues[2] - c(4.0 / 27.0, 0.0)).norm() < 1e-15);

        assert!(heat_semigroup(-0.5, &trunc).is_err());
        assert!(heat_semigroup(-0.4999999, &trunc).is_err());
        assert!(heat_semigroup(-0.45, &trunc).is_ok());

        // trace-norm tail: sum |lambda| -> (1+2t)^{-1} at t = -1/4
        let trunc_long = BasisTruncation::new(1, 120).unwrap();
        let neg = heat_semigroup(-0.25, &trunc_long).unwrap();
        assert!((neg.trace_norm() - 2.0).abs() < 1e-12);
        assert!((heat_semigroup_trace_norm(-0.25, 1) - 2.0).abs() < 1e-15);
        assert!((heat_semigroup_trace_norm(3.0, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn heat_semigroup_multidim_eigenvalues() {
        let trunc = BasisTruncation::new(2, 6).unwrap();
        let op = heat_semigroup(0.5, &trunc).unwrap();
        for (pos, ev) in op.eigenvalues.iter().enumerate() {
            let deg = trunc.degree_at(pos) as i32;
            let expected = 0.5f64.powi(deg) / 1.5f64.powi(2 + deg);
            assert!((ev - c(expected, 0.0)).norm() < 1e-15);
        }
        assert!(op.is_radial());
    }

    #[test]
    fn displacement_at_origin_is_identity() {
        let trunc = BasisTruncation::new(1, 8).unwrap();
        let w = displacement_matrix(&[c(0.0, 0.0)], &trunc);
        assert!(w.max_abs_entry_diff(&OperatorMatrix::identity(&trunc)) == 0.0);
        let leak = displacement_column_leakage(&[c(0.0, 0.0)], &trunc);
        assert!(leak.iter().all(|&l| l == 0.0));
    }

    #[test]
    fn displacement_ground_state_column_is_kernel() {
        // W_z e_0 = k_z, so column 0 must match kernel coefficients
        let trunc = BasisTruncation::new(1, 14).unwrap();
        let z = [c(0.6, -0.8)];
        let w = displacement_matrix(&z, &trunc);
        let kv = kernel_coefficients(&z, &trunc);
        for k in 0..trunc.dim() {
            assert!(
                (w.entries[(k, 0)] - kv.coeffs[k]).norm() < 1e-14,
                "k={k}: {} vs {}",
                w.entries[(k, 0)],
                kv.coeffs[k]
            );
        }
        // |z| = 1 entry (0,0) = e^{-pi/2}
        let w1 = displacement_matrix(&[c(1.0, 0.0)], &trunc);
        assert!((w1.entries[(0, 0)].re - (-PI / 2.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn displacement_matches_quadrature_oracle() {
        let trunc = BasisTruncation::new(1, 6).unwrap();
        let grid = build_grid(1, 48).unwrap();
        for z in [[c(0.8, 0.0)], [c(-0.3, 0.9)], [c(0.5, 0.5)]] {
            let closed = displacement_matrix(&z, &trunc);
            let oracle = displacement_matrix_quadrature(&z, &trunc, &grid).unwrap();
            assert!(
                closed.max_abs_entry_diff(&oracle) < 1e-9,
                "z={z:?}: diff {}",
                closed.max_abs_entry_diff(&oracle)
            );
        }
    }

    #[test]
    fn displacement_tensor_matches_quadrature_oracle_n2() {
        let trunc = BasisTruncation::new(2, 3).unwrap();
        let grid = build_grid(2, 16).unwrap();
        let z = [c(0.4, -0.2), c(-0.5, 0.3)];
        let closed = displacement_matrix(&z, &trunc);
        let oracle = displacement_matrix_quadrature(&z, &trunc, &grid).unwrap();
        assert!(
            closed.max_abs_entry_diff(&oracle) < 1e-9,
            "diff {}",
            closed.max_abs_entry_diff(&oracle)
        );
    }

    #[test]
    fn displacement_columns_unit_norm_up_to_leakage() {
        let trunc = BasisTruncation::new(1, 24).unwrap();
        let z = [c(0.5, 0.3)];
        let w = displacement_matrix(&z, &trunc);
        let leak = displacement_column_leakage(&z, &trunc);
        for (m, leak_m) in leak.iter().enumerate() {
            let col: f64 = (0..trunc.dim()).map(|k| w.entries[(k, m)].norm_sqr()).sum();
            assert!(col <= 1.0 + 1e-12, "column {m} norm {col}");
            assert!((col + leak_m - 1.0).abs() < 1e-12);
        }
        // Column orthogonality: (W* W)_{m m'} - delta equals the overlap of
        // the leaked components, so its modulus is bounded by
        // sqrt(leak_m leak_m'). Leakages below machine epsilon round to
        // zero, hence the 1e-15 guard on each factor.
        let prod = w.entries.adjoint() * &w.entries;
        for m in 0..trunc.dim() {
            for mp in 0..trunc.dim() {
                let expected = if m == mp { 1.0 } else { 0.0 };
                let dev = (prod[(m, mp)] - c(expected, 0.0)).norm();
                let bound = ((leak[m] + 1e-15) * (leak[mp] + 1e-15)).sqrt() + 1e-12;
                assert!(dev <= bound, "({m},{mp}): dev {dev} > bound {bound}");
            }
        }
    }

    #[test]
    fn displacement_inverse_is_negative_shift() {
        let trunc = BasisTruncation::new(1, 20).unwrap();
        let z = [c(0.4, -0.6)];
        let zneg = [c(-0.4, 0.6)];
        let w_pos = displacement_matrix(&z, &trunc);
        let w_neg = displacement_matrix(&zneg, &trunc);
        // (W_z W_{-z})_{k m} - delta = -<(1-P) W_{-z} e_m, (1-P) W_{-z} e_k>,
        // bounded by the geometric mean of the column leakages of W_{-z}.
        let leak = displacement_column_leakage(&zneg, &trunc);
        let prod = &w_pos.entries * &w_neg.entries;
        for k in 0..trunc.dim() {
            for m in 0..trunc.dim() {
                let expected = if k == m { 1.0 } else { 0.0 };
                let dev = (prod[(k, m)] - c(expected, 0.0)).norm();
                let bound = ((leak[k] + 1e-15) * (leak[m] + 1e-15)).sqrt() + 1e-12;
                assert!(dev <= bound, "({k},{m}): dev {dev} > bound {bound}");
            }
        }
    }

    #[test]
    fn translation_fixes_operators_at_origin() {
        let trunc = BasisTruncation::new(1, 10).unwrap();
        let s = heat_semigroup(1.0, &trunc).unwrap().to_matrix();
        let (translated, leak) = translate_operator(&[c(0.0, 0.0)], &s).unwrap();
        assert!(translated.max_abs_entry_diff(&s) == 0.0);
        assert!(leak == 0.0);
    }

    #[test]
    fn translated_ground_projection_is_kernel_projection() {
        let trunc = BasisTruncation::new(1, 28).unwrap();
        let phi0 = heat_semigroup(0.0, &trunc).unwrap().to_matrix();
        let z = [c(0.7, 0.4)];
        let (translated, leak) = translate_operator(&z, &phi0).unwrap();
        let direct = kernel_projection(&z, &trunc);
        assert!(
            translated.max_abs_entry_diff(&direct) < 10.0 * leak + 1e-12,
            "diff {} leak {leak}",
            translated.max_abs_entry_diff(&direct)
        );
    }

    #[test]
    fn translation_preserves_trace_within_leakage() {
        let trunc = BasisTruncation::new(1, 32).unwrap();
        let s = heat_semigroup(1.0, &trunc).unwrap().to_matrix();
        for z in [[c(0.5, 0.0)], [c(-0.6, 0.8)]] {
            let (translated, leak) = translate_operator(&z, &s).unwrap();
            let drift = (translated.trace() - s.trace()).norm();
            assert!(drift <= 10.0 * leak + 1e-12, "drift {drift} leak {leak}");
        }
    }

    #[test]
    fn basic_projections_resolve_identity() {
        let trunc = BasisTruncation::new(2, 3).unwrap();
        let mut acc = DMatrix::<C64>::zeros(trunc.dim(), trunc.dim());
        for m in trunc.indices() {
            acc += basic_projection(m, &trunc).unwrap().to_matrix().entries;
        }
        let id = DMatrix::<C64>::identity(trunc.dim(), trunc.dim());
        assert!((acc - id).iter().map(|e| e.norm()).fold(0.0, f64::max) < 1e-15);

        // E_m E_k = 0 for m != k
        let e1 = basic_projection(&MultiIndex::new(vec![1, 0]), &trunc).unwrap();
        let e2 = basic_projection(&MultiIndex::new(vec![0, 1]), &trunc).unwrap();
        let prod = e1.to_matrix().entries * e2.to_matrix().entries;
        assert!(prod.iter().all(|e| e.norm() == 0.0));

        assert!(basic_projection(&MultiIndex::new(vec![4, 0]), &trunc).is_err());
    }

    #[test]
    fn three_toeplitz_paths_agree() {
        // tensor quadrature, radial quadrature and the Gaussian closed
        // form agree entrywise to 1e-9 for heat-kernel symbols, and all
        // match the heat semigroup diagonal
        let trunc = BasisTruncation::new(1, 24).unwrap();
        let grid = build_grid(1, 64).unwrap();
        for t in [0.5f64, 1.0, 2.0] {
            let a = heat_kernel_real(t, 1).unwrap();
            let quad = toeplitz_quadrature(&a, &trunc, &grid).unwrap();
            let radial = toeplitz_radial(move |r| c((-PI * r * r / t).exp() / t, 0.0), &trunc)
                .unwrap()
                .to_matrix();
            let closed = gaussian_toeplitz(c(t, 0.0), &trunc).unwrap().to_matrix();
            let semigroup = heat_semigroup(t, &trunc).unwrap().to_matrix();
            assert!(quad.max_abs_entry_diff(&radial) < 1e-9, "t={t} quad vs radial");
            assert!(quad.max_abs_entry_diff(&closed) < 1e-9, "t={t} quad vs closed");
            assert!(radial.max_abs_entry_diff(&closed) < 1e-9, "t={t} radial vs closed");
            assert!(
                closed.max_abs_entry_diff(&semigroup) < 1e-15,
                "t={t} closed vs semigroup"
            );
        }
    }

    #[test]
    fn parity_conjugation_signs() {
        let trunc = BasisTruncation::new(1, 3).unwrap();
        let mut entries = DMatrix::<C64>::zeros(4, 4);
        for k in 0..4 {
            for m in 0..4 {
                entries[(k, m)] = c(1.0, 0.0);
            }
        }
        let op = OperatorMatrix::new(entries, trunc, Provenance::new("test"));
        let conj = op.parity_conjugate();
        for k in 0..4 {
            for m in 0..4 {
                let expected = if (k + m) % 2 == 1 { -1.0 } else { 1.0 };
                assert_eq!(conj.entries[(k, m)], c(expected, 0.0));
            }
        }
    }
}
