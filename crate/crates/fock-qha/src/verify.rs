//! Verification harness: numerical checks of the convolution identities,
//! the Berger-Coburn boundedness bounds, Schatten-norm inequalities, the
//! Gaussian boundedness frontier and compactness diagnostics, over a
//! configurable symbol family.
//!
//! Every check produces a [`VerificationReport`] whose parameter block
//! reproduces the run exactly. For Gaussian inputs each check has closed
//! forms on both sides; quadrature values must agree with the closed
//! forms before any pass/fail verdict is recorded.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{FockError, Result};
use crate::fock::BasisTruncation;
use crate::operators::{
    basic_projection, gaussian_eigenvalue_ratio, gaussian_toeplitz, heat_semigroup,
    heat_semigroup_trace_norm, toeplitz_of_symbol, toeplitz_quadrature, DiagonalOperator,
    FockOperator,
};
use crate::qha::{
    berezin, convolve_fn_op, convolve_op_op, heat_flow_operator, reconstruct_toeplitz,
};
use crate::quadrature::{build_grid, integrate, QuadratureGrid};
use crate::report::{bump_symbol, RunConfig};
use crate::spectral::{classify_growth, convergence_table, spectral_summary, GrowthClass};
use crate::symbols::{
    cartesian_grid, check_a2_membership, heat_kernel, heat_kernel_real, heat_transform,
    heat_transform_symbol, Symbol,
};

const PI: f64 = std::f64::consts::PI;

/// Structured outcome of one checked identity or inequality.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub check_id: String,
    /// Full parameter record, sufficient to reproduce the run.
    pub params: Vec<(String, String)>,
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Advisory reports never fail a suite.
    pub advisory: bool,
    /// Diagnostics: leakage, convergence status, constant choices.
    pub notes: Vec<String>,
}

impl VerificationReport {
    fn evaluate(
        check_id: &str,
        params: Vec<(String, String)>,
        lhs: C64,
        rhs: C64,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        VerificationReport {
            check_id: check_id.to_string(),
            params,
            lhs,
            rhs,
            residual,
            tolerance,
            passed: residual <= tolerance,
            advisory: false,
            notes: Vec::new(),
        }
    }

    fn advisory(mut self) -> Self {
        self.advisory = true;
        self
    }

    fn note(mut self, text: impl Into<String>) -> Self {
        self.notes.push(text.into());
        self
    }
}

/// Per-check numeric configuration, derived from the run configuration.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub n: usize,
    pub k_max: usize,
    pub quad_points: usize,
    pub tol: f64,
    pub grid_half_width: f64,
    pub grid_count: usize,
}

impl CheckConfig {
    pub fn from_run(config: &RunConfig) -> Self {
        CheckConfig {
            n: config.n,
            k_max: config.k_max,
            quad_points: config.quad_points,
            tol: config.tol,
            grid_half_width: 2.0,
            grid_count: if config.n == 1 { 11 } else { 5 },
        }
    }

    pub fn with_k(mut self, k_max: usize) -> Self {
        self.k_max = k_max;
        if self.quad_points <= k_max {
            self.quad_points = k_max + 8;
        }
        self
    }

    fn trunc(&self) -> Result<BasisTruncation> {
        BasisTruncation::new(self.n, self.k_max)
    }

    fn grid(&self) -> Result<QuadratureGrid> {
        build_grid(self.n, self.quad_points)
    }

    fn sample_points(&self) -> Vec<Vec<C64>> {
        cartesian_grid(self.n, self.grid_half_width, self.grid_count)
    }

    fn base_params(&self) -> Vec<(String, String)> {
        vec![
            ("n".into(), self.n.to_string()),
            ("k_max".into(), self.k_max.to_string()),
            ("quad_points".into(), self.quad_points.to_string()),
        ]
    }
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig::from_run(&RunConfig::default())
    }
}

/// The default symbol family: real and complex Gaussians, a bounded
/// oscillatory symbol, the radial polynomial `pi |z|^2`, a smooth bump
/// and the constant 1. Every member must pass the square-integrable
/// translates stability probe before use.
pub struct SymbolFamily {
    pub members: Vec<Symbol>,
}

impl SymbolFamily {
    /// Construct and validate the default family.
    pub fn default_family(n: usize) -> Result<SymbolFamily> {
        let members = vec![
            Symbol::constant(C64::new(1.0, 0.0), n),
            heat_kernel_real(0.5, n)?,
            heat_kernel_real(1.0, n)?,
            heat_kernel_real(2.0, n)?,
            heat_kernel(C64::new(0.0, 1.0), n)?,
            Symbol::oscillatory(2.0 * PI, n),
            Symbol::radial_power(1, n),
            bump_symbol(n),
        ];
        let family = SymbolFamily { members };
        family.validate_membership(n)?;
        Ok(family)
    }

    /// Stability of the membership probe under quadrature refinement.
    fn validate_membership(&self, n: usize) -> Result<()> {
        let probes = vec![vec![C64::new(0.0, 0.0); n], vec![C64::new(0.7, -0.4); n]];
        let coarse_grid = build_grid(n, 40)?;
        let fine_grid = build_grid(n, 80)?;
        for member in &self.members {
            let coarse = check_a2_membership(member, &probes, &coarse_grid)?;
            let fine = check_a2_membership(member, &probes, &fine_grid)?;
            for (c, f) in coarse.iter().zip(fine.iter()) {
                // instability (non-membership) shows up as orders-of-magnitude
                // drift; 1e-5 accommodates the slower quartic-decay members
                if !c.is_finite() || !f.is_finite() || (c - f).abs() > 1e-5 * f.abs().max(1.0) {
                    return Err(FockError::Unconverged(format!(
                        "membership probe of {} unstable under refinement: {c} vs {f}",
                        member.name()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Members with a known sup-norm (these have bounded Toeplitz
    /// operators in the test families).
    pub fn bounded_members(&self) -> Vec<&Symbol> {
        self.members
            .iter()
            .filter(|s| s.bounded_hint().is_some())
            .collect()
    }

    pub fn gaussian_members(&self) -> Vec<&Symbol> {
        self.members
            .iter()
            .filter(|s| s.gaussian_parameter().is_some())
            .collect()
    }
}

/// Closed-form L^p(dm) norm of the generalized Gaussian `phi_sigma`:
/// `||phi_sigma||_p = |sigma|^{-n} (p Re(1/sigma))^{-n/p}`.
pub fn gaussian_lp_norm(sigma: C64, p: f64, n: usize) -> f64 {
    let c = (C64::new(1.0, 0.0) / sigma).re;
    sigma.norm().powi(-(n as i32)) * (p * c).powf(-(n as f64) / p)
}

/// Quadrature of `int |f|^p dm` for a function decaying like
/// `e^{-pi |z|^2 / decay_scale}`: substitute `z = sqrt(sigma) u` with
/// `sigma = decay_scale / p`, then the integrand matches the rule weight.
/// Evaluated in log space to keep the stripped factor `e^{pi |u|^2}` in
/// range.
pub fn lp_norm_dm<F>(f: F, decay_scale: f64, p: f64, grid: &QuadratureGrid) -> Result<f64>
where
    F: Fn(&[C64]) -> C64,
{
    if decay_scale <= 0.0 || p < 1.0 {
        return Err(FockError::InvalidArgument(
            "lp_norm_dm requires decay_scale > 0 and p >= 1".into(),
        ));
    }
    let n = grid.n();
    let sigma = decay_scale / p;
    let sqrt_sigma = sigma.sqrt();
    let mut scaled = vec![C64::new(0.0, 0.0); n];
    let integral = integrate(grid, |u: &[C64]| {
        let mut norm_sq = 0.0;
        for j in 0..n {
            scaled[j] = sqrt_sigma * u[j];
            norm_sq += u[j].norm_sqr();
        }
        let amp = f(&scaled).norm();
        if amp == 0.0 {
            return C64::new(0.0, 0.0);
        }
        C64::new((p * amp.ln() + PI * norm_sq).exp(), 0.0)
    })?;
    Ok((sigma.powi(n as i32) * integral.re).powf(1.0 / p))
}

/// Operator-norm convergence gate: build the operator at `k_max - 8` and
/// `k_max`, require the op norms to agree to `rtol`.
fn converged_op_norm(
    a: &Symbol,
    cfg: &CheckConfig,
    rtol: f64,
) -> Result<(FockOperator, f64)> {
    let trunc = cfg.trunc()?;
    let grid = cfg.grid()?;
    let op = toeplitz_of_symbol(a, &trunc, &grid)?;
    let norm_hi = spectral_summary(&op, &[1.0])?.op_norm;
    let k_lo = cfg.k_max.saturating_sub(8).max(4);
    let trunc_lo = BasisTruncation::new(cfg.n, k_lo)?;
    let op_lo = toeplitz_of_symbol(a, &trunc_lo, &grid)?;
    let norm_lo = spectral_summary(&op_lo, &[1.0])?.op_norm;
    let drift = (norm_hi - norm_lo).abs() / norm_hi.max(1e-300);
    if drift > rtol {
        return Err(FockError::Unconverged(format!(
            "op norm of T_{} not converged: {norm_lo} at K={k_lo} vs {norm_hi} at K={}",
            a.name(),
            cfg.k_max
        )));
    }
    Ok((op, norm_hi))
}

/// Upper Berger-Coburn bound `sup |B_t(a)| <= c(t) ||T_a||` for `t > 1/2`.
///
/// The harness uses the proof-accurate constant
/// `c(t) = ||Phi_{t-1}||_1` (equal to `(2t-1)^{-n}` on `(1/2, 1)` and to 1
/// for `t >= 1`); the literal printed constant `(2t-1)^{-n}` is evaluated
/// and reported alongside, since it is contradicted by a closed-form
/// Gaussian counterexample at `t >= 1` (see
/// [`check_bc_counterexample`]).
pub fn check_bc_upper(a: &Symbol, t: f64, cfg: &CheckConfig) -> Result<VerificationReport> {
    if t <= 0.5 {
        return Err(FockError::InvalidArgument(format!(
            "the upper bound needs t > 1/2, got {t}"
        )));
    }
    let (op, op_norm) = converged_op_norm(a, cfg, 1e-6)?;
    let grid = cfg.grid()?;
    let points = cfg.sample_points();

    let fn_route = heat_transform(a, t, &points, &grid)?;
    let op_route = heat_flow_operator(&op, t, &points)?;
    let sup_fn = fn_route.sup_abs();
    let sup_op = op_route.payload.sup_abs();
    let leakage = op_route.leakage;
    let mut notes = Vec::new();

    // Self-calibration gate for Gaussian symbols: both routes must match
    // the closed form sup |phi_{xi+t}| = |(xi+t)^{-n}| before the verdict
    // counts.
    if let Some(xi) = a.gaussian_parameter() {
        let sigma = xi + C64::new(t, 0.0);
        let closed = (-(cfg.n as f64) * sigma.ln()).exp().norm();
        for (route, sup) in [("function", sup_fn), ("operator", sup_op)] {
            let drift = (sup - closed).abs();
            if drift > (1e-7 * closed.max(1.0)).max(10.0 * leakage) {
                return Err(FockError::Unconverged(format!(
                    "calibration gate: {route} route sup {sup} vs closed form {closed} \
                     for {}",
                    a.name()
                )));
            }
        }
        notes.push(format!("calibration gate passed against closed form {closed:.12e}"));
    } else {
        notes.push("grid-sup only (no closed form for this symbol)".into());
    }

    let lhs = sup_fn.max(sup_op);
    let c_proof = heat_semigroup_trace_norm(t - 1.0, cfg.n);
    let c_printed = (2.0 * t - 1.0).powi(-(cfg.n as i32));
    let rhs = c_proof * op_norm;
    let rhs_printed = c_printed * op_norm;
    let residual = (lhs - rhs).max(0.0);

    let mut params = cfg.base_params();
    params.push(("symbol".into(), a.name().to_string()));
    params.push(("t".into(), t.to_string()));
    params.push(("op_norm".into(), format!("{op_norm:.12e}")));
    params.push(("c_proof".into(), format!("{c_proof:.12e}")));
    params.push(("c_printed".into(), format!("{c_printed:.12e}")));

    let mut report = VerificationReport::evaluate(
        "bc-upper",
        params,
        C64::new(lhs, 0.0),
        C64::new(rhs, 0.0),
        residual,
        cfg.tol,
    );
    report.notes = notes;
    report = report.note(format!(
        "printed-constant side: {rhs_printed:.12e} ({})",
        if lhs <= rhs_printed + cfg.tol {
            "also satisfied"
        } else {
            "violated; see bc-counterexample"
        }
    ));
    report = report.note(format!("op-route leakage {leakage:e}"));
    Ok(report)
}

/// The documented discrepancy: for `a = phi_1`, `t = 2`, `n = 1` the
/// printed constant `(2t-1)^{-n}` fails while the proof constant
/// `||Phi_{t-1}||_1 = 1` holds. All four quantities are closed forms; the
/// numeric routes must reproduce them to 1e-12.
pub fn check_bc_counterexample(cfg: &CheckConfig) -> Result<VerificationReport> {
    let cfg = CheckConfig {
        n: 1,
        ..cfg.clone()
    };
    let t = 2.0;
    let trunc = cfg.trunc()?;
    let phi1 = FockOperator::Diagonal(heat_semigroup(1.0, &trunc)?);
    let origin = vec![vec![C64::new(0.0, 0.0)]];

    // sup |B_2(phi_1)| = phi_3(0) = 1/3, attained at the origin
    let flow = heat_flow_operator(&phi1, t, &origin)?;
    let sup_numeric = flow.payload.values[0].re;
    let sup_closed = 1.0 / 3.0;

    // ||T_phi1|| = 1/2
    let op_norm = spectral_summary(&phi1, &[1.0])?.op_norm;

    let printed = (2.0 * t - 1.0).powi(-1) * op_norm; // 1/6
    let proof = heat_semigroup_trace_norm(t - 1.0, 1) * op_norm; // 1/2

    let numeric_ok = (sup_numeric - sup_closed).abs() <= 1e-12
        && (op_norm - 0.5).abs() <= 1e-12
        && (printed - 1.0 / 6.0).abs() <= 1e-12
        && (proof - 0.5).abs() <= 1e-12;
    let printed_fails = sup_closed > printed + 1e-12;
    let proof_holds = sup_closed <= proof + 1e-12;

    let mut params = cfg.base_params();
    params.push(("symbol".into(), "heat(1)".into()));
    params.push(("t".into(), t.to_string()));
    params.push(("sup_numeric".into(), format!("{sup_numeric:.15e}")));
    params.push(("op_norm".into(), format!("{op_norm:.15e}")));

    let passed = numeric_ok && printed_fails && proof_holds;
    let mut report = VerificationReport::evaluate(
        "bc-counterexample",
        params,
        C64::new(sup_closed, 0.0),
        C64::new(printed, 0.0),
        if passed { 0.0 } else { f64::INFINITY },
        0.0,
    );
    report = report.note(
        "sup |B_2(phi_1)| = 1/3 exceeds the printed bound (2t-1)^-1 ||T|| = 1/6; \
         the proof constant ||Phi_1||_1 ||T|| = 1/2 holds",
    );
    report.passed = passed;
    Ok(report)
}

/// Reconstruction check: `B_t(a) * Phi_{-t}` must reproduce the directly
/// built Toeplitz matrix, `t` in `(0, 1/2)`. Also records the norm ratio
/// `||T_a|| (1-2t)^n / sup |B_t(a)|` as an empirical constant sample.
pub fn check_bc_reconstruction(
    a: &Symbol,
    t: f64,
    cfg: &CheckConfig,
    tolerance: f64,
) -> Result<VerificationReport> {
    if !(0.0 < t && t < 0.5) {
        return Err(FockError::InvalidArgument(format!(
            "reconstruction needs t in (0, 1/2), got {t}"
        )));
    }
    let trunc = cfg.trunc()?;
    let grid = cfg.grid()?;
    let bta = heat_transform_symbol(a, t, &grid)?;
    let rec = reconstruct_toeplitz(&bta, t, &trunc, &grid)?;
    let direct = toeplitz_of_symbol(a, &trunc, &grid)?.to_dense();
    let residual = rec.payload.relative_frobenius_distance(&direct);

    let op_norm = spectral_summary(&FockOperator::Dense(direct), &[1.0])?.op_norm;
    let sup_bta = heat_transform(a, t, &cfg.sample_points(), &grid)?.sup_abs();
    let c_sample = op_norm * (1.0 - 2.0 * t).powi(cfg.n as i32) / sup_bta.max(1e-300);

    let mut params = cfg.base_params();
    params.push(("symbol".into(), a.name().to_string()));
    params.push(("t".into(), t.to_string()));
    params.push(("c_pi_sample".into(), format!("{c_sample:.12e}")));
    params.push(("leakage".into(), format!("{:e}", rec.leakage)));

    Ok(VerificationReport::evaluate(
        "bc-reconstruction",
        params,
        C64::new(residual, 0.0),
        C64::new(0.0, 0.0),
        residual,
        tolerance,
    )
    .note(format!(
        "route: {}",
        if a.gaussian_parameter().is_some() {
            "closed-form heat transform"
        } else {
            "quadrature heat transform"
        }
    )))
}

/// Closed-form route of the reconstruction for the Gaussian family: the
/// heat transform of `phi_s` is `phi_{s+t}` and its convolution with the
/// negative-time semigroup member lands back on the semigroup at `s`, so
/// the reconstruction equals the closed diagonal exactly. What remains to
/// verify numerically is that the direct quadrature Toeplitz matrix
/// agrees with that closed form.
pub fn check_bc_reconstruction_closed(
    s: f64,
    t: f64,
    cfg: &CheckConfig,
) -> Result<VerificationReport> {
    if !(0.0 < t && t < 0.5) {
        return Err(FockError::InvalidArgument(format!(
            "reconstruction needs t in (0, 1/2), got {t}"
        )));
    }
    let trunc = cfg.trunc()?;
    let grid = cfg.grid()?;
    let closed = heat_semigroup(s, &trunc)?.to_matrix();
    let a = heat_kernel_real(s, cfg.n)?;
    let direct = toeplitz_quadrature(&a, &trunc, &grid)?;
    let residual = closed.relative_frobenius_distance(&direct);
    let mut params = cfg.base_params();
    params.push(("s".into(), s.to_string()));
    params.push(("t".into(), t.to_string()));
    Ok(VerificationReport::evaluate(
        "bc-reconstruction-closed",
        params,
        C64::new(residual, 0.0),
        C64::new(0.0, 0.0),
        residual,
        1e-8,
    )
    .note("closed route: heat transform and convolution by the semigroup identity"))
}

/// Schatten-side comparison for one `(a, p, t)`. Both sides of the
/// relevant inequality are computed; because the constant is only known
/// empirically, the report records the implied bound instead of failing,
/// except in the constant-free case `p = 1`, `t < 1/2`.
pub fn check_schatten(a: &Symbol, p: f64, t: f64, cfg: &CheckConfig) -> Result<VerificationReport> {
    if p < 1.0 {
        return Err(FockError::InvalidArgument(format!(
            "Schatten exponent must be >= 1, got {p}"
        )));
    }
    let xi = a.gaussian_parameter().ok_or_else(|| {
        FockError::Unconverged(format!(
            "Schatten check needs closed-form function norms; symbol {} is not Gaussian \
             (|B_t(a)|^p is not integrable for oscillatory members)",
            a.name()
        ))
    })?;
    let grid = cfg.grid()?;
    let trunc = cfg.trunc()?;
    let ta = FockOperator::Diagonal(gaussian_toeplitz(xi, &trunc)?);
    let ta_norms = spectral_summary(&ta, &[p])?;
    let ta_p = ta_norms.schatten_norm(p).unwrap();

    // ||B_t(a)||_p = ||phi_{xi+t}||_p closed form, with a quadrature gate.
    let sigma = xi + C64::new(t, 0.0);
    let bt_p_closed = gaussian_lp_norm(sigma, p, cfg.n);
    let bta = heat_kernel(sigma, cfg.n)?;
    let decay = 1.0 / (C64::new(1.0, 0.0) / sigma).re;
    let bt_p_quad = lp_norm_dm(|z| bta.eval(z), decay, p, &grid)?;
    if (bt_p_quad - bt_p_closed).abs() > 1e-7 * bt_p_closed.max(1.0) {
        return Err(FockError::Unconverged(format!(
            "calibration gate: quadrature L^p norm {bt_p_quad} vs closed {bt_p_closed}"
        )));
    }

    let mut params = cfg.base_params();
    params.push(("symbol".into(), a.name().to_string()));
    params.push(("p".into(), p.to_string()));
    params.push(("t".into(), t.to_string()));
    params.push(("schatten_T".into(), format!("{ta_p:.12e}")));
    params.push(("lp_B".into(), format!("{bt_p_closed:.12e}")));

    if t > 0.5 {
        // ||B_t(a)||_p <= C^{1/p} ||Phi_{t-1}||_1 ||T_a||_p
        let base = heat_semigroup_trace_norm(t - 1.0, cfg.n) * ta_p;
        let implied = (bt_p_closed / base.max(1e-300)).powf(p);
        let report = VerificationReport::evaluate(
            "schatten-upper",
            params,
            C64::new(bt_p_closed, 0.0),
            C64::new(base, 0.0),
            0.0,
            f64::INFINITY,
        )
        .advisory()
        .note(format!("implied C_pi sample: {implied:.12e}"))
        .note("constant-dependent; recorded as an implied bound, not pass/fail");
        Ok(report)
    } else if !(0.0 < t && t < 0.5) {
        Err(FockError::InvalidArgument(format!(
            "t must lie in (0, 1/2) or (1/2, inf), got {t}"
        )))
    } else if p == 1.0 {
        // constant-free: ||T_a||_1 <= (1-2t)^{-n} ||B_t(a)||_1
        let rhs = (1.0 - 2.0 * t).powi(-(cfg.n as i32)) * bt_p_closed;
        let residual = (ta_p - rhs).max(0.0);
        Ok(VerificationReport::evaluate(
            "schatten-reconstruction-p1",
            params,
            C64::new(ta_p, 0.0),
            C64::new(rhs, 0.0),
            residual,
            cfg.tol,
        ))
    } else {
        let base = (1.0 - 2.0 * t).powi(-(cfg.n as i32)) * bt_p_closed;
        let implied = (ta_p / base.max(1e-300)).powf(p / (p - 1.0));
        Ok(VerificationReport::evaluate(
            "schatten-reconstruction",
            params,
            C64::new(ta_p, 0.0),
            C64::new(base, 0.0),
            0.0,
            f64::INFINITY,
        )
        .advisory()
        .note(format!("implied C_pi sample: {implied:.12e}")))
    }
}

/// One empirical constant sample.
#[derive(Debug, Clone, Serialize)]
pub struct CPiSample {
    /// "op-conv", "fn-conv-norm-form" or "fn-conv-printed-form".
    pub kind: String,
    pub label: String,
    pub p: f64,
    pub ratio: f64,
}

/// Empirical estimate of the undetermined Young constant.
#[derive(Debug, Clone, Serialize)]
pub struct CPiEstimate {
    /// sup of `||S * T||_p / (||S||_p ||T||_1)` over the sample set.
    pub op_conv_lower_bound: f64,
    /// sup of `||psi * S||_p / (||psi||_p ||S||_1)` (the norm-consistent
    /// reading of the function-operator Young inequality).
    pub fn_conv_norm_form_lower_bound: f64,
    /// sup of `||psi * S||_p / (||psi||_1 ||S||_p)` (the literal printed
    /// reading, reported alongside; see the notes).
    pub fn_conv_printed_form_lower_bound: f64,
    pub samples: Vec<CPiSample>,
    /// Constant-free sup-norm checks (non-advisory).
    pub reports: Vec<VerificationReport>,
}

/// Schatten-p norm of a heat semigroup member at generous truncation.
fn semigroup_schatten(s: f64, p: f64, n: usize) -> Result<f64> {
    let trunc = BasisTruncation::new(n, 200)?;
    let op = FockOperator::Diagonal(heat_semigroup(s, &trunc)?);
    Ok(spectral_summary(&op, &[p])?.schatten_norm(p).unwrap())
}

/// Estimate the Young constant from semigroup pairs, where every norm has
/// a closed form; one quadrature cross-check guards the closed forms.
pub fn estimate_c_pi(cfg: &CheckConfig, ps: &[f64]) -> Result<CPiEstimate> {
    let mut samples = Vec::new();
    let mut reports = Vec::new();
    let mut op_bound = 0.0f64;
    let mut fn_norm_bound = 0.0f64;
    let mut fn_printed_bound = 0.0f64;

    // operator * operator: (Phi_s, Phi_u) gives the function phi_{s+u+1}
    let op_pairs = [(0.0, 0.0), (1.0, 0.5), (0.5, 0.25), (2.0, 1.0)];
    for &(s, u) in &op_pairs {
        let v = s + u + 1.0;
        for &p in ps {
            let num = gaussian_lp_norm(C64::new(v, 0.0), p, cfg.n);
            let den = semigroup_schatten(s, p, cfg.n)? * heat_semigroup_trace_norm(u, cfg.n);
            let ratio = num / den;
            op_bound = op_bound.max(ratio);
            samples.push(CPiSample {
                kind: "op-conv".into(),
                label: format!("(Phi_{s}, Phi_{u})"),
                p,
                ratio,
            });
        }
    }

    // quadrature cross-check of the closed form used above:
    // || Phi_1 * Phi_0.5 ||_2 = || phi_2.5 ||_2 by direct quadrature
    {
        let grid = cfg.grid()?;
        let phi25 = heat_kernel_real(2.5, cfg.n)?;
        let closed = gaussian_lp_norm(C64::new(2.5, 0.0), 2.0, cfg.n);
        let quad = lp_norm_dm(|z| phi25.eval(z), 2.5, 2.0, &grid)?;
        let residual = (quad - closed).abs();
        reports.push(
            VerificationReport::evaluate(
                "c-pi-quadrature-gate",
                cfg.base_params(),
                C64::new(quad, 0.0),
                C64::new(closed, 0.0),
                residual,
                1e-8 * closed.max(1.0),
            )
            .note("closed Gaussian L^2 norm vs direct quadrature".to_string()),
        );
    }

    // function * operator: phi_s * Phi_u = Phi_{s+u}; both readings of the
    // Young inequality are reported, since the printed form's norms do not
    // match its hypotheses.
    let fn_pairs = [(0.5, 0.5), (1.0, 0.0), (0.25, 1.0)];
    for &(s, u) in &fn_pairs {
        for &p in ps {
            let num = semigroup_schatten(s + u, p, cfg.n)?;
            let psi_p = gaussian_lp_norm(C64::new(s, 0.0), p, cfg.n);
            let psi_1 = 1.0; // heat kernels have unit mass
            let s_1 = heat_semigroup_trace_norm(u, cfg.n);
            let s_p = semigroup_schatten(u, p, cfg.n)?;
            let norm_form = num / (psi_p * s_1);
            let printed_form = num / (psi_1 * s_p);
            fn_norm_bound = fn_norm_bound.max(norm_form);
            fn_printed_bound = fn_printed_bound.max(printed_form);
            samples.push(CPiSample {
                kind: "fn-conv-norm-form".into(),
                label: format!("(phi_{s}, Phi_{u})"),
                p,
                ratio: norm_form,
            });
            samples.push(CPiSample {
                kind: "fn-conv-printed-form".into(),
                label: format!("(phi_{s}, Phi_{u})"),
                p,
                ratio: printed_form,
            });
        }
    }

    // constant-free sup-norm bound ||S * T||_inf <= ||S|| ||T||_1,
    // checked on the sample grid (non-advisory).
    {
        let trunc = cfg.trunc()?;
        let points = cfg.sample_points();
        let e1 = basic_projection(&crate::fock::MultiIndex::new(vec![1; trunc.n()]), &trunc);
        let pairs: Vec<(String, FockOperator, FockOperator)> = vec![
            (
                "(Phi, Phi)".into(),
                FockOperator::Diagonal(heat_semigroup(0.0, &trunc)?),
                FockOperator::Diagonal(heat_semigroup(0.0, &trunc)?),
            ),
            (
                "(Phi_1, Phi_0.5)".into(),
                FockOperator::Diagonal(heat_semigroup(1.0, &trunc)?),
                FockOperator::Diagonal(heat_semigroup(0.5, &trunc)?),
            ),
            (
                "(E_1, Phi_1)".into(),
                FockOperator::Diagonal(e1?),
                FockOperator::Diagonal(heat_semigroup(1.0, &trunc)?),
            ),
            (
                "(I, Phi_1)".into(),
                FockOperator::Diagonal(DiagonalOperator::identity(&trunc)),
                FockOperator::Diagonal(heat_semigroup(1.0, &trunc)?),
            ),
        ];
        for (label, s_op, t_op) in pairs {
            let conv = convolve_op_op(&s_op, &t_op, &points)?;
            let sup = conv.payload.sup_abs();
            let s_norm = spectral_summary(&s_op, &[1.0])?.op_norm;
            let t_trace = match &t_op {
                FockOperator::Diagonal(d) => d.trace_norm(),
                FockOperator::Dense(_) => unreachable!(),
            };
            let ratio = sup / (s_norm * t_trace);
            let mut params = cfg.base_params();
            params.push(("pair".into(), label.clone()));
            reports.push(VerificationReport::evaluate(
                "c-pi-sup-bound",
                params,
                C64::new(ratio, 0.0),
                C64::new(1.0, 0.0),
                (ratio - 1.0).max(0.0),
                1e-9,
            ));
            samples.push(CPiSample {
                kind: "op-conv-sup".into(),
                label,
                p: f64::INFINITY,
                ratio,
            });
        }
    }

    Ok(CPiEstimate {
        op_conv_lower_bound: op_bound,
        fn_conv_norm_form_lower_bound: fn_norm_bound,
        fn_conv_printed_form_lower_bound: fn_printed_bound,
        samples,
        reports,
    })
}

/// Admissible parameter grid for the boundedness frontier, built as
/// `xi = 1/u` with `u = -1 + rho e^{i theta}`, so that the frontier
/// quantity `|1 + 1/xi| = rho` is controlled exactly by construction.
pub fn default_frontier_grid() -> Vec<C64> {
    let rhos = [0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.25, 1.5, 2.0];
    let thetas_deg = [
        -55.0, -40.0, -30.0, -20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0, 55.0,
    ];
    let mut grid = Vec::new();
    for &rho in &rhos {
        for &deg in &thetas_deg {
            let theta = deg * PI / 180.0;
            // admissibility Re(1/xi) = Re(u) > -1/2 means rho cos(theta) > 1/2
            if rho * theta.cos() <= 0.5 + 1e-9 {
                continue;
            }
            let u = C64::new(-1.0 + rho * theta.cos(), rho * theta.sin());
            // u -> 0 is the constant-symbol limit xi -> infinity
            if u.norm() < 0.05 {
                continue;
            }
            grid.push(C64::new(1.0, 0.0) / u);
        }
    }
    grid
}

/// Classify every Gaussian parameter by the exact eigenvalue-ratio
/// criterion (`|1 + 1/xi| >= 1` means bounded) and cross-check against
/// the growth of the truncated operator norms; the check passes only with
/// zero disagreements.
pub fn check_gaussian_frontier(xi_grid: &[C64], cfg: &CheckConfig) -> Result<VerificationReport> {
    let mut disagreements = Vec::new();
    for (i, &xi) in xi_grid.iter().enumerate() {
        let ratio = crate::symbols::gaussian_admissibility(xi);
        if ratio <= -0.5 {
            return Err(FockError::InadmissibleGaussian { xi, ratio });
        }
        let r = 1.0 / gaussian_eigenvalue_ratio(xi); // |1 + 1/xi|
        let frontier_bounded = r >= 1.0 - 1e-12;
        let table = convergence_table(
            |k| {
                let trunc = BasisTruncation::new(cfg.n, k)?;
                Ok(FockOperator::Diagonal(gaussian_toeplitz(xi, &trunc)?))
            },
            &[10, 60, 110],
            &[1.0],
        )?;
        let growth_bounded = classify_growth(&table.op_norms(), 1e-9) == GrowthClass::Bounded;
        if frontier_bounded != growth_bounded {
            disagreements.push(format!(
                "xi = {xi}: |1 + 1/xi| = {r} says {} but growth says {}",
                if frontier_bounded { "bounded" } else { "unbounded" },
                if growth_bounded { "bounded" } else { "unbounded" },
            ));
        }
        let _ = i;
    }
    let mut params = cfg.base_params();
    params.push(("grid_size".into(), xi_grid.len().to_string()));
    let mut report = VerificationReport::evaluate(
        "gaussian-frontier",
        params,
        C64::new(disagreements.len() as f64, 0.0),
        C64::new(0.0, 0.0),
        disagreements.len() as f64,
        0.0,
    );
    for d in disagreements {
        report = report.note(d);
    }
    Ok(report)
}

/// Compactness diagnostics (advisory): singular-value decay profile of
/// `T_a` stabilized under truncation refinement plus boundary decay of
/// the heat transform. `expect_compact` is the ground truth for the test
/// family, when known.
pub fn check_compactness_flow(
    a: &Symbol,
    t_pairs: &[(f64, f64)],
    cfg: &CheckConfig,
    expect_compact: Option<bool>,
) -> Result<VerificationReport> {
    for &(t_lo, t_hi) in t_pairs {
        if !(0.0 < t_lo && t_lo < 0.5 && t_hi > 0.5) {
            return Err(FockError::InvalidArgument(format!(
                "compactness pair needs t_lo in (0,1/2), t_hi > 1/2; got ({t_lo}, {t_hi})"
            )));
        }
    }
    let grid = cfg.grid()?;
    let k_lo = (cfg.k_max / 2).max(8);
    let trunc_lo = BasisTruncation::new(cfg.n, k_lo)?;
    let trunc_hi = cfg.trunc()?;
    let op_lo = toeplitz_of_symbol(a, &trunc_lo, &grid)?;
    let op_hi = toeplitz_of_symbol(a, &trunc_hi, &grid)?;
    let sv_lo = spectral_summary(&op_lo, &[1.0])?.singular_values;
    let sv_hi = spectral_summary(&op_hi, &[1.0])?.singular_values;

    let head = 6.min(sv_lo.len());
    let stabilized = sv_lo[..head]
        .iter()
        .zip(sv_hi[..head].iter())
        .all(|(lo, hi)| (lo - hi).abs() <= 1e-6 * (1.0 + sv_hi[0]));
    let tail_index = sv_hi.len().saturating_sub(1).min(30);
    let decays = sv_hi[tail_index] <= 1e-3 * sv_hi[0].max(1e-300);
    let sigma_profile_compact = stabilized && decays;

    // boundary decay of B_{t_hi}(a) relative to its grid sup
    let mut boundary_decays = true;
    let hw = cfg.grid_half_width;
    let corners: Vec<Vec<C64>> = [(hw, hw), (-hw, hw), (hw, -hw), (-hw, -hw)]
        .iter()
        .map(|&(x, y)| {
            let mut p = vec![C64::new(0.0, 0.0); cfg.n];
            p[0] = C64::new(x, y);
            p
        })
        .collect();
    for &(_, t_hi) in t_pairs {
        let full = heat_transform(a, t_hi, &cfg.sample_points(), &grid)?;
        let sup = full.sup_abs();
        let boundary = heat_transform(a, t_hi, &corners, &grid)?;
        if boundary.sup_abs() > 0.2 * sup {
            boundary_decays = false;
        }
    }
    let classified_compact = sigma_profile_compact && boundary_decays;

    let mut params = cfg.base_params();
    params.push(("symbol".into(), a.name().to_string()));
    params.push(("t_pairs".into(), format!("{t_pairs:?}")));
    params.push(("sigma_profile_compact".into(), sigma_profile_compact.to_string()));
    params.push(("boundary_decays".into(), boundary_decays.to_string()));
    params.push(("classified_compact".into(), classified_compact.to_string()));

    let matches = expect_compact.map(|e| e == classified_compact).unwrap_or(true);
    let mut report = VerificationReport::evaluate(
        "compactness-flow",
        params,
        C64::new(classified_compact as u8 as f64, 0.0),
        C64::new(expect_compact.map(|e| e as u8 as f64).unwrap_or(f64::NAN), 0.0),
        if matches { 0.0 } else { 1.0 },
        0.0,
    )
    .advisory();
    report.passed = matches;
    report = report.note("diagnostic only: finite truncations cannot certify compactness");
    Ok(report)
}

/// Grid identity `Phi_s * Phi_t = phi_{s+t+1}` checked pointwise in
/// relative error on a 5x5 sample grid.
pub fn check_semigroup_pair_grid(s: f64, t: f64, cfg: &CheckConfig) -> Result<VerificationReport> {
    let trunc = cfg.trunc()?;
    let points = cartesian_grid(cfg.n, 2.0, 5);
    let conv = convolve_op_op(
        &FockOperator::Diagonal(heat_semigroup(s, &trunc)?),
        &FockOperator::Diagonal(heat_semigroup(t, &trunc)?),
        &points,
    )?;
    let reference = heat_kernel_real(s + t + 1.0, cfg.n)?;
    let mut max_rel = 0.0f64;
    for (p, v) in points.iter().zip(conv.payload.values.iter()) {
        let expected = reference.eval(p);
        let rel = (v - expected).norm() / expected.norm();
        max_rel = max_rel.max(rel);
    }
    let mut params = cfg.base_params();
    params.push(("s".into(), s.to_string()));
    params.push(("t".into(), t.to_string()));
    Ok(VerificationReport::evaluate(
        "identity-semigroup-pair",
        params,
        C64::new(max_rel, 0.0),
        C64::new(0.0, 0.0),
        max_rel,
        1e-6,
    )
    .note(format!("max kernel leakage {:e}", conv.leakage)))
}

/// Entrywise identity `phi_t * Phi_s = Phi_{t+s}`.
pub fn check_heat_shift(t: f64, s: f64, cfg: &CheckConfig) -> Result<VerificationReport> {
    let trunc = cfg.trunc()?;
    let grid = cfg.grid()?;
    let kernel = heat_kernel_real(t, cfg.n)?;
    let conv = convolve_fn_op(&kernel, &FockOperator::Diagonal(heat_semigroup(s, &trunc)?), &grid)?;
    let expected = heat_semigroup(t + s, &trunc)?.to_matrix();
    let diff = conv.payload.max_abs_entry_diff(&expected);
    let mut params = cfg.base_params();
    params.push(("t".into(), t.to_string()));
    params.push(("s".into(), s.to_string()));
    Ok(VerificationReport::evaluate(
        "identity-heat-shift",
        params,
        C64::new(diff, 0.0),
        C64::new(0.0, 0.0),
        diff,
        1e-7,
    )
    .note(format!("leakage {:e}", conv.leakage)))
}

/// Entrywise identity `a * Phi = T_a` against the direct Toeplitz build.
pub fn check_toeplitz_as_convolution(a: &Symbol, cfg: &CheckConfig) -> Result<VerificationReport> {
    let trunc = cfg.trunc()?;
    let grid = cfg.grid()?;
    let phi0 = FockOperator::Diagonal(heat_semigroup(0.0, &trunc)?);
    let conv = convolve_fn_op(a, &phi0, &grid)?;
    let direct = toeplitz_quadrature(a, &trunc, &grid)?;
    // the convolution route has no reason to be Hermitian-symmetrized, so
    // compare against the raw quadrature for real symbols too
    let diff = conv.payload.max_abs_entry_diff(&direct);
    let mut params = cfg.base_params();
    params.push(("symbol".into(), a.name().to_string()));
    Ok(VerificationReport::evaluate(
        "identity-toeplitz-convolution",
        params,
        C64::new(diff, 0.0),
        C64::new(0.0, 0.0),
        diff,
        1e-7,
    )
    .note(format!("leakage {:e}", conv.leakage)))
}

/// Berezin route equivalence `B(S) = S * Phi` over a set of test
/// operators.
pub fn check_berezin_equivalence(cfg: &CheckConfig) -> Result<VerificationReport> {
    let trunc = cfg.trunc()?;
    let grid = cfg.grid()?;
    let points = cfg.sample_points();
    let phi0 = FockOperator::Diagonal(heat_semigroup(0.0, &trunc)?);
    let osc = Symbol::oscillatory(2.0 * PI, cfg.n);
    let ops: Vec<FockOperator> = vec![
        FockOperator::Diagonal(heat_semigroup(1.0, &trunc)?),
        FockOperator::Diagonal(basic_projection(
            &crate::fock::MultiIndex::new(vec![1; cfg.n]),
            &trunc,
        )?),
        FockOperator::Dense(toeplitz_quadrature(&osc, &trunc, &grid)?),
    ];
    let mut worst = 0.0f64;
    for s in &ops {
        let via_kernel = berezin(s, &points)?;
        let via_conv = convolve_op_op(s, &phi0, &points)?;
        worst = worst.max(via_kernel.max_abs_diff(&via_conv.payload));
    }
    Ok(VerificationReport::evaluate(
        "identity-berezin-equivalence",
        cfg.base_params(),
        C64::new(worst, 0.0),
        C64::new(0.0, 0.0),
        worst,
        1e-9,
    ))
}

/// Two-route heat flow: the function-side transform and the operator
/// convolution must agree on the sample grid within
/// `max(1e-6, 10 * leakage)`.
pub fn check_heat_flow_two_route(
    a: &Symbol,
    t: f64,
    cfg: &CheckConfig,
) -> Result<VerificationReport> {
    let trunc = cfg.trunc()?;
    let grid = cfg.grid()?;
    let points = cfg.sample_points();
    let ta = toeplitz_of_symbol(a, &trunc, &grid)?;
    let fn_route = heat_transform(a, t, &points, &grid)?;
    let op_route = heat_flow_operator(&ta, t, &points)?;
    let sup_diff = fn_route.max_abs_diff(&op_route.payload);
    let tolerance = (10.0 * op_route.leakage).max(1e-6);
    let mut params = cfg.base_params();
    params.push(("symbol".into(), a.name().to_string()));
    params.push(("t".into(), t.to_string()));
    params.push(("leakage".into(), format!("{:e}", op_route.leakage)));
    Ok(VerificationReport::evaluate(
        "heat-flow-two-route",
        params,
        C64::new(sup_diff, 0.0),
        C64::new(0.0, 0.0),
        sup_diff,
        tolerance,
    ))
}

/// Closed form `E_m * Phi (z) = pi^{|m|} |z|^{2|m|} e^{-pi |z|^2} / m!`
/// for one-dimensional basis projections.
pub fn check_projection_convolution(m: usize, cfg: &CheckConfig) -> Result<VerificationReport> {
    let cfg = CheckConfig { n: 1, ..cfg.clone() };
    let trunc = cfg.trunc()?;
    let proj = basic_projection(&crate::fock::MultiIndex::new(vec![m]), &trunc)?;
    let phi0 = FockOperator::Diagonal(heat_semigroup(0.0, &trunc)?);
    let points = cartesian_grid(1, 1.5, 5);
    let conv = convolve_op_op(&FockOperator::Diagonal(proj), &phi0, &points)?;
    let ln_fact: f64 = (2..=m).map(|j| (j as f64).ln()).sum();
    let mut worst = 0.0f64;
    for (p, v) in points.iter().zip(conv.payload.values.iter()) {
        let s = p[0].norm_sqr();
        let expected = if s == 0.0 && m > 0 {
            0.0
        } else if m == 0 {
            (-PI * s).exp()
        } else {
            (m as f64 * (PI * s).ln() - ln_fact - PI * s).exp()
        };
        worst = worst.max((v - C64::new(expected, 0.0)).norm());
    }
    let mut params = cfg.base_params();
    params.push(("m".into(), m.to_string()));
    Ok(VerificationReport::evaluate(
        "identity-projection-convolution",
        params,
        C64::new(worst, 0.0),
        C64::new(0.0, 0.0),
        worst,
        1e-10,
    ))
}

/// Berezin injectivity proxy: operators whose Berezin transforms agree to
/// 1e-10 on the default grid must agree entrywise to 1e-6 (exercised on
/// the three Toeplitz construction routes for the same Gaussian symbol,
/// plus a negative control).
pub fn check_berezin_injectivity_proxy(cfg: &CheckConfig) -> Result<VerificationReport> {
    let trunc = cfg.trunc()?;
    let grid = cfg.grid()?;
    let points = cfg.sample_points();
    let a = heat_kernel_real(1.0, cfg.n)?;
    let routes: Vec<FockOperator> = vec![
        FockOperator::Dense(toeplitz_quadrature(&a, &trunc, &grid)?),
        FockOperator::Diagonal(gaussian_toeplitz(C64::new(1.0, 0.0), &trunc)?),
        FockOperator::Diagonal(heat_semigroup(1.0, &trunc)?),
    ];
    let transforms: Vec<_> = routes
        .iter()
        .map(|op| berezin(op, &points))
        .collect::<Result<_>>()?;
    let mut worst_matrix = 0.0f64;
    let mut proxy_applied = 0usize;
    for i in 0..routes.len() {
        for j in i + 1..routes.len() {
            let b_diff = transforms[i].max_abs_diff(&transforms[j]);
            if b_diff <= 1e-10 {
                proxy_applied += 1;
                let m_diff = routes[i]
                    .to_dense()
                    .max_abs_entry_diff(&routes[j].to_dense());
                worst_matrix = worst_matrix.max(m_diff);
            }
        }
    }
    // negative control: different operators have visibly different
    // transforms
    let other = berezin(
        &FockOperator::Diagonal(heat_semigroup(0.5, &trunc)?),
        &points,
    )?;
    let control = transforms[0].max_abs_diff(&other);
    let mut params = cfg.base_params();
    params.push(("pairs_with_matching_berezin".into(), proxy_applied.to_string()));
    let mut report = VerificationReport::evaluate(
        "identity-berezin-injectivity-proxy",
        params,
        C64::new(worst_matrix, 0.0),
        C64::new(0.0, 0.0),
        if proxy_applied > 0 { worst_matrix } else { f64::INFINITY },
        1e-6,
    );
    report = report.note(format!("negative control transform gap {control:.3e}"));
    if control < 1e-6 {
        report.passed = false;
        report = report.note("negative control failed: distinct operators look equal");
    }
    Ok(report)
}

/// Suites exposed by the command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Bc,
    Schatten,
    Identities,
    Frontier,
    Compactness,
    CPi,
}

impl Suite {
    pub fn parse(name: &str) -> Option<Suite> {
        match name {
            "bc" => Some(Suite::Bc),
            "schatten" => Some(Suite::Schatten),
            "identities" => Some(Suite::Identities),
            "frontier" => Some(Suite::Frontier),
            "compactness" => Some(Suite::Compactness),
            "c-pi" | "cpi" => Some(Suite::CPi),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Bc => "bc",
            Suite::Schatten => "schatten",
            Suite::Identities => "identities",
            Suite::Frontier => "frontier",
            Suite::Compactness => "compactness",
            Suite::CPi => "c-pi",
        }
    }
}

/// Collected results of one suite run.
#[derive(Debug, Serialize)]
pub struct SuiteOutcome {
    pub suite: String,
    pub reports: Vec<VerificationReport>,
    /// Checks whose prerequisites (norm convergence, calibration gates)
    /// failed; these produce no verdict.
    pub unconverged: Vec<String>,
}

impl SuiteOutcome {
    pub fn all_non_advisory_passed(&self) -> bool {
        self.reports.iter().all(|r| r.advisory || r.passed)
    }

    pub fn failed_checks(&self) -> Vec<&VerificationReport> {
        self.reports
            .iter()
            .filter(|r| !r.advisory && !r.passed)
            .collect()
    }
}

fn push_check(
    outcome: &mut SuiteOutcome,
    label: String,
    result: Result<VerificationReport>,
) -> Result<()> {
    match result {
        Ok(report) => outcome.reports.push(report),
        Err(FockError::Unconverged(reason)) => {
            outcome.unconverged.push(format!("{label}: {reason}"));
        }
        Err(other) => return Err(other),
    }
    Ok(())
}

/// Run one named suite over the default symbol family with the given
/// configuration.
pub fn run_suite(suite: Suite, config: &RunConfig) -> Result<SuiteOutcome> {
    let cfg = CheckConfig::from_run(config);
    let mut outcome = SuiteOutcome {
        suite: suite.name().to_string(),
        reports: Vec::new(),
        unconverged: Vec::new(),
    };
    match suite {
        Suite::Identities => {
            let pair_cfg = cfg.clone().with_k(cfg.k_max.max(40));
            for s in [0.25, 0.5, 1.0] {
                for t in [0.25, 0.5, 1.0] {
                    outcome
                        .reports
                        .push(check_semigroup_pair_grid(s, t, &pair_cfg)?);
                }
            }
            outcome
                .reports
                .push(check_semigroup_pair_grid(-0.25, 0.5, &pair_cfg)?);

            for (t, s) in [(0.5, 0.25), (0.25, 0.5), (1.0, 1.0), (0.5, -0.25)] {
                outcome.reports.push(check_heat_shift(t, s, &cfg)?);
            }

            let conv_symbols: Vec<Symbol> = vec![
                Symbol::constant(C64::new(1.0, 0.0), cfg.n),
                heat_kernel_real(1.0, cfg.n)?,
                Symbol::radial_power(1, cfg.n),
                Symbol::oscillatory(2.0 * PI, cfg.n),
            ];
            for a in &conv_symbols {
                outcome.reports.push(check_toeplitz_as_convolution(a, &cfg)?);
            }

            outcome.reports.push(check_berezin_equivalence(&cfg)?);

            let flow_cfg = cfg.clone().with_k(cfg.k_max.max(56));
            let family = SymbolFamily::default_family(cfg.n)?;
            for a in family.bounded_members() {
                for t in [0.6, 0.75, 1.0, 2.0] {
                    outcome
                        .reports
                        .push(check_heat_flow_two_route(a, t, &flow_cfg)?);
                }
            }

            for m in [0usize, 1, 2] {
                outcome.reports.push(check_projection_convolution(m, &cfg)?);
            }
            outcome
                .reports
                .push(check_berezin_injectivity_proxy(&cfg)?);
        }
        Suite::Bc => {
            let family = SymbolFamily::default_family(cfg.n)?;
            let symbols: Vec<Symbol> = match &config.symbol {
                Some(spec) => vec![spec.to_symbol(cfg.n)?],
                None => family.bounded_members().into_iter().cloned().collect(),
            };
            for a in &symbols {
                for &t in &config.t_grid {
                    if t <= 0.5 {
                        continue;
                    }
                    push_check(
                        &mut outcome,
                        format!("bc-upper {} t={t}", a.name()),
                        check_bc_upper(a, t, &cfg),
                    )?;
                }
            }
            outcome.reports.push(check_bc_counterexample(&cfg)?);

            // reconstruction side: the Gaussian members by quadrature
            // (1e-5) and by the closed route (1e-8), the oscillatory
            // symbol by quadrature (1e-4)
            for t in [0.1, 0.25, 0.4] {
                let mut rec_cfg = cfg.clone().with_k(reconstruction_k(t, 16));
                rec_cfg.quad_points = reconstruction_quad(t, rec_cfg.quad_points);
                for s in [0.5, 1.0] {
                    let a = heat_kernel_real(s, cfg.n)?;
                    push_check(
                        &mut outcome,
                        format!("bc-reconstruction heat({s}) t={t}"),
                        check_bc_reconstruction(&a, t, &rec_cfg, 1e-5),
                    )?;
                    outcome
                        .reports
                        .push(check_bc_reconstruction_closed(s, t, &cfg)?);
                }
            }
            let mut osc_cfg = cfg.clone().with_k(32);
            osc_cfg.quad_points = reconstruction_quad(0.25, osc_cfg.quad_points);
            push_check(
                &mut outcome,
                "bc-reconstruction oscillatory t=0.25".into(),
                check_bc_reconstruction(&Symbol::oscillatory(2.0 * PI, cfg.n), 0.25, &osc_cfg, 1e-4),
            )?;
        }
        Suite::Schatten => {
            // closed-form anchors (non-advisory)
            let trunc = BasisTruncation::new(cfg.n, 60)?;
            let phi1 = FockOperator::Diagonal(heat_semigroup(1.0, &trunc)?);
            let norm2 = spectral_summary(&phi1, &[2.0])?.schatten_norm(2.0).unwrap();
            let expected = 3.0f64.powf(-0.5);
            outcome.reports.push(VerificationReport::evaluate(
                "schatten-phi1-hs-norm",
                cfg.base_params(),
                C64::new(norm2, 0.0),
                C64::new(expected, 0.0),
                (norm2 - expected).abs(),
                1e-8,
            ));
            let grid = cfg.grid()?;
            let phi2 = heat_kernel_real(2.0, cfg.n)?;
            let quad = lp_norm_dm(|z| phi2.eval(z), 2.0, 2.0, &grid)?;
            let closed = gaussian_lp_norm(C64::new(2.0, 0.0), 2.0, cfg.n);
            outcome.reports.push(VerificationReport::evaluate(
                "schatten-heat-transform-l2",
                cfg.base_params(),
                C64::new(quad, 0.0),
                C64::new(closed, 0.0),
                (quad - closed).abs(),
                1e-8,
            ));

            // p-monotonicity over the test operators (non-advisory)
            let trunc = cfg.trunc()?;
            let test_ops: Vec<FockOperator> = vec![
                FockOperator::Diagonal(heat_semigroup(1.0, &trunc)?),
                FockOperator::Diagonal(heat_semigroup(-0.25, &trunc)?),
                FockOperator::Diagonal(gaussian_toeplitz(C64::new(0.0, 1.0), &trunc)?),
                FockOperator::Dense(toeplitz_quadrature(
                    &Symbol::oscillatory(2.0 * PI, cfg.n),
                    &trunc,
                    &cfg.grid()?,
                )?),
            ];
            let mut worst = 0.0f64;
            for op in &test_ops {
                let summary = spectral_summary(op, &[1.0, 1.5, 2.0, 4.0, 8.0])?;
                for w in summary.schatten.windows(2) {
                    worst = worst.max(w[1].1 - w[0].1);
                }
            }
            outcome.reports.push(VerificationReport::evaluate(
                "schatten-p-monotonicity",
                cfg.base_params(),
                C64::new(worst, 0.0),
                C64::new(0.0, 0.0),
                worst.max(0.0),
                1e-12,
            ));

            // per-(a, p, t) inequality records
            let family = SymbolFamily::default_family(cfg.n)?;
            for a in family.gaussian_members() {
                if a.gaussian_parameter().map(|xi| xi.im != 0.0).unwrap_or(false) {
                    continue;
                }
                for &p in &config.p_grid {
                    for t in [0.75, 1.0, 0.25] {
                        push_check(
                            &mut outcome,
                            format!("schatten {} p={p} t={t}", a.name()),
                            check_schatten(a, p, t, &cfg),
                        )?;
                    }
                }
            }
        }
        Suite::Frontier => {
            outcome
                .reports
                .push(check_gaussian_frontier(&default_frontier_grid(), &cfg)?);
        }
        Suite::Compactness => {
            let pairs = [(0.25, 2.0)];
            let family = SymbolFamily::default_family(cfg.n)?;
            for a in &family.members {
                let expect = match a.name() {
                    name if name.starts_with("const") => Some(false),
                    name if name.starts_with("radial_power") => Some(false),
                    name if name.starts_with("oscillatory") => Some(false),
                    _ => Some(true),
                };
                outcome
                    .reports
                    .push(check_compactness_flow(a, &pairs, &cfg, expect)?);
            }
        }
        Suite::CPi => {
            let estimate = estimate_c_pi(&cfg, &config.p_grid)?;
            outcome.reports.extend(estimate.reports.clone());
            let mut params = cfg.base_params();
            params.push((
                "op_conv_lower_bound".into(),
                format!("{:.12e}", estimate.op_conv_lower_bound),
            ));
            params.push((
                "fn_conv_norm_form_lower_bound".into(),
                format!("{:.12e}", estimate.fn_conv_norm_form_lower_bound),
            ));
            params.push((
                "fn_conv_printed_form_lower_bound".into(),
                format!("{:.12e}", estimate.fn_conv_printed_form_lower_bound),
            ));
            let finite = estimate.op_conv_lower_bound.is_finite()
                && estimate.fn_conv_norm_form_lower_bound.is_finite();
            let mut report = VerificationReport::evaluate(
                "c-pi-estimate",
                params,
                C64::new(estimate.op_conv_lower_bound, 0.0),
                C64::new(f64::NAN, 0.0),
                if finite { 0.0 } else { f64::INFINITY },
                0.0,
            )
            .note(
                "empirical lower bound for the Young constant; the true value is \
                 not determined by these samples",
            );
            for sample in &estimate.samples {
                report = report.note(format!(
                    "{} {} p={}: ratio {:.12e}",
                    sample.kind, sample.label, sample.p, sample.ratio
                ));
            }
            outcome.reports.push(report);
        }
    }
    Ok(outcome)
}

/// Truncation degree for the reconstruction at flow time `t`: the
/// semigroup tail `(t/(1-t))^{K+1}` must fall below 1e-7 (the measured
/// quadrature floor dominates anyway).
pub fn reconstruction_k(t: f64, floor: usize) -> usize {
    let ratio = t / (1.0 - t);
    let k = if ratio >= 1.0 {
        60
    } else {
        ((1e-7f64.ln() / ratio.ln()).ceil() as usize).max(16)
    };
    k.min(60).max(floor.min(32))
}

/// Quadrature order for the reconstruction: the slowly decaying
/// negative-time factor at larger `t` needs the finer rule (measured:
/// Q = 64 reaches ~2e-5 at t = 0.4, Q = 80 reaches ~1e-6).
pub fn reconstruction_quad(t: f64, base: usize) -> usize {
    if t > 0.25 {
        base.max(80)
    } else {
        base.max(64)
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Flat CSV summary of a suite outcome: one line per report.
pub fn outcome_to_csv(outcome: &SuiteOutcome, config: &RunConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# suite={} n={} k_max={} quad_points={} tol={}\n",
        outcome.suite, config.n, config.k_max, config.quad_points, config.tol
    ));
    out.push_str("check_id,passed,advisory,lhs_re,lhs_im,rhs_re,rhs_im,residual,tolerance,params,notes\n");
    for r in &outcome.reports {
        let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            csv_escape(&r.check_id),
            r.passed,
            r.advisory,
            r.lhs.re,
            r.lhs.im,
            r.rhs.re,
            r.rhs.im,
            r.residual,
            r.tolerance,
            csv_escape(&params.join("; ")),
            csv_escape(&r.notes.join("; ")),
        ));
    }
    for u in &outcome.unconverged {
        out.push_str(&format!("{},false,false,,,,,,,,\n", csv_escape(&format!("UNCONVERGED {u}"))));
    }
    out
}

/// JSON document for a suite outcome, schema-versioned and embedding the
/// effective configuration.
pub fn outcome_to_json(outcome: &SuiteOutcome, config: &RunConfig) -> Result<String> {
    #[derive(Serialize)]
    struct Document<'a> {
        schema: &'static str,
        suite: &'a str,
        config: &'a RunConfig,
        reports: &'a [VerificationReport],
        unconverged: &'a [String],
    }
    Ok(serde_json::to_string_pretty(&Document {
        schema: crate::report::REPORT_SCHEMA,
        suite: &outcome.suite,
        config,
        reports: &outcome.reports,
        unconverged: &outcome.unconverged,
    })?)
}

/// Write `<suite>_reports.json` and `<suite>_summary.csv` atomically into
/// `dir`; returns the two paths.
pub fn write_outcome(
    dir: &std::path::Path,
    outcome: &SuiteOutcome,
    config: &RunConfig,
) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
    let json_path = dir.join(format!("{}_reports.json", outcome.suite));
    let csv_path = dir.join(format!("{}_summary.csv", outcome.suite));
    crate::report::atomic_write(&json_path, outcome_to_json(outcome, config)?.as_bytes())?;
    crate::report::atomic_write(&csv_path, outcome_to_csv(outcome, config).as_bytes())?;
    Ok((json_path, csv_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn lp_norm_matches_gaussian_closed_form() {
        let grid = build_grid(1, 48).unwrap();
        for (s, p) in [(1.0, 1.0), (2.0, 2.0), (0.5, 3.0), (1.75, 1.0)] {
            let phi = heat_kernel_real(s, 1).unwrap();
            let quad = lp_norm_dm(|z| phi.eval(z), s, p, &grid).unwrap();
            let closed = gaussian_lp_norm(c(s, 0.0), p, 1);
            assert!(
                (quad - closed).abs() < 1e-10 * closed.max(1.0),
                "s={s} p={p}: {quad} vs {closed}"
            );
        }
        // anchor values: ||phi_s||_1 = 1 and ||phi_2||_2 = 1/2
        assert!((gaussian_lp_norm(c(1.75, 0.0), 1.0, 1) - 1.0).abs() < 1e-15);
        assert!((gaussian_lp_norm(c(2.0, 0.0), 2.0, 1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn bc_upper_gaussian_example() {
        let cfg = CheckConfig::default();
        let a = heat_kernel_real(1.0, 1).unwrap();
        let report = check_bc_upper(&a, 0.75, &cfg).unwrap();
        assert!(report.passed, "{report:?}");
        // lhs = 1/1.75, rhs = (2t-1)^{-1} * 1/2 = 1
        assert!((report.lhs.re - 1.0 / 1.75).abs() < 1e-9, "{}", report.lhs);
        assert!((report.rhs.re - 1.0).abs() < 1e-9, "{}", report.rhs);
    }

    #[test]
    fn bc_upper_constant_one() {
        let cfg = CheckConfig::default();
        let one = Symbol::constant(c(1.0, 0.0), 1);
        for t in [0.75, 1.0, 2.0] {
            let report = check_bc_upper(&one, t, &cfg).unwrap();
            assert!(report.passed, "t={t}: {report:?}");
            // For the negative-time semigroup factor (t < 1) the operator
            // route can overshoot 1 by the identity's truncation tail;
            // the function route is exact.
            assert!(
                report.lhs.re >= 1.0 - 1e-9 && report.lhs.re <= 1.0 + 1e-3,
                "t={t}: lhs {}",
                report.lhs
            );
        }
    }

    #[test]
    fn bc_counterexample_is_documented() {
        let report = check_bc_counterexample(&CheckConfig::default()).unwrap();
        assert!(report.passed, "{report:?}");
        assert!((report.lhs.re - 1.0 / 3.0).abs() < 1e-12);
        assert!((report.rhs.re - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn reconstruction_check_gaussian() {
        let cfg = CheckConfig::default();
        let a = heat_kernel_real(0.5, 1).unwrap();
        let report = check_bc_reconstruction(&a, 0.25, &cfg, 1e-8).unwrap();
        assert!(report.passed, "residual {}", report.residual);
    }

    #[test]
    fn schatten_closed_forms() {
        let cfg = CheckConfig::default();
        let a = heat_kernel_real(1.0, 1).unwrap();

        // t = 0.75, p = 1: ||B_t(a)||_1 = 1, base = (2t-1)^{-1}^{-1}... the
        // advisory report records the implied sample (0.5 at these values)
        let report = check_schatten(&a, 1.0, 0.75, &cfg).unwrap();
        assert!(report.advisory);
        assert!((report.lhs.re - 1.0).abs() < 1e-12, "{}", report.lhs);
        let implied: f64 = report.notes[0]
            .trim_start_matches("implied C_pi sample: ")
            .parse()
            .unwrap();
        assert!((implied - 0.5).abs() < 1e-9, "implied {implied}");

        // p = 2, t = 1: ||phi_2||_2 = 1/2 and ||Phi_1||_2 = 3^{-1/2}
        let report = check_schatten(&a, 2.0, 1.0, &cfg).unwrap();
        assert!((report.lhs.re - 0.5).abs() < 1e-10);
        let t_norm: f64 = report
            .params
            .iter()
            .find(|(k, _)| k == "schatten_T")
            .unwrap()
            .1
            .parse()
            .unwrap();
        assert!((t_norm - 3.0f64.powf(-0.5)).abs() < 1e-9, "{t_norm}");

        // constant-free p = 1 reconstruction side passes
        let report = check_schatten(&a, 1.0, 0.25, &cfg).unwrap();
        assert!(!report.advisory);
        assert!(report.passed, "{report:?}");
    }

    #[test]
    fn c_pi_estimate_samples() {
        let cfg = CheckConfig::default();
        let estimate = estimate_c_pi(&cfg, &[1.0, 2.0]).unwrap();
        // (Phi, Phi) at p = 1: || phi_1 ||_1 / (||Phi||_1 ||Phi||_1) = 1
        let sample = estimate
            .samples
            .iter()
            .find(|s| s.kind == "op-conv" && s.label == "(Phi_0, Phi_0)" && s.p == 1.0)
            .unwrap();
        assert!((sample.ratio - 1.0).abs() < 1e-12, "{}", sample.ratio);
        assert!(estimate.op_conv_lower_bound >= 1.0 - 1e-12);
        assert!(estimate.op_conv_lower_bound.is_finite());
        assert!(estimate.fn_conv_norm_form_lower_bound.is_finite());
        // all sup-norm ratios within 1 + 1e-9
        for report in &estimate.reports {
            assert!(report.passed, "{report:?}");
        }
    }

    #[test]
    fn frontier_grid_is_large_and_admissible() {
        let grid = default_frontier_grid();
        assert!(grid.len() >= 50, "only {} points", grid.len());
        for &xi in &grid {
            assert!(crate::symbols::gaussian_admissibility(xi) > -0.5);
        }
        // both sides of the frontier are represented
        let bounded = grid
            .iter()
            .filter(|&&xi| 1.0 / gaussian_eigenvalue_ratio(xi) >= 1.0 - 1e-12)
            .count();
        assert!(bounded > 0 && bounded < grid.len());
    }

    #[test]
    fn frontier_classification_has_no_disagreements() {
        let cfg = CheckConfig::default();
        let report = check_gaussian_frontier(&default_frontier_grid(), &cfg).unwrap();
        assert!(report.passed, "{:?}", report.notes);
    }

    #[test]
    fn compactness_classifications() {
        let cfg = CheckConfig::default();
        let pairs = [(0.25, 2.0)];

        let gauss = heat_kernel_real(1.0, 1).unwrap();
        let report = check_compactness_flow(&gauss, &pairs, &cfg, Some(true)).unwrap();
        assert!(report.passed, "{:?}", report.params);

        let one = Symbol::constant(c(1.0, 0.0), 1);
        let report = check_compactness_flow(&one, &pairs, &cfg, Some(false)).unwrap();
        assert!(report.passed, "{:?}", report.params);

        let number = Symbol::radial_power(1, 1);
        let report = check_compactness_flow(&number, &pairs, &cfg, Some(false)).unwrap();
        assert!(report.passed, "{:?}", report.params);
    }

    #[test]
    fn family_validates() {
        let family = SymbolFamily::default_family(1).unwrap();
        assert_eq!(family.members.len(), 8);
        assert!(family.bounded_members().len() >= 6);
        assert!(family.gaussian_members().len() == 4);
    }

    #[test]
    fn frontier_suite_outputs_are_deterministic() {
        let config = RunConfig::default();
        let run = || {
            let outcome = run_suite(Suite::Frontier, &config).unwrap();
            (
                outcome_to_json(&outcome, &config).unwrap(),
                outcome_to_csv(&outcome, &config),
                outcome.all_non_advisory_passed(),
            )
        };
        let (json1, csv1, passed1) = run();
        let (json2, csv2, _) = run();
        assert!(passed1);
        assert_eq!(json1, json2);
        assert_eq!(csv1, csv2);
        assert!(json1.contains("fock-qha-report/1"));
    }

    #[test]
    fn cpi_suite_passes() {
        let config = RunConfig {
            p_grid: vec![1.0, 2.0],
            ..RunConfig::default()
        };
        let outcome = run_suite(Suite::CPi, &config).unwrap();
        assert!(outcome.all_non_advisory_passed(), "{:?}", outcome.failed_checks());
        assert!(outcome.unconverged.is_empty());
    }

    #[test]
    fn suite_names_roundtrip() {
        for suite in [
            Suite::Bc,
            Suite::Schatten,
            Suite::Identities,
            Suite::Frontier,
            Suite::Compactness,
            Suite::CPi,
        ] {
            assert_eq!(Suite::parse(suite.name()), Some(suite));
        }
        assert_eq!(Suite::parse("nope"), None);
    }

    #[test]
    fn reconstruction_k_scales_with_flow_time() {
        assert_eq!(reconstruction_k(0.1, 16), 16);
        assert_eq!(reconstruction_k(0.25, 16), 16);
        let k40 = reconstruction_k(0.4, 16);
        assert!((36..=44).contains(&k40), "{k40}");
        assert_eq!(reconstruction_quad(0.4, 64), 80);
        assert_eq!(reconstruction_quad(0.1, 64), 64);
    }

    #[test]
    fn reconstruction_closed_route_matches_direct() {
        let report = check_bc_reconstruction_closed(0.5, 0.25, &CheckConfig::default()).unwrap();
        assert!(report.passed, "residual {}", report.residual);
    }
}
