//! Symbol class and function-side heat calculus: heat kernels `phi_t`,
//! generalized Gaussians `phi_xi`, function-function convolution and the
//! heat transform `B_t(a) = a * phi_t`.
//!
//! Symbols are closures plus structural metadata; sampling happens only at
//! quadrature or evaluation time. Membership in the symbol class (every
//! translate square-integrable against the Gaussian measure) is probed
//! numerically, never proved.

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{FockError, Result};
use crate::quadrature::{integrate, QuadratureGrid};

const PI: f64 = std::f64::consts::PI;

type EvalFn = dyn Fn(&[C64]) -> C64 + Send + Sync;
type ProfileFn = dyn Fn(f64) -> C64 + Send + Sync;

/// Structural tag of a symbol.
#[derive(Clone)]
pub enum SymbolKind {
    /// Generalized Gaussian `phi_xi(z) = xi^{-n} e^{-pi |z|^2 / xi}`.
    Gaussian { xi: C64 },
    /// Radial symbol `a(z) = profile(|z|)`.
    Radial { profile: Arc<ProfileFn> },
    Generic,
}

impl fmt::Debug for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolKind::Gaussian { xi } => write!(f, "Gaussian {{ xi: {xi} }}"),
            SymbolKind::Radial { .. } => write!(f, "Radial"),
            SymbolKind::Generic => write!(f, "Generic"),
        }
    }
}

/// A symbol `a : C^n -> C` given by an evaluation closure plus metadata.
///
/// Immutable; evaluation is pure, so symbols may be shared freely across
/// threads.
#[derive(Clone)]
pub struct Symbol {
    eval: Arc<EvalFn>,
    kind: SymbolKind,
    n: usize,
    name: String,
    real_valued: bool,
    bounded_hint: Option<f64>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("n", &self.n)
            .finish()
    }
}

/// Admissibility ratio `Re(xi)/|xi|^2 = Re(1/xi)`; the Gaussian `phi_xi`
/// has square-integrable translates exactly when this exceeds -1/2.
pub fn gaussian_admissibility(xi: C64) -> f64 {
    xi.re / xi.norm_sqr()
}

impl Symbol {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &SymbolKind {
        &self.kind
    }

    /// Gaussian parameter if this symbol is a generalized Gaussian.
    pub fn gaussian_parameter(&self) -> Option<C64> {
        match self.kind {
            SymbolKind::Gaussian { xi } => Some(xi),
            _ => None,
        }
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    /// Known sup-norm, when one is known.
    pub fn bounded_hint(&self) -> Option<f64> {
        self.bounded_hint
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        debug_assert_eq!(z.len(), self.n);
        (self.eval)(z)
    }

    /// Constant symbol `a = c`.
    pub fn constant(c: C64, n: usize) -> Symbol {
        Symbol {
            eval: Arc::new(move |_| c),
            kind: SymbolKind::Generic,
            n,
            name: format!("const({c})"),
            real_valued: c.im == 0.0,
            bounded_hint: Some(c.norm()),
        }
    }

    /// Radial symbol from a profile in `r = |z|`.
    pub fn radial<F>(profile: F, n: usize, real_valued: bool, name: &str) -> Symbol
    where
        F: Fn(f64) -> C64 + Send + Sync + 'static,
    {
        let profile: Arc<ProfileFn> = Arc::new(profile);
        let p2 = profile.clone();
        Symbol {
            eval: Arc::new(move |z: &[C64]| {
                let r = z.iter().map(|zj| zj.norm_sqr()).sum::<f64>().sqrt();
                p2(r)
            }),
            kind: SymbolKind::Radial { profile },
            n,
            name: name.to_string(),
            real_valued,
            bounded_hint: None,
        }
    }

    /// Radial polynomial `pi^d |z|^{2d}`.
    pub fn radial_power(d: u32, n: usize) -> Symbol {
        let mut s = Symbol::radial(
            move |r| C64::new(PI.powi(d as i32) * r.powi(2 * d as i32), 0.0),
            n,
            true,
            &format!("radial_power({d})"),
        );
        if d == 0 {
            s.bounded_hint = Some(1.0);
        }
        s
    }

    /// Bounded oscillatory symbol `e^{i freq Re z_1}`.
    pub fn oscillatory(freq: f64, n: usize) -> Symbol {
        Symbol {
            eval: Arc::new(move |z: &[C64]| C64::from_polar(1.0, freq * z[0].re)),
            kind: SymbolKind::Generic,
            n,
            name: format!("oscillatory({freq})"),
            real_valued: false,
            bounded_hint: Some(1.0),
        }
    }

    /// Arbitrary symbol from a closure.
    pub fn generic<F>(eval: F, n: usize, name: &str) -> Symbol
    where
        F: Fn(&[C64]) -> C64 + Send + Sync + 'static,
    {
        Symbol {
            eval: Arc::new(eval),
            kind: SymbolKind::Generic,
            n,
            name: name.to_string(),
            real_valued: false,
            bounded_hint: None,
        }
    }

    pub fn with_bounded_hint(mut self, hint: f64) -> Symbol {
        self.bounded_hint = Some(hint);
        self
    }

    pub fn with_real_valued(mut self, real: bool) -> Symbol {
        self.real_valued = real;
        self
    }
}

/// The heat kernel `phi_xi(z) = xi^{-n} e^{-pi |z|^2 / xi}` for a real
/// `t > 0` or an admissible complex parameter (`Re(xi)/|xi|^2 > -1/2`).
pub fn heat_kernel(xi: C64, n: usize) -> Result<Symbol> {
    if xi == C64::new(0.0, 0.0) {
        return Err(FockError::InvalidArgument(
            "gaussian parameter xi must be nonzero".into(),
        ));
    }
    let ratio = gaussian_admissibility(xi);
    if ratio <= -0.5 {
        return Err(FockError::InadmissibleGaussian { xi, ratio });
    }
    let inv = C64::new(1.0, 0.0) / xi;
    // principal branch of xi^{-n}
    let prefactor = (-(n as f64) * xi.ln()).exp();
    let real = xi.im == 0.0;
    // |phi_xi(z)| = |xi^{-n}| e^{-pi |z|^2 Re(1/xi)} is bounded iff
    // Re(1/xi) >= 0
    let bounded = if inv.re >= 0.0 {
        Some(prefactor.norm())
    } else {
        None
    };
    Ok(Symbol {
        eval: Arc::new(move |z: &[C64]| {
            let norm_sq: f64 = z.iter().map(|zj| zj.norm_sqr()).sum();
            prefactor * (-inv * PI * norm_sq).exp()
        }),
        kind: SymbolKind::Gaussian { xi },
        n,
        name: if real {
            format!("heat({})", xi.re)
        } else {
            format!("gaussian({xi})")
        },
        real_valued: real,
        bounded_hint: bounded,
    })
}

/// Convenience wrapper for a real heat-kernel time.
pub fn heat_kernel_real(t: f64, n: usize) -> Result<Symbol> {
    heat_kernel(C64::new(t, 0.0), n)
}

/// Parameters used to produce a [`SampledFunction`], recorded so the
/// values can be reproduced exactly.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SampleMeta {
    pub n: usize,
    pub description: String,
    /// (key, value) parameter pairs in a fixed order.
    pub params: Vec<(String, String)>,
}

impl SampleMeta {
    pub fn push(&mut self, key: &str, value: impl fmt::Display) {
        self.params.push((key.to_string(), value.to_string()));
    }
}

/// A function sampled on a finite list of points of C^n.
#[derive(Debug, Clone, Serialize)]
pub struct SampledFunction {
    pub points: Vec<Vec<C64>>,
    pub values: Vec<C64>,
    pub meta: SampleMeta,
}

impl SampledFunction {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Supremum of |values| over the sample.
    pub fn sup_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest pointwise |self - other| on the shared point list.
    pub fn max_abs_diff(&self, other: &SampledFunction) -> f64 {
        assert_eq!(self.len(), other.len());
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `re_z1, im_z1, ..., re_value, im_value`; the first
    /// line is a comment carrying the meta parameters.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        let params: Vec<String> = self
            .meta
            .params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        out.push_str(&format!(
            "# {} n={} {}\n",
            self.meta.description,
            self.meta.n,
            params.join(" ")
        ));
        for j in 1..=self.meta.n {
            out.push_str(&format!("re_z{j},im_z{j},"));
        }
        out.push_str("re_value,im_value\n");
        for (p, v) in self.points.iter().zip(self.values.iter()) {
            for zj in p {
                out.push_str(&format!("{},{},", zj.re, zj.im));
            }
            out.push_str(&format!("{},{}\n", v.re, v.im));
        }
        out
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Cartesian sample grid: `count x count` points per complex coordinate
/// over `[-half_width, half_width]^2`, in row-major deterministic order.
pub fn cartesian_grid(n: usize, half_width: f64, count: usize) -> Vec<Vec<C64>> {
    assert!(count >= 1);
    let coords: Vec<f64> = if count == 1 {
        vec![0.0]
    } else {
        (0..count)
            .map(|i| -half_width + 2.0 * half_width * i as f64 / (count - 1) as f64)
            .collect()
    };
    let axes = 2 * n;
    let mut counter = vec![0usize; axes];
    let mut out = Vec::new();
    loop {
        let point: Vec<C64> = (0..n)
            .map(|j| C64::new(coords[counter[2 * j]], coords[counter[2 * j + 1]]))
            .collect();
        out.push(point);
        let mut axis = axes;
        loop {
            if axis == 0 {
                break;
            }
            axis -= 1;
            counter[axis] += 1;
            if counter[axis] < count {
                break;
            }
            counter[axis] = 0;
        }
        if counter.iter().all(|&c| c == 0) {
            break;
        }
    }
    out
}

/// Default evaluation grid: 11x11 over `[-2,2]^2` for n = 1, 5^4 points
/// for n = 2.
pub fn default_sample_grid(n: usize) -> Vec<Vec<C64>> {
    match n {
        1 => cartesian_grid(1, 2.0, 11),
        _ => cartesian_grid(n, 2.0, 5),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ConvolveOptions {
    /// Use quadrature even when a Gaussian-Gaussian closed form exists.
    pub force_quadrature: bool,
}

/// Convolution `(a * b)(p) = int a(p - w) b(w) dm(w)` sampled at `points`.
///
/// One of the factors must be a Gaussian with real positive parameter (or
/// both Gaussians, in which case `phi_s * phi_t = phi_{s+t}` is used and
/// quadrature is skipped). The Gaussian factor is removed by the change of
/// variable `w = sqrt(t) v`, after which the integrand matches the
/// quadrature weight exactly.
pub fn convolve_symbols(
    a: &Symbol,
    b: &Symbol,
    points: &[Vec<C64>],
    grid: &QuadratureGrid,
) -> Result<SampledFunction> {
    convolve_symbols_with(a, b, points, grid, ConvolveOptions::default())
}

pub fn convolve_symbols_with(
    a: &Symbol,
    b: &Symbol,
    points: &[Vec<C64>],
    grid: &QuadratureGrid,
    opts: ConvolveOptions,
) -> Result<SampledFunction> {
    if a.n() != b.n() {
        return Err(FockError::InvalidArgument(
            "convolved symbols must share the ambient dimension".into(),
        ));
    }
    let n = a.n();
    let mut meta = SampleMeta {
        n,
        description: format!("{} * {}", a.name(), b.name()),
        params: Vec::new(),
    };

    if !opts.force_quadrature {
        if let (Some(xi), Some(eta)) = (a.gaussian_parameter(), b.gaussian_parameter()) {
            let inv_sum = C64::new(1.0, 0.0) / xi + C64::new(1.0, 0.0) / eta;
            if inv_sum.re <= 0.0 {
                return Err(FockError::InvalidArgument(format!(
                    "gaussian convolution diverges: Re(1/xi + 1/eta) = {} <= 0",
                    inv_sum.re
                )));
            }
            let sum = heat_kernel(xi + eta, n)?;
            let values: Vec<C64> = points.iter().map(|p| sum.eval(p)).collect();
            meta.push("route", "closed-form");
            meta.push("xi", xi);
            meta.push("eta", eta);
            return Ok(SampledFunction {
                points: points.to_vec(),
                values,
                meta,
            });
        }
    }

    // Pick the factor that provides the Gaussian decay.
    let (smooth, kernel, swapped) = match (real_positive_gaussian(b), real_positive_gaussian(a)) {
        (Some(t), _) => (a, t, false),
        (None, Some(t)) => (b, t, true),
        (None, None) => {
            return Err(FockError::InvalidArgument(format!(
                "no admissible Gaussian factorization for {} * {}: neither factor is a \
                 real positive heat kernel",
                a.name(),
                b.name()
            )));
        }
    };
    if grid.n() != n {
        return Err(FockError::InvalidArgument(
            "quadrature grid dimension mismatch".into(),
        ));
    }
    let sqrt_t = kernel.sqrt();
    let mut values = Vec::with_capacity(points.len());
    for p in points {
        // (smooth * phi_t)(p) = int smooth(p - sqrt(t) v) e^{-pi |v|^2} dm(v)
        let mut shifted = vec![C64::new(0.0, 0.0); n];
        let value = integrate(grid, |v: &[C64]| {
            for j in 0..n {
                shifted[j] = p[j] - sqrt_t * v[j];
            }
            smooth.eval(&shifted)
        })?;
        values.push(value);
    }
    meta.push("route", "quadrature");
    meta.push("t", kernel);
    meta.push("quad_points_per_axis", grid.points_per_axis());
    meta.push("swapped", swapped);
    Ok(SampledFunction {
        points: points.to_vec(),
        values,
        meta,
    })
}

fn real_positive_gaussian(s: &Symbol) -> Option<f64> {
    match s.gaussian_parameter() {
        Some(xi) if xi.im == 0.0 && xi.re > 0.0 => Some(xi.re),
        _ => None,
    }
}

/// Heat transform `B_t(a) = a * phi_t` sampled at `points`.
pub fn heat_transform(
    a: &Symbol,
    t: f64,
    points: &[Vec<C64>],
    grid: &QuadratureGrid,
) -> Result<SampledFunction> {
    if t <= 0.0 {
        return Err(FockError::InvalidArgument(format!(
            "heat transform requires t > 0, got {t}"
        )));
    }
    let kernel = heat_kernel_real(t, a.n())?;
    let mut sampled = convolve_symbols(a, &kernel, points, grid)?;
    sampled.meta.description = format!("heat_transform({}, t={t})", a.name());
    sampled.meta.push("heat_t", t);
    Ok(sampled)
}

/// The heat transform as a lazily evaluated symbol: every call evaluates
/// `B_t(a)(z)` by quadrature (or by the Gaussian closed form when `a` is a
/// Gaussian). This is the form consumed by the Toeplitz reconstruction.
pub fn heat_transform_symbol(a: &Symbol, t: f64, grid: &QuadratureGrid) -> Result<Symbol> {
    if t <= 0.0 {
        return Err(FockError::InvalidArgument(format!(
            "heat transform requires t > 0, got {t}"
        )));
    }
    let n = a.n();
    if let Some(xi) = a.gaussian_parameter() {
        return heat_kernel(xi + C64::new(t, 0.0), n);
    }
    let inner = a.clone();
    let grid = grid.clone();
    let sqrt_t = t.sqrt();
    let bounded = a.bounded_hint();
    let name = format!("heat_transform({}, t={t})", a.name());
    let mut s = Symbol::generic(
        move |p: &[C64]| {
            let mut shifted = vec![C64::new(0.0, 0.0); n];
            integrate(&grid, |v: &[C64]| {
                for j in 0..n {
                    shifted[j] = p[j] - sqrt_t * v[j];
                }
                inner.eval(&shifted)
            })
            .expect("non-finite symbol value inside heat transform")
        },
        n,
        &name,
    );
    // |B_t(a)| <= sup |a| because phi_t has unit mass.
    if let Some(h) = bounded {
        s = s.with_bounded_hint(h);
    }
    Ok(s)
}

/// Numeric membership probe for the symbol class: values of
/// `int |a(w)|^2 |K_z(w)|^2 dlambda(w)` at each probe `z`.
///
/// Blow-up of these values under quadrature refinement signals membership
/// failure; finiteness at fixed order proves nothing.
pub fn check_a2_membership(
    a: &Symbol,
    probes: &[Vec<C64>],
    grid: &QuadratureGrid,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(probes.len());
    for (i, z) in probes.iter().enumerate() {
        let value = integrate(grid, |w: &[C64]| {
            // |K_z(w)|^2 e^{-pi |w|^2} = e^{2 pi Re(conj(z) w)} e^{-pi |w|^2}
            let dot: C64 = z
                .iter()
                .zip(w.iter())
                .map(|(zj, wj)| zj.conj() * wj)
                .sum();
            let amp = a.eval(w).norm_sqr();
            C64::new(amp * (2.0 * PI * dot.re).exp(), 0.0)
        });
        match value {
            Ok(v) => out.push(v.re),
            Err(FockError::NonFiniteIntegrand {
                node_index, node, ..
            }) => {
                return Err(FockError::NonFiniteIntegrand {
                    context: format!("a2 membership probe {i} of symbol {}", a.name()),
                    node_index,
                    node,
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Bicubic (Catmull-Rom) interpolant of complex samples on a regular grid
/// in one complex variable. Evaluation outside the grid returns zero and
/// raises an internal flag.
pub struct BicubicInterpolant {
    x0: f64,
    y0: f64,
    dx: f64,
    dy: f64,
    nx: usize,
    ny: usize,
    /// Row-major: index `ix * ny + iy`.
    values: Vec<C64>,
    outside_hit: AtomicBool,
}

impl fmt::Debug for BicubicInterpolant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BicubicInterpolant")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish()
    }
}

impl BicubicInterpolant {
    pub fn new(
        x0: f64,
        dx: f64,
        nx: usize,
        y0: f64,
        dy: f64,
        ny: usize,
        values: Vec<C64>,
    ) -> Result<Self> {
        if nx < 4 || ny < 4 {
            return Err(FockError::InvalidArgument(
                "bicubic interpolation needs at least a 4x4 grid".into(),
            ));
        }
        if values.len() != nx * ny {
            return Err(FockError::InvalidArgument(
                "interpolant value count does not match grid shape".into(),
            ));
        }
        Ok(BicubicInterpolant {
            x0,
            y0,
            dx,
            dy,
            nx,
            ny,
            values,
            outside_hit: AtomicBool::new(false),
        })
    }

    /// Sample a symbol on `count x count` points over
    /// `[-half_width, half_width]^2` and build the interpolant.
    pub fn from_symbol(a: &Symbol, half_width: f64, count: usize) -> Result<Self> {
        if a.n() != 1 {
            return Err(FockError::InvalidArgument(
                "grid interpolation is implemented for n = 1".into(),
            ));
        }
        let step = 2.0 * half_width / (count - 1) as f64;
        let mut values = Vec::with_capacity(count * count);
        for ix in 0..count {
            let x = -half_width + step * ix as f64;
            for iy in 0..count {
                let y = -half_width + step * iy as f64;
                values.push(a.eval(&[C64::new(x, y)]));
            }
        }
        BicubicInterpolant::new(-half_width, step, count, -half_width, step, count, values)
    }

    /// True if any evaluation fell outside the grid (zero-extended).
    pub fn saw_outside_point(&self) -> bool {
        self.outside_hit.load(Ordering::Relaxed)
    }

    pub fn eval(&self, z: C64) -> C64 {
        let fx = (z.re - self.x0) / self.dx;
        let fy = (z.im - self.y0) / self.dy;
        if fx < 0.0 || fy < 0.0 || fx > (self.nx - 1) as f64 || fy > (self.ny - 1) as f64 {
            self.outside_hit.store(true, Ordering::Relaxed);
            return C64::new(0.0, 0.0);
        }
        let ix = (fx.floor() as usize).min(self.nx - 2);
        let iy = (fy.floor() as usize).min(self.ny - 2);
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let wx = catmull_rom_weights(tx);
        let wy = catmull_rom_weights(ty);
        let mut acc = C64::new(0.0, 0.0);
        for (a, wxa) in wx.iter().enumerate() {
            // clamp the 4-point stencil at the boundary
            let gx = (ix + a).saturating_sub(1).min(self.nx - 1);
            for (b, wyb) in wy.iter().enumerate() {
                let gy = (iy + b).saturating_sub(1).min(self.ny - 1);
                acc += self.values[gx * self.ny + gy] * (wxa * wyb);
            }
        }
        acc
    }

    /// Wrap the interpolant as a symbol on C^1.
    pub fn into_symbol(self, name: &str) -> Symbol {
        let interp = Arc::new(self);
        Symbol::generic(move |z: &[C64]| interp.eval(z[0]), 1, name)
    }
}

fn catmull_rom_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}
