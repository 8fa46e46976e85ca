//! Predictor–corrector path tracking for square homotopies whose coefficients
//! are polynomials in the path parameter `s ∈ [0, 1]`.
//!
//! Paths are integrated in logarithmic coordinates `z = log x`. Every
//! evaluation rescales each coordinate and each equation by powers of two, so
//! the Newton system is the relative Jacobian `R⁻¹ J X` and solution
//! coordinates anywhere between `1e-300` and `1e300` are handled without
//! overflow. The corrector is Newton's method in `z`, the predictor is RK4 on
//! the Davidenko equation `dz/ds = -(J X)⁻¹ ∂H/∂s`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{random_unit, ComplexPoint, LaurentPolynomial, PolynomialSystem};

/// `c·(t0 + t1·s)^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct CoeffPart {
    c: Complex64,
    t0: Complex64,
    t1: Complex64,
    k: u32,
}

impl CoeffPart {
    fn line_at(&self, s: f64) -> Complex64 {
        // expand around the nearer endpoint so values close to zero keep
        // their relative accuracy
        if s <= 0.5 {
            self.t0 + self.t1 * s
        } else {
            (self.t0 + self.t1) + self.t1 * (s - 1.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct PathTerm {
    parts: Vec<CoeffPart>,
    exponents: Vec<i32>,
}

impl PathTerm {
    /// Coefficient and its `s`-derivative.
    fn coeff_at(&self, s: f64) -> (Complex64, Complex64) {
        let mut val = Complex64::new(0.0, 0.0);
        let mut der = Complex64::new(0.0, 0.0);
        for p in &self.parts {
            if p.k == 0 {
                val += p.c;
                continue;
            }
            let l = p.line_at(s);
            let lk1 = l.powi(p.k as i32 - 1);
            val += p.c * lk1 * l;
            der += p.c * lk1 * p.t1 * p.k as f64;
        }
        (val, der)
    }
}

/// Square system `H(x, s)` whose coefficients are sums of powers of affine
/// functions of `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientPathHomotopy {
    equations: Vec<Vec<PathTerm>>,
    num_vars: usize,
}

fn constant_part(c: Complex64) -> CoeffPart {
    CoeffPart {
        c,
        t0: Complex64::new(1.0, 0.0),
        t1: Complex64::new(0.0, 0.0),
        k: 0,
    }
}

fn exponents_i32(e: &[i64]) -> Result<Vec<i32>> {
    e.iter()
        .map(|&k| i32::try_from(k).map_err(|_| Error::Overflow(k.to_string())))
        .collect()
}

impl CoefficientPathHomotopy {
    fn from_polys<F>(polys: &[LaurentPolynomial], num_vars: usize, mut coeff_of: F) -> Result<Self>
    where
        F: FnMut(usize, &[i64], Complex64) -> Result<(Vec<i64>, CoeffPart)>,
    {
        if polys.len() != num_vars {
            return Err(Error::NotSquare {
                equations: polys.len(),
                variables: num_vars,
            });
        }
        let mut equations = Vec::with_capacity(polys.len());
        for (i, p) in polys.iter().enumerate() {
            // merge terms sharing an x-exponent
            let mut merged: std::collections::BTreeMap<Vec<i64>, Vec<CoeffPart>> = Default::default();
            for (e, c) in p.terms() {
                let (x_exp, part) = coeff_of(i, e.entries(), *c)?;
                merged.entry(x_exp).or_default().push(part);
            }
            let terms = merged
                .into_iter()
                .map(|(e, parts)| Ok(PathTerm { parts, exponents: exponents_i32(&e)? }))
                .collect::<Result<Vec<_>>>()?;
            equations.push(terms);
        }
        Ok(CoefficientPathHomotopy { equations, num_vars })
    }

    /// `s`-independent homotopy.
    pub fn constant(system: &PolynomialSystem) -> Result<Self> {
        if system.t_index().is_some() {
            return Err(Error::InvalidArgument("constant homotopy needs a t-free system".into()));
        }
        Self::from_polys(system.polynomials(), system.num_vars(), |_, e, c| Ok((e.to_vec(), constant_part(c))))
    }

    /// `H = (1 - s)·γ·start + s·target`.
    pub fn linear_blend(start: &PolynomialSystem, target: &PolynomialSystem, gamma: Complex64) -> Result<Self> {
        if start.len() != target.len() || start.num_vars() != target.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: start.len(),
                found: target.len(),
            });
        }
        let n = target.num_vars();
        let polys: Vec<LaurentPolynomial> = (0..target.len())
            .map(|i| {
                // tag start terms with an extra variable so they stay separate
                start.polynomials()[i]
                    .extend_variables(1)
                    .mul_monomial(&crate::poly::ExponentVector::unit(n + 1, n))
                    .add(&target.polynomials()[i].extend_variables(1))
            })
            .collect();
        Self::from_polys(&polys, n, |_, e, c| {
            let (one, zero) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
            let part = if e[n] == 1 {
                CoeffPart { c: gamma * c, t0: one, t1: -one, k: 1 }
            } else {
                CoeffPart { c, t0: zero, t1: one, k: 1 }
            };
            Ok((e[..n].to_vec(), part))
        })
    }

    /// Substitutes `t = t0 + t1·s` into a system carrying a parameter `t`
    /// (which must appear with nonnegative exponents only).
    pub fn from_parametric(system: &PolynomialSystem, t0: Complex64, t1: Complex64) -> Result<Self> {
        let t = system
            .t_index()
            .ok_or_else(|| Error::InvalidArgument("system has no parameter".into()))?;
        let n = system.num_vars() - 1;
        Self::from_polys(system.polynomials(), n, |_, e, c| {
            let k = e[t];
            if k < 0 {
                return Err(Error::InvalidArgument("negative parameter exponent".into()));
            }
            let k = u32::try_from(k).map_err(|_| Error::Overflow(k.to_string()))?;
            let mut x_exp = e.to_vec();
            x_exp.remove(t);
            Ok((x_exp, CoeffPart { c, t0, t1, k }))
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    /// Plain (unscaled) evaluation of `H(x, s)`.
    pub fn evaluate(&self, x: &[Complex64], s: f64) -> Vec<Complex64> {
        self.equations
            .iter()
            .map(|eq| {
                eq.iter()
                    .map(|term| {
                        let (c, _) = term.coeff_at(s);
                        term.exponents
                            .iter()
                            .zip(x)
                            .fold(c, |acc, (&k, xj)| if k == 0 { acc } else { acc * xj.powi(k) })
                    })
                    .sum()
            })
            .collect()
    }

    /// Relative Jacobian `R⁻¹ J X`, scaled residual `R⁻¹ H` and scaled `R⁻¹ ∂H/∂s`.
    fn eval_scaled(&self, z: &[Complex64], s: f64) -> Option<Scaled> {
        let n = self.num_vars;
        let mut xs = Vec::with_capacity(n);
        let mut ks = Vec::with_capacity(n);
        for zj in z {
            if !(zj.re.is_finite() && zj.im.is_finite()) {
                return None;
            }
            // |x_j| = e^{Re z_j} = 2^{k_j} · r with r ∈ [1, 2)
            let log2 = zj.re / std::f64::consts::LN_2;
            let k = log2.floor();
            if k.abs() > 1020.0 {
                return None;
            }
            let r = (zj.re - k * std::f64::consts::LN_2).exp();
            xs.push(Complex64::from_polar(r, zj.im));
            ks.push(k as i64);
        }
        let mut f = vec![Complex64::new(0.0, 0.0); n];
        let mut ds = vec![Complex64::new(0.0, 0.0); n];
        let mut jac = DMatrix::<Complex64>::zeros(n, n);
        let mut residual: f64 = 0.0;
        let mut buf: Vec<(Complex64, Complex64, i64)> = Vec::new();
        for (i, eq) in self.equations.iter().enumerate() {
            buf.clear();
            let mut top = f64::NEG_INFINITY;
            let mut top_ds = f64::NEG_INFINITY;
            for term in eq {
                let (c, dc) = term.coeff_at(s);
                let mut mono = Complex64::new(1.0, 0.0);
                let mut e2: i64 = 0;
                for (j, &k) in term.exponents.iter().enumerate() {
                    if k != 0 {
                        mono *= xs[j].powi(k);
                        e2 += k as i64 * ks[j];
                    }
                }
                let v = c * mono;
                let dv = dc * mono;
                if v.norm() > 0.0 {
                    top = top.max(e2 as f64 + v.norm().log2());
                }
                if dv.norm() > 0.0 {
                    top_ds = top_ds.max(e2 as f64 + dv.norm().log2());
                }
                buf.push((v, dv, e2));
            }
            let scale_exp = if top.is_finite() { top.floor() } else { top_ds.floor() };
            if !scale_exp.is_finite() {
                return None;
            }
            let scale_exp = scale_exp as i64;
            let mut abs_sum = 0.0;
            for (term, &(v, dv, e2)) in eq.iter().zip(&buf) {
                let p = pow2(e2 - scale_exp);
                let tv = v * p;
                f[i] += tv;
                ds[i] += dv * p;
                abs_sum += tv.norm();
                for (j, &k) in term.exponents.iter().enumerate() {
                    if k != 0 {
                        jac[(i, j)] += tv * k as f64;
                    }
                }
            }
            let r = if abs_sum > 0.0 { f[i].norm() / abs_sum } else { 0.0 };
            residual = residual.max(r);
        }
        Some(Scaled { f, ds, jac, residual })
    }
}

fn pow2(e: i64) -> f64 {
    if e < -1074 {
        0.0
    } else {
        2f64.powi(e.min(1000) as i32)
    }
}

struct Scaled {
    f: Vec<Complex64>,
    ds: Vec<Complex64>,
    jac: DMatrix<Complex64>,
    residual: f64,
}

/// Solves `A y = b`; returns the solution and a pivot-ratio condition estimate.
fn solve_linear(a: DMatrix<Complex64>, b: &[Complex64]) -> Option<(Vec<Complex64>, f64)> {
    let n = b.len();
    let lu = a.lu();
    let u = lu.u();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        let d = u[(i, i)].norm();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if lo == 0.0 || !lo.is_finite() {
        return None;
    }
    let y = lu.solve(&DVector::from_column_slice(b))?;
    if y.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return None;
    }
    Some((y.iter().copied().collect(), hi / lo))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Relative Newton step size at which endpoints count as converged.
    pub newton_tolerance: f64,
    pub max_newton_iters: usize,
    /// Coordinate max-modulus that ends a path as diverging.
    pub divergence_threshold: f64,
    /// Coordinate min-modulus that ends a path as collapsing to the boundary.
    pub collapse_threshold: f64,
    /// Tracking stops at `s = 1 - end_offset`.
    pub end_offset: f64,
    pub rng_seed: u64,
    /// Corrector tolerance while moving along the path.
    pub tracking_tolerance: f64,
    /// Largest relative first Newton correction accepted after a prediction.
    pub max_first_correction: f64,
    /// Pivot-ratio estimate beyond which a failing path is reported singular.
    pub singular_threshold: f64,
}

impl Default for TrackerOptions {
    fn default() -> Self {
        TrackerOptions {
            initial_step: 0.01,
            min_step: 1e-14,
            max_step: 0.05,
            newton_tolerance: 1e-10,
            max_newton_iters: 3,
            divergence_threshold: 1e8,
            collapse_threshold: 1e-8,
            end_offset: 1e-6,
            rng_seed: 0,
            tracking_tolerance: 1e-9,
            max_first_correction: 0.05,
            singular_threshold: 1e13,
        }
    }
}

impl TrackerOptions {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.min_step
            && self.min_step <= self.initial_step
            && self.initial_step <= self.max_step
            && self.max_step < 1.0
            && self.newton_tolerance > 0.0
            && self.tracking_tolerance > 0.0
            && self.divergence_threshold > 0.0
            && self.collapse_threshold > 0.0
            && self.collapse_threshold < self.divergence_threshold
            && self.end_offset > 0.0
            && self.end_offset < 1.0
            && self.max_newton_iters > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("inconsistent tracker options {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PathStatus {
    Converged,
    DivergedToInfinity,
    CollapsedToBoundary,
    TruncatedSingular,
    Failed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub status: PathStatus,
    /// Last accepted point.
    pub endpoint: ComplexPoint,
    /// Relative backward error `max_i |H_i| / Σ|terms of H_i|` at the endpoint.
    pub residual: f64,
    /// Parameter value of the endpoint.
    pub s: f64,
    /// Refined samples near the end of the path, increasing in `s`.
    pub samples: Vec<(f64, ComplexPoint)>,
    pub steps_taken: usize,
}

struct Newton {
    converged: bool,
    residual: f64,
    singular: bool,
}

fn newton(h: &CoefficientPathHomotopy, z: &mut [Complex64], s: f64, tol: f64, max_iters: usize, first_limit: f64) -> Newton {
    let mut last_residual = f64::INFINITY;
    let mut prev_norm = f64::INFINITY;
    for it in 0..max_iters {
        let Some(sc) = h.eval_scaled(z, s) else {
            return Newton { converged: false, residual: f64::INFINITY, singular: false };
        };
        last_residual = sc.residual;
        let rhs: Vec<Complex64> = sc.f.iter().map(|v| -v).collect();
        let Some((dz, cond)) = solve_linear(sc.jac, &rhs) else {
            return Newton { converged: false, residual: last_residual, singular: true };
        };
        let norm = dz.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if (it == 0 && norm > first_limit) || (it > 0 && norm > 0.5 * prev_norm && norm > tol) {
            return Newton { converged: false, residual: last_residual, singular: cond > 1e13 };
        }
        for (zj, d) in z.iter_mut().zip(&dz) {
            *zj += d;
        }
        prev_norm = norm;
        if norm <= tol {
            let residual = h.eval_scaled(z, s).map(|e| e.residual).unwrap_or(f64::INFINITY);
            return Newton { converged: true, residual, singular: false };
        }
    }
    Newton { converged: false, residual: last_residual, singular: false }
}

fn velocity(h: &CoefficientPathHomotopy, z: &[Complex64], s: f64) -> Option<(Vec<Complex64>, f64)> {
    let sc = h.eval_scaled(z, s)?;
    let rhs: Vec<Complex64> = sc.ds.iter().map(|v| -v).collect();
    solve_linear(sc.jac, &rhs)
}

fn rk4(h: &CoefficientPathHomotopy, z: &[Complex64], s: f64, dt: f64) -> Option<(Vec<Complex64>, f64)> {
    let axpy = |a: &[Complex64], k: &[Complex64], c: f64| -> Vec<Complex64> {
        a.iter().zip(k).map(|(x, y)| x + y * c).collect()
    };
    let (k1, c1) = velocity(h, z, s)?;
    let (k2, c2) = velocity(h, &axpy(z, &k1, dt / 2.0), s + dt / 2.0)?;
    let (k3, c3) = velocity(h, &axpy(z, &k2, dt / 2.0), s + dt / 2.0)?;
    let (k4, c4) = velocity(h, &axpy(z, &k3, dt), s + dt)?;
    let out = (0..z.len())
        .map(|j| z[j] + (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (dt / 6.0))
        .collect();
    Some((out, c1.max(c2).max(c3).max(c4)))
}

fn to_log(x: &ComplexPoint) -> Option<Vec<Complex64>> {
    x.coords()
        .iter()
        .map(|v| if v.norm() > 0.0 && v.norm().is_finite() { Some(v.ln()) } else { None })
        .collect()
}

fn from_log(z: &[Complex64]) -> ComplexPoint {
    ComplexPoint::new(z.iter().map(|v| v.exp()).collect())
}

fn threshold_status(z: &[Complex64], opts: &TrackerOptions) -> Option<PathStatus> {
    let hi = opts.divergence_threshold.ln();
    let lo = opts.collapse_threshold.ln();
    if z.iter().any(|v| v.re > hi) {
        Some(PathStatus::DivergedToInfinity)
    } else if z.iter().any(|v| v.re < lo) {
        Some(PathStatus::CollapsedToBoundary)
    } else {
        None
    }
}

/// Tracks `x0` from `s = 0` through each of `targets` (increasing, ≤ 1),
/// refining to `newton_tolerance` and recording a sample at each target.
pub fn track_to(h: &CoefficientPathHomotopy, x0: &ComplexPoint, opts: &TrackerOptions, targets: &[f64]) -> PathResult {
    let fail = |endpoint: ComplexPoint, status: PathStatus| PathResult {
        status,
        endpoint,
        residual: f64::INFINITY,
        s: 0.0,
        samples: vec![],
        steps_taken: 0,
    };
    if x0.len() != h.num_vars {
        return fail(x0.clone(), PathStatus::Failed);
    }
    let Some(mut z) = to_log(x0) else {
        return fail(x0.clone(), PathStatus::CollapsedToBoundary);
    };
    let start = newton(h, &mut z, 0.0, opts.newton_tolerance, opts.max_newton_iters + 3, f64::INFINITY);
    if !start.converged {
        let status = if start.singular { PathStatus::TruncatedSingular } else { PathStatus::Failed };
        return fail(x0.clone(), status);
    }
    let mut s = 0.0;
    let mut step = opts.initial_step;
    let mut successes = 0;
    let mut steps_taken = 0;
    let mut samples = Vec::with_capacity(targets.len());
    let mut residual = start.residual;
    let finish = |status, z: &[Complex64], s, residual, samples, steps_taken| PathResult {
        status,
        endpoint: from_log(z),
        residual,
        s,
        samples,
        steps_taken,
    };
    if let Some(status) = threshold_status(&z, opts) {
        return finish(status, &z, s, residual, samples, steps_taken);
    }
    for &target in targets {
        while s < target {
            let remaining = target - s;
            let dt = step.min(remaining);
            let singular;
            let mut accepted = false;
            if let Some((mut zp, cond)) = rk4(h, &z, s, dt) {
                let mut sing = cond > opts.singular_threshold;
                let s_next = if dt >= remaining { target } else { s + dt };
                let nt = newton(h, &mut zp, s_next, opts.tracking_tolerance, opts.max_newton_iters, opts.max_first_correction);
                sing |= nt.singular;
                singular = sing;
                if nt.converged {
                    accepted = true;
                    z = zp;
                    s = s_next;
                    residual = nt.residual;
                    steps_taken += 1;
                    if let Some(status) = threshold_status(&z, opts) {
                        return finish(status, &z, s, residual, samples, steps_taken);
                    }
                    successes += 1;
                    if successes >= 3 {
                        step = (step * 2.0).min(opts.max_step);
                        successes = 0;
                    }
                }
            } else {
                singular = true;
            }
            if !accepted {
                successes = 0;
                step /= 2.0;
                if step < opts.min_step {
                    let status = if singular { PathStatus::TruncatedSingular } else { PathStatus::Failed };
                    return finish(status, &z, s, residual, samples, steps_taken);
                }
            }
        }
        let mut zr = z.clone();
        let nt = newton(h, &mut zr, target, opts.newton_tolerance, opts.max_newton_iters + 5, opts.max_first_correction);
        if nt.converged {
            z = zr;
            residual = nt.residual;
        } else {
            residual = h.eval_scaled(&z, target).map(|e| e.residual).unwrap_or(f64::INFINITY);
        }
        samples.push((target, from_log(&z)));
    }
    let status = if residual <= opts.newton_tolerance {
        PathStatus::Converged
    } else {
        PathStatus::TruncatedSingular
    };
    finish(status, &z, s, residual, samples, steps_taken)
}

/// Tracks to `s = 1 - δ_end`, recording tail samples at `1 - δ_end`,
/// `1 - δ_end/2` and `1 - δ_end/4`.
pub fn track(h: &CoefficientPathHomotopy, x0: &ComplexPoint, opts: &TrackerOptions) -> PathResult {
    let d = opts.end_offset;
    track_to(h, x0, opts, &[1.0 - d, 1.0 - d / 2.0, 1.0 - d / 4.0])
}

/// Tracks all the way to `s = 1`; for homotopies whose end system is regular.
pub fn track_segment(h: &CoefficientPathHomotopy, x0: &ComplexPoint, opts: &TrackerOptions) -> PathResult {
    track_to(h, x0, opts, &[1.0])
}

/// Runs `track` on every start; results are in input order regardless of
/// scheduling.
pub fn track_all(h: &CoefficientPathHomotopy, starts: &[ComplexPoint], opts: &TrackerOptions) -> Vec<PathResult> {
    starts.par_iter().map(|x0| track(h, x0, opts)).collect()
}

pub fn track_all_segments(h: &CoefficientPathHomotopy, starts: &[ComplexPoint], opts: &TrackerOptions) -> Vec<PathResult> {
    starts.par_iter().map(|x0| track_segment(h, x0, opts)).collect()
}

/// Newton refinement of `x` on the fixed system `H(·, s)`.
pub fn refine(h: &CoefficientPathHomotopy, x: &ComplexPoint, s: f64, tol: f64, max_iters: usize) -> Option<(ComplexPoint, f64)> {
    let mut z = to_log(x)?;
    let nt = newton(h, &mut z, s, tol, max_iters, f64::INFINITY);
    nt.converged.then(|| (from_log(&z), nt.residual))
}

/// Relative backward error of `x` for `H(·, s)`.
pub fn relative_residual(h: &CoefficientPathHomotopy, x: &ComplexPoint, s: f64) -> f64 {
    to_log(x)
        .and_then(|z| h.eval_scaled(&z, s))
        .map(|e| e.residual)
        .unwrap_or(f64::INFINITY)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveOutcome {
    pub solutions: Vec<ComplexPoint>,
    pub paths: usize,
    pub converged: usize,
    pub diverged: usize,
    pub collapsed: usize,
    pub failed: usize,
    pub rejected_endpoints: usize,
}

/// Total-degree homotopy solve with path diagnostics.
pub fn solve_square_detailed(system: &PolynomialSystem, opts: &TrackerOptions, seed: u64) -> Result<SolveOutcome> {
    if system.t_index().is_some() {
        return Err(Error::InvalidArgument("solve_square needs a t-free system".into()));
    }
    let n = system.num_vars();
    if system.len() != n {
        return Err(Error::NotSquare {
            equations: system.len(),
            variables: n,
        });
    }
    let target = system.clear_denominators();
    let degrees: Vec<i64> = target.polynomials().iter().map(LaurentPolynomial::total_degree).collect();
    if degrees.iter().any(|&d| d == 0) {
        // a nonzero constant equation has no solutions
        return Ok(SolveOutcome::default());
    }
    let start_polys: Vec<LaurentPolynomial> = degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            LaurentPolynomial::variable(n, i)
                .pow(d)
                .expect("nonnegative power")
                .sub(&LaurentPolynomial::constant(n, Complex64::new(1.0, 0.0)))
        })
        .collect();
    let start = PolynomialSystem::with_names(start_polys, target.var_names().to_vec())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma = random_unit(&mut rng);
    let h = CoefficientPathHomotopy::linear_blend(&start, &target, gamma)?;
    let fixed = CoefficientPathHomotopy::constant(&target)?;

    let total: usize = degrees.iter().map(|&d| d as usize).product();
    let starts: Vec<ComplexPoint> = (0..total)
        .map(|mut idx| {
            let coords = degrees
                .iter()
                .map(|&d| {
                    let k = idx % d as usize;
                    idx /= d as usize;
                    Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / d as f64)
                })
                .collect();
            ComplexPoint::new(coords)
        })
        .collect();

    let results: Vec<(PathStatus, Option<ComplexPoint>)> = starts
        .par_iter()
        .map(|x0| {
            let r = track(&h, x0, opts);
            let refined = if r.status == PathStatus::Converged {
                refine(&fixed, &r.endpoint, 1.0, opts.newton_tolerance, 20)
                    .filter(|(p, res)| *res <= opts.newton_tolerance && in_torus(p, opts))
                    .map(|(p, _)| p)
            } else {
                None
            };
            (r.status, refined)
        })
        .collect();

    let mut out = SolveOutcome {
        paths: total,
        ..Default::default()
    };
    for (status, refined) in results {
        match status {
            PathStatus::Converged => out.converged += 1,
            PathStatus::DivergedToInfinity => out.diverged += 1,
            PathStatus::CollapsedToBoundary => out.collapsed += 1,
            PathStatus::TruncatedSingular | PathStatus::Failed => out.failed += 1,
        }
        match refined {
            Some(p) => {
                if !out.solutions.iter().any(|q| q.relative_distance(&p) <= 1e-8) {
                    out.solutions.push(p);
                }
            }
            None if status == PathStatus::Converged => out.rejected_endpoints += 1,
            None => {}
        }
    }
    Ok(out)
}

pub fn in_torus(p: &ComplexPoint, opts: &TrackerOptions) -> bool {
    p.coords()
        .iter()
        .all(|v| v.norm() >= opts.collapse_threshold && v.norm() <= opts.divergence_threshold)
}

/// Torus solutions of a square system via a total-degree homotopy with a
/// random `γ`.
pub fn solve_square(system: &PolynomialSystem, opts: &TrackerOptions, seed: u64) -> Result<Vec<ComplexPoint>> {
    Ok(solve_square_detailed(system, opts, seed)?.solutions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_system;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    /// Homotopy built from a system in variables (x..., s) treating s as the parameter.
    fn hom(text: &str) -> CoefficientPathHomotopy {
        let sys = parse_system(text).unwrap();
        let n = sys.num_vars() - 1;
        let polys = sys.polynomials().iter().map(|p| p.clone().with_parameter(n)).collect();
        let sys = PolynomialSystem::with_names(polys, sys.var_names().to_vec()).unwrap();
        CoefficientPathHomotopy::from_parametric(&sys, c(0.0), c(1.0)).unwrap()
    }

    #[test]
    fn coefficients_evaluate_with_derivative() {
        // 1 + 3(1 - s)^2 + 2s
        let part = |k0: f64, k1: f64, cc: f64, k: u32| CoeffPart { c: c(cc), t0: c(k0), t1: c(k1), k };
        let t = PathTerm {
            parts: vec![constant_part(c(1.0)), part(1.0, -1.0, 3.0, 2), part(0.0, 1.0, 2.0, 1)],
            exponents: vec![],
        };
        for s in [0.0, 0.25, 0.75, 1.0] {
            let (v, d) = t.coeff_at(s);
            assert!((v - c(1.0 + 3.0 * (1.0 - s) * (1.0 - s) + 2.0 * s)).norm() < 1e-14);
            assert!((d - c(-6.0 * (1.0 - s) + 2.0)).norm() < 1e-14);
        }
        // a vanishing line keeps relative accuracy near its root
        let q = part(1e-3, -1e-3, 1.0, 6);
        let s = 1.0 - 2.5e-7;
        let exact = (1e-3f64 * 2.5e-7).powi(6);
        assert!((q.c * q.line_at(s).powi(6) - c(exact)).norm() / exact < 1e-8);
    }

    #[test]
    fn square_root_branch() {
        let h = hom("ring x s\nx^2 - 1 - 3*s");
        let r = track(&h, &ComplexPoint::from_real(&[1.0]), &TrackerOptions::default());
        assert_eq!(r.status, PathStatus::Converged);
        let expected = (1.0 + 3.0 * (1.0 - 0.25e-6f64)).sqrt();
        assert!((r.endpoint[0] - expected).norm() < 1e-12);
        assert!((r.endpoint[0] - 2.0).norm() < 1e-6);
        assert_eq!(r.samples.len(), 3);
        assert!(r.samples.windows(2).all(|w| w[0].0 < w[1].0));
        assert!(r.residual <= 1e-10);
        let full = track_segment(&h, &ComplexPoint::from_real(&[1.0]), &TrackerOptions::default());
        assert!((full.endpoint[0] - 2.0).norm() < 1e-13);
    }

    #[test]
    fn escaping_root_diverges() {
        // (1-s)(x^2-1) + s(x-1): the root starting at -1 behaves like -1/(1-s)
        let h = hom("ring x s\n(1-s)*(x^2-1) + s*(x-1)");
        let opts = TrackerOptions { end_offset: 1e-10, ..Default::default() };
        let r = track(&h, &ComplexPoint::from_real(&[-1.0]), &opts);
        assert_eq!(r.status, PathStatus::DivergedToInfinity);
        // closed form of the escaping root at the stopping parameter
        let s = r.s;
        let exact = (-s - (s * s + 4.0 * (1.0 - s)).sqrt()) / (2.0 * (1.0 - s));
        assert!((r.endpoint[0].re - exact).abs() / exact.abs() < 1e-6);
        // the other root stays at 1
        let r = track(&h, &ComplexPoint::from_real(&[1.0]), &opts);
        assert_eq!(r.status, PathStatus::Converged);
        assert!((r.endpoint[0] - 1.0).norm() < 1e-9);
    }

    #[test]
    fn vanishing_root_collapses() {
        let h = hom("ring x s\nx - (1 - s)");
        let opts = TrackerOptions { end_offset: 1e-10, ..Default::default() };
        let r = track(&h, &ComplexPoint::from_real(&[1.0]), &opts);
        assert_eq!(r.status, PathStatus::CollapsedToBoundary);
        assert!(r.endpoint[0].norm() < 1e-8);
    }

    #[test]
    fn track_all_preserves_order() {
        let h = hom("ring x s\nx^2 - 1 - 3*s");
        let starts = vec![ComplexPoint::from_real(&[1.0]), ComplexPoint::from_real(&[-1.0])];
        let rs = track_all(&h, &starts, &TrackerOptions::default());
        assert!((rs[0].endpoint[0] - 2.0).norm() < 1e-6);
        assert!((rs[1].endpoint[0] + 2.0).norm() < 1e-6);
        assert!(track_all(&h, &[], &TrackerOptions::default()).is_empty());
    }

    #[test]
    fn large_coordinates_are_tracked_relatively() {
        // x = 10^(200 s) stays well inside the scaled arithmetic
        let h = hom("ring x y s\nx - y^2\ny - 1 - 999*s");
        let opts = TrackerOptions { divergence_threshold: 1e300, collapse_threshold: 1e-300, ..Default::default() };
        let r = track_segment(&h, &ComplexPoint::from_real(&[1.0, 1.0]), &opts);
        assert_eq!(r.status, PathStatus::Converged);
        assert!((r.endpoint[1] - 1000.0).norm() < 1e-9);
        assert!((r.endpoint[0] - 1e6).norm() < 1e-3);
    }

    fn sorted(mut v: Vec<ComplexPoint>) -> Vec<ComplexPoint> {
        v.sort_by(|a, b| {
            let ka: Vec<f64> = a.coords().iter().flat_map(|z| [z.re, z.im]).collect();
            let kb: Vec<f64> = b.coords().iter().flat_map(|z| [z.re, z.im]).collect();
            ka.partial_cmp(&kb).unwrap()
        });
        v
    }

    #[test]
    fn solve_square_examples() {
        let opts = TrackerOptions::default();
        let sols = solve_square(&parse_system("ring x y\nx^2 - 1\ny^3 - 1").unwrap(), &opts, 1).unwrap();
        assert_eq!(sols.len(), 6);

        let sols = sorted(solve_square(&parse_system("ring x y\nx + y - 3\nx*y - 2").unwrap(), &opts, 2).unwrap());
        assert_eq!(sols.len(), 2);
        assert!((sols[0][0] - 1.0).norm() < 1e-10 && (sols[0][1] - 2.0).norm() < 1e-10);
        assert!((sols[1][0] - 2.0).norm() < 1e-10 && (sols[1][1] - 1.0).norm() < 1e-10);

        let sols = solve_square(&parse_system("ring x y\n1 + x^3 + y^2\ny - 5").unwrap(), &opts, 3).unwrap();
        assert_eq!(sols.len(), 3);
        for p in &sols {
            assert!((p[0].powi(3) + 26.0).norm() < 1e-9);
            assert!((p[0].norm() - 26f64.powf(1.0 / 3.0)).abs() < 1e-10);
        }
    }

    #[test]
    fn solve_square_handles_laurent_input() {
        let opts = TrackerOptions::default();
        let sols = solve_square(&parse_system("ring x y\nx*y^-1 - 2\nx + y - 3").unwrap(), &opts, 4).unwrap();
        assert_eq!(sols.len(), 1);
        assert!((sols[0][0] - 2.0).norm() < 1e-10 && (sols[0][1] - 1.0).norm() < 1e-10);
    }

    #[test]
    fn solve_square_rejects_non_square() {
        let sys = parse_system("ring x y\nx + y").unwrap();
        assert!(matches!(solve_square(&sys, &TrackerOptions::default(), 0), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn option_validation() {
        assert!(TrackerOptions::default().validate().is_ok());
        let bad = TrackerOptions { min_step: 0.1, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
