//! Ray multiplicities by counting homotopy paths that stay in the torus as
//! the Puiseux parameter tends to zero.
//!
//! For a candidate `ω` and a complement `v` with `ω·v = -1`, the system
//! `J = F ∪ {x^v + t}` after `x_i ↦ t^{-ω_i} x_i` has as many solution paths
//! converging into the torus at `t → 0` as the curve has Puiseux branches with
//! valuation `ω`, counted with multiplicity.

use num_bigint::BigInt;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlin::{complement_vector, kernel_basis, primitive, IntVector};
use crate::poly::{random_unit, ComplexPoint, ExponentVector, LaurentPolynomial, PolynomialSystem};
use crate::tracker::{self, CoefficientPathHomotopy, PathResult, PathStatus, TrackerOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MultiplicityConfig {
    pub a0_modulus: f64,
    pub epsilon: f64,
    pub tail_tolerance: f64,
    pub tracker: TrackerOptions,
}

impl Default for MultiplicityConfig {
    fn default() -> Self {
        MultiplicityConfig {
            a0_modulus: 0.1,
            epsilon: 1e-3,
            tail_tolerance: 0.1,
            tracker: TrackerOptions::default(),
        }
    }
}

impl MultiplicityConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.epsilon && self.epsilon < self.a0_modulus) || !(self.tail_tolerance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "multiplicity config needs 0 < epsilon < a0_modulus, got {} and {}",
                self.epsilon, self.a0_modulus
            )));
        }
        self.tracker.validate()
    }

    /// Options for the first segment, where coordinates may already be far
    /// from 1.
    fn segment_tracker(&self) -> TrackerOptions {
        TrackerOptions {
            divergence_threshold: 1e150,
            collapse_threshold: 1e-150,
            ..self.tracker
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EndpointKind {
    Torus,
    Boundary,
    Infinity,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EndpointClass {
    pub kind: EndpointKind,
    /// Per-coordinate estimates of `k` in `x_i ~ t^k`.
    pub exponent_estimates: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicityResult {
    pub multiplicity: usize,
    pub witnesses: Vec<ComplexPoint>,
    pub complement: IntVector,
    pub endpoints: Vec<EndpointClass>,
}

fn check_input(f: &PolynomialSystem, omega: &IntVector) -> Result<()> {
    if f.t_index().is_some() {
        return Err(Error::InvalidArgument("multiplicity needs a t-free system".into()));
    }
    if omega.len() != f.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: f.num_vars(),
            found: omega.len(),
        });
    }
    if f.len() + 1 != f.num_vars() {
        return Err(Error::NotSquare {
            equations: f.len() + 1,
            variables: f.num_vars(),
        });
    }
    if omega.is_zero() {
        return Err(Error::ZeroVector);
    }
    if primitive(omega)? != *omega {
        return Err(Error::NotPrimitive {
            content: crate::intlin::content(omega)?.to_string(),
        });
    }
    Ok(())
}

/// `J = (F ∪ {x^v + t})` weighted by `ω` and cleared, with the complement
/// chosen by [`complement_vector`].
pub fn build_mult_system(f: &PolynomialSystem, omega: &IntVector) -> Result<PolynomialSystem> {
    check_input(f, omega)?;
    let v = complement_vector(omega)?;
    build_with_complement(f, omega, &v)
}

/// As [`build_mult_system`] with an explicit complement `v`, `ω·v = -1`.
pub fn build_with_complement(f: &PolynomialSystem, omega: &IntVector, v: &IntVector) -> Result<PolynomialSystem> {
    check_input(f, omega)?;
    if omega.dot(v) != BigInt::from(-1) {
        return Err(Error::InvalidArgument(format!("{omega} · {v} is not -1")));
    }
    let n = f.num_vars();
    let w = omega.to_i64s()?;
    let v = v.to_i64s()?;
    // x^v + t, with t as an extra variable
    let mut ev = v.clone();
    ev.push(0);
    let mut binom = LaurentPolynomial::monomial(ExponentVector::new(ev), Complex64::new(1.0, 0.0));
    binom.add_term(ExponentVector::unit(n + 1, n), Complex64::new(1.0, 0.0));
    // substitute_weight appends its own t, so substitute the binomial by hand
    let weighted = f.substitute_weight(&w)?;
    let mut polys: Vec<LaurentPolynomial> = weighted.polynomials().to_vec();
    let shifted = LaurentPolynomial::from_terms(
        n + 1,
        binom.terms().map(|(e, c)| {
            let mut ee = e.entries().to_vec();
            let dot: i64 = ee[..n].iter().zip(&w).map(|(a, b)| a * b).sum();
            ee[n] -= dot;
            (ExponentVector::new(ee), *c)
        }),
    );
    polys.push(shifted.with_parameter(n));
    let sys = PolynomialSystem::with_names(polys, weighted.var_names().to_vec())?;
    Ok(sys.clear_denominators())
}

/// Alternative complements `v + Σ j_k·b_k` for kernel basis rows `b_k`.
pub fn alternate_complements(omega: &IntVector, count: usize) -> Result<Vec<IntVector>> {
    let v = complement_vector(omega)?;
    let kernel = kernel_basis(omega)?;
    let mut out = vec![v.clone()];
    let mut j: i64 = 1;
    while out.len() < count && !kernel.is_empty() {
        for b in &kernel {
            for sign in [j, -j] {
                if out.len() < count {
                    out.push(v.add(&b.scaled(&BigInt::from(sign))));
                }
            }
        }
        j += 1;
    }
    Ok(out)
}

/// Exponent estimates `log(|x(t)| / |x(t/2)|) / log 2` from consecutive
/// tail samples.
fn tail_exponents(a: &ComplexPoint, b: &ComplexPoint) -> Vec<f64> {
    a.log_abs()
        .iter()
        .zip(b.log_abs())
        .map(|(x, y)| (x - y) / std::f64::consts::LN_2)
        .collect()
}

/// `1 - 10^-k` for each decade above `delta`, then `1 - delta`,
/// `1 - delta/2`, `1 - delta/4`.
fn tail_targets(delta: f64) -> Vec<f64> {
    let mut out: Vec<f64> = (1..)
        .map(|k| 10f64.powi(-k))
        .take_while(|d| *d > 2.0 * delta)
        .map(|d| 1.0 - d)
        .collect();
    out.extend([1.0 - delta, 1.0 - delta / 2.0, 1.0 - delta / 4.0]);
    out
}

/// Classification from samples `(log|t|, x)` at decreasing `|t|`, with the
/// same rules as [`classify_endpoint`].
fn classify_trend(samples: &[(f64, ComplexPoint)], tol: f64) -> EndpointClass {
    let pairs: Vec<Vec<f64>> = samples
        .windows(2)
        .map(|w| {
            let dt = w[0].0 - w[1].0;
            w[0].1
                .log_abs()
                .iter()
                .zip(w[1].1.log_abs())
                .map(|(a, b)| (a - b) / dt)
                .collect()
        })
        .collect();
    let estimates = pairs.last().cloned().unwrap_or_default();
    let Some(last) = samples.last() else {
        return EndpointClass {
            kind: EndpointKind::Unresolved,
            exponent_estimates: estimates,
        };
    };
    let in_range = last.1.coords().iter().all(|z| (1e-8..=1e8).contains(&z.norm()));
    EndpointClass {
        kind: kind_from_pairs(&pairs, in_range, tol),
        exponent_estimates: estimates,
    }
}

fn kind_from_pairs(pairs: &[Vec<f64>], in_range: bool, tol: f64) -> EndpointKind {
    let Some(first) = pairs.first() else {
        return EndpointKind::Unresolved;
    };
    let n = first.len();
    let all = |pred: &dyn Fn(f64) -> bool, i: usize| pairs.iter().all(|p| pred(p[i]));
    if (0..n).all(|i| all(&|e| e.abs() <= tol, i)) && in_range {
        EndpointKind::Torus
    } else if (0..n).any(|i| all(&|e| e < -tol, i)) {
        EndpointKind::Infinity
    } else if (0..n).any(|i| all(&|e| e > tol, i)) {
        EndpointKind::Boundary
    } else {
        EndpointKind::Unresolved
    }
}

/// Classifies the end of a second-segment path. Samples must be taken at
/// parameter values `t, t/2, t/4` (at least the first two).
pub fn classify_endpoint(result: &PathResult, config: &MultiplicityConfig) -> EndpointClass {
    let unresolved = |e: Vec<f64>| EndpointClass {
        kind: EndpointKind::Unresolved,
        exponent_estimates: e,
    };
    let kind = match result.status {
        PathStatus::DivergedToInfinity => Some(EndpointKind::Infinity),
        PathStatus::CollapsedToBoundary => Some(EndpointKind::Boundary),
        PathStatus::TruncatedSingular | PathStatus::Failed => return unresolved(vec![]),
        PathStatus::Converged => None,
    };
    let pairs: Vec<Vec<f64>> = result
        .samples
        .windows(2)
        .map(|w| tail_exponents(&w[0].1, &w[1].1))
        .collect();
    let estimates = pairs.last().cloned().unwrap_or_default();
    if let Some(kind) = kind {
        return EndpointClass {
            kind,
            exponent_estimates: estimates,
        };
    }
    if pairs.is_empty() {
        return unresolved(estimates);
    }
    let in_range = result.endpoint.coords().iter().all(|z| (1e-8..=1e8).contains(&z.norm()));
    EndpointClass {
        kind: kind_from_pairs(&pairs, in_range, config.tail_tolerance),
        exponent_estimates: estimates,
    }
}

/// Counts torus paths of the weighted system for `ω`.
pub fn ray_multiplicity(f: &PolynomialSystem, omega: &IntVector, config: &MultiplicityConfig, seed: u64) -> Result<MultiplicityResult> {
    check_input(f, omega)?;
    let v = complement_vector(omega)?;
    ray_multiplicity_with(f, omega, &v, config, seed)
}

/// Solutions of `J` at `t = a0`. A total-degree start is solved at the unit
/// `phase`, where coefficients are of one size, and moved radially to `a0`.
/// Also returns the number of lost paths.
fn start_points(
    j: &PolynomialSystem,
    phase: Complex64,
    a0: Complex64,
    opts: &TrackerOptions,
    seed: u64,
) -> Result<(Vec<ComplexPoint>, usize)> {
    let outcome = tracker::solve_square_detailed(&j.specialize_parameter(phase)?, opts, seed)?;
    let mut failed = outcome.failed;
    let h0 = CoefficientPathHomotopy::from_parametric(j, phase, a0 - phase)?;
    let mut points: Vec<ComplexPoint> = Vec::with_capacity(outcome.solutions.len());
    for r in tracker::track_all_segments(&h0, &outcome.solutions, opts) {
        if r.status != PathStatus::Converged || !tracker::in_torus(&r.endpoint, opts) {
            failed += 1;
        } else if !points.iter().any(|q| q.relative_distance(&r.endpoint) <= 1e-8) {
            points.push(r.endpoint);
        }
    }
    Ok((points, failed))
}

pub fn ray_multiplicity_with(
    f: &PolynomialSystem,
    omega: &IntVector,
    v: &IntVector,
    config: &MultiplicityConfig,
    seed: u64,
) -> Result<MultiplicityResult> {
    config.validate()?;
    let j = build_with_complement(f, omega, v)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase = random_unit(&mut rng);
    let a0 = phase * config.a0_modulus;
    let seg = config.segment_tracker();

    let solve_seed: u64 = rand::Rng::gen(&mut rng);
    let (mut starts, failed) = start_points(&j, phase, a0, &seg, solve_seed)?;
    if failed > 0 {
        // path attrition: merge a second solve with a fresh γ
        let (again, _) = start_points(&j, phase, a0, &seg, solve_seed ^ 0x9e37_79b9_7f4a_7c15)?;
        for p in again {
            if !starts.iter().any(|q| q.relative_distance(&p) <= 1e-8) {
                starts.push(p);
            }
        }
    }

    let eps = Complex64::new(config.epsilon, 0.0);
    let h1 = CoefficientPathHomotopy::from_parametric(&j, a0, eps - a0)?;
    let h2 = CoefficientPathHomotopy::from_parametric(&j, eps, -eps)?;
    let j0 = CoefficientPathHomotopy::constant(&j.specialize_parameter(Complex64::new(0.0, 0.0))?)?;
    let tail_opts = config.tracker;

    let seg1_at = |s: f64| (a0 + (eps - a0) * s).norm().ln();
    let seg2_at = |s: f64| (config.epsilon * (1.0 - s)).ln();
    let targets = tail_targets(tail_opts.end_offset);

    let per_path: Vec<(EndpointClass, Option<ComplexPoint>)> = starts
        .par_iter()
        .map(|x0| {
            let r1 = tracker::track_to(&h1, x0, &seg, &[0.5, 0.9, 1.0]);
            if r1.status != PathStatus::Converged {
                let class = EndpointClass {
                    kind: EndpointKind::Unresolved,
                    exponent_estimates: vec![],
                };
                return (class, None);
            }
            let r2 = tracker::track_to(&h2, &r1.endpoint, &tail_opts, &targets);
            let tail = PathResult {
                samples: r2.samples.iter().rev().take(3).rev().cloned().collect(),
                ..r2.clone()
            };
            let mut class = classify_endpoint(&tail, config);
            if matches!(r2.status, PathStatus::Failed | PathStatus::TruncatedSingular) {
                // clustered endpoints stall the tracker; read the trend off
                // the samples reached so far
                let history: Vec<(f64, ComplexPoint)> = r1
                    .samples
                    .iter()
                    .map(|(s, p)| (seg1_at(*s), p.clone()))
                    .chain(r2.samples.iter().map(|(s, p)| (seg2_at(*s), p.clone())))
                    .collect();
                class = classify_trend(&history[history.len().saturating_sub(3)..], config.tail_tolerance);
            }
            let witness = (class.kind == EndpointKind::Torus).then(|| {
                tracker::refine(&j0, &r2.endpoint, 1.0, 1e-12, 8)
                    .map(|(p, _)| p)
                    .unwrap_or_else(|| r2.endpoint.clone())
            });
            (class, witness)
        })
        .collect();

    let mut endpoints = Vec::with_capacity(per_path.len());
    let mut witnesses = Vec::new();
    for (class, w) in per_path {
        witnesses.extend(w);
        endpoints.push(class);
    }
    let unresolved = endpoints.iter().filter(|c| c.kind == EndpointKind::Unresolved).count();
    if unresolved > 0 {
        return Err(Error::Indeterminate(format!(
            "{unresolved} of {} paths for ray {omega} did not resolve",
            endpoints.len()
        )));
    }
    Ok(MultiplicityResult {
        multiplicity: witnesses.len(),
        witnesses,
        complement: v.clone(),
        endpoints,
    })
}
