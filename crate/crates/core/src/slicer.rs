//! Candidate rays from binomial slices of the amoeba.
//!
//! A slice `x^a = C` with `|C|` large meets the curve only near the tentacles
//! `r` with `r·a > 0`. Moving the slice from `|C| = e^{c1}` to `e^{c2}` along
//! `C(s) = (1 + sA)C` keeps each point on its tentacle, and the log-modulus
//! difference of the two points is close to a multiple of `r`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlin::{snap_direction, IntVector, SnapOptions, SnapReject};
use crate::poly::{ComplexPoint, ExponentVector, LaurentPolynomial, PolynomialSystem};
use crate::tracker::{self, CoefficientPathHomotopy, PathResult, PathStatus, TrackerOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub a: IntVector,
    pub log_c1: f64,
    pub log_c2: f64,
    pub phase: f64,
}

impl SliceSpec {
    pub fn new(a: IntVector, log_c1: f64, log_c2: f64, phase: f64) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::ZeroVector);
        }
        if !(log_c1 > 0.0 && log_c2 > log_c1) {
            return Err(Error::InvalidArgument(format!(
                "slice moduli need 0 < log_c1 < log_c2, got {log_c1}, {log_c2}"
            )));
        }
        Ok(SliceSpec { a, log_c1, log_c2, phase })
    }

    pub fn c1(&self) -> Complex64 {
        Complex64::from_polar(self.log_c1.exp(), self.phase)
    }

    /// `A` with `(1 + A)·e^{c1} = e^{c2}`.
    pub fn stretch(&self) -> f64 {
        (self.log_c2 - self.log_c1).exp_m1()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateReport {
    pub direction: IntVector,
    pub witness_pairs: Vec<(ComplexPoint, ComplexPoint)>,
    pub source_slices: Vec<SliceSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RejectedPair {
    pub slice: SliceSpec,
    pub log_difference: Vec<f64>,
    pub reason: SnapReject,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SliceDiagnostics {
    pub paths: usize,
    pub slice_points: usize,
    pub dropped_extensions: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CandidateSet {
    pub candidates: Vec<CandidateReport>,
    pub rejected: Vec<RejectedPair>,
    pub diagnostics: Vec<(SliceSpec, SliceDiagnostics)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SlicerConfig {
    pub log_c1: f64,
    pub log_c2: f64,
    pub tracker: TrackerOptions,
    pub snap: SnapOptions,
}

impl Default for SlicerConfig {
    fn default() -> Self {
        SlicerConfig {
            log_c1: 8.0,
            log_c2: 16.0,
            tracker: wide_tracker(),
            snap: SnapOptions::default(),
        }
    }
}

/// Tracker options whose thresholds admit coordinates far out on tentacles.
pub fn wide_tracker() -> TrackerOptions {
    TrackerOptions {
        divergence_threshold: 1e150,
        collapse_threshold: 1e-150,
        ..TrackerOptions::default()
    }
}

/// `x^{a+} - C x^{a-}` in `n` variables.
fn binomial(a: &IntVector, n: usize, c: Complex64) -> Result<LaurentPolynomial> {
    let a = a.to_i64s()?;
    if a.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: a.len() });
    }
    let plus: Vec<i64> = a.iter().map(|&k| k.max(0)).collect();
    let minus: Vec<i64> = a.iter().map(|&k| (-k).max(0)).collect();
    let mut p = LaurentPolynomial::monomial(ExponentVector::new(plus), Complex64::new(1.0, 0.0));
    p.add_term(ExponentVector::new(minus), -c);
    Ok(p)
}

fn check_curve_system(f: &PolynomialSystem) -> Result<()> {
    if f.t_index().is_some() {
        return Err(Error::InvalidArgument("slicing needs a t-free system".into()));
    }
    if f.len() + 1 != f.num_vars() {
        return Err(Error::NotSquare {
            equations: f.len() + 1,
            variables: f.num_vars(),
        });
    }
    Ok(())
}

/// Torus points of `F ∪ {x^a - C}` with `C = e^{log_c1 + i·phase}`.
pub fn slice_solve(f: &PolynomialSystem, spec: &SliceSpec, opts: &TrackerOptions, seed: u64) -> Result<Vec<ComplexPoint>> {
    Ok(slice_solve_detailed(f, spec, opts, seed)?.solutions)
}

pub fn slice_solve_detailed(
    f: &PolynomialSystem,
    spec: &SliceSpec,
    opts: &TrackerOptions,
    seed: u64,
) -> Result<tracker::SolveOutcome> {
    check_curve_system(f)?;
    // A total-degree start is badly scaled against |C| = e^8, so solve at
    // |C| = 1 and carry the points out along the ray of C.
    let unit = SliceSpec {
        log_c1: 0.0,
        log_c2: spec.log_c1,
        ..spec.clone()
    };
    let mut sys = f.clone();
    sys.push(binomial(&spec.a, f.num_vars(), unit.c1())?)?;
    let mut out = tracker::solve_square_detailed(&sys, opts, seed)?;
    let moved = slice_extend(f, &unit, unit.stretch(), &out.solutions, opts)?;
    out.solutions.clear();
    for r in moved {
        if r.status != PathStatus::Converged || !tracker::in_torus(&r.endpoint, opts) {
            out.failed += 1;
        } else if !out.solutions.iter().any(|q| q.relative_distance(&r.endpoint) <= 1e-8) {
            out.solutions.push(r.endpoint);
        }
    }
    Ok(out)
}

/// Tracks slice points from `C` to `(1 + A)C`. Results are in input order.
pub fn slice_extend(
    f: &PolynomialSystem,
    spec: &SliceSpec,
    stretch: f64,
    starts: &[ComplexPoint],
    opts: &TrackerOptions,
) -> Result<Vec<PathResult>> {
    check_curve_system(f)?;
    if !(stretch >= 0.0 && stretch.is_finite()) {
        return Err(Error::InvalidArgument(format!("stretch must be a nonnegative real, got {stretch}")));
    }
    let n = f.num_vars();
    // the slice parameter becomes the last variable
    let mut polys: Vec<LaurentPolynomial> = f
        .polynomials()
        .iter()
        .map(|p| p.extend_variables(1).with_parameter(n))
        .collect();
    // x^{a+} - C x^{a-} - C·A·s·x^{a-}
    let c = spec.c1();
    let a = spec.a.to_i64s()?;
    let mut plus: Vec<i64> = a.iter().map(|&k| k.max(0)).collect();
    let mut minus: Vec<i64> = a.iter().map(|&k| (-k).max(0)).collect();
    plus.push(0);
    minus.push(0);
    let mut row = LaurentPolynomial::monomial(ExponentVector::new(plus), Complex64::new(1.0, 0.0));
    row.add_term(ExponentVector::new(minus.clone()), -c);
    minus[n] = 1;
    row.add_term(ExponentVector::new(minus), -c * stretch);
    polys.push(row.with_parameter(n));
    let mut names = f.var_names().to_vec();
    names.push("__s".into());
    let sys = PolynomialSystem::with_names(polys, names)?;
    let h = CoefficientPathHomotopy::from_parametric(&sys, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))?;
    Ok(tracker::track_all_segments(&h, starts, opts))
}

/// Default slice normals: `±e_i` and `±(1,…,1)`.
pub fn default_directions(n: usize) -> Vec<IntVector> {
    let mut out = Vec::with_capacity(2 * n + 2);
    for i in 0..n {
        out.push(IntVector::from_i64s(&unit(n, i, 1)));
    }
    out.push(IntVector::from_i64s(&vec![-1; n]));
    for i in 0..n {
        out.push(IntVector::from_i64s(&unit(n, i, -1)));
    }
    out.push(IntVector::from_i64s(&vec![1; n]));
    out
}

fn unit(n: usize, i: usize, v: i64) -> Vec<i64> {
    let mut e = vec![0; n];
    e[i] = v;
    e
}

/// `count` nonzero random directions with entries in `[-3, 3]`.
pub fn random_directions(n: usize, count: usize, rng: &mut impl Rng) -> Vec<IntVector> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<i64> = (0..n).map(|_| rng.gen_range(-3..=3)).collect();
        if v.iter().any(|&k| k != 0) {
            out.push(IntVector::from_i64s(&v));
        }
    }
    out
}

/// Slices `F` along every direction, extends, and snaps the log-differences
/// with entries bounded by `max_entry`.
pub fn candidate_rays(
    f: &PolynomialSystem,
    directions: &[IntVector],
    max_entry: i64,
    config: &SlicerConfig,
    seed: u64,
) -> Result<CandidateSet> {
    check_curve_system(f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jobs: Vec<(SliceSpec, u64)> = directions
        .iter()
        .map(|a| {
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            Ok((SliceSpec::new(a.clone(), config.log_c1, config.log_c2, phase)?, rng.gen()))
        })
        .collect::<Result<_>>()?;
    let snap = SnapOptions { max_entry, ..config.snap };
    let per_slice = jobs
        .par_iter()
        .map(|(spec, s)| run_slice(f, spec, *s, config, &snap))
        .collect::<Result<Vec<_>>>()?;

    let mut out = CandidateSet::default();
    for (spec, diag, accepted, rejected) in per_slice {
        for (dir, pair) in accepted {
            match out.candidates.iter_mut().find(|c| c.direction == dir) {
                Some(c) => {
                    c.witness_pairs.push(pair);
                    if !c.source_slices.contains(&spec) {
                        c.source_slices.push(spec.clone());
                    }
                }
                None => out.candidates.push(CandidateReport {
                    direction: dir,
                    witness_pairs: vec![pair],
                    source_slices: vec![spec.clone()],
                }),
            }
        }
        out.rejected.extend(rejected);
        out.diagnostics.push((spec, diag));
    }
    Ok(out)
}

type SliceOutput = (
    SliceSpec,
    SliceDiagnostics,
    Vec<(IntVector, (ComplexPoint, ComplexPoint))>,
    Vec<RejectedPair>,
);

fn run_slice(f: &PolynomialSystem, spec: &SliceSpec, seed: u64, config: &SlicerConfig, snap: &SnapOptions) -> Result<SliceOutput> {
    let solved = slice_solve_detailed(f, spec, &config.tracker, seed)?;
    let ext = slice_extend(f, spec, spec.stretch(), &solved.solutions, &config.tracker)?;
    let mut diag = SliceDiagnostics {
        paths: solved.paths,
        slice_points: solved.solutions.len(),
        dropped_extensions: 0,
    };
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for (start, r) in solved.solutions.iter().zip(ext) {
        if r.status != PathStatus::Converged {
            diag.dropped_extensions += 1;
            continue;
        }
        let u: Vec<f64> = r
            .endpoint
            .log_abs()
            .iter()
            .zip(start.log_abs())
            .map(|(e, s)| e - s)
            .collect();
        match snap_direction(&u, snap) {
            Ok(dir) => accepted.push((dir, (start.clone(), r.endpoint))),
            Err(reason) => rejected.push(RejectedPair {
                slice: spec.clone(),
                log_difference: u,
                reason,
            }),
        }
    }
    Ok((spec.clone(), diag, accepted, rejected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_system;

    fn triangle() -> PolynomialSystem {
        parse_system("ring x y\n1 + x^3 + y^2").unwrap()
    }

    fn spec(a: &[i64], c1: f64) -> SliceSpec {
        SliceSpec::new(IntVector::from_i64s(a), c1, 2.0 * c1, 0.3).unwrap()
    }

    #[test]
    fn slice_counts_follow_tentacle_indices() {
        let opts = wide_tracker();
        let pts = slice_solve(&triangle(), &spec(&[0, 1], 8.0), &opts, 1).unwrap();
        assert_eq!(pts.len(), 3);
        for p in &pts {
            let l = p.log_abs();
            assert!((l[1] - 8.0).abs() < 1e-9);
            assert!((l[0] - 16.0 / 3.0).abs() < 1e-3);
            // direct solve: x^3 = -1 - C^2
            let c = spec(&[0, 1], 8.0).c1();
            assert!((p[0].powi(3) + 1.0 + c * c).norm() / (c * c).norm() < 1e-10);
        }
        let pts = slice_solve(&triangle(), &spec(&[1, 0], 8.0), &opts, 2).unwrap();
        assert_eq!(pts.len(), 2);
    }

    #[test]
    fn slice_orthogonal_to_every_tentacle_is_empty() {
        // x = 2y has the two rays ±(1,1), both orthogonal to (1,-1)
        let g = parse_system("ring x y\nx - 2*y").unwrap();
        assert!(slice_solve(&g, &spec(&[1, -1], 8.0), &wide_tracker(), 3).unwrap().is_empty());
        let line = parse_system("ring x y\nx - y - 1").unwrap();
        assert_eq!(slice_solve(&line, &spec(&[1, 0], 8.0), &wide_tracker(), 3).unwrap().len(), 1);
    }

    #[test]
    fn extension_follows_tentacle() {
        let sp = spec(&[0, 1], 8.0);
        let opts = wide_tracker();
        let starts = slice_solve(&triangle(), &sp, &opts, 4).unwrap();
        let ext = slice_extend(&triangle(), &sp, sp.stretch(), &starts, &opts).unwrap();
        for (s, r) in starts.iter().zip(&ext) {
            assert_eq!(r.status, PathStatus::Converged);
            let d: Vec<f64> = r.endpoint.log_abs().iter().zip(s.log_abs()).map(|(a, b)| a - b).collect();
            assert!((d[0] - 16.0 / 3.0).abs() < 1e-3 && (d[1] - 8.0).abs() < 1e-9);
        }
        let same = slice_extend(&triangle(), &sp, 0.0, &starts, &opts).unwrap();
        for (s, r) in starts.iter().zip(&same) {
            assert!(s.relative_distance(&r.endpoint) < 1e-12);
        }
    }

    #[test]
    fn negative_slice_follows_negative_tentacle() {
        let sp = spec(&[0, -1], 8.0);
        let opts = wide_tracker();
        let starts = slice_solve(&triangle(), &sp, &opts, 5).unwrap();
        assert_eq!(starts.len(), 3);
        let ext = slice_extend(&triangle(), &sp, sp.stretch(), &starts, &opts).unwrap();
        for (s, r) in starts.iter().zip(&ext) {
            let d: Vec<f64> = r.endpoint.log_abs().iter().zip(s.log_abs()).map(|(a, b)| a - b).collect();
            assert!(d[0].abs() < 1e-3 && (d[1] + 8.0).abs() < 1e-9);
        }
    }

    #[test]
    fn triangle_candidates_cover_the_oracle_rays() {
        let set = candidate_rays(&triangle(), &default_directions(2), 3, &SlicerConfig::default(), 6).unwrap();
        let dirs: Vec<Vec<i64>> = set.candidates.iter().map(|c| c.direction.to_i64s().unwrap()).collect();
        for r in [[2, 3], [0, -1], [-1, 0]] {
            assert!(dirs.contains(&r.to_vec()), "{r:?} missing from {dirs:?}");
        }
        for c in &set.candidates {
            assert!(c.direction.max_abs() <= 3.into());
            assert!(!c.witness_pairs.is_empty());
        }
        // the (2,3) tentacle is met by several slices and merged once
        let merged = set.candidates.iter().find(|c| c.direction.to_i64s().unwrap() == vec![2, 3]).unwrap();
        assert!(merged.source_slices.len() > 1);
        assert_eq!(dirs.len(), set.candidates.len());
    }

    #[test]
    fn slice_spec_validation() {
        assert!(SliceSpec::new(IntVector::from_i64s(&[0, 0]), 8.0, 16.0, 0.0).is_err());
        assert!(SliceSpec::new(IntVector::from_i64s(&[1, 0]), 8.0, 4.0, 0.0).is_err());
        let s = spec(&[1, 0], 8.0);
        assert!(((1.0 + s.stretch()) * 8f64.exp() - 16f64.exp()).abs() / 16f64.exp() < 1e-12);
    }

    #[test]
    fn default_directions_positively_span() {
        let d = default_directions(3);
        assert_eq!(d.len(), 8);
        let sum = d.iter().fold(IntVector::zero(3), |acc, v| acc.add(v));
        assert!(sum.is_zero());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for v in random_directions(4, 50, &mut rng) {
            assert!(!v.is_zero() && v.max_abs() <= 3.into());
        }
    }
}
