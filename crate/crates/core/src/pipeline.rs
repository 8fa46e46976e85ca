//! The full tropicalization loop: slice for candidates, keep those with
//! positive multiplicity, stop once the rays form a curve of the numerically
//! computed degree.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intlin::{IntVector, SnapOptions};
use crate::multiplicity::{alternate_complements, ray_multiplicity_with, MultiplicityConfig, MultiplicityResult};
use crate::poly::{parse_system, PolynomialSystem};
use crate::slicer::{candidate_rays, default_directions, random_directions, wide_tracker, SlicerConfig};
use crate::tracker::TrackerOptions;
use crate::tropfan::{check_balancing, completeness_defect, numeric_degree, tropical_degree, Ray, TropicalCurve};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub seed: u64,
    pub max_rounds: usize,
    pub log_c1: f64,
    pub log_c2: f64,
    /// Slice normals of the first round; the `±e_i, ±(1,…,1)` set when absent.
    pub initial_directions: Option<Vec<Vec<i64>>>,
    /// Random slice normals added per later round; `2(n+1)` when 0.
    pub random_directions_per_round: usize,
    /// Attempts per candidate before its multiplicity counts as indeterminate.
    pub multiplicity_attempts: usize,
    /// Attempts at the numeric degree.
    pub degree_attempts: usize,
    pub tracker: TrackerOptions,
    pub slice_tracker: TrackerOptions,
    pub snap: SnapOptions,
    pub multiplicity: MultiplicityConfig,
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            max_rounds: 4,
            log_c1: 8.0,
            log_c2: 16.0,
            initial_directions: None,
            random_directions_per_round: 0,
            multiplicity_attempts: 3,
            degree_attempts: 3,
            tracker: TrackerOptions::default(),
            slice_tracker: wide_tracker(),
            snap: SnapOptions::default(),
            multiplicity: MultiplicityConfig::default(),
            threads: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub direction: Option<IntVector>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub log_difference: Option<Vec<f64>>,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Timings {
    pub stages: Vec<(String, Duration)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub rays: Vec<Ray>,
    pub numeric_degree: u64,
    pub tropical_degree: Option<u64>,
    pub balanced: bool,
    pub complete: bool,
    pub defect: IntVector,
    pub rounds_used: usize,
    pub rejected: Vec<Rejection>,
    pub config: Config,
    pub seed: u64,
    #[serde(skip)]
    pub timings: Timings,
}

impl RunReport {
    pub fn curve(&self) -> Result<TropicalCurve> {
        TropicalCurve::new(self.n, self.rays.clone())
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map(|s| s + "\n")
            .map_err(|e| Error::InvalidArgument(e.to_string()))
    }
}

/// Parses the input text and runs [`tropicalize_system`].
pub fn tropicalize(text: &str, config: &Config) -> Result<RunReport> {
    let sys = parse_system(text)?;
    tropicalize_system(&sys, config)
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(pool.install(f))
}

pub fn tropicalize_system(sys: &PolynomialSystem, config: &Config) -> Result<RunReport> {
    with_pool(config.threads, || run(sys, config))?
}

/// Squares up to `n - 1` equations.
pub fn curve_system(sys: &PolynomialSystem, seed: u64) -> Result<PolynomialSystem> {
    let n = sys.num_vars();
    if sys.t_index().is_some() {
        return Err(Error::InvalidArgument("input must not carry a parameter".into()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("a curve needs at least two variables".into()));
    }
    sys.square_up(n - 1, seed)
}

/// Numeric degree, retried with fresh seeds while the two sections disagree.
pub fn robust_numeric_degree(f: &PolynomialSystem, opts: &TrackerOptions, attempts: usize, rng: &mut impl Rng) -> Result<u64> {
    let mut last = Error::Indeterminate("no degree attempts".into());
    for _ in 0..attempts.max(1) {
        match numeric_degree(f, opts, rng.gen()) {
            Ok(d) => return Ok(d as u64),
            Err(e @ Error::Indeterminate(_)) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Multiplicity with re-randomized `a₀` and complement on indeterminate
/// outcomes.
pub fn robust_multiplicity(
    f: &PolynomialSystem,
    omega: &IntVector,
    config: &MultiplicityConfig,
    attempts: usize,
    seed: u64,
) -> Result<MultiplicityResult> {
    let attempts = attempts.max(1);
    let complements = alternate_complements(omega, attempts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = Error::Indeterminate(format!("no attempts for {omega}"));
    for k in 0..attempts {
        let v = &complements[k % complements.len()];
        match ray_multiplicity_with(f, omega, v, config, rng.gen()) {
            Ok(m) => return Ok(m),
            Err(e @ Error::Indeterminate(_)) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

fn run(sys: &PolynomialSystem, config: &Config) -> Result<RunReport> {
    config.tracker.validate()?;
    config.slice_tracker.validate()?;
    config.multiplicity.validate()?;
    let n = sys.num_vars();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let f = curve_system(sys, rng.gen())?;
    let mut timings = Timings::default();

    let clock = Instant::now();
    let d = robust_numeric_degree(&f, &config.tracker, config.degree_attempts, &mut rng)?;
    timings.stages.push(("numeric_degree".into(), clock.elapsed()));

    let slicer = SlicerConfig {
        log_c1: config.log_c1,
        log_c2: config.log_c2,
        tracker: config.slice_tracker,
        snap: config.snap,
    };
    let mut directions: Vec<IntVector> = match &config.initial_directions {
        Some(list) => list.iter().map(|v| IntVector::from_i64s(v)).collect(),
        None => default_directions(n),
    };
    let per_round = match config.random_directions_per_round {
        0 => 2 * (n + 1),
        k => k,
    };
    let max_entry = i64::try_from(d).unwrap_or(i64::MAX).max(1);

    let mut curve = TropicalCurve::empty(n);
    let mut tested: Vec<IntVector> = Vec::new();
    let mut rejected: Vec<Rejection> = Vec::new();
    let mut rounds_used = 0;
    let mut defect = completeness_defect(&curve, d);
    for round in 1..=config.max_rounds {
        rounds_used = round;
        let clock = Instant::now();
        let cands = candidate_rays(&f, &directions, max_entry, &slicer, rng.gen())?;
        timings.stages.push((format!("round {round} slicing"), clock.elapsed()));
        for r in cands.rejected {
            rejected.push(Rejection {
                direction: None,
                log_difference: Some(r.log_difference),
                reason: r.reason.to_string(),
            });
        }
        let fresh: Vec<(IntVector, u64)> = cands
            .candidates
            .into_iter()
            .filter(|c| !tested.contains(&c.direction))
            .map(|c| (c.direction, rng.gen()))
            .collect();

        let clock = Instant::now();
        let results: Vec<Result<MultiplicityResult>> = fresh
            .par_iter()
            .map(|(omega, s)| robust_multiplicity(&f, omega, &config.multiplicity, config.multiplicity_attempts, *s))
            .collect();
        timings.stages.push((format!("round {round} multiplicities"), clock.elapsed()));

        for ((omega, _), res) in fresh.into_iter().zip(results) {
            match res {
                Ok(m) if m.multiplicity > 0 => {
                    tested.push(omega.clone());
                    curve.insert(Ray::new(omega, m.multiplicity as u64)?.with_witnesses(m.witnesses))?;
                }
                Ok(_) => {
                    tested.push(omega.clone());
                    rejected.push(Rejection {
                        direction: Some(omega),
                        log_difference: None,
                        reason: "multiplicity 0".into(),
                    });
                }
                // left untested so a later round can retry it
                Err(e @ Error::Indeterminate(_)) => rejected.push(Rejection {
                    direction: Some(omega),
                    log_difference: None,
                    reason: e.to_string(),
                }),
                Err(e) => return Err(e),
            }
        }
        defect = completeness_defect(&curve, d);
        if defect.is_zero() {
            break;
        }
        directions = random_directions(n, per_round, &mut rng);
    }

    let curve = curve.sorted();
    let (balanced, _) = check_balancing(&curve);
    let trop = if balanced { tropical_degree(&curve).ok() } else { None };
    Ok(RunReport {
        n,
        rays: curve.rays().to_vec(),
        numeric_degree: d,
        tropical_degree: trop,
        balanced,
        complete: defect.is_zero(),
        defect,
        rounds_used,
        rejected,
        config: config.clone(),
        seed: config.seed,
        timings,
    })
}
