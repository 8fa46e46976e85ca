//! Sparse Laurent polynomials with complex coefficients.
//!
//! Terms are kept in a `BTreeMap` keyed by exponent vectors under the graded
//! lexicographic order, so every summation (evaluation, Jacobians, formatting)
//! visits terms in the same order and runs are bit-reproducible.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

mod parse;

pub use parse::parse_system;

/// Integer exponent vector; entries may be negative.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExponentVector(Vec<i64>);

impl ExponentVector {
    pub fn new(entries: Vec<i64>) -> Self {
        ExponentVector(entries)
    }

    pub fn zero(len: usize) -> Self {
        ExponentVector(vec![0; len])
    }

    pub fn unit(len: usize, index: usize) -> Self {
        let mut e = vec![0; len];
        e[index] = 1;
        ExponentVector(e)
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_degree(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &ExponentVector) -> ExponentVector {
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &ExponentVector) -> ExponentVector {
        ExponentVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scaled(&self, k: i64) -> ExponentVector {
        ExponentVector(self.0.iter().map(|a| a * k).collect())
    }
}

impl std::ops::Index<usize> for ExponentVector {
    type Output = i64;
    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

/// Graded lexicographic order.
impl Ord for ExponentVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for ExponentVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A point of `(C*)^n`. Entries are always finite.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexPoint(Vec<Complex64>);

impl ComplexPoint {
    /// Panics if any coordinate is not finite.
    pub fn new(coords: Vec<Complex64>) -> Self {
        assert!(
            coords.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            "complex point with non-finite coordinate"
        );
        ComplexPoint(coords)
    }

    pub fn from_real(coords: &[f64]) -> Self {
        ComplexPoint::new(coords.iter().map(|&r| Complex64::new(r, 0.0)).collect())
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    /// Coordinate-wise `log|z|`.
    pub fn log_abs(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.norm().ln()).collect()
    }

    /// Largest coordinate-wise distance relative to the coordinate moduli.
    pub fn relative_distance(&self, other: &ComplexPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm() / a.norm().max(b.norm()).max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for ComplexPoint {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaurentPolynomial {
    terms: BTreeMap<ExponentVector, Complex64>,
    num_vars: usize,
    t_index: Option<usize>,
}

impl LaurentPolynomial {
    pub fn zero(num_vars: usize) -> Self {
        LaurentPolynomial {
            terms: BTreeMap::new(),
            num_vars,
            t_index: None,
        }
    }

    pub fn constant(num_vars: usize, c: Complex64) -> Self {
        Self::monomial(ExponentVector::zero(num_vars), c)
    }

    pub fn variable(num_vars: usize, index: usize) -> Self {
        Self::monomial(ExponentVector::unit(num_vars, index), Complex64::new(1.0, 0.0))
    }

    pub fn monomial(exponent: ExponentVector, c: Complex64) -> Self {
        let num_vars = exponent.len();
        let mut p = Self::zero(num_vars);
        p.add_term(exponent, c);
        p
    }

    /// Collects like terms and drops zero coefficients.
    pub fn from_terms<I>(num_vars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (ExponentVector, Complex64)>,
    {
        let mut p = Self::zero(num_vars);
        for (e, c) in terms {
            p.add_term(e, c);
        }
        p
    }

    /// Marks `index` as the distinguished parameter `t`.
    pub fn with_parameter(mut self, index: usize) -> Self {
        assert!(index < self.num_vars, "parameter index out of range");
        self.t_index = Some(index);
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn t_index(&self) -> Option<usize> {
        self.t_index
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &ExponentVector) -> Complex64 {
        self.terms.get(e).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, e: ExponentVector, c: Complex64) {
        assert_eq!(e.len(), self.num_vars, "exponent length mismatch");
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        let entry = self.terms.entry(e);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let sum = *o.get() + c;
                if sum == Complex64::new(0.0, 0.0) {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &LaurentPolynomial) -> LaurentPolynomial {
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &LaurentPolynomial) -> LaurentPolynomial {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> LaurentPolynomial {
        let mut out = Self::zero(self.num_vars);
        out.t_index = self.t_index;
        for (e, a) in self.terms() {
            out.add_term(e.clone(), a * c);
        }
        out
    }

    pub fn mul(&self, other: &LaurentPolynomial) -> LaurentPolynomial {
        let mut out = Self::zero(self.num_vars);
        out.t_index = self.t_index.or(other.t_index);
        for (e1, c1) in self.terms() {
            for (e2, c2) in other.terms() {
                out.add_term(e1.add(e2), c1 * c2);
            }
        }
        out
    }

    pub fn mul_monomial(&self, shift: &ExponentVector) -> LaurentPolynomial {
        LaurentPolynomial {
            terms: self.terms.iter().map(|(e, c)| (e.add(shift), *c)).collect(),
            num_vars: self.num_vars,
            t_index: self.t_index,
        }
    }

    /// Integer power. Negative powers are only defined for monomials.
    pub fn pow(&self, k: i64) -> Option<LaurentPolynomial> {
        if k < 0 {
            if self.terms.len() != 1 {
                return None;
            }
            let (e, c) = self.terms.iter().next().unwrap();
            let c = c.powi(k as i32);
            return Some(LaurentPolynomial::monomial(e.scaled(k), c).with_t(self.t_index));
        }
        let mut acc = LaurentPolynomial::constant(self.num_vars, Complex64::new(1.0, 0.0))
            .with_t(self.t_index);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        Some(acc)
    }

    fn with_t(mut self, t: Option<usize>) -> Self {
        self.t_index = t;
        self
    }

    /// Componentwise minimum of all exponent vectors.
    pub fn min_exponents(&self) -> ExponentVector {
        let mut m = vec![i64::MAX; self.num_vars];
        for e in self.terms.keys() {
            for (mi, ei) in m.iter_mut().zip(e.entries()) {
                *mi = (*mi).min(*ei);
            }
        }
        if self.terms.is_empty() {
            m.iter_mut().for_each(|v| *v = 0);
        }
        ExponentVector(m)
    }

    /// Divides by the monomial of componentwise minimal exponents, so that every
    /// variable's smallest exponent becomes zero. On the torus this leaves the
    /// zero set unchanged.
    pub fn clear_denominators(&self) -> LaurentPolynomial {
        self.mul_monomial(&self.min_exponents().scaled(-1))
    }

    /// Largest total degree over the terms (after clearing this is the
    /// Bézout degree).
    pub fn total_degree(&self) -> i64 {
        self.terms
            .keys()
            .map(|e| e.total_degree())
            .max()
            .unwrap_or(0)
    }

    pub fn derivative(&self, var: usize) -> LaurentPolynomial {
        let mut out = Self::zero(self.num_vars).with_t(self.t_index);
        for (e, c) in self.terms() {
            let k = e[var];
            if k != 0 {
                let mut d = e.clone();
                d.0[var] -= 1;
                out.add_term(d, c * k as f64);
            }
        }
        out
    }

    pub fn evaluate(&self, p: &ComplexPoint) -> Result<Complex64> {
        if p.len() != self.num_vars {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars,
                found: p.len(),
            });
        }
        let mut sum = Complex64::new(0.0, 0.0);
        for (e, c) in self.terms() {
            let mut term = *c;
            for (j, &k) in e.entries().iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let z = p[j];
                if k < 0 && z == Complex64::new(0.0, 0.0) {
                    return Err(Error::Domain { index: j });
                }
                term *= z.powi(k as i32);
            }
            sum += term;
        }
        Ok(sum)
    }

    /// Variables that actually occur with a nonzero exponent.
    pub fn support_vars(&self) -> Vec<bool> {
        let mut used = vec![false; self.num_vars];
        for e in self.terms.keys() {
            for (u, &k) in used.iter_mut().zip(e.entries()) {
                *u |= k != 0;
            }
        }
        used
    }

    /// Removes variable `index` by setting it to 1.
    pub fn drop_variable(&self, index: usize) -> LaurentPolynomial {
        let mut out = Self::zero(self.num_vars - 1);
        out.t_index = match self.t_index {
            Some(t) if t == index => None,
            Some(t) if t > index => Some(t - 1),
            other => other,
        };
        for (e, c) in self.terms() {
            let mut v = e.0.clone();
            v.remove(index);
            out.add_term(ExponentVector(v), *c);
        }
        out
    }

    /// Appends a fresh variable (with exponent 0 everywhere) at the end.
    pub fn extend_variables(&self, extra: usize) -> LaurentPolynomial {
        let mut out = Self::zero(self.num_vars + extra).with_t(self.t_index);
        for (e, c) in self.terms() {
            let mut v = e.0.clone();
            v.extend(std::iter::repeat(0).take(extra));
            out.add_term(ExponentVector(v), *c);
        }
        out
    }

    pub fn fmt_with_names(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (e, c)) in self.terms().enumerate() {
            let mono: Vec<String> = e
                .entries()
                .iter()
                .enumerate()
                .filter(|(_, &k)| k != 0)
                .map(|(j, &k)| {
                    if k == 1 {
                        names[j].clone()
                    } else {
                        format!("{}^{}", names[j], k)
                    }
                })
                .collect();
            let (negative, coeff) = if c.im == 0.0 {
                if c.re < 0.0 {
                    (true, format_real(-c.re))
                } else {
                    (false, format_real(c.re))
                }
            } else {
                let sign = if c.im < 0.0 { '-' } else { '+' };
                (false, format!("({}{}{}i)", format_real(c.re), sign, format_real(c.im.abs())))
            };
            if idx == 0 {
                if negative {
                    out.push('-');
                }
            } else {
                out.push_str(if negative { " - " } else { " + " });
            }
            if mono.is_empty() {
                out.push_str(&coeff);
            } else {
                if coeff != "1" {
                    out.push_str(&coeff);
                    out.push('*');
                }
                out.push_str(&mono.join("*"));
            }
        }
        out
    }
}

fn format_real(r: f64) -> String {
    // Display for f64 is the shortest representation that round-trips.
    format!("{}", r)
}

/// Evaluates `t^{-ω·e}`-weighted degree of a term: `ω·x_part - t_exponent`.
fn weighted_degree(e: &ExponentVector, t_index: usize, omega: &[i64]) -> i64 {
    let mut deg = -e[t_index];
    let mut w = omega.iter();
    for (j, &k) in e.entries().iter().enumerate() {
        if j == t_index {
            continue;
        }
        deg += k * w.next().copied().unwrap_or(0);
    }
    deg
}

/// Terms of maximal weighted degree (deg t = -1, deg x_i = ω_i), with `t`
/// then set to 1. The result lives in the ring without `t`.
pub fn t_initial_form(f: &LaurentPolynomial, omega: &[i64]) -> Result<LaurentPolynomial> {
    let t = match f.t_index() {
        Some(t) => t,
        None => {
            let g = f.extend_variables(1).with_parameter(f.num_vars());
            return t_initial_form(&g, omega);
        }
    };
    if omega.len() + 1 != f.num_vars() {
        return Err(Error::DimensionMismatch {
            expected: f.num_vars() - 1,
            found: omega.len(),
        });
    }
    let max = f.terms().map(|(e, _)| weighted_degree(e, t, omega)).max();
    let mut out = LaurentPolynomial::zero(f.num_vars());
    if let Some(max) = max {
        for (e, c) in f.terms() {
            if weighted_degree(e, t, omega) == max {
                out.add_term(e.clone(), *c);
            }
        }
    }
    Ok(out.with_parameter(t).drop_variable(t))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialSystem {
    polynomials: Vec<LaurentPolynomial>,
    var_names: Vec<String>,
    t_index: Option<usize>,
}

impl PolynomialSystem {
    /// Uses names `x1, ..., xn` (and `t` for the parameter slot, if any).
    pub fn new(polynomials: Vec<LaurentPolynomial>) -> Result<Self> {
        let first = polynomials.first().ok_or(Error::EmptySystem)?;
        let n = first.num_vars();
        let t = first.t_index();
        let names = (0..n)
            .map(|j| {
                if Some(j) == t {
                    "t".to_string()
                } else {
                    format!("x{}", j + 1)
                }
            })
            .collect();
        Self::with_names(polynomials, names)
    }

    pub fn with_names(polynomials: Vec<LaurentPolynomial>, var_names: Vec<String>) -> Result<Self> {
        let first = polynomials.first().ok_or(Error::EmptySystem)?;
        let n = first.num_vars();
        let t = first.t_index();
        for p in &polynomials {
            if p.num_vars() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.num_vars(),
                });
            }
            if p.t_index() != t {
                return Err(Error::InvalidArgument(
                    "inconsistent parameter index across polynomials".into(),
                ));
            }
        }
        if var_names.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: var_names.len(),
            });
        }
        Ok(PolynomialSystem {
            polynomials,
            var_names,
            t_index: t,
        })
    }

    pub fn polynomials(&self) -> &[LaurentPolynomial] {
        &self.polynomials
    }

    pub fn len(&self) -> usize {
        self.polynomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polynomials.is_empty()
    }

    /// Number of ring variables, including `t` if present.
    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn t_index(&self) -> Option<usize> {
        self.t_index
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn evaluate(&self, p: &ComplexPoint) -> Result<Vec<Complex64>> {
        self.polynomials.iter().map(|f| f.evaluate(p)).collect()
    }

    /// Row `i`, column `j` holds `∂F_i/∂x_j` at `p`.
    pub fn jacobian(&self, p: &ComplexPoint) -> Result<Vec<Vec<Complex64>>> {
        self.polynomials
            .iter()
            .map(|f| (0..self.num_vars()).map(|j| f.derivative(j).evaluate(p)).collect())
            .collect()
    }

    pub fn clear_denominators(&self) -> PolynomialSystem {
        PolynomialSystem {
            polynomials: self.polynomials.iter().map(|f| f.clear_denominators()).collect(),
            var_names: self.var_names.clone(),
            t_index: self.t_index,
        }
    }

    pub fn push(&mut self, f: LaurentPolynomial) -> Result<()> {
        if f.num_vars() != self.num_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.num_vars(),
                found: f.num_vars(),
            });
        }
        self.polynomials.push(f.with_t(self.t_index));
        Ok(())
    }

    /// Replaces the system by `target_count` random linear combinations of its
    /// members with unit-modulus coefficients.
    pub fn square_up(&self, target_count: usize, seed: u64) -> Result<PolynomialSystem> {
        if self.len() < target_count {
            return Err(Error::TooFewPolynomials {
                needed: target_count,
                available: self.len(),
            });
        }
        if self.len() == target_count {
            return Ok(self.clone());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let polynomials = (0..target_count)
            .map(|_| {
                self.polynomials.iter().fold(
                    LaurentPolynomial::zero(self.num_vars()).with_t(self.t_index),
                    |acc, g| acc.add(&g.scale(random_unit(&mut rng))),
                )
            })
            .collect();
        Ok(PolynomialSystem {
            polynomials,
            var_names: self.var_names.clone(),
            t_index: self.t_index,
        })
    }

    /// Substitutes `x_i -> t^{-ω_i} x_i` and multiplies each polynomial by the
    /// smallest power of `t` that leaves no negative `t`-exponent. The new
    /// parameter `t` is appended as the last variable.
    pub fn substitute_weight(&self, omega: &[i64]) -> Result<PolynomialSystem> {
        if self.t_index.is_some() {
            return Err(Error::InvalidArgument("system already has a parameter".into()));
        }
        let n = self.num_vars();
        if omega.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: omega.len(),
            });
        }
        let polynomials = self
            .polynomials
            .iter()
            .map(|f| {
                let raw = LaurentPolynomial::from_terms(
                    n + 1,
                    f.terms().map(|(e, c)| {
                        let mut v = e.entries().to_vec();
                        let dot: i64 = v.iter().zip(omega).map(|(a, w)| a * w).sum();
                        v.push(-dot);
                        (ExponentVector(v), *c)
                    }),
                );
                let tmin = raw.min_exponents()[n];
                let mut shift = ExponentVector::zero(n + 1);
                shift.0[n] = -tmin;
                raw.mul_monomial(&shift).with_parameter(n)
            })
            .collect();
        let mut names = self.var_names.clone();
        names.push(fresh_parameter_name(&names));
        Ok(PolynomialSystem {
            polynomials,
            var_names: names,
            t_index: Some(n),
        })
    }

    /// Sets the parameter to a fixed complex value, returning a `t`-free system.
    pub fn specialize_parameter(&self, value: Complex64) -> Result<PolynomialSystem> {
        let t = self
            .t_index
            .ok_or_else(|| Error::InvalidArgument("system has no parameter".into()))?;
        let polynomials = self
            .polynomials
            .iter()
            .map(|f| {
                let mut out = LaurentPolynomial::zero(f.num_vars() - 1);
                for (e, c) in f.terms() {
                    let k = e[t];
                    let mut v = e.entries().to_vec();
                    v.remove(t);
                    out.add_term(ExponentVector(v), c * value.powi(k as i32));
                }
                out
            })
            .collect();
        let mut names = self.var_names.clone();
        names.remove(t);
        PolynomialSystem::with_names(polynomials, names)
    }
}

impl fmt::Display for PolynomialSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ring {}", self.var_names.join(" "))?;
        for p in &self.polynomials {
            writeln!(f, "{}", p.fmt_with_names(&self.var_names))?;
        }
        Ok(())
    }
}

fn fresh_parameter_name(names: &[String]) -> String {
    let mut name = "t".to_string();
    while names.contains(&name) {
        name.push('_');
    }
    name
}

pub(crate) fn random_unit<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}
