//! Exact integer linear algebra: primitive vectors, LLL reduction, snapping
//! floating-point directions to short integer vectors, and complements `v`
//! with `ω·v = -1`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVector(Vec<BigInt>);

impl IntVector {
    pub fn new(entries: Vec<BigInt>) -> Self {
        IntVector(entries)
    }

    pub fn from_i64s(entries: &[i64]) -> Self {
        IntVector(entries.iter().map(|&e| BigInt::from(e)).collect())
    }

    pub fn zero(len: usize) -> Self {
        IntVector(vec![BigInt::zero(); len])
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn to_i64s(&self) -> Result<Vec<i64>> {
        self.0
            .iter()
            .map(|e| e.to_i64().ok_or_else(|| Error::Overflow(e.to_string())))
            .collect()
    }

    pub fn to_f64s(&self) -> Vec<f64> {
        self.0.iter().map(|e| e.to_f64().unwrap_or(f64::NAN)).collect()
    }

    pub fn dot(&self, other: &IntVector) -> BigInt {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn add(&self, other: &IntVector) -> IntVector {
        IntVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &IntVector) -> IntVector {
        IntVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn scaled(&self, k: &BigInt) -> IntVector {
        IntVector(self.0.iter().map(|a| a * k).collect())
    }

    pub fn neg(&self) -> IntVector {
        IntVector(self.0.iter().map(|a| -a).collect())
    }

    pub fn max_abs(&self) -> BigInt {
        self.0.iter().map(|a| a.abs()).max().unwrap_or_default()
    }
}

impl std::ops::Index<usize> for IntVector {
    type Output = BigInt;
    fn index(&self, i: usize) -> &BigInt {
        &self.0[i]
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for IntVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v = self.to_i64s().map_err(serde::ser::Error::custom)?;
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<i64>::deserialize(d)?;
        Ok(IntVector::from_i64s(&v))
    }
}

/// Dense integer matrix stored by rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: Vec<IntVector>,
    cols: usize,
}

impl IntMatrix {
    pub fn from_rows(rows: Vec<IntVector>) -> Result<Self> {
        let cols = rows.first().map(IntVector::len).unwrap_or(0);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Ok(IntMatrix { rows, cols })
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::from_rows(rows.iter().map(|r| IntVector::from_i64s(r)).collect())
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let mut v = vec![BigInt::zero(); n];
                v[i] = BigInt::one();
                IntVector(v)
            })
            .collect();
        IntMatrix { rows, cols: n }
    }

    pub fn rows(&self) -> &[IntVector] {
        &self.rows
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols
    }

    pub fn mul_vector(&self, v: &IntVector) -> Result<IntVector> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok(IntVector(self.rows.iter().map(|r| r.dot(v)).collect()))
    }
}

/// gcd of the absolute values of the entries.
pub fn content(v: &IntVector) -> Result<BigInt> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(v.0.iter().fold(BigInt::zero(), |g, e| g.gcd(e)))
}

/// Divides out the content, keeping the sign pattern.
pub fn primitive(v: &IntVector) -> Result<IntVector> {
    let g = content(v)?;
    Ok(IntVector(v.0.iter().map(|e| e / &g).collect()))
}

/// Returns a `δ`-LLL-reduced basis of the lattice spanned by the rows of `basis`.
pub fn lll_reduce(basis: &IntMatrix, delta: Rational64) -> Result<IntMatrix> {
    Ok(lll_with_transform(basis, delta)?.0)
}

/// LLL reduction that also returns the unimodular `U` with `U · basis = reduced`.
///
/// Integral variant working only with the Gram determinants `d_i` and the
/// scaled coefficients `λ_{i,j} = d_j μ_{i,j}`, so no rationals are formed.
pub fn lll_with_transform(basis: &IntMatrix, delta: Rational64) -> Result<(IntMatrix, IntMatrix)> {
    let quarter = Rational64::new(1, 4);
    if delta <= quarter || delta > Rational64::one() {
        return Err(Error::InvalidArgument(format!("LLL parameter {delta} outside (1/4, 1]")));
    }
    let p = BigInt::from(*delta.numer());
    let q = BigInt::from(*delta.denom());
    let n = basis.num_rows();
    let mut b: Vec<IntVector> = basis.rows.clone();
    let mut h: Vec<IntVector> = IntMatrix::identity(n).rows;
    if n == 0 {
        return Ok((basis.clone(), IntMatrix::identity(0)));
    }
    // d[0] = 1, d[i] for i >= 1 is the Gram determinant of the first i rows.
    let mut d = vec![BigInt::zero(); n + 1];
    d[0] = BigInt::one();
    let mut lam = vec![vec![BigInt::zero(); n]; n];
    d[1] = b[0].dot(&b[0]);
    if d[1].is_zero() {
        return Err(Error::DependentRows);
    }
    // 0-based row index k, 1-based determinants.
    let mut k = 1usize;
    let mut k_max = 0usize;

    fn red(k: usize, l: usize, b: &mut [IntVector], h: &mut [IntVector], d: &[BigInt], lam: &mut [Vec<BigInt>]) {
        let dl = &d[l + 1];
        if (&lam[k][l] * 2u32).abs() > *dl {
            let two_dl: BigInt = dl * 2u32;
            let qk = (&lam[k][l] * 2u32 + dl).div_floor(&two_dl);
            b[k] = b[k].sub(&b[l].scaled(&qk));
            h[k] = h[k].sub(&h[l].scaled(&qk));
            lam[k][l] -= &qk * dl;
            for i in 0..l {
                let t = &qk * &lam[l][i];
                lam[k][i] -= t;
            }
        }
    }

    while k < n {
        if k > k_max {
            k_max = k;
            for j in 0..=k {
                let mut u = b[k].dot(&b[j]);
                for i in 0..j {
                    u = (&d[i + 1] * &u - &lam[k][i] * &lam[j][i]) / &d[i];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    if u.is_zero() {
                        return Err(Error::DependentRows);
                    }
                    d[k + 1] = u;
                }
            }
        }
        red(k, k - 1, &mut b, &mut h, &d, &mut lam);
        let lhs = &q * &d[k + 1] * &d[k - 1];
        let rhs = &p * &d[k] * &d[k] - &q * &lam[k][k - 1] * &lam[k][k - 1];
        if lhs < rhs {
            // swap rows k-1 and k
            b.swap(k, k - 1);
            h.swap(k, k - 1);
            for j in 0..k.saturating_sub(1) {
                let tmp = lam[k][j].clone();
                lam[k][j] = lam[k - 1][j].clone();
                lam[k - 1][j] = tmp;
            }
            let l = lam[k][k - 1].clone();
            let bb = (&d[k - 1] * &d[k + 1] + &l * &l) / &d[k];
            for i in (k + 1)..=k_max {
                let t = lam[i][k].clone();
                lam[i][k] = (&d[k + 1] * &lam[i][k - 1] - &l * &t) / &d[k];
                lam[i][k - 1] = (&bb * &t + &l * &lam[i][k]) / &d[k + 1];
            }
            d[k] = bb;
            if k > 1 {
                k -= 1;
            }
        } else {
            for l in (0..k.saturating_sub(1)).rev() {
                red(k, l, &mut b, &mut h, &d, &mut lam);
            }
            k += 1;
        }
    }
    Ok((
        IntMatrix { rows: b, cols: basis.cols },
        IntMatrix { rows: h, cols: n },
    ))
}

/// Row-reduces `[ω | I]` by the Euclidean algorithm. Returns `(u, kernel)`
/// where `ω·u = gcd(ω)` and the kernel rows form a basis of `ω^⊥ ∩ Z^n`.
fn gcd_transform(omega: &IntVector) -> (BigInt, IntVector, Vec<IntVector>) {
    let n = omega.len();
    let mut lead: Vec<BigInt> = omega.0.clone();
    let mut rows = IntMatrix::identity(n).rows;
    loop {
        let pivot = (0..n)
            .filter(|&i| !lead[i].is_zero())
            .min_by(|&a, &b| lead[a].abs().cmp(&lead[b].abs()).then(a.cmp(&b)));
        let Some(pivot) = pivot else { break };
        let mut changed = false;
        for i in 0..n {
            if i == pivot || lead[i].is_zero() {
                continue;
            }
            let qk = lead[i].div_floor(&lead[pivot]);
            let p = lead[pivot].clone();
            lead[i] -= &qk * &p;
            rows[i] = rows[i].sub(&rows[pivot].scaled(&qk));
            changed = true;
        }
        if !changed {
            break;
        }
    }
    let pivot = (0..n).find(|&i| !lead[i].is_zero()).expect("nonzero input");
    let (mut g, mut u) = (lead[pivot].clone(), rows[pivot].clone());
    if g.is_negative() {
        g = -g;
        u = u.neg();
    }
    let kernel = (0..n).filter(|&i| i != pivot).map(|i| rows[i].clone()).collect();
    (g, u, kernel)
}

/// LLL-reduced basis of the integer vectors orthogonal to `ω`.
pub fn kernel_basis(omega: &IntVector) -> Result<Vec<IntVector>> {
    if omega.is_zero() {
        return Err(Error::ZeroVector);
    }
    let (_, _, kernel) = gcd_transform(omega);
    if kernel.is_empty() {
        return Ok(kernel);
    }
    Ok(lll_reduce(&IntMatrix::from_rows(kernel)?, Rational64::new(99, 100))?.rows)
}

/// Some `v` with `ω·v = -1`, shortened against the kernel lattice of `ω`.
pub fn complement_vector(omega: &IntVector) -> Result<IntVector> {
    if omega.is_zero() {
        return Err(Error::ZeroVector);
    }
    let (g, u, _) = gcd_transform(omega);
    if !g.is_one() {
        return Err(Error::NotPrimitive { content: g.to_string() });
    }
    let mut v = u.neg();
    let kernel = kernel_basis(omega)?;
    if !kernel.is_empty() {
        v = babai_reduce(&v, &kernel);
    }
    if omega.dot(&v) != BigInt::from(-1) {
        return Err(Error::Inconsistent("complement vector check failed".into()));
    }
    Ok(v)
}

/// Nearest-plane reduction of `v` against a (reduced) basis, in floating
/// point. Only integer multiples of basis rows are subtracted, so `v` stays in
/// its coset exactly.
fn babai_reduce(v: &IntVector, basis: &[IntVector]) -> IntVector {
    let fb: Vec<Vec<f64>> = basis.iter().map(IntVector::to_f64s).collect();
    let m = fb.len();
    let mut gs: Vec<Vec<f64>> = Vec::with_capacity(m);
    for i in 0..m {
        let mut bi = fb[i].clone();
        for g in &gs {
            let mu = dotf(&fb[i], g) / dotf(g, g);
            bi.iter_mut().zip(g).for_each(|(a, b)| *a -= mu * b);
        }
        gs.push(bi);
    }
    let mut out = v.clone();
    for i in (0..m).rev() {
        let cur = out.to_f64s();
        let c = (dotf(&cur, &gs[i]) / dotf(&gs[i], &gs[i])).round();
        if c != 0.0 && c.is_finite() {
            out = out.sub(&basis[i].scaled(&BigInt::from(c as i64)));
        }
    }
    out
}

fn dotf(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    dotf(a, b) / (dotf(a, a).sqrt() * dotf(b, b).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapOptions {
    pub scale: i64,
    pub max_entry: i64,
    pub min_cosine: f64,
}

impl Default for SnapOptions {
    fn default() -> Self {
        SnapOptions {
            scale: 10_000,
            max_entry: 10,
            min_cosine: 0.9999,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SnapReject {
    ZeroInput,
    NoCandidate,
    EntryTooLarge { best: IntVector },
    LowCosine { best: IntVector, cosine: f64 },
}

impl fmt::Display for SnapReject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SnapReject::ZeroInput => write!(f, "zero or non-finite input"),
            SnapReject::NoCandidate => write!(f, "no admissible short vector"),
            SnapReject::EntryTooLarge { best } => write!(f, "entries of {best} exceed bound"),
            SnapReject::LowCosine { best, cosine } => {
                write!(f, "best candidate {best} has cosine {cosine:.8}")
            }
        }
    }
}

/// Finds a short primitive integer vector pointing along `u`.
///
/// `u` is scaled so its largest entry becomes `opts.scale` and rounded to an
/// integer vector `x`. With `k` the index of the largest `|x_k|`, the columns
/// `x_i e_k - x_k e_i` span a lattice orthogonal to `x`; LLL applied to the
/// rows of `[M | I]` exposes integer combinations `c` for which `c·M` is
/// small, i.e. `c` nearly parallel to `x`. The best admissible row wins.
///
/// If the best row at `opts.scale` is too long, coarser roundings (scale
/// divided by 10, down to 10) are tried under the same cosine test.
pub fn snap_direction(u: &[f64], opts: &SnapOptions) -> std::result::Result<IntVector, SnapReject> {
    let first = snap_at_scale(u, opts.scale, opts);
    let mut scale = opts.scale / 10;
    let mut last = first.clone();
    while matches!(last, Err(SnapReject::EntryTooLarge { .. })) && scale >= 10 {
        last = snap_at_scale(u, scale, opts);
        scale /= 10;
    }
    if last.is_ok() {
        last
    } else {
        first
    }
}

fn snap_at_scale(u: &[f64], scale: i64, opts: &SnapOptions) -> std::result::Result<IntVector, SnapReject> {
    let n = u.len();
    let m = u.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if n == 0 || m == 0.0 || !m.is_finite() {
        return Err(SnapReject::ZeroInput);
    }
    let x: Vec<BigInt> = u
        .iter()
        .map(|&ui| BigInt::from((ui / m * scale as f64).round() as i64))
        .collect();
    let k = (0..n).max_by_key(|&i| (x[i].abs(), std::cmp::Reverse(i))).unwrap();
    let mut rows = Vec::with_capacity(n);
    for j in 0..n {
        let mut row = Vec::with_capacity(2 * n - 1);
        for i in (0..n).filter(|&i| i != k) {
            let e = if j == k {
                x[i].clone()
            } else if j == i {
                -x[k].clone()
            } else {
                BigInt::zero()
            };
            row.push(e);
        }
        for i in 0..n {
            row.push(if i == j { BigInt::one() } else { BigInt::zero() });
        }
        rows.push(IntVector(row));
    }
    let reduced = match IntMatrix::from_rows(rows).and_then(|mm| lll_reduce(&mm, Rational64::new(99, 100))) {
        Ok(r) => r,
        Err(_) => return Err(SnapReject::NoCandidate),
    };
    let max_entry = BigInt::from(opts.max_entry);
    let mut best_any: Option<(f64, IntVector)> = None;
    let mut best_ok: Option<(f64, IntVector)> = None;
    for row in reduced.rows() {
        let c = IntVector(row.0[n - 1..].to_vec());
        if c.is_zero() {
            continue;
        }
        let mut c = primitive(&c).expect("nonzero");
        let cf = c.to_f64s();
        let mut cos = cosine(&cf, u);
        if cos < 0.0 {
            c = c.neg();
            cos = -cos;
        }
        if !cos.is_finite() || cos == 0.0 {
            continue;
        }
        if best_any.as_ref().is_none_or(|(b, _)| cos > *b) {
            best_any = Some((cos, c.clone()));
        }
        if c.max_abs() <= max_entry && best_ok.as_ref().is_none_or(|(b, _)| cos > *b) {
            best_ok = Some((cos, c));
        }
    }
    match (best_ok, best_any) {
        (Some((cos, c)), _) if cos >= opts.min_cosine => Ok(c),
        (Some((cos, c)), _) => Err(SnapReject::LowCosine { best: c, cosine: cos }),
        (None, Some((_, c))) => Err(SnapReject::EntryTooLarge { best: c }),
        (None, None) => Err(SnapReject::NoCandidate),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn iv(v: &[i64]) -> IntVector {
        IntVector::from_i64s(v)
    }

    #[test]
    fn primitive_examples() {
        assert_eq!(primitive(&iv(&[4, 6])).unwrap(), iv(&[2, 3]));
        let knot = iv(&[0, -2, 0, 0, 0, -4, 0, -2, -7, -1]);
        assert_eq!(primitive(&knot).unwrap(), knot);
        assert_eq!(primitive(&iv(&[-3, 0, 0])).unwrap(), iv(&[-1, 0, 0]));
        assert_eq!(primitive(&iv(&[0, 0])), Err(Error::ZeroVector));
    }

    #[test]
    fn content_examples() {
        assert_eq!(content(&iv(&[4, 6])).unwrap(), BigInt::from(2));
        assert_eq!(content(&iv(&[0, -5])).unwrap(), BigInt::from(5));
        let a = IntMatrix::from_i64_rows(&[vec![1, 1], vec![0, 1]]).unwrap();
        let image = a.mul_vector(&iv(&[2, 3])).unwrap();
        assert_eq!(image, iv(&[5, 3]));
        assert_eq!(content(&image).unwrap(), BigInt::one());
        assert_eq!(content(&iv(&[0])), Err(Error::ZeroVector));
    }

    #[test]
    fn complement_examples() {
        for w in [[2, 3], [0, 1], [3, 5], [-4, 7], [1, 0]] {
            let omega = iv(&w);
            let v = complement_vector(&omega).unwrap();
            assert_eq!(omega.dot(&v), BigInt::from(-1), "omega {omega} v {v}");
        }
        assert_eq!(complement_vector(&iv(&[0, 1])).unwrap(), iv(&[0, -1]));
        let v = complement_vector(&iv(&[2, 3])).unwrap();
        assert!(v.max_abs() <= BigInt::from(2), "{v}");
        assert!(matches!(complement_vector(&iv(&[2, 4])), Err(Error::NotPrimitive { .. })));
        assert_eq!(complement_vector(&iv(&[0, 0])), Err(Error::ZeroVector));
    }

    #[test]
    fn kernel_basis_is_orthogonal_and_unimodular() {
        let omega = iv(&[2, -2, -1, 0, 0, 2, 0, 0, -1, -1]);
        let k = kernel_basis(&omega).unwrap();
        assert_eq!(k.len(), 9);
        for r in &k {
            assert!(omega.dot(r).is_zero());
        }
    }

    #[test]
    fn lll_identity_is_fixed() {
        let id = IntMatrix::identity(4);
        assert_eq!(lll_reduce(&id, Rational64::new(99, 100)).unwrap(), id);
    }

    #[test]
    fn lll_rejects_dependent_rows() {
        let m = IntMatrix::from_i64_rows(&[vec![1, 2, 3], vec![2, 4, 6]]).unwrap();
        assert_eq!(lll_reduce(&m, Rational64::new(99, 100)), Err(Error::DependentRows));
        let bad = IntMatrix::from_i64_rows(&[vec![1, 0], vec![0, 1]]).unwrap();
        assert!(lll_reduce(&bad, Rational64::new(1, 4)).is_err());
    }

    /// Exhaustive shortest vector over coefficient combinations in [-r, r]^k.
    fn brute_force_shortest(rows: &[Vec<i64>], r: i64) -> i64 {
        let k = rows.len();
        let mut best = i64::MAX;
        let mut coeffs = vec![-r; k];
        loop {
            if coeffs.iter().any(|&c| c != 0) {
                let v: Vec<i64> = (0..rows[0].len())
                    .map(|j| (0..k).map(|i| coeffs[i] * rows[i][j]).sum())
                    .collect();
                best = best.min(v.iter().map(|x| x * x).sum());
            }
            let mut i = 0;
            while i < k {
                coeffs[i] += 1;
                if coeffs[i] <= r {
                    break;
                }
                coeffs[i] = -r;
                i += 1;
            }
            if i == k {
                return best;
            }
        }
    }

    #[test]
    fn lll_first_vector_within_bound_of_shortest() {
        let cases: Vec<Vec<Vec<i64>>> = vec![
            vec![vec![1, 0], vec![10, 1]],
            vec![vec![1, 1, 1], vec![-1, 0, 2], vec![3, 5, 6]],
            vec![vec![201, 37], vec![1648, 297]],
            vec![vec![5, 17, 3], vec![9, 31, 6], vec![2, 7, 1]],
        ];
        for rows in cases {
            let m = IntMatrix::from_i64_rows(&rows).unwrap();
            let red = lll_reduce(&m, Rational64::new(99, 100)).unwrap();
            let first: i64 = red.rows()[0].to_i64s().unwrap().iter().map(|x| x * x).sum();
            let shortest = brute_force_shortest(&rows, 12);
            let k = rows.len() as i32;
            // |b1|^2 <= 2^(k-1) λ1^2 for δ ≥ 3/4
            assert!(first as f64 <= 2f64.powi(k - 1) * shortest as f64, "{rows:?}");
        }
    }

    fn det_i128(m: &[Vec<i128>]) -> i128 {
        // Bareiss fraction-free elimination
        let n = m.len();
        let mut a = m.to_vec();
        let mut sign = 1;
        let mut prev = 1i128;
        for k in 0..n {
            if a[k][k] == 0 {
                let Some(p) = (k + 1..n).find(|&i| a[i][k] != 0) else { return 0 };
                a.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        sign * a[n - 1][n - 1]
    }

    proptest! {
        #[test]
        fn lll_is_unimodular_and_size_reduced(entries in proptest::collection::vec(-50i64..50, 9)) {
            let rows: Vec<Vec<i64>> = entries.chunks(3).map(|c| c.to_vec()).collect();
            let m = IntMatrix::from_i64_rows(&rows).unwrap();
            let det = det_i128(&rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect::<Vec<_>>());
            prop_assume!(det != 0);
            let (red, u) = lll_with_transform(&m, Rational64::new(99, 100)).unwrap();
            // U · B = reduced
            for (ui, ri) in u.rows().iter().zip(red.rows()) {
                let comb: Vec<BigInt> = (0..3).map(|j| (0..3).map(|i| &ui[i] * &m.rows()[i][j]).sum()).collect();
                prop_assert_eq!(&IntVector::new(comb), ri);
            }
            let ud: Vec<Vec<i128>> = u.rows().iter().map(|r| r.to_i64s().unwrap().iter().map(|&x| x as i128).collect()).collect();
            prop_assert_eq!(det_i128(&ud).abs(), 1);
            // size reduction and Lovász condition in floating point
            let b: Vec<Vec<f64>> = red.rows().iter().map(IntVector::to_f64s).collect();
            let mut gs: Vec<Vec<f64>> = vec![];
            let mut mu = vec![vec![0.0; 3]; 3];
            for i in 0..3 {
                let mut bi = b[i].clone();
                for j in 0..i {
                    mu[i][j] = dotf(&b[i], &gs[j]) / dotf(&gs[j], &gs[j]);
                    for c in 0..3 { bi[c] -= mu[i][j] * gs[j][c]; }
                }
                gs.push(bi);
            }
            for i in 1..3 {
                for j in 0..i { prop_assert!(mu[i][j].abs() <= 0.5 + 1e-9); }
                let lhs = dotf(&gs[i], &gs[i]);
                let rhs = (0.99 - mu[i][i - 1].powi(2)) * dotf(&gs[i - 1], &gs[i - 1]);
                prop_assert!(lhs >= rhs * (1.0 - 1e-9));
            }
        }

        #[test]
        fn primitive_is_idempotent(v in proptest::collection::vec(-1000i64..1000, 1..6)) {
            let v = iv(&v);
            prop_assume!(!v.is_zero());
            let p = primitive(&v).unwrap();
            prop_assert_eq!(primitive(&p).unwrap(), p.clone());
            prop_assert_eq!(content(&p).unwrap(), BigInt::one());
        }

        #[test]
        fn complement_always_dots_to_minus_one(v in proptest::collection::vec(-30i64..30, 1..8)) {
            let v = iv(&v);
            prop_assume!(!v.is_zero());
            let w = primitive(&v).unwrap();
            let c = complement_vector(&w).unwrap();
            prop_assert_eq!(w.dot(&c), BigInt::from(-1));
        }
    }

    /// Exhaustive oracle: integer vector with entries ≤ bound maximizing cosine.
    fn best_by_enumeration(u: &[f64], bound: i64) -> Vec<i64> {
        let mut best = (f64::MIN, vec![]);
        for a in -bound..=bound {
            for b in -bound..=bound {
                let c = [a as f64, b as f64];
                if a == 0 && b == 0 {
                    continue;
                }
                let cs = cosine(&c, u);
                if cs > best.0 + 1e-15 {
                    best = (cs, vec![a, b]);
                }
            }
        }
        primitive(&iv(&best.1)).unwrap().to_i64s().unwrap()
    }

    #[test]
    fn snap_examples() {
        let opts = SnapOptions { scale: 10_000, max_entry: 10, min_cosine: 0.9999 };
        let u = [1.9998, 3.0004];
        assert_eq!(best_by_enumeration(&u, 10), vec![2, 3]);
        assert_eq!(snap_direction(&u, &opts).unwrap(), iv(&[2, 3]));
        assert_eq!(snap_direction(&[1.0, 0.0], &opts).unwrap(), iv(&[1, 0]));
        let u = [-0.49997, 1.00001];
        assert_eq!(best_by_enumeration(&u, 10), vec![-1, 2]);
        assert_eq!(snap_direction(&u, &opts).unwrap(), iv(&[-1, 2]));
        assert_eq!(snap_direction(&[0.0, 0.0], &opts), Err(SnapReject::ZeroInput));
        assert_eq!(snap_direction(&[-2.5], &opts).unwrap(), iv(&[-1]));
    }

    #[test]
    fn snap_falls_back_to_coarser_rounding() {
        let opts = SnapOptions { scale: 10_000, max_entry: 8, min_cosine: 0.9999 };
        // a slowly converging tentacle of (5,3)
        let u = [68.0, 41.0];
        assert_eq!(best_by_enumeration(&u, 8), vec![5, 3]);
        assert_eq!(snap_direction(&u, &opts).unwrap(), iv(&[5, 3]));
        let strict = SnapOptions { min_cosine: 0.999999, ..opts };
        assert!(matches!(snap_direction(&u, &strict), Err(SnapReject::EntryTooLarge { .. })));
    }

    #[test]
    fn snap_rejects_irrational_direction() {
        let opts = SnapOptions { scale: 10_000, max_entry: 2, min_cosine: 0.9999 };
        let u = [1.0, std::f64::consts::PI];
        assert!(snap_direction(&u, &opts).is_err());
        // (1,3) is within the cosine bound once entries up to 5 are allowed
        let wider = SnapOptions { max_entry: 5, ..opts };
        assert_eq!(best_by_enumeration(&u, 5), vec![1, 3]);
        assert_eq!(snap_direction(&u, &wider).unwrap(), iv(&[1, 3]));
    }

    #[test]
    fn snap_recovers_every_small_exact_direction() {
        let opts = SnapOptions { scale: 10_000, max_entry: 6, min_cosine: 0.9999 };
        for a in -6i64..=6 {
            for b in -6i64..=6 {
                for c in -6i64..=6 {
                    let w = iv(&[a, b, c]);
                    if w.is_zero() || content(&w).unwrap() != BigInt::one() {
                        continue;
                    }
                    let u: Vec<f64> = [a, b, c].iter().map(|&x| 0.37 * x as f64).collect();
                    assert_eq!(snap_direction(&u, &opts), Ok(w.clone()), "w = {w}");
                }
            }
        }
    }
}
