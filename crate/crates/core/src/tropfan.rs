//! Tropical curves as weighted ray fans: balancing, degree, completeness,
//! the Newton-polygon oracle for plane curves and pushforward along integer
//! matrices.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::intlin::{content, primitive, IntMatrix, IntVector};
use crate::poly::{random_unit, ComplexPoint, ExponentVector, LaurentPolynomial, PolynomialSystem};
use crate::tracker::{self, TrackerOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct Ray {
    pub direction: IntVector,
    pub multiplicity: u64,
    pub witnesses: Vec<ComplexPoint>,
}

impl Ray {
    pub fn new(direction: IntVector, multiplicity: u64) -> Result<Self> {
        if direction.is_zero() {
            return Err(Error::ZeroVector);
        }
        let g = content(&direction)?;
        if g != BigInt::from(1) {
            return Err(Error::NotPrimitive { content: g.to_string() });
        }
        if multiplicity == 0 {
            return Err(Error::InvalidArgument(format!("ray {direction} has multiplicity 0")));
        }
        Ok(Ray {
            direction,
            multiplicity,
            witnesses: vec![],
        })
    }

    pub fn from_i64s(direction: &[i64], multiplicity: u64) -> Result<Self> {
        Ray::new(IntVector::from_i64s(direction), multiplicity)
    }

    pub fn with_witnesses(mut self, witnesses: Vec<ComplexPoint>) -> Self {
        self.witnesses = witnesses;
        self
    }
}

#[derive(Serialize, Deserialize)]
struct RayRepr {
    direction: IntVector,
    multiplicity: u64,
    #[serde(default)]
    witnesses: Vec<Vec<[f64; 2]>>,
}

impl Serialize for Ray {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RayRepr {
            direction: self.direction.clone(),
            multiplicity: self.multiplicity,
            witnesses: self
                .witnesses
                .iter()
                .map(|p| p.coords().iter().map(|z| [z.re, z.im]).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Ray {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = RayRepr::deserialize(d)?;
        let ray = Ray::new(r.direction, r.multiplicity).map_err(serde::de::Error::custom)?;
        let witnesses = r
            .witnesses
            .into_iter()
            .map(|p| {
                let coords: Vec<Complex64> = p.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
                if coords.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                    Ok(ComplexPoint::new(coords))
                } else {
                    Err(serde::de::Error::custom("non-finite witness coordinate"))
                }
            })
            .collect::<std::result::Result<_, _>>()?;
        Ok(ray.with_witnesses(witnesses))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TropicalCurve {
    #[serde(rename = "n")]
    ambient_dim: usize,
    rays: Vec<Ray>,
}

#[derive(Deserialize)]
struct CurveRepr {
    n: usize,
    rays: Vec<Ray>,
}

impl<'de> Deserialize<'de> for TropicalCurve {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let c = CurveRepr::deserialize(d)?;
        TropicalCurve::new(c.n, c.rays).map_err(serde::de::Error::custom)
    }
}

impl TropicalCurve {
    pub fn empty(ambient_dim: usize) -> Self {
        TropicalCurve {
            ambient_dim,
            rays: vec![],
        }
    }

    /// Validates dimensions and distinctness of directions.
    pub fn new(ambient_dim: usize, rays: Vec<Ray>) -> Result<Self> {
        for (i, r) in rays.iter().enumerate() {
            if r.direction.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    found: r.direction.len(),
                });
            }
            if rays[..i].iter().any(|q| q.direction == r.direction) {
                return Err(Error::InvalidArgument(format!("repeated direction {}", r.direction)));
            }
        }
        Ok(TropicalCurve { ambient_dim, rays })
    }

    /// Builds a curve from `(direction, multiplicity)` pairs.
    pub fn from_table(ambient_dim: usize, table: &[(Vec<i64>, u64)]) -> Result<Self> {
        let rays = table
            .iter()
            .map(|(d, m)| Ray::from_i64s(d, *m))
            .collect::<Result<Vec<_>>>()?;
        TropicalCurve::new(ambient_dim, rays)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rays(&self) -> &[Ray] {
        &self.rays
    }

    /// Adds a ray, merging with an existing one of the same direction.
    pub fn insert(&mut self, ray: Ray) -> Result<()> {
        if ray.direction.len() != self.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim,
                found: ray.direction.len(),
            });
        }
        match self.rays.iter_mut().find(|r| r.direction == ray.direction) {
            Some(r) => {
                r.multiplicity += ray.multiplicity;
                r.witnesses.extend(ray.witnesses);
            }
            None => self.rays.push(ray),
        }
        Ok(())
    }

    /// Rays sorted by direction, for order-independent comparison.
    pub fn sorted(&self) -> TropicalCurve {
        let mut rays = self.rays.clone();
        rays.sort_by(|a, b| a.direction.cmp(&b.direction));
        TropicalCurve {
            ambient_dim: self.ambient_dim,
            rays,
        }
    }

    /// `(direction, multiplicity)` pairs sorted by direction.
    pub fn table(&self) -> Vec<(Vec<i64>, u64)> {
        let mut t: Vec<(Vec<i64>, u64)> = self
            .rays
            .iter()
            .map(|r| (r.direction.to_i64s().unwrap_or_default(), r.multiplicity))
            .collect();
        t.sort();
        t
    }
}

impl fmt::Display for TropicalCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rays {
            writeln!(f, "{} {}", r.multiplicity, r.direction)?;
        }
        Ok(())
    }
}

/// `Σ m_i r_i` and whether it vanishes.
pub fn check_balancing(curve: &TropicalCurve) -> (bool, IntVector) {
    let defect = curve.rays.iter().fold(IntVector::zero(curve.ambient_dim), |acc, r| {
        acc.add(&r.direction.scaled(&BigInt::from(r.multiplicity)))
    });
    (defect.is_zero(), defect)
}

/// `Σ m_i (lift(r_i) - max(lift(r_i))·(1,…,1))` in dimension `n + 1`.
fn lifted_sum(curve: &TropicalCurve) -> Vec<BigInt> {
    let n = curve.ambient_dim;
    let mut sum = vec![BigInt::zero(); n + 1];
    for r in &curve.rays {
        let zero = BigInt::zero();
        let top = r.direction.entries().iter().fold(zero.clone(), |m, e| if *e > m { e.clone() } else { m });
        let m = BigInt::from(r.multiplicity);
        for (i, s) in sum.iter_mut().enumerate() {
            let e = if i < n { &r.direction[i] } else { &zero };
            *s += (e - &top) * &m;
        }
    }
    sum
}

/// Degree by lifting, subtracting each ray's maximum and summing.
pub fn tropical_degree(curve: &TropicalCurve) -> Result<u64> {
    let (balanced, defect) = check_balancing(curve);
    if !balanced {
        return Err(Error::Unbalanced {
            defect: defect.to_i64s()?,
        });
    }
    let sum = lifted_sum(curve);
    let first = sum[0].clone();
    if sum.iter().any(|s| *s != first) || first.is_positive() {
        return Err(Error::Inconsistent(format!("lifted sum {sum:?} is not a multiple of (-1,…,-1)")));
    }
    (-first).to_u64().ok_or_else(|| Error::Overflow("degree".into()))
}

/// `-d·(1,…,1)` minus the lifted sum; zero exactly when the curve is balanced
/// with degree `d`.
pub fn completeness_defect(curve: &TropicalCurve, d_numeric: u64) -> IntVector {
    let d = BigInt::from(d_numeric);
    IntVector::new(lifted_sum(curve).into_iter().map(|s| -&d - s).collect())
}

/// Number of torus points on a random affine hyperplane section, confirmed
/// by a second independent hyperplane.
pub fn numeric_degree(f: &PolynomialSystem, opts: &TrackerOptions, seed: u64) -> Result<usize> {
    let n = f.num_vars();
    if f.t_index().is_some() || f.len() + 1 != n {
        return Err(Error::NotSquare {
            equations: f.len() + 1,
            variables: n,
        });
    }
    let mut counts = Vec::with_capacity(2);
    for k in 0..2u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
        let mut h = LaurentPolynomial::constant(n, random_unit(&mut rng));
        for i in 0..n {
            h.add_term(ExponentVector::unit(n, i), random_unit(&mut rng));
        }
        let mut sys = f.clone();
        sys.push(h)?;
        let solve_seed = rand::Rng::gen(&mut rng);
        counts.push(tracker::solve_square(&sys, opts, solve_seed)?.len());
    }
    if counts[0] != counts[1] {
        return Err(Error::Indeterminate(format!(
            "hyperplane sections disagree: {} vs {} points",
            counts[0], counts[1]
        )));
    }
    Ok(counts[0])
}

/// Convex lattice polygon, vertices counterclockwise. A segment is stored as
/// its two endpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    vertices: Vec<(i64, i64)>,
}

fn cross(o: (i64, i64), a: (i64, i64), b: (i64, i64)) -> i128 {
    let (ax, ay) = ((a.0 - o.0) as i128, (a.1 - o.1) as i128);
    let (bx, by) = ((b.0 - o.0) as i128, (b.1 - o.1) as i128);
    ax * by - ay * bx
}

impl NewtonPolygon {
    /// Convex hull (monotone chain), dropping collinear boundary points.
    pub fn from_points(points: &[(i64, i64)]) -> Result<Self> {
        let mut pts = points.to_vec();
        pts.sort_unstable();
        pts.dedup();
        if pts.len() < 2 {
            return Err(Error::InvalidArgument("Newton polygon of a single point".into()));
        }
        let mut lower: Vec<(i64, i64)> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<(i64, i64)> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Ok(NewtonPolygon { vertices: lower })
    }

    pub fn of(f: &LaurentPolynomial) -> Result<Self> {
        if f.num_vars() != 2 || f.t_index().is_some() {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: f.num_vars(),
            });
        }
        let pts: Vec<(i64, i64)> = f.terms().map(|(e, _)| (e[0], e[1])).collect();
        NewtonPolygon::from_points(&pts)
    }

    pub fn vertices(&self) -> &[(i64, i64)] {
        &self.vertices
    }

    pub fn is_segment(&self) -> bool {
        self.vertices.len() == 2
    }

    /// Outward primitive normals with the lattice lengths of their edges.
    pub fn edge_normals(&self) -> Vec<((i64, i64), u64)> {
        let v = &self.vertices;
        let edge = |p: (i64, i64), q: (i64, i64)| {
            let (dx, dy) = (q.0 - p.0, q.1 - p.1);
            let g = dx.gcd(&dy);
            ((dy / g, -dx / g), g as u64)
        };
        if self.is_segment() {
            let (n, g) = edge(v[0], v[1]);
            return vec![(n, g), ((-n.0, -n.1), g)];
        }
        (0..v.len()).map(|i| edge(v[i], v[(i + 1) % v.len()])).collect()
    }
}

/// Tropical curve of a plane curve from the normal fan of its Newton polygon.
pub fn plane_curve_oracle(f: &LaurentPolynomial) -> Result<TropicalCurve> {
    if f.num_terms() < 2 {
        return Err(Error::InvalidArgument("oracle needs at least two terms".into()));
    }
    let poly = NewtonPolygon::of(f)?;
    let mut curve = TropicalCurve::empty(2);
    for ((a, b), g) in poly.edge_normals() {
        curve.insert(Ray::from_i64s(&[a, b], g)?)?;
    }
    Ok(curve)
}

/// Image of the curve under `A`: direction `primitive(A r)`, weight
/// `m · content(A r)`, equal images merged. Fails on a ray with `A r = 0`.
pub fn pushforward(curve: &TropicalCurve, a: &IntMatrix) -> Result<TropicalCurve> {
    let (img, contracted) = pushforward_dropping_contracted(curve, a)?;
    match contracted.first() {
        Some(r) => Err(Error::ContractedRay { direction: r.to_i64s()? }),
        None => Ok(img),
    }
}

/// As [`pushforward`], but rays with `A r = 0` are left out of the image and
/// returned separately.
pub fn pushforward_dropping_contracted(curve: &TropicalCurve, a: &IntMatrix) -> Result<(TropicalCurve, Vec<IntVector>)> {
    if a.num_cols() != curve.ambient_dim {
        return Err(Error::DimensionMismatch {
            expected: curve.ambient_dim,
            found: a.num_cols(),
        });
    }
    let mut out = TropicalCurve::empty(a.num_rows());
    let mut contracted = Vec::new();
    for r in &curve.rays {
        let image = a.mul_vector(&r.direction)?;
        if image.is_zero() {
            contracted.push(r.direction.clone());
            continue;
        }
        let g = content(&image)?;
        let weight = (g * BigInt::from(r.multiplicity))
            .to_u64()
            .ok_or_else(|| Error::Overflow("pushforward weight".into()))?;
        out.insert(Ray::new(primitive(&image)?, weight)?)?;
    }
    Ok((out, contracted))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slope {
    Finite(Rational64),
    Infinite,
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slope::Finite(r) => write!(f, "{r}"),
            Slope::Infinite => write!(f, "inf"),
        }
    }
}

fn planar_directions(curve: &TropicalCurve) -> Result<Vec<(i64, i64)>> {
    if curve.ambient_dim != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: curve.ambient_dim,
        });
    }
    let (balanced, defect) = check_balancing(curve);
    if !balanced {
        return Err(Error::Unbalanced {
            defect: defect.to_i64s()?,
        });
    }
    curve
        .rays
        .iter()
        .map(|r| r.direction.to_i64s().map(|d| (d[0], d[1])))
        .collect()
}

fn slope_set(dirs: Vec<(i64, i64)>, f: impl Fn(i64, i64) -> Slope) -> Vec<Slope> {
    let mut out: Vec<Slope> = dirs.into_iter().map(|(p, q)| f(p, q)).collect();
    out.sort();
    out.dedup();
    out
}

/// Slopes `Δy/Δx` of the Newton-polygon edges dual to the rays of a balanced
/// plane curve: `-p/q` for direction `(p, q)`, infinite when `q = 0`.
pub fn edge_slopes(curve: &TropicalCurve) -> Result<Vec<Slope>> {
    Ok(slope_set(planar_directions(curve)?, |p, q| {
        if q == 0 {
            Slope::Infinite
        } else {
            Slope::Finite(Rational64::new(-p, q))
        }
    }))
}

/// Boundary slopes in the A-polynomial convention, `-Δx/Δy` of each dual
/// edge: `q/p` for direction `(p, q)`, infinite when `p = 0`.
pub fn boundary_slopes(curve: &TropicalCurve) -> Result<Vec<Slope>> {
    Ok(slope_set(planar_directions(curve)?, |p, q| {
        if p == 0 {
            Slope::Infinite
        } else {
            Slope::Finite(Rational64::new(q, p))
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_system;
    use proptest::prelude::*;

    fn curve(n: usize, t: &[(&[i64], u64)]) -> TropicalCurve {
        let table: Vec<(Vec<i64>, u64)> = t.iter().map(|(d, m)| (d.to_vec(), *m)).collect();
        TropicalCurve::from_table(n, &table).unwrap()
    }

    fn triangle_curve() -> TropicalCurve {
        curve(2, &[(&[-1, 0], 2), (&[0, -1], 3), (&[2, 3], 1)])
    }

    fn poly(text: &str) -> LaurentPolynomial {
        parse_system(text).unwrap().polynomials()[0].clone()
    }

    #[test]
    fn balancing_examples() {
        assert!(check_balancing(&triangle_curve()).0);
        let (ok, defect) = check_balancing(&curve(2, &[(&[1, 0], 1)]));
        assert!(!ok);
        assert_eq!(defect, IntVector::from_i64s(&[1, 0]));
    }

    #[test]
    fn degree_examples() {
        assert_eq!(tropical_degree(&triangle_curve()).unwrap(), 3);
        let c = curve(2, &[(&[1, -2], 2), (&[2, 3], 1), (&[-4, 1], 1)]);
        assert_eq!(tropical_degree(&c).unwrap(), 6);
        assert!(matches!(tropical_degree(&curve(2, &[(&[1, 0], 1)])), Err(Error::Unbalanced { .. })));
        // the negated directions give a balanced curve of a different degree
        let neg = curve(2, &[(&[-1, 2], 2), (&[-2, -3], 1), (&[4, -1], 1)]);
        assert_eq!(tropical_degree(&neg).unwrap(), 8);
    }

    #[test]
    fn defect_examples() {
        assert!(completeness_defect(&triangle_curve(), 3).is_zero());
        let partial = curve(2, &[(&[-1, 0], 2), (&[0, -1], 3)]);
        assert!(!completeness_defect(&partial, 3).is_zero());
        assert_eq!(completeness_defect(&TropicalCurve::empty(2), 4), IntVector::from_i64s(&[-4, -4, -4]));
    }

    #[test]
    fn oracle_examples() {
        assert_eq!(plane_curve_oracle(&poly("ring x y\n1 + x^3 + y^2")).unwrap().table(), triangle_curve().table());
        assert_eq!(
            plane_curve_oracle(&poly("ring x y\n1 + x + y")).unwrap().table(),
            curve(2, &[(&[-1, 0], 1), (&[0, -1], 1), (&[1, 1], 1)]).table()
        );
        assert_eq!(
            plane_curve_oracle(&poly("ring x y\nx^2 + y^2 + x*y")).unwrap().table(),
            curve(2, &[(&[1, 1], 2), (&[-1, -1], 2)]).table()
        );
        assert!(plane_curve_oracle(&poly("ring x y\nx*y")).is_err());
    }

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let p = NewtonPolygon::from_points(&[(0, 0), (1, 0), (2, 0), (0, 2), (1, 1), (0, 1)]).unwrap();
        assert_eq!(p.vertices(), &[(0, 0), (2, 0), (0, 2)]);
        let s = NewtonPolygon::from_points(&[(0, 0), (3, 3), (1, 1)]).unwrap();
        assert!(s.is_segment());
        assert_eq!(s.edge_normals(), vec![((1, -1), 3), ((-1, 1), 3)]);
    }

    #[test]
    fn pushforward_examples() {
        let id = IntMatrix::identity(2);
        assert_eq!(pushforward(&triangle_curve(), &id).unwrap().table(), triangle_curve().table());
        let proj = IntMatrix::from_i64_rows(&[vec![1, 0, 0], vec![0, 1, 0]]).unwrap();
        let c = curve(3, &[(&[1, 0, 1], 1), (&[1, 0, -1], 2), (&[-1, 0, 0], 3)]);
        let img = pushforward(&c, &proj).unwrap();
        assert_eq!(img.table(), vec![(vec![-1, 0], 3), (vec![1, 0], 3)]);
        let scale = IntMatrix::from_i64_rows(&[vec![2, 0], vec![0, 2]]).unwrap();
        assert_eq!(pushforward(&triangle_curve(), &scale).unwrap().table(), vec![(vec![-1, 0], 4), (vec![0, -1], 6), (vec![2, 3], 2)]);
        let kill = IntMatrix::from_i64_rows(&[vec![3, -2]]).unwrap();
        assert!(matches!(pushforward(&triangle_curve(), &kill), Err(Error::ContractedRay { .. })));
    }

    #[test]
    fn slope_examples() {
        let fin = |a: i64, b: i64| Slope::Finite(Rational64::new(a, b));
        // hull {(0,0),(3,0),(0,2)}: vertical, horizontal and hypotenuse edges
        assert_eq!(edge_slopes(&triangle_curve()).unwrap(), vec![fin(-2, 3), fin(0, 1), Slope::Infinite]);
        let line = curve(2, &[(&[-1, 0], 1), (&[0, -1], 1), (&[1, 1], 1)]);
        assert_eq!(edge_slopes(&line).unwrap(), vec![fin(-1, 1), fin(0, 1), Slope::Infinite]);
        assert_eq!(boundary_slopes(&triangle_curve()).unwrap(), vec![fin(0, 1), fin(3, 2), Slope::Infinite]);
        assert!(edge_slopes(&curve(2, &[(&[1, 0], 1)])).is_err());
        assert!(boundary_slopes(&curve(2, &[(&[1, 0], 1)])).is_err());
    }

    #[test]
    fn contracted_rays_can_be_dropped() {
        let m = IntMatrix::from_i64_rows(&[vec![3, -2]]).unwrap();
        let (img, gone) = pushforward_dropping_contracted(&triangle_curve(), &m).unwrap();
        assert_eq!(gone, vec![IntVector::from_i64s(&[2, 3])]);
        assert_eq!(img.table(), vec![(vec![-1], 6), (vec![1], 6)]);
    }

    #[test]
    fn curve_json_round_trip() {
        let mut c = triangle_curve();
        c.rays[2].witnesses = vec![ComplexPoint::from_real(&[-1.0, 1.0])];
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.starts_with("{\"n\":2,\"rays\":[{\"direction\":[-1,0],\"multiplicity\":2,\"witnesses\":[]}"));
        let back: TropicalCurve = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<TropicalCurve>("{\"n\":2,\"rays\":[{\"direction\":[2,4],\"multiplicity\":1}]}").is_err());
        assert!(serde_json::from_str::<TropicalCurve>("{\"n\":2,\"rays\":[{\"direction\":[1,0],\"multiplicity\":0}]}").is_err());
    }

    #[test]
    fn numeric_degree_examples() {
        let opts = TrackerOptions::default();
        let tri = parse_system("ring x y\n1 + x^3 + y^2").unwrap();
        assert_eq!(numeric_degree(&tri, &opts, 1).unwrap(), 3);
        let line = parse_system("ring x y z\nx + y + z + 1\nx + 2*y + 3*z + 5").unwrap();
        assert_eq!(numeric_degree(&line, &opts, 2).unwrap(), 1);
    }

    fn support() -> impl Strategy<Value = Vec<(i64, i64)>> {
        proptest::collection::vec((-4i64..=4, -4i64..=4), 2..8).prop_filter("two distinct points", |v| {
            let mut w = v.clone();
            w.sort();
            w.dedup();
            w.len() >= 2
        })
    }

    proptest! {
        #[test]
        fn oracle_is_balanced(pts in support()) {
            let f = LaurentPolynomial::from_terms(2, pts.iter().map(|&(a, b)| (ExponentVector::new(vec![a, b]), Complex64::new(1.0, 0.5))));
            let c = plane_curve_oracle(&f).unwrap();
            prop_assert!(check_balancing(&c).0);
            prop_assert!(tropical_degree(&c).is_ok());
        }

        #[test]
        fn degree_is_additive_over_split_rays(pts in support()) {
            let f = LaurentPolynomial::from_terms(2, pts.iter().map(|&(a, b)| (ExponentVector::new(vec![a, b]), Complex64::new(1.0, 0.0))));
            let c = plane_curve_oracle(&f).unwrap();
            // the lifted sum is linear, so unit copies give the same total
            let mut unit = vec![BigInt::zero(); 3];
            for r in c.rays() {
                let single = TropicalCurve::new(2, vec![Ray::new(r.direction.clone(), 1).unwrap()]).unwrap();
                for _ in 0..r.multiplicity {
                    for (u, s) in unit.iter_mut().zip(lifted_sum(&single)) {
                        *u += s;
                    }
                }
            }
            prop_assert_eq!(unit, lifted_sum(&c));
        }

        #[test]
        fn pushforward_preserves_balancing(pts in support(), a in proptest::collection::vec(-3i64..=3, 4)) {
            let f = LaurentPolynomial::from_terms(2, pts.iter().map(|&(x, y)| (ExponentVector::new(vec![x, y]), Complex64::new(1.0, 0.0))));
            let c = plane_curve_oracle(&f).unwrap();
            let m = IntMatrix::from_i64_rows(&[a[..2].to_vec(), a[2..].to_vec()]).unwrap();
            if let Ok(img) = pushforward(&c, &m) {
                prop_assert!(check_balancing(&img).0);
            }
        }
    }
}
