//! Rational points of bounded height on exactly decidable sets, the degree
//! and exponent formulas of the counting bound, and an explicit cover of the
//! points by low-degree hypersurfaces.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::{BigRational, Ratio, Rational64};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multiindex::{indices_up_to, MultiIndex};
use crate::sweep;

/// Refuse enumerations larger than this many candidate tuples.
pub const MAX_CANDIDATES: u128 = 50_000_000;

/// A point of (0,1)^n with rational coordinates in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalPoint(pub Vec<Rational64>);

impl RationalPoint {
    pub fn new(coords: Vec<Rational64>) -> Result<Self> {
        for c in &coords {
            if !(c.numer() > &0 && c.numer() < c.denom()) {
                return Err(Error::InvalidParameter(format!("coordinate {c} not in (0,1)")));
            }
        }
        Ok(RationalPoint(coords))
    }

    pub fn coords(&self) -> &[Rational64] {
        &self.0
    }

    /// max over coordinates of max(|a|, |b|).
    pub fn height(&self) -> i64 {
        self.0.iter().map(|c| c.numer().abs().max(c.denom().abs())).max().unwrap_or(1)
    }

    pub fn to_big(&self) -> Vec<BigRational> {
        self.0.iter().map(|c| to_big(*c)).collect()
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for RationalPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        parts.serialize(s)
    }
}

/// Height of a single rational.
pub fn height(q: &Rational64) -> i64 {
    q.numer().abs().max(q.denom().abs())
}

fn to_big(q: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*q.numer()), BigInt::from(*q.denom()))
}

fn to_small(q: &BigRational) -> Option<Rational64> {
    Some(Ratio::new(q.numer().to_i64()?, q.denom().to_i64()?))
}

/// a/b with 0 < a < b ≤ H, gcd(a, b) = 1, in increasing order.
pub fn farey_interior(h: u64) -> Vec<Rational64> {
    let h = h as i64;
    let mut out = Vec::new();
    for b in 2..=h {
        for a in 1..b {
            if a.gcd(&b) == 1 {
                out.push(Ratio::new_raw(a, b));
            }
        }
    }
    out.sort();
    out
}

/// Sets whose membership is decided in exact rational arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub enum RationalSet {
    /// (0,1)^n.
    UnitCube(usize),
    /// Graph of y = Σ c_k x^k over (0,1), points with y ∈ (0,1).
    PolyGraph(Vec<BigRational>),
    /// Graph of y = x^{p/q}, gcd(p, q) = 1.
    PowerGraph { p: u32, q: u32 },
    /// Graph of y = e^x − 1; not exactly decidable.
    ExpGraph,
}

impl RationalSet {
    pub fn parabola() -> Self {
        RationalSet::PolyGraph(vec![BigRational::zero(), BigRational::zero(), BigRational::one()])
    }

    /// Ambient dimension n.
    pub fn ambient_dim(&self) -> usize {
        match self {
            RationalSet::UnitCube(n) => *n,
            _ => 2,
        }
    }

    /// Dimension m of the set.
    pub fn dim(&self) -> usize {
        match self {
            RationalSet::UnitCube(n) => *n,
            _ => 1,
        }
    }

    pub fn contains(&self, q: &[BigRational]) -> Result<bool> {
        if q.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: q.len(),
            });
        }
        let unit = |v: &BigRational| v.is_positive() && v < &BigRational::one();
        if !q.iter().all(unit) {
            return Ok(false);
        }
        match self {
            RationalSet::UnitCube(_) => Ok(true),
            RationalSet::PolyGraph(c) => Ok(eval_poly(c, &q[0]) == q[1]),
            RationalSet::PowerGraph { p, q: den } => {
                Ok(num_traits::pow(q[1].clone(), *den as usize) == num_traits::pow(q[0].clone(), *p as usize))
            }
            RationalSet::ExpGraph => Err(not_exact()),
        }
    }

    /// The rational points over abscissa x with height ≤ h.
    fn fiber(&self, x: Rational64, h: i64) -> Result<Option<RationalPoint>> {
        let y = match self {
            RationalSet::PolyGraph(c) => eval_poly(c, &to_big(x)),
            RationalSet::PowerGraph { p, q } => {
                let (a, b) = (*x.numer(), *x.denom());
                let (ra, rb) = (a.nth_root(*q), b.nth_root(*q));
                if ra.checked_pow(*q) != Some(a) || rb.checked_pow(*q) != Some(b) {
                    return Ok(None);
                }
                let num = BigInt::from(ra).pow(*p);
                let den = BigInt::from(rb).pow(*p);
                BigRational::new(num, den)
            }
            RationalSet::UnitCube(_) => unreachable!("cube points are a product"),
            RationalSet::ExpGraph => return Err(not_exact()),
        };
        if !(y.is_positive() && y < BigRational::one()) {
            return Ok(None);
        }
        let Some(ys) = to_small(&y) else { return Ok(None) };
        if height(&ys) > h {
            return Ok(None);
        }
        Ok(Some(RationalPoint(vec![x, ys])))
    }

    /// X(ℚ, H): all points of height ≤ H, in increasing lexicographic order.
    pub fn enumerate_points(&self, h: u64) -> Result<Vec<RationalPoint>> {
        if let RationalSet::ExpGraph = self {
            return Err(not_exact());
        }
        let farey = farey_interior(h);
        let mut out = match self {
            RationalSet::UnitCube(n) => {
                let total = (farey.len() as u128).checked_pow(*n as u32).unwrap_or(u128::MAX);
                if total > MAX_CANDIDATES {
                    return Err(Error::InvalidParameter(format!(
                        "{total} candidate points exceeds the cap {MAX_CANDIDATES}"
                    )));
                }
                let mut pts = vec![Vec::new()];
                for _ in 0..*n {
                    pts = pts
                        .into_iter()
                        .flat_map(|p| {
                            farey.iter().map(move |c| {
                                let mut q = p.clone();
                                q.push(*c);
                                q
                            })
                        })
                        .collect();
                }
                pts.into_iter().map(RationalPoint).collect()
            }
            _ => {
                let fibers = sweep::map(&farey, |&x| self.fiber(x, h as i64));
                let mut pts = Vec::new();
                for f in fibers {
                    if let Some(p) = f? {
                        pts.push(p);
                    }
                }
                pts
            }
        };
        out.sort();
        Ok(out)
    }
}

fn not_exact() -> Error {
    Error::NotExact("membership in the graph of e^x - 1 is not decidable in rational arithmetic".into())
}

fn eval_poly(c: &[BigRational], x: &BigRational) -> BigRational {
    c.iter().rev().fold(BigRational::zero(), |acc, k| acc * x + k)
}

impl FromStr for RationalSet {
    type Err = Error;

    /// `parabola`, `square`, `cube:N`, `cusp` (y = x^{3/2}), `power:P/Q`,
    /// `poly:c0,c1,...`, `exp`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unknown point-count fixture {s:?}"));
        let (head, arg) = s.split_once(':').unwrap_or((s, ""));
        match (head, arg) {
            ("parabola", "") => Ok(RationalSet::parabola()),
            ("square", "") => Ok(RationalSet::UnitCube(2)),
            ("cusp", "") => Ok(RationalSet::PowerGraph { p: 3, q: 2 }),
            ("exp", "") => Ok(RationalSet::ExpGraph),
            ("cube", n) => {
                let n: usize = n.parse().map_err(|_| bad())?;
                if n == 0 {
                    return Err(bad());
                }
                Ok(RationalSet::UnitCube(n))
            }
            ("power", pq) => {
                let (p, q) = pq.split_once('/').ok_or_else(bad)?;
                let (p, q): (u32, u32) = (p.parse().map_err(|_| bad())?, q.parse().map_err(|_| bad())?);
                if p == 0 || q == 0 || p.gcd(&q) != 1 {
                    return Err(Error::InvalidParameter(format!("power {p}/{q} must be positive and reduced")));
                }
                Ok(RationalSet::PowerGraph { p, q })
            }
            ("poly", cs) => {
                let coeffs = cs
                    .split(',')
                    .map(|c| crate::jets::parse_rational(c).ok_or_else(bad))
                    .collect::<Result<Vec<_>>>()?;
                Ok(RationalSet::PolyGraph(coeffs))
            }
            _ => Err(bad()),
        }
    }
}

/// ⌊log(H)^{m/(n−m)}⌋, natural log, for H > e.
pub fn degree_bound(h: u64, m: usize, n: usize) -> Result<u32> {
    if (h as f64) <= std::f64::consts::E {
        return Err(Error::InvalidParameter(format!("height {h} must exceed e")));
    }
    if !(n > m && m >= 1) {
        return Err(Error::InvalidParameter(format!("need n > m >= 1, got m={m}, n={n}")));
    }
    let d = (h as f64).ln().powf(m as f64 / (n - m) as f64).floor();
    Ok(d as u32)
}

/// 2mn/(n−m).
pub fn c2_exponent(m: usize, n: usize) -> Result<Ratio<u64>> {
    if !(n > m && m >= 1) {
        return Err(Error::InvalidParameter(format!("need n > m >= 1, got m={m}, n={n}")));
    }
    Ok(Ratio::new(2 * m as u64 * n as u64, (n - m) as u64))
}

/// Nonzero kernel vector of the rows, or None when they have full column
/// rank. Exact Gaussian elimination.
pub fn kernel_vector(rows: &[Vec<BigRational>], cols: usize) -> Option<Vec<BigRational>> {
    let mut basis = Echelon::new(cols);
    for r in rows {
        basis.insert(r.clone());
        if basis.rank() == cols {
            return None;
        }
    }
    Some(basis.kernel_vector())
}

/// Rows kept in reduced echelon form, one per pivot column.
struct Echelon {
    cols: usize,
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl Echelon {
    fn new(cols: usize) -> Self {
        Echelon { cols, rows: Vec::new() }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn insert(&mut self, mut v: Vec<BigRational>) {
        for (p, row) in &self.rows {
            if !v[*p].is_zero() {
                let f = v[*p].clone();
                for (a, b) in v.iter_mut().zip(row) {
                    *a -= &f * b;
                }
            }
        }
        let Some(p) = v.iter().position(|c| !c.is_zero()) else { return };
        let inv = v[p].recip();
        for a in v.iter_mut() {
            *a *= &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for (a, b) in row.iter_mut().zip(&v) {
                    *a -= &f * b;
                }
            }
        }
        self.rows.push((p, v));
    }

    fn kernel_vector(&self) -> Vec<BigRational> {
        let pivots: Vec<usize> = self.rows.iter().map(|(p, _)| *p).collect();
        let free = (0..self.cols).find(|c| !pivots.contains(c)).expect("rank < cols");
        let mut x = vec![BigRational::zero(); self.cols];
        x[free] = BigRational::one();
        for (p, row) in &self.rows {
            x[*p] = -row[free].clone();
        }
        x
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HypersurfaceCover {
    pub n: usize,
    pub degree: u32,
    /// Exponent vectors of the monomials, graded-lex.
    pub monomials: Vec<MultiIndex>,
    /// Coefficients over `monomials`, as "p/q" strings when serialized.
    #[serde(serialize_with = "ser_polys")]
    pub polynomials: Vec<Vec<BigRational>>,
    /// assignment[i] is the polynomial vanishing on point i.
    pub assignment: Vec<usize>,
    /// True when a single polynomial of degree ≤ d fits every point.
    pub exact_fit: bool,
}

fn ser_polys<S: serde::Serializer>(p: &[Vec<BigRational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    let v: Vec<Vec<String>> = p.iter().map(|c| c.iter().map(|x| x.to_string()).collect()).collect();
    v.serialize(s)
}

impl HypersurfaceCover {
    pub fn size(&self) -> usize {
        self.polynomials.len()
    }

    /// Every assigned point is an exact zero and no polynomial vanishes
    /// identically.
    pub fn verify(&self, points: &[RationalPoint]) -> Result<()> {
        if self.assignment.len() != points.len() {
            return Err(Error::validation("cover_assignment", "assignment length differs from point count"));
        }
        for (k, poly) in self.polynomials.iter().enumerate() {
            if poly.iter().all(|c| c.is_zero()) {
                return Err(Error::validation("cover_nonzero", format!("polynomial {k} is zero")));
            }
        }
        for (p, &k) in points.iter().zip(&self.assignment) {
            let row = monomial_row(&self.monomials, &p.to_big());
            let v: BigRational = row.iter().zip(&self.polynomials[k]).map(|(a, b)| a * b).sum();
            if !v.is_zero() {
                return Err(Error::validation("cover_vanishing", format!("polynomial {k} does not vanish at {p}")));
            }
        }
        Ok(())
    }
}

fn monomial_row(monomials: &[MultiIndex], x: &[BigRational]) -> Vec<BigRational> {
    monomials
        .iter()
        .map(|mu| {
            mu.entries()
                .iter()
                .zip(x)
                .map(|(&e, xi)| num_traits::pow(xi.clone(), e as usize))
                .product()
        })
        .collect()
}

fn normalise(mut v: Vec<BigRational>) -> Vec<BigRational> {
    if let Some(lead) = v.iter().find(|c| !c.is_zero()).cloned() {
        for c in v.iter_mut() {
            *c /= &lead;
        }
    }
    v
}

/// Covers the points by hypersurfaces of degree ≤ d. First looks for one
/// polynomial of the lowest degree e ≤ d vanishing on all of them; failing
/// that, greedily takes chunks of D − 1 points, D = binom(n+d, n), each of
/// which has a nonzero vanishing polynomial because the system is
/// underdetermined.
pub fn hypersurface_cover(points: &[RationalPoint], d: u32, n: usize) -> Result<HypersurfaceCover> {
    if d < 1 {
        return Err(Error::InvalidParameter("degree must be >= 1".into()));
    }
    if let Some(p) = points.iter().find(|p| p.0.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p.0.len(),
        });
    }
    let big: Vec<Vec<BigRational>> = points.iter().map(|p| p.to_big()).collect();
    if points.is_empty() {
        return Ok(HypersurfaceCover {
            n,
            degree: d,
            monomials: indices_up_to(n, d),
            polynomials: Vec::new(),
            assignment: Vec::new(),
            exact_fit: false,
        });
    }
    for e in 1..=d {
        let mons = indices_up_to(n, e);
        let rows: Vec<Vec<BigRational>> = big.iter().map(|x| monomial_row(&mons, x)).collect();
        if let Some(k) = kernel_vector(&rows, mons.len()) {
            let cover = HypersurfaceCover {
                n,
                degree: e,
                monomials: mons,
                polynomials: vec![normalise(k)],
                assignment: vec![0; points.len()],
                exact_fit: true,
            };
            cover.verify(points)?;
            return Ok(cover);
        }
    }
    let mons = indices_up_to(n, d);
    let chunk = mons.len() - 1;
    let mut polynomials = Vec::new();
    let mut assignment = Vec::with_capacity(points.len());
    for (k, group) in big.chunks(chunk).enumerate() {
        let rows: Vec<Vec<BigRational>> = group.iter().map(|x| monomial_row(&mons, x)).collect();
        let v = kernel_vector(&rows, mons.len())
            .ok_or_else(|| Error::validation("cover_kernel", "underdetermined system had trivial kernel"))?;
        polynomials.push(normalise(v));
        assignment.extend(std::iter::repeat_n(k, group.len()));
    }
    let cover = HypersurfaceCover {
        n,
        degree: d,
        monomials: mons,
        polynomials,
        assignment,
        exact_fit: false,
    };
    cover.verify(points)?;
    Ok(cover)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountRow {
    #[serde(rename = "H")]
    pub h: u64,
    pub points: usize,
    pub degree_d: u32,
    pub cover_size: usize,
    #[serde(rename = "logH_pow_c2")]
    pub log_h_pow_c2: f64,
    /// c1·log(H)^{c2} with c1 fitted at the smallest H.
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CountTable {
    pub fixture: String,
    pub m: usize,
    pub n: usize,
    pub c2: String,
    pub c1: f64,
    pub rows: Vec<CountRow>,
    pub pass: bool,
}

/// For each H: |X(ℚ,H)|, the cover size at degree ⌊log(H)^{m/(n−m)}⌋ and
/// log(H)^{c2}. c1 is the ratio at the smallest H; every row must satisfy
/// cover size ≤ c1·log(H)^{c2}.
pub fn count_vs_bound(set: &RationalSet, fixture: &str, heights: &[u64]) -> Result<CountTable> {
    let (m, n) = (set.dim(), set.ambient_dim());
    let c2 = c2_exponent(m, n)?;
    let c2f = *c2.numer() as f64 / *c2.denom() as f64;
    let mut hs = heights.to_vec();
    hs.sort_unstable();
    hs.dedup();
    if hs.is_empty() {
        return Err(Error::InvalidParameter("empty height sweep".into()));
    }
    let mut raw = Vec::with_capacity(hs.len());
    for &h in &hs {
        let d = degree_bound(h, m, n)?;
        let pts = set.enumerate_points(h)?;
        let cover = hypersurface_cover(&pts, d.max(1), n)?;
        raw.push((h, pts.len(), d, cover.size(), (h as f64).ln().powf(c2f)));
    }
    let c1 = raw[0].3 as f64 / raw[0].4;
    let rows: Vec<CountRow> = raw
        .into_iter()
        .map(|(h, points, degree_d, cover_size, lp)| {
            let bound = c1 * lp;
            CountRow {
                h,
                points,
                degree_d,
                cover_size,
                log_h_pow_c2: lp,
                bound,
                pass: cover_size as f64 <= bound * (1.0 + 1e-9),
            }
        })
        .collect();
    let pass = rows.iter().all(|r| r.pass);
    Ok(CountTable {
        fixture: fixture.to_string(),
        m,
        n,
        c2: c2.to_string(),
        c1,
        rows,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational64 {
        Ratio::new(a, b)
    }

    #[test]
    fn heights() {
        let p = RationalPoint::new(vec![q(1, 2), q(1, 4)]).unwrap();
        assert_eq!(p.height(), 4);
        assert_eq!(RationalPoint::new(vec![q(2, 3), q(3, 5)]).unwrap().height(), 5);
        assert!(RationalPoint::new(vec![q(3, 2)]).is_err());
    }

    #[test]
    fn parabola_small_height() {
        let pts = RationalSet::parabola().enumerate_points(4).unwrap();
        assert_eq!(pts, vec![RationalPoint(vec![q(1, 2), q(1, 4)])]);
        assert!(RationalSet::parabola().enumerate_points(1).unwrap().is_empty());
        assert_eq!(RationalSet::UnitCube(2).enumerate_points(3).unwrap().len(), 9);
    }

    #[test]
    fn power_graph_needs_squares() {
        let pts = RationalSet::PowerGraph { p: 3, q: 2 }.enumerate_points(27).unwrap();
        // x = 1/4 → 1/8, 4/9 → 8/27, 1/9 → 1/27
        assert!(pts.contains(&RationalPoint(vec![q(1, 4), q(1, 8)])));
        assert!(pts.contains(&RationalPoint(vec![q(4, 9), q(8, 27)])));
        assert_eq!(pts.len(), 3);
    }

    #[test]
    fn exp_graph_is_refused() {
        assert!(matches!(RationalSet::ExpGraph.enumerate_points(5), Err(Error::NotExact(_))));
    }

    #[test]
    fn formulas() {
        assert_eq!(degree_bound(21, 1, 2).unwrap(), 3);
        assert_eq!(degree_bound(3, 1, 2).unwrap(), 1);
        assert!(degree_bound(2, 1, 2).is_err());
        assert_eq!(c2_exponent(1, 2).unwrap(), Ratio::from_integer(4));
        assert_eq!(c2_exponent(2, 3).unwrap(), Ratio::from_integer(12));
        assert!(c2_exponent(2, 2).is_err());
    }

    #[test]
    fn lines_through_pairs() {
        let pts: Vec<RationalPoint> = [(1, 2, 1, 3), (1, 3, 1, 5), (2, 3, 1, 7), (1, 4, 3, 4), (3, 5, 2, 7)]
            .iter()
            .map(|&(a, b, c, d)| RationalPoint(vec![q(a, b), q(c, d)]))
            .collect();
        let cover = hypersurface_cover(&pts, 1, 2).unwrap();
        assert!(!cover.exact_fit);
        assert_eq!(cover.size(), 3);
        assert_eq!(cover.assignment, vec![0, 0, 1, 1, 2]);
        assert!(hypersurface_cover(&[], 1, 2).unwrap().polynomials.is_empty());
    }

    #[test]
    fn parabola_single_curve() {
        let pts = RationalSet::parabola().enumerate_points(50).unwrap();
        let cover = hypersurface_cover(&pts, degree_bound(50, 1, 2).unwrap(), 2).unwrap();
        assert_eq!(cover.size(), 1);
        assert_eq!(cover.degree, 2);
        assert!(cover.exact_fit);
    }

    #[test]
    fn sweep_table() {
        let t = count_vs_bound(&RationalSet::parabola(), "parabola", &[10, 20, 50, 100]).unwrap();
        assert!(t.pass);
        assert!(t.rows.iter().all(|r| r.cover_size == 1));
        assert!(count_vs_bound(&RationalSet::UnitCube(2), "square", &[10]).is_err());
    }
}
