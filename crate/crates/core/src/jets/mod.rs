//! Truncated Taylor jets: normalized coefficients f^{(ν)}/ν! for all
//! |ν| ≤ r at a base point, stored densely in graded-lex order.

mod exponent;
mod expr;

pub use exponent::{parse_rational, Exponent};
pub use expr::{jet_eval_expr, ExprNode};

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::multiindex::{indices_up_to, DerivativeTable, MultiIndex};

/// Index bookkeeping shared by every jet with the same (dim, order).
#[derive(Debug)]
pub struct Layout {
    dim: usize,
    order: u32,
    indices: Vec<MultiIndex>,
    rank: HashMap<MultiIndex, usize>,
    totals: Vec<u32>,
    factorials: Vec<f64>,
    /// (i, j, k) with index_i + index_j = index_k and total ≤ order.
    products: Vec<(u32, u32, u32)>,
    /// For each non-zero index: (rank of index − e_v, v) with v the last
    /// non-zero position.
    predecessor: Vec<Option<(usize, usize)>>,
}

static LAYOUTS: OnceLock<Mutex<HashMap<(usize, u32), Arc<Layout>>>> = OnceLock::new();

impl Layout {
    pub fn get(dim: usize, order: u32) -> Arc<Layout> {
        let cache = LAYOUTS.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry((dim, order))
            .or_insert_with(|| Arc::new(Layout::build(dim, order)))
            .clone()
    }

    fn build(dim: usize, order: u32) -> Layout {
        let indices = indices_up_to(dim, order);
        let rank: HashMap<MultiIndex, usize> = indices
            .iter()
            .enumerate()
            .map(|(i, nu)| (nu.clone(), i))
            .collect();
        let totals: Vec<u32> = indices.iter().map(|nu| nu.total()).collect();
        let factorials = indices.iter().map(|nu| nu.factorial_f64()).collect();
        let mut products = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                if totals[i] + totals[j] > order {
                    // indices are sorted by total, nothing later fits either
                    break;
                }
                let k = rank[&a.add(b)];
                products.push((i as u32, j as u32, k as u32));
            }
        }
        let predecessor = indices
            .iter()
            .map(|nu| {
                let v = nu.entries().iter().rposition(|&e| e > 0)?;
                let prev = nu.with_entry(v, nu.get(v) - 1);
                Some((rank[&prev], v))
            })
            .collect();
        Layout {
            dim,
            order,
            indices,
            rank,
            totals,
            factorials,
            products,
            predecessor,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn rank(&self, nu: &MultiIndex) -> Option<usize> {
        self.rank.get(nu).copied()
    }

    pub fn total(&self, i: usize) -> u32 {
        self.totals[i]
    }

    pub fn factorial(&self, i: usize) -> f64 {
        self.factorials[i]
    }
}

/// Base point and layout; jets built in the same space may be combined.
#[derive(Debug)]
pub struct JetSpace {
    layout: Arc<Layout>,
    point: Vec<f64>,
}

impl JetSpace {
    pub fn new(point: &[f64], order: u32) -> Arc<JetSpace> {
        Arc::new(JetSpace {
            layout: Layout::get(point.len(), order),
            point: point.to_vec(),
        })
    }

    pub fn layout(&self) -> &Arc<Layout> {
        &self.layout
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> u32 {
        self.layout.order
    }

    fn same_as(&self, other: &JetSpace) -> bool {
        self.layout.dim == other.layout.dim
            && self.layout.order == other.layout.order
            && self
                .point
                .iter()
                .zip(&other.point)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0))
    }
}

#[derive(Clone, Debug)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn zero(space: &Arc<JetSpace>) -> Jet {
        Jet {
            space: space.clone(),
            coeffs: vec![0.0; space.layout.len()],
        }
    }

    pub fn constant(space: &Arc<JetSpace>, c: f64) -> Jet {
        let mut j = Jet::zero(space);
        j.coeffs[0] = c;
        j
    }

    /// The coordinate function x_i.
    pub fn variable(space: &Arc<JetSpace>, i: usize) -> Result<Jet> {
        let dim = space.dim();
        if i >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: i + 1,
            });
        }
        let mut j = Jet::constant(space, space.point[i]);
        if space.order() >= 1 {
            let r = space.layout.rank(&MultiIndex::unit(dim, i)).expect("unit index");
            j.coeffs[r] = 1.0;
        }
        Ok(j)
    }

    pub fn variables(space: &Arc<JetSpace>) -> Vec<Jet> {
        (0..space.dim())
            .map(|i| Jet::variable(space, i).expect("in range"))
            .collect()
    }

    /// Builds a jet from normalized coefficients in layout order.
    pub fn from_coeffs(space: &Arc<JetSpace>, coeffs: Vec<f64>) -> Result<Jet> {
        if coeffs.len() != space.layout.len() {
            return Err(Error::DimensionMismatch {
                expected: space.layout.len(),
                found: coeffs.len(),
            });
        }
        Ok(Jet {
            space: space.clone(),
            coeffs,
        })
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn layout(&self) -> &Layout {
        &self.space.layout
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn order(&self) -> u32 {
        self.space.order()
    }

    pub fn point(&self) -> &[f64] {
        &self.space.point
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Normalized coefficients f^{(ν)}/ν! in layout order.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, nu: &MultiIndex) -> Option<f64> {
        self.layout().rank(nu).map(|i| self.coeffs[i])
    }

    /// The derivative f^{(ν)} = ν! · coefficient.
    pub fn derivative(&self, nu: &MultiIndex) -> Option<f64> {
        self.layout()
            .rank(nu)
            .map(|i| self.coeffs[i] * self.layout().factorials[i])
    }

    /// Derivatives f^{(ν)} in layout order.
    pub fn derivatives(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .zip(&self.layout().factorials)
            .map(|(c, f)| c * f)
            .collect()
    }

    pub fn derivative_table(&self) -> DerivativeTable {
        self.layout()
            .indices
            .iter()
            .cloned()
            .zip(self.derivatives())
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    fn check_compatible(&self, other: &Jet) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space.same_as(&other.space) {
            Ok(())
        } else {
            Err(Error::JetMismatch(format!(
                "base point/order differ: {:?} (order {}) vs {:?} (order {})",
                self.point(),
                self.order(),
                other.point(),
                other.order()
            )))
        }
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut j = self.clone();
        j.coeffs[0] += s;
        j
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Jet) -> Jet {
        let mut out = vec![0.0; self.coeffs.len()];
        for &(i, j, k) in &self.layout().products {
            let a = self.coeffs[i as usize];
            if a != 0.0 {
                out[k as usize] += a * other.coeffs[j as usize];
            }
        }
        Jet {
            space: self.space.clone(),
            coeffs: out,
        }
    }

    /// Σ_k series[k] (self − self(x))^k, i.e. h∘self for a univariate h
    /// whose normalized Taylor coefficients at self(x) are `series`.
    pub fn compose_series(&self, series: &[f64]) -> Jet {
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let r = self.order() as usize;
        let top = series.len().min(r + 1);
        let mut acc = Jet::constant(&self.space, *series.get(top.saturating_sub(1)).unwrap_or(&0.0));
        for k in (0..top.saturating_sub(1)).rev() {
            acc = acc.mul_unchecked(&delta);
            acc.coeffs[0] += series[k];
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let e0 = self.value().exp();
        let mut series = Vec::with_capacity(self.order() as usize + 1);
        let mut fact = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                fact *= k as f64;
            }
            series.push(e0 / fact);
        }
        self.compose_series(&series)
    }

    pub fn reciprocal(&self) -> Result<Jet> {
        let a0 = self.value();
        if a0 == 0.0 || !a0.is_finite() {
            return Err(Error::Domain {
                op: "reciprocal",
                value: a0,
            });
        }
        let mut series = Vec::with_capacity(self.order() as usize + 1);
        let mut term = 1.0 / a0;
        for _ in 0..=self.order() {
            series.push(term);
            term *= -1.0 / a0;
        }
        Ok(self.compose_series(&series))
    }

    /// self^μ for a positive base value.
    pub fn powf(&self, mu: &Exponent) -> Result<Jet> {
        let a0 = self.value();
        if !(a0 > 0.0) || !a0.is_finite() {
            return Err(Error::Domain {
                op: "power",
                value: a0,
            });
        }
        let mut series = Vec::with_capacity(self.order() as usize + 1);
        let mut fact = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                fact *= k as f64;
            }
            let ff = mu.falling_factorial(k);
            series.push(if ff == 0.0 {
                0.0
            } else {
                ff / fact * a0.powf(mu.value() - k as f64)
            });
        }
        Ok(self.compose_series(&series))
    }

    pub fn ln(&self) -> Result<Jet> {
        let a0 = self.value();
        if !(a0 > 0.0) || !a0.is_finite() {
            return Err(Error::Domain { op: "log", value: a0 });
        }
        let mut series = vec![a0.ln()];
        let mut p = 1.0;
        for k in 1..=self.order() {
            p /= a0;
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(sign * p / k as f64);
        }
        Ok(self.compose_series(&series))
    }

    /// Jet of the affine chart y ↦ self(offset + scale·y): the caller builds
    /// `self` at offset + scale·y; this rescales the coefficients into the
    /// y-variables.
    pub fn rescaled(&self, scale: f64, target: &Arc<JetSpace>) -> Result<Jet> {
        if target.layout.dim != self.dim() || target.layout.order != self.order() {
            return Err(Error::JetMismatch("rescale target layout differs".into()));
        }
        let layout = self.layout();
        let mut pows = vec![1.0; self.order() as usize + 1];
        for k in 1..pows.len() {
            pows[k] = pows[k - 1] * scale;
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * pows[layout.totals[i] as usize])
            .collect();
        Ok(Jet {
            space: target.clone(),
            coeffs,
        })
    }
}

/// Jet of x^μ = Π x_i^{μ_i} at a point with positive coordinates, using
/// exact falling factorials: coefficient ν is Π binom(μ_i, ν_i) x_i^{μ_i−ν_i}.
pub fn jet_monomial(mu: &[Exponent], space: &Arc<JetSpace>) -> Result<Jet> {
    let x = space.point();
    if mu.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            found: x.len(),
        });
    }
    for &xi in x {
        if !(xi > 0.0) || !xi.is_finite() {
            return Err(Error::Domain {
                op: "monomial",
                value: xi,
            });
        }
    }
    let r = space.order();
    // per-axis normalized univariate coefficients
    let axis: Vec<Vec<f64>> = mu
        .iter()
        .zip(x)
        .map(|(m, &xi)| {
            let mut fact = 1.0;
            (0..=r)
                .map(|k| {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    let ff = m.falling_factorial(k);
                    if ff == 0.0 {
                        0.0
                    } else {
                        ff / fact * xi.powf(m.value() - k as f64)
                    }
                })
                .collect()
        })
        .collect();
    let coeffs = space
        .layout
        .indices
        .iter()
        .map(|nu| {
            nu.entries()
                .iter()
                .enumerate()
                .map(|(i, &k)| axis[i][k as usize])
                .product()
        })
        .collect();
    Jet::from_coeffs(space, coeffs)
}

/// Jet of f∘g: `outer` is the jet of f at g(x) (dimension d), `inner` are
/// the d component jets of g at x, all sharing one space.
pub fn jet_compose(outer: &Jet, inner: &[Jet]) -> Result<Jet> {
    let d = outer.dim();
    if inner.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: inner.len(),
        });
    }
    let Some(first) = inner.first() else {
        // f is a constant in zero variables; there is no inner space to lift into.
        return Err(Error::JetMismatch("composition needs at least one inner component".into()));
    };
    if outer.order() < first.order() {
        return Err(Error::JetMismatch(format!(
            "outer order {} below inner order {}",
            outer.order(),
            first.order()
        )));
    }
    for (i, g) in inner.iter().enumerate() {
        first.check_compatible(g)?;
        let y = outer.point()[i];
        if (g.value() - y).abs() > 1e-12 * y.abs().max(1.0) {
            return Err(Error::JetMismatch(format!(
                "inner component {i} has value {} but outer base point is {y}",
                g.value()
            )));
        }
    }
    let deltas: Vec<Jet> = inner
        .iter()
        .map(|g| {
            let mut dlt = g.clone();
            dlt.coeffs[0] = 0.0;
            dlt
        })
        .collect();
    let r = first.order();
    let ol = outer.layout();
    let space = first.space.clone();
    let mut result = Jet::zero(&space);
    let mut powers: Vec<Option<Jet>> = Vec::with_capacity(ol.len());
    for (i, lambda_total) in ol.totals.iter().enumerate() {
        if *lambda_total > r {
            break;
        }
        let p = match ol.predecessor[i] {
            None => Jet::constant(&space, 1.0),
            Some((prev, v)) => powers[prev]
                .as_ref()
                .expect("predecessor computed")
                .mul_unchecked(&deltas[v]),
        };
        let c = outer.coeffs[i];
        if c != 0.0 {
            for (acc, t) in result.coeffs.iter_mut().zip(&p.coeffs) {
                *acc += c * t;
            }
        }
        powers.push(Some(p));
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn one_plus_x_times_one_minus_x() {
        let sp = JetSpace::new(&[0.0], 2);
        let x = Jet::variable(&sp, 0).unwrap();
        let p = x.add_scalar(1.0).mul(&x.scale(-1.0).add_scalar(1.0)).unwrap();
        assert_eq!(p.coeffs(), &[1.0, 0.0, -1.0]);
    }

    #[test]
    fn half_powers_multiply_to_identity() {
        let sp = JetSpace::new(&[0.25], 3);
        let h = jet_monomial(&[Exponent::ratio(1, 2)], &sp).unwrap();
        let p = h.mul(&h).unwrap();
        let expect = [0.25, 1.0, 0.0, 0.0];
        for (a, b) in p.coeffs().iter().zip(expect) {
            assert!(close(*a, b, 1e-14), "{a} vs {b}");
        }
    }

    #[test]
    fn monomial_examples() {
        let sp = JetSpace::new(&[0.25], 1);
        let j = jet_monomial(&[Exponent::ratio(1, 2)], &sp).unwrap();
        assert!(close(j.derivative(&MultiIndex::new(vec![1])).unwrap(), 1.0, 1e-14));

        let sp = JetSpace::new(&[0.5, 0.5], 2);
        let j = jet_monomial(&[Exponent::integer(3), Exponent::integer(-1)], &sp).unwrap();
        assert!(close(j.value(), 0.25, 1e-15));

        let sp = JetSpace::new(&[0.5, 0.8], 1);
        let j = jet_monomial(&[Exponent::integer(3), Exponent::integer(-1)], &sp).unwrap();
        assert!(close(j.value(), 0.15625, 1e-15));

        let sp = JetSpace::new(&[0.0], 1);
        assert!(jet_monomial(&[Exponent::ratio(1, 2)], &sp).is_err());
    }

    #[test]
    fn exp_kernel_composition() {
        // exp(1 − 1/x) at 0.5: derivative e^{1−1/x}/x² = 4/e.
        let sp = JetSpace::new(&[0.5], 1);
        let x = Jet::variable(&sp, 0).unwrap();
        let inner = x.reciprocal().unwrap().scale(-1.0).add_scalar(1.0);
        let outer_space = JetSpace::new(&[inner.value()], 1);
        let outer = Jet::variable(&outer_space, 0).unwrap().exp();
        let c = jet_compose(&outer, &[inner]).unwrap();
        let d = c.derivative(&MultiIndex::new(vec![1])).unwrap();
        assert!(close(d, 4.0 / std::f64::consts::E, 1e-12));
        assert!(close(d, 1.471517, 1e-6));
    }

    #[test]
    fn reciprocal_of_identity() {
        let sp = JetSpace::new(&[2.0], 2);
        let r = Jet::variable(&sp, 0).unwrap().reciprocal().unwrap();
        assert_eq!(r.coeffs(), &[0.5, -0.25, 0.125]);
        let z = Jet::zero(&sp);
        assert!(z.reciprocal().is_err());
    }

    #[test]
    fn mismatched_points_rejected() {
        let a = Jet::constant(&JetSpace::new(&[0.1], 2), 1.0);
        let b = Jet::constant(&JetSpace::new(&[0.2], 2), 1.0);
        assert!(a.mul(&b).is_err());
        let c = Jet::constant(&JetSpace::new(&[0.1], 3), 1.0);
        assert!(a.add(&c).is_err());
    }

    #[test]
    fn compose_rejects_mismatched_base() {
        let sp = JetSpace::new(&[0.5], 2);
        let g = Jet::variable(&sp, 0).unwrap();
        let outer = Jet::variable(&JetSpace::new(&[0.7], 2), 0).unwrap();
        assert!(jet_compose(&outer, &[g]).is_err());
    }

    #[test]
    fn rescale_matches_direct_chart() {
        // y ↦ (0.2 + y/4)^3 at y = 0.5 against direct differentiation
        let n = 4.0;
        let x = 0.2 + 0.5 / n;
        let sp = JetSpace::new(&[x], 3);
        let j = jet_monomial(&[Exponent::integer(3)], &sp).unwrap();
        let chart = j.rescaled(1.0 / n, &JetSpace::new(&[0.5], 3)).unwrap();
        let d1 = chart.derivative(&MultiIndex::new(vec![1])).unwrap();
        assert!(close(d1, 3.0 * x * x / n, 1e-14));
        let d3 = chart.derivative(&MultiIndex::new(vec![3])).unwrap();
        assert!(close(d3, 6.0 / (n * n * n), 1e-14));
    }
}
