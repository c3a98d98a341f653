//! Mild derivative bounds |f^{(ν)}| ≤ B·A^{|ν|}·|ν|!^{1+C}, their closure
//! under sum, product and composition, and sampled certificate checks.

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::multiindex::{factorial_f64, indices_up_to, DerivativeTable, FaaDiBrunoPlan, MultiIndex};
use crate::sweep;

/// Ratio slack accepted by every certificate check.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Order {
    Finite(u32),
    Infinite,
}

impl Order {
    pub fn min(self, other: Order) -> Order {
        std::cmp::min(self, other)
    }

    pub fn covers(self, r: u32) -> bool {
        match self {
            Order::Finite(k) => r <= k,
            Order::Infinite => true,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(k) => write!(f, "{k}"),
            Order::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Order::Finite(k) => s.serialize_u32(*k),
            Order::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Order;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a non-negative integer or \"inf\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Order, E> {
                u32::try_from(v).map(Order::Finite).map_err(|_| E::custom("order too large"))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Order, E> {
                u32::try_from(v).map(Order::Finite).map_err(|_| E::custom("order must be >= 0"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Order, E> {
                match v {
                    "inf" | "infinity" | "∞" => Ok(Order::Infinite),
                    _ => v.parse().map(Order::Finite).map_err(|_| E::custom("bad order")),
                }
            }
        }
        d.deserialize_any(V)
    }
}

impl std::str::FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Order> {
        match s.trim() {
            "inf" | "infinity" => Ok(Order::Infinite),
            t => t
                .parse()
                .map(Order::Finite)
                .map_err(|_| Error::Parse(format!("bad order {s:?}"))),
        }
    }
}

fn default_order() -> Order {
    Order::Infinite
}

/// Parameters (A, B, C) of a mild bound, up to an order r (possibly ∞).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MildParams {
    #[serde(rename = "A")]
    pub a: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(default = "default_order")]
    pub order: Order,
}

impl MildParams {
    pub fn new(a: f64, b: f64, c: f64, order: Order) -> Result<Self> {
        let p = MildParams { a, b, c, order };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParameter(format!("A must be positive, got {}", self.a)));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::InvalidParameter(format!("B must be positive, got {}", self.b)));
        }
        if !(self.c >= 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!("C must be non-negative, got {}", self.c)));
        }
        Ok(())
    }

    /// B·A^n·(n!)^{1+C}.
    pub fn bound(&self, n: u32) -> f64 {
        self.b * self.a.powi(n as i32) * factorial_f64(n).powf(1.0 + self.c)
    }

    /// ln of [`MildParams::bound`], safe for large n.
    pub fn ln_bound(&self, n: u32) -> f64 {
        self.b.ln() + n as f64 * self.a.ln() + (1.0 + self.c) * ln_factorial(n)
    }
}

impl fmt::Display for MildParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(A={}, B={}, C={}, r={})", self.a, self.b, self.c, self.order)
    }
}

pub fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Weakens two parameter sets to a common one: max A, B, C and min order.
pub fn unify(p: &MildParams, q: &MildParams) -> MildParams {
    MildParams {
        a: p.a.max(q.a),
        b: p.b.max(q.b),
        c: p.c.max(q.c),
        order: p.order.min(q.order),
    }
}

pub fn mild_sum(f: &MildParams, g: &MildParams) -> Result<MildParams> {
    f.validate()?;
    g.validate()?;
    let u = unify(f, g);
    Ok(MildParams { b: 2.0 * u.b, ..u })
}

pub fn mild_product(f: &MildParams, g: &MildParams) -> Result<MildParams> {
    f.validate()?;
    g.validate()?;
    let u = unify(f, g);
    Ok(MildParams {
        a: 2.0 * u.a,
        b: u.b * u.b,
        ..u
    })
}

/// Parameters of f∘g where g has `m` components, each satisfying `g`.
/// Only C and the order are unified; the result is
/// (A_g(m·B_g·A_f + 1)^{1+C}, B_f, C).
pub fn mild_compose(f: &MildParams, g: &MildParams, m: usize) -> Result<MildParams> {
    f.validate()?;
    g.validate()?;
    if m == 0 {
        return Err(Error::InvalidParameter("composition needs m >= 1".into()));
    }
    let c = f.c.max(g.c);
    let a = g.a * (m as f64 * g.b * f.a + 1.0).powf(1.0 + c);
    Ok(MildParams {
        a,
        b: f.b,
        c,
        order: f.order.min(g.order),
    })
}

/// Closed form of the composed-majorant sum:
/// (m A1 B1 B2)/(m A1 B2 + 1) · (A2(m A1 B2 + 1))^{|ν|} |ν|!.
pub fn lemma_ab_closed_form(a1: f64, b1: f64, a2: f64, b2: f64, m: usize, nu: &MultiIndex) -> f64 {
    let n = nu.total();
    let k = m as f64 * a1 * b2;
    k * b1 / (k + 1.0) * (a2 * (k + 1.0)).powi(n as i32) * factorial_f64(n)
}

/// The same sum evaluated term by term: the composition formula applied to
/// the majorants f^{(λ)} = B1 A1^{|λ|}|λ|! (λ ∈ ℕ^m) and
/// g_i^{(l)} = B2 A2^{|l|}|l|!.
pub fn lemma_ab_brute_force(a1: f64, b1: f64, a2: f64, b2: f64, m: usize, nu: &MultiIndex) -> Result<f64> {
    let plan = FaaDiBrunoPlan::new(m, nu.dim(), nu.total());
    lemma_ab_brute_force_with(&plan, a1, b1, a2, b2, m, nu)
}

pub fn lemma_ab_brute_force_with(
    plan: &FaaDiBrunoPlan,
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
    m: usize,
    nu: &MultiIndex,
) -> Result<f64> {
    let r = nu.total();
    let outer: DerivativeTable = indices_up_to(m, r)
        .into_iter()
        .map(|l| {
            let n = l.total();
            (l, b1 * a1.powi(n as i32) * factorial_f64(n))
        })
        .collect();
    let inner_table: DerivativeTable = indices_up_to(nu.dim(), r)
        .into_iter()
        .map(|l| {
            let n = l.total();
            (l, b2 * a2.powi(n as i32) * factorial_f64(n))
        })
        .collect();
    let inner = vec![inner_table; m];
    plan.evaluate(&outer, &inner, nu)
}

/// Outcome of checking sampled jets against a mild certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub params: MildParams,
    pub order: u32,
    pub samples: usize,
    pub excluded: usize,
    /// max |f^{(ν)}| / (B A^{|ν|} |ν|!^{1+C}) over samples, components, ν.
    pub worst_ratio: f64,
    pub worst_nu: Option<MultiIndex>,
    pub worst_point: Option<Vec<f64>>,
    pub worst_component: Option<usize>,
    /// Smallest A that would make every |ν| ≥ 1 check pass with the given B, C.
    #[serde(rename = "fitted_A_star")]
    pub fitted_a_star: f64,
    /// max |f| over samples.
    #[serde(rename = "fitted_B_star")]
    pub fitted_b_star: f64,
    pub pass: bool,
    pub note: String,
}

#[derive(Clone, Debug)]
struct SampleWorst {
    ratio: f64,
    nu: usize,
    component: usize,
    a_star: f64,
    b_star: f64,
}

/// Checks the certificate on every sample and every component of the
/// provider's output for all |ν| ≤ `order`. Points where the provider
/// reports [`Error::Excluded`], or returns non-finite jets, are skipped and
/// counted; any other error aborts.
pub fn verify_certificate<F>(
    provider: F,
    params: &MildParams,
    samples: &[Vec<f64>],
    order: u32,
) -> Result<VerificationReport>
where
    F: Fn(&[f64]) -> Result<Vec<Jet>> + Sync + Send,
{
    params.validate()?;
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !params.order.covers(order) {
        return Err(Error::InvalidParameter(format!(
            "requested order {order} exceeds certificate order {}",
            params.order
        )));
    }
    let ln_b = params.b.ln();
    let ln_a = params.a.ln();
    let exponent = 1.0 + params.c;

    let per_sample: Vec<Result<Option<SampleWorst>>> = sweep::map(samples, |x| {
        let jets = match provider(x) {
            Ok(j) => j,
            Err(Error::Excluded(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        if jets.iter().any(|j| !j.is_finite()) {
            return Ok(None);
        }
        let mut worst = SampleWorst {
            ratio: 0.0,
            nu: 0,
            component: 0,
            a_star: 0.0,
            b_star: 0.0,
        };
        for (ci, jet) in jets.iter().enumerate() {
            if jet.order() < order {
                return Err(Error::JetMismatch(format!(
                    "provider jet has order {} < {order}",
                    jet.order()
                )));
            }
            let layout = jet.layout();
            for (i, d) in jet.derivatives().into_iter().enumerate() {
                let n = layout.total(i);
                if n > order {
                    break;
                }
                let ad = d.abs();
                if ad == 0.0 {
                    continue;
                }
                let ln_d = ad.ln();
                let ln_fact = ln_factorial(n);
                let ratio = (ln_d - ln_b - n as f64 * ln_a - exponent * ln_fact).exp();
                if ratio > worst.ratio {
                    worst.ratio = ratio;
                    worst.nu = i;
                    worst.component = ci;
                }
                if n == 0 {
                    worst.b_star = worst.b_star.max(ad);
                } else {
                    let a = ((ln_d - ln_b - exponent * ln_fact) / n as f64).exp();
                    worst.a_star = worst.a_star.max(a);
                }
            }
        }
        Ok(Some(worst))
    });

    let mut report = VerificationReport {
        params: *params,
        order,
        samples: samples.len(),
        excluded: 0,
        worst_ratio: 0.0,
        worst_nu: None,
        worst_point: None,
        worst_component: None,
        fitted_a_star: 0.0,
        fitted_b_star: 0.0,
        pass: false,
        note: String::new(),
    };
    let mut evaluated = 0usize;
    for (x, res) in samples.iter().zip(per_sample) {
        match res? {
            None => report.excluded += 1,
            Some(w) => {
                evaluated += 1;
                report.fitted_a_star = report.fitted_a_star.max(w.a_star);
                report.fitted_b_star = report.fitted_b_star.max(w.b_star);
                if report.worst_nu.is_none() || w.ratio > report.worst_ratio {
                    report.worst_ratio = w.ratio;
                    report.worst_point = Some(x.clone());
                    report.worst_component = Some(w.component);
                    let dim = x.len();
                    report.worst_nu = Some(crate::jets::Layout::get(dim, order).indices()[w.nu].clone());
                }
            }
        }
    }
    report.pass = evaluated > 0 && report.worst_ratio <= 1.0 + CERTIFICATE_TOLERANCE;
    report.note = format!(
        "verified at {evaluated} samples ({} excluded)",
        report.excluded
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::{jet_monomial, Exponent, JetSpace};

    fn p(a: f64, b: f64, c: f64) -> MildParams {
        MildParams::new(a, b, c, Order::Infinite).unwrap()
    }

    fn triple(q: MildParams) -> (f64, f64, f64) {
        (q.a, q.b, q.c)
    }

    #[test]
    fn sum_and_product_examples() {
        assert_eq!(triple(mild_sum(&p(1., 1., 0.), &p(1., 1., 0.)).unwrap()), (1., 2., 0.));
        assert_eq!(triple(mild_sum(&p(2., 1., 0.), &p(1., 3., 1.)).unwrap()), (2., 6., 1.));
        assert_eq!(triple(mild_product(&p(1., 1., 0.), &p(1., 1., 0.)).unwrap()), (2., 1., 0.));
        assert_eq!(triple(mild_product(&p(1., 2., 0.), &p(1., 2., 0.)).unwrap()), (2., 4., 0.));
        assert_eq!(triple(mild_product(&p(3., 1., 1.), &p(1., 1., 1.)).unwrap()), (6., 1., 1.));
    }

    #[test]
    fn compose_examples() {
        assert_eq!(triple(mild_compose(&p(1., 1., 0.), &p(1., 1., 0.), 1).unwrap()), (2., 1., 0.));
        let f = p(3., 5., 1.);
        let g = p(1., 2., 1.);
        assert_eq!(triple(mild_compose(&f, &g, 2).unwrap()), (169., 5., 1.));
        assert!(mild_compose(&f, &g, 0).is_err());
        assert!(MildParams::new(-1., 1., 0., Order::Infinite).is_err());
        assert!(MildParams::new(1., 1., -0.5, Order::Infinite).is_err());
    }

    #[test]
    fn orders_take_minimum() {
        let f = MildParams::new(1., 1., 0., Order::Finite(3)).unwrap();
        let g = MildParams::new(1., 1., 0., Order::Infinite).unwrap();
        assert_eq!(mild_sum(&f, &g).unwrap().order, Order::Finite(3));
    }

    #[test]
    fn lemma_ab_small_cases() {
        let nu = MultiIndex::new(vec![2]);
        assert!((lemma_ab_closed_form(1., 1., 1., 1., 1, &nu) - 4.0).abs() < 1e-12);
        assert!((lemma_ab_brute_force(1., 1., 1., 1., 1, &nu).unwrap() - 4.0).abs() < 1e-12);
        // ν in two variables, one outer function: (1/2)·2²·2
        let nu = MultiIndex::new(vec![1, 1]);
        assert!((lemma_ab_closed_form(1., 1., 1., 1., 1, &nu) - 4.0).abs() < 1e-12);
        assert!((lemma_ab_brute_force(1., 1., 1., 1., 1, &nu).unwrap() - 4.0).abs() < 1e-12);
        // two outer variables: (2/3)·3²·2
        assert!((lemma_ab_closed_form(1., 1., 1., 1., 2, &nu) - 12.0).abs() < 1e-12);
        assert!((lemma_ab_brute_force(1., 1., 1., 1., 2, &nu).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn constant_passes() {
        let params = p(1., 1., 0.);
        let samples = crate::grid::clustered_grid(1, 10);
        let rep = verify_certificate(
            |x| {
                let sp = JetSpace::new(x, 4);
                Ok(vec![Jet::constant(&sp, 0.5)])
            },
            &params,
            &samples,
            4,
        )
        .unwrap();
        assert!(rep.pass);
        assert_eq!(rep.fitted_a_star, 0.0);
    }

    #[test]
    fn half_integer_power_fails_near_zero() {
        // x^{r/2} for odd r: the r-th derivative blows up at 0.
        for r in [3u32, 5, 7] {
            let params = MildParams::new(10.0, 1.0, 0.0, Order::Finite(r)).unwrap();
            let samples = crate::grid::clustered_grid(1, 32);
            let mu = [Exponent::ratio(r as i64, 2)];
            let rep = verify_certificate(
                |x| Ok(vec![jet_monomial(&mu, &JetSpace::new(x, r))?]),
                &params,
                &samples,
                r,
            )
            .unwrap();
            assert!(!rep.pass, "r = {r}");
            assert_eq!(rep.worst_nu.unwrap().total(), r);
        }
    }

    #[test]
    fn empty_samples_rejected() {
        let params = p(1., 1., 0.);
        let r = verify_certificate(|_| Ok(vec![]), &params, &[], 1);
        assert!(matches!(r, Err(Error::EmptySamples)));
    }
}
