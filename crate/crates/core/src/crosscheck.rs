//! Cross-checks between independent computation routes: jet composition
//! against the Faà di Bruno sum, and sampled soundness of the mild closure
//! rules.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{jet_compose, jet_eval_expr, ExprNode, Jet, JetSpace};
use crate::mildness::{mild_compose, mild_product, mild_sum, verify_certificate, MildParams, Order};
use crate::multiindex::{FaaDiBrunoPlan, MultiIndex};
use crate::random::ExprGen;
use crate::sweep;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaaComparison {
    pub max_rel_err: f64,
    pub worst_nu: Option<MultiIndex>,
    pub derivatives: usize,
}

/// Relative discrepancy |a − b| / max(|a|, |b|), 0 when both vanish.
pub fn rel_err(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

/// Derivatives of f∘g at x by jet composition and by the Faà di Bruno sum
/// over the same outer and inner derivative tables.
pub fn compare_faa(outer: &ExprNode, inner: &[ExprNode], x: &[f64], plan: &FaaDiBrunoPlan) -> Result<FaaComparison> {
    let order = plan.order();
    let space = JetSpace::new(x, order);
    let inner_jets: Vec<Jet> = inner
        .iter()
        .map(|e| e.eval_jet(&space, &Jet::variables(&space)))
        .collect::<Result<_>>()?;
    let y: Vec<f64> = inner_jets.iter().map(|j| j.value()).collect();
    let outer_jet = jet_eval_expr(outer, &y, order)?;
    let composed = jet_compose(&outer_jet, &inner_jets)?;
    let outer_table = outer_jet.derivative_table();
    let inner_tables: Vec<_> = inner_jets.iter().map(|j| j.derivative_table()).collect();
    let mut worst = (0.0f64, None);
    let mut count = 0;
    for nu in composed.layout().indices().iter().filter(|n| !n.is_zero()) {
        let a = composed.derivative(nu).expect("layout index");
        let b = plan.evaluate(&outer_table, &inner_tables, nu)?;
        let e = rel_err(a, b);
        count += 1;
        if worst.1.is_none() || e > worst.0 {
            worst = (e, Some(nu.clone()));
        }
    }
    Ok(FaaComparison {
        max_rel_err: worst.0,
        worst_nu: worst.1,
        derivatives: count,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaaCase {
    pub seed: u64,
    pub m: usize,
    pub order: u32,
    pub outer: ExprNode,
    pub inner: Vec<ExprNode>,
    pub point: Vec<f64>,
}

/// `count` random cases with m cycling through 1..=max_m and order through
/// 1..=max_order; the outer function has m arguments.
pub fn faa_cases(seed: u64, count: usize, max_m: usize, max_order: u32, depth: u32) -> Vec<FaaCase> {
    let mut g = ExprGen::new(seed);
    (0..count)
        .map(|i| {
            let m = 1 + i % max_m;
            let order = 1 + (i as u32 / max_m as u32) % max_order;
            let point = g.point(m);
            let inner: Vec<ExprNode> = (0..m).map(|_| g.bounded(m, depth, std::slice::from_ref(&point))).collect();
            let y: Vec<f64> = inner.iter().map(|e| e.eval(&point).expect("bounded")).collect();
            let outer = g.bounded(m, depth, &[y]);
            FaaCase {
                seed,
                m,
                order,
                outer,
                inner,
                point,
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FaaSweep {
    pub cases: usize,
    pub derivatives: usize,
    pub max_rel_err: f64,
    pub worst_case: Option<usize>,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn faa_sweep(cases: &[FaaCase], tolerance: f64) -> Result<FaaSweep> {
    let max_m = cases.iter().map(|c| c.m).max().unwrap_or(1);
    let max_order = cases.iter().map(|c| c.order).max().unwrap_or(1);
    let plans: Vec<Vec<FaaDiBrunoPlan>> = (1..=max_m)
        .map(|m| (0..=max_order).map(|r| FaaDiBrunoPlan::new(m, m, r)).collect())
        .collect();
    let results = sweep::map(cases, |c| compare_faa(&c.outer, &c.inner, &c.point, &plans[c.m - 1][c.order as usize]));
    let mut out = FaaSweep {
        cases: cases.len(),
        derivatives: 0,
        max_rel_err: 0.0,
        worst_case: None,
        tolerance,
        pass: true,
    };
    for (i, r) in results.into_iter().enumerate() {
        let r = r?;
        out.derivatives += r.derivatives;
        if out.worst_case.is_none() || r.max_rel_err > out.max_rel_err {
            out.max_rel_err = r.max_rel_err;
            out.worst_case = Some(i);
        }
    }
    out.pass = out.max_rel_err <= tolerance;
    Ok(out)
}

/// Smallest (A, B) for which the jets pass (·, ·, C) on the samples:
/// B = max(1, sup |f|), A = fitted A* at that B, inflated by `slack`.
pub fn fit_params<F>(provider: F, samples: &[Vec<f64>], c: f64, order: u32, slack: f64) -> Result<MildParams>
where
    F: Fn(&[f64]) -> Result<Vec<Jet>> + Sync + Send,
{
    let probe = MildParams::new(1.0, 1.0, c, Order::Finite(order))?;
    let first = verify_certificate(&provider, &probe, samples, order)?;
    let b = first.fitted_b_star.max(1.0);
    let second = verify_certificate(&provider, &MildParams { b, ..probe }, samples, order)?;
    MildParams::new(
        second.fitted_a_star.max(f64::MIN_POSITIVE) * slack,
        b,
        c,
        Order::Finite(order),
    )
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClosureCheck {
    pub f: MildParams,
    pub g: MildParams,
    pub sum: MildParams,
    pub product: MildParams,
    pub composed: MildParams,
    pub components_pass: bool,
    pub sum_pass: bool,
    pub product_pass: bool,
    pub compose_pass: bool,
    #[serde(rename = "compose_fitted_A_star")]
    pub compose_fitted_a_star: f64,
}

/// Checks sum, product and composition rules on f, g_1..g_m: (0,1)^m → ℝ.
/// Component parameters are fitted (f on the image of g), so the component
/// certificates pass by construction and are re-checked anyway.
pub fn closure_check(f: &ExprNode, g: &[ExprNode], samples: &[Vec<f64>], order: u32, c: f64) -> Result<ClosureCheck> {
    let m = g.len();
    if m == 0 || f.arity() > m || g.iter().any(|e| e.arity() > m) {
        return Err(Error::InvalidParameter("f and g must be functions of m variables, g with m components".into()));
    }
    let g_jets = |x: &[f64]| -> Result<Vec<Jet>> {
        let space = JetSpace::new(x, order);
        let vars = Jet::variables(&space);
        g.iter().map(|e| e.eval_jet(&space, &vars)).collect()
    };
    let f_jet = |x: &[f64]| jet_eval_expr(f, x, order);
    let image: Vec<Vec<f64>> = samples
        .iter()
        .map(|x| g.iter().map(|e| e.eval(x)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let slack = 1.0 + 1e-6;
    let pf = fit_params(|x| Ok(vec![f_jet(x)?]), &image, c, order, slack)?;
    let pg = fit_params(g_jets, samples, c, order, slack)?;
    // f on the domain samples too, for the sum and product rules.
    let pf_dom = fit_params(|x| Ok(vec![f_jet(x)?]), samples, c, order, slack)?;
    let pf_both = crate::mildness::unify(&pf, &pf_dom);

    let first = |x: &[f64]| -> Result<Jet> { Ok(g_jets(x)?.remove(0)) };
    let sum = mild_sum(&pf_both, &pg)?;
    let product = mild_product(&pf_both, &pg)?;
    let composed = mild_compose(&pf, &pg, m)?;

    let check = |p: &MildParams, jets: &(dyn Fn(&[f64]) -> Result<Vec<Jet>> + Sync + Send), pts: &[Vec<f64>]| {
        verify_certificate(jets, p, pts, order)
    };
    let comp_f = check(&pf, &|x| Ok(vec![f_jet(x)?]), &image)?.pass
        && check(&pf_dom, &|x| Ok(vec![f_jet(x)?]), samples)?.pass;
    let comp_g = check(&pg, &g_jets, samples)?.pass;
    let sum_pass = check(&sum, &|x| Ok(vec![f_jet(x)?.add(&first(x)?)?]), samples)?.pass;
    let product_pass = check(&product, &|x| Ok(vec![f_jet(x)?.mul(&first(x)?)?]), samples)?.pass;
    let compose_rep = check(
        &composed,
        &|x| {
            let inner = g_jets(x)?;
            let y: Vec<f64> = inner.iter().map(|j| j.value()).collect();
            Ok(vec![jet_compose(&jet_eval_expr(f, &y, order)?, &inner)?])
        },
        samples,
    )?;
    Ok(ClosureCheck {
        f: pf,
        g: pg,
        sum,
        product,
        composed,
        components_pass: comp_f && comp_g,
        sum_pass,
        product_pass,
        compose_pass: compose_rep.pass,
        compose_fitted_a_star: compose_rep.fitted_a_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::midpoint_axis;

    #[test]
    fn faa_agrees_on_random_cases() {
        let cases = faa_cases(11, 12, 2, 4, 3);
        let rep = faa_sweep(&cases, 1e-10).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn closure_rules_hold_on_simple_maps() {
        // f(y) = e^y, g(x) = x^2
        let f = ExprNode::Exp(Box::new(ExprNode::Var(0)));
        let g = vec![ExprNode::Pow {
            exp: crate::jets::Exponent::integer(2),
            arg: Box::new(ExprNode::Var(0)),
        }];
        let samples: Vec<Vec<f64>> = midpoint_axis(8).into_iter().map(|x| vec![x]).collect();
        let rep = closure_check(&f, &g, &samples, 5, 0.0).unwrap();
        assert!(rep.components_pass && rep.sum_pass && rep.product_pass && rep.compose_pass, "{rep:?}");
    }
}
