//! Fixed values and independent numeric oracles (finite differences, closed
//! forms worked out by hand) for the jet, substitution and bound machinery.

use mildlab::geometry::{fixtures, BoundedMonomial, Cell, PreparedFunction, Wall};
use mildlab::jets::{jet_compose, jet_eval_expr, Exponent, ExprNode, Jet, JetSpace};
use mildlab::mildness::{verify_certificate, MildParams, Order};
use mildlab::multiindex::{faa_di_bruno, DerivativeTable, MultiIndex};
use mildlab::random::ExprGen;
use mildlab::substitution::{
    exp_kernel_bound, sup_inequality, verify_main_crpara, verify_main_mildpara, ChartMap, GraphChart, Kernel,
    Substitution,
};
use std::f64::consts::E;

fn mi(v: &[u32]) -> MultiIndex {
    MultiIndex::new(v.to_vec())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn var(i: usize) -> ExprNode {
    ExprNode::Var(i)
}

fn exp(e: ExprNode) -> ExprNode {
    ExprNode::Exp(Box::new(e))
}

fn pow(e: ExprNode, p: i64, q: i64) -> ExprNode {
    ExprNode::Pow {
        exp: Exponent::ratio(p, q),
        arg: Box::new(e),
    }
}

#[test]
fn faa_square_of_square() {
    // f(y) = y², g(x) = x² at 1: (x⁴)''' = 24x.
    let mut outer = DerivativeTable::new();
    for (k, v) in [(0, 1.0), (1, 2.0), (2, 2.0), (3, 0.0)] {
        outer.insert(mi(&[k]), v);
    }
    let mut inner = DerivativeTable::new();
    for (k, v) in [(0, 1.0), (1, 2.0), (2, 2.0), (3, 0.0)] {
        inner.insert(mi(&[k]), v);
    }
    assert_eq!(faa_di_bruno(&outer, &[inner], &mi(&[3])).unwrap(), 24.0);
}

#[test]
fn faa_exp_of_exp_is_bell_weighted() {
    // d⁴/dx⁴ e^{e^x} at 0 = e·B₄ = 15e.
    let jet = jet_eval_expr(&exp(exp(var(0))), &[0.0], 4).unwrap();
    assert!(close(jet.derivative(&mi(&[4])).unwrap(), 15.0 * E, 1e-12));
    let inner = jet_eval_expr(&exp(var(0)), &[0.0], 4).unwrap();
    let outer = jet_eval_expr(&exp(var(0)), &[1.0], 4).unwrap();
    let v = faa_di_bruno(&outer.derivative_table(), &[inner.derivative_table()], &mi(&[4])).unwrap();
    assert!(close(v, 15.0 * E, 1e-12));
}

#[test]
fn faa_first_order_is_chain_rule() {
    // f(y1, y2) = y1·y2², g = (x1 + x2², e^{x1}) at (0.3, 0.7).
    let f = ExprNode::Mul(vec![var(0), pow(var(1), 2, 1)]);
    let g = [ExprNode::Add(vec![var(0), pow(var(1), 2, 1)]), exp(var(0))];
    let x = [0.3, 0.7];
    let space = JetSpace::new(&x, 1);
    let vars = Jet::variables(&space);
    let inner: Vec<Jet> = g.iter().map(|e| e.eval_jet(&space, &vars).unwrap()).collect();
    let y = [inner[0].value(), inner[1].value()];
    let outer = jet_eval_expr(&f, &y, 1).unwrap();
    let tables: Vec<_> = inner.iter().map(|j| j.derivative_table()).collect();
    let v = faa_di_bruno(&outer.derivative_table(), &tables, &mi(&[1, 0])).unwrap();
    let chain = y[1] * y[1] * 1.0 + 2.0 * y[0] * y[1] * x[0].exp();
    assert!(close(v, chain, 1e-14));
}

/// Central differences of order 1 and 2 against jet derivatives on random
/// expressions.
#[test]
fn jets_match_finite_differences() {
    let mut g = ExprGen::new(99);
    let h = 1e-4;
    for _ in 0..40 {
        let m = 2;
        let x = g.point(m);
        let e = g.bounded(m, 3, std::slice::from_ref(&x));
        let jet = jet_eval_expr(&e, &x, 2).unwrap();
        let f = |p: &[f64]| e.eval(p).unwrap();
        for i in 0..m {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let d1 = (f(&xp) - f(&xm)) / (2.0 * h);
            let d2 = (f(&xp) - 2.0 * f(&x) + f(&xm)) / (h * h);
            let mut nu = vec![0; m];
            nu[i] = 1;
            let j1 = jet.derivative(&mi(&nu)).unwrap();
            nu[i] = 2;
            let j2 = jet.derivative(&mi(&nu)).unwrap();
            let scale = f(&x).abs().max(1.0);
            assert!((d1 - j1).abs() <= 1e-5 * scale.max(j1.abs()), "{e:?} d1 {d1} vs {j1}");
            assert!((d2 - j2).abs() <= 1e-3 * scale.max(j2.abs()), "{e:?} d2 {d2} vs {j2}");
        }
    }
}

#[test]
fn jet_compose_identity_inner_is_noop() {
    let outer = jet_eval_expr(&exp(pow(var(0), 1, 2)), &[0.4], 5).unwrap();
    let space = outer.space().clone();
    let id = Jet::variables(&space);
    let back = jet_compose(&outer, &id).unwrap();
    for (a, b) in outer.coeffs().iter().zip(back.coeffs()) {
        assert!(close(*a, *b, 1e-14));
    }
}

#[test]
fn exp_kernel_first_derivative_by_hand() {
    // d/dx e^{1−1/x} = x^{−2}e^{1−1/x}; at 0.5 this is 4/e.
    let space = JetSpace::new(&[0.5], 1);
    let j = Kernel::Exp(1.0).apply(&Jet::variables(&space)[0]).unwrap();
    assert!(close(j.derivative(&mi(&[1])).unwrap(), 4.0 / E, 1e-14));
    assert!(close(exp_kernel_bound(1.0, 1, 0.5), 8.0 / E, 1e-12));
    assert!(close(exp_kernel_bound(1.0, 0, 0.3), (1.0f64 - 1.0 / 0.3).exp(), 1e-12));
    // κ = 2, ν = 2 at 0.7
    let space = JetSpace::new(&[0.7], 2);
    let j = Kernel::Exp(2.0).apply(&Jet::variables(&space)[0]).unwrap();
    assert!(j.derivative(&mi(&[2])).unwrap().abs() <= exp_kernel_bound(2.0, 2, 0.7));
}

#[test]
fn sup_inequality_kappa_two_order_three() {
    let rep = sup_inequality(2.0, 3).unwrap();
    assert!(rep.pass && rep.lhs_sup <= rep.rhs * (1.0 + 1e-9), "{rep:?}");
}

#[test]
fn phi_r_on_cube_is_power_map() {
    let sub = Substitution::phi_r(Cell::unit_cube(2), 2).unwrap();
    let p = Substitution::power_map(2, 2).unwrap();
    let a = sub.jets(&[0.5, 0.5], 3).unwrap();
    let b = p.jets(&[0.5, 0.5], 3).unwrap();
    assert_eq!(a[0].value(), 0.25);
    assert_eq!(a[1].value(), 0.25);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.coeffs(), y.coeffs());
    }
}

fn cusp_cell() -> Cell {
    fixtures::cusp().resolve(&[]).unwrap().cells[0].clone()
}

#[test]
fn phi_one_on_cusp_cell() {
    let sub = Substitution::phi_r(cusp_cell(), 1).unwrap();
    let v = sub.jets(&[0.25, 0.5], 0).unwrap();
    assert!(close(v[0].value(), 0.25, 1e-15));
    assert!(close(v[1].value(), 0.5625, 1e-15));
}

#[test]
fn phi_inf_value_at_half() {
    let sub = Substitution::phi_inf(Cell::unit_cube(1), 1.0).unwrap();
    let v = sub.jets(&[0.5], 0).unwrap();
    assert!(close(v[0].value(), (-1.0f64).exp(), 1e-15));
}

/// A three-variable cell with walls depending on earlier coordinates.
fn nested_cell() -> Cell {
    let mono = |c: f64, e: &[i64]| {
        PreparedFunction::monomial(c, e.iter().map(|&k| Exponent::integer(k)).collect(), 1.0).unwrap()
    };
    Cell::new(vec![
        Wall {
            lower: PreparedFunction::constant(0.0, 0),
            upper: PreparedFunction::constant(1.0, 0),
        },
        Wall {
            lower: mono(0.5, &[1]),
            upper: PreparedFunction::constant(1.0, 1),
        },
        Wall {
            lower: mono(0.25, &[1, 1]),
            upper: mono(0.9, &[0, 0]),
        },
    ])
    .unwrap()
}

#[test]
fn recursion_identity_up_to_three_variables() {
    for (cell, x) in [
        (Cell::unit_cube(1), vec![0.3]),
        (cusp_cell(), vec![0.4, 0.6]),
        (nested_cell(), vec![0.3, 0.5, 0.7]),
    ] {
        for r in 1..=4 {
            let sub = Substitution::phi_r(cell.clone(), r).unwrap();
            let err = sub.recursion_identity_error(&x, 4).unwrap();
            assert!(err < 1e-12, "r={r} x={x:?}: {err}");
        }
    }
}

/// Stage jets against central differences of the plain map values.
#[test]
fn substitution_jets_match_finite_differences() {
    let h = 1e-5;
    for kernel in [Kernel::Power(3), Kernel::Exp(1.0), Kernel::Exp(0.5)] {
        let sub = Substitution::new(nested_cell(), kernel).unwrap();
        let x = [0.55, 0.6, 0.7];
        let jets = sub.jets(&x, 1).unwrap();
        let val = |p: &[f64]| -> Vec<f64> { sub.jets(p, 0).unwrap().iter().map(|j| j.value()).collect() };
        for i in 0..3 {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let (fp, fm) = (val(&xp), val(&xm));
            for c in 0..3 {
                let fd = (fp[c] - fm[c]) / (2.0 * h);
                let mut nu = vec![0; 3];
                nu[i] = 1;
                let d = jets[c].derivative(&mi(&nu)).unwrap();
                assert!((fd - d).abs() <= 1e-6 * d.abs().max(1.0), "{kernel:?} c={c} i={i}: {fd} vs {d}");
            }
        }
    }
}

#[test]
fn square_root_through_fourth_power_is_polynomial() {
    // √x ∘ x⁴ = x², every derivative ratio is tiny.
    let f = PreparedFunction::monomial(1.0, vec![Exponent::ratio(1, 2)], 1.0).unwrap();
    let chart = GraphChart::new(Substitution::phi_r(Cell::unit_cube(1), 4).unwrap(), vec![f]);
    let grid = mildlab::grid::clustered_grid(1, 64);
    let rep = verify_main_crpara("sqrt", &chart, 4, &grid, 1.0, None).unwrap();
    assert!(rep.pass && rep.fitted_a_normalised <= 1.0, "{rep:?}");
}

#[test]
fn constant_function_is_mild_for_any_kappa() {
    for kappa in [0.5, 1.0, 3.0] {
        let chart = GraphChart::new(
            Substitution::phi_inf(Cell::unit_cube(1), kappa).unwrap(),
            vec![PreparedFunction::constant(0.5, 1)],
        );
        let grid = mildlab::grid::clustered_grid(1, 32);
        let rep = verify_main_mildpara("const", &chart, kappa, &grid, 6, 8.0, None).unwrap();
        assert!(rep.pass, "kappa {kappa}: {rep:?}");
    }
}

#[test]
fn quotient_rule_for_unit_factor() {
    // x/(1+x) as b = x with unit 1/(1+y): derivative 1/(1+x)² = 4/9 at 1/2.
    let f = PreparedFunction::new(
        vec![BoundedMonomial::new(1.0, vec![Exponent::integer(1)], 1.0).unwrap()],
        0,
        ExprNode::Recip(Box::new(ExprNode::Add(vec![ExprNode::Const(1.0), var(0)]))),
        MildParams::new(1.0, 1.0, 0.0, Order::Infinite).unwrap(),
        None,
    )
    .unwrap();
    let j = f.jet(&[0.5], 1).unwrap();
    assert!(close(j.derivative(&mi(&[1])).unwrap(), 4.0 / 9.0, 1e-14));
}

#[test]
fn cusp_fixture_value() {
    let f = &fixtures::cusp().resolve(&[]).unwrap().functions[0].function;
    assert!(close(f.jet(&[0.5, 0.8], 0).unwrap().value(), 0.15625, 1e-15));
}

#[test]
fn half_power_certificate_fails_near_zero() {
    let r = 3;
    let f = ExprNode::Pow {
        exp: Exponent::ratio(r as i64, 2),
        arg: Box::new(var(0)),
    };
    let params = MildParams::new(5.0, 5.0, 0.0, Order::Finite(r)).unwrap();
    let grid = mildlab::grid::clustered_grid(1, 64);
    let rep = verify_certificate(|x| Ok(vec![jet_eval_expr(&f, x, r)?]), &params, &grid, r).unwrap();
    assert!(!rep.pass);
}
