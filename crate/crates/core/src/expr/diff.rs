use std::collections::{BTreeSet, HashMap, HashSet};

use super::{BinaryOp, Expr, Node, UnaryOp, Var};

/// Unique nodes reachable from `roots`, children before parents.
pub(crate) fn topo_order(roots: &[Expr]) -> Vec<Expr> {
    let mut seen: HashSet<usize> = HashSet::new();
    let mut order = Vec::new();
    // (node, children pushed?)
    let mut stack: Vec<(Expr, bool)> = roots.iter().rev().map(|r| (r.clone(), false)).collect();
    while let Some((e, expanded)) = stack.pop() {
        if expanded {
            order.push(e);
            continue;
        }
        if !seen.insert(e.id()) {
            continue;
        }
        stack.push((e.clone(), true));
        for c in e.children().into_iter().rev() {
            if !seen.contains(&c.id()) {
                stack.push((c.clone(), false));
            }
        }
    }
    order
}

/// Bottom-up rebuild of every node through `f`, which receives the node and
/// its already-mapped children.
fn map_dag(roots: &[Expr], mut f: impl FnMut(&Expr, &[Expr]) -> Expr) -> Vec<Expr> {
    let mut memo: HashMap<usize, Expr> = HashMap::new();
    for e in topo_order(roots) {
        let kids: Vec<Expr> = e.children().iter().map(|c| memo[&c.id()].clone()).collect();
        let mapped = f(&e, &kids);
        memo.insert(e.id(), mapped);
    }
    roots.iter().map(|r| memo[&r.id()].clone()).collect()
}

/// Value-preserving simplification: constant folding, 0/1 identities,
/// `a - a -> 0`, collapse of nested constant factors and terms.
pub fn simplify(e: &Expr) -> Expr {
    map_dag(std::slice::from_ref(e), |node, kids| Expr::rebuild(node.node(), kids))
        .pop()
        .expect("one root")
}

/// Free variables of `e`, in canonical order.
pub fn free_vars(e: &Expr) -> BTreeSet<Var> {
    topo_order(std::slice::from_ref(e))
        .into_iter()
        .filter_map(|n| match n.node() {
            Node::Var(v) => Some(v.clone()),
            _ => None,
        })
        .collect()
}

/// Simultaneous substitution of variables by expressions. Replacement
/// expressions are inserted as-is and never re-substituted.
pub fn substitute(e: &Expr, replacements: &HashMap<Var, Expr>) -> Expr {
    map_dag(std::slice::from_ref(e), |node, kids| match node.node() {
        Node::Var(v) => replacements.get(v).cloned().unwrap_or_else(|| node.clone()),
        other => Expr::rebuild(other, kids),
    })
    .pop()
    .expect("one root")
}

/// Exact partial derivative of `e` with respect to `v`, simplified as it is
/// built.
pub fn differentiate(e: &Expr, v: &Var) -> Expr {
    let mut memo: HashMap<usize, Expr> = HashMap::new();
    for n in topo_order(std::slice::from_ref(e)) {
        let d = |c: &Expr| memo[&c.id()].clone();
        let dn = match n.node() {
            Node::Const(_) => Expr::zero(),
            Node::Var(w) => {
                if w == v {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Unary(op, a) => {
                let da = d(a);
                if da.is_zero() {
                    Expr::zero()
                } else {
                    match op {
                        UnaryOp::Neg => Expr::neg(da),
                        // (sqrt u)' = u' / (2 sqrt u), reusing this node
                        UnaryOp::Sqrt => Expr::div(da, Expr::mul(Expr::constant(2.0), n.clone())),
                        UnaryOp::Exp => Expr::mul(da, n.clone()),
                        UnaryOp::Log => Expr::div(da, a.clone()),
                        UnaryOp::Sin => Expr::mul(da, Expr::cos(a.clone())),
                        UnaryOp::Cos => Expr::neg(Expr::mul(da, Expr::sin(a.clone()))),
                    }
                }
            }
            Node::Binary(op, a, b) => {
                let (da, db) = (d(a), d(b));
                match op {
                    BinaryOp::Add => Expr::add(da, db),
                    BinaryOp::Sub => Expr::sub(da, db),
                    BinaryOp::Mul => Expr::add(Expr::mul(da, b.clone()), Expr::mul(a.clone(), db)),
                    // (a/b)' = (a' - (a/b) b') / b
                    BinaryOp::Div => {
                        if db.is_zero() {
                            Expr::div(da, b.clone())
                        } else {
                            Expr::div(Expr::sub(da, Expr::mul(n.clone(), db)), b.clone())
                        }
                    }
                }
            }
            Node::Pow(a, r) => {
                let da = d(a);
                if da.is_zero() {
                    Expr::zero()
                } else {
                    let coeff = Expr::constant(r.to_f64());
                    let lowered = Expr::pow(a.clone(), r.minus_one());
                    Expr::mul(Expr::mul(coeff, lowered), da)
                }
            }
        };
        memo.insert(n.id(), dn);
    }
    memo[&e.id()].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Bindings};

    fn val(e: &Expr, pairs: &[(&str, f64)]) -> f64 {
        let b = Bindings::from_pairs(pairs.iter().map(|(n, v)| (Var::from_name(n), *v)));
        e.eval(&b).unwrap()
    }

    #[test]
    fn polynomial_rule() {
        let e = parse("y1^2 + y2^2").unwrap();
        let d = differentiate(&e, &Var::Y(1));
        assert_eq!(d, Expr::mul(Expr::constant(2.0), Expr::y(1)));
        assert!(differentiate(&e, &Var::X(1)).is_zero());
    }

    #[test]
    fn sqrt_derivative_matches_central_difference() {
        let e = parse("sqrt(y1^2+y2^2)").unwrap();
        let d = differentiate(&e, &Var::Y(1));
        let exact = val(&d, &[("y1", 3.0), ("y2", 4.0)]);
        assert!((exact - 0.6).abs() < 1e-15);
        let h = 1e-5;
        let fd = (val(&e, &[("y1", 3.0 + h), ("y2", 4.0)]) - val(&e, &[("y1", 3.0 - h), ("y2", 4.0)])) / (2.0 * h);
        assert!((fd - exact).abs() / exact.abs() < 1e-6);
    }

    #[test]
    fn substitution_is_simultaneous() {
        let e = parse("x1*y1").unwrap();
        let mut rep = HashMap::new();
        rep.insert(Var::X(1), parse("x1+t*x1").unwrap());
        rep.insert(Var::Y(1), parse("y1+t*y1").unwrap());
        let s = substitute(&e, &rep);
        let pairs = [("x1", 0.7), ("y1", -1.3), ("t", 0.4)];
        assert!((val(&s, &pairs) - (0.7 * 1.4) * (-1.3 * 1.4)).abs() < 1e-14);
        // the introduced x1 and y1 were not substituted again
        assert_eq!(free_vars(&s).len(), 3);
    }

    #[test]
    fn squared_scaling_substitution() {
        let e = parse("y1^2").unwrap();
        let mut rep = HashMap::new();
        rep.insert(Var::Y(1), parse("2*y1").unwrap());
        let s = simplify(&substitute(&e, &rep));
        assert!((val(&s, &[("y1", 1.5)]) - 4.0 * 2.25).abs() < 1e-14);
    }

    #[test]
    fn cancellation_and_folding() {
        assert!(simplify(&parse("y1 - y1").unwrap()).is_zero());
        let e = simplify(&parse("0 + 1*y1").unwrap());
        assert_eq!(e, Expr::y(1));
        let e = simplify(&parse("2*(3*y1)").unwrap());
        assert_eq!(e, Expr::raw_binary(BinaryOp::Mul, Expr::constant(6.0), Expr::y(1)));
    }

    #[test]
    fn shared_dag_differentiates_in_linear_time() {
        // e_{k+1} = e_k * (e_k + 1) is exponential as a tree, linear as a DAG
        let mut e = parse("y1 + x1").unwrap();
        for _ in 0..60 {
            e = Expr::mul(e.clone(), Expr::add(e.clone(), Expr::one()));
        }
        let d = differentiate(&e, &Var::Y(1));
        assert!(d.dag_size() < 2000);
    }
}
