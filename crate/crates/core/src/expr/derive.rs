//! Symbolic differentiation. The constructors below apply constant folding
//! and the 0/1 identities, nothing more.

use super::parser::{fold_binary, fold_call, fold_neg};
use super::{BinOp, Func, Node};

fn is_zero(n: &Node) -> bool {
    n.as_const() == Some(0.0)
}

fn is_one(n: &Node) -> bool {
    n.as_const() == Some(1.0)
}

fn konst(c: f64) -> Node {
    Node::Const(c)
}

fn add(a: Node, b: Node) -> Node {
    if is_zero(&a) {
        b
    } else if is_zero(&b) {
        a
    } else {
        fold_binary(BinOp::Add, a, b)
    }
}

fn sub(a: Node, b: Node) -> Node {
    if is_zero(&b) {
        a
    } else if is_zero(&a) {
        neg(b)
    } else {
        fold_binary(BinOp::Sub, a, b)
    }
}

fn mul(a: Node, b: Node) -> Node {
    if is_zero(&a) || is_zero(&b) {
        konst(0.0)
    } else if is_one(&a) {
        b
    } else if is_one(&b) {
        a
    } else {
        fold_binary(BinOp::Mul, a, b)
    }
}

fn div(a: Node, b: Node) -> Node {
    if is_zero(&a) {
        konst(0.0)
    } else if is_one(&b) {
        a
    } else {
        fold_binary(BinOp::Div, a, b)
    }
}

fn pow(a: Node, b: Node) -> Node {
    if is_one(&b) {
        a
    } else if is_zero(&b) {
        konst(1.0)
    } else {
        fold_binary(BinOp::Pow, a, b)
    }
}

fn neg(a: Node) -> Node {
    match a {
        Node::Neg(inner) => *inner,
        other => fold_neg(other),
    }
}

fn call(f: Func, a: Node) -> Node {
    fold_call(f, a)
}

/// ∂node/∂(variable `var`).
pub(super) fn derivative(node: &Node, var: usize) -> Node {
    match node {
        Node::Const(_) => konst(0.0),
        Node::Var(i) => konst(if *i == var { 1.0 } else { 0.0 }),
        Node::Neg(a) => neg(derivative(a, var)),
        Node::Binary(op, a, b) => {
            let (a, b) = (a.as_ref(), b.as_ref());
            let da = derivative(a, var);
            let db = derivative(b, var);
            match op {
                BinOp::Add => add(da, db),
                BinOp::Sub => sub(da, db),
                BinOp::Mul => add(mul(da, b.clone()), mul(a.clone(), db)),
                BinOp::Div => {
                    if is_zero(&db) {
                        div(da, b.clone())
                    } else {
                        // (a'b − ab')/b²
                        div(
                            sub(mul(da, b.clone()), mul(a.clone(), db)),
                            pow(b.clone(), konst(2.0)),
                        )
                    }
                }
                BinOp::Pow => {
                    let power = pow(a.clone(), b.clone());
                    match (is_zero(&da), is_zero(&db)) {
                        (true, true) => konst(0.0),
                        // d(a^c) = c·a^(c−1)·a'
                        (false, true) => mul(
                            mul(b.clone(), pow(a.clone(), sub(b.clone(), konst(1.0)))),
                            da,
                        ),
                        // d(c^b) = c^b·ln(c)·b'
                        (true, false) => mul(mul(power, call(Func::Log, a.clone())), db),
                        // d(a^b) = a^b·(b'·ln a + b·a'/a)
                        (false, false) => mul(
                            power,
                            add(
                                mul(db, call(Func::Log, a.clone())),
                                div(mul(b.clone(), da), a.clone()),
                            ),
                        ),
                    }
                }
            }
        }
        Node::Call(f, a) => {
            let da = derivative(a, var);
            if is_zero(&da) {
                return konst(0.0);
            }
            let a = a.as_ref().clone();
            let outer = match f {
                Func::Sin => call(Func::Cos, a),
                Func::Cos => neg(call(Func::Sin, a)),
                Func::Exp => call(Func::Exp, a),
                Func::Log => div(konst(1.0), a),
                Func::Sqrt => div(konst(0.5), call(Func::Sqrt, a)),
                Func::Abs => call(Func::Sign, a),
                // sign is piecewise constant; its derivative is 0 away from 0.
                Func::Sign => return konst(0.0),
            };
            mul(outer, da)
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::Expression;

    const TX: &[&str] = &["tau", "x"];

    fn d(src: &str, var: &str) -> Expression {
        Expression::parse(src, TX).unwrap().differentiate(var).unwrap()
    }

    #[test]
    fn table_rules() {
        assert_eq!(d("sin(x)", "x").to_string(), "cos(x)");
        assert_eq!(d("x", "tau").to_string(), "0.0");
        assert_eq!(d("x^3", "x").to_string(), "3.0*x^2.0");
    }

    #[test]
    fn product_with_exponential_matches_hand_derivative() {
        let e = d("x*exp(tau*x)", "x");
        let (tau, x) = (0.3_f64, 0.7_f64);
        let expected = (tau * x).exp() + tau * x * (tau * x).exp();
        assert!((e.eval(&[tau, x]).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn abs_derivative_uses_sign() {
        let e = d("abs(x)", "x");
        assert_eq!(e.eval(&[0.0, -2.0]).unwrap(), -1.0);
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn general_power_rule() {
        let e = d("x^tau", "x");
        assert!((e.eval(&[2.0, 3.0]).unwrap() - 6.0).abs() < 1e-14);
        let e = d("x^tau", "tau");
        assert!((e.eval(&[2.0, 3.0]).unwrap() - 9.0 * 3f64.ln()).abs() < 1e-13);
        let e = d("2^x", "x");
        assert!((e.eval(&[0.0, 1.0]).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-14);
    }
}
