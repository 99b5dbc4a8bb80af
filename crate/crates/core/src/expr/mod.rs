//! Scalar arithmetic expressions with exact symbolic differentiation.
//!
//! Expressions are parsed against a declared list of variable names, e.g.
//! `["tau", "x"]` for a right-hand side or `["xi"]` for a history
//! derivative. See the crate README for the grammar.

mod derive;
mod parser;

use std::fmt;

use thiserror::Error;

pub use parser::ParseError;

/// Built-in single-argument functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Abs,
    /// sign(u) ∈ {−1, 0, 1}; produced by differentiating `abs`.
    Sign,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sign => "sign",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            "sign" => Func::Sign,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div => a / b,
            BinOp::Pow => pow(a, b),
        }
    }
}

/// Expression tree node. Variables are referenced by index into the
/// variable list of the owning [`Expression`].
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Binary(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("expected {expected} variable values, got {got}")]
    Arity { expected: usize, got: usize },
}

fn pow(a: f64, b: f64) -> f64 {
    if b.fract() == 0.0 && b.abs() <= i32::MAX as f64 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

impl Node {
    pub fn is_const(&self) -> bool {
        matches!(self, Node::Const(_))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    fn eval(&self, vars: &[f64]) -> Result<f64, EvalError> {
        let v = match self {
            Node::Const(c) => *c,
            Node::Var(i) => vars[*i],
            Node::Neg(a) => -a.eval(vars)?,
            Node::Binary(op, a, b) => {
                let (x, y) = (a.eval(vars)?, b.eval(vars)?);
                match op {
                    BinOp::Div if y == 0.0 => {
                        return Err(EvalError::Domain("division by zero".into()));
                    }
                    BinOp::Pow if x < 0.0 && y.fract() != 0.0 => {
                        return Err(EvalError::Domain(format!(
                            "negative base {x} raised to non-integer power {y}"
                        )));
                    }
                    BinOp::Pow if x == 0.0 && y < 0.0 => {
                        return Err(EvalError::Domain(format!("zero raised to negative power {y}")));
                    }
                    _ => {}
                }
                op.apply(x, y)
            }
            Node::Call(f, a) => {
                let x = a.eval(vars)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(EvalError::Domain(format!("log of nonpositive value {x}")));
                        }
                        x.ln()
                    }
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(EvalError::Domain(format!("sqrt of negative value {x}")));
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                    Func::Sign => {
                        if x == 0.0 {
                            log::warn!("derivative of abs evaluated at 0; using subgradient 0");
                            0.0
                        } else {
                            x.signum()
                        }
                    }
                }
            }
        };
        if !v.is_finite() {
            return Err(EvalError::Domain(format!("non-finite result in `{}`", NodeDisplay::bare(self))));
        }
        Ok(v)
    }

    fn contains_var(&self, var: usize) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var(i) => *i == var,
            Node::Neg(a) | Node::Call(_, a) => a.contains_var(var),
            Node::Binary(_, a, b) => a.contains_var(var) || b.contains_var(var),
        }
    }
}

/// A parsed expression together with its declared variable names.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    root: Node,
    vars: Vec<String>,
}

impl Expression {
    /// Parse `src` with the given variable names.
    pub fn parse(src: &str, vars: &[&str]) -> Result<Self, ParseError> {
        let root = parser::parse(src, vars)?;
        Ok(Self { root, vars: vars.iter().map(|s| s.to_string()).collect() })
    }

    pub fn from_node(root: Node, vars: Vec<String>) -> Self {
        Self { root, vars }
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    /// Evaluate with positional variable values (same order as [`Self::vars`]).
    pub fn eval(&self, values: &[f64]) -> Result<f64, EvalError> {
        if values.len() != self.vars.len() {
            return Err(EvalError::Arity { expected: self.vars.len(), got: values.len() });
        }
        self.root.eval(values)
    }

    /// Evaluate with named bindings; every declared variable must be bound.
    pub fn eval_named(&self, bindings: &[(&str, f64)]) -> Result<f64, EvalError> {
        let mut values = Vec::with_capacity(self.vars.len());
        for name in &self.vars {
            let v = bindings
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, v)| *v)
                .ok_or_else(|| EvalError::Unbound(name.clone()))?;
            values.push(v);
        }
        self.root.eval(&values)
    }

    /// Exact partial derivative with respect to the named variable.
    pub fn differentiate(&self, var: &str) -> Result<Self, ParseError> {
        let idx = self
            .vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| ParseError::UnknownIdentifier { name: var.to_string(), offset: 0 })?;
        Ok(Self { root: derive::derivative(&self.root, idx), vars: self.vars.clone() })
    }

    /// True if the expression does not reference the named variable.
    pub fn is_independent_of(&self, var: &str) -> bool {
        match self.vars.iter().position(|v| v == var) {
            Some(i) => !self.root.contains_var(i),
            None => true,
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", NodeDisplay { node: &self.root, vars: Some(&self.vars) })
    }
}

/// Precedence-aware printer. The output re-parses to the same tree.
struct NodeDisplay<'a> {
    node: &'a Node,
    vars: Option<&'a [String]>,
}

impl<'a> NodeDisplay<'a> {
    fn bare(node: &'a Node) -> Self {
        Self { node, vars: None }
    }

    fn child(&self, node: &'a Node) -> Self {
        Self { node, vars: self.vars }
    }
}

// Binding strength used by the printer: higher binds tighter.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_POW: u8 = 3;
const PREC_UNARY: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(node: &Node) -> u8 {
    match node {
        Node::Const(c) if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) => PREC_ATOM,
        Node::Const(_) | Node::Var(_) | Node::Call(..) => PREC_ATOM,
        Node::Neg(_) => PREC_UNARY,
        Node::Binary(BinOp::Add | BinOp::Sub, ..) => PREC_ADD,
        Node::Binary(BinOp::Mul | BinOp::Div, ..) => PREC_MUL,
        Node::Binary(BinOp::Pow, ..) => PREC_POW,
    }
}

impl fmt::Display for NodeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, node: &Node, parens: bool| -> fmt::Result {
            if parens {
                write!(f, "({})", self.child(node))
            } else {
                write!(f, "{}", self.child(node))
            }
        };
        match self.node {
            Node::Const(c) => {
                if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    write!(f, "({c:?})")
                } else {
                    write!(f, "{c:?}")
                }
            }
            Node::Var(i) => match self.vars {
                Some(names) => write!(f, "{}", names[*i]),
                None => write!(f, "v{i}"),
            },
            Node::Neg(a) => {
                // Unary minus binds tighter than every binary operator, so any
                // binary operand needs parentheses.
                write!(f, "-")?;
                wrap(f, a, precedence(a) < PREC_UNARY)
            }
            Node::Call(func, a) => write!(f, "{}({})", func.name(), self.child(a)),
            Node::Binary(op, a, b) => {
                let p = precedence(self.node);
                let (left_parens, right_parens) = match op {
                    // Right-associative: a^b^c = a^(b^c).
                    BinOp::Pow => (precedence(a) <= p, precedence(b) < p),
                    BinOp::Add | BinOp::Mul => (precedence(a) < p, precedence(b) <= p),
                    BinOp::Sub | BinOp::Div => (precedence(a) < p, precedence(b) <= p),
                };
                wrap(f, a, left_parens)?;
                write!(f, "{}", op.symbol())?;
                wrap(f, b, right_parens)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TX: &[&str] = &["tau", "x"];

    #[test]
    fn evaluates_simple_expressions() {
        let e = Expression::parse("1+2*3", TX).unwrap();
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), 7.0);
        let e = Expression::parse("sin(0)", TX).unwrap();
        assert_eq!(e.eval(&[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn domain_errors_surface() {
        let e = Expression::parse("log(-1)", TX).unwrap();
        assert!(matches!(e.eval(&[0.0, 0.0]), Err(EvalError::Domain(_))));
        let e = Expression::parse("sqrt(x)", TX).unwrap();
        assert!(matches!(e.eval(&[0.0, -1.0]), Err(EvalError::Domain(_))));
        let e = Expression::parse("1/x", TX).unwrap();
        assert!(matches!(e.eval(&[0.0, 0.0]), Err(EvalError::Domain(_))));
        let e = Expression::parse("x^0.5", TX).unwrap();
        assert!(matches!(e.eval(&[0.0, -2.0]), Err(EvalError::Domain(_))));
    }

    #[test]
    fn named_bindings_require_all_variables() {
        let e = Expression::parse("tau + x", TX).unwrap();
        assert_eq!(e.eval_named(&[("x", 1.0), ("tau", 2.0)]).unwrap(), 3.0);
        assert_eq!(e.eval_named(&[("x", 1.0)]), Err(EvalError::Unbound("tau".into())));
        assert!(matches!(e.eval(&[1.0]), Err(EvalError::Arity { .. })));
    }

    #[test]
    fn display_parenthesizes_by_precedence() {
        let cases = [
            ("(x+1)*(tau-2)", "(x+1.0)*(tau-2.0)"),
            ("x-(tau-1)", "x-(tau-1.0)"),
            ("x/(tau*2)", "x/(tau*2.0)"),
            ("(x^2)^3", "(x^2.0)^3.0"),
            ("x^tau^3", "x^tau^3.0"),
            ("-(x^2)", "-(x^2.0)"),
            ("-x^2", "-x^2.0"),
            ("x*(-2)", "x*(-2.0)"),
        ];
        for (src, printed) in cases {
            let e = Expression::parse(src, TX).unwrap();
            assert_eq!(e.to_string(), printed, "printing {src}");
        }
    }

    #[test]
    fn unary_minus_binds_tighter_than_power() {
        let e = Expression::parse("-x^2", TX).unwrap();
        assert_eq!(e.eval(&[0.0, 3.0]).unwrap(), 9.0);
        let e = Expression::parse("-(x^2)", TX).unwrap();
        assert_eq!(e.eval(&[0.0, 3.0]).unwrap(), -9.0);
    }

    #[test]
    fn independence_query() {
        let e = Expression::parse("sin(x)", TX).unwrap();
        assert!(e.is_independent_of("tau"));
        assert!(!e.is_independent_of("x"));
    }
}
