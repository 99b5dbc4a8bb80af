//! Recursive-descent parser with constant folding.

use thiserror::Error;

use super::{BinOp, Func, Node};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { name: String, offset: usize },
}

impl ParseError {
    /// Byte offset into the source where the error was detected.
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => *offset,
        }
    }
}

pub(super) fn parse(src: &str, vars: &[&str]) -> Result<Node, ParseError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, vars };
    p.skip_ws();
    if p.at_end() {
        return Err(p.syntax("empty expression"));
    }
    let node = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.syntax(&format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(node)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax { offset: self.pos, message: message.to_string() }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else if self.at_end() {
            Err(self.syntax(&format!("expected `{}`, found end of input", c as char)))
        } else {
            Err(self.syntax(&format!("expected `{}`", c as char)))
        }
    }

    // expr = term { ("+" | "-") term }
    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat(b'+') {
                BinOp::Add
            } else if self.eat(b'-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = fold_binary(op, lhs, rhs);
        }
    }

    // term = power { ("*" | "/") power }
    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.power()?;
        loop {
            let op = if self.eat(b'*') {
                BinOp::Mul
            } else if self.eat(b'/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.power()?;
            lhs = fold_binary(op, lhs, rhs);
        }
    }

    // power = unary [ "^" power ]
    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.unary()?;
        if self.eat(b'^') {
            let exp = self.power()?;
            Ok(fold_binary(BinOp::Pow, base, exp))
        } else {
            Ok(base)
        }
    }

    // unary = ("-" | "+") unary | primary
    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            Ok(fold_neg(inner))
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.primary()
        }
    }

    // primary = number | identifier | call | "(" expr ")"
    fn primary(&mut self) -> Result<Node, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(c) => Err(self.syntax(&format!("unexpected `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
            self.pos += 1;
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                // Not an exponent; leave `e` for the next token (it will be
                // rejected as an implicit multiplication).
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ASCII slice");
        text.parse::<f64>()
            .map(Node::Const)
            .map_err(|_| ParseError::Syntax { offset: start, message: format!("malformed number `{text}`") })
    }

    fn identifier(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ASCII slice");
        if let Some(i) = self.vars.iter().position(|v| *v == name) {
            return Ok(Node::Var(i));
        }
        match name {
            "pi" => return Ok(Node::Const(std::f64::consts::PI)),
            "e" => return Ok(Node::Const(std::f64::consts::E)),
            _ => {}
        }
        if name == "pow" {
            self.expect(b'(')?;
            let base = self.expr()?;
            self.expect(b',')?;
            let exp = self.expr()?;
            self.expect(b')')?;
            return Ok(fold_binary(BinOp::Pow, base, exp));
        }
        if let Some(func) = Func::from_name(name) {
            self.expect(b'(')?;
            let arg = self.expr()?;
            self.expect(b')')?;
            return Ok(fold_call(func, arg));
        }
        Err(ParseError::UnknownIdentifier { name: name.to_string(), offset: start })
    }
}

fn finite_const(v: f64) -> Option<Node> {
    v.is_finite().then_some(Node::Const(v))
}

pub(super) fn fold_neg(inner: Node) -> Node {
    match inner {
        Node::Const(c) => Node::Const(-c),
        other => Node::Neg(Box::new(other)),
    }
}

/// Folds constant subtrees; `(c1*e)/c2` becomes `(c1/c2)*e`.
pub(super) fn fold_binary(op: BinOp, a: Node, b: Node) -> Node {
    if let (Node::Const(x), Node::Const(y)) = (&a, &b) {
        if !(op == BinOp::Div && *y == 0.0) {
            if let Some(c) = finite_const(op.apply(*x, *y)) {
                return c;
            }
        }
    }
    if op == BinOp::Div {
        if let (Node::Binary(BinOp::Mul, l, r), Node::Const(c2)) = (&a, &b) {
            if let Node::Const(c1) = **l {
                if *c2 != 0.0 {
                    if let Some(c) = finite_const(c1 / c2) {
                        return Node::Binary(BinOp::Mul, Box::new(c), r.clone());
                    }
                }
            }
        }
    }
    Node::Binary(op, Box::new(a), Box::new(b))
}

pub(super) fn fold_call(func: Func, arg: Node) -> Node {
    if let Node::Const(x) = arg {
        let v = match func {
            Func::Sin => Some(x.sin()),
            Func::Cos => Some(x.cos()),
            Func::Exp => Some(x.exp()),
            Func::Log => (x > 0.0).then(|| x.ln()),
            Func::Sqrt => (x >= 0.0).then(|| x.sqrt()),
            Func::Abs => Some(x.abs()),
            Func::Sign => (x != 0.0).then(|| x.signum()),
        };
        if let Some(c) = v.and_then(finite_const) {
            return c;
        }
    }
    Node::Call(func, Box::new(arg))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TX: &[&str] = &["tau", "x"];

    #[test]
    fn parses_call() {
        assert_eq!(parse("sin(x)", TX).unwrap(), Node::Call(Func::Sin, Box::new(Node::Var(1))));
    }

    #[test]
    fn folds_coefficient_of_power() {
        let node = parse("2*tau^(1.5)/1.3293403881791370", TX).unwrap();
        match node {
            Node::Binary(BinOp::Mul, c, p) => {
                assert_eq!(*c, Node::Const(2.0 / 1.329_340_388_179_137));
                assert_eq!(
                    *p,
                    Node::Binary(BinOp::Pow, Box::new(Node::Var(0)), Box::new(Node::Const(1.5)))
                );
            }
            other => panic!("unexpected tree {other:?}"),
        }
    }

    #[test]
    fn reports_offsets() {
        let err = parse("x +", TX).unwrap_err();
        assert!(matches!(err, ParseError::Syntax { offset: 3, .. }), "{err:?}");
        let err = parse("x + y", TX).unwrap_err();
        assert_eq!(err, ParseError::UnknownIdentifier { name: "y".into(), offset: 4 });
        assert_eq!(parse("sin(x", TX).unwrap_err().offset(), 5);
        assert_eq!(parse("2 3", TX).unwrap_err().offset(), 2);
        assert!(parse("", TX).is_err());
        assert!(parse("foo(x)", TX).is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let node = parse("1-2-3", TX).unwrap();
        assert_eq!(node, Node::Const(-4.0));
        let node = parse("2^3^2", TX).unwrap();
        assert_eq!(node, Node::Const(512.0));
        let node = parse("-2^2", TX).unwrap();
        assert_eq!(node, Node::Const(4.0));
        let node = parse("pow(2, 3) + 1e-3*1E3", TX).unwrap();
        assert_eq!(node, Node::Const(9.0));
    }

    #[test]
    fn constants_and_variables_shadowing() {
        assert_eq!(parse("pi", TX).unwrap(), Node::Const(std::f64::consts::PI));
        assert_eq!(parse("e", &["e"]).unwrap(), Node::Var(0));
    }

    #[test]
    fn does_not_fold_invalid_constants() {
        assert!(matches!(parse("1/0", TX).unwrap(), Node::Binary(BinOp::Div, ..)));
        assert!(matches!(parse("log(-1)", TX).unwrap(), Node::Call(Func::Log, _)));
    }
}
