//! Recursive-descent parser for the expression DSL.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := factor (('*' | '/') factor)*
//! factor   := '-' factor | base ('^' exponent)?
//! base     := number | ident | func '(' expr ')' | '(' expr ')'
//! exponent := '-'? number | '(' '-'? number ('/' integer)? ')'
//! ```
//!
//! Exponents must be constant rationals. A minus sign directly in front of a
//! number literal (not itself raised to a power) yields a negative constant.

use super::{BinaryOp, Expr, ExprError, Rational, UnaryOp, Var};

/// Parses `text` into an expression tree, node for node.
pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, message: impl Into<String>) -> ExprError {
        ExprError::Syntax { offset: self.pos, message: message.into() }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else if self.pos >= self.src.len() {
            Err(self.syntax(format!("expected `{}`, found end of input", c as char)))
        } else {
            Err(self.syntax(format!("expected `{}`", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinaryOp::Add,
                Some(b'-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::raw_binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinaryOp::Mul,
                Some(b'/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::raw_binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let save = self.pos;
            if matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
                let (v, _) = self.number()?;
                if self.peek() != Some(b'^') {
                    return Ok(Expr::constant(-v));
                }
                self.pos = save;
            }
            let inner = self.factor()?;
            return Ok(Expr::raw_unary(UnaryOp::Neg, inner));
        }
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let r = self.exponent()?;
            return Ok(Expr::raw_pow(base, r));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => Ok(Expr::constant(self.number()?.0)),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                if self.peek() == Some(b'(') {
                    let op = UnaryOp::from_function_name(name)
                        .ok_or_else(|| ExprError::UnknownFunction { name: name.to_string(), offset: start })?;
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(b')')?;
                    return Ok(Expr::raw_unary(op, arg));
                }
                if UnaryOp::from_function_name(name).is_some() {
                    return Err(self.syntax(format!("expected `(` after function `{name}`")));
                }
                Ok(Expr::var(Var::from_name(name)))
            }
            Some(c) => Err(self.syntax(format!("unexpected `{}`", c as char))),
        }
    }

    /// Scans a numeric literal; returns its value and source text.
    fn number(&mut self) -> Result<(f64, &'a str), ExprError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        // a literal glued to letters, e.g. `2x` or `1.5e3q`
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok((v, text)),
            _ => Err(ExprError::MalformedNumber { text: text.to_string(), offset: start }),
        }
    }

    fn exponent(&mut self) -> Result<Rational, ExprError> {
        let parenthesized = self.peek() == Some(b'(');
        if parenthesized {
            self.pos += 1;
        }
        let negative = self.peek() == Some(b'-');
        if negative {
            self.pos += 1;
        }
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => {}
            None => return Err(self.syntax("expected exponent, found end of input")),
            Some(_) => return Err(self.syntax("exponent must be a constant rational")),
        }
        let offset = self.pos;
        let (_, text) = self.number()?;
        let mut r = decimal_to_rational(text)
            .ok_or_else(|| ExprError::Syntax { offset, message: format!("exponent `{text}` is not a representable rational") })?;
        if parenthesized {
            if self.peek() == Some(b'/') {
                self.pos += 1;
                let offset = self.pos;
                let (_, den_text) = self.number()?;
                let den: i64 = den_text
                    .parse()
                    .ok()
                    .filter(|d| *d != 0)
                    .ok_or_else(|| ExprError::Syntax { offset, message: "denominator must be a nonzero integer".into() })?;
                r = Rational::new(r.num(), r.den() * den);
            }
            self.expect(b')')?;
        }
        if negative {
            r = Rational::new(-r.num(), r.den());
        }
        Ok(r)
    }
}

/// Exact conversion of a plain decimal literal (`3`, `0.25`) to a rational.
fn decimal_to_rational(text: &str) -> Option<Rational> {
    if text.contains(['e', 'E']) {
        return None;
    }
    let (int, frac) = match text.split_once('.') {
        Some((i, f)) => (i, f),
        None => (text, ""),
    };
    if frac.len() > 12 || int.len() > 12 {
        return None;
    }
    let digits = format!("{int}{frac}");
    let num: i64 = if digits.is_empty() { return None } else { digits.parse().ok()? };
    Some(Rational::new(num, 10i64.pow(frac.len() as u32)))
}
