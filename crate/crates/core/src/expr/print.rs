use std::fmt;

use super::{BinaryOp, Expr, Node, UnaryOp};

const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Const(c) if c.is_sign_negative() => PREC_NEG,
        Node::Const(_) | Node::Var(_) => PREC_ATOM,
        Node::Unary(UnaryOp::Neg, _) => PREC_NEG,
        Node::Unary(_, _) => PREC_ATOM,
        Node::Binary(BinaryOp::Add | BinaryOp::Sub, _, _) => PREC_ADD,
        Node::Binary(BinaryOp::Mul | BinaryOp::Div, _, _) => PREC_MUL,
        Node::Pow(_, _) => PREC_POW,
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Prints the DSL form; `parse` of the output rebuilds the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write!(f, "{c}"),
            Node::Var(v) => write!(f, "{v}"),
            Node::Unary(UnaryOp::Neg, a) => {
                f.write_str("-")?;
                let wrap = precedence(a) < PREC_POW || a.as_const().is_some();
                write_wrapped(f, a, wrap)
            }
            Node::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Node::Binary(op, a, b) => {
                let (p, sym) = match op {
                    BinaryOp::Add => (PREC_ADD, " + "),
                    BinaryOp::Sub => (PREC_ADD, " - "),
                    BinaryOp::Mul => (PREC_MUL, "*"),
                    BinaryOp::Div => (PREC_MUL, "/"),
                };
                write_wrapped(f, a, precedence(a) < p)?;
                f.write_str(sym)?;
                write_wrapped(f, b, precedence(b) <= p)
            }
            Node::Pow(a, r) => {
                write_wrapped(f, a, precedence(a) < PREC_ATOM)?;
                if r.is_integer() && r.num() >= 0 {
                    write!(f, "^{}", r.num())
                } else {
                    write!(f, "^({r})")
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::{parse, simplify};

    #[test]
    fn randers_round_trip() {
        let e = parse("sqrt(y1^2+y2^2) + 0.5*y1").unwrap();
        assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn awkward_shapes_round_trip() {
        for src in [
            "a - (b - c)",
            "a/(b*c)",
            "(a/b)/c",
            "-(2)*y1",
            "(-2)^2",
            "-2^2",
            "-(-y1)",
            "y1 - -3",
            "(x1^2)^3",
            "x1^(-1/2)",
            "exp(-x1)*cos(t)",
            "y1*-y2",
        ] {
            let e = parse(src).unwrap();
            let printed = e.to_string();
            assert_eq!(parse(&printed).unwrap(), e, "{src} printed as {printed}");
            let s = simplify(&e);
            assert_eq!(parse(&s.to_string()).unwrap(), s, "simplified {src}");
        }
    }
}
