//! Immutable symbolic expressions over the coordinates `x1..xn`, `y1..yn`,
//! the time parameter `t` and user symbols.
//!
//! Nodes are reference counted and freely shared, so an `Expr` is really a
//! DAG. Every traversal (simplification, differentiation, substitution,
//! compilation) walks unique nodes once, which keeps the nested derivatives
//! needed for curvature quantities linear in the size of the DAG.
//!
//! The arithmetic constructors (`Expr::add`, `Expr::mul`, the operator
//! overloads, ...) apply local simplification rules as they build. The
//! `raw_*` constructors and the parser build nodes verbatim.

mod diff;
mod parse;
mod print;
mod tape;

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

pub use diff::{differentiate, free_vars, simplify, substitute};
pub use parse::parse;
pub use tape::{Bindings, Tape};

use thiserror::Error;

/// Errors raised by the expression engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("malformed number `{text}` at offset {offset}")]
    MalformedNumber { text: String, offset: usize },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("{kind} in `{subexpr}`")]
    Domain { kind: DomainKind, subexpr: String },
}

/// The kind of numeric domain violation hit during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    SqrtOfNegative,
    LogOfNonPositive,
    DivisionByZero,
    NegativeBaseFractionalPower,
    NonFinite,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DomainKind::SqrtOfNegative => "square root of a negative value",
            DomainKind::LogOfNonPositive => "logarithm of a non-positive value",
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::NegativeBaseFractionalPower => "fractional power of a negative value",
            DomainKind::NonFinite => "non-finite value",
        };
        f.write_str(s)
    }
}

/// A variable: a base coordinate `x_i`, a fiber coordinate `y_i` (both
/// 1-based), the time parameter `t`, or any other named symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X(usize),
    Y(usize),
    T,
    Sym(Arc<str>),
}

impl Var {
    pub fn sym(name: &str) -> Var {
        Var::from_name(name)
    }

    /// Classifies an identifier: `x3` is `X(3)`, `t` is `T`, `x0` and
    /// `alpha` are plain symbols.
    pub fn from_name(name: &str) -> Var {
        fn index(rest: &str) -> Option<usize> {
            if rest.is_empty() || rest.starts_with('0') || !rest.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            rest.parse().ok()
        }
        if name == "t" {
            return Var::T;
        }
        if let Some(rest) = name.strip_prefix('x') {
            if let Some(i) = index(rest) {
                return Var::X(i);
            }
        }
        if let Some(rest) = name.strip_prefix('y') {
            if let Some(i) = index(rest) {
                return Var::Y(i);
            }
        }
        Var::Sym(Arc::from(name))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{i}"),
            Var::Y(i) => write!(f, "y{i}"),
            Var::T => f.write_str("t"),
            Var::Sym(s) => f.write_str(s),
        }
    }
}

/// Exact rational exponent `num/den`, always reduced with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: i64,
    den: i64,
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

impl Rational {
    pub const ZERO: Rational = Rational { num: 0, den: 1 };
    pub const ONE: Rational = Rational { num: 1, den: 1 };
    pub const HALF: Rational = Rational { num: 1, den: 2 };

    /// # Panics
    /// When `den == 0`.
    pub fn new(num: i64, den: i64) -> Rational {
        assert!(den != 0, "rational with zero denominator");
        let g = gcd(num, den).max(1);
        let s = if den < 0 { -1 } else { 1 };
        Rational { num: s * num / g, den: s * den / g }
    }

    pub fn integer(n: i64) -> Rational {
        Rational { num: n, den: 1 }
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> i64 {
        self.den
    }

    pub fn is_integer(self) -> bool {
        self.den == 1
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn mul(self, other: Rational) -> Rational {
        Rational::new(self.num * other.num, self.den * other.den)
    }

    pub fn minus_one(self) -> Rational {
        Rational::new(self.num - self.den, self.den)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
}

impl UnaryOp {
    pub fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sqrt => "sqrt",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
        }
    }

    pub fn from_function_name(name: &str) -> Option<UnaryOp> {
        match name {
            "sqrt" => Some(UnaryOp::Sqrt),
            "exp" => Some(UnaryOp::Exp),
            "log" => Some(UnaryOp::Log),
            "sin" => Some(UnaryOp::Sin),
            "cos" => Some(UnaryOp::Cos),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// One node of an expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var(Var),
    Unary(UnaryOp, Expr),
    Binary(BinaryOp, Expr, Expr),
    Pow(Expr, Rational),
}

#[derive(Debug)]
struct Inner {
    node: Node,
    hash: u64,
}

/// Shared, immutable expression handle. Cloning is a reference-count bump.
#[derive(Clone)]
pub struct Expr(Arc<Inner>);

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.hash == other.0.hash && self.0.node == other.0.node)
    }
}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.0.hash);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

fn node_hash(node: &Node) -> u64 {
    let mut h = DefaultHasher::new();
    match node {
        Node::Const(c) => {
            0u8.hash(&mut h);
            // -0.0 == 0.0 must hash alike
            let c = if *c == 0.0 { 0.0 } else { *c };
            c.to_bits().hash(&mut h);
        }
        Node::Var(v) => {
            1u8.hash(&mut h);
            v.hash(&mut h);
        }
        Node::Unary(op, a) => {
            2u8.hash(&mut h);
            op.hash(&mut h);
            a.0.hash.hash(&mut h);
        }
        Node::Binary(op, a, b) => {
            3u8.hash(&mut h);
            op.hash(&mut h);
            a.0.hash.hash(&mut h);
            b.0.hash.hash(&mut h);
        }
        Node::Pow(a, r) => {
            4u8.hash(&mut h);
            a.0.hash.hash(&mut h);
            r.hash(&mut h);
        }
    }
    h.finish()
}

impl Expr {
    fn from_node(node: Node) -> Expr {
        let hash = node_hash(&node);
        Expr(Arc::new(Inner { node, hash }))
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// Stable address of the shared node, used as a memo key by traversals.
    pub(crate) fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    pub fn constant(c: f64) -> Expr {
        Expr::from_node(Node::Const(c))
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn var(v: Var) -> Expr {
        Expr::from_node(Node::Var(v))
    }

    pub fn x(i: usize) -> Expr {
        Expr::var(Var::X(i))
    }

    pub fn y(i: usize) -> Expr {
        Expr::var(Var::Y(i))
    }

    pub fn t() -> Expr {
        Expr::var(Var::T)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_const(&self, v: f64) -> bool {
        self.as_const() == Some(v)
    }

    pub fn is_zero(&self) -> bool {
        self.is_const(0.0)
    }

    pub fn raw_unary(op: UnaryOp, a: Expr) -> Expr {
        Expr::from_node(Node::Unary(op, a))
    }

    pub fn raw_binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        Expr::from_node(Node::Binary(op, a, b))
    }

    pub fn raw_pow(a: Expr, r: Rational) -> Expr {
        Expr::from_node(Node::Pow(a, r))
    }

    /// Rebuilds a node of the same shape over new children, applying the
    /// simplifying constructors.
    pub(crate) fn rebuild(node: &Node, children: &[Expr]) -> Expr {
        match node {
            Node::Const(c) => Expr::constant(*c),
            Node::Var(v) => Expr::var(v.clone()),
            Node::Unary(op, _) => Expr::unary(*op, children[0].clone()),
            Node::Binary(op, _, _) => Expr::binary(*op, children[0].clone(), children[1].clone()),
            Node::Pow(_, r) => Expr::pow(children[0].clone(), *r),
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self.node() {
            Node::Const(_) | Node::Var(_) => vec![],
            Node::Unary(_, a) | Node::Pow(a, _) => vec![a],
            Node::Binary(_, a, b) => vec![a, b],
        }
    }

    // ---- simplifying constructors -------------------------------------

    pub fn unary(op: UnaryOp, a: Expr) -> Expr {
        match op {
            UnaryOp::Neg => Expr::neg(a),
            UnaryOp::Sqrt => Expr::sqrt(a),
            UnaryOp::Exp => Expr::exp(a),
            UnaryOp::Log => Expr::log(a),
            UnaryOp::Sin => Expr::sin(a),
            UnaryOp::Cos => Expr::cos(a),
        }
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        match op {
            BinaryOp::Add => Expr::add(a, b),
            BinaryOp::Sub => Expr::sub(a, b),
            BinaryOp::Mul => Expr::mul(a, b),
            BinaryOp::Div => Expr::div(a, b),
        }
    }

    fn fold(v: f64) -> Option<Expr> {
        v.is_finite().then(|| Expr::constant(v))
    }

    pub fn neg(a: Expr) -> Expr {
        if let Some(c) = a.as_const() {
            return Expr::constant(-c);
        }
        match a.node() {
            Node::Unary(UnaryOp::Neg, inner) => inner.clone(),
            Node::Binary(BinaryOp::Sub, p, q) => Expr::raw_binary(BinaryOp::Sub, q.clone(), p.clone()),
            Node::Binary(BinaryOp::Mul, p, q) if p.as_const().is_some() => {
                Expr::mul(Expr::constant(-p.as_const().unwrap()), q.clone())
            }
            _ => Expr::raw_unary(UnaryOp::Neg, a),
        }
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => {
                if let Some(e) = Expr::fold(p + q) {
                    return e;
                }
            }
            (Some(p), None) if p == 0.0 => return b,
            (None, Some(q)) if q == 0.0 => return a,
            (None, Some(_)) => return Expr::add(b, a),
            (Some(p), None) => {
                if let Node::Binary(BinaryOp::Add, c, rest) = b.node() {
                    if let Some(q) = c.as_const() {
                        return Expr::add(Expr::constant(p + q), rest.clone());
                    }
                }
            }
            _ => {}
        }
        if let Node::Unary(UnaryOp::Neg, inner) = b.node() {
            return Expr::sub(a, inner.clone());
        }
        if let Node::Unary(UnaryOp::Neg, inner) = a.node() {
            return Expr::sub(b, inner.clone());
        }
        if a == b {
            return Expr::mul(Expr::constant(2.0), a);
        }
        Expr::raw_binary(BinaryOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => {
                if let Some(e) = Expr::fold(p - q) {
                    return e;
                }
            }
            (_, Some(q)) if q == 0.0 => return a,
            (Some(p), _) if p == 0.0 => return Expr::neg(b),
            (None, Some(q)) => return Expr::add(Expr::constant(-q), a),
            _ => {}
        }
        if a == b {
            return Expr::zero();
        }
        if let Node::Unary(UnaryOp::Neg, inner) = b.node() {
            return Expr::add(a, inner.clone());
        }
        Expr::raw_binary(BinaryOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) => {
                if let Some(e) = Expr::fold(p * q) {
                    return e;
                }
            }
            (Some(p), _) if p == 0.0 => return Expr::zero(),
            (_, Some(q)) if q == 0.0 => return Expr::zero(),
            (Some(p), _) if p == 1.0 => return b,
            (_, Some(q)) if q == 1.0 => return a,
            (Some(p), _) if p == -1.0 => return Expr::neg(b),
            (_, Some(q)) if q == -1.0 => return Expr::neg(a),
            (None, Some(_)) => return Expr::mul(b, a),
            (Some(p), None) => match b.node() {
                Node::Binary(BinaryOp::Mul, c, rest) if c.as_const().is_some() => {
                    return Expr::mul(Expr::constant(p * c.as_const().unwrap()), rest.clone());
                }
                Node::Unary(UnaryOp::Neg, inner) => return Expr::mul(Expr::constant(-p), inner.clone()),
                _ => {}
            },
            _ => {}
        }
        match (a.node(), b.node()) {
            (Node::Unary(UnaryOp::Neg, p), Node::Unary(UnaryOp::Neg, q)) => {
                return Expr::mul(p.clone(), q.clone());
            }
            (Node::Unary(UnaryOp::Neg, p), _) => return Expr::neg(Expr::mul(p.clone(), b)),
            (_, Node::Unary(UnaryOp::Neg, q)) => return Expr::neg(Expr::mul(a, q.clone())),
            _ => {}
        }
        if a == b {
            return Expr::pow(a, Rational::integer(2));
        }
        Expr::raw_binary(BinaryOp::Mul, a, b)
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(p), Some(q)) if q != 0.0 => {
                if let Some(e) = Expr::fold(p / q) {
                    return e;
                }
            }
            (_, Some(q)) if q == 1.0 => return a,
            (_, Some(q)) if q == -1.0 => return Expr::neg(a),
            (Some(p), _) if p == 0.0 && b.as_const().is_none() => return Expr::zero(),
            _ => {}
        }
        Expr::raw_binary(BinaryOp::Div, a, b)
    }

    pub fn pow(a: Expr, r: Rational) -> Expr {
        if r == Rational::ZERO {
            return Expr::one();
        }
        if r == Rational::ONE {
            return a;
        }
        if let Some(c) = a.as_const() {
            if r.is_integer() {
                if let Some(e) = Expr::fold(c.powi(r.num() as i32)) {
                    if c != 0.0 || r.num() > 0 {
                        return e;
                    }
                }
            } else if c > 0.0 {
                if let Some(e) = Expr::fold(c.powf(r.to_f64())) {
                    return e;
                }
            }
        }
        match a.node() {
            Node::Pow(base, s) if s.is_integer() && r.is_integer() => {
                return Expr::pow(base.clone(), s.mul(r));
            }
            Node::Unary(UnaryOp::Sqrt, base) if r.is_integer() && r.num() % 2 == 0 => {
                return Expr::pow(base.clone(), Rational::integer(r.num() / 2));
            }
            _ => {}
        }
        Expr::raw_pow(a, r)
    }

    pub fn powi(a: Expr, n: i64) -> Expr {
        Expr::pow(a, Rational::integer(n))
    }

    pub fn sqrt(a: Expr) -> Expr {
        if let Some(c) = a.as_const() {
            if c >= 0.0 {
                return Expr::constant(c.sqrt());
            }
        }
        if let Node::Pow(base, r) = a.node() {
            if r.is_integer() && r.num() % 4 == 0 {
                return Expr::pow(base.clone(), Rational::integer(r.num() / 2));
            }
        }
        Expr::raw_unary(UnaryOp::Sqrt, a)
    }

    pub fn exp(a: Expr) -> Expr {
        if let Some(c) = a.as_const() {
            if let Some(e) = Expr::fold(c.exp()) {
                return e;
            }
        }
        if let Node::Unary(UnaryOp::Log, inner) = a.node() {
            return inner.clone();
        }
        Expr::raw_unary(UnaryOp::Exp, a)
    }

    pub fn log(a: Expr) -> Expr {
        if let Some(c) = a.as_const() {
            if c > 0.0 {
                return Expr::constant(c.ln());
            }
        }
        if let Node::Unary(UnaryOp::Exp, inner) = a.node() {
            return inner.clone();
        }
        Expr::raw_unary(UnaryOp::Log, a)
    }

    pub fn sin(a: Expr) -> Expr {
        match a.as_const() {
            Some(c) => Expr::constant(c.sin()),
            None => Expr::raw_unary(UnaryOp::Sin, a),
        }
    }

    pub fn cos(a: Expr) -> Expr {
        match a.as_const() {
            Some(c) => Expr::constant(c.cos()),
            None => Expr::raw_unary(UnaryOp::Cos, a),
        }
    }

    /// Sum of an iterator of terms; `0` when empty.
    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        terms.into_iter().fold(Expr::zero(), Expr::add)
    }

    // ---- convenience wrappers over the free functions -----------------

    pub fn diff(&self, v: &Var) -> Expr {
        differentiate(self, v)
    }

    pub fn simplified(&self) -> Expr {
        simplify(self)
    }

    pub fn eval(&self, b: &Bindings) -> Result<f64, ExprError> {
        let vars: Vec<Var> = free_vars(self).into_iter().collect();
        let tape = Tape::compile(std::slice::from_ref(self), &vars)?;
        let mut inputs = Vec::with_capacity(vars.len());
        for v in &vars {
            inputs.push(b.get(v).ok_or_else(|| ExprError::UnboundVariable(v.to_string()))?);
        }
        Ok(tape.eval(&inputs)?[0])
    }

    /// Number of unique nodes in the DAG.
    pub fn dag_size(&self) -> usize {
        diff::topo_order(std::slice::from_ref(self)).len()
    }
}

/// Evaluates `e` under `b`. Every free variable must be bound.
pub fn evaluate(e: &Expr, b: &Bindings) -> Result<f64, ExprError> {
    e.eval(b)
}

impl From<f64> for Expr {
    fn from(c: f64) -> Expr {
        Expr::constant(c)
    }
}

macro_rules! binop_impl {
    ($tr:ident, $method:ident, $ctor:ident) => {
        impl std::ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$ctor(self, rhs)
            }
        }
        impl std::ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$ctor(self, rhs.clone())
            }
        }
        impl std::ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$ctor(self.clone(), rhs)
            }
        }
        impl std::ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$ctor(self.clone(), rhs.clone())
            }
        }
        impl std::ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$ctor(self, Expr::constant(rhs))
            }
        }
        impl std::ops::$tr<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                Expr::$ctor(self.clone(), Expr::constant(rhs))
            }
        }
        impl std::ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$ctor(Expr::constant(self), rhs)
            }
        }
        impl std::ops::$tr<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                Expr::$ctor(Expr::constant(self), rhs.clone())
            }
        }
    };
}

binop_impl!(Add, add, add);
binop_impl!(Sub, sub, sub);
binop_impl!(Mul, mul, mul);
binop_impl!(Div, div, div);

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self)
    }
}

impl std::ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::neg(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn var_classification() {
        assert_eq!(Var::from_name("x1"), Var::X(1));
        assert_eq!(Var::from_name("y12"), Var::Y(12));
        assert_eq!(Var::from_name("t"), Var::T);
        assert!(matches!(Var::from_name("x0"), Var::Sym(_)));
        assert!(matches!(Var::from_name("x01"), Var::Sym(_)));
        assert!(matches!(Var::from_name("mu"), Var::Sym(_)));
    }

    #[test]
    fn rational_reduces() {
        let r = Rational::new(2, -4);
        assert_eq!((r.num(), r.den()), (-1, 2));
        assert_eq!(Rational::new(3, 2).minus_one(), Rational::new(1, 2));
    }

    #[test]
    fn identity_laws() {
        let y1 = Expr::y(1);
        assert_eq!(Expr::add(Expr::zero(), Expr::mul(Expr::one(), y1.clone())), y1);
        assert!(Expr::sub(y1.clone(), y1.clone()).is_zero());
        let e = Expr::mul(2.0.into(), Expr::mul(3.0.into(), y1.clone()));
        assert_eq!(e, Expr::raw_binary(BinaryOp::Mul, Expr::constant(6.0), y1));
    }

    #[test]
    fn structural_equality_ignores_sharing() {
        let a = Expr::raw_binary(BinaryOp::Add, Expr::x(1), Expr::y(2));
        let b = Expr::raw_binary(BinaryOp::Add, Expr::x(1), Expr::y(2));
        assert_eq!(a, b);
        assert_ne!(a, Expr::raw_binary(BinaryOp::Add, Expr::y(2), Expr::x(1)));
    }
}
