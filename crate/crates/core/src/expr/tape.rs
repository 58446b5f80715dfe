//! Straight-line evaluation programs compiled from expression DAGs.

use std::collections::HashMap;

use super::diff::topo_order;
use super::{BinaryOp, DomainKind, Expr, ExprError, Node, Rational, UnaryOp, Var};

/// Variable values for evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bindings(HashMap<Var, f64>);

impl Bindings {
    pub fn new() -> Bindings {
        Bindings::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Var, f64)>>(pairs: I) -> Bindings {
        Bindings(pairs.into_iter().collect())
    }

    pub fn set(&mut self, v: Var, value: f64) -> &mut Self {
        self.0.insert(v, value);
        self
    }

    pub fn with(mut self, v: Var, value: f64) -> Self {
        self.0.insert(v, value);
        self
    }

    pub fn get(&self, v: &Var) -> Option<f64> {
        self.0.get(v).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Instr {
    Const(u64),
    Input(usize),
    Unary(UnaryOp, usize),
    Binary(BinaryOp, usize, usize),
    Pow(usize, Rational),
}

/// A compiled batch of expressions sharing one instruction stream.
///
/// Identical subexpressions (by structure, not only by sharing) are
/// evaluated once.
#[derive(Debug, Clone)]
pub struct Tape {
    instrs: Vec<Instr>,
    sources: Vec<Expr>,
    outputs: Vec<usize>,
    vars: Vec<Var>,
}

fn describe(e: &Expr) -> String {
    const LIMIT: usize = 160;
    let s = e.to_string();
    if s.len() <= LIMIT {
        s
    } else {
        let mut cut = LIMIT;
        while !s.is_char_boundary(cut) {
            cut -= 1;
        }
        format!("{}...", &s[..cut])
    }
}

pub(crate) fn real_pow(base: f64, r: Rational) -> Option<f64> {
    if r.is_integer() {
        return Some(base.powi(r.num() as i32));
    }
    if r == Rational::HALF {
        return (base >= 0.0).then(|| base.sqrt());
    }
    if base >= 0.0 {
        Some(base.powf(r.to_f64()))
    } else if r.den() % 2 == 1 {
        let m = (-base).powf(r.to_f64());
        Some(if r.num() % 2 == 0 { m } else { -m })
    } else {
        None
    }
}

impl Tape {
    /// Compiles `outputs` with inputs ordered as `vars`.
    pub fn compile(outputs: &[Expr], vars: &[Var]) -> Result<Tape, ExprError> {
        let slot: HashMap<&Var, usize> = vars.iter().enumerate().map(|(i, v)| (v, i)).collect();
        let mut by_node: HashMap<usize, usize> = HashMap::new();
        let mut by_instr: HashMap<Instr, usize> = HashMap::new();
        let mut instrs = Vec::new();
        let mut sources = Vec::new();
        for e in topo_order(outputs) {
            let at = |c: &Expr| by_node[&c.id()];
            let instr = match e.node() {
                Node::Const(c) => Instr::Const(c.to_bits()),
                Node::Var(v) => {
                    let i = *slot.get(v).ok_or_else(|| ExprError::UnboundVariable(v.to_string()))?;
                    Instr::Input(i)
                }
                Node::Unary(op, a) => Instr::Unary(*op, at(a)),
                Node::Binary(op, a, b) => Instr::Binary(*op, at(a), at(b)),
                Node::Pow(a, r) => Instr::Pow(at(a), *r),
            };
            let idx = *by_instr.entry(instr).or_insert_with(|| {
                instrs.push(instr);
                sources.push(e.clone());
                instrs.len() - 1
            });
            by_node.insert(e.id(), idx);
        }
        let outputs = outputs.iter().map(|o| by_node[&o.id()]).collect();
        Ok(Tape { instrs, sources, outputs, vars: vars.to_vec() })
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    /// Number of instructions after deduplication.
    pub fn len(&self) -> usize {
        self.instrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instrs.is_empty()
    }

    pub fn eval(&self, inputs: &[f64]) -> Result<Vec<f64>, ExprError> {
        let mut scratch = Vec::new();
        let mut out = vec![0.0; self.outputs.len()];
        self.eval_into(inputs, &mut scratch, &mut out)?;
        Ok(out)
    }

    /// Evaluates into `out`, reusing `scratch` between calls.
    pub fn eval_into(&self, inputs: &[f64], scratch: &mut Vec<f64>, out: &mut [f64]) -> Result<(), ExprError> {
        assert_eq!(inputs.len(), self.vars.len(), "input count must match compiled variables");
        scratch.clear();
        scratch.reserve(self.instrs.len());
        for (k, instr) in self.instrs.iter().enumerate() {
            let fail = |kind| ExprError::Domain { kind, subexpr: describe(&self.sources[k]) };
            let v = match *instr {
                Instr::Const(bits) => f64::from_bits(bits),
                Instr::Input(i) => inputs[i],
                Instr::Unary(op, a) => {
                    let a = scratch[a];
                    match op {
                        UnaryOp::Neg => -a,
                        UnaryOp::Sqrt => {
                            if a < 0.0 {
                                return Err(fail(DomainKind::SqrtOfNegative));
                            }
                            a.sqrt()
                        }
                        UnaryOp::Exp => a.exp(),
                        UnaryOp::Log => {
                            if a <= 0.0 {
                                return Err(fail(DomainKind::LogOfNonPositive));
                            }
                            a.ln()
                        }
                        UnaryOp::Sin => a.sin(),
                        UnaryOp::Cos => a.cos(),
                    }
                }
                Instr::Binary(op, a, b) => {
                    let (a, b) = (scratch[a], scratch[b]);
                    match op {
                        BinaryOp::Add => a + b,
                        BinaryOp::Sub => a - b,
                        BinaryOp::Mul => a * b,
                        BinaryOp::Div => {
                            if b == 0.0 {
                                return Err(fail(DomainKind::DivisionByZero));
                            }
                            a / b
                        }
                    }
                }
                Instr::Pow(a, r) => {
                    let a = scratch[a];
                    if a == 0.0 && r.num() < 0 {
                        return Err(fail(DomainKind::DivisionByZero));
                    }
                    real_pow(a, r).ok_or_else(|| fail(DomainKind::NegativeBaseFractionalPower))?
                }
            };
            if !v.is_finite() {
                return Err(fail(DomainKind::NonFinite));
            }
            scratch.push(v);
        }
        for (o, &idx) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[idx];
        }
        Ok(())
    }
}
