//! Vector fields, complete lifts, Lie derivatives along lifts, and
//! pullbacks of Finsler structures by symbolic diffeomorphisms and by
//! numerically integrated flow maps.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{differentiate, free_vars, parse, substitute, DomainKind, Expr, ExprError, Tape, Var};
use crate::finsler::{slot_vars, FinslerStructure};
use crate::sample::Sample;

/// Default integration resolution of numeric flow maps.
pub const DEFAULT_STEPS_PER_UNIT: usize = 200;

fn check_vars(e: &Expr, dim: usize, allow_t: bool, what: &str) -> std::result::Result<(), String> {
    for v in free_vars(e) {
        let ok = match &v {
            Var::X(i) => (1..=dim).contains(i),
            Var::T => allow_t,
            _ => false,
        };
        if !ok {
            return Err(format!("{what} `{e}` depends on `{v}`"));
        }
    }
    Ok(())
}

/// `V = v^i(x) ∂/∂x^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    comps: Vec<Expr>,
}

impl VectorField {
    /// Rejects components that depend on anything but `x1..xn`.
    pub fn new(comps: Vec<Expr>) -> Result<VectorField> {
        let dim = comps.len();
        if dim == 0 {
            return Err(Error::InvalidField("no components".into()));
        }
        for c in &comps {
            check_vars(c, dim, false, "component").map_err(Error::InvalidField)?;
        }
        Ok(VectorField { comps: comps.iter().map(Expr::simplified).collect() })
    }

    pub fn parse(comps: &[&str]) -> Result<VectorField> {
        VectorField::new(comps.iter().map(|c| parse(c)).collect::<std::result::Result<_, _>>()?)
    }

    pub fn zero(dim: usize) -> VectorField {
        VectorField { comps: vec![Expr::zero(); dim] }
    }

    /// `λ x^i ∂/∂x^i`.
    pub fn radial(dim: usize, lambda: f64) -> VectorField {
        VectorField::new((1..=dim).map(|i| Expr::constant(lambda) * Expr::x(i)).collect()).expect("x-only")
    }

    /// Planar rotation `x2 ∂/∂x1 - x1 ∂/∂x2`.
    pub fn rotation() -> VectorField {
        VectorField::new(vec![Expr::x(2), -Expr::x(1)]).expect("x-only")
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn scaled(&self, c: f64) -> VectorField {
        VectorField { comps: self.comps.iter().map(|v| (Expr::constant(c) * v).simplified()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    /// Component values at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        let vars: Vec<Var> = (1..=self.dim()).map(Var::X).collect();
        Ok(Tape::compile(&self.comps, &vars)?.eval(x)?)
    }
}

/// `V̂ = v^i ∂/∂x^i + w^i ∂/∂y^i` with `w^i = y^j ∂v^i/∂x^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompleteLift {
    pub v: Vec<Expr>,
    pub w: Vec<Expr>,
}

pub fn complete_lift(field: &VectorField) -> CompleteLift {
    let n = field.dim();
    let w = field
        .comps
        .iter()
        .map(|vi| Expr::sum((1..=n).map(|j| Expr::y(j) * differentiate(vi, &Var::X(j)))))
        .collect();
    CompleteLift { v: field.comps.clone(), w }
}

fn check_dims(f: &FinslerStructure, n: usize) -> Result<()> {
    if f.dim() != n {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: n });
    }
    Ok(())
}

/// Symbolic `L_V̂ F²`.
pub fn lie_derivative_f2_expr(f: &FinslerStructure, field: &VectorField) -> Result<Expr> {
    check_dims(f, field.dim())?;
    let lift = complete_lift(field);
    let f2 = f.f2();
    let terms = (0..f.dim()).flat_map(|i| {
        [
            &lift.v[i] * differentiate(f2, &Var::X(i + 1)),
            &lift.w[i] * differentiate(f2, &Var::Y(i + 1)),
        ]
    });
    Ok(Expr::sum(terms))
}

/// Lie derivatives of `F²` and `g` along a complete lift, compiled once.
#[derive(Debug, Clone)]
pub struct LieDerivative {
    dim: usize,
    lf2: Expr,
    tape: Tape,
}

impl LieDerivative {
    pub fn new(f: &FinslerStructure, field: &VectorField) -> Result<LieDerivative> {
        let n = f.dim();
        let lf2 = lie_derivative_f2_expr(f, field)?;
        let d: Vec<Expr> = (1..=n).map(|j| differentiate(&lf2, &Var::Y(j))).collect();
        let mut outputs = vec![lf2.clone()];
        for j in 0..n {
            for k in 0..n {
                outputs.push(Expr::constant(0.5) * differentiate(&d[j], &Var::Y(k + 1)));
            }
        }
        let tape = Tape::compile(&outputs, &slot_vars(n))?;
        Ok(LieDerivative { dim: n, lf2, tape })
    }

    pub fn expr(&self) -> &Expr {
        &self.lf2
    }

    /// `(L_V̂ F², L_V̂ g)` at `s`.
    pub fn eval(&self, s: &Sample) -> Result<(f64, DMatrix<f64>)> {
        s.validate(self.dim)?;
        let v = self.tape.eval(&s.inputs())?;
        let mut lg = DMatrix::from_row_slice(self.dim, self.dim, &v[1..]);
        lg = (&lg + lg.transpose()) * 0.5;
        Ok((v[0], lg))
    }
}

/// `L_V̂ F² = v^i ∂F²/∂x^i + y^j (∂v^i/∂x^j) ∂F²/∂y^i` at `s`.
pub fn lie_derivative_f2(f: &FinslerStructure, field: &VectorField, s: &Sample) -> Result<f64> {
    Ok(LieDerivative::new(f, field)?.eval(s)?.0)
}

/// `L_V̂ g_jk`, the y-Hessian of `½ L_V̂ F²`, at `s`.
pub fn lie_derivative_g(f: &FinslerStructure, field: &VectorField, s: &Sample) -> Result<DMatrix<f64>> {
    Ok(LieDerivative::new(f, field)?.eval(s)?.1)
}

/// A diffeomorphism `x ↦ φ(x)` (possibly depending on `t`) with its
/// Jacobian, and optionally the inverse map.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolicDiffeo {
    phi: Vec<Expr>,
    inverse: Option<Vec<Expr>>,
    jac: Vec<Vec<Expr>>,
    name: Option<String>,
}

impl SymbolicDiffeo {
    pub fn new(phi: Vec<Expr>, inverse: Option<Vec<Expr>>) -> Result<SymbolicDiffeo> {
        let n = phi.len();
        if n == 0 {
            return Err(Error::InvalidDiffeo("no components".into()));
        }
        for c in &phi {
            check_vars(c, n, true, "component").map_err(Error::InvalidDiffeo)?;
        }
        if let Some(inv) = &inverse {
            if inv.len() != n {
                return Err(Error::InvalidDiffeo(format!("inverse has {} components, map has {n}", inv.len())));
            }
            for c in inv {
                check_vars(c, n, true, "inverse component").map_err(Error::InvalidDiffeo)?;
            }
        }
        let phi: Vec<Expr> = phi.iter().map(Expr::simplified).collect();
        let jac = phi.iter().map(|p| (1..=n).map(|j| differentiate(p, &Var::X(j))).collect()).collect();
        Ok(SymbolicDiffeo { phi, inverse, jac, name: None })
    }

    pub fn parse(phi: &[&str], inverse: Option<&[&str]>) -> Result<SymbolicDiffeo> {
        let p = |v: &[&str]| v.iter().map(|c| parse(c)).collect::<std::result::Result<Vec<_>, _>>();
        let inverse = inverse.map(p).transpose()?;
        SymbolicDiffeo::new(p(phi)?, inverse)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn identity(n: usize) -> SymbolicDiffeo {
        SymbolicDiffeo::new((1..=n).map(Expr::x).collect(), Some((1..=n).map(Expr::x).collect()))
            .expect("identity")
            .named("identity")
    }

    /// Linear map `x ↦ A x`, with the inverse when `A` is invertible.
    pub fn linear(a: &DMatrix<f64>) -> Result<SymbolicDiffeo> {
        let n = a.nrows();
        let apply = |m: &DMatrix<f64>| -> Vec<Expr> {
            (0..n)
                .map(|i| Expr::sum((0..n).map(|j| Expr::constant(m[(i, j)]) * Expr::x(j + 1))))
                .collect()
        };
        let inverse = a.clone().try_inverse().map(|inv| apply(&inv));
        SymbolicDiffeo::new(apply(a), inverse)
    }

    pub fn rotation(theta: f64) -> SymbolicDiffeo {
        let (s, c) = theta.sin_cos();
        SymbolicDiffeo::linear(&DMatrix::from_row_slice(2, 2, &[c, -s, s, c])).expect("2x2").named("rotation")
    }

    pub fn dim(&self) -> usize {
        self.phi.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.phi
    }

    pub fn inverse(&self) -> Option<&[Expr]> {
        self.inverse.as_deref()
    }

    /// `∂φ^i/∂x^j`.
    pub fn jacobian_exprs(&self) -> &[Vec<Expr>] {
        &self.jac
    }

    /// Replacement map `x ↦ φ(x)`, `y ↦ (∂φ/∂x) y`.
    pub fn tangent_lift_map(&self) -> HashMap<Var, Expr> {
        let n = self.dim();
        let mut map = HashMap::new();
        for i in 0..n {
            map.insert(Var::X(i + 1), self.phi[i].clone());
            map.insert(Var::Y(i + 1), Expr::sum((0..n).map(|j| &self.jac[i][j] * Expr::y(j + 1))));
        }
        map
    }

    fn tape(&self) -> Result<Tape> {
        let n = self.dim();
        let mut out = self.phi.clone();
        out.extend(self.jac.iter().flatten().cloned());
        let mut vars: Vec<Var> = (1..=n).map(Var::X).collect();
        vars.push(Var::T);
        Ok(Tape::compile(&out, &vars)?)
    }

    /// `(φ(x), ∂φ/∂x)` at `(x, t)`.
    pub fn eval(&self, x: &[f64], t: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        let mut input = x.to_vec();
        input.push(t);
        let v = self.tape()?.eval(&input)?;
        Ok((DVector::from_column_slice(&v[..n]), DMatrix::from_row_slice(n, n, &v[n..])))
    }

    /// Maximum of `|ψ(φ(x)) - x|` over the points, if an inverse is known.
    pub fn inverse_defect(&self, points: &[Vec<f64>], t: f64) -> Result<Option<f64>> {
        let Some(inv) = &self.inverse else { return Ok(None) };
        let n = self.dim();
        let mut vars: Vec<Var> = (1..=n).map(Var::X).collect();
        vars.push(Var::T);
        let tape = Tape::compile(inv, &vars)?;
        let mut worst: f64 = 0.0;
        for x in points {
            let (y, _) = self.eval(x, t)?;
            let mut input: Vec<f64> = y.iter().copied().collect();
            input.push(t);
            let back = tape.eval(&input)?;
            for (a, b) in back.iter().zip(x) {
                worst = worst.max((a - b).abs());
            }
        }
        Ok(Some(worst))
    }
}

/// `φ̃*F₀`: the structure `F₀²(φ(x), (∂φ/∂x) y)`.
pub fn pullback_symbolic(f0: &FinslerStructure, d: &SymbolicDiffeo) -> Result<FinslerStructure> {
    if d.dim() != f0.dim() {
        return Err(Error::DimensionMismatch { expected: f0.dim(), got: d.dim() });
    }
    let pulled = FinslerStructure::new(f0.dim(), substitute(f0.f2(), &d.tangent_lift_map()))?;
    Ok(match (f0.name(), d.name()) {
        (Some(a), Some(b)) => pulled.named(format!("{b}*{a}")),
        _ => pulled,
    })
}

/// Lifted sample `(φ(x), J y)` for given `φ(x)` and `J`.
pub fn lift_sample(s: &Sample, phi_x: &DVector<f64>, jac: &DMatrix<f64>) -> Sample {
    let y = jac * DVector::from_column_slice(&s.y);
    Sample { x: phi_x.iter().copied().collect(), y: y.iter().copied().collect(), t: s.t }
}

/// A time-dependent vector field `X_t(x)` with its x-Jacobian compiled.
#[derive(Debug, Clone)]
pub struct TimeDependentField {
    comps: Vec<Expr>,
    tape: Tape,
}

impl TimeDependentField {
    pub fn new(comps: Vec<Expr>) -> Result<TimeDependentField> {
        let n = comps.len();
        if n == 0 {
            return Err(Error::InvalidField("no components".into()));
        }
        for c in &comps {
            check_vars(c, n, true, "component").map_err(Error::InvalidField)?;
        }
        let comps: Vec<Expr> = comps.iter().map(Expr::simplified).collect();
        let mut out = comps.clone();
        for c in &comps {
            out.extend((1..=n).map(|j| differentiate(c, &Var::X(j))));
        }
        let mut vars: Vec<Var> = (1..=n).map(Var::X).collect();
        vars.push(Var::T);
        let tape = Tape::compile(&out, &vars)?;
        Ok(TimeDependentField { comps, tape })
    }

    /// An autonomous field.
    pub fn autonomous(v: &VectorField) -> TimeDependentField {
        TimeDependentField::new(v.components().to_vec()).expect("vector fields are valid")
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    /// The field frozen at time `t`.
    pub fn at_time(&self, t: f64) -> Result<VectorField> {
        let map = HashMap::from([(Var::T, Expr::constant(t))]);
        VectorField::new(self.comps.iter().map(|c| substitute(c, &map)).collect())
    }

    /// `(X_t(x), ∂X_t/∂x)`; `input` is `x` followed by `t`.
    fn eval(&self, input: &[f64], scratch: &mut Vec<f64>, out: &mut [f64]) -> Result<()> {
        self.tape.eval_into(input, scratch, out)?;
        Ok(())
    }
}

/// Solution of `dx/dt = X_t(x)` from time 0, together with `∂φ_t/∂x`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowPoint {
    pub x: DVector<f64>,
    pub jac: DMatrix<f64>,
}

/// Fixed-step RK4 flow of a time-dependent field, integrated jointly with
/// the variational equation `dJ/dt = (∂X_t/∂x) J`.
#[derive(Debug, Clone)]
pub struct NumericFlowMap {
    field: TimeDependentField,
    steps_per_unit: usize,
}

impl NumericFlowMap {
    pub fn new(field: TimeDependentField, steps_per_unit: usize) -> NumericFlowMap {
        NumericFlowMap { field, steps_per_unit: steps_per_unit.max(1) }
    }

    pub fn field(&self) -> &TimeDependentField {
        &self.field
    }

    pub fn steps_per_unit(&self) -> usize {
        self.steps_per_unit
    }

    /// Step count used to reach time `t`.
    pub fn steps_for(&self, t: f64) -> usize {
        ((self.steps_per_unit as f64 * t.abs()).ceil() as usize).max(1)
    }

    /// `φ_t(x0)` and its Jacobian.
    pub fn flow(&self, x0: &[f64], t: f64) -> Result<FlowPoint> {
        flow_map(&self.field, x0, t, self.steps_for(t))
    }
}

/// RK4 integration of `dx/dt = X_t(x)`, `dJ/dt = (∂X_t/∂x) J` from 0 to
/// `t` in `steps` equal steps.
pub fn flow_map(field: &TimeDependentField, x0: &[f64], t: f64, steps: usize) -> Result<FlowPoint> {
    let n = field.dim();
    if x0.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x0.len() });
    }
    let steps = steps.max(1);
    let h = t / steps as f64;
    // state: x (n) then J row-major (n²)
    let m = n + n * n;
    let mut state = vec![0.0; m];
    state[..n].copy_from_slice(x0);
    for i in 0..n {
        state[n + i * n + i] = 1.0;
    }
    let mut scratch = Vec::new();
    let mut fx = vec![0.0; n + n * n];
    let mut input = vec![0.0; n + 1];
    let mut rhs = |time: f64, st: &[f64], out: &mut [f64]| -> Result<()> {
        input[..n].copy_from_slice(&st[..n]);
        input[n] = time;
        field.eval(&input, &mut scratch, &mut fx).map_err(|e| match e {
            Error::Expr(ExprError::Domain { kind: DomainKind::NonFinite, .. }) => Error::FlowBlowUp { time },
            other => other,
        })?;
        out[..n].copy_from_slice(&fx[..n]);
        let a = &fx[n..];
        let j = &st[n..];
        for r in 0..n {
            for c in 0..n {
                out[n + r * n + c] = (0..n).map(|k| a[r * n + k] * j[k * n + c]).sum();
            }
        }
        Ok(())
    };
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    let mut tmp = vec![0.0; m];
    for step in 0..steps {
        let t0 = h * step as f64;
        rhs(t0, &state, &mut k1)?;
        for i in 0..m {
            tmp[i] = state[i] + 0.5 * h * k1[i];
        }
        rhs(t0 + 0.5 * h, &tmp, &mut k2)?;
        for i in 0..m {
            tmp[i] = state[i] + 0.5 * h * k2[i];
        }
        rhs(t0 + 0.5 * h, &tmp, &mut k3)?;
        for i in 0..m {
            tmp[i] = state[i] + h * k3[i];
        }
        rhs(t0 + h, &tmp, &mut k4)?;
        for i in 0..m {
            state[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::FlowBlowUp { time: t0 + h });
        }
    }
    Ok(FlowPoint { x: DVector::from_column_slice(&state[..n]), jac: DMatrix::from_row_slice(n, n, &state[n..]) })
}

/// `F₀²(φ_t(x), J y)` with `φ_t` from a numeric flow map.
pub fn pullback_numeric_eval(f0: &FinslerStructure, fm: &NumericFlowMap, s: &Sample, t: f64) -> Result<f64> {
    s.validate(f0.dim())?;
    let p = fm.flow(&s.x, t)?;
    f0.f2_at(&lift_sample(s, &p.x, &p.jac))
}
