//! Ricci flow families built from solitons, their verification against
//! `∂/∂t log F = -Ric`, the conformal flow of Einstein structures, and
//! recovery of a soliton from a flow family.
//!
//! A soliton `(F₀, V, λ)` yields `F²(t) = τ(t) F₀²(φ_t(x), (∂φ_t/∂x) y)`
//! with `τ(t) = 1 - 2λt` and `φ_t` generated by `X_t = V / τ(t)`.
//! Conversely `λ = -½ τ'(0)` and `V = X(0)`.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::expr::{differentiate, substitute, Expr, Var};
use crate::finsler::FinslerStructure;
use crate::lift::{
    flow_map, lift_sample, pullback_symbolic, NumericFlowMap, SymbolicDiffeo, TimeDependentField, VectorField,
    DEFAULT_STEPS_PER_UNIT,
};
use crate::sample::Sample;
use crate::soliton::{residual_report, ResidualReport, SolitonTriple};

/// Default central-difference step in `t`.
pub const DEFAULT_DT: f64 = 1e-4;

/// Default Ricci spread tolerance of the conformal flow.
pub const EINSTEIN_SPREAD_TOL: f64 = 1e-6;

/// Step used for τ'(0) when τ is only available as a function.
pub const TAU_DIFF_STEP: f64 = 1e-4;

/// `τ(t) = 1 - 2λt` as an expression in `t`.
pub fn tau_expr(lambda: f64) -> Expr {
    Expr::one() - Expr::constant(2.0 * lambda) * Expr::t()
}

/// `[0, 0.9/(2λ)]` for λ > 0, `[0, 1]` otherwise.
pub fn default_horizon(lambda: f64) -> f64 {
    if lambda > 0.0 {
        0.9 / (2.0 * lambda)
    } else {
        1.0
    }
}

/// `X_t = V · (1/τ(t))`, written so that `t = 0` simplifies back to `V`.
pub fn time_dependent_field(field: &VectorField, lambda: f64) -> TimeDependentField {
    let inv_tau = Expr::div(Expr::one(), tau_expr(lambda));
    TimeDependentField::new(field.components().iter().map(|v| v * &inv_tau).collect()).expect("x,t-only components")
}

/// Closed-form flow of `X_t = V/τ` when `V` is radial (`c x`), a planar
/// rotation (`ω(x2, -x1)`) or zero.
pub fn closed_form_flow(field: &VectorField, lambda: f64) -> Option<SymbolicDiffeo> {
    let n = field.dim();
    // ∫₀ᵗ ds/τ(s)
    let integral = if lambda == 0.0 {
        Expr::t()
    } else {
        Expr::constant(-0.5 / lambda) * Expr::log(tau_expr(lambda))
    };
    if field.is_zero() {
        return Some(SymbolicDiffeo::identity(n));
    }
    let probe = |x: Vec<f64>| field.eval(&x).ok();
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let c = probe(e1)?[0];
    if *field == VectorField::radial(n, c) {
        let factor = Expr::exp(Expr::constant(c) * integral);
        let phi = (1..=n).map(|i| Expr::x(i) * &factor).collect();
        return SymbolicDiffeo::new(phi, None).ok().map(|d| d.named("radial flow"));
    }
    if n == 2 {
        let omega = probe(vec![0.0, 1.0])?[0];
        if *field == VectorField::rotation().scaled(omega) {
            let angle = Expr::constant(omega) * integral;
            let (c, s) = (Expr::cos(angle.clone()), Expr::sin(angle));
            let phi = vec![Expr::x(1) * &c + Expr::x(2) * &s, Expr::x(2) * &c - Expr::x(1) * &s];
            return SymbolicDiffeo::new(phi, None).ok().map(|d| d.named("rotation flow"));
        }
    }
    None
}

/// The solution family generated by a soliton.
#[derive(Debug, Clone)]
pub struct FlowFamily {
    triple: SolitonTriple,
    field_t: TimeDependentField,
    flow: NumericFlowMap,
    closed_form: Option<SymbolicDiffeo>,
    symbolic: Arc<OnceLock<Option<FinslerStructure>>>,
}

/// `F²(t)` for a soliton; the flow maps are integrated on demand.
pub fn construct_flow(st: &SolitonTriple) -> FlowFamily {
    FlowFamily::new(st.clone(), DEFAULT_STEPS_PER_UNIT)
}

impl FlowFamily {
    pub fn new(triple: SolitonTriple, steps_per_unit: usize) -> FlowFamily {
        let field_t = time_dependent_field(&triple.field, triple.lambda);
        let closed_form = closed_form_flow(&triple.field, triple.lambda);
        FlowFamily {
            flow: NumericFlowMap::new(field_t.clone(), steps_per_unit),
            field_t,
            closed_form,
            triple,
            symbolic: Arc::default(),
        }
    }

    /// Drops the closed-form flow, forcing the numeric path only.
    pub fn without_closed_form(mut self) -> Self {
        self.closed_form = None;
        self.symbolic = Arc::default();
        self
    }

    pub fn triple(&self) -> &SolitonTriple {
        &self.triple
    }

    pub fn lambda(&self) -> f64 {
        self.triple.lambda
    }

    pub fn tau(&self, t: f64) -> f64 {
        1.0 - 2.0 * self.triple.lambda * t
    }

    pub fn tau_expr(&self) -> Expr {
        tau_expr(self.triple.lambda)
    }

    pub fn field_t(&self) -> &TimeDependentField {
        &self.field_t
    }

    pub fn flow_map(&self) -> &NumericFlowMap {
        &self.flow
    }

    pub fn closed_form(&self) -> Option<&SymbolicDiffeo> {
        self.closed_form.as_ref()
    }

    /// Time at which τ vanishes, if any lies ahead.
    pub fn critical_time(&self) -> Option<f64> {
        (self.triple.lambda > 0.0).then(|| 1.0 / (2.0 * self.triple.lambda))
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        if !(self.tau(t) > 0.0) {
            return Err(Error::DomainExceeded {
                t,
                critical_time: 1.0 / (2.0 * self.triple.lambda),
            });
        }
        Ok(())
    }

    /// `τ(t) F₀²(φ̃_t(s))` with `φ_t` integrated in `steps` RK4 steps.
    fn eval_numeric(&self, s: &Sample, t: f64, steps: usize) -> Result<(f64, Sample)> {
        self.check_time(t)?;
        s.validate(self.triple.f0.dim())?;
        let p = flow_map(&self.field_t, &s.x, t, steps)?;
        let lifted = lift_sample(s, &p.x, &p.jac);
        Ok((self.tau(t) * self.triple.f0.f2_at(&lifted)?, lifted))
    }

    /// `F²(t)` at `s` via the numeric flow map.
    pub fn evaluate(&self, s: &Sample, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.eval_numeric(s, t, self.flow.steps_for(t))?.0)
    }

    /// The family as one structure with `t` kept symbolic, when the flow is
    /// known in closed form.
    pub fn symbolic_family(&self) -> Option<&FinslerStructure> {
        self.symbolic
            .get_or_init(|| {
                let d = self.closed_form.as_ref()?;
                let pulled = pullback_symbolic(&self.triple.f0, d).ok()?;
                FinslerStructure::new(pulled.dim(), self.tau_expr() * pulled.f2()).ok()
            })
            .as_ref()
    }

    /// `F²(t)` at `s` via the closed-form family.
    pub fn evaluate_closed_form(&self, s: &Sample, t: f64) -> Result<Option<f64>> {
        self.check_time(t)?;
        match self.symbolic_family() {
            Some(f) => Ok(Some(f.f2_at(&Sample::new(s.x.clone(), s.y.clone()).at_time(t))?)),
            None => Ok(None),
        }
    }

    /// Residual of `∂/∂t log F = -Ric` at `(s, t)`.
    ///
    /// The numeric path differentiates the flowed family by central
    /// differences (same RK4 step count at `t ± dt`) and takes
    /// `Ric_{F(t)}(s) = Ric_{F₀}(φ̃_t(s)) / τ(t)`. The closed-form path, when
    /// available, differentiates and curvature-evaluates the symbolic family.
    pub fn flow_residual(&self, s: &Sample, t: f64, dt: f64) -> Result<FlowResidual> {
        if !(dt > 0.0) {
            return Err(Error::Invalid(format!("dt must be positive, got {dt}")));
        }
        self.check_time(t + dt)?;
        self.check_time(t - dt)?;
        let steps = self.flow.steps_for(t.abs() + dt);
        let (fp, _) = self.eval_numeric(s, t + dt, steps)?;
        let (fm, _) = self.eval_numeric(s, t - dt, steps)?;
        let (f2, lifted) = self.eval_numeric(s, t, steps)?;
        let dlog = (fp.ln() - fm.ln()) / (4.0 * dt);
        let ric_b = self.triple.f0.ricci_scalar(&lifted)? / self.tau(t);
        let mut row = FlowResidual {
            sample: s.clone(),
            t,
            f2,
            dlog_f: dlog,
            ric_lemma: ric_b,
            residual_lemma: dlog + ric_b,
            ric_closed: None,
            residual_closed: None,
        };
        if let Some(fam) = self.symbolic_family() {
            let at = |tt: f64| Sample::new(s.x.clone(), s.y.clone()).at_time(tt);
            let dlog_a = (fam.f2_at(&at(t + dt))?.ln() - fam.f2_at(&at(t - dt))?.ln()) / (4.0 * dt);
            let ric_a = fam.ricci_scalar(&at(t))?;
            row.ric_closed = Some(ric_a);
            row.residual_closed = Some(dlog_a + ric_a);
        }
        Ok(row)
    }

    /// Residuals over every `(sample, time)` pair.
    pub fn flow_residual_grid(&self, samples: &[Sample], times: &[f64], dt: f64) -> Result<FlowResidualReport> {
        let mut rows = Vec::with_capacity(samples.len() * times.len());
        for &t in times {
            for s in samples {
                rows.push(self.flow_residual(s, t, dt)?);
            }
        }
        Ok(FlowResidualReport::from_rows(rows))
    }

    /// The family in the form the converse direction consumes.
    pub fn as_flow_data(&self) -> FlowData {
        FlowData {
            f0: self.triple.f0.clone(),
            tau: TauSpec::Symbolic(self.tau_expr()),
            field_t: self.field_t.components().to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResidual {
    pub sample: Sample,
    pub t: f64,
    pub f2: f64,
    /// Central difference of `log F`.
    pub dlog_f: f64,
    /// `Ric_{F₀}(φ̃_t(s)) / τ(t)`
    pub ric_lemma: f64,
    pub residual_lemma: f64,
    pub ric_closed: Option<f64>,
    pub residual_closed: Option<f64>,
}

impl FlowResidual {
    /// Disagreement between the two Ricci paths, if both ran.
    pub fn path_gap(&self) -> Option<f64> {
        self.ric_closed.map(|a| (a - self.ric_lemma).abs())
    }

    /// Largest residual over the paths that ran.
    pub fn max_abs(&self) -> f64 {
        self.residual_lemma.abs().max(self.residual_closed.map_or(0.0, f64::abs))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowResidualReport {
    pub rows: Vec<FlowResidual>,
    pub max_lemma: f64,
    pub rms_lemma: f64,
    pub max_closed: Option<f64>,
    pub max_path_gap: Option<f64>,
}

impl FlowResidualReport {
    fn from_rows(rows: Vec<FlowResidual>) -> FlowResidualReport {
        let max_lemma = rows.iter().fold(0.0f64, |m, r| m.max(r.residual_lemma.abs()));
        let rms_lemma = if rows.is_empty() {
            0.0
        } else {
            (rows.iter().map(|r| r.residual_lemma.powi(2)).sum::<f64>() / rows.len() as f64).sqrt().min(max_lemma)
        };
        let fold = |f: fn(&FlowResidual) -> Option<f64>| {
            rows.iter().filter_map(f).fold(None, |m: Option<f64>, v| Some(m.map_or(v.abs(), |m| m.max(v.abs()))))
        };
        let max_closed = fold(|r| r.residual_closed);
        let max_path_gap = fold(|r| r.path_gap());
        FlowResidualReport { rows, max_lemma, rms_lemma, max_closed, max_path_gap }
    }

    /// Largest residual over both paths.
    pub fn max(&self) -> f64 {
        self.max_lemma.max(self.max_closed.unwrap_or(0.0))
    }
}

/// `n` equally spaced times in `[0, tmax]`.
pub fn time_grid(tmax: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|k| tmax * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Conformal factor trajectory of `F²(t) = c(t) F₀²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalTrajectory {
    pub times: Vec<f64>,
    pub c: Vec<f64>,
    /// Spread (max - min) of `Ric_{F(t)}` over the samples at each time.
    pub spread: Vec<f64>,
    /// Mean of `Ric_{F₀}` over the samples.
    pub ric0: f64,
}

/// Explicit stepping of `c' = -2 c Ric_{F(t)}` for an Einstein `F₀`, where
/// `Ric_{cF₀²} = Ric_{F₀} / c` is rechecked for constancy at every step.
pub fn integrate_conformal_flow(
    f0: &FinslerStructure,
    samples: &[Sample],
    dt: f64,
    tmax: f64,
    spread_tol: f64,
) -> Result<ConformalTrajectory> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(dt > 0.0) || !(tmax >= 0.0) {
        return Err(Error::Invalid(format!("need dt > 0 and tmax >= 0, got dt = {dt}, tmax = {tmax}")));
    }
    let ric: Vec<f64> = samples.iter().map(|s| f0.ricci_scalar(s)).collect::<Result<_>>()?;
    let (lo, hi) = ric.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
    let mean = ric.iter().sum::<f64>() / ric.len() as f64;
    let steps = (tmax / dt).round() as usize;
    let mut traj = ConformalTrajectory { times: vec![], c: vec![], spread: vec![], ric0: mean };
    let mut c = 1.0;
    for k in 0..=steps {
        let time = k as f64 * dt;
        if !(c > 0.0) {
            return Err(Error::StepUnderflow { time, value: c });
        }
        let spread = (hi - lo) / c;
        if !(spread <= spread_tol) {
            return Err(Error::NotEinstein { spread, tolerance: spread_tol, time });
        }
        traj.times.push(time);
        traj.c.push(c);
        traj.spread.push(spread);
        if k < steps {
            c += dt * (-2.0 * c * (mean / c));
        }
    }
    Ok(traj)
}

/// How τ is known to the converse direction.
#[derive(Clone)]
pub enum TauSpec {
    /// An expression in `t`; τ'(0) is taken exactly.
    Symbolic(Expr),
    /// Point values only; τ'(0) by central difference.
    Sampled(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for TauSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TauSpec::Symbolic(e) => write!(f, "Symbolic({e})"),
            TauSpec::Sampled(_) => f.write_str("Sampled(..)"),
        }
    }
}

fn at_t(e: &Expr, t: f64) -> Expr {
    substitute(e, &HashMap::from([(Var::T, Expr::constant(t))]))
}

impl TauSpec {
    pub fn value(&self, t: f64) -> Result<f64> {
        match self {
            TauSpec::Symbolic(e) => {
                let v = at_t(e, t);
                v.as_const().ok_or_else(|| Error::Invalid(format!("tau `{e}` depends on more than t")))
            }
            TauSpec::Sampled(f) => Ok(f(t)),
        }
    }

    pub fn derivative_at_zero(&self) -> Result<f64> {
        match self {
            TauSpec::Symbolic(e) => TauSpec::Symbolic(differentiate(e, &Var::T)).value(0.0),
            TauSpec::Sampled(f) => Ok((f(TAU_DIFF_STEP) - f(-TAU_DIFF_STEP)) / (2.0 * TAU_DIFF_STEP)),
        }
    }
}

/// A flow family in the form `F²(t) = τ(t) φ̃*_t(F₀²)`, described by τ and
/// the generating field `X_t`.
#[derive(Debug, Clone)]
pub struct FlowData {
    pub f0: FinslerStructure,
    pub tau: TauSpec,
    /// Components of `X_t` in `x` and `t`.
    pub field_t: Vec<Expr>,
}

#[derive(Debug, Clone)]
pub struct ExtractedSoliton {
    pub triple: SolitonTriple,
    pub tau_prime: f64,
    pub report: ResidualReport,
}

/// `λ = -½ τ'(0)`, `V = X(0)`, with the soliton residuals at `samples`.
pub fn extract_soliton(data: &FlowData, samples: &[Sample]) -> Result<ExtractedSoliton> {
    let tau0 = data.tau.value(0.0)?;
    if (tau0 - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid(format!("flow family must have tau(0) = 1, got {tau0}")));
    }
    let tau_prime = data.tau.derivative_at_zero()?;
    let lambda = -0.5 * tau_prime;
    let field = VectorField::new(data.field_t.iter().map(|c| at_t(c, 0.0)).collect())?;
    let triple = SolitonTriple::new(data.f0.clone(), field, lambda)?;
    let report = residual_report(&triple, samples)?;
    Ok(ExtractedSoliton { triple, tau_prime, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics;

    #[test]
    fn x_t_at_zero_is_v() {
        let v = VectorField::parse(&["x1*x2", "sin(x1)"]).unwrap();
        let x = time_dependent_field(&v, 0.7);
        assert_eq!(x.at_time(0.0).unwrap(), v);
    }

    #[test]
    fn domain_boundary() {
        let st = SolitonTriple::new(metrics::euclidean(2), VectorField::radial(2, 0.5), 0.5).unwrap();
        let fam = construct_flow(&st);
        let s = Sample::new(vec![0.2, 0.1], vec![1.0, 0.0]);
        match fam.evaluate(&s, 1.0) {
            Err(Error::DomainExceeded { critical_time, .. }) => assert_eq!(critical_time, 1.0),
            other => panic!("{other:?}"),
        }
        assert_eq!(fam.evaluate(&s, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn closed_forms_are_recognised() {
        assert!(closed_form_flow(&VectorField::radial(3, 0.2), 0.5).is_some());
        assert!(closed_form_flow(&VectorField::rotation().scaled(2.0), 1.0).is_some());
        assert!(closed_form_flow(&VectorField::zero(2), 1.0).is_some());
        assert!(closed_form_flow(&VectorField::parse(&["x1^2", "0"]).unwrap(), 1.0).is_none());
    }

    #[test]
    fn sampled_tau_derivative() {
        let tau = TauSpec::Sampled(Arc::new(|t| 1.0 - 0.6 * t));
        assert!((tau.derivative_at_zero().unwrap() + 0.6).abs() < 1e-12);
        assert_eq!(TauSpec::Symbolic(tau_expr(0.3)).derivative_at_zero().unwrap(), -0.6);
    }

    #[test]
    fn conformal_flow_rejects_bad_steps() {
        let s = vec![Sample::new(vec![0.0, 0.0], vec![1.0, 0.0])];
        assert!(integrate_conformal_flow(&metrics::euclidean(2), &s, 0.0, 1.0, 1e-6).is_err());
        assert!(matches!(
            integrate_conformal_flow(&metrics::euclidean(2), &[], 0.1, 1.0, 1e-6),
            Err(Error::EmptySamples)
        ));
    }

    #[test]
    fn time_grid_endpoints() {
        assert_eq!(time_grid(0.4, 3), vec![0.0, 0.2, 0.4]);
        assert_eq!(time_grid(1.0, 1), vec![0.0]);
    }
}
