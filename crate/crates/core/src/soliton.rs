//! Residuals of the Finslerian Ricci soliton equations and least-squares
//! estimation of the soliton constant and field.
//!
//! Scalar form: `2F²Ric + L_V̂F² = 2λF²`.
//! Tensor form: `2Ric_jk + L_V̂g_jk = 2λg_jk`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::finsler::FinslerStructure;
use crate::lift::{LieDerivative, VectorField};
use crate::sample::Sample;

/// Singular values below this (relative to the largest, or absolutely when
/// the largest is below one) mark null directions of the estimation problem.
pub const NULL_SINGULAR_VALUE: f64 = 1e-10;

/// A null direction whose λ-component exceeds this leaves λ undetermined.
pub const LAMBDA_NULL_COMPONENT: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct SolitonTriple {
    pub f0: FinslerStructure,
    pub field: VectorField,
    pub lambda: f64,
}

impl SolitonTriple {
    pub fn new(f0: FinslerStructure, field: VectorField, lambda: f64) -> Result<SolitonTriple> {
        if f0.dim() != field.dim() {
            return Err(Error::DimensionMismatch { expected: f0.dim(), got: field.dim() });
        }
        if !lambda.is_finite() {
            return Err(Error::Invalid(format!("soliton constant must be finite, got {lambda}")));
        }
        Ok(SolitonTriple { f0, field, lambda })
    }
}

/// Sign of λ, stated descriptively.
pub fn lambda_sign(lambda: f64) -> &'static str {
    if lambda > 0.0 {
        "positive"
    } else if lambda < 0.0 {
        "negative"
    } else {
        "zero"
    }
}

/// Scalar residual at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarResidual {
    pub f2: f64,
    pub ric: f64,
    pub lie_f2: f64,
    /// `2F²Ric + L_V̂F² - 2λF²`
    pub raw: f64,
    /// `raw / (2F²)`
    pub relative: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualRow {
    pub sample: Sample,
    pub scalar: ScalarResidual,
    /// Max-norm of the tensor residual.
    pub tensor_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub lambda: f64,
    pub rows: Vec<ResidualRow>,
    /// RMS and max of the relative scalar residual.
    pub rms: f64,
    pub max: f64,
    pub raw_rms: f64,
    pub raw_max: f64,
    pub tensor_max: f64,
}

fn rms_max(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (mut sum, mut count, mut max) = (0.0, 0usize, 0.0f64);
    for v in values {
        sum += v * v;
        count += 1;
        max = max.max(v.abs());
    }
    let rms = if count == 0 { 0.0 } else { (sum / count as f64).sqrt() };
    // rounding in the mean can push rms a hair above max
    (rms.min(max), max)
}

impl ResidualReport {
    fn from_rows(lambda: f64, rows: Vec<ResidualRow>) -> ResidualReport {
        let (rms, max) = rms_max(rows.iter().map(|r| r.scalar.relative));
        let (raw_rms, raw_max) = rms_max(rows.iter().map(|r| r.scalar.raw));
        let (_, tensor_max) = rms_max(rows.iter().map(|r| r.tensor_max));
        ResidualReport { lambda, rows, rms, max, raw_rms, raw_max, tensor_max }
    }
}

/// Soliton residuals with the Lie derivative compiled once.
#[derive(Debug, Clone)]
pub struct SolitonEvaluator {
    triple: SolitonTriple,
    lie: LieDerivative,
}

impl SolitonEvaluator {
    pub fn new(triple: SolitonTriple) -> Result<SolitonEvaluator> {
        let lie = LieDerivative::new(&triple.f0, &triple.field)?;
        Ok(SolitonEvaluator { triple, lie })
    }

    pub fn triple(&self) -> &SolitonTriple {
        &self.triple
    }

    pub fn scalar(&self, s: &Sample) -> Result<ScalarResidual> {
        let f2 = self.triple.f0.f2_at(s)?;
        let ric = self.triple.f0.ricci_scalar(s)?;
        let (lie_f2, _) = self.lie.eval(s)?;
        let raw = 2.0 * f2 * ric + lie_f2 - 2.0 * self.triple.lambda * f2;
        Ok(ScalarResidual { f2, ric, lie_f2, raw, relative: raw / (2.0 * f2) })
    }

    pub fn tensor(&self, s: &Sample) -> Result<DMatrix<f64>> {
        let g = self.triple.f0.fundamental_tensor(s)?.g;
        let ric = self.triple.f0.akbar_zadeh_ricci(s)?;
        let (_, lg) = self.lie.eval(s)?;
        Ok(ric * 2.0 + lg - g * (2.0 * self.triple.lambda))
    }

    pub fn report(&self, samples: &[Sample]) -> Result<ResidualReport> {
        let rows = samples
            .iter()
            .map(|s| {
                Ok(ResidualRow { sample: s.clone(), scalar: self.scalar(s)?, tensor_max: self.tensor(s)?.abs().max() })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ResidualReport::from_rows(self.triple.lambda, rows))
    }
}

/// `2F₀²Ric + L_V̂F₀² - 2λF₀²` at `s`.
pub fn scalar_residual(st: &SolitonTriple, s: &Sample) -> Result<ScalarResidual> {
    SolitonEvaluator::new(st.clone())?.scalar(s)
}

/// `2Ric_jk + L_V̂g_jk - 2λg_jk` at `s`.
pub fn tensor_residual(st: &SolitonTriple, s: &Sample) -> Result<DMatrix<f64>> {
    SolitonEvaluator::new(st.clone())?.tensor(s)
}

pub fn residual_report(st: &SolitonTriple, samples: &[Sample]) -> Result<ResidualReport> {
    SolitonEvaluator::new(st.clone())?.report(samples)
}

/// Least-squares λ for a fixed field:
/// `λ* = Σ a_s b_s / Σ b_s²` with `a = 2F²Ric + L_V̂F²`, `b = 2F²`.
pub fn estimate_lambda(f0: &FinslerStructure, field: &VectorField, samples: &[Sample]) -> Result<(f64, ResidualReport)> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let probe = SolitonEvaluator::new(SolitonTriple::new(f0.clone(), field.clone(), 0.0)?)?;
    let (mut ab, mut bb) = (0.0, 0.0);
    for s in samples {
        let r = probe.scalar(s)?;
        let a = r.raw;
        let b = 2.0 * r.f2;
        ab += a * b;
        bb += b * b;
    }
    let lambda = ab / bb;
    let report = SolitonEvaluator::new(SolitonTriple::new(f0.clone(), field.clone(), lambda)?)?.report(samples)?;
    Ok((lambda, report))
}

#[derive(Debug, Clone)]
pub struct FieldEstimate {
    /// One coefficient per basis field; null directions contribute nothing.
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    pub field: VectorField,
    pub singular_values: Vec<f64>,
    /// Unit vectors in `(c_1..c_m, λ)` space the data cannot see.
    pub null_directions: Vec<Vec<f64>>,
    pub report: ResidualReport,
}

struct LeastSquares {
    x: DVector<f64>,
    singular_values: Vec<f64>,
    null_directions: Vec<Vec<f64>>,
}

/// Minimum-norm solution of `a x ≈ b` by SVD.
fn least_squares(a: DMatrix<f64>, b: &DVector<f64>) -> LeastSquares {
    let cols = a.ncols();
    let svd = a.svd(true, true);
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let top = sigma.iter().copied().fold(0.0, f64::max);
    let cut = NULL_SINGULAR_VALUE * top.max(1.0);
    let v_t = svd.v_t.as_ref().expect("requested");
    let u = svd.u.as_ref().expect("requested");
    let mut x = DVector::zeros(cols);
    let mut null_directions = Vec::new();
    for (k, &sv) in sigma.iter().enumerate() {
        let row = v_t.row(k);
        if sv <= cut {
            null_directions.push(row.iter().copied().collect::<Vec<f64>>());
            continue;
        }
        let coef = u.column(k).dot(b) / sv;
        x += row.transpose() * coef;
    }
    LeastSquares { x, singular_values: sigma, null_directions }
}

/// Rows `L_{V̂_m}F²` per basis field, plus `F²` and `F² Ric`.
fn design(f0: &FinslerStructure, basis: &[VectorField], samples: &[Sample]) -> Result<(DMatrix<f64>, Vec<(f64, f64)>)> {
    let lies = basis.iter().map(|v| LieDerivative::new(f0, v)).collect::<Result<Vec<_>>>()?;
    let mut a = DMatrix::zeros(samples.len(), basis.len());
    let mut scalars = Vec::with_capacity(samples.len());
    for (r, s) in samples.iter().enumerate() {
        for (c, lie) in lies.iter().enumerate() {
            a[(r, c)] = lie.eval(s)?.0;
        }
        let f2 = f0.f2_at(s)?;
        scalars.push((f2, f2 * f0.ricci_scalar(s)?));
    }
    Ok((a, scalars))
}

fn combine(f0: &FinslerStructure, basis: &[VectorField], coefficients: &[f64]) -> Result<VectorField> {
    let comps = (0..f0.dim())
        .map(|i| Expr::sum(basis.iter().zip(coefficients).map(|(v, &c)| Expr::constant(c) * &v.components()[i])))
        .collect();
    VectorField::new(comps)
}

fn check_counts(samples: &[Sample], unknowns: usize) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if samples.len() < unknowns {
        return Err(Error::InsufficientSamples { needed: unknowns, got: samples.len() });
    }
    Ok(())
}

/// Joint least squares over `(c_1..c_m, λ)` for `V = Σ c_m V_m`.
///
/// The raw scalar residual is linear in the unknowns: the design columns
/// are `L_{V̂_m}F²` and `-2F²`, the target is `-2F²Ric`. The minimum-norm
/// solution is returned; directions with vanishing singular values are
/// reported. It is an error only if such a direction moves λ.
pub fn estimate_vector_field(f0: &FinslerStructure, basis: &[VectorField], samples: &[Sample]) -> Result<FieldEstimate> {
    let m = basis.len();
    check_counts(samples, m + 1)?;
    let (lie, scalars) = design(f0, basis, samples)?;
    let mut a = lie.insert_column(m, 0.0);
    let mut b = DVector::zeros(samples.len());
    for (r, &(f2, f2_ric)) in scalars.iter().enumerate() {
        a[(r, m)] = -2.0 * f2;
        b[r] = -2.0 * f2_ric;
    }
    let ls = least_squares(a, &b);
    if ls.null_directions.iter().any(|d| d[m].abs() > LAMBDA_NULL_COMPONENT) {
        return Err(Error::RankDeficient { singular_values: ls.singular_values });
    }
    let coefficients: Vec<f64> = ls.x.iter().take(m).copied().collect();
    let lambda = ls.x[m];
    let field = combine(f0, basis, &coefficients)?;
    let report = SolitonEvaluator::new(SolitonTriple::new(f0.clone(), field.clone(), lambda)?)?.report(samples)?;
    Ok(FieldEstimate {
        coefficients,
        lambda,
        field,
        singular_values: ls.singular_values,
        null_directions: ls.null_directions,
        report,
    })
}

/// Least squares over `c_1..c_m` with λ held fixed.
///
/// Needed when a basis field moves `F²` by a multiple of itself (the
/// radial field on flat space): then `c` and `λ` trade off exactly and
/// only their relation is determined. Null directions are reported, never
/// an error.
pub fn estimate_field_coefficients(
    f0: &FinslerStructure,
    basis: &[VectorField],
    lambda: f64,
    samples: &[Sample],
) -> Result<FieldEstimate> {
    check_counts(samples, basis.len().max(1))?;
    let (a, scalars) = design(f0, basis, samples)?;
    let b = DVector::from_iterator(samples.len(), scalars.iter().map(|&(f2, f2_ric)| 2.0 * lambda * f2 - 2.0 * f2_ric));
    let ls = least_squares(a, &b);
    let coefficients: Vec<f64> = ls.x.iter().copied().collect();
    let field = combine(f0, basis, &coefficients)?;
    let report = SolitonEvaluator::new(SolitonTriple::new(f0.clone(), field.clone(), lambda)?)?.report(samples)?;
    Ok(FieldEstimate {
        coefficients,
        lambda,
        field,
        singular_values: ls.singular_values,
        null_directions: ls.null_directions,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics;
    use crate::sample::random_samples;

    #[test]
    fn flat_static_residual_vanishes() {
        let st = SolitonTriple::new(metrics::euclidean(2), VectorField::zero(2), 0.0).unwrap();
        let s = Sample::new(vec![0.1, 0.2], vec![1.0, -0.5]);
        assert_eq!(scalar_residual(&st, &s).unwrap().raw, 0.0);
        assert_eq!(tensor_residual(&st, &s).unwrap().abs().max(), 0.0);
    }

    #[test]
    fn empty_inputs() {
        let f = metrics::euclidean(2);
        assert!(matches!(estimate_lambda(&f, &VectorField::zero(2), &[]), Err(Error::EmptySamples)));
        let basis = [VectorField::radial(2, 1.0), VectorField::rotation()];
        let few = random_samples(2, 2, 1, -1.0, 1.0);
        assert!(matches!(estimate_vector_field(&f, &basis, &few), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn empty_basis_matches_lambda_estimate() {
        let f = metrics::conformal_sphere(2);
        let samples = random_samples(2, 12, 3, -1.0, 1.0);
        let (l1, _) = estimate_lambda(&f, &VectorField::zero(2), &samples).unwrap();
        let est = estimate_vector_field(&f, &[], &samples).unwrap();
        assert!((l1 - est.lambda).abs() < 1e-12);
        assert!(est.coefficients.is_empty());
    }

    #[test]
    fn rms_never_exceeds_max() {
        let (rms, max) = rms_max([1e-300, 1e-300, 1e-300].into_iter());
        assert!(rms <= max);
    }

    #[test]
    fn sign_labels() {
        assert_eq!(lambda_sign(0.5), "positive");
        assert_eq!(lambda_sign(-1.0), "negative");
        assert_eq!(lambda_sign(0.0), "zero");
    }
}
