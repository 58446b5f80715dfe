//! Pullback and scaling identities as executable suites.
//!
//! For `F' = φ̃*F₀`, i.e. `F'(x, y) = F₀(φ(x), J y)` with `J = ∂φ/∂x` and
//! `H^a_jk = ∂²φ^a/∂x^j∂x^k`, the suites compare quantities computed on
//! the pulled-back structure against quantities of `F₀` evaluated at the
//! lifted sample `(φ(x), J y)` and transported:
//!
//! * `g' = Jᵀ g J` and `∇_y F'² = Jᵀ ∇_y F₀²`
//! * `γ'^i_jk = (J⁻¹)^i_a (γ^a_bc J^b_j J^c_k + H^a_jk)
//!   + g'^{is} (C'_sjm P^m_k - C'_jkm P^m_s + C'_ksm P^m_j)`
//!   where `C'` is the transported Cartan tensor and
//!   `P^m_k = (J⁻¹)^m_c H^c_kl y^l`; the Cartan terms appear because `g`
//!   depends on `y` and `y` itself is transported by an x-dependent `J`
//! * `G' = J⁻¹ (G + ½ H(y, y))`
//! * `Ric' = Ric` at the lifted sample
//!
//! and, for `μF₀`, `g ↦ μ² g`, `γ` and `G` unchanged, `R ↦ R/μ²`,
//! `Ric ↦ Ric/μ²`.

use nalgebra::{DMatrix, DVector};

use super::tolerances::{abs_err, rel_err, Tolerance, HOMOGENEITY, PULLBACK, SCALING, SCALING_INVARIANT};
use crate::error::{Error, Result};
use crate::expr::{differentiate, Expr, Tape, Var};
use crate::finsler::{min_eigenvalue, Christoffel, FinslerStructure};
use crate::lift::{lift_sample, pullback_symbolic, SymbolicDiffeo};
use crate::sample::Sample;

/// One named identity checked over a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationCheck {
    pub name: String,
    pub residuals: Vec<f64>,
    pub max: f64,
    pub rms: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: Option<String>,
}

impl VerificationCheck {
    /// Residuals that failed to evaluate are recorded as `+∞`.
    pub fn new(name: impl Into<String>, residuals: Vec<f64>, tolerance: Tolerance) -> VerificationCheck {
        VerificationCheck::with_tolerance(name, residuals, tolerance.value)
    }

    pub fn with_tolerance(name: impl Into<String>, residuals: Vec<f64>, tolerance: f64) -> VerificationCheck {
        let max = residuals.iter().fold(0.0f64, |m, r| if r.is_nan() { f64::INFINITY } else { m.max(r.abs()) });
        let rms = if residuals.is_empty() {
            0.0
        } else {
            (residuals.iter().map(|r| r * r).sum::<f64>() / residuals.len() as f64).sqrt().min(max)
        };
        VerificationCheck { name: name.into(), residuals, max, rms, tolerance, pass: max <= tolerance, detail: None }
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub suite: String,
    pub case: String,
    pub checks: Vec<VerificationCheck>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>, case: impl Into<String>, checks: Vec<VerificationCheck>) -> Self {
        let pass = checks.iter().all(|c| c.pass);
        VerificationReport { suite: suite.into(), case: case.into(), checks, pass }
    }

    pub fn check(&self, name: &str) -> Option<&VerificationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Largest residual over all checks.
    pub fn max(&self) -> f64 {
        self.checks.iter().fold(0.0, |m, c| m.max(c.max))
    }
}

fn or_inf(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::INFINITY)
}

fn case_name(f: &FinslerStructure, d: Option<&SymbolicDiffeo>, mu: Option<f64>) -> String {
    let mut s = f.name().unwrap_or("F").to_string();
    if let Some(d) = d {
        s.push_str(" x ");
        s.push_str(d.name().unwrap_or("diffeo"));
    }
    if let Some(mu) = mu {
        s.push_str(&format!(" mu={mu}"));
    }
    s
}

/// `φ`, `J` and `H` of a diffeomorphism, compiled.
struct DiffeoEval {
    n: usize,
    tape: Tape,
}

struct DiffeoAt {
    phi: DVector<f64>,
    jac: DMatrix<f64>,
    jac_inv: DMatrix<f64>,
    /// `H[(a * n + j) * n + k] = ∂²φ^a/∂x^j∂x^k`
    hess: Vec<f64>,
}

impl DiffeoEval {
    fn new(d: &SymbolicDiffeo) -> Result<DiffeoEval> {
        let n = d.dim();
        let mut out: Vec<Expr> = d.components().to_vec();
        out.extend(d.jacobian_exprs().iter().flatten().cloned());
        for row in d.jacobian_exprs() {
            for djac in row {
                out.extend((1..=n).map(|k| differentiate(djac, &Var::X(k))));
            }
        }
        let mut vars: Vec<Var> = (1..=n).map(Var::X).collect();
        vars.push(Var::T);
        Ok(DiffeoEval { n, tape: Tape::compile(&out, &vars)? })
    }

    fn at(&self, s: &Sample) -> Result<DiffeoAt> {
        let n = self.n;
        let mut input = s.x.clone();
        input.push(s.t);
        let v = self.tape.eval(&input)?;
        let jac = DMatrix::from_row_slice(n, n, &v[n..n + n * n]);
        let jac_inv = jac
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidDiffeo(format!("singular Jacobian at {s}")))?;
        Ok(DiffeoAt { phi: DVector::from_column_slice(&v[..n]), jac, jac_inv, hess: v[n + n * n..].to_vec() })
    }
}

fn flat(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Pulled-back structure plus the per-sample transport data.
struct Pullback {
    f0: FinslerStructure,
    pulled: FinslerStructure,
    diffeo: DiffeoEval,
}

impl Pullback {
    fn new(f0: &FinslerStructure, d: &SymbolicDiffeo) -> Result<Pullback> {
        Ok(Pullback { f0: f0.clone(), pulled: pullback_symbolic(f0, d)?, diffeo: DiffeoEval::new(d)? })
    }

    fn lifted(&self, s: &Sample) -> Result<(DiffeoAt, Sample)> {
        let at = self.diffeo.at(s)?;
        let lifted = lift_sample(s, &at.phi, &at.jac);
        Ok((at, lifted))
    }

    fn gradient_residual(&self, s: &Sample) -> Result<f64> {
        let (at, lifted) = self.lifted(s)?;
        let left = DVector::from_vec(self.pulled.metric_eval(s)?.df2_dy);
        let right = at.jac.transpose() * DVector::from_vec(self.f0.metric_eval(&lifted)?.df2_dy);
        Ok(rel_err(left.as_slice(), right.as_slice()))
    }

    fn metric_residual(&self, s: &Sample) -> Result<f64> {
        let (at, lifted) = self.lifted(s)?;
        let left = self.pulled.metric_eval(s)?.g;
        let right = at.jac.transpose() * self.f0.metric_eval(&lifted)?.g * &at.jac;
        Ok(rel_err(&flat(&left), &flat(&right)))
    }

    /// Transported Christoffel symbols of `F₀`.
    fn christoffel_transported(&self, s: &Sample) -> Result<Christoffel> {
        let n = self.f0.dim();
        let (at, lifted) = self.lifted(s)?;
        let gamma0 = self.f0.christoffel(&lifted)?;
        let m0 = self.f0.metric_eval(&lifted)?;
        let (j, ji, h) = (&at.jac, &at.jac_inv, &at.hess);
        let hh = |a: usize, b: usize, c: usize| h[(a * n + b) * n + c];
        let c0 = |a: usize, b: usize, c: usize| m0.cartan[(a * n + b) * n + c];
        let gp = j.transpose() * &m0.g * j;
        let gp_inv = gp.try_inverse().ok_or_else(|| Error::NotPositiveDefinite { sample: s.to_string() })?;

        // C'_abc = J^p_a J^q_b J^r_c C_pqr
        let mut cp = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut acc = 0.0;
                    for p in 0..n {
                        for q in 0..n {
                            for r in 0..n {
                                acc += j[(p, a)] * j[(q, b)] * j[(r, c)] * c0(p, q, r);
                            }
                        }
                    }
                    cp[(a * n + b) * n + c] = acc;
                }
            }
        }
        let cpp = |a: usize, b: usize, c: usize| cp[(a * n + b) * n + c];
        // P^m_k = (J⁻¹)^m_c H^c_kl y^l
        let mut p = DMatrix::zeros(n, n);
        for m in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for c in 0..n {
                    for l in 0..n {
                        acc += ji[(m, c)] * hh(c, k, l) * s.y[l];
                    }
                }
                p[(m, k)] = acc;
            }
        }

        let mut out = Christoffel::zeros(n);
        for i in 0..n {
            for jj in 0..n {
                for k in 0..n {
                    let mut acc = 0.0;
                    for a in 0..n {
                        let mut inner = hh(a, jj, k);
                        for b in 0..n {
                            for c in 0..n {
                                inner += gamma0.get(a, b, c) * j[(b, jj)] * j[(c, k)];
                            }
                        }
                        acc += ji[(i, a)] * inner;
                    }
                    for sidx in 0..n {
                        let mut corr = 0.0;
                        for m in 0..n {
                            corr += cpp(sidx, jj, m) * p[(m, k)] - cpp(jj, k, m) * p[(m, sidx)]
                                + cpp(k, sidx, m) * p[(m, jj)];
                        }
                        acc += gp_inv[(i, sidx)] * corr;
                    }
                    out.set(i, jj, k, acc);
                }
            }
        }
        Ok(out)
    }

    fn christoffel_residual(&self, s: &Sample) -> Result<f64> {
        let left = self.pulled.christoffel(s)?;
        let right = self.christoffel_transported(s)?;
        Ok(rel_err(left.as_slice(), right.as_slice()))
    }

    fn spray_transported(&self, s: &Sample) -> Result<DVector<f64>> {
        let n = self.f0.dim();
        let (at, lifted) = self.lifted(s)?;
        let mut v = self.f0.spray(&lifted)?;
        for a in 0..n {
            let mut hy = 0.0;
            for jj in 0..n {
                for k in 0..n {
                    hy += at.hess[(a * n + jj) * n + k] * s.y[jj] * s.y[k];
                }
            }
            v[a] += 0.5 * hy;
        }
        Ok(&at.jac_inv * v)
    }

    fn spray_residual(&self, s: &Sample) -> Result<f64> {
        let left = self.pulled.spray(s)?;
        let right = self.spray_transported(s)?;
        Ok(rel_err(left.as_slice(), right.as_slice()))
    }

    fn ricci_residual(&self, s: &Sample) -> Result<f64> {
        let (_, lifted) = self.lifted(s)?;
        Ok(rel_err(&[self.pulled.ricci_scalar(s)?], &[self.f0.ricci_scalar(&lifted)?]))
    }
}

/// The pulled-back structure is again a Finsler structure: it evaluates,
/// is 2-homogeneous and strongly convex, and its y-derivatives are the
/// transported y-derivatives of `F₀²`.
pub fn verify_lemma1(f0: &FinslerStructure, d: &SymbolicDiffeo, samples: &[Sample]) -> Result<VerificationReport> {
    let pb = Pullback::new(f0, d)?;
    let mut eval = Vec::new();
    let mut homog = Vec::new();
    let mut convex = Vec::new();
    let mut min_eig = f64::INFINITY;
    for s in samples {
        let base = pb.pulled.f2_at(s);
        eval.push(if base.is_ok() { 0.0 } else { 1.0 });
        homog.push(or_inf(base.clone().and_then(|f2| {
            let mut worst: f64 = 0.0;
            for l in [0.5, 2.0, 3.0] {
                let scaled = pb.pulled.f2_at(&s.scaled_y(l))?;
                worst = worst.max((scaled - l * l * f2).abs() / (l * l * f2.abs()));
            }
            Ok(worst)
        })));
        convex.push(or_inf(pb.pulled.metric_eval(s).map(|m| {
            let e = min_eigenvalue(&m.g);
            min_eig = min_eig.min(e);
            (-e).max(0.0)
        })));
    }
    let gradient = samples.iter().map(|s| or_inf(pb.gradient_residual(s))).collect();
    let metric = samples.iter().map(|s| or_inf(pb.metric_residual(s))).collect();
    let checks = vec![
        VerificationCheck::with_tolerance("evaluation", eval, 0.0),
        VerificationCheck::new("homogeneity", homog, HOMOGENEITY),
        VerificationCheck::with_tolerance("strong convexity", convex, 0.0)
            .detail(format!("min eigenvalue of g {min_eig:.6e}")),
        VerificationCheck::new("gradient identity", gradient, PULLBACK),
        VerificationCheck::new("metric identity", metric, PULLBACK),
    ];
    Ok(VerificationReport::new("lemma1", case_name(f0, Some(d), None), checks))
}

/// Christoffel symbols and spray of the pullback against the transported
/// quantities of `F₀`.
pub fn verify_lemma2(f0: &FinslerStructure, d: &SymbolicDiffeo, samples: &[Sample]) -> Result<VerificationReport> {
    let pb = Pullback::new(f0, d)?;
    let gamma = samples.iter().map(|s| or_inf(pb.christoffel_residual(s))).collect();
    let spray = samples.iter().map(|s| or_inf(pb.spray_residual(s))).collect();
    let checks = vec![
        VerificationCheck::new("christoffel", gamma, PULLBACK),
        VerificationCheck::new("spray", spray, PULLBACK),
    ];
    Ok(VerificationReport::new("lemma2", case_name(f0, Some(d), None), checks))
}

/// Scaling chain for `μF₀` and invariance of the Ricci scalar under
/// pullback.
pub fn verify_lemma3(
    f0: &FinslerStructure,
    mu: f64,
    d: &SymbolicDiffeo,
    samples: &[Sample],
) -> Result<VerificationReport> {
    let mut checks = scaling_checks(f0, mu, samples)?;
    let pb = Pullback::new(f0, d)?;
    checks.push(VerificationCheck::new(
        "ricci pullback",
        samples.iter().map(|s| or_inf(pb.ricci_residual(s))).collect(),
        PULLBACK,
    ));
    Ok(VerificationReport::new("lemma3", case_name(f0, Some(d), Some(mu)), checks))
}

/// `g`, `γ`, `G`, `R`, `Ric` of `μF` against those of `F`.
pub fn scaling_checks(f: &FinslerStructure, mu: f64, samples: &[Sample]) -> Result<Vec<VerificationCheck>> {
    let fm = f.scaled(mu)?;
    let m2 = mu * mu;
    let (mut g, mut gamma, mut spray, mut r, mut ric) = (vec![], vec![], vec![], vec![], vec![]);
    for s in samples {
        g.push(or_inf((|| {
            let a = fm.fundamental_tensor(s)?.g;
            let b = f.fundamental_tensor(s)?.g * m2;
            Ok(rel_err(&flat(&a), &flat(&b)))
        })()));
        gamma.push(or_inf((|| Ok(abs_err(fm.christoffel(s)?.as_slice(), f.christoffel(s)?.as_slice())))()));
        let ca = fm.curvature(s);
        let cb = f.curvature(s);
        match (ca, cb) {
            (Ok(a), Ok(b)) => {
                spray.push(abs_err(a.spray.as_slice(), b.spray.as_slice()));
                r.push(rel_err(&flat(&a.reduced), &flat(&(b.reduced / m2))));
                ric.push(rel_err(&[a.ric], &[b.ric / m2]));
            }
            _ => {
                spray.push(f64::INFINITY);
                r.push(f64::INFINITY);
                ric.push(f64::INFINITY);
            }
        }
    }
    Ok(vec![
        VerificationCheck::new("metric scaling", g, SCALING),
        VerificationCheck::new("christoffel invariance", gamma, SCALING_INVARIANT),
        VerificationCheck::new("spray invariance", spray, SCALING_INVARIANT),
        VerificationCheck::new("curvature scaling", r, SCALING),
        VerificationCheck::new("ricci scaling", ric, SCALING),
    ])
}

/// Scaling chain alone, as a report.
pub fn verify_scaling(f: &FinslerStructure, mu: f64, samples: &[Sample]) -> Result<VerificationReport> {
    Ok(VerificationReport::new("scaling", case_name(f, None, Some(mu)), scaling_checks(f, mu, samples)?))
}
