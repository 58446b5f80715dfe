//! Finsler structures and their curvature quantities: fundamental tensor,
//! formal Christoffel symbols, spray, reduced curvature, Ricci scalar and
//! the Akbar-Zadeh Ricci tensor.
//!
//! Everything is derived symbolically from `F²` once per structure and
//! compiled into tapes; per-sample work is evaluation only. The spray is
//! built in closed form with the inverse metric written as adjugate over
//! determinant, which keeps every later x- and y-derivative exact. The
//! Christoffel symbols themselves are assembled at the sample with a
//! numerically factored inverse.

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{differentiate, free_vars, simplify, Expr, Tape, Var};
use crate::sample::Sample;

/// Largest supported dimension (the symbolic adjugate grows factorially).
pub const MAX_DIM: usize = 4;

/// Default relative tolerance of the homogeneity and Euler checks.
pub const STRUCTURE_TOL: f64 = 1e-9;

/// Canonical tape inputs: `x1..xn, y1..yn, t`.
pub(crate) fn slot_vars(n: usize) -> Vec<Var> {
    let mut v: Vec<Var> = (1..=n).map(Var::X).collect();
    v.extend((1..=n).map(Var::Y));
    v.push(Var::T);
    v
}

#[derive(Default)]
struct Cache {
    metric: OnceLock<MetricSystem>,
    spray: OnceLock<SpraySystem>,
    ricci: OnceLock<Tape>,
}

struct MetricSystem {
    g: Vec<Vec<Expr>>,
    /// `[s][j][k] = ∂g_sj/∂x^k`
    dg_dx: Vec<Vec<Vec<Expr>>>,
    /// F², ∂F²/∂y (n), g (n²), ∂g/∂x (n³), Cartan tensor (n³)
    tape: Tape,
}

struct SpraySystem {
    spray: Vec<Expr>,
    /// `F² R^i_k`, row-major
    numer: Vec<Expr>,
    half_f2_ric: Expr,
    /// G (n), F² R (n²), F²
    tape: Tape,
}

/// A Finsler structure given by `F²` in the variables `x1..xn, y1..yn`
/// (and optionally the time parameter `t`).
#[derive(Clone)]
pub struct FinslerStructure {
    dim: usize,
    f2: Expr,
    name: Option<String>,
    cache: Arc<Cache>,
}

impl fmt::Debug for FinslerStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FinslerStructure")
            .field("dim", &self.dim)
            .field("name", &self.name)
            .field("f2", &self.f2.to_string())
            .finish()
    }
}

/// `g_ij` and its inverse at a sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAtSample {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
}

/// Rank-3 array `gamma^i_jk`, zero-based indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(n: usize) -> Christoffel {
        Christoffel { n, data: vec![0.0; n * n * n] }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.n + j) * self.n + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.n + j) * self.n + k] = v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// All curvature quantities at one sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureAtSample {
    pub gamma: Christoffel,
    pub spray: DVector<f64>,
    pub reduced: DMatrix<f64>,
    pub ric: f64,
    pub ric_tensor: DMatrix<f64>,
}

/// Raw metric evaluation at a sample (no definiteness check).
#[derive(Debug, Clone)]
pub(crate) struct MetricEval {
    pub f2: f64,
    pub df2_dy: Vec<f64>,
    pub g: DMatrix<f64>,
    pub dg_dx: Vec<f64>,
    pub cartan: Vec<f64>,
}

fn cofactor_det(m: &[Vec<Expr>], rows: &[usize], cols: &[usize]) -> Expr {
    if rows.len() == 1 {
        return m[rows[0]][cols[0]].clone();
    }
    if rows.len() == 2 {
        let (a, b) = (rows[0], rows[1]);
        let (c, d) = (cols[0], cols[1]);
        return &m[a][c] * &m[b][d] - &m[a][d] * &m[b][c];
    }
    let r0 = rows[0];
    let rest: Vec<usize> = rows[1..].to_vec();
    let mut acc = Expr::zero();
    for (idx, &c) in cols.iter().enumerate() {
        let sub: Vec<usize> = cols.iter().copied().filter(|&k| k != c).collect();
        let term = &m[r0][c] * cofactor_det(m, &rest, &sub);
        acc = if idx % 2 == 0 { acc + term } else { acc - term };
    }
    acc
}

/// Determinant and adjugate of a symbolic square matrix.
pub(crate) fn det_adjugate(m: &[Vec<Expr>]) -> (Expr, Vec<Vec<Expr>>) {
    let n = m.len();
    let all: Vec<usize> = (0..n).collect();
    let det = cofactor_det(m, &all, &all);
    if n == 1 {
        return (det, vec![vec![Expr::one()]]);
    }
    let mut adj = vec![vec![Expr::zero(); n]; n];
    for (i, row) in adj.iter_mut().enumerate() {
        for (s, entry) in row.iter_mut().enumerate() {
            // adj_{is} = (-1)^{i+s} M_{si}
            let rows: Vec<usize> = all.iter().copied().filter(|&r| r != s).collect();
            let cols: Vec<usize> = all.iter().copied().filter(|&c| c != i).collect();
            let minor = cofactor_det(m, &rows, &cols);
            *entry = if (i + s) % 2 == 0 { minor } else { -minor };
        }
    }
    (det, adj)
}

/// Symmetric positive-definite inverse via Cholesky; `None` if not SPD.
pub(crate) fn spd_inverse(g: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let sym = (g + g.transpose()) * 0.5;
    sym.cholesky().map(|c| c.inverse())
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(g: &DMatrix<f64>) -> f64 {
    let sym = (g + g.transpose()) * 0.5;
    sym.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

impl FinslerStructure {
    /// Validates the variable set and simplifies `F²`.
    pub fn new(dim: usize, f2: Expr) -> Result<FinslerStructure> {
        if !(2..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidStructure(format!("dimension {dim} outside 2..={MAX_DIM}")));
        }
        for v in free_vars(&f2) {
            let ok = match &v {
                Var::X(i) | Var::Y(i) => (1..=dim).contains(i),
                Var::T => true,
                Var::Sym(_) => false,
            };
            if !ok {
                return Err(Error::InvalidStructure(format!("F2 uses `{v}`, which is not a coordinate of dimension {dim}")));
            }
        }
        Ok(FinslerStructure { dim, f2: simplify(&f2), name: None, cache: Arc::default() })
    }

    pub fn parse(dim: usize, f2: &str) -> Result<FinslerStructure> {
        FinslerStructure::new(dim, crate::expr::parse(f2)?)
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn f2(&self) -> &Expr {
        &self.f2
    }

    /// The structure `μF`, i.e. `F²` multiplied by `μ²`.
    pub fn scaled(&self, mu: f64) -> Result<FinslerStructure> {
        if !(mu > 0.0) {
            return Err(Error::Invalid(format!("scale factor must be positive, got {mu}")));
        }
        let s = FinslerStructure::new(self.dim, Expr::constant(mu * mu) * &self.f2)?;
        Ok(match &self.name {
            Some(n) => s.named(format!("{mu}*{n}")),
            None => s,
        })
    }

    fn metric_system(&self) -> &MetricSystem {
        self.cache.metric.get_or_init(|| {
            let n = self.dim;
            let df_dy: Vec<Expr> = (1..=n).map(|i| differentiate(&self.f2, &Var::Y(i))).collect();
            let mut g = vec![vec![Expr::zero(); n]; n];
            for i in 0..n {
                for j in i..n {
                    let e = Expr::constant(0.5) * differentiate(&df_dy[i], &Var::Y(j + 1));
                    g[i][j] = e.clone();
                    g[j][i] = e;
                }
            }
            let mut dg_dx = vec![vec![vec![Expr::zero(); n]; n]; n];
            let mut cartan = vec![vec![vec![Expr::zero(); n]; n]; n];
            for s in 0..n {
                for j in s..n {
                    for k in 0..n {
                        let d = differentiate(&g[s][j], &Var::X(k + 1));
                        dg_dx[s][j][k] = d.clone();
                        dg_dx[j][s][k] = d;
                        let c = Expr::constant(0.5) * differentiate(&g[s][j], &Var::Y(k + 1));
                        cartan[s][j][k] = c.clone();
                        cartan[j][s][k] = c;
                    }
                }
            }
            let mut outputs = vec![self.f2.clone()];
            outputs.extend(df_dy);
            outputs.extend(g.iter().flatten().cloned());
            outputs.extend(dg_dx.iter().flatten().flatten().cloned());
            outputs.extend(cartan.iter().flatten().flatten().cloned());
            let tape = Tape::compile(&outputs, &slot_vars(n)).expect("structure variables validated at construction");
            MetricSystem { g, dg_dx, tape }
        })
    }

    fn spray_system(&self) -> &SpraySystem {
        self.cache.spray.get_or_init(|| {
            let n = self.dim;
            let ms = self.metric_system();
            let ys: Vec<Expr> = (1..=n).map(Expr::y).collect();
            // Gamma_s = Γ_sjk y^j y^k with Γ_sjk = ½(∂_k g_sj - ∂_s g_jk + ∂_j g_ks);
            // the first and last terms agree after contraction.
            let lowered: Vec<Expr> = (0..n)
                .map(|s| {
                    let mut acc = Expr::zero();
                    for j in 0..n {
                        for k in 0..n {
                            let yy = &ys[j] * &ys[k];
                            let term = &ms.dg_dx[s][j][k] - Expr::constant(0.5) * &ms.dg_dx[j][k][s];
                            acc = acc + term * yy;
                        }
                    }
                    acc
                })
                .collect();
            let (det, adj) = det_adjugate(&ms.g);
            let scale = Expr::div(Expr::constant(0.5), det);
            let spray: Vec<Expr> = (0..n)
                .map(|i| {
                    let contracted = Expr::sum((0..n).map(|s| &adj[i][s] * &lowered[s]));
                    &scale * contracted
                })
                .collect();

            let dgx: Vec<Vec<Expr>> =
                spray.iter().map(|gi| (1..=n).map(|k| differentiate(gi, &Var::X(k))).collect()).collect();
            let dgy: Vec<Vec<Expr>> =
                spray.iter().map(|gi| (1..=n).map(|k| differentiate(gi, &Var::Y(k))).collect()).collect();
            let mut numer = Vec::with_capacity(n * n);
            for i in 0..n {
                for k in 0..n {
                    let mut acc = Expr::constant(2.0) * &dgx[i][k];
                    for j in 0..n {
                        let dxy = differentiate(&dgy[i][k], &Var::X(j + 1));
                        let dyy = differentiate(&dgy[i][k], &Var::Y(j + 1));
                        acc = acc - dxy * &ys[j];
                        acc = acc + Expr::constant(2.0) * &spray[j] * dyy;
                        acc = acc - &dgy[i][j] * &dgy[j][k];
                    }
                    numer.push(acc);
                }
            }
            let half_f2_ric = Expr::constant(0.5) * Expr::sum((0..n).map(|i| numer[i * n + i].clone()));
            let mut outputs = spray.clone();
            outputs.extend(numer.iter().cloned());
            outputs.push(self.f2.clone());
            let tape = Tape::compile(&outputs, &slot_vars(n)).expect("validated variables");
            SpraySystem { spray, numer, half_f2_ric, tape }
        })
    }

    fn ricci_tape(&self) -> &Tape {
        self.cache.ricci.get_or_init(|| {
            let n = self.dim;
            let h = &self.spray_system().half_f2_ric;
            let dh: Vec<Expr> = (1..=n).map(|j| differentiate(h, &Var::Y(j))).collect();
            let mut outputs = vec![Expr::zero(); n * n];
            for j in 0..n {
                for k in j..n {
                    let e = differentiate(&dh[j], &Var::Y(k + 1));
                    outputs[j * n + k] = e.clone();
                    outputs[k * n + j] = e;
                }
            }
            Tape::compile(&outputs, &slot_vars(n)).expect("validated variables")
        })
    }

    /// Symbolic spray coefficients `G^i`.
    pub fn spray_exprs(&self) -> &[Expr] {
        &self.spray_system().spray
    }

    /// Symbolic `F² R^i_k`, row-major.
    pub fn reduced_curvature_numerators(&self) -> &[Expr] {
        &self.spray_system().numer
    }

    /// Symbolic `½ F² Ric`.
    pub fn half_f2_ric(&self) -> &Expr {
        &self.spray_system().half_f2_ric
    }

    /// Symbolic fundamental tensor `g_ij`.
    pub fn metric_exprs(&self) -> &[Vec<Expr>] {
        &self.metric_system().g
    }

    pub(crate) fn metric_eval(&self, s: &Sample) -> Result<MetricEval> {
        s.validate(self.dim)?;
        let n = self.dim;
        let v = self.metric_system().tape.eval(&s.inputs())?;
        let g_off = 1 + n;
        let dg_off = g_off + n * n;
        let c_off = dg_off + n * n * n;
        Ok(MetricEval {
            f2: v[0],
            df2_dy: v[1..g_off].to_vec(),
            g: DMatrix::from_row_slice(n, n, &v[g_off..dg_off]),
            dg_dx: v[dg_off..c_off].to_vec(),
            cartan: v[c_off..].to_vec(),
        })
    }

    /// `F²` at a sample.
    pub fn f2_at(&self, s: &Sample) -> Result<f64> {
        s.validate(self.dim)?;
        Ok(self.metric_eval(s)?.f2)
    }

    /// `g_ij = ½ ∂²F²/∂y^i∂y^j` and its inverse.
    pub fn fundamental_tensor(&self, s: &Sample) -> Result<MetricAtSample> {
        let m = self.metric_eval(s)?;
        let g_inv = spd_inverse(&m.g).ok_or_else(|| Error::NotPositiveDefinite { sample: s.to_string() })?;
        Ok(MetricAtSample { g: m.g, g_inv })
    }

    /// Cartan tensor `C_abc = ½ ∂g_ab/∂y^c`, flattened `[(a*n + b)*n + c]`.
    pub fn cartan(&self, s: &Sample) -> Result<Vec<f64>> {
        Ok(self.metric_eval(s)?.cartan)
    }

    /// Formal Christoffel symbols
    /// `γ^i_jk = ½ g^{is}(∂g_sj/∂x^k - ∂g_jk/∂x^s + ∂g_ks/∂x^j)`.
    pub fn christoffel(&self, s: &Sample) -> Result<Christoffel> {
        let n = self.dim;
        let m = self.metric_eval(s)?;
        let g_inv = spd_inverse(&m.g).ok_or_else(|| Error::NotPositiveDefinite { sample: s.to_string() })?;
        let dg = |a: usize, b: usize, c: usize| m.dg_dx[(a * n + b) * n + c];
        let mut gamma = Christoffel::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in j..n {
                    let mut acc = 0.0;
                    for sidx in 0..n {
                        acc += g_inv[(i, sidx)] * (dg(sidx, j, k) - dg(j, k, sidx) + dg(k, sidx, j));
                    }
                    gamma.set(i, j, k, 0.5 * acc);
                    gamma.set(i, k, j, 0.5 * acc);
                }
            }
        }
        Ok(gamma)
    }

    fn spray_eval(&self, s: &Sample) -> Result<Vec<f64>> {
        // strong convexity is a precondition of everything built on g^{-1}
        self.fundamental_tensor(s)?;
        Ok(self.spray_system().tape.eval(&s.inputs())?)
    }

    /// Spray coefficients `G^i = ½ γ^i_jk y^j y^k`.
    pub fn spray(&self, s: &Sample) -> Result<DVector<f64>> {
        let v = self.spray_eval(s)?;
        Ok(DVector::from_column_slice(&v[..self.dim]))
    }

    /// Reduced curvature `R^i_k` (row `i`, column `k`).
    pub fn reduced_curvature(&self, s: &Sample) -> Result<DMatrix<f64>> {
        let n = self.dim;
        let v = self.spray_eval(s)?;
        let f2 = v[n + n * n];
        Ok(DMatrix::from_row_slice(n, n, &v[n..n + n * n]) / f2)
    }

    /// `Ric = R^i_i`.
    pub fn ricci_scalar(&self, s: &Sample) -> Result<f64> {
        Ok(self.reduced_curvature(s)?.trace())
    }

    /// Akbar-Zadeh Ricci tensor `Ric_jk = [½ F² Ric]_{y^j y^k}`.
    pub fn akbar_zadeh_ricci(&self, s: &Sample) -> Result<DMatrix<f64>> {
        self.fundamental_tensor(s)?;
        let n = self.dim;
        let v = self.ricci_tape().eval(&s.inputs())?;
        Ok(DMatrix::from_row_slice(n, n, &v))
    }

    /// Every curvature quantity at `s`.
    pub fn curvature(&self, s: &Sample) -> Result<CurvatureAtSample> {
        let n = self.dim;
        let gamma = self.christoffel(s)?;
        let v = self.spray_system().tape.eval(&s.inputs())?;
        let f2 = v[n + n * n];
        let reduced = DMatrix::from_row_slice(n, n, &v[n..n + n * n]) / f2;
        let ric_tensor = DMatrix::from_row_slice(n, n, &self.ricci_tape().eval(&s.inputs())?);
        Ok(CurvatureAtSample {
            gamma,
            spray: DVector::from_column_slice(&v[..n]),
            ric: reduced.trace(),
            reduced,
            ric_tensor,
        })
    }

    /// Per-sample homogeneity, Euler-identity and strong-convexity checks.
    pub fn check_finsler(&self, samples: &[Sample]) -> FinslerCheck {
        let rows = samples.iter().map(|s| self.check_sample(s)).collect::<Vec<_>>();
        let pass = rows.iter().all(|r| r.pass);
        FinslerCheck { rows, pass }
    }

    fn check_sample(&self, s: &Sample) -> FinslerCheckRow {
        let mut row = FinslerCheckRow {
            sample: s.clone(),
            f2: f64::NAN,
            homogeneity_residual: f64::NAN,
            euler_residual: f64::NAN,
            min_eigenvalue: f64::NAN,
            error: None,
            pass: false,
        };
        let run = |row: &mut FinslerCheckRow| -> Result<()> {
            let m = self.metric_eval(s)?;
            row.f2 = m.f2;
            let mut h: f64 = 0.0;
            for lambda in [0.5, 2.0, 3.0] {
                let scaled = self.metric_eval(&s.scaled_y(lambda))?.f2;
                let expect = lambda * lambda * m.f2;
                h = h.max((scaled - expect).abs() / expect.abs().max(f64::MIN_POSITIVE));
            }
            row.homogeneity_residual = h;
            let euler: f64 = m.df2_dy.iter().zip(&s.y).map(|(d, y)| d * y).sum();
            row.euler_residual = (euler - 2.0 * m.f2).abs() / (2.0 * m.f2.abs()).max(f64::MIN_POSITIVE);
            row.min_eigenvalue = min_eigenvalue(&m.g);
            Ok(())
        };
        match run(&mut row) {
            Ok(()) => {
                row.pass = row.f2 > 0.0
                    && row.homogeneity_residual <= STRUCTURE_TOL
                    && row.euler_residual <= STRUCTURE_TOL
                    && row.min_eigenvalue > 0.0;
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        row
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinslerCheckRow {
    pub sample: Sample,
    pub f2: f64,
    pub homogeneity_residual: f64,
    pub euler_residual: f64,
    pub min_eigenvalue: f64,
    pub error: Option<String>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FinslerCheck {
    pub rows: Vec<FinslerCheckRow>,
    pub pass: bool,
}

impl FinslerCheck {
    /// First sample that failed, if any.
    pub fn first_failure(&self) -> Option<&FinslerCheckRow> {
        self.rows.iter().find(|r| !r.pass)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics;

    fn s(x: &[f64], y: &[f64]) -> Sample {
        Sample::new(x.to_vec(), y.to_vec())
    }

    #[test]
    fn euclidean_metric_is_identity() {
        let f = metrics::euclidean(2);
        let m = f.fundamental_tensor(&s(&[0.3, -0.2], &[1.0, 2.0])).unwrap();
        assert_eq!(m.g, DMatrix::identity(2, 2));
        assert!(f.christoffel(&s(&[0.3, -0.2], &[1.0, 2.0])).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn conformal_metric_at_origin() {
        let f = metrics::conformal_sphere(2);
        let m = f.fundamental_tensor(&s(&[0.0, 0.0], &[0.3, 0.7])).unwrap();
        assert!((&m.g - DMatrix::identity(2, 2) * 4.0).abs().max() < 1e-14);
        let prod = &m.g * &m.g_inv;
        assert!((prod - DMatrix::identity(2, 2)).abs().max() < 1e-12);
    }

    #[test]
    fn scaled_metric() {
        let f = metrics::euclidean(2).scaled(3.0).unwrap();
        let m = f.fundamental_tensor(&s(&[0.0, 1.0], &[1.0, 0.0])).unwrap();
        assert!((m.g - DMatrix::identity(2, 2) * 9.0).abs().max() < 1e-14);
    }

    #[test]
    fn rejects_foreign_variables() {
        assert!(FinslerStructure::parse(2, "y1^2 + y3^2").is_err());
        assert!(FinslerStructure::parse(2, "a*y1^2 + y2^2").is_err());
        assert!(FinslerStructure::parse(1, "y1^2").is_err());
    }

    #[test]
    fn non_convex_is_reported() {
        let f = FinslerStructure::parse(2, "y1^2 - y2^2").unwrap();
        let err = f.fundamental_tensor(&s(&[0.0, 0.0], &[1.0, 0.0])).unwrap_err();
        assert!(matches!(err, Error::NotPositiveDefinite { .. }));
    }

    #[test]
    fn degenerate_sample_is_rejected_before_evaluation() {
        let f = metrics::euclidean(2);
        assert!(matches!(f.spray(&s(&[0.0, 0.0], &[0.0, 0.0])), Err(Error::DegenerateSample { .. })));
    }

    #[test]
    fn adjugate_inverts() {
        let m: Vec<Vec<Expr>> = [[2.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 1.5]]
            .iter()
            .map(|r| r.iter().map(|&v| Expr::constant(v)).collect())
            .collect();
        let (det, adj) = det_adjugate(&m);
        let d = det.as_const().unwrap();
        let a = DMatrix::from_fn(3, 3, |i, j| m[i][j].as_const().unwrap());
        let inv = DMatrix::from_fn(3, 3, |i, j| adj[i][j].as_const().unwrap() / d);
        assert!((a * inv - DMatrix::identity(3, 3)).abs().max() < 1e-14);
    }
}
