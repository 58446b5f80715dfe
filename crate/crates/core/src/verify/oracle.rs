//! Curvature quantities from numeric evaluations of `F²` alone.
//!
//! Every derivative is a 5-point central stencil; nested derivatives nest
//! stencils. The step grows with the nesting level so that roundoff from
//! inner levels stays below the truncation error of the outer ones, and a
//! single Richardson extrapolation `(16 Q(h) - Q(2h)) / 15` is applied at
//! the outermost level of each quantity.

use std::cell::RefCell;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::expr::{Tape, Var};
use crate::finsler::{slot_vars, Christoffel, FinslerStructure};
use crate::lift::VectorField;
use crate::sample::Sample;

/// Stencil steps per nesting level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSteps {
    /// Second derivatives of `F²` (metric, spray, Lie derivatives).
    pub base: f64,
    /// Second derivatives of `F²` inside the spray when it is differentiated
    /// again.
    pub spray_inner: f64,
    /// x-derivative of the metric (Christoffel symbols).
    pub christoffel: f64,
    /// Derivatives of the spray (reduced curvature).
    pub curvature: f64,
    /// y-Hessian of `½F²Ric`.
    pub ricci_tensor: f64,
}

impl Default for OracleSteps {
    fn default() -> Self {
        OracleSteps { base: 1e-3, spray_inner: 3e-3, christoffel: 1e-2, curvature: 4e-2, ricci_tensor: 8e-2 }
    }
}

/// Quantities the oracle can produce.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleQuantity {
    Metric,
    Christoffel,
    Spray,
    ReducedCurvature,
    Ricci,
    RicciTensor,
    LieF2(VectorField),
    LieG(VectorField),
}

impl OracleQuantity {
    pub fn name(&self) -> &'static str {
        match self {
            OracleQuantity::Metric => "g",
            OracleQuantity::Christoffel => "gamma",
            OracleQuantity::Spray => "G",
            OracleQuantity::ReducedCurvature => "R",
            OracleQuantity::Ricci => "Ric",
            OracleQuantity::RicciTensor => "Ric_jk",
            OracleQuantity::LieF2(_) => "L F2",
            OracleQuantity::LieG(_) => "L g",
        }
    }
}

type Field<'a> = dyn Fn(&[f64]) -> Result<Vec<f64>> + 'a;

fn shifted(z: &[f64], i: usize, d: f64) -> Vec<f64> {
    let mut w = z.to_vec();
    w[i] += d;
    w
}

fn combine(terms: &[(f64, Vec<f64>)], scale: f64) -> Vec<f64> {
    let mut out = vec![0.0; terms[0].1.len()];
    for (c, v) in terms {
        for (o, x) in out.iter_mut().zip(v) {
            *o += c * x;
        }
    }
    out.iter().map(|v| v * scale).collect()
}

/// `∂f/∂z_i`, 5-point stencil.
fn d1(f: &Field, z: &[f64], i: usize, h: f64) -> Result<Vec<f64>> {
    let terms = [
        (1.0, f(&shifted(z, i, -2.0 * h))?),
        (-8.0, f(&shifted(z, i, -h))?),
        (8.0, f(&shifted(z, i, h))?),
        (-1.0, f(&shifted(z, i, 2.0 * h))?),
    ];
    Ok(combine(&terms, 1.0 / (12.0 * h)))
}

/// `∂²f/∂z_i∂z_j`, 5-point stencils (nested when `i != j`).
fn d2(f: &Field, z: &[f64], i: usize, j: usize, h: f64) -> Result<Vec<f64>> {
    if i == j {
        let terms = [
            (-1.0, f(&shifted(z, i, -2.0 * h))?),
            (16.0, f(&shifted(z, i, -h))?),
            (-30.0, f(z)?),
            (16.0, f(&shifted(z, i, h))?),
            (-1.0, f(&shifted(z, i, 2.0 * h))?),
        ];
        Ok(combine(&terms, 1.0 / (12.0 * h * h)))
    } else {
        let inner = |w: &[f64]| d1(f, w, j, h);
        d1(&inner, z, i, h)
    }
}

fn richardson(q: impl Fn(f64) -> Result<Vec<f64>>, h: f64) -> Result<Vec<f64>> {
    let fine = q(h)?;
    let coarse = q(2.0 * h)?;
    Ok(fine.iter().zip(&coarse).map(|(a, b)| (16.0 * a - b) / 15.0).collect())
}

/// Finite-difference oracle for one structure.
pub struct FdOracle {
    n: usize,
    f2: Tape,
    steps: OracleSteps,
    buf: RefCell<(Vec<f64>, Vec<f64>)>,
}

impl FdOracle {
    pub fn new(f: &FinslerStructure) -> Result<FdOracle> {
        FdOracle::with_steps(f, OracleSteps::default())
    }

    pub fn with_steps(f: &FinslerStructure, steps: OracleSteps) -> Result<FdOracle> {
        Ok(FdOracle {
            n: f.dim(),
            f2: Tape::compile(&[f.f2().clone()], &slot_vars(f.dim()))?,
            steps,
            buf: RefCell::default(),
        })
    }

    fn point(&self, s: &Sample) -> Result<Vec<f64>> {
        s.validate(self.n)?;
        let mut z = s.x.clone();
        z.extend_from_slice(&s.y);
        Ok(z)
    }

    fn f2_at(&self, z: &[f64]) -> Result<f64> {
        let mut buf = self.buf.borrow_mut();
        let (input, scratch) = &mut *buf;
        input.clear();
        input.extend_from_slice(z);
        input.push(0.0);
        let mut out = [0.0];
        self.f2
            .eval_into(input, scratch, &mut out)
            .map_err(|e| Error::Invalid(format!("oracle stencil left the domain: {e}")))?;
        Ok(out[0])
    }

    /// `g_ij` flattened, row-major.
    fn metric_z(&self, z: &[f64], h: f64) -> Result<Vec<f64>> {
        let n = self.n;
        let f = |w: &[f64]| Ok(vec![self.f2_at(w)?]);
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = 0.5 * d2(&f, z, n + i, n + j, h)?[0];
                g[i * n + j] = v;
                g[j * n + i] = v;
            }
        }
        Ok(g)
    }

    fn inverse(&self, g: &[f64]) -> Result<DMatrix<f64>> {
        DMatrix::from_row_slice(self.n, self.n, g)
            .try_inverse()
            .ok_or_else(|| Error::Invalid("oracle metric is singular".into()))
    }

    /// Spray from second derivatives of `F²`:
    /// `G^i = ¼ g^{il} (∂²F²/∂y^l∂x^k y^k - ∂F²/∂x^l)`.
    fn spray_z(&self, z: &[f64], h: f64) -> Result<Vec<f64>> {
        let n = self.n;
        let f = |w: &[f64]| Ok(vec![self.f2_at(w)?]);
        let g_inv = self.inverse(&self.metric_z(z, h)?)?;
        let mut rhs = DVector::zeros(n);
        for l in 0..n {
            let mut acc = -d1(&f, z, l, h)?[0];
            for k in 0..n {
                acc += d2(&f, z, n + l, k, h)?[0] * z[n + k];
            }
            rhs[l] = acc;
        }
        Ok((g_inv * rhs * 0.25).iter().copied().collect())
    }

    fn christoffel_z(&self, z: &[f64], h: f64) -> Result<Vec<f64>> {
        let n = self.n;
        let base = self.steps.base;
        let g_inv = self.inverse(&self.metric_z(z, base)?)?;
        let metric = |w: &[f64]| self.metric_z(w, base);
        // dg[k][(s, j)] = ∂g_sj/∂x^k
        let dg = (0..n).map(|k| d1(&metric, z, k, h)).collect::<Result<Vec<_>>>()?;
        let at = |s: usize, j: usize, k: usize| dg[k][s * n + j];
        let mut out = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let v: f64 = (0..n).map(|s| g_inv[(i, s)] * (at(s, j, k) - at(j, k, s) + at(k, s, j))).sum();
                    out[(i * n + j) * n + k] = 0.5 * v;
                }
            }
        }
        Ok(out)
    }

    /// `F² R^i_k` flattened; the spray is differentiated with step `h`.
    fn curvature_numer_z(&self, z: &[f64], h: f64) -> Result<Vec<f64>> {
        let n = self.n;
        let inner = self.steps.spray_inner;
        let spray = |w: &[f64]| self.spray_z(w, inner);
        let g0 = spray(z)?;
        let dx = (0..n).map(|k| d1(&spray, z, k, h)).collect::<Result<Vec<_>>>()?;
        let dy = (0..n).map(|k| d1(&spray, z, n + k, h)).collect::<Result<Vec<_>>>()?;
        // dxy[j][k] = ∂²G/∂x^j∂y^k, dyy[j][k] = ∂²G/∂y^j∂y^k
        let mut dxy = vec![vec![vec![]; n]; n];
        let mut dyy = vec![vec![vec![]; n]; n];
        for j in 0..n {
            for k in 0..n {
                dxy[j][k] = d2(&spray, z, j, n + k, h)?;
                if k >= j {
                    dyy[j][k] = d2(&spray, z, n + j, n + k, h)?;
                } else {
                    dyy[j][k] = dyy[k][j].clone();
                }
            }
        }
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let mut acc = 2.0 * dx[k][i];
                for j in 0..n {
                    acc -= dxy[j][k][i] * z[n + j];
                    acc += 2.0 * g0[j] * dyy[j][k][i];
                    acc -= dy[j][i] * dy[k][j];
                }
                out[i * n + k] = acc;
            }
        }
        Ok(out)
    }

    fn ricci_z(&self, z: &[f64], h: f64) -> Result<f64> {
        let n = self.n;
        let numer = self.curvature_numer_z(z, h)?;
        Ok((0..n).map(|i| numer[i * n + i]).sum::<f64>() / self.f2_at(z)?)
    }

    pub fn metric(&self, s: &Sample) -> Result<DMatrix<f64>> {
        let z = self.point(s)?;
        let v = richardson(|h| self.metric_z(&z, h), self.steps.base)?;
        Ok(DMatrix::from_row_slice(self.n, self.n, &v))
    }

    pub fn christoffel(&self, s: &Sample) -> Result<Christoffel> {
        let z = self.point(s)?;
        let v = richardson(|h| self.christoffel_z(&z, h), self.steps.christoffel)?;
        let n = self.n;
        let mut c = Christoffel::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    c.set(i, j, k, v[(i * n + j) * n + k]);
                }
            }
        }
        Ok(c)
    }

    pub fn spray(&self, s: &Sample) -> Result<DVector<f64>> {
        let z = self.point(s)?;
        Ok(DVector::from_vec(richardson(|h| self.spray_z(&z, h), self.steps.base)?))
    }

    pub fn reduced_curvature(&self, s: &Sample) -> Result<DMatrix<f64>> {
        let z = self.point(s)?;
        let v = richardson(|h| self.curvature_numer_z(&z, h), self.steps.curvature)?;
        Ok(DMatrix::from_row_slice(self.n, self.n, &v) / self.f2_at(&z)?)
    }

    pub fn ricci(&self, s: &Sample) -> Result<f64> {
        Ok(self.reduced_curvature(s)?.trace())
    }

    pub fn ricci_tensor(&self, s: &Sample) -> Result<DMatrix<f64>> {
        let n = self.n;
        let z = self.point(s)?;
        let hc = self.steps.curvature;
        let half = |w: &[f64]| Ok(vec![0.5 * self.f2_at(w)? * self.ricci_z(w, hc)?]);
        let v = richardson(
            |h| {
                let mut m = vec![0.0; n * n];
                for j in 0..n {
                    for k in j..n {
                        let e = d2(&half, &z, n + j, n + k, h)?[0];
                        m[j * n + k] = e;
                        m[k * n + j] = e;
                    }
                }
                Ok(m)
            },
            self.steps.ricci_tensor,
        )?;
        Ok(DMatrix::from_row_slice(n, n, &v))
    }

    fn field_tape(&self, field: &VectorField) -> Result<Tape> {
        let vars: Vec<Var> = (1..=self.n).map(Var::X).collect();
        Ok(Tape::compile(field.components(), &vars)?)
    }

    fn lie_f2_z(&self, field: &Tape, z: &[f64], h: f64) -> Result<f64> {
        let n = self.n;
        let f = |w: &[f64]| Ok(vec![self.f2_at(w)?]);
        let v = |w: &[f64]| Ok(field.eval(&w[..n])?);
        let vz = v(z)?;
        let mut acc = 0.0;
        for i in 0..n {
            acc += vz[i] * d1(&f, z, i, h)?[0];
        }
        for j in 0..n {
            let dv = d1(&v, z, j, h)?;
            for i in 0..n {
                acc += z[n + j] * dv[i] * d1(&f, z, n + i, h)?[0];
            }
        }
        Ok(acc)
    }

    pub fn lie_f2(&self, field: &VectorField, s: &Sample) -> Result<f64> {
        let z = self.point(s)?;
        let tape = self.field_tape(field)?;
        Ok(richardson(|h| Ok(vec![self.lie_f2_z(&tape, &z, h)?]), self.steps.base)?[0])
    }

    pub fn lie_g(&self, field: &VectorField, s: &Sample) -> Result<DMatrix<f64>> {
        let n = self.n;
        let z = self.point(s)?;
        let base = self.steps.base;
        let tape = self.field_tape(field)?;
        let lf = |w: &[f64]| Ok(vec![self.lie_f2_z(&tape, w, base)?]);
        let v = richardson(
            |h| {
                let mut m = vec![0.0; n * n];
                for j in 0..n {
                    for k in j..n {
                        let e = 0.5 * d2(&lf, &z, n + j, n + k, h)?[0];
                        m[j * n + k] = e;
                        m[k * n + j] = e;
                    }
                }
                Ok(m)
            },
            self.steps.christoffel,
        )?;
        Ok(DMatrix::from_row_slice(n, n, &v))
    }

    /// The named quantity, flattened row-major.
    pub fn quantity(&self, q: &OracleQuantity, s: &Sample) -> Result<Vec<f64>> {
        Ok(match q {
            OracleQuantity::Metric => self.metric(s)?.transpose().as_slice().to_vec(),
            OracleQuantity::Christoffel => self.christoffel(s)?.as_slice().to_vec(),
            OracleQuantity::Spray => self.spray(s)?.as_slice().to_vec(),
            OracleQuantity::ReducedCurvature => self.reduced_curvature(s)?.transpose().as_slice().to_vec(),
            OracleQuantity::Ricci => vec![self.ricci(s)?],
            OracleQuantity::RicciTensor => self.ricci_tensor(s)?.transpose().as_slice().to_vec(),
            OracleQuantity::LieF2(v) => vec![self.lie_f2(v, s)?],
            OracleQuantity::LieG(v) => self.lie_g(v, s)?.transpose().as_slice().to_vec(),
        })
    }
}

/// One-shot oracle evaluation with default steps.
pub fn finite_difference_oracle(f: &FinslerStructure, s: &Sample, q: &OracleQuantity) -> Result<Vec<f64>> {
    FdOracle::new(f)?.quantity(q, s)
}
