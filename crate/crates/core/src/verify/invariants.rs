//! Structural invariants of a single structure, and agreement with the
//! finite-difference oracle.

use nalgebra::DVector;

use super::lemmas::{VerificationCheck, VerificationReport};
use super::oracle::{FdOracle, OracleQuantity};
use super::tolerances::{
    rel_err, CONTRACTION, EULER, HOMOGENEITY, ORACLE, ORACLE_RICCI_TENSOR, SYMMETRY,
};
use crate::error::Result;
use crate::finsler::FinslerStructure;
use crate::lift::{LieDerivative, VectorField};
use crate::sample::Sample;

const RESCALINGS: [f64; 3] = [0.5, 2.0, 3.0];

fn or_inf(r: Result<f64>) -> f64 {
    r.unwrap_or(f64::INFINITY)
}

fn flat(m: &nalgebra::DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// Homogeneity ladder (`F²` 2, `g` 0, `G` 2, `R` 0, `Ric` 0), Euler
/// identity, lower-index symmetry and the contraction
/// `Ric_jk y^j y^k = F² Ric`.
pub fn verify_invariants(f: &FinslerStructure, samples: &[Sample]) -> Result<VerificationReport> {
    let check = f.check_finsler(samples);
    let euler = check.rows.iter().map(|r| if r.error.is_some() { f64::INFINITY } else { r.euler_residual }).collect();
    let f2_homog =
        check.rows.iter().map(|r| if r.error.is_some() { f64::INFINITY } else { r.homogeneity_residual }).collect();
    let (mut g_h, mut spray_h, mut r_h, mut ric_h, mut sym, mut contraction) =
        (vec![], vec![], vec![], vec![], vec![], vec![]);
    for s in samples {
        let base = match (f.fundamental_tensor(s), f.curvature(s)) {
            (Ok(m), Ok(c)) => Some((m, c)),
            _ => None,
        };
        let Some((m, c)) = base else {
            for v in [&mut g_h, &mut spray_h, &mut r_h, &mut ric_h, &mut sym, &mut contraction] {
                v.push(f64::INFINITY);
            }
            continue;
        };
        let (mut wg, mut ws, mut wr, mut wric) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for l in RESCALINGS {
            let sl = s.scaled_y(l);
            let res = (|| -> Result<()> {
                let ml = f.fundamental_tensor(&sl)?;
                let cl = f.curvature(&sl)?;
                wg = wg.max(rel_err(&flat(&ml.g), &flat(&m.g)));
                ws = ws.max(rel_err(cl.spray.as_slice(), (&c.spray * (l * l)).as_slice()));
                wr = wr.max(rel_err(&flat(&cl.reduced), &flat(&c.reduced)));
                wric = wric.max(rel_err(&[cl.ric], &[c.ric]));
                Ok(())
            })();
            if res.is_err() {
                wg = f64::INFINITY;
            }
        }
        g_h.push(wg);
        spray_h.push(ws);
        r_h.push(wr);
        ric_h.push(wric);
        let n = f.dim();
        let mut asym: f64 = 0.0;
        let scale = c.gamma.max_abs().max(c.ric_tensor.abs().max()).max(1e-300);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    asym = asym.max((c.gamma.get(i, j, k) - c.gamma.get(i, k, j)).abs());
                }
                asym = asym.max((c.ric_tensor[(i, j)] - c.ric_tensor[(j, i)]).abs());
            }
        }
        sym.push(asym / scale.max(1.0));
        let y = DVector::from_column_slice(&s.y);
        let lhs = (y.transpose() * &c.ric_tensor * &y)[(0, 0)];
        contraction.push(or_inf(f.f2_at(s).map(|f2| rel_err(&[lhs], &[f2 * c.ric]))));
    }
    let checks = vec![
        VerificationCheck::new("F2 homogeneity", f2_homog, EULER),
        VerificationCheck::new("euler identity", euler, EULER),
        VerificationCheck::new("g homogeneity", g_h, HOMOGENEITY),
        VerificationCheck::new("spray homogeneity", spray_h, HOMOGENEITY),
        VerificationCheck::new("curvature homogeneity", r_h, HOMOGENEITY),
        VerificationCheck::new("ricci homogeneity", ric_h, HOMOGENEITY),
        VerificationCheck::new("symmetry", sym, SYMMETRY),
        VerificationCheck::new("ricci contraction", contraction, CONTRACTION),
    ];
    Ok(VerificationReport::new("invariants", f.name().unwrap_or("F"), checks))
}

/// `(L_V̂ g)_jk y^j y^k = L_V̂ F²`.
pub fn verify_lie_contraction(f: &FinslerStructure, field: &VectorField, samples: &[Sample]) -> Result<VerificationCheck> {
    let lie = LieDerivative::new(f, field)?;
    let res = samples
        .iter()
        .map(|s| {
            or_inf(lie.eval(s).map(|(lf, lg)| {
                let y = DVector::from_column_slice(&s.y);
                rel_err(&[(y.transpose() * lg * &y)[(0, 0)]], &[lf])
            }))
        })
        .collect();
    Ok(VerificationCheck::new("lie contraction", res, CONTRACTION))
}

/// Largest magnitude below which a quantity counts as identically zero.
pub const ZERO_TENSOR: f64 = 1e-12;

/// Per-sample `max |a - b|` for `(reference, approximation)` pairs,
/// divided by the largest reference entry over the whole sample set;
/// references that vanish on every sample are compared absolutely. Failed
/// evaluations become `+∞`.
pub fn scaled_errors(pairs: &[Option<(Vec<f64>, Vec<f64>)>]) -> Vec<f64> {
    let scale = pairs.iter().flatten().flat_map(|(a, _)| a.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = if scale < ZERO_TENSOR { 1.0 } else { scale };
    pairs
        .iter()
        .map(|p| match p {
            Some((a, b)) => a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale,
            None => f64::INFINITY,
        })
        .collect()
}

/// Symbolic quantities against the finite-difference oracle. Lie
/// derivatives are included for each field in `fields`.
pub fn verify_oracle(f: &FinslerStructure, fields: &[VectorField], samples: &[Sample]) -> Result<VerificationReport> {
    let oracle = FdOracle::new(f)?;
    let mut quantities = vec![
        OracleQuantity::Metric,
        OracleQuantity::Christoffel,
        OracleQuantity::Spray,
        OracleQuantity::ReducedCurvature,
        OracleQuantity::Ricci,
        OracleQuantity::RicciTensor,
    ];
    for v in fields {
        quantities.push(OracleQuantity::LieF2(v.clone()));
        quantities.push(OracleQuantity::LieG(v.clone()));
    }
    let lies = fields.iter().map(|v| LieDerivative::new(f, v)).collect::<Result<Vec<_>>>()?;
    let mut checks = Vec::new();
    let mut field_idx = 0;
    for q in &quantities {
        let symbolic = |s: &Sample| -> Result<Vec<f64>> {
            Ok(match q {
                OracleQuantity::Metric => flat(&f.fundamental_tensor(s)?.g),
                OracleQuantity::Christoffel => f.christoffel(s)?.as_slice().to_vec(),
                OracleQuantity::Spray => f.spray(s)?.as_slice().to_vec(),
                OracleQuantity::ReducedCurvature => flat(&f.reduced_curvature(s)?),
                OracleQuantity::Ricci => vec![f.ricci_scalar(s)?],
                OracleQuantity::RicciTensor => flat(&f.akbar_zadeh_ricci(s)?),
                OracleQuantity::LieF2(_) => vec![lies[field_idx].eval(s)?.0],
                OracleQuantity::LieG(_) => flat(&lies[field_idx].eval(s)?.1),
            })
        };
        let pairs: Vec<Option<(Vec<f64>, Vec<f64>)>> =
            samples.iter().map(|s| Some((symbolic(s).ok()?, oracle.quantity(q, s).ok()?))).collect();
        let res = scaled_errors(&pairs);
        let tol = if *q == OracleQuantity::RicciTensor { ORACLE_RICCI_TENSOR } else { ORACLE };
        let name = match q {
            OracleQuantity::LieF2(_) | OracleQuantity::LieG(_) => format!("oracle {} [field {}]", q.name(), field_idx + 1),
            _ => format!("oracle {}", q.name()),
        };
        checks.push(VerificationCheck::new(name, res, tol));
        if matches!(q, OracleQuantity::LieG(_)) {
            field_idx += 1;
        }
    }
    Ok(VerificationReport::new("oracle", f.name().unwrap_or("F"), checks))
}
