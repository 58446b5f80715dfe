//! The bundled verification corpus.

use nalgebra::DMatrix;

use super::invariants::verify_invariants;
use super::lemmas::{verify_lemma1, verify_lemma2, verify_lemma3, VerificationReport};
use crate::error::Result;
use crate::finsler::FinslerStructure;
use crate::lift::{SymbolicDiffeo, VectorField};
use crate::metrics;
use crate::sample::{Sample, SampleGrid};

/// Scale factors exercised by the scaling suites.
pub const SCALE_FACTORS: [f64; 3] = [0.5, 2.0, 3.0];

/// Euclidean, round sphere and Randers(0.1), all planar.
pub fn lemma_metrics() -> Vec<FinslerStructure> {
    vec![metrics::euclidean(2), metrics::conformal_sphere(2), metrics::randers(0.1)]
}

/// Identity, rotation, shear, scaling and a polynomial diffeomorphism.
pub fn lemma_diffeos() -> Vec<SymbolicDiffeo> {
    vec![
        SymbolicDiffeo::identity(2),
        SymbolicDiffeo::rotation(0.7),
        SymbolicDiffeo::linear(&DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 1.0])).expect("invertible").named("shear"),
        SymbolicDiffeo::linear(&DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 2.0])).expect("invertible").named("scaling"),
        SymbolicDiffeo::parse(&["x1 + 0.1*x2^2", "x2"], Some(&["x1 - 0.1*x2^2", "x2"]))
            .expect("valid")
            .named("polynomial"),
    ]
}

/// Fields used for Lie-derivative checks.
pub fn lemma_fields() -> Vec<VectorField> {
    vec![VectorField::radial(2, 0.5), VectorField::rotation(), VectorField::parse(&["x2^2", "sin(x1)"]).expect("valid")]
}

pub fn default_samples() -> Vec<Sample> {
    SampleGrid::default().samples(2)
}

/// Pullback suites for every metric and diffeomorphism, the scaling suite
/// for every metric, diffeomorphism and scale factor.
pub fn run_lemma_corpus(samples: &[Sample]) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for f in lemma_metrics() {
        for d in lemma_diffeos() {
            out.push(verify_lemma1(&f, &d, samples)?);
            out.push(verify_lemma2(&f, &d, samples)?);
            for mu in SCALE_FACTORS {
                out.push(verify_lemma3(&f, mu, &d, samples)?);
            }
        }
    }
    Ok(out)
}

/// Structural invariants for every corpus metric and its scaled variants.
pub fn run_invariant_corpus(samples: &[Sample]) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for f in lemma_metrics() {
        out.push(verify_invariants(&f, samples)?);
        for mu in SCALE_FACTORS {
            out.push(verify_invariants(&f.scaled(mu)?, samples)?);
        }
    }
    Ok(out)
}
