//! Points of the slit tangent bundle and deterministic sample grids.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Fiber vectors shorter than this are rejected before any evaluation.
pub const DEGENERATE_Y: f64 = 1e-12;

/// A point `(x, y)` on the slit tangent bundle, plus the time parameter
/// used by time-dependent families (zero otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
}

impl Sample {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Sample {
        Sample { x, y, t: 0.0 }
    }

    pub fn at_time(mut self, t: f64) -> Sample {
        self.t = t;
        self
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn y_norm(&self) -> f64 {
        self.y.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Same base point, fiber vector scaled by `lambda`.
    pub fn scaled_y(&self, lambda: f64) -> Sample {
        Sample { x: self.x.clone(), y: self.y.iter().map(|v| v * lambda).collect(), t: self.t }
    }

    /// Checks shape and the slit-bundle condition `|y| > 0`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.x.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.x.len() });
        }
        if self.y.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: self.y.len() });
        }
        if !(self.y_norm() >= DEGENERATE_Y) {
            return Err(Error::DegenerateSample { sample: self.to_string() });
        }
        Ok(())
    }

    /// Input vector in the canonical slot order `x1..xn, y1..yn, t`.
    pub(crate) fn inputs(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.x.len() + 1);
        v.extend_from_slice(&self.x);
        v.extend_from_slice(&self.y);
        v.push(self.t);
        v
    }
}

impl fmt::Display for Sample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(x={:?}, y={:?}", self.x, self.y)?;
        if self.t != 0.0 {
            write!(f, ", t={}", self.t)?;
        }
        f.write_str(")")
    }
}

/// Regular grid over an x-box times a set of unit fiber directions.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    pub lo: f64,
    pub hi: f64,
    /// Points per axis (1 means the box center).
    pub resolution: usize,
    /// Unit y-directions per base point.
    pub directions: usize,
}

impl Default for SampleGrid {
    /// `[-1, 1]^n`, 3 points per axis, 8 directions.
    fn default() -> Self {
        SampleGrid { lo: -1.0, hi: 1.0, resolution: 3, directions: 8 }
    }
}

impl SampleGrid {
    pub fn validate(&self) -> Result<()> {
        if self.resolution == 0 || self.directions == 0 {
            return Err(Error::Invalid("grid resolution and direction count must be at least 1".into()));
        }
        if !(self.lo <= self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::Invalid(format!("bad grid box [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }

    fn axis(&self) -> Vec<f64> {
        if self.resolution == 1 {
            return vec![0.5 * (self.lo + self.hi)];
        }
        let step = (self.hi - self.lo) / (self.resolution - 1) as f64;
        (0..self.resolution).map(|i| self.lo + step * i as f64).collect()
    }

    pub fn samples(&self, dim: usize) -> Vec<Sample> {
        let axis = self.axis();
        let dirs = unit_directions(dim, self.directions);
        let mut points: Vec<Vec<f64>> = vec![vec![]];
        for _ in 0..dim {
            points = points
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&a| {
                        let mut q = p.clone();
                        q.push(a);
                        q
                    })
                })
                .collect();
        }
        points
            .into_iter()
            .flat_map(|x| dirs.iter().map(move |y| Sample::new(x.clone(), y.clone())))
            .collect()
    }
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Deterministic, roughly uniform unit vectors: equally spaced angles in
/// the plane, a Fibonacci lattice on the 2-sphere, Halton points above.
pub fn unit_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        0 => vec![],
        1 => (0..count).map(|k| vec![if k % 2 == 0 { 1.0 } else { -1.0 }]).collect(),
        2 => (0..count)
            .map(|k| {
                let a = 2.0 * PI * (k as f64 + 0.5) / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => {
            const PRIMES: [usize; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
            let mut out = Vec::with_capacity(count);
            let mut i = 1;
            while out.len() < count {
                let v: Vec<f64> = (0..dim).map(|d| 2.0 * radical_inverse(i, PRIMES[d % 8]) - 1.0).collect();
                let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if norm > 0.2 {
                    out.push(v.iter().map(|c| c / norm).collect());
                }
                i += 1;
            }
            out
        }
    }
}

/// `count` seeded samples: x uniform in `[lo, hi]^dim`, y a uniform unit
/// direction.
pub fn random_samples(dim: usize, count: usize, seed: u64, lo: f64, hi: f64) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let x = (0..dim).map(|_| rng.gen_range(lo..=hi)).collect();
            let y = loop {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                if n > 0.1 && n <= 1.0 {
                    break v.iter().map(|c| c / n).collect();
                }
            };
            Sample::new(x, y)
        })
        .collect()
}
