//! Builders for the metrics used throughout the tests and the CLI.

use crate::expr::Expr;
use crate::finsler::FinslerStructure;

fn sum_sq(n: usize, f: fn(usize) -> Expr) -> Expr {
    Expr::sum((1..=n).map(|i| Expr::powi(f(i), 2)))
}

/// `F² = |y|²`.
pub fn euclidean(n: usize) -> FinslerStructure {
    FinslerStructure::new(n, sum_sq(n, Expr::y)).expect("valid dimension").named(format!("euclidean{n}"))
}

/// Round sphere of curvature 1 in stereographic coordinates:
/// `F² = 4|y|² / (1 + |x|²)²`.
pub fn conformal_sphere(n: usize) -> FinslerStructure {
    let f2 = Expr::constant(4.0) * sum_sq(n, Expr::y) / Expr::powi(Expr::one() + sum_sq(n, Expr::x), 2);
    FinslerStructure::new(n, f2).expect("valid dimension").named(format!("sphere{n}"))
}

/// Planar Randers metric `F = |y| + b (y1 + x1 y2)`.
///
/// The 1-form is not closed, so the metric is not projectively flat and
/// its Ricci scalar genuinely depends on `y`. It is strongly convex where
/// `|b| sqrt(1 + x1²) < 1`.
pub fn randers(b: f64) -> FinslerStructure {
    let alpha = Expr::sqrt(sum_sq(2, Expr::y));
    let beta = Expr::constant(b) * (Expr::y(1) + Expr::x(1) * Expr::y(2));
    FinslerStructure::new(2, Expr::powi(alpha + beta, 2)).expect("planar").named(format!("randers({b})"))
}

/// Constant-coefficient planar Randers metric `F = |y| + b y1` (flat).
pub fn randers_constant(b: f64) -> FinslerStructure {
    let alpha = Expr::sqrt(sum_sq(2, Expr::y));
    FinslerStructure::new(2, Expr::powi(alpha + Expr::constant(b) * Expr::y(1), 2))
        .expect("planar")
        .named(format!("randers_const({b})"))
}
