//! Every pass/fail threshold used by the verification suites.

/// Named tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub name: &'static str,
    pub value: f64,
}

/// Flat-metric quantities, absolute.
pub const FLAT: Tolerance = Tolerance { name: "flat", value: 1e-12 };
/// `y`-rescaling of `F²`, `g`, `G`, `R`, `Ric`, relative.
pub const HOMOGENEITY: Tolerance = Tolerance { name: "homogeneity", value: 1e-8 };
/// `y^i ∂F²/∂y^i = 2F²`, relative.
pub const EULER: Tolerance = Tolerance { name: "euler", value: 1e-9 };
/// `Ric_jk y^j y^k = F² Ric` and `(L g) y y = L F²`, relative.
pub const CONTRACTION: Tolerance = Tolerance { name: "contraction", value: 1e-8 };
/// Symmetry of `γ` in its lower indices and of `Ric_jk`, relative.
pub const SYMMETRY: Tolerance = Tolerance { name: "symmetry", value: 1e-12 };
/// `g_{μF} = μ² g_F`, `R_{μF} = R_F/μ²`, `Ric_{μF} = Ric_F/μ²`, relative.
pub const SCALING: Tolerance = Tolerance { name: "scaling", value: 1e-8 };
/// `γ_{μF} = γ_F`, `G_{μF} = G_F`, absolute.
pub const SCALING_INVARIANT: Tolerance = Tolerance { name: "scaling-invariant", value: 1e-10 };
/// Pullback identities (metric, gradient, Christoffel, spray, Ricci), relative.
pub const PULLBACK: Tolerance = Tolerance { name: "pullback", value: 1e-6 };
/// Oracle agreement for `g`, `γ`, `G`, `R`, `Ric`, `L F²`, `L g`, relative.
pub const ORACLE: Tolerance = Tolerance { name: "oracle", value: 1e-6 };
/// Oracle agreement for `Ric_jk` (deepest stencil nesting), relative.
pub const ORACLE_RICCI_TENSOR: Tolerance = Tolerance { name: "oracle-ricci-tensor", value: 1e-3 };
/// Soliton residuals of exact solitons.
pub const SOLITON: Tolerance = Tolerance { name: "soliton", value: 1e-10 };
/// Flow-equation residual.
pub const FLOW: Tolerance = Tolerance { name: "flow", value: 1e-4 };
/// Stationarity of the Gaussian family, relative.
pub const STATIONARY: Tolerance = Tolerance { name: "stationary", value: 1e-6 };
/// Agreement of the closed-form and lemma Ricci paths along a flow, relative.
pub const FLOW_PATHS: Tolerance = Tolerance { name: "flow-paths", value: 1e-6 };
/// Conformal factor against `1 - 2λt`, absolute.
pub const CONFORMAL: Tolerance = Tolerance { name: "conformal", value: 1e-5 };

/// All of the above, for reports and documentation.
pub const TABLE: &[Tolerance] = &[
    FLAT,
    HOMOGENEITY,
    EULER,
    CONTRACTION,
    SYMMETRY,
    SCALING,
    SCALING_INVARIANT,
    PULLBACK,
    ORACLE,
    ORACLE_RICCI_TENSOR,
    SOLITON,
    FLOW,
    STATIONARY,
    FLOW_PATHS,
    CONFORMAL,
];

/// Reference magnitudes below this are compared absolutely.
pub const REL_FLOOR: f64 = 1e-6;

/// `max |a - b| / max(max |b|, REL_FLOOR)`.
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "compared tensors must have equal size");
    let diff = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    let scale = b.iter().fold(0.0f64, |m, y| m.max(y.abs()));
    diff / scale.max(REL_FLOOR)
}

/// `max |a - b|`.
pub fn abs_err(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "compared tensors must have equal size");
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_error_uses_tensor_scale() {
        assert_eq!(rel_err(&[1.0, 2.5], &[1.0, 2.0]), 0.25);
        assert_eq!(rel_err(&[1e-9], &[0.0]), 1e-3);
        assert_eq!(abs_err(&[1.0, -1.0], &[1.0, 1.0]), 2.0);
    }

    #[test]
    fn table_names_are_unique() {
        let mut names: Vec<_> = TABLE.iter().map(|t| t.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), TABLE.len());
    }
}
