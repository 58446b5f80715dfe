//! Executable verification suites: the finite-difference oracle, the
//! pullback and scaling lemma suites, structural invariants, and the
//! shared tolerance table.

pub mod corpus;
pub mod invariants;
pub mod lemmas;
pub mod oracle;
pub mod tolerances;

pub use invariants::{verify_invariants, verify_lie_contraction, verify_oracle};
pub use lemmas::{verify_lemma1, verify_lemma2, verify_lemma3, verify_scaling, VerificationCheck, VerificationReport};
pub use oracle::{finite_difference_oracle, FdOracle, OracleQuantity, OracleSteps};
