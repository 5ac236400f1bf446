//! qsd-lab: a numerical laboratory for minimum-error quantum state
//! discrimination of unitarily related mixtures.
//!
//! The crate builds up from a dense complex matrix layer ([`operator`]) to
//! density operators and the fidelity family ([`states`]), discrimination
//! bounds and Chernoff exponents ([`discrimination`]), time evolution and
//! autocorrelation diagnostics ([`dynamics`]), quadrature representations of
//! uncountable mixtures ([`uncountable`]), finite-rank truncation studies
//! ([`truncation`]), and a declarative scenario runner ([`scenario`]) behind
//! the `qsd-lab` binary.

pub mod discrimination;
pub mod dynamics;
pub mod error;
pub mod operator;
pub mod random;
pub mod scenario;
pub mod states;
pub mod truncation;
pub mod uncountable;

pub use error::{Error, Result};
pub use operator::{herm_eig, herm_fn, trace_norm, unitary_exp, ComplexMatrix, HermEigen, MatrixFunction};
pub use states::{
    apply_measurement, fidelity, purification_fidelity_check, purity, super_fidelity,
    DensityOperator, Ensemble, Povm,
};

// The guide's code samples compile and run as doctests, so the book in
// `book/` cannot drift from the library.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }

    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(operators, "../../../book/src/operators.md");
    chapter!(states, "../../../book/src/states.md");
    chapter!(discrimination, "../../../book/src/discrimination.md");
    chapter!(dynamics, "../../../book/src/dynamics.md");
    chapter!(uncountable, "../../../book/src/uncountable.md");
    chapter!(truncation, "../../../book/src/truncation.md");
    chapter!(cli, "../../../book/src/cli.md");
}
