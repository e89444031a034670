//! Gröbner bases for shuffle operads and a checker for the leading-term
//! criteria of the Nielsen-Schreier property.

pub mod dsl;
pub mod error;
pub mod groebner;
pub mod linalg;
pub mod nschreier;
pub mod oracle;
pub mod ordering;
pub mod poly;
pub mod presentation;
pub mod shuffle_tree;
pub mod symmetrize;

pub use error::{Error, Result};
pub use groebner::{buchberger, hilbert_series, normal_monomials, quadratic_certificate, TruncatedGB};
pub use linalg::Coeff;
pub use nschreier::{verdict, NsReport, Verdict};
pub use ordering::OrderingSpec;
pub use poly::Polynomial;
pub use presentation::{GeneratorSpec, Presentation, Symmetry};
pub use shuffle_tree::{Signature, Tree};
pub use symmetrize::{present_shuffle, ShufflePresentation};
