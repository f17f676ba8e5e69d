//! Exact computations with mod-p modular forms of level one.
//!
//! The crate is organised bottom-up:
//!
//! * [`fieldseries`]: prime fields and truncated q-expansions with explicit precision;
//! * [`linalg`]: dense row reduction, kernels, subspaces and characteristic polynomials over F_p;
//! * [`level1`]: Eisenstein series, `Delta`, bases of `M_k` and `S_k`, Hasse relabeling, filtration;
//! * [`hecke`]: `T_n`, `U_l`, `V_p`, `theta`, operator matrices and the ordinary/non-ordinary split;
//! * [`heckealg`]: Hecke algebras, duality pairings, cokernels and Serre's quotient spaces;
//! * [`serreweight`]: Serre weights and non-ordinary Serre weights from symbolic descriptors;
//! * [`commalg`]: Hilbert functions of truncated local rings;
//! * [`ultrapatch`]: ultraproducts and the patching functor on finite toy modules.

pub mod commalg;
pub mod error;
pub mod fieldseries;
pub mod hecke;
pub mod heckealg;
pub mod level1;
pub mod serreweight;
pub mod ultrapatch;
pub mod linalg;

pub use error::{Error, Result};
pub use fieldseries::{FieldContext, QExpansion, Ring};
pub use level1::{Filtration, Form, FormSpace, SpaceKind};
pub use linalg::{Matrix, Subspace};
pub use hecke::HeckeOperatorLabel;
pub use heckealg::{CokernelReport, HeckeAlgebra, SerreQuotientSpace};
pub use serreweight::{ResidualDescriptor, SerreWeightReport};
pub use commalg::{HilbertFunction, TruncatedLocalRing};
pub use ultrapatch::{BaseRing, FinModule, ModuleSequence, Selector};
