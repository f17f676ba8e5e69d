//! Prime-field arithmetic and truncated q-expansions.
//!
//! Every series carries its precision: a value of precision `N` is known
//! modulo `q^N`, and binary operations return the smaller of the two input
//! precisions. Nothing here ever pads or silently truncates.

mod field;
mod series;

pub use field::{factorize, is_prime, primes_up_to, FieldContext, MAX_PRIME};
pub use series::{QExpansion, Ring};
