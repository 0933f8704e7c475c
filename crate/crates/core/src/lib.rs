//! Exact rates of metastability for asymptotically decreasing sequences and
//! for Picard iterates of maps with a ball of fixed points in uniformly
//! convex spaces, together with a brute-force oracle that checks them.
//!
//! Rates are evaluated with arbitrary-precision naturals and rationals, so
//! values such as `2^8191` are computed exactly; orbits are simulated in
//! double precision and compared with a fixed slack [`picard::TAU`].

pub mod convexity;
pub mod error;
pub mod num;
pub mod oracle;
pub mod picard;
pub mod rates;

pub use error::{Error, Result};
pub use num::{Nat, PosRational, Rational};
pub use rates::{Counterfunction, CounterDesc, MetaDecRate, MetastabilityRate};
