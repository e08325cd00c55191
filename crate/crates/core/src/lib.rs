//! Exact symbolic toolkit for blow-ups of affine space and algebraic sprays.
//!
//! Everything is computed over the rationals with no floating point anywhere:
//! polynomial arithmetic, Groebner bases, elimination, blow-up charts, the two
//! spray families (flow sprays and embedded-hypersurface sprays), and the
//! domination certificates assembled from them.

pub mod error;
pub mod rat;
pub mod order;
pub mod mpoly;
pub mod parse;
pub mod linalg;
pub mod groebner;
pub mod ideal;
pub mod gcd;
pub mod sample;
pub mod blowup;
pub mod spray1;
pub mod spray2;
pub mod dominate;
pub mod scene;
pub mod report;

pub use error::{Error, Result};
pub use rat::Rat;
