//! Hyper-Kloosterman sums over prime finite fields and the machinery built on
//! them: sum-product transforms, bilinear-form bound brackets, the wild
//! monodromy multiset `S_k`, and the divisor-type application in arithmetic
//! progressions.

pub mod bilinear;
pub mod divisor_app;
pub mod error;
pub mod finite_field;
pub mod kloosterman;
pub mod monodromy;
pub mod numeric;
pub mod sum_product;

pub use error::{Error, Result};
pub use finite_field::{
    build_extension, make_prime_field, AdditiveCharacter, ExtElement, ExtField, PrimeField,
};
pub use kloosterman::{kloosterman_naive, kloosterman_table, KloostermanTable, SignConvention};
pub use num_complex::Complex64;
