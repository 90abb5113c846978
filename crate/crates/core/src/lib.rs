//! Dense exact linear algebra over prime fields `Z/pZ`.
//!
//! Matrices hold canonical residues in `u32`. Products accumulate in `u64`
//! and are reduced only when the accumulator could overflow; every reduction
//! is recorded in a [`RedLedger`] so measured costs can be compared with
//! closed-form counts.
//!
//! ```
//! use ffpluq::{factor, Algorithm, FactorOptions, Mat, PrimeField, RedLedger};
//! use ffpluq::pluq::extract_profiles;
//!
//! let f = PrimeField::new(5).unwrap();
//! let a = Mat::from_rows(&f, &[[0, 1, 2], [0, 2, 4], [1, 0, 0]]);
//! let res = factor(&f, a, Algorithm::TileRecursive, &FactorOptions::default(), &mut RedLedger::new()).unwrap();
//! let prof = extract_profiles(&res).unwrap();
//! assert_eq!((prof.rows, prof.cols), (vec![0, 2], vec![0, 1]));
//! ```

pub mod bench;
pub mod blas;
pub mod error;
pub mod field;
pub mod ledger;
pub mod matrix;
pub mod oracle;
pub mod par;
pub mod perm;
pub mod pluq;

pub use blas::GemmPolicy;
pub use error::{Error, Result};
pub use field::{Elem, PrimeField};
pub use ledger::{KernelKind, RedLedger};
pub use matrix::{Mat, MatMut, MatRef};
pub use perm::PermSeq;
pub use pluq::{factor, Algorithm, FactorOptions, PluqResult, RankProfiles};
