//! Impedance of the decoupled, linearized pseudo-2D lithium-ion cell model:
//! closed-form transfer functions in grouped parameters, a discretized PDE
//! oracle, local identifiability analysis and least-squares estimation.
//!
//! ```
//! use p2d_ident::impedance::{total_impedance, ComplexFrequency};
//! use p2d_ident::params::{group_parameters, FullCellParameters};
//!
//! let g = group_parameters(&FullCellParameters::reference()).unwrap();
//! let z = total_impedance(&g, ComplexFrequency::from_hz(1.0)).unwrap();
//! assert!(z.re < 0.0);
//! ```

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod constants;
pub mod error;
pub mod estimation;
pub mod hyperbolic;
pub mod identifiability;
pub mod impedance;
pub mod io;
pub mod oracle;
pub mod params;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/parameters.md")]
    mod parameters {}
    #[doc = include_str!("../../../book/src/impedance.md")]
    mod impedance {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/identifiability.md")]
    mod identifiability {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
