//! Angular two-photon correlations of a driven emitter dimer in free space,
//! above a planar substrate and near a dielectric or plasmonic nanosphere.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod couplings;
pub mod dynamics;
pub mod error;
pub mod greens;
pub mod map;
pub mod model;
pub mod quadrature;
pub mod zeros;
pub mod specialfns;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    mod configuration {}
    #[doc = include_str!("../../../book/src/path-amplitudes.md")]
    mod path_amplitudes {}
    #[doc = include_str!("../../../book/src/couplings.md")]
    mod couplings {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/correlations.md")]
    mod correlations {}
    #[doc = include_str!("../../../book/src/zeros.md")]
    mod zeros {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
