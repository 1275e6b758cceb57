//! Special functions used by the far-field and coupling calculations.

mod bessel;
mod fresnel;
mod legendre;
mod mie;

pub use bessel::{
    derivative_seq, spherical_hankel1, spherical_hankel1_seq, spherical_jn_seq, spherical_yn_seq,
};
pub use fresnel::{fresnel_rp, fresnel_rs, Reflection};
pub use legendre::{assoc_legendre_p1, legendre_fl, legendre_fl_seq, legendre_p_seq};
pub use mie::{mie_rtm, mie_rtm_seq, MieCoefficientTable};
