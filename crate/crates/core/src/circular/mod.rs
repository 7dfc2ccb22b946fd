// SPDX-License-Identifier: MIT
//! Circular coefficient sequences, C-operators and the odometer-to-circular functor.

pub mod cop;
pub mod functor;
pub mod params;

pub use cop::{c_op, c_op_substring, parse_subsections, SubsectionTree};
pub use functor::{functor_apply, functor_invert, new_spacer_fraction, FunctorLevel, FunctorMap};
pub use params::{derive_params, spacer_profile, CircularCoefficients, CircularParams, CoefficientFlags};
