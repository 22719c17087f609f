#![allow(clippy::result_large_err)]

//! Decorated ideal triangulations of finite covers of the modular surface,
//! their Whitehead moves, and the Weil–Petersson form on decoration space.

pub mod farey;
pub mod io;
pub mod lightcone;
pub mod modgroup;
pub mod render;
pub mod structures;
pub mod subgroup;
pub mod wpform;
