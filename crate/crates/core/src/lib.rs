pub mod blocks;
pub mod entanglement;
pub mod error;
pub mod fock;
pub mod geometry;
pub mod io;
pub mod linalg;
pub mod modes;
pub mod program;
pub mod robustness;
pub mod selfcheck;
pub mod states;
