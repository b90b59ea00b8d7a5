//! Kernel for System F with expansion variables.

pub mod canon;
pub mod expand;
pub mod gen;
pub mod initial;
pub mod neq;
pub mod par;
pub mod parse;
pub mod print;
pub mod reduce;
pub mod solve;
pub mod syntax;
pub mod systemf;
pub mod typing;
