//! Decision procedure for quantifier-free formulas over algebraic data
//! types, by reduction to equality with uninterpreted functions plus
//! linear integer arithmetic (EUF+LIA).
//!
//! Pipeline: [`ast::parse`] a script, bring it into flat negation normal
//! form with [`normalize`], translate it with [`reduce::reduce`], decide
//! the result with a [`backend`], and turn integer models back into ADT
//! models with [`models::reconstruct`]. Formulas with size constraints go
//! through the unfolding loop in [`sizesolve`]; [`interp`] back-translates
//! interpolants computed by an external solver.

pub mod ast;
pub mod backend;
pub mod corpus;
pub mod interp;
pub mod models;
pub mod normalize;
pub mod oracle;
pub mod pipeline;
pub mod reduce;
pub mod reduced;
pub mod sexp;
pub mod signature;
pub mod sizesolve;
pub mod suite;
