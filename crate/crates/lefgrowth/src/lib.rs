//! Exact computation toolkit for locally-embeddable-into-finite (LEF)
//! approximations of group actions: free words, finitely supported
//! permutations, Schreier graphs and spanning trees, layered permutation
//! actions built from permissible growth tables, local embedding
//! verification and search, symmetric and elementary (transvection)
//! enrichments, tree and Steinberg presentations with coset enumeration,
//! and exact growth-bound bookkeeping.
//!
//! Conventions, used consistently across the crate:
//! - actions are right actions, written `(ω)g` in docs;
//! - composition `p.compose(q)` applies `p` first, then `q`;
//! - conjugation is `x^g = g^-1 x g`, so supports relabel through `g`.

pub mod action;
pub mod elem_enrich;
pub mod embeddings;
pub mod error;
pub mod finite;
pub mod graph;
pub mod parallel;
pub mod perm;
pub mod permissible;
pub mod presentations;
pub mod schreier;
pub mod permgroup;
pub mod sym_enrich;
pub mod todd_coxeter;
pub mod word;

pub use error::{Error, Result};
