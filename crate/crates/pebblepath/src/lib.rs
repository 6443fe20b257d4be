//! Pebble-relation comonad over finite relational structures.
//!
//! This crate materializes the length-bounded pebble-relation construction
//! `PR[k, n]` over a finite structure and builds the toolchain around it:
//!
//! * coalgebras of the construction correspond to pebbled linear forest
//!   covers and hence to path decompositions, giving an exact pathwidth
//!   computation with certificates ([`decomposition`]);
//! * one-shot ("all-in-one") pebble games, their set-valued counterpart,
//!   and a bijective variant, with replayable certificates and strategy /
//!   coKleisli-morphism conversions ([`games`]);
//! * model checking and translations for restricted-conjunction k-variable
//!   counting logics, plus a counting-type equivalence test ([`logic`]);
//! * homomorphism-vector equivalence over all small targets of bounded
//!   pathwidth ([`homcount`]).
//!
//! Everything is exact and deterministic: enumeration orders are pinned,
//! counts use arbitrary precision, and oversized materializations are
//! refused (never truncated).

pub mod comonad;
pub mod corpus;
pub mod decomposition;
pub mod error;
pub mod games;
pub mod homcount;
pub mod io;
pub mod logic;
pub mod structure;

pub use comonad::{IndexedPlay, Pebble, PebbleRelation, PebbleSeq};
pub use decomposition::{
    coalgebra_number, pathwidth_exact, Coalgebra, LinearForestCover, PathDecomposition,
};
pub use error::{Error, Result};
pub use games::{
    decide_all_in_one, decide_bijective_all_in_one, decide_set_valued, Certificate,
    DuplicatorStrategy, GameVerdict, Winner,
};
pub use homcount::{
    canonical_key, enumerate_pw_structures, hom_count_pd, hom_equivalence, hom_vector,
    HomEquivalence,
};
pub use logic::{
    equiv_by_counting_types, model_check, model_check_exact, to_exact, to_threshold,
    validate_restricted, Assignment, ExactFormula, Formula, Var,
};
pub use structure::{Element, Gaifman, HomMode, PartialMap, Signature, Structure};
