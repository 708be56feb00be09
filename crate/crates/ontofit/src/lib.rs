//! Fitting and finite bases for description-logic ontologies and
//! tuple-generating dependencies (TGDs) from relational data examples.
//!
//! Given positive and negative example instances (finite relational
//! structures), this library decides whether a *fitting* constraint exists in
//! a chosen language — the description logics EL, ELI, EL⊥, ELI⊥, or the TGD
//! classes GTGD (guarded), FGTGD (frontier-guarded), F1TGD (frontier-one),
//! FullTGD, IND (inclusion dependencies), and unrestricted TGDs — constructs
//! a concrete witness when one exists, and builds finite *bases* of instance
//! sets for the languages that admit them (EL-family, GTGD, IND).
//!
//! Module map:
//! - [`relational`]: schemas, instances, homomorphisms, conjunctive queries,
//!   direct products, disjoint unions, diversification.
//! - [`concepts`]: hash-consed EL(I)(⊥) concepts, extensions, simulations
//!   with separator extraction, characteristic concepts, definability.
//! - [`dl_fitting`]: EL-family bases, ontology satisfaction, and fitting via
//!   the simulation characterization.
//! - [`tgd`]: TGD representation, classification, model checking, bounded
//!   chase and entailment.
//! - [`tgd_basis`]: finite GTGD and IND bases, basis verification.
//! - [`tgd_fitting`]: fitting existence and witness construction for the TGD
//!   classes.
//! - [`oracle`]: brute-force reference implementations and named instance
//!   families for testing.

pub mod concepts;
pub mod dl_fitting;
pub mod error;
pub mod oracle;
pub mod relational;
pub mod tgd;
pub mod tgd_basis;
pub mod tgd_fitting;

pub use error::{Error, Result};

/// Resource caps shared by the search-heavy operations.
///
/// Exceeding a cap is always reported as a distinct resource-limit outcome
/// ([`Error::ResourceLimit`] or a resource-limited verdict), never as a wrong
/// answer.
#[derive(Debug, Clone)]
pub struct Limits {
    /// Maximum number of distinct values a direct product may create.
    pub max_product_values: usize,
    /// Maximum number of facts a direct product may create.
    pub max_product_facts: usize,
    /// Maximum number of nodes explored by a single homomorphism search.
    pub max_search_nodes: u64,
    /// Maximum active-domain size for subset enumeration (EL bases and
    /// unrestricted-TGD candidate sets).
    pub max_basis_domain: usize,
    /// Maximum active-domain size of the product of negatives for
    /// unrestricted-TGD subset enumeration.
    pub max_subset_domain: usize,
    /// Maximum relation arity for IND enumeration.
    pub max_ind_arity: usize,
    /// Chase: maximum number of rounds.
    pub max_chase_rounds: usize,
    /// Chase: maximum number of facts.
    pub max_chase_facts: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_product_values: 1_000_000,
            max_product_facts: 1_000_000,
            max_search_nodes: 10_000_000,
            max_basis_domain: 20,
            max_subset_domain: 16,
            max_ind_arity: 8,
            max_chase_rounds: 8,
            max_chase_facts: 100_000,
        }
    }
}
