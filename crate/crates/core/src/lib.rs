//! Decision procedure for the bimodal provability logic CS.
//!
//! Formulas are decided by searching for cyclic proofs in a labelled
//! sequent calculus. A search either closes every branch, yielding a
//! [`ProofGraph`] that passes the independent checker, or reaches a fully
//! saturated leaf from which a finite [`CarlsonModel`] refuting the input is
//! read off.
//!
//! ```
//! use csprove_core::{decide_formula, parse, Config, Verdict};
//!
//! let lob = parse("[b]([b]p -> p) -> [b]p").unwrap();
//! assert!(decide_formula(&lob, &Config::default()).unwrap().is_proved());
//!
//! let mixed = parse("[d]p -> [b]p").unwrap();
//! match decide_formula(&mixed, &Config::default()).unwrap() {
//!     Verdict::Refuted { model, .. } => assert_eq!(model.world_count(), 2),
//!     Verdict::Proved(_) => unreachable!(),
//! }
//! ```

pub mod calculus;
pub mod corpus;
pub mod formula;
pub mod model;
pub mod proofgraph;
pub mod search;
pub mod sequent;

pub use calculus::{apply, applicable, close, Principal, RuleError, RuleInstance, RuleName};
pub use corpus::{axiom_instances, standard_corpus, CorpusEntry, Expected};
pub use formula::{parse, Formula, ParseError};
pub use model::{
    extract_model, forces, is_interpretation, refute_semantic, sequent_holds, validate_model,
    CarlsonModel, Interpretation, ModelError, WorldId,
};
pub use proofgraph::{check_local, check_progress, check_proof, BackEdge, CheckError, NodeId, ProofGraph, ProofNode};
pub use search::{decide, decide_formula, Config, LabelSignature, SearchError, Verdict};
pub use sequent::{Label, LabelAllocator, LabelledFormula, RelAtom, RelKind, Sequent, Side};
