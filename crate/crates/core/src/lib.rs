//! Positional index derivation for multimodal (text + image) token
//! sequences.
//!
//! The crate separates *where* a token sits from *how* that position is
//! embedded. [`index`] assigns every token a three-axis index under one of
//! several strategies; [`rotary`] turns those indices into rotary
//! embeddings and attention logits so strategies can be compared.
//!
//! The modality-specific strategy keeps text on a dense sequence axis and
//! places image patches on row/column axes anchored at a per-image
//! placeholder. Its scaled variant stretches the visual axes by a factor
//! derived from the histogram entropy of text and visual embeddings
//! ([`gaess`]).
//!
//! ```
//! use omega_pe::{build_sequence, derive_mspe, SequenceSpec};
//!
//! let seq = build_sequence(&SequenceSpec::new().text(2).image(2, 2).text(1)).unwrap();
//! let idx = derive_mspe(&seq);
//! // the trailing text token follows the image placeholder directly
//! assert_eq!(idx.entries.last().unwrap().index.s, 3.0);
//! ```

pub mod cli;
pub mod gaess;
pub mod index;
pub mod io;
pub mod perturb;
pub mod rotary;
pub mod seq;

pub use gaess::{
    compute_gamma, density_ratio, dimension_entropy, embedding_entropy, estimate_gamma,
    EmbeddingMatrix, EntropyReport, GaessConfig, GaessError,
};
pub use index::{
    derive, derive_1d, derive_2d, derive_mipe, derive_mspe, derive_no_pe, derive_omega,
    derive_v2pe, IndexAssignment, IndexEntry, IndexError, IndexStrategy, PositionIndex3, Strategy,
    V2peConfig,
};
pub use perturb::{
    insert_visual_gaps, run_sweep, shuffle_visual_indices, GapSpec, PerturbError, PerturbSpec,
    ShuffleSpec, SweepConfig, SweepGrid, SweepRow,
};
pub use rotary::{
    attention_logit, rotate, score_matrix, HeadVector, RotaryConfig, RotaryError, ScoreMatrix,
};
pub use seq::{
    apply_phi, build_sequence, Modality, MultimodalSequence, PlaceholderMap, SeqError, SequenceSpec,
};
