//! Explicit constructions: joining words under the specification property,
//! words with prescribed block frequencies, checkpointed multi-target words,
//! and lazily generated streams whose frequencies stay near each target over
//! long windows.

mod checkpoint;
mod concat;
mod pattern;
mod property_p;
mod realize;
mod stream;

pub use checkpoint::{
    build_checkpointed_word, build_checkpointed_stream, max_checkpoint_distance, stage_precision,
    CheckpointCertificate, CheckpointEntry, TargetPlan,
};
pub use concat::{odot_concat, odot_power};
pub use pattern::{Pattern, PatternCursor};
pub use property_p::{
    cesaro_inheritance_check, phi_tower, build_property_p_stream, window_certificates, InheritanceEntry,
    InheritanceReport, PropertyPSchedule, StageTuple, WindowCertificate, WindowRule,
    DEFAULT_TOWER_BITS,
};
pub use realize::{
    append_and_certify, in_realization_class, realization_length, realize_frequency_word,
    repetition_bound, CertifiedWord, Realization, Realizer,
};
pub use stream::{Certificate, DigitStream};

/// Symbols generated per refill of a lazy stream.
pub(crate) const CHUNK: usize = 1 << 14;

/// Limits on the work a construction may do.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Maximum number of symbols a stream yields or a finite word may have.
    pub max_symbols: u64,
    /// Maximum number of construction stages.
    pub max_stages: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_symbols: 10_000_000,
            max_stages: 64,
        }
    }
}
