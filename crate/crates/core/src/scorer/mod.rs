//! Phone error rate scoring: unit-cost alignment, pooled PER with an
//! insertion/deletion/substitution breakdown, modifier-stripped scoring and
//! per-phone error rates grouped by how many languages share the phone.

mod align;
mod report;
mod tsv;

pub use align::{align, AlignOp, AlignmentReport, ErrorCounts};
pub use report::{
    lenient_report, per_report, phone_share_report, share_group_means, PerReport, PhoneErrorStats,
    ShareRow,
};
pub use tsv::{round_breakdown, write_share_tsv, write_summary_tsv, SUMMARY_HEADER, SHARE_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum ScoreError {
    #[error("reference transcripts contain no phones")]
    EmptyReference,
    #[error("phone `{0}` is not in any inventory")]
    UnknownPhone(String),
}
