//! The three coding schemes end to end, plus the LLR algebra, interleavers
//! and decoder schedule they share.

mod boxplus;
mod concatenated;
mod cpmlc;
mod cpmlcid;
mod interleaver;
mod schedule;
mod scheme;

pub use boxplus::{boxplus, boxplus_reduce};
pub use concatenated::{concatenated_decode, concatenated_encode};
pub use cpmlc::{cpmlc_decode, cpmlc_encode};
pub use cpmlcid::{cpmlcid_decode, cpmlcid_encode, lane_extrinsic};
pub use interleaver::{build_interleaver, build_lane_interleaver, Interleaver, InterleaverSpec};
pub use schedule::{bsc_erasure_probabilities, message_schedule, ScheduleStep};
pub use scheme::{
    default_damping, default_interleavers, Decoded, Frame, Scheme, SchemeConfig, SchemeKind, TraceEntry,
    DAMPING_I3, DAMPING_I6,
};
