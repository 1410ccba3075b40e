//! Independent time-tagging units, tag files, clock-offset recovery and
//! offline coincidence reconstruction.

mod clock;
mod coincidence;
mod io;
mod offset;
mod stream;

pub use clock::ClockRealization;
pub use coincidence::{find_coincidences, match_tags, Coincidence, CoincidenceSet};
pub use io::{decode_stream, encode_stream, encode_to_string, read_stream, write_stream, RECORD_HEADER};
pub use offset::{
    accidental_rate, difference_histogram, estimate_clock_offset, estimate_clock_offset_near, OffsetEstimate,
    PEAK_SIGMAS,
};
pub use stream::{seconds_to_ps, Channel, ClockModel, Discipline, Side, TimeTag, TimeTagStream};
