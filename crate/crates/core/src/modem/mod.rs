//! Pulse-shaped PSK modem: constellation, sub-channel multiplexing, channel
//! noise, the transmit/receive chain and analytic link metrics.

pub mod constellation;
pub mod link;
pub mod metrics;
pub mod noise;
pub mod spec;
pub mod subchannel;

pub use constellation::{make_constellation, Constellation};
pub use link::{
    demodulate, modulate, simulate_link, simulate_link_traced, Demodulated, Link, LinkConfig,
    LinkReport, LinkTrace, MatchedFilter, SymbolStats,
};
pub use metrics::{bit_rate, capacity, cpp, resolvability, wng, Resolvability};
pub use noise::{add_noise, interval_rng, NoiseLaw};
pub use spec::{DownconvSpec, LinkSpec, MatchedSpec, ShapingSpec};
pub use subchannel::{
    gram_errors, gram_matrix, subcarrier_omegas, subchannel_bank, subchannel_bank_with_guard,
    DEFAULT_ORTHO_GUARD,
};
