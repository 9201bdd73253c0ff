//! Reproducible stream derivation for experiments.
//!
//! Every randomized routine takes an explicit seed. Experiments that run
//! many trials derive one sub-seed per trial from a master seed, a lane
//! (which experiment axis the trial belongs to), and the trial index, so
//! results are independent of execution order and thread count.

/// SplitMix64 output function.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Sub-seed for trial `index` of lane `lane` under `master`. Documented
/// scheme: `splitmix64(splitmix64(splitmix64(master) ^ lane) ^ index)`.
pub fn stream_seed(master: u64, lane: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ lane) ^ index)
}
