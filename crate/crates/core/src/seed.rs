//! Deterministic seed derivation for independent runs.

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the seed for one fold of one experiment cell.
///
/// Stable across platforms and releases: FNV-1a over the cell id, then mixed
/// with the global seed and fold index.
pub fn derive_seed(global_seed: u64, cell_id: &str, fold: u64) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in cell_id.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix64(mix64(global_seed ^ h).wrapping_add(fold))
}
