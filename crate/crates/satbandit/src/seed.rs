//! Deterministic per-stream seed derivation.
//!
//! Every random stream in an experiment is identified by the master seed, a
//! stream label (e.g. `"noise/swap-window:T=3000,L=3,delta=0.5,S=0.5/uniform"`)
//! and a replication index. The derived seed is obtained by hashing the
//! tuple with 64-bit FNV-1a — absorbing the master seed (little-endian), the
//! label bytes, a `0xff` separator, and the replication index
//! (little-endian) — and passing the hash through the splitmix64 finalizer.
//! The construction is fixed: `derive_seed(0, "noise", 0)` is pinned to
//! `0x1866ea9c93d8a216` by a test and must never change, or recorded
//! experiments stop being reproducible.

/// Derives the seed for one `(master_seed, stream_label, replication)` tuple.
pub fn derive_seed(master_seed: u64, stream_label: &str, replication: u64) -> u64 {
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

    let mut h = FNV_OFFSET;
    let mut absorb = |byte: u8| {
        h ^= byte as u64;
        h = h.wrapping_mul(FNV_PRIME);
    };
    for b in master_seed.to_le_bytes() {
        absorb(b);
    }
    for &b in stream_label.as_bytes() {
        absorb(b);
    }
    absorb(0xff); // separator: labels are UTF-8 and never contain 0xff
    for b in replication.to_le_bytes() {
        absorb(b);
    }
    splitmix64_finalize(h)
}

/// The splitmix64 output mixing function.
fn splitmix64_finalize(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn golden_vector_is_stable() {
        assert_eq!(derive_seed(0, "noise", 0), 0x1866_ea9c_93d8_a216);
    }

    #[test]
    fn deterministic_and_label_separated() {
        assert_eq!(derive_seed(7, "noise", 3), derive_seed(7, "noise", 3));
        assert_ne!(derive_seed(7, "noise", 0), derive_seed(7, "policy", 0));
        assert_ne!(derive_seed(7, "noise", 0), derive_seed(7, "noise", 1));
        assert_ne!(derive_seed(7, "noise", 0), derive_seed(8, "noise", 0));
    }

    #[test]
    fn no_collisions_on_a_large_scan() {
        let mut seen = HashSet::new();
        for label in ["noise", "policy", "nu", "coin"] {
            for rep in 0..25_000u64 {
                assert!(seen.insert(derive_seed(42, label, rep)), "{label}/{rep}");
            }
        }
        assert_eq!(seen.len(), 100_000);
    }
}
