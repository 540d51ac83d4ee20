//! Counter-based noise addressed by lattice site.
//!
//! The uniform variate at a site is a pure function of `(seed, coords)`, so
//! samples are reproducible, independent of traversal order, and agree on
//! the overlap of nested cubes.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash of `seed` followed by a sequence of words.
#[inline]
pub fn hash_words(seed: u64, words: &[u64]) -> u64 {
    words.iter().fold(mix64(seed), |h, &w| mix64(h ^ mix64(w)))
}

/// Seed of an independent stream derived from a master seed and a path of
/// indices, e.g. `(n, replicate)`.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    hash_words(master ^ 0x5EED_0000_0000_0000, path)
}

/// Uniform `[0, 1)` variate for one site.
#[inline]
pub fn site_uniform(seed: u64, coords: &[i64]) -> f64 {
    let mut h = mix64(seed);
    for &c in coords {
        h = mix64(h ^ mix64(c as u64));
    }
    to_unit(h)
}

/// Top 53 bits as a double in `[0, 1)`.
#[inline]
pub fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
