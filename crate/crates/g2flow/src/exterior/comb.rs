//! Increasing multi-indices as bitmasks.
//!
//! A strictly increasing k-tuple of frame indices in 1..=n is stored as a
//! bitmask (bit i-1 set for index i). Masks of equal popcount are ordered by
//! numeric value, which fixes the coefficient layout of every form.

use once_cell::sync::Lazy;

pub const MAX_N: usize = 7;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut c = 1usize;
    for j in 0..k {
        c = c * (n - j) / (j + 1);
    }
    c
}

struct Tables {
    /// masks[n][k] lists all popcount-k masks over n bits in ascending order.
    masks: Vec<Vec<Vec<u8>>>,
    /// rank[n][mask] is the position of the mask within its popcount class.
    rank: Vec<[u8; 128]>,
}

static TABLES: Lazy<Tables> = Lazy::new(|| {
    let mut masks = Vec::with_capacity(MAX_N + 1);
    let mut rank = Vec::with_capacity(MAX_N + 1);
    for n in 0..=MAX_N {
        let mut by_k: Vec<Vec<u8>> = vec![Vec::new(); n + 1];
        let mut r = [0u8; 128];
        for m in 0u8..(1u16 << n) as u8 {
            let k = m.count_ones() as usize;
            r[m as usize] = by_k[k].len() as u8;
            by_k[k].push(m);
        }
        masks.push(by_k);
        rank.push(r);
    }
    Tables { masks, rank }
});

/// All popcount-k masks over n bits, in layout order.
pub fn masks(n: usize, k: usize) -> &'static [u8] {
    &TABLES.masks[n][k]
}

/// Position of `mask` within its popcount class.
pub fn rank(n: usize, mask: u8) -> usize {
    debug_assert!((mask as usize) < (1 << n));
    TABLES.rank[n][mask as usize] as usize
}

/// 1-based increasing tuple of a mask.
pub fn tuple(mask: u8) -> Vec<usize> {
    (0..8).filter(|b| mask & (1 << b) != 0).map(|b| b + 1).collect()
}

/// Mask of a strictly increasing 1-based tuple; None if invalid.
pub fn mask_of(indices: &[usize], n: usize) -> Option<u8> {
    let mut m = 0u8;
    let mut prev = 0usize;
    for &i in indices {
        if i == 0 || i > n || i <= prev {
            return None;
        }
        m |= 1 << (i - 1);
        prev = i;
    }
    Some(m)
}

/// Sign of sorting the concatenation (a, b) into increasing order.
/// Caller guarantees a and b are disjoint.
pub fn merge_sign(a: u8, b: u8) -> f64 {
    debug_assert_eq!(a & b, 0);
    let mut inversions = 0u32;
    let mut bb = b;
    while bb != 0 {
        let bit = bb.trailing_zeros();
        // bits of a strictly above this bit of b each contribute an inversion
        inversions += (a >> (bit + 1)).count_ones();
        bb &= bb - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sign picked up when e_i hits e^I from the left: (-1)^(position of i in I).
pub fn contract_sign(i: usize, mask: u8) -> f64 {
    debug_assert!(mask & (1 << (i - 1)) != 0);
    let below = (mask & ((1u8 << (i - 1)) - 1)).count_ones();
    if below % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn complement(n: usize, mask: u8) -> u8 {
    (((1u16 << n) - 1) as u8) ^ mask
}
