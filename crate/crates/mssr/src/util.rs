//! Small numeric helpers shared across modules.

/// Compensated summation (Kahan with Neumaier's correction, which also
/// handles terms larger than the running sum), keeping aggregates stable
/// however the terms were produced.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        c += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + c
}

/// SplitMix64 finalizer; used to derive independent per-trial seeds from
/// (master_seed, cell id, trial index).
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a sequence of words into one seed.
pub fn mix_seed(words: &[u64]) -> u64 {
    let mut acc = 0x243f_6a88_85a3_08d3u64;
    for &w in words {
        acc = splitmix64(acc ^ w);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_is_exact_on_cancelling_terms() {
        let terms = vec![1e16, 1.0, -1e16];
        assert_eq!(kahan_sum(terms), 1.0);
    }

    #[test]
    fn seed_mixing_is_order_sensitive() {
        assert_ne!(mix_seed(&[1, 2]), mix_seed(&[2, 1]));
        assert_eq!(mix_seed(&[42, 7, 3]), mix_seed(&[42, 7, 3]));
    }
}
