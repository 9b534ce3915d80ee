//! Small numeric helpers shared by the statistics and selection code.

/// Mean of `values`, invariant under any reordering of the input.
///
/// Values are sorted and accumulated as offsets from the minimum, so a
/// constant input returns that constant exactly.
pub fn mean(values: &[f64]) -> f64 {
    let sorted = sorted(values);
    shifted_mean(&sorted)
}

/// Population variance (divides by the element count), order-invariant.
///
/// Equal inputs give exactly `0.0`.
pub fn population_variance(values: &[f64]) -> f64 {
    let sorted = sorted(values);
    shifted_variance(&sorted)
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

pub(crate) fn shifted_mean(sorted: &[f64]) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let base = sorted[0];
    let offset: f64 = sorted.iter().map(|v| v - base).sum();
    base + offset / sorted.len() as f64
}

pub(crate) fn shifted_variance(sorted: &[f64]) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let base = sorted[0];
    let k = sorted.len() as f64;
    let offset_mean = sorted.iter().map(|v| v - base).sum::<f64>() / k;
    sorted
        .iter()
        .map(|v| {
            let d = (v - base) - offset_mean;
            d * d
        })
        .sum::<f64>()
        / k
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul(u128::from(n - i)) {
            Some(v) => v / u128::from(i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from a base seed and a path of tags.
pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(base), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}
