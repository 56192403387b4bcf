//! Bit interleavers for the coded lanes.
//!
//! An interleaver maps a lane word `z` to `s` with `s[i] = z[perm[i]]`.
//! Every non-identity family here is an involution, so interleaving and
//! deinterleaving are the same permutation.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InterleaverSpec {
    Identity,
    /// Swap the top and bottom log2(size) bits of the index, middle bits
    /// fixed; `size == n` is full bit reversal and `size == 1` the
    /// identity. `rotation` conjugates the swap by a cyclic rotation of the
    /// index bits, giving distinct variants for different lanes.
    DigitSwap { size: usize, rotation: u32 },
    /// Random perfect matching whose pairs always join two different
    /// length-(n/size) blocks.
    RandomInvolution { size: usize, seed: u64 },
    /// For lanes of several codewords: each codeword is spread over `size`
    /// codewords, n/size bits to each, by swapping the low log2(size) bits
    /// of the codeword index with the top log2(size) bits of the position.
    /// `rotation` conjugates by a rotation of the position bits.
    Spread { size: usize, rotation: u32 },
}

impl InterleaverSpec {
    pub const fn digit_swap(size: usize) -> Self {
        Self::DigitSwap { size, rotation: 0 }
    }

    pub fn size(&self) -> usize {
        match *self {
            Self::Identity => 1,
            Self::DigitSwap { size, .. } | Self::RandomInvolution { size, .. } | Self::Spread { size, .. } => size,
        }
    }
}

impl fmt::Display for InterleaverSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Self::Identity => f.write_str("identity"),
            Self::DigitSwap { size, rotation: 0 } => write!(f, "digit-swap({size})"),
            Self::DigitSwap { size, rotation } => write!(f, "digit-swap({size},{rotation})"),
            Self::RandomInvolution { size, seed } => write!(f, "random-involution({size},{seed})"),
            Self::Spread { size, rotation: 0 } => write!(f, "spread({size})"),
            Self::Spread { size, rotation } => write!(f, "spread({size},{rotation})"),
        }
    }
}

impl FromStr for InterleaverSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Interleaver(format!("cannot parse {s:?}"));
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
        if t == "identity" || t == "i" {
            return Ok(Self::Identity);
        }
        let (name, rest) = t.split_once('(').ok_or_else(bad)?;
        let args: Vec<u64> = rest
            .strip_suffix(')')
            .ok_or_else(bad)?
            .split(',')
            .map(|a| a.parse::<u64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (name, args.as_slice()) {
            ("digit-swap", [size]) => Ok(Self::digit_swap(*size as usize)),
            ("digit-swap", [size, rot]) => Ok(Self::DigitSwap {
                size: *size as usize,
                rotation: *rot as u32,
            }),
            ("spread", [size]) => Ok(Self::Spread {
                size: *size as usize,
                rotation: 0,
            }),
            ("spread", [size, rot]) => Ok(Self::Spread {
                size: *size as usize,
                rotation: *rot as u32,
            }),
            ("random-involution", [size, seed]) => Ok(Self::RandomInvolution {
                size: *size as usize,
                seed: *seed,
            }),
            _ => Err(bad()),
        }
    }
}

impl TryFrom<String> for InterleaverSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InterleaverSpec> for String {
    fn from(s: InterleaverSpec) -> String {
        s.to_string()
    }
}

/// The permutation `perm` realized by a spec for lane length `n`.
pub fn build_interleaver(spec: &InterleaverSpec, n: usize) -> Result<Vec<usize>> {
    if !n.is_power_of_two() {
        return Err(Error::Interleaver(format!("lane length {n} is not a power of two")));
    }
    let size = spec.size();
    if !size.is_power_of_two() || !n.is_multiple_of(size) {
        return Err(Error::Interleaver(format!("size {size} does not divide lane length {n}")));
    }
    let bits = n.trailing_zeros();
    match *spec {
        InterleaverSpec::Identity => Ok((0..n).collect()),
        InterleaverSpec::DigitSwap { size, rotation } => {
            let s = size.trailing_zeros();
            let base: Box<dyn Fn(usize) -> usize> = if size == 1 {
                Box::new(|i| i)
            } else if size == n {
                Box::new(move |i| reverse_bits(i, bits))
            } else if 2 * s <= bits {
                Box::new(move |i| swap_digit_fields(i, bits, s))
            } else {
                return Err(Error::Interleaver(format!(
                    "digit-swap({size}) needs 2*log2(S) <= log2(n) = {bits} or S = n"
                )));
            };
            let rot = rotation % bits.max(1);
            Ok((0..n)
                .map(|i| rotate_right(base(rotate_left(i, rot, bits)), rot, bits))
                .collect())
        }
        InterleaverSpec::RandomInvolution { size, seed } => random_involution(n, size, seed),
        InterleaverSpec::Spread { .. } => build_lane_interleaver(spec, n, 1),
    }
}

/// The permutation for a lane of `codewords` words of length `n`. Per-word
/// families act on each word separately; `Spread` mixes words and needs
/// `size` to divide both `n` and `codewords`.
pub fn build_lane_interleaver(spec: &InterleaverSpec, n: usize, codewords: usize) -> Result<Vec<usize>> {
    let InterleaverSpec::Spread { size, rotation } = *spec else {
        let word = build_interleaver(spec, n)?;
        return Ok((0..codewords * n).map(|i| (i / n) * n + word[i % n]).collect());
    };
    if !n.is_power_of_two() || !size.is_power_of_two() || !n.is_multiple_of(size) || !codewords.is_multiple_of(size) {
        return Err(Error::Interleaver(format!(
            "spread({size}) needs a power-of-two size dividing n = {n} and the {codewords} codewords per lane"
        )));
    }
    let bits = n.trailing_zeros();
    let s = size.trailing_zeros();
    let rot = rotation % bits.max(1);
    let low = |x: usize, b: u32| x & ((1usize << b) - 1);
    Ok((0..codewords * n)
        .map(|i| {
            let (c, p) = (i / n, rotate_left(i % n, rot, bits));
            let (h, lo) = (p >> (bits - s), low(p, bits - s));
            let c2 = (c >> s << s) | h;
            let p2 = (low(c, s) << (bits - s)) | lo;
            c2 * n + rotate_right(p2, rot, bits)
        })
        .collect())
}

fn reverse_bits(i: usize, bits: u32) -> usize {
    if bits == 0 {
        return i;
    }
    i.reverse_bits() >> (usize::BITS - bits)
}

fn swap_digit_fields(i: usize, bits: u32, s: u32) -> usize {
    let low_mask = (1usize << s) - 1;
    let low = i & low_mask;
    let high = i >> (bits - s);
    let mid = i & !low_mask & ((1usize << (bits - s)) - 1);
    (low << (bits - s)) | mid | high
}

fn rotate_left(i: usize, r: u32, bits: u32) -> usize {
    if r == 0 {
        return i;
    }
    ((i << r) | (i >> (bits - r))) & ((1usize << bits) - 1)
}

fn rotate_right(i: usize, r: u32, bits: u32) -> usize {
    if r == 0 {
        return i;
    }
    rotate_left(i, bits - r, bits)
}

fn random_involution(n: usize, size: usize, seed: u64) -> Result<Vec<usize>> {
    if size == 1 {
        return Ok((0..n).collect());
    }
    let block_len = n / size;
    let block = |i: usize| i / block_len;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..1000 {
        let mut pool: Vec<usize> = (0..n).collect();
        pool.shuffle(&mut rng);
        let mut perm = vec![usize::MAX; n];
        let mut ok = true;
        while let Some(i) = pool.pop() {
            let partners: Vec<usize> = (0..pool.len()).filter(|&t| block(pool[t]) != block(i)).collect();
            if partners.is_empty() {
                ok = false;
                break;
            }
            let j = pool.swap_remove(partners[rng.gen_range(0..partners.len())]);
            perm[i] = j;
            perm[j] = i;
        }
        if ok {
            return Ok(perm);
        }
    }
    Err(Error::Interleaver(format!(
        "no cross-block matching found for n={n}, size={size}"
    )))
}

/// A realized lane permutation with its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interleaver {
    perm: Vec<usize>,
    inv: Vec<usize>,
}

impl Interleaver {
    /// Lane of `codewords` words of length `n`.
    pub fn for_lane(spec: &InterleaverSpec, n: usize, codewords: usize) -> Result<Self> {
        Ok(Self::from_permutation(build_lane_interleaver(spec, n, codewords)?))
    }

    pub fn new(spec: &InterleaverSpec, n: usize) -> Result<Self> {
        Ok(Self::from_permutation(build_interleaver(spec, n)?))
    }

    pub fn from_permutation(perm: Vec<usize>) -> Self {
        let mut inv = vec![0; perm.len()];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        Self { perm, inv }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &p)| i == p)
    }

    pub fn apply<T: Copy>(&self, x: &[T]) -> Vec<T> {
        self.perm.iter().map(|&p| x[p]).collect()
    }

    pub fn invert<T: Copy>(&self, x: &[T]) -> Vec<T> {
        self.inv.iter().map(|&p| x[p]).collect()
    }

    pub fn apply_bits(&self, x: &BitVector) -> BitVector {
        BitVector::from_bools(self.perm.iter().map(|&p| x.get(p)))
    }

    pub fn invert_bits(&self, x: &BitVector) -> BitVector {
        BitVector::from_bools(self.inv.iter().map(|&p| x.get(p)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_involution(p: &[usize]) -> bool {
        p.iter().enumerate().all(|(i, &j)| p[j] == i)
    }

    #[test]
    fn size_one_is_identity() {
        assert_eq!(build_interleaver(&InterleaverSpec::digit_swap(1), 128).unwrap(), (0..128).collect::<Vec<_>>());
        assert!(Interleaver::new(&InterleaverSpec::Identity, 128).unwrap().is_identity());
    }

    #[test]
    fn full_size_is_bit_reversal() {
        let p = build_interleaver(&InterleaverSpec::digit_swap(128), 128).unwrap();
        assert_eq!(p[1], 64);
        assert_eq!(p[0b0000011], 0b1100000);
        assert!(is_involution(&p));
    }

    #[test]
    #[allow(clippy::unusual_byte_groupings)]
    fn digit_swap_eight() {
        let p = build_interleaver(&InterleaverSpec::digit_swap(8), 128).unwrap();
        assert!(is_involution(&p));
        // t2t1t0 m b2b1b0 -> b2b1b0 m t2t1t0
        assert_eq!(p[0b101_0_011], 0b011_0_101);
        assert_eq!(p[0b000_1_000], 0b000_1_000);
    }

    #[test]
    fn invalid_sizes() {
        assert!(build_interleaver(&InterleaverSpec::digit_swap(16), 128).is_err());
        assert!(build_interleaver(&InterleaverSpec::digit_swap(3), 128).is_err());
        assert!(build_interleaver(&InterleaverSpec::digit_swap(256), 128).is_err());
        assert!(build_interleaver(&InterleaverSpec::Identity, 100).is_err());
    }

    #[test]
    fn all_families_are_involutions() {
        for n in [8usize, 16, 128, 256] {
            let bits = n.trailing_zeros();
            let mut size = 1;
            while size <= n {
                for rotation in 0..bits {
                    if let Ok(p) = build_interleaver(&InterleaverSpec::DigitSwap { size, rotation }, n) {
                        assert!(is_involution(&p), "n={n} size={size} rot={rotation}");
                    }
                }
                for seed in 0..3 {
                    let p = build_interleaver(&InterleaverSpec::RandomInvolution { size, seed }, n).unwrap();
                    assert!(is_involution(&p));
                    if size > 1 {
                        let bl = n / size;
                        assert!(p.iter().enumerate().all(|(i, &j)| i / bl != j / bl));
                    }
                }
                size *= 2;
            }
        }
    }

    #[test]
    fn rotated_variants_differ() {
        let a = build_interleaver(&InterleaverSpec::DigitSwap { size: 128, rotation: 0 }, 128).unwrap();
        let b = build_interleaver(&InterleaverSpec::DigitSwap { size: 128, rotation: 1 }, 128).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn block_errors_are_dispersed() {
        // A weight-w error confined to one length-(n/S) block lands at most
        // ceil(w (n/S) / n) + 1 errors in any block after digit-swap(S).
        for (n, size) in [(128usize, 8usize), (256, 16)] {
            let p = build_interleaver(&InterleaverSpec::digit_swap(size), n).unwrap();
            let inter = Interleaver::from_permutation(p);
            let bl = n / size;
            for blk in 0..size {
                // all subsets up to weight 8 are too many; use every subset of
                // the block's first 8 positions plus every sliding window
                let base: Vec<usize> = (blk * bl..(blk + 1) * bl).collect();
                let mut patterns: Vec<Vec<usize>> = Vec::new();
                for mask in 1u32..256 {
                    patterns.push((0..8).filter(|&t| (mask >> t) & 1 == 1).map(|t| base[t]).collect());
                }
                for start in 0..bl.saturating_sub(8) {
                    patterns.push(base[start..start + 8].to_vec());
                }
                for pat in patterns {
                    let w = pat.len();
                    let mut e = BitVector::zeros(n);
                    for &i in &pat {
                        e.set(i, true);
                    }
                    let img = inter.apply_bits(&e);
                    let bound = (w * bl).div_ceil(n) + 1;
                    for b in 0..size {
                        let cnt = (b * bl..(b + 1) * bl).filter(|&i| img.get(i)).count();
                        assert!(cnt <= bound, "n={n} S={size} w={w} block {b}: {cnt} > {bound}");
                    }
                }
            }
        }
    }

    #[test]
    fn spread_is_involution_and_disperses() {
        let n = 128;
        for (size, words, rot) in [(8usize, 8usize, 0u32), (128, 128, 0), (4, 16, 3), (2, 2, 1)] {
            let p = build_lane_interleaver(&InterleaverSpec::Spread { size, rotation: rot }, n, words).unwrap();
            assert!(is_involution(&p), "S={size} B={words} r={rot}");
            for c in 0..words {
                let mut hits = vec![0usize; words];
                for i in c * n..(c + 1) * n {
                    hits[p[i] / n] += 1;
                }
                let touched: Vec<usize> = hits.into_iter().filter(|&h| h > 0).collect();
                assert_eq!(touched.len(), size);
                assert!(touched.iter().all(|&h| h == n / size));
            }
        }
        let bad = InterleaverSpec::Spread { size: 8, rotation: 0 };
        assert!(build_lane_interleaver(&bad, n, 4).is_err());
        assert_eq!("spread(8)".parse::<InterleaverSpec>().unwrap(), bad);
        assert_eq!(InterleaverSpec::Spread { size: 4, rotation: 2 }.to_string(), "spread(4,2)");
    }

    #[test]
    fn per_word_specs_repeat_across_lane() {
        let spec = InterleaverSpec::digit_swap(8);
        let word = build_interleaver(&spec, 128).unwrap();
        let lane = build_lane_interleaver(&spec, 128, 3).unwrap();
        assert_eq!(&lane[256..], &word.iter().map(|&x| x + 256).collect::<Vec<_>>()[..]);
    }

    #[test]
    fn apply_invert_round_trip() {
        let inter = Interleaver::new(&InterleaverSpec::RandomInvolution { size: 8, seed: 5 }, 64).unwrap();
        let x: Vec<f64> = (0..64).map(|i| i as f64).collect();
        assert_eq!(inter.invert(&inter.apply(&x)), x);
        assert_eq!(inter.apply(&inter.apply(&x)), x);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["identity", "digit-swap(8)", "digit-swap(128,2)", "random-involution(8,99)"] {
            let spec: InterleaverSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("swap(8)".parse::<InterleaverSpec>().is_err());
    }
}
