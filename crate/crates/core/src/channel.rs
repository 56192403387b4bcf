//! BPSK over AWGN and BSC, LLR demapping and per-frame random streams.
//!
//! SNR is Es/N0 for unit-energy BPSK with noise variance sigma^2 per real
//! dimension, so sigma = sqrt(1 / (2 * SNR_lin)) and the uncoded bit error
//! rate is Q(sqrt(2 * SNR_lin)).

use std::ops::{Deref, DerefMut};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::bits::BitVector;
use crate::error::{Error, Result};

/// Magnitude clamp applied to every LLR entering or leaving the decoders.
pub const LLR_MAX: f64 = 40.0;

/// Name of the per-frame generator, recorded in run metadata.
pub const RNG_ALGORITHM: &str = "chacha8 (rand_chacha 0.3), key=seed_from_u64(master_seed), stream=frame_index";

/// Real-valued log-likelihood ratios; positive favors bit 0.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    /// Clamp each value into [-LLR_MAX, LLR_MAX].
    pub fn clamped(values: Vec<f64>) -> Self {
        let mut v = Self(values);
        v.clamp_in_place();
        v
    }

    pub fn clamp_in_place(&mut self) {
        for x in self.0.iter_mut() {
            *x = clamp_llr(*x);
        }
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// 0 where the LLR is >= 0, 1 where it is negative.
    pub fn hard_decision(&self) -> BitVector {
        hard_decision(&self.0)
    }
}

impl From<Vec<f64>> for LlrVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for LlrVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for LlrVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

#[inline]
pub fn clamp_llr(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-LLR_MAX, LLR_MAX)
    }
}

/// Bit 1 iff the value is strictly negative; sign(0) is taken as +1.
pub fn hard_decision(values: &[f64]) -> BitVector {
    BitVector::from_bools(values.iter().map(|&x| x < 0.0))
}

/// x = 1 - 2b
pub fn modulate(bits: &BitVector) -> Vec<f64> {
    bits.iter().map(|b| if b { -1.0 } else { 1.0 }).collect()
}

/// y = x + sigma * n with n standard normal, drawn in index order.
pub fn transmit_awgn<R: Rng + ?Sized>(x: &[f64], sigma: f64, rng: &mut R) -> Vec<f64> {
    x.iter()
        .map(|&xi| {
            let n: f64 = rng.sample(StandardNormal);
            xi + sigma * n
        })
        .collect()
}

/// l = 2y / sigma^2, clamped.
pub fn llr_from_awgn(y: &[f64], sigma: f64) -> LlrVector {
    let scale = 2.0 / (sigma * sigma);
    LlrVector(y.iter().map(|&yi| clamp_llr(scale * yi)).collect())
}

pub fn snr_to_sigma(snr_db: f64) -> f64 {
    (1.0 / (2.0 * db_to_linear(snr_db))).sqrt()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Flip each bit independently with probability p.
pub fn transmit_bsc<R: Rng + ?Sized>(bits: &BitVector, p: f64, rng: &mut R) -> BitVector {
    let mut out = bits.clone();
    for i in 0..bits.len() {
        if rng.gen::<f64>() < p {
            out.flip(i);
        }
    }
    out
}

/// Gaussian tail probability Q(x).
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Inverse of `q_function` for p in (0, 1).
pub fn q_inverse(p: f64) -> f64 {
    std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Uncoded BPSK bit error rate, Q(sqrt(2 * SNR_lin)).
pub fn uncoded_bpsk_ber(snr_db: f64) -> f64 {
    q_function((2.0 * db_to_linear(snr_db)).sqrt())
}

/// SNR (dB) at which uncoded BPSK reaches the given BER.
pub fn uncoded_required_snr_db(ber: f64) -> f64 {
    let q = q_inverse(ber);
    linear_to_db(q * q / 2.0)
}

/// Independent stream for one frame. The key depends only on
/// `master_seed` and the stream id only on `frame_index`, so frames can be
/// generated in any order on any worker.
pub fn frame_rng(master_seed: u64, frame_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(frame_index);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChannelKind {
    Awgn { snr_db: f64 },
    Bsc { p: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    #[serde(flatten)]
    pub kind: ChannelKind,
    pub master_seed: u64,
}

impl ChannelConfig {
    pub fn awgn(snr_db: f64, master_seed: u64) -> Self {
        Self {
            kind: ChannelKind::Awgn { snr_db },
            master_seed,
        }
    }

    pub fn bsc(p: f64, master_seed: u64) -> Self {
        Self {
            kind: ChannelKind::Bsc { p },
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            ChannelKind::Awgn { snr_db } if !snr_db.is_finite() => {
                Err(Error::Channel(format!("snr_db must be finite, got {snr_db}")))
            }
            ChannelKind::Bsc { p } if !(p > 0.0 && p < 0.5) => {
                Err(Error::Channel(format!("bsc p must lie in (0, 0.5), got {p}")))
            }
            _ => Ok(()),
        }
    }

    /// Transmit the BPSK image of `bits` and return channel LLRs. For the
    /// BSC the LLR magnitude is log((1 - p) / p).
    pub fn transmit<R: Rng + ?Sized>(&self, bits: &BitVector, rng: &mut R) -> LlrVector {
        match self.kind {
            ChannelKind::Awgn { snr_db } => {
                let sigma = snr_to_sigma(snr_db);
                llr_from_awgn(&transmit_awgn(&modulate(bits), sigma, rng), sigma)
            }
            ChannelKind::Bsc { p } => {
                let mag = clamp_llr(((1.0 - p) / p).ln());
                let rx = transmit_bsc(bits, p, rng);
                LlrVector(rx.iter().map(|b| if b { -mag } else { mag }).collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn modulation_map() {
        assert_eq!(modulate(&BitVector::from_bits(&[0, 1])), vec![1.0, -1.0]);
        assert!(modulate(&BitVector::zeros(9)).iter().all(|&x| x == 1.0));
    }

    #[test]
    fn llr_arithmetic() {
        let s = 0.5f64.sqrt();
        assert!((llr_from_awgn(&[1.0], s)[0] - 4.0).abs() < 1e-12);
        assert_eq!(llr_from_awgn(&[0.0], 1.0)[0], 0.0);
        assert_eq!(llr_from_awgn(&[-2.0], 1.0)[0], -4.0);
        assert_eq!(llr_from_awgn(&[5.0], 0.1)[0], LLR_MAX);
    }

    #[test]
    fn sigma_convention() {
        assert!((snr_to_sigma(0.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((snr_to_sigma(10.0 * 2f64.log10()) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_limit_round_trip() {
        let mut rng = frame_rng(1, 0);
        let b = BitVector::random(257, &mut rng);
        let y = transmit_awgn(&modulate(&b), 1e-12, &mut rng);
        let l = llr_from_awgn(&y, 1e-6);
        assert_eq!(l.hard_decision(), b);
        assert!(l.iter().zip(b.iter()).all(|(&x, bit)| (x > 0.0) != bit));
    }

    #[test]
    fn hard_decision_at_zero_is_zero() {
        assert_eq!(hard_decision(&[0.0, -0.0, -1e-300]).to_u8_vec(), vec![0, 0, 1]);
    }

    #[test]
    fn awgn_is_deterministic_per_stream() {
        let x = vec![1.0; 64];
        let a = transmit_awgn(&x, 0.8, &mut frame_rng(42, 7));
        let b = transmit_awgn(&x, 0.8, &mut frame_rng(42, 7));
        let c = transmit_awgn(&x, 0.8, &mut frame_rng(42, 8));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn awgn_sample_variance() {
        let sigma = 0.6;
        let x = vec![0.0; 1_000_000];
        let y = transmit_awgn(&x, sigma, &mut frame_rng(3, 0));
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (y.len() - 1) as f64;
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.01, "var ratio {}", var / sigma / sigma);
    }

    #[test]
    fn bsc_examples() {
        let mut rng = frame_rng(5, 0);
        let b = BitVector::random(1000, &mut rng);
        assert_eq!(transmit_bsc(&b, 0.0, &mut rng), b);
        let zeros = BitVector::zeros(1_000_000);
        let flips = transmit_bsc(&zeros, 0.1, &mut frame_rng(5, 1)).weight() as f64 / 1e6;
        assert!((flips - 0.1).abs() < 0.001, "{flips}");
        let m1 = transmit_bsc(&zeros, 0.2, &mut frame_rng(9, 9));
        let m2 = transmit_bsc(&zeros, 0.2, &mut frame_rng(9, 9));
        assert_eq!(m1, m2);
    }

    #[test]
    fn frame_streams_are_distinct_and_order_independent() {
        let first: Vec<u64> = (0..16).map(|f| frame_rng(77, f).gen()).collect();
        let mut reversed: Vec<u64> = (0..16).rev().map(|f| frame_rng(77, f).gen()).collect();
        reversed.reverse();
        assert_eq!(first, reversed);
        let mut dedup = first.clone();
        dedup.sort();
        dedup.dedup();
        assert_eq!(dedup.len(), first.len());
    }

    #[test]
    fn q_function_inverse() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        for p in [1e-2, 2.2e-4, 1e-9, 1e-15] {
            let x = q_inverse(p);
            assert!((q_function(x) / p - 1.0).abs() < 1e-9, "p={p}");
        }
        // Q(7.941345) = 1e-15 (tabulated)
        assert!((q_inverse(1e-15) - 7.941_345).abs() < 1e-5);
    }

    #[test]
    fn channel_config_validation() {
        assert!(ChannelConfig::awgn(f64::NAN, 0).validate().is_err());
        assert!(ChannelConfig::bsc(0.5, 0).validate().is_err());
        assert!(ChannelConfig::bsc(0.1, 0).validate().is_ok());
    }
}
