//! Extended BCH component codes and the outer-code model.

use std::sync::Arc;

use crate::bits::BitVector;
use crate::error::{Error, Result};
use crate::gf2m::{gf2_eliminate, BinaryMatrix, GaloisField};

/// An (n, k, d_min) binary linear block code in systematic form.
///
/// Information bits occupy positions `0..k` of a codeword; positions
/// `k..n` are parity. `d_min` is a proven lower bound (the BCH design
/// distance plus one for the overall parity bit).
#[derive(Clone, Debug)]
pub struct ComponentCode {
    name: String,
    n: usize,
    k: usize,
    d_min: usize,
    g: BinaryMatrix,
    h: BinaryMatrix,
}

impl ComponentCode {
    /// Build a code from any full-rank generator matrix. The generator is
    /// brought to systematic form on its first independent columns; those
    /// columns must be exactly `0..k`.
    pub fn from_generator(name: &str, generator: &BinaryMatrix, d_min: usize) -> Result<Self> {
        let (n, k) = (generator.cols(), generator.rows());
        let (g, pivots) = gf2_eliminate(generator, &(0..n).collect::<Vec<_>>());
        if pivots != (0..k).collect::<Vec<_>>() {
            return Err(Error::Scheme(format!(
                "generator of {name} is not systematic on its leading {k} columns"
            )));
        }
        let mut h = BinaryMatrix::zeros(n - k, n);
        for r in 0..n - k {
            let col = k + r;
            h.set(r, col, true);
            for i in 0..k {
                if g.get(i, col) {
                    h.set(r, i, true);
                }
            }
        }
        Ok(Self {
            name: name.to_string(),
            n,
            k,
            d_min,
            g,
            h,
        })
    }

    /// Narrow-sense BCH(2^m - 1, k) with the given design distance,
    /// extended by an overall even-parity bit.
    pub fn extended_bch(field: &GaloisField, design_distance: usize) -> Result<Self> {
        let gen = field.bch_generator(design_distance)?;
        let n0 = field.order();
        let deg = gen.degree().expect("generator is nonzero");
        let k = n0 - deg;
        let n = n0 + 1;
        let mut rows = Vec::with_capacity(k);
        for shift in 0..k {
            let mut row = BitVector::zeros(n);
            for (i, &c) in gen.coeffs().iter().enumerate() {
                if c == 1 {
                    row.set(shift + i, true);
                }
            }
            let parity = row.weight() % 2 == 1;
            row.set(n0, parity);
            rows.push(row);
        }
        let name = format!("ebch-{n}-{k}");
        Self::from_generator(&name, &BinaryMatrix::from_rows(&rows), design_distance + 1)
    }

    /// Extended Hamming code of length 2^m (the eBCH code with design
    /// distance 3).
    pub fn extended_hamming(m: u32) -> Result<Self> {
        let field = GaloisField::with_default_poly(m)?;
        let mut c = Self::extended_bch(&field, 3)?;
        c.name = format!("ehamming-{}-{}", c.n, c.k);
        Ok(c)
    }

    /// Resolve a configuration name such as `ebch-128-106` or
    /// `ehamming-16-11`.
    pub fn by_name(name: &str) -> Result<Self> {
        let unknown = || Error::UnknownCode(name.to_string());
        let parts: Vec<&str> = name.trim().split('-').collect();
        let [family, n, k] = parts.as_slice() else {
            return Err(unknown());
        };
        let n: usize = n.parse().map_err(|_| unknown())?;
        let k: usize = k.parse().map_err(|_| unknown())?;
        if !n.is_power_of_two() || n < 4 {
            return Err(unknown());
        }
        let m = n.trailing_zeros();
        let code = match *family {
            "ebch" => build_ebch_in(&GaloisField::with_default_poly(m)?, k)?,
            "ehamming" => Self::extended_hamming(m)?,
            _ => return Err(unknown()),
        };
        if code.k != k {
            return Err(unknown());
        }
        Ok(code)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn d_min(&self) -> usize {
        self.d_min
    }
    /// Systematic generator, k x n, identity on columns `0..k`.
    pub fn generator(&self) -> &BinaryMatrix {
        &self.g
    }
    /// Parity-check matrix, (n - k) x n.
    pub fn parity_check(&self) -> &BinaryMatrix {
        &self.h
    }

    pub fn encode(&self, info: &BitVector) -> Result<BitVector> {
        if info.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                got: info.len(),
            });
        }
        Ok(self.g.left_mul_vec(info))
    }

    pub fn syndrome(&self, word: &BitVector) -> BitVector {
        self.h.mul_vec(word)
    }

    pub fn is_codeword(&self, word: &BitVector) -> bool {
        word.len() == self.n && self.syndrome(word).is_zero()
    }

    /// Information bits of a codeword (its systematic part).
    pub fn info_of(&self, codeword: &BitVector) -> BitVector {
        codeword.slice(0, self.k)
    }
}

fn build_ebch_in(field: &GaloisField, k: usize) -> Result<ComponentCode> {
    let n0 = field.order();
    let mut best = None;
    // Keep the largest odd design distance giving this dimension.
    for design in (3..=n0).step_by(2) {
        let Ok(g) = field.bch_generator(design) else {
            break;
        };
        let kk = n0 - g.degree().unwrap_or(0);
        if kk == k {
            best = Some(design);
        }
        if kk < k {
            break;
        }
    }
    let design = best.ok_or(Error::NoSuchCode { m: field.m(), k })?;
    ComponentCode::extended_bch(field, design)
}

/// Extended BCH(127, k) + parity over GF(2^7) with primitive polynomial
/// x^7 + x^3 + 1. `k` in {113, 106, 99} gives the (128,113,6),
/// (128,106,8) and (128,99,10) codes.
pub fn build_ebch(k: usize) -> Result<ComponentCode> {
    build_ebch_in(&GaloisField::with_default_poly(7)?, k)
}

/// Shared handle used by scheme configurations.
pub type CodeRef = Arc<ComponentCode>;

/// RS(544,514) "KP4" outer code, modeled as a pre-FEC BER threshold.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OuterCodeModel {
    pub n: usize,
    pub k: usize,
    pub threshold_ber: f64,
    pub target_post_ber: f64,
}

impl OuterCodeModel {
    pub const KP4: OuterCodeModel = OuterCodeModel {
        n: 544,
        k: 514,
        threshold_ber: 2.2e-4,
        target_post_ber: 1e-15,
    };

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    /// Inclusive threshold test.
    pub fn success(&self, pre_outer_ber: f64) -> bool {
        pre_outer_ber <= self.threshold_ber
    }
}

impl Default for OuterCodeModel {
    fn default() -> Self {
        Self::KP4
    }
}

pub fn outer_success(pre_outer_ber: f64) -> bool {
    OuterCodeModel::KP4.success(pre_outer_ber)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn table_codes() {
        for (k, d) in [(113, 6), (106, 8), (99, 10)] {
            let c = build_ebch(k).unwrap();
            assert_eq!((c.n(), c.k(), c.d_min()), (128, k, d));
            assert_eq!(c.name(), format!("ebch-128-{k}"));
            assert!(c.generator().mul(&c.parity_check().transpose()).is_zero());
            assert_eq!(c.generator().rank(), k);
            assert_eq!(c.parity_check().rank(), 128 - k);
        }
    }

    #[test]
    fn unknown_dimension_rejected() {
        assert!(matches!(build_ebch(112), Err(Error::NoSuchCode { .. })));
        assert!(ComponentCode::by_name("ebch-128-112").is_err());
        assert!(ComponentCode::by_name("golay-24-12").is_err());
        assert_eq!(ComponentCode::by_name("ebch-128-99").unwrap().k(), 99);
    }

    #[test]
    fn extended_hamming_parameters() {
        let c8 = ComponentCode::extended_hamming(3).unwrap();
        assert_eq!((c8.n(), c8.k(), c8.d_min()), (8, 4, 4));
        let c16 = ComponentCode::by_name("ehamming-16-11").unwrap();
        assert_eq!((c16.n(), c16.k(), c16.d_min()), (16, 11, 4));
    }

    #[test]
    fn exhaustive_min_distance_small_codes() {
        for m in [3, 4] {
            let c = ComponentCode::extended_hamming(m).unwrap();
            let mut min_w = usize::MAX;
            for u in 1u32..(1 << c.k()) {
                let info = BitVector::from_bools((0..c.k()).map(|i| (u >> i) & 1 == 1));
                let w = c.encode(&info).unwrap().weight();
                assert_eq!(w % 2, 0);
                min_w = min_w.min(w);
            }
            assert_eq!(min_w, c.d_min());
        }
    }

    #[test]
    fn encode_examples() {
        let c = build_ebch(106).unwrap();
        assert!(c.encode(&BitVector::zeros(106)).unwrap().is_zero());
        assert!(c.encode(&BitVector::zeros(105)).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u1 = BitVector::random(106, &mut rng);
        let u2 = BitVector::random(106, &mut rng);
        let lhs = c.encode(&u1).unwrap().xor(&c.encode(&u2).unwrap());
        assert_eq!(lhs, c.encode(&u1.xor(&u2)).unwrap());
        for i in 0..106 {
            let mut u = BitVector::zeros(106);
            u.set(i, true);
            let cw = c.encode(&u).unwrap();
            assert!(cw.weight() >= 8 && cw.weight().is_multiple_of(2));
            assert!(c.is_codeword(&cw));
            assert_eq!(c.info_of(&cw), u);
        }
    }

    #[test]
    fn outer_threshold() {
        assert!(outer_success(2.2e-4));
        assert!(outer_success(0.0));
        assert!(!outer_success(1e-3));
        assert!((OuterCodeModel::KP4.rate() - 514.0 / 544.0).abs() < 1e-15);
    }
}
