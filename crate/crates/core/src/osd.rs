//! Ordered statistics decoding with order-0/1 and semi-order-2 flipping
//! sets.
//!
//! The decoder sorts positions by |LLR|, extracts the most reliable
//! independent basis (MRB), takes hard decisions on it, and scores every
//! test pattern by the correlation discrepancy: the sum of |LLR| over the
//! positions where the candidate codeword disagrees with the hard
//! decisions. Minimizing it is equivalent to minimizing the Euclidean
//! distance between the candidate's BPSK image and the received metric.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::codes::ComponentCode;
use crate::error::{Error, Result};
use crate::gf2m::{gf2_eliminate, BinaryMatrix};

/// Which test patterns to try: T0 (no flip), T1 (every single MRB flip)
/// and T2(m1, m2) (two flips among the m1 least reliable MRB positions
/// with at least one among the m2 least reliable).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FlippingSetSpec {
    pub include_order0: bool,
    pub include_order1: bool,
    pub semi_order_pairs: Option<(usize, usize)>,
}

impl FlippingSetSpec {
    pub const fn order1() -> Self {
        Self {
            include_order0: true,
            include_order1: true,
            semi_order_pairs: None,
        }
    }

    pub const fn semi_order2(m1: usize, m2: usize) -> Self {
        Self {
            include_order0: true,
            include_order1: true,
            semi_order_pairs: Some((m1, m2)),
        }
    }

    /// T0 + T1 + every 2-bit flip over the k MRB positions.
    pub const fn full_order2(k: usize) -> Self {
        Self::semi_order2(k, k)
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        if let Some((m1, m2)) = self.semi_order_pairs {
            if m2 > m1 || m1 > k {
                return Err(Error::FlippingSet(format!(
                    "t2({m1},{m2}) requires m2 <= m1 <= k = {k}"
                )));
            }
        }
        if !self.include_order0 && !self.include_order1 && self.semi_order_pairs.is_none() {
            return Err(Error::FlippingSet("empty flipping set".into()));
        }
        Ok(())
    }

    /// |T| by the closed form 1 + k + C(m1,2) - C(m1-m2,2).
    pub fn count(&self, k: usize) -> usize {
        let c2 = |m: usize| m * m.saturating_sub(1) / 2;
        usize::from(self.include_order0)
            + if self.include_order1 { k } else { 0 }
            + self
                .semi_order_pairs
                .map_or(0, |(m1, m2)| c2(m1) - c2(m1 - m2))
    }
}

impl fmt::Display for FlippingSetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.include_order0 {
            parts.push("t0".to_string());
        }
        if self.include_order1 {
            parts.push("t1".to_string());
        }
        if let Some((m1, m2)) = self.semi_order_pairs {
            parts.push(format!("t2({m1},{m2})"));
        }
        f.write_str(&parts.join("+"))
    }
}

impl FromStr for FlippingSetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut spec = Self {
            include_order0: false,
            include_order1: false,
            semi_order_pairs: None,
        };
        let bad = || Error::FlippingSet(format!("cannot parse {s:?}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        for term in compact.to_ascii_lowercase().split('+') {
            match term {
                "t0" => spec.include_order0 = true,
                "t1" => spec.include_order1 = true,
                t if t.starts_with("t2(") && t.ends_with(')') => {
                    let args: Vec<&str> = t[3..t.len() - 1].split(',').collect();
                    let [m1, m2] = args.as_slice() else {
                        return Err(bad());
                    };
                    let m1 = m1.parse().map_err(|_| bad())?;
                    let m2 = m2.parse().map_err(|_| bad())?;
                    if m2 > m1 {
                        return Err(Error::FlippingSet(format!("t2({m1},{m2}) has m2 > m1")));
                    }
                    spec.semi_order_pairs = Some((m1, m2));
                }
                _ => return Err(bad()),
            }
        }
        Ok(spec)
    }
}

impl TryFrom<String> for FlippingSetSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FlippingSetSpec> for String {
    fn from(s: FlippingSetSpec) -> String {
        s.to_string()
    }
}

/// A test pattern over MRB ranks (rank 0 is the most reliable MRB
/// position, rank k-1 the least).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FlipPattern {
    Zero,
    One(u16),
    Two(u16, u16),
    Many(Box<[u16]>),
}

impl FlipPattern {
    pub fn ranks(&self) -> Vec<usize> {
        match self {
            FlipPattern::Zero => vec![],
            FlipPattern::One(a) => vec![*a as usize],
            FlipPattern::Two(a, b) => vec![*a as usize, *b as usize],
            FlipPattern::Many(v) => v.iter().map(|&r| r as usize).collect(),
        }
    }
}

/// Patterns in generation order: T0, then T1 by ascending rank, then T2
/// pairs (a, b), a < b, lexicographically.
pub fn build_flipping_set(spec: &FlippingSetSpec, k: usize) -> Result<Vec<FlipPattern>> {
    spec.validate(k)?;
    if k > u16::MAX as usize {
        return Err(Error::FlippingSet(format!("k = {k} too large")));
    }
    let mut out = Vec::with_capacity(spec.count(k));
    if spec.include_order0 {
        out.push(FlipPattern::Zero);
    }
    if spec.include_order1 {
        out.extend((0..k).map(|r| FlipPattern::One(r as u16)));
    }
    if let Some((m1, m2)) = spec.semi_order_pairs {
        for a in k - m1..k {
            for b in (a + 1)..k {
                if b >= k - m2 {
                    out.push(FlipPattern::Two(a as u16, b as u16));
                }
            }
        }
    }
    debug_assert_eq!(out.len(), spec.count(k));
    Ok(out)
}

/// Every one of the 2^k patterns, in order of increasing weight then
/// lexicographic ranks. Only sensible for very small k; turns OSD into
/// exhaustive maximum-likelihood decoding.
pub fn exhaustive_flipping_set(k: usize) -> Result<Vec<FlipPattern>> {
    if k > 20 {
        return Err(Error::FlippingSet(format!("exhaustive set for k = {k} is too large")));
    }
    let mut masks: Vec<u32> = (0..1u32 << k).collect();
    let ranks = |m: u32| (0..k as u16).filter(move |&r| (m >> r) & 1 == 1);
    masks.sort_by_key(|&m| (m.count_ones(), ranks(m).collect::<Vec<_>>()));
    Ok(masks
        .into_iter()
        .map(|m| {
            let r: Vec<u16> = ranks(m).collect();
            match r.as_slice() {
                [] => FlipPattern::Zero,
                [a] => FlipPattern::One(*a),
                [a, b] => FlipPattern::Two(*a, *b),
                _ => FlipPattern::Many(r.into_boxed_slice()),
            }
        })
        .collect())
}

/// Positions sorted by |l| descending, ties by ascending index.
pub fn rank_reliability(l: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..l.len()).collect();
    order.sort_unstable_by(|&a, &b| {
        l[b].abs()
            .partial_cmp(&l[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order
}

/// Generator in systematic form on the k most reliable independent
/// positions, scanning `order` (most reliable first) and skipping
/// dependent columns. Returns `(G', mrb_positions)` with `mrb_positions`
/// in scan order; row i of G' has its identity entry at
/// `mrb_positions[i]`.
pub fn most_reliable_basis(
    code: &ComponentCode,
    order: &[usize],
) -> Result<(BinaryMatrix, Vec<usize>)> {
    if order.len() != code.n() {
        return Err(Error::LengthMismatch {
            expected: code.n(),
            got: order.len(),
        });
    }
    let (g, pivots) = gf2_eliminate(code.generator(), order);
    if pivots.len() != code.k() {
        return Err(Error::Scheme(format!(
            "generator of {} has rank {} < k",
            code.name(),
            pivots.len()
        )));
    }
    Ok((g, pivots))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OsdResult {
    pub codeword: BitVector,
    pub info: BitVector,
    /// Correlation discrepancy of the chosen candidate.
    pub score: f64,
    pub candidates_evaluated: usize,
}

/// Basis data for one received word, as produced by the fast path.
#[derive(Clone, Debug)]
pub(crate) struct ReliabilityBasis {
    /// MRB positions, most reliable first.
    pub mrb: Vec<usize>,
    /// LRB positions; bit i of a parity mask refers to `lrb[i]`.
    pub lrb: Vec<usize>,
    /// For each MRB rank, the LRB bits it drives in the systematic form.
    pub parity_masks: Vec<u128>,
}

/// OSD for one component code and flipping set, reusable across frames.
#[derive(Clone, Debug)]
pub struct OsdDecoder {
    n: usize,
    k: usize,
    /// Columns of the parity-check matrix as bit masks over its rows.
    h_columns: Vec<u128>,
    patterns: Vec<FlipPattern>,
}

impl OsdDecoder {
    pub fn new(code: &ComponentCode, spec: &FlippingSetSpec) -> Result<Self> {
        Self::with_patterns(code, build_flipping_set(spec, code.k())?)
    }

    pub fn with_patterns(code: &ComponentCode, patterns: Vec<FlipPattern>) -> Result<Self> {
        let r = code.n() - code.k();
        if r > 128 {
            return Err(Error::Scheme(format!(
                "OSD supports at most 128 parity bits, {} has {r}",
                code.name()
            )));
        }
        if patterns
            .iter()
            .flat_map(|p| p.ranks())
            .any(|rank| rank >= code.k())
        {
            return Err(Error::FlippingSet("pattern rank out of range".into()));
        }
        let h = code.parity_check();
        let h_columns = (0..code.n())
            .map(|c| {
                (0..r).fold(0u128, |acc, row| acc | ((h.get(row, c) as u128) << row))
            })
            .collect();
        Ok(Self {
            n: code.n(),
            k: code.k(),
            h_columns,
            patterns,
        })
    }

    pub fn candidates(&self) -> usize {
        self.patterns.len()
    }

    pub fn patterns(&self) -> &[FlipPattern] {
        &self.patterns
    }

    /// MRB by the dual route: the greedy independent set of parity-check
    /// columns taken from the least reliable end is exactly the complement
    /// of the greedy generator basis taken from the most reliable end.
    pub(crate) fn reliability_basis(&self, order: &[usize]) -> ReliabilityBasis {
        let r = self.n - self.k;
        // Echelon basis keyed by lowest set row bit: (vector, combination of LRB indices).
        let mut basis: Vec<Option<(u128, u128)>> = vec![None; r];
        let mut lrb = Vec::with_capacity(r);
        let mut coords = vec![0u128; self.n];
        let mut is_lrb = vec![false; self.n];
        for &pos in order.iter().rev() {
            let mut v = self.h_columns[pos];
            let mut comb = 0u128;
            while v != 0 {
                let bit = v.trailing_zeros() as usize;
                match basis[bit] {
                    Some((bv, bc)) => {
                        v ^= bv;
                        comb ^= bc;
                    }
                    None => break,
                }
            }
            if v != 0 {
                let idx = lrb.len();
                let bit = v.trailing_zeros() as usize;
                basis[bit] = Some((v, comb ^ (1u128 << idx)));
                lrb.push(pos);
                is_lrb[pos] = true;
            } else {
                coords[pos] = comb;
            }
        }
        debug_assert_eq!(lrb.len(), r, "parity-check matrix must have full rank");
        let mrb: Vec<usize> = order.iter().copied().filter(|&p| !is_lrb[p]).collect();
        let parity_masks = mrb.iter().map(|&p| coords[p]).collect();
        ReliabilityBasis {
            mrb,
            lrb,
            parity_masks,
        }
    }

    pub fn decode(&self, l: &[f64]) -> Result<OsdResult> {
        if l.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: l.len(),
            });
        }
        Ok(self.decode_unchecked(l))
    }

    fn decode_unchecked(&self, l: &[f64]) -> OsdResult {
        let order = rank_reliability(l);
        let basis = self.reliability_basis(&order);
        let r = basis.lrb.len();

        let hard = |p: usize| l[p] < 0.0;
        let mut base_parity = 0u128;
        for (rank, &p) in basis.mrb.iter().enumerate() {
            if hard(p) {
                base_parity ^= basis.parity_masks[rank];
            }
        }
        let mut lrb_hard = 0u128;
        for (i, &p) in basis.lrb.iter().enumerate() {
            if hard(p) {
                lrb_hard |= 1u128 << i;
            }
        }
        let e0 = base_parity ^ lrb_hard;

        let weights = ChunkWeights::new(basis.lrb.iter().map(|&p| l[p].abs()), r);
        let mrb_weight: Vec<f64> = basis.mrb.iter().map(|&p| l[p].abs()).collect();
        let masks = &basis.parity_masks;

        let mut best_score = f64::INFINITY;
        let mut best_pattern = 0usize;
        let mut best_e = e0;
        for (idx, pat) in self.patterns.iter().enumerate() {
            let (flip_cost, e) = match pat {
                FlipPattern::Zero => (0.0, e0),
                FlipPattern::One(a) => {
                    let a = *a as usize;
                    (mrb_weight[a], e0 ^ masks[a])
                }
                FlipPattern::Two(a, b) => {
                    let (a, b) = (*a as usize, *b as usize);
                    (mrb_weight[a] + mrb_weight[b], e0 ^ masks[a] ^ masks[b])
                }
                FlipPattern::Many(ranks) => ranks.iter().fold((0.0, e0), |(c, e), &a| {
                    (c + mrb_weight[a as usize], e ^ masks[a as usize])
                }),
            };
            if flip_cost >= best_score {
                continue;
            }
            let score = flip_cost + weights.sum(e);
            if score < best_score {
                best_score = score;
                best_pattern = idx;
                best_e = e;
            }
        }

        let mut codeword = BitVector::zeros(self.n);
        for &p in &basis.mrb {
            if hard(p) {
                codeword.set(p, true);
            }
        }
        for rank in self.patterns[best_pattern].ranks() {
            codeword.flip(basis.mrb[rank]);
        }
        let lrb_bits = lrb_hard ^ best_e;
        for (i, &p) in basis.lrb.iter().enumerate() {
            if (lrb_bits >> i) & 1 == 1 {
                codeword.set(p, true);
            }
        }
        OsdResult {
            info: codeword.slice(0, self.k),
            codeword,
            score: best_score,
            candidates_evaluated: self.patterns.len(),
        }
    }
}

/// Byte-chunked lookup tables giving the sum of weights selected by a
/// mask of up to 128 bits.
struct ChunkWeights {
    tables: Vec<[f64; 256]>,
}

impl ChunkWeights {
    fn new<I: Iterator<Item = f64>>(weights: I, r: usize) -> Self {
        let w: Vec<f64> = weights.collect();
        let chunks = r.div_ceil(8);
        let mut tables = vec![[0.0f64; 256]; chunks];
        for (c, table) in tables.iter_mut().enumerate() {
            for x in 1usize..256 {
                let low = x.trailing_zeros() as usize;
                let bit = c * 8 + low;
                let add = if bit < r { w[bit] } else { 0.0 };
                table[x] = table[x & (x - 1)] + add;
            }
        }
        Self { tables }
    }

    #[inline]
    fn sum(&self, mask: u128) -> f64 {
        let mut s = 0.0;
        let mut m = mask;
        for t in &self.tables {
            s += t[(m & 0xFF) as usize];
            m >>= 8;
        }
        s
    }
}

/// One-shot OSD: build the decoder and decode a single word.
pub fn osd_decode(code: &ComponentCode, l: &[f64], spec: &FlippingSetSpec) -> Result<OsdResult> {
    OsdDecoder::new(code, spec)?.decode(l)
}

/// Correlation discrepancy of a word against the hard decisions of `l`.
pub fn correlation_discrepancy(word: &BitVector, l: &[f64]) -> f64 {
    l.iter()
        .enumerate()
        .filter(|&(i, &x)| word.get(i) != (x < 0.0))
        .map(|(_, &x)| x.abs())
        .sum()
}
