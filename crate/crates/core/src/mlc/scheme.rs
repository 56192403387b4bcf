use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::BitVector;
use crate::codes::{ComponentCode, OuterCodeModel};
use crate::error::{Error, Result};
use crate::mlc::interleaver::{Interleaver, InterleaverSpec};
use crate::osd::{FlippingSetSpec, OsdDecoder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// Plain BPSK, no inner or outer code; calibration only.
    Uncoded,
    Concatenated,
    CpMlc,
    CpMlcId,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Uncoded => "uncoded",
            SchemeKind::Concatenated => "concatenated",
            SchemeKind::CpMlc => "cp-mlc",
            SchemeKind::CpMlcId => "cp-mlc-id",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uncoded" => Ok(Self::Uncoded),
            "concatenated" => Ok(Self::Concatenated),
            "cp-mlc" => Ok(Self::CpMlc),
            "cp-mlc-id" => Ok(Self::CpMlcId),
            other => Err(Error::Scheme(format!("unknown scheme kind {other:?}"))),
        }
    }
}

/// Damping schedule used with three iterations.
pub const DAMPING_I3: [f64; 3] = [0.3, 1.0, 1.0];
/// Damping schedule used with six iterations.
pub const DAMPING_I6: [f64; 6] = [0.2, 0.3, 0.5, 0.7, 0.9, 1.0];

/// The pinned damping schedule for `iterations`, if one exists.
pub fn default_damping(iterations: usize) -> Option<Vec<f64>> {
    match iterations {
        3 => Some(DAMPING_I3.to_vec()),
        6 => Some(DAMPING_I6.to_vec()),
        _ => None,
    }
}

/// Default lane interleavers: identity on lane 1 and on the bypassed lane,
/// `digit-swap(size)` on lane 2, and rotated variants on lanes 3..d-1.
pub fn default_interleavers(d: usize, size: usize) -> Vec<InterleaverSpec> {
    (0..d)
        .map(|j| {
            if j == 0 || j == d - 1 {
                InterleaverSpec::Identity
            } else {
                InterleaverSpec::DigitSwap {
                    size,
                    rotation: (j - 1) as u32,
                }
            }
        })
        .collect()
}

/// Interleavers for lanes of several codewords: `spread(size)` on lane 2 and
/// rotated variants on lanes 3..d-1.
pub fn spread_interleavers(d: usize, size: usize) -> Vec<InterleaverSpec> {
    (0..d)
        .map(|j| {
            if j == 0 || j == d - 1 {
                InterleaverSpec::Identity
            } else {
                InterleaverSpec::Spread {
                    size,
                    rotation: (j - 1) as u32,
                }
            }
        })
        .collect()
}

/// Full description of a coding scheme.
#[derive(Clone, Debug)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    /// Number of lanes per frame.
    pub d: usize,
    pub code: Arc<ComponentCode>,
    pub osd_spec: FlippingSetSpec,
    /// Decoder iterations (CP-MLC-ID only).
    pub iterations: usize,
    /// Damping factor per iteration (CP-MLC-ID only).
    pub damping: Vec<f64>,
    /// One interleaver per lane (CP-MLC-ID only).
    pub interleavers: Vec<InterleaverSpec>,
    /// Add the bypassed lane's own channel LLR to the final bypass decision.
    pub bypass_includes_channel_llr: bool,
    /// Component codewords per lane (CP-MLC-ID only); above 1 the lane
    /// interleavers may mix codewords.
    pub lane_codewords: usize,
    pub outer: OuterCodeModel,
}

impl SchemeConfig {
    fn base(kind: SchemeKind, code: Arc<ComponentCode>, osd_spec: FlippingSetSpec, d: usize) -> Self {
        Self {
            kind,
            d,
            code,
            osd_spec,
            iterations: 1,
            damping: vec![1.0],
            interleavers: vec![InterleaverSpec::Identity; d],
            bypass_includes_channel_llr: false,
            lane_codewords: 1,
            outer: OuterCodeModel::KP4,
        }
    }

    pub fn uncoded(n: usize, d: usize) -> Result<Self> {
        let field_m = n.trailing_zeros();
        // Any code object of the right length serves as a lane-length carrier.
        let carrier = ComponentCode::extended_hamming(field_m)?;
        Ok(Self::base(SchemeKind::Uncoded, Arc::new(carrier), FlippingSetSpec::order1(), d))
    }

    pub fn concatenated(code: Arc<ComponentCode>, osd_spec: FlippingSetSpec, d: usize) -> Self {
        Self::base(SchemeKind::Concatenated, code, osd_spec, d)
    }

    pub fn cp_mlc(code: Arc<ComponentCode>, osd_spec: FlippingSetSpec, d: usize) -> Self {
        Self::base(SchemeKind::CpMlc, code, osd_spec, d)
    }

    /// CP-MLC-ID with the default interleavers at full size (S = n).
    pub fn cp_mlc_id(
        code: Arc<ComponentCode>,
        osd_spec: FlippingSetSpec,
        d: usize,
        iterations: usize,
        damping: Vec<f64>,
    ) -> Self {
        let n = code.n();
        Self {
            iterations,
            damping,
            interleavers: default_interleavers(d, n),
            ..Self::base(SchemeKind::CpMlcId, code, osd_spec, d)
        }
    }

    /// Default interleavers of the given size; `spread` ones when a lane
    /// holds several codewords.
    pub fn with_interleaver_size(mut self, size: usize) -> Self {
        self.interleavers = if self.lane_codewords > 1 {
            spread_interleavers(self.d, size)
        } else {
            default_interleavers(self.d, size)
        };
        self
    }

    /// `codewords` per lane with `spread` interleavers as large as allowed.
    pub fn with_lane_codewords(mut self, codewords: usize) -> Self {
        self.lane_codewords = codewords;
        let size = codewords.min(self.n());
        self.with_interleaver_size(size)
    }

    /// Bits per lane.
    pub fn lane_len(&self) -> usize {
        self.lane_codewords * self.n()
    }

    pub fn n(&self) -> usize {
        self.code.n()
    }

    pub fn k(&self) -> usize {
        self.code.k()
    }

    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::Scheme(m));
        if self.d < 1 || (self.d < 2 && matches!(self.kind, SchemeKind::CpMlc | SchemeKind::CpMlcId)) {
            return err(format!("{} needs d >= 2, got {}", self.kind, self.d));
        }
        if self.kind == SchemeKind::CpMlcId {
            if self.iterations < 1 {
                return err("iterations must be >= 1".into());
            }
            if self.damping.len() != self.iterations {
                return err(format!(
                    "damping has {} entries for {} iterations",
                    self.damping.len(),
                    self.iterations
                ));
            }
            if let Some(x) = self.damping.iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
                return err(format!("damping factor {x} outside [0, 1]"));
            }
        }
        if self.lane_codewords < 1 || (self.lane_codewords > 1 && self.kind != SchemeKind::CpMlcId) {
            return err(format!("{} codewords per lane is not supported for {}", self.lane_codewords, self.kind));
        }
        if self.interleavers.len() != self.d {
            return err(format!("{} interleavers for {} lanes", self.interleavers.len(), self.d));
        }
        if self.kind != SchemeKind::Uncoded {
            self.osd_spec.validate(self.k())?;
        }
        Ok(())
    }

    /// Lane visited at 1-based iteration i: ((i - 1) mod (d - 1)) + 1.
    pub fn lane_at(&self, iteration: usize) -> usize {
        (iteration - 1) % (self.d - 1) + 1
    }

    /// Information bits delivered to the outer code per frame.
    pub fn info_bits_per_frame(&self) -> usize {
        let (n, k, d) = (self.n(), self.k(), self.d);
        self.lane_codewords
            * match self.kind {
                SchemeKind::Uncoded => d * n,
                SchemeKind::Concatenated => d * k,
                SchemeKind::CpMlc => k + (d - 1) * n,
                SchemeKind::CpMlcId => (d - 1) * k + n,
            }
    }

    pub fn coded_bits_per_frame(&self) -> usize {
        self.d * self.lane_len()
    }

    /// Bits of the frame's information layout that bypass every SDD.
    pub fn bypassed_range(&self) -> std::ops::Range<usize> {
        let (n, k, d, b) = (self.n(), self.k(), self.d, self.lane_codewords);
        match self.kind {
            SchemeKind::Uncoded | SchemeKind::Concatenated => 0..0,
            SchemeKind::CpMlc => k..k + (d - 1) * n,
            SchemeKind::CpMlcId => b * (d - 1) * k..b * ((d - 1) * k + n),
        }
    }

    /// Inner rate times the outer rate; uncoded transmission has rate 1.
    pub fn total_rate(&self) -> f64 {
        let inner = self.info_bits_per_frame() as f64 / self.coded_bits_per_frame() as f64;
        match self.kind {
            SchemeKind::Uncoded => 1.0,
            _ => inner * self.outer.rate(),
        }
    }

    /// Total overhead of inner and outer code, in percent.
    pub fn overhead_percent(&self) -> f64 {
        (1.0 / self.total_rate() - 1.0) * 100.0
    }

    /// Soft-decision decoder invocations per three lanes.
    pub fn sdd_count(&self) -> f64 {
        let per_frame = match self.kind {
            SchemeKind::Uncoded => 0,
            SchemeKind::Concatenated => self.d,
            SchemeKind::CpMlc => 1,
            SchemeKind::CpMlcId => self.iterations,
        };
        per_frame as f64 * 3.0 / self.d as f64
    }

    /// Short identifier used in result records.
    pub fn id(&self) -> String {
        let mut s = format!("{}/d{}/{}", self.kind, self.d, self.code.name());
        if self.kind != SchemeKind::Uncoded {
            s.push_str(&format!("/t{}", self.osd_spec.count(self.k())));
        }
        if self.kind == SchemeKind::CpMlcId {
            s.push_str(&format!("/I{}/S{}", self.iterations, self.interleavers.iter().map(|i| i.size()).max().unwrap_or(1)));
            if self.lane_codewords > 1 {
                s.push_str(&format!("/B{}", self.lane_codewords));
            }
            if self.bypass_includes_channel_llr {
                s.push_str("/bypass+ch");
            }
        }
        s
    }
}

/// Lanes of one encoded frame.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    /// Information bits in the scheme's layout.
    pub info: BitVector,
    /// Lane words before interleaving (z_1..z_d).
    pub codewords: Vec<BitVector>,
    /// Interleaved lane words (s_1..s_d); equal to `codewords` for schemes
    /// without interleavers.
    pub interleaved: Vec<BitVector>,
    /// Transmitted lanes (b_1..b_d).
    pub lanes: Vec<BitVector>,
}

impl Frame {
    pub fn transmitted(&self) -> BitVector {
        BitVector::concat(&self.lanes)
    }
}

/// Per-iteration record of the iterative decoder.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    /// 1-based lane index.
    pub lane: usize,
    /// Bits changed by the SDD relative to the hard decision of its input.
    pub flips: usize,
    /// Input LLR of the SDD in the transmitted domain, when recorded.
    pub input_llr: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub info: BitVector,
    pub trace: Vec<TraceEntry>,
}

/// A validated scheme with its decoder state prepared.
#[derive(Clone, Debug)]
pub struct Scheme {
    pub(crate) cfg: SchemeConfig,
    pub(crate) osd: Option<OsdDecoder>,
    pub(crate) interleavers: Vec<Interleaver>,
}

impl Scheme {
    pub fn new(cfg: SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        let (n, b) = (cfg.n(), cfg.lane_codewords);
        let interleavers = cfg
            .interleavers
            .iter()
            .map(|s| Interleaver::for_lane(s, n, b))
            .collect::<Result<Vec<_>>>()?;
        let osd = match cfg.kind {
            SchemeKind::Uncoded => None,
            _ => Some(OsdDecoder::new(&cfg.code, &cfg.osd_spec)?),
        };
        Ok(Self { cfg, osd, interleavers })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub(crate) fn osd(&self) -> &OsdDecoder {
        self.osd.as_ref().expect("coded scheme has an OSD decoder")
    }

    pub(crate) fn check_info(&self, info: &BitVector) -> Result<()> {
        let expected = self.cfg.info_bits_per_frame();
        if info.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                got: info.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_lanes<L: AsRef<[f64]>>(&self, lanes: &[L]) -> Result<()> {
        if lanes.len() != self.cfg.d {
            return Err(Error::LengthMismatch {
                expected: self.cfg.d,
                got: lanes.len(),
            });
        }
        for l in lanes {
            if l.as_ref().len() != self.cfg.lane_len() {
                return Err(Error::LengthMismatch {
                    expected: self.cfg.lane_len(),
                    got: l.as_ref().len(),
                });
            }
        }
        Ok(())
    }

    pub fn encode(&self, info: &BitVector) -> Result<Frame> {
        match self.cfg.kind {
            SchemeKind::Uncoded => super::concatenated::uncoded_encode(self, info),
            SchemeKind::Concatenated => super::concatenated::concatenated_encode(self, info),
            SchemeKind::CpMlc => super::cpmlc::cpmlc_encode(self, info),
            SchemeKind::CpMlcId => super::cpmlcid::cpmlcid_encode(self, info),
        }
    }

    pub fn decode<L: AsRef<[f64]>>(&self, lanes: &[L]) -> Result<Decoded> {
        let no_trace = |info| Decoded { info, trace: Vec::new() };
        match self.cfg.kind {
            SchemeKind::Uncoded => super::concatenated::uncoded_decode(self, lanes).map(no_trace),
            SchemeKind::Concatenated => super::concatenated::concatenated_decode(self, lanes).map(no_trace),
            SchemeKind::CpMlc => super::cpmlc::cpmlc_decode(self, lanes).map(no_trace),
            SchemeKind::CpMlcId => super::cpmlcid::cpmlcid_decode(self, lanes, false),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::build_ebch;

    #[test]
    fn lane_schedule() {
        let code = Arc::new(build_ebch(106).unwrap());
        let cfg = SchemeConfig::cp_mlc_id(code, FlippingSetSpec::order1(), 3, 6, DAMPING_I6.to_vec());
        let lanes: Vec<usize> = (1..=6).map(|i| cfg.lane_at(i)).collect();
        assert_eq!(lanes, vec![1, 2, 1, 2, 1, 2]);
    }

    #[test]
    fn validation() {
        let code = Arc::new(build_ebch(106).unwrap());
        let mut cfg = SchemeConfig::cp_mlc_id(code.clone(), FlippingSetSpec::order1(), 3, 3, vec![0.3, 1.0]);
        assert!(cfg.validate().is_err());
        cfg.damping = DAMPING_I3.to_vec();
        assert!(cfg.validate().is_ok());
        cfg.damping[0] = 1.5;
        assert!(cfg.validate().is_err());
        assert!(SchemeConfig::cp_mlc(code.clone(), FlippingSetSpec::order1(), 1).validate().is_err());
        assert!(SchemeConfig::concatenated(code, FlippingSetSpec::semi_order2(200, 1), 3).validate().is_err());
    }

    #[test]
    fn sdd_counts() {
        let code = Arc::new(build_ebch(106).unwrap());
        let spec = FlippingSetSpec::order1();
        assert_eq!(SchemeConfig::concatenated(code.clone(), spec, 3).sdd_count(), 3.0);
        assert_eq!(SchemeConfig::cp_mlc_id(code.clone(), spec, 3, 3, DAMPING_I3.to_vec()).sdd_count(), 3.0);
        assert_eq!(SchemeConfig::cp_mlc_id(code.clone(), spec, 3, 6, DAMPING_I6.to_vec()).sdd_count(), 6.0);
        assert_eq!(SchemeConfig::cp_mlc(code, spec, 2).sdd_count(), 1.5);
    }

    #[test]
    fn overheads() {
        let spec = FlippingSetSpec::semi_order2(40, 29);
        let concat = SchemeConfig::concatenated(Arc::new(build_ebch(113).unwrap()), spec, 3);
        let cp = SchemeConfig::cp_mlc(Arc::new(build_ebch(99).unwrap()), spec, 2);
        let id = SchemeConfig::cp_mlc_id(Arc::new(build_ebch(106).unwrap()), spec, 3, 3, DAMPING_I3.to_vec());
        // (coded / info) * (544 / 514) - 1, worked by hand
        for (cfg, want) in [(concat, 19.886), (cp, 19.358), (id, 19.533)] {
            assert!((cfg.overhead_percent() - want).abs() < 0.01, "{}: {}", cfg.id(), cfg.overhead_percent());
        }
        assert_eq!(SchemeConfig::uncoded(128, 3).unwrap().overhead_percent(), 0.0);
    }

    #[test]
    fn lane_codewords_scale_the_frame() {
        let code = Arc::new(build_ebch(106).unwrap());
        let one = SchemeConfig::cp_mlc_id(code.clone(), FlippingSetSpec::order1(), 3, 3, DAMPING_I3.to_vec());
        let many = one.clone().with_lane_codewords(16);
        assert_eq!(many.info_bits_per_frame(), 16 * one.info_bits_per_frame());
        assert_eq!(many.coded_bits_per_frame(), 16 * 384);
        assert_eq!(many.bypassed_range(), 16 * 212..16 * 340);
        assert_eq!(many.total_rate(), one.total_rate());
        assert_eq!(many.interleavers[1], InterleaverSpec::Spread { size: 16, rotation: 0 });
        assert!(many.id().ends_with("/S16/B16"));
        assert!(Scheme::new(many.clone().with_interleaver_size(32)).is_err());
        let mut cp = SchemeConfig::cp_mlc(code, FlippingSetSpec::order1(), 2);
        cp.lane_codewords = 2;
        assert!(cp.validate().is_err());
    }

    #[test]
    fn default_interleaver_layout() {
        assert_eq!(
            default_interleavers(3, 8),
            vec![InterleaverSpec::Identity, InterleaverSpec::digit_swap(8), InterleaverSpec::Identity]
        );
        let four = default_interleavers(4, 128);
        assert_eq!(four[2], InterleaverSpec::DigitSwap { size: 128, rotation: 1 });
    }
}
