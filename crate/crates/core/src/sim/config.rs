use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::codes::ComponentCode;
use crate::error::{Error, Result};
use crate::mlc::{default_damping, InterleaverSpec, SchemeConfig, SchemeKind};
use crate::osd::FlippingSetSpec;

use super::StoppingRule;

/// Experiment file. Every section except `[scheme]` is optional.
///
/// ```toml
/// seed = 7
///
/// [scheme]
/// kind = "cp-mlc-id"
/// d = 3
/// code = "ebch-128-106"
/// osd = "t0+t1+t2(40,29)"
/// iterations = 3
///
/// [threshold]
/// bracket = [5.0, 7.0]
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub scheme: SchemeSection,
    #[serde(default)]
    pub stopping: StoppingRule,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub threshold: ThresholdSection,
    #[serde(default)]
    pub interleaver_sweep: InterleaverSweepSection,
}

fn default_seed() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub kind: SchemeKind,
    pub d: usize,
    /// Component code name, e.g. `ebch-128-106`.
    pub code: String,
    #[serde(default = "default_osd")]
    pub osd: FlippingSetSpec,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Defaults to the pinned schedule for 3 or 6 iterations.
    pub damping: Option<Vec<f64>>,
    /// Component codewords per lane (cp-mlc-id only).
    #[serde(default = "default_lane_codewords")]
    pub lane_codewords: usize,
    /// Size for the default interleaver layout; defaults to the code length,
    /// or with several codewords per lane to the smaller of that and their count.
    pub interleaver_size: Option<usize>,
    /// Explicit per-lane interleavers; overrides `interleaver_size`.
    pub interleavers: Option<Vec<InterleaverSpec>>,
    #[serde(default)]
    pub bypass_includes_channel_llr: bool,
}

fn default_lane_codewords() -> usize {
    1
}

fn default_osd() -> FlippingSetSpec {
    FlippingSetSpec::semi_order2(40, 29)
}

fn default_iterations() -> usize {
    3
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    /// AWGN operating points.
    pub snr_db: Vec<f64>,
    /// BSC crossover probabilities.
    pub bsc_p: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdSection {
    pub target_ber: f64,
    /// Initial (lo, hi) bracket in dB. Without one the search walks from
    /// `guess_db` in `step_db` increments.
    pub bracket: Option<(f64, f64)>,
    pub guess_db: f64,
    pub step_db: f64,
    pub tol_db: f64,
}

impl Default for ThresholdSection {
    fn default() -> Self {
        Self {
            target_ber: crate::codes::OuterCodeModel::KP4.threshold_ber,
            bracket: None,
            guess_db: 6.0,
            step_db: 0.5,
            tol_db: 0.01,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InterleaverSweepSection {
    pub sizes: Vec<usize>,
    pub iterations: Vec<usize>,
}

impl Default for InterleaverSweepSection {
    fn default() -> Self {
        Self {
            sizes: vec![1, 2, 4, 8, 128],
            iterations: vec![3, 6],
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.stopping.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }
}

impl SchemeSection {
    pub fn build(&self) -> Result<SchemeConfig> {
        let code = ComponentCode::by_name(&self.code)?;
        let mut cfg = match self.kind {
            SchemeKind::Uncoded => SchemeConfig::uncoded(code.n(), self.d)?,
            SchemeKind::Concatenated => SchemeConfig::concatenated(Arc::new(code), self.osd, self.d),
            SchemeKind::CpMlc => SchemeConfig::cp_mlc(Arc::new(code), self.osd, self.d),
            SchemeKind::CpMlcId => {
                let damping = match &self.damping {
                    Some(d) => d.clone(),
                    None => default_damping(self.iterations).ok_or_else(|| {
                        Error::Config(format!("no default damping for {} iterations; set damping", self.iterations))
                    })?,
                };
                let c = SchemeConfig::cp_mlc_id(Arc::new(code), self.osd, self.d, self.iterations, damping)
                    .with_lane_codewords(self.lane_codewords);
                match self.interleaver_size {
                    Some(size) => c.with_interleaver_size(size),
                    None => c,
                }
            }
        };
        if let Some(list) = &self.interleavers {
            cfg.interleavers = list.clone();
        }
        cfg.bypass_includes_channel_llr = self.bypass_includes_channel_llr;
        cfg.lane_codewords = self.lane_codewords;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
seed = 42

[scheme]
kind = "cp-mlc-id"
d = 3
code = "ebch-128-106"
osd = "t0+t1+t2(40,29)"
iterations = 6
interleaver_size = 8

[stopping]
min_bit_errors = 200

[threshold]
bracket = [5.0, 7.0]

[sweep]
snr_db = [5.5, 6.0]
"#;

    #[test]
    fn parse_and_build() {
        let cfg = ExperimentConfig::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.stopping.min_bit_errors, 200);
        assert_eq!(cfg.stopping.min_frames, 10_000);
        assert_eq!(cfg.threshold.bracket, Some((5.0, 7.0)));
        assert_eq!(cfg.threshold.target_ber, 2.2e-4);
        let s = cfg.scheme.build().unwrap();
        assert_eq!(s.k(), 106);
        assert_eq!(s.damping, crate::mlc::DAMPING_I6.to_vec());
        assert_eq!(s.interleavers[1], InterleaverSpec::digit_swap(8));
        assert_eq!(s.osd_spec.count(106), 832);
    }

    #[test]
    fn several_codewords_per_lane() {
        let text = "[scheme]\nkind = \"cp-mlc-id\"\nd = 3\ncode = \"ebch-128-106\"\nlane_codewords = 32\n";
        let s = ExperimentConfig::from_toml_str(text).unwrap().scheme.build().unwrap();
        assert_eq!(s.lane_len(), 32 * 128);
        assert_eq!(s.interleavers[1], InterleaverSpec::Spread { size: 32, rotation: 0 });
        let cp = "[scheme]\nkind = \"cp-mlc\"\nd = 2\ncode = \"ebch-128-99\"\nlane_codewords = 2\n";
        assert!(ExperimentConfig::from_toml_str(cp).unwrap().scheme.build().is_err());
    }

    #[test]
    fn round_trip_through_toml() {
        let cfg = ExperimentConfig::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::from_toml_str("[scheme]\nkind = \"turbo\"\nd = 3\ncode = \"ebch-128-106\"").is_err());
        assert!(ExperimentConfig::from_toml_str("bogus = 1\n[scheme]\nkind = \"cp-mlc\"\nd = 2\ncode = \"ebch-128-99\"").is_err());
        let odd = ExperimentConfig::from_toml_str("[scheme]\nkind = \"cp-mlc-id\"\nd = 3\ncode = \"ebch-128-106\"\niterations = 4").unwrap();
        assert!(odd.scheme.build().is_err());
        let bad_code = ExperimentConfig::from_toml_str("[scheme]\nkind = \"cp-mlc\"\nd = 2\ncode = \"ebch-128-100\"").unwrap();
        assert!(bad_code.scheme.build().is_err());
    }
}
