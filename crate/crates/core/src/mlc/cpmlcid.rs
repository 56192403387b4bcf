//! CP-MLC with iterative decoding: d - 1 coded lanes, each XOR-coupled to
//! one bypassed lane, exchanging damped hard-decision extrinsics.

use crate::bits::BitVector;
use crate::channel::{clamp_llr, hard_decision};
use crate::error::Result;
use crate::mlc::boxplus::boxplus;
use crate::mlc::scheme::{Decoded, Frame, Scheme, TraceEntry};

/// Information layout: z'_1..z'_{d-1} (k bits each) then z_d (n bits).
/// With B codewords per lane every lane is B times as long: z'_j holds B
/// consecutive k-bit messages and z_j the B codewords in order.
///
/// z_j = encode(z'_j), s_j = S_j(z_j), s_d = S_d(z_d), and the lanes are
/// b_j = s_j xor s_d for j < d, b_d = s_d.
pub fn cpmlcid_encode(scheme: &Scheme, info: &BitVector) -> Result<Frame> {
    scheme.check_info(info)?;
    let cfg = &scheme.cfg;
    let (k, d, b) = (cfg.k(), cfg.d, cfg.lane_codewords);
    let mut codewords = Vec::with_capacity(d);
    for j in 0..d - 1 {
        let words = (0..b)
            .map(|c| {
                let at = (j * b + c) * k;
                cfg.code.encode(&info.slice(at, at + k))
            })
            .collect::<Result<Vec<_>>>()?;
        codewords.push(BitVector::concat(&words));
    }
    let at = (d - 1) * b * k;
    codewords.push(info.slice(at, at + cfg.lane_len()));
    let interleaved: Vec<BitVector> = codewords
        .iter()
        .zip(&scheme.interleavers)
        .map(|(z, s)| s.apply_bits(z))
        .collect();
    let bypass = &interleaved[d - 1];
    let mut lanes: Vec<BitVector> = interleaved[..d - 1].iter().map(|s| s.xor(bypass)).collect();
    lanes.push(bypass.clone());
    Ok(Frame {
        info: info.clone(),
        codewords,
        interleaved,
        lanes,
    })
}

/// Damped hard-decision extrinsic for the bypassed lane:
/// ξ · l_j · (-1)^{ŝ_j}, element-wise.
pub fn lane_extrinsic(damping: f64, lane_llr: &[f64], s_hat: &BitVector) -> Vec<f64> {
    lane_llr
        .iter()
        .enumerate()
        .map(|(p, &l)| {
            let v = damping * l;
            clamp_llr(if s_hat.get(p) { -v } else { v })
        })
        .collect()
}

/// Iterative decoder. At iteration i the lane j = ((i - 1) mod (d - 1)) + 1
/// is decoded from λ_j = l_j ⊞ (l_d + Σ_{j' ≠ j} ext_{j'}); its extrinsic is
/// then overwritten. The bypassed bits are the hard decision of Σ_j ext_j
/// (plus l_d when configured). With `record_llrs` each trace entry carries
/// the SDD input in the transmitted domain. Lanes of several codewords are
/// decoded one codeword at a time.
pub fn cpmlcid_decode<L: AsRef<[f64]>>(scheme: &Scheme, lanes: &[L], record_llrs: bool) -> Result<Decoded> {
    scheme.check_lanes(lanes)?;
    let cfg = &scheme.cfg;
    let (n, k, d) = (cfg.n(), cfg.k(), cfg.d);
    let len = cfg.lane_len();
    let l: Vec<&[f64]> = lanes.iter().map(|x| x.as_ref()).collect();
    let bypass_llr = l[d - 1];
    let osd = scheme.osd();

    let mut ext = vec![vec![0.0f64; len]; d - 1];
    let mut decoded: Vec<Option<BitVector>> = vec![None; d - 1];
    let mut trace = Vec::with_capacity(cfg.iterations);

    let lane_input = |j: usize, ext: &[Vec<f64>]| -> Vec<f64> {
        (0..len)
            .map(|p| {
                let mut tilde = bypass_llr[p];
                for (jj, e) in ext.iter().enumerate() {
                    if jj != j {
                        tilde += e[p];
                    }
                }
                boxplus(l[j][p], tilde)
            })
            .collect()
    };

    for i in 1..=cfg.iterations {
        let j = cfg.lane_at(i) - 1;
        let lambda_in = lane_input(j, &ext);
        let inter = &scheme.interleavers[j];
        let deinterleaved = inter.invert(&lambda_in);
        let mut words = Vec::with_capacity(cfg.lane_codewords);
        let mut flips = 0;
        for seg in deinterleaved.chunks(n) {
            let res = osd.decode(seg)?;
            flips += res.codeword.hamming_distance(&hard_decision(seg));
            words.push(res.codeword);
        }
        let z_hat = BitVector::concat(&words);
        let s_hat = inter.apply_bits(&z_hat);
        ext[j] = lane_extrinsic(cfg.damping[i - 1], l[j], &s_hat);
        decoded[j] = Some(z_hat);
        trace.push(TraceEntry {
            iteration: i,
            lane: j + 1,
            flips,
            input_llr: record_llrs.then_some(lambda_in),
        });
    }

    let mut parts = Vec::with_capacity(d);
    for (j, z) in decoded.iter().enumerate() {
        let word = match z {
            Some(z) => z.clone(),
            // Lane never visited (I < d - 1): hard decision of its current input.
            None => hard_decision(&scheme.interleavers[j].invert(&lane_input(j, &ext))),
        };
        for c in 0..cfg.lane_codewords {
            parts.push(word.slice(c * n, c * n + k));
        }
    }
    let gamma: Vec<f64> = (0..len)
        .map(|p| {
            let s: f64 = ext.iter().map(|e| e[p]).sum();
            if cfg.bypass_includes_channel_llr {
                s + bypass_llr[p]
            } else {
                s
            }
        })
        .collect();
    parts.push(scheme.interleavers[d - 1].invert_bits(&hard_decision(&gamma)));
    Ok(Decoded {
        info: BitVector::concat(&parts),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::channel::{frame_rng, llr_from_awgn, modulate, snr_to_sigma, transmit_awgn};
    use crate::codes::build_ebch;
    use crate::mlc::interleaver::InterleaverSpec;
    use crate::mlc::scheme::{SchemeConfig, DAMPING_I3, DAMPING_I6};
    use crate::osd::FlippingSetSpec;

    fn config(iterations: usize, damping: Vec<f64>) -> SchemeConfig {
        let code = Arc::new(build_ebch(106).unwrap());
        SchemeConfig::cp_mlc_id(code, FlippingSetSpec::semi_order2(40, 29), 3, iterations, damping)
    }

    fn noiseless(frame: &Frame, scale: f64) -> Vec<Vec<f64>> {
        frame
            .lanes
            .iter()
            .map(|b| modulate(b).iter().map(|x| x * scale).collect())
            .collect()
    }

    #[test]
    fn all_zero_info() {
        let s = Scheme::new(config(3, DAMPING_I3.to_vec())).unwrap();
        let f = s.encode(&BitVector::zeros(340)).unwrap();
        assert!(f.lanes.iter().all(|b| b.is_zero()));
    }

    #[test]
    fn zero_bypass_leaves_interleaved_words() {
        let s = Scheme::new(config(3, DAMPING_I3.to_vec())).unwrap();
        let mut info = BitVector::random(340, &mut frame_rng(1, 0));
        for p in 212..340 {
            info.set(p, false);
        }
        let f = s.encode(&info).unwrap();
        assert_eq!(f.lanes[0], f.interleaved[0]);
        assert_eq!(f.lanes[1], f.interleaved[1]);
    }

    #[test]
    fn lane_xor_bypass_is_interleaved_codeword() {
        let s = Scheme::new(config(3, DAMPING_I3.to_vec())).unwrap();
        for fi in 0..20 {
            let f = s.encode(&BitVector::random(340, &mut frame_rng(2, fi))).unwrap();
            for j in 0..2 {
                let sj = f.lanes[j].xor(&f.lanes[2]);
                let zj = s.interleavers[j].invert_bits(&sj);
                assert!(s.cfg.code.is_codeword(&zj));
            }
        }
    }

    #[test]
    fn noiseless_round_trip_any_iterations() {
        for (it, damp) in [(2, vec![0.5, 1.0]), (3, DAMPING_I3.to_vec()), (6, DAMPING_I6.to_vec())] {
            let s = Scheme::new(config(it, damp)).unwrap();
            for fi in 0..10 {
                let info = BitVector::random(340, &mut frame_rng(3, fi));
                let f = s.encode(&info).unwrap();
                assert_eq!(s.decode(&noiseless(&f, 5.0)).unwrap().info, info, "I={it}");
            }
        }
    }

    #[test]
    fn first_iteration_input_is_plain_boxplus() {
        let s = Scheme::new(config(3, DAMPING_I3.to_vec())).unwrap();
        let info = BitVector::random(340, &mut frame_rng(4, 0));
        let f = s.encode(&info).unwrap();
        let sigma = snr_to_sigma(4.0);
        let mut rng = frame_rng(4, 1);
        let l: Vec<Vec<f64>> = f
            .lanes
            .iter()
            .map(|b| llr_from_awgn(&transmit_awgn(&modulate(b), sigma, &mut rng), sigma).into_inner())
            .collect();
        let out = cpmlcid_decode(&s, &l, true).unwrap();
        let first = out.trace[0].input_llr.as_ref().unwrap();
        for p in 0..128 {
            assert_eq!(first[p], boxplus(l[0][p], l[2][p]));
        }
        let lanes: Vec<usize> = out.trace.iter().map(|t| t.lane).collect();
        assert_eq!(lanes, vec![1, 2, 1]);
    }

    #[test]
    fn extrinsic_arithmetic() {
        let s_hat = BitVector::from_bits(&[0, 1]);
        let e = lane_extrinsic(0.3, &[2.0, -1.0], &s_hat);
        assert!((e[0] - 0.6).abs() < 1e-15 && (e[1] - 0.3).abs() < 1e-15);
        // flipping one decision flips exactly that entry's sign
        let e2 = lane_extrinsic(0.3, &[2.0, -1.0], &BitVector::from_bits(&[1, 1]));
        assert_eq!(e2[0], -e[0]);
        assert_eq!(e2[1], e[1]);
    }

    #[test]
    fn zero_damping_gives_zero_bypass() {
        let s = Scheme::new(config(3, vec![0.0, 0.0, 0.0])).unwrap();
        let info = BitVector::random(340, &mut frame_rng(5, 0));
        let f = s.encode(&info).unwrap();
        let out = s.decode(&noiseless(&f, 5.0)).unwrap().info;
        assert!(out.slice(212, 340).is_zero());
    }

    #[test]
    fn bypass_flag_uses_channel_llr() {
        let mut cfg = config(3, vec![0.0, 0.0, 0.0]);
        cfg.bypass_includes_channel_llr = true;
        let s = Scheme::new(cfg).unwrap();
        let info = BitVector::random(340, &mut frame_rng(6, 0));
        let f = s.encode(&info).unwrap();
        assert_eq!(s.decode(&noiseless(&f, 5.0)).unwrap().info, info);
    }

    #[test]
    fn unvisited_lane_falls_back_to_hard_decision() {
        let code = Arc::new(build_ebch(106).unwrap());
        let cfg = SchemeConfig::cp_mlc_id(code, FlippingSetSpec::order1(), 4, 1, vec![1.0]);
        let s = Scheme::new(cfg).unwrap();
        let info = BitVector::random(3 * 106 + 128, &mut frame_rng(7, 0));
        let f = s.encode(&info).unwrap();
        let out = s.decode(&noiseless(&f, 5.0)).unwrap();
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.info.slice(0, 106), info.slice(0, 106));
        assert_eq!(out.info.slice(106, 318), info.slice(106, 318));
    }

    #[test]
    fn several_codewords_per_lane() {
        let mut cfg = config(3, DAMPING_I3.to_vec()).with_lane_codewords(8);
        cfg.bypass_includes_channel_llr = true;
        let s = Scheme::new(cfg).unwrap();
        for fi in 0..5 {
            let info = BitVector::random(8 * 340, &mut frame_rng(9, fi));
            let f = s.encode(&info).unwrap();
            assert_eq!(f.lanes[0].len(), 1024);
            for c in 0..8 {
                let z = f.codewords[1].slice(c * 128, (c + 1) * 128);
                assert!(s.cfg.code.is_codeword(&z));
                assert_eq!(z.slice(0, 106), info.slice((8 + c) * 106, (9 + c) * 106));
            }
            assert_eq!(s.decode(&noiseless(&f, 5.0)).unwrap().info, info);
        }
    }

    #[test]
    fn interleaved_domain_consistency() {
        // Any lane permutation must be invisible on noiseless input.
        let mut cfg = config(3, DAMPING_I3.to_vec());
        cfg.interleavers = vec![
            InterleaverSpec::RandomInvolution { size: 8, seed: 1 },
            InterleaverSpec::digit_swap(8),
            InterleaverSpec::RandomInvolution { size: 128, seed: 2 },
        ];
        let s = Scheme::new(cfg).unwrap();
        let info = BitVector::random(340, &mut frame_rng(8, 0));
        let f = s.encode(&info).unwrap();
        assert_eq!(s.decode(&noiseless(&f, 5.0)).unwrap().info, info);
    }
}
