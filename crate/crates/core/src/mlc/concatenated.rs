//! Independent lanes: the concatenated baseline and uncoded BPSK.

use crate::bits::BitVector;
use crate::channel::hard_decision;
use crate::error::Result;
use crate::mlc::scheme::{Frame, Scheme};

fn plain_frame(info: &BitVector, codewords: Vec<BitVector>) -> Frame {
    Frame {
        info: info.clone(),
        interleaved: codewords.clone(),
        lanes: codewords.clone(),
        codewords,
    }
}

pub fn concatenated_encode(scheme: &Scheme, info: &BitVector) -> Result<Frame> {
    scheme.check_info(info)?;
    let k = scheme.cfg.k();
    let codewords = (0..scheme.cfg.d)
        .map(|j| scheme.cfg.code.encode(&info.slice(j * k, (j + 1) * k)))
        .collect::<Result<Vec<_>>>()?;
    Ok(plain_frame(info, codewords))
}

/// Each lane decoded on its own; one SDD per lane.
pub fn concatenated_decode<L: AsRef<[f64]>>(scheme: &Scheme, lanes: &[L]) -> Result<BitVector> {
    scheme.check_lanes(lanes)?;
    let osd = scheme.osd();
    let parts = lanes
        .iter()
        .map(|l| osd.decode(l.as_ref()).map(|r| r.info))
        .collect::<Result<Vec<_>>>()?;
    Ok(BitVector::concat(&parts))
}

pub(crate) fn uncoded_encode(scheme: &Scheme, info: &BitVector) -> Result<Frame> {
    scheme.check_info(info)?;
    let n = scheme.cfg.n();
    let lanes = (0..scheme.cfg.d).map(|j| info.slice(j * n, (j + 1) * n)).collect();
    Ok(plain_frame(info, lanes))
}

pub(crate) fn uncoded_decode<L: AsRef<[f64]>>(scheme: &Scheme, lanes: &[L]) -> Result<BitVector> {
    scheme.check_lanes(lanes)?;
    let parts: Vec<BitVector> = lanes.iter().map(|l| hard_decision(l.as_ref())).collect();
    Ok(BitVector::concat(&parts))
}
