//! Channel-polarized multilevel coding: one coded lane XOR-coupled to
//! d - 1 uncoded lanes, decoded in a single stage.

use crate::bits::BitVector;
use crate::error::Result;
use crate::mlc::boxplus::{boxplus, boxplus_reduce};
use crate::mlc::scheme::{Frame, Scheme};

/// Information layout: z'_1 (k bits) then z_2..z_d (n bits each).
/// Transmits b_1 = z_1 xor z_2 xor ... xor z_d and b_j = z_j for j >= 2.
pub fn cpmlc_encode(scheme: &Scheme, info: &BitVector) -> Result<Frame> {
    scheme.check_info(info)?;
    let (n, k, d) = (scheme.cfg.n(), scheme.cfg.k(), scheme.cfg.d);
    let mut codewords = vec![scheme.cfg.code.encode(&info.slice(0, k))?];
    for j in 1..d {
        codewords.push(info.slice(k + (j - 1) * n, k + j * n));
    }
    let mut lanes = codewords.clone();
    for z in &codewords[1..] {
        lanes[0].xor_assign(z);
    }
    Ok(Frame {
        info: info.clone(),
        interleaved: codewords.clone(),
        codewords,
        lanes,
    })
}

/// SDD on l_1 ⊞ ... ⊞ l_d, then each uncoded lane from
/// γ_j = l_j + (-1)^{ẑ_1} (⊞ over all lanes but j).
pub fn cpmlc_decode<L: AsRef<[f64]>>(scheme: &Scheme, lanes: &[L]) -> Result<BitVector> {
    scheme.check_lanes(lanes)?;
    let (n, d) = (scheme.cfg.n(), scheme.cfg.d);
    let l: Vec<&[f64]> = lanes.iter().map(|x| x.as_ref()).collect();

    let mut column = vec![0.0; d];
    let lambda: Vec<f64> = (0..n)
        .map(|p| {
            for (c, lane) in column.iter_mut().zip(&l) {
                *c = lane[p];
            }
            boxplus_reduce(&column).expect("d >= 2")
        })
        .collect();
    let z1 = scheme.osd().decode(&lambda)?;

    let mut parts = vec![z1.info];
    for j in 1..d {
        let zj = BitVector::from_bools((0..n).map(|p| {
            let others = (0..d)
                .filter(|&i| i != j)
                .map(|i| l[i][p])
                .reduce(boxplus)
                .expect("d >= 2");
            let sign = if z1.codeword.get(p) { -1.0 } else { 1.0 };
            l[j][p] + sign * others < 0.0
        }));
        parts.push(zj);
    }
    Ok(BitVector::concat(&parts))
}
