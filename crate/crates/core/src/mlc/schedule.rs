//! Message order of the iterative decoder on its factor graph, and the
//! BSC erasure analysis behind the interleaver design.

use std::fmt;

/// One decoder iteration expressed as variable/check node messages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleStep {
    pub iteration: usize,
    /// 1-based coded lane visited.
    pub lane: usize,
    pub messages: Vec<String>,
}

impl fmt::Display for ScheduleStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.iteration, self.lane, self.messages.join(" -> "))
    }
}

/// Variable nodes B_1..B_d (lanes) and S_1..S_{d-1} (coded words); check
/// nodes delta_j (XOR) and delta_H_j (component parity checks). phi is a
/// variable-to-check message, psi check-to-variable. The first iteration
/// starts at the component decoder; later ones first pull the bypassed
/// node's belief through the lane's XOR check.
pub fn message_schedule(d: usize, iterations: usize) -> Vec<ScheduleStep> {
    assert!(d >= 2 && iterations >= 1);
    (1..=iterations)
        .map(|i| {
            let j = (i - 1) % (d - 1) + 1;
            let mut messages = Vec::with_capacity(6);
            if i > 1 {
                messages.push(format!("phi(B_{d},delta_{j})[{i}]"));
                messages.push(format!("psi(delta_{j},S_{j})[{i}]"));
            }
            messages.push(format!("phi(S_{j},delta_H{j})[{i}]"));
            messages.push(format!("psi(delta_H{j},S_{j})[{i}]"));
            messages.push(format!("phi(S_{j},delta_{j})[{i}]"));
            messages.push(format!("psi(delta_{j},B_{d})[{i}]"));
            ScheduleStep {
                iteration: i,
                lane: j,
                messages,
            }
        })
        .collect()
}

/// Conditional erasure probabilities of the SDD input on a BSC(p) with
/// undamped extrinsics: (P(erasure | extrinsic wrong), P(erasure |
/// extrinsic right)) = ((1-p)^2 + p^2, 2p(1-p)).
pub fn bsc_erasure_probabilities(p: f64) -> (f64, f64) {
    let q = 1.0 - p;
    (q * q + p * p, 2.0 * p * q)
}
