use std::collections::VecDeque;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::lattice::{LatticeModel, ModelKind};
use crate::quantum::{Control, GateOp, StateVector};

/// Gate network that copies one encoded field into every direction subspace.
///
/// Gates act on a local register of `n_q` qubits (qubit 0 = least significant
/// direction bit); callers shift them onto the full layout. Direction `alpha`
/// ends up on basis state `subspace_map[alpha]` with real amplitude
/// `2^(-depth[alpha] / 2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DuplicationPlan {
    n_q: usize,
    gates: Vec<GateOp>,
    subspace_map: Vec<usize>,
    depth: Vec<u32>,
}

impl DuplicationPlan {
    pub fn n_q(&self) -> usize {
        self.n_q
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn subspace_map(&self) -> &[usize] {
        &self.subspace_map
    }

    pub fn subspace(&self, alpha: usize) -> usize {
        self.subspace_map[alpha]
    }

    /// Hadamard depth `h_alpha`.
    pub fn depth(&self, alpha: usize) -> u32 {
        self.depth[alpha]
    }

    /// Amplitude factor `1 / C_alpha` left on the subspace of `alpha`.
    pub fn coefficient(&self, alpha: usize) -> f64 {
        1.0 / self.scale(alpha)
    }

    /// `C_alpha = sqrt(2^h_alpha)`.
    pub fn scale(&self, alpha: usize) -> f64 {
        let h = self.depth[alpha];
        let base = (1u64 << (h / 2)) as f64;
        if h % 2 == 1 {
            base * std::f64::consts::SQRT_2
        } else {
            base
        }
    }

    /// Checks the budget `sum 2^-h = 1`, injectivity of the map, and that the
    /// gate sequence really produces the advertised amplitudes.
    pub fn validate(&self) -> Result<()> {
        let budget: f64 = self.depth.iter().map(|&h| 0.5f64.powi(h as i32)).sum();
        if budget != 1.0 {
            return Err(Error::InvalidParameter(format!(
                "duplication budget sums to {budget}"
            )));
        }
        let dim = 1usize << self.n_q;
        let mut seen = vec![false; dim];
        for &s in &self.subspace_map {
            if s >= dim || seen[s] {
                return Err(Error::InvalidParameter(format!(
                    "subspace {s} is reused or out of range"
                )));
            }
            seen[s] = true;
        }
        let mut psi = StateVector::zero(self.n_q)?;
        psi.apply_all(&self.gates)?;
        let mut expected = vec![0.0; dim];
        for (alpha, &s) in self.subspace_map.iter().enumerate() {
            expected[s] = self.coefficient(alpha);
        }
        for (s, (a, e)) in psi.amplitudes().iter().zip(&expected).enumerate() {
            if (a.re - e).abs() > 1e-14 || a.im.abs() > 1e-14 {
                return Err(Error::InvalidParameter(format!(
                    "duplication leaves {a} on subspace {s}, expected {e}"
                )));
            }
        }
        Ok(())
    }
}

/// Builds the duplication network for `model`.
pub fn build_duplication(model: &LatticeModel) -> DuplicationPlan {
    let plan = match model.kind() {
        ModelKind::D2Q9 => d2q9_plan(),
        ModelKind::D3Q27 => d3q27_plan(),
    };
    debug_assert!(plan.validate().is_ok());
    plan
}

fn h(target: usize) -> GateOp {
    GateOp::Hadamard { target }
}

fn mch(controls: &[(usize, bool)], target: usize) -> GateOp {
    GateOp::MultiControlledHadamard {
        controls: controls
            .iter()
            .map(|&(qubit, value)| Control { qubit, value })
            .collect(),
        target,
    }
}

fn mcx(controls: &[(usize, bool)], target: usize) -> GateOp {
    GateOp::MultiControlledX {
        controls: controls
            .iter()
            .map(|&(qubit, value)| Control { qubit, value })
            .collect(),
        target,
    }
}

/// Rest on `|0000>` at 1/2, axis directions at 1/(2 sqrt 2), diagonals at 1/4.
fn d2q9_plan() -> DuplicationPlan {
    let gates = vec![
        h(0),
        h(1),
        // |01> and |10> each split into the q2 = 1 half
        mch(&[(0, true), (1, false)], 2),
        mch(&[(0, false), (1, true)], 2),
        // |11> splits into q3, and the copy moves to |1000>
        mch(&[(0, true), (1, true)], 3),
        mcx(&[(3, true), (0, true)], 1),
        mcx(&[(3, true)], 0),
        // the two q2 = 1 states split once more into the diagonal block 01xx
        mcx(&[(2, true), (1, false)], 0),
        mch(&[(2, true), (1, false)], 0),
        mch(&[(2, true), (1, true)], 0),
    ];
    DuplicationPlan {
        n_q: 4,
        gates,
        subspace_map: vec![0, 1, 2, 3, 8, 4, 5, 6, 7],
        depth: vec![2, 3, 3, 3, 3, 4, 4, 4, 4],
    }
}

/// Rest at depth 1, faces 4, edges 7, corners 8.
fn d3q27_plan() -> DuplicationPlan {
    static PLAN: OnceLock<DuplicationPlan> = OnceLock::new();
    PLAN.get_or_init(d3q27_search).clone()
}

fn d3q27_search() -> DuplicationPlan {
    let mut depth = vec![1u32];
    depth.extend([4; 6]);
    depth.extend([7; 12]);
    depth.extend([8; 8]);
    greedy_tree(5, &depth).expect("D3Q27 depth profile fits five qubits")
}

/// Prefix-tree duplication: nodes are expanded breadth first, a node becomes a
/// leaf when a direction still needs its depth, and otherwise splits with a
/// fully controlled Hadamard onto a free neighbouring basis state (preceded by
/// a fully controlled X when the split bit is set, so both halves stay
/// positive). Neighbour choices are backtracked until all leaves fit. Leaves of
/// equal depth are handed to directions in index order.
fn greedy_tree(n_q: usize, depth: &[u32]) -> Option<DuplicationPlan> {
    struct Search<'a> {
        n_q: usize,
        occupied: Vec<bool>,
        pending: Vec<Vec<usize>>,
        subspace_map: Vec<usize>,
        gates: Vec<GateOp>,
        depth: &'a [u32],
    }

    impl Search<'_> {
        fn expand(&mut self, queue: &mut VecDeque<(usize, u32)>) -> bool {
            let Some((state, d)) = queue.pop_front() else {
                return self.pending.iter().all(|p| p.is_empty());
            };
            if let Some(alpha) = self.pending[d as usize].pop() {
                self.subspace_map[alpha] = state;
                if self.expand(queue) {
                    return true;
                }
                self.pending[d as usize].push(alpha);
                queue.push_front((state, d));
                return false;
            }
            // prune: no direction wants a leaf at this depth or deeper
            if self.pending[d as usize + 1..].iter().all(|p| p.is_empty()) {
                queue.push_front((state, d));
                return false;
            }
            for bit in 0..self.n_q {
                let partner = state ^ (1 << bit);
                if self.occupied[partner] {
                    continue;
                }
                let controls: Vec<(usize, bool)> = (0..self.n_q)
                    .filter(|&j| j != bit)
                    .map(|j| (j, state & (1 << j) != 0))
                    .collect();
                let mark = self.gates.len();
                let (low, high) = if state & (1 << bit) != 0 {
                    self.gates.push(mcx(&controls, bit));
                    (partner, state)
                } else {
                    (state, partner)
                };
                self.gates.push(mch(&controls, bit));
                self.occupied[partner] = true;
                queue.push_back((low, d + 1));
                queue.push_back((high, d + 1));
                if self.expand(queue) {
                    return true;
                }
                queue.pop_back();
                queue.pop_back();
                self.occupied[partner] = false;
                self.gates.truncate(mark);
            }
            queue.push_front((state, d));
            false
        }
    }

    let dim = 1usize << n_q;
    let max_depth = *depth.iter().max()? as usize;
    let mut pending: Vec<Vec<usize>> = vec![Vec::new(); max_depth + 2];
    for (alpha, &h) in depth.iter().enumerate() {
        pending[h as usize].push(alpha);
    }
    for p in &mut pending {
        p.reverse();
    }
    let mut occupied = vec![false; dim];
    occupied[0] = true;
    let mut search = Search {
        n_q,
        occupied,
        pending,
        subspace_map: vec![usize::MAX; depth.len()],
        gates: Vec::new(),
        depth,
    };
    let mut queue = VecDeque::from([(0usize, 0u32)]);
    if !search.expand(&mut queue) {
        return None;
    }
    Some(DuplicationPlan {
        n_q,
        gates: search.gates,
        subspace_map: search.subspace_map,
        depth: search.depth.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d2q9_coefficients() {
        let p = build_duplication(&LatticeModel::d2q9());
        p.validate().unwrap();
        let mut c: Vec<f64> = (0..9).map(|a| p.coefficient(a)).collect();
        c.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let s = 0.5 / std::f64::consts::SQRT_2;
        let expected = [0.5, s, s, s, s, 0.25, 0.25, 0.25, 0.25];
        for (a, e) in c.iter().zip(expected) {
            assert!((a - e).abs() < 1e-15);
        }
        let sq: f64 = c.iter().map(|x| x * x).sum();
        assert!((sq - 1.0).abs() < 1e-15);
        assert_eq!(p.scale(0), 2.0);
    }

    #[test]
    fn d3q27_scales() {
        let m = LatticeModel::d3q27();
        let p = build_duplication(&m);
        p.validate().unwrap();
        assert_eq!(p.scale(0), std::f64::consts::SQRT_2);
        for a in 1..27 {
            let norm2: i32 = m.velocity(a).iter().map(|c| c * c).sum();
            let expected = match norm2 {
                1 => 4.0,
                2 => 8.0 * std::f64::consts::SQRT_2,
                _ => 16.0,
            };
            assert_eq!(p.scale(a), expected, "direction {a}");
        }
        // headroom at rest
        for a in 0..27 {
            assert!(p.scale(a) * m.weight(a) <= 1.0);
        }
    }

    #[test]
    fn greedy_rejects_impossible_profiles() {
        // three leaves at depth 1 do not fit a binary tree
        assert!(greedy_tree(2, &[1, 1, 1]).is_none());
        let p = greedy_tree(2, &[1, 2, 2]).unwrap();
        p.validate().unwrap();
    }
}
