//! Johnson-graph clock: a Hamiltonian path through `J_{n,k}` encodes time
//! indices into constant-weight bitstrings, and each time transition is a
//! `(k+1)`-local tensor product of single-qubit factors.
//!
//! The path is the revolving-door Gray code for k-combinations: consecutive
//! subsets always exchange exactly one element, which is precisely
//! adjacency in the Johnson graph. The code order is defined by the
//! recursion `Γ(n,k) = Γ(n-1,k) ++ [S ∪ {n} for S in reverse(Γ(n-1,k-1))]`,
//! which allows O(n) random access by unranking; small paths are cached.

use crate::error::{Error, Result};
use serde::Serialize;

pub const MAX_QUBITS: u32 = 24;

/// Paths are materialized at construction up to this many qubits and
/// unranked on demand beyond it.
const CACHE_QUBIT_LIMIT: u32 = 16;

/// Binomial coefficient; exact for n ≤ 64 in u64 at the sizes used here.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

/// Smallest `n` with `C(n, c-1) ≥ t_bound`: the qubit count needed for a
/// clock of locality `c` covering `t_bound` time steps.
pub fn min_clock_qubits(c: u32, t_bound: u64) -> Result<u32> {
    if c < 2 {
        return Err(Error::domain(format!("locality c={c} must be ≥ 2")));
    }
    if t_bound < 1 {
        return Err(Error::domain("time bound must be ≥ 1".to_string()));
    }
    let k = (c - 1) as u64;
    let mut n = k;
    loop {
        if binomial(n, k) >= t_bound {
            return Ok(n as u32);
        }
        n += 1;
    }
}

/// A clock over `n` qubits whose time states are the weight-`k` subsets of
/// `[n]` visited along a revolving-door Hamiltonian path of `J_{n,k}`.
///
/// Positions are 0-based: `subset_at(0)` is the first path vertex, and the
/// transition with index `j` sends position `j` to position `j+1`.
#[derive(Debug, Clone)]
pub struct JohnsonClock {
    qubits: u32,
    weight: u32,
    path_len: u64,
    cache: Option<Vec<u32>>,
}

/// Result of applying a transition operator to a basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransitionOutcome {
    /// The basis state maps to another basis state.
    Mapped(u32),
    /// The state is annihilated by one of the tensor factors.
    Annihilated,
}

#[derive(Debug, Serialize)]
pub struct ClockExport {
    pub qubits: u32,
    pub weight: u32,
    pub path: Vec<String>,
}

impl JohnsonClock {
    pub fn new(qubits: u32, weight: u32) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&qubits) {
            return Err(Error::domain(format!(
                "qubit count {qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        if weight < 1 || weight > qubits {
            return Err(Error::domain(format!(
                "weight {weight} outside 1..={qubits}"
            )));
        }
        let path_len = binomial(qubits as u64, weight as u64);
        let cache = if qubits <= CACHE_QUBIT_LIMIT {
            Some(
                (0..path_len)
                    .map(|r| unrank(qubits, weight, r))
                    .collect::<Vec<u32>>(),
            )
        } else {
            None
        };
        Ok(JohnsonClock {
            qubits,
            weight,
            path_len,
            cache,
        })
    }

    pub fn qubits(&self) -> u32 {
        self.qubits
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    /// Number of path vertices, `C(n, k)`.
    pub fn path_len(&self) -> u64 {
        self.path_len
    }

    /// Bitmask of the subset at 0-based path position `j` (bit `i-1` set
    /// means element `i` is in the subset, so qubit `i` is |1>).
    pub fn subset_at(&self, j: u64) -> Result<u32> {
        if j >= self.path_len {
            return Err(Error::domain(format!(
                "path position {j} outside 0..{}",
                self.path_len
            )));
        }
        Ok(match &self.cache {
            Some(cache) => cache[j as usize],
            None => unrank(self.qubits, self.weight, j),
        })
    }

    /// The n-bit indicator string of position `j`: character `i` (from the
    /// left) is qubit `i+1`.
    pub fn encoding_bits(&self, j: u64) -> Result<String> {
        let mask = self.subset_at(j)?;
        Ok((0..self.qubits)
            .map(|i| if mask >> i & 1 == 1 { '1' } else { '0' })
            .collect())
    }

    /// Apply the transition operator for index `j` (couples positions `j`
    /// and `j+1`) to an arbitrary n-qubit basis state, following the
    /// per-qubit tensor factors: |1><1| on the shared support, |1><0| on
    /// entering elements, |0><1| on leaving elements, identity elsewhere.
    pub fn apply_transition(&self, j: u64, state: u32) -> Result<TransitionOutcome> {
        if j + 1 >= self.path_len {
            return Err(Error::domain(format!(
                "transition index {j} outside 0..{}",
                self.path_len - 1
            )));
        }
        if state >> self.qubits != 0 {
            return Err(Error::domain(format!(
                "basis state {state:#x} uses more than {} qubits",
                self.qubits
            )));
        }
        let from = self.subset_at(j)?;
        let to = self.subset_at(j + 1)?;
        Ok(transition_on_basis(from, to, state))
    }

    pub fn path_iter(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.path_len).map(move |j| self.subset_at(j).expect("in range"))
    }

    pub fn export(&self) -> ClockExport {
        ClockExport {
            qubits: self.qubits,
            weight: self.weight,
            path: (0..self.path_len)
                .map(|j| self.encoding_bits(j).expect("in range"))
                .collect(),
        }
    }
}

/// Action of the tensor-factor operator sending subset `from` to subset
/// `to` on basis state `state`. Exposed for dense materialization.
pub fn transition_on_basis(from: u32, to: u32, state: u32) -> TransitionOutcome {
    let stay = from & to; // factors |1><1|
    let enter = to & !from; // factors |1><0|
    let leave = from & !to; // factors |0><1|
    if state & stay != stay || state & enter != 0 || state & leave != leave {
        TransitionOutcome::Annihilated
    } else {
        TransitionOutcome::Mapped((state | enter) & !leave)
    }
}

/// Position `r` (0-based) of the revolving-door order on k-subsets of [n],
/// as a bitmask. O(n) per call.
fn unrank(n: u32, k: u32, r: u64) -> u32 {
    debug_assert!(r < binomial(n as u64, k as u64));
    if k == 0 {
        return 0;
    }
    if k == n {
        return (1u32 << n) - 1;
    }
    let without_last = binomial(n as u64 - 1, k as u64);
    if r < without_last {
        unrank(n - 1, k, r)
    } else {
        let total = binomial(n as u64, k as u64);
        unrank(n - 1, k - 1, total - 1 - r) | 1 << (n - 1)
    }
}
