//! Circuit-to-time-dependent-Hamiltonian reduction.
//!
//! Two passes. First, a routing pass turns an arbitrary 1-/2-qubit circuit
//! into a nearest-neighbor one: before each original gate, adjacent swaps
//! bring its wires together and the swaps are never undone, so the output
//! circuit computes the original circuit up to a recorded wire permutation.
//! Every stage is padded with identity gates to exactly `n-1` routing gates
//! plus the translated gate, so stage boundaries sit at multiples of `n`.
//!
//! Second, each gate `U_i` of the localized circuit becomes one unit-length
//! segment of a piecewise-constant Hamiltonian with generator
//! `G_i := i log U_i` (principal branch), so that `e^{-iG_i} = U_i` under
//! the uniform `e^{-iHt}` convention. Eigenphases of `G_i` lie in (-π, π],
//! with the -1 eigenvalue tie-broken to +π, hence `‖G_i‖ ≤ π`.

use crate::error::{Error, Result};
use crate::feynman::{apply_gate, Gate, GateCircuit, GateWires};
use crate::linalg::{self, CMatrix};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// A nearest-neighbor circuit equivalent to a base circuit up to a wire
/// permutation.
#[derive(Debug, Clone)]
pub struct GeomLocalCircuit {
    /// The localized circuit; every gate touches one wire or two adjacent
    /// wires.
    pub circuit: GateCircuit,
    /// `wire_permutation[q]` is the physical position holding logical wire
    /// `q` after the circuit has run.
    pub wire_permutation: Vec<usize>,
    /// When built from an iterated block: the cumulative permutation after
    /// each block boundary (entry `k-1` is the permutation after `k`
    /// blocks).
    pub block_permutations: Vec<Vec<usize>>,
}

impl GeomLocalCircuit {
    /// Permute a statevector's wire labels: amplitude of basis `b` moves to
    /// the basis state whose bit `perm[q]` equals bit `q` of `b`.
    pub fn permute_state(state: &[Complex64], perm: &[usize]) -> Vec<Complex64> {
        let n = perm.len();
        assert_eq!(state.len(), 1 << n);
        let mut out = vec![linalg::ZERO; state.len()];
        for (b, amp) in state.iter().enumerate() {
            let mut target = 0usize;
            for (q, &pos) in perm.iter().enumerate() {
                if b >> q & 1 == 1 {
                    target |= 1 << pos;
                }
            }
            out[target] = *amp;
        }
        out
    }
}

/// Localize a circuit: route every gate onto adjacent wires, padding each
/// stage to exactly `n-1` routing gates plus the translated gate.
pub fn to_geometrically_local(circuit: &GateCircuit) -> GeomLocalCircuit {
    localize(circuit, None)
}

/// Localize `blocks` concatenated copies of `block`, recording the
/// cumulative wire permutation at every block boundary.
pub fn to_geometrically_local_iterated(block: &GateCircuit, blocks: usize) -> GeomLocalCircuit {
    localize(&block.repeat(blocks), Some(block.len()))
}

fn localize(circuit: &GateCircuit, block_gates: Option<usize>) -> GeomLocalCircuit {
    let n = circuit.qubits();
    let mut pos: Vec<usize> = (0..n).collect(); // logical -> physical
    let mut at: Vec<usize> = (0..n).collect(); // physical -> logical
    let mut gates: Vec<Gate> = Vec::with_capacity(circuit.len() * n.max(1));
    let mut block_permutations = Vec::new();

    for (gidx, gate) in circuit.gates().iter().enumerate() {
        let mut stage: Vec<Gate> = Vec::with_capacity(n);
        let mapped = match gate.wires {
            GateWires::One(w) => {
                let mut g = gate.clone();
                g.wires = GateWires::One(pos[w]);
                g
            }
            GateWires::Two(a, b) => {
                // Walk the lower-positioned wire up until the two are
                // adjacent; the swaps stay in place afterwards.
                let (mut lo, hi) = if pos[a] < pos[b] {
                    (pos[a], pos[b])
                } else {
                    (pos[b], pos[a])
                };
                while lo + 1 < hi {
                    stage.push(Gate::swap(lo, lo + 1));
                    let (qa, qb) = (at[lo], at[lo + 1]);
                    at.swap(lo, lo + 1);
                    pos[qa] = lo + 1;
                    pos[qb] = lo;
                    lo += 1;
                }
                let mut g = gate.clone();
                g.wires = GateWires::Two(pos[a], pos[b]);
                g
            }
        };
        // Pad the routing segment to exactly n-1 gates.
        while stage.len() < n - 1 {
            stage.push(Gate::identity(0));
        }
        debug_assert_eq!(stage.len(), n - 1);
        stage.push(mapped);
        gates.extend(stage);

        if let Some(bg) = block_gates {
            if bg > 0 && (gidx + 1) % bg == 0 {
                block_permutations.push(pos.clone());
            }
        }
    }

    let localized = GateCircuit::new(n, gates).expect("localized gates stay in range");
    GeomLocalCircuit {
        circuit: localized,
        wire_permutation: pos,
        block_permutations,
    }
}

/// One unit-time segment: a gate, its principal-branch eigensystem, and the
/// phases of its generator.
#[derive(Debug, Clone)]
pub struct PiecewiseSegment {
    pub wires: GateWires,
    unitary: CMatrix,
    /// Common eigenbasis of the gate and its generator.
    basis: CMatrix,
    /// Generator eigenphases θ ∈ (-π, π] with `e^{-iθ}` the gate eigenvalue.
    phases: Vec<f64>,
}

impl PiecewiseSegment {
    /// The Hermitian generator `G` on the segment's wires, `e^{-iG} = U`.
    pub fn generator(&self) -> CMatrix {
        let d = self.basis.nrows();
        let diag = CMatrix::from_fn(d, d, |r, c| {
            if r == c {
                Complex64::new(self.phases[r], 0.0)
            } else {
                linalg::ZERO
            }
        });
        &self.basis * diag * self.basis.adjoint()
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.unitary
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// `e^{-iGτ}` as a dense matrix on the segment's wires.
    pub fn partial_unitary(&self, tau: f64) -> CMatrix {
        let d = self.basis.nrows();
        let diag = CMatrix::from_fn(d, d, |r, c| {
            if r == c {
                Complex64::from_polar(1.0, -self.phases[r] * tau)
            } else {
                linalg::ZERO
            }
        });
        &self.basis * diag * self.basis.adjoint()
    }
}

/// Piecewise-constant Hamiltonian: segment `i` (unit duration) carries the
/// generator of gate `U_i`.
#[derive(Debug, Clone)]
pub struct PiecewiseHamiltonian {
    qubits: usize,
    segments: Vec<PiecewiseSegment>,
}

#[derive(Debug, Serialize)]
pub struct PiecewiseExport {
    pub qubits: usize,
    pub total_time: usize,
    pub segments: Vec<SegmentExport>,
}

#[derive(Debug, Serialize)]
pub struct SegmentExport {
    pub wires: Vec<usize>,
    /// Row-major generator entries as `[re, im]` pairs.
    pub generator: Vec<Vec<[f64; 2]>>,
}

const ROUNDTRIP_TOL: f64 = 1e-10;

/// Turn a circuit into its piecewise-constant Hamiltonian.
pub fn to_piecewise(circuit: &GateCircuit) -> Result<PiecewiseHamiltonian> {
    let mut segments = Vec::with_capacity(circuit.len());
    for (idx, gate) in circuit.gates().iter().enumerate() {
        let u = gate.matrix().clone();
        let d = u.nrows();
        let dev = (u.adjoint() * &u - CMatrix::identity(d, d)).norm();
        if dev > 1e-10 {
            return Err(Error::domain(format!(
                "gate {idx} is not unitary (deviation {dev:.2e})"
            )));
        }
        let (values, basis) = linalg::unitary_eigen(&u);
        let phases: Vec<f64> = values
            .iter()
            .map(|lambda| {
                // e^{-iθ} = λ, principal θ ∈ (-π, π]; λ = -1 maps to +π.
                let theta = -lambda.arg();
                if theta <= -PI + 1e-12 {
                    PI
                } else {
                    theta
                }
            })
            .collect();
        let segment = PiecewiseSegment {
            wires: gate.wires,
            unitary: u,
            basis,
            phases,
        };
        let residual = (segment.partial_unitary(1.0) - segment.unitary()).norm();
        if residual > ROUNDTRIP_TOL {
            return Err(Error::internal(format!(
                "generator round-trip residual {residual:.2e} on gate {idx}"
            )));
        }
        segments.push(segment);
    }
    Ok(PiecewiseHamiltonian {
        qubits: circuit.qubits(),
        segments,
    })
}

impl PiecewiseHamiltonian {
    pub fn qubits(&self) -> usize {
        self.qubits
    }

    /// Total evolution time = number of segments.
    pub fn total_time(&self) -> usize {
        self.segments.len()
    }

    pub fn segments(&self) -> &[PiecewiseSegment] {
        &self.segments
    }

    /// Evolve `input` to time `t ≤ total_time`: whole segments apply their
    /// gate exactly, the final fractional segment applies `e^{-iGτ}`.
    pub fn evolve(&self, input: &[Complex64], t: f64) -> Result<Vec<Complex64>> {
        if !t.is_finite() || t < 0.0 || t > self.segments.len() as f64 {
            return Err(Error::domain(format!(
                "time {t} outside [0, {}]",
                self.segments.len()
            )));
        }
        if input.len() != 1 << self.qubits {
            return Err(Error::domain(format!(
                "state dimension {} does not match {} qubits",
                input.len(),
                self.qubits
            )));
        }
        let norm_in: f64 = input.iter().map(|z| z.norm_sqr()).sum();
        let whole = t.floor() as usize;
        let tau = t - whole as f64;
        let mut state = input.to_vec();
        for segment in &self.segments[..whole] {
            let gate = Gate::new(segment.wires, segment.unitary.clone())?;
            apply_gate(&mut state, &gate);
        }
        if tau > 0.0 {
            let partial = Gate::new(segment_at(&self.segments, whole).wires, self.segments[whole].partial_unitary(tau))?;
            apply_gate(&mut state, &partial);
        }
        let norm_out: f64 = state.iter().map(|z| z.norm_sqr()).sum();
        if (norm_out - norm_in).abs() > 1e-9 {
            return Err(Error::internal(format!(
                "piecewise evolution drifted the norm by {:e}",
                norm_out - norm_in
            )));
        }
        Ok(state)
    }

    pub fn export(&self) -> PiecewiseExport {
        PiecewiseExport {
            qubits: self.qubits,
            total_time: self.total_time(),
            segments: self
                .segments
                .iter()
                .map(|s| {
                    let g = s.generator();
                    SegmentExport {
                        wires: s.wires.as_vec(),
                        generator: (0..g.nrows())
                            .map(|r| (0..g.ncols()).map(|c| [g[(r, c)].re, g[(r, c)].im]).collect())
                            .collect(),
                    }
                })
                .collect(),
        }
    }
}

fn segment_at(segments: &[PiecewiseSegment], idx: usize) -> &PiecewiseSegment {
    &segments[idx]
}
