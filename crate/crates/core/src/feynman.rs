//! Circuit-to-time-independent-Hamiltonian reduction.
//!
//! A gate circuit `C = U_L ⋯ U_1` is coupled to a clock register through
//! `H = Σ_j U_j ⊗ |γ_j><γ_{j-1}| + h.c.`. Started from a history state
//! `|φ_0> ⊗ |γ_0>`, the dynamics are confined to the span of the history
//! states `|ψ_j> = (U_j ⋯ U_1 |φ_0>) ⊗ |γ_j>`, where they reduce to the
//! quantum walk on a line with `L+1` vertices. The restricted evolution is
//! therefore evaluated through the closed-form line propagator, while the
//! dense materialization exists for cross-checks.
//!
//! Two clock backends share one interface: the Johnson-graph clock (the
//! faithful local construction) and a one-hot clock whose register
//! dimension equals the number of time steps, which keeps dense
//! cross-checks small.

use crate::clock::{JohnsonClock, TransitionOutcome};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, HermitianEigen};
use crate::walk::LineWalk;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

pub const MAX_QUBITS: usize = 10;
/// Dense materialization cap (total Hilbert dimension).
pub const MAX_DENSE_DIM: usize = 4096;

const UNITARITY_TOL: f64 = 1e-12;

/// Wires a gate acts on. For two-qubit gates the matrix basis is
/// `|q_a q_b>` with the first wire as the high bit: index `2·q_a + q_b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateWires {
    One(usize),
    Two(usize, usize),
}

impl GateWires {
    pub fn arity_dim(&self) -> usize {
        match self {
            GateWires::One(_) => 2,
            GateWires::Two(_, _) => 4,
        }
    }

    pub fn as_vec(&self) -> Vec<usize> {
        match *self {
            GateWires::One(a) => vec![a],
            GateWires::Two(a, b) => vec![a, b],
        }
    }
}

/// A 1- or 2-qubit unitary with declared target wires.
#[derive(Debug, Clone)]
pub struct Gate {
    pub wires: GateWires,
    matrix: CMatrix,
    pub name: Option<String>,
}

impl Gate {
    pub fn new(wires: GateWires, matrix: CMatrix) -> Result<Self> {
        let d = wires.arity_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::domain(format!(
                "gate matrix is {}x{}, expected {d}x{d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if let GateWires::Two(a, b) = wires {
            if a == b {
                return Err(Error::domain(format!(
                    "two-qubit gate wires must differ, got ({a}, {b})"
                )));
            }
        }
        let dev = (&matrix.adjoint() * &matrix - CMatrix::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
        if dev > UNITARITY_TOL {
            return Err(Error::domain(format!(
                "gate matrix is not unitary (deviation {dev:.2e})"
            )));
        }
        Ok(Gate {
            wires,
            matrix,
            name: None,
        })
    }

    fn named(wires: GateWires, matrix: CMatrix, name: &str) -> Self {
        let mut gate = Gate::new(wires, matrix).expect("builtin gates are unitary");
        gate.name = Some(name.to_string());
        gate
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn identity(wire: usize) -> Self {
        Gate::named(GateWires::One(wire), CMatrix::identity(2, 2), "I")
    }

    pub fn x(wire: usize) -> Self {
        let m = CMatrix::from_row_slice(2, 2, &[linalg::ZERO, linalg::ONE, linalg::ONE, linalg::ZERO]);
        Gate::named(GateWires::One(wire), m, "X")
    }

    pub fn hadamard(wire: usize) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(h, 0.0),
                Complex64::new(h, 0.0),
                Complex64::new(h, 0.0),
                Complex64::new(-h, 0.0),
            ],
        );
        Gate::named(GateWires::One(wire), m, "H")
    }

    pub fn t_gate(wire: usize) -> Self {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![
            linalg::ONE,
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4),
        ]));
        Gate::named(GateWires::One(wire), m, "T")
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = linalg::ONE;
        m[(1, 1)] = linalg::ONE;
        m[(2, 3)] = linalg::ONE;
        m[(3, 2)] = linalg::ONE;
        Gate::named(GateWires::Two(control, target), m, "CNOT")
    }

    pub fn swap(a: usize, b: usize) -> Self {
        let mut m = CMatrix::zeros(4, 4);
        m[(0, 0)] = linalg::ONE;
        m[(1, 2)] = linalg::ONE;
        m[(2, 1)] = linalg::ONE;
        m[(3, 3)] = linalg::ONE;
        Gate::named(GateWires::Two(a, b), m, "SWAP")
    }

    /// The same gate with the conjugate-transposed matrix.
    pub fn adjoint(&self) -> Gate {
        Gate {
            wires: self.wires,
            matrix: self.matrix.adjoint(),
            name: self.name.as_ref().map(|n| format!("{n}†")),
        }
    }
}

/// An ordered list of gates over `qubits ≤ 10` wires.
#[derive(Debug, Clone)]
pub struct GateCircuit {
    qubits: usize,
    gates: Vec<Gate>,
}

impl GateCircuit {
    pub fn new(qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if !(1..=MAX_QUBITS).contains(&qubits) {
            return Err(Error::domain(format!(
                "qubit count {qubits} outside 1..={MAX_QUBITS}"
            )));
        }
        for (idx, gate) in gates.iter().enumerate() {
            for w in gate.wires.as_vec() {
                if w >= qubits {
                    return Err(Error::domain(format!(
                        "gate {idx} targets wire {w}, but the circuit has {qubits} qubits"
                    )));
                }
            }
        }
        Ok(GateCircuit { qubits, gates })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn dim(&self) -> usize {
        1 << self.qubits
    }

    /// `|index>` as a statevector.
    pub fn basis_state(qubits: usize, index: u64) -> Vec<Complex64> {
        let mut state = vec![linalg::ZERO; 1 << qubits];
        state[index as usize] = linalg::ONE;
        state
    }

    /// Concatenate `times` copies of this circuit.
    pub fn repeat(&self, times: usize) -> GateCircuit {
        let mut gates = Vec::with_capacity(self.gates.len() * times);
        for _ in 0..times {
            gates.extend(self.gates.iter().cloned());
        }
        GateCircuit {
            qubits: self.qubits,
            gates,
        }
    }

    /// Apply gates with indices in `[from, to)` to `state` in place.
    pub fn apply_range(&self, state: &mut [Complex64], from: usize, to: usize) {
        assert!(from <= to && to <= self.gates.len());
        assert_eq!(state.len(), self.dim());
        for gate in &self.gates[from..to] {
            apply_gate(state, gate);
        }
    }

    pub fn apply(&self, state: &mut [Complex64]) {
        self.apply_range(state, 0, self.gates.len());
    }

    /// Dense unitary of the whole circuit (small circuits only).
    pub fn as_unitary(&self) -> CMatrix {
        let d = self.dim();
        let mut u = CMatrix::zeros(d, d);
        for col in 0..d {
            let mut state = GateCircuit::basis_state(self.qubits, col as u64);
            self.apply(&mut state);
            for row in 0..d {
                u[(row, col)] = state[row];
            }
        }
        u
    }

    /// Parse the JSON circuit format: either a bare list of gate objects or
    /// `{"qubits": n, "gates": [...]}`. Each gate object carries `"wires"`
    /// and a `"gate"` field that is a name (`X`, `H`, `CNOT`, `SWAP`, `T`,
    /// `I`) or a raw row-major matrix of `[re, im]` pairs.
    pub fn from_json(text: &str) -> Result<GateCircuit> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| Error::domain(format!("circuit JSON: {e}")))?;
        let (qubits, entries) = match &value {
            serde_json::Value::Array(list) => (None, list.as_slice()),
            serde_json::Value::Object(map) => {
                let qubits = map
                    .get("qubits")
                    .and_then(|v| v.as_u64())
                    .map(|n| n as usize);
                let gates = map
                    .get("gates")
                    .and_then(|v| v.as_array())
                    .ok_or_else(|| Error::domain("circuit JSON: missing \"gates\" list"))?;
                (qubits, gates.as_slice())
            }
            _ => return Err(Error::domain("circuit JSON: expected list or object")),
        };

        let mut gates = Vec::with_capacity(entries.len());
        let mut max_wire = 0usize;
        for (idx, entry) in entries.iter().enumerate() {
            let obj = entry
                .as_object()
                .ok_or_else(|| Error::domain(format!("gate {idx}: expected object")))?;
            let wires: Vec<usize> = obj
                .get("wires")
                .and_then(|v| v.as_array())
                .ok_or_else(|| Error::domain(format!("gate {idx}: missing \"wires\"")))?
                .iter()
                .map(|w| {
                    w.as_u64()
                        .map(|w| w as usize)
                        .ok_or_else(|| Error::domain(format!("gate {idx}: bad wire")))
                })
                .collect::<Result<_>>()?;
            for &w in &wires {
                max_wire = max_wire.max(w);
            }
            let spec = obj
                .get("gate")
                .or_else(|| obj.get("matrix"))
                .ok_or_else(|| Error::domain(format!("gate {idx}: missing \"gate\"")))?;
            let gate = match spec {
                serde_json::Value::String(name) => {
                    named_gate(name, &wires)
                        .ok_or_else(|| Error::domain(format!("gate {idx}: unknown gate {name:?} for {} wire(s)", wires.len())))?
                }
                serde_json::Value::Array(rows) => {
                    let matrix = parse_matrix(rows)
                        .map_err(|e| Error::domain(format!("gate {idx}: {e}")))?;
                    let gw = wires_from_list(&wires)
                        .ok_or_else(|| Error::domain(format!("gate {idx}: need 1 or 2 wires")))?;
                    Gate::new(gw, matrix)?
                }
                _ => return Err(Error::domain(format!("gate {idx}: bad \"gate\" field"))),
            };
            gates.push(gate);
        }
        let qubits = qubits.unwrap_or(max_wire + 1);
        GateCircuit::new(qubits, gates)
    }
}

fn wires_from_list(wires: &[usize]) -> Option<GateWires> {
    match wires {
        [a] => Some(GateWires::One(*a)),
        [a, b] => Some(GateWires::Two(*a, *b)),
        _ => None,
    }
}

fn named_gate(name: &str, wires: &[usize]) -> Option<Gate> {
    match (name.to_ascii_uppercase().as_str(), wires) {
        ("X", [w]) => Some(Gate::x(*w)),
        ("H", [w]) => Some(Gate::hadamard(*w)),
        ("T", [w]) => Some(Gate::t_gate(*w)),
        ("I", [w]) => Some(Gate::identity(*w)),
        ("CNOT", [c, t]) => Some(Gate::cnot(*c, *t)),
        ("SWAP", [a, b]) => Some(Gate::swap(*a, *b)),
        _ => None,
    }
}

fn parse_matrix(rows: &[serde_json::Value]) -> std::result::Result<CMatrix, String> {
    let d = rows.len();
    if d != 2 && d != 4 {
        return Err(format!("matrix must be 2x2 or 4x4, got {d} rows"));
    }
    let mut m = CMatrix::zeros(d, d);
    for (r, row) in rows.iter().enumerate() {
        let cols = row.as_array().ok_or("matrix row is not a list")?;
        if cols.len() != d {
            return Err(format!("row {r} has {} entries, expected {d}", cols.len()));
        }
        for (c, entry) in cols.iter().enumerate() {
            let pair = entry.as_array().ok_or("matrix entry must be [re, im]")?;
            if pair.len() != 2 {
                return Err("matrix entry must be [re, im]".to_string());
            }
            let re = pair[0].as_f64().ok_or("bad real part")?;
            let im = pair[1].as_f64().ok_or("bad imaginary part")?;
            m[(r, c)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

/// Apply one gate to a statevector in place.
pub fn apply_gate(state: &mut [Complex64], gate: &Gate) {
    let m = &gate.matrix;
    match gate.wires {
        GateWires::One(w) => {
            let bit = 1usize << w;
            for idx in 0..state.len() {
                if idx & bit == 0 {
                    let a = state[idx];
                    let b = state[idx | bit];
                    state[idx] = m[(0, 0)] * a + m[(0, 1)] * b;
                    state[idx | bit] = m[(1, 0)] * a + m[(1, 1)] * b;
                }
            }
        }
        GateWires::Two(wa, wb) => {
            let ba = 1usize << wa;
            let bb = 1usize << wb;
            for idx in 0..state.len() {
                if idx & ba == 0 && idx & bb == 0 {
                    let s = [state[idx], state[idx | bb], state[idx | ba], state[idx | ba | bb]];
                    for (i, &target) in [idx, idx | bb, idx | ba, idx | ba | bb].iter().enumerate() {
                        state[target] =
                            m[(i, 0)] * s[0] + m[(i, 1)] * s[1] + m[(i, 2)] * s[2] + m[(i, 3)] * s[3];
                    }
                }
            }
        }
    }
}

/// Embed a gate into the full `2^n`-dimensional unitary.
pub fn embed_gate(gate: &Gate, qubits: usize) -> CMatrix {
    let d = 1usize << qubits;
    let mut u = CMatrix::zeros(d, d);
    for col in 0..d {
        let mut state = vec![linalg::ZERO; d];
        state[col] = linalg::ONE;
        apply_gate(&mut state, gate);
        for row in 0..d {
            u[(row, col)] = state[row];
        }
    }
    u
}

/// Common interface of the clock register backends.
pub trait ClockBackend {
    /// Number of usable time states `γ_0 .. γ_{num_times-1}`.
    fn num_times(&self) -> usize;
    /// Dimension of the clock register.
    fn dim(&self) -> usize;
    /// Basis index of `|γ_j>`.
    fn time_basis_index(&self, j: usize) -> usize;
    /// Action of the raising coupling `γ_j → γ_{j+1}` on an arbitrary clock
    /// basis state; `None` means the state is annihilated.
    fn transition(&self, j: usize, basis: usize) -> Option<usize>;
}

/// Minimal clock: time `j` is the basis state `|j>` of a register of
/// dimension `times`. Used for dense cross-checks.
#[derive(Debug, Clone, Copy)]
pub struct OneHotClock {
    pub times: usize,
}

impl ClockBackend for OneHotClock {
    fn num_times(&self) -> usize {
        self.times
    }

    fn dim(&self) -> usize {
        self.times
    }

    fn time_basis_index(&self, j: usize) -> usize {
        j
    }

    fn transition(&self, j: usize, basis: usize) -> Option<usize> {
        (basis == j).then_some(j + 1)
    }
}

impl ClockBackend for JohnsonClock {
    fn num_times(&self) -> usize {
        self.path_len() as usize
    }

    fn dim(&self) -> usize {
        1usize << self.qubits()
    }

    fn time_basis_index(&self, j: usize) -> usize {
        self.subset_at(j as u64).expect("time index in range") as usize
    }

    fn transition(&self, j: usize, basis: usize) -> Option<usize> {
        match self.apply_transition(j as u64, basis as u32) {
            Ok(TransitionOutcome::Mapped(out)) => Some(out as usize),
            Ok(TransitionOutcome::Annihilated) => None,
            Err(_) => None,
        }
    }
}

/// The clock-coupled Hamiltonian of a circuit.
#[derive(Debug, Clone)]
pub struct FeynmanHamiltonian<C: ClockBackend> {
    circuit: GateCircuit,
    clock: C,
}

impl<C: ClockBackend> FeynmanHamiltonian<C> {
    pub fn new(circuit: GateCircuit, clock: C) -> Result<Self> {
        if clock.num_times() < circuit.len() + 1 {
            return Err(Error::domain(format!(
                "clock supports {} time states but the circuit needs {}",
                clock.num_times(),
                circuit.len() + 1
            )));
        }
        Ok(FeynmanHamiltonian { circuit, clock })
    }

    pub fn circuit(&self) -> &GateCircuit {
        &self.circuit
    }

    pub fn clock(&self) -> &C {
        &self.clock
    }

    /// Total Hilbert dimension, circuit register times clock register.
    pub fn dim(&self) -> usize {
        self.circuit.dim() * self.clock.dim()
    }

    /// Index of the product basis state `|x>_circuit ⊗ |c>_clock`.
    pub fn product_index(&self, circuit_basis: usize, clock_basis: usize) -> usize {
        circuit_basis * self.clock.dim() + clock_basis
    }

    /// History basis state `|ψ_j> = (U_j ⋯ U_1 |φ_0>) ⊗ |γ_j>`.
    pub fn history_state(&self, input: &[Complex64], j: usize) -> Vec<Complex64> {
        let d = self.clock.dim();
        let mut circ = input.to_vec();
        self.circuit.apply_range(&mut circ, 0, j);
        let mut full = vec![linalg::ZERO; self.dim()];
        let cidx = self.clock.time_basis_index(j);
        for (x, amp) in circ.iter().enumerate() {
            full[x * d + cidx] = *amp;
        }
        full
    }

    /// Matrix-vector product `H |state>` without materializing `H`.
    pub fn apply(&self, state: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(state.len(), self.dim());
        let d = self.clock.dim();
        let n = self.circuit.dim();
        let mut out = vec![linalg::ZERO; state.len()];
        let mut scratch = vec![linalg::ZERO; n];
        for (gidx, gate) in self.circuit.gates().iter().enumerate() {
            let adjoint = gate.adjoint();
            for c in 0..d {
                if let Some(r) = self.clock.transition(gidx, c) {
                    // Forward block: U_j ⊗ |r><c|.
                    for y in 0..n {
                        scratch[y] = state[y * d + c];
                    }
                    apply_gate(&mut scratch, gate);
                    for x in 0..n {
                        out[x * d + r] += scratch[x];
                    }
                    // Adjoint block: U_j† ⊗ |c><r|.
                    for y in 0..n {
                        scratch[y] = state[y * d + r];
                    }
                    apply_gate(&mut scratch, &adjoint);
                    for x in 0..n {
                        out[x * d + c] += scratch[x];
                    }
                }
            }
        }
        out
    }

    /// Dense materialization; errors when the dimension exceeds the cap.
    pub fn materialize(&self) -> Result<CMatrix> {
        let dim = self.dim();
        if dim > MAX_DENSE_DIM {
            return Err(Error::capacity(format!(
                "dense dimension {dim} exceeds {MAX_DENSE_DIM}"
            )));
        }
        let d = self.clock.dim();
        let n = self.circuit.dim();
        let mut h = CMatrix::zeros(dim, dim);
        for (gidx, gate) in self.circuit.gates().iter().enumerate() {
            let u = embed_gate(gate, self.circuit.qubits());
            for c in 0..d {
                if let Some(r) = self.clock.transition(gidx, c) {
                    for x in 0..n {
                        for y in 0..n {
                            let val = u[(x, y)];
                            if val != linalg::ZERO {
                                h[(x * d + r, y * d + c)] += val;
                                h[(y * d + c, x * d + r)] += val.conj();
                            }
                        }
                    }
                }
            }
        }
        Ok(h)
    }

    /// `e^{-iHt}|state>` through a dense Hermitian eigendecomposition.
    pub fn dense_evolve(&self, state: &CVector, t: f64) -> Result<CVector> {
        let evolved = self.dense_evolver()?.evolve(state, t);
        let drift = (evolved.norm() - state.norm()).abs();
        if drift > 1e-9 {
            return Err(Error::internal(format!(
                "dense evolution drifted the norm by {drift:e}"
            )));
        }
        Ok(evolved)
    }

    /// Cached eigendecomposition for repeated evolution times.
    pub fn dense_evolver(&self) -> Result<HermitianEigen> {
        Ok(linalg::hermitian_eigen(&self.materialize()?))
    }
}

/// Time amplitudes of a history state along the clock line.
#[derive(Debug, Clone)]
pub struct HistoryState {
    /// `α_0 .. α_L`.
    pub time_amplitudes: Vec<Complex64>,
    /// The circuit input `|φ_0>`.
    pub base_input: Vec<Complex64>,
}

/// Evolve the history state of `circuit` from `input ⊗ γ_0` for time `t`,
/// restricted to the invariant history subspace: the amplitudes are exactly
/// the line-walk propagator on `L+1` vertices.
pub fn evolve_restricted(circuit: &GateCircuit, input: &[Complex64], t: f64) -> Result<HistoryState> {
    if input.len() != circuit.dim() {
        return Err(Error::domain(format!(
            "input dimension {} does not match circuit dimension {}",
            input.len(),
            circuit.dim()
        )));
    }
    let norm: f64 = input.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::domain(format!(
            "input state norm² = {norm}, expected 1"
        )));
    }
    let vertices = circuit.len() + 1;
    let line = LineWalk::new(vertices)?;
    let mut amps = Vec::with_capacity(vertices);
    for j in 0..vertices {
        amps.push(line.propagator_exact(1, j + 1, t)?);
    }
    let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::internal(format!(
            "restricted amplitudes sum to {total}"
        )));
    }
    Ok(HistoryState {
        time_amplitudes: amps,
        base_input: input.to_vec(),
    })
}

/// Sample the clock register of a history state and collapse the circuit
/// register: outcome `l` is drawn with probability `|α_l|²` and the circuit
/// register becomes the exact prefix product `U_l ⋯ U_1 |φ_0>`.
pub fn sample_clock_and_collapse<R: Rng>(
    hs: &HistoryState,
    circuit: &GateCircuit,
    rng: &mut R,
) -> Result<(usize, Vec<Complex64>)> {
    let total: f64 = hs.time_amplitudes.iter().map(|a| a.norm_sqr()).sum();
    if total < 1e-12 {
        return Err(Error::internal(
            "history state has no clock weight to sample".to_string(),
        ));
    }
    let mut draw = rng.gen::<f64>() * total;
    let mut outcome = hs.time_amplitudes.len() - 1;
    for (l, amp) in hs.time_amplitudes.iter().enumerate() {
        draw -= amp.norm_sqr();
        if draw <= 0.0 {
            outcome = l;
            break;
        }
    }
    let mut state = hs.base_input.clone();
    circuit.apply_range(&mut state, 0, outcome);
    Ok((outcome, state))
}

/// Measure a statevector in the computational basis.
pub fn measure_basis<R: Rng>(state: &[Complex64], rng: &mut R) -> u64 {
    let total: f64 = state.iter().map(|z| z.norm_sqr()).sum();
    let mut draw = rng.gen::<f64>() * total;
    for (idx, amp) in state.iter().enumerate() {
        draw -= amp.norm_sqr();
        if draw <= 0.0 {
            return idx as u64;
        }
    }
    state.len() as u64 - 1
}

/// One run of the iterate-extraction reduction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReductionSample {
    /// Clock measurement outcome `l`.
    pub clock_outcome: usize,
    /// Extracted iterate index `m = ⌈l/s⌉`.
    pub iterate: usize,
    /// Computational-basis outcome after completing the block.
    pub measured: u64,
}

/// Concatenate `iterations` copies of `block`, evolve the history state to
/// time `t`, sample the clock, finish the current block by applying the
/// remaining gates up to `m·s`, and measure.
pub fn run_reduction_local<R: Rng>(
    block: &GateCircuit,
    iterations: usize,
    t: f64,
    input: &[Complex64],
    rng: &mut R,
) -> Result<ReductionSample> {
    let s = block.len();
    if s == 0 || iterations == 0 {
        return Err(Error::domain(
            "reduction needs a nonempty block and at least one iteration".to_string(),
        ));
    }
    let total_gates = s * iterations;
    if !t.is_finite() || t < 0.0 || t > total_gates as f64 {
        return Err(Error::domain(format!(
            "time {t} outside [0, {total_gates}]"
        )));
    }
    let full = block.repeat(iterations);
    let hs = evolve_restricted(&full, input, t)?;
    let (l, mut state) = sample_clock_and_collapse(&hs, &full, rng)?;
    let m = l.div_ceil(s);
    full.apply_range(&mut state, l, m * s);
    let measured = measure_basis(&state, rng);
    Ok(ReductionSample {
        clock_outcome: l,
        iterate: m,
        measured,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_gate(rng: &mut ChaCha8Rng, qubits: usize) -> Gate {
        let two = qubits > 1 && rng.gen_bool(0.5);
        let d = if two { 4 } else { 2 };
        let raw = CMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let h = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
        let u = linalg::expm(&(h * Complex64::new(0.0, 1.0)));
        let wires = if two {
            let a = rng.gen_range(0..qubits);
            let mut b = rng.gen_range(0..qubits);
            while b == a {
                b = rng.gen_range(0..qubits);
            }
            GateWires::Two(a, b)
        } else {
            GateWires::One(rng.gen_range(0..qubits))
        };
        Gate::new(wires, u).unwrap()
    }

    pub(crate) fn random_circuit(rng: &mut ChaCha8Rng, qubits: usize, gates: usize) -> GateCircuit {
        let gates = (0..gates).map(|_| random_gate(rng, qubits)).collect();
        GateCircuit::new(qubits, gates).unwrap()
    }

    /// Independent dense construction via explicit Kronecker products.
    fn dense_via_kron<C: ClockBackend>(h: &FeynmanHamiltonian<C>) -> CMatrix {
        let d = h.clock().dim();
        let dim = h.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for (gidx, gate) in h.circuit().gates().iter().enumerate() {
            let u = embed_gate(gate, h.circuit().qubits());
            let mut hop = CMatrix::zeros(d, d);
            for c in 0..d {
                if let Some(r) = h.clock().transition(gidx, c) {
                    hop[(r, c)] = linalg::ONE;
                }
            }
            let term = linalg::kron(&u, &hop);
            out += &term + term.adjoint();
        }
        out
    }

    #[test]
    fn single_identity_gate_dense_pattern() {
        let circuit = GateCircuit::new(1, vec![Gate::identity(0)]).unwrap();
        let h = FeynmanHamiltonian::new(circuit, OneHotClock { times: 2 }).unwrap();
        let dense = h.materialize().unwrap();
        // Identity on the qubit, bit-flip on the clock.
        let x = CMatrix::from_row_slice(2, 2, &[linalg::ZERO, linalg::ONE, linalg::ONE, linalg::ZERO]);
        let want = linalg::kron(&CMatrix::identity(2, 2), &x);
        assert!((dense - want).norm() < 1e-14);
    }

    #[test]
    fn dense_matches_independent_kron_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let circuit = random_circuit(&mut rng, 2, 3);
        let h = FeynmanHamiltonian::new(circuit, OneHotClock { times: 4 }).unwrap();
        let dense = h.materialize().unwrap();
        assert!(linalg::hermiticity_error(&dense) < 1e-12);
        let want = dense_via_kron(&h);
        assert!((&dense - &want).norm() < 1e-12);

        // The matrix-free apply agrees with the dense action.
        let dim = h.dim();
        let mut rng2 = ChaCha8Rng::seed_from_u64(5);
        let state: Vec<Complex64> = (0..dim)
            .map(|_| Complex64::new(rng2.gen_range(-1.0..1.0), rng2.gen_range(-1.0..1.0)))
            .collect();
        let applied = h.apply(&state);
        let vec = CVector::from_vec(state);
        let want_vec = &dense * vec;
        for (a, b) in applied.iter().zip(want_vec.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn clock_too_short_is_rejected() {
        let circuit = GateCircuit::new(1, vec![Gate::x(0), Gate::x(0)]).unwrap();
        assert!(FeynmanHamiltonian::new(circuit, OneHotClock { times: 2 }).is_err());
    }

    #[test]
    fn restricted_amplitudes_at_zero_time() {
        let circuit = GateCircuit::new(1, vec![Gate::x(0); 5]).unwrap();
        let hs = evolve_restricted(&circuit, &GateCircuit::basis_state(1, 0), 0.0).unwrap();
        assert!((hs.time_amplitudes[0] - linalg::ONE).norm() < 1e-12);
        assert!(hs.time_amplitudes[1..].iter().all(|a| a.norm() < 1e-12));
    }

    #[test]
    fn late_clock_mass_dominates() {
        // 39 gates → 40-vertex line; at t = 10 nearly all weight sits at
        // clock readings ≥ 10.
        let circuit = GateCircuit::new(1, vec![Gate::x(0); 39]).unwrap();
        let hs = evolve_restricted(&circuit, &GateCircuit::basis_state(1, 0), 10.0).unwrap();
        let late: f64 = hs.time_amplitudes[10..].iter().map(|a| a.norm_sqr()).sum();
        assert!(late >= 1.0 / 3.0, "late mass {late}");
    }

    #[test]
    fn restricted_matches_dense_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let circuit = random_circuit(&mut rng, 2, 8);
        let input = {
            let mut v = vec![linalg::ZERO; 4];
            v[2] = linalg::ONE;
            v
        };
        let h = FeynmanHamiltonian::new(circuit.clone(), OneHotClock { times: 9 }).unwrap();
        let psi0 = CVector::from_vec(h.history_state(&input, 0));
        let evolved = h.dense_evolve(&psi0, 3.0).unwrap();
        let hs = evolve_restricted(&circuit, &input, 3.0).unwrap();
        let mut captured = 0.0;
        for j in 0..=8 {
            let basis = CVector::from_vec(h.history_state(&input, j));
            let overlap = (basis.adjoint() * &evolved)[(0, 0)];
            assert!(
                (overlap - hs.time_amplitudes[j]).norm() < 1e-8,
                "projection mismatch at j={j}"
            );
            captured += overlap.norm_sqr();
        }
        // Subspace closure: nothing leaks out of the history span.
        assert!((1.0 - captured).abs() < 1e-9);
    }

    #[test]
    fn johnson_clock_backend_matches_restricted_evolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let circuit = random_circuit(&mut rng, 1, 3);
        let clock = JohnsonClock::new(4, 2).unwrap(); // 6 path states ≥ 4
        let h = FeynmanHamiltonian::new(circuit.clone(), clock).unwrap();
        assert_eq!(h.dim(), 32);
        let input = GateCircuit::basis_state(1, 1);
        let psi0 = CVector::from_vec(h.history_state(&input, 0));
        let evolved = h.dense_evolve(&psi0, 1.7).unwrap();
        let hs = evolve_restricted(&circuit, &input, 1.7).unwrap();
        let mut captured = 0.0;
        for j in 0..=3 {
            let basis = CVector::from_vec(h.history_state(&input, j));
            let overlap = (basis.adjoint() * &evolved)[(0, 0)];
            assert!((overlap - hs.time_amplitudes[j]).norm() < 1e-9);
            captured += overlap.norm_sqr();
        }
        assert!((1.0 - captured).abs() < 1e-9);
    }

    #[test]
    fn dense_evolve_trivial_cases() {
        let circuit = GateCircuit::new(1, vec![Gate::hadamard(0), Gate::t_gate(0)]).unwrap();
        let h = FeynmanHamiltonian::new(circuit, OneHotClock { times: 3 }).unwrap();
        let input = GateCircuit::basis_state(1, 1);
        let psi0 = CVector::from_vec(h.history_state(&input, 0));
        // t = 0 is the identity.
        let same = h.dense_evolve(&psi0, 0.0).unwrap();
        assert!((same - &psi0).norm() < 1e-12);
        // The capacity cap is enforced.
        let big = GateCircuit::new(10, vec![Gate::x(0); 4]).unwrap();
        let too_big = FeynmanHamiltonian::new(big, OneHotClock { times: 5 }).unwrap();
        assert!(matches!(
            too_big.dense_evolve(&CVector::zeros(5 * 1024), 1.0),
            Err(crate::error::Error::Capacity(_))
        ));
    }

    #[test]
    fn sampling_is_seeded_and_distributed() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let circuit = random_circuit(&mut rng, 2, 6);
        let input = GateCircuit::basis_state(2, 1);
        let hs = evolve_restricted(&circuit, &input, 2.0).unwrap();

        // Point-mass history state collapses deterministically.
        let point = HistoryState {
            time_amplitudes: {
                let mut a = vec![linalg::ZERO; 7];
                a[0] = linalg::ONE;
                a
            },
            base_input: input.clone(),
        };
        let (l, state) = sample_clock_and_collapse(&point, &circuit, &mut rng).unwrap();
        assert_eq!(l, 0);
        assert!((state[1] - linalg::ONE).norm() < 1e-12);

        // Same seed, same outcomes.
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..32 {
            let a = sample_clock_and_collapse(&hs, &circuit, &mut r1).unwrap().0;
            let b = sample_clock_and_collapse(&hs, &circuit, &mut r2).unwrap().0;
            assert_eq!(a, b);
        }

        // Empirical frequencies within 3σ of |α_l|².
        let draws = 100_000usize;
        let mut counts = vec![0usize; hs.time_amplitudes.len()];
        let mut rng3 = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..draws {
            counts[sample_clock_and_collapse(&hs, &circuit, &mut rng3).unwrap().0] += 1;
        }
        for (l, &count) in counts.iter().enumerate() {
            let p = hs.time_amplitudes[l].norm_sqr();
            let sigma = (p * (1.0 - p) / draws as f64).sqrt();
            let freq = count as f64 / draws as f64;
            assert!(
                (freq - p).abs() <= 3.0 * sigma + 1e-4,
                "l={l}: freq {freq} vs p {p}"
            );
        }
    }

    #[test]
    fn reduction_on_not_iteration() {
        let block = GateCircuit::new(1, vec![Gate::x(0)]).unwrap();
        let input = GateCircuit::basis_state(1, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);

        let sample = run_reduction_local(&block, 4, 0.0, &input, &mut rng).unwrap();
        assert_eq!(sample.clock_outcome, 0);
        assert_eq!(sample.iterate, 0);
        assert_eq!(sample.measured, 0);

        for &t in &[1.0, 2.5, 4.0, 8.0] {
            for _ in 0..200 {
                let s = run_reduction_local(&block, 8, t, &input, &mut rng).unwrap();
                assert_eq!(s.measured, (s.iterate % 2) as u64, "t={t}");
            }
        }
        assert!(run_reduction_local(&block, 8, 8.5, &input, &mut rng).is_err());
    }

    #[test]
    fn reduction_on_classical_permutation_circuit() {
        // Reversible 3-bit block from CNOT/SWAP gates; basis states map to
        // basis states, so the oracle is plain function iteration.
        let block = GateCircuit::new(
            3,
            vec![
                Gate::cnot(0, 1),
                Gate::swap(1, 2),
                Gate::cnot(2, 0),
                Gate::swap(0, 1),
            ],
        )
        .unwrap();
        let perm: Vec<u64> = (0..8u64)
            .map(|x| {
                let mut state = GateCircuit::basis_state(3, x);
                block.apply(&mut state);
                state.iter().position(|z| z.norm() > 0.5).unwrap() as u64
            })
            .collect();
        let iterate = |mut x: u64, times: usize| {
            for _ in 0..times {
                x = perm[x as usize];
            }
            x
        };

        let input = GateCircuit::basis_state(3, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..300 {
            let s = run_reduction_local(&block, 6, 9.0, &input, &mut rng).unwrap();
            assert_eq!(s.measured, iterate(5, s.iterate));
        }
    }

    #[test]
    fn circuit_json_roundtrip() {
        let text = r#"[
            {"gate": "H", "wires": [0]},
            {"gate": "CNOT", "wires": [0, 1]},
            {"gate": [[[0,0],[1,0]],[[1,0],[0,0]]], "wires": [1]}
        ]"#;
        let circuit = GateCircuit::from_json(text).unwrap();
        assert_eq!(circuit.qubits(), 2);
        assert_eq!(circuit.len(), 3);
        // The raw matrix is an X gate.
        let got = circuit.gates()[2].matrix();
        assert!((got - Gate::x(1).matrix()).norm() < 1e-15);

        let with_header = r#"{"qubits": 3, "gates": [{"gate": "SWAP", "wires": [0, 2]}]}"#;
        let c2 = GateCircuit::from_json(with_header).unwrap();
        assert_eq!(c2.qubits(), 3);

        assert!(GateCircuit::from_json("{\"gates\": 3}").is_err());
        let nonunitary = r#"[{"gate": [[[1,0],[1,0]],[[0,0],[1,0]]], "wires": [0]}]"#;
        assert!(GateCircuit::from_json(nonunitary).is_err());
    }

    #[test]
    fn gate_validation() {
        assert!(Gate::new(GateWires::Two(1, 1), CMatrix::identity(4, 4)).is_err());
        assert!(Gate::new(GateWires::One(0), CMatrix::identity(4, 4)).is_err());
        let scaled = CMatrix::identity(2, 2) * Complex64::new(1.1, 0.0);
        assert!(Gate::new(GateWires::One(0), scaled).is_err());
        let circuit = GateCircuit::new(2, vec![Gate::x(3)]);
        assert!(circuit.is_err());
    }
}
