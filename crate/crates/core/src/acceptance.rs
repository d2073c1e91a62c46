//! The acceptance suite: every numbered correctness criterion of this
//! toolkit, runnable both from the integration tests and from the CLI.
//!
//! Each criterion pins its tolerances here, reports the governing measured
//! quantity, and never defers a threshold to later calibration. Three
//! checks (4, 5, and 12) currently fail: their thresholds overclaim what
//! the exact mathematics allows at domain corners, and the suite reports
//! the precise measured violation instead of loosening the threshold. See
//! the `detail` strings and the README notes.

use crate::chains::{
    self, bound_f, chain_point, complete_chain_d, merge_random, repair_to_permutation,
    twisted_extend, ErasedChain, PermutationFamily, TableHash,
};
use crate::clock::{binomial, min_clock_qubits, JohnsonClock, TransitionOutcome};
use crate::feynman::{
    evolve_restricted, measure_basis, sample_clock_and_collapse, FeynmanHamiltonian, Gate,
    GateCircuit, GateWires, OneHotClock,
};
use crate::linalg::{self, CMatrix, CVector};
use crate::timedep::{to_geometrically_local, to_piecewise, GeomLocalCircuit};
use crate::walk::{propagator_bessel, propagator_image_sum, LineWalk};
use crate::{bessel, sparse_oracle::WalkGraphHamiltonian};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::time::Instant;

pub const CRITERIA_COUNT: usize = 13;

/// Outcome of one criterion.
#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    /// The governing measured quantity (see `detail` for the direction).
    pub measured: f64,
    /// The pinned threshold the measurement is compared against.
    pub threshold: f64,
    pub seconds: f64,
    pub detail: String,
}

impl CriterionResult {
    pub fn summary_line(&self) -> String {
        format!(
            "{}  {:2}. {:<28} measured={:.6e} threshold={:.6e} ({:.2}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.threshold,
            self.seconds
        )
    }
}

/// All pinned tolerances. `Default` is the contractual set; tests may
/// perturb single fields to confirm the suite actually fails when a bound
/// is violated.
#[derive(Debug, Clone)]
pub struct Thresholds {
    pub tail_min: f64,
    pub head_max: f64,
    pub bessel_maxima_tol: f64,
    pub tail_bound_excess: f64,
    pub image_sum_err: f64,
    pub bessel_form_err: f64,
    pub wavefront_window: f64,
    pub restriction_err: f64,
    pub off_subspace_mass: f64,
    pub late_prob_min: f64,
    pub swap_err: f64,
    pub piecewise_err: f64,
    pub roundtrip_err: f64,
    pub f_ratio_cap: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        // 3σ for an empirical probability at p = 1/3 over 10^4 samples.
        let sigma = ((1.0 / 3.0) * (2.0 / 3.0) / 1e4f64).sqrt();
        Thresholds {
            tail_min: 1.0 / 3.0 - 1e-9,
            head_max: 2.0 / PI + 1e-6,
            bessel_maxima_tol: 2e-3,
            tail_bound_excess: 1e-12,
            image_sum_err: 1e-8,
            bessel_form_err: 1e-6,
            wavefront_window: 3.0,
            restriction_err: 1e-8,
            off_subspace_mass: 1e-9,
            late_prob_min: 1.0 / 3.0 - 3.0 * sigma,
            swap_err: 1e-10,
            piecewise_err: 1e-9,
            roundtrip_err: 1e-10,
            f_ratio_cap: 1e4,
        }
    }
}

fn timed<F: FnOnce() -> CriterionResult>(f: F) -> CriterionResult {
    let start = Instant::now();
    let mut result = f();
    result.seconds = start.elapsed().as_secs_f64();
    result
}

/// Run the whole suite with the contractual thresholds.
pub fn run_all() -> Vec<CriterionResult> {
    let t = Thresholds::default();
    vec![
        criterion_1(&t),
        criterion_2(&t),
        criterion_3(&t),
        criterion_4(&t),
        criterion_5(&t),
        criterion_6(&t),
        criterion_7(&t),
        criterion_8(&t),
        criterion_9(&t),
        criterion_10(&t),
        criterion_11(&t),
        criterion_12(&t),
        criterion_13(&t),
    ]
}

/// Criterion 1: Tail/head mass bounds of the line walk across full integer-time
/// sweeps.
pub fn criterion_1(t: &Thresholds) -> CriterionResult {
    timed(|| {
        let mut min_tail = f64::INFINITY;
        let mut max_head = 0.0f64;
        for length in [50usize, 100, 200] {
            let walk = LineWalk::new(length).expect("valid length");
            for step in 1..=length / 2 {
                let tail = walk.tail_mass(step as f64).expect("in range");
                let head = walk.head_mass(step as f64).expect("in range");
                min_tail = min_tail.min(tail);
                max_head = max_head.max(head);
            }
        }
        let passed = min_tail >= t.tail_min && max_head <= t.head_max;
        CriterionResult {
            id: 1,
            name: "tail-mass bounds",
            passed,
            measured: min_tail,
            threshold: t.tail_min,
            seconds: 0.0,
            detail: format!(
                "min tail {min_tail:.9} (≥ {:.9}); max head {max_head:.9} (≤ {:.9})",
                t.tail_min, t.head_max
            ),
        }
    })
}

/// Criterion 2: Maxima of J₁² and J₂² over a fine grid.
pub fn criterion_2(t: &Thresholds) -> CriterionResult {
    timed(|| {
        let mut max1 = 0.0f64;
        let mut max2 = 0.0f64;
        let steps = 60_000usize;
        for i in 0..=steps {
            let x = i as f64 * 1e-3;
            let j1 = bessel::bessel_j(1, x).expect("in range");
            let j2 = bessel::bessel_j(2, x).expect("in range");
            max1 = max1.max(j1 * j1);
            max2 = max2.max(j2 * j2);
        }
        let dev = (max1 - 0.339f64).abs().max((max2 - 0.237).abs());
        CriterionResult {
            id: 2,
            name: "Bessel square maxima",
            passed: dev <= t.bessel_maxima_tol,
            measured: dev,
            threshold: t.bessel_maxima_tol,
            seconds: 0.0,
            detail: format!("max J₁² = {max1:.6} (target 0.339), max J₂² = {max2:.6} (target 0.237)"),
        }
    })
}

/// Criterion 3: The 2/(nπ) envelope on J_n(x)² for x ∈ [2n, 4n].
pub fn criterion_3(t: &Thresholds) -> CriterionResult {
    timed(|| {
        let mut worst_excess = f64::NEG_INFINITY;
        for n in 1..=100i64 {
            let bound = bessel::tail_bound(n).expect("n ≥ 1");
            for i in 0..200 {
                let x = 2.0 * n as f64 + (2.0 * n as f64) * i as f64 / 199.0;
                let j = bessel::bessel_j(n, x).expect("in range");
                worst_excess = worst_excess.max(j * j - bound);
            }
        }
        CriterionResult {
            id: 3,
            name: "tail-bound envelope",
            passed: worst_excess <= t.tail_bound_excess,
            measured: worst_excess,
            threshold: t.tail_bound_excess,
            seconds: 0.0,
            detail: format!("max J_n(x)² - 2/(nπ) = {worst_excess:.3e} over n ≤ 100, x ∈ [2n, 4n]"),
        }
    })
}

/// Criterion 4: Exact spectral propagator against the truncated image sum and the
/// closed single-Bessel boundary form, over the full (l, t) grid at L=100.
pub fn criterion_4(t: &Thresholds) -> CriterionResult {
    timed(|| {
        let walk = LineWalk::new(100).expect("valid length");
        let mut max_image = 0.0f64;
        let mut max_bessel = 0.0f64;
        let mut max_bessel_early = 0.0f64; // t ≤ 39, before reflection
        let mut worst_at = (0usize, 0usize);
        for step in 1..=50usize {
            let time = step as f64;
            for l in 1..=100usize {
                let exact = walk.propagator_exact(1, l, time).expect("in range");
                let image = propagator_image_sum(100, l, time, 2).expect("in range");
                let closed = propagator_bessel(l, time).expect("in range");
                let ie = (exact - image).norm();
                let be = (exact - closed).norm();
                max_image = max_image.max(ie);
                if be > max_bessel {
                    max_bessel = be;
                    worst_at = (l, step);
                }
                if step <= 39 {
                    max_bessel_early = max_bessel_early.max(be);
                }
            }
        }
        let passed = max_image <= t.image_sum_err && max_bessel <= t.bessel_form_err;
        CriterionResult {
            id: 4,
            name: "propagator equivalence",
            passed,
            measured: max_bessel,
            threshold: t.bessel_form_err,
            seconds: 0.0,
            detail: format!(
                "image-sum err {max_image:.2e} (≤ {:.0e}); single-Bessel err {max_bessel:.4e} at (l={}, t={}) — \
                 the neglected reflected term J_{{201-l}}(2t) is not small once the wavefront reaches \
                 the far boundary; over t ≤ 39 the same error is {max_bessel_early:.2e}",
                t.image_sum_err, worst_at.0, worst_at.1
            ),
        }
    })
}

/// Criterion 5: Wavefront location: argmax of the profile against 2t.
pub fn criterion_5(t: &Thresholds) -> CriterionResult {
    timed(|| {
        let walk = LineWalk::new(100).expect("valid length");
        // Independent targets: dense evolution of the tridiagonal matrix.
        let mut h = CMatrix::zeros(100, 100);
        for j in 0..99 {
            h[(j, j + 1)] = linalg::ONE;
            h[(j + 1, j)] = linalg::ONE;
        }
        let eig = linalg::hermitian_eigen(&h);
        let mut start = CVector::zeros(100);
        start[0] = linalg::ONE;

        let mut max_dev = 0.0f64;
        let mut oracle_mismatches = 0usize;
        let mut offenders = Vec::new();
        for step in 10..=50usize {
            let profile = walk.prob_profile(step as f64).expect("in range");
            let argmax = argmax_index(&profile.probs) + 1;

            let evolved = eig.evolve(&start, step as f64);
            let dense_probs: Vec<f64> = evolved.iter().map(|z| z.norm_sqr()).collect();
            let dense_argmax = argmax_index(&dense_probs) + 1;
            if argmax != dense_argmax {
                oracle_mismatches += 1;
            }

            let dev = (argmax as f64 - 2.0 * step as f64).abs();
            if dev > t.wavefront_window {
                offenders.push((step, argmax));
            }
            max_dev = max_dev.max(dev);
        }
        CriterionResult {
            id: 5,
            name: "wavefront location",
            passed: max_dev <= t.wavefront_window && oracle_mismatches == 0,
            measured: max_dev,
            threshold: t.wavefront_window,
            seconds: 0.0,
            detail: format!(
                "max |argmax - 2t| = {max_dev}; exact targets confirmed by the dense oracle \
                 ({oracle_mismatches} mismatches); outside ±{}: {offenders:?} — boundary reflection \
                 compresses the front for t ∈ 46..=49",
                t.wavefront_window
            ),
        }
    })
}

/// Criterion 6: Clock correctness: exhaustive transition checks and the minimal
/// qubit count against brute-force search.
pub fn criterion_6(_t: &Thresholds) -> CriterionResult {
    timed(|| {
        let mut violations = 0usize;
        let mut transitions_checked = 0usize;
        for n in 2..=8u32 {
            for k in 1..n {
                let clock = JohnsonClock::new(n, k).expect("valid parameters");
                let m = clock.path_len();
                for j in 0..m - 1 {
                    for jp in 0..m {
                        let state = clock.subset_at(jp).expect("in range");
                        let got = clock.apply_transition(j, state).expect("in range");
                        let want = if jp == j {
                            TransitionOutcome::Mapped(clock.subset_at(j + 1).expect("in range"))
                        } else {
                            TransitionOutcome::Annihilated
                        };
                        transitions_checked += 1;
                        if got != want {
                            violations += 1;
                        }
                    }
                }
            }
        }
        let mut qubit_mismatches = 0usize;
        for c in 2..=6u32 {
            for bound in 1..=1000u64 {
                let got = min_clock_qubits(c, bound).expect("valid parameters");
                let k = (c - 1) as u64;
                let brute = (k..).find(|&n| binomial(n, k) >= bound).unwrap() as u32;
                if got != brute {
                    qubit_mismatches += 1;
                }
            }
        }
        let total = violations + qubit_mismatches;
        CriterionResult {
            id: 6,
            name: "clock correctness",
            passed: total == 0,
            measured: total as f64,
            threshold: 0.0,
            seconds: 0.0,
            detail: format!(
                "{transitions_checked} transition applications, {violations} violations; \
                 minimal-qubit search mismatches: {qubit_mismatches}"
            ),
        }
    })
}

fn argmax_index(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0
}

fn random_unitary_gate(rng: &mut ChaCha8Rng, qubits: usize) -> Gate {
    let two = qubits > 1 && rng.gen_bool(0.5);
    let d = if two { 4 } else { 2 };
    let raw = CMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let herm = (&raw + raw.adjoint()) * Complex64::new(0.5, 0.0);
    let u = linalg::expm(&(herm * Complex64::new(0.0, 1.0)));
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
    Gate::new(wires, u).expect("random unitary is unitary")
}

fn random_circuit(rng: &mut ChaCha8Rng, qubits: usize, gates: usize) -> GateCircuit {
    GateCircuit::new(
        qubits,
        (0..gates).map(|_| random_unitary_gate(rng, qubits)).collect(),
    )
    .expect("random circuit is valid")
}

/// Criterion 7: Restricted line amplitudes against dense history-state projections.
pub fn criterion_7(t: &Thresholds) -> CriterionResult {
    timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x07);
        let mut max_err = 0.0f64;
        let mut max_off = 0.0f64;
        for _ in 0..20 {
            let qubits = rng.gen_range(1..=3usize);
            let gates = rng.gen_range(1..=12usize);
            let circuit = random_circuit(&mut rng, qubits, gates);
            let input = GateCircuit::basis_state(qubits, rng.gen_range(0..1u64 << qubits));
            let h = FeynmanHamiltonian::new(circuit.clone(), OneHotClock { times: gates + 1 })
                .expect("clock long enough");
            let evolver = h.dense_evolver().expect("within dense cap");
            let psi0 = CVector::from_vec(h.history_state(&input, 0));
            let history: Vec<CVector> = (0..=gates)
                .map(|j| CVector::from_vec(h.history_state(&input, j)))
                .collect();
            for half_step in 1..=12usize {
                let time = half_step as f64 * 0.5;
                let evolved = evolver.evolve(&psi0, time);
                let hs = evolve_restricted(&circuit, &input, time).expect("valid input");
                let mut captured = 0.0;
                for (j, basis) in history.iter().enumerate() {
                    let overlap = (basis.adjoint() * &evolved)[(0, 0)];
                    max_err = max_err.max((overlap - hs.time_amplitudes[j]).norm());
                    captured += overlap.norm_sqr();
                }
                max_off = max_off.max((1.0 - captured).abs());
            }
        }
        let passed = max_err <= t.restriction_err && max_off <= t.off_subspace_mass;
        CriterionResult {
            id: 7,
            name: "history-state restriction",
            passed,
            measured: max_err,
            threshold: t.restriction_err,
            seconds: 0.0,
            detail: format!(
                "max amplitude error {max_err:.2e}; max off-subspace mass {max_off:.2e} (≤ {:.0e})",
                t.off_subspace_mass
            ),
        }
    })
}

/// Criterion 8: The iterate-extraction reduction on classical blocks: outputs always
/// equal the function iterate, and the late-iterate probability clears the
/// tail-mass bound.
pub fn criterion_8(t: &Thresholds) -> CriterionResult {
    timed(|| {
        let not_block = GateCircuit::new(1, vec![Gate::x(0)]).expect("valid");
        let perm_block = GateCircuit::new(
            3,
            vec![
                Gate::cnot(0, 1),
                Gate::swap(1, 2),
                Gate::cnot(2, 0),
                Gate::swap(0, 1),
            ],
        )
        .expect("valid");

        let mut min_rate = f64::INFINITY;
        let mut functional_violations = 0usize;
        let mut detail_parts = Vec::new();
        for (label, block, input) in [
            ("NOT", &not_block, 0u64),
            ("perm3", &perm_block, 5u64),
        ] {
            let s = block.len();
            let iterations = 16usize;
            let time = (s * iterations) as f64 / 2.0;
            let threshold_m = (time / s as f64).floor() as usize;

            // Basis permutation implemented by one block.
            let table: Vec<u64> = (0..block.dim() as u64)
                .map(|x| {
                    let mut state = GateCircuit::basis_state(block.qubits(), x);
                    block.apply(&mut state);
                    state.iter().position(|z| z.norm() > 0.5).unwrap() as u64
                })
                .collect();
            let iterate = |mut x: u64, times: usize| {
                for _ in 0..times {
                    x = table[x as usize];
                }
                x
            };

            let full = block.repeat(iterations);
            let input_state = GateCircuit::basis_state(block.qubits(), input);
            let hs = evolve_restricted(&full, &input_state, time).expect("valid input");
            let mut rng = ChaCha8Rng::seed_from_u64(0x08);
            let samples = 10_000usize;
            let mut late = 0usize;
            for _ in 0..samples {
                let (l, mut state) =
                    sample_clock_and_collapse(&hs, &full, &mut rng).expect("sampleable");
                let m = l.div_ceil(s);
                full.apply_range(&mut state, l, m * s);
                let measured = measure_basis(&state, &mut rng);
                if measured != iterate(input, m) {
                    functional_violations += 1;
                }
                if m >= threshold_m {
                    late += 1;
                }
            }
            let rate = late as f64 / samples as f64;
            min_rate = min_rate.min(rate);
            detail_parts.push(format!("{label}: Pr[m ≥ {threshold_m}] = {rate:.4}"));
        }
        let passed = functional_violations == 0 && min_rate >= t.late_prob_min;
        CriterionResult {
            id: 8,
            name: "iterate extraction",
            passed,
            measured: min_rate,
            threshold: t.late_prob_min,
            seconds: 0.0,
            detail: format!(
                "{}; functional violations: {functional_violations}",
                detail_parts.join("; ")
            ),
        }
    })
}

/// Criterion 9: Swap-network localization: the localized circuit equals the original
/// one up to the recorded wire permutation.
pub fn criterion_9(t: &Thresholds) -> CriterionResult {
    timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x09);
        let mut max_err = 0.0f64;
        for _ in 0..50 {
            let qubits = rng.gen_range(2..=5usize);
            let gates = rng.gen_range(1..=10usize);
            let circuit = random_circuit(&mut rng, qubits, gates);
            let local = to_geometrically_local(&circuit);
            for gate in local.circuit.gates() {
                if let GateWires::Two(a, b) = gate.wires {
                    assert_eq!(a.abs_diff(b), 1, "localized gate is not nearest-neighbor");
                }
            }
            for _ in 0..10 {
                let x = rng.gen_range(0..1u64 << qubits);
                let mut want = GateCircuit::basis_state(qubits, x);
                circuit.apply(&mut want);
                let want = GeomLocalCircuit::permute_state(&want, &local.wire_permutation);
                let mut got = GateCircuit::basis_state(qubits, x);
                local.circuit.apply(&mut got);
                let err: f64 = got
                    .iter()
                    .zip(want.iter())
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                max_err = max_err.max(err);
            }
        }
        CriterionResult {
            id: 9,
            name: "swap-network identity",
            passed: max_err <= t.swap_err,
            measured: max_err,
            threshold: t.swap_err,
            seconds: 0.0,
            detail: format!("max statevector error {max_err:.2e} over 50 circuits × 10 inputs"),
        }
    })
}

/// Criterion 10: Piecewise-constant evolution: integer times reproduce gate
/// prefixes; generators exponentiate back to their gates.
pub fn criterion_10(t: &Thresholds) -> CriterionResult {
    timed(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(0x0a);
        let mut max_prefix_err = 0.0f64;
        let mut max_roundtrip = 0.0f64;
        for _ in 0..50 {
            let qubits = rng.gen_range(2..=5usize);
            let gates = rng.gen_range(1..=10usize);
            let circuit = random_circuit(&mut rng, qubits, gates);
            let ph = to_piecewise(&circuit).expect("unitary gates");
            for seg in ph.segments() {
                let g = seg.generator();
                let exp = linalg::expm(&(g * Complex64::new(0.0, -1.0)));
                max_roundtrip = max_roundtrip.max((exp - seg.unitary()).norm());
            }
            let input = GateCircuit::basis_state(qubits, rng.gen_range(0..1u64 << qubits));
            for i in 0..=circuit.len() {
                let got = ph.evolve(&input, i as f64).expect("in range");
                let mut want = input.clone();
                circuit.apply_range(&mut want, 0, i);
                let err: f64 = got
                    .iter()
                    .zip(want.iter())
                    .map(|(a, b)| (a - b).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                max_prefix_err = max_prefix_err.max(err);
            }
        }
        let passed = max_prefix_err <= t.piecewise_err && max_roundtrip <= t.roundtrip_err;
        CriterionResult {
            id: 10,
            name: "piecewise evolution",
            passed,
            measured: max_prefix_err,
            threshold: t.piecewise_err,
            seconds: 0.0,
            detail: format!(
                "max integer-time error {max_prefix_err:.2e}; max generator round-trip {max_roundtrip:.2e} (≤ {:.0e})",
                t.roundtrip_err
            ),
        }
    })
}

/// Criterion 11: The oracle family: involution, erased single-support, hybrid
/// nesting, merged collision census, repaired bijectivity with the chain
/// intact.
pub fn criterion_11(_t: &Thresholds) -> CriterionResult {
    timed(|| {
        let shapes = [(3u32, 4usize), (6, 6), (8, 5)];
        let mut violations = 0usize;
        let mut checks = 0usize;
        for seed in 0..20u64 {
            let (bits, levels) = shapes[seed as usize % shapes.len()];
            let fam = PermutationFamily::generate(seed, levels, bits).expect("valid");
            let random = PermutationFamily::generate(seed ^ 0x5eed, levels, bits).expect("valid");
            let erased = ErasedChain::new(&fam, 0).expect("valid start");
            let merged = merge_random(&erased, &random).expect("matching shape");
            let repaired = repair_to_permutation(&merged);
            if repaired.is_err() {
                violations += 1;
                continue;
            }
            let repaired = repaired.unwrap();
            let chain = erased.chain().to_vec();
            let n = fam.domain_size();

            for level in 1..=levels {
                let mut support = 0usize;
                let mut image_counts = vec![0u32; n as usize];
                for x in 0..n {
                    // SΠ involution through forward and inverse views.
                    let y = chains::spi_apply(&fam, level as i32, x, 0).expect("valid");
                    checks += 2;
                    if chains::spi_apply(&fam, level as i32, x, y).expect("valid") != 0 {
                        violations += 1;
                    }
                    if chains::spi_apply(&fam, -(level as i32), y, 0).expect("valid") != x {
                        violations += 1;
                    }
                    // Erased single support.
                    if erased.erased_apply(level, x).expect("valid") != chains::bot_word(bits) {
                        support += 1;
                    }
                    image_counts[merged.apply(level, x).expect("valid") as usize] += 1;
                }
                checks += 3;
                if support != 1 {
                    violations += 1;
                }
                // Merged collision census: at most one doubled image, and
                // only at the chain target.
                let doubled: Vec<usize> = (0..n as usize)
                    .filter(|&y| image_counts[y] >= 2)
                    .collect();
                let census_ok = match merged.collision(level).expect("valid") {
                    Some(_) => doubled == vec![chain[level] as usize],
                    None => doubled.is_empty(),
                };
                if !census_ok {
                    violations += 1;
                }
                // Repaired family keeps the chain edge (bijectivity is
                // re-validated by construction).
                if repaired.forward(level, chain[level - 1]) != chain[level] {
                    violations += 1;
                }
            }
            // Hybrid nesting across cutoffs on the full level range.
            for (l1, l2) in [(1usize, levels), (2, levels.saturating_sub(1))] {
                let common = l1.min(l2);
                for level in 1..=common {
                    for x in 0..n {
                        checks += 1;
                        let a = erased.hybrid_apply(l1, level as i32, x, 0).expect("valid");
                        let b = erased.hybrid_apply(l2, level as i32, x, 0).expect("valid");
                        if a != b {
                            violations += 1;
                        }
                    }
                }
            }
        }
        CriterionResult {
            id: 11,
            name: "oracle family",
            passed: violations == 0,
            measured: violations as f64,
            threshold: 0.0,
            seconds: 0.0,
            detail: format!("{checks} checks over 20 seeds, {violations} violations"),
        }
    })
}

/// Criterion 12: Twisted-chain completion and the closed-form bound: completions
/// reconstruct honest chains with exact transcripts; the k⁴q⁴ scaling
/// witness is evaluated over the whole grid.
pub fn criterion_12(t: &Thresholds) -> CriterionResult {
    timed(|| {
        let mut completion_violations = 0usize;
        let mut rng = ChaCha8Rng::seed_from_u64(0x0c);
        for trial in 0..100u64 {
            let bits = rng.gen_range(6..=16u32);
            let h = TableHash::random(trial ^ 0xabcd, bits).expect("valid bits");
            let x0 = rng.gen::<u32>() & ((1 << bits) - 1);
            let q = rng.gen_range(1..=16usize);
            let honest = twisted_extend(&h, x0, 2 * q + 1);
            let completed =
                complete_chain_d(&h, x0, honest.elements[q], honest.elements[q + 1], q)
                    .expect("valid completion");
            use crate::chains::HashOracle;
            if !completed.chain.violations(&h).is_empty()
                || completed.synthesized_hash != h.eval(honest.elements[q])
                || completed.transcript.depth() != q
                || !completed.transcript.layers.iter().all(|l| l.len() == 2)
            {
                completion_violations += 1;
            }
        }

        // Scaling witness: F(k, 2q)·|Y| against cap · k⁴q⁴ (the product is
        // independent of |Y|).
        let y = 1u128 << 40;
        let mut max_ratio = 0.0f64;
        let mut worst = (0u64, 0u64);
        for k in 1..=64u64 {
            for q in 1..=64u64 {
                let ratio = bound_f(k, 2 * q, y).expect("valid") * y as f64
                    / ((k * k * k * k) as f64 * (q * q * q * q) as f64);
                if ratio > max_ratio {
                    max_ratio = ratio;
                    worst = (k, q);
                }
            }
        }
        let passed = completion_violations == 0 && max_ratio <= t.f_ratio_cap;
        CriterionResult {
            id: 12,
            name: "twisted-chain reduction",
            passed,
            measured: max_ratio,
            threshold: t.f_ratio_cap,
            seconds: 0.0,
            detail: format!(
                "100 completions, {completion_violations} violations; max F(k,2q)·|Y|/(k⁴q⁴) = \
                 {max_ratio:.1} at (k,q)={worst:?} — the additive (q+2)-term of F dominates at \
                 k=q=1 where k⁴q⁴=1; the ratio is below the cap everywhere else and tends to \
                 80e² ≈ 591 asymptotically",
            ),
        }
    })
}

/// Criterion 13: Sparse-oracle consistency and the sampling reduction.
pub fn criterion_13(t: &Thresholds) -> CriterionResult {
    timed(|| {
        let mut violations = 0usize;
        for seed in 0..20u64 {
            let g = WalkGraphHamiltonian::new(
                PermutationFamily::generate(seed, 4, 3).expect("valid"),
            );
            let dense = g.materialize().expect("under cap");
            let dim = g.dim();
            for a in 0..dim {
                let va = g.index_vertex(a);
                let mut row_sum = 0.0;
                for b in 0..dim {
                    let vb = g.index_vertex(b);
                    let entry = g.entry(va, vb).expect("valid") as f64;
                    if entry != dense[(a, b)] {
                        violations += 1;
                    }
                    row_sum += entry;
                }
                if row_sum > 2.0 {
                    violations += 1;
                }
                let slots: &[u8] = if va.0 == 0 || va.0 == g.levels() {
                    &[1]
                } else {
                    &[1, 2]
                };
                for &s in slots {
                    let nb = g.neighbor(va, s).expect("valid slot");
                    if g.entry(va, nb).expect("valid") != 1 {
                        violations += 1;
                    }
                }
            }
            if crate::sparse_oracle::component_count(&dense) != 8 {
                violations += 1;
            }
        }

        // Sampling reduction at L = 40, t = 10.
        let g = WalkGraphHamiltonian::new(PermutationFamily::generate(0x0d, 40, 4).expect("valid"));
        let mut rng = ChaCha8Rng::seed_from_u64(0x0d);
        let samples = 10_000usize;
        let mut beyond = 0usize;
        for _ in 0..samples {
            let out = g.run_reduction(10.0, &mut rng).expect("in range");
            if out.value != chain_point(g.family(), out.column, 0).expect("valid").value {
                violations += 1;
            }
            if out.column > 10 {
                beyond += 1;
            }
        }
        let rate = beyond as f64 / samples as f64;
        let passed = violations == 0 && rate >= t.late_prob_min;
        CriterionResult {
            id: 13,
            name: "sparse-oracle consistency",
            passed,
            measured: rate,
            threshold: t.late_prob_min,
            seconds: 0.0,
            detail: format!(
                "consistency violations: {violations}; Pr[q > 10] = {rate:.4} over {samples} samples"
            ),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn injected_fault_is_detected() {
        // Falsifiability: raising the tail threshold above the true
        // minimum tail mass (≈ 0.9419) must flip criterion 1 to a failure.
        let t = Thresholds {
            tail_min: 0.95,
            ..Thresholds::default()
        };
        // A shortened variant of criterion 1 (L = 50 only) to keep the
        // check quick.
        let walk = LineWalk::new(50).unwrap();
        let min_tail = (1..=25)
            .map(|step| walk.tail_mass(step as f64).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(min_tail < t.tail_min, "fault injection must trip");
        assert!(min_tail >= Thresholds::default().tail_min);
    }

    #[test]
    fn thresholds_are_the_contractual_constants() {
        let t = Thresholds::default();
        assert!((t.tail_min - (1.0 / 3.0 - 1e-9)).abs() < 1e-15);
        assert!((t.head_max - (2.0 / PI + 1e-6)).abs() < 1e-15);
        assert_eq!(t.image_sum_err, 1e-8);
        assert_eq!(t.bessel_form_err, 1e-6);
        assert_eq!(t.wavefront_window, 3.0);
        assert_eq!(t.f_ratio_cap, 1e4);
        assert!((t.late_prob_min - 0.31919).abs() < 1e-4);
    }
}
