//! Implementations of the CLI subcommands: thin drivers over the library
//! operations with seeded determinism and uniform output conventions.

use crate::output::{csv_table, fmt_f64, json_pretty, Format, Sink};
use ffwd_core::chains::{
    chain_point_traced, complete_chain_d, twisted_verify, ErasedChain, PermutationFamily,
    TableHash,
};
use ffwd_core::clock::JohnsonClock;
use ffwd_core::feynman::{run_reduction_local, Gate, GateCircuit};
use ffwd_core::sparse_oracle::{component_count, WalkGraphHamiltonian};
use ffwd_core::timedep::{to_geometrically_local, to_piecewise};
use ffwd_core::walk::LineWalk;
use ffwd_core::{bessel, Error as CoreError};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum CliError {
    Core(CoreError),
    Io(std::io::Error),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(CoreError::Internal(_)) => 3,
            _ => 2,
        }
    }
}

pub type CmdResult = Result<(), CliError>;

fn parse_bits_string(text: &str) -> Result<(u64, usize), CliError> {
    let mut value = 0u64;
    for (i, c) in text.chars().enumerate() {
        match c {
            '0' => {}
            '1' => value |= 1 << i,
            _ => {
                return Err(CliError::Usage(format!(
                    "bitstring {text:?} may contain only 0 and 1"
                )))
            }
        }
    }
    Ok((value, text.chars().count()))
}

fn bits_string(value: u64, width: usize) -> String {
    (0..width)
        .map(|i| if value >> i & 1 == 1 { '1' } else { '0' })
        .collect()
}

// ---------------------------------------------------------------- walk

#[derive(Serialize)]
struct ProfileJson {
    length: usize,
    profiles: Vec<ProfileEntry>,
    time_series: Vec<SeriesEntry>,
}

#[derive(Serialize)]
struct ProfileEntry {
    t: f64,
    probs: Vec<f64>,
}

#[derive(Serialize)]
struct SeriesEntry {
    l: usize,
    times: Vec<f64>,
    probs: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn walk_profile(
    length: usize,
    times: &[f64],
    fixed_vertices: Option<Vec<usize>>,
    t_step: f64,
    format: Format,
    out: Option<PathBuf>,
) -> CmdResult {
    let walk = LineWalk::new(length)?;
    let fixed = fixed_vertices.unwrap_or_else(|| {
        let mut v: Vec<usize> = [1, length / 4, length / 2, 3 * length / 4, length]
            .iter()
            .copied()
            .filter(|&l| l >= 1)
            .collect();
        v.dedup();
        v
    });
    if t_step <= 0.0 {
        return Err(CliError::Usage("--t-step must be positive".to_string()));
    }

    let profiles: Vec<ProfileEntry> = times
        .iter()
        .map(|&t| {
            walk.prob_profile(t).map(|p| ProfileEntry {
                t,
                probs: p.probs,
            })
        })
        .collect::<Result<_, _>>()?;

    let horizon = length as f64 / 2.0;
    let grid: Vec<f64> = {
        let mut g = Vec::new();
        let mut t = 0.0;
        while t <= horizon + 1e-12 {
            g.push(t);
            t += t_step;
        }
        g
    };
    let series: Vec<SeriesEntry> = fixed
        .iter()
        .map(|&l| -> Result<SeriesEntry, CoreError> {
            if l < 1 || l > length {
                return Err(CoreError::Domain(format!(
                    "fixed vertex {l} outside 1..={length}"
                )));
            }
            let probs = grid
                .iter()
                .map(|&t| walk.propagator_exact(1, l, t).map(|a| a.norm_sqr()))
                .collect::<Result<_, _>>()?;
            Ok(SeriesEntry {
                l,
                times: grid.clone(),
                probs,
            })
        })
        .collect::<Result<_, _>>()?;

    let sink = Sink::new(out);
    match format {
        Format::Json => {
            let doc = ProfileJson {
                length,
                profiles,
                time_series: series,
            };
            sink.write_all(&json_pretty(&doc))?;
        }
        Format::Csv => {
            for profile in &profiles {
                let rows = profile
                    .probs
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| vec![(i + 1).to_string(), fmt_f64(p)]);
                sink.write_named(&format!("profile_t{}.csv", profile.t), &csv_table("l,P", rows))?;
            }
            for entry in &series {
                let rows = entry
                    .times
                    .iter()
                    .zip(entry.probs.iter())
                    .map(|(&t, &p)| vec![fmt_f64(t), fmt_f64(p)]);
                sink.write_named(&format!("fixed_l{}.csv", entry.l), &csv_table("t,P", rows))?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TailJson {
    length: usize,
    rows: Vec<TailRow>,
}

#[derive(Serialize)]
struct TailRow {
    t: f64,
    tail: f64,
    head: f64,
}

pub fn walk_tail(length: usize, times: &[f64], format: Format, out: Option<PathBuf>) -> CmdResult {
    let walk = LineWalk::new(length)?;
    let rows: Vec<TailRow> = times
        .iter()
        .map(|&t| -> Result<TailRow, CoreError> {
            Ok(TailRow {
                t,
                tail: walk.tail_mass(t)?,
                head: walk.head_mass(t)?,
            })
        })
        .collect::<Result<_, _>>()?;
    let sink = Sink::new(out);
    match format {
        Format::Json => sink.write_all(&json_pretty(&TailJson { length, rows }))?,
        Format::Csv => sink.write_all(&csv_table(
            "t,tail,head",
            rows.iter()
                .map(|r| vec![fmt_f64(r.t), fmt_f64(r.tail), fmt_f64(r.head)]),
        ))?,
    }
    Ok(())
}

// -------------------------------------------------------------- bessel

#[derive(Serialize)]
struct BesselBoundsRow {
    n: i64,
    envelope: f64,
    max_j_squared: f64,
    max_envelope_excess: f64,
    max_kra_excess: f64,
}

pub fn bessel_bounds(
    max_order: i64,
    samples: usize,
    format: Format,
    out: Option<PathBuf>,
) -> CmdResult {
    if max_order < 1 || samples < 2 {
        return Err(CliError::Usage(
            "--max-order must be ≥ 1 and --samples ≥ 2".to_string(),
        ));
    }
    let mut rows = Vec::new();
    for n in 1..=max_order {
        let envelope = bessel::tail_bound(n)?;
        let mut max_sq = 0.0f64;
        let mut max_env_excess = f64::NEG_INFINITY;
        let mut max_kra_excess = f64::NEG_INFINITY;
        for i in 0..samples {
            let x = 2.0 * n as f64 + (2.0 * n as f64) * i as f64 / (samples as f64 - 1.0);
            if x > bessel::MAX_ARGUMENT {
                break;
            }
            let sq = bessel::bessel_j(n, x)?.powi(2);
            max_sq = max_sq.max(sq);
            max_env_excess = max_env_excess.max(sq - envelope);
            if let Ok(bound) = bessel::kra_bound(n as f64, x) {
                max_kra_excess = max_kra_excess.max(sq - bound);
            }
        }
        rows.push(BesselBoundsRow {
            n,
            envelope,
            max_j_squared: max_sq,
            max_envelope_excess: max_env_excess,
            max_kra_excess,
        });
    }
    let sink = Sink::new(out);
    match format {
        Format::Json => sink.write_all(&json_pretty(&rows))?,
        Format::Csv => sink.write_all(&csv_table(
            "n,envelope,max_j_squared,max_envelope_excess,max_kra_excess",
            rows.iter().map(|r| {
                vec![
                    r.n.to_string(),
                    fmt_f64(r.envelope),
                    fmt_f64(r.max_j_squared),
                    fmt_f64(r.max_envelope_excess),
                    fmt_f64(r.max_kra_excess),
                ]
            }),
        ))?,
    }
    Ok(())
}

// --------------------------------------------------------------- clock

#[derive(Serialize)]
struct ClockReport {
    qubits: u32,
    weight: u32,
    path_length: u64,
    valid: bool,
    transitions_checked: u64,
    path: Option<Vec<String>>,
}

pub fn clock_verify(qubits: u32, weight: u32, format: Format, out: Option<PathBuf>) -> CmdResult {
    let clock = JohnsonClock::new(qubits, weight)?;
    let m = clock.path_len();
    let mut valid = true;
    let mut seen = std::collections::HashSet::new();
    let mut prev: Option<u32> = None;
    for j in 0..m {
        let s = clock.subset_at(j)?;
        if s.count_ones() != weight || !seen.insert(s) {
            valid = false;
        }
        if let Some(p) = prev {
            if (p & s).count_ones() != weight - 1 {
                valid = false;
            }
        }
        prev = Some(s);
    }
    // Brute-force transition check on path states (cheap sizes only).
    let mut transitions_checked = 0u64;
    if qubits <= 8 {
        for j in 0..m - 1 {
            for jp in 0..m {
                let state = clock.subset_at(jp)?;
                let got = clock.apply_transition(j, state)?;
                let ok = match got {
                    ffwd_core::clock::TransitionOutcome::Mapped(o) => {
                        jp == j && o == clock.subset_at(j + 1)?
                    }
                    ffwd_core::clock::TransitionOutcome::Annihilated => jp != j,
                };
                if !ok {
                    valid = false;
                }
                transitions_checked += 1;
            }
        }
    }
    let report = ClockReport {
        qubits,
        weight,
        path_length: m,
        valid,
        transitions_checked,
        path: matches!(format, Format::Json).then(|| {
            (0..m)
                .map(|j| clock.encoding_bits(j).expect("in range"))
                .collect()
        }),
    };
    let sink = Sink::new(out);
    match format {
        Format::Json => sink.write_all(&json_pretty(&report))?,
        Format::Csv => sink.write_all(&csv_table(
            "qubits,weight,path_length,valid,transitions_checked",
            [vec![
                report.qubits.to_string(),
                report.weight.to_string(),
                report.path_length.to_string(),
                report.valid.to_string(),
                report.transitions_checked.to_string(),
            ]],
        ))?,
    }
    if !valid {
        return Err(CliError::Core(CoreError::Internal(
            "clock path failed verification".to_string(),
        )));
    }
    Ok(())
}

// ------------------------------------------------------------- feynman

pub fn builtin_circuit(name: &str) -> Result<GateCircuit, CliError> {
    match name {
        "not" => Ok(GateCircuit::new(1, vec![Gate::x(0)])?),
        "perm3" => Ok(GateCircuit::new(
            3,
            vec![
                Gate::cnot(0, 1),
                Gate::swap(1, 2),
                Gate::cnot(2, 0),
                Gate::swap(0, 1),
            ],
        )?),
        other => Err(CliError::Usage(format!(
            "unknown builtin circuit {other:?} (available: not, perm3)"
        ))),
    }
}

pub fn load_circuit(
    circuit: &Option<PathBuf>,
    builtin: &Option<String>,
) -> Result<GateCircuit, CliError> {
    match (circuit, builtin) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)?;
            Ok(GateCircuit::from_json(&text)?)
        }
        (None, Some(name)) => builtin_circuit(name),
        _ => Err(CliError::Usage(
            "provide exactly one of --circuit or --builtin".to_string(),
        )),
    }
}

#[derive(Serialize)]
struct FeynmanRunReport {
    qubits: usize,
    block_gates: usize,
    iterations: usize,
    time: f64,
    input: String,
    samples: Vec<FeynmanSampleRow>,
}

#[derive(Serialize)]
struct FeynmanSampleRow {
    sample: usize,
    clock_outcome: usize,
    iterate: usize,
    outcome: String,
}

#[allow(clippy::too_many_arguments)]
pub fn feynman_run(
    circuit: Option<PathBuf>,
    builtin: Option<String>,
    iterations: usize,
    time: Option<f64>,
    input: Option<String>,
    samples: usize,
    seed: u64,
    format: Format,
    out: Option<PathBuf>,
) -> CmdResult {
    let block = load_circuit(&circuit, &builtin)?;
    let qubits = block.qubits();
    let s = block.len();
    let time = time.unwrap_or((s * iterations) as f64 / 2.0);
    let input_str = input.unwrap_or_else(|| "0".repeat(qubits));
    let (input_value, width) = parse_bits_string(&input_str)?;
    if width != qubits {
        return Err(CliError::Usage(format!(
            "input bitstring has {width} bits, the circuit has {qubits} qubits"
        )));
    }
    let input_state = GateCircuit::basis_state(qubits, input_value);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(samples);
    for sample in 0..samples {
        let outcome = run_reduction_local(&block, iterations, time, &input_state, &mut rng)?;
        rows.push(FeynmanSampleRow {
            sample,
            clock_outcome: outcome.clock_outcome,
            iterate: outcome.iterate,
            outcome: bits_string(outcome.measured, qubits),
        });
    }
    let sink = Sink::new(out);
    match format {
        Format::Json => sink.write_all(&json_pretty(&FeynmanRunReport {
            qubits,
            block_gates: s,
            iterations,
            time,
            input: input_str,
            samples: rows,
        }))?,
        Format::Csv => sink.write_all(&csv_table(
            "sample,clock_outcome,iterate,outcome",
            rows.iter().map(|r| {
                vec![
                    r.sample.to_string(),
                    r.clock_outcome.to_string(),
                    r.iterate.to_string(),
                    r.outcome.clone(),
                ]
            }),
        ))?,
    }
    Ok(())
}

// ------------------------------------------------------------- timedep

#[derive(Serialize)]
struct TimedepReport {
    qubits: usize,
    original_gates: usize,
    localized_gates: usize,
    wire_permutation: Vec<usize>,
    total_time: usize,
    evolved_to: f64,
    state: Vec<StateRow>,
}

#[derive(Serialize)]
struct StateRow {
    basis: String,
    re: f64,
    im: f64,
}

pub fn timedep_run(
    circuit: Option<PathBuf>,
    builtin: Option<String>,
    time: f64,
    input: Option<String>,
    format: Format,
    out: Option<PathBuf>,
) -> CmdResult {
    let base = load_circuit(&circuit, &builtin)?;
    let qubits = base.qubits();
    let local = to_geometrically_local(&base);
    let ph = to_piecewise(&local.circuit)?;
    let input_str = input.unwrap_or_else(|| "0".repeat(qubits));
    let (input_value, width) = parse_bits_string(&input_str)?;
    if width != qubits {
        return Err(CliError::Usage(format!(
            "input bitstring has {width} bits, the circuit has {qubits} qubits"
        )));
    }
    let state = ph.evolve(&GateCircuit::basis_state(qubits, input_value), time)?;
    let rows: Vec<StateRow> = state
        .iter()
        .enumerate()
        .map(|(idx, amp)| StateRow {
            basis: bits_string(idx as u64, qubits),
            re: amp.re,
            im: amp.im,
        })
        .collect();
    let report = TimedepReport {
        qubits,
        original_gates: base.len(),
        localized_gates: local.circuit.len(),
        wire_permutation: local.wire_permutation.clone(),
        total_time: ph.total_time(),
        evolved_to: time,
        state: rows,
    };
    let sink = Sink::new(out);
    match format {
        Format::Json => sink.write_all(&json_pretty(&report))?,
        Format::Csv => sink.write_all(&csv_table(
            "basis,re,im",
            report
                .state
                .iter()
                .map(|r| vec![r.basis.clone(), fmt_f64(r.re), fmt_f64(r.im)]),
        ))?,
    }
    Ok(())
}

// --------------------------------------------------------------- chain

#[derive(Serialize)]
struct ChainGenReport {
    seed: u64,
    levels: usize,
    bits: u32,
    start: u32,
    points: Vec<u32>,
    honest_depth: usize,
}

pub fn chain_gen(
    seed: u64,
    levels: usize,
    bits: u32,
    start: u32,
    format: Format,
    out: Option<PathBuf>,
) -> CmdResult {
    let family = PermutationFamily::generate(seed, levels, bits)?;
    let erased = ErasedChain::new(&family, start)?;
    let (_, transcript) = chain_point_traced(&family, levels, start)?;
    let report = ChainGenReport {
        seed,
        levels,
        bits,
        start,
        points: erased.chain().to_vec(),
        honest_depth: transcript.depth(),
    };
    let sink = Sink::new(out);
    match format {
        Format::Json => sink.write_all(&json_pretty(&report))?,
        Format::Csv => sink.write_all(&csv_table(
            "index,value",
            report
                .points
                .iter()
                .enumerate()
                .map(|(i, &v)| vec![(i + 1).to_string(), v.to_string()]),
        ))?,
    }
    Ok(())
}

#[derive(Serialize)]
#[allow(clippy::too_many_arguments)]
struct ChainVerifyReportDummy;

#[derive(Serialize)]
struct ChainVerifyReport {
    bits: u32,
    x0: u32,
    xq: u32,
    xq1: u32,
    q: usize,
    valid: bool,
}

pub fn chain_verify(
    seed: u64,
    bits: u32,
    x0: u32,
    xq: u32,
    xq1: u32,
    q: usize,
    format: Format,
    out: Option<PathBuf>,
) -> CmdResult {
    let h = TableHash::random(seed, bits)?;
    let valid = twisted_verify(&h, x0, xq, xq1, q)?;
    let report = ChainVerifyReport {
        bits,
        x0,
        xq,
        xq1,
        q,
        valid,
    };
    let sink = Sink::new(out);
    match format {
        Format::Json => sink.write_all(&json_pretty(&report))?,
        Format::Csv => sink.write_all(&csv_table(
            "bits,x0,xq,xq1,q,valid",
            [vec![
                bits.to_string(),
                x0.to_string(),
                xq.to_string(),
                xq1.to_string(),
                q.to_string(),
                valid.to_string(),
            ]],
        ))?,
    }
    Ok(())
}

#[derive(Serialize)]
struct ChainCompleteReport {
    bits: u32,
    q: usize,
    elements: Vec<u32>,
    synthesized_hash: u32,
    transcript_depth: usize,
    transcript_widths: Vec<usize>,
    recurrence_violations: Vec<usize>,
}

#[allow(clippy::too_many_arguments)]
pub fn chain_complete(
    seed: u64,
    bits: u32,
    x0: u32,
    xq: u32,
    xq1: u32,
    q: usize,
    format: Format,
    out: Option<PathBuf>,
) -> CmdResult {
    let h = TableHash::random(seed, bits)?;
    let completed = complete_chain_d(&h, x0, xq, xq1, q)?;
    let report = ChainCompleteReport {
        bits,
        q,
        elements: completed.chain.elements.clone(),
        synthesized_hash: completed.synthesized_hash,
        transcript_depth: completed.transcript.depth(),
        transcript_widths: completed
            .transcript
            .layers
            .iter()
            .map(|l| l.len())
            .collect(),
        recurrence_violations: completed.chain.violations(&h),
    };
    let sink = Sink::new(out);
    match format {
        Format::Json => sink.write_all(&json_pretty(&report))?,
        Format::Csv => sink.write_all(&csv_table(
            "index,value",
            report
                .elements
                .iter()
                .enumerate()
                .map(|(i, &v)| vec![i.to_string(), v.to_string()]),
        ))?,
    }
    Ok(())
}

// -------------------------------------------------------------- oracle

#[derive(Serialize)]
struct OracleCheckReport {
    seed: u64,
    levels: usize,
    bits: u32,
    dim: usize,
    consistent: bool,
    components: Option<usize>,
    reduction: Option<OracleReductionRow>,
}

#[derive(Serialize)]
struct OracleReductionRow {
    time: f64,
    column: usize,
    value: u32,
    transcript_depth: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn oracle_check(
    seed: u64,
    levels: usize,
    bits: u32,
    time: Option<f64>,
    export_matrix: bool,
    format: Format,
    out: Option<PathBuf>,
) -> CmdResult {
    let g = WalkGraphHamiltonian::new(PermutationFamily::generate(seed, levels, bits)?);
    let dim = g.dim();

    let mut consistent = true;
    let mut components = None;
    if dim <= ffwd_core::sparse_oracle::MAX_DENSE_DIM {
        let dense = g.materialize()?;
        for a in 0..dim {
            for b in 0..dim {
                if g.entry(g.index_vertex(a), g.index_vertex(b))? as f64 != dense[(a, b)] {
                    consistent = false;
                }
            }
        }
        components = Some(component_count(&dense));
    }

    let reduction = match time {
        Some(t) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let outcome = g.run_reduction(t, &mut rng)?;
            Some(OracleReductionRow {
                time: t,
                column: outcome.column,
                value: outcome.value,
                transcript_depth: outcome.transcript.depth(),
            })
        }
        None => None,
    };

    let sink = Sink::new(out);
    if export_matrix {
        let dense = g.materialize()?;
        match format {
            Format::Csv => {
                let mut rows = Vec::new();
                for r in 0..dim {
                    for c in 0..dim {
                        if dense[(r, c)] != 0.0 {
                            rows.push(vec![r.to_string(), c.to_string(), fmt_f64(dense[(r, c)])]);
                        }
                    }
                }
                sink.write_all(&csv_table("row,col,value", rows))?;
            }
            Format::Json => {
                #[derive(Serialize)]
                struct MatrixJson {
                    dim: usize,
                    entries: Vec<(usize, usize, f64)>,
                }
                let entries = (0..dim)
                    .flat_map(|r| (0..dim).map(move |c| (r, c)))
                    .filter(|&(r, c)| dense[(r, c)] != 0.0)
                    .map(|(r, c)| (r, c, dense[(r, c)]))
                    .collect();
                sink.write_all(&json_pretty(&MatrixJson { dim, entries }))?;
            }
        }
    } else {
        let report = OracleCheckReport {
            seed,
            levels,
            bits,
            dim,
            consistent,
            components,
            reduction,
        };
        match format {
            Format::Json => sink.write_all(&json_pretty(&report))?,
            Format::Csv => sink.write_all(&csv_table(
                "seed,levels,bits,dim,consistent,components",
                [vec![
                    seed.to_string(),
                    levels.to_string(),
                    bits.to_string(),
                    dim.to_string(),
                    consistent.to_string(),
                    components.map(|c| c.to_string()).unwrap_or_default(),
                ]],
            ))?,
        }
    }
    if !consistent {
        return Err(CliError::Core(CoreError::Internal(
            "oracle answers disagree with the dense matrix".to_string(),
        )));
    }
    Ok(())
}

// ---------------------------------------------------------- acceptance

#[derive(Serialize)]
struct AcceptanceReport {
    schema: &'static str,
    /// The only timestamp in any output.
    generated_unix_seconds: u64,
    total: usize,
    passed: usize,
    all_passed: bool,
    criteria: Vec<ffwd_core::acceptance::CriterionResult>,
}

/// Runs the full suite; returns whether every criterion passed.
pub fn acceptance(out: Option<PathBuf>) -> Result<bool, CliError> {
    let results = ffwd_core::acceptance::run_all();
    for r in &results {
        println!("{}", r.summary_line());
    }
    let passed = results.iter().filter(|r| r.passed).count();
    let all_passed = passed == results.len();
    println!("{passed}/{} criteria passed", results.len());
    let report = AcceptanceReport {
        schema: "acceptance-report/v1",
        generated_unix_seconds: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        total: results.len(),
        passed,
        all_passed,
        criteria: results,
    };
    if let Some(path) = out {
        std::fs::write(path, json_pretty(&report))?;
    }
    Ok(all_passed)
}
