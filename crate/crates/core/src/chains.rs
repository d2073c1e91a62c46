//! Permutation chains, the erased/hybrid/merged/repaired oracle family,
//! twisted (Feistel-style) hash chains with their completion procedure, and
//! query-transcript depth accounting.
//!
//! Oracles here are classical lookup tables; query cost is tracked by
//! explicit transcripts (layers of simultaneous queries; depth = number of
//! layers). The erased oracle's dummy image ⊥ is encoded as a flag word
//! with the top bit of an (n+1)-bit response set and zero payload, so that
//! XOR into a response register stays an involution and ⊥ cannot collide
//! with the string 0^n.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const MAX_LEVELS: usize = 64;
pub const MAX_BITS: u32 = 20;

/// The ⊥ response word for an `bits`-bit oracle: top flag bit set, payload
/// zero.
pub fn bot_word(bits: u32) -> u32 {
    1 << bits
}

/// Whether a response word carries the ⊥ flag.
pub fn is_bot(word: u32, bits: u32) -> bool {
    word >> bits & 1 == 1
}

/// A single oracle invocation, for transcripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Query {
    /// Query to the hash oracle.
    Hash { x: u32 },
    /// Query to permutation level `level` (negative = inverse).
    Perm { level: i32, x: u32 },
}

/// Layered record of oracle usage: depth is the number of layers, width of
/// a layer is the number of queries issued in it.
#[derive(Debug, Clone, Default, Serialize)]
pub struct QueryTranscript {
    pub layers: Vec<Vec<Query>>,
}

impl QueryTranscript {
    pub fn new() -> Self {
        QueryTranscript { layers: Vec::new() }
    }

    pub fn push_layer(&mut self, queries: Vec<Query>) {
        self.layers.push(queries);
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn width(&self, layer: usize) -> usize {
        self.layers[layer].len()
    }

    pub fn total_queries(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }
}

/// `L` seeded permutations of `{0, …, 2^n - 1}` with exact inverse tables.
#[derive(Debug, Clone)]
pub struct PermutationFamily {
    levels: usize,
    bits: u32,
    seed: u64,
    forward: Vec<Vec<u32>>,
    inverse: Vec<Vec<u32>>,
}

impl PermutationFamily {
    /// Fisher-Yates tables from one ChaCha stream per level.
    pub fn generate(seed: u64, levels: usize, bits: u32) -> Result<Self> {
        check_params(levels, bits)?;
        let n = 1usize << bits;
        let mut forward = Vec::with_capacity(levels);
        for level in 0..levels {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(level as u64 + 1);
            let mut table: Vec<u32> = (0..n as u32).collect();
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                table.swap(i, j);
            }
            forward.push(table);
        }
        let inverse = invert_tables(&forward);
        Ok(PermutationFamily {
            levels,
            bits,
            seed,
            forward,
            inverse,
        })
    }

    /// Wrap explicit tables (each must be a bijection).
    pub fn from_tables(seed: u64, bits: u32, tables: Vec<Vec<u32>>) -> Result<Self> {
        check_params(tables.len(), bits)?;
        let n = 1usize << bits;
        for (level, table) in tables.iter().enumerate() {
            if table.len() != n {
                return Err(Error::domain(format!(
                    "level {level} table has {} entries, expected {n}",
                    table.len()
                )));
            }
            let mut seen = vec![false; n];
            for &y in table {
                if y as usize >= n || seen[y as usize] {
                    return Err(Error::domain(format!(
                        "level {level} table is not a bijection"
                    )));
                }
                seen[y as usize] = true;
            }
        }
        let inverse = invert_tables(&tables);
        Ok(PermutationFamily {
            levels: tables.len(),
            bits,
            seed,
            forward: tables,
            inverse,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn domain_size(&self) -> u32 {
        1 << self.bits
    }

    /// `Π_level(x)`, levels 1-based.
    pub fn forward(&self, level: usize, x: u32) -> u32 {
        self.forward[level - 1][x as usize]
    }

    /// `Π_level^{-1}(x)`, levels 1-based.
    pub fn backward(&self, level: usize, x: u32) -> u32 {
        self.inverse[level - 1][x as usize]
    }

    fn check_query(&self, level_abs: usize, x: u32) -> Result<()> {
        if level_abs == 0 || level_abs > self.levels {
            return Err(Error::domain(format!(
                "permutation level ±{level_abs} outside 1..={}",
                self.levels
            )));
        }
        if x >= self.domain_size() {
            return Err(Error::domain(format!(
                "input {x} outside the {}-bit domain",
                self.bits
            )));
        }
        Ok(())
    }
}

fn check_params(levels: usize, bits: u32) -> Result<()> {
    if !(1..=MAX_LEVELS).contains(&levels) {
        return Err(Error::domain(format!(
            "level count {levels} outside 1..={MAX_LEVELS}"
        )));
    }
    if !(1..=MAX_BITS).contains(&bits) {
        return Err(Error::domain(format!(
            "domain bits {bits} outside 1..={MAX_BITS}"
        )));
    }
    Ok(())
}

fn invert_tables(forward: &[Vec<u32>]) -> Vec<Vec<u32>> {
    forward
        .iter()
        .map(|table| {
            let mut inv = vec![0u32; table.len()];
            for (x, &y) in table.iter().enumerate() {
                inv[y as usize] = x as u32;
            }
            inv
        })
        .collect()
}

/// A point of the permutation chain: `value = Π_index ∘ ⋯ ∘ Π_1 (start)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainPoint {
    pub index: usize,
    pub value: u32,
}

/// `index`-fold composition applied to `start`.
pub fn chain_point(family: &PermutationFamily, index: usize, start: u32) -> Result<ChainPoint> {
    if index > family.levels() {
        return Err(Error::domain(format!(
            "chain index {index} outside 0..={}",
            family.levels()
        )));
    }
    if start >= family.domain_size() {
        return Err(Error::domain(format!("start {start} outside the domain")));
    }
    let mut value = start;
    for level in 1..=index {
        value = family.forward(level, value);
    }
    Ok(ChainPoint { index, value })
}

/// Forward iteration with a transcript: one width-1 layer per level, the
/// honest sequential strategy.
pub fn chain_point_traced(
    family: &PermutationFamily,
    index: usize,
    start: u32,
) -> Result<(ChainPoint, QueryTranscript)> {
    let point = chain_point(family, index, start)?;
    let mut transcript = QueryTranscript::new();
    let mut value = start;
    for level in 1..=index {
        transcript.push_layer(vec![Query::Perm {
            level: level as i32,
            x: value,
        }]);
        value = family.forward(level, value);
    }
    Ok((point, transcript))
}

/// The full controlled-permutation oracle: level `j > 0` XORs `Π_j(x)` into
/// the response register, `j < 0` XORs `Π_{|j|}^{-1}(x)`.
pub fn spi_apply(family: &PermutationFamily, j: i32, x: u32, r: u32) -> Result<u32> {
    if j == 0 {
        return Err(Error::domain("oracle level 0 does not exist".to_string()));
    }
    family.check_query(j.unsigned_abs() as usize, x)?;
    let image = if j > 0 {
        family.forward(j as usize, x)
    } else {
        family.backward((-j) as usize, x)
    };
    Ok(r ^ image)
}

/// The erased view of a family along one chain: level `i` knows only the
/// edge `x̄_i ↦ x̄_{i+1}` and answers ⊥ everywhere else.
#[derive(Debug, Clone)]
pub struct ErasedChain {
    levels: usize,
    bits: u32,
    start: u32,
    /// `chain[i]` is `x̄_{i+1}`, so `chain[0] = start` and
    /// `chain[i] = Π_i(chain[i-1])`; length `levels + 1`.
    chain: Vec<u32>,
}

impl ErasedChain {
    pub fn new(family: &PermutationFamily, start: u32) -> Result<Self> {
        if start >= family.domain_size() {
            return Err(Error::domain(format!("start {start} outside the domain")));
        }
        let mut chain = Vec::with_capacity(family.levels() + 1);
        chain.push(start);
        for level in 1..=family.levels() {
            chain.push(family.forward(level, chain[level - 1]));
        }
        Ok(ErasedChain {
            levels: family.levels(),
            bits: family.bits(),
            start,
            chain,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    /// `x̄_1 .. x̄_{L+1}` (index 0 holds `x̄_1 = start`).
    pub fn chain(&self) -> &[u32] {
        &self.chain
    }

    fn check(&self, level: usize, x: u32) -> Result<()> {
        if level == 0 || level > self.levels {
            return Err(Error::domain(format!(
                "erased level {level} outside 1..={}",
                self.levels
            )));
        }
        if x >= 1 << self.bits {
            return Err(Error::domain(format!("input {x} outside the domain")));
        }
        Ok(())
    }

    /// `Π̃_i(x)`: the next chain element on the chain, ⊥ elsewhere.
    pub fn erased_apply(&self, level: usize, x: u32) -> Result<u32> {
        self.check(level, x)?;
        Ok(if x == self.chain[level - 1] {
            self.chain[level]
        } else {
            bot_word(self.bits)
        })
    }

    /// `Π̃_i^{-1}(x)`: the previous chain element, ⊥ elsewhere.
    pub fn erased_inverse(&self, level: usize, x: u32) -> Result<u32> {
        self.check(level, x)?;
        Ok(if x == self.chain[level] {
            self.chain[level - 1]
        } else {
            bot_word(self.bits)
        })
    }

    /// The hybrid oracle with cutoff `ℓ`: erased behavior on levels
    /// `|j| ≤ ℓ`, identity (response unchanged) beyond.
    pub fn hybrid_apply(&self, cutoff: usize, j: i32, x: u32, r: u32) -> Result<u32> {
        if j == 0 {
            return Err(Error::domain("oracle level 0 does not exist".to_string()));
        }
        if cutoff > self.levels {
            return Err(Error::domain(format!(
                "cutoff {cutoff} outside 0..={}",
                self.levels
            )));
        }
        let level = j.unsigned_abs() as usize;
        self.check(level, x)?;
        if level > cutoff {
            return Ok(r);
        }
        let image = if j > 0 {
            self.erased_apply(level, x)?
        } else {
            self.erased_inverse(level, x)?
        };
        Ok(r ^ image)
    }
}

/// The merged oracle: chain edges overlaid on an independent random family.
/// Not necessarily injective; at most one colliding pair per level.
#[derive(Debug, Clone)]
pub struct MergedChain {
    chain: Vec<u32>,
    random: PermutationFamily,
}

/// Merge an erased chain with an independent family: level `i` maps
/// `x̄_i ↦ x̄_{i+1}` and everything else through the random permutation.
pub fn merge_random(erased: &ErasedChain, random: &PermutationFamily) -> Result<MergedChain> {
    if erased.levels() != random.levels() || erased.bits() != random.bits() {
        return Err(Error::domain(format!(
            "shape mismatch: chain is ({}, {} bits), random family is ({}, {} bits)",
            erased.levels(),
            erased.bits(),
            random.levels(),
            random.bits()
        )));
    }
    Ok(MergedChain {
        chain: erased.chain().to_vec(),
        random: random.clone(),
    })
}

impl MergedChain {
    pub fn levels(&self) -> usize {
        self.random.levels()
    }

    pub fn bits(&self) -> u32 {
        self.random.bits()
    }

    pub fn chain(&self) -> &[u32] {
        &self.chain
    }

    pub fn random_family(&self) -> &PermutationFamily {
        &self.random
    }

    /// The merged map at `level` (total, possibly non-injective).
    pub fn apply(&self, level: usize, x: u32) -> Result<u32> {
        if level == 0 || level > self.levels() {
            return Err(Error::domain(format!(
                "merged level {level} outside 1..={}",
                self.levels()
            )));
        }
        if x >= self.random.domain_size() {
            return Err(Error::domain(format!("input {x} outside the domain")));
        }
        Ok(if x == self.chain[level - 1] {
            self.chain[level]
        } else {
            self.random.forward(level, x)
        })
    }

    /// The collision pre-image `x̄'_i = (Π^R_i)^{-1}(x̄_{i+1})` when it
    /// differs from `x̄_i` (then both map to `x̄_{i+1}`).
    pub fn collision(&self, level: usize) -> Result<Option<u32>> {
        if level == 0 || level > self.levels() {
            return Err(Error::domain(format!(
                "merged level {level} outside 1..={}",
                self.levels()
            )));
        }
        let xbar = self.chain[level - 1];
        let xnext = self.chain[level];
        let pre = self.random.backward(level, xnext);
        Ok((pre != xbar).then_some(pre))
    }
}

/// Repair a merged oracle back into a permutation family: the collision
/// pre-image `x̄'_i` is rerouted to the orphaned image `Π^R_i(x̄_i)`. The
/// chain edge stays intact and every level becomes a bijection again.
pub fn repair_to_permutation(merged: &MergedChain) -> Result<PermutationFamily> {
    let mut tables = Vec::with_capacity(merged.levels());
    for level in 1..=merged.levels() {
        let mut table = merged.random.forward[level - 1].clone();
        let xbar = merged.chain[level - 1];
        let xnext = merged.chain[level];
        let orphan = merged.random.forward(level, xbar);
        let pre = merged.random.backward(level, xnext);
        table[xbar as usize] = xnext;
        if pre != xbar {
            table[pre as usize] = orphan;
        }
        tables.push(table);
    }
    PermutationFamily::from_tables(merged.random.seed(), merged.bits(), tables)
}

/// A hash oracle on `bits`-bit strings.
pub trait HashOracle {
    fn bits(&self) -> u32;
    fn eval(&self, x: u32) -> u32;
}

/// Seeded random table, the random-oracle stand-in.
#[derive(Debug, Clone)]
pub struct TableHash {
    bits: u32,
    table: Vec<u32>,
}

impl TableHash {
    pub fn random(seed: u64, bits: u32) -> Result<Self> {
        if !(1..=MAX_BITS).contains(&bits) {
            return Err(Error::domain(format!(
                "domain bits {bits} outside 1..={MAX_BITS}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = (1u32 << bits) - 1;
        let table = (0..1usize << bits).map(|_| rng.gen::<u32>() & mask).collect();
        Ok(TableHash { bits, table })
    }
}

impl HashOracle for TableHash {
    fn bits(&self) -> u32 {
        self.bits
    }

    fn eval(&self, x: u32) -> u32 {
        self.table[x as usize]
    }
}

/// A twisted (Feistel-style) chain `x_i = h(x_{i-1}) ⊕ x_{i-2}` with the
/// convention `x_{-1} = 0^n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TwistedChain {
    pub elements: Vec<u32>,
}

impl TwistedChain {
    pub fn len_links(&self) -> usize {
        self.elements.len() - 1
    }

    /// Indices `i ∈ [1, s]` where the recurrence fails under `h`.
    pub fn violations<H: HashOracle>(&self, h: &H) -> Vec<usize> {
        let mut bad = Vec::new();
        for i in 1..self.elements.len() {
            let prev2 = if i >= 2 { self.elements[i - 2] } else { 0 };
            if self.elements[i] != h.eval(self.elements[i - 1]) ^ prev2 {
                bad.push(i);
            }
        }
        bad
    }
}

/// Forward computation of an `s`-chain from `x0`.
pub fn twisted_extend<H: HashOracle>(h: &H, x0: u32, s: usize) -> TwistedChain {
    let mut elements = Vec::with_capacity(s + 1);
    elements.push(x0);
    for i in 1..=s {
        let prev2 = if i >= 2 { elements[i - 2] } else { 0 };
        elements.push(h.eval(elements[i - 1]) ^ prev2);
    }
    TwistedChain { elements }
}

/// Check that `(x0, xq, xq1)` are elements `0`, `q`, `q+1` of the honest
/// chain from `x0`.
pub fn twisted_verify<H: HashOracle>(h: &H, x0: u32, xq: u32, xq1: u32, q: usize) -> Result<bool> {
    if q < 1 {
        return Err(Error::domain("verification requires q ≥ 1".to_string()));
    }
    let chain = twisted_extend(h, x0, q + 1);
    Ok(chain.elements[q] == xq && chain.elements[q + 1] == xq1)
}

/// Output of the chain-completion procedure.
#[derive(Debug, Clone, Serialize)]
pub struct CompletedChain {
    /// `x_0 .. x_{2q+1}`.
    pub chain: TwistedChain,
    /// `H'(x_q) := x_{q-1} ⊕ x_{q+1}`, the synthesized hash value at the
    /// splice point (never queried).
    pub synthesized_hash: u32,
    pub transcript: QueryTranscript,
}

/// Complete `(x0, xq, xq1)` into a `(2q+1)`-chain with `q` layers of
/// 2-parallel queries: the middle `x_1..x_{q-1}` grows forward from `x_0`
/// while `x_{q+2}..x_{2q+1}` grows forward from `(x_q, x_{q+1})`.
pub fn complete_chain_d<H: HashOracle>(
    h: &H,
    x0: u32,
    xq: u32,
    xq1: u32,
    q: usize,
) -> Result<CompletedChain> {
    if q < 1 {
        return Err(Error::domain("completion requires q ≥ 1".to_string()));
    }
    let mut x = vec![0u32; 2 * q + 2];
    x[0] = x0;
    x[q] = xq;
    x[q + 1] = xq1;
    let mut transcript = QueryTranscript::new();

    for i in 1..q {
        let (a, b) = (x[i - 1], x[q + i]);
        transcript.push_layer(vec![Query::Hash { x: a }, Query::Hash { x: b }]);
        let prev2 = if i >= 2 { x[i - 2] } else { 0 };
        x[i] = h.eval(a) ^ prev2;
        x[q + i + 1] = h.eval(b) ^ x[q + i - 1];
    }
    // Final layer: H(x_{q-1}) closes the front half, H(x_{2q}) extends the
    // back half to x_{2q+1}.
    let (a, b) = (x[q - 1], x[2 * q]);
    transcript.push_layer(vec![Query::Hash { x: a }, Query::Hash { x: b }]);
    x[2 * q + 1] = h.eval(b) ^ x[2 * q - 1];

    Ok(CompletedChain {
        synthesized_hash: x[q - 1] ^ x[q + 1],
        chain: TwistedChain { elements: x },
        transcript,
    })
}

/// Closed-form success bound for chain-producing algorithms:
/// `F(k, q) = (qek √(5kq(kq+1)/|Y|) + e(q+2) √(5(q+2)(q+3)/|Y|) + √((q+2)/|Y|))²`.
pub fn bound_f(k: u64, q: u64, y_size: u128) -> Result<f64> {
    if k < 1 || q < 1 {
        return Err(Error::domain(format!(
            "bound requires k ≥ 1 and q ≥ 1, got k={k}, q={q}"
        )));
    }
    if y_size < 2 {
        return Err(Error::domain(format!(
            "codomain size {y_size} must be at least 2"
        )));
    }
    let e = std::f64::consts::E;
    let y = y_size as f64;
    let kq = (k as u128 * q as u128) as f64;
    let first = (q as f64) * e * (k as f64) * (5.0 * kq * (kq + 1.0) / y).sqrt();
    let second = e * (q as f64 + 2.0) * (5.0 * (q as f64 + 2.0) * (q as f64 + 3.0) / y).sqrt();
    let third = ((q as f64 + 2.0) / y).sqrt();
    let sum = first + second + third;
    Ok(sum * sum)
}
