//! Sparse-oracle view of the permutation-chain walk graph.
//!
//! Vertices are pairs `(j, x)` with column `j ∈ 0..=L` and an n-bit label
//! `x`; column `j` connects to column `j+1` through the edge
//! `(j, x) — (j+1, Π_{j+1}(x))`. The resulting Hamiltonian (the adjacency
//! matrix) is 2-sparse with 0/1 entries, and because every level is a
//! bijection the graph splits into `2^n` disjoint lines; evolution from
//! `(0, x₀)` therefore reduces to the closed-form line walk along the
//! chain through `x₀`.

use crate::chains::{PermutationFamily, Query, QueryTranscript};
use crate::error::{Error, Result};
use crate::walk::LineWalk;
use nalgebra::DMatrix;
use rand::Rng;
use serde::Serialize;

pub const MAX_DENSE_DIM: usize = 4096;

/// A vertex `(column, label)` of the walk graph.
pub type Vertex = (usize, u32);

/// The walk-graph Hamiltonian, accessed by entry and structure oracles.
#[derive(Debug, Clone)]
pub struct WalkGraphHamiltonian {
    family: PermutationFamily,
}

/// Outcome of the sampling reduction.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReduction {
    /// Sampled column `q`.
    pub column: usize,
    /// Sampled label, always the chain point `f^{(q)}(0^n)`.
    pub value: u32,
    pub transcript: QueryTranscript,
}

impl WalkGraphHamiltonian {
    pub fn new(family: PermutationFamily) -> Self {
        WalkGraphHamiltonian { family }
    }

    pub fn family(&self) -> &PermutationFamily {
        &self.family
    }

    pub fn levels(&self) -> usize {
        self.family.levels()
    }

    pub fn bits(&self) -> u32 {
        self.family.bits()
    }

    /// Total vertex count `(L+1)·2^n`.
    pub fn dim(&self) -> usize {
        (self.levels() + 1) << self.bits()
    }

    fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v.0 > self.levels() {
            return Err(Error::domain(format!(
                "column {} outside 0..={}",
                v.0,
                self.levels()
            )));
        }
        if v.1 >= self.family.domain_size() {
            return Err(Error::domain(format!(
                "label {} outside the {}-bit domain",
                v.1,
                self.bits()
            )));
        }
        Ok(())
    }

    /// Dense index of a vertex: `j · 2^n + x`.
    pub fn vertex_index(&self, v: Vertex) -> usize {
        (v.0 << self.bits()) + v.1 as usize
    }

    pub fn index_vertex(&self, idx: usize) -> Vertex {
        ((idx >> self.bits()), (idx & ((1 << self.bits()) - 1)) as u32)
    }

    /// Entry oracle: the matrix element between two vertices, 0 or 1.
    pub fn entry(&self, a: Vertex, b: Vertex) -> Result<u8> {
        self.check_vertex(a)?;
        self.check_vertex(b)?;
        let (j, x) = a;
        let (jp, xp) = b;
        let hit = (jp == j + 1 && xp == self.family.forward(j + 1, x))
            || (j > 0 && jp + 1 == j && xp == self.family.backward(j, x));
        Ok(hit as u8)
    }

    /// Sparse structure oracle: the `slot`-th neighbor of a vertex.
    /// Boundary columns have a single neighbor at slot 1; interior columns
    /// expose the backward neighbor at slot 1 and the forward one at
    /// slot 2.
    pub fn neighbor(&self, v: Vertex, slot: u8) -> Result<Vertex> {
        self.check_vertex(v)?;
        let (j, x) = v;
        let last = self.levels();
        match (j, slot) {
            (0, 1) => Ok((1, self.family.forward(1, x))),
            (j, 1) if j == last => Ok((last - 1, self.family.backward(last, x))),
            (j, 1) => Ok((j - 1, self.family.backward(j, x))),
            (j, 2) if j > 0 && j < last => Ok((j + 1, self.family.forward(j + 1, x))),
            (_, 2) => Err(Error::slot(format!(
                "boundary column {j} has a single neighbor"
            ))),
            (_, s) => Err(Error::slot(format!("slot {s} outside {{1, 2}}"))),
        }
    }

    /// Dense adjacency matrix. Errors above the dimension cap.
    pub fn materialize(&self) -> Result<DMatrix<f64>> {
        let dim = self.dim();
        if dim > MAX_DENSE_DIM {
            return Err(Error::capacity(format!(
                "dense dimension {dim} exceeds {MAX_DENSE_DIM}"
            )));
        }
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for j in 0..self.levels() {
            for x in 0..self.family.domain_size() {
                let a = self.vertex_index((j, x));
                let b = self.vertex_index((j + 1, self.family.forward(j + 1, x)));
                h[(a, b)] = 1.0;
                h[(b, a)] = 1.0;
            }
        }
        Ok(h)
    }

    /// The sampling reduction: identify the line through `(0, 0^n)` with
    /// `L` sequential forward queries, evolve along it with the closed-form
    /// propagator, and sample a vertex at time `t ∈ [0, L/2]`.
    pub fn run_reduction<R: Rng>(&self, t: f64, rng: &mut R) -> Result<OracleReduction> {
        let levels = self.levels();
        if !t.is_finite() || t < 0.0 || t > levels as f64 / 2.0 {
            return Err(Error::domain(format!(
                "time {t} outside [0, {}]",
                levels as f64 / 2.0
            )));
        }
        let mut transcript = QueryTranscript::new();
        let mut chain = Vec::with_capacity(levels + 1);
        chain.push(0u32);
        for level in 1..=levels {
            transcript.push_layer(vec![Query::Perm {
                level: level as i32,
                x: chain[level - 1],
            }]);
            chain.push(self.family.forward(level, chain[level - 1]));
        }

        let line = LineWalk::new(levels + 1)?;
        let weights: Vec<f64> = (0..=levels)
            .map(|j| {
                line.propagator_exact(1, j + 1, t)
                    .map(|amp| amp.norm_sqr())
            })
            .collect::<Result<_>>()?;
        let total: f64 = weights.iter().sum();
        let mut draw = rng.gen::<f64>() * total;
        let mut column = levels;
        for (j, w) in weights.iter().enumerate() {
            draw -= w;
            if draw <= 0.0 {
                column = j;
                break;
            }
        }
        Ok(OracleReduction {
            column,
            value: chain[column],
            transcript,
        })
    }
}

/// Connected components of the graph via union-find; test/inspection aid.
pub fn component_count(h: &DMatrix<f64>) -> usize {
    let n = h.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut a: usize) -> usize {
        while parent[a] != a {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        a
    }
    for r in 0..n {
        for c in r + 1..n {
            if h[(r, c)] != 0.0 {
                let (ra, rb) = (find(&mut parent, r), find(&mut parent, c));
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
    }
    let mut roots = std::collections::HashSet::new();
    for v in 0..n {
        roots.insert(find(&mut parent, v));
    }
    roots.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chains::chain_point;
    use crate::linalg::{self, CMatrix, CVector};
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph(seed: u64, levels: usize, bits: u32) -> WalkGraphHamiltonian {
        WalkGraphHamiltonian::new(PermutationFamily::generate(seed, levels, bits).unwrap())
    }

    #[test]
    fn entry_oracle_rules() {
        let g = graph(4, 3, 2);
        let fam = g.family().clone();
        for x in 0..4u32 {
            assert_eq!(g.entry((0, x), (1, fam.forward(1, x))).unwrap(), 1);
            assert_eq!(g.entry((1, fam.forward(1, x)), (0, x)).unwrap(), 1);
            for xp in 0..4u32 {
                // Same-column vertices are never adjacent.
                assert_eq!(g.entry((1, x), (1, xp)).unwrap(), 0);
                if xp != fam.forward(1, x) {
                    assert_eq!(g.entry((0, x), (1, xp)).unwrap(), 0);
                }
            }
        }
        assert!(g.entry((4, 0), (0, 0)).is_err());
        assert!(g.entry((0, 4), (0, 0)).is_err());
    }

    #[test]
    fn structure_oracle_rules() {
        let g = graph(9, 4, 3);
        let fam = g.family().clone();
        for x in 0..8u32 {
            assert_eq!(g.neighbor((0, x), 1).unwrap(), (1, fam.forward(1, x)));
            assert_eq!(g.neighbor((4, x), 1).unwrap(), (3, fam.backward(4, x)));
            assert_eq!(g.neighbor((2, x), 1).unwrap(), (1, fam.backward(2, x)));
            assert_eq!(g.neighbor((2, x), 2).unwrap(), (3, fam.forward(3, x)));
        }
        assert!(matches!(
            g.neighbor((0, 0), 2),
            Err(crate::error::Error::Slot(_))
        ));
        assert!(matches!(
            g.neighbor((4, 0), 2),
            Err(crate::error::Error::Slot(_))
        ));
        assert!(g.neighbor((1, 0), 3).is_err());
    }

    #[test]
    fn oracles_agree_with_dense_matrix() {
        for seed in 0..20u64 {
            let g = graph(seed, 4, 3);
            let dense = g.materialize().unwrap();
            let dim = g.dim();
            for a in 0..dim {
                for b in 0..dim {
                    let va = g.index_vertex(a);
                    let vb = g.index_vertex(b);
                    assert_eq!(
                        g.entry(va, vb).unwrap() as f64,
                        dense[(a, b)],
                        "seed {seed}, ({va:?}, {vb:?})"
                    );
                }
            }
            // Structure oracle hits actual edges.
            for idx in 0..dim {
                let v = g.index_vertex(idx);
                let slots: &[u8] = if v.0 == 0 || v.0 == g.levels() {
                    &[1]
                } else {
                    &[1, 2]
                };
                for &s in slots {
                    let nb = g.neighbor(v, s).unwrap();
                    assert_eq!(g.entry(v, nb).unwrap(), 1);
                }
            }
        }
    }

    #[test]
    fn dense_matrix_shape_invariants() {
        for seed in 0..50u64 {
            let g = graph(seed, 4, 3);
            let dense = g.materialize().unwrap();
            // Symmetric, 0/1-valued, row sums ∈ {1, 2}.
            for r in 0..dense.nrows() {
                let mut row_sum = 0.0;
                for c in 0..dense.ncols() {
                    let v = dense[(r, c)];
                    assert!(v == 0.0 || v == 1.0);
                    assert_eq!(v, dense[(c, r)]);
                    row_sum += v;
                }
                assert!(row_sum == 1.0 || row_sum == 2.0, "row {r} sum {row_sum}");
            }
        }
    }

    #[test]
    fn identity_family_pairs_columns() {
        let tables = vec![(0..4u32).collect::<Vec<_>>()];
        let fam = PermutationFamily::from_tables(0, 2, tables).unwrap();
        let g = WalkGraphHamiltonian::new(fam);
        let dense = g.materialize().unwrap();
        for x in 0..4u32 {
            let a = g.vertex_index((0, x));
            let b = g.vertex_index((1, x));
            assert_eq!(dense[(a, b)], 1.0);
        }
        assert_eq!(dense.sum(), 8.0); // 4 undirected edges
    }

    #[test]
    fn graph_splits_into_disjoint_lines() {
        for seed in [1u64, 17, 33] {
            let g = graph(seed, 4, 3);
            let dense = g.materialize().unwrap();
            assert_eq!(component_count(&dense), 8);
        }
    }

    #[test]
    fn capacity_cap() {
        let g = graph(0, 16, 8);
        assert!(matches!(
            g.materialize(),
            Err(crate::error::Error::Capacity(_))
        ));
    }

    #[test]
    fn dense_evolution_stays_on_the_line() {
        let g = graph(23, 4, 2);
        let dense = g.materialize().unwrap();
        let cdense = CMatrix::from_fn(dense.nrows(), dense.ncols(), |r, c| {
            Complex64::new(dense[(r, c)], 0.0)
        });
        let mut start = CVector::zeros(g.dim());
        start[g.vertex_index((0, 0))] = linalg::ONE;
        let evolved = linalg::evolve_hermitian(&cdense, &start, 1.7);

        // The chain through 0 spans the invariant line.
        let line_vertices: Vec<usize> = (0..=4)
            .map(|j| g.vertex_index((j, chain_point(g.family(), j, 0).unwrap().value)))
            .collect();
        let on_line: f64 = line_vertices.iter().map(|&i| evolved[i].norm_sqr()).sum();
        assert!((1.0 - on_line).abs() < 1e-9, "off-line mass {}", 1.0 - on_line);

        // Amplitudes along the line match the closed-form walk.
        let line = LineWalk::new(5).unwrap();
        for (j, &idx) in line_vertices.iter().enumerate() {
            let want = line.propagator_exact(1, j + 1, 1.7).unwrap();
            assert!((evolved[idx] - want).norm() < 1e-9, "column {j}");
        }
    }

    #[test]
    fn reduction_samples_chain_points() {
        let g = graph(5, 40, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);

        let zero = g.run_reduction(0.0, &mut rng).unwrap();
        assert_eq!(zero.column, 0);
        assert_eq!(zero.value, 0);

        let mut beyond = 0usize;
        let samples = 2000usize;
        for _ in 0..samples {
            let out = g.run_reduction(10.0, &mut rng).unwrap();
            assert_eq!(
                out.value,
                chain_point(g.family(), out.column, 0).unwrap().value
            );
            assert_eq!(out.transcript.depth(), 40);
            assert!(out.transcript.layers.iter().all(|l| l.len() == 1));
            if out.column > 10 {
                beyond += 1;
            }
        }
        let rate = beyond as f64 / samples as f64;
        assert!(rate >= 1.0 / 3.0 - 0.04, "Pr[q > t] ≈ {rate}");

        assert!(g.run_reduction(21.0, &mut rng).is_err());
        assert!(g.run_reduction(-1.0, &mut rng).is_err());
    }
}
