//! Continuous-time quantum walk on a finite line.
//!
//! The Hamiltonian is the adjacency matrix of the path graph on vertices
//! `1..=L`. Its eigensystem is known in closed form:
//! `λ_p = 2 cos(pπ/(L+1))` with eigenvector entries
//! `v^{(p)}_j = sqrt(2/(L+1)) sin(jpπ/(L+1))`, so every propagator here is
//! evaluated spectrally in O(L) memory without any generic diagonalization.
//!
//! A note on phases: under the evolution `e^{-iHt}` a displacement of `d`
//! vertices on the infinite line carries the phase `(-i)^d`, i.e.
//! `<l|e^{-iHt}|k> = (-i)^{l-k} J_{l-k}(2t)`. (The sign follows from the
//! momentum integral with eigenvalue `2 cos p`; see the module tests, which
//! pin `<2|e^{-iHt}|1> = -i sin t` on the two-vertex line.)

use crate::bessel;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

pub const MAX_LENGTH: usize = 4096;

/// Phase `(-i)^d` for an integer displacement `d` (any sign).
pub fn minus_i_pow(d: i64) -> Complex64 {
    match d.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// The walk on a path graph with `L` vertices, stored through its
/// closed-form eigensystem.
#[derive(Debug, Clone)]
pub struct LineWalk {
    length: usize,
    eigenvalues: Vec<f64>,
}

/// Measurement distribution of the walk started at vertex 1.
#[derive(Debug, Clone)]
pub struct ProbabilityProfile {
    pub length: usize,
    pub time: f64,
    /// `probs[l-1]` is the probability of outcome `l`.
    pub probs: Vec<f64>,
}

impl LineWalk {
    pub fn new(length: usize) -> Result<Self> {
        if !(1..=MAX_LENGTH).contains(&length) {
            return Err(Error::domain(format!(
                "line length {length} outside 1..={MAX_LENGTH}"
            )));
        }
        let eigenvalues = (1..=length)
            .map(|p| 2.0 * (p as f64 * PI / (length as f64 + 1.0)).cos())
            .collect();
        Ok(LineWalk { length, eigenvalues })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    /// Eigenvalues `λ_p`, ordered by `p = 1..=L`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Entry `v^{(p)}_j` of the `p`-th eigenvector (both indices 1-based).
    pub fn eigenvector_entry(&self, p: usize, j: usize) -> f64 {
        let m = self.length as f64 + 1.0;
        (2.0 / m).sqrt() * ((j * p) as f64 * PI / m).sin()
    }

    /// Materialize the full eigenvector matrix (column `p-1` is `v^{(p)}`).
    /// Intended for tests and small exports.
    pub fn eigenvector_matrix(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.length, self.length, |j, p| {
            self.eigenvector_entry(p + 1, j + 1)
        })
    }

    fn check_vertex(&self, name: &str, v: usize) -> Result<()> {
        if v < 1 || v > self.length {
            return Err(Error::domain(format!(
                "vertex {name}={v} outside 1..={}",
                self.length
            )));
        }
        Ok(())
    }

    /// Amplitude `<l|e^{-iHt}|k>` via the spectral sum.
    pub fn propagator_exact(&self, k: usize, l: usize, t: f64) -> Result<Complex64> {
        self.check_vertex("k", k)?;
        self.check_vertex("l", l)?;
        if !t.is_finite() || t < 0.0 {
            return Err(Error::domain(format!("time {t} must be finite and ≥ 0")));
        }
        let mut amp = Complex64::new(0.0, 0.0);
        for (idx, &lambda) in self.eigenvalues.iter().enumerate() {
            let p = idx + 1;
            let weight = self.eigenvector_entry(p, l) * self.eigenvector_entry(p, k);
            amp += Complex64::from_polar(weight, -lambda * t);
        }
        Ok(amp)
    }

    /// Full measurement distribution from the start vertex 1.
    pub fn prob_profile(&self, t: f64) -> Result<ProbabilityProfile> {
        let mut probs = Vec::with_capacity(self.length);
        for l in 1..=self.length {
            let p = self.propagator_exact(1, l, t)?.norm_sqr();
            probs.push(if p > 0.0 { p } else { 0.0 });
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() >= 1e-9 {
            return Err(Error::internal(format!(
                "profile normalization drifted to {total} at t={t}, L={}",
                self.length
            )));
        }
        for p in probs.iter_mut() {
            *p /= total;
        }
        Ok(ProbabilityProfile {
            length: self.length,
            time: t,
            probs,
        })
    }

    /// Probability mass on `l ≥ ⌈t⌉` at time `t ∈ [0, L/2]`.
    pub fn tail_mass(&self, t: f64) -> Result<f64> {
        let profile = self.masses_profile(t)?;
        let from = (t.ceil() as usize).max(1);
        Ok(profile.probs[from - 1..].iter().sum())
    }

    /// Probability mass on `l ≤ ⌊t⌋` at time `t ∈ [0, L/2]`.
    pub fn head_mass(&self, t: f64) -> Result<f64> {
        let profile = self.masses_profile(t)?;
        let upto = (t.floor() as usize).min(self.length);
        Ok(profile.probs[..upto].iter().sum())
    }

    fn masses_profile(&self, t: f64) -> Result<ProbabilityProfile> {
        if !t.is_finite() || t < 0.0 || t > self.length as f64 / 2.0 {
            return Err(Error::domain(format!(
                "time {t} outside [0, {}]",
                self.length as f64 / 2.0
            )));
        }
        self.prob_profile(t)
    }
}

/// Infinite-line propagator for displacement `d`: `(-i)^d J_d(2t)`.
pub fn propagator_infinite(d: i64, t: f64) -> Result<Complex64> {
    if d.abs() > bessel::MAX_ORDER {
        return Err(Error::domain(format!(
            "displacement |{d}| exceeds {}",
            bessel::MAX_ORDER
        )));
    }
    if !t.is_finite() || !(0.0..=200.0).contains(&t) {
        return Err(Error::domain(format!("time {t} outside [0, 200]")));
    }
    Ok(minus_i_pow(d) * bessel::bessel_j(d, 2.0 * t)?)
}

/// One image term: the infinite-line amplitude at displacement `d`, with
/// orders beyond the Bessel cap resolved through the large-order estimate
/// (they are far past the wavefront, so they are treated as exact zeros
/// once the estimate is below 1e-16).
fn image_term(d: i64, two_t: f64) -> Result<Complex64> {
    if d.abs() <= bessel::MAX_ORDER {
        return Ok(minus_i_pow(d) * bessel::bessel_j(d, two_t)?);
    }
    let order = d.unsigned_abs();
    if two_t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if two_t < order as f64 {
        let estimate = bessel::large_order_estimate(order, two_t / order as f64)?;
        if estimate < 1e-16 {
            return Ok(Complex64::new(0.0, 0.0));
        }
    }
    Err(Error::domain(format!(
        "image term of order {d} at argument {two_t} is not evaluable"
    )))
}

/// Truncated method-of-images propagator for the finite line, start fixed
/// at vertex 1:
/// `Σ_{m=-m_max}^{m_max} G(1, l+2m(L+1), t) - G(1, -l+2m(L+1), t)`.
pub fn propagator_image_sum(length: usize, l: usize, t: f64, m_max: usize) -> Result<Complex64> {
    if !(1..=MAX_LENGTH).contains(&length) {
        return Err(Error::domain(format!(
            "line length {length} outside 1..={MAX_LENGTH}"
        )));
    }
    if l < 1 || l > length {
        return Err(Error::domain(format!("vertex l={l} outside 1..={length}")));
    }
    if m_max < 1 {
        return Err(Error::domain("m_max must be at least 1".to_string()));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::domain(format!("time {t} must be finite and ≥ 0")));
    }
    let period = 2 * (length as i64 + 1);
    let two_t = 2.0 * t;
    let mut sum = Complex64::new(0.0, 0.0);
    for m in -(m_max as i64)..=(m_max as i64) {
        let direct = l as i64 + m * period - 1;
        let reflected = -(l as i64) + m * period - 1;
        sum += image_term(direct, two_t)?;
        sum -= image_term(reflected, two_t)?;
    }
    Ok(sum)
}

/// Closed-form boundary propagator `(-i)^{l-1} (l/t) J_l(2t)`, the free-space
/// approximation of the finite-line amplitude from vertex 1. At `t = 0` it
/// is defined by its limit: 1 for `l = 1`, 0 otherwise.
pub fn propagator_bessel(l: usize, t: f64) -> Result<Complex64> {
    if l < 1 {
        return Err(Error::domain("vertex l must be ≥ 1".to_string()));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::domain(format!("time {t} must be finite and ≥ 0")));
    }
    if t == 0.0 {
        return Ok(Complex64::new(if l == 1 { 1.0 } else { 0.0 }, 0.0));
    }
    let j = bessel::bessel_j(l as i64, 2.0 * t)?;
    Ok(minus_i_pow(l as i64 - 1) * (l as f64 / t) * j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{self, CMatrix, CVector};
    use proptest::prelude::*;

    /// Test-only oracle: dense `e^{-iHt}` of the tridiagonal adjacency
    /// matrix through a generic eigendecomposition.
    fn dense_amplitude(length: usize, k: usize, l: usize, t: f64) -> Complex64 {
        let mut h = CMatrix::zeros(length, length);
        for j in 0..length - 1 {
            h[(j, j + 1)] = linalg::ONE;
            h[(j + 1, j)] = linalg::ONE;
        }
        let mut start = CVector::zeros(length);
        start[k - 1] = linalg::ONE;
        let evolved = linalg::evolve_hermitian(&h, &start, t);
        evolved[l - 1]
    }

    #[test]
    fn tiny_eigenvalue_tables() {
        assert!(LineWalk::new(1).unwrap().eigenvalues()[0].abs() < 1e-15);
        let w2 = LineWalk::new(2).unwrap();
        assert!((w2.eigenvalues()[0] - 1.0).abs() < 1e-15);
        assert!((w2.eigenvalues()[1] + 1.0).abs() < 1e-15);
        let w3 = LineWalk::new(3).unwrap();
        let want = [2f64.sqrt(), 0.0, -(2f64.sqrt())];
        for (got, want) in w3.eigenvalues().iter().zip(want) {
            assert!((got - want).abs() < 1e-14);
        }
        assert!(LineWalk::new(0).is_err());
        assert!(LineWalk::new(MAX_LENGTH + 1).is_err());
    }

    #[test]
    fn eigensystem_invariants() {
        let walk = LineWalk::new(40).unwrap();
        let v = walk.eigenvector_matrix();
        let gram = v.transpose() * &v;
        for r in 0..40 {
            for c in 0..40 {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!((gram[(r, c)] - want).abs() < 1e-12);
            }
        }
        // Σ_p λ_p v v^T reproduces the adjacency matrix entrywise.
        let mut recon = nalgebra::DMatrix::<f64>::zeros(40, 40);
        for p in 0..40 {
            let col = v.column(p);
            recon += walk.eigenvalues()[p] * col * col.transpose();
        }
        for r in 0..40usize {
            for c in 0..40usize {
                let want = if r.abs_diff(c) == 1 { 1.0 } else { 0.0 };
                assert!((recon[(r, c)] - want).abs() < 1e-10, "entry ({r},{c})");
            }
        }
    }

    #[test]
    fn exact_propagator_basics() {
        let walk = LineWalk::new(17).unwrap();
        for k in 1..=17 {
            let amp = walk.propagator_exact(k, k, 0.0).unwrap();
            assert!((amp - linalg::ONE).norm() < 1e-12);
        }
        // Two-vertex line is a bit flip: e^{-iHt} = cos t · I - i sin t · X.
        let w2 = LineWalk::new(2).unwrap();
        for &t in &[0.0, 0.3, 1.0, 2.7] {
            let amp = w2.propagator_exact(1, 2, t).unwrap();
            assert!((amp - Complex64::new(0.0, -t.sin())).norm() < 1e-13, "t={t}");
        }
        assert!(walk.propagator_exact(0, 1, 1.0).is_err());
        assert!(walk.propagator_exact(1, 18, 1.0).is_err());
    }

    #[test]
    fn exact_matches_dense_oracle() {
        let walk = LineWalk::new(100).unwrap();
        let got = walk.propagator_exact(1, 20, 10.0).unwrap();
        let want = dense_amplitude(100, 1, 20, 10.0);
        assert!((got - want).norm() < 1e-10);
        // Precomputed from the same oracle.
        assert!((got - Complex64::new(0.0, 0.3294955475506533)).norm() < 1e-12);

        let profile = walk.prob_profile(10.0).unwrap();
        for l in 1..=100 {
            let dense = dense_amplitude(100, 1, l, 10.0).norm_sqr();
            assert!((profile.probs[l - 1] - dense).abs() < 1e-10, "l={l}");
        }
    }

    #[test]
    fn unitarity_over_lengths() {
        for length in [1usize, 2, 3, 10, 50, 128, 256] {
            let walk = LineWalk::new(length).unwrap();
            for &t in &[0.5, 3.7, 12.25, 100.0] {
                let total: f64 = (1..=length)
                    .map(|l| walk.propagator_exact(1, l, t).unwrap().norm_sqr())
                    .sum();
                assert!((total - 1.0).abs() < 1e-9, "L={length}, t={t}");
            }
        }
    }

    #[test]
    fn infinite_line_values() {
        assert!((propagator_infinite(0, 0.0).unwrap() - linalg::ONE).norm() < 1e-15);
        // Displacement 1 carries phase -i.
        let got = propagator_infinite(1, 1.7).unwrap();
        let want = Complex64::new(0.0, -1.0) * bessel::bessel_j(1, 3.4).unwrap();
        assert!((got - want).norm() < 1e-15);
        // Displacement 5: phase (-i)^5 = -i, magnitude J_5(6).
        let got = propagator_infinite(5, 3.0).unwrap();
        let j5 = 0.3620870748871724; // J_5(6), 40-digit reference
        assert!((got - Complex64::new(0.0, -j5)).norm() < 1e-13);
        assert!(propagator_infinite(201, 1.0).is_err());
        assert!(propagator_infinite(0, 200.5).is_err());
    }

    #[test]
    fn image_sum_matches_exact() {
        let walk = LineWalk::new(100).unwrap();
        let got = propagator_image_sum(100, 10, 5.0, 2).unwrap();
        let want = walk.propagator_exact(1, 10, 5.0).unwrap();
        assert!((got - want).norm() < 1e-8);

        // Initial conditions.
        assert!(propagator_image_sum(100, 10, 0.0, 2).unwrap().norm() < 1e-15);
        assert!(
            (propagator_image_sum(20, 1, 0.0, 2).unwrap() - linalg::ONE).norm() < 1e-15
        );
    }

    #[test]
    fn image_sum_converges_in_m_max() {
        for &(l, t) in &[(10usize, 5.0f64), (50, 25.0), (99, 49.5), (1, 50.0)] {
            let one = propagator_image_sum(100, l, t, 1).unwrap();
            let two = propagator_image_sum(100, l, t, 2).unwrap();
            assert!((one - two).norm() < 1e-10, "l={l} t={t}");
        }
    }

    #[test]
    fn bessel_form_matches_exact_before_reflection() {
        let walk = LineWalk::new(100).unwrap();
        let got = propagator_bessel(12, 8.0).unwrap();
        let want = walk.propagator_exact(1, 12, 8.0).unwrap();
        assert!((got - want).norm() < 1e-8);

        assert!((propagator_bessel(1, 0.0).unwrap() - linalg::ONE).norm() == 0.0);
        assert_eq!(propagator_bessel(4, 0.0).unwrap(), linalg::ZERO);
    }

    #[test]
    fn bessel_recursion_in_situ() {
        // J_{l-1}(2t) + J_{l+1}(2t) = (l/t) J_l(2t), the identity behind the
        // closed boundary form.
        let mut t = 0.5;
        while t <= 50.0 {
            for l in 1..=100i64 {
                let a = bessel::bessel_j(l - 1, 2.0 * t).unwrap();
                let b = bessel::bessel_j(l, 2.0 * t).unwrap();
                let c = bessel::bessel_j(l + 1, 2.0 * t).unwrap();
                assert!(
                    (a + c - (l as f64 / t) * b).abs() <= 1e-10,
                    "l={l}, t={t}"
                );
            }
            t += 0.5;
        }
    }

    #[test]
    fn profile_point_mass_at_zero_time() {
        let walk = LineWalk::new(64).unwrap();
        let profile = walk.prob_profile(0.0).unwrap();
        assert!((profile.probs[0] - 1.0).abs() < 1e-12);
        assert!(profile.probs[1..].iter().all(|&p| p < 1e-12));
    }

    #[test]
    fn wavefront_location_mid_line() {
        let walk = LineWalk::new(100).unwrap();
        let profile = walk.prob_profile(25.0).unwrap();
        let argmax = profile
            .probs
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0
            + 1;
        assert!((argmax as i64 - 50).abs() <= 3, "argmax {argmax}");
    }

    #[test]
    fn masses_and_lemma_bounds() {
        let walk = LineWalk::new(100).unwrap();
        assert!((walk.tail_mass(0.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(walk.tail_mass(51.0).is_err());
        assert!(walk.head_mass(-0.5).is_err());

        let tail = walk.tail_mass(30.0).unwrap();
        let head = walk.head_mass(30.0).unwrap();
        // Precomputed with the dense oracle.
        assert!((tail - 0.9463754258848623).abs() < 1e-9);
        assert!((head - 0.0582756187687561).abs() < 1e-9);
        assert!(tail >= 1.0 / 3.0 - 1e-9);
        assert!(head <= 2.0 / PI + 1e-6);

        // tail + head double-counts exactly the integer vertex l = t.
        let p30 = walk.prob_profile(30.0).unwrap().probs[29];
        assert!((tail + head - 1.0 - p30).abs() < 1e-9);
        let tail_frac = walk.tail_mass(30.5).unwrap();
        let head_frac = walk.head_mass(30.5).unwrap();
        assert!((tail_frac + head_frac - 1.0).abs() < 1e-9);

        // The lemma bounds across a full (smaller) sweep.
        let w50 = LineWalk::new(50).unwrap();
        for t in 1..=25 {
            let tail = w50.tail_mass(t as f64).unwrap();
            let head = w50.head_mass(t as f64).unwrap();
            assert!(tail >= 1.0 / 3.0 - 1e-9, "t={t}");
            assert!(head <= 2.0 / PI + 1e-6, "t={t}");
        }
    }

    proptest! {
        #[test]
        fn symmetry_of_amplitudes(
            length in 2usize..60,
            seed_k in 0usize..1000,
            seed_l in 0usize..1000,
            t in 0.0f64..30.0,
        ) {
            let walk = LineWalk::new(length).unwrap();
            let k = seed_k % length + 1;
            let l = seed_l % length + 1;
            let a = walk.propagator_exact(k, l, t).unwrap();
            let b = walk.propagator_exact(l, k, t).unwrap();
            prop_assert!((a.norm() - b.norm()).abs() < 1e-10);
        }
    }
}
