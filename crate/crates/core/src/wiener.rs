//! The discretized Wiener space: a uniform grid on [0, 1] whose normalized
//! increments `eta_1..eta_n` are i.i.d. N(0, 1), the resolution of the
//! identity it induces on `H = R^n`, and seeded Monte Carlo sampling.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chaos::{Ambient, ChaosPoly};
use crate::error::{Error, Result};
use crate::malliavin::{divergence_h, HField};
use crate::stats;

/// Rows per independent RNG substream.
pub const BLOCK_ROWS: usize = 1024;
pub const GENERATOR_ID: &str = "chacha20-stream-per-1024-rows/ziggurat-normal";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiscreteWienerSpace {
    n: usize,
}

impl DiscreteWienerSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("grid needs at least one cell".into()));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid points `theta_k = k / n`, `k = 0..=n`.
    pub fn grid(&self) -> Vec<f64> {
        (0..=self.n).map(|k| k as f64 / self.n as f64).collect()
    }

    pub fn resolution(&self) -> ResolutionOfIdentity {
        ResolutionOfIdentity { n: self.n }
    }

    pub fn ambient(&self, degree_cap: u32) -> Result<Ambient> {
        Ambient::new(self.n, degree_cap)
    }
}

/// The projections `pi_k` on `H = R^n` that keep coordinates `1..=k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResolutionOfIdentity {
    n: usize,
}

impl ResolutionOfIdentity {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn apply_pi(&self, k: usize, h: &[f64]) -> Result<Vec<f64>> {
        if k > self.n {
            return Err(Error::GridIndexOutOfRange { index: k, n: self.n });
        }
        if h.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: h.len() });
        }
        Ok(h.iter().enumerate().map(|(i, &x)| if i < k { x } else { 0.0 }).collect())
    }

    /// Dense matrix of `pi_k`.
    pub fn matrix(&self, k: usize) -> Result<nalgebra::DMatrix<f64>> {
        if k > self.n {
            return Err(Error::GridIndexOutOfRange { index: k, n: self.n });
        }
        Ok(nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| if i == j && i < k { 1.0 } else { 0.0 }))
    }
}

/// `N x n` matrix of i.i.d. standard Gaussians, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    n: usize,
    rows: usize,
    seed: u64,
    draws: Vec<f64>,
}

impl SampleBatch {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generator_id(&self) -> &'static str {
        GENERATOR_ID
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.draws[r * self.n..(r + 1) * self.n]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.draws.chunks_exact(self.n)
    }

    pub fn par_rows(&self) -> rayon::slice::ChunksExact<'_, f64> {
        self.draws.par_chunks_exact(self.n)
    }

    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows().map(|r| r[i]).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
        w.write_record((1..=self.n).map(|i| format!("eta_{i}"))).map_err(io)?;
        for row in self.rows() {
            w.write_record(row.iter().map(|x| x.to_string())).map_err(io)?;
        }
        w.flush().map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
        Ok(())
    }
}

/// Draws `rows` samples of the `n` grid increments.
///
/// Block `b` of [`BLOCK_ROWS`] rows comes from ChaCha20 stream `b` of `seed`,
/// so the batch is identical however the blocks are scheduled.
pub fn sample_batch(space: &DiscreteWienerSpace, rows: usize, seed: u64) -> Result<SampleBatch> {
    if rows == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let n = space.n;
    let mut draws = vec![0.0; rows * n];
    draws
        .par_chunks_mut(BLOCK_ROWS * n)
        .enumerate()
        .for_each(|(b, chunk)| {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            for x in chunk.iter_mut() {
                *x = StandardNormal.sample(&mut rng);
            }
        });
    Ok(SampleBatch { n, rows, seed, draws })
}

/// `delta(h)(omega) = sum_i h_i eta_i(omega)`.
pub fn delta_h(h: &[f64], sample: &[f64]) -> Result<f64> {
    if h.len() != sample.len() {
        return Err(Error::SampleLength { expected: h.len(), found: sample.len() });
    }
    Ok(h.iter().zip(sample).map(|(a, b)| a * b).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_samples: usize,
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub seed: u64,
}

impl MonteCarloEstimate {
    pub fn from_values(values: &[f64], seed: u64) -> Self {
        let mean = stats::mean(values);
        let stderr = (stats::variance(values) / values.len() as f64).sqrt();
        Self {
            mean,
            stderr,
            n_samples: values.len(),
            ci95_lo: mean - 1.96 * stderr,
            ci95_hi: mean + 1.96 * stderr,
            seed,
        }
    }

    pub fn ci95(&self) -> (f64, f64) {
        (self.ci95_lo, self.ci95_hi)
    }

    /// `|mean - target|` in units of the standard error (0 when both vanish).
    pub fn z_score(&self, target: f64) -> f64 {
        let gap = (self.mean - target).abs();
        if gap == 0.0 {
            0.0
        } else {
            gap / self.stderr
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }
}

/// Sample mean and standard error of `p` over the batch.
pub fn mc_estimate(p: &ChaosPoly, batch: &SampleBatch) -> Result<MonteCarloEstimate> {
    if p.dim() != batch.n {
        return Err(Error::DimensionMismatch { expected: p.dim(), found: batch.n });
    }
    let values: Vec<f64> = batch.par_rows().map(|row| p.evaluate_unchecked(row)).collect();
    Ok(MonteCarloEstimate::from_values(&values, batch.seed))
}

/// For each `n`, the exact L2 norm of `delta` applied to the field
/// `w -> w = sum_i eta_i e_i` on an `n`-cell grid.
pub fn identity_divergence_growth(n_list: &[usize]) -> Result<Vec<(usize, f64)>> {
    n_list
        .iter()
        .map(|&n| {
            let ambient = Ambient::with_dim(n)?;
            let coords = (1..=n).map(|i| ChaosPoly::coordinate(ambient, i)).collect::<Result<Vec<_>>>()?;
            let field = HField::new(coords)?;
            Ok((n, divergence_h(&field)?.l2_norm()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        let s = DiscreteWienerSpace::new(4).unwrap();
        assert_eq!(s.grid(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(DiscreteWienerSpace::new(0).is_err());
    }

    #[test]
    fn pi_examples() {
        let r = DiscreteWienerSpace::new(2).unwrap().resolution();
        assert_eq!(r.apply_pi(0, &[1.0, 2.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(r.apply_pi(2, &[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        assert_eq!(r.apply_pi(1, &[1.0, 1.0]).unwrap(), vec![1.0, 0.0]);
        assert!(matches!(r.apply_pi(3, &[1.0, 1.0]), Err(Error::GridIndexOutOfRange { .. })));
    }

    #[test]
    fn resolution_invariants() {
        for n in 1..=6 {
            let r = DiscreteWienerSpace::new(n).unwrap().resolution();
            assert_eq!(r.matrix(0).unwrap().norm(), 0.0);
            assert_eq!(r.matrix(n).unwrap(), nalgebra::DMatrix::identity(n, n));
            for k in 0..=n {
                let p = r.matrix(k).unwrap();
                assert_eq!(&p * &p, p);
                assert_eq!(p.transpose(), p);
                for j in 0..=k {
                    let q = r.matrix(j).unwrap();
                    // range(pi_j) inside range(pi_k)
                    assert_eq!(&p * &q, q);
                }
            }
        }
    }

    #[test]
    fn batch_is_reproducible() {
        let s = DiscreteWienerSpace::new(2).unwrap();
        let a = sample_batch(&s, 1, 7).unwrap();
        let b = sample_batch(&s, 1, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_batch(&s, 1, 8).unwrap());
        // a longer batch extends the shorter one
        let long = sample_batch(&s, 3000, 7).unwrap();
        assert_eq!(long.row(0), a.row(0));
        assert!(sample_batch(&s, 0, 7).is_err());
    }

    #[test]
    fn delta_h_examples() {
        assert_eq!(delta_h(&[1.0, 0.0], &[0.4, -2.0]).unwrap(), 0.4);
        assert_eq!(delta_h(&[0.0, 0.0], &[0.4, -2.0]).unwrap(), 0.0);
        assert!(delta_h(&[1.0], &[0.4, -2.0]).is_err());
    }

    #[test]
    fn constant_estimate_has_zero_stderr() {
        let s = DiscreteWienerSpace::new(1).unwrap();
        let batch = sample_batch(&s, 100, 1).unwrap();
        let est = mc_estimate(&ChaosPoly::constant(Ambient::with_dim(1).unwrap(), 1.0), &batch).unwrap();
        assert_eq!((est.mean, est.stderr), (1.0, 0.0));
        assert_eq!(est.ci95(), (1.0, 1.0));
    }

    #[test]
    fn estimate_rejects_dimension_mismatch() {
        let batch = sample_batch(&DiscreteWienerSpace::new(2).unwrap(), 10, 1).unwrap();
        let p = ChaosPoly::constant(Ambient::with_dim(3).unwrap(), 1.0);
        assert!(matches!(mc_estimate(&p, &batch), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn csv_header_and_rows() {
        let batch = sample_batch(&DiscreteWienerSpace::new(2).unwrap(), 2, 3).unwrap();
        let mut buf = Vec::new();
        batch.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "eta_1,eta_2");
        assert_eq!(lines.len(), 3);
        let first: Vec<f64> = lines[1].split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(first, batch.row(0));
    }

    #[test]
    fn identity_growth_examples() {
        let t = identity_divergence_growth(&[1, 2, 4]).unwrap();
        approx::assert_abs_diff_eq!(t[0].1, 2f64.sqrt(), epsilon = 1e-12);
        approx::assert_abs_diff_eq!(t[2].1, 8f64.sqrt(), epsilon = 1e-12);
        approx::assert_abs_diff_eq!(t[2].1 / t[1].1, 2f64.sqrt(), epsilon = 1e-12);
    }
}
