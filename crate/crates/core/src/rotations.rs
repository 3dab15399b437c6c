//! Measure-preserving rotations `Tw = delta R` of the discrete Wiener space.
//!
//! `R(omega)` is stored as an `dim x n` matrix whose column `i` is the
//! `H`-field `R e_i`. Weak adaptedness means row `j` of `R` depends on
//! `eta_1..eta_{j-1}` only; then every `R e_i` is predictable and
//! `Tw_i = delta(R e_i) = sum_j R_{ji} eta_j` pathwise. The operator field
//! handed to [`divergence_op`](crate::malliavin::divergence_op) is `K = R^T`,
//! whose row `i` is `R e_i`.
//!
//! Isometries are built row by row: row `j` is the first vector of an
//! orthonormal frame of the complement of rows `1..j-1`, after Givens rotations
//! whose angles are bounded functions (`atan` of polynomials) of the past.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::adapted::WeaklyAdaptedOperator;
use crate::chaos::{Ambient, ChaosPoly};
use crate::clark::{clark_integrand, reconstruct};
use crate::error::{Error, Result};
use crate::malliavin::{HField, OperatorField, VField};
use crate::random;
use crate::stats;
use crate::wiener::{sample_batch, DiscreteWienerSpace, SampleBatch};

pub const ALPHA: f64 = 0.01;
pub const Z_THRESHOLD: f64 = 4.0;
const ONB_TOL: f64 = 1e-12;
const MAX_ANGLE_DEGREE: u32 = 4;

/// How the stage-wise angle functions are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AngleSpec {
    /// `R = I`.
    Zero,
    /// Row `j` is `sign(eta_{j-1}) e_j` for `j >= 2`.
    Sign,
    /// A fixed Haar-random orthogonal matrix.
    Constant,
    /// Givens angles `atan(p(eta_1..eta_{j-1}))` with random polynomials `p`
    /// of the given degree.
    Arctan { degree: u32 },
}

impl FromStr for AngleSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let spec = match (head, arg) {
            ("identity" | "zero", None) => AngleSpec::Zero,
            ("sign", None) => AngleSpec::Sign,
            ("constant", None) => AngleSpec::Constant,
            ("arctan", None) => AngleSpec::Arctan { degree: 2 },
            ("arctan", Some(d)) => AngleSpec::Arctan {
                degree: d.parse().map_err(|_| Error::InvalidArgument(format!("bad arctan degree `{d}`")))?,
            },
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "unknown construction `{s}` (expected identity, sign, constant, arctan[:degree])"
                )))
            }
        };
        Ok(spec)
    }
}

impl fmt::Display for AngleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngleSpec::Zero => write!(f, "identity"),
            AngleSpec::Sign => write!(f, "sign"),
            AngleSpec::Constant => write!(f, "constant"),
            AngleSpec::Arctan { degree } => write!(f, "arctan:{degree}"),
        }
    }
}

/// Deliberate violations of the isometry property, used to check that the
/// batteries have power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Defect {
    /// `R e_column` is multiplied by `factor`.
    ScaleColumn { column: usize, factor: f64 },
    /// `R e_to` is replaced by `R e_from`.
    CopyColumn { from: usize, to: usize },
}

#[derive(Debug, Clone, PartialEq)]
struct Stage {
    /// `(k, p)`: rotate frame vectors `j` and `k` by `atan(p)`.
    angles: Vec<(usize, ChaosPoly)>,
    /// Multiply row `j` by `sign(eta_c)`.
    sign_of: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
enum Rule {
    Sequential { base: DMatrix<f64>, stages: Vec<Stage> },
    /// `K = R^T` with polynomial entries.
    Chaos(OperatorField),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedIsometry {
    dim: usize,
    n: usize,
    spec: Option<AngleSpec>,
    seed: u64,
    rule: Rule,
    defects: Vec<Defect>,
}

/// Builds a weakly adapted pathwise isometry of `R^n`.
pub fn build_sequential_isometry(n: usize, seed: u64, spec: AngleSpec) -> Result<AdaptedIsometry> {
    if n == 0 {
        return Err(Error::Degenerate("an isometry of R^0 has no columns".into()));
    }
    let mut rng = random::rng(seed);
    let mut base = DMatrix::identity(n, n);
    let mut stages: Vec<Stage> = (0..n).map(|_| Stage { angles: Vec::new(), sign_of: None }).collect();
    match spec {
        AngleSpec::Zero => {}
        AngleSpec::Sign => {
            for (j, stage) in stages.iter_mut().enumerate().skip(1) {
                stage.sign_of = Some(j);
            }
        }
        AngleSpec::Constant => base = random::random_orthogonal(&mut rng, n),
        AngleSpec::Arctan { degree } => {
            if degree > MAX_ANGLE_DEGREE {
                return Err(Error::Degenerate(format!("angle degree {degree} above {MAX_ANGLE_DEGREE}")));
            }
            let ambient = Ambient::new(n, MAX_ANGLE_DEGREE)?;
            for (j, stage) in stages.iter_mut().enumerate() {
                for k in j + 1..n {
                    // stage j (0-based) may look at eta_1..eta_j
                    stage.angles.push((k, random::random_poly_on(&mut rng, ambient, j, degree, 3)));
                }
            }
        }
    }
    Ok(AdaptedIsometry { dim: n, n, spec: Some(spec), seed, rule: Rule::Sequential { base, stages }, defects: Vec::new() })
}

impl AdaptedIsometry {
    /// Isometry with polynomial entries, given as `K = R^T` (row `i` is `R e_i`).
    pub fn from_operator(k: WeaklyAdaptedOperator) -> Self {
        let op = k.into_operator();
        Self { dim: op.n(), n: op.d(), spec: None, seed: 0, rule: Rule::Chaos(op), defects: Vec::new() }
    }

    /// Constant `R`.
    pub fn constant(r: &DMatrix<f64>) -> Result<Self> {
        let ambient = Ambient::with_dim(r.nrows())?;
        let k = WeaklyAdaptedOperator::new(OperatorField::constant(ambient, &r.transpose())?)?;
        Ok(Self::from_operator(k))
    }

    /// Counterfeit with a planted defect; no longer an isometry.
    pub fn with_defect(mut self, defect: Defect) -> Result<Self> {
        let check = |c: usize| {
            if c == 0 || c > self.n {
                Err(Error::IndexOutOfRange { index: c, dim: self.n })
            } else {
                Ok(())
            }
        };
        match defect {
            Defect::ScaleColumn { column, .. } => check(column)?,
            Defect::CopyColumn { from, to } => {
                check(from)?;
                check(to)?;
            }
        }
        self.defects.push(defect);
        Ok(self)
    }

    /// Dimension of the underlying grid.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of columns `R e_1..R e_n`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spec(&self) -> Option<AngleSpec> {
        self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn defects(&self) -> &[Defect] {
        &self.defects
    }

    /// `K = R^T` as a chaos-valued operator field, when the entries are polynomial.
    pub fn as_operator_field(&self) -> Option<OperatorField> {
        let k = match &self.rule {
            Rule::Chaos(k) => k.clone(),
            Rule::Sequential { base, stages } => {
                if stages.iter().any(|s| s.sign_of.is_some() || !s.angles.is_empty()) {
                    return None;
                }
                let ambient = Ambient::with_dim(self.dim).ok()?;
                OperatorField::constant(ambient, &base.transpose()).ok()?
            }
        };
        let mut rows = k.into_rows();
        for d in &self.defects {
            match *d {
                Defect::ScaleColumn { column, factor } => rows[column - 1] = rows[column - 1].scale(factor),
                Defect::CopyColumn { from, to } => rows[to - 1] = rows[from - 1].clone(),
            }
        }
        OperatorField::from_rows(rows).ok()
    }

    /// Term-support check that row `j` of `R` only sees `eta_1..eta_{j-1}`.
    pub fn is_structurally_predictable(&self) -> bool {
        match &self.rule {
            Rule::Chaos(k) => WeaklyAdaptedOperator::new(k.clone()).is_ok(),
            Rule::Sequential { stages, .. } => stages.iter().enumerate().all(|(j, s)| {
                s.angles.iter().all(|(_, p)| (p.max_coord() as usize) <= j) && s.sign_of.is_none_or(|c| c <= j)
            }),
        }
    }

    /// Pathwise `R(omega)`, `dim x n`.
    pub fn matrix(&self, sample: &[f64]) -> Result<DMatrix<f64>> {
        if sample.len() != self.dim {
            return Err(Error::SampleLength { expected: self.dim, found: sample.len() });
        }
        let mut r = match &self.rule {
            Rule::Chaos(k) => k.evaluate(sample)?.transpose(),
            Rule::Sequential { base, stages } => sequential_matrix(base, stages, sample),
        };
        for d in &self.defects {
            match *d {
                Defect::ScaleColumn { column, factor } => {
                    let mut c = r.column_mut(column - 1);
                    c *= factor;
                }
                Defect::CopyColumn { from, to } => {
                    let src = r.column(from - 1).clone_owned();
                    r.set_column(to - 1, &src);
                }
            }
        }
        Ok(r)
    }
}

fn sequential_matrix(base: &DMatrix<f64>, stages: &[Stage], sample: &[f64]) -> DMatrix<f64> {
    let n = base.nrows();
    // Frame vectors are the rows of `frame`; rows 0..j are final after stage j.
    let mut frame = base.clone();
    for (j, stage) in stages.iter().enumerate() {
        for (k, p) in &stage.angles {
            let theta = p.evaluate_unchecked(sample).atan();
            let (s, c) = theta.sin_cos();
            for col in 0..n {
                let (a, b) = (frame[(j, col)], frame[(*k, col)]);
                frame[(j, col)] = c * a + s * b;
                frame[(*k, col)] = -s * a + c * b;
            }
        }
        if let Some(i) = stage.sign_of {
            if sample[i - 1] < 0.0 {
                let mut row = frame.row_mut(j);
                row *= -1.0;
            }
        }
        // re-orthonormalize row j against the finished rows
        for prev in 0..j {
            let dot = frame.row(j).dot(&frame.row(prev));
            let p = frame.row(prev).clone_owned();
            let mut row = frame.row_mut(j);
            row -= p * dot;
        }
        let norm = frame.row(j).norm();
        let mut row = frame.row_mut(j);
        row /= norm;
    }
    frame
}

/// `Tw(omega) = (delta(R e_1), .., delta(R e_n))(omega) = R(omega)^T eta`.
pub fn apply_rotation(r: &AdaptedIsometry, sample: &[f64]) -> Result<Vec<f64>> {
    let m = r.matrix(sample)?;
    Ok((0..r.n).map(|i| m.column(i).iter().zip(sample).map(|(a, b)| a * b).sum()).collect())
}

/// Largest Frobenius deviation `|R^T R - I|` over the samples.
pub fn isometry_check(r: &AdaptedIsometry, samples: &SampleBatch) -> Result<f64> {
    let devs = samples
        .par_rows()
        .map(|row| {
            let m = r.matrix(row)?;
            Ok((m.transpose() * &m - DMatrix::identity(r.n, r.n)).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(devs.into_iter().fold(0.0, f64::max))
}

fn check_onb(b: &DMatrix<f64>, n: usize) -> Result<()> {
    if b.nrows() != n || b.ncols() != n {
        return Err(Error::Shape(format!("basis matrix must be {n}x{n}")));
    }
    let dev = (b.transpose() * b - DMatrix::identity(n, n)).amax();
    if dev > ONB_TOL {
        return Err(Error::Precondition(format!("basis is not orthonormal (deviation {dev:e})")));
    }
    Ok(())
}

/// Largest pathwise gap between `sum_i delta(R h_i) h_i` and `sum_i delta(R e_i) e_i`
/// for two orthonormal bases given as matrix columns.
pub fn basis_invariance_check(
    r: &AdaptedIsometry,
    bases: (&DMatrix<f64>, &DMatrix<f64>),
    samples: &SampleBatch,
) -> Result<f64> {
    let (e, h) = bases;
    check_onb(e, r.n)?;
    check_onb(h, r.n)?;
    let gaps = samples
        .par_rows()
        .map(|eta| {
            let m = r.matrix(eta)?;
            let eta_v = nalgebra::DVector::from_column_slice(eta);
            // delta(R b) = (R b) . eta pathwise, for each basis vector b
            let side = |basis: &DMatrix<f64>| {
                let coeffs = (&m * basis).transpose() * &eta_v;
                basis * coeffs
            };
            Ok((side(h) - side(e)).norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(gaps.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestOutcome {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl TestOutcome {
    fn at_most(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        Self { name: name.into(), statistic, threshold, pass: statistic <= threshold }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RotationReport {
    pub tests: Vec<TestOutcome>,
    pub seed: u64,
    #[serde(rename = "N")]
    pub n_samples: usize,
}

impl RotationReport {
    pub fn passed(&self) -> bool {
        self.tests.iter().all(|t| t.pass)
    }

    pub fn test(&self, name: &str) -> Option<&TestOutcome> {
        self.tests.iter().find(|t| t.name == name)
    }

    pub fn extend(&mut self, other: RotationReport) {
        self.tests.extend(other.tests);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// KS and moment tests of a sample against N(0, 1).
fn normality_tests(prefix: &str, xs: &[f64]) -> Vec<TestOutcome> {
    let n = xs.len() as f64;
    let m = stats::moments(xs);
    vec![
        TestOutcome::at_most(format!("{prefix}ks"), stats::ks_statistic_normal(xs), stats::ks_critical(ALPHA, xs.len())),
        TestOutcome::at_most(format!("{prefix}mean_z"), m.mean.abs() * n.sqrt(), Z_THRESHOLD),
        TestOutcome::at_most(format!("{prefix}variance_z"), (m.variance - 1.0).abs() / (2.0 / n).sqrt(), Z_THRESHOLD),
        TestOutcome::at_most(format!("{prefix}skewness_z"), m.skewness.abs() / (6.0 / n).sqrt(), Z_THRESHOLD),
        TestOutcome::at_most(format!("{prefix}kurtosis_z"), m.excess_kurtosis.abs() / (24.0 / n).sqrt(), Z_THRESHOLD),
    ]
}

type TestFn = fn(f64) -> f64;

const FACTOR_FUNCTIONS: [(&str, TestFn); 3] =
    [("x", |x| x), ("he2", |x| x * x - 1.0), ("sign", |x| if x < 0.0 { -1.0 } else { 1.0 })];

/// Correlation bound plus `E f(X) g(Y) = E f(X) E g(Y)` checks.
fn independence_tests(prefix: &str, xs: &[f64], ys: &[f64]) -> Vec<TestOutcome> {
    let n = xs.len() as f64;
    let mut out = vec![TestOutcome::at_most(
        format!("{prefix}correlation"),
        stats::correlation(xs, ys).abs(),
        Z_THRESHOLD / n.sqrt(),
    )];
    for (fname, f) in FACTOR_FUNCTIONS {
        for (gname, g) in FACTOR_FUNCTIONS {
            let fx: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
            let gy: Vec<f64> = ys.iter().map(|&y| g(y)).collect();
            let (mf, mg) = (stats::mean(&fx), stats::mean(&gy));
            let prods: Vec<f64> = fx.iter().zip(&gy).map(|(a, b)| (a - mf) * (b - mg)).collect();
            let se = (stats::variance(&prods) / n).sqrt();
            let gap = stats::mean(&prods).abs();
            let z = if gap == 0.0 { 0.0 } else { gap / se };
            out.push(TestOutcome::at_most(format!("{prefix}factor_{fname}_{gname}"), z, Z_THRESHOLD));
        }
    }
    out
}

fn transformed(r: &AdaptedIsometry, batch: &SampleBatch) -> Result<Vec<Vec<f64>>> {
    batch.par_rows().map(|row| apply_rotation(r, row)).collect()
}

fn project(tw: &[Vec<f64>], h: &[f64]) -> Vec<f64> {
    let norm = h.iter().map(|x| x * x).sum::<f64>().sqrt();
    tw.iter().map(|t| t.iter().zip(h).map(|(a, b)| a * b).sum::<f64>() / norm).collect()
}

fn batch_for(r: &AdaptedIsometry, n_samples: usize, seed: u64) -> Result<SampleBatch> {
    sample_batch(&DiscreteWienerSpace::new(r.dim)?, n_samples, seed)
}

fn check_direction(r: &AdaptedIsometry, h: &[f64]) -> Result<()> {
    if h.len() != r.n {
        return Err(Error::DimensionMismatch { expected: r.n, found: h.len() });
    }
    if h.iter().all(|&x| x == 0.0) {
        return Err(Error::Precondition("direction h must be nonzero".into()));
    }
    Ok(())
}

/// Tests that `delta(R h) / |h|` is standard Gaussian.
pub fn gaussianity_battery(r: &AdaptedIsometry, h: &[f64], n_samples: usize, seed: u64) -> Result<RotationReport> {
    check_direction(r, h)?;
    let tw = transformed(r, &batch_for(r, n_samples, seed)?)?;
    Ok(RotationReport { tests: normality_tests("", &project(&tw, h)), seed, n_samples })
}

/// Tests that `delta(R h1)` and `delta(R h2)` are independent for orthogonal `h1, h2`.
pub fn independence_battery(
    r: &AdaptedIsometry,
    h1: &[f64],
    h2: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<RotationReport> {
    check_direction(r, h1)?;
    check_direction(r, h2)?;
    let dot: f64 = h1.iter().zip(h2).map(|(a, b)| a * b).sum();
    let scale = (h1.iter().map(|x| x * x).sum::<f64>() * h2.iter().map(|x| x * x).sum::<f64>()).sqrt();
    if dot.abs() > ONB_TOL * scale {
        return Err(Error::Precondition(format!("directions are not orthogonal: (h1, h2) = {dot:e}")));
    }
    let tw = transformed(r, &batch_for(r, n_samples, seed)?)?;
    Ok(RotationReport { tests: independence_tests("", &project(&tw, h1), &project(&tw, h2)), seed, n_samples })
}

/// Fixed coordinate pairs checked for independence: the first ten in
/// lexicographic order.
pub fn independence_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).take(10).collect()
}

/// Covariance, per-coordinate normality and pairwise independence of `Tw`.
pub fn measure_preservation_battery(r: &AdaptedIsometry, n_samples: usize, seed: u64) -> Result<RotationReport> {
    let tw = transformed(r, &batch_for(r, n_samples, seed)?)?;
    let cols: Vec<Vec<f64>> = (0..r.n).map(|i| tw.iter().map(|t| t[i]).collect()).collect();
    let mut worst: f64 = 0.0;
    for a in 0..r.n {
        for b in a..r.n {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((stats::covariance(&cols[a], &cols[b]) - target).abs());
        }
    }
    let mut tests = vec![TestOutcome::at_most(
        "covariance_max_dev",
        worst,
        Z_THRESHOLD * (2.0 / n_samples as f64).sqrt(),
    )];
    for (i, col) in cols.iter().enumerate() {
        let t = normality_tests("", col).remove(0);
        tests.push(TestOutcome { name: format!("ks_coord_{}", i + 1), ..t });
    }
    for (a, b) in independence_pairs(r.n) {
        tests.extend(independence_tests(&format!("pair_{}_{}_", a + 1, b + 1), &cols[a], &cols[b]));
    }
    Ok(RotationReport { tests, seed, n_samples })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtractionReport {
    pub refine: usize,
    /// Largest pathwise `|R^T R - I|` over the check samples.
    pub isometry_deviation: f64,
    /// Clark reconstruction residual of each component on the refined grid.
    pub residuals: Vec<f64>,
    pub input_battery: RotationReport,
}

/// Recovers `R` from a transformation `T` given by its components: on the grid
/// refined by `refine`, `R e_i` is the Clark integrand of `T_i`.
pub fn extract_rotation(
    t: &[ChaosPoly],
    refine: usize,
    n_samples: usize,
    seed: u64,
) -> Result<(AdaptedIsometry, ExtractionReport)> {
    let components = VField::new(t.to_vec())?;
    let dim = components.ambient().dim();
    let batch = sample_batch(&DiscreteWienerSpace::new(dim)?, n_samples, seed)?;
    let values: Vec<Vec<f64>> = t
        .iter()
        .map(|p| batch.par_rows().map(|row| p.evaluate_unchecked(row)).collect())
        .collect();
    let mut battery = RotationReport { tests: Vec::new(), seed, n_samples };
    for (i, xs) in values.iter().enumerate() {
        battery.tests.extend(normality_tests(&format!("t{}_", i + 1), xs));
    }
    for a in 0..t.len() {
        for b in a + 1..t.len() {
            let rho = stats::correlation(&values[a], &values[b]).abs();
            let name = format!("t{}_t{}_correlation", a + 1, b + 1);
            battery.tests.push(TestOutcome::at_most(name, rho, Z_THRESHOLD / (n_samples as f64).sqrt()));
        }
    }
    if !battery.passed() {
        let failed: Vec<&str> = battery.tests.iter().filter(|x| !x.pass).map(|x| x.name.as_str()).collect();
        return Err(Error::BatteryFailure(failed.join(", ")));
    }

    let fine = VField::new(t.iter().map(|p| p.refine(refine)).collect::<Result<_>>()?)?;
    let residuals = fine
        .components()
        .iter()
        .map(|p| Ok(reconstruct(&VField::new(vec![p.clone()])?)?.residual_l2))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<HField> = clark_integrand(&fine).into_operator().into_rows();
    let k = WeaklyAdaptedOperator::new(OperatorField::from_rows(rows)?)?;
    let r = AdaptedIsometry::from_operator(k);
    let check = sample_batch(&DiscreteWienerSpace::new(r.dim)?, 1000, seed ^ 0x5eed)?;
    let isometry_deviation = isometry_check(&r, &check)?;
    Ok((r, ExtractionReport { refine, isometry_deviation, residuals, input_battery: battery }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::malliavin::divergence_op;

    fn batch(n: usize, rows: usize, seed: u64) -> SampleBatch {
        sample_batch(&DiscreteWienerSpace::new(n).unwrap(), rows, seed).unwrap()
    }

    #[test]
    fn spec_parsing() {
        assert_eq!("identity".parse::<AngleSpec>().unwrap(), AngleSpec::Zero);
        assert_eq!("arctan:3".parse::<AngleSpec>().unwrap(), AngleSpec::Arctan { degree: 3 });
        assert_eq!("arctan".parse::<AngleSpec>().unwrap().to_string(), "arctan:2");
        assert!("spiral".parse::<AngleSpec>().is_err());
        assert!("arctan:x".parse::<AngleSpec>().is_err());
    }

    #[test]
    fn degenerate_specs_are_reported() {
        assert!(matches!(build_sequential_isometry(0, 1, AngleSpec::Zero), Err(Error::Degenerate(_))));
        assert!(matches!(
            build_sequential_isometry(3, 1, AngleSpec::Arctan { degree: 9 }),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn zero_angles_give_identity() {
        let r = build_sequential_isometry(3, 1, AngleSpec::Zero).unwrap();
        let s = [0.3, -1.2, 2.0];
        assert_eq!(r.matrix(&s).unwrap(), DMatrix::identity(3, 3));
        assert_eq!(apply_rotation(&r, &s).unwrap(), s.to_vec());
    }

    #[test]
    fn sign_construction_by_hand() {
        let r = build_sequential_isometry(2, 1, AngleSpec::Sign).unwrap();
        assert_eq!(apply_rotation(&r, &[-0.5, 2.0]).unwrap(), vec![-0.5, -2.0]);
        assert_eq!(apply_rotation(&r, &[0.5, 2.0]).unwrap(), vec![0.5, 2.0]);
        assert!(r.as_operator_field().is_none());
        assert!(r.is_structurally_predictable());
    }

    #[test]
    fn constant_rotation_applies_transpose() {
        let r = build_sequential_isometry(3, 9, AngleSpec::Constant).unwrap();
        let s = [0.1, 0.7, -1.1];
        let q = r.matrix(&s).unwrap();
        let expect = q.transpose() * nalgebra::DVector::from_column_slice(&s);
        let got = apply_rotation(&r, &s).unwrap();
        for (a, b) in got.iter().zip(expect.iter()) {
            approx::assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
        // exact chaos-level covariance of Tw is the identity
        let tw = divergence_op(&r.as_operator_field().unwrap()).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let c = tw.component(a).l2_inner(tw.component(b)).unwrap();
                approx::assert_abs_diff_eq!(c, if a == b { 1.0 } else { 0.0 }, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn arctan_rows_depend_on_the_past_only() {
        let r = build_sequential_isometry(4, 5, AngleSpec::Arctan { degree: 2 }).unwrap();
        assert!(r.is_structurally_predictable());
        let s = [0.4, -0.3, 1.2, 0.8];
        let m = r.matrix(&s).unwrap();
        // perturbing eta_j leaves rows 1..=j unchanged
        for j in 0..4 {
            let mut t = s;
            t[j] += 0.9;
            let m2 = r.matrix(&t).unwrap();
            for row in 0..=j {
                assert_eq!(m.row(row), m2.row(row), "row {row} moved with eta_{}", j + 1);
            }
        }
        assert!(isometry_check(&r, &batch(4, 500, 2)).unwrap() < 1e-12);
    }

    #[test]
    fn planted_scale_defect_has_deviation_three() {
        let r = build_sequential_isometry(2, 1, AngleSpec::Zero)
            .unwrap()
            .with_defect(Defect::ScaleColumn { column: 2, factor: 2.0 })
            .unwrap();
        approx::assert_abs_diff_eq!(isometry_check(&r, &batch(2, 10, 1)).unwrap(), 3.0, epsilon = 1e-14);
        assert!(build_sequential_isometry(2, 1, AngleSpec::Zero)
            .unwrap()
            .with_defect(Defect::CopyColumn { from: 1, to: 3 })
            .is_err());
    }

    #[test]
    fn basis_invariance_identity_and_errors() {
        let r = build_sequential_isometry(2, 1, AngleSpec::Zero).unwrap();
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let rot = DMatrix::from_row_slice(2, 2, &[c, -c, c, c]);
        let e = DMatrix::identity(2, 2);
        assert!(basis_invariance_check(&r, (&e, &rot), &batch(2, 100, 4)).unwrap() <= 1e-12);
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(basis_invariance_check(&r, (&e, &bad), &batch(2, 10, 4)), Err(Error::Precondition(_))));
    }

    #[test]
    fn independence_requires_orthogonal_directions() {
        let r = build_sequential_isometry(2, 1, AngleSpec::Zero).unwrap();
        assert!(matches!(
            independence_battery(&r, &[1.0, 0.0], &[1.0, 1.0], 100, 1),
            Err(Error::Precondition(_))
        ));
        assert!(gaussianity_battery(&r, &[0.0, 0.0], 100, 1).is_err());
    }

    #[test]
    fn reports_are_deterministic_and_serialize() {
        let r = build_sequential_isometry(3, 2, AngleSpec::Arctan { degree: 1 }).unwrap();
        let a = measure_preservation_battery(&r, 2000, 17).unwrap();
        let b = measure_preservation_battery(&r, 2000, 17).unwrap();
        assert_eq!(a, b);
        let json: serde_json::Value = serde_json::from_str(&a.to_json()).unwrap();
        assert_eq!(json["N"], 2000);
        assert_eq!(json["seed"], 17);
        assert!(json["tests"][0]["name"].is_string());
    }

    #[test]
    fn independence_pairs_are_capped_at_ten() {
        assert_eq!(independence_pairs(3), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(independence_pairs(8).len(), 10);
    }
}
