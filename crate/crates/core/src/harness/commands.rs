use std::path::Path;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use super::config::RunConfig;
use super::report::write_atomic;
use crate::chaos::{Ambient, ChaosPoly};
use crate::clark::{compare_energies, reconstruct, refine_and_reconstruct, write_refinement_csv, EnergyComparison};
use crate::dsl;
use crate::error::{Error, Result};
use crate::malliavin::divergence_op;
use crate::random;
use crate::rotations::{
    apply_rotation, basis_invariance_check, build_sequential_isometry, gaussianity_battery, independence_battery,
    isometry_check, measure_preservation_battery, AngleSpec, Defect, RotationReport, TestOutcome,
};
use crate::wiener::{sample_batch, DiscreteWienerSpace};

pub const CLARK_FILE: &str = "clark.json";
pub const REFINEMENT_FILE: &str = "refinement.csv";
pub const ENERGY_FILE: &str = "energy.json";
pub const ROTATION_FILE: &str = "rotation-report.json";
pub const VERIFY_FILE: &str = "verify-report.json";

const CHECK_SAMPLES: usize = 1000;
pub const ISOMETRY_TOL: f64 = 1e-9;
const AGREEMENT_TOL: f64 = 1e-10;

/// Reads `arg` as a file when one exists at that path, else as an expression.
pub fn functional_source(arg: &str) -> Result<String> {
    let path = Path::new(arg);
    if path.is_file() {
        std::fs::read_to_string(path).map_err(|e| Error::InvalidArgument(format!("cannot read {arg}: {e}")))
    } else {
        Ok(arg.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepresentOutput {
    pub clark_json: String,
    pub refinement_csv: String,
    pub energy_json: String,
    pub residual_l2: f64,
}

#[derive(Serialize)]
struct EnergyRow {
    component: usize,
    #[serde(flatten)]
    comparison: EnergyComparison,
}

/// Clark integrand, refinement table and energy comparison for a functional.
pub fn represent(config: &RunConfig, source: &str) -> Result<RepresentOutput> {
    let ambient = Ambient::new(config.n, config.degree_cap)?;
    let v = dsl::compile(source, ambient)?.into_vfield()?;
    let clark = reconstruct(&v)?;
    let rows = refine_and_reconstruct(&v, &config.refine)?;
    let mut csv = Vec::new();
    write_refinement_csv(&rows, &mut csv)?;
    let energies = v
        .components()
        .iter()
        .enumerate()
        .map(|(i, p)| Ok(EnergyRow { component: i + 1, comparison: compare_energies(p)? }))
        .collect::<Result<Vec<_>>>()?;
    let mut clark_json = serde_json::to_string_pretty(&clark.to_json_value()).expect("json");
    clark_json.push('\n');
    let mut energy_json = serde_json::to_string_pretty(&energies).expect("json");
    energy_json.push('\n');
    Ok(RepresentOutput {
        clark_json,
        refinement_csv: String::from_utf8(csv).expect("csv is utf-8"),
        energy_json,
        residual_l2: clark.residual_l2,
    })
}

pub fn write_represent(dir: &Path, out: &RepresentOutput) -> Result<()> {
    write_atomic(&dir.join(CLARK_FILE), out.clark_json.as_bytes())?;
    write_atomic(&dir.join(REFINEMENT_FILE), out.refinement_csv.as_bytes())?;
    write_atomic(&dir.join(ENERGY_FILE), out.energy_json.as_bytes())
}

/// Parses `scale:<column>:<factor>` or `copy:<from>:<to>`.
pub fn parse_defect(text: &str) -> Result<Defect> {
    let bad = || Error::InvalidArgument(format!("bad defect `{text}` (expected scale:<col>:<factor> or copy:<from>:<to>)"));
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        ["scale", c, f] => Ok(Defect::ScaleColumn {
            column: c.parse().map_err(|_| bad())?,
            factor: f.parse().map_err(|_| bad())?,
        }),
        ["copy", a, b] => Ok(Defect::CopyColumn { from: a.parse().map_err(|_| bad())?, to: b.parse().map_err(|_| bad())? }),
        _ => Err(bad()),
    }
}

fn prefixed(prefix: &str, report: RotationReport) -> Vec<TestOutcome> {
    report.tests.into_iter().map(|t| TestOutcome { name: format!("{prefix}/{}", t.name), ..t }).collect()
}

fn outcome(name: &str, statistic: f64, threshold: f64) -> TestOutcome {
    TestOutcome { name: name.into(), statistic, threshold, pass: statistic <= threshold }
}

/// Builds an isometry and runs every structural check and statistical battery.
pub fn rotate(config: &RunConfig, construction: AngleSpec, plant: Option<Defect>) -> Result<RotationReport> {
    let (n, seed, big_n) = (config.n, config.seed, config.samples);
    let mut r = build_sequential_isometry(n, seed, construction)?;
    if let Some(d) = plant {
        r = r.with_defect(d)?;
    }
    let space = DiscreteWienerSpace::new(n)?;
    let check = sample_batch(&space, CHECK_SAMPLES, seed)?;
    let mut tests = vec![
        outcome("isometry", isometry_check(&r, &check)?, ISOMETRY_TOL),
        outcome("structural-predictability", if r.is_structurally_predictable() { 0.0 } else { 1.0 }, 0.0),
    ];
    if let Some(k) = r.as_operator_field() {
        let tw = divergence_op(&k)?;
        let gaps = check
            .par_rows()
            .map(|row| {
                let a = DVector::from_vec(apply_rotation(&r, row)?);
                let b = DVector::from_vec(tw.evaluate(row)?);
                Ok((a - b).amax())
            })
            .collect::<Result<Vec<f64>>>()?;
        tests.push(outcome("divergence-agreement", gaps.into_iter().fold(0.0, f64::max), AGREEMENT_TOL));
    }
    let mut rng = random::rng(seed);
    let basis = random::random_orthogonal(&mut rng, n);
    let gap = basis_invariance_check(&r, (&DMatrix::identity(n, n), &basis), &check)?;
    tests.push(outcome("basis-invariance", gap, ISOMETRY_TOL));

    let h = random::random_unit_vector(&mut rng, n);
    tests.extend(prefixed("gaussianity", gaussianity_battery(&r, &h, big_n, seed.wrapping_add(1))?));
    if n >= 2 {
        let (h1, h2): (Vec<f64>, Vec<f64>) = (basis.column(0).iter().copied().collect(), basis.column(1).iter().copied().collect());
        tests.extend(prefixed("independence", independence_battery(&r, &h1, &h2, big_n, seed.wrapping_add(2))?));
    }
    tests.extend(prefixed("measure", measure_preservation_battery(&r, big_n, seed.wrapping_add(3))?));
    Ok(RotationReport { tests, seed, n_samples: big_n })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub kernel: String,
    pub size: String,
    pub iterations: usize,
    pub nanos_per_op: f64,
}

pub const BENCH_SUITES: &[&str] = &["hermite-product", "refine", "all"];

fn time<F: FnMut() -> Result<()>>(kernel: &str, size: String, iterations: usize, mut f: F) -> Result<BenchRow> {
    let start = Instant::now();
    for _ in 0..iterations {
        f()?;
    }
    let nanos_per_op = start.elapsed().as_nanos() as f64 / iterations as f64;
    Ok(BenchRow { kernel: kernel.into(), size, iterations, nanos_per_op })
}

/// Wall-clock timings of the algebra kernels at fixed sizes. Not deterministic.
pub fn bench(suite: &str, seed: u64) -> Result<Vec<BenchRow>> {
    if !BENCH_SUITES.contains(&suite) {
        return Err(Error::InvalidArgument(format!("unknown bench suite `{suite}` (expected {})", BENCH_SUITES.join(", "))));
    }
    let mut rng = random::rng(seed);
    let mut rows = Vec::new();
    if suite == "hermite-product" || suite == "all" {
        for (n, degree, terms) in [(4usize, 4u32, 8usize), (8, 4, 16), (16, 4, 32)] {
            let a = Ambient::with_dim(n)?;
            let p = random::random_poly(&mut rng, a, degree, terms);
            let q = random::random_poly(&mut rng, a, degree, terms);
            rows.push(time("hermite_product", format!("n={n} deg={degree} terms={terms}"), 200, || {
                std::hint::black_box(p.hermite_product(&q)?);
                Ok(())
            })?);
        }
    }
    if suite == "refine" || suite == "all" {
        for (n, m) in [(2usize, 4usize), (4, 8), (8, 8)] {
            let a = Ambient::with_dim(n)?;
            let p: ChaosPoly = random::random_poly(&mut rng, a, 4, 8);
            rows.push(time("refine", format!("n={n} m={m} deg=4"), 50, || {
                std::hint::black_box(p.refine(m)?);
                Ok(())
            })?);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: usize) -> RunConfig {
        RunConfig { n, samples: 20_000, ..RunConfig::default() }
    }

    #[test]
    fn represent_product_is_exact() {
        let out = represent(&config(2), "x1*x2").unwrap();
        assert_eq!(out.residual_l2, 0.0);
        let v: serde_json::Value = serde_json::from_str(&out.energy_json).unwrap();
        assert_eq!(v[0]["adapted_energy"], 1.0);
        assert_eq!(v[0]["exact_energy"], 0.5);
    }

    #[test]
    fn represent_refinement_table() {
        let out = represent(&config(1), "h2(x1)").unwrap();
        let mut lines = out.refinement_csv.lines();
        assert_eq!(lines.next(), Some("m,residual"));
        let vals: Vec<f64> = lines.map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
        for (v, m) in vals.iter().zip([1.0, 2.0, 4.0, 8.0]) {
            approx::assert_abs_diff_eq!(*v, (2.0f64 / m).sqrt(), epsilon = 1e-10);
        }
    }

    #[test]
    fn defect_parsing() {
        assert_eq!(parse_defect("scale:2:2.0").unwrap(), Defect::ScaleColumn { column: 2, factor: 2.0 });
        assert_eq!(parse_defect("copy:1:2").unwrap(), Defect::CopyColumn { from: 1, to: 2 });
        assert!(parse_defect("scale:2").is_err());
    }

    #[test]
    fn rotate_small_sign_construction_passes() {
        let r = rotate(&config(2), AngleSpec::Sign, None).unwrap();
        assert!(r.passed(), "{}", r.to_json());
        let planted = rotate(&config(2), AngleSpec::Sign, Some(Defect::ScaleColumn { column: 2, factor: 2.0 })).unwrap();
        assert!(!planted.test("isometry").unwrap().pass);
    }

    #[test]
    fn bench_rejects_unknown_suite() {
        assert!(bench("nope", 1).is_err());
        assert_eq!(bench("refine", 1).unwrap().len(), 3);
    }
}
