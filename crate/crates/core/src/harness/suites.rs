//! Randomized identity suites run by `verify`. Each suite is pure given its
//! seed; suites run concurrently and are reported in registry order.

use rand::Rng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::config::RunConfig;
use super::report::{RunReport, Status, SuiteResult};
use crate::adapted::{
    check_divergence_free_uniqueness, check_ito_isometry, check_operator_isometry, check_weak_orthogonality,
    project_adapted, project_operator, FiniteRankAdapted,
};
use crate::chaos::{Ambient, ChaosPoly};
use crate::clark::{check_uniqueness, compare_energies, minimal_energy_integrand, reconstruct, refine_and_reconstruct};
use crate::error::Result;
use crate::malliavin::{
    check_duality, check_weakb, divergence_h, divergence_op, gradient_scalar, linear_field, OperatorField, VField,
};
use crate::random::{self, InstanceRng};
use crate::wiener::{identity_divergence_growth, mc_estimate, sample_batch, DiscreteWienerSpace};

const TERMS: usize = 4;
/// z-score bound for Monte Carlo comparisons.
pub const MC_Z: f64 = 4.0;

/// Sizes shared by all suites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteParams {
    pub n_max: usize,
    pub d_max: usize,
    pub degree_cap: u32,
    pub tolerance: f64,
    pub samples: usize,
    pub seed: u64,
}

impl SuiteParams {
    pub fn from_config(c: &RunConfig) -> Self {
        Self {
            n_max: c.n,
            d_max: c.d,
            degree_cap: c.degree_cap,
            tolerance: c.tolerance,
            samples: c.samples,
            seed: c.seed,
        }
    }

    /// Largest random degree whose pairwise products stay within the cap.
    fn degree(&self) -> u32 {
        (self.degree_cap / 2).min(4)
    }

    fn ambient(&self, rng: &mut InstanceRng) -> Result<Ambient> {
        Ambient::new(rng.random_range(1..=self.n_max), self.degree_cap)
    }

    fn d(&self, rng: &mut InstanceRng) -> usize {
        rng.random_range(1..=self.d_max)
    }
}

/// Running summary of one suite.
#[derive(Debug, Clone)]
pub struct Tally {
    tolerance: f64,
    cases: usize,
    failures: usize,
    max_residual: f64,
}

impl Tally {
    pub fn new(tolerance: f64) -> Self {
        Self { tolerance, cases: 0, failures: 0, max_residual: 0.0 }
    }

    /// Records a residual against the suite tolerance.
    pub fn residual(&mut self, r: f64) {
        self.residual_within(r, self.tolerance);
    }

    pub fn residual_within(&mut self, r: f64, tol: f64) {
        self.cases += 1;
        // NaN counts as a failure
        if r.is_nan() || r > tol {
            self.failures += 1;
        }
        self.max_residual = if r.is_nan() { f64::NAN } else { self.max_residual.max(r) };
    }

    pub fn check(&mut self, ok: bool) {
        self.cases += 1;
        if !ok {
            self.failures += 1;
        }
    }

    fn finish(self, name: &str) -> SuiteResult {
        SuiteResult {
            name: name.into(),
            status: if self.failures == 0 { Status::Pass } else { Status::Fail },
            cases: self.cases,
            failures: self.failures,
            max_residual: self.max_residual,
            tolerance: self.tolerance,
            error: None,
        }
    }
}

type SuiteFn = fn(&SuiteParams, &mut InstanceRng) -> Result<Tally>;

/// Suite names in report order.
pub const SUITES: &[(&str, SuiteFn)] = &[
    ("duality", duality),
    ("divergence-product-rule", divergence_product_rule),
    ("skew-pairing-divergence-free", skew_pairing),
    ("identity-divergence", identity_divergence),
    ("ito-isometry", ito_isometry),
    ("operator-isometry", operator_isometry),
    ("weak-orthogonality", weak_orthogonality),
    ("predictable-projection", predictable_projection),
    ("clark-ocone", clark_ocone),
    ("clark-uniqueness", clark_uniqueness),
    ("refinement-closed-form", refinement_closed_form),
    ("refinement-monotone", refinement_monotone),
    ("minimal-energy-inverse", minimal_energy_inverse),
    ("minimal-energy-comparison", minimal_energy_comparison),
    ("ou-generator", ou_generator),
    ("monte-carlo-expectation", monte_carlo_expectation),
];

pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(n, _)| *n).collect()
}

/// Runs one suite on its own random stream.
pub fn run_suite(name: &str, params: &SuiteParams) -> Option<SuiteResult> {
    let (index, (_, f)) = SUITES.iter().enumerate().find(|(_, (n, _))| *n == name)?;
    let mut rng: ChaCha20Rng = random::rng(params.seed);
    rng.set_stream(index as u64 + 1);
    Some(match f(params, &mut rng) {
        Ok(t) => t.finish(name),
        Err(e) => SuiteResult::errored(name, params.tolerance, &e),
    })
}

pub fn run_verify(config: &RunConfig) -> RunReport {
    let params = SuiteParams::from_config(config);
    let suites: Vec<SuiteResult> = SUITES
        .par_iter()
        .map(|(name, _)| run_suite(name, &params).expect("registered suite"))
        .collect();
    RunReport::new("verify", config, suites)
}

fn finite_rank(rng: &mut InstanceRng, ambient: Ambient, d: usize, degree: u32) -> Result<FiniteRankAdapted> {
    let rank = rng.random_range(1..=3);
    let terms = (0..rank)
        .map(|_| (random::random_predictable_hfield(rng, ambient, degree, TERMS), random::random_vector(rng, d)))
        .collect();
    FiniteRankAdapted::new(d, terms)
}

fn duality(p: &SuiteParams, rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(p.tolerance);
    for _ in 0..200 {
        let (a, d) = (p.ambient(rng)?, p.d(rng));
        let k = random::random_operator(rng, a, d, p.degree(), TERMS);
        let f = random::random_vfield(rng, a, d, p.degree(), TERMS);
        t.residual(check_duality(&k, &f)?);
    }
    Ok(t)
}

fn divergence_product_rule(p: &SuiteParams, rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(p.tolerance);
    // delta(K^T F) has degree deg K + deg F + 1
    let degree = (p.degree_cap.saturating_sub(1) / 2).min(4);
    for _ in 0..100 {
        let (a, d) = (p.ambient(rng)?, p.d(rng));
        let k = random::random_operator(rng, a, d, degree, TERMS);
        let f = random::random_vfield(rng, a, d, degree, TERMS);
        let dk = divergence_op(&k)?;
        for (row, comp) in k.rows().iter().zip(dk.components()) {
            t.residual(divergence_h(row)?.sub(comp)?.l2_norm());
        }
        t.residual(check_weakb(&k, &f)?);
    }
    Ok(t)
}

fn skew_pairing(p: &SuiteParams, rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(p.tolerance);
    for _ in 0..100 {
        let n = rng.random_range(1..=8);
        let a = Ambient::new(n, p.degree_cap)?;
        let div = divergence_h(&linear_field(a, &random::random_skew(rng, n))?)?;
        t.check(div.is_zero());
    }
    Ok(t)
}

fn identity_divergence(p: &SuiteParams, _rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(p.tolerance);
    for n in 1..=8 {
        let a = Ambient::new(n, p.degree_cap)?;
        let w = VField::new((1..=n).map(|i| ChaosPoly::coordinate(a, i)).collect::<Result<_>>()?)?;
        t.check(divergence_op(&OperatorField::identity(a))? == w);
    }
    for (n, norm) in identity_divergence_growth(&(1..=8).collect::<Vec<_>>())? {
        t.residual_within((norm - (2.0 * n as f64).sqrt()).abs(), 1e-12);
    }
    Ok(t)
}

fn ito_isometry(p: &SuiteParams, rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(p.tolerance);
    for _ in 0..200 {
        let a = p.ambient(rng)?;
        let u = random::random_predictable_hfield(rng, a, p.degree(), TERMS);
        let v = random::random_predictable_hfield(rng, a, p.degree(), TERMS);
        t.residual(check_ito_isometry(&u, &v)?);
    }
    Ok(t)
}

fn operator_isometry(p: &SuiteParams, rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(p.tolerance);
    for _ in 0..200 {
        let (a, d) = (p.ambient(rng)?, p.d(rng));
        let k = random::random_weakly_adapted(rng, a, d, p.degree(), TERMS);
        let q = finite_rank(rng, a, d, p.degree())?;
        t.residual(check_operator_isometry(&k, &q)?);
    }
    Ok(t)
}

fn weak_orthogonality(p: &SuiteParams, rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(p.tolerance);
    for _ in 0..100 {
        let (a, d) = (p.ambient(rng)?, p.d(rng));
        let k = random::random_operator(rng, a, d, p.degree(), TERMS);
        let q = finite_rank(rng, a, d, p.degree())?;
        t.residual(check_weak_orthogonality(&k, &q)?);
    }
    Ok(t)
}

fn predictable_projection(p: &SuiteParams, rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(p.tolerance);
    for _ in 0..100 {
        let (a, d) = (p.ambient(rng)?, p.d(rng));
        let u = random::random_hfield(rng, a, p.degree(), TERMS);
        let v = random::random_hfield(rng, a, p.degree(), TERMS);
        let (pu, pv) = (project_adapted(&u), project_adapted(&v));
        t.residual(project_adapted(pu.field()).field().max_abs_diff(pu.field())?);
        t.residual((pu.field().l2_inner(&v)? - u.l2_inner(pv.field())?).abs());
        let rest = u.sub(pu.field())?;
        t.residual((u.energy() - pu.field().energy() - rest.energy()).abs());
        t.residual(divergence_h(pu.field())?.expectation().abs());
        let k = random::random_operator(rng, a, d, p.degree(), TERMS);
        let y = random::random_vector(rng, d);
        let lhs = project_adapted(&k.transpose_apply(&y)?);
        let rhs = project_operator(&k).operator().transpose_apply(&y)?;
        t.residual(lhs.field().max_abs_diff(&rhs)?);
    }
    Ok(t)
}

fn clark_ocone(p: &SuiteParams, rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(p.tolerance);
    for _ in 0..100 {
        let (a, d) = (p.ambient(rng)?, p.d(rng));
        let v = VField::new((0..d).map(|_| random::random_representable_poly(rng, a, p.degree(), TERMS)).collect())?;
        let r = reconstruct(&v)?;
        t.residual(r.residual_l2);
        for (i, comp) in v.components().iter().enumerate() {
            let scalar = reconstruct(&VField::new(vec![comp.clone()])?)?;
            t.residual(scalar.reconstruction.component(0).sub(r.reconstruction.component(i))?.l2_norm());
        }
    }
    Ok(t)
}

fn clark_uniqueness(p: &SuiteParams, rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(p.tolerance);
    for _ in 0..100 {
        let (a, d) = (p.ambient(rng)?, p.d(rng));
        // any weakly adapted K represents delta K plus constants
        let k = random::random_weakly_adapted(rng, a, d, p.degree().min(p.degree_cap - 1), TERMS);
        let shift = VField::constant(a, &random::random_vector(rng, d))?;
        let v = VField::new(
            divergence_op(k.operator())?
                .components()
                .iter()
                .zip(shift.components())
                .map(|(x, c)| x.add(c))
                .collect::<Result<_>>()?,
        )?;
        t.check(check_uniqueness(&v, &k)?);
        t.check(check_divergence_free_uniqueness(&k)?);
    }
    Ok(t)
}

fn refinement_closed_form(p: &SuiteParams, _rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(p.tolerance);
    let v = VField::new(vec![ChaosPoly::hermite(Ambient::new(1, p.degree_cap)?, 1, 2)?])?;
    for row in refine_and_reconstruct(&v, &[1, 2, 4, 8])? {
        t.residual((row.residual - (2.0 / row.m as f64).sqrt()).abs());
    }
    Ok(t)
}

fn refinement_monotone(p: &SuiteParams, rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(p.tolerance);
    for _ in 0..20 {
        let a = Ambient::new(rng.random_range(1..=p.n_max.min(3)), p.degree_cap)?;
        let v = VField::new(vec![random::random_poly(rng, a, p.degree().min(3), TERMS)])?;
        let rows = refine_and_reconstruct(&v, &[1, 2, 4, 8])?;
        for w in rows.windows(2) {
            t.residual((w[1].residual - w[0].residual).max(0.0));
        }
    }
    Ok(t)
}

fn minimal_energy_inverse(p: &SuiteParams, rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(p.tolerance);
    for _ in 0..100 {
        let a = p.ambient(rng)?;
        let phi = random::random_centered_poly(rng, a, p.degree(), TERMS);
        let vbar = minimal_energy_integrand(&phi)?;
        t.residual(divergence_h(&vbar)?.sub(&phi)?.l2_norm());
    }
    Ok(t)
}

fn minimal_energy_comparison(p: &SuiteParams, rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(p.tolerance);
    for _ in 0..100 {
        let a = p.ambient(rng)?;
        let phi = random::random_representable_poly(rng, a, p.degree(), TERMS).centered();
        let cmp = compare_energies(&phi)?;
        // the adapted integrand represents phi on this class
        t.residual(cmp.adapted_residual_l2);
        t.residual((cmp.exact_energy - cmp.adapted_energy).max(0.0));
        let first_chaos = phi.grades().iter().all(|&g| g == 1);
        let equal = (cmp.exact_energy - cmp.adapted_energy).abs() <= p.tolerance;
        t.check(cmp.coincide == first_chaos && equal == first_chaos);
        let vbar = minimal_energy_integrand(&phi)?;
        for _ in 0..10 {
            let s = linear_field(a, &random::random_skew(rng, a.dim()))?;
            let u = vbar.add(&s)?;
            t.residual(divergence_h(&u)?.sub(&phi)?.l2_norm());
            t.residual((vbar.energy() - u.energy()).max(0.0));
        }
        let linear = ChaosPoly::linear(a, &random::random_vector(rng, a.dim()))?;
        let cmp = compare_energies(&linear)?;
        t.check(cmp.coincide);
        t.residual((cmp.exact_energy - cmp.adapted_energy).abs());
    }
    let a = Ambient::new(2, p.degree_cap)?;
    let phi = ChaosPoly::coordinate(a, 1)?.hermite_product(&ChaosPoly::coordinate(a, 2)?)?;
    let cmp = compare_energies(&phi)?;
    t.check(cmp.adapted_energy == 1.0 && cmp.exact_energy == 0.5 && !cmp.coincide);
    Ok(t)
}

fn ou_generator(p: &SuiteParams, rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(p.tolerance);
    for _ in 0..100 {
        let a = p.ambient(rng)?;
        let phi = random::random_centered_poly(rng, a, p.degree(), TERMS);
        t.residual(divergence_h(&gradient_scalar(&phi))?.sub(&phi.ou_apply())?.l2_norm());
    }
    Ok(t)
}

fn monte_carlo_expectation(p: &SuiteParams, rng: &mut InstanceRng) -> Result<Tally> {
    let mut t = Tally::new(MC_Z);
    for _ in 0..50 {
        let a = Ambient::new(rng.random_range(1..=8), p.degree_cap)?;
        let phi = random::random_poly(rng, a, p.degree(), TERMS);
        let batch = sample_batch(&DiscreteWienerSpace::new(a.dim())?, p.samples, rng.random())?;
        t.residual(mc_estimate(&phi, &batch)?.z_score(phi.expectation()));
    }
    Ok(t)
}
