//! Divergence representations of `R^d`-valued functionals.
//!
//! [`reconstruct`] builds `E v + delta(PiPi grad v)` and reports how far it is
//! from `v`. On a fixed grid this is exact precisely for functionals whose
//! monomials carry order one at their highest coordinate; anything else leaves
//! a residual that shrinks as the grid is refined ([`refine_and_reconstruct`]).
//! [`minimal_energy_integrand`] gives the gradient-form integrand
//! `grad L^{-1}(phi - E phi)`, which is always exact.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::adapted::{project_adapted, project_operator, WeaklyAdaptedOperator};
use crate::chaos::ChaosPoly;
use crate::error::{Error, Result};
use crate::malliavin::{divergence_h, divergence_op, gradient_scalar, gradient_vector, HField, OperatorField, VField};

/// Tolerance for the exactness preconditions of [`check_uniqueness`].
pub const EXACT_TOL: f64 = 1e-10;

/// `PiPi grad v`.
pub fn clark_integrand(v: &VField) -> WeaklyAdaptedOperator {
    project_operator(&gradient_vector(v))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClarkResult {
    pub n: usize,
    pub integrand: WeaklyAdaptedOperator,
    pub reconstruction: VField,
    pub residual_l2: f64,
}

impl ClarkResult {
    pub fn d(&self) -> usize {
        self.reconstruction.d()
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "d": self.d(),
            "residual_l2": self.residual_l2,
            "integrand": self.integrand.operator().to_json_value(),
            "reconstruction": self.reconstruction.components().iter().map(ChaosPoly::to_text).collect::<Vec<_>>(),
        })
    }
}

/// `E v + delta(PiPi grad v)` and its exact L2 distance to `v`.
pub fn reconstruct(v: &VField) -> Result<ClarkResult> {
    let integrand = clark_integrand(v);
    let div = divergence_op(integrand.operator())?;
    let components = v
        .components()
        .iter()
        .zip(div.components())
        .map(|(va, da)| da.add(&ChaosPoly::constant(va.ambient(), va.expectation())))
        .collect::<Result<Vec<_>>>()?;
    let reconstruction = VField::new(components)?;
    let residual_l2 = v.sub(&reconstruction)?.l2_norm();
    Ok(ClarkResult { n: v.ambient().dim(), integrand, reconstruction, residual_l2 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinementRow {
    pub m: usize,
    pub residual: f64,
}

/// Residual of the reconstruction after refining the grid by each factor.
pub fn refine_and_reconstruct(v: &VField, factors: &[usize]) -> Result<Vec<RefinementRow>> {
    factors
        .par_iter()
        .map(|&m| {
            let fine = VField::new(v.components().iter().map(|p| p.refine(m)).collect::<Result<_>>()?)?;
            Ok(RefinementRow { m, residual: reconstruct(&fine)?.residual_l2 })
        })
        .collect()
}

pub fn write_refinement_csv<W: Write>(rows: &[RefinementRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv write failed: {e}"));
    w.write_record(["m", "residual"]).map_err(io)?;
    for row in rows {
        w.serialize((row.m, row.residual)).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv write failed: {e}")))?;
    Ok(())
}

/// Whether `alt`, assumed to be an exact weakly adapted representation of `v`,
/// coincides with the Clark integrand.
pub fn check_uniqueness(v: &VField, alt: &WeaklyAdaptedOperator) -> Result<bool> {
    let centered = VField::new(v.components().iter().map(ChaosPoly::centered).collect())?;
    let gap = divergence_op(alt.operator())?.sub(&centered)?.l2_norm();
    if gap > EXACT_TOL {
        return Err(Error::Precondition(format!(
            "alternate integrand does not represent v: ||delta K - (v - E v)|| = {gap:e}"
        )));
    }
    let clark = clark_integrand(v);
    Ok(clark.operator().max_abs_diff(alt.operator())? <= EXACT_TOL)
}

/// Adds `perturbation` to an integrand, accepting only weakly adapted,
/// divergence-free perturbations so that the represented functional is kept.
pub fn perturb_integrand(base: &WeaklyAdaptedOperator, perturbation: &OperatorField) -> Result<WeaklyAdaptedOperator> {
    let p = WeaklyAdaptedOperator::new(perturbation.clone())?;
    let div = divergence_op(p.operator())?.l2_norm();
    if div > EXACT_TOL {
        return Err(Error::Precondition(format!("perturbation is not divergence free: ||delta P|| = {div:e}")));
    }
    WeaklyAdaptedOperator::new(base.operator().add(p.operator())?)
}

/// `grad L^{-1}(phi - E phi)`.
pub fn minimal_energy_integrand(phi: &ChaosPoly) -> Result<HField> {
    Ok(gradient_scalar(&phi.centered().ou_inverse()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyComparison {
    /// `E |PiPi grad phi|^2`.
    pub adapted_energy: f64,
    /// `E |grad L^{-1}(phi - E phi)|^2`.
    pub exact_energy: f64,
    /// `phi - E phi` lies in the first chaos.
    pub coincide: bool,
    /// Grid residual of the adapted representation; the adapted integrand
    /// represents `phi` only when this vanishes.
    pub adapted_residual_l2: f64,
}

pub fn compare_energies(phi: &ChaosPoly) -> Result<EnergyComparison> {
    let adapted = project_adapted(&gradient_scalar(phi));
    let exact = minimal_energy_integrand(phi)?;
    let centered = phi.centered();
    let adapted_residual_l2 = centered.sub(&divergence_h(adapted.field())?)?.l2_norm();
    Ok(EnergyComparison {
        adapted_energy: adapted.field().energy(),
        exact_energy: exact.energy(),
        coincide: centered.grades().iter().all(|&g| g == 1),
        adapted_residual_l2,
    })
}

/// Whether every monomial of `p` has order one at its highest coordinate (the
/// class on which the grid reconstruction is exact).
pub fn is_grid_representable(p: &ChaosPoly) -> bool {
    p.terms().all(|(idx, _)| idx.highest().is_none_or(|(_, k)| k == 1))
}
