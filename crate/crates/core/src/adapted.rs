//! Filtration generated by the grid, the predictable projection on `H`-fields
//! and its rowwise extension to operator fields, and the isometry and
//! orthogonality identities for predictable integrands.
//!
//! Adaptedness uses the strict-past convention: coordinate `i` of a field may
//! depend on `eta_1..eta_{i-1}` only. With that convention the divergence of a
//! predictable field is the pathwise sum `sum_i u_i eta_i`.

use crate::chaos::ChaosPoly;
use crate::error::{Error, Result};
use crate::malliavin::{divergence_h, divergence_op, expected_trace_pairing, HField, OperatorField};

/// Stage `k` is `sigma(eta_1, .., eta_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Filtration {
    n: usize,
}

impl Filtration {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn stages(&self) -> usize {
        self.n
    }

    /// Whether `p` is measurable with respect to stage `k`.
    pub fn is_measurable(&self, p: &ChaosPoly, k: usize) -> bool {
        p.max_coord() as usize <= k.min(self.n)
    }
}

/// First coordinate that violates the strict-past rule, with the offending
/// dependency.
fn predictability_violation(u: &HField) -> Option<(usize, usize)> {
    u.coords().iter().enumerate().find_map(|(n, p)| {
        let i = n + 1;
        let dep = p.max_coord() as usize;
        (dep >= i).then_some((i, dep))
    })
}

pub fn is_predictable(u: &HField) -> bool {
    predictability_violation(u).is_none()
}

/// An `H`-field certified to be predictable.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictableHField(HField);

impl PredictableHField {
    pub fn new(u: HField) -> Result<Self> {
        match predictability_violation(&u) {
            Some((coordinate, depends_on)) => Err(Error::NotPredictable { coordinate, depends_on }),
            None => Ok(Self(u)),
        }
    }

    pub fn field(&self) -> &HField {
        &self.0
    }

    pub fn into_field(self) -> HField {
        self.0
    }
}

impl AsRef<HField> for PredictableHField {
    fn as_ref(&self) -> &HField {
        &self.0
    }
}

/// An operator field whose rows `K^T y_a` are all predictable.
#[derive(Debug, Clone, PartialEq)]
pub struct WeaklyAdaptedOperator(OperatorField);

impl WeaklyAdaptedOperator {
    pub fn new(k: OperatorField) -> Result<Self> {
        for row in k.rows() {
            if let Some((coordinate, depends_on)) = predictability_violation(row) {
                return Err(Error::NotPredictable { coordinate, depends_on });
            }
        }
        Ok(Self(k))
    }

    pub fn operator(&self) -> &OperatorField {
        &self.0
    }

    pub fn into_operator(self) -> OperatorField {
        self.0
    }
}

impl AsRef<OperatorField> for WeaklyAdaptedOperator {
    fn as_ref(&self) -> &OperatorField {
        &self.0
    }
}

/// `Pi`: coordinate `i` becomes `E[u_i | F_{i-1}]`.
pub fn project_adapted(u: &HField) -> PredictableHField {
    let coords = u
        .coords()
        .iter()
        .enumerate()
        .map(|(n, p)| p.conditional_expectation(n).expect("stage below dimension"))
        .collect();
    PredictableHField(HField::new(coords).expect("projection keeps the shape"))
}

/// Rowwise `Pi`, so that `Pi(K^T y) = (PiPi K)^T y` for every `y`.
pub fn project_operator(k: &OperatorField) -> WeaklyAdaptedOperator {
    let rows = k.rows().iter().map(|r| project_adapted(r).into_field()).collect();
    WeaklyAdaptedOperator(OperatorField::from_rows(rows).expect("projection keeps the shape"))
}

/// Pathwise discrete Ito sum `sum_i u_i(omega) eta_i(omega)`.
pub fn ito_integral(u: &PredictableHField, sample: &[f64]) -> Result<f64> {
    let values = u.field().evaluate(sample)?;
    Ok(values.iter().zip(sample).map(|(a, b)| a * b).sum())
}

/// `|E delta(u) delta(v) - E (u, v)_H|`.
pub fn check_ito_isometry(u: &PredictableHField, v: &PredictableHField) -> Result<f64> {
    let lhs = divergence_h(u.field())?.l2_inner(&divergence_h(v.field())?)?;
    let rhs = u.field().l2_inner(v.field())?;
    Ok((lhs - rhs).abs())
}

/// Finite-rank weakly adapted operator `sum_j q_j (x) y_j` with predictable
/// `q_j`, kept in its structural form.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRankAdapted {
    d: usize,
    terms: Vec<(PredictableHField, Vec<f64>)>,
}

impl FiniteRankAdapted {
    pub fn new(d: usize, terms: Vec<(PredictableHField, Vec<f64>)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::Shape("finite-rank operator needs at least one term".into()));
        }
        let ambient = terms[0].0.field().ambient();
        for (q, y) in &terms {
            if y.len() != d {
                return Err(Error::Shape(format!("dual vector of length {} for d = {d}", y.len())));
            }
            if q.field().ambient() != ambient {
                return Err(Error::DimensionMismatch { expected: ambient.dim(), found: q.field().dim() });
            }
        }
        Ok(Self { d, terms })
    }

    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[(PredictableHField, Vec<f64>)] {
        &self.terms
    }

    /// Dense form: row `a` is `sum_j y_j[a] q_j`.
    pub fn to_operator(&self) -> WeaklyAdaptedOperator {
        let rows = (0..self.d)
            .map(|a| {
                let coeffs: Vec<f64> = self.terms.iter().map(|(_, y)| y[a]).collect();
                let fields: Vec<&HField> = self.terms.iter().map(|(q, _)| q.field()).collect();
                HField::linear_combine(&coeffs, &fields).expect("terms share an ambient")
            })
            .collect();
        WeaklyAdaptedOperator(OperatorField::from_rows(rows).expect("rows share an ambient"))
    }
}

/// `|E tr(K^T Q) - E tr((PiPi K)^T Q)|`.
pub fn check_weak_orthogonality(k: &OperatorField, q: &FiniteRankAdapted) -> Result<f64> {
    let dense = q.to_operator();
    let lhs = expected_trace_pairing(k, dense.operator())?;
    let rhs = expected_trace_pairing(project_operator(k).operator(), dense.operator())?;
    Ok((lhs - rhs).abs())
}

/// `|E <delta D, delta K> - E tr(K^T D)|`.
pub fn check_operator_isometry(k: &WeaklyAdaptedOperator, d: &FiniteRankAdapted) -> Result<f64> {
    let dense = d.to_operator();
    let lhs = divergence_op(dense.operator())?.l2_inner(&divergence_op(k.operator())?)?;
    let rhs = expected_trace_pairing(k.operator(), dense.operator())?;
    Ok((lhs - rhs).abs())
}

const UNIQUENESS_TOL: f64 = 1e-12;

fn max_coeff<'a, I: IntoIterator<Item = &'a ChaosPoly>>(polys: I) -> f64 {
    polys
        .into_iter()
        .flat_map(|p| p.terms().map(|(_, c)| c.abs()))
        .fold(0.0, f64::max)
}

/// Whether `delta K = 0` forces `K = 0` for this weakly adapted `K`.
pub fn check_divergence_free_uniqueness(k: &WeaklyAdaptedOperator) -> Result<bool> {
    let dk = divergence_op(k.operator())?;
    let divergence_free = max_coeff(dk.components()) <= UNIQUENESS_TOL;
    let vanishes = max_coeff(k.operator().rows().iter().flat_map(|r| r.coords())) <= UNIQUENESS_TOL;
    Ok(!divergence_free || vanishes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaos::Ambient;

    fn amb(n: usize) -> Ambient {
        Ambient::with_dim(n).unwrap()
    }

    fn x(n: usize, i: usize) -> ChaosPoly {
        ChaosPoly::coordinate(amb(n), i).unwrap()
    }

    fn zero(n: usize) -> ChaosPoly {
        ChaosPoly::zero(amb(n))
    }

    fn field(coords: Vec<ChaosPoly>) -> HField {
        HField::new(coords).unwrap()
    }

    #[test]
    fn predictability_examples() {
        assert!(is_predictable(&field(vec![zero(2), x(2, 1)])));
        assert!(!is_predictable(&field(vec![x(2, 1), zero(2)])));
        let he2 = ChaosPoly::hermite(amb(3), 1, 2).unwrap();
        assert!(is_predictable(&field(vec![zero(3), zero(3), he2])));
        assert_eq!(
            PredictableHField::new(field(vec![x(2, 2), zero(2)])),
            Err(Error::NotPredictable { coordinate: 1, depends_on: 2 })
        );
    }

    #[test]
    fn filtration_stages() {
        let f = Filtration::new(3);
        assert!(f.is_measurable(&ChaosPoly::constant(amb(3), 2.0), 0));
        assert!(!f.is_measurable(&x(3, 1), 0));
        assert!(f.is_measurable(&x(3, 2), 2));
        assert!(f.is_measurable(&x(3, 3), 3));
    }

    #[test]
    fn projection_examples() {
        assert!(project_adapted(&field(vec![x(2, 1), zero(2)])).field().is_zero());
        let pred = field(vec![zero(2), x(2, 1)]);
        assert_eq!(project_adapted(&pred).field(), &pred);
        let he2 = ChaosPoly::hermite(amb(2), 1, 2).unwrap();
        let u = field(vec![he2, x(2, 1)]);
        assert_eq!(project_adapted(&u).field(), &pred);
    }

    #[test]
    fn operator_projection_examples() {
        let k = OperatorField::from_rows(vec![field(vec![x(2, 1), zero(2)]), field(vec![zero(2), x(2, 1)])]).unwrap();
        let p = project_operator(&k);
        assert!(p.operator().row(0).is_zero());
        assert_eq!(p.operator().row(1), k.row(1));
        assert_eq!(project_operator(p.operator()), p);
        assert!(WeaklyAdaptedOperator::new(k).is_err());
    }

    #[test]
    fn ito_integral_examples() {
        let e1 = PredictableHField::new(HField::constant(amb(3), &[1.0, 0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(ito_integral(&e1, &[0.7, 0.1, -3.0]).unwrap(), 0.7);
        let u = PredictableHField::new(field(vec![zero(2), x(2, 1)])).unwrap();
        assert_eq!(ito_integral(&u, &[1.5, -2.0]).unwrap(), -3.0);
    }

    #[test]
    fn ito_isometry_examples() {
        let e1 = PredictableHField::new(HField::constant(amb(2), &[1.0, 0.0]).unwrap()).unwrap();
        assert_eq!(check_ito_isometry(&e1, &e1).unwrap(), 0.0);
        let u = PredictableHField::new(field(vec![zero(2), x(2, 1)])).unwrap();
        assert_eq!(divergence_h(u.field()).unwrap().l2_norm_sq(), 1.0);
        assert_eq!(check_ito_isometry(&u, &u).unwrap(), 0.0);
    }

    #[test]
    fn same_stage_convention_breaks_isometry() {
        // u = eta_1 e_1 is stage-1 measurable but not predictable.
        let u = field(vec![x(1, 1)]);
        assert_eq!(divergence_h(&u).unwrap().l2_norm_sq(), 2.0);
        assert_eq!(u.energy(), 1.0);
    }

    #[test]
    fn weak_orthogonality_example() {
        let k = OperatorField::from_rows(vec![field(vec![x(2, 1), zero(2)]), HField::zero(amb(2))]).unwrap();
        let e1 = PredictableHField::new(HField::constant(amb(2), &[1.0, 0.0]).unwrap()).unwrap();
        let q = FiniteRankAdapted::new(2, vec![(e1, vec![1.0, 0.0])]).unwrap();
        assert_eq!(expected_trace_pairing(&k, q.to_operator().operator()).unwrap(), 0.0);
        assert_eq!(check_weak_orthogonality(&k, &q).unwrap(), 0.0);
    }

    #[test]
    fn operator_isometry_example() {
        let e1 = PredictableHField::new(HField::constant(amb(2), &[1.0, 0.0]).unwrap()).unwrap();
        let d = FiniteRankAdapted::new(1, vec![(e1, vec![1.0])]).unwrap();
        let k = d.to_operator();
        assert_eq!(expected_trace_pairing(k.operator(), k.operator()).unwrap(), 1.0);
        assert_eq!(check_operator_isometry(&k, &d).unwrap(), 0.0);
    }

    #[test]
    fn finite_rank_validates_shapes() {
        let e1 = PredictableHField::new(HField::constant(amb(2), &[1.0, 0.0]).unwrap()).unwrap();
        assert!(FiniteRankAdapted::new(2, vec![(e1, vec![1.0])]).is_err());
        assert!(FiniteRankAdapted::new(2, vec![]).is_err());
    }

    #[test]
    fn uniqueness_examples() {
        let zero_op = WeaklyAdaptedOperator::new(OperatorField::zero(amb(2), 2)).unwrap();
        assert!(check_divergence_free_uniqueness(&zero_op).unwrap());
        // the skew pairing is divergence free but not weakly adapted
        let skew = OperatorField::from_rows(vec![field(vec![x(2, 2), x(2, 1).scale(-1.0)])]).unwrap();
        assert!(divergence_op(&skew).unwrap().component(0).is_zero());
        assert_eq!(
            WeaklyAdaptedOperator::new(skew),
            Err(Error::NotPredictable { coordinate: 1, depends_on: 2 })
        );
    }
}
