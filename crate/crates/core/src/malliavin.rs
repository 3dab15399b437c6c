//! Gradient and divergence of scalar, `H`-valued, `R^d`-valued and
//! `L(H, R^d)`-valued functionals, plus residual checks for the duality and
//! product-rule identities that tie them together.
//!
//! The divergence is computed by the explicit formula
//! `delta(u) = sum_i (eta_i u_i - d_i u_i)`; its adjointness to the gradient is
//! checked, never assumed.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::chaos::{linear_combine, Ambient, ChaosPoly};
use crate::error::{Error, Result};

fn check_ambients<'a, I: IntoIterator<Item = &'a ChaosPoly>>(polys: I) -> Result<Option<Ambient>> {
    let mut seen: Option<Ambient> = None;
    for p in polys {
        match seen {
            None => seen = Some(p.ambient()),
            Some(a) if a != p.ambient() => {
                return Err(Error::DimensionMismatch { expected: a.dim(), found: p.dim() });
            }
            Some(_) => {}
        }
    }
    Ok(seen)
}

/// `H`-valued functional; coordinate `i` is `(u, e_i)_H`.
#[derive(Debug, Clone, PartialEq)]
pub struct HField {
    coords: Vec<ChaosPoly>,
}

impl HField {
    /// The number of coordinates must equal the ambient dimension.
    pub fn new(coords: Vec<ChaosPoly>) -> Result<Self> {
        let ambient = check_ambients(&coords)?.ok_or_else(|| Error::Shape("empty H-field".into()))?;
        if coords.len() != ambient.dim() {
            return Err(Error::DimensionMismatch { expected: ambient.dim(), found: coords.len() });
        }
        Ok(Self { coords })
    }

    pub fn zero(ambient: Ambient) -> Self {
        Self { coords: vec![ChaosPoly::zero(ambient); ambient.dim()] }
    }

    /// Deterministic field `h`.
    pub fn constant(ambient: Ambient, h: &[f64]) -> Result<Self> {
        if h.len() != ambient.dim() {
            return Err(Error::DimensionMismatch { expected: ambient.dim(), found: h.len() });
        }
        Ok(Self { coords: h.iter().map(|&c| ChaosPoly::constant(ambient, c)).collect() })
    }

    /// `p * h` for a scalar functional `p` and a fixed vector `h`.
    pub fn scalar_times(p: &ChaosPoly, h: &[f64]) -> Result<Self> {
        if h.len() != p.dim() {
            return Err(Error::DimensionMismatch { expected: p.dim(), found: h.len() });
        }
        Ok(Self { coords: h.iter().map(|&c| p.scale(c)).collect() })
    }

    pub fn ambient(&self) -> Ambient {
        self.coords[0].ambient()
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[ChaosPoly] {
        &self.coords
    }

    /// Coordinate `i` (1-based).
    pub fn coord(&self, i: usize) -> &ChaosPoly {
        &self.coords[i - 1]
    }

    pub fn into_coords(self) -> Vec<ChaosPoly> {
        self.coords
    }

    pub fn map<F>(&self, f: F) -> Result<Self>
    where
        F: FnMut(&ChaosPoly) -> Result<ChaosPoly>,
    {
        Ok(Self { coords: self.coords.iter().map(f).collect::<Result<_>>()? })
    }

    pub fn linear_combine(coeffs: &[f64], fields: &[&HField]) -> Result<Self> {
        let first = fields.first().ok_or_else(|| Error::Shape("no fields to combine".into()))?;
        let coords = (0..first.dim())
            .map(|i| {
                let polys: Vec<&ChaosPoly> = fields.iter().map(|f| &f.coords[i]).collect();
                linear_combine(coeffs, &polys)
            })
            .collect::<Result<_>>()?;
        Self::new(coords)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::linear_combine(&[1.0, 1.0], &[self, other])
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::linear_combine(&[1.0, -1.0], &[self, other])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { coords: self.coords.iter().map(|p| p.scale(s)).collect() }
    }

    /// `E (u, v)_H`.
    pub fn l2_inner(&self, other: &Self) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        self.coords.iter().zip(&other.coords).map(|(a, b)| a.l2_inner(b)).sum()
    }

    /// `E |u|_H^2`.
    pub fn energy(&self) -> f64 {
        self.coords.iter().map(ChaosPoly::l2_norm_sq).fold(0.0, |acc, x| acc + x)
    }

    pub fn degree(&self) -> u32 {
        self.coords.iter().map(ChaosPoly::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(ChaosPoly::is_zero)
    }

    pub fn evaluate(&self, sample: &[f64]) -> Result<Vec<f64>> {
        self.coords.iter().map(|p| p.evaluate(sample)).collect()
    }

    /// Largest coefficient gap to `other` over all coordinates.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.coords.iter().flat_map(|p| p.terms().map(|(_, c)| c.abs())).fold(0.0, f64::max))
    }
}

/// `R^d`-valued functional.
#[derive(Debug, Clone, PartialEq)]
pub struct VField {
    components: Vec<ChaosPoly>,
}

impl VField {
    pub fn new(components: Vec<ChaosPoly>) -> Result<Self> {
        check_ambients(&components)?.ok_or_else(|| Error::Shape("empty vector field".into()))?;
        Ok(Self { components })
    }

    pub fn constant(ambient: Ambient, y: &[f64]) -> Result<Self> {
        Self::new(y.iter().map(|&c| ChaosPoly::constant(ambient, c)).collect())
    }

    pub fn ambient(&self) -> Ambient {
        self.components[0].ambient()
    }

    /// Target dimension `d`.
    pub fn d(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ChaosPoly] {
        &self.components
    }

    pub fn component(&self, a: usize) -> &ChaosPoly {
        &self.components[a]
    }

    pub fn into_components(self) -> Vec<ChaosPoly> {
        self.components
    }

    pub fn expectation(&self) -> Vec<f64> {
        self.components.iter().map(ChaosPoly::expectation).collect()
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.d() != other.d() {
            return Err(Error::Shape(format!("vector fields of dimension {} and {}", self.d(), other.d())));
        }
        Self::new(self.components.iter().zip(&other.components).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?)
    }

    /// `E <F, G>_{R^d}`.
    pub fn l2_inner(&self, other: &Self) -> Result<f64> {
        if self.d() != other.d() {
            return Err(Error::Shape(format!("vector fields of dimension {} and {}", self.d(), other.d())));
        }
        self.components.iter().zip(&other.components).map(|(a, b)| a.l2_inner(b)).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.components.iter().map(ChaosPoly::l2_norm_sq).fold(0.0, |acc, x| acc + x).sqrt()
    }

    pub fn degree(&self) -> u32 {
        self.components.iter().map(ChaosPoly::degree).max().unwrap_or(0)
    }

    pub fn evaluate(&self, sample: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|p| p.evaluate(sample)).collect()
    }
}

/// `L(H, R^d)`-valued functional as a `d x n` matrix of chaos polynomials;
/// entry `(a, i)` is `<y_a, K e_i>` and row `a` is the `H`-field `K^T y_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorField {
    rows: Vec<HField>,
}

impl OperatorField {
    pub fn from_rows(rows: Vec<HField>) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::Shape("operator needs at least one row".into()))?;
        let ambient = first.ambient();
        if let Some(bad) = rows.iter().find(|r| r.ambient() != ambient) {
            return Err(Error::DimensionMismatch { expected: ambient.dim(), found: bad.dim() });
        }
        Ok(Self { rows })
    }

    pub fn zero(ambient: Ambient, d: usize) -> Self {
        Self { rows: vec![HField::zero(ambient); d] }
    }

    /// Constant operator from a dense `d x n` matrix.
    pub fn constant(ambient: Ambient, matrix: &DMatrix<f64>) -> Result<Self> {
        if matrix.ncols() != ambient.dim() {
            return Err(Error::DimensionMismatch { expected: ambient.dim(), found: matrix.ncols() });
        }
        let rows = matrix
            .row_iter()
            .map(|r| HField::constant(ambient, &r.iter().copied().collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    /// `1_H` on `R^n` (so `d = n`).
    pub fn identity(ambient: Ambient) -> Self {
        Self::constant(ambient, &DMatrix::identity(ambient.dim(), ambient.dim())).expect("square identity")
    }

    /// Rank-one operator `alpha (x) y`: `K h = (alpha, h)_H y`, so row `a` is `y_a alpha`.
    pub fn rank_one(alpha: &HField, y: &[f64]) -> Self {
        Self { rows: y.iter().map(|&c| alpha.scale(c)).collect() }
    }

    pub fn ambient(&self) -> Ambient {
        self.rows[0].ambient()
    }

    pub fn d(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.rows[0].dim()
    }

    pub fn rows(&self) -> &[HField] {
        &self.rows
    }

    pub fn row(&self, a: usize) -> &HField {
        &self.rows[a]
    }

    pub fn into_rows(self) -> Vec<HField> {
        self.rows
    }

    /// Entry `(a, i)`, `a` 0-based, `i` 1-based like the grid coordinates.
    pub fn entry(&self, a: usize, i: usize) -> &ChaosPoly {
        self.rows[a].coord(i)
    }

    /// `K^T y` for a fixed dual vector `y`.
    pub fn transpose_apply(&self, y: &[f64]) -> Result<HField> {
        if y.len() != self.d() {
            return Err(Error::Shape(format!("dual vector of length {} for d = {}", y.len(), self.d())));
        }
        let refs: Vec<&HField> = self.rows.iter().collect();
        HField::linear_combine(y, &refs)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Self::from_rows(self.rows.iter().zip(&other.rows).map(|(a, b)| a.add(b)).collect::<Result<_>>()?)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        Self::from_rows(self.rows.iter().zip(&other.rows).map(|(a, b)| a.sub(b)).collect::<Result<_>>()?)
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(HField::is_zero)
    }

    pub fn degree(&self) -> u32 {
        self.rows.iter().map(HField::degree).max().unwrap_or(0)
    }

    /// `E tr(K^T K)`.
    pub fn energy(&self) -> f64 {
        self.rows.iter().map(HField::energy).fold(0.0, |acc, x| acc + x)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_shape(other)?;
        self.rows.iter().zip(&other.rows).map(|(a, b)| a.max_abs_diff(b)).try_fold(0.0, |m, x| Ok(f64::max(m, x?)))
    }

    /// Pathwise `d x n` matrix.
    pub fn evaluate(&self, sample: &[f64]) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(self.d(), self.n());
        for (a, row) in self.rows.iter().enumerate() {
            for (i, p) in row.coords().iter().enumerate() {
                m[(a, i)] = p.evaluate(sample)?;
            }
        }
        Ok(m)
    }

    pub(crate) fn check_shape(&self, other: &Self) -> Result<()> {
        if self.d() != other.d() || self.n() != other.n() {
            return Err(Error::Shape(format!(
                "{}x{} operator against {}x{}",
                self.d(),
                self.n(),
                other.d(),
                other.n()
            )));
        }
        Ok(())
    }

    /// JSON array of rows, each entry in chaos text form.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.rows
                .iter()
                .map(|r| serde_json::Value::Array(r.coords().iter().map(|p| p.to_text().into()).collect()))
                .collect(),
        )
    }

    pub fn from_json_value(ambient: Ambient, value: &serde_json::Value) -> Result<Self> {
        let bad = || Error::InvalidArgument("operator JSON must be an array of arrays of strings".into());
        let rows = value
            .as_array()
            .ok_or_else(bad)?
            .iter()
            .map(|row| {
                let coords = row
                    .as_array()
                    .ok_or_else(bad)?
                    .iter()
                    .map(|e| ChaosPoly::from_text(ambient, e.as_str().ok_or_else(bad)?))
                    .collect::<Result<Vec<_>>>()?;
                HField::new(coords)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

/// `grad p`, coordinate `i` = `d_i p`.
pub fn gradient_scalar(p: &ChaosPoly) -> HField {
    let coords = (1..=p.dim())
        .map(|i| p.partial_derivative(i).expect("coordinate within ambient"))
        .collect();
    HField { coords }
}

/// Row `a` is the gradient of component `a`.
pub fn gradient_vector(v: &VField) -> OperatorField {
    OperatorField { rows: v.components().iter().map(gradient_scalar).collect() }
}

/// Skorokhod divergence of an `H`-field.
pub fn divergence_h(u: &HField) -> Result<ChaosPoly> {
    let mut acc = ChaosPoly::zero(u.ambient());
    for (n, ui) in u.coords.iter().enumerate() {
        let i = n + 1;
        let term = ui.multiply_by_coordinate(i)?.sub(&ui.partial_derivative(i)?)?;
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Componentwise: `<y_a, delta K> = delta(K^T y_a)`.
pub fn divergence_op(k: &OperatorField) -> Result<VField> {
    VField::new(k.rows.iter().map(divergence_h).collect::<Result<_>>()?)
}

/// Random trace `tr(K^T D) = sum_{a,i} K_{ai} D_{ai}`.
pub fn trace_pairing(k: &OperatorField, d: &OperatorField) -> Result<ChaosPoly> {
    k.check_shape(d)?;
    let mut acc = ChaosPoly::zero(k.ambient());
    for (rk, rd) in k.rows.iter().zip(&d.rows) {
        for (a, b) in rk.coords.iter().zip(&rd.coords) {
            acc = acc.add(&a.hermite_product(b)?)?;
        }
    }
    Ok(acc)
}

/// `E tr(K^T D)` without forming the product.
pub fn expected_trace_pairing(k: &OperatorField, d: &OperatorField) -> Result<f64> {
    k.check_shape(d)?;
    k.rows.iter().zip(&d.rows).map(|(a, b)| a.l2_inner(b)).sum()
}

/// `|E tr(K^T grad F) - E <F, delta K>|`.
pub fn check_duality(k: &OperatorField, f: &VField) -> Result<f64> {
    if f.d() != k.d() {
        return Err(Error::Shape(format!("F has {} components, K has {} rows", f.d(), k.d())));
    }
    let lhs = expected_trace_pairing(k, &gradient_vector(f))?;
    let rhs = f.l2_inner(&divergence_op(k)?)?;
    Ok((lhs - rhs).abs())
}

/// `K^T F` as an `H`-field: coordinate `i` is `sum_a F_a K_{ai}`.
pub fn transpose_apply_random(k: &OperatorField, f: &VField) -> Result<HField> {
    if f.d() != k.d() {
        return Err(Error::Shape(format!("F has {} components, K has {} rows", f.d(), k.d())));
    }
    let mut acc = HField::zero(k.ambient());
    for (row, fa) in k.rows.iter().zip(f.components()) {
        acc = acc.add(&row.map(|p| p.hermite_product(fa))?)?;
    }
    Ok(acc)
}

/// L2 norm of `delta(K^T F) - (<F, delta K> - tr(K^T grad F))`.
pub fn check_weakb(k: &OperatorField, f: &VField) -> Result<f64> {
    let lhs = divergence_h(&transpose_apply_random(k, f)?)?;
    let dk = divergence_op(k)?;
    let mut pairing = ChaosPoly::zero(k.ambient());
    for (fa, da) in f.components().iter().zip(dk.components()) {
        pairing = pairing.add(&fa.hermite_product(da)?)?;
    }
    let rhs = pairing.sub(&trace_pairing(k, &gradient_vector(f))?)?;
    Ok(lhs.sub(&rhs)?.l2_norm())
}

/// Smallest `C` with `||delta(K^T l)||_{L2} <= C |l|` for all `l`: the square
/// root of the top eigenvalue of the Gram matrix `G_{ab} = E delta(K^T y_a) delta(K^T y_b)`.
pub fn check_cbound(k: &OperatorField) -> Result<f64> {
    let dk = divergence_op(k)?;
    let d = k.d();
    let mut gram = DMatrix::zeros(d, d);
    for a in 0..d {
        for b in a..d {
            let g = dk.component(a).l2_inner(dk.component(b))?;
            gram[(a, b)] = g;
            gram[(b, a)] = g;
        }
    }
    let top = SymmetricEigen::new(gram).eigenvalues.iter().copied().fold(0.0, f64::max);
    Ok(top.max(0.0).sqrt())
}

/// Field `u_i = sum_j A_{ij} eta_j` for a square matrix `A`; divergence-free
/// whenever `A` is skew-symmetric.
pub fn linear_field(ambient: Ambient, a: &DMatrix<f64>) -> Result<HField> {
    if a.nrows() != ambient.dim() || a.ncols() != ambient.dim() {
        return Err(Error::Shape(format!("{}x{} matrix for dimension {}", a.nrows(), a.ncols(), ambient.dim())));
    }
    let coords = a
        .row_iter()
        .map(|r| ChaosPoly::linear(ambient, &r.iter().copied().collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    HField::new(coords)
}
