use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::hermite::hermite_value;
use super::multi_index::{binomial, factorial, MultiIndex};
use crate::error::{Error, Result};

/// Coefficients below this magnitude are pruned after every operation.
pub const PRUNE_THRESHOLD: f64 = 1e-14;
pub const DEFAULT_DEGREE_CAP: u32 = 8;
pub const MAX_DIM: usize = 128;

/// Ambient Gaussian dimension together with the degree cap that bounds every
/// polynomial living in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Ambient {
    dim: usize,
    degree_cap: u32,
}

impl Ambient {
    pub fn new(dim: usize, degree_cap: u32) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("ambient dimension must be at least 1".into()));
        }
        if dim > MAX_DIM {
            return Err(Error::DimensionCap { dim, cap: MAX_DIM });
        }
        Ok(Self { dim, degree_cap })
    }

    /// Ambient of dimension `dim` with the default degree cap.
    pub fn with_dim(dim: usize) -> Result<Self> {
        Self::new(dim, DEFAULT_DEGREE_CAP)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    pub(crate) fn check_coord(&self, i: usize) -> Result<u32> {
        if i == 0 || i > self.dim {
            return Err(Error::IndexOutOfRange { index: i, dim: self.dim });
        }
        Ok(i as u32)
    }

    pub(crate) fn check_degree(&self, degree: u32) -> Result<()> {
        if degree > self.degree_cap {
            return Err(Error::DegreeCap { degree, cap: self.degree_cap });
        }
        Ok(())
    }

    fn check_same(&self, other: &Ambient) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if self.degree_cap != other.degree_cap {
            return Err(Error::CapMismatch { left: self.degree_cap, right: other.degree_cap });
        }
        Ok(())
    }
}

/// A square-integrable Wiener functional over `dim` i.i.d. standard Gaussian
/// coordinates, expanded in probabilists' Hermite monomials.
///
/// Terms are kept in canonical order (see [`MultiIndex`]'s `Ord`) with no
/// coefficient below [`PRUNE_THRESHOLD`]. The empty index carries the mean.
#[derive(Clone, PartialEq)]
pub struct ChaosPoly {
    ambient: Ambient,
    terms: BTreeMap<MultiIndex, f64>,
}

impl ChaosPoly {
    pub fn zero(ambient: Ambient) -> Self {
        Self { ambient, terms: BTreeMap::new() }
    }

    pub fn constant(ambient: Ambient, c: f64) -> Self {
        let mut p = Self::zero(ambient);
        p.push(MultiIndex::empty(), c);
        p
    }

    /// `He_1(eta_i) = eta_i = delta(e_i)`.
    pub fn coordinate(ambient: Ambient, i: usize) -> Result<Self> {
        Self::hermite(ambient, i, 1)
    }

    /// `He_k(eta_i)`.
    pub fn hermite(ambient: Ambient, i: usize, k: u32) -> Result<Self> {
        let c = ambient.check_coord(i)?;
        ambient.check_degree(k)?;
        let mut p = Self::zero(ambient);
        p.push(MultiIndex::single(c, k), 1.0);
        Ok(p)
    }

    pub fn monomial(ambient: Ambient, index: MultiIndex, coeff: f64) -> Result<Self> {
        Self::from_terms(ambient, [(index, coeff)])
    }

    /// Gaussian linear functional `delta(h) = sum_i h_i eta_i`.
    pub fn linear(ambient: Ambient, h: &[f64]) -> Result<Self> {
        if h.len() != ambient.dim {
            return Err(Error::DimensionMismatch { expected: ambient.dim, found: h.len() });
        }
        let mut p = Self::zero(ambient);
        for (i, &c) in h.iter().enumerate() {
            p.push(MultiIndex::single(i as u32 + 1, 1), c);
        }
        Ok(p)
    }

    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, f64)>>(ambient: Ambient, terms: I) -> Result<Self> {
        let mut p = Self::zero(ambient);
        for (idx, c) in terms {
            if idx.max_coord() as usize > ambient.dim {
                return Err(Error::IndexOutOfRange { index: idx.max_coord() as usize, dim: ambient.dim });
            }
            ambient.check_degree(idx.total_degree())?;
            p.push(idx, c);
        }
        p.prune();
        Ok(p)
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(k, &v)| (k, v))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, index: &MultiIndex) -> f64 {
        self.terms.get(index).copied().unwrap_or(0.0)
    }

    /// Highest total degree present (0 for constants and for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::total_degree).max().unwrap_or(0)
    }

    /// Largest coordinate index carrying a positive order, 0 if none.
    pub fn max_coord(&self) -> u32 {
        self.terms.keys().map(MultiIndex::max_coord).max().unwrap_or(0)
    }

    fn push(&mut self, idx: MultiIndex, c: f64) {
        if c != 0.0 {
            *self.terms.entry(idx).or_insert(0.0) += c;
        }
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.abs() >= PRUNE_THRESHOLD);
    }

    fn map_terms<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&MultiIndex, f64) -> Option<f64>,
    {
        let mut out = Self::zero(self.ambient);
        for (idx, &c) in &self.terms {
            if let Some(v) = f(idx, c) {
                out.push(idx.clone(), v);
            }
        }
        out.prune();
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_terms(|_, c| Some(s * c))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        linear_combine(&[1.0, 1.0], &[self, other])
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        linear_combine(&[1.0, -1.0], &[self, other])
    }

    pub fn expectation(&self) -> f64 {
        self.coeff(&MultiIndex::empty())
    }

    /// `self - E[self]`.
    pub fn centered(&self) -> Self {
        self.map_terms(|idx, c| (!idx.is_empty()).then_some(c))
    }

    /// `E[p q] = sum_alpha alpha! p_alpha q_alpha`.
    pub fn l2_inner(&self, other: &Self) -> Result<f64> {
        self.ambient.check_same(&other.ambient)?;
        let (small, large) = if self.terms.len() <= other.terms.len() { (self, other) } else { (other, self) };
        Ok(small
            .terms
            .iter()
            .filter_map(|(idx, &a)| large.terms.get(idx).map(|&b| idx.factorial() * a * b))
            .sum())
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.terms.iter().map(|(idx, &c)| idx.factorial() * c * c).fold(0.0, |acc, x| acc + x)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Exact pointwise product, linearizing each shared coordinate with
    /// `He_m He_n = sum_k C(m,k) C(n,k) k! He_{m+n-2k}`.
    pub fn hermite_product(&self, other: &Self) -> Result<Self> {
        self.ambient.check_same(&other.ambient)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.ambient));
        }
        // The leading homogeneous parts multiply without cancellation, so the
        // product degree is exactly the sum of degrees.
        self.ambient.check_degree(self.degree() + other.degree())?;
        let mut out = Self::zero(self.ambient);
        for (a, &ca) in &self.terms {
            for (b, &cb) in &other.terms {
                monomial_product(a, b, ca * cb, &mut out.terms);
            }
        }
        out.prune();
        Ok(out)
    }

    /// `d/d eta_i`, using `He_k' = k He_{k-1}`.
    pub fn partial_derivative(&self, i: usize) -> Result<Self> {
        let c = self.ambient.check_coord(i)?;
        let mut out = Self::zero(self.ambient);
        for (idx, &v) in &self.terms {
            let k = idx.order(c);
            if k > 0 {
                out.push(idx.with_order(c, k - 1), f64::from(k) * v);
            }
        }
        out.prune();
        Ok(out)
    }

    /// `eta_i * p`, using `He_1 He_k = He_{k+1} + k He_{k-1}`.
    pub fn multiply_by_coordinate(&self, i: usize) -> Result<Self> {
        let c = self.ambient.check_coord(i)?;
        if self.is_zero() {
            return Ok(self.clone());
        }
        self.ambient.check_degree(self.degree() + 1)?;
        let mut out = Self::zero(self.ambient);
        for (idx, &v) in &self.terms {
            let k = idx.order(c);
            out.push(idx.with_order(c, k + 1), v);
            if k > 0 {
                out.push(idx.with_order(c, k - 1), f64::from(k) * v);
            }
        }
        out.prune();
        Ok(out)
    }

    /// `E[p | F_k]` with `F_k = sigma(eta_1, .., eta_k)`: drops every term that
    /// involves a coordinate beyond `k`.
    pub fn conditional_expectation(&self, k: usize) -> Result<Self> {
        if k > self.ambient.dim {
            return Err(Error::GridIndexOutOfRange { index: k, n: self.ambient.dim });
        }
        Ok(self.map_terms(|idx, c| (idx.max_coord() as usize <= k).then_some(c)))
    }

    /// Projection onto the homogeneous chaos of grade `m`.
    pub fn chaos_projection(&self, m: u32) -> Self {
        self.map_terms(|idx, c| (idx.total_degree() == m).then_some(c))
    }

    /// Grades present, ascending.
    pub fn grades(&self) -> Vec<u32> {
        let mut g: Vec<u32> = self.terms.keys().map(MultiIndex::total_degree).collect();
        g.dedup();
        g
    }

    /// Ornstein-Uhlenbeck (number) operator: grade-m terms scaled by m.
    pub fn ou_apply(&self) -> Self {
        self.map_terms(|idx, c| Some(f64::from(idx.total_degree()) * c))
    }

    /// Inverse of the number operator on centered functionals.
    pub fn ou_inverse(&self) -> Result<Self> {
        let mean = self.expectation();
        if mean.abs() > 1e-12 {
            return Err(Error::NotCentered { mean });
        }
        Ok(self.map_terms(|idx, c| (!idx.is_empty()).then(|| c / f64::from(idx.total_degree()))))
    }

    /// Embeds the functional into a grid refined by `factor`: every coordinate
    /// `eta_i` is replaced by `(eta'_{(i-1)m+1} + .. + eta'_{im}) / sqrt(m)`,
    /// and the result is re-expanded with [`ChaosPoly::hermite_product`].
    pub fn refine(&self, factor: usize) -> Result<Self> {
        if factor == 0 {
            return Err(Error::InvalidArgument("refinement factor must be at least 1".into()));
        }
        if factor == 1 {
            return Ok(self.clone());
        }
        let fine = Ambient::new(self.ambient.dim * factor, self.ambient.degree_cap)?;
        let weight = 1.0 / (factor as f64).sqrt();
        // He_k(X_i) for each coarse coordinate, grown lazily by the three-term recurrence.
        let mut powers: BTreeMap<u32, Vec<ChaosPoly>> = BTreeMap::new();
        let mut out = Self::zero(fine);
        for (idx, &c) in &self.terms {
            let mut term = Self::constant(fine, c);
            for (coord, k) in idx.iter() {
                let table = powers.entry(coord).or_insert_with(|| {
                    let block = (coord as usize - 1) * factor;
                    let h: Vec<f64> = (0..fine.dim)
                        .map(|j| if j >= block && j < block + factor { weight } else { 0.0 })
                        .collect();
                    let x = Self::linear(fine, &h).expect("block vector has fine dimension");
                    vec![Self::constant(fine, 1.0), x]
                });
                while table.len() <= k as usize {
                    let j = table.len() - 1;
                    let next = table[1]
                        .hermite_product(&table[j])?
                        .sub(&table[j - 1].scale(j as f64))?;
                    table.push(next);
                }
                term = term.hermite_product(&table[k as usize])?;
            }
            for (fi, fc) in term.terms {
                out.push(fi, fc);
            }
        }
        out.prune();
        Ok(out)
    }

    /// Pathwise value at a point of `R^dim`.
    pub fn evaluate(&self, sample: &[f64]) -> Result<f64> {
        if sample.len() != self.ambient.dim {
            return Err(Error::SampleLength { expected: self.ambient.dim, found: sample.len() });
        }
        Ok(self.evaluate_unchecked(sample))
    }

    pub(crate) fn evaluate_unchecked(&self, sample: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(idx, &c)| c * idx.iter().map(|(i, k)| hermite_value(k, sample[i as usize - 1])).product::<f64>())
            .sum()
    }

    /// Re-homes the polynomial into an ambient of the same dimension with a
    /// different degree cap.
    pub fn with_degree_cap(&self, cap: u32) -> Result<Self> {
        let ambient = Ambient::new(self.ambient.dim, cap)?;
        ambient.check_degree(self.degree())?;
        Ok(Self { ambient, terms: self.terms.clone() })
    }

    /// Embeds into a larger ambient dimension (coordinates keep their indices).
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.max_coord() as usize {
            return Err(Error::DimensionMismatch { expected: self.max_coord() as usize, found: dim });
        }
        let ambient = Ambient::new(dim, self.ambient.degree_cap)?;
        Ok(Self { ambient, terms: self.terms.clone() })
    }
}

fn monomial_product(a: &MultiIndex, b: &MultiIndex, coeff: f64, out: &mut BTreeMap<MultiIndex, f64>) {
    // Start from coordinates unique to either side, then expand shared ones.
    let mut partial: Vec<(Vec<(u32, u32)>, f64)> = vec![(Vec::new(), coeff)];
    let mut ai = a.iter().peekable();
    let mut bi = b.iter().peekable();
    loop {
        let next = match (ai.peek(), bi.peek()) {
            (None, None) => break,
            (Some(&x), None) => {
                ai.next();
                Linear::Single(x)
            }
            (None, Some(&y)) => {
                bi.next();
                Linear::Single(y)
            }
            (Some(&x), Some(&y)) if x.0 < y.0 => {
                ai.next();
                Linear::Single(x)
            }
            (Some(&x), Some(&y)) if y.0 < x.0 => {
                bi.next();
                Linear::Single(y)
            }
            (Some(&x), Some(&y)) => {
                ai.next();
                bi.next();
                Linear::Shared(x.0, x.1, y.1)
            }
        };
        match next {
            Linear::Single(p) => partial.iter_mut().for_each(|t| t.0.push(p)),
            Linear::Shared(c, m, n) => {
                let mut grown = Vec::with_capacity(partial.len() * (m.min(n) as usize + 1));
                for (idx, v) in &partial {
                    for k in 0..=m.min(n) {
                        let w = binomial(m, k) * binomial(n, k) * factorial(k);
                        let mut e = idx.clone();
                        e.push((c, m + n - 2 * k));
                        grown.push((e, v * w));
                    }
                }
                partial = grown;
            }
        }
    }
    for (pairs, v) in partial {
        *out.entry(MultiIndex::from_pairs(pairs)).or_insert(0.0) += v;
    }
}

enum Linear {
    Single((u32, u32)),
    Shared(u32, u32, u32),
}

/// `sum_j coeffs[j] * polys[j]` in canonical form.
pub fn linear_combine(coeffs: &[f64], polys: &[&ChaosPoly]) -> Result<ChaosPoly> {
    if coeffs.len() != polys.len() {
        return Err(Error::Shape(format!("{} coefficients for {} polynomials", coeffs.len(), polys.len())));
    }
    let Some(first) = polys.first() else {
        return Err(Error::InvalidArgument("linear_combine needs at least one polynomial".into()));
    };
    let mut out = ChaosPoly::zero(first.ambient);
    for (&s, p) in coeffs.iter().zip(polys) {
        first.ambient.check_same(&p.ambient)?;
        for (idx, &c) in &p.terms {
            out.push(idx.clone(), s * c);
        }
    }
    out.prune();
    Ok(out)
}

impl std::fmt::Debug for ChaosPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChaosPoly")
            .field("dim", &self.ambient.dim)
            .field("terms", &self.terms)
            .finish()
    }
}
