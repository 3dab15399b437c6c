//! Seeded generators of random polynomial functionals and fields, shared by
//! the `verify` suites and the test batteries.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::adapted::{PredictableHField, WeaklyAdaptedOperator};
use crate::chaos::{Ambient, ChaosPoly, MultiIndex};
use crate::malliavin::{HField, OperatorField, VField};

pub type InstanceRng = ChaCha20Rng;

pub fn rng(seed: u64) -> InstanceRng {
    ChaCha20Rng::seed_from_u64(seed)
}

fn coefficient<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(-1.0..1.0)
}

/// Random index of total degree `degree` supported on coordinates `1..=max_coord`.
pub fn random_multi_index<R: Rng>(rng: &mut R, max_coord: usize, degree: u32) -> MultiIndex {
    if max_coord == 0 || degree == 0 {
        return MultiIndex::empty();
    }
    MultiIndex::from_pairs((0..degree).map(|_| (rng.random_range(1..=max_coord) as u32, 1)))
}

/// Random polynomial on coordinates `1..=max_coord` with up to `terms` terms of
/// degree at most `max_degree`, always including a constant term.
pub fn random_poly_on<R: Rng>(rng: &mut R, ambient: Ambient, max_coord: usize, max_degree: u32, terms: usize) -> ChaosPoly {
    let mut out = vec![(MultiIndex::empty(), coefficient(rng))];
    for _ in 0..terms {
        let degree = rng.random_range(0..=max_degree);
        out.push((random_multi_index(rng, max_coord, degree), coefficient(rng)));
    }
    ChaosPoly::from_terms(ambient, out).expect("generated terms respect the ambient")
}

pub fn random_poly<R: Rng>(rng: &mut R, ambient: Ambient, max_degree: u32, terms: usize) -> ChaosPoly {
    random_poly_on(rng, ambient, ambient.dim(), max_degree, terms)
}

pub fn random_centered_poly<R: Rng>(rng: &mut R, ambient: Ambient, max_degree: u32, terms: usize) -> ChaosPoly {
    random_poly(rng, ambient, max_degree, terms).centered()
}

/// Random polynomial whose monomials all carry order one at their highest
/// coordinate.
pub fn random_representable_poly<R: Rng>(rng: &mut R, ambient: Ambient, max_degree: u32, terms: usize) -> ChaosPoly {
    let mut out = vec![(MultiIndex::empty(), coefficient(rng))];
    for _ in 0..terms {
        let top = rng.random_range(1..=ambient.dim());
        let lower = rng.random_range(0..max_degree.max(1));
        let idx = random_multi_index(rng, top - 1, lower);
        let idx = MultiIndex::from_pairs(idx.iter().chain([(top as u32, 1)]));
        out.push((idx, coefficient(rng)));
    }
    ChaosPoly::from_terms(ambient, out).expect("generated terms respect the ambient")
}

pub fn random_vfield<R: Rng>(rng: &mut R, ambient: Ambient, d: usize, max_degree: u32, terms: usize) -> VField {
    VField::new((0..d).map(|_| random_poly(rng, ambient, max_degree, terms)).collect()).expect("same ambient")
}

pub fn random_hfield<R: Rng>(rng: &mut R, ambient: Ambient, max_degree: u32, terms: usize) -> HField {
    HField::new((0..ambient.dim()).map(|_| random_poly(rng, ambient, max_degree, terms)).collect()).expect("same ambient")
}

pub fn random_operator<R: Rng>(rng: &mut R, ambient: Ambient, d: usize, max_degree: u32, terms: usize) -> OperatorField {
    OperatorField::from_rows((0..d).map(|_| random_hfield(rng, ambient, max_degree, terms)).collect()).expect("same ambient")
}

/// Coordinate `i` depends on `eta_1..eta_{i-1}` only.
pub fn random_predictable_hfield<R: Rng>(rng: &mut R, ambient: Ambient, max_degree: u32, terms: usize) -> PredictableHField {
    let coords = (1..=ambient.dim()).map(|i| random_poly_on(rng, ambient, i - 1, max_degree, terms)).collect();
    PredictableHField::new(HField::new(coords).expect("same ambient")).expect("strict-past support")
}

pub fn random_weakly_adapted<R: Rng>(rng: &mut R, ambient: Ambient, d: usize, max_degree: u32, terms: usize) -> WeaklyAdaptedOperator {
    let rows = (0..d)
        .map(|_| random_predictable_hfield(rng, ambient, max_degree, terms).into_field())
        .collect();
    WeaklyAdaptedOperator::new(OperatorField::from_rows(rows).expect("same ambient")).expect("predictable rows")
}

pub fn random_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn random_unit_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    loop {
        let v = random_vector(rng, len);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn random_skew<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| coefficient(rng));
    &a - a.transpose()
}

/// Orthonormal basis (as columns) from the QR factorization of a Gaussian matrix.
pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column signs so the law is Haar
    let signs = DMatrix::from_diagonal(&r.diagonal().map(|x| if x < 0.0 { -1.0 } else { 1.0 }));
    q * signs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adapted::is_predictable;
    use crate::clark::is_grid_representable;

    #[test]
    fn generators_are_seeded() {
        let a = Ambient::with_dim(4).unwrap();
        assert_eq!(random_poly(&mut rng(3), a, 4, 5), random_poly(&mut rng(3), a, 4, 5));
        assert_ne!(random_poly(&mut rng(3), a, 4, 5), random_poly(&mut rng(4), a, 4, 5));
    }

    #[test]
    fn generated_shapes_respect_their_classes() {
        let a = Ambient::with_dim(5).unwrap();
        let mut r = rng(11);
        for _ in 0..50 {
            assert!(random_poly(&mut r, a, 4, 6).degree() <= 4);
            assert!(is_predictable(random_predictable_hfield(&mut r, a, 3, 4).field()));
            let p = random_representable_poly(&mut r, a, 4, 6);
            assert!(p.degree() <= 4);
            assert!(is_grid_representable(&p));
        }
        let s = random_skew(&mut r, 4);
        assert_eq!(s.transpose(), -&s);
        let q = random_orthogonal(&mut r, 4);
        assert!((q.transpose() * &q - DMatrix::identity(4, 4)).norm() < 1e-12);
    }
}
