use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

/// Sparse exponent vector indexing the Hermite monomial `prod_i He_{a_i}(eta_i)`.
///
/// Coordinates are 1-based and stored in increasing order; orders are strictly
/// positive, so the empty index is the constant monomial.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    entries: SmallVec<[(u32, u32); 4]>,
    degree: u32,
}

impl MultiIndex {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(coord: u32, order: u32) -> Self {
        let mut out = Self::empty();
        if order > 0 {
            out.entries.push((coord, order));
            out.degree = order;
        }
        out
    }

    /// Builds an index from arbitrary `(coordinate, order)` pairs. Repeated
    /// coordinates have their orders added; zero orders are dropped.
    pub fn from_pairs<I: IntoIterator<Item = (u32, u32)>>(pairs: I) -> Self {
        let mut entries: SmallVec<[(u32, u32); 4]> = pairs.into_iter().filter(|p| p.1 > 0).collect();
        entries.sort_unstable_by_key(|p| p.0);
        let mut merged: SmallVec<[(u32, u32); 4]> = SmallVec::with_capacity(entries.len());
        for (c, k) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += k,
                _ => merged.push((c, k)),
            }
        }
        let degree = merged.iter().map(|p| p.1).sum();
        Self { entries: merged, degree }
    }

    pub fn total_degree(&self) -> u32 {
        self.degree
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// Hermite order at `coord` (0 when absent).
    pub fn order(&self, coord: u32) -> u32 {
        self.entries
            .binary_search_by_key(&coord, |p| p.0)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.entries.iter().copied()
    }

    /// Highest coordinate carrying a positive order, with that order.
    pub fn highest(&self) -> Option<(u32, u32)> {
        self.entries.last().copied()
    }

    pub fn max_coord(&self) -> u32 {
        self.entries.last().map_or(0, |p| p.0)
    }

    /// `alpha! = prod_i alpha_i!`, the squared L2 norm of the monomial.
    pub fn factorial(&self) -> f64 {
        self.entries.iter().map(|&(_, k)| factorial(k)).product()
    }

    /// Index with the order at `coord` replaced by `order` (removed when zero).
    pub fn with_order(&self, coord: u32, order: u32) -> Self {
        let mut entries = self.entries.clone();
        match entries.binary_search_by_key(&coord, |p| p.0) {
            Ok(pos) if order == 0 => {
                entries.remove(pos);
            }
            Ok(pos) => entries[pos].1 = order,
            Err(pos) if order > 0 => entries.insert(pos, (coord, order)),
            Err(_) => {}
        }
        let degree = entries.iter().map(|p| p.1).sum();
        Self { entries, degree }
    }
}

pub(crate) fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for j in 0..k {
        acc = acc * f64::from(n - j) / f64::from(j + 1);
    }
    acc.round()
}

// Canonical term order: total degree, then coordinates, then orders.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree
            .cmp(&other.degree)
            .then_with(|| self.entries.iter().map(|p| p.0).cmp(other.entries.iter().map(|p| p.0)))
            .then_with(|| self.entries.iter().map(|p| p.1).cmp(other.entries.iter().map(|p| p.1)))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (n, (c, k)) in self.iter().enumerate() {
            if n > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}:{k}")?;
        }
        write!(f, "]")
    }
}
