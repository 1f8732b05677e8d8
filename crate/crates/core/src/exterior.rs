//! Sparse exterior algebra over a fixed orthonormal coframe `e^0, ..., e^{d-1}`.
//!
//! Basis monomials are stored as bitmasks with implicitly increasing index
//! order, so every coefficient is the one of the canonical basis element
//! `e^{i_1 ... i_p}` with `i_1 < ... < i_p`. Orientation is `e^{01...(d-1)}`.

use std::collections::BTreeMap;
use std::fmt;


use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest supported coframe dimension.
pub const MAX_DIM: usize = 64;

/// Strictly increasing index set, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MultiIndex(u64);

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    pub fn from_bits(bits: u64) -> Self {
        MultiIndex(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// Sorts `indices`, returning the canonical index and the sign of the
    /// sorting permutation, or `None` on a repeated index.
    pub fn from_unsorted(indices: &[usize]) -> Option<(MultiIndex, bool)> {
        let mut mask = 0u64;
        let mut negative = false;
        for &i in indices {
            assert!(i < MAX_DIM, "frame index {i} exceeds {MAX_DIM}");
            let bit = 1u64 << i;
            if mask & bit != 0 {
                return None;
            }
            // entries already placed that must move past i
            negative ^= (mask >> i).count_ones() % 2 == 1;
            mask |= bit;
        }
        Some((MultiIndex(mask), negative))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        i < MAX_DIM && self.0 & (1u64 << i) != 0
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.indices().collect()
    }

    pub fn complement(self, dim: usize) -> MultiIndex {
        let full = if dim == 64 { u64::MAX } else { (1u64 << dim) - 1 };
        MultiIndex(full & !self.0)
    }

    pub fn is_disjoint(self, other: MultiIndex) -> bool {
        self.0 & other.0 == 0
    }

    /// Sign of the shuffle taking the concatenation `(self, other)` to
    /// increasing order. Both sets must be disjoint.
    pub fn merge_is_negative(self, other: MultiIndex) -> bool {
        debug_assert!(self.is_disjoint(other));
        let mut inversions = 0u32;
        for j in other.indices() {
            inversions += (self.0 >> j).count_ones();
        }
        inversions % 2 == 1
    }

    pub fn union(self, other: MultiIndex) -> MultiIndex {
        MultiIndex(self.0 | other.0)
    }

    pub fn without(self, i: usize) -> MultiIndex {
        MultiIndex(self.0 & !(1u64 << i))
    }

    /// Number of members strictly below `i`.
    pub fn position(self, i: usize) -> usize {
        (self.0 & ((1u64 << i) - 1)).count_ones() as usize
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices().map(|i| i.to_string()).collect();
        if idx.iter().all(|s| s.len() == 1) {
            write!(f, "{}", idx.concat())
        } else {
            write!(f, "{}", idx.join(","))
        }
    }
}

/// Dimensions of the setting: the base has dimension `n + 1`, the sphere
/// bundle of radius `s` has dimension `2n + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameContext<T> {
    n: usize,
    s: T,
}

impl<T: Scalar> FrameContext<T> {
    pub fn new(n: usize, s: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidContext("n must be at least 1".into()));
        }
        if 2 * n + 1 > MAX_DIM {
            return Err(Error::InvalidContext(format!(
                "n = {n} exceeds the supported coframe size"
            )));
        }
        if s <= T::zero() {
            return Err(Error::InvalidContext(format!("radius s = {s} must be positive")));
        }
        Ok(Self { n, s })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> &T {
        &self.s
    }

    /// Coframe dimension `2n + 1`.
    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }
}

/// Homogeneous `p`-form with constant coefficients.
///
/// Forms of degree above the coframe dimension exist only as zero forms; they
/// arise from wedging past the top degree.
#[derive(Clone, Debug, PartialEq)]
pub struct ExteriorForm<T> {
    dim: usize,
    degree: usize,
    terms: BTreeMap<MultiIndex, T>,
}

fn sign<T: Scalar>(negative: bool, x: T) -> T {
    if negative {
        -x
    } else {
        x
    }
}

impl<T: Scalar> ExteriorForm<T> {
    pub fn zero(dim: usize, degree: usize) -> Self {
        assert!(dim <= MAX_DIM, "coframe dimension {dim} exceeds {MAX_DIM}");
        Self {
            dim,
            degree,
            terms: BTreeMap::new(),
        }
    }

    /// The constant 0-form `c`.
    pub fn constant(dim: usize, c: T) -> Self {
        let mut f = Self::zero(dim, 0);
        f.add_term(MultiIndex::EMPTY, c);
        f
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, T::one())
    }

    /// `e^{i_1} ∧ ... ∧ e^{i_p}` for indices in any order.
    pub fn basis(dim: usize, indices: &[usize]) -> Self {
        Self::monomial(dim, indices, T::one())
    }

    pub fn monomial(dim: usize, indices: &[usize], coeff: T) -> Self {
        let mut f = Self::zero(dim, indices.len());
        assert!(
            indices.iter().all(|&i| i < dim),
            "index out of range for dimension {dim}"
        );
        if let Some((mi, neg)) = MultiIndex::from_unsorted(indices) {
            f.add_term(mi, sign(neg, coeff));
        }
        f
    }

    /// Sum of monomials, each given by unsorted indices.
    pub fn from_terms<I>(dim: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, T)>,
    {
        let mut f = Self::zero(dim, degree);
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(Error::DegreeMismatch {
                    left: degree,
                    right: idx.len(),
                });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= dim) {
                return Err(Error::IndexOutOfRange { index: bad, dim });
            }
            if let Some((mi, neg)) = MultiIndex::from_unsorted(&idx) {
                f.add_term(mi, sign(neg, c));
            }
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, &T)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    /// Coefficient of `e^{indices}` (any order, sign adjusted).
    pub fn coefficient(&self, indices: &[usize]) -> T {
        match MultiIndex::from_unsorted(indices) {
            Some((mi, neg)) if mi.len() == self.degree => {
                sign(neg, self.terms.get(&mi).cloned().unwrap_or_else(T::zero))
            }
            _ => T::zero(),
        }
    }

    pub fn coefficient_of(&self, mi: MultiIndex) -> T {
        self.terms.get(&mi).cloned().unwrap_or_else(T::zero)
    }

    /// Accumulates `c·e^{mi}`; drops the entry if it cancels.
    pub(crate) fn add_term(&mut self, mi: MultiIndex, c: T) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(mi.len(), self.degree);
        match self.terms.get_mut(&mi) {
            Some(v) => {
                let sum = v.clone() + c;
                if sum.is_zero() {
                    self.terms.remove(&mi);
                } else {
                    *v = sum;
                }
            }
            None => {
                self.terms.insert(mi, c);
            }
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch {
                left: self.degree,
                right: other.degree,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(*k, v.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(*k, -v.clone());
        }
        Ok(out)
    }

    pub fn scale(&self, c: &T) -> Self {
        let mut out = Self::zero(self.dim, self.degree);
        if c.is_zero() {
            return out;
        }
        for (k, v) in &self.terms {
            out.add_term(*k, v.clone() * c.clone());
        }
        out
    }

    pub fn neg(&self) -> Self {
        Self {
            dim: self.dim,
            degree: self.degree,
            terms: self.terms.iter().map(|(k, v)| (*k, -v.clone())).collect(),
        }
    }

    /// Exterior product. Panics on coframe dimension mismatch.
    pub fn wedge(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "wedge of forms on different coframes");
        let degree = self.degree + other.degree;
        let mut out = Self::zero(self.dim, degree);
        if degree > self.dim {
            return out;
        }
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if !a.is_disjoint(*b) {
                    continue;
                }
                let c = ca.clone() * cb.clone();
                out.add_term(a.union(*b), sign(a.merge_is_negative(*b), c));
            }
        }
        out
    }

    /// Interior product with the frame vector `e_j`.
    pub fn interior(&self, j: usize) -> Self {
        assert!(j < self.dim, "frame index {j} out of range");
        if self.degree == 0 {
            return Self::zero(self.dim, 0);
        }
        let mut out = Self::zero(self.dim, self.degree - 1);
        for (mi, c) in &self.terms {
            if mi.contains(j) {
                out.add_term(mi.without(j), sign(mi.position(j) % 2 == 1, c.clone()));
            }
        }
        out
    }

    /// Interior product with an arbitrary vector given by frame components.
    pub fn interior_vector(&self, v: &[T]) -> Self {
        assert_eq!(v.len(), self.dim);
        let mut out = Self::zero(self.dim, self.degree.saturating_sub(1));
        for (j, vj) in v.iter().enumerate() {
            if vj.is_zero() {
                continue;
            }
            let part = self.interior(j).scale(vj);
            out = out.try_add(&part).expect("same degree");
        }
        out
    }

    /// Hodge star of the orthonormal coframe with orientation `e^{01...}`.
    pub fn hodge(&self) -> Self {
        let mut out = Self::zero(self.dim, self.dim - self.degree.min(self.dim));
        if self.degree > self.dim {
            return out;
        }
        for (mi, c) in &self.terms {
            let comp = mi.complement(self.dim);
            out.add_term(comp, sign(mi.merge_is_negative(comp), c.clone()));
        }
        out
    }

    /// `i`-fold wedge power; `power(0)` is the constant 1.
    pub fn power(&self, i: usize) -> Self {
        (0..i).fold(Self::one(self.dim), |acc, _| acc.wedge(self))
    }

    /// Value on `p` vectors given by frame components. Zero entries are
    /// skipped, so sparse arguments are cheap.
    pub fn eval(&self, vectors: &[Vec<T>]) -> T {
        assert_eq!(vectors.len(), self.degree, "wrong number of arguments");
        let sparse: Vec<Vec<(usize, T)>> = vectors
            .iter()
            .map(|v| {
                assert_eq!(v.len(), self.dim);
                v.iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(i, x)| (i, x.clone()))
                    .collect()
            })
            .collect();
        self.eval_sparse(&sparse)
    }

    /// Multilinear expansion over the nonzero entries of each argument.
    pub fn eval_sparse(&self, vectors: &[Vec<(usize, T)>]) -> T {
        fn rec<T: Scalar>(
            form: &ExteriorForm<T>,
            vectors: &[Vec<(usize, T)>],
            k: usize,
            mask: u64,
            negative: bool,
            weight: T,
            acc: &mut T,
        ) {
            if k == vectors.len() {
                if let Some(c) = form.terms.get(&MultiIndex(mask)) {
                    let term = weight * c.clone();
                    *acc = acc.clone() + sign(negative, term);
                }
                return;
            }
            for (i, x) in &vectors[k] {
                let bit = 1u64 << i;
                if mask & bit != 0 {
                    continue;
                }
                let neg = negative ^ ((mask >> i).count_ones() % 2 == 1);
                rec(form, vectors, k + 1, mask | bit, neg, weight.clone() * x.clone(), acc);
            }
        }
        assert_eq!(vectors.len(), self.degree, "wrong number of arguments");
        let mut acc = T::zero();
        rec(self, vectors, 0, 0, false, T::one(), &mut acc);
        acc
    }

    /// Sum of squared coefficients.
    pub fn norm_sq(&self) -> T {
        self.terms
            .values()
            .fold(T::zero(), |acc, c| acc + c.clone() * c.clone())
    }

    /// Largest absolute coefficient as `f64`; zero for the zero form.
    pub fn max_abs(&self) -> f64 {
        self.terms
            .values()
            .map(|c| c.to_f64().abs())
            .fold(0.0, f64::max)
    }

    /// Largest absolute coefficient, kept in the scalar type.
    pub fn max_abs_coeff(&self) -> T {
        self.terms.values().fold(T::zero(), |acc, c| {
            let a = c.abs();
            if a > acc {
                a
            } else {
                acc
            }
        })
    }

    /// True when every coefficient is negligible at `tol` (exact: zero form).
    pub fn is_negligible(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.is_negligible(tol))
    }

    /// Converts coefficients to another scalar realization.
    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> ExteriorForm<U> {
        let mut out = ExteriorForm::zero(self.dim, self.degree);
        for (k, v) in &self.terms {
            out.add_term(*k, f(v));
        }
        out
    }

    /// Keeps only the monomials accepted by `keep`.
    pub fn filter(&self, keep: impl Fn(MultiIndex) -> bool) -> Self {
        Self {
            dim: self.dim,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep(**k))
                .map(|(k, v)| (*k, v.clone()))
                .collect(),
        }
    }
}

impl<T: Scalar> fmt::Display for ExteriorForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by_key(|(mi, _)| mi.to_vec());
        for (n, (mi, c)) in terms.into_iter().enumerate() {
            let negative = *c < T::zero();
            let mag = if negative { -c.clone() } else { c.clone() };
            match (n, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            if mi.is_empty() {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}")?;
                }
                write!(f, "e^{{{mi}}}")?;
            }
        }
        Ok(())
    }
}

impl<T: Scalar> std::ops::Add for &ExteriorForm<T> {
    type Output = ExteriorForm<T>;

    fn add(self, rhs: Self) -> ExteriorForm<T> {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<T: Scalar> std::ops::Sub for &ExteriorForm<T> {
    type Output = ExteriorForm<T>;

    fn sub(self, rhs: Self) -> ExteriorForm<T> {
        self.try_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl<T: Scalar> std::ops::Neg for &ExteriorForm<T> {
    type Output = ExteriorForm<T>;

    fn neg(self) -> ExteriorForm<T> {
        ExteriorForm::neg(self)
    }
}
