//! Infinitesimal symmetries `L_{θ♯}Λ = cΛ` of constant-coefficient
//! Lagrangians `Λ = Σ X_j α_j` on space forms.
//!
//! Writing out `θ♯⌟dΛ = cΛ` coefficientwise gives the tridiagonal system
//! `L X = 0` with `L_{jj} = -c`, `L_{j,j+1} = n-j`, `L_{j+1,j} = -(j+1)ε`
//! and `ε = s²k`.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::ExteriorForm;
use crate::griffiths_forms::{alpha_fast, GriffithsSystem, FLOAT_IDENTITY_TOL};
use crate::linalg::Matrix;
use crate::scalar::{Rational, Scalar};
use crate::space_forms::riemann_csc;

/// Univariate polynomial in `c` with exact coefficients, lowest degree
/// first and no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(v: Rational) -> Self {
        Self::new(vec![v])
    }

    /// The indeterminate `c`.
    pub fn var() -> Self {
        Self::new(vec![Rational::zero(), Rational::one()])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..len).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn eval<T: Scalar>(&self, x: &T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, c| {
            acc * x.clone() + crate::scalar::rational_to::<T>(c)
        })
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let negative = *c < Rational::zero();
            let mag = c.abs();
            match (first, negative) {
                (true, true) => write!(f, "-")?,
                (true, false) => {}
                (false, true) => write!(f, " - ")?,
                (false, false) => write!(f, " + ")?,
            }
            first = false;
            let show_mag = i == 0 || !mag.is_one();
            if show_mag {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "c")?,
                _ => write!(f, "c^{i}")?,
            }
        }
        Ok(())
    }
}

/// `L(c)` for fixed `n` and `ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryMatrix<T> {
    pub n: usize,
    pub epsilon: T,
}

impl<T: Scalar> SymmetryMatrix<T> {
    pub fn new(n: usize, epsilon: T) -> Self {
        Self { n, epsilon }
    }

    pub fn at(&self, c: &T) -> Matrix<T> {
        let n = self.n;
        Matrix::from_fn(n + 1, n + 1, |i, j| {
            if i == j {
                -c.clone()
            } else if j == i + 1 {
                T::from_count(n - i)
            } else if i == j + 1 {
                -(T::from_count(i) * self.epsilon.clone())
            } else {
                T::zero()
            }
        })
    }

    /// `X_0 = 1`, `X_{j+1} = (c X_j + jε X_{j-1}) / (n-j)`: rows `0..n-1` of
    /// `L X = 0` solved forward. The last row holds iff `det L(c) = 0`.
    pub fn nullvector(&self, c: &T) -> Vec<T> {
        let n = self.n;
        let mut x = vec![T::one()];
        for j in 0..n {
            let prev = if j == 0 { T::zero() } else { x[j - 1].clone() };
            let next = (c.clone() * x[j].clone() + T::from_count(j) * self.epsilon.clone() * prev)
                / T::from_count(n - j);
            x.push(next);
        }
        x
    }
}

/// `det L` by the continuant recurrence
/// `D_m = -c D_{m-1} + m ε (n-m+1) D_{m-2}`.
pub fn det_l(n: usize, epsilon: &Rational) -> Polynomial {
    let minus_c = Polynomial::var().scale(&-Rational::one());
    let mut prev = Polynomial::constant(Rational::one());
    let mut cur = minus_c.clone();
    for m in 1..=n {
        let w = epsilon * Rational::from_count(m * (n - m + 1));
        let next = minus_c.mul(&cur).add(&prev.scale(&w));
        prev = cur;
        cur = next;
    }
    cur
}

/// The product formula: `Π_{j odd} (c²+j²ε)` for odd `n`,
/// `-c Π_{j even, j>=2} (c²+j²ε)` for even `n`.
pub fn det_l_closed(n: usize, epsilon: &Rational) -> Polynomial {
    let start = if n % 2 == 1 { 1 } else { 2 };
    let mut p = if n % 2 == 1 {
        Polynomial::constant(Rational::one())
    } else {
        Polynomial::var().scale(&-Rational::one())
    };
    for j in (start..=n).step_by(2) {
        let factor = Polynomial::new(vec![
            epsilon * Rational::from_count(j * j),
            Rational::zero(),
            Rational::one(),
        ]);
        p = p.mul(&factor);
    }
    p
}

fn factor_text(j: usize) -> String {
    if j == 1 {
        "c²+ε".into()
    } else {
        format!("c²+{}ε", j * j)
    }
}

/// The factored determinant as text, e.g. `−c(c²+4ε)` for `n = 2`.
pub fn det_l_display(n: usize) -> String {
    let start = if n % 2 == 1 { 1 } else { 2 };
    let factors: Vec<String> = (start..=n).step_by(2).map(factor_text).collect();
    if n % 2 == 1 {
        if factors.len() == 1 {
            factors[0].clone()
        } else {
            factors.iter().map(|f| format!("({f})")).collect()
        }
    } else {
        let tail: String = factors.iter().map(|f| format!("({f})")).collect();
        format!("\u{2212}c{tail}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SymmetryCase {
    /// `k < 0`: `n+1` eigenvalues `±j s√(-k)`.
    Hyperbolic,
    /// `n` even or `k = 0`, and `k >= 0`: only `c = 0`.
    Kernel,
    /// `n` odd and `k > 0`: no solution.
    Empty,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetrySolution<T> {
    pub c: T,
    pub x: Vec<T>,
    /// For `c = 0`, whether `dΛ = 0` held.
    pub closed: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryAnalysis<T> {
    pub case: SymmetryCase,
    pub solutions: Vec<SymmetrySolution<T>>,
}

pub fn classify<T: Scalar>(n: usize, k: &T) -> SymmetryCase {
    if *k < T::zero() {
        SymmetryCase::Hyperbolic
    } else if n.is_multiple_of(2) || k.is_zero() {
        SymmetryCase::Kernel
    } else {
        SymmetryCase::Empty
    }
}

/// `Λ = Σ X_j α_j`.
pub fn lagrangian<T: Scalar>(sys: &GriffithsSystem<T>, x: &[T]) -> ExteriorForm<T> {
    x.iter()
        .enumerate()
        .fold(ExteriorForm::zero(sys.dim(), sys.n()), |acc, (j, xj)| {
            &acc + &sys.alpha(j).scale(xj)
        })
}

fn d_lagrangian<T: Scalar>(sys: &GriffithsSystem<T>, k: &T, x: &[T]) -> ExteriorForm<T> {
    let r = riemann_csc(k, sys.n());
    x.iter()
        .enumerate()
        .fold(ExteriorForm::zero(sys.dim(), sys.n() + 1), |acc, (j, xj)| {
            &acc + &sys.d_alpha(&r, j).scale(xj)
        })
}

/// `θ♯⌟dΛ - cΛ` with `θ♯ = s e_0` and `dΛ` from the space-form structure
/// equations.
pub fn lie_derivative_check<T: Scalar>(x: &[T], c: &T, k: &T, s: &T) -> Result<ExteriorForm<T>> {
    let n = x
        .len()
        .checked_sub(1)
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::InvalidMatrix("need at least two coefficients".into()))?;
    let sys = GriffithsSystem::new(n, s.clone())?;
    let lie = d_lagrangian(&sys, k, x).interior(0).scale(s);
    Ok(&lie - &lagrangian(&sys, x).scale(c))
}

/// Real eigenvalues `c` of the symmetry problem with their nullvectors.
/// Exact scalars require `√(-k)` to be rational.
pub fn symmetry_solutions<T: Scalar>(n: usize, k: &T, s: &T) -> Result<SymmetryAnalysis<T>> {
    let sys = GriffithsSystem::new(n, s.clone())?;
    let case = classify(n, k);
    let mut roots: Vec<T> = Vec::new();
    match case {
        SymmetryCase::Empty => {}
        SymmetryCase::Kernel => {
            if n.is_multiple_of(2) || k.is_zero() {
                roots.push(T::zero());
            }
        }
        SymmetryCase::Hyperbolic => {
            let root = (-k.clone())
                .try_sqrt()
                .ok_or_else(|| Error::IrrationalRoot(format!("sqrt({})", -k.clone())))?;
            let base = s.clone() * root;
            if n.is_multiple_of(2) {
                roots.push(T::zero());
            }
            let start = if n % 2 == 1 { 1 } else { 2 };
            for j in (start..=n).step_by(2) {
                let c = base.clone() * T::from_count(j);
                roots.push(-c.clone());
                roots.push(c);
            }
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).expect("real roots"));
    let eps = s.clone() * s.clone() * k.clone();
    let l = SymmetryMatrix::new(n, eps);
    let mut solutions = Vec::with_capacity(roots.len());
    for c in roots {
        let x = l.nullvector(&c);
        let residual = l.at(&c).mul_vec(&x);
        let scale = x.iter().map(|v| v.to_f64().abs()).fold(1.0, f64::max);
        if !residual
            .iter()
            .all(|v| v.is_negligible(FLOAT_IDENTITY_TOL * scale))
        {
            return Err(Error::InvalidMatrix(format!("L({c}) is not singular")));
        }
        let closed = c
            .is_zero()
            .then(|| d_lagrangian(&sys, k, &x).is_negligible(FLOAT_IDENTITY_TOL));
        solutions.push(SymmetrySolution { c, x, closed });
    }
    Ok(SymmetryAnalysis { case, solutions })
}

/// No `α_i` carries an `e^{j(j+n)}` term, so `θ♯⌟dΛ` has no `dθ` part.
pub fn alphas_avoid_contact_pairs(n: usize) -> bool {
    (0..=n).all(|i| {
        alpha_fast::<Rational>(n, i)
            .terms()
            .all(|(mi, _)| (1..=n).all(|j| !(mi.contains(j) && mi.contains(j + n))))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::q;

    fn poly(v: &[(i64, i64)]) -> Polynomial {
        Polynomial::new(v.iter().map(|&(a, b)| q(a, b)).collect())
    }

    #[test]
    fn displayed_matrices() {
        let eps = q(1, 1);
        let l3 = SymmetryMatrix::new(3, eps.clone()).at(&q(0, 1));
        let expected = Matrix::from_rows(vec![
            vec![q(0, 1), q(3, 1), q(0, 1), q(0, 1)],
            vec![q(-1, 1), q(0, 1), q(2, 1), q(0, 1)],
            vec![q(0, 1), q(-2, 1), q(0, 1), q(1, 1)],
            vec![q(0, 1), q(0, 1), q(-3, 1), q(0, 1)],
        ])
        .unwrap();
        assert_eq!(l3, expected);
    }

    #[test]
    fn small_determinants() {
        let e = q(2, 3);
        // c² + ε
        assert_eq!(det_l(1, &e), poly(&[(2, 3), (0, 1), (1, 1)]));
        // -c³ - 4εc
        assert_eq!(det_l(2, &e), poly(&[(0, 1), (-8, 3), (0, 1), (-1, 1)]));
        // (c²+ε)(c²+9ε) = c⁴ + 10εc² + 9ε²
        assert_eq!(det_l(3, &e), poly(&[(4, 1), (0, 1), (20, 3), (0, 1), (1, 1)]));
        assert_eq!(det_l_closed(4, &e), det_l(4, &e));
    }

    #[test]
    fn recurrence_matches_elimination() {
        let e = q(-5, 7);
        for n in 1..=6 {
            let l = SymmetryMatrix::new(n, e.clone());
            for c in [q(0, 1), q(1, 2), q(-3, 1)] {
                assert_eq!(det_l(n, &e).eval(&c), l.at(&c).det());
            }
        }
    }

    #[test]
    fn display_strings() {
        assert_eq!(det_l_display(1), "c²+ε");
        assert_eq!(det_l_display(2), "\u{2212}c(c²+4ε)");
        assert_eq!(det_l_display(3), "(c²+ε)(c²+9ε)");
        assert_eq!(det_l_display(4), "\u{2212}c(c²+4ε)(c²+16ε)");
        assert_eq!(poly(&[(0, 1), (-4, 1), (0, 1), (-1, 1)]).to_string(), "-c^3 - 4c");
        assert_eq!(poly(&[(1, 2)]).to_string(), "1/2");
        assert_eq!(Polynomial::zero().to_string(), "0");
    }

    #[test]
    fn classification_cases() {
        let sols = symmetry_solutions(3, &q(-1, 1), &q(1, 1)).unwrap();
        assert_eq!(sols.case, SymmetryCase::Hyperbolic);
        let cs: Vec<_> = sols.solutions.iter().map(|s| s.c.clone()).collect();
        assert_eq!(cs, vec![q(-3, 1), q(-1, 1), q(1, 1), q(3, 1)]);
        for sol in &sols.solutions {
            assert!(lie_derivative_check(&sol.x, &sol.c, &q(-1, 1), &q(1, 1)).unwrap().is_zero());
        }
        let even = symmetry_solutions(2, &q(1, 1), &q(1, 1)).unwrap();
        assert_eq!(even.case, SymmetryCase::Kernel);
        assert_eq!(even.solutions.len(), 1);
        assert_eq!(even.solutions[0].closed, Some(true));
        let none = symmetry_solutions(1, &q(1, 1), &q(1, 1)).unwrap();
        assert_eq!(none.case, SymmetryCase::Empty);
        assert!(none.solutions.is_empty());
        let flat = symmetry_solutions(3, &q(0, 1), &q(2, 1)).unwrap();
        assert_eq!(flat.solutions.len(), 1);
        assert_eq!(flat.solutions[0].closed, Some(true));
    }

    #[test]
    fn radius_scales_roots() {
        let sols = symmetry_solutions(2, &q(-4, 1), &q(1, 2)).unwrap();
        let cs: Vec<_> = sols.solutions.iter().map(|s| s.c.clone()).collect();
        // ±2·s·√4 = ±2
        assert_eq!(cs, vec![q(-2, 1), q(0, 1), q(2, 1)]);
    }

    #[test]
    fn irrational_roots_need_floats() {
        assert!(matches!(
            symmetry_solutions(3, &q(-2, 1), &q(1, 1)),
            Err(Error::IrrationalRoot(_))
        ));
        let sols = symmetry_solutions(3, &-2.0f64, &1.0).unwrap();
        assert_eq!(sols.solutions.len(), 4);
        for sol in &sols.solutions {
            let res = lie_derivative_check(&sol.x, &sol.c, &-2.0, &1.0).unwrap();
            assert!(res.is_negligible(1e-10));
        }
    }

    #[test]
    fn non_solution_leaves_residual() {
        let x = vec![q(0, 1), q(1, 1), q(0, 1), q(0, 1)];
        assert!(!lie_derivative_check(&x, &q(2, 1), &q(-1, 1), &q(1, 1)).unwrap().is_zero());
    }

    #[test]
    fn contact_pairs_absent() {
        for n in 1..=6 {
            assert!(alphas_avoid_contact_pairs(n));
        }
    }
}
