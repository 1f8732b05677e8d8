//! Hypersurfaces through their normal lift to the unit sphere bundle.
//!
//! Along the lift the adapted coframe pulls back as `e^0 ↦ 0`,
//! `e^j ↦ e^j` and `e^{j+n} ↦ -Σ_k A_{jk} e^k`, where `A` is the shape
//! operator. Pulled-back forms stay in the ambient `(2n+1)`-coframe but only
//! involve `e^1..e^n`; `vol_N = e^{1...n}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exterior::ExteriorForm;
use crate::griffiths_forms::{alpha_fast, GriffithsSystem};
use crate::linalg::{subsets, Matrix};
use crate::scalar::{sign_pow, Scalar};

/// Symmetry tolerance for floating point shape operators.
pub const SHAPE_SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ShapeOperator<T> {
    a: Matrix<T>,
}

impl<T: Scalar> ShapeOperator<T> {
    pub fn new(a: Matrix<T>) -> Result<Self> {
        if a.rows() == 0 || !a.is_symmetric(SHAPE_SYMMETRY_TOL) {
            return Err(Error::InvalidMatrix(
                "shape operator must be a nonempty symmetric matrix".into(),
            ));
        }
        Ok(Self { a })
    }

    /// Diagonal operator with the given principal curvatures.
    pub fn from_eigenvalues(lambda: &[T]) -> Result<Self> {
        Self::new(Matrix::diagonal(lambda))
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.a
    }

    /// `⟨H, ν⟩ = σ_1/n`, signed.
    pub fn mean_curvature(&self) -> T {
        sigma(1, &self.a) / T::from_count(self.n())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmbientData<T> {
    /// Scalar curvature of the ambient manifold at the point.
    pub scal_m: T,
    /// `Ric(ν, ν)`.
    pub r_nu: T,
    /// Sectional curvature, when the ambient is a space form.
    pub k: Option<T>,
}

impl<T: Scalar> AmbientData<T> {
    /// Space form of curvature `k` around an `n`-dimensional hypersurface.
    pub fn space_form(n: usize, k: T) -> Self {
        Self {
            scal_m: T::from_count(n * (n + 1)) * k.clone(),
            r_nu: T::from_count(n) * k.clone(),
            k: Some(k),
        }
    }

    /// Einstein ambient with `Ric = c g`.
    pub fn einstein(n: usize, c: T) -> Self {
        Self {
            scal_m: T::from_count(n + 1) * c.clone(),
            r_nu: c,
            k: None,
        }
    }
}

/// `σ_0..σ_n` of the eigenvalues, from the Faddeev–LeVerrier recursion for
/// the characteristic polynomial.
pub fn sigmas<T: Scalar>(a: &Matrix<T>) -> Vec<T> {
    let n = a.rows();
    // det(tI - A) = Σ_j c_j t^{n-j} with c_j = (-1)^j σ_j
    let mut c = vec![T::one()];
    let mut m = Matrix::zeros(n, n);
    let id = Matrix::identity(n);
    for k in 1..=n {
        m = a.mul(&m).add(&id.scale(&c[k - 1]));
        let ck = -(a.mul(&m).trace() / T::from_count(k));
        c.push(ck);
    }
    c.into_iter()
        .enumerate()
        .map(|(j, cj)| cj * sign_pow::<T>(j))
        .collect()
}

/// Elementary symmetric polynomial `σ_i` of the eigenvalues of `a`.
pub fn sigma<T: Scalar>(i: usize, a: &Matrix<T>) -> T {
    if i > a.rows() {
        return T::zero();
    }
    sigmas(a).swap_remove(i)
}

/// `σ_i` as the sum of the `i×i` principal minors.
pub fn sigma_by_minors<T: Scalar>(i: usize, a: &Matrix<T>) -> T {
    subsets(a.rows(), i)
        .into_iter()
        .fold(T::zero(), |acc, idx| acc + a.principal_submatrix(&idx).det())
}

/// Pullback along the normal lift with second fundamental form `a`. The
/// matrix is not required to be symmetric so that the symmetry argument
/// can be probed.
pub fn pullback_form<T: Scalar>(a: &Matrix<T>, form: &ExteriorForm<T>) -> Result<ExteriorForm<T>> {
    let n = a.rows();
    if form.dim() != 2 * n + 1 || a.cols() != n {
        return Err(Error::DimensionMismatch {
            left: 2 * n + 1,
            right: form.dim(),
        });
    }
    let dim = form.dim();
    let image = |idx: usize| -> ExteriorForm<T> {
        if idx == 0 {
            ExteriorForm::zero(dim, 1)
        } else if idx <= n {
            ExteriorForm::basis(dim, &[idx])
        } else {
            let j = idx - n - 1;
            let mut out = ExteriorForm::zero(dim, 1);
            for k in 0..n {
                let c = a[(j, k)].clone();
                if !c.is_zero() {
                    out = &out - &ExteriorForm::monomial(dim, &[k + 1], c);
                }
            }
            out
        }
    };
    let images: Vec<ExteriorForm<T>> = (0..dim).map(image).collect();
    let mut out = ExteriorForm::zero(dim, form.degree());
    'terms: for (mi, c) in form.terms() {
        let mut prod = ExteriorForm::constant(dim, c.clone());
        for idx in mi.indices() {
            prod = prod.wedge(&images[idx]);
            if prod.is_zero() {
                continue 'terms;
            }
        }
        out = &out + &prod;
    }
    Ok(out)
}

/// Density of the pulled-back `α_i` against `vol_N`: `(-1)^{n-i} σ_{n-i}(A)`.
pub fn pullback_alpha<T: Scalar>(i: usize, a: &ShapeOperator<T>) -> T {
    let n = a.n();
    if i > n {
        return T::zero();
    }
    sigma(n - i, a.matrix()) * sign_pow::<T>(n - i)
}

/// The same density read off from the substituted form.
pub fn pullback_alpha_by_forms<T: Scalar>(i: usize, a: &ShapeOperator<T>) -> T {
    let n = a.n();
    let pulled = pullback_form(a.matrix(), &alpha_fast::<T>(n, i)).expect("matching dimensions");
    pulled.coefficient(&(1..=n).collect::<Vec<_>>())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElResiduals<T> {
    /// `σ_1`, vanishing for minimal hypersurfaces.
    pub volume: T,
    /// `2σ_2 - r_ν`.
    pub mean: T,
    /// `6σ_3 + k(n-1)(n-2)σ_1`.
    pub scal: T,
}

/// Pointwise Euler–Lagrange residuals of the volume, total mean curvature
/// and total scalar curvature functionals.
pub fn el_residuals<T: Scalar>(a: &ShapeOperator<T>, ambient: &AmbientData<T>) -> Result<ElResiduals<T>> {
    let k = ambient.k.clone().ok_or(Error::MissingCurvature)?;
    let n = a.n();
    let s = sigmas(a.matrix());
    let sig = |i: usize| s.get(i).cloned().unwrap_or_else(T::zero);
    let nn = T::from_count((n - 1) * n.saturating_sub(2));
    Ok(ElResiduals {
        volume: sig(1),
        mean: T::from_count(2) * sig(2) - ambient.r_nu.clone(),
        scal: T::from_count(6) * sig(3) + k * nn * sig(1),
    })
}

/// The volume and mean residuals, which do not need a space form.
pub fn el_residuals_partial<T: Scalar>(a: &ShapeOperator<T>, ambient: &AmbientData<T>) -> (T, T) {
    let s = sigmas(a.matrix());
    (s[1].clone(), T::from_count(2) * sigma(2, a.matrix()) - ambient.r_nu.clone())
}

/// Residuals obtained instead by pulling back the Poincaré–Cartan factor
/// `Ψ` of each Lagrangian on a space form of curvature `k`, with the sign
/// normalized to match [`el_residuals`].
pub fn el_residuals_via_forms<T: Scalar>(a: &ShapeOperator<T>, k: &T) -> Result<ElResiduals<T>> {
    let n = a.n();
    let sys = GriffithsSystem::new(n, T::one())?;
    let vol_n: Vec<usize> = (1..=n).collect();
    let density = |b: Vec<T>| -> Result<T> {
        let psi = sys.euler_lagrange_form(&b, k)?;
        Ok(pullback_form(a.matrix(), &psi)?.coefficient(&vol_n))
    };
    let unit = |i: usize| {
        let mut b = vec![T::zero(); n + 1];
        b[i] = T::one();
        b
    };
    let volume = -density(unit(n))?;
    let mean = density(unit(n - 1))?;
    let scal = if n >= 2 {
        let mut b = vec![T::zero(); n + 1];
        b[n] = T::from_count((n - 1) * n) * k.clone();
        b[n - 2] = T::from_count(2);
        -density(b)?
    } else {
        T::zero()
    };
    Ok(ElResiduals { volume, mean, scal })
}

/// Intrinsic scalar curvature by the Gauss equation,
/// `Scal^N = Scal^M - 2 r_ν + 2σ_2`.
pub fn gauss_scal<T: Scalar>(a: &ShapeOperator<T>, ambient: &AmbientData<T>) -> T {
    ambient.scal_m.clone() - T::from_count(2) * ambient.r_nu.clone()
        + T::from_count(2) * sigma(2, a.matrix())
}

/// `det(t·1 - A)`.
pub fn weingarten_density<T: Scalar>(t: &T, a: &ShapeOperator<T>) -> T {
    let n = a.n();
    Matrix::identity(n).scale(t).sub(a.matrix()).det()
}

/// Coefficients of `t ↦ det(t·1 - A)` by Lagrange interpolation through
/// `t = 0..n`, lowest degree first.
pub fn weingarten_polynomial<T: Scalar>(a: &ShapeOperator<T>) -> Vec<T> {
    let n = a.n();
    let nodes: Vec<T> = (0..=n).map(T::from_count).collect();
    let values: Vec<T> = nodes.iter().map(|t| weingarten_density(t, a)).collect();
    let mut coeffs = vec![T::zero(); n + 1];
    for (i, yi) in values.iter().enumerate() {
        // basis polynomial Π_{j≠i} (t - t_j)/(t_i - t_j)
        let mut basis = vec![T::one()];
        let mut denom = T::one();
        for (j, tj) in nodes.iter().enumerate() {
            if j == i {
                continue;
            }
            let mut next = vec![T::zero(); basis.len() + 1];
            for (p, b) in basis.iter().enumerate() {
                next[p + 1] = next[p + 1].clone() + b.clone();
                next[p] = next[p].clone() - b.clone() * tj.clone();
            }
            basis = next;
            denom = denom * (nodes[i].clone() - tj.clone());
        }
        let w = yi.clone() / denom;
        for (c, b) in coeffs.iter_mut().zip(basis) {
            *c = c.clone() + w.clone() * b;
        }
    }
    coeffs
}

/// Random symmetric matrix with small rational entries.
pub fn random_symmetric<T: Scalar>(seed: u64, n: usize) -> Matrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9) ^ n as u64);
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = T::from_ratio(rng.gen_range(-5..=5), rng.gen_range(1..=4));
            m[(i, j)] = v.clone();
            m[(j, i)] = v;
        }
    }
    m
}
