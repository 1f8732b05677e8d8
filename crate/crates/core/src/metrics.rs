//! Curvature providers beyond space forms: products of space forms seen
//! from an arbitrary unit direction, and finite-difference curvature of
//! metrics given in a chart.

use num_traits::Zero;

use crate::adapted_frame::RiemannTensor;
use crate::error::{Error, Result};
use crate::griffiths_forms::{GriffithsSystem, FLOAT_IDENTITY_TOL};
use crate::linalg::{subsets, Matrix};
use crate::scalar::Scalar;

/// Orthogonal `(n+1)×(n+1)` matrix whose rows are the adapted frame legs in
/// reference coordinates; row 0 is the unit direction `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameRotation<T>(Matrix<T>);

impl<T: Scalar> FrameRotation<T> {
    pub fn matrix(&self) -> &Matrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.0
    }

    pub fn first_leg(&self) -> &[T] {
        self.0.row(0)
    }

    pub fn det(&self) -> T {
        self.0.det()
    }

    /// `max |OᵀO - I|`.
    pub fn orthogonality_defect(&self) -> f64 {
        let gram = self.0.transpose().mul(&self.0);
        gram.sub(&Matrix::identity(gram.rows())).max_abs()
    }
}

fn check_unit<T: Scalar>(u: &[T]) -> Result<()> {
    if u.is_empty() || u.iter().all(Zero::is_zero) {
        return Err(Error::NotUnit("zero vector".into()));
    }
    let norm_sq = u.iter().fold(T::zero(), |acc, x| acc + x.clone() * x.clone());
    if !(norm_sq.clone() - T::one()).is_negligible(1e-12) {
        return Err(Error::NotUnit(format!("|u|² = {norm_sq}")));
    }
    Ok(())
}

/// Orthogonal completion of the unit vector `u`.
///
/// Uses the Householder reflection exchanging `e_0` and `u`, which stays
/// rational for rational `u`, with its last row negated so the frame keeps
/// the reference orientation.
pub fn adapt_frame<T: Scalar>(u: &[T]) -> Result<FrameRotation<T>> {
    check_unit(u)?;
    let m = u.len();
    let mut w: Vec<T> = u.to_vec();
    w[0] = w[0].clone() - T::one();
    let ww = w.iter().fold(T::zero(), |acc, x| acc + x.clone() * x.clone());
    if ww.is_negligible(1e-300) {
        return Ok(FrameRotation(Matrix::identity(m)));
    }
    let two_over = T::from_count(2) / ww;
    let mut h = Matrix::from_fn(m, m, |i, j| {
        let id = if i == j { T::one() } else { T::zero() };
        id - two_over.clone() * w[i].clone() * w[j].clone()
    });
    if m > 1 {
        for j in 0..m {
            h[(m - 1, j)] = -h[(m - 1, j)].clone();
        }
    }
    Ok(FrameRotation(h))
}

pub fn rotate_riemann<T: Scalar>(r: &RiemannTensor<T>, o: &FrameRotation<T>) -> RiemannTensor<T> {
    r.rotate(o.matrix())
}

/// Curvature of `M_1^{d1}(k1) × M_2^{d2}(k2)` in the frame adapted to `u`.
pub fn product_spheres_riemann<T: Scalar>(
    k1: &T,
    k2: &T,
    d1: usize,
    d2: usize,
    u: &[T],
) -> Result<RiemannTensor<T>> {
    let m = d1 + d2;
    if m < 2 || u.len() != m {
        return Err(Error::DimensionMismatch {
            left: m,
            right: u.len(),
        });
    }
    let block = |i: usize| i >= d1;
    let base = RiemannTensor::from_fn(m - 1, |a, b, c, d| {
        let f = block(a);
        if block(b) != f || block(c) != f || block(d) != f {
            return T::zero();
        }
        let k = if f { k2 } else { k1 };
        let plus = a == d && b == c;
        let minus = a == c && b == d;
        match (plus, minus) {
            (true, false) => k.clone(),
            (false, true) => -k.clone(),
            _ => T::zero(),
        }
    });
    Ok(base.rotate(adapt_frame(u)?.matrix()))
}

/// Rational unit vectors in dimension `m`: the axes, `(3e_a ± 4e_b)/5` and
/// `(e_a+e_b+e_c+e_d)/2`. Rotating a tensor to each of them samples `R(·,·)u`
/// for enough `u` to decide pointwise isotropy properties.
pub fn probe_directions<T: Scalar>(m: usize) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    let unit = |pairs: &[(usize, T)]| {
        let mut v = vec![T::zero(); m];
        for (i, x) in pairs {
            v[*i] = x.clone();
        }
        v
    };
    for a in 0..m {
        out.push(unit(&[(a, T::one())]));
    }
    let three = T::from_ratio(3, 5);
    let four = T::from_ratio(4, 5);
    for a in 0..m {
        for b in a + 1..m {
            out.push(unit(&[(a, three.clone()), (b, four.clone())]));
            out.push(unit(&[(a, three.clone()), (b, -four.clone())]));
        }
    }
    let half = T::from_ratio(1, 2);
    for quad in subsets(m, 4) {
        let pairs: Vec<(usize, T)> = quad.into_iter().map(|i| (i, half.clone())).collect();
        out.push(unit(&pairs));
    }
    out
}

/// Einstein test through `d*α_2 = 0` at every probe direction.
pub fn einstein_via_alpha2<T: Scalar>(r: &RiemannTensor<T>, s: &T) -> Result<bool> {
    einstein_via_alpha2_within(r, s, FLOAT_IDENTITY_TOL)
}

/// Float tolerance variant, for tensors carrying discretization error.
pub fn einstein_via_alpha2_within<T: Scalar>(r: &RiemannTensor<T>, s: &T, tol: f64) -> Result<bool> {
    let n = r.n();
    if n < 2 {
        return Err(Error::UnsupportedDimension { required: 2, got: n });
    }
    let sys = GriffithsSystem::new(n, s.clone())?;
    for u in probe_directions::<T>(n + 1) {
        let rotated = r.rotate(adapt_frame(&u)?.matrix());
        if !sys.is_coclosed_within(&rotated, 2, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Space-form test through coclosure of every `α_i` at every probe direction.
pub fn csc_via_coclosure<T: Scalar>(r: &RiemannTensor<T>, s: &T) -> Result<bool> {
    csc_via_coclosure_within(r, s, FLOAT_IDENTITY_TOL)
}

pub fn csc_via_coclosure_within<T: Scalar>(r: &RiemannTensor<T>, s: &T, tol: f64) -> Result<bool> {
    let sys = GriffithsSystem::new(r.n(), s.clone())?;
    for u in probe_directions::<T>(r.n() + 1) {
        let rotated = r.rotate(adapt_frame(&u)?.matrix());
        if !(0..=r.n()).all(|i| sys.is_coclosed_within(&rotated, i, tol)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A Riemannian metric on an open subset of `R^{n+1}`.
pub trait ChartMetric: Sync {
    fn dim(&self) -> usize;
    fn metric(&self, x: &[f64]) -> Matrix<f64>;
}

/// `g = f(|x|²) δ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BuiltinMetric {
    Euclidean(usize),
    /// Round unit sphere, `4δ/(1+|x|²)²`.
    SphereStereographic(usize),
    /// Poincaré ball, `4δ/(1-|x|²)²`.
    HyperbolicBall(usize),
}

impl BuiltinMetric {
    pub const NAMES: [&'static str; 3] = ["euclidean", "sphere-stereographic", "hyperbolic-ball"];

    pub fn by_name(name: &str, dim: usize) -> Option<Self> {
        match name {
            "euclidean" => Some(Self::Euclidean(dim)),
            "sphere-stereographic" => Some(Self::SphereStereographic(dim)),
            "hyperbolic-ball" => Some(Self::HyperbolicBall(dim)),
            _ => None,
        }
    }

    /// Sectional curvature of the model.
    pub fn curvature(&self) -> f64 {
        match self {
            Self::Euclidean(_) => 0.0,
            Self::SphereStereographic(_) => 1.0,
            Self::HyperbolicBall(_) => -1.0,
        }
    }
}

impl ChartMetric for BuiltinMetric {
    fn dim(&self) -> usize {
        match *self {
            Self::Euclidean(d) | Self::SphereStereographic(d) | Self::HyperbolicBall(d) => d,
        }
    }

    fn metric(&self, x: &[f64]) -> Matrix<f64> {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let f = match self {
            Self::Euclidean(_) => 1.0,
            Self::SphereStereographic(_) => 4.0 / (1.0 + r2).powi(2),
            Self::HyperbolicBall(_) => 4.0 / (1.0 - r2).powi(2),
        };
        Matrix::identity(self.dim()).scale(&f)
    }
}

/// Wraps a closure as a chart metric.
pub struct FnMetric<F> {
    pub dim: usize,
    pub g: F,
}

impl<F: Fn(&[f64]) -> Matrix<f64> + Sync> ChartMetric for FnMetric<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn metric(&self, x: &[f64]) -> Matrix<f64> {
        (self.g)(x)
    }
}

/// Lower-triangular `L` with `g = L Lᵀ`.
fn cholesky(g: &Matrix<f64>) -> Option<Matrix<f64>> {
    let m = g.rows();
    let mut l = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..=i {
            let mut sum = g[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Some(l)
}

fn lower_inverse(l: &Matrix<f64>) -> Matrix<f64> {
    let m = l.rows();
    let mut inv = Matrix::zeros(m, m);
    for col in 0..m {
        for i in col..m {
            let mut sum = if i == col { 1.0 } else { 0.0 };
            for k in col..i {
                sum -= l[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = sum / l[(i, i)];
        }
    }
    inv
}

fn checked_metric(metric: &dyn ChartMetric, x: &[f64]) -> Result<(Matrix<f64>, Matrix<f64>)> {
    let g = metric.metric(x);
    if !g.is_symmetric(1e-12) {
        return Err(Error::InvalidMatrix("chart metric is not symmetric".into()));
    }
    let l = cholesky(&g).ok_or_else(|| Error::NotPositiveDefinite(x.to_vec()))?;
    Ok((g, l))
}

fn shifted(x: &[f64], i: usize, by: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    y[i] += by;
    y
}

/// Central difference stencil used for every derivative.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FdStencil {
    /// `(f(x+h) - f(x-h)) / 2h`, error `O(h²)`.
    ThreePoint,
    /// `(-f(x+2h) + 8f(x+h) - 8f(x-h) + f(x-2h)) / 12h`, error `O(h⁴)`.
    #[default]
    FivePoint,
}

fn central_diff(
    f: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    x: &[f64],
    i: usize,
    h: f64,
    stencil: FdStencil,
) -> Result<Vec<f64>> {
    let combine = |terms: &[(f64, f64)], denom: f64| -> Result<Vec<f64>> {
        let mut acc: Option<Vec<f64>> = None;
        for &(offset, weight) in terms {
            let v = f(&shifted(x, i, offset * h))?;
            let acc = acc.get_or_insert_with(|| vec![0.0; v.len()]);
            for (a, b) in acc.iter_mut().zip(v) {
                *a += weight * b;
            }
        }
        Ok(acc.unwrap_or_default().into_iter().map(|v| v / (denom * h)).collect())
    };
    match stencil {
        FdStencil::ThreePoint => combine(&[(1.0, 1.0), (-1.0, -1.0)], 2.0),
        FdStencil::FivePoint => combine(
            &[(2.0, -1.0), (1.0, 8.0), (-1.0, -8.0), (-2.0, 1.0)],
            12.0,
        ),
    }
}

/// `Γ^l_{jk}` at `x`, flattened as `(l*m + j)*m + k`.
fn christoffel(metric: &dyn ChartMetric, x: &[f64], h: f64, stencil: FdStencil) -> Result<Vec<f64>> {
    let m = metric.dim();
    let (_, l) = checked_metric(metric, x)?;
    let linv = lower_inverse(&l);
    let ginv = linv.transpose().mul(&linv);
    let flat_g = |y: &[f64]| -> Result<Vec<f64>> {
        let (g, _) = checked_metric(metric, y)?;
        Ok((0..m * m).map(|t| g[(t / m, t % m)]).collect())
    };
    // dg[i][p*m + k] = ∂_i g_{pk}
    let dg = (0..m)
        .map(|i| central_diff(&flat_g, x, i, h, stencil))
        .collect::<Result<Vec<_>>>()?;
    let mut gamma = vec![0.0; m * m * m];
    for l_idx in 0..m {
        for j in 0..m {
            for k in 0..m {
                let mut acc = 0.0;
                for p in 0..m {
                    acc += ginv[(l_idx, p)] * (dg[j][p * m + k] + dg[k][p * m + j] - dg[p][j * m + k]);
                }
                gamma[(l_idx * m + j) * m + k] = 0.5 * acc;
            }
        }
    }
    Ok(gamma)
}

/// Curvature of a chart metric at `x` in the orthonormal frame given by the
/// inverse Cholesky factor of `g(x)`, with five-point central differences.
pub fn chart_riemann_fd(metric: &dyn ChartMetric, x: &[f64], h: f64) -> Result<RiemannTensor<f64>> {
    chart_riemann_fd_with(metric, x, h, FdStencil::default())
}

/// Christoffel symbols from central differences of `g`, the curvature from
/// central differences of those.
pub fn chart_riemann_fd_with(
    metric: &dyn ChartMetric,
    x: &[f64],
    h: f64,
    stencil: FdStencil,
) -> Result<RiemannTensor<f64>> {
    let m = metric.dim();
    if x.len() != m || m < 2 {
        return Err(Error::DimensionMismatch {
            left: m,
            right: x.len(),
        });
    }
    let at3 = |l: usize, j: usize, k: usize| (l * m + j) * m + k;
    let gamma = christoffel(metric, x, h, stencil)?;
    let dgamma = (0..m)
        .map(|i| central_diff(&|y: &[f64]| christoffel(metric, y, h, stencil), x, i, h, stencil))
        .collect::<Result<Vec<_>>>()?;
    // R^l_{ijk} = ∂_iΓ^l_{jk} - ∂_jΓ^l_{ik} + Γ^l_{ip}Γ^p_{jk} - Γ^l_{jp}Γ^p_{ik}
    let up = |l: usize, i: usize, j: usize, k: usize| {
        let mut v = dgamma[i][at3(l, j, k)] - dgamma[j][at3(l, i, k)];
        for p in 0..m {
            v += gamma[at3(l, i, p)] * gamma[at3(p, j, k)] - gamma[at3(l, j, p)] * gamma[at3(p, i, k)];
        }
        v
    };
    let (g, l) = checked_metric(metric, x)?;
    let mut raised = vec![0.0; m * m * m * m];
    let at = |i: usize, j: usize, k: usize, l: usize| ((i * m + j) * m + k) * m + l;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for p in 0..m {
                    raised[at(i, j, k, p)] = up(p, i, j, k);
                }
            }
        }
    }
    let coord = RiemannTensor::from_fn(m - 1, |i, j, k, lo| {
        (0..m).map(|p| g[(lo, p)] * raised[at(i, j, k, p)]).sum()
    });
    Ok(coord.rotate(&lower_inverse(&l)))
}

/// A finite-difference tensor together with its step-halving check.
#[derive(Clone, Debug)]
pub struct FdCurvature {
    pub tensor: RiemannTensor<f64>,
    pub half_step: RiemannTensor<f64>,
    /// `max |R_h - R_{h/2}|`.
    pub richardson_gap: f64,
    pub richardson_ok: bool,
}

impl FdCurvature {
    /// `(16 R_{h/2} - R_h)/15`, cancelling the leading `h⁴` error term of
    /// the five-point stencil.
    pub fn extrapolated(&self) -> RiemannTensor<f64> {
        self.half_step
            .scale(&(16.0 / 15.0))
            .add(&self.tensor.scale(&(-1.0 / 15.0)))
    }
}

pub const RICHARDSON_TOL: f64 = 1e-5;

pub fn chart_riemann_fd_checked(metric: &dyn ChartMetric, x: &[f64], h: f64) -> Result<FdCurvature> {
    let tensor = chart_riemann_fd(metric, x, h)?;
    let half_step = chart_riemann_fd(metric, x, h / 2.0)?;
    let gap = tensor.max_abs_diff(&half_step);
    if gap > RICHARDSON_TOL {
        log::warn!("finite-difference curvature unstable under step halving: gap {gap:e}");
    }
    Ok(FdCurvature {
        tensor,
        half_step,
        richardson_gap: gap,
        richardson_ok: gap <= RICHARDSON_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, Rational};
    use crate::space_forms::riemann_csc;

    fn rat(v: &[(i64, i64)]) -> Vec<Rational> {
        v.iter().map(|&(a, b)| q(a, b)).collect()
    }

    #[test]
    fn adapted_frames() {
        let id = adapt_frame(&rat(&[(1, 1), (0, 1), (0, 1)])).unwrap();
        assert_eq!(*id.matrix(), Matrix::identity(3));
        let f = adapt_frame(&rat(&[(0, 1), (1, 1), (0, 1), (0, 1)])).unwrap();
        assert_eq!(f.first_leg(), rat(&[(0, 1), (1, 1), (0, 1), (0, 1)]).as_slice());
        assert_eq!(f.det(), q(1, 1));
        let u = rat(&[(1, 2), (1, 2), (1, 2), (1, 2)]);
        let f = adapt_frame(&u).unwrap();
        assert_eq!(f.first_leg(), u.as_slice());
        let gram = f.matrix().transpose().mul(f.matrix());
        assert_eq!(gram, Matrix::identity(4));
        assert_eq!(f.det(), q(1, 1));
    }

    #[test]
    fn adapt_frame_rejects_bad_vectors() {
        assert!(matches!(adapt_frame(&rat(&[(0, 1), (0, 1)])), Err(Error::NotUnit(_))));
        assert!(matches!(adapt_frame(&rat(&[(1, 1), (1, 1)])), Err(Error::NotUnit(_))));
        assert!(adapt_frame(&[0.6f64, 0.8]).unwrap().orthogonality_defect() < 1e-15);
    }

    #[test]
    fn space_forms_are_rotation_invariant() {
        let r = riemann_csc(&q(-5, 3), 3);
        for u in probe_directions::<Rational>(4) {
            let f = adapt_frame(&u).unwrap();
            assert_eq!(rotate_riemann(&r, &f), r);
        }
    }

    #[test]
    fn probe_count() {
        // m axes, 2·C(m,2) pairs, C(m,4) quadruples
        assert_eq!(probe_directions::<Rational>(4).len(), 4 + 12 + 1);
        for u in probe_directions::<Rational>(5) {
            let n2 = u.iter().fold(q(0, 1), |a, x| a + x.clone() * x.clone());
            assert_eq!(n2, q(1, 1));
        }
    }

    #[test]
    fn product_sphere_fixtures() {
        let u = rat(&[(1, 2), (1, 2), (1, 2), (1, 2)]);
        let one = q(1, 1);
        let ss = product_spheres_riemann(&one, &one, 2, 2, &u).unwrap();
        assert!(ss.is_valid());
        assert!(ss.einstein_residual().is_zero());
        assert!(einstein_via_alpha2(&ss, &one).unwrap());
        assert!(!csc_via_coclosure(&ss, &one).unwrap());
        let uneven = product_spheres_riemann(&one, &q(1, 4), 2, 2, &u).unwrap();
        assert_eq!(uneven.einstein_residual(), q(3, 8));
        assert!(!einstein_via_alpha2(&uneven, &one).unwrap());
        let ric = product_spheres_riemann(&one, &q(1, 4), 2, 2, &rat(&[(1, 1), (0, 1), (0, 1), (0, 1)]))
            .unwrap()
            .ricci(&one)
            .ric;
        assert_eq!(ric, Matrix::diagonal(&rat(&[(1, 1), (1, 1), (1, 4), (1, 4)])));
        let data = uneven.ricci(&q(2, 1));
        assert_eq!(data.r, q(4, 1) * data.ric[(0, 0)].clone());
        assert!(product_spheres_riemann(&one, &one, 2, 2, &rat(&[(1, 1)])).is_err());
    }

    #[test]
    fn einstein_residual_survives_rotation() {
        for seed in 0..10u64 {
            let r = crate::adapted_frame::random_riemann::<Rational>(seed, 3);
            let dirs = probe_directions::<Rational>(4);
            let u = &dirs[seed as usize % dirs.len()];
            let rr = r.rotate(adapt_frame(u).unwrap().matrix());
            assert!(rr.is_valid());
            assert_eq!(rr.einstein_residual() == q(0, 1), r.einstein_residual() == q(0, 1));
            assert_eq!(rr.ricci(&q(1, 1)).scal, r.ricci(&q(1, 1)).scal);
        }
    }

    #[test]
    fn euclidean_chart_is_flat() {
        let r = chart_riemann_fd(&BuiltinMetric::Euclidean(3), &[0.3, -0.2, 0.1], 1e-3).unwrap();
        assert!(r.max_abs() < 1e-10);
    }

    #[test]
    fn model_charts_match_space_forms() {
        for metric in [BuiltinMetric::SphereStereographic(3), BuiltinMetric::HyperbolicBall(3)] {
            let fd = chart_riemann_fd_checked(&metric, &[0.1, 0.2, -0.3], 1e-3).unwrap();
            let exact = riemann_csc(&metric.curvature(), 2);
            assert!(fd.tensor.max_abs_diff(&exact) < 1e-6, "{}", fd.tensor.max_abs_diff(&exact));
            assert!(fd.richardson_ok);
            assert!(fd.extrapolated().max_abs_diff(&exact) < 1e-6);
        }
    }

    #[test]
    fn three_point_stencil_is_second_order() {
        let metric = BuiltinMetric::SphereStereographic(3);
        let exact = riemann_csc(&1.0, 2);
        let x = [0.1, 0.2, -0.3];
        let err = |h: f64| {
            chart_riemann_fd_with(&metric, &x, h, FdStencil::ThreePoint)
                .unwrap()
                .max_abs_diff(&exact)
        };
        let (e1, e2) = (err(1e-2), err(5e-3));
        // halving h divides the error by about four
        assert!((e1 / e2 - 4.0).abs() < 0.3, "{e1} {e2}");
    }

    #[test]
    fn non_positive_metric_is_rejected() {
        let bad = FnMetric {
            dim: 2,
            g: |_: &[f64]| Matrix::diagonal(&[1.0, -1.0]),
        };
        assert!(matches!(
            chart_riemann_fd(&bad, &[0.0, 0.0], 1e-3),
            Err(Error::NotPositiveDefinite(_))
        ));
        assert!(BuiltinMetric::by_name("torus", 2).is_none());
    }
}
