//! The contact form, the Griffiths forms `α_0, ..., α_n` and their first
//! order structure equations at a point of the radius-`s` sphere bundle.
//!
//! Coframe layout: `e^0` is horizontal along `u`, `e^1..e^n` are the other
//! horizontal legs and `e^{n+1}..e^{2n}` their vertical mirrors. The
//! endomorphism `B` sends `e_j ↦ e_{j+n}` for `1 <= j <= n` and kills
//! everything else.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::adapted_frame::RiemannTensor;
use crate::error::{Error, Result};
use crate::exterior::{ExteriorForm, FrameContext, MultiIndex};
use crate::linalg::{subsets, Matrix};
use crate::scalar::{factorial, sign_pow, Scalar};

/// Residual tolerance used for floating point identity checks.
pub const FLOAT_IDENTITY_TOL: f64 = 1e-10;

/// Anything that can be fed a list of sparse vectors and returns a scalar,
/// multilinearly. Used as the left operand of [`b_contraction`].
pub trait Multilinear<T: Scalar> {
    fn dim(&self) -> usize;
    fn arity(&self) -> usize;
    fn eval_sparse(&self, vectors: &[Vec<(usize, T)>]) -> T;

    /// Bitmask of coordinates the value can depend on.
    fn support(&self) -> u64 {
        u64::MAX
    }
}

impl<T: Scalar> Multilinear<T> for ExteriorForm<T> {
    fn dim(&self) -> usize {
        ExteriorForm::dim(self)
    }

    fn arity(&self) -> usize {
        self.degree()
    }

    fn eval_sparse(&self, vectors: &[Vec<(usize, T)>]) -> T {
        ExteriorForm::eval_sparse(self, vectors)
    }

    fn support(&self) -> u64 {
        self.terms().fold(0, |acc, (mi, _)| acc | mi.bits())
    }
}

/// A bilinear form given by its Gram matrix, e.g. the Sasaki metric.
#[derive(Clone, Debug, PartialEq)]
pub struct Bilinear<T>(pub Matrix<T>);

impl<T: Scalar> Multilinear<T> for Bilinear<T> {
    fn dim(&self) -> usize {
        self.0.rows()
    }

    fn arity(&self) -> usize {
        2
    }

    fn eval_sparse(&self, vectors: &[Vec<(usize, T)>]) -> T {
        let mut acc = T::zero();
        for (i, x) in &vectors[0] {
            for (j, y) in &vectors[1] {
                acc = acc + x.clone() * y.clone() * self.0[(*i, *j)].clone();
            }
        }
        acc
    }
}

/// `B` as a `(2n+1) × (2n+1)` matrix acting on column vectors.
pub fn b_endomorphism<T: Scalar>(n: usize) -> Matrix<T> {
    let mut b = Matrix::zeros(2 * n + 1, 2 * n + 1);
    for j in 1..=n {
        b[(j + n, j)] = T::one();
    }
    b
}

/// The new `p`-form
/// `η∘(B_1∧...∧B_p)(v_1..v_p) = Σ_σ sg(σ) η(B_1 v_{σ1}, ..., B_p v_{σp})`,
/// computed by literal summation over the symmetric group.
pub fn b_contraction<T: Scalar, M: Multilinear<T>>(
    eta: &M,
    endos: &[Matrix<T>],
) -> Result<ExteriorForm<T>> {
    let p = eta.arity();
    if endos.len() != p {
        return Err(Error::EndomorphismCount {
            expected: p,
            got: endos.len(),
        });
    }
    let dim = eta.dim();
    for b in endos {
        if b.rows() != dim || b.cols() != dim {
            return Err(Error::InvalidMatrix(format!(
                "endomorphism is {}x{}, coframe dimension is {dim}",
                b.rows(),
                b.cols()
            )));
        }
    }
    // images[k][i] = B_k e_i as a sparse column, restricted to the support
    // of eta so that dead branches of the walk are cut early
    let support = eta.support();
    let images: Vec<Vec<Vec<(usize, T)>>> = endos
        .iter()
        .map(|b| {
            (0..dim)
                .map(|i| {
                    (0..dim)
                        .filter(|&r| support & (1 << r) != 0 && !b[(r, i)].is_zero())
                        .map(|r| (r, b[(r, i)].clone()))
                        .collect()
                })
                .collect()
        })
        .collect();

    struct Walk<'a, T: Scalar, M> {
        eta: &'a M,
        images: &'a [Vec<Vec<(usize, T)>>],
        slots: Vec<usize>,
    }

    impl<T: Scalar, M: Multilinear<T>> Walk<'_, T, M> {
        // assigns basis vectors of `slots` to argument positions; `used`
        // marks taken slots, parity tracks the permutation sign
        fn run(&self, k: usize, used: u64, negative: bool, args: &mut Vec<Vec<(usize, T)>>) -> T {
            let p = self.slots.len();
            if k == p {
                let v = self.eta.eval_sparse(args);
                return if negative { -v } else { v };
            }
            let mut acc = T::zero();
            for (pos, &basis) in self.slots.iter().enumerate() {
                if used & (1 << pos) != 0 {
                    continue;
                }
                let img = &self.images[k][basis];
                if img.is_empty() {
                    continue;
                }
                // inversions: already-used positions greater than pos
                let inv = (used >> pos).count_ones() % 2 == 1;
                args.push(img.clone());
                acc = acc + self.run(k + 1, used | (1 << pos), negative ^ inv, args);
                args.pop();
            }
            acc
        }
    }

    let mut out = ExteriorForm::zero(dim, p);
    for slots in subsets(dim, p) {
        let walk = Walk {
            eta,
            images: &images,
            slots: slots.clone(),
        };
        let v = walk.run(0, 0, false, &mut Vec::with_capacity(p));
        if !v.is_zero() {
            let (mi, _) = MultiIndex::from_unsorted(&slots).expect("distinct");
            out.add_term(mi, v);
        }
    }
    Ok(out)
}

/// `n_i = 1 / (i! (n-i)!)`.
pub fn n_weight<T: Scalar>(n: usize, i: usize) -> T {
    T::one() / (factorial::<T>(i) * factorial::<T>(n - i))
}

/// `α_0 = e^{(n+1)...(2n)}`.
pub fn vertical_volume<T: Scalar>(n: usize) -> ExteriorForm<T> {
    let idx: Vec<usize> = (n + 1..=2 * n).collect();
    ExteriorForm::basis(2 * n + 1, &idx)
}

/// `α_i` from its definition `n_i α∘(B^i ∧ 1^{n-i})` by summation over
/// `S_n`. Out-of-range `i` gives the zero `n`-form.
pub fn alpha_bruteforce<T: Scalar>(n: usize, i: usize) -> ExteriorForm<T> {
    if i > n {
        return ExteriorForm::zero(2 * n + 1, n);
    }
    let b = b_endomorphism::<T>(n);
    let id = Matrix::identity(2 * n + 1);
    let endos: Vec<Matrix<T>> = (0..n)
        .map(|k| if k < i { b.clone() } else { id.clone() })
        .collect();
    b_contraction(&vertical_volume::<T>(n), &endos)
        .expect("n endomorphisms for an n-form")
        .scale(&n_weight::<T>(n, i))
}

/// `α_i` by the shuffle expansion: one monomial per `i`-subset `S` of
/// `{1..n}`, namely `e^{n+1}∧...∧e^{2n}` with `e^{n+j}` replaced by `e^j`
/// for `j ∈ S`.
pub fn alpha_fast<T: Scalar>(n: usize, i: usize) -> ExteriorForm<T> {
    let dim = 2 * n + 1;
    let mut out = ExteriorForm::zero(dim, n);
    if i > n {
        return out;
    }
    for subset in subsets(n, i) {
        let idx: Vec<usize> = (1..=n)
            .map(|j| if subset.contains(&(j - 1)) { j } else { j + n })
            .collect();
        let (mi, negative) = MultiIndex::from_unsorted(&idx).expect("distinct indices");
        out.add_term(mi, if negative { -T::one() } else { T::one() });
    }
    out
}

/// Cached forms of the Griffiths system for a fixed `(n, s)`.
#[derive(Clone, Debug)]
pub struct GriffithsSystem<T> {
    ctx: FrameContext<T>,
    theta: ExteriorForm<T>,
    dtheta: ExteriorForm<T>,
    vol: ExteriorForm<T>,
    alphas: Vec<ExteriorForm<T>>,
}

/// Outcome of one identity check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub pass: bool,
    pub residual: String,
}

/// Named identity checks, serialized as `{name: {pass, residual}}`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct StructureReport {
    pub checks: BTreeMap<String, CheckOutcome>,
}

impl StructureReport {
    pub fn all_pass(&self) -> bool {
        self.checks.values().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|(_, c)| !c.pass)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.get(name)
    }

    pub fn record_zero<T: Scalar>(&mut self, name: impl Into<String>, residual: &ExteriorForm<T>) {
        let outcome = form_outcome(residual);
        self.checks.insert(name.into(), outcome);
    }

    pub fn record_equal<T: Scalar>(
        &mut self,
        name: impl Into<String>,
        lhs: &ExteriorForm<T>,
        rhs: &ExteriorForm<T>,
    ) {
        let outcome = match lhs.try_sub(rhs) {
            Ok(diff) => form_outcome(&diff),
            Err(e) => CheckOutcome {
                pass: false,
                residual: e.to_string(),
            },
        };
        self.checks.insert(name.into(), outcome);
    }

    pub fn record_bool(&mut self, name: impl Into<String>, pass: bool, residual: impl Into<String>) {
        self.checks.insert(
            name.into(),
            CheckOutcome {
                pass,
                residual: residual.into(),
            },
        );
    }
}

/// Residual string: exact maximum coefficient for exact scalars, scientific
/// notation for floats.
pub fn residual_string<T: Scalar>(x: &T) -> String {
    if T::EXACT {
        x.to_string()
    } else {
        format!("{:e}", x.to_f64())
    }
}

fn form_outcome<T: Scalar>(residual: &ExteriorForm<T>) -> CheckOutcome {
    CheckOutcome {
        pass: residual.is_negligible(FLOAT_IDENTITY_TOL),
        residual: residual_string(&residual.max_abs_coeff()),
    }
}

impl<T: Scalar> GriffithsSystem<T> {
    pub fn new(n: usize, s: T) -> Result<Self> {
        let ctx = FrameContext::new(n, s)?;
        let dim = ctx.dim();
        let theta = ExteriorForm::monomial(dim, &[0], ctx.s().clone());
        let mut dtheta = ExteriorForm::zero(dim, 2);
        for j in 1..=n {
            dtheta = &dtheta + &ExteriorForm::basis(dim, &[n + j, j]);
        }
        let vol = ExteriorForm::basis(dim, &(0..=n).collect::<Vec<_>>());
        let alphas = (0..=n).map(|i| alpha_fast(n, i)).collect();
        Ok(Self {
            ctx,
            theta,
            dtheta,
            vol,
            alphas,
        })
    }

    pub fn context(&self) -> &FrameContext<T> {
        &self.ctx
    }

    pub fn n(&self) -> usize {
        self.ctx.n()
    }

    pub fn s(&self) -> &T {
        self.ctx.s()
    }

    pub fn dim(&self) -> usize {
        self.ctx.dim()
    }

    /// `θ = s e^0`.
    pub fn theta(&self) -> &ExteriorForm<T> {
        &self.theta
    }

    /// `dθ = e^{(n+1)1} + ... + e^{(2n)n}`.
    pub fn dtheta(&self) -> &ExteriorForm<T> {
        &self.dtheta
    }

    /// `vol = e^{01...n}`.
    pub fn vol(&self) -> &ExteriorForm<T> {
        &self.vol
    }

    /// `α_i` for `0 <= i <= n`.
    pub fn alpha(&self, i: usize) -> &ExteriorForm<T> {
        &self.alphas[i]
    }

    /// `α_i` with `α_{-1} = α_{n+1} = 0`.
    pub fn alpha_ext(&self, i: isize) -> ExteriorForm<T> {
        if i < 0 || i as usize > self.n() {
            ExteriorForm::zero(self.dim(), self.n())
        } else {
            self.alphas[i as usize].clone()
        }
    }

    /// Sasaki metric of the sphere bundle in the orthonormal adapted frame.
    pub fn sasaki_metric(&self) -> Bilinear<T> {
        Bilinear(Matrix::identity(self.dim()))
    }

    /// `Rα_i = Σ_{0<=j<q<=n} Σ_{p=1..n} s R_{jq0p} e^{jq} ∧ (e_{p+n} ⌟ α_i)`.
    pub fn r_alpha(&self, r: &RiemannTensor<T>, i: usize) -> ExteriorForm<T> {
        let n = self.n();
        assert_eq!(r.n(), n, "curvature tensor has the wrong dimension");
        let dim = self.dim();
        let mut out = ExteriorForm::zero(dim, n + 1);
        if i > n {
            return out;
        }
        let contracted: Vec<ExteriorForm<T>> =
            (1..=n).map(|p| self.alphas[i].interior(p + n)).collect();
        for j in 0..=n {
            for q in j + 1..=n {
                let ejq = ExteriorForm::basis(dim, &[j, q]);
                for p in 1..=n {
                    let c = r.get(j, q, 0, p);
                    if c.is_zero() || contracted[p - 1].is_zero() {
                        continue;
                    }
                    let term = ejq
                        .wedge(&contracted[p - 1])
                        .scale(&(self.s().clone() * c.clone()));
                    out = &out + &term;
                }
            }
        }
        out
    }

    /// `dα_i = (n-i+1)/s² θ∧α_{i-1} + Rα_i`.
    pub fn d_alpha(&self, r: &RiemannTensor<T>, i: usize) -> ExteriorForm<T> {
        let n = self.n();
        let s2 = self.s().clone() * self.s().clone();
        let flat = self
            .theta
            .wedge(&self.alpha_ext(i as isize - 1))
            .scale(&(T::from_count(n + 1 - i) / s2));
        &flat + &self.r_alpha(r, i)
    }

    /// Closed form `*α_i = (-1)^i/s θ∧α_{n-i}`.
    pub fn star_alpha_closed(&self, i: usize) -> ExteriorForm<T> {
        let c = sign_pow::<T>(i) / self.s().clone();
        self.theta.wedge(&self.alphas[self.n() - i]).scale(&c)
    }

    /// `d(*α_i) = (-1)^i/s (dθ∧α_{n-i} - θ∧dα_{n-i})`.
    pub fn d_star_alpha(&self, r: &RiemannTensor<T>, i: usize) -> ExteriorForm<T> {
        let n = self.n();
        let c = sign_pow::<T>(i) / self.s().clone();
        let a = self.dtheta.wedge(&self.alphas[n - i]);
        let b = self.theta.wedge(&self.d_alpha(r, n - i));
        (&a - &b).scale(&c)
    }

    /// Pointwise coclosure predicate `d*α_i = 0`.
    pub fn is_coclosed(&self, r: &RiemannTensor<T>, i: usize) -> bool {
        self.is_coclosed_within(r, i, FLOAT_IDENTITY_TOL)
    }

    /// As [`is_coclosed`](Self::is_coclosed) with an explicit float tolerance.
    pub fn is_coclosed_within(&self, r: &RiemannTensor<T>, i: usize, tol: f64) -> bool {
        self.d_star_alpha(r, i).is_negligible(tol)
    }

    /// `Ψ = Σ_i b_i ((n+1-i)/s² α_{i-1} - k(i+1) α_{i+1})`, the factor with
    /// `d(Σ b_i α_i) = θ∧Ψ` on a space form of curvature `k`.
    pub fn euler_lagrange_form(&self, b: &[T], k: &T) -> Result<ExteriorForm<T>> {
        let n = self.n();
        if b.len() != n + 1 {
            return Err(Error::InvalidMatrix(format!(
                "expected {} coefficients, got {}",
                n + 1,
                b.len()
            )));
        }
        let s2 = self.s().clone() * self.s().clone();
        let mut psi = ExteriorForm::zero(self.dim(), n);
        for (i, bi) in b.iter().enumerate() {
            if bi.is_zero() {
                continue;
            }
            let down = self
                .alpha_ext(i as isize - 1)
                .scale(&(T::from_count(n + 1 - i) / s2.clone()));
            let up = self
                .alpha_ext(i as isize + 1)
                .scale(&(k.clone() * T::from_count(i + 1)));
            psi = &psi + &(&down - &up).scale(bi);
        }
        Ok(psi)
    }

    /// Evaluates every first-order identity of the system against `r`.
    pub fn structure_report(&self, r: &RiemannTensor<T>) -> StructureReport {
        let n = self.n();
        let s = self.s().clone();
        let mut rep = StructureReport::default();
        let sign_nn = sign_pow::<T>(n * (n + 1) / 2);

        // Hodge dualities
        let star_theta = self.theta.hodge();
        rep.record_equal(
            "star_theta",
            &star_theta,
            &self.alphas[n].wedge(&self.alphas[0]).scale(&s),
        );
        rep.record_equal(
            "star_theta_dtheta_power",
            &star_theta,
            &self
                .dtheta
                .power(n)
                .scale(&(s.clone() * sign_nn.clone() / factorial::<T>(n))),
        );
        for i in 0..=n {
            let lhs = self.dtheta.power(i).hodge();
            let c = sign_nn.clone() * factorial::<T>(i) / (factorial::<T>(n - i) * s.clone());
            let rhs = self.theta.wedge(&self.dtheta.power(n - i)).scale(&c);
            rep.record_equal(format!("star_dtheta_power_{i}"), &lhs, &rhs);
            rep.record_equal(
                format!("double_star_dtheta_power_{i}"),
                &lhs.hodge(),
                &self.dtheta.power(i),
            );
        }
        for i in 0..=n {
            rep.record_equal(
                format!("star_alpha_{i}"),
                &self.alphas[i].hodge(),
                &self.star_alpha_closed(i),
            );
            rep.record_equal(
                format!("double_star_alpha_{i}"),
                &self.alphas[i].hodge().hodge(),
                &self.alphas[i],
            );
            rep.record_zero(
                format!("alpha_{i}_wedge_dtheta"),
                &self.alphas[i].wedge(&self.dtheta),
            );
            for j in 0..=n {
                if j != n - i {
                    rep.record_zero(
                        format!("alpha_{i}_wedge_alpha_{j}"),
                        &self.alphas[i].wedge(&self.alphas[j]),
                    );
                }
            }
        }
        rep.record_equal("double_star_theta", &star_theta.hodge(), &self.theta);
        rep.record_equal(
            "contact_volume",
            &self.theta.wedge(&self.dtheta.power(n)),
            &self
                .vol
                .wedge(&self.alphas[0])
                .scale(&(sign_nn * factorial::<T>(n) * s.clone())),
        );

        // first-order structure equations
        let ricci = r.ricci(&s);
        rep.record_zero("r_alpha_n_vanishes", &self.r_alpha(r, n));
        rep.record_equal(
            "r_alpha_n_minus_1",
            &self.r_alpha(r, n - 1),
            &self.vol.scale(&(-(ricci.r.clone() / s.clone()))),
        );
        rep.record_bool(
            "r_equals_s2_ric00",
            ricci.r == s.clone() * s.clone() * ricci.ric[(0, 0)].clone()
                || (!T::EXACT
                    && (ricci.r.clone() - s.clone() * s.clone() * ricci.ric[(0, 0)].clone())
                        .is_negligible(FLOAT_IDENTITY_TOL)),
            residual_string(
                &(ricci.r.clone() - s.clone() * s.clone() * ricci.ric[(0, 0)].clone()).abs(),
            ),
        );
        let s2 = s.clone() * s.clone();
        for i in 0..=n {
            let r_alpha = self.r_alpha(r, i);
            rep.record_zero(format!("dtheta_wedge_r_alpha_{i}"), &self.dtheta.wedge(&r_alpha));
            if i >= 1 {
                // d(dα_i) with d(Rα_i) = (n-i+1)/s² θ∧Rα_{i-1} substituted
                let c = T::from_count(n - i + 1) / s2.clone();
                let prev = i - 1;
                let flat = &self.dtheta.wedge(&self.alphas[prev])
                    - &self.theta.wedge(&self.d_alpha(r, prev));
                let curved = self.theta.wedge(&self.r_alpha(r, prev));
                rep.record_zero(format!("d_r_alpha_{i}"), &(&flat + &curved).scale(&c));
            }
        }
        rep.record_zero("coclosed_alpha_0", &self.d_star_alpha(r, 0));
        if n >= 1 {
            rep.record_zero("coclosed_alpha_1", &self.d_star_alpha(r, 1));
        }
        if n >= 2 {
            rep.record_equal(
                "d_star_alpha_2_equals_rho_vol",
                &self.d_star_alpha(r, 2),
                &r.rho(&s).wedge(&self.vol),
            );
        }
        rep
    }
}
