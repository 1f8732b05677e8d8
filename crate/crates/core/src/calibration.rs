//! The unit sphere bundle of an oriented 4-manifold (`n = 3`): the G2 form
//! `φ = θ∧dθ + α_2 - α_0`, the special-Lagrangian pair `α_0-α_2`,
//! `α_1-α_3`, their coclosure, and numerical comass estimates.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::adapted_frame::RiemannTensor;
use crate::error::{Error, Result};
use crate::exterior::ExteriorForm;
use crate::griffiths_forms::{GriffithsSystem, FLOAT_IDENTITY_TOL};
use crate::metrics::{adapt_frame, probe_directions};
use crate::scalar::Scalar;

fn unit_system<T: Scalar>(n: usize) -> Result<GriffithsSystem<T>> {
    if n != 3 {
        return Err(Error::UnsupportedDimension { required: 3, got: n });
    }
    GriffithsSystem::new(3, T::one())
}

/// `φ = θ∧dθ + α_2 - α_0` on the unit bundle, `n = 3`.
pub fn gwistor_phi<T: Scalar>() -> ExteriorForm<T> {
    gwistor_phi_of(&unit_system::<T>(3).expect("n = 3"))
}

/// `φ` for an existing system, which must have `n = 3`.
pub fn gwistor_phi_checked<T: Scalar>(sys: &GriffithsSystem<T>) -> Result<ExteriorForm<T>> {
    if sys.n() != 3 {
        return Err(Error::UnsupportedDimension { required: 3, got: sys.n() });
    }
    Ok(gwistor_phi_of(sys))
}

fn gwistor_phi_of<T: Scalar>(sys: &GriffithsSystem<T>) -> ExteriorForm<T> {
    let contact = sys.theta().wedge(sys.dtheta());
    &(&contact + sys.alpha(2)) - sys.alpha(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CoclosureDiagnostics {
    pub a0_minus_a2: bool,
    pub a1_minus_a3: bool,
    pub phi: bool,
}

/// `d*(α_0-α_2)`, `d*(α_1-α_3)` and `d*φ` at the frame point `u = e_0`.
///
/// `*(θ∧dθ)` is a constant multiple of `(dθ)²`, hence closed, so
/// `d*φ = d*α_2 - d*α_0`.
pub fn coclosure_residuals<T: Scalar>(
    sys: &GriffithsSystem<T>,
    r: &RiemannTensor<T>,
) -> [ExteriorForm<T>; 3] {
    let d0 = sys.d_star_alpha(r, 0);
    let d1 = sys.d_star_alpha(r, 1);
    let d2 = sys.d_star_alpha(r, 2);
    let d3 = sys.d_star_alpha(r, 3);
    [&d0 - &d2, &d1 - &d3, &d2 - &d0]
}

/// Pointwise diagnostics at `u = e_0` of the given frame.
pub fn coclosure_diagnostics_at<T: Scalar>(r: &RiemannTensor<T>) -> Result<CoclosureDiagnostics> {
    let sys = unit_system::<T>(r.n())?;
    let [a, b, c] = coclosure_residuals(&sys, r);
    Ok(CoclosureDiagnostics {
        a0_minus_a2: a.is_negligible(FLOAT_IDENTITY_TOL),
        a1_minus_a3: b.is_negligible(FLOAT_IDENTITY_TOL),
        phi: c.is_negligible(FLOAT_IDENTITY_TOL),
    })
}

/// Diagnostics for the curvature tensor as a whole: a form counts as
/// coclosed when it is coclosed at every probe direction `u`.
pub fn coclosure_diagnostics<T: Scalar>(r: &RiemannTensor<T>) -> Result<CoclosureDiagnostics> {
    let mut out = CoclosureDiagnostics {
        a0_minus_a2: true,
        a1_minus_a3: true,
        phi: true,
    };
    for u in probe_directions::<T>(r.n() + 1) {
        let local = coclosure_diagnostics_at(&r.rotate(adapt_frame(&u)?.matrix()))?;
        out.a0_minus_a2 &= local.a0_minus_a2;
        out.a1_minus_a3 &= local.a1_minus_a3;
        out.phi &= local.phi;
    }
    Ok(out)
}

/// A form with complex coefficients, stored as real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexForm<T> {
    pub re: ExteriorForm<T>,
    pub im: ExteriorForm<T>,
}

impl<T: Scalar> ComplexForm<T> {
    pub fn new(re: ExteriorForm<T>, im: ExteriorForm<T>) -> Self {
        Self { re, im }
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let re = &self.re.wedge(&other.re) - &self.im.wedge(&other.im);
        let im = &self.re.wedge(&other.im) + &self.im.wedge(&other.re);
        Self { re, im }
    }
}

/// `(e^{a_1} + i e^{b_1}) ∧ (e^{a_2} + i e^{b_2}) ∧ (e^{a_3} + i e^{b_3})`.
pub fn complex_volume<T: Scalar>(dim: usize, legs: &[(usize, usize)]) -> ComplexForm<T> {
    let mut acc = ComplexForm::new(ExteriorForm::one(dim), ExteriorForm::zero(dim, 0));
    for &(a, b) in legs {
        let leg = ComplexForm::new(ExteriorForm::basis(dim, &[a]), ExteriorForm::basis(dim, &[b]));
        acc = acc.wedge(&leg);
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpecialLagrangianReport {
    /// `(e^4+ie^1)∧(e^5+ie^2)∧(e^6+ie^3) = α_0-α_2 + i(α_1-α_3)`.
    pub vertical_first: bool,
    /// `(e^1+ie^4)∧(e^2+ie^5)∧(e^3+ie^6) = α_3-α_1 + i(α_2-α_0)`.
    pub horizontal_first: bool,
    /// Whether the horizontal-first product equals `α_0-α_2 + i(α_1-α_3)`.
    pub horizontal_first_as_written: bool,
}

/// Expands both orderings of the complex volume form against the given
/// `α_0..α_3`. Passing perturbed forms gives a mutation control.
pub fn special_lagrangian_report<T: Scalar>(alphas: &[ExteriorForm<T>; 4]) -> SpecialLagrangianReport {
    let [a0, a1, a2, a3] = alphas;
    let vert = complex_volume::<T>(7, &[(4, 1), (5, 2), (6, 3)]);
    let horiz = complex_volume::<T>(7, &[(1, 4), (2, 5), (3, 6)]);
    let (p, q) = (a0 - a2, a1 - a3);
    SpecialLagrangianReport {
        vertical_first: vert.re == p && vert.im == q,
        horizontal_first: horiz.re == q.neg() && horiz.im == p.neg(),
        horizontal_first_as_written: horiz.re == p && horiz.im == q,
    }
}

/// The special-Lagrangian identity: the complex volume form of the split
/// `R^3 ⊕ R^3` has real and imaginary parts `α_0-α_2` and `α_1-α_3`.
pub fn special_lagrangian_identity() -> bool {
    let sys = unit_system::<crate::scalar::Rational>(3).expect("n = 3");
    let alphas = [0, 1, 2, 3].map(|i| sys.alpha(i).clone());
    let rep = special_lagrangian_report(&alphas);
    rep.vertical_first && rep.horizontal_first
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct NeverClosedReport {
    pub samples: usize,
    /// Indices of samples where `d(α_0-α_2)` or `d(α_1-α_3)` vanished.
    pub counterexamples: Vec<usize>,
}

impl NeverClosedReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Checks that neither `α_0-α_2` nor `α_1-α_3` is closed for any sample.
pub fn never_closed_check<T: Scalar>(samples: &[RiemannTensor<T>]) -> Result<NeverClosedReport> {
    let sys = unit_system::<T>(3)?;
    let mut report = NeverClosedReport {
        samples: samples.len(),
        counterexamples: Vec::new(),
    };
    for (idx, r) in samples.iter().enumerate() {
        if r.n() != 3 {
            return Err(Error::UnsupportedDimension { required: 3, got: r.n() });
        }
        let d = |i| sys.d_alpha(r, i);
        let first = &d(0) - &d(2);
        let second = &d(1) - &d(3);
        if first.is_negligible(FLOAT_IDENTITY_TOL) || second.is_negligible(FLOAT_IDENTITY_TOL) {
            report.counterexamples.push(idx);
        }
    }
    Ok(report)
}

/// An oriented orthonormal `p`-frame in `R^D`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlaneSample {
    vectors: Vec<Vec<f64>>,
}

impl PlaneSample {
    pub const GRAM_TOL: f64 = 1e-12;

    pub fn new(vectors: Vec<Vec<f64>>) -> Result<Self> {
        for (i, a) in vectors.iter().enumerate() {
            for (j, b) in vectors.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot - target).abs() > Self::GRAM_TOL || a.len() != b.len() {
                    return Err(Error::InvalidMatrix("plane frame is not orthonormal".into()));
                }
            }
        }
        Ok(Self { vectors })
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComassEstimate {
    /// Best value found; a lower bound on the comass.
    pub value: f64,
    pub plane: PlaneSample,
    /// Whether the ascent that produced `value` met its stopping criterion.
    pub converged: bool,
    pub samples: usize,
    pub label: &'static str,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComassOptions {
    pub samples: usize,
    pub ascent_steps: usize,
    pub seed: u64,
}

impl Default for ComassOptions {
    fn default() -> Self {
        Self {
            samples: 10_000,
            ascent_steps: 100,
            seed: 0x6772_6966,
        }
    }
}

/// Flattened form for the hot loop: index lists with coefficients.
struct DenseForm {
    dim: usize,
    degree: usize,
    terms: Vec<(Vec<usize>, f64)>,
}

impl DenseForm {
    fn new<T: Scalar>(form: &ExteriorForm<T>) -> Self {
        Self {
            dim: form.dim(),
            degree: form.degree(),
            terms: form.terms().map(|(mi, c)| (mi.to_vec(), c.to_f64())).collect(),
        }
    }

    fn value(&self, v: &[Vec<f64>]) -> f64 {
        self.terms
            .iter()
            .map(|(idx, c)| c * small_det(&columns(v, idx)))
            .sum()
    }

    /// `∂f/∂v_k[j]` by cofactor expansion.
    fn gradient(&self, v: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let p = self.degree;
        let mut g = vec![vec![0.0; self.dim]; p];
        for (idx, c) in &self.terms {
            let sub = columns(v, idx);
            for (k, gk) in g.iter_mut().enumerate() {
                for (l, &j) in idx.iter().enumerate() {
                    let minor: Vec<Vec<f64>> = (0..p)
                        .filter(|&r| r != k)
                        .map(|r| (0..p).filter(|&q| q != l).map(|q| sub[r][q]).collect())
                        .collect();
                    let sign = if (k + l) % 2 == 0 { 1.0 } else { -1.0 };
                    gk[j] += c * sign * small_det(&minor);
                }
            }
        }
        g
    }
}

fn columns(v: &[Vec<f64>], idx: &[usize]) -> Vec<Vec<f64>> {
    v.iter().map(|row| idx.iter().map(|&j| row[j]).collect()).collect()
}

fn small_det(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        3 => {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        }
        _ => crate::linalg::Matrix::from_rows(m.to_vec()).expect("square").det(),
    }
}

/// Gram–Schmidt on the rows; keeps orientation. `None` if degenerate.
fn orthonormalize(v: &mut [Vec<f64>]) -> Option<()> {
    for i in 0..v.len() {
        for j in 0..i {
            let dot: f64 = v[i].iter().zip(&v[j]).map(|(a, b)| a * b).sum();
            let vj = v[j].clone();
            for (a, b) in v[i].iter_mut().zip(vj) {
                *a -= dot * b;
            }
        }
        let norm = v[i].iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return None;
        }
        v[i].iter_mut().for_each(|a| *a /= norm);
    }
    Some(())
}

fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

struct AscentResult {
    value: f64,
    plane: Vec<Vec<f64>>,
    converged: bool,
}

fn ascend(form: &DenseForm, mut v: Vec<Vec<f64>>, steps: usize) -> AscentResult {
    let mut value = form.value(&v);
    if value < 0.0 {
        // reverse orientation
        v[0].iter_mut().for_each(|a| *a = -*a);
        value = -value;
    }
    let mut step = 0.1;
    let mut converged = false;
    for _ in 0..steps {
        let g = form.gradient(&v);
        // remove the components inside the plane
        let mut tangent = g.clone();
        for t in tangent.iter_mut() {
            for w in &v {
                let dot: f64 = t.iter().zip(w).map(|(a, b)| a * b).sum();
                for (a, b) in t.iter_mut().zip(w) {
                    *a -= dot * b;
                }
            }
        }
        let gnorm = tangent.iter().flatten().map(|a| a * a).sum::<f64>().sqrt();
        if gnorm < 1e-10 {
            converged = true;
            break;
        }
        let mut improved = false;
        while step > 1e-12 {
            let mut cand: Vec<Vec<f64>> = v
                .iter()
                .zip(&tangent)
                .map(|(row, t)| row.iter().zip(t).map(|(a, b)| a + step * b).collect())
                .collect();
            if orthonormalize(&mut cand).is_some() {
                let cv = form.value(&cand);
                if cv > value {
                    v = cand;
                    value = cv;
                    improved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !improved {
            converged = true;
            break;
        }
    }
    AscentResult {
        value,
        plane: v,
        converged,
    }
}

/// Lower bound on the comass of `form`: the best value of the form over
/// random oriented planes, each refined by projected gradient ascent with
/// QR retraction. Sample `i` draws from its own stream so a longer run
/// extends a shorter one and the estimate never decreases with `samples`.
pub fn comass_estimate<T: Scalar>(form: &ExteriorForm<T>, opts: ComassOptions) -> Result<ComassEstimate> {
    let p = form.degree();
    if p == 0 || p > form.dim() || opts.samples == 0 {
        return Err(Error::InvalidMatrix(format!(
            "comass needs 1 <= degree <= dim and at least one sample (degree {p})"
        )));
    }
    let dense = DenseForm::new(form);
    let dim = form.dim();
    let best = (0..opts.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(opts.seed, i);
            loop {
                let mut v: Vec<Vec<f64>> = (0..p)
                    .map(|_| (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect())
                    .collect();
                if orthonormalize(&mut v).is_some() {
                    return (i, ascend(&dense, v, opts.ascent_steps));
                }
            }
        })
        .reduce_with(|a, b| {
            // ties go to the lower sample index for reproducibility
            if b.1.value > a.1.value || (b.1.value == a.1.value && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .expect("at least one sample");
    let (_, res) = best;
    if !res.converged {
        log::warn!("comass ascent did not converge in {} steps", opts.ascent_steps);
    }
    Ok(ComassEstimate {
        value: res.value,
        plane: PlaneSample { vectors: res.plane },
        converged: res.converged,
        samples: opts.samples,
        label: "lower bound",
    })
}

/// Value of a form on a plane.
pub fn evaluate_on_plane<T: Scalar>(form: &ExteriorForm<T>, plane: &PlaneSample) -> f64 {
    DenseForm::new(form).value(plane.vectors())
}
