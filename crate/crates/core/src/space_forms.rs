//! Constant sectional curvature: the analytic tensor and the closed-form
//! structure equations it produces.


use crate::adapted_frame::RiemannTensor;
use crate::error::Result;
use crate::griffiths_forms::{GriffithsSystem, StructureReport};
use crate::metrics::{adapt_frame, probe_directions};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceFormSpec<T> {
    pub k: T,
    pub n: usize,
    pub s: T,
}

impl<T: Scalar> SpaceFormSpec<T> {
    pub fn new(k: T, n: usize, s: T) -> Self {
        Self { k, n, s }
    }

    /// `ε = s²k`.
    pub fn epsilon(&self) -> T {
        self.s.clone() * self.s.clone() * self.k.clone()
    }

    pub fn riemann(&self) -> RiemannTensor<T> {
        riemann_csc(&self.k, self.n)
    }

    pub fn verify(&self) -> Result<StructureReport> {
        verify_csc(&self.k, &self.s, self.n)
    }
}

/// `R_{ijpq} = k(δ_iq δ_jp − δ_ip δ_jq)` on an `(n+1)`-dimensional base.
pub fn riemann_csc<T: Scalar>(k: &T, n: usize) -> RiemannTensor<T> {
    let delta = |a: usize, b: usize| a == b;
    RiemannTensor::from_fn(n, |i, j, p, q| {
        let plus = delta(i, q) && delta(j, p);
        let minus = delta(i, p) && delta(j, q);
        match (plus, minus) {
            (true, false) => k.clone(),
            (false, true) => -k.clone(),
            _ => T::zero(),
        }
    })
}

/// The sectional curvature if `r` is exactly a space-form tensor.
pub fn space_form_curvature<T: Scalar>(r: &RiemannTensor<T>, tol: f64) -> Option<T> {
    let k = if r.n() == 0 {
        T::zero()
    } else {
        r.get(0, 1, 1, 0).clone()
    };
    let diff = r.max_abs_diff(&riemann_csc(&k, r.n()));
    let ok = if T::EXACT { diff == 0.0 } else { diff <= tol };
    ok.then_some(k)
}

/// Exact check of the closed-form equations
/// `dα_i = θ∧((n-i+1)/s² α_{i-1} - k(i+1) α_{i+1})` together with the
/// coclosure of every `α_i`.
pub fn verify_csc<T: Scalar>(k: &T, s: &T, n: usize) -> Result<StructureReport> {
    let sys = GriffithsSystem::new(n, s.clone())?;
    let r = riemann_csc(k, n);
    let mut rep = StructureReport::default();
    let s2 = s.clone() * s.clone();
    for i in 0..=n {
        let down = sys
            .alpha_ext(i as isize - 1)
            .scale(&(T::from_count(n + 1 - i) / s2.clone()));
        let up = sys
            .alpha_ext(i as isize + 1)
            .scale(&(k.clone() * T::from_count(i + 1)));
        let expected = sys.theta().wedge(&(&down - &up));
        rep.record_equal(format!("d_alpha_{i}"), &sys.d_alpha(&r, i), &expected);
        rep.record_equal(
            format!("r_alpha_{i}"),
            &sys.r_alpha(&r, i),
            &sys.theta().wedge(&up).neg(),
        );
        rep.record_zero(format!("coclosed_alpha_{i}"), &sys.d_star_alpha(&r, i));
    }
    let snk = s.clone() * T::from_count(n) * k.clone();
    rep.record_equal(
        "r_alpha_n_minus_1_volume",
        &sys.r_alpha(&r, n - 1),
        &sys.vol().scale(&-snk),
    );
    if n == 1 {
        rep.record_equal("dtheta_alpha0_alpha1", sys.dtheta(), &sys.alpha(0).wedge(sys.alpha(1)));
        rep.record_equal(
            "d_alpha_0_gauss",
            &sys.d_alpha(&r, 0),
            &sys.alpha(1).wedge(sys.theta()).scale(k),
        );
    }
    Ok(rep)
}

/// Whether every `α_i` is coclosed at the point `u = e_0` of the frame.
pub fn all_coclosed_at<T: Scalar>(sys: &GriffithsSystem<T>, r: &RiemannTensor<T>) -> bool {
    (0..=sys.n()).all(|i| sys.is_coclosed(r, i))
}

/// Coclosure of every `α_i` at every probe direction of
/// [`probe_directions`]; the pointwise test at a single `u` only sees
/// `R(·,·)u`.
pub fn all_coclosed_globally<T: Scalar>(s: &T, r: &RiemannTensor<T>) -> Result<bool> {
    let sys = GriffithsSystem::new(r.n(), s.clone())?;
    for u in probe_directions::<T>(r.n() + 1) {
        let frame = adapt_frame(&u)?;
        if !all_coclosed_at(&sys, &r.rotate(frame.matrix())) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `r` with the canonical component `(a,b,c,d)` and its pair-symmetry orbit
/// shifted by `delta`. The first Bianchi identity is generally broken.
pub fn mutate_component<T: Scalar>(
    r: &RiemannTensor<T>,
    [a, b, c, d]: [usize; 4],
    delta: &T,
) -> RiemannTensor<T> {
    let mut out = r.clone();
    let v = r.get(a, b, c, d).clone() + delta.clone();
    out.set_with_symmetries(a, b, c, d, v);
    out
}

/// Canonical component slots `a<b`, `c<d`, `(a,b) <= (c,d)`.
pub fn canonical_slots(n: usize) -> Vec<[usize; 4]> {
    let pairs: Vec<(usize, usize)> = (0..=n)
        .flat_map(|a| (a + 1..=n).map(move |b| (a, b)))
        .collect();
    let mut out = Vec::new();
    for (x, &(a, b)) in pairs.iter().enumerate() {
        for &(c, d) in &pairs[x..] {
            out.push([a, b, c, d]);
        }
    }
    out
}

/// Slots whose mutation leaves every `α_i` coclosed at every probe
/// direction. Empty means the converse of the coclosure criterion is
/// detected for every single-component perturbation.
pub fn undetected_mutations<T: Scalar>(k: &T, s: &T, n: usize, delta: &T) -> Result<Vec<[usize; 4]>> {
    let base = riemann_csc(k, n);
    let mut missed = Vec::new();
    for slot in canonical_slots(n) {
        let mutated = mutate_component(&base, slot, delta);
        if all_coclosed_globally(s, &mutated)? {
            missed.push(slot);
        }
    }
    Ok(missed)
}
