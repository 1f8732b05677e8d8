//! Curvature of the base manifold at a point, expressed in an adapted
//! horizontal frame `e_0, ..., e_n` whose first leg points along `u`.
//!
//! Components follow `R_{abcd} = <R(e_a, e_b) e_c, e_d>`, with
//! `R(X,Y) = ∇_X∇_Y - ∇_Y∇_X - ∇_[X,Y]`, so a round sphere has
//! `R_{abba} = 1` for `a ≠ b`. Ricci is `Ric(x,y) = Tr(z ↦ R(z,x)y)`, i.e.
//! `ric_{bc} = Σ_a R_{abca}`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::exterior::ExteriorForm;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Float comparisons in [`RiemannTensor::validate`].
pub const FLOAT_SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct RiemannTensor<T> {
    n: usize,
    data: Vec<T>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryFamily {
    /// `R_{abcd} = -R_{bacd}`
    FirstPairAntisymmetry,
    /// `R_{abcd} = -R_{abdc}`
    SecondPairAntisymmetry,
    /// `R_{abcd} = R_{cdab}`
    PairExchange,
    /// `R_{abcd} + R_{bcad} + R_{cabd} = 0`
    FirstBianchi,
}

impl fmt::Display for SymmetryFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::FirstPairAntisymmetry => "first-pair antisymmetry",
            Self::SecondPairAntisymmetry => "second-pair antisymmetry",
            Self::PairExchange => "pair exchange",
            Self::FirstBianchi => "first Bianchi identity",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub family: SymmetryFamily,
    pub index: [usize; 4],
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RicciData<T> {
    /// `ric_{bc} = Σ_a R_{abca}`
    pub ric: Matrix<T>,
    pub scal: T,
    /// `Ric(ξ, ξ)` at the point `u = s·e_0`.
    pub r: T,
}

impl<T: Scalar> RiemannTensor<T> {
    /// The zero tensor on an `(n+1)`-dimensional base.
    pub fn zero(n: usize) -> Self {
        let m = n + 1;
        Self {
            n,
            data: vec![T::zero(); m * m * m * m],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize, usize) -> T) -> Self {
        let m = n + 1;
        let mut data = Vec::with_capacity(m * m * m * m);
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        data.push(f(a, b, c, d));
                    }
                }
            }
        }
        Self { n, data }
    }

    /// Fills in a tensor from its canonical components (`a<b`, `c<d`,
    /// `(a,b) <= (c,d)`) using the pair symmetries.
    pub fn from_canonical(
        n: usize,
        components: impl IntoIterator<Item = ([usize; 4], T)>,
    ) -> Result<Self> {
        let mut r = Self::zero(n);
        for ([a, b, c, d], v) in components {
            if [a, b, c, d].iter().any(|&i| i > n) {
                return Err(Error::IndexOutOfRange {
                    index: a.max(b).max(c).max(d),
                    dim: n + 1,
                });
            }
            if !(a < b && c < d && (a, b) <= (c, d)) {
                return Err(Error::Json(format!(
                    "component ({a},{b},{c},{d}) is not in canonical order"
                )));
            }
            r.set_with_symmetries(a, b, c, d, v);
        }
        Ok(r)
    }

    /// Sets `R_{abcd}` together with its pair-symmetry orbit.
    pub fn set_with_symmetries(&mut self, a: usize, b: usize, c: usize, d: usize, v: T) {
        for (i, j, k, l) in [(a, b, c, d), (c, d, a, b)] {
            self.set(i, j, k, l, v.clone());
            self.set(j, i, k, l, -v.clone());
            self.set(i, j, l, k, -v.clone());
            self.set(j, i, l, k, v.clone());
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension of the base, `n + 1`.
    pub fn base_dim(&self) -> usize {
        self.n + 1
    }

    fn offset(&self, a: usize, b: usize, c: usize, d: usize) -> usize {
        let m = self.n + 1;
        ((a * m + b) * m + c) * m + d
    }

    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> &T {
        &self.data[self.offset(a, b, c, d)]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, d: usize, v: T) {
        let o = self.offset(a, b, c, d);
        self.data[o] = v;
    }

    pub fn components(&self) -> impl Iterator<Item = ([usize; 4], &T)> {
        let m = self.n + 1;
        self.data.iter().enumerate().map(move |(o, v)| {
            let d = o % m;
            let c = (o / m) % m;
            let b = (o / (m * m)) % m;
            let a = o / (m * m * m);
            ([a, b, c, d], v)
        })
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| x.clone() + y.clone())
                .collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|x| x.clone() * c.clone()).collect(),
        }
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> RiemannTensor<U> {
        RiemannTensor {
            n: self.n,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.to_f64().abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(x, y)| (x.clone() - y.clone()).to_f64().abs())
            .fold(0.0, f64::max)
    }

    /// Lists every violated algebraic symmetry. Exact tensors are checked
    /// exactly, floats within [`FLOAT_SYMMETRY_TOL`].
    pub fn validate(&self) -> Vec<Violation> {
        let m = self.n + 1;
        let mut out = Vec::new();
        let mut check = |family, index: [usize; 4], residual: T| {
            if !residual.is_negligible(FLOAT_SYMMETRY_TOL) {
                out.push(Violation {
                    family,
                    index,
                    residual: residual.to_f64().abs(),
                });
            }
        };
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        let r = self.get(a, b, c, d).clone();
                        let idx = [a, b, c, d];
                        check(
                            SymmetryFamily::FirstPairAntisymmetry,
                            idx,
                            r.clone() + self.get(b, a, c, d).clone(),
                        );
                        check(
                            SymmetryFamily::SecondPairAntisymmetry,
                            idx,
                            r.clone() + self.get(a, b, d, c).clone(),
                        );
                        check(
                            SymmetryFamily::PairExchange,
                            idx,
                            r.clone() - self.get(c, d, a, b).clone(),
                        );
                        check(
                            SymmetryFamily::FirstBianchi,
                            idx,
                            r + self.get(b, c, a, d).clone() + self.get(c, a, b, d).clone(),
                        );
                    }
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Ricci data at `u = s·e_0`.
    pub fn ricci(&self, s: &T) -> RicciData<T> {
        let m = self.n + 1;
        let ric = Matrix::from_fn(m, m, |b, c| {
            (0..m).fold(T::zero(), |acc, a| acc + self.get(a, b, c, a).clone())
        });
        let scal = ric.trace();
        let r = s.clone()
            * s.clone()
            * (1..m).fold(T::zero(), |acc, j| acc + self.get(j, 0, 0, j).clone());
        RicciData { ric, scal, r }
    }

    /// Vertical 1-form `ρ = Σ_{a,b=1..n} s R_{ab0a} e^{b+n}` on the
    /// `(2n+1)`-dimensional coframe.
    pub fn rho(&self, s: &T) -> ExteriorForm<T> {
        let n = self.n;
        let mut rho = ExteriorForm::zero(2 * n + 1, 1);
        for b in 1..=n {
            let coeff = (1..=n).fold(T::zero(), |acc, a| acc + self.get(a, b, 0, a).clone());
            let term = ExteriorForm::monomial(2 * n + 1, &[b + n], s.clone() * coeff);
            rho = &rho + &term;
        }
        rho
    }

    /// Max-norm of the trace-free Ricci tensor.
    pub fn einstein_residual(&self) -> T {
        let m = self.n + 1;
        let RicciData { ric, scal, .. } = self.ricci(&T::one());
        let mean = scal / T::from_count(m);
        let mut worst = T::zero();
        for b in 0..m {
            for c in 0..m {
                let mut v = ric[(b, c)].clone();
                if b == c {
                    v = v - mean.clone();
                }
                let v = v.abs();
                if v > worst {
                    worst = v;
                }
            }
        }
        worst
    }

    /// `|Ric - scal/(n+1) g|²`, the frame-independent companion of
    /// [`einstein_residual`](Self::einstein_residual).
    pub fn trace_free_ricci_norm_sq(&self) -> T {
        let m = self.n + 1;
        let RicciData { ric, scal, .. } = self.ricci(&T::one());
        let mean = scal / T::from_count(m);
        let mut acc = T::zero();
        for b in 0..m {
            for c in 0..m {
                let mut v = ric[(b, c)].clone();
                if b == c {
                    v = v - mean.clone();
                }
                acc = acc + v.clone() * v;
            }
        }
        acc
    }

    /// Projects onto tensors with the full Riemann symmetry: pair
    /// antisymmetrization, pair exchange, then removal of the cyclic part.
    pub fn bianchi_project(&self) -> Self {
        let quarter = T::from_ratio(1, 4);
        let y = Self::from_fn(self.n, |a, b, c, d| {
            (self.get(a, b, c, d).clone() - self.get(b, a, c, d).clone()
                - self.get(a, b, d, c).clone()
                + self.get(b, a, d, c).clone())
                * quarter.clone()
        });
        let half = T::from_ratio(1, 2);
        let z = Self::from_fn(self.n, |a, b, c, d| {
            (y.get(a, b, c, d).clone() + y.get(c, d, a, b).clone()) * half.clone()
        });
        let third = T::from_ratio(1, 3);
        Self::from_fn(self.n, |a, b, c, d| {
            let cyclic =
                z.get(a, b, c, d).clone() + z.get(b, c, a, d).clone() + z.get(c, a, b, d).clone();
            z.get(a, b, c, d).clone() - cyclic * third.clone()
        })
    }

    /// Kulkarni–Nomizu type product `h ⊙ g` with the identity metric, in the
    /// sign convention where `I ⊙ g` is twice the unit space-form tensor.
    pub fn kulkarni_nomizu_identity(h: &Matrix<T>) -> Self {
        let n = h.rows() - 1;
        let delta = |i: usize, j: usize| if i == j { T::one() } else { T::zero() };
        Self::from_fn(n, |a, b, c, d| {
            h[(a, d)].clone() * delta(b, c) + delta(a, d) * h[(b, c)].clone()
                - h[(a, c)].clone() * delta(b, d)
                - delta(a, c) * h[(b, d)].clone()
        })
    }

    /// Removes the trace-free Ricci part, leaving an Einstein tensor with the
    /// same scalar curvature. Two-dimensional bases are returned unchanged.
    pub fn einstein_projection(&self) -> Self {
        let m = self.n + 1;
        if m < 3 {
            return self.clone();
        }
        let RicciData { ric, scal, .. } = self.ricci(&T::one());
        let mean = scal / T::from_count(m);
        let traceless = ric.sub(&Matrix::identity(m).scale(&mean));
        let correction = Self::kulkarni_nomizu_identity(&traceless);
        let factor = -(T::one() / T::from_count(m - 2));
        self.add(&correction.scale(&factor))
    }

    /// `R'_{abcd} = Σ O_{ap} O_{bq} O_{cr} O_{dt} R_{pqrt}`, rows of `O`
    /// being the new frame legs in old coordinates.
    pub fn rotate(&self, o: &Matrix<T>) -> Self {
        let m = self.n + 1;
        assert_eq!((o.rows(), o.cols()), (m, m), "rotation has wrong shape");
        // contract one slot at a time
        let mut cur = self.data.clone();
        for slot in 0..4 {
            let mut next = vec![T::zero(); cur.len()];
            let stride = m.pow(3 - slot as u32);
            for (off, out) in next.iter_mut().enumerate() {
                let idx = (off / stride) % m;
                let base = off - idx * stride;
                let mut acc = T::zero();
                for p in 0..m {
                    let oc = &o[(idx, p)];
                    if oc.is_zero() {
                        continue;
                    }
                    acc = acc + oc.clone() * cur[base + p * stride].clone();
                }
                *out = acc;
            }
            cur = next;
        }
        Self {
            n: self.n,
            data: cur,
        }
    }

    /// Serializes the canonical components with nonzero values.
    pub fn to_json(&self) -> RiemannJson {
        let m = self.n + 1;
        let mut components = Vec::new();
        for a in 0..m {
            for b in a + 1..m {
                for c in a..m {
                    for d in c + 1..m {
                        if (a, b) > (c, d) {
                            continue;
                        }
                        let v = self.get(a, b, c, d);
                        if v.is_zero() {
                            continue;
                        }
                        let (num, den) = scalar_to_json(v);
                        components.push(vec![
                            Value::from(a),
                            Value::from(b),
                            Value::from(c),
                            Value::from(d),
                            num,
                            den,
                        ]);
                    }
                }
            }
        }
        RiemannJson {
            n: self.n,
            components,
        }
    }

    pub fn from_json(json: &RiemannJson) -> Result<Self> {
        let mut comps = Vec::with_capacity(json.components.len());
        for row in &json.components {
            if row.len() != 6 {
                return Err(Error::Json(format!("expected 6 entries, got {}", row.len())));
            }
            let mut idx = [0usize; 4];
            for (k, slot) in idx.iter_mut().enumerate() {
                *slot = row[k]
                    .as_u64()
                    .ok_or_else(|| Error::Json(format!("bad index {}", row[k])))?
                    as usize;
            }
            comps.push((idx, scalar_from_json(&row[4], &row[5])?));
        }
        Self::from_canonical(json.n, comps)
    }
}

/// Wire format `{"n": int, "components": [[a,b,c,d,num,den], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiemannJson {
    pub n: usize,
    pub components: Vec<Vec<Value>>,
}

fn json_number(text: &str) -> Value {
    match text.parse::<i64>() {
        Ok(v) => Value::from(v),
        Err(_) => Value::from(text),
    }
}

fn scalar_to_json<T: Scalar>(v: &T) -> (Value, Value) {
    if T::EXACT {
        let text = v.to_string();
        match text.split_once('/') {
            Some((num, den)) => (json_number(num), json_number(den)),
            None => (json_number(&text), Value::from(1)),
        }
    } else {
        (Value::from(v.to_f64()), Value::from(1))
    }
}

fn scalar_from_json<T: Scalar>(num: &Value, den: &Value) -> Result<T> {
    let text = |v: &Value| match v {
        Value::Number(x) => Ok(x.to_string()),
        Value::String(s) => Ok(s.clone()),
        other => Err(Error::Json(format!("bad scalar entry {other}"))),
    };
    let (num, den) = (text(num)?, text(den)?);
    if den == "1" {
        Ok(T::parse_scalar(&num)?)
    } else {
        let n = T::parse_scalar(&num)?;
        let d = T::parse_scalar(&den)?;
        if d.is_zero() {
            return Err(Error::Json("zero denominator".into()));
        }
        Ok(n / d)
    }
}

/// Deterministic random tensor with rational entries and the full Riemann
/// symmetry, obtained by projecting a random 4-tensor.
pub fn random_riemann<T: Scalar>(seed: u64, n: usize) -> RiemannTensor<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((n as u64) << 56));
    let raw = RiemannTensor::from_fn(n, |_, _, _, _| {
        let num: i64 = rng.gen_range(-6..=6);
        let den: i64 = rng.gen_range(1..=3);
        T::from_ratio(num, den)
    });
    raw.bianchi_project()
}

/// Random Einstein tensor: [`random_riemann`] with its trace-free Ricci
/// part removed.
pub fn random_einstein<T: Scalar>(seed: u64, n: usize) -> RiemannTensor<T> {
    random_riemann::<T>(seed, n).einstein_projection()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use crate::scalar::{q, Rational};
    use crate::space_forms::riemann_csc;

    #[test]
    fn space_form_is_valid_and_has_expected_ricci() {
        for n in 1..=4 {
            let r = riemann_csc(&q(3, 2), n);
            assert!(r.validate().is_empty());
            let data = r.ricci(&q(2, 1));
            // Ric = n k g, r = s^2 n k
            assert_eq!(data.ric, Matrix::identity(n + 1).scale(&q(3 * n as i64, 2)));
            assert_eq!(data.r, q(4 * 3 * n as i64, 2));
            assert_eq!(data.r, q(4, 1) * data.ric[(0, 0)].clone());
            assert_eq!(data.scal, q(3 * (n * (n + 1)) as i64, 2));
        }
    }

    #[test]
    fn broken_antisymmetry_is_reported() {
        let mut r = riemann_csc(&q(1, 1), 2);
        r.set(0, 1, 1, 0, q(5, 1));
        let v = r.validate();
        assert!(v
            .iter()
            .any(|x| x.family == SymmetryFamily::SecondPairAntisymmetry && x.index == [0, 1, 0, 1]));
        assert!(v.iter().any(|x| x.family == SymmetryFamily::FirstPairAntisymmetry));
    }

    #[test]
    fn bianchi_violation_is_reported() {
        let mut r = RiemannTensor::<Rational>::zero(3);
        r.set_with_symmetries(0, 1, 2, 3, q(1, 1));
        let v = r.validate();
        assert!(!v.is_empty());
        assert!(v.iter().all(|x| x.family == SymmetryFamily::FirstBianchi));
    }

    #[test]
    fn random_tensors_are_valid_and_deterministic() {
        for n in 1..=4 {
            let a = random_riemann::<Rational>(11, n);
            let b = random_riemann::<Rational>(11, n);
            assert_eq!(a, b);
            assert!(a.validate().is_empty(), "n={n}");
            assert!(a.max_abs() > 0.0);
            assert_ne!(a, random_riemann::<Rational>(12, n));
        }
    }

    #[test]
    fn projection_is_idempotent_on_valid_tensors() {
        let csc = riemann_csc(&q(-2, 3), 3);
        assert_eq!(csc.bianchi_project(), csc);
        let r = random_riemann::<Rational>(5, 3);
        assert_eq!(r.bianchi_project(), r);
    }

    #[test]
    fn einstein_projection_kills_traceless_ricci() {
        for seed in 0..5 {
            let r = random_riemann::<Rational>(seed, 3);
            assert!(!r.einstein_residual().is_zero());
            let e = r.einstein_projection();
            assert!(e.is_valid());
            assert!(e.einstein_residual().is_zero());
            assert_eq!(e.ricci(&q(1, 1)).scal, r.ricci(&q(1, 1)).scal);
        }
    }

    #[test]
    fn flat_tensor_has_no_curvature_data() {
        let r = RiemannTensor::<Rational>::zero(3);
        let d = r.ricci(&q(1, 1));
        assert_eq!(d.ric, Matrix::zeros(4, 4));
        assert!(d.r.is_zero());
        assert!(r.rho(&q(1, 1)).is_zero());
    }

    #[test]
    fn rho_vanishes_for_einstein_tensors() {
        for seed in 0..20 {
            let e = random_einstein::<Rational>(seed, 3);
            assert!(e.rho(&q(2, 1)).is_zero());
        }
        assert!(riemann_csc(&q(4, 1), 3).rho(&q(1, 1)).is_zero());
    }

    #[test]
    fn rho_is_vertical_lift_of_mixed_ricci() {
        let r = random_riemann::<Rational>(3, 3);
        let s = q(1, 2);
        let rho = r.rho(&s);
        let ric = r.ricci(&s).ric;
        for b in 1..=3 {
            assert_eq!(rho.coefficient(&[b + 3]), s.clone() * ric[(b, 0)].clone());
        }
    }

    #[test]
    fn json_round_trip() {
        let r = random_riemann::<Rational>(9, 3);
        let text = serde_json::to_string(&r.to_json()).unwrap();
        let back: RiemannJson = serde_json::from_str(&text).unwrap();
        assert_eq!(RiemannTensor::<Rational>::from_json(&back).unwrap(), r);
        let csc = riemann_csc(&q(1, 1), 2);
        let json = csc.to_json();
        assert_eq!(json.components.len(), 3);
        assert_eq!(json.components[0], serde_json::json!([0, 1, 0, 1, -1, 1]).as_array().unwrap().clone());
    }

    #[test]
    fn json_rejects_non_canonical_entries() {
        let bad = RiemannJson {
            n: 2,
            components: vec![serde_json::json!([1, 0, 0, 1, 1, 1]).as_array().unwrap().clone()],
        };
        assert!(RiemannTensor::<Rational>::from_json(&bad).is_err());
        let bad = RiemannJson {
            n: 2,
            components: vec![serde_json::json!([0, 1, 0, 1, 1, 0]).as_array().unwrap().clone()],
        };
        assert!(RiemannTensor::<Rational>::from_json(&bad).is_err());
    }

    #[test]
    fn json_float_components() {
        let r = riemann_csc(&0.5f64, 2);
        let json = r.to_json();
        assert_eq!(RiemannTensor::<f64>::from_json(&json).unwrap(), r);
    }
}
