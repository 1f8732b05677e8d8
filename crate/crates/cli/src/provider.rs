//! Curvature provider specs such as `csc:k=1`, `product-spheres:1,1,2,2`,
//! `random:7`, `einstein-random:7`, `json:path` or a chart metric name.

use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use griffiths_core::adapted_frame::{random_einstein, random_riemann, RiemannJson, RiemannTensor};
use griffiths_core::metrics::{adapt_frame, chart_riemann_fd_checked, product_spheres_riemann, BuiltinMetric};
use griffiths_core::space_forms::riemann_csc;
use griffiths_core::{ExactRiemann, FloatRiemann, Rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum Provider {
    SpaceForm { k: String },
    ProductSpheres { k1: String, k2: String, d1: usize, d2: usize },
    Random { seed: u64 },
    EinsteinRandom { seed: u64 },
    Json(PathBuf),
    Chart(String),
}

/// A curvature tensor in the number system its provider works in.
#[derive(Clone, Debug)]
pub enum Curvature {
    Exact(ExactRiemann),
    Float(FloatRiemann),
}

impl Curvature {
    pub fn n(&self) -> usize {
        match self {
            Self::Exact(r) => r.n(),
            Self::Float(r) => r.n(),
        }
    }
}

impl Provider {
    pub fn parse(spec: &str) -> Result<Self> {
        let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
        let arg = arg.trim();
        match kind.trim() {
            "csc" => {
                let k = arg.strip_prefix("k=").unwrap_or(arg);
                if k.is_empty() {
                    bail!("provider `csc` needs a curvature, e.g. csc:k=1");
                }
                Ok(Self::SpaceForm { k: k.to_string() })
            }
            "product-spheres" => {
                let parts: Vec<&str> = arg.split(',').map(str::trim).collect();
                let [k1, k2, d1, d2] = parts[..] else {
                    bail!("provider `product-spheres` expects k1,k2,d1,d2");
                };
                Ok(Self::ProductSpheres {
                    k1: k1.to_string(),
                    k2: k2.to_string(),
                    d1: d1.parse().context("d1")?,
                    d2: d2.parse().context("d2")?,
                })
            }
            "random" => Ok(Self::Random { seed: parse_seed(arg)? }),
            "einstein-random" => Ok(Self::EinsteinRandom { seed: parse_seed(arg)? }),
            "json" if !arg.is_empty() => Ok(Self::Json(PathBuf::from(arg))),
            "chart" if !arg.is_empty() => Self::chart(arg),
            name if BuiltinMetric::NAMES.contains(&name) && arg.is_empty() => Self::chart(name),
            _ => bail!("unknown curvature provider `{spec}`"),
        }
    }

    fn chart(name: &str) -> Result<Self> {
        if !BuiltinMetric::NAMES.contains(&name) {
            bail!("unknown chart metric `{name}`; known: {}", BuiltinMetric::NAMES.join(", "));
        }
        Ok(Self::Chart(name.to_string()))
    }

    /// Base dimension `n+1` forced by the provider, if any.
    pub fn forced_n(&self) -> Option<usize> {
        match self {
            Self::ProductSpheres { d1, d2, .. } => Some(d1 + d2 - 1),
            _ => None,
        }
    }

    /// Builds the tensor in the frame adapted to `u` (default `e_0`).
    /// `x` is the chart point for chart providers.
    pub fn build(&self, n: usize, u: Option<&[String]>, x: &[f64]) -> Result<Curvature> {
        match self {
            Self::SpaceForm { k } => exact(riemann_csc(&parse::<Rational>(k)?, n), u),
            Self::ProductSpheres { k1, k2, d1, d2 } => {
                if d1 + d2 != n + 1 {
                    bail!("product-spheres dimensions {d1}+{d2} do not match n+1 = {}", n + 1);
                }
                let u = match u {
                    Some(u) => parse_vec::<Rational>(u)?,
                    None => unit(d1 + d2),
                };
                let r = product_spheres_riemann(&parse(k1)?, &parse(k2)?, *d1, *d2, &u)?;
                Ok(Curvature::Exact(r))
            }
            Self::Random { seed } => exact(random_riemann(*seed, n), u),
            Self::EinsteinRandom { seed } => exact(random_einstein(*seed, n), u),
            Self::Json(path) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let json: RiemannJson = serde_json::from_str(&text).context("curvature JSON")?;
                if json.n != n {
                    bail!("curvature file has n = {}, expected {n}", json.n);
                }
                exact(RiemannTensor::from_json(&json)?, u)
            }
            Self::Chart(name) => {
                let metric = BuiltinMetric::by_name(name, n + 1).expect("validated name");
                if x.len() != n + 1 {
                    bail!("chart point needs {} coordinates, got {}", n + 1, x.len());
                }
                let fd = chart_riemann_fd_checked(&metric, x, 1e-3)?;
                if !fd.richardson_ok {
                    bail!("finite differences unstable at {x:?}: gap {:e}", fd.richardson_gap);
                }
                // projecting removes the rounding-level asymmetry of the stencil
                let tensor = fd.tensor.bianchi_project();
                let r = match u {
                    Some(u) => tensor.rotate(adapt_frame(&parse_vec::<f64>(u)?)?.matrix()),
                    None => tensor,
                };
                Ok(Curvature::Float(r))
            }
        }
    }
}

fn exact(r: ExactRiemann, u: Option<&[String]>) -> Result<Curvature> {
    Ok(Curvature::Exact(match u {
        Some(u) => r.rotate(adapt_frame(&parse_vec::<Rational>(u)?)?.matrix()),
        None => r,
    }))
}

fn unit(m: usize) -> Vec<Rational> {
    (0..m).map(|i| Rational::from_count(usize::from(i == 0))).collect()
}

fn parse_seed(arg: &str) -> Result<u64> {
    let v = arg.strip_prefix("seed=").unwrap_or(arg);
    v.parse().map_err(|_| anyhow!("bad seed `{arg}`"))
}

pub fn parse<T: Scalar>(s: &str) -> Result<T> {
    T::parse_scalar(s).map_err(|e| anyhow!(e))
}

pub fn parse_vec<T: Scalar>(items: &[String]) -> Result<Vec<T>> {
    items.iter().map(|s| parse(s)).collect()
}
