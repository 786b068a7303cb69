//! Vector norms, dual norms and Hölder conjugation.
//!
//! Three norm families are supported: the `ℓp` norms for `p ∈ [1, ∞]`, the
//! `D`-norms parameterized by a real `k ∈ [1, d]` (sum of the `⌊k⌋` largest
//! magnitudes plus a fractional share of the next one), and the `k`-largest
//! magnitude norms, which are the `D`-norms at integer `k`. The dual of a
//! norm is the support function of its unit ball; it is what actually shows
//! up in Hausdorff-distance objectives, so duals and their subgradients live
//! here too.

use std::fmt;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A real exponent extended with `∞`, as used for `ℓp` indices.
///
/// Infinity is an explicit variant rather than a float sentinel, so branch
/// logic on `p = ∞` is exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinity,
}

impl ExtendedReal {
    pub const ONE: ExtendedReal = ExtendedReal::Finite(1.0);
    pub const TWO: ExtendedReal = ExtendedReal::Finite(2.0);

    /// The value as an `f64`, with `∞ ↦ f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => v,
            ExtendedReal::Infinity => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        match self {
            ExtendedReal::Finite(v) => 1.0 / v,
            ExtendedReal::Infinity => 0.0,
        }
    }

    /// The Hölder conjugate `p′` with `1/p + 1/p′ = 1`.
    ///
    /// `conjugate(1) = ∞` and `conjugate(∞) = 1`; errors for `p < 1`.
    pub fn holder_conjugate(self) -> Result<ExtendedReal> {
        match self {
            ExtendedReal::Infinity => Ok(ExtendedReal::Finite(1.0)),
            ExtendedReal::Finite(p) => {
                if !(p >= 1.0) {
                    return Err(Error::Domain(format!(
                        "Hölder conjugate requires p >= 1, got {p}"
                    )));
                }
                if p == 1.0 {
                    Ok(ExtendedReal::Infinity)
                } else {
                    Ok(ExtendedReal::Finite(p / (p - 1.0)))
                }
            }
        }
    }
}

impl PartialOrd for ExtendedReal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.as_f64().partial_cmp(&other.as_f64())
    }
}

impl From<f64> for ExtendedReal {
    fn from(v: f64) -> Self {
        if v.is_infinite() && v > 0.0 {
            ExtendedReal::Infinity
        } else {
            ExtendedReal::Finite(v)
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for ExtendedReal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t == "∞" {
            return Ok(ExtendedReal::Infinity);
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::Domain(format!("cannot parse '{s}' as an exponent")))?;
        if v.is_nan() {
            return Err(Error::Domain("exponent cannot be NaN".into()));
        }
        Ok(ExtendedReal::from(v))
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => serializer.serialize_f64(*v),
            ExtendedReal::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = ExtendedReal;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "a number or the string \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtendedReal, E> {
                Ok(ExtendedReal::from(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtendedReal, E> {
                Ok(ExtendedReal::Finite(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtendedReal, E> {
                Ok(ExtendedReal::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtendedReal, E> {
                v.parse().map_err(E::custom)
            }
        }
        deserializer.deserialize_any(V)
    }
}

/// Free-function form of [`ExtendedReal::holder_conjugate`].
pub fn holder_conjugate(p: ExtendedReal) -> Result<ExtendedReal> {
    p.holder_conjugate()
}

/// The `ℓp` norm of `x` for `p ∈ [1, ∞]`.
///
/// Finite `p` uses the max-factored form `‖x‖∞ (Σ (|xᵢ|/‖x‖∞)^p)^{1/p}` so
/// large exponents neither overflow nor underflow. The zero vector has norm 0.
pub fn lp_norm(x: &[f64], p: ExtendedReal) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Precondition("lp_norm requires a nonempty vector".into()));
    }
    match p {
        ExtendedReal::Infinity => Ok(x.iter().fold(0.0, |m, v| m.max(v.abs()))),
        ExtendedReal::Finite(p) => {
            if !(p >= 1.0) {
                return Err(Error::Domain(format!("lp_norm requires p >= 1, got {p}")));
            }
            if p == 1.0 {
                return Ok(x.iter().map(|v| v.abs()).sum());
            }
            let max = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if max == 0.0 {
                return Ok(0.0);
            }
            let sum: f64 = x.iter().map(|v| (v.abs() / max).powf(p)).sum();
            Ok(max * sum.powf(1.0 / p))
        }
    }
}

/// A subgradient of the `ℓp` norm at `z`.
///
/// For `p > 1` this is the gradient wherever it exists; the kink selections
/// are fixed: zero on zero coordinates for `p = 1`, the first maximal
/// coordinate for `p = ∞`, and the zero vector at `z = 0`.
pub fn lp_subgradient(z: &[f64], p: ExtendedReal) -> Result<Vec<f64>> {
    if z.is_empty() {
        return Err(Error::Precondition("lp_subgradient requires a nonempty vector".into()));
    }
    match p {
        ExtendedReal::Infinity => {
            let mut g = vec![0.0; z.len()];
            let mut best = 0.0;
            let mut idx = None;
            for (i, v) in z.iter().enumerate() {
                if v.abs() > best {
                    best = v.abs();
                    idx = Some(i);
                }
            }
            if let Some(i) = idx {
                g[i] = z[i].signum();
            }
            Ok(g)
        }
        ExtendedReal::Finite(p) => {
            if !(p >= 1.0) {
                return Err(Error::Domain(format!("lp_subgradient requires p >= 1, got {p}")));
            }
            if p == 1.0 {
                return Ok(z
                    .iter()
                    .map(|v| if *v == 0.0 { 0.0 } else { v.signum() })
                    .collect());
            }
            let norm = lp_norm(z, ExtendedReal::Finite(p))?;
            if norm == 0.0 {
                return Ok(vec![0.0; z.len()]);
            }
            Ok(z
                .iter()
                .map(|v| {
                    if *v == 0.0 {
                        0.0
                    } else {
                        v.signum() * (v.abs() / norm).powf(p - 1.0)
                    }
                })
                .collect())
        }
    }
}

/// The Hessian of `‖·‖_p` at `z`, where it exists.
///
/// For finite `p > 1` and `z` off the coordinate hyperplanes the norm is
/// twice differentiable with
/// `∇² = (p−1)/n · (diag((|zᵢ|/n)^{p−2}) − u uᵀ)`, `u = ∇‖z‖_p`, `n = ‖z‖_p`;
/// the same expression degenerates to zero at `p = 1` (piecewise linear).
/// Returns `None` at kinks: `p = ∞`, `z = 0`, any `zᵢ = 0` for `p < 2`, or
/// any `zᵢ = 0` for `p = 1`.
pub fn lp_hessian(z: &[f64], p: ExtendedReal) -> Option<nalgebra::DMatrix<f64>> {
    let m = z.len();
    let pf = match p {
        ExtendedReal::Infinity => return None,
        ExtendedReal::Finite(v) => v,
    };
    if !(pf >= 1.0) {
        return None;
    }
    let has_zero = z.iter().any(|v| *v == 0.0);
    if pf == 1.0 {
        return if has_zero { None } else { Some(nalgebra::DMatrix::zeros(m, m)) };
    }
    if pf < 2.0 && has_zero {
        return None;
    }
    let n = lp_norm(z, p).ok()?;
    if n == 0.0 {
        return None;
    }
    let u: Vec<f64> = z
        .iter()
        .map(|v| if *v == 0.0 { 0.0 } else { v.signum() * (v.abs() / n).powf(pf - 1.0) })
        .collect();
    let mut h = nalgebra::DMatrix::zeros(m, m);
    for i in 0..m {
        // powf covers the p = 2, z_i = 0 corner: 0^0 = 1
        let di = (z[i].abs() / n).powf(pf - 2.0);
        for j in 0..m {
            let base = if i == j { di } else { 0.0 };
            h[(i, j)] = (pf - 1.0) / n * (base - u[i] * u[j]);
        }
    }
    Some(h)
}

fn check_k(k: f64, dim: usize, what: &str) -> Result<()> {
    if !(k >= 1.0 && k <= dim as f64) {
        return Err(Error::Domain(format!(
            "{what} requires 1 <= k <= {dim}, got k = {k}"
        )));
    }
    Ok(())
}

/// Magnitudes of `x` sorted in decreasing order.
fn sorted_magnitudes(x: &[f64]) -> Vec<f64> {
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).expect("norm input must not contain NaN"));
    mags
}

/// The `D`-norm of `x` with parameter `k ∈ [1, d]`.
///
/// Evaluated as the sum of the `⌊k⌋` largest magnitudes plus `(k − ⌊k⌋)`
/// times the next-largest one, which equals the subset maximization in the
/// definition (test-enforced against brute force).
pub fn d_norm(x: &[f64], k: f64) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Precondition("d_norm requires a nonempty vector".into()));
    }
    check_k(k, x.len(), "d_norm")?;
    let mags = sorted_magnitudes(x);
    let whole = k.floor() as usize;
    let frac = k - k.floor();
    let mut total: f64 = mags[..whole].iter().sum();
    if frac > 0.0 {
        total += frac * mags[whole];
    }
    Ok(total)
}

/// The dual of the `D`-norm: `max{ ‖y‖₁/k, ‖y‖∞ }`.
///
/// This is the support function of the unit `D`-norm ball.
pub fn d_norm_dual(y: &[f64], k: f64) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::Precondition("d_norm_dual requires a nonempty vector".into()));
    }
    check_k(k, y.len(), "d_norm_dual")?;
    let l1 = lp_norm(y, ExtendedReal::ONE)?;
    let linf = lp_norm(y, ExtendedReal::Infinity)?;
    Ok((l1 / k).max(linf))
}

/// Subgradient of `y ↦ max{ ‖y‖₁/k, ‖y‖∞ }`.
///
/// On ties the first branch (`‖·‖₁/k`) is selected.
pub fn d_norm_dual_subgradient(y: &[f64], k: f64) -> Result<Vec<f64>> {
    if y.is_empty() {
        return Err(Error::Precondition(
            "d_norm_dual_subgradient requires a nonempty vector".into(),
        ));
    }
    check_k(k, y.len(), "d_norm_dual_subgradient")?;
    let l1 = lp_norm(y, ExtendedReal::ONE)?;
    let linf = lp_norm(y, ExtendedReal::Infinity)?;
    if l1 / k >= linf {
        Ok(lp_subgradient(y, ExtendedReal::ONE)?
            .into_iter()
            .map(|g| g / k)
            .collect())
    } else {
        lp_subgradient(y, ExtendedReal::Infinity)
    }
}

/// Which norm family a [`NormSpec`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum NormKind {
    Lp { p: ExtendedReal },
    DNorm { k: f64 },
    KLargest { k: usize },
}

/// A validated description of a norm on `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    kind: NormKind,
    dim: usize,
}

impl NormSpec {
    pub fn lp(dim: usize, p: ExtendedReal) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("norm dimension must be positive".into()));
        }
        if let ExtendedReal::Finite(v) = p {
            if !(v >= 1.0) {
                return Err(Error::Domain(format!("lp norm requires p >= 1, got {v}")));
            }
        }
        Ok(NormSpec { kind: NormKind::Lp { p }, dim })
    }

    pub fn d_norm(dim: usize, k: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("norm dimension must be positive".into()));
        }
        check_k(k, dim, "NormSpec::d_norm")?;
        Ok(NormSpec { kind: NormKind::DNorm { k }, dim })
    }

    pub fn k_largest(dim: usize, k: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("norm dimension must be positive".into()));
        }
        check_k(k as f64, dim, "NormSpec::k_largest")?;
        Ok(NormSpec { kind: NormKind::KLargest { k }, dim })
    }

    pub fn kind(&self) -> NormKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "expected a vector of length {}, got {}",
                self.dim,
                x.len()
            )));
        }
        Ok(())
    }

    /// Evaluate the norm at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        match self.kind {
            NormKind::Lp { p } => lp_norm(x, p),
            NormKind::DNorm { k } => d_norm(x, k),
            NormKind::KLargest { k } => d_norm(x, k as f64),
        }
    }

    /// Evaluate the dual norm (the support function of the unit ball) at `y`.
    pub fn dual(&self, y: &[f64]) -> Result<f64> {
        self.check_dim(y)?;
        match self.kind {
            NormKind::Lp { p } => lp_norm(y, p.holder_conjugate()?),
            NormKind::DNorm { k } => d_norm_dual(y, k),
            NormKind::KLargest { k } => d_norm_dual(y, k as f64),
        }
    }

    /// A subgradient of the dual norm at `y`, with the same kink selections
    /// as [`lp_subgradient`] and [`d_norm_dual_subgradient`].
    pub fn dual_subgradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(y)?;
        match self.kind {
            NormKind::Lp { p } => lp_subgradient(y, p.holder_conjugate()?),
            NormKind::DNorm { k } => d_norm_dual_subgradient(y, k),
            NormKind::KLargest { k } => d_norm_dual_subgradient(y, k as f64),
        }
    }
}
