//! Closed-form Hausdorff distances between unit norm balls.
//!
//! For unit `ℓ_{p1}` and `ℓ_{p2}` balls in `R^d` with `1 < p1 ≤ p2 ≤ ∞`, the
//! distance is `d^{-1/2} (d^{1/p} − d^{1/q})` where `p, q` are the Hölder
//! conjugates of `p2, p1`. For unit `D`-norm balls with parameters
//! `1 ≤ k1 ≤ k2 ≤ d` it is `(1/k1 − 1/k2) √d`. Both maxima are attained at
//! the `2^d` scaled sign vectors `v/√d`, `v ∈ {−1,1}^d`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::{ExtendedReal, NormKind, NormSpec};

/// An ordered pair of norm balls, the first contained in the second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallPair {
    dim: usize,
    first: NormSpec,
    second: NormSpec,
}

impl BallPair {
    /// Both specs must share a dimension `d ≥ 2` and belong to the same
    /// family, ordered so the first ball is contained in the second:
    /// `p1 ≤ p2` for `ℓp` balls, `k_first ≥ k_second` for `D`-norm balls
    /// (larger `k` means a smaller ball).
    pub fn new(first: NormSpec, second: NormSpec) -> Result<Self> {
        if first.dim() != second.dim() {
            return Err(Error::DimensionMismatch(format!(
                "ball dimensions differ: {} vs {}",
                first.dim(),
                second.dim()
            )));
        }
        let dim = first.dim();
        if dim < 2 {
            return Err(Error::Domain("ball pair requires dimension >= 2".into()));
        }
        match (first.kind(), second.kind()) {
            (NormKind::Lp { p: p1 }, NormKind::Lp { p: p2 }) => {
                if p1 > p2 {
                    return Err(Error::ArgumentOrder(format!(
                        "lp ball inclusion requires p1 <= p2, got p1 = {p1}, p2 = {p2}"
                    )));
                }
            }
            (a, b) => {
                let (k1, k2) = (dnorm_parameter(a), dnorm_parameter(b));
                match (k1, k2) {
                    (Some(k1), Some(k2)) => {
                        if k1 < k2 {
                            return Err(Error::ArgumentOrder(format!(
                                "D-norm ball inclusion requires k_first >= k_second, \
                                 got {k1} < {k2}"
                            )));
                        }
                    }
                    _ => {
                        return Err(Error::Domain(
                            "ball pair must use a single norm family (lp or D-norm)".into(),
                        ))
                    }
                }
            }
        }
        Ok(BallPair { dim, first, second })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn first(&self) -> &NormSpec {
        &self.first
    }

    pub fn second(&self) -> &NormSpec {
        &self.second
    }

    /// The Hausdorff distance between the two balls.
    pub fn distance(&self) -> Result<f64> {
        match (self.first.kind(), self.second.kind()) {
            (NormKind::Lp { p: p1 }, NormKind::Lp { p: p2 }) => {
                lp_ball_distance(self.dim, p1, p2)
            }
            (a, b) => {
                let k1 = dnorm_parameter(b).expect("validated at construction");
                let k2 = dnorm_parameter(a).expect("validated at construction");
                dnorm_ball_distance(self.dim, k1, k2)
            }
        }
    }
}

fn dnorm_parameter(kind: NormKind) -> Option<f64> {
    match kind {
        NormKind::DNorm { k } => Some(k),
        NormKind::KLargest { k } => Some(k as f64),
        NormKind::Lp { .. } => None,
    }
}

/// How a set of global maximizers is described.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MaximizerDescription {
    /// All `2^d` scaled sign vectors `v/√d`, `v ∈ {−1,1}^d`.
    SignVertices,
    /// Scaled standard basis vectors `±e_k` (the global minimizers).
    ScaledBasis,
}

/// A compactly described set of maximizers: one representative plus a count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaximizerSet {
    pub representative: Vec<f64>,
    pub count: u128,
    pub description: MaximizerDescription,
}

/// Hausdorff distance between the unit `ℓ_{p1}` and `ℓ_{p2}` balls in `R^d`.
///
/// Requires `d ≥ 2` and `1 < p1 ≤ p2 ≤ ∞` (for `p1 = 1` the conjugate
/// exponent would be infinite, outside the formula's range). Returns 0 when
/// `p1 = p2`.
pub fn lp_ball_distance(d: usize, p1: ExtendedReal, p2: ExtendedReal) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain(format!("lp_ball_distance requires d >= 2, got {d}")));
    }
    if !(p1.as_f64() > 1.0) {
        return Err(Error::Domain(format!(
            "lp_ball_distance requires p1 > 1, got p1 = {p1}"
        )));
    }
    if p1 > p2 {
        return Err(Error::ArgumentOrder(format!(
            "lp_ball_distance requires p1 <= p2, got p1 = {p1}, p2 = {p2}"
        )));
    }
    if p1 == p2 {
        return Ok(0.0);
    }
    // work in conjugate space: p = p2', q = p1', 1 <= p < q < inf
    let p = p2.holder_conjugate()?;
    let q = p1.holder_conjugate()?;
    let df = d as f64;
    Ok((df.powf(p.recip()) - df.powf(q.recip())) / df.sqrt())
}

/// Hausdorff distance `(1/k1 − 1/k2) √d` between unit `D`-norm balls.
pub fn dnorm_ball_distance(d: usize, k1: f64, k2: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::Domain(format!(
            "dnorm_ball_distance requires d >= 2, got {d}"
        )));
    }
    for k in [k1, k2] {
        if !(k >= 1.0 && k <= d as f64) {
            return Err(Error::Domain(format!(
                "dnorm_ball_distance requires 1 <= k <= {d}, got k = {k}"
            )));
        }
    }
    if k1 > k2 {
        return Err(Error::ArgumentOrder(format!(
            "dnorm_ball_distance requires k1 <= k2, got k1 = {k1}, k2 = {k2}"
        )));
    }
    Ok((1.0 / k1 - 1.0 / k2) * (d as f64).sqrt())
}

/// The global maximizers of the `ℓp`-ball objectives: the `2^d` sign
/// vertices, represented by `(1,…,1)/√d`.
pub fn lp_maximizers(d: usize) -> Result<MaximizerSet> {
    if d < 2 {
        return Err(Error::Domain(format!("lp_maximizers requires d >= 2, got {d}")));
    }
    let count = 1u128.checked_shl(d as u32).ok_or_else(|| {
        Error::Domain(format!("maximizer count 2^{d} exceeds the supported range"))
    })?;
    let r = 1.0 / (d as f64).sqrt();
    Ok(MaximizerSet {
        representative: vec![r; d],
        count,
        description: MaximizerDescription::SignVertices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SQRT3: f64 = 1.7320508075688772;

    #[test]
    fn lp_distance_matches_sqrt3_minus_1() {
        let got = lp_ball_distance(3, ExtendedReal::TWO, ExtendedReal::Infinity).unwrap();
        assert_relative_eq!(got, SQRT3 - 1.0, max_relative = 1e-15);
    }

    #[test]
    fn lp_distance_zero_for_equal_exponents() {
        assert_eq!(
            lp_ball_distance(5, ExtendedReal::Finite(3.0), ExtendedReal::Finite(3.0)).unwrap(),
            0.0
        );
    }

    #[test]
    fn lp_distance_d2_case() {
        // p = 1, q = 2 in conjugate space; dense-circle cross-check lives in
        // tests/optimizer_oracles.rs
        let got = lp_ball_distance(2, ExtendedReal::TWO, ExtendedReal::Infinity).unwrap();
        assert_relative_eq!(got, std::f64::consts::SQRT_2 - 1.0, max_relative = 1e-15);
    }

    #[test]
    fn lp_distance_rejects_bad_arguments() {
        assert!(matches!(
            lp_ball_distance(3, ExtendedReal::Infinity, ExtendedReal::TWO),
            Err(Error::ArgumentOrder(_))
        ));
        assert!(matches!(
            lp_ball_distance(3, ExtendedReal::ONE, ExtendedReal::TWO),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            lp_ball_distance(1, ExtendedReal::TWO, ExtendedReal::Infinity),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn dnorm_distance_paper_instance() {
        let got = dnorm_ball_distance(3, 1.7, 2.9).unwrap();
        assert_relative_eq!(got, 120.0 * SQRT3 / 493.0, max_relative = 1e-15);
        assert_relative_eq!(got, 0.421594517055305, max_relative = 1e-14);
    }

    #[test]
    fn dnorm_distance_edges() {
        assert_eq!(dnorm_ball_distance(4, 2.0, 2.0).unwrap(), 0.0);
        let got = dnorm_ball_distance(3, 1.0, 3.0).unwrap();
        assert_relative_eq!(got, 2.0 * SQRT3 / 3.0, max_relative = 1e-15);
        assert!(matches!(
            dnorm_ball_distance(3, 2.9, 1.7),
            Err(Error::ArgumentOrder(_))
        ));
        assert!(matches!(dnorm_ball_distance(3, 0.5, 2.0), Err(Error::Domain(_))));
        assert!(matches!(dnorm_ball_distance(3, 1.0, 3.5), Err(Error::Domain(_))));
    }

    #[test]
    fn maximizer_sets() {
        let m2 = lp_maximizers(2).unwrap();
        assert_eq!(m2.count, 4);
        assert_relative_eq!(m2.representative[0], 1.0 / std::f64::consts::SQRT_2);
        assert_eq!(lp_maximizers(3).unwrap().count, 8);
        let m10 = lp_maximizers(10).unwrap();
        assert_eq!(m10.count, 1024);
        let norm: f64 = m10.representative.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert_relative_eq!(norm, 1.0, max_relative = 1e-13);
    }

    #[test]
    fn ball_pair_ordering() {
        let lp1 = NormSpec::lp(3, ExtendedReal::TWO).unwrap();
        let lp2 = NormSpec::lp(3, ExtendedReal::Infinity).unwrap();
        let pair = BallPair::new(lp1, lp2).unwrap();
        assert_relative_eq!(pair.distance().unwrap(), SQRT3 - 1.0, max_relative = 1e-15);
        assert!(BallPair::new(lp2, lp1).is_err());

        // D-norm balls: larger k is the smaller ball, so it goes first
        let d29 = NormSpec::d_norm(3, 2.9).unwrap();
        let d17 = NormSpec::d_norm(3, 1.7).unwrap();
        let pair = BallPair::new(d29, d17).unwrap();
        assert_relative_eq!(
            pair.distance().unwrap(),
            120.0 * SQRT3 / 493.0,
            max_relative = 1e-15
        );
        assert!(BallPair::new(d17, d29).is_err());
        assert!(BallPair::new(lp1, d17).is_err());
    }
}
