//! Maximization of norm-difference objectives over the unit Euclidean
//! sphere.
//!
//! The Hausdorff distance between linearly mapped norm balls is the value of
//! the nonconvex program `sup{ ‖Ty‖_p − ‖Ty‖_q : ‖y‖₂ = 1 }`, a difference
//! of convex functions with no exploitable symmetry for general `T`. The
//! solver here is multistart projected subgradient ascent: from each start,
//! take the tangential component of a fixed subgradient selection, backtrack
//! until the Armijo condition holds, renormalize onto the sphere, repeat.
//! Accepted steps are always improving, so the reported value dominates
//! every start value; it is still only a lower estimate of the supremum.
//!
//! Starts are, in order: the sign vertices `v/√d` (the known maximizers for
//! isometric maps; capped at 1024 by seeded sampling for `d > 10`),
//! objective-specific warm starts, and seeded uniform points on the sphere.
//! Ties across starts keep the earliest start, so reports are deterministic
//! for a fixed seed regardless of execution order.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norms::{lp_subgradient, ExtendedReal, NormSpec};

/// Sufficient-increase fraction for the Armijo acceptance test.
const ARMIJO_C1: f64 = 1e-4;
/// Cap on the number of enumerated or sampled sign-vertex starts.
const SIGN_VERTEX_CAP: usize = 1024;
/// Relative singular-value cutoff for the row-rank check.
const RANK_TOL: f64 = 1e-10;

/// An objective that can be maximized over the unit sphere in `R^dim`.
pub trait SphereObjective: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, y: &DVector<f64>) -> f64;
    /// A subgradient of the objective at `y` (a fixed selection at kinks).
    fn subgradient(&self, y: &DVector<f64>) -> DVector<f64>;
    /// The ambient Hessian at `y` where the objective is twice
    /// differentiable, `None` at kinks or when unavailable. Enables the
    /// Newton polish phase of the ascent.
    fn hessian(&self, _y: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }
    /// Whether the problem data is degenerate (reported, not fatal).
    fn rank_deficient(&self) -> bool {
        false
    }
    /// Objective-specific warm starts (unit vectors), at most `cap` of them.
    fn warm_starts(&self, _cap: usize) -> Vec<DVector<f64>> {
        Vec::new()
    }
}

/// The mapped-ball objective `y ↦ ‖Ty‖_p − ‖Ty‖_q` with `1 ≤ p < q < ∞`.
#[derive(Debug, Clone)]
pub struct MappedBallObjective {
    map: DMatrix<f64>,
    p: ExtendedReal,
    q: ExtendedReal,
    rank_deficient: bool,
    pinv: Option<DMatrix<f64>>,
}

impl MappedBallObjective {
    /// Validates `1 ≤ p < q < ∞` and runs the row-rank check (singular
    /// values above `1e-10 · σ_max`). Rank deficiency, including `m > d`,
    /// is flagged on the report rather than rejected.
    pub fn new(map: DMatrix<f64>, p: ExtendedReal, q: ExtendedReal) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::DimensionMismatch("map matrix must be nonempty".into()));
        }
        if !(p.as_f64() >= 1.0) {
            return Err(Error::Domain(format!("objective requires p >= 1, got p = {p}")));
        }
        if !q.is_finite() {
            return Err(Error::Domain("objective requires q < inf".into()));
        }
        if !(p < q) {
            return Err(Error::Domain(format!(
                "objective requires p < q, got p = {p}, q = {q}"
            )));
        }
        let m = map.nrows();
        let d = map.ncols();
        let svd = map.clone().svd(false, false);
        let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let rank = svd
            .singular_values
            .iter()
            .filter(|s| **s > RANK_TOL * sigma_max)
            .count();
        let rank_deficient = rank < m || m > d || sigma_max == 0.0;
        let pinv = map.clone().pseudo_inverse(RANK_TOL * sigma_max.max(1.0)).ok();
        Ok(MappedBallObjective { map, p, q, rank_deficient, pinv })
    }

    pub fn map(&self) -> &DMatrix<f64> {
        &self.map
    }

    pub fn p(&self) -> ExtendedReal {
        self.p
    }

    pub fn q(&self) -> ExtendedReal {
        self.q
    }

    fn check_dim(&self, y: &DVector<f64>) -> Result<()> {
        if y.len() != self.map.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "expected a vector of length {}, got {}",
                self.map.ncols(),
                y.len()
            )));
        }
        Ok(())
    }

    /// `‖Ty‖_p − ‖Ty‖_q`; `y` is not normalized here.
    pub fn objective_eval(&self, y: &DVector<f64>) -> Result<f64> {
        self.check_dim(y)?;
        let z = &self.map * y;
        let zp = crate::norms::lp_norm(z.as_slice(), self.p)?;
        let zq = crate::norms::lp_norm(z.as_slice(), self.q)?;
        Ok(zp - zq)
    }

    /// `Tᵀ(g_p − g_q)` with `g_r` a subgradient of `‖·‖_r` at `Ty`.
    pub fn objective_subgradient(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(y)?;
        let z = &self.map * y;
        let gp = lp_subgradient(z.as_slice(), self.p)?;
        let gq = lp_subgradient(z.as_slice(), self.q)?;
        let diff = DVector::from_iterator(z.len(), gp.iter().zip(&gq).map(|(a, b)| a - b));
        Ok(self.map.transpose() * diff)
    }
}

impl SphereObjective for MappedBallObjective {
    fn dim(&self) -> usize {
        self.map.ncols()
    }

    fn eval(&self, y: &DVector<f64>) -> f64 {
        self.objective_eval(y).expect("dimension validated by caller")
    }

    fn subgradient(&self, y: &DVector<f64>) -> DVector<f64> {
        self.objective_subgradient(y).expect("dimension validated by caller")
    }

    fn hessian(&self, y: &DVector<f64>) -> Option<DMatrix<f64>> {
        let z = &self.map * y;
        let hp = crate::norms::lp_hessian(z.as_slice(), self.p)?;
        let hq = crate::norms::lp_hessian(z.as_slice(), self.q)?;
        Some(self.map.transpose() * (hp - hq) * &self.map)
    }

    fn rank_deficient(&self) -> bool {
        self.rank_deficient
    }

    /// Pseudo-inverse images of the sign vertices of the codomain:
    /// `T T†v = v` for full-row-rank `T`, so these starts land exactly on
    /// the rays where the image hits the sign-vertex directions that
    /// maximize the unmapped objective.
    fn warm_starts(&self, cap: usize) -> Vec<DVector<f64>> {
        let Some(pinv) = &self.pinv else { return Vec::new() };
        let m = self.map.nrows();
        if m > 20 {
            return Vec::new();
        }
        let mut out = Vec::new();
        let total = 1usize << m;
        for bits in 0..total {
            if out.len() >= cap {
                break;
            }
            let v = DVector::from_fn(m, |i, _| if bits >> i & 1 == 1 { 1.0 } else { -1.0 });
            let w = pinv * v;
            let n = w.norm();
            if n > 1e-12 {
                out.push(w / n);
            }
        }
        out
    }
}

/// The support-function difference `h_big(y) − h_small(y)` for a pair of
/// norm balls with `ball(small) ⊆ ball(big)`; its supremum over the sphere
/// is the Hausdorff distance between the balls. This is the objective
/// behind the `D`-norm landscape scans.
#[derive(Debug, Clone)]
pub struct DualNormDiffObjective {
    big: NormSpec,
    small: NormSpec,
}

impl DualNormDiffObjective {
    /// The ball of `container` must contain the ball of `contained`; the
    /// objective is then `h_container − h_contained ≥ 0` pointwise.
    pub fn new(container: NormSpec, contained: NormSpec) -> Result<Self> {
        crate::closed_form::BallPair::new(contained, container)?;
        Ok(DualNormDiffObjective { big: container, small: contained })
    }

    /// Convenience constructor for the `D`-norm pair with `k1 < k2`: the
    /// ball of `k2` sits inside the ball of `k1`, so the objective is
    /// `max{‖y‖₁/k1, ‖y‖∞} − max{‖y‖₁/k2, ‖y‖∞}`.
    pub fn d_norm_pair(dim: usize, k1: f64, k2: f64) -> Result<Self> {
        if k1 > k2 {
            return Err(Error::ArgumentOrder(format!(
                "d_norm_pair requires k1 <= k2, got k1 = {k1}, k2 = {k2}"
            )));
        }
        let big = NormSpec::d_norm(dim, k1)?;
        let small = NormSpec::d_norm(dim, k2)?;
        Self::new(big, small)
    }
}

impl SphereObjective for DualNormDiffObjective {
    fn dim(&self) -> usize {
        self.big.dim()
    }

    fn eval(&self, y: &DVector<f64>) -> f64 {
        let hb = self.big.dual(y.as_slice()).expect("dimension fixed at construction");
        let hs = self.small.dual(y.as_slice()).expect("dimension fixed at construction");
        hb - hs
    }

    fn subgradient(&self, y: &DVector<f64>) -> DVector<f64> {
        let gb = self.big.dual_subgradient(y.as_slice()).expect("dimension fixed");
        let gs = self.small.dual_subgradient(y.as_slice()).expect("dimension fixed");
        DVector::from_iterator(y.len(), gb.iter().zip(&gs).map(|(a, b)| a - b))
    }
}

/// The step-size rule of the ascent. Only Armijo backtracking is
/// implemented; the enum keeps the configuration explicit and serializable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    #[default]
    ArmijoBacktracking,
}

/// Configuration of the multistart ascent. Deterministic for a fixed seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphereOptConfig {
    pub starts: usize,
    pub max_iters: usize,
    pub step_rule: StepRule,
    pub tol_grad: f64,
    pub tol_step: f64,
    pub seed: u64,
    pub include_sign_vertex_starts: bool,
}

impl Default for SphereOptConfig {
    fn default() -> Self {
        SphereOptConfig {
            starts: 64,
            max_iters: 500,
            step_rule: StepRule::ArmijoBacktracking,
            tol_grad: 1e-9,
            tol_step: 1e-12,
            seed: 42,
            include_sign_vertex_starts: true,
        }
    }
}

impl SphereOptConfig {
    pub fn validate(&self) -> Result<()> {
        if self.starts < 1 {
            return Err(Error::Domain("starts must be >= 1".into()));
        }
        if !(self.tol_grad > 0.0) || !(self.tol_step > 0.0) {
            return Err(Error::Domain("tolerances must be positive".into()));
        }
        Ok(())
    }

    /// Same configuration with a different seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Result of a multistart maximization.
#[derive(Debug, Clone, Serialize)]
pub struct SphereOptReport {
    pub best_value: f64,
    pub best_point: Vec<f64>,
    pub starts_converged: usize,
    pub per_start_values: Vec<f64>,
    pub rank_warning: bool,
}

/// Final state of a single ascent run.
#[derive(Debug, Clone)]
pub(crate) struct StartOutcome {
    pub(crate) value: f64,
    pub(crate) point: DVector<f64>,
    pub(crate) converged: bool,
}

/// An orthonormal basis of the tangent space at unit `y`: the trailing
/// columns of the Householder reflector that sends `e₁` to `∓y`.
fn tangent_basis(y: &DVector<f64>) -> DMatrix<f64> {
    let d = y.len();
    let mut w = y.clone();
    w[0] += if y[0] >= 0.0 { 1.0 } else { -1.0 };
    let wn2 = w.dot(&w);
    DMatrix::from_fn(d, d - 1, |i, col| {
        let j = col + 1;
        (if i == j { 1.0 } else { 0.0 }) - 2.0 * w[j] * w[i] / wn2
    })
}

/// Damped Riemannian Newton polish from a point the first-order phase
/// settled at. Uses the analytic ambient Hessian restricted to the tangent
/// space; steps are accepted only on improvement. Quadratic convergence
/// near a smooth nondegenerate maximizer. Returns whether any step was
/// taken and whether the gradient tolerance (or step resolution) was met.
fn newton_polish<F: SphereObjective + ?Sized>(
    obj: &F,
    y: &mut DVector<f64>,
    fy: &mut f64,
    cfg: &SphereOptConfig,
) -> (bool, bool) {
    let d = y.len();
    if d < 2 {
        return (false, false);
    }
    let mut moved = false;
    let mut converged = false;
    for _ in 0..50 {
        let g = obj.subgradient(y);
        let radial = g.dot(y);
        let g_tan = &g - &*y * radial;
        if g_tan.norm() <= cfg.tol_grad {
            converged = true;
            break;
        }
        let Some(h) = obj.hessian(y) else { break };
        let basis = tangent_basis(y);
        let mut reduced = basis.transpose() * (&h - DMatrix::identity(d, d) * radial) * &basis;
        reduced = (&reduced + reduced.transpose()) * 0.5;
        let g_reduced = basis.transpose() * &g;
        // shift the reduced Hessian negative definite so the solve yields
        // an ascent direction even with indefinite curvature
        let eig_max = nalgebra::SymmetricEigen::new(reduced.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let shift = if eig_max > -1e-12 { eig_max + 1e-8 } else { 0.0 };
        let system = DMatrix::identity(d - 1, d - 1) * shift - &reduced;
        let Some(direction) = system.lu().solve(&g_reduced) else { break };
        let ambient = &basis * direction;
        let mut t = 1.0;
        let mut improved = false;
        while t >= cfg.tol_step {
            let mut y_new = &*y + &ambient * t;
            y_new /= y_new.norm();
            let f_new = obj.eval(&y_new);
            if f_new > *fy {
                let step = (&y_new - &*y).norm();
                *y = y_new;
                *fy = f_new;
                improved = true;
                moved = true;
                if step <= cfg.tol_step {
                    converged = true;
                }
                break;
            }
            t *= 0.5;
        }
        if !improved || converged {
            break;
        }
    }
    (moved, converged)
}

enum FirstOrderExit {
    GradTol,
    /// Armijo search found no improving step: nonsmooth stationarity under
    /// the fixed subgradient selection.
    SearchFailed,
    /// Improvements shrank below float resolution.
    Stalled,
    OutOfIters,
}

fn first_order_phase<F: SphereObjective + ?Sized>(
    obj: &F,
    y: &mut DVector<f64>,
    fy: &mut f64,
    cfg: &SphereOptConfig,
    budget: usize,
) -> FirstOrderExit {
    let mut stalled = 0u32;
    for _ in 0..budget {
        let g = obj.subgradient(y);
        let radial = g.dot(y);
        let g_tan = &g - &*y * radial;
        let gn = g_tan.norm();
        if gn <= cfg.tol_grad {
            return FirstOrderExit::GradTol;
        }
        // Armijo backtracking; only improving steps are accepted, so the
        // iteration is monotone.
        let mut t = 1.0;
        let mut improved = false;
        while t >= cfg.tol_step {
            let mut y_new = &*y + &g_tan * t;
            y_new /= y_new.norm();
            let f_new = obj.eval(&y_new);
            if f_new >= *fy + ARMIJO_C1 * t * gn * gn {
                let gain = f_new - *fy;
                *y = y_new;
                *fy = f_new;
                improved = true;
                if gain <= 1e-13 * (1.0 + fy.abs()) {
                    stalled += 1;
                } else {
                    stalled = 0;
                }
                break;
            }
            t *= 0.5;
        }
        if !improved {
            return FirstOrderExit::SearchFailed;
        }
        // hand stalled runs over to the polish phase early
        if stalled >= 3 {
            return FirstOrderExit::Stalled;
        }
    }
    FirstOrderExit::OutOfIters
}

pub(crate) fn ascend<F: SphereObjective + ?Sized>(
    obj: &F,
    start: DVector<f64>,
    cfg: &SphereOptConfig,
) -> StartOutcome {
    let mut y = start;
    let n = y.norm();
    if n > 0.0 {
        y /= n;
    }
    let mut fy = obj.eval(&y);
    let mut converged = false;
    // alternate the subgradient phase with the Newton polish; a start
    // counts as converged when the gradient tolerance is met or when
    // neither phase can improve the point any further
    for _ in 0..4 {
        let exit = first_order_phase(obj, &mut y, &mut fy, cfg, cfg.max_iters);
        if matches!(exit, FirstOrderExit::GradTol) {
            converged = true;
            break;
        }
        let (moved, grad_ok) = newton_polish(obj, &mut y, &mut fy, cfg);
        if grad_ok {
            converged = true;
            break;
        }
        if !moved {
            converged = !matches!(exit, FirstOrderExit::OutOfIters);
            break;
        }
    }
    StartOutcome { value: fy, point: y, converged }
}

fn sign_vertex_starts(d: usize, rng: &mut ChaCha8Rng) -> Vec<DVector<f64>> {
    let r = 1.0 / (d as f64).sqrt();
    if d <= 10 {
        (0..1usize << d)
            .map(|bits| DVector::from_fn(d, |i, _| if bits >> i & 1 == 1 { r } else { -r }))
            .collect()
    } else {
        (0..SIGN_VERTEX_CAP)
            .map(|_| DVector::from_fn(d, |_, _| if rng.random::<bool>() { r } else { -r }))
            .collect()
    }
}

fn uniform_sphere_start(d: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Multistart projected subgradient ascent of `obj` over the unit sphere.
///
/// The report's `best_value` is the maximum over all starts; ties are broken
/// by the earliest start index. Rank deficiency of the problem data shows up
/// as `rank_warning`, and `starts_converged == 0` signals that every start
/// ran out of iterations (the best value so far is still returned).
pub fn maximize_on_sphere<F: SphereObjective + ?Sized>(
    obj: &F,
    cfg: &SphereOptConfig,
) -> Result<SphereOptReport> {
    let outcomes = run_multistart(obj, cfg)?;
    reduce_outcomes(&outcomes, obj.rank_deficient())
}

/// The multistart phase alone: every start's final state, in start order.
pub(crate) fn run_multistart<F: SphereObjective + ?Sized>(
    obj: &F,
    cfg: &SphereOptConfig,
) -> Result<Vec<StartOutcome>> {
    cfg.validate()?;
    let d = obj.dim();
    if d == 0 {
        return Err(Error::DimensionMismatch("objective dimension must be positive".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts: Vec<DVector<f64>> = Vec::new();
    if cfg.include_sign_vertex_starts {
        starts.extend(sign_vertex_starts(d, &mut rng));
    }
    starts.extend(obj.warm_starts(SIGN_VERTEX_CAP));
    for _ in 0..cfg.starts {
        starts.push(uniform_sphere_start(d, &mut rng));
    }

    Ok(starts.into_par_iter().map(|s| ascend(obj, s, cfg)).collect())
}

/// Deterministic reduction of start outcomes into a report: max value with
/// earliest-start tie-break.
pub(crate) fn reduce_outcomes(
    outcomes: &[StartOutcome],
    rank_warning: bool,
) -> Result<SphereOptReport> {
    let mut best_value = f64::NEG_INFINITY;
    let mut best_point: Option<&DVector<f64>> = None;
    let mut starts_converged = 0;
    let mut per_start_values = Vec::with_capacity(outcomes.len());
    for out in outcomes {
        per_start_values.push(out.value);
        if out.converged {
            starts_converged += 1;
        }
        if out.value > best_value {
            best_value = out.value;
            best_point = Some(&out.point);
        }
    }
    let best_point = best_point
        .ok_or_else(|| Error::Domain("no valid start produced a finite value".into()))?;

    Ok(SphereOptReport {
        best_value,
        best_point: best_point.iter().cloned().collect(),
        starts_converged,
        per_start_values,
        rank_warning,
    })
}

/// A `(θ, φ, value)` grid of a three-dimensional sphere objective in
/// spherical coordinates, row-major over `θ ∈ [0, π]` (inclusive) by
/// `φ ∈ [0, 2π)` (right-open).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    pub values: Vec<f64>,
}

impl LandscapeGrid {
    pub fn theta(&self, i: usize) -> f64 {
        std::f64::consts::PI * i as f64 / (self.n_theta - 1) as f64
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * std::f64::consts::PI * j as f64 / self.n_phi as f64
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_phi + j]
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(θ, φ, value)` of the grid maximum (earliest in row-major order).
    pub fn argmax(&self) -> (f64, f64, f64) {
        let mut best = (0usize, 0usize, f64::NEG_INFINITY);
        for i in 0..self.n_theta {
            for j in 0..self.n_phi {
                let v = self.value(i, j);
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        (self.theta(best.0), self.phi(best.1), best.2)
    }

    /// CSV with a `theta,phi,value` header; floats are written in shortest
    /// round-trip form so parsing reproduces the grid exactly.
    pub fn to_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "theta,phi,value")?;
        for i in 0..self.n_theta {
            for j in 0..self.n_phi {
                writeln!(w, "{},{},{}", self.theta(i), self.phi(j), self.value(i, j))?;
            }
        }
        Ok(())
    }

    pub fn from_csv<R: std::io::BufRead>(r: R) -> Result<Self> {
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| Error::Domain(format!("csv read error: {e}")))?;
            if lineno == 0 {
                if line.trim() != "theta,phi,value" {
                    return Err(Error::Domain(format!(
                        "unexpected landscape csv header: '{line}'"
                    )));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let mut next = || -> Result<f64> {
                parts
                    .next()
                    .ok_or_else(|| Error::Domain(format!("short csv row at line {lineno}")))?
                    .trim()
                    .parse()
                    .map_err(|e| Error::Domain(format!("bad csv number at line {lineno}: {e}")))
            };
            rows.push((next()?, next()?, next()?));
        }
        let n_phi = rows.iter().take_while(|(t, _, _)| *t == 0.0).count();
        if n_phi == 0 || rows.len() % n_phi != 0 {
            return Err(Error::Domain("landscape csv rows do not form a grid".into()));
        }
        Ok(LandscapeGrid {
            n_theta: rows.len() / n_phi,
            n_phi,
            values: rows.into_iter().map(|(_, _, v)| v).collect(),
        })
    }
}

/// Evaluate a `d = 3` objective on the full spherical-coordinate grid,
/// `y = (sinθ cosφ, sinθ sinφ, cosθ)`.
pub fn landscape_grid<F: SphereObjective + ?Sized>(
    obj: &F,
    n_theta: usize,
    n_phi: usize,
) -> Result<LandscapeGrid> {
    if obj.dim() != 3 {
        return Err(Error::UnsupportedDimension(format!(
            "landscape grids require d = 3, got d = {}",
            obj.dim()
        )));
    }
    if n_theta < 2 || n_phi < 2 {
        return Err(Error::Domain("landscape grid needs n_theta, n_phi >= 2".into()));
    }
    let values: Vec<f64> = (0..n_theta)
        .into_par_iter()
        .flat_map_iter(|i| {
            let theta = std::f64::consts::PI * i as f64 / (n_theta - 1) as f64;
            let (st, ct) = (theta.sin(), theta.cos());
            (0..n_phi).map(move |j| {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
                let y = DVector::from_column_slice(&[st * phi.cos(), st * phi.sin(), ct]);
                (i, j, y)
            })
        })
        .map(|(_, _, y)| obj.eval(&y))
        .collect();
    Ok(LandscapeGrid { n_theta, n_phi, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn identity_obj(d: usize) -> MappedBallObjective {
        MappedBallObjective::new(
            DMatrix::identity(d, d),
            ExtendedReal::ONE,
            ExtendedReal::TWO,
        )
        .unwrap()
    }

    #[test]
    fn objective_eval_examples() {
        let obj = identity_obj(3);
        let e1 = DVector::from_column_slice(&[1.0, 0.0, 0.0]);
        assert_eq!(obj.objective_eval(&e1).unwrap(), 0.0);
        let r = 1.0 / 3f64.sqrt();
        let v = DVector::from_column_slice(&[r, r, r]);
        assert_relative_eq!(
            obj.objective_eval(&v).unwrap(),
            3f64.sqrt() - 1.0,
            max_relative = 1e-14
        );

        let t = DMatrix::from_row_slice(2, 3, &[2.0, 6.0, 0.0, 5.0, 0.0, 1.0]);
        let obj = MappedBallObjective::new(t, ExtendedReal::ONE, ExtendedReal::Finite(1.5)).unwrap();
        let e2 = DVector::from_column_slice(&[0.0, 1.0, 0.0]);
        // image (6, 0): every lp norm coincides on one-hot vectors
        assert_relative_eq!(obj.objective_eval(&e2).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn objective_subgradient_examples() {
        let obj = identity_obj(2);
        let y = DVector::from_column_slice(&[0.6, 0.8]);
        let g = obj.objective_subgradient(&y).unwrap();
        assert_relative_eq!(g[0], 0.4, max_relative = 1e-14);
        assert_relative_eq!(g[1], 0.2, max_relative = 1e-14);
        let e1 = DVector::from_column_slice(&[1.0, 0.0]);
        let g = obj.objective_subgradient(&e1).unwrap();
        assert_eq!((g[0], g[1]), (0.0, 0.0));
    }

    #[test]
    fn objective_rejects_bad_exponents() {
        let id = DMatrix::identity(3, 3);
        assert!(MappedBallObjective::new(id.clone(), ExtendedReal::TWO, ExtendedReal::TWO).is_err());
        assert!(MappedBallObjective::new(id.clone(), ExtendedReal::ONE, ExtendedReal::Infinity)
            .is_err());
        assert!(
            MappedBallObjective::new(id, ExtendedReal::Finite(0.5), ExtendedReal::TWO).is_err()
        );
    }

    #[test]
    fn rank_deficiency_is_flagged_not_fatal() {
        let t = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let obj = MappedBallObjective::new(t, ExtendedReal::ONE, ExtendedReal::TWO).unwrap();
        assert!(obj.rank_deficient());
        let report = maximize_on_sphere(&obj, &SphereOptConfig::default()).unwrap();
        assert!(report.rank_warning);
        assert!(report.best_value.is_finite());
    }

    #[test]
    fn zero_map_maximizes_to_zero() {
        let t = DMatrix::zeros(2, 2);
        let obj = MappedBallObjective::new(t, ExtendedReal::ONE, ExtendedReal::TWO).unwrap();
        let report = maximize_on_sphere(&obj, &SphereOptConfig::default()).unwrap();
        assert_eq!(report.best_value, 0.0);
    }

    #[test]
    fn identity_reaches_global_maximum() {
        let report = maximize_on_sphere(&identity_obj(3), &SphereOptConfig::default()).unwrap();
        assert_relative_eq!(report.best_value, 3f64.sqrt() - 1.0, epsilon = 1e-8);
        assert!(!report.rank_warning);
        assert!(report.starts_converged > 0);
        let max = report.per_start_values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(report.best_value, max);
        let norm: f64 = report.best_point.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert_relative_eq!(norm, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn reports_are_deterministic_for_fixed_seed() {
        let t = DMatrix::from_row_slice(2, 3, &[2.0, 6.0, 0.0, 5.0, 0.0, 1.0]);
        let obj = MappedBallObjective::new(t, ExtendedReal::ONE, ExtendedReal::Finite(1.5)).unwrap();
        let cfg = SphereOptConfig { starts: 8, ..Default::default() };
        let a = maximize_on_sphere(&obj, &cfg).unwrap();
        let b = maximize_on_sphere(&obj, &cfg).unwrap();
        assert_eq!(a.best_value.to_bits(), b.best_value.to_bits());
        assert_eq!(a.per_start_values, b.per_start_values);
        assert_eq!(a.best_point, b.best_point);
    }

    #[test]
    fn dual_norm_pair_objective() {
        let obj = DualNormDiffObjective::d_norm_pair(3, 1.7, 2.9).unwrap();
        let report = maximize_on_sphere(&obj, &SphereOptConfig::default()).unwrap();
        assert_relative_eq!(report.best_value, 120.0 * 3f64.sqrt() / 493.0, epsilon = 1e-9);
        assert!(DualNormDiffObjective::d_norm_pair(3, 2.9, 1.7).is_err());
    }

    #[test]
    fn landscape_requires_d3_and_valid_shape() {
        let obj = identity_obj(2);
        assert!(matches!(
            landscape_grid(&obj, 10, 10),
            Err(Error::UnsupportedDimension(_))
        ));
        let obj = identity_obj(3);
        assert!(landscape_grid(&obj, 1, 10).is_err());
    }

    #[test]
    fn landscape_grid_csv_round_trip() {
        let obj = identity_obj(3);
        let grid = landscape_grid(&obj, 7, 9).unwrap();
        let mut buf = Vec::new();
        grid.to_csv(&mut buf).unwrap();
        let parsed = LandscapeGrid::from_csv(std::io::BufReader::new(&buf[..])).unwrap();
        assert_eq!(parsed, grid);
    }
}
