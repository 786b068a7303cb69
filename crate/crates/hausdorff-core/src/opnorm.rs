//! Induced `2→q` operator norms and the operator-norm upper bound on the
//! mapped-ball Hausdorff distance.
//!
//! `‖T‖_{2→2}` is the largest singular value, computed here through a
//! symmetric eigensolve of `TᵀT`. For elementwise-nonnegative `T` and
//! `1 < q < 2`, `‖T‖_{2→q}` equals the optimal value of the concave program
//!
//! ```text
//! max  sqrt(‖dg(T X Tᵀ)‖_{q/2})   subject to  X ⪰ 0,  ‖dg(X)‖₁ ≤ 1,
//! ```
//!
//! solved by projected gradient ascent on the spectrahedron
//! `{X ⪰ 0, trace(X) ≤ 1}`. Everywhere else the defining supremum
//! `sup{‖Tx‖_q : ‖x‖₂ = 1}` is attacked numerically, which yields a lower
//! estimate; bounds assembled from such estimates are flagged as estimated.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::norms::{lp_subgradient, ExtendedReal};
use crate::sphere_opt::{maximize_on_sphere, SphereObjective, SphereOptConfig};

/// Diagonal-entry floor used inside the convex-program gradient; keeps the
/// `q/2` power differentiable without moving the optimum beyond tolerance.
const DIAG_FLOOR: f64 = 1e-14;
/// Absolute entrywise tolerance of the isometry tests.
const ISOMETRY_TOL: f64 = 1e-10;

/// Provenance of an operator-norm value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OpNormKind {
    /// Exact up to floating point (singular value computation).
    Exact,
    /// A numerical lower estimate of the defining supremum.
    LowerEstimate,
    /// The optimal value of the convex program for nonnegative `T`,
    /// `1 < q < 2`; equal to the norm for such data.
    ConvexExact,
}

/// An operator-norm value with provenance and, when available, a unit vector
/// achieving it.
#[derive(Debug, Clone, Serialize)]
pub struct OpNormResult {
    pub value: f64,
    pub kind: OpNormKind,
    pub certificate: Option<Vec<f64>>,
}

/// `‖T‖_{2→2} = σ_max(T)` with the maximizing right singular vector as
/// certificate.
pub fn two_to_two(t: &DMatrix<f64>) -> Result<OpNormResult> {
    if t.is_empty() {
        return Err(Error::DimensionMismatch("two_to_two requires a nonempty matrix".into()));
    }
    let gram = t.transpose() * t;
    let eig = SymmetricEigen::new(gram);
    let mut max_idx = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] > eig.eigenvalues[max_idx] {
            max_idx = i;
        }
    }
    let value = eig.eigenvalues[max_idx].max(0.0).sqrt();
    let mut cert: DVector<f64> = eig.eigenvectors.column(max_idx).into();
    // deterministic sign convention
    if let Some(lead) = cert.iter().find(|v| v.abs() > 1e-12) {
        if *lead < 0.0 {
            cert = -cert;
        }
    }
    Ok(OpNormResult {
        value,
        kind: OpNormKind::Exact,
        certificate: Some(cert.iter().cloned().collect()),
    })
}

/// The image-norm objective `x ↦ ‖Tx‖_q` used for lower estimates.
struct ImageNormObjective {
    map: DMatrix<f64>,
    q: ExtendedReal,
    pinv: Option<DMatrix<f64>>,
}

impl SphereObjective for ImageNormObjective {
    fn dim(&self) -> usize {
        self.map.ncols()
    }

    fn eval(&self, y: &DVector<f64>) -> f64 {
        let z = &self.map * y;
        crate::norms::lp_norm(z.as_slice(), self.q).expect("q validated at construction")
    }

    fn subgradient(&self, y: &DVector<f64>) -> DVector<f64> {
        let z = &self.map * y;
        let g = lp_subgradient(z.as_slice(), self.q).expect("q validated at construction");
        self.map.transpose() * DVector::from_vec(g)
    }

    fn hessian(&self, y: &DVector<f64>) -> Option<DMatrix<f64>> {
        let z = &self.map * y;
        let h = crate::norms::lp_hessian(z.as_slice(), self.q)?;
        Some(self.map.transpose() * h * &self.map)
    }

    fn warm_starts(&self, cap: usize) -> Vec<DVector<f64>> {
        let Some(pinv) = &self.pinv else { return Vec::new() };
        let m = self.map.nrows();
        if m > 20 {
            return Vec::new();
        }
        let mut out = Vec::new();
        for bits in 0..1usize << m {
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

/// Numerical lower estimate of `‖T‖_{2→q}` by multistart ascent of the
/// defining supremum over the unit sphere.
pub fn two_to_q_lower(
    t: &DMatrix<f64>,
    q: ExtendedReal,
    cfg: &SphereOptConfig,
) -> Result<OpNormResult> {
    if t.is_empty() {
        return Err(Error::DimensionMismatch("two_to_q_lower requires a nonempty matrix".into()));
    }
    if !(q.as_f64() >= 1.0) {
        return Err(Error::Domain(format!("two_to_q_lower requires q >= 1, got q = {q}")));
    }
    let sigma_max = two_to_two(t)?.value;
    let obj = ImageNormObjective {
        pinv: t.clone().pseudo_inverse(1e-10 * sigma_max.max(1.0)).ok(),
        map: t.clone(),
        q,
    };
    let report = maximize_on_sphere(&obj, cfg)?;
    Ok(OpNormResult {
        value: report.best_value,
        kind: OpNormKind::LowerEstimate,
        certificate: Some(report.best_point),
    })
}

/// Configuration of the spectrahedron projected-gradient solver.
#[derive(Debug, Clone, Serialize)]
pub struct ConvexSolverConfig {
    pub max_iters: usize,
    /// Stop once the relative objective change stays below this...
    pub rel_tol: f64,
    /// ...for this many consecutive accepted iterations.
    pub stall_iters: usize,
    pub record_iterates: bool,
}

impl Default for ConvexSolverConfig {
    fn default() -> Self {
        ConvexSolverConfig {
            max_iters: 5000,
            rel_tol: 1e-10,
            stall_iters: 20,
            record_iterates: false,
        }
    }
}

/// A feasible point of `{X ⪰ 0, trace(X) ≤ 1}` as produced by projection.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrahedronIterate {
    pub x: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub trace: f64,
}

/// Trace of a convex solve: objective history and, when recording was
/// requested, every post-projection iterate.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ConvexSolveTrace {
    pub objective_history: Vec<f64>,
    pub iterates: Vec<SpectrahedronIterate>,
    pub iterations: usize,
}

fn matrix_rows(x: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..x.nrows())
        .map(|i| (0..x.ncols()).map(|j| x[(i, j)]).collect())
        .collect()
}

/// Euclidean projection onto `{X ⪰ 0, trace(X) ≤ 1}`: eigenvalues are
/// clipped at zero and, if their sum still exceeds one, projected onto the
/// simplex `{λ ≥ 0, Σλ = 1}`. Returns the reconstruction and its spectrum.
fn project_spectrahedron(x: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let sym = (x + x.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut lam: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let total: f64 = lam.iter().sum();
    if total > 1.0 {
        let mut sorted = lam.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).expect("eigenvalues are finite"));
        let mut theta = 0.0;
        let mut cumulative = 0.0;
        for (i, v) in sorted.iter().enumerate() {
            cumulative += v;
            let candidate = (cumulative - 1.0) / (i + 1) as f64;
            if v - candidate > 0.0 {
                theta = candidate;
            }
        }
        for l in lam.iter_mut() {
            *l = (*l - theta).max(0.0);
        }
    }
    let scaled = eig.eigenvectors.clone() * DMatrix::from_diagonal(&DVector::from_vec(lam.clone()));
    (scaled * eig.eigenvectors.transpose(), lam)
}

fn convex_objective(t: &DMatrix<f64>, x: &DMatrix<f64>, s: f64) -> f64 {
    let image = t * x * t.transpose();
    let sum: f64 = (0..image.nrows()).map(|i| image[(i, i)].max(0.0).powf(s)).sum();
    sum.powf(1.0 / s).sqrt()
}

fn convex_gradient(t: &DMatrix<f64>, x: &DMatrix<f64>, s: f64) -> DMatrix<f64> {
    let image = t * x * t.transpose();
    let v: Vec<f64> = (0..image.nrows()).map(|i| image[(i, i)].max(DIAG_FLOOR)).collect();
    let phi = v.iter().map(|vi| vi.powf(s)).sum::<f64>().powf(1.0 / s);
    // d phi / d v_i = phi^{1-s} v_i^{s-1};  v_i = t_i X t_iᵀ
    let weights: Vec<f64> = v.iter().map(|vi| phi.powf(1.0 - s) * vi.powf(s - 1.0)).collect();
    let mut grad = DMatrix::zeros(x.nrows(), x.ncols());
    for (i, w) in weights.iter().enumerate() {
        let row = t.row(i).transpose();
        grad += (&row * row.transpose()) * *w;
    }
    grad / (2.0 * phi.sqrt())
}

/// Solve the convex program for `‖T‖_{2→q}` with elementwise-nonnegative `T`
/// and `1 < q < 2`, returning the optimal value and the solve trace.
pub fn two_to_q_nonneg_convex_traced(
    t: &DMatrix<f64>,
    q: f64,
    cfg: &ConvexSolverConfig,
) -> Result<(OpNormResult, ConvexSolveTrace)> {
    if t.is_empty() {
        return Err(Error::DimensionMismatch("convex solver requires a nonempty matrix".into()));
    }
    if t.iter().any(|v| *v < 0.0) {
        return Err(Error::Precondition(
            "the convex program requires an elementwise nonnegative matrix".into(),
        ));
    }
    if !(q > 1.0 && q < 2.0) {
        return Err(Error::Domain(format!(
            "the convex program requires 1 < q < 2, got q = {q}"
        )));
    }
    let d = t.ncols();
    let s = q / 2.0;
    let mut x = DMatrix::identity(d, d) / d as f64;
    let mut f = convex_objective(t, &x, s);
    let mut trace = ConvexSolveTrace {
        objective_history: vec![f],
        ..Default::default()
    };
    if cfg.record_iterates {
        let lam: Vec<f64> = (0..d).map(|_| 1.0 / d as f64).collect();
        trace.iterates.push(SpectrahedronIterate {
            x: matrix_rows(&x),
            trace: lam.iter().sum(),
            eigenvalues: lam,
        });
    }
    // step 1/L with L found by backtracking; the step doubles after each
    // acceptance so the estimate tracks local curvature
    let mut step = 1.0;
    let mut stall = 0;
    for iter in 0..cfg.max_iters {
        trace.iterations = iter + 1;
        let g = convex_gradient(t, &x, s);
        let mut accepted = false;
        let mut candidate = x.clone();
        let mut lam = Vec::new();
        let mut f_new = f;
        for _ in 0..60 {
            let (proj, spectrum) = project_spectrahedron(&(&x + &g * step));
            let val = convex_objective(t, &proj, s);
            if val >= f {
                candidate = proj;
                lam = spectrum;
                f_new = val;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        let rel_change = (f_new - f) / f.abs().max(f64::MIN_POSITIVE);
        x = candidate;
        f = f_new;
        step = (step * 2.0).min(1e6);
        trace.objective_history.push(f);
        if cfg.record_iterates {
            trace.iterates.push(SpectrahedronIterate {
                x: matrix_rows(&x),
                trace: lam.iter().sum(),
                eigenvalues: lam,
            });
        }
        if rel_change < cfg.rel_tol {
            stall += 1;
            if stall >= cfg.stall_iters {
                break;
            }
        } else {
            stall = 0;
        }
    }
    Ok((
        OpNormResult { value: f, kind: OpNormKind::ConvexExact, certificate: None },
        trace,
    ))
}

/// [`two_to_q_nonneg_convex_traced`] without iterate recording.
pub fn two_to_q_nonneg_convex(
    t: &DMatrix<f64>,
    q: f64,
    cfg: &ConvexSolverConfig,
) -> Result<OpNormResult> {
    two_to_q_nonneg_convex_traced(t, q, cfg).map(|(r, _)| r)
}

/// Which `2→q` evaluator backs a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OpNormMethod {
    /// Singular value; only valid at `q = 2`.
    Exact2,
    /// Convex program; nonnegative `T` with `1 < q < 2`.
    ConvexNonneg,
    /// Multistart lower estimate of the supremum; always applicable.
    LowerEstimate,
}

/// Pick the strongest applicable evaluator for the given data.
pub fn auto_method(t: &DMatrix<f64>, q: ExtendedReal) -> OpNormMethod {
    if q == ExtendedReal::TWO {
        OpNormMethod::Exact2
    } else if q.is_finite()
        && q.as_f64() > 1.0
        && q.as_f64() < 2.0
        && t.iter().all(|v| *v >= 0.0)
    {
        OpNormMethod::ConvexNonneg
    } else {
        OpNormMethod::LowerEstimate
    }
}

/// The operator-norm upper bound `(m^{1/p−1/q} − 1)·‖T‖_{2→q}` on the
/// mapped-ball Hausdorff distance, with the provenance of the norm term.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub value: f64,
    pub prefactor: f64,
    pub opnorm: f64,
    pub opnorm_kind: OpNormKind,
    /// True when the norm term is itself a lower estimate, which makes the
    /// "bound" an estimate rather than a certification.
    pub estimated: bool,
}

/// Evaluate the upper bound for `1 ≤ p < q < ∞` using the selected
/// operator-norm method.
pub fn prop2_bound(
    t: &DMatrix<f64>,
    p: ExtendedReal,
    q: ExtendedReal,
    method: OpNormMethod,
    sphere_cfg: &SphereOptConfig,
    convex_cfg: &ConvexSolverConfig,
) -> Result<BoundReport> {
    if t.is_empty() {
        return Err(Error::DimensionMismatch("prop2_bound requires a nonempty matrix".into()));
    }
    if !(p.as_f64() >= 1.0) {
        return Err(Error::Domain(format!("bound requires p >= 1, got p = {p}")));
    }
    if !q.is_finite() {
        return Err(Error::Domain("bound requires q < inf".into()));
    }
    if !(p < q) {
        return Err(Error::Domain(format!(
            "bound requires p < q, got p = {p}, q = {q}"
        )));
    }
    let norm = match method {
        OpNormMethod::Exact2 => {
            if q != ExtendedReal::TWO {
                return Err(Error::Domain(format!(
                    "the exact method applies only at q = 2, got q = {q}"
                )));
            }
            two_to_two(t)?
        }
        OpNormMethod::ConvexNonneg => two_to_q_nonneg_convex(t, q.as_f64(), convex_cfg)?,
        OpNormMethod::LowerEstimate => two_to_q_lower(t, q, sphere_cfg)?,
    };
    let m = t.nrows() as f64;
    let prefactor = m.powf(p.recip() - q.recip()) - 1.0;
    Ok(BoundReport {
        value: prefactor * norm.value,
        prefactor,
        opnorm: norm.value,
        opnorm_kind: norm.kind,
        estimated: norm.kind == OpNormKind::LowerEstimate,
    })
}

/// Which clause of the isometry characterization applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IsometryClass {
    /// `q = 2`: `TᵀT = I` (column-orthonormal).
    ColumnOrthonormal,
    /// `q ≠ 2`, square: a signed permutation matrix.
    SignedPermutation,
    /// `q ≠ 2`, rectangular: rows permute to a diagonal of blocks, one per
    /// column, each with unit `q`-norm.
    PermutedDiagonal,
}

/// Result of the isometry test for `T : ℓq(R^d) → ℓq(R^m)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IsometryCheck {
    pub is_isometry: bool,
    pub class: Option<IsometryClass>,
}

/// Test whether `T` is an `ℓq` isometry, and which structural clause holds.
///
/// At `q = 2` this checks `‖TᵀT − I‖_max ≤ 1e-10`. For `q ≠ 2` it checks
/// that some row permutation makes `T` diagonal-per-column with unit-`q`-norm
/// columns, which reduces to: every row has at most one entry above the
/// tolerance and every column has `q`-norm 1.
pub fn isometry_check(t: &DMatrix<f64>, q: ExtendedReal) -> IsometryCheck {
    if t.is_empty() {
        return IsometryCheck { is_isometry: false, class: None };
    }
    let (m, d) = (t.nrows(), t.ncols());
    if q == ExtendedReal::TWO {
        let gram = t.transpose() * t;
        let mut max_dev = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let target = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((gram[(i, j)] - target).abs());
            }
        }
        if max_dev <= ISOMETRY_TOL {
            return IsometryCheck {
                is_isometry: true,
                class: Some(IsometryClass::ColumnOrthonormal),
            };
        }
        return IsometryCheck { is_isometry: false, class: None };
    }

    // q != 2: disjoint column supports (at most one nonzero per row) with
    // unit q-norm columns
    for i in 0..m {
        let nonzeros = (0..d).filter(|j| t[(i, *j)].abs() > ISOMETRY_TOL).count();
        if nonzeros > 1 {
            return IsometryCheck { is_isometry: false, class: None };
        }
    }
    for j in 0..d {
        let col: Vec<f64> = (0..m).map(|i| t[(i, j)]).collect();
        match crate::norms::lp_norm(&col, q) {
            Ok(norm) if (norm - 1.0).abs() <= ISOMETRY_TOL => {}
            _ => return IsometryCheck { is_isometry: false, class: None },
        }
    }
    let class = if m == d {
        IsometryClass::SignedPermutation
    } else {
        IsometryClass::PermutedDiagonal
    };
    IsometryCheck { is_isometry: true, class: Some(class) }
}
