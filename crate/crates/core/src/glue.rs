//! Finite-dimensional gluing sandbox.
//!
//! A [`FredholmSystem`] is a smooth map `t: R^N -> R^F` on a ball of radius
//! `K1`; an [`ApproxChart`] is a family of approximate zeros `x(s)` with
//! right inverses `Q(s)` of the linearization. The corrector solves
//! `t(x + Q xi) = 0` by Picard iteration and the probes sample the chart
//! map `Phi(s, eta) = x(s) + Q(s) eta`.
//!
//! Everything here is `f64`; constants are sampled estimates, not bounds.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Tolerance on `||L_x Q_x - Id||` for a valid chart.
pub const RIGHT_INVERSE_TOL: f64 = 1e-8;
/// Bound on `||D Phi||` in the chart-map probe.
pub const CHART_NORM_BOUND: f64 = 2.0;
/// Separation factor used for `eps1 << delta1 << C2`.
pub const SEPARATION: f64 = 10.0;
/// Consecutive residual increases treated as divergence.
pub const DIVERGENCE_STEPS: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GlueError {
    #[error("non-finite value in {location}")]
    NonFinite { location: String },
    #[error("iteration diverged: residual grew for {DIVERGENCE_STEPS} consecutive steps")]
    Divergence { history: Vec<IterRow> },
    #[error("no convergence within {max_iter} iterations (residual {residual:e})")]
    NonConvergence { max_iter: usize, residual: f64, history: Vec<IterRow> },
    #[error("invalid input: {0}")]
    Input(String),
}

pub trait FredholmSystem {
    fn name(&self) -> String;
    fn dim_b(&self) -> usize;
    fn dim_f(&self) -> usize;
    fn evaluate(&self, x: &Vector) -> Vector;
    /// Analytic Jacobian `L_x` (F x N), when available.
    fn jacobian(&self, _x: &Vector) -> Option<Matrix> {
        None
    }
    /// Radius `K1` of the working ball `W`.
    fn domain_bound(&self) -> f64;
}

/// Central differences with step `h = 1e-6 (1 + ||x||)`.
pub fn fd_jacobian(sys: &dyn FredholmSystem, x: &Vector) -> Matrix {
    let h = 1e-6 * (1.0 + x.norm());
    let mut j = Matrix::zeros(sys.dim_f(), sys.dim_b());
    for i in 0..sys.dim_b() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[i] += h;
        xm[i] -= h;
        let col = (sys.evaluate(&xp) - sys.evaluate(&xm)) / (2.0 * h);
        j.set_column(i, &col);
    }
    j
}

/// `L_x`: the analytic Jacobian if supplied, otherwise finite differences.
pub fn linearization(sys: &dyn FredholmSystem, x: &Vector) -> Matrix {
    sys.jacobian(x).unwrap_or_else(|| fd_jacobian(sys, x))
}

/// `N_x(v) = t(x + v) - t(x) - L_x v`.
pub fn remainder(sys: &dyn FredholmSystem, x: &Vector, v: &Vector) -> Vector {
    sys.evaluate(&(x + v)) - sys.evaluate(x) - linearization(sys, x) * v
}

pub trait ApproxChart {
    /// Chart dimension `d`.
    fn dim(&self) -> usize;
    fn param(&self, s: &Vector) -> Vector;
    /// Right inverse `Q(s)` of `L_{x(s)}`, an N x F matrix.
    fn right_inverse(&self, s: &Vector) -> Matrix;
    /// A random parameter in the chart domain.
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vector;
}

/// Largest singular value.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

fn check_finite(v: &Vector, location: &str) -> Result<(), GlueError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(GlueError::NonFinite { location: location.to_string() })
    }
}

fn fmt_vec(v: &Vector) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

/// `d x / d s` by central differences, N x d.
pub fn chart_tangent(chart: &dyn ApproxChart, s: &Vector) -> Matrix {
    let h = 1e-6 * (1.0 + s.norm());
    let n = chart.param(s).len();
    let mut t = Matrix::zeros(n, chart.dim());
    for i in 0..chart.dim() {
        let mut sp = s.clone();
        let mut sm = s.clone();
        sp[i] += h;
        sm[i] -= h;
        t.set_column(i, &((chart.param(&sp) - chart.param(&sm)) / (2.0 * h)));
    }
    t
}

// ---------------------------------------------------------------------------
// Builtin models

/// `t(x) = ||x||^2 - 1` on R^3.
#[derive(Debug, Clone, Copy)]
pub struct Sphere;

impl FredholmSystem for Sphere {
    fn name(&self) -> String {
        "sphere".into()
    }
    fn dim_b(&self) -> usize {
        3
    }
    fn dim_f(&self) -> usize {
        1
    }
    fn evaluate(&self, x: &Vector) -> Vector {
        Vector::from_element(1, x.norm_squared() - 1.0)
    }
    fn jacobian(&self, x: &Vector) -> Option<Matrix> {
        Some(Matrix::from_row_slice(1, 3, &[2.0 * x[0], 2.0 * x[1], 2.0 * x[2]]))
    }
    fn domain_bound(&self) -> f64 {
        2.0
    }
}

/// Spherical coordinates `(theta, phi)` at radius `scale`, with
/// `theta` in `[0.3, pi - 0.3]` and `Q_x = x / (2 ||x||^2)`.
#[derive(Debug, Clone, Copy)]
pub struct SphereChart {
    pub scale: f64,
}

impl ApproxChart for SphereChart {
    fn dim(&self) -> usize {
        2
    }
    fn param(&self, s: &Vector) -> Vector {
        let (th, ph) = (s[0], s[1]);
        Vector::from_vec(vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]) * self.scale
    }
    fn right_inverse(&self, s: &Vector) -> Matrix {
        let x = self.param(s);
        let q = &x / (2.0 * x.norm_squared());
        Matrix::from_column_slice(3, 1, q.as_slice())
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vector {
        Vector::from_vec(vec![rng.gen_range(0.3..PI - 0.3), rng.gen_range(0.0..2.0 * PI)])
    }
}

/// `t(x, y) = xy - tau`, the smoothing of a node.
#[derive(Debug, Clone, Copy)]
pub struct NodeSmoothing {
    pub tau: f64,
}

impl FredholmSystem for NodeSmoothing {
    fn name(&self) -> String {
        format!("node(tau={})", self.tau)
    }
    fn dim_b(&self) -> usize {
        2
    }
    fn dim_f(&self) -> usize {
        1
    }
    fn evaluate(&self, x: &Vector) -> Vector {
        Vector::from_element(1, x[0] * x[1] - self.tau)
    }
    fn jacobian(&self, x: &Vector) -> Option<Matrix> {
        Some(Matrix::from_row_slice(1, 2, &[x[1], x[0]]))
    }
    fn domain_bound(&self) -> f64 {
        3.0
    }
}

/// For `tau > 0`: the hyperbola `(sqrt(tau) e^s, sqrt(tau) e^-s)` times
/// `scale`, `s` in `[-0.5, 0.5]`. For `tau = 0`: the branch `(s, 0)` of the
/// cross with `s` in `[0.3, 1]`. In both cases `Q = (y, x) / (x^2 + y^2)`.
#[derive(Debug, Clone, Copy)]
pub struct NodeChart {
    pub tau: f64,
    pub scale: f64,
}

impl ApproxChart for NodeChart {
    fn dim(&self) -> usize {
        1
    }
    fn param(&self, s: &Vector) -> Vector {
        let p = if self.tau > 0.0 {
            let r = self.tau.sqrt();
            vec![r * s[0].exp(), r * (-s[0]).exp()]
        } else {
            vec![s[0], 0.0]
        };
        Vector::from_vec(p) * self.scale
    }
    fn right_inverse(&self, s: &Vector) -> Matrix {
        let p = self.param(s);
        let d = p.norm_squared();
        Matrix::from_column_slice(2, 1, &[p[1] / d, p[0] / d])
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vector {
        let s = if self.tau > 0.0 { rng.gen_range(-0.5..0.5) } else { rng.gen_range(0.3..1.0) };
        Vector::from_element(1, s)
    }
}

/// `t(x) = A x - b` with `A = [I | M]` (2 x 4) and `M`, `b` seeded.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub a: Matrix,
    pub b: Vector,
}

impl LinearSystem {
    pub fn seeded(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Matrix::zeros(2, 4);
        a[(0, 0)] = 1.0;
        a[(1, 1)] = 1.0;
        for i in 0..2 {
            for j in 2..4 {
                a[(i, j)] = rng.gen_range(-0.5..0.5);
            }
        }
        let b = Vector::from_vec(vec![rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)]);
        LinearSystem { a, b }
    }

    /// `A^T (A A^T)^-1`.
    pub fn right_inverse(&self) -> Matrix {
        let aat = &self.a * self.a.transpose();
        self.a.transpose() * aat.try_inverse().expect("A has full row rank")
    }
}

impl FredholmSystem for LinearSystem {
    fn name(&self) -> String {
        "linear".into()
    }
    fn dim_b(&self) -> usize {
        self.a.ncols()
    }
    fn dim_f(&self) -> usize {
        self.a.nrows()
    }
    fn evaluate(&self, x: &Vector) -> Vector {
        &self.a * x - &self.b
    }
    fn jacobian(&self, _x: &Vector) -> Option<Matrix> {
        Some(self.a.clone())
    }
    fn domain_bound(&self) -> f64 {
        10.0
    }
}

/// `x(s) = scale (x_p + K s)` with `x_p` the least-norm solution and `K` an
/// orthonormal basis of `ker A`; `s` in `[-1, 1]^2`.
#[derive(Debug, Clone)]
pub struct LinearChart {
    pub particular: Vector,
    pub kernel: Matrix,
    pub q: Matrix,
    pub scale: f64,
}

impl LinearChart {
    pub fn new(sys: &LinearSystem, scale: f64) -> Self {
        let q = sys.right_inverse();
        let particular = &q * &sys.b;
        let svd = sys.a.clone().svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let n = sys.a.ncols();
        // Rows of the full V^T beyond the rank span the kernel; complete via
        // projection of the standard basis.
        let rank = sys.a.nrows();
        let row_space = vt.rows(0, rank).transpose();
        let proj = Matrix::identity(n, n) - &row_space * row_space.transpose();
        let kernel = proj.svd(true, false).u.expect("requested U").columns(0, n - rank).into_owned();
        LinearChart { particular, kernel, q, scale }
    }
}

impl ApproxChart for LinearChart {
    fn dim(&self) -> usize {
        self.kernel.ncols()
    }
    fn param(&self, s: &Vector) -> Vector {
        (&self.particular + &self.kernel * s) * self.scale
    }
    fn right_inverse(&self, _s: &Vector) -> Matrix {
        self.q.clone()
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vector {
        Vector::from_iterator(self.dim(), (0..self.dim()).map(|_| rng.gen_range(-1.0..1.0)))
    }
}

/// Wraps a chart and zeroes one column of `Q`; used to exhibit collisions.
pub struct DegenerateChart<C> {
    pub inner: C,
    pub column: usize,
}

impl<C: ApproxChart> ApproxChart for DegenerateChart<C> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn param(&self, s: &Vector) -> Vector {
        self.inner.param(s)
    }
    fn right_inverse(&self, s: &Vector) -> Matrix {
        let mut q = self.inner.right_inverse(s);
        q.column_mut(self.column).fill(0.0);
        q
    }
    fn sample(&self, rng: &mut ChaCha8Rng) -> Vector {
        self.inner.sample(rng)
    }
}

pub struct Model {
    pub system: Box<dyn FredholmSystem>,
    pub chart: Box<dyn ApproxChart>,
}

pub const MODEL_NAMES: [&str; 3] = ["sphere", "node", "linear"];
pub const LINEAR_SEED: u64 = 7;

/// Builds a builtin model by name. `tau` only affects `node`.
pub fn model(name: &str, tau: f64, scale: f64) -> Result<Model, GlueError> {
    if !(scale.is_finite() && scale > 0.0) {
        return Err(GlueError::Input(format!("scale must be positive, got {scale}")));
    }
    match name {
        "sphere" => Ok(Model { system: Box::new(Sphere), chart: Box::new(SphereChart { scale }) }),
        "node" => {
            if !(tau.is_finite() && tau >= 0.0) {
                return Err(GlueError::Input(format!("tau must be non-negative, got {tau}")));
            }
            Ok(Model { system: Box::new(NodeSmoothing { tau }), chart: Box::new(NodeChart { tau, scale }) })
        }
        "linear" => {
            let sys = LinearSystem::seeded(LINEAR_SEED);
            let chart = LinearChart::new(&sys, scale);
            Ok(Model { system: Box::new(sys), chart: Box::new(chart) })
        }
        other => Err(GlueError::Input(format!("unknown model `{other}` (expected one of {MODEL_NAMES:?})"))),
    }
}

/// Sphere (exact chart), node smoothing at `tau = 0.25` and the seeded
/// linear system.
pub fn builtin_models() -> Vec<Model> {
    vec![
        model("sphere", 0.0, 1.0).unwrap(),
        model("node", 0.25, 1.0).unwrap(),
        model("linear", 0.0, 1.0).unwrap(),
    ]
}

// ---------------------------------------------------------------------------
// Constants

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub samples: usize,
    pub delta1: f64,
    pub seed: u64,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions { samples: 200, delta1: 0.04, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlueConstants {
    pub c1: f64,
    pub c2: f64,
    pub eps1: f64,
    pub delta1: f64,
    pub k1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub value: f64,
    pub pass: bool,
    /// Chart parameter (or point) where the value was attained.
    pub witness: Vec<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub constants: GlueConstants,
    pub conditions: Vec<ConditionCheck>,
    /// `SEPARATION * eps1 <= delta1` and `SEPARATION * delta1 <= C2`.
    pub ordering_ok: bool,
    /// Largest `||L_x Q_x - Id||` seen.
    pub right_inverse_error: f64,
}

struct Max {
    value: f64,
    witness: Vec<f64>,
}

impl Max {
    fn new() -> Self {
        Max { value: 0.0, witness: Vec::new() }
    }
    fn offer(&mut self, value: f64, witness: &Vector) {
        if value > self.value || self.witness.is_empty() {
            self.value = value;
            self.witness = witness.iter().copied().collect();
        }
    }
}

fn random_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vector {
    let v = Vector::from_iterator(dim, (0..dim).map(|_| rng.gen_range(-1.0..1.0)));
    let n = v.norm();
    if n == 0.0 {
        return v;
    }
    v * (radius * rng.gen_range(0.0..1.0f64).powf(1.0 / dim as f64) / n)
}

/// Operator norm of `L_x` restricted to the tangent space of the chart.
fn tangential_norm(l: &Matrix, tangent: &Matrix) -> f64 {
    let svd = tangent.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let keep: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > 1e-12).collect();
    if keep.is_empty() {
        return 0.0;
    }
    let basis = u.select_columns(keep.iter());
    spectral_norm(&(l * basis))
}

/// Quotient `||N_x(a) - N_x(b)|| / ((||a|| + ||b||) ||a - b||)` (B3).
fn quadratic_quotient(sys: &dyn FredholmSystem, x: &Vector, a: &Vector, b: &Vector) -> f64 {
    let num = (remainder(sys, x, a) - remainder(sys, x, b)).norm();
    let den = (a.norm() + b.norm()) * (a - b).norm();
    if den > 1e-14 {
        num / den
    } else {
        0.0
    }
}

/// Monte-Carlo estimates for the continuity and approximation conditions.
///
/// Points of `W` are sampled as `Phi(s, eta)` with `||eta|| <= delta1`.
pub fn estimate_constants(
    sys: &dyn FredholmSystem,
    chart: &dyn ApproxChart,
    opts: EstimateOptions,
) -> Result<ConstantsReport, GlueError> {
    if opts.samples < 10 {
        return Err(GlueError::Input(format!("need at least 10 samples, got {}", opts.samples)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let k1 = sys.domain_bound();
    let (f, n) = (sys.dim_f(), sys.dim_b());
    let (mut b1, mut b2, mut b3) = (Max::new(), Max::new(), Max::new());
    let (mut c1w, mut c2w, mut c3, mut c4, mut c5, mut c6) =
        (Max::new(), Max::new(), Max::new(), Max::new(), Max::new(), Max::new());
    let mut ri_err: f64 = 0.0;
    let near = |rng: &mut ChaCha8Rng| {
        let s = chart.sample(rng);
        let eta = random_ball(rng, f, opts.delta1);
        let p = chart.param(&s) + chart.right_inverse(&s) * &eta;
        (s, p)
    };
    for i in 0..opts.samples {
        let (s1, p1) = near(&mut rng);
        let (_, p2) = near(&mut rng);
        check_finite(&p1, &format!("sample {i}: Phi"))?;
        let t1 = sys.evaluate(&p1);
        let t2 = sys.evaluate(&p2);
        check_finite(&t1, &format!("sample {i}: t at {}", fmt_vec(&p1)))?;
        check_finite(&t2, &format!("sample {i}: t at {}", fmt_vec(&p2)))?;
        let d = (&p1 - &p2).norm();
        let (l1, l2) = (linearization(sys, &p1), linearization(sys, &p2));
        if d > 1e-12 {
            b1.offer((&t1 - &t2).norm() / d, &p1);
            b2.offer(spectral_norm(&(&l1 - &l2)) / d, &p1);
        }
        let xi1 = random_ball(&mut rng, n, opts.delta1);
        let xi2 = random_ball(&mut rng, n, opts.delta1);
        b3.offer(quadratic_quotient(sys, &p1, &xi1, &xi2), &p1);
        c1w.offer(p1.norm(), &p1);
        // Images of the delta1 fiber balls.
        c2w.offer(p1.norm().max(p2.norm()), &p1);

        let x = chart.param(&s1);
        let tx = sys.evaluate(&x);
        check_finite(&tx, &format!("sample {i}: t(x(s)) at s = {}", fmt_vec(&s1)))?;
        c3.offer(tx.norm(), &s1);
        let l = linearization(sys, &x);
        c4.offer(tangential_norm(&l, &chart_tangent(chart, &s1)), &s1);
        let q = chart.right_inverse(&s1);
        c5.offer(spectral_norm(&q), &s1);
        ri_err = ri_err.max((&l * &q - Matrix::identity(f, f)).norm());
        let s2 = chart.sample(&mut rng);
        let dx = (&x - chart.param(&s2)).norm();
        if dx > 1e-12 {
            c6.offer(spectral_norm(&(&q - chart.right_inverse(&s2))) / dx, &s1);
        }
    }
    let c1 = b1.value.max(b2.value).max(b3.value);
    let eps1 = c3.value.max(c4.value);
    let c2 = c5.value.max(c6.value);
    let delta1 = opts.delta1;
    let ordering_ok = SEPARATION * eps1 <= delta1 && SEPARATION * delta1 <= c2;
    let (c1_ok, c2_ok) = (c1w.value <= k1, c2w.value <= k1);
    let check = |name: &str, m: Max, pass: bool, note: String| ConditionCheck {
        name: name.into(),
        value: m.value,
        pass,
        witness: m.witness,
        note,
    };
    let conditions = vec![
        check("B1", b1, true, "Lipschitz quotient of t".into()),
        check("B2", b2, true, "Lipschitz quotient of L".into()),
        check("B3", b3, true, "quadratic remainder quotient of N_x".into()),
        check("C1", c1w, c1_ok, format!("sampled points within K1 = {k1}")),
        check("C2", c2w, c2_ok, "Phi(X x B_delta1) inside W".into()),
        check("C3", c3, SEPARATION * eps1 <= delta1, "max ||t(x(s))||".into()),
        check("C4", c4, SEPARATION * eps1 <= delta1, "max ||L_x|T_xX||".into()),
        check("C5", c5, SEPARATION * delta1 <= c2, "max ||Q_x||".into()),
        check("C6", c6, SEPARATION * delta1 <= c2, "Lipschitz quotient of Q".into()),
    ];
    Ok(ConstantsReport {
        constants: GlueConstants { c1, c2, eps1, delta1, k1 },
        conditions,
        ordering_ok,
        right_inverse_error: ri_err,
    })
}

// ---------------------------------------------------------------------------
// Correction

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterRow {
    pub n: usize,
    pub xi_norm: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correction {
    pub xi: Vec<f64>,
    pub residual: f64,
    pub history: Vec<IterRow>,
    /// `||t(x(s))||`, the pointwise approximation error.
    pub eps_point: f64,
    /// `||xi|| <= 2 ||t(x(s))||`.
    pub xi_bound_ok: bool,
}

impl Correction {
    pub fn xi_norm(&self) -> f64 {
        self.xi.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Picard iteration `xi_{n+1} = -t(x) - N_x(Q_x xi_n)` from `xi_0 = 0`,
/// stopping once `||t(x + Q_x xi)|| <= tol`.
pub fn correct(
    sys: &dyn FredholmSystem,
    chart: &dyn ApproxChart,
    s: &Vector,
    tol: f64,
    max_iter: usize,
) -> Result<Correction, GlueError> {
    if !(tol > 0.0) {
        return Err(GlueError::Input(format!("tol must be positive, got {tol}")));
    }
    let x = chart.param(s);
    let q = chart.right_inverse(s);
    let tx = sys.evaluate(&x);
    check_finite(&tx, &format!("t(x(s)) at s = {}", fmt_vec(s)))?;
    let l = linearization(sys, &x);
    let n_x = |v: &Vector| sys.evaluate(&(&x + v)) - &tx - &l * v;
    let mut xi = Vector::zeros(sys.dim_f());
    let mut residual = tx.norm();
    let mut history = vec![IterRow { n: 0, xi_norm: 0.0, residual }];
    let mut growth = 0;
    let mut n = 0;
    while residual > tol {
        if n == max_iter {
            return Err(GlueError::NonConvergence { max_iter, residual, history });
        }
        n += 1;
        xi = -&tx - n_x(&(&q * &xi));
        check_finite(&xi, &format!("iteration {n}"))?;
        let r = sys.evaluate(&(&x + &q * &xi)).norm();
        growth = if r > residual { growth + 1 } else { 0 };
        residual = r;
        history.push(IterRow { n, xi_norm: xi.norm(), residual });
        if growth >= DIVERGENCE_STEPS {
            return Err(GlueError::Divergence { history });
        }
    }
    let eps_point = tx.norm();
    let xi_bound_ok = xi.norm() <= 2.0 * eps_point + 1e-12;
    Ok(Correction { xi: xi.iter().copied().collect(), residual, history, eps_point, xi_bound_ok })
}

// ---------------------------------------------------------------------------
// Probes

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartMapProbe {
    pub value: Vec<f64>,
    /// Finite-difference operator norm of `D Phi` in `(s, eta)`.
    pub derivative_norm: f64,
    pub violation: bool,
}

fn phi(chart: &dyn ApproxChart, s: &Vector, eta: &Vector) -> Vector {
    chart.param(s) + chart.right_inverse(s) * eta
}

/// `Phi(s, eta) = x(s) + Q(s) eta` and the norm of its derivative.
pub fn chart_map(chart: &dyn ApproxChart, s: &Vector, eta: &Vector) -> ChartMapProbe {
    let d = chart.dim();
    let f = eta.len();
    let value = phi(chart, s, eta);
    let h = 1e-6 * (1.0 + s.norm() + eta.norm());
    let mut jac = Matrix::zeros(value.len(), d + f);
    for i in 0..d + f {
        let (mut sp, mut sm, mut ep, mut em) = (s.clone(), s.clone(), eta.clone(), eta.clone());
        if i < d {
            sp[i] += h;
            sm[i] -= h;
        } else {
            ep[i - d] += h;
            em[i - d] -= h;
        }
        jac.set_column(i, &((phi(chart, &sp, &ep) - phi(chart, &sm, &em)) / (2.0 * h)));
    }
    let derivative_norm = spectral_norm(&jac);
    ChartMapProbe {
        value: value.iter().copied().collect(),
        derivative_norm,
        violation: derivative_norm > CHART_NORM_BOUND,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Collision {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub input_distance: f64,
    pub output_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub pairs: usize,
    pub collisions: Vec<Collision>,
}

/// Samples pairs `(s, eta)` with `||eta|| <= delta1`, half of them sharing
/// `s`, and lists pairs whose images are within `1e-9` while their inputs
/// are more than `1e-6` apart.
pub fn injectivity_probe(chart: &dyn ApproxChart, f: usize, pairs: usize, delta1: f64, seed: u64) -> InjectivityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut collisions = Vec::new();
    for i in 0..pairs {
        let s1 = chart.sample(&mut rng);
        let s2 = if i % 2 == 0 { s1.clone() } else { chart.sample(&mut rng) };
        let e1 = random_ball(&mut rng, f, delta1);
        let e2 = random_ball(&mut rng, f, delta1);
        let a = phi(chart, &s1, &e1);
        let b = phi(chart, &s2, &e2);
        let input: Vec<f64> = s1.iter().chain(e1.iter()).copied().collect();
        let other: Vec<f64> = s2.iter().chain(e2.iter()).copied().collect();
        let input_distance = input.iter().zip(&other).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let output_distance = (a - b).norm();
        if output_distance <= 1e-9 && input_distance > 1e-6 {
            collisions.push(Collision { first: input, second: other, input_distance, output_distance });
        }
    }
    InjectivityReport { pairs, collisions }
}

/// Largest componentwise relative error between the analytic and the
/// finite-difference Jacobian over `points` random chart neighborhoods.
pub fn jacobian_consistency(model: &Model, points: usize, seed: u64) -> Option<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..points {
        let s = model.chart.sample(&mut rng);
        let x = model.chart.param(&s) + random_ball(&mut rng, model.system.dim_b(), 0.1);
        let exact = model.system.jacobian(&x)?;
        let fd = fd_jacobian(model.system.as_ref(), &x);
        for (a, b) in exact.iter().zip(fd.iter()) {
            let err = (a - b).abs() / a.abs().max(1.0);
            worst = worst.max(err);
        }
    }
    Some(worst)
}

// ---------------------------------------------------------------------------
// Demo report

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub model: String,
    pub s: Vec<f64>,
    pub constants: ConstantsReport,
    pub correction: Option<Correction>,
    pub correction_error: Option<String>,
    /// `||xi|| <= 2 eps1`.
    pub xi_bound_verdict: bool,
    pub chart_norm_max: f64,
    /// Every sampled `||D Phi|| <= 2`.
    pub chart_norm_verdict: bool,
}

/// Reference chart parameter of each model.
pub fn reference_point(name: &str) -> Vector {
    match name {
        "sphere" => Vector::from_vec(vec![PI / 2.0, 0.0]),
        "node" => Vector::from_element(1, 0.5),
        _ => Vector::zeros(2),
    }
}

pub fn demo(name: &str, tau: f64, scale: f64) -> Result<DemoReport, GlueError> {
    let m = model(name, tau, scale)?;
    let opts = EstimateOptions::default();
    let constants = estimate_constants(m.system.as_ref(), m.chart.as_ref(), opts)?;
    let mut s = reference_point(name);
    if name == "node" && tau > 0.0 {
        s[0] = 0.25;
    }
    let (correction, correction_error) = match correct(m.system.as_ref(), m.chart.as_ref(), &s, 1e-10, 50) {
        Ok(c) => (Some(c), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let xi_bound_verdict = correction
        .as_ref()
        .is_some_and(|c| c.xi_norm() <= 2.0 * constants.constants.eps1 + 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed + 1);
    let mut chart_norm_max: f64 = 0.0;
    for _ in 0..100 {
        let s = m.chart.sample(&mut rng);
        let eta = random_ball(&mut rng, m.system.dim_f(), opts.delta1);
        chart_norm_max = chart_norm_max.max(chart_map(m.chart.as_ref(), &s, &eta).derivative_norm);
    }
    Ok(DemoReport {
        model: m.system.name(),
        s: s.iter().copied().collect(),
        constants,
        correction,
        correction_error,
        xi_bound_verdict,
        chart_norm_max,
        chart_norm_verdict: chart_norm_max <= CHART_NORM_BOUND,
    })
}

/// Samples `count` chart-map probes at `||eta|| <= delta1`.
pub fn sample_chart_norms(chart: &dyn ApproxChart, f: usize, count: usize, delta1: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let s = chart.sample(&mut rng);
            let eta = random_ball(&mut rng, f, delta1);
            chart_map(chart, &s, &eta).derivative_norm
        })
        .collect()
}

/// Sampled B3 quotient alone, for stability checks across sample sizes.
pub fn quadratic_constant(sys: &dyn FredholmSystem, chart: &dyn ApproxChart, samples: usize, radius: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let x = chart.param(&chart.sample(&mut rng));
        let a = random_ball(&mut rng, sys.dim_b(), radius);
        let b = random_ball(&mut rng, sys.dim_b(), radius);
        best = best.max(quadratic_quotient(sys, &x, &a, &b));
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_sphere_has_zero_eps() {
        let r = estimate_constants(&Sphere, &SphereChart { scale: 1.0 }, EstimateOptions::default()).unwrap();
        assert!(r.constants.eps1 < 1e-8, "{}", r.constants.eps1);
        assert!(r.right_inverse_error < RIGHT_INVERSE_TOL);
    }

    #[test]
    fn scaled_sphere_eps() {
        let r = estimate_constants(&Sphere, &SphereChart { scale: 1.05 }, EstimateOptions::default()).unwrap();
        assert!((r.constants.eps1 - 0.1025).abs() < 1e-9, "{}", r.constants.eps1);
        assert!(!r.ordering_ok);
    }

    #[test]
    fn linear_remainder_vanishes() {
        let sys = LinearSystem::seeded(LINEAR_SEED);
        let chart = LinearChart::new(&sys, 1.0);
        let r = estimate_constants(&sys, &chart, EstimateOptions::default()).unwrap();
        let b3 = r.conditions.iter().find(|c| c.name == "B3").unwrap();
        assert!(b3.value < 1e-12);
        assert!(r.constants.eps1 < 1e-8);
        assert!(r.right_inverse_error < RIGHT_INVERSE_TOL);
    }

    #[test]
    fn too_few_samples() {
        let opts = EstimateOptions { samples: 5, ..Default::default() };
        assert!(estimate_constants(&Sphere, &SphereChart { scale: 1.0 }, opts).is_err());
    }

    #[test]
    fn correct_sphere_radial() {
        let s = reference_point("sphere");
        let c = correct(&Sphere, &SphereChart { scale: 1.05 }, &s, 1e-10, 50).unwrap();
        assert!((c.xi[0] + 0.105).abs() < 1e-9);
        assert!(c.residual <= 1e-10);
        assert!(c.xi_bound_ok);
        let exact = correct(&Sphere, &SphereChart { scale: 1.0 }, &s, 1e-10, 50).unwrap();
        assert!(exact.xi_norm() < 1e-12);
    }

    #[test]
    fn correct_node_on_solution() {
        let chart = NodeChart { tau: 0.25, scale: 1.0 };
        let c = correct(&NodeSmoothing { tau: 0.25 }, &chart, &Vector::from_element(1, 0.3), 1e-10, 50).unwrap();
        assert!(c.xi_norm() < 1e-12);
    }

    #[test]
    fn divergence_is_reported() {
        // Inside radius 1/2 the Picard map is expansive.
        let s = reference_point("sphere");
        let e = correct(&Sphere, &SphereChart { scale: 0.3 }, &s, 1e-10, 50).unwrap_err();
        assert!(matches!(e, GlueError::Divergence { .. } | GlueError::NonFinite { .. }));
    }

    #[test]
    fn node_solution_sets() {
        let cross = NodeSmoothing { tau: 0.0 };
        for p in [[0.7, 0.0], [0.0, -1.2], [0.0, 0.0]] {
            assert_eq!(cross.evaluate(&Vector::from_vec(p.to_vec()))[0], 0.0);
        }
        let hyp = NodeSmoothing { tau: 0.25 };
        let chart = NodeChart { tau: 0.25, scale: 1.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let s = chart.sample(&mut rng);
            assert!(hyp.evaluate(&chart.param(&s))[0].abs() < 1e-12);
        }
    }

    #[test]
    fn chart_map_identity_at_zero_eta() {
        let chart = SphereChart { scale: 1.0 };
        let s = Vector::from_vec(vec![1.0, 2.0]);
        let p = chart_map(&chart, &s, &Vector::zeros(1));
        let x = chart.param(&s);
        assert!(p.value.iter().zip(x.iter()).all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn degenerate_chart_collides() {
        let chart = DegenerateChart { inner: SphereChart { scale: 1.0 }, column: 0 };
        let r = injectivity_probe(&chart, 1, 100, 0.04, 5);
        assert!(!r.collisions.is_empty());
        let ok = injectivity_probe(&SphereChart { scale: 1.0 }, 1, 500, 0.04, 5);
        assert!(ok.collisions.is_empty());
    }

    #[test]
    fn linear_chart_map_constant_in_eta() {
        let sys = LinearSystem::seeded(LINEAR_SEED);
        let chart = LinearChart::new(&sys, 1.0);
        let s = Vector::from_vec(vec![0.2, -0.4]);
        let a = chart_map(&chart, &s, &Vector::zeros(2)).derivative_norm;
        let b = chart_map(&chart, &s, &Vector::from_vec(vec![0.03, 0.01])).derivative_norm;
        assert!((a - b).abs() < 1e-6);
    }
}
