//! Time marching for `u' + A u = 0`.
//!
//! The state carries the τ-scaled derivative stack
//! `(U⁽⁰⁾, τU⁽¹⁾, …, τ^{p−1}U^{(p−1)})`. Each step solves one shifted system
//! `(α_m I + γ₁α_f τ A) W_{p−1} = rhs` for the highest block and then updates
//! the lower blocks explicitly from the Taylor ladder. For a scalar problem
//! this is exactly `𝐔_{n+1} = G(λτ) 𝐔_n`.

use std::io::{self, Write};
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;

use crate::numkit::{self, CMatrix, CVector};
use crate::schemes::SchemeParams;
use crate::stability::fmt17;
use crate::{Error, Result};

/// A linear operator `A` together with a solver for `(c₁ I + σ A) x = b`.
pub trait LinearProblem: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64>;

    /// Solves `(c1·I + sigma·A) x = b`. Singular systems are reported as
    /// [`Error::StepSingular`].
    fn shifted_solve(&self, c1: Complex64, sigma: Complex64, b: &[Complex64]) -> Result<Vec<Complex64>>;

    fn description(&self) -> String;
}

fn is_negligible(d: Complex64, scale: f64) -> bool {
    d.norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE)
}

/// `A = diag(d)`; the scalar test equation is the one-entry case.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalProblem {
    pub diag: Vec<Complex64>,
}

impl DiagonalProblem {
    pub fn new(diag: Vec<Complex64>) -> Self {
        DiagonalProblem { diag }
    }

    pub fn scalar(lambda: Complex64) -> Self {
        DiagonalProblem { diag: vec![lambda] }
    }
}

impl LinearProblem for DiagonalProblem {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.diag.iter().zip(v).map(|(d, x)| d * x).collect()
    }

    fn shifted_solve(&self, c1: Complex64, sigma: Complex64, b: &[Complex64]) -> Result<Vec<Complex64>> {
        self.diag
            .iter()
            .zip(b)
            .map(|(d, x)| {
                let den = c1 + sigma * d;
                if is_negligible(den, c1.norm() + (sigma * d).norm()) {
                    Err(Error::StepSingular)
                } else {
                    Ok(x / den)
                }
            })
            .collect()
    }

    fn description(&self) -> String {
        if self.diag.len() == 1 {
            let l = self.diag[0];
            format!("scalar lambda = {} + {}i", l.re, l.im)
        } else {
            format!("diagonal system of size {}", self.diag.len())
        }
    }
}

/// Dense `A`, solved by partial-pivoted elimination.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseProblem {
    pub a: CMatrix,
}

impl LinearProblem for DenseProblem {
    fn dim(&self) -> usize {
        self.a.rows()
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.a.mul_vec(&CVector(v.to_vec())).0
    }

    fn shifted_solve(&self, c1: Complex64, sigma: Complex64, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.a.rows();
        let mut m = self.a.scale(sigma);
        for i in 0..n {
            m[(i, i)] += c1;
        }
        numkit::solve(&m, &CVector(b.to_vec()))
            .map(|x| x.0)
            .map_err(|e| match e {
                Error::SingularMatrix { .. } => Error::StepSingular,
                other => Error::SolveFailed(other.to_string()),
            })
    }

    fn description(&self) -> String {
        format!("dense system of size {}", self.a.rows())
    }
}

/// Method-of-lines heat equation on the unit interval with homogeneous
/// Dirichlet ends: `A = (κ/h²)·tridiag(−1, 2, −1)`, `h = 1/(n+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatProblem {
    pub n: usize,
    pub diffusivity: f64,
}

/// Builds the heat operator; needs at least two interior nodes.
pub fn heat_problem(n_interior: usize, diffusivity: f64) -> Result<HeatProblem> {
    if n_interior < 2 {
        return Err(Error::InvalidArgument("heat problem needs n >= 2 interior nodes".into()));
    }
    Ok(HeatProblem {
        n: n_interior,
        diffusivity,
    })
}

impl HeatProblem {
    pub fn h(&self) -> f64 {
        1.0 / (self.n as f64 + 1.0)
    }

    fn coef(&self) -> f64 {
        self.diffusivity / (self.h() * self.h())
    }

    pub fn to_dense(&self) -> CMatrix {
        let c = self.coef();
        let mut m = CMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            m[(i, i)] = Complex64::new(2.0 * c, 0.0);
            if i > 0 {
                m[(i, i - 1)] = Complex64::new(-c, 0.0);
            }
            if i + 1 < self.n {
                m[(i, i + 1)] = Complex64::new(-c, 0.0);
            }
        }
        m
    }

    /// Nodal values of sin(kπx) at the interior points.
    pub fn sine_mode(&self, k: usize) -> CVector {
        let h = self.h();
        CVector(
            (1..=self.n)
                .map(|i| Complex64::new((k as f64 * std::f64::consts::PI * i as f64 * h).sin(), 0.0))
                .collect(),
        )
    }
}

impl LinearProblem for HeatProblem {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let c = self.coef();
        (0..self.n)
            .map(|i| {
                let left = if i > 0 { v[i - 1] } else { Complex64::new(0.0, 0.0) };
                let right = if i + 1 < self.n { v[i + 1] } else { Complex64::new(0.0, 0.0) };
                (v[i] * 2.0 - left - right) * c
            })
            .collect()
    }

    fn shifted_solve(&self, c1: Complex64, sigma: Complex64, b: &[Complex64]) -> Result<Vec<Complex64>> {
        // Thomas algorithm on diag = c1 + 2σc, off-diagonals = −σc
        let c = self.coef();
        let diag = c1 + sigma * (2.0 * c);
        let off = -sigma * c;
        let scale = diag.norm() + 2.0 * off.norm();
        let n = self.n;
        let mut cp = vec![Complex64::new(0.0, 0.0); n];
        let mut dp = vec![Complex64::new(0.0, 0.0); n];
        let mut denom = diag;
        if is_negligible(denom, scale) {
            return Err(Error::StepSingular);
        }
        cp[0] = off / denom;
        dp[0] = b[0] / denom;
        for i in 1..n {
            denom = diag - off * cp[i - 1];
            if is_negligible(denom, scale) {
                return Err(Error::StepSingular);
            }
            cp[i] = off / denom;
            dp[i] = (b[i] - off * dp[i - 1]) / denom;
        }
        let mut x = dp;
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] -= cp[i] * next;
        }
        Ok(x)
    }

    fn description(&self) -> String {
        format!("heat equation, n = {}, kappa = {}", self.n, self.diffusivity)
    }
}

/// Wraps a problem and counts `shifted_solve` calls.
pub struct CountingProblem<'a, P: LinearProblem + ?Sized> {
    inner: &'a P,
    solves: AtomicUsize,
}

impl<'a, P: LinearProblem + ?Sized> CountingProblem<'a, P> {
    pub fn new(inner: &'a P) -> Self {
        CountingProblem {
            inner,
            solves: AtomicUsize::new(0),
        }
    }

    pub fn solves(&self) -> usize {
        self.solves.load(Ordering::SeqCst)
    }
}

impl<P: LinearProblem + ?Sized> LinearProblem for CountingProblem<'_, P> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        self.inner.apply(v)
    }

    fn shifted_solve(&self, c1: Complex64, sigma: Complex64, b: &[Complex64]) -> Result<Vec<Complex64>> {
        self.solves.fetch_add(1, Ordering::SeqCst);
        self.inner.shifted_solve(c1, sigma, b)
    }

    fn description(&self) -> String {
        self.inner.description()
    }
}

/// Scaled derivative stack `(U⁽⁰⁾, τU⁽¹⁾, …, τ^{p−1}U^{(p−1)})`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub blocks: Vec<CVector>,
    pub tau: f64,
}

impl StateVector {
    pub fn order(&self) -> usize {
        self.blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.blocks.first().map_or(0, CVector::len)
    }

    /// The solution block U⁽⁰⁾.
    pub fn solution(&self) -> &CVector {
        &self.blocks[0]
    }

    /// Max-norm over every entry of every block.
    pub fn norm_inf(&self) -> f64 {
        self.blocks.iter().map(CVector::norm_inf).fold(0.0, f64::max)
    }

    /// Rescales block j by (τ_new/τ_old)ʲ.
    pub fn rescale(&mut self, new_tau: f64) {
        let ratio = new_tau / self.tau;
        let mut f = 1.0;
        for block in &mut self.blocks {
            for z in block.0.iter_mut() {
                *z *= f;
            }
            f *= ratio;
        }
        self.tau = new_tau;
    }

    /// Stack for m = 1 as a p-vector, for comparison with G·𝐔.
    pub fn scalar_stack(&self) -> CVector {
        assert_eq!(self.dim(), 1, "scalar_stack needs a scalar state");
        CVector(self.blocks.iter().map(|b| b[0]).collect())
    }
}

/// Block j = τʲ(−A)ʲu₀ for j = 0 … p−1.
pub fn init_state<P: LinearProblem + ?Sized>(problem: &P, u0: &CVector, p: usize, tau: f64) -> Result<StateVector> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("order p must be at least 2, got {p}")));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {tau}")));
    }
    if u0.len() != problem.dim() {
        return Err(Error::DimensionMismatch(format!(
            "u0 has length {}, problem has dimension {}",
            u0.len(),
            problem.dim()
        )));
    }
    let mut blocks = Vec::with_capacity(p);
    blocks.push(u0.clone());
    for j in 1..p {
        let prev = &blocks[j - 1];
        let next: Vec<Complex64> = problem.apply(prev.as_slice()).into_iter().map(|z| -z * tau).collect();
        blocks.push(CVector(next));
    }
    Ok(StateVector { blocks, tau })
}

fn inv_factorial(n: usize) -> f64 {
    1.0 / (1..=n).map(|k| k as f64).product::<f64>()
}

/// Advances one step: one shifted solve for the top block, explicit updates
/// for the rest.
pub fn step<P: LinearProblem + ?Sized>(params: &SchemeParams, problem: &P, state: &StateVector) -> Result<StateVector> {
    let p = params.p;
    if state.order() != p {
        return Err(Error::InvalidArgument(format!(
            "state has {} blocks, scheme order is {p}",
            state.order()
        )));
    }
    if !(state.tau > 0.0) {
        return Err(Error::InvalidArgument("state step size must be positive".into()));
    }
    let m = state.dim();
    let q = p - 1;
    let k = p - 2;
    let tau = state.tau;
    let (am, af) = (params.alpha_m, params.alpha_f);
    let w = &state.blocks;
    let zero = Complex64::new(0.0, 0.0);

    // predictors b_i = Σ_s W_{i+s}/s! − γ_{q−i}/(q−i)!·W_q
    let mut pred: Vec<Vec<Complex64>> = Vec::with_capacity(q);
    for i in 0..q {
        let gq = params.gamma(q - i) * inv_factorial(q - i);
        let mut b = vec![zero; m];
        for s in 0..=q - i {
            let f = inv_factorial(s);
            for (bx, wx) in b.iter_mut().zip(w[i + s].iter()) {
                *bx += wx * f;
            }
        }
        for (bx, wx) in b.iter_mut().zip(w[q].iter()) {
            *bx -= wx * gq;
        }
        pred.push(b);
    }

    // v = k!·Σ_{j≤k} W_j/j! − α_f W_k + α_f b_k
    let kfact = 1.0 / inv_factorial(k);
    let mut v = vec![zero; m];
    for (j, wj) in w.iter().enumerate().take(k + 1) {
        let f = kfact * inv_factorial(j);
        for (vx, wx) in v.iter_mut().zip(wj.iter()) {
            *vx += wx * f;
        }
    }
    for ((vx, wk), bk) in v.iter_mut().zip(w[k].iter()).zip(pred[k].iter()) {
        *vx += (bk - wk) * af;
    }
    let av = problem.apply(&v);

    // rhs = −k!·Σ_{j=1}^{q} W_j/(j−1)! + α_m W_q − τ A v
    let mut rhs: Vec<Complex64> = av.iter().map(|z| -z * tau).collect();
    for (j, wj) in w.iter().enumerate().skip(1) {
        let f = kfact * inv_factorial(j - 1);
        for (rx, wx) in rhs.iter_mut().zip(wj.iter()) {
            *rx -= wx * f;
        }
    }
    for (rx, wx) in rhs.iter_mut().zip(w[q].iter()) {
        *rx += wx * am;
    }

    let sigma = Complex64::new(params.gamma1() * af * tau, 0.0);
    let top = problem
        .shifted_solve(Complex64::new(am, 0.0), sigma, &rhs)
        .map_err(|e| match e {
            Error::StepSingular => Error::StepSingular,
            Error::SolveFailed(msg) => Error::SolveFailed(msg),
            other => Error::SolveFailed(other.to_string()),
        })?;
    if top.len() != m {
        return Err(Error::SolveFailed(format!("solver returned {} entries, expected {m}", top.len())));
    }

    let mut blocks = Vec::with_capacity(p);
    for (i, b) in pred.into_iter().enumerate() {
        let gq = params.gamma(q - i) * inv_factorial(q - i);
        blocks.push(CVector(b.iter().zip(&top).map(|(bx, tx)| bx + tx * gq).collect()));
    }
    blocks.push(CVector(top));
    Ok(StateVector { blocks, tau })
}

/// Solution samples `(t_n, U⁽⁰⁾_n)` on a uniform partition, t₀ = 0 included.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub values: Vec<CVector>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, &CVector)> {
        self.times.last().map(|&t| (t, self.values.last().unwrap()))
    }

    /// CSV with header `t,re_u_1,im_u_1,...`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let m = self.values.first().map_or(0, CVector::len);
        write!(w, "t")?;
        for i in 1..=m {
            write!(w, ",re_u_{i},im_u_{i}")?;
        }
        writeln!(w)?;
        for (t, u) in self.times.iter().zip(&self.values) {
            write!(w, "{}", fmt17(*t))?;
            for z in u.iter() {
                write!(w, ",{},{}", fmt17(z.re), fmt17(z.im))?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Number of uniform steps for `t_end` at step `tau`.
pub fn step_count(tau: f64, t_end: f64) -> Result<usize> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("step size must be positive, got {tau}")));
    }
    if !(t_end >= tau) {
        return Err(Error::InvalidArgument(format!("t_end = {t_end} must be at least tau = {tau}")));
    }
    Ok((t_end / tau).round() as usize)
}

/// Marches `n_steps` from `state`, calling `visit` on every new state.
pub fn march<P, F>(params: &SchemeParams, problem: &P, mut state: StateVector, n_steps: usize, mut visit: F) -> Result<StateVector>
where
    P: LinearProblem + ?Sized,
    F: FnMut(usize, &StateVector),
{
    for n in 1..=n_steps {
        state = step(params, problem, &state).map_err(|e| Error::StepFailed {
            step: n,
            source: Box::new(e),
        })?;
        visit(n, &state);
    }
    Ok(state)
}

/// Integrates from the consistent initial stack to `t_end` with N = round(t_end/τ) steps.
pub fn integrate<P: LinearProblem + ?Sized>(
    params: &SchemeParams,
    problem: &P,
    u0: &CVector,
    tau: f64,
    t_end: f64,
) -> Result<Trajectory> {
    let n = step_count(tau, t_end)?;
    let state = init_state(problem, u0, params.p, tau)?;
    let mut traj = Trajectory {
        times: Vec::with_capacity(n + 1),
        values: Vec::with_capacity(n + 1),
    };
    traj.times.push(0.0);
    traj.values.push(state.solution().clone());
    march(params, problem, state, n, |i, s| {
        traj.times.push(i as f64 * tau);
        traj.values.push(s.solution().clone());
    })?;
    Ok(traj)
}
