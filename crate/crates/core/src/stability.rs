//! Unconditional-stability scans over (α_m, α_f), ρ∞ verification, and the
//! four ρ∞ branch curves.
//!
//! A cell is certified stable when, at every sampled T and at the limit
//! matrices, the spectral radius of G is at most `1 + RADIUS_TOL` and no pair
//! of eigenvalues coalesces on the unit circle. Instability is always
//! witnessed by a concrete sample, so adding samples can only remove cells
//! from the stable set.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::amplification::{self, ainf_eigenvalues_closed_form};
use crate::numkit::{self, CMatrix};
use crate::schemes::{self, in_stability_region, RhoBranch, SchemeParams, Variant};
use crate::{Error, Result};

pub const RADIUS_TOL: f64 = 1e-9;
pub const REPEATED_ROOT_TOL: f64 = 1e-7;
/// Finite T standing in for the T → ∞ limit when no closed form exists.
pub const LARGE_T: f64 = 1e8;

/// Complex sample points T = λτ at which G(T) is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct TSamples {
    pub points: Vec<Complex64>,
}

fn logspace(lo_exp: f64, hi_exp: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![10f64.powf(lo_exp)];
    }
    (0..n)
        .map(|i| 10f64.powf(lo_exp + (hi_exp - lo_exp) * (i as f64 / (n - 1) as f64)))
        .collect()
}

impl TSamples {
    /// `n` log-spaced real values in [10^lo, 10^hi] plus T = 0.
    pub fn real_axis(n: usize, lo_exp: f64, hi_exp: f64) -> Self {
        let mut points = vec![Complex64::new(0.0, 0.0)];
        points.extend(logspace(lo_exp, hi_exp, n).into_iter().map(|x| Complex64::new(x, 0.0)));
        TSamples { points }
    }

    /// Default: 48 log-spaced real values in [1e-4, 1e8] plus T = 0.
    pub fn default_real() -> Self {
        Self::real_axis(48, -4.0, 8.0)
    }

    /// Default real samples plus rays arg T ∈ {±π/4, ±0.98·π/2}, 16 points each.
    pub fn with_rays() -> Self {
        let mut s = Self::default_real();
        s.add_rays(16, -4.0, 8.0);
        s
    }

    pub fn add_rays(&mut self, n: usize, lo_exp: f64, hi_exp: f64) {
        let half_pi = std::f64::consts::FRAC_PI_2;
        for arg in [half_pi / 2.0, -half_pi / 2.0, 0.98 * half_pi, -0.98 * half_pi] {
            self.points
                .extend(logspace(lo_exp, hi_exp, n).into_iter().map(|r| Complex64::from_polar(r, arg)));
        }
    }

    pub fn from_points(points: Vec<Complex64>) -> Self {
        TSamples { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Outcome of [`worst_case_radius`] for one parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusReport {
    /// Largest spectral radius over samples and limit matrices
    /// (`f64::INFINITY` if some G could not be formed).
    pub radius: f64,
    /// T at which the radius was attained (`None` for a limit matrix).
    pub worst_t: Option<Complex64>,
    /// Two eigenvalues coalesced within `REPEATED_ROOT_TOL` of the unit circle.
    pub repeated_unit_root: bool,
    /// L(T) was singular at some sample, or an eigen-solve failed.
    pub singular: bool,
}

impl RadiusReport {
    pub fn is_stable(&self) -> bool {
        !self.singular && !self.repeated_unit_root && self.radius <= 1.0 + RADIUS_TOL
    }
}

fn has_repeated_unit_root(eig: &[Complex64]) -> bool {
    for i in 0..eig.len() {
        for j in i + 1..eig.len() {
            if (eig[i] - eig[j]).norm() <= REPEATED_ROOT_TOL {
                let mean = (eig[i] + eig[j]) * 0.5;
                if (mean.norm() - 1.0).abs() <= REPEATED_ROOT_TOL {
                    return true;
                }
            }
        }
    }
    false
}

struct Accum {
    report: RadiusReport,
}

impl Accum {
    fn new() -> Self {
        Accum {
            report: RadiusReport {
                radius: 0.0,
                worst_t: None,
                repeated_unit_root: false,
                singular: false,
            },
        }
    }

    fn fail(&mut self, t: Option<Complex64>) {
        self.report.singular = true;
        self.report.radius = f64::INFINITY;
        self.report.worst_t = t;
    }

    fn add(&mut self, g: Result<CMatrix>, t: Option<Complex64>) {
        let g = match g {
            Ok(g) if g.is_finite() => g,
            _ => return self.fail(t),
        };
        let raw = match numkit::eigenvalues(&g) {
            Ok(e) => e,
            Err(_) => return self.fail(t),
        };
        if has_repeated_unit_root(&raw) {
            self.report.repeated_unit_root = true;
        }
        let eig = numkit::cluster_mean(&raw, numkit::CLUSTER_TOL * g.norm_inf().max(1.0));
        let r = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if r > self.report.radius {
            self.report.radius = r;
            self.report.worst_t = t;
        }
    }
}

/// Worst-case spectral radius of G over the sample set.
///
/// For the third-order EqualGamma scheme the closed-form limit matrices A₀ and
/// A∞ are included; otherwise G(`LARGE_T`) stands in for the T → ∞ limit.
/// Singular L or failed eigen-solves mark the parameter set unstable instead
/// of aborting.
pub fn worst_case_radius(params: &SchemeParams, samples: &TSamples) -> RadiusReport {
    let mut acc = Accum::new();
    for &t in &samples.points {
        acc.add(amplification::amplification_matrix(params, t), Some(t));
        if acc.report.singular {
            return acc.report;
        }
    }
    if params.p == 3 && params.variant == Variant::EqualGamma {
        acc.add(amplification::limit_matrix_zero(params), None);
        acc.add(amplification::limit_matrix_inf(params), None);
    } else {
        let t = Complex64::new(LARGE_T, 0.0);
        acc.add(amplification::amplification_matrix(params, t), Some(t));
    }
    acc.report
}

/// Uniform grid over (α_m, α_f), inclusive endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub alpha_m_min: f64,
    pub alpha_m_max: f64,
    pub n_alpha_m: usize,
    pub alpha_f_min: f64,
    pub alpha_f_max: f64,
    pub n_alpha_f: usize,
}

impl GridSpec {
    pub fn square(lo: f64, hi: f64, n: usize) -> Self {
        GridSpec {
            alpha_m_min: lo,
            alpha_m_max: hi,
            n_alpha_m: n,
            alpha_f_min: lo,
            alpha_f_max: hi,
            n_alpha_f: n,
        }
    }

    /// 200×200 over [0, 1.5]².
    pub fn default_figure() -> Self {
        Self::square(0.0, 1.5, 200)
    }

    /// A single cell at (α_m, α_f).
    pub fn point(alpha_m: f64, alpha_f: f64) -> Self {
        GridSpec {
            alpha_m_min: alpha_m,
            alpha_m_max: alpha_m,
            n_alpha_m: 1,
            alpha_f_min: alpha_f,
            alpha_f_max: alpha_f,
            n_alpha_f: 1,
        }
    }

    fn axis(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidArgument("grid axis needs at least one point".into()));
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        if !(hi > lo) {
            return Err(Error::InvalidArgument(format!("grid axis must be increasing: [{lo}, {hi}]")));
        }
        Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
    }

    pub fn axes(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        Ok((
            Self::axis(self.alpha_m_min, self.alpha_m_max, self.n_alpha_m)?,
            Self::axis(self.alpha_f_min, self.alpha_f_max, self.n_alpha_f)?,
        ))
    }
}

/// Per-cell stability over an (α_m, α_f) grid. Cells are stored row-major
/// with α_m as the slow index.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityMap {
    pub alpha_m_axis: Vec<f64>,
    pub alpha_f_axis: Vec<f64>,
    pub radius: Vec<f64>,
    pub stable: Vec<bool>,
    pub variant: Variant,
    pub t_samples: TSamples,
}

/// Cell-level comparison of a scan against the closed-form region.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionAgreement {
    pub total: usize,
    pub agreeing: usize,
    /// (α_m index, α_f index) of each disagreeing cell.
    pub disagreements: Vec<(usize, usize)>,
    /// Whether every disagreeing cell has a neighbour (8-connectivity) on the
    /// other side of the analytic boundary.
    pub all_on_boundary: bool,
}

impl RegionAgreement {
    pub fn fraction(&self) -> f64 {
        self.agreeing as f64 / self.total as f64
    }
}

impl StabilityMap {
    pub fn index(&self, i_m: usize, i_f: usize) -> usize {
        i_m * self.alpha_f_axis.len() + i_f
    }

    pub fn stable_count(&self) -> usize {
        self.stable.iter().filter(|&&s| s).count()
    }

    pub fn is_stable(&self, i_m: usize, i_f: usize) -> bool {
        self.stable[self.index(i_m, i_f)]
    }

    pub fn agreement_with_closed_form(&self) -> RegionAgreement {
        let nm = self.alpha_m_axis.len();
        let nf = self.alpha_f_axis.len();
        let closed = |i: usize, j: usize| in_stability_region(self.alpha_m_axis[i], self.alpha_f_axis[j]);
        let mut disagreements = Vec::new();
        let mut all_on_boundary = true;
        for i in 0..nm {
            for j in 0..nf {
                let c = closed(i, j);
                if c == self.is_stable(i, j) {
                    continue;
                }
                disagreements.push((i, j));
                let mut touches = false;
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let (a, b) = (i as i64 + di, j as i64 + dj);
                        if a < 0 || b < 0 || a >= nm as i64 || b >= nf as i64 {
                            continue;
                        }
                        if closed(a as usize, b as usize) != c {
                            touches = true;
                        }
                    }
                }
                all_on_boundary &= touches;
            }
        }
        RegionAgreement {
            total: nm * nf,
            agreeing: nm * nf - disagreements.len(),
            disagreements,
            all_on_boundary,
        }
    }

    /// CSV with header `alpha_m,alpha_f,radius,stable`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "alpha_m,alpha_f,radius,stable")?;
        for (i, am) in self.alpha_m_axis.iter().enumerate() {
            for (j, af) in self.alpha_f_axis.iter().enumerate() {
                let k = self.index(i, j);
                writeln!(
                    w,
                    "{},{},{},{}",
                    fmt17(*am),
                    fmt17(*af),
                    fmt17(self.radius[k]),
                    self.stable[k]
                )?;
            }
        }
        Ok(())
    }
}

/// Float with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Third-order scheme of the given variant at one grid cell; construction
/// failures (e.g. 2 + 3α_f = 0) give `None`.
fn cell_params(variant: Variant, am: f64, af: f64) -> Option<SchemeParams> {
    schemes::make_scheme(3, am, af, variant).ok()
}

/// Scans the third-order scheme of `variant` over the grid. Cells are
/// evaluated in parallel; the result is assembled in grid order.
pub fn scan_region(variant: Variant, grid: &GridSpec, samples: &TSamples) -> Result<StabilityMap> {
    let (am_axis, af_axis) = grid.axes()?;
    let nf = af_axis.len();
    let cells: Vec<(f64, bool)> = (0..am_axis.len() * nf)
        .into_par_iter()
        .map(|k| {
            let (am, af) = (am_axis[k / nf], af_axis[k % nf]);
            match cell_params(variant, am, af) {
                Some(params) => {
                    let rep = worst_case_radius(&params, samples);
                    (rep.radius, rep.is_stable())
                }
                None => (f64::INFINITY, false),
            }
        })
        .collect();
    let (radius, stable) = cells.into_iter().unzip();
    Ok(StabilityMap {
        alpha_m_axis: am_axis,
        alpha_f_axis: af_axis,
        radius,
        stable,
        variant,
        t_samples: samples.clone(),
    })
}

/// max|η(A∞)| at the branch parameters (third-order EqualGamma), computed
/// numerically from the closed-form A∞.
pub fn max_eig_inf(rho_inf: f64, branch: RhoBranch) -> Result<f64> {
    let params = SchemeParams::from_rho(3, rho_inf, branch)?;
    let ainf = amplification::limit_matrix_inf(&params)?;
    numkit::spectral_radius(&ainf)
}

/// `max|η_i(A∞)| − ρ∞` at the branch parameters.
pub fn verify_rho_control(rho_inf: f64, branch: RhoBranch) -> Result<f64> {
    Ok(max_eig_inf(rho_inf, branch)? - rho_inf)
}

/// Whether every eigenvalue of the closed-form A∞ is real (|Im| ≤ 1e-9).
pub fn ainf_spectrum_is_real(alpha_m: f64, alpha_f: f64) -> bool {
    ainf_eigenvalues_closed_form(alpha_m, alpha_f)
        .iter()
        .all(|z| z.im.abs() <= 1e-9)
}

/// One sample of a ρ∞ branch curve. Pole samples carry `params = None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoSample {
    pub branch: RhoBranch,
    pub rho: f64,
    pub params: Option<(f64, f64)>,
    pub inside_region: bool,
    pub max_eig_inf: Option<f64>,
}

impl RhoSample {
    pub fn is_pole(&self) -> bool {
        self.params.is_none()
    }
}

/// ρ∞ sampled uniformly on [0, 1]; samples at branch poles are kept and marked.
pub fn rho_curve(branch: RhoBranch, n_points: usize) -> Result<Vec<RhoSample>> {
    if n_points < 2 {
        return Err(Error::InvalidArgument("rho curve needs at least two points".into()));
    }
    let mut out = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let rho = i as f64 / (n_points - 1) as f64;
        match schemes::params_from_rho(rho, branch) {
            Ok((am, af)) => out.push(RhoSample {
                branch,
                rho,
                params: Some((am, af)),
                inside_region: in_stability_region(am, af),
                max_eig_inf: max_eig_inf(rho, branch).ok(),
            }),
            Err(Error::PoleAtRho { .. }) => out.push(RhoSample {
                branch,
                rho,
                params: None,
                inside_region: false,
                max_eig_inf: None,
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
