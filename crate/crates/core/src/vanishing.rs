//! Vanishing angles of Lawlor's area-nonincreasing projection.
//!
//! For a cone of dimension `m` and a curvature bound `B(t) ≤ inf det(I - t h)`,
//! the narrowest admissible profile curve satisfies, with `w = r^{-m}`,
//!
//! ```text
//! w'(θ) = -m √(c(θ)² - w²),   c(θ) = cos^{m-1}θ · B(tan θ),   w(0) = 1,
//! ```
//!
//! and the vanishing angle is the first `θ` with `w(θ) = 0`. The start
//! touches the envelope `w = c`; it is left along the power series whose
//! quadratic coefficient is the larger root
//! `b₊ = m[m + √((m-2)² - 4α²)]/4`, which descends fastest.
//!
//! The same angle is computed independently in the calibration variable
//! `g(t) = w(θ)/cos^m θ`, `t = tan θ`, which satisfies
//! `(g - t g'/m)² + (g'/m)² = B(t)²`, i.e.
//! `g' = m[g t - √((1+t²)B² - g²)]/(1+t²)`.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::links::Link;
use crate::ode::{dopri5_step, error_norm, step_factor};
use crate::product::DetEnvelope;
use crate::series::Series;

/// Environment-independent solver defaults.
pub const DEFAULT_RTOL: f64 = 1e-12;
pub const DEFAULT_THETA_EPS: f64 = 1e-4;
pub const DEFAULT_ENVELOPE_TOL: f64 = 1e-10;

const SERIES_ORDER: usize = 12;
const MAX_STEPS: usize = 200_000;
const G_FORM_T_CAP: f64 = 1e6;

/// `(1 - αt)e^{αt}`.
pub fn c_bound(alpha: f64, t: f64) -> f64 {
    (1.0 - alpha * t) * (alpha * t).exp()
}

/// `F(α, t, m) = (1 - αt√(k/m)) (1 + αt/√(km))^k` with `k = m - 1`.
pub fn f_bound(alpha: f64, t: f64, m: usize) -> f64 {
    let k = (m - 1) as f64;
    let mf = m as f64;
    (1.0 - alpha * t * (k / mf).sqrt()) * (1.0 + alpha * t / (k * mf).sqrt()).powi(m as i32 - 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    #[serde(rename = "c")]
    C,
    #[serde(rename = "F")]
    F,
    #[serde(rename = "det")]
    Det,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::C => "c",
            BoundKind::F => "F",
            BoundKind::Det => "det",
        }
    }
}

impl std::fmt::Display for BoundKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c" | "C" => Ok(BoundKind::C),
            "F" | "f" => Ok(BoundKind::F),
            "det" => Ok(BoundKind::Det),
            _ => Err(Error::InvalidInput(format!("unknown bound kind `{s}`"))),
        }
    }
}

/// A scalar lower bound `B(t)` for `inf det(I - t·h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundEvaluator {
    kind: BoundKind,
    m: usize,
    alpha: f64,
    envelope: Option<DetEnvelope>,
    alpha_eff_sq: f64,
}

impl BoundEvaluator {
    fn check(m: usize, alpha: f64) -> Result<()> {
        if m < 2 {
            return Err(Error::InvalidInput(format!(
                "cone dimension m must be at least 2, got {m}"
            )));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "alpha must be finite and non-negative, got {alpha}"
            )));
        }
        Ok(())
    }

    pub fn c(m: usize, alpha: f64) -> Result<Self> {
        Self::check(m, alpha)?;
        Ok(Self {
            kind: BoundKind::C,
            m,
            alpha,
            envelope: None,
            alpha_eff_sq: alpha * alpha,
        })
    }

    pub fn f(m: usize, alpha: f64) -> Result<Self> {
        Self::check(m, alpha)?;
        Ok(Self {
            kind: BoundKind::F,
            m,
            alpha,
            envelope: None,
            alpha_eff_sq: alpha * alpha,
        })
    }

    pub fn new(kind: BoundKind, m: usize, alpha: f64) -> Result<Self> {
        match kind {
            BoundKind::C => Self::c(m, alpha),
            BoundKind::F => Self::f(m, alpha),
            BoundKind::Det => Err(Error::InvalidInput(
                "det bounds are built from a link with spectra".into(),
            )),
        }
    }

    /// The infimum of `det(I - t·A_ν)` over the link's sampled spectra, on
    /// the cone of dimension `k + 1`.
    pub fn det(link: &Link) -> Result<Self> {
        let envelope = DetEnvelope::from_link(link)?;
        Ok(Self {
            kind: BoundKind::Det,
            m: link.k() + 1,
            alpha: link.alpha(),
            envelope: Some(envelope),
            alpha_eff_sq: link.alpha_sq(),
        })
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Coefficient `a` in `B(t) = 1 - a t²/2 + o(t²)`.
    pub fn alpha_eff_sq(&self) -> f64 {
        self.alpha_eff_sq
    }

    /// False when a det bound comes from incomplete spectra, whose sampled
    /// minimum may overestimate the true infimum.
    pub fn is_rigorous(&self) -> bool {
        self.envelope.as_ref().is_none_or(DetEnvelope::is_complete)
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.kind {
            BoundKind::C => c_bound(self.alpha, t),
            BoundKind::F => f_bound(self.alpha, t, self.m),
            BoundKind::Det => self
                .envelope
                .as_ref()
                .expect("det bound has an envelope")
                .eval(t),
        }
    }

    /// First positive zero of `B`, or infinity.
    pub fn first_zero(&self) -> f64 {
        match self.kind {
            _ if self.kind != BoundKind::Det && self.alpha == 0.0 => f64::INFINITY,
            BoundKind::C => 1.0 / self.alpha,
            BoundKind::F => {
                let k = (self.m - 1) as f64;
                1.0 / (self.alpha * (k / self.m as f64).sqrt())
            }
            BoundKind::Det => self
                .envelope
                .as_ref()
                .expect("det bound has an envelope")
                .first_zero(),
        }
    }

    /// The profile envelope `c(θ) = cos^{m-1}θ · B(tan θ)`.
    pub fn envelope_at(&self, theta: f64) -> f64 {
        theta.cos().powi(self.m as i32 - 1) * self.eval(theta.tan())
    }

    /// Taylor coefficients of `B` at `t = 0`.
    pub(crate) fn taylor(&self, order: usize) -> Series {
        match self.kind {
            BoundKind::C => {
                let mut s = Series::zero(order);
                let mut pow_over_fact = 1.0;
                for n in 0..=order {
                    if n > 0 {
                        pow_over_fact *= self.alpha / n as f64;
                    }
                    s.0[n] = pow_over_fact * (1.0 - n as f64);
                }
                s
            }
            BoundKind::F => {
                let k = (self.m - 1) as f64;
                let mf = self.m as f64;
                let mut first = Series::zero(order);
                first.0[0] = 1.0;
                let mut base = Series::zero(order);
                base.0[0] = 1.0;
                if order >= 1 {
                    first.0[1] = -self.alpha * (k / mf).sqrt();
                    base.0[1] = self.alpha / (k * mf).sqrt();
                }
                first.mul(&base.powf(k))
            }
            BoundKind::Det => {
                let env = self.envelope.as_ref().expect("det bound has an envelope");
                Series::det_one_minus(&env.leading_sample().eigenvalues, order)
            }
        }
    }

    /// `(m-2)² - 4α²`; negative means no admissible profile leaves the start.
    pub fn start_discriminant(&self) -> f64 {
        let m = self.m as f64;
        (m - 2.0) * (m - 2.0) - 4.0 * self.alpha_eff_sq
    }

    /// Quadratic coefficient `b₊` of `w = 1 - b₊θ² + ...`, if real.
    pub fn start_coefficient(&self) -> Option<f64> {
        let d = self.start_discriminant();
        (d >= 0.0).then(|| {
            let m = self.m as f64;
            m * (m + d.sqrt()) / 4.0
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Where the series start hands over to the integrator.
    pub theta_eps: f64,
    /// Radicands below `-envelope_tol` are genuine infeasibility, not roundoff.
    pub envelope_tol: f64,
    pub record_trajectory: bool,
    /// Abscissae (θ for the w-form, t for the g-form) at which the solution is
    /// reported exactly.
    pub sample_at: Vec<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: DEFAULT_RTOL,
            atol: DEFAULT_RTOL * 1e-3,
            theta_eps: DEFAULT_THETA_EPS,
            envelope_tol: DEFAULT_ENVELOPE_TOL,
            record_trajectory: false,
            sample_at: Vec::new(),
        }
    }
}

impl SolverOptions {
    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self.atol = rtol * 1e-3;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum NotFoundReason {
    /// `(m-2)² < 4α²`: the start admits no real series.
    LocalObstruction,
    /// The profile was pushed onto the envelope and cannot continue.
    EnvelopeHit { theta: f64 },
    /// The bound reached zero before the profile did.
    BoundVanishedEarly { theta: f64 },
}

impl NotFoundReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            NotFoundReason::LocalObstruction => "local_obstruction",
            NotFoundReason::EnvelopeHit { .. } => "envelope_hit",
            NotFoundReason::BoundVanishedEarly { .. } => "bound_vanished_early",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Found { theta0: f64, tan_theta0: f64 },
    NotFound(NotFoundReason),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// `w = r^{-m}` in the angle `θ`.
    W,
    /// `g = w/cos^m θ` in `t = tan θ`.
    G,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub rejected: usize,
    pub final_step: f64,
    /// Where the series start handed over: `(x_ε, y_ε)`.
    pub start: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct VanishingResult {
    pub outcome: Outcome,
    /// Accepted points `(x, y)`: `(θ, w)` for the w-form, `(t, g)` for the g-form.
    pub trajectory: Option<Vec<(f64, f64)>>,
    /// Values at the requested `sample_at` abscissae reached before termination.
    pub samples: Vec<(f64, f64)>,
    pub bound: BoundKind,
    pub formulation: Formulation,
    pub diagnostics: Diagnostics,
}

impl VanishingResult {
    pub fn theta0(&self) -> Option<f64> {
        match self.outcome {
            Outcome::Found { theta0, .. } => Some(theta0),
            Outcome::NotFound(_) => None,
        }
    }

    pub fn tan_theta0(&self) -> Option<f64> {
        match self.outcome {
            Outcome::Found { tan_theta0, .. } => Some(tan_theta0),
            Outcome::NotFound(_) => None,
        }
    }

    pub fn is_found(&self) -> bool {
        self.theta0().is_some()
    }

    pub fn not_found_reason(&self) -> Option<NotFoundReason> {
        match self.outcome {
            Outcome::NotFound(r) => Some(r),
            Outcome::Found { .. } => None,
        }
    }
}

/// Solves `(y')² + m²y² = m²p` order by order, given `y = 1 - b x² + ...`.
fn w_series(m: f64, p: &Series, b: f64) -> Series {
    let order = p.order();
    let mut w = Series::zero(order);
    w.0[0] = 1.0;
    if order >= 2 {
        w.0[2] = -b;
    }
    for n in 3..=order {
        let d = w.derivative();
        let resid = d.mul(&d).add(&w.mul(&w).scale(m * m)).add(&p.scale(-m * m));
        w.0[n] = -resid.0[n] / (2.0 * m * m - 4.0 * n as f64 * b);
    }
    w
}

/// Solves `(m g - t g')² + (g')² = m² B²` order by order from `g2`.
fn g_series(m: f64, b_sq: &Series, g2: f64) -> Series {
    let order = b_sq.order();
    let mut g = Series::zero(order);
    g.0[0] = 1.0;
    if order >= 2 {
        g.0[2] = g2;
    }
    for n in 3..=order {
        let d = g.derivative();
        let lhs = g.scale(m).add(&d.shift().scale(-1.0));
        let resid = lhs.mul(&lhs).add(&d.mul(&d)).add(&b_sq.scale(-m * m));
        let lin = 2.0 * m * (m - n as f64) + 4.0 * n as f64 * g2;
        g.0[n] = -resid.0[n] / lin;
    }
    g
}

enum Termination {
    Crossed(f64),
    Envelope(f64),
    BoundVanished(f64),
}

struct March {
    termination: Termination,
    trajectory: Option<Vec<(f64, f64)>>,
    samples: Vec<(f64, f64)>,
    diagnostics: Diagnostics,
}

/// Integrates `y' = field(x, y).0` from `(x0, y0)` until `y` crosses zero,
/// the radicand `field(x, y).1` drops below `-tol`, or the bound
/// `field(x, y).2` vanishes.
fn march<F>(
    field: F,
    x0: f64,
    y0: f64,
    x_end: f64,
    series: &Series,
    opts: &SolverOptions,
) -> Result<March>
where
    F: Fn(f64, f64) -> (f64, f64, f64),
{
    let non_finite: Cell<Option<f64>> = Cell::new(None);
    let mut rhs = |x: f64, y: f64| {
        let (v, _, b) = field(x, y);
        if !b.is_finite() || !v.is_finite() {
            if non_finite.get().is_none() {
                non_finite.set(Some(x));
            }
            return 0.0;
        }
        v
    };

    let mut pending: Vec<f64> = opts.sample_at.clone();
    pending.sort_by(f64::total_cmp);
    let mut samples = Vec::new();
    pending.retain(|&s| {
        if s <= x0 {
            samples.push((s, series.eval(s)));
            false
        } else {
            true
        }
    });
    pending.reverse();

    let mut trajectory = opts.record_trajectory.then(|| vec![(0.0, 1.0), (x0, y0)]);
    let mut diag = Diagnostics {
        start: (x0, y0),
        ..Default::default()
    };
    let (mut x, mut y) = (x0, y0);
    let mut h = x0.max(1e-6);

    let termination = loop {
        if diag.steps + diag.rejected > MAX_STEPS {
            return Err(Error::IntegrationFailed(format!(
                "step budget exhausted at x = {x}"
            )));
        }
        let mut target = x_end;
        if let Some(&s) = pending.last() {
            target = target.min(s);
        }
        let hits_target = x + h >= target;
        if hits_target {
            h = target - x;
        }
        let step = dopri5_step(&mut rhs, x, y, h);
        if let Some(at) = non_finite.get() {
            return Err(Error::NonFiniteBound { t: at });
        }
        // Near the start the trajectory is unstable at rate θ^p with p ≤ 2,
        // so local errors are measured against the gap to the envelope.
        let (_, radicand, _) = field(x, y);
        let gap =
            radicand.max(0.0) / ((radicand + y * y).max(0.0).sqrt() + y).max(f64::MIN_POSITIVE);
        let en = error_norm(&step, y.min(gap), opts.rtol, opts.atol);
        if en.is_nan() || en > 1.0 {
            diag.rejected += 1;
            h *= step_factor(en).min(1.0);
            if h < 1e-15 * x.max(1.0) {
                return Err(Error::IntegrationFailed(format!(
                    "step size underflow at x = {x}"
                )));
            }
            continue;
        }
        if step.y <= 0.0 {
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if dopri5_step(&mut rhs, x, y, mid).y > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            diag.steps += 1;
            diag.final_step = hi;
            let root = x + 0.5 * (lo + hi);
            if let Some(tr) = trajectory.as_mut() {
                tr.push((root, 0.0));
            }
            break Termination::Crossed(root);
        }
        diag.steps += 1;
        diag.final_step = h;
        x = if hits_target { target } else { x + h };
        y = step.y;
        if let Some(tr) = trajectory.as_mut() {
            tr.push((x, y));
        }
        while pending.last().is_some_and(|&s| s <= x) {
            let s = pending.pop().expect("non-empty");
            samples.push((s, y));
        }
        let (_, radicand, b) = field(x, y);
        if b <= 0.0 || x >= x_end {
            break Termination::BoundVanished(x);
        }
        if radicand < -opts.envelope_tol {
            break Termination::Envelope(x);
        }
        h *= step_factor(en);
    };
    Ok(March {
        termination,
        trajectory,
        samples,
        diagnostics: diag,
    })
}

fn validate(opts: &SolverOptions) -> Result<()> {
    if !(opts.rtol > 0.0 && opts.atol > 0.0 && opts.theta_eps > 0.0 && opts.theta_eps < 0.1) {
        return Err(Error::InvalidInput(format!(
            "solver tolerances must be positive and theta_eps < 0.1: {opts:?}"
        )));
    }
    Ok(())
}

fn not_found(bound: &BoundEvaluator, reason: NotFoundReason, form: Formulation) -> VanishingResult {
    VanishingResult {
        outcome: Outcome::NotFound(reason),
        trajectory: None,
        samples: Vec::new(),
        bound: bound.kind,
        formulation: form,
        diagnostics: Diagnostics::default(),
    }
}

pub fn vanishing_angle(bound: &BoundEvaluator) -> Result<VanishingResult> {
    vanishing_angle_with(bound, &SolverOptions::default())
}

/// Vanishing angle from the `w = r^{-m}` equation in `θ`.
pub fn vanishing_angle_with(
    bound: &BoundEvaluator,
    opts: &SolverOptions,
) -> Result<VanishingResult> {
    validate(opts)?;
    let Some(b) = bound.start_coefficient() else {
        return Ok(not_found(
            bound,
            NotFoundReason::LocalObstruction,
            Formulation::W,
        ));
    };
    let m = bound.m as f64;
    let c = Series::cos(SERIES_ORDER)
        .powf(m - 1.0)
        .mul(&Series::compose(
            &bound.taylor(SERIES_ORDER),
            &Series::tan(SERIES_ORDER),
        ));
    let w = w_series(m, &c.mul(&c), b);

    let x0 = opts.theta_eps;
    let y0 = w.eval(x0);
    let theta_end = bound.first_zero().atan();
    let field = |th: f64, y: f64| {
        let bt = bound.eval(th.tan());
        let env = th.cos().powi(bound.m as i32 - 1) * bt;
        let radicand = (env - y) * (env + y);
        (-m * radicand.max(0.0).sqrt(), radicand, bt)
    };
    let run = march(field, x0, y0, theta_end, &w, opts)?;
    let outcome = match run.termination {
        Termination::Crossed(th) => Outcome::Found {
            theta0: th,
            tan_theta0: th.tan(),
        },
        Termination::Envelope(th) => Outcome::NotFound(NotFoundReason::EnvelopeHit { theta: th }),
        Termination::BoundVanished(th) => {
            Outcome::NotFound(NotFoundReason::BoundVanishedEarly { theta: th })
        }
    };
    Ok(VanishingResult {
        outcome,
        trajectory: run.trajectory,
        samples: run.samples,
        bound: bound.kind,
        formulation: Formulation::W,
        diagnostics: run.diagnostics,
    })
}

pub fn vanishing_angle_gform(bound: &BoundEvaluator) -> Result<VanishingResult> {
    vanishing_angle_gform_with(bound, &SolverOptions::default())
}

/// Vanishing angle from the calibration inequality at equality, in `t = tan θ`.
/// Reports `θ = arctan t*` where `g(t*) = 0`.
pub fn vanishing_angle_gform_with(
    bound: &BoundEvaluator,
    opts: &SolverOptions,
) -> Result<VanishingResult> {
    validate(opts)?;
    let d = bound.start_discriminant();
    if d < 0.0 {
        return Ok(not_found(
            bound,
            NotFoundReason::LocalObstruction,
            Formulation::G,
        ));
    }
    let m = bound.m as f64;
    let g2 = -m * ((m - 2.0) + d.sqrt()) / 4.0;
    let bt = bound.taylor(SERIES_ORDER);
    let g = g_series(m, &bt.mul(&bt), g2);

    let x0 = opts.theta_eps.tan();
    let y0 = g.eval(x0);
    let t_end = bound.first_zero().min(G_FORM_T_CAP);
    let field = |t: f64, y: f64| {
        let bt = bound.eval(t);
        let s = 1.0 + t * t;
        let env = s.sqrt() * bt;
        let radicand = (env - y) * (env + y);
        (m * (y * t - radicand.max(0.0).sqrt()) / s, radicand, bt)
    };
    let run = march(field, x0, y0, t_end, &g, opts)?;
    let outcome = match run.termination {
        Termination::Crossed(t) => Outcome::Found {
            theta0: t.atan(),
            tan_theta0: t,
        },
        Termination::Envelope(t) => {
            Outcome::NotFound(NotFoundReason::EnvelopeHit { theta: t.atan() })
        }
        Termination::BoundVanished(t) => {
            Outcome::NotFound(NotFoundReason::BoundVanishedEarly { theta: t.atan() })
        }
    };
    Ok(VanishingResult {
        outcome,
        trajectory: run.trajectory,
        samples: run.samples,
        bound: bound.kind,
        formulation: Formulation::G,
        diagnostics: run.diagnostics,
    })
}

pub fn theta_c(m: usize, alpha: f64) -> Result<VanishingResult> {
    vanishing_angle(&BoundEvaluator::c(m, alpha)?)
}

#[allow(non_snake_case)]
pub fn theta_F(m: usize, alpha: f64) -> Result<VanishingResult> {
    vanishing_angle(&BoundEvaluator::f(m, alpha)?)
}

pub fn theta_det(link: &Link) -> Result<VanishingResult> {
    vanishing_angle(&BoundEvaluator::det(link)?)
}

/// One cell of a vanishing-angle table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableCell {
    pub m: usize,
    pub alpha: f64,
    pub bound: BoundKind,
    pub result: Result<VanishingResult>,
}

/// Evaluates every `(m, α)` pair, row-major in `ms` then `alphas`.
pub fn vanishing_table(
    ms: &[usize],
    alphas: &[f64],
    kind: BoundKind,
    opts: &SolverOptions,
) -> Vec<TableCell> {
    let cells: Vec<(usize, f64)> = ms
        .iter()
        .flat_map(|&m| alphas.iter().map(move |&a| (m, a)))
        .collect();
    let solve = |&(m, alpha): &(usize, f64)| TableCell {
        m,
        alpha,
        bound: kind,
        result: BoundEvaluator::new(kind, m, alpha).and_then(|b| vanishing_angle_with(&b, opts)),
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        cells.par_iter().map(solve).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        cells.iter().map(solve).collect()
    }
}
