//! Lawlor's criterion and the searches built on it.
//!
//! A cone `C(L)` is certified when a vanishing angle `θ0` exists and
//! `θ0 ≤ R(L)/2`. Certification with the exponential bound makes it a Type-c
//! cone, with the F bound a Type-F cone.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::links::{
    catalog_enumerate, clamp_acos, classify, slopes_equal, CatalogId, Link, LinkSummary,
    Provenance, DEFAULT_SLOPE_TOLERANCE,
};
use crate::product::{minimal_product_with, ProductOptions};
use crate::vanishing::{
    vanishing_angle_with, BoundEvaluator, BoundKind, NotFoundReason, Outcome, SolverOptions,
};

pub const CERTIFICATE_SCHEMA: &str = "certificate/v1";

/// `θ0` must clear `R/2` by this much; covers the integrator's convergence
/// error, which the acceptance runs measure below 1e-8.
pub const SOUNDNESS_MARGIN: f64 = 1e-8;

pub const DEFAULT_WINDOW: usize = 5;
pub const THRESHOLD_CAP: usize = 4096;
const THRESHOLD_TAIL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Auto,
    C,
    F,
    Det,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(Strategy::Auto),
            "c" | "C" => Ok(Strategy::C),
            "F" | "f" => Ok(Strategy::F),
            "det" => Ok(Strategy::Det),
            _ => Err(Error::InvalidInput(format!(
                "unknown strategy `{s}` (expected auto, c, F or det)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UndeterminedReason {
    LocalObstruction,
    EnvelopeHit,
    BoundVanishedEarly,
    /// `θ0` exists but exceeds `R/2` (or clears it by less than the margin).
    AngleExceedsHalfRadius,
    SpectraUnavailable,
    SolverFailed {
        message: String,
    },
}

impl UndeterminedReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            UndeterminedReason::LocalObstruction => "local_obstruction",
            UndeterminedReason::EnvelopeHit => "envelope_hit",
            UndeterminedReason::BoundVanishedEarly => "bound_vanished_early",
            UndeterminedReason::AngleExceedsHalfRadius => "angle_exceeds_half_radius",
            UndeterminedReason::SpectraUnavailable => "spectra_unavailable",
            UndeterminedReason::SolverFailed { .. } => "solver_failed",
        }
    }
}

impl From<NotFoundReason> for UndeterminedReason {
    fn from(r: NotFoundReason) -> Self {
        match r {
            NotFoundReason::LocalObstruction => UndeterminedReason::LocalObstruction,
            NotFoundReason::EnvelopeHit { .. } => UndeterminedReason::EnvelopeHit,
            NotFoundReason::BoundVanishedEarly { .. } => UndeterminedReason::BoundVanishedEarly,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    AreaMinimizing,
    Undetermined { reason: UndeterminedReason },
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::AreaMinimizing => "area_minimizing",
            Verdict::Undetermined { .. } => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub link: LinkSummary,
    pub bound: BoundKind,
    pub theta0: Option<f64>,
    pub half_normal_radius: f64,
    pub verdict: Verdict,
    pub rigorous: bool,
    /// `Some(certified)` when the exponential bound was tried.
    pub type_c: Option<bool>,
    /// `Some(certified)` when the F bound was tried.
    pub type_f: Option<bool>,
}

impl Certificate {
    pub fn is_area_minimizing(&self) -> bool {
        self.verdict == Verdict::AreaMinimizing
    }

    /// `R/2 - θ0`, when `θ0` exists.
    pub fn margin(&self) -> Option<f64> {
        self.theta0.map(|t| self.half_normal_radius - t)
    }

    pub fn reason(&self) -> Option<&UndeterminedReason> {
        match &self.verdict {
            Verdict::AreaMinimizing => None,
            Verdict::Undetermined { reason } => Some(reason),
        }
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "schema": CERTIFICATE_SCHEMA,
            "link": self.link,
            "verdict": self.verdict.as_str(),
            "reason": self.reason().map(UndeterminedReason::as_str),
            "bound": self.bound,
            "theta0_rad": self.theta0,
            "half_R_rad": self.half_normal_radius,
            "margin": self.margin(),
            "rigorous": self.rigorous,
            "type_c": self.type_c,
            "type_f": self.type_f,
        })
    }
}

/// Certifier configuration: solver tolerances and how products are formed.
#[derive(Debug, Clone, PartialEq)]
pub struct Certifier {
    pub solver: SolverOptions,
    /// Used by searches that build products internally.
    pub product: ProductOptions,
}

impl Default for Certifier {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            product: ProductOptions {
                compose_spectra: false,
                ..ProductOptions::default()
            },
        }
    }
}

pub fn certify(link: &Link, strategy: Strategy) -> Certificate {
    Certifier::default().certify(link, strategy)
}

impl Certifier {
    pub fn new(solver: SolverOptions) -> Self {
        Self {
            solver,
            ..Self::default()
        }
    }

    /// One attempt with one bound; never fails, solver errors become
    /// undetermined verdicts.
    pub fn certify_with_bound(&self, link: &Link, kind: BoundKind) -> Certificate {
        let half = link.normal_radius() / 2.0;
        let undetermined = |reason: UndeterminedReason, rigorous: bool| Certificate {
            link: link.summary(),
            bound: kind,
            theta0: None,
            half_normal_radius: half,
            verdict: Verdict::Undetermined { reason },
            rigorous,
            type_c: None,
            type_f: None,
        };
        let bound = match kind {
            BoundKind::Det => BoundEvaluator::det(link),
            _ => BoundEvaluator::new(kind, link.k() + 1, link.alpha()),
        };
        let bound = match bound {
            Ok(b) => b,
            Err(Error::SpectraUnavailable(_)) => {
                return undetermined(UndeterminedReason::SpectraUnavailable, true)
            }
            Err(e) => {
                return undetermined(
                    UndeterminedReason::SolverFailed {
                        message: e.to_string(),
                    },
                    true,
                )
            }
        };
        let rigorous = bound.is_rigorous();
        let result = match vanishing_angle_with(&bound, &self.solver) {
            Ok(r) => r,
            Err(e) => {
                return undetermined(
                    UndeterminedReason::SolverFailed {
                        message: e.to_string(),
                    },
                    rigorous,
                )
            }
        };
        let mut cert = match result.outcome {
            Outcome::NotFound(r) => undetermined(r.into(), rigorous),
            Outcome::Found { theta0, .. } => Certificate {
                link: link.summary(),
                bound: kind,
                theta0: Some(theta0),
                half_normal_radius: half,
                verdict: if theta0 + SOUNDNESS_MARGIN <= half {
                    Verdict::AreaMinimizing
                } else {
                    Verdict::Undetermined {
                        reason: UndeterminedReason::AngleExceedsHalfRadius,
                    }
                },
                rigorous,
                type_c: None,
                type_f: None,
            },
        };
        let ok = cert.is_area_minimizing();
        match kind {
            BoundKind::C => cert.type_c = Some(ok),
            BoundKind::F => cert.type_f = Some(ok),
            BoundKind::Det => {}
        }
        cert
    }

    /// Strategy `auto` tries det (complete spectra only), then F, then c, and
    /// returns the first certifying attempt, else the one with the best margin.
    pub fn certify(&self, link: &Link, strategy: Strategy) -> Certificate {
        let kinds: Vec<BoundKind> = match strategy {
            Strategy::C => vec![BoundKind::C],
            Strategy::F => vec![BoundKind::F],
            Strategy::Det => vec![BoundKind::Det],
            Strategy::Auto => {
                let mut v = Vec::new();
                if link.spectra().is_some_and(|s| s.is_complete()) {
                    v.push(BoundKind::Det);
                }
                v.extend([BoundKind::F, BoundKind::C]);
                v
            }
        };
        let attempts: Vec<Certificate> = kinds
            .iter()
            .map(|&k| self.certify_with_bound(link, k))
            .collect();
        let type_c = attempts.iter().find_map(|c| c.type_c);
        let type_f = attempts.iter().find_map(|c| c.type_f);
        let chosen = attempts
            .iter()
            .find(|c| c.is_area_minimizing())
            .or_else(|| {
                attempts
                    .iter()
                    .filter(|c| c.margin().is_some())
                    .max_by(|a, b| a.margin().unwrap().total_cmp(&b.margin().unwrap()))
            })
            .unwrap_or(&attempts[0]);
        Certificate {
            type_c,
            type_f,
            ..chosen.clone()
        }
    }

    fn certify_all(&self, links: &[Link], strategy: Strategy) -> Vec<Certificate> {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            links
                .par_iter()
                .map(|l| self.certify(l, strategy))
                .collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            links.iter().map(|l| self.certify(l, strategy)).collect()
        }
    }

    /// Smallest total copy count whose minimal product certifies (strategy
    /// auto), with the following `window` counts also certified.
    ///
    /// Counts start at the given minimums and grow one copy at a time of the
    /// smallest base link. A failure inside the window restarts the search
    /// after it, so the reported `n_min` always has its full window.
    pub fn min_copies(
        &self,
        base: &[(Link, usize)],
        n_max: usize,
        window: usize,
    ) -> Result<SearchReport> {
        if n_max == 0 {
            return Err(Error::InvalidInput("n_max must be at least 1".into()));
        }
        if base.is_empty() {
            return Err(Error::EmptyProduct);
        }
        let mut blocks: Vec<(Link, usize)> = base.to_vec();
        blocks.sort_by(|(a, _), (b, _)| link_order(a, b));
        let mut counts: Vec<usize> = blocks.iter().map(|(_, c)| *c).collect();
        if counts.iter().all(|&c| c == 0) {
            counts[0] = 1;
        }
        let mut n: usize = counts.iter().sum();
        let mut first_certified = None;
        let mut run: Vec<(usize, Certificate)> = Vec::new();
        loop {
            if run.is_empty() && n > n_max {
                return Err(Error::NotFoundWithin { n_max });
            }
            let factors: Vec<Link> = blocks
                .iter()
                .zip(&counts)
                .flat_map(|((l, _), &c)| std::iter::repeat_n(l.clone(), c))
                .collect();
            let product = minimal_product_with(&factors, &self.product)?;
            let cert = self.certify(&product, Strategy::Auto);
            if cert.is_area_minimizing() {
                first_certified.get_or_insert(n);
                run.push((n, cert));
                if run.len() > window {
                    return Ok(SearchReport {
                        base: blocks
                            .iter()
                            .map(|(l, c)| (l.name().to_string(), *c))
                            .collect(),
                        n_min: run[0].0,
                        first_certified: first_certified.expect("set above"),
                        window_verified: window,
                        certificates: run,
                    });
                }
            } else {
                run.clear();
            }
            counts[0] += 1;
            n += 1;
        }
    }

    /// Smallest `k` such that `θ_c(k+1, √(k·max_slope))` exists and is at
    /// most `½ arccos(1 - min_gap/k)`, for `k` and the next eight values.
    pub fn uniform_dimension_threshold(&self, max_slope: f64, min_gap: f64) -> Result<usize> {
        if !(max_slope.is_finite() && max_slope >= 1.0 && min_gap.is_finite() && min_gap > 0.0) {
            return Err(Error::InvalidInput(format!(
                "need max_slope ≥ 1 and min_gap > 0, got ({max_slope}, {min_gap})"
            )));
        }
        let ok = |k: usize| -> Result<bool> {
            let bound = BoundEvaluator::c(k + 1, (k as f64 * max_slope).sqrt())?;
            let half = 0.5 * clamp_acos(1.0 - min_gap / k as f64);
            Ok(vanishing_angle_with(&bound, &self.solver)?
                .theta0()
                .is_some_and(|t| t + SOUNDNESS_MARGIN <= half))
        };
        let mut k = 1;
        while k <= THRESHOLD_CAP {
            if ok(k)? {
                let mut tail_ok = true;
                for j in 1..=THRESHOLD_TAIL {
                    if !ok(k + j)? {
                        tail_ok = false;
                        k += j;
                        break;
                    }
                }
                if tail_ok {
                    return Ok(k);
                }
            }
            k += 1;
        }
        Err(Error::ThresholdNotFound { cap: THRESHOLD_CAP })
    }

    /// Smallest `k` from which `θ_c(k+1, √(k·slope))` exists for `k` and the
    /// next eight values.
    pub fn existence_dimension(&self, slope: f64) -> Result<usize> {
        if !(slope.is_finite() && slope >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "slope must be finite and ≥ 0, got {slope}"
            )));
        }
        let exists = |k: usize| -> Result<bool> {
            let bound = BoundEvaluator::c(k + 1, (k as f64 * slope).sqrt())?;
            Ok(vanishing_angle_with(&bound, &self.solver)?.is_found())
        };
        let mut start = 1;
        for k in 1..=THRESHOLD_CAP + THRESHOLD_TAIL {
            if !exists(k)? {
                start = k + 1;
            } else if k - start >= THRESHOLD_TAIL {
                return Ok(start);
            }
        }
        Err(Error::ThresholdNotFound { cap: THRESHOLD_CAP })
    }

    /// Seeded sample of minimal products of at least two catalog links with
    /// total dimension `k ∈ [min_dim - 1, max_dim - 1]`, certified with the
    /// exponential bound.
    pub fn isoparametric_sweep(
        &self,
        min_dim: usize,
        max_dim: usize,
        samples: usize,
        seed: u64,
    ) -> Result<Vec<SweepSample>> {
        if min_dim < 3 || max_dim < min_dim {
            return Err(Error::InvalidInput(format!(
                "need 3 ≤ min_dim ≤ max_dim, got ({min_dim}, {max_dim})"
            )));
        }
        let catalog = catalog_enumerate(max_dim - 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut products = Vec::with_capacity(samples);
        let mut names = Vec::with_capacity(samples);
        for _ in 0..samples {
            let target = rng.gen_range(min_dim - 1..=max_dim - 1);
            let mut remaining = target;
            let mut factors: Vec<Link> = Vec::new();
            while remaining > 0 {
                let limit = if factors.is_empty() {
                    remaining - 1
                } else {
                    remaining
                };
                let choices: Vec<&Link> = catalog.iter().filter(|l| l.k() <= limit).collect();
                let pick = choices[rng.gen_range(0..choices.len())];
                remaining -= pick.k();
                factors.push(pick.clone());
            }
            factors.sort_by(link_order);
            names.push(
                factors
                    .iter()
                    .map(|l| l.name().to_string())
                    .collect::<Vec<_>>(),
            );
            products.push(minimal_product_with(&factors, &self.product)?);
        }
        let certs = self.certify_all(&products, Strategy::C);
        Ok(names
            .into_iter()
            .zip(certs)
            .map(|(factors, certificate)| SweepSample {
                factors,
                certificate,
            })
            .collect())
    }

    /// Re-verifies a configuration theorem's hypotheses on `links`, then
    /// confirms its conclusion by a direct exponential-bound solve.
    pub fn check_theorem(&self, links: &[Link], theorem: Theorem) -> Result<TheoremReport> {
        let mut checks: Vec<HypothesisCheck> = Vec::new();
        let mut require = |name: &str, holds: bool, detail: String| -> Result<()> {
            checks.push(HypothesisCheck {
                name: name.to_string(),
                holds,
                detail: detail.clone(),
            });
            if holds {
                Ok(())
            } else {
                Err(Error::HypothesisFailed {
                    which: format!("{name}: {detail}"),
                })
            }
        };
        let shape = |n: usize| -> Result<()> {
            if links.len() == n || (n == 0 && links.len() >= 2) {
                Ok(())
            } else {
                Err(Error::HypothesisFailed {
                    which: format!(
                        "shape: {theorem} takes {} links, got {}",
                        expected_arity(theorem),
                        links.len()
                    ),
                })
            }
        };
        let type_c = |l: &Link| {
            let cert = self.certify(l, Strategy::C);
            let detail = match cert.reason() {
                None => format!("`{}`: exponential bound certifies", l.name()),
                Some(r) => format!(
                    "`{}`: exponential bound undetermined ({})",
                    l.name(),
                    r.as_str()
                ),
            };
            (cert.is_area_minimizing(), detail)
        };

        match theorem {
            Theorem::T2 => {
                shape(2)?;
                let (a, b) = (&links[0], &links[1]);
                require(
                    "dimension",
                    a.k() >= 3 && b.k() >= 3,
                    format!("k1 = {}, k2 = {}; need both ≥ 3", a.k(), b.k()),
                )?;
                require(
                    "equal_slopes",
                    slopes_equal(a, b, DEFAULT_SLOPE_TOLERANCE),
                    format!("s1 = {}, s2 = {}", a.slope(), b.slope()),
                )?;
                require(
                    "class_ii",
                    classify(a).is_class_ii(),
                    format!("slope = {}; need ≥ 1", a.slope()),
                )?;
                for (i, l) in [a, b].into_iter().enumerate() {
                    let (ok, detail) = type_c(l);
                    require(&format!("type_c_{}", i + 1), ok, detail)?;
                }
            }
            Theorem::T3 | Theorem::T4 => {
                shape(2)?;
                let (l, other) = (&links[0], &links[1]);
                let n = other.k();
                if theorem == Theorem::T3 {
                    require(
                        "sphere_factor",
                        other.is_sphere(),
                        format!("`{}` is not a round sphere", other.name()),
                    )?;
                    require(
                        "dimension",
                        n >= l.k() && l.k() >= 3,
                        format!("k = {}, n = {n}; need n ≥ k ≥ 3", l.k()),
                    )?;
                } else {
                    require(
                        "focal_g4_factor",
                        is_g4_focal(other),
                        format!("`{}` is not a g=4 focal submanifold", other.name()),
                    )?;
                    require(
                        "normal_radius",
                        (other.normal_radius() - std::f64::consts::FRAC_PI_2).abs() < 1e-12,
                        format!("R = {}", other.normal_radius()),
                    )?;
                    require(
                        "dimension",
                        n >= 2 * l.k() && l.k() >= 3,
                        format!("k = {}, n = {n}; need n/2 ≥ k ≥ 3", l.k()),
                    )?;
                }
                require(
                    "class_ii",
                    classify(l).is_class_ii(),
                    format!("slope = {}; need ≥ 1", l.slope()),
                )?;
                let (ok, detail) = type_c(l);
                require("type_c", ok, detail)?;
            }
            Theorem::ManyS => {
                shape(0)?;
                let l = &links[0];
                let spheres = &links[1..];
                require(
                    "sphere_factors",
                    spheres.iter().all(Link::is_sphere),
                    "every factor after the first must be a round sphere".into(),
                )?;
                require(
                    "dimension",
                    l.k() >= 3,
                    format!("k = {}; need k ≥ 3", l.k()),
                )?;
                let class = classify(l);
                let d: usize = links.iter().map(Link::k).sum();
                require(
                    "class",
                    class.is_class_ii() || d >= 11,
                    format!(
                        "slope {} is class (a), so the total dimension {d} must be ≥ 11",
                        class.slope
                    ),
                )?;
                let (ok, detail) = type_c(l);
                require("type_c", ok, detail)?;
            }
        }

        let product = minimal_product_with(links, &self.product)?;
        let certificate = self.certify(&product, Strategy::C);
        let mut confirmed = certificate.is_area_minimizing();
        if theorem == Theorem::T2 {
            confirmed &= classify(&product).is_class_ii();
        }
        Ok(TheoremReport {
            theorem,
            hypotheses: checks,
            product: product.summary(),
            certificate,
            confirmed,
        })
    }
}

fn expected_arity(t: Theorem) -> &'static str {
    match t {
        Theorem::ManyS => "at least 2",
        _ => "exactly 2",
    }
}

fn is_g4_focal(l: &Link) -> bool {
    matches!(
        l.provenance(),
        Provenance::Catalog(CatalogId::Focal { g: 4, .. })
    )
}

/// Canonical order of factors: `(k, α², R, name)`.
fn link_order(a: &Link, b: &Link) -> std::cmp::Ordering {
    a.k()
        .cmp(&b.k())
        .then(a.alpha_sq().total_cmp(&b.alpha_sq()))
        .then(a.normal_radius().total_cmp(&b.normal_radius()))
        .then_with(|| a.name().cmp(b.name()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    /// Base links in canonical order with their minimum counts.
    pub base: Vec<(String, usize)>,
    pub n_min: usize,
    /// First certified count, which may precede `n_min` when a later
    /// count inside its window failed.
    pub first_certified: usize,
    pub window_verified: usize,
    /// Certificates for `n_min ..= n_min + window_verified`.
    pub certificates: Vec<(usize, Certificate)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSample {
    pub factors: Vec<String>,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    #[serde(rename = "t2")]
    T2,
    #[serde(rename = "t3")]
    T3,
    #[serde(rename = "t4")]
    T4,
    #[serde(rename = "manyS")]
    ManyS,
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Theorem::T2 => "t2",
            Theorem::T3 => "t3",
            Theorem::T4 => "t4",
            Theorem::ManyS => "manyS",
        })
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t2" => Ok(Theorem::T2),
            "t3" => Ok(Theorem::T3),
            "t4" => Ok(Theorem::T4),
            "manyS" | "many-s" | "manys" => Ok(Theorem::ManyS),
            _ => Err(Error::InvalidInput(format!(
                "unknown theorem `{s}` (expected t2, t3, t4 or manyS)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub theorem: Theorem,
    pub hypotheses: Vec<HypothesisCheck>,
    pub product: LinkSummary,
    pub certificate: Certificate,
    pub confirmed: bool,
}
