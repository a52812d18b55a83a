//! Link data model, slope classes and the built-in catalog.
//!
//! A link is a closed minimal submanifold `L^k` of a round sphere, entered as
//! certification data: its dimension, the supremum `α²` of the squared
//! Frobenius norm of its second fundamental form over unit normals, its normal
//! radius `R`, and optionally sampled shape-operator spectra.
//!
//! The catalog holds round spheres, the minimal isoparametric hypersurfaces
//! and the focal submanifolds of isoparametric foliations, all of which have
//! closed-form data depending only on `(g, m1, m2)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const LINK_SCHEMA: &str = "link/v1";

/// Relative tolerance for slope equality when exact slopes are unavailable.
pub const DEFAULT_SLOPE_TOLERANCE: f64 = 1e-12;

const SPECTRUM_TRACE_TOL: f64 = 1e-9;
const SPECTRUM_ALPHA_TOL: f64 = 1e-9;

/// Eigenvalues of one shape operator `A_ν` at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalSample {
    pub eigenvalues: Vec<f64>,
}

impl NormalSample {
    pub fn new(eigenvalues: Vec<f64>) -> Self {
        Self { eigenvalues }
    }

    pub fn norm_sq(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e * e).sum()
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }

    pub fn negated(&self) -> Self {
        Self::new(self.eigenvalues.iter().map(|e| -e).collect())
    }

    /// `det(I - t·A) = Π (1 - t·λ_i)`.
    pub fn det_one_minus(&self, t: f64) -> f64 {
        self.eigenvalues.iter().map(|e| 1.0 - t * e).product()
    }
}

/// Normal space spanned by `η0` alone: the minimal product of two totally
/// geodesic factors. The unit normal `a0·η0 + (factor normals)` has
/// eigenvalues `-a0·λ2/λ1` (k1 times) and `a0·λ1/λ2` (k2 times).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaPencil {
    pub k1: usize,
    pub k2: usize,
}

impl EtaPencil {
    /// `(λ2/λ1, λ1/λ2)`.
    pub fn ratios(&self) -> (f64, f64) {
        let r = (self.k2 as f64 / self.k1 as f64).sqrt();
        (r, 1.0 / r)
    }

    pub fn sample(&self, a0: f64) -> NormalSample {
        let (r1, r2) = self.ratios();
        let mut eig = vec![-a0 * r1; self.k1];
        eig.extend(std::iter::repeat_n(a0 * r2, self.k2));
        NormalSample::new(eig)
    }

    pub fn det_one_minus(&self, a0: f64, t: f64) -> f64 {
        let (r1, r2) = self.ratios();
        (1.0 + t * a0 * r1).powi(self.k1 as i32) * (1.0 - t * a0 * r2).powi(self.k2 as i32)
    }
}

/// Sampled shape-operator spectra over the unit normal bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFamily {
    samples: Vec<NormalSample>,
    complete: bool,
    pencil: Option<EtaPencil>,
}

impl SpectrumFamily {
    pub fn new(samples: Vec<NormalSample>, complete: bool) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidInput("spectrum family has no samples".into()));
        }
        Ok(Self {
            samples,
            complete,
            pencil: None,
        })
    }

    /// Closed-form η-only family, represented by `a0` on a uniform grid of
    /// `[-1, 1]` that contains both endpoints.
    pub fn from_pencil(pencil: EtaPencil, resolution: usize) -> Self {
        let n = resolution.max(2);
        let samples = (0..=n)
            .map(|i| pencil.sample(-1.0 + 2.0 * i as f64 / n as f64))
            .collect();
        Self {
            samples,
            complete: true,
            pencil: Some(pencil),
        }
    }

    pub fn samples(&self) -> &[NormalSample] {
        &self.samples
    }

    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn pencil(&self) -> Option<EtaPencil> {
        self.pencil
    }

    pub fn max_norm_sq(&self) -> f64 {
        self.samples
            .iter()
            .map(NormalSample::norm_sq)
            .fold(0.0, f64::max)
    }

    /// True when every sampled shape operator vanishes.
    pub fn is_totally_geodesic(&self) -> bool {
        self.samples
            .iter()
            .all(|s| s.eigenvalues.iter().all(|&e| e == 0.0))
    }

    /// Samples together with their negations (`A_{-ν} = -A_ν`), without
    /// duplicating samples whose negation is already present.
    pub fn signed_samples(&self) -> Vec<NormalSample> {
        let sorted = |s: &NormalSample| {
            let mut v = s.eigenvalues.clone();
            v.sort_by(f64::total_cmp);
            v
        };
        let keys: Vec<Vec<f64>> = self.samples.iter().map(sorted).collect();
        let mut out = self.samples.clone();
        for s in &self.samples {
            let neg = s.negated();
            let nk = sorted(&neg);
            let present = keys.iter().any(|k| {
                k.len() == nk.len() && k.iter().zip(&nk).all(|(a, b)| (a - b).abs() <= 1e-14)
            });
            if !present {
                out.push(neg);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FocalSide {
    Plus,
    Minus,
}

impl FocalSide {
    fn symbol(self) -> char {
        match self {
            FocalSide::Plus => '+',
            FocalSide::Minus => '-',
        }
    }
}

/// Identifier of a catalog entry, printed as `S^d`, `iso(g,m1,m2)` or
/// `focal(g,m1,m2,±)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CatalogId {
    Sphere {
        d: usize,
    },
    Hypersurface {
        g: u32,
        m1: usize,
        m2: usize,
    },
    Focal {
        g: u32,
        m1: usize,
        m2: usize,
        side: FocalSide,
    },
}

impl CatalogId {
    pub fn build(&self) -> Result<Link> {
        match *self {
            CatalogId::Sphere { d } => make_sphere(d),
            CatalogId::Hypersurface { g, m1, m2 } => make_isoparametric_hypersurface(g, m1, m2),
            CatalogId::Focal { g, m1, m2, side } => make_focal(g, m1, m2, side),
        }
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            CatalogId::Sphere { d } => write!(f, "S^{d}"),
            CatalogId::Hypersurface { g, m1, m2 } => write!(f, "iso({g},{m1},{m2})"),
            CatalogId::Focal { g, m1, m2, side } => {
                write!(f, "focal({g},{m1},{m2},{})", side.symbol())
            }
        }
    }
}

impl FromStr for CatalogId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidCatalogEntry(format!("cannot parse catalog id `{s}`"));
        let s = s.trim();
        if let Some(d) = s.strip_prefix("S^") {
            return d
                .parse()
                .map(|d| CatalogId::Sphere { d })
                .map_err(|_| bad());
        }
        let (head, rest) = s.split_once('(').ok_or_else(bad)?;
        let args: Vec<&str> = rest
            .strip_suffix(')')
            .ok_or_else(bad)?
            .split(',')
            .map(str::trim)
            .collect();
        let num = |i: usize| -> Result<usize> {
            args.get(i).and_then(|a| a.parse().ok()).ok_or_else(bad)
        };
        match (head.trim(), args.len()) {
            ("iso", 3) => Ok(CatalogId::Hypersurface {
                g: num(0)? as u32,
                m1: num(1)?,
                m2: num(2)?,
            }),
            ("focal", 4) => {
                let side = match args[3] {
                    "+" | "plus" => FocalSide::Plus,
                    "-" | "minus" => FocalSide::Minus,
                    _ => return Err(bad()),
                };
                Ok(CatalogId::Focal {
                    g: num(0)? as u32,
                    m1: num(1)?,
                    m2: num(2)?,
                    side,
                })
            }
            _ => Err(bad()),
        }
    }
}

impl Serialize for CatalogId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CatalogId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Catalog(CatalogId),
    User,
    ProductOf(Vec<String>),
}

/// A closed minimal submanifold of a sphere, as certification data.
///
/// Values are validated on construction and immutable afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    name: String,
    k: usize,
    alpha_sq: f64,
    alpha_sq_exact: Option<Ratio<i64>>,
    normal_radius: f64,
    spectra: Option<SpectrumFamily>,
    provenance: Provenance,
    ambient_dim: Option<usize>,
}

impl Link {
    /// Validates and builds a user-supplied link.
    pub fn new(
        name: impl Into<String>,
        k: usize,
        alpha_sq: f64,
        normal_radius: f64,
        spectra: Option<SpectrumFamily>,
    ) -> Result<Self> {
        Self::build(
            name.into(),
            k,
            alpha_sq,
            None,
            normal_radius,
            spectra,
            Provenance::User,
            None,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub(crate) fn build(
        name: String,
        k: usize,
        alpha_sq: f64,
        alpha_sq_exact: Option<Ratio<i64>>,
        normal_radius: f64,
        spectra: Option<SpectrumFamily>,
        provenance: Provenance,
        ambient_dim: Option<usize>,
    ) -> Result<Self> {
        let invalid = |reason: String| Error::InvalidLink {
            name: name.clone(),
            reason,
        };
        if k == 0 {
            return Err(invalid("field `k`: dimension must be at least 1".into()));
        }
        if !(alpha_sq.is_finite() && alpha_sq >= 0.0) {
            return Err(invalid(format!(
                "field `alpha_sq`: must be finite and non-negative, got {alpha_sq}"
            )));
        }
        if !(normal_radius > 0.0 && normal_radius <= PI) {
            return Err(invalid(format!(
                "field `normal_radius`: must lie in (0, π], got {normal_radius}"
            )));
        }
        if let Some(spec) = &spectra {
            for (i, s) in spec.samples.iter().enumerate() {
                if s.eigenvalues.len() != k {
                    return Err(invalid(format!(
                        "field `spectra[{i}]`: expected {k} eigenvalues, got {}",
                        s.eigenvalues.len()
                    )));
                }
                if s.eigenvalues.iter().any(|e| !e.is_finite()) {
                    return Err(invalid(format!(
                        "field `spectra[{i}]`: non-finite eigenvalue"
                    )));
                }
                let scale = s.norm_sq().sqrt().max(1.0);
                if s.trace().abs() > SPECTRUM_TRACE_TOL * scale {
                    return Err(invalid(format!(
                        "field `spectra[{i}]`: eigenvalues sum to {} (shape operators of a minimal link are trace-free)",
                        s.trace()
                    )));
                }
            }
            let max = spec.max_norm_sq();
            if (max - alpha_sq).abs() > SPECTRUM_ALPHA_TOL * alpha_sq.max(1.0) {
                return Err(invalid(format!(
                    "field `alpha_sq`: {alpha_sq} disagrees with the spectra maximum {max}"
                )));
            }
        }
        Ok(Self {
            name,
            k,
            alpha_sq,
            alpha_sq_exact,
            normal_radius,
            spectra,
            provenance,
            ambient_dim,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Dimension of the link; the cone has dimension `k + 1`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha_sq
    }

    pub fn alpha(&self) -> f64 {
        self.alpha_sq.sqrt()
    }

    /// `α²` as an exact rational, when known (catalog entries and their products).
    pub fn alpha_sq_exact(&self) -> Option<Ratio<i64>> {
        self.alpha_sq_exact
    }

    pub fn normal_radius(&self) -> f64 {
        self.normal_radius
    }

    pub fn spectra(&self) -> Option<&SpectrumFamily> {
        self.spectra.as_ref()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Dimension `N` of the ambient sphere `S^N`, when known.
    pub fn ambient_dim(&self) -> Option<usize> {
        self.ambient_dim
    }

    pub fn slope(&self) -> f64 {
        self.alpha_sq / self.k as f64
    }

    pub fn exact_slope(&self) -> Option<Ratio<i64>> {
        self.alpha_sq_exact
            .map(|a| a / Ratio::from_integer(self.k as i64))
    }

    pub fn is_sphere(&self) -> bool {
        matches!(
            self.provenance,
            Provenance::Catalog(CatalogId::Sphere { .. })
        )
    }

    pub fn without_spectra(&self) -> Link {
        Link {
            spectra: None,
            ..self.clone()
        }
    }

    pub fn renamed(&self, name: impl Into<String>) -> Link {
        Link {
            name: name.into(),
            ..self.clone()
        }
    }

    pub fn summary(&self) -> LinkSummary {
        LinkSummary {
            name: self.name.clone(),
            k: self.k,
            alpha_sq: self.alpha_sq,
            normal_radius: self.normal_radius,
        }
    }

    pub fn to_record(&self) -> LinkRecord {
        LinkRecord {
            schema: LINK_SCHEMA.to_string(),
            name: self.name.clone(),
            k: self.k,
            alpha_sq: self.alpha_sq,
            normal_radius: self.normal_radius,
            spectra: self
                .spectra
                .as_ref()
                .map(|s| s.samples.iter().map(|x| x.eigenvalues.clone()).collect()),
            spectra_complete: self.spectra.as_ref().map(|s| s.complete),
            eta_pencil: self.spectra.as_ref().and_then(|s| s.pencil),
            ambient_dim: self.ambient_dim,
            provenance: self.provenance.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_record()).expect("link records serialize")
    }

    pub fn from_json(text: &str) -> Result<Link> {
        let record: LinkRecord = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("link JSON: {e}")))?;
        Link::try_from(record)
    }
}

/// Compact description carried by certificates and reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSummary {
    pub name: String,
    pub k: usize,
    pub alpha_sq: f64,
    pub normal_radius: f64,
}

/// Serialized form of a link, schema `link/v1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkRecord {
    pub schema: String,
    pub name: String,
    pub k: usize,
    pub alpha_sq: f64,
    pub normal_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectra: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectra_complete: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_pencil: Option<EtaPencil>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ambient_dim: Option<usize>,
    pub provenance: Provenance,
}

impl TryFrom<LinkRecord> for Link {
    type Error = Error;

    fn try_from(r: LinkRecord) -> Result<Link> {
        if r.schema != LINK_SCHEMA {
            return Err(Error::InvalidLink {
                name: r.name,
                reason: format!(
                    "field `schema`: expected `{LINK_SCHEMA}`, got `{}`",
                    r.schema
                ),
            });
        }
        let spectra = match r.spectra {
            Some(samples) => {
                let samples = samples.into_iter().map(NormalSample::new).collect();
                let mut fam = SpectrumFamily::new(samples, r.spectra_complete.unwrap_or(false))
                    .map_err(|_| Error::InvalidLink {
                        name: r.name.clone(),
                        reason: "field `spectra`: must not be empty".into(),
                    })?;
                fam.pencil = r.eta_pencil;
                Some(fam)
            }
            None => None,
        };
        // Catalog entries are rebuilt so that exact slopes survive a round trip.
        if let Provenance::Catalog(id) = &r.provenance {
            if let Ok(built) = id.build() {
                if built.k == r.k
                    && (built.alpha_sq - r.alpha_sq).abs() <= 1e-12 * r.alpha_sq.max(1.0)
                    && (built.normal_radius - r.normal_radius).abs() <= 1e-12
                {
                    return Ok(built.renamed(r.name));
                }
            }
        }
        Link::build(
            r.name,
            r.k,
            r.alpha_sq,
            None,
            r.normal_radius,
            spectra,
            r.provenance,
            r.ambient_dim,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlopeLetter {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b")]
    B,
    #[serde(rename = "c")]
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SlopeRoman {
    I,
    II,
    /// Class (b) belongs to both (I) and (II).
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeClass {
    pub slope: f64,
    pub letter: SlopeLetter,
    pub roman: SlopeRoman,
}

impl SlopeClass {
    pub fn is_class_i(&self) -> bool {
        self.letter != SlopeLetter::C
    }

    pub fn is_class_ii(&self) -> bool {
        self.letter != SlopeLetter::A
    }
}

pub fn classify(link: &Link) -> SlopeClass {
    classify_with_tolerance(link, DEFAULT_SLOPE_TOLERANCE)
}

/// Slope `α²/k` and its class. Exact rational comparison is used when the
/// link carries an exact `α²`; otherwise `|s - 1| ≤ rel_tol` counts as slope one.
pub fn classify_with_tolerance(link: &Link, rel_tol: f64) -> SlopeClass {
    let slope = link.slope();
    let ordering = match link.exact_slope() {
        Some(s) => s.cmp(&Ratio::from_integer(1)),
        None if (slope - 1.0).abs() <= rel_tol => std::cmp::Ordering::Equal,
        None => slope.total_cmp(&1.0),
    };
    let (letter, roman) = match ordering {
        std::cmp::Ordering::Less => (SlopeLetter::A, SlopeRoman::I),
        std::cmp::Ordering::Equal => (SlopeLetter::B, SlopeRoman::Both),
        std::cmp::Ordering::Greater => (SlopeLetter::C, SlopeRoman::II),
    };
    SlopeClass {
        slope,
        letter,
        roman,
    }
}

/// Whether two links have the same slope (exactly, when both slopes are rational).
pub fn slopes_equal(a: &Link, b: &Link, rel_tol: f64) -> bool {
    match (a.exact_slope(), b.exact_slope()) {
        (Some(x), Some(y)) => x == y,
        _ => {
            let (x, y) = (a.slope(), b.slope());
            (x - y).abs() <= rel_tol * x.abs().max(y.abs()).max(1.0)
        }
    }
}

fn int(n: usize) -> Ratio<i64> {
    Ratio::from_integer(n as i64)
}

/// Round `S^d`, filling its own ambient sphere. The single zero normal
/// sample only feeds spectra composition.
pub fn make_sphere(d: usize) -> Result<Link> {
    if d < 1 {
        return Err(Error::InvalidDimension(d as i64));
    }
    let spectra = SpectrumFamily::new(vec![NormalSample::new(vec![0.0; d])], true)?;
    Link::build(
        format!("S^{d}"),
        d,
        0.0,
        Some(int(0)),
        PI,
        Some(spectra),
        Provenance::Catalog(CatalogId::Sphere { d }),
        Some(d),
    )
}

fn check_pattern(g: u32, m1: usize, m2: usize) -> Result<()> {
    let bad = |why: &str| {
        Err(Error::InvalidCatalogEntry(format!(
            "(g={g}, m1={m1}, m2={m2}): {why}"
        )))
    };
    if m1 == 0 || m2 == 0 {
        return bad("multiplicities must be positive");
    }
    match g {
        1 if m1 != m2 => bad("g=1 has a single multiplicity"),
        1 | 2 | 4 => Ok(()),
        3 if m1 == m2 && [1, 2, 4, 8].contains(&m1) => Ok(()),
        3 => bad("g=3 requires m1=m2 in {1,2,4,8}"),
        6 if m1 == m2 && [1, 2].contains(&m1) => Ok(()),
        6 => bad("g=6 requires m1=m2 in {1,2}"),
        _ => bad("g must be one of 1, 2, 3, 4, 6"),
    }
}

/// Multiplicity of the `j`-th principal curvature (`j` from 0) of a leaf.
fn leaf_multiplicity(j: usize, m1: usize, m2: usize) -> usize {
    if j.is_multiple_of(2) {
        m1
    } else {
        m2
    }
}

/// Principal curvatures `cot(θ1 + jπ/g)` of the minimal leaf, with `θ1`
/// fixed by the zero-trace condition.
fn minimal_leaf_curvatures(g: u32, m1: usize, m2: usize) -> Vec<f64> {
    let gf = g as f64;
    let trace = |th: f64| -> f64 {
        (0..g as usize)
            .map(|j| leaf_multiplicity(j, m1, m2) as f64 / (th + j as f64 * PI / gf).tan())
            .sum()
    };
    // The trace decreases from +∞ to -∞ on (0, π/g).
    let (mut lo, mut hi) = (0.0, PI / gf);
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if trace(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let th1 = 0.5 * (lo + hi);
    let mut eig = Vec::new();
    for j in 0..g as usize {
        let kappa = 1.0 / (th1 + j as f64 * PI / gf).tan();
        eig.extend(std::iter::repeat_n(kappa, leaf_multiplicity(j, m1, m2)));
    }
    eig
}

/// The minimal isoparametric hypersurface with `g` distinct principal
/// curvatures of multiplicities `(m1, m2)`.
pub fn make_isoparametric_hypersurface(g: u32, m1: usize, m2: usize) -> Result<Link> {
    check_pattern(g, m1, m2)?;
    let k = match g {
        1 => m1,
        2 => m1 + m2,
        3 => 3 * m1,
        4 => 2 * (m1 + m2),
        _ => 6 * m1,
    };
    let mn = m1.min(m2) as f64;
    let cos_r = match g {
        1 => -1.0,
        2 => 1.0 - 2.0 * mn / (m1 + m2) as f64,
        3 => 0.5,
        4 => (1.0 - mn / (m1 + m2) as f64).sqrt(),
        _ => 3f64.sqrt() / 2.0,
    };
    let alpha_exact = int((g as usize - 1) * k);
    let mut eig = minimal_leaf_curvatures(g, m1, m2);
    // Clean the trace so the zero-trace invariant is exact to rounding.
    let mean = eig.iter().sum::<f64>() / k as f64;
    eig.iter_mut().for_each(|e| *e -= mean);
    let sample = NormalSample::new(eig);
    let neg = sample.negated();
    let spectra = SpectrumFamily::new(vec![sample, neg], true)?;
    let alpha_sq = *alpha_exact.numer() as f64;
    let id = CatalogId::Hypersurface { g, m1, m2 };
    Link::build(
        id.to_string(),
        k,
        alpha_sq,
        Some(alpha_exact),
        clamp_acos(cos_r),
        Some(spectra),
        Provenance::Catalog(id),
        Some(k + 1),
    )
}

/// A focal submanifold `M_±` of an isoparametric foliation. `M_+` collapses
/// the `m1` directions; its shape operators have eigenvalues `cot(jπ/g)`,
/// `j = 1..g-1`, for every unit normal.
pub fn make_focal(g: u32, m1: usize, m2: usize, side: FocalSide) -> Result<Link> {
    if g == 1 {
        return Err(Error::DegenerateFocalSet);
    }
    check_pattern(g, m1, m2)?;
    let (collapsed, kept) = match side {
        FocalSide::Plus => (m1, m2),
        FocalSide::Minus => (m2, m1),
    };
    let leaf_dim = match g {
        2 => m1 + m2,
        3 => 3 * m1,
        4 => 2 * (m1 + m2),
        _ => 6 * m1,
    };
    let k = leaf_dim - collapsed;
    let gf = g as f64;
    let mut eig = Vec::with_capacity(k);
    for j in 1..g as usize {
        let mult = if j % 2 == 1 { kept } else { collapsed };
        let kappa = if 2 * j == g as usize {
            0.0
        } else {
            1.0 / (j as f64 * PI / gf).tan()
        };
        eig.extend(std::iter::repeat_n(kappa, mult));
    }
    debug_assert_eq!(eig.len(), k);
    let alpha_exact = match g {
        2 => int(0),
        3 => Ratio::new(k as i64, 3),
        4 => int(2 * kept),
        _ => Ratio::new(4 * k as i64, 3),
    };
    let alpha_sq = *alpha_exact.numer() as f64 / *alpha_exact.denom() as f64;
    let sample = NormalSample::new(eig);
    let spectra = SpectrumFamily::new(vec![sample], true)?;
    let id = CatalogId::Focal { g, m1, m2, side };
    Link::build(
        id.to_string(),
        k,
        alpha_sq,
        Some(alpha_exact),
        2.0 * PI / gf,
        Some(spectra),
        Provenance::Catalog(id),
        Some(leaf_dim + 1),
    )
}

pub(crate) fn clamp_acos(x: f64) -> f64 {
    let guard = 1e-14;
    let x = if x > 1.0 && x <= 1.0 + guard {
        1.0
    } else if x < -1.0 && x >= -1.0 - guard {
        -1.0
    } else {
        x.clamp(-1.0, 1.0)
    };
    x.acos()
}

/// All catalog entries of dimension `k ≤ max_dim`.
///
/// Spheres come first, then patterns `(g, m1, m2)` with `m1 ≤ m2 ≤ max_dim`
/// in increasing `g`, `m1`, `m2`; for each pattern the minimal hypersurface
/// precedes `M_+` and `M_-`. `M_-` is omitted when `m1 = m2`.
pub fn catalog_enumerate(max_dim: usize) -> Vec<Link> {
    let mut ids = Vec::new();
    for d in 1..=max_dim {
        ids.push(CatalogId::Sphere { d });
    }
    for g in [2u32, 3, 4, 6] {
        for m1 in 1..=max_dim {
            for m2 in m1..=max_dim {
                if check_pattern(g, m1, m2).is_err() {
                    continue;
                }
                ids.push(CatalogId::Hypersurface { g, m1, m2 });
                ids.push(CatalogId::Focal {
                    g,
                    m1,
                    m2,
                    side: FocalSide::Plus,
                });
                if m1 != m2 {
                    ids.push(CatalogId::Focal {
                        g,
                        m1,
                        m2,
                        side: FocalSide::Minus,
                    });
                }
            }
        }
    }
    ids.into_iter()
        .filter_map(|id| id.build().ok())
        .filter(|l| l.k <= max_dim)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn sphere_data() {
        let s = make_sphere(3).unwrap();
        assert_eq!((s.k(), s.alpha_sq(), s.normal_radius()), (3, 0.0, PI));
        let c = make_sphere(1).unwrap();
        assert_eq!((c.k(), c.alpha_sq(), c.normal_radius()), (1, 0.0, PI));
        let cls = classify(&make_sphere(7).unwrap());
        assert_eq!((cls.slope, cls.letter), (0.0, SlopeLetter::A));
        assert_eq!(make_sphere(0), Err(Error::InvalidDimension(0)));
        assert!(s.spectra().unwrap().is_complete());
    }

    #[test]
    fn isoparametric_hypersurface_data() {
        let l = make_isoparametric_hypersurface(3, 1, 1).unwrap();
        assert_eq!((l.k(), l.alpha_sq()), (3, 6.0));
        assert!(close(l.normal_radius(), PI / 3.0, 1e-15));

        let l = make_isoparametric_hypersurface(2, 1, 2).unwrap();
        assert_eq!((l.k(), l.alpha_sq()), (3, 3.0));
        assert!(close(l.normal_radius().cos(), 1.0 / 3.0, 1e-15));

        let l = make_isoparametric_hypersurface(4, 1, 1).unwrap();
        assert_eq!((l.k(), l.alpha_sq()), (4, 12.0));
        assert!(close(l.normal_radius().cos(), 0.5f64.sqrt(), 1e-15));
    }

    #[test]
    fn inadmissible_patterns_rejected() {
        assert!(make_isoparametric_hypersurface(3, 3, 3).is_err());
        assert!(make_isoparametric_hypersurface(3, 1, 2).is_err());
        assert!(make_isoparametric_hypersurface(6, 4, 4).is_err());
        assert!(make_isoparametric_hypersurface(5, 1, 1).is_err());
        assert_eq!(
            make_focal(1, 1, 1, FocalSide::Plus),
            Err(Error::DegenerateFocalSet)
        );
    }

    #[test]
    fn focal_data() {
        let l = make_focal(4, 2, 5, FocalSide::Plus).unwrap();
        assert_eq!((l.k(), l.alpha_sq()), (12, 10.0));
        assert!(close(l.normal_radius(), PI / 2.0, 1e-15));
        let l = make_focal(4, 2, 5, FocalSide::Minus).unwrap();
        assert_eq!((l.k(), l.alpha_sq()), (9, 4.0));

        let l = make_focal(6, 1, 1, FocalSide::Plus).unwrap();
        assert_eq!(l.k(), 5);
        assert!(close(l.alpha_sq(), 20.0 / 3.0, 1e-14));
        assert!(close(l.normal_radius(), PI / 3.0, 1e-15));
        assert_eq!(classify(&l).letter, SlopeLetter::C);
        assert_eq!(l.exact_slope(), Some(Ratio::new(4, 3)));

        let l = make_focal(3, 1, 1, FocalSide::Plus).unwrap();
        assert_eq!(l.k(), 2);
        assert!(close(l.alpha_sq(), 2.0 / 3.0, 1e-15));
        assert!(close(l.normal_radius(), 2.0 * PI / 3.0, 1e-15));
        assert_eq!(classify(&l).letter, SlopeLetter::A);
    }

    #[test]
    fn class_letters_and_romans() {
        let c = classify(&make_sphere(5).unwrap());
        assert!(c.is_class_i() && !c.is_class_ii());
        let c = classify(&make_isoparametric_hypersurface(2, 3, 3).unwrap());
        assert_eq!(c.letter, SlopeLetter::B);
        assert!(c.is_class_i() && c.is_class_ii());
        let c = classify(&make_focal(6, 1, 1, FocalSide::Plus).unwrap());
        assert_eq!(c.roman, SlopeRoman::II);
    }

    #[test]
    fn hypersurface_slope_is_g_minus_one() {
        for id in ["iso(2,1,5)", "iso(3,2,2)", "iso(4,3,7)", "iso(6,2,2)"] {
            let l: Link = id.parse::<CatalogId>().unwrap().build().unwrap();
            let g = match l.provenance() {
                Provenance::Catalog(CatalogId::Hypersurface { g, .. }) => *g,
                _ => unreachable!(),
            };
            assert_eq!(l.exact_slope(), Some(Ratio::from_integer(g as i64 - 1)));
        }
    }

    #[test]
    fn spectra_recompute_alpha_sq() {
        for l in catalog_enumerate(24) {
            let spec = l.spectra().unwrap();
            assert!(spec.is_complete());
            let m = spec.max_norm_sq();
            assert!(
                (m - l.alpha_sq()).abs() <= 1e-12 * l.alpha_sq().max(1.0),
                "{}: {m} vs {}",
                l.name(),
                l.alpha_sq()
            );
        }
    }

    #[test]
    fn catalog_small_caps() {
        assert!(catalog_enumerate(0).is_empty());
        let names: Vec<String> = catalog_enumerate(1)
            .iter()
            .map(|l| l.name().to_string())
            .collect();
        assert_eq!(names, ["S^1", "focal(2,1,1,+)"]);
    }

    #[test]
    fn catalog_id_round_trip() {
        for s in ["S^4", "iso(4,2,5)", "focal(6,1,1,+)", "focal(4,1,3,-)"] {
            assert_eq!(s.parse::<CatalogId>().unwrap().to_string(), s);
        }
        assert!("focal(4,1)".parse::<CatalogId>().is_err());
        assert!("T^2".parse::<CatalogId>().is_err());
    }

    #[test]
    fn user_link_validation() {
        assert!(Link::new("x", 2, 1.0, 0.0, None).is_err());
        assert!(Link::new("x", 2, 1.0, 4.0, None).is_err());
        assert!(Link::new("x", 0, 1.0, 1.0, None).is_err());
        let bad_trace =
            SpectrumFamily::new(vec![NormalSample::new(vec![1.0, 0.5])], false).unwrap();
        let err = Link::new("x", 2, 1.25, 1.0, Some(bad_trace)).unwrap_err();
        assert!(err.to_string().contains("spectra[0]"));
        let ok = SpectrumFamily::new(vec![NormalSample::new(vec![1.0, -1.0])], false).unwrap();
        assert!(Link::new("x", 2, 2.0, 1.0, Some(ok.clone())).is_ok());
        assert!(Link::new("x", 2, 3.0, 1.0, Some(ok)).is_err());
    }

    #[test]
    fn json_round_trip_is_idempotent() {
        let l = make_focal(4, 1, 2, FocalSide::Minus).unwrap();
        let once = l.to_json();
        let back = Link::from_json(&once).unwrap();
        assert_eq!(back.to_json(), once);
        assert_eq!(back.exact_slope(), l.exact_slope());

        let u = Link::new("u", 3, 2.5, 1.2, None).unwrap();
        let text = u.to_json();
        assert_eq!(Link::from_json(&text).unwrap().to_json(), text);
    }

    #[test]
    fn json_errors_name_the_field() {
        let err = Link::from_json(
            r#"{"schema":"link/v1","name":"x","k":2,"normal_radius":1.0,"provenance":"user"}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("alpha_sq"), "{err}");
        let err = Link::from_json(
            r#"{"schema":"link/v1","name":"x","k":2,"alpha_sq":1.0,"normal_radius":9.0,"provenance":"user"}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("normal_radius"), "{err}");
    }
}
