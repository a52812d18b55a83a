//! Minimal products `L1 × ... × Ln = (λ1 L1, ..., λn Ln)`, `λi = √(ki/k)`.
//!
//! Derived data of a product: dimension `k = Σ ki`, curvature
//! `α² = k·max{1, max_i α_i²/k_i}`, normal radius
//! `cos R = 1 - min_i λi²(1 - cos Ri)`, and, when the factors carry complete
//! spectra, the shape-operator spectra over unit normals
//! `ν = a1(ξ1, 0) + a2(0, ξ2) + a0 η0`.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::links::{clamp_acos, EtaPencil, Link, NormalSample, Provenance, SpectrumFamily};

/// Grid points per angular parameter of the `(a0, a1, a2)` sphere.
pub const DEFAULT_RESOLUTION: usize = 64;

/// `λi = √(ki/k)`.
pub fn weights(dims: &[usize]) -> Vec<f64> {
    let k: usize = dims.iter().sum();
    dims.iter()
        .map(|&ki| (ki as f64 / k as f64).sqrt())
        .collect()
}

/// Index of the factor attaining `min_i λi²(1 - cos Ri)`; the first one on ties.
pub fn dominant_factor(radii: &[(usize, f64)]) -> usize {
    let k: usize = radii.iter().map(|r| r.0).sum();
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for (i, &(ki, ri)) in radii.iter().enumerate() {
        let v = ki as f64 / k as f64 * (1.0 - ri.cos());
        if v < best_val {
            best_val = v;
            best = i;
        }
    }
    best
}

/// Normal radius of a minimal product from the factors' `(ki, Ri)`.
pub fn product_normal_radius(radii: &[(usize, f64)]) -> f64 {
    if radii.len() == 1 {
        return radii[0].1;
    }
    let k: usize = radii.iter().map(|r| r.0).sum();
    let gap = radii
        .iter()
        .map(|&(ki, ri)| ki as f64 / k as f64 * (1.0 - ri.cos()))
        .fold(f64::INFINITY, f64::min);
    clamp_acos(1.0 - gap)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductOptions {
    /// Compose factor spectra when both operands of a fold step carry
    /// complete spectra.
    pub compose_spectra: bool,
    pub resolution: usize,
}

impl Default for ProductOptions {
    fn default() -> Self {
        Self {
            compose_spectra: true,
            resolution: DEFAULT_RESOLUTION,
        }
    }
}

pub fn minimal_product(factors: &[Link]) -> Result<Link> {
    minimal_product_with(factors, &ProductOptions::default())
}

/// n-ary minimal product as a left fold of the binary rule.
pub fn minimal_product_with(factors: &[Link], opts: &ProductOptions) -> Result<Link> {
    let (first, rest) = factors.split_first().ok_or(Error::EmptyProduct)?;
    if rest.is_empty() {
        return Ok(first.clone());
    }
    let mut acc = first.clone();
    let mut leaves = vec![first.name().to_string()];
    for f in rest {
        leaves.push(f.name().to_string());
        acc = binary_product(&acc, f, leaves.clone(), opts)?;
    }
    Ok(acc)
}

fn binary_product(a: &Link, b: &Link, leaves: Vec<String>, opts: &ProductOptions) -> Result<Link> {
    let k = a.k() + b.k();
    let kf = k as f64;
    let alpha_sq = kf * a.slope().max(b.slope()).max(1.0);
    let alpha_sq_exact = match (a.exact_slope(), b.exact_slope()) {
        (Some(sa), Some(sb)) => {
            let one = Ratio::from_integer(1);
            Some(Ratio::from_integer(k as i64) * sa.max(sb).max(one))
        }
        _ => None,
    };
    let radius = product_normal_radius(&[(a.k(), a.normal_radius()), (b.k(), b.normal_radius())]);
    let both_complete = matches!(
        (a.spectra(), b.spectra()),
        (Some(x), Some(y)) if x.is_complete() && y.is_complete()
    );
    let spectra = if opts.compose_spectra && both_complete {
        Some(compose_spectra(a, b, opts.resolution)?)
    } else {
        None
    };
    let ambient = match (a.ambient_dim(), b.ambient_dim()) {
        (Some(x), Some(y)) => Some(x + y + 1),
        _ => None,
    };
    let name = leaves.join(" x ");
    let alpha_sq = alpha_sq_exact
        .map(|r| *r.numer() as f64 / *r.denom() as f64)
        .unwrap_or(alpha_sq);
    Link::build(
        name,
        k,
        alpha_sq,
        alpha_sq_exact,
        radius,
        spectra,
        Provenance::ProductOf(leaves),
        ambient,
    )
}

/// Shape-operator spectra of `f1 × f2` over a grid of unit normals
/// `(a0, a1, a2) = (cos φ, sin φ cos ψ, sin φ sin ψ)`, `φ ∈ [0, π]`,
/// `ψ ∈ [0, π/2]`; factor normals enter with both signs.
///
/// When every factor shape operator vanishes only `a0` matters and the result
/// is the closed-form η pencil, flagged complete.
pub fn compose_spectra(f1: &Link, f2: &Link, resolution: usize) -> Result<SpectrumFamily> {
    let s1 = f1
        .spectra()
        .ok_or_else(|| Error::SpectraUnavailable(f1.name().to_string()))?;
    let s2 = f2
        .spectra()
        .ok_or_else(|| Error::SpectraUnavailable(f2.name().to_string()))?;
    if resolution < 8 {
        return Err(Error::InvalidInput(format!(
            "spectra resolution must be at least 8, got {resolution}"
        )));
    }
    let (k1, k2) = (f1.k(), f2.k());
    if s1.is_complete() && s2.is_complete() && s1.is_totally_geodesic() && s2.is_totally_geodesic()
    {
        return Ok(SpectrumFamily::from_pencil(
            EtaPencil { k1, k2 },
            resolution,
        ));
    }
    let w = weights(&[k1, k2]);
    let (l1, l2) = (w[0], w[1]);
    let mut directions = vec![(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0)];
    for i in 1..resolution {
        let phi = std::f64::consts::PI * i as f64 / resolution as f64;
        for j in 0..=resolution {
            let psi = std::f64::consts::FRAC_PI_2 * j as f64 / resolution as f64;
            directions.push((phi.cos(), phi.sin() * psi.cos(), phi.sin() * psi.sin()));
        }
    }
    if resolution % 2 == 1 {
        // Keep the pure ξ1 and ξ2 directions, where |A_ν|² peaks.
        directions.push((0.0, 1.0, 0.0));
        directions.push((0.0, 0.0, 1.0));
    }
    let mu = s1.signed_samples();
    let sigma = s2.signed_samples();
    let mut samples = Vec::with_capacity(mu.len() * sigma.len() * directions.len());
    for m in &mu {
        for s in &sigma {
            for &(a0, a1, a2) in &directions {
                let mut eig = Vec::with_capacity(k1 + k2);
                eig.extend(m.eigenvalues.iter().map(|x| a1 * x / l1 - a0 * l2 / l1));
                eig.extend(s.eigenvalues.iter().map(|x| a2 * x / l2 + a0 * l1 / l2));
                samples.push(NormalSample::new(eig));
            }
        }
    }
    SpectrumFamily::new(samples, false)
}

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// `D(t) = inf_ν det(I - t·A_ν)` over the represented unit normals.
#[derive(Debug, Clone, PartialEq)]
pub struct DetEnvelope {
    family: SpectrumFamily,
}

impl DetEnvelope {
    pub fn from_link(link: &Link) -> Result<Self> {
        let family = link
            .spectra()
            .cloned()
            .ok_or_else(|| Error::SpectraUnavailable(link.name().to_string()))?;
        Ok(Self { family })
    }

    pub fn is_complete(&self) -> bool {
        self.family.is_complete()
    }

    pub fn family(&self) -> &SpectrumFamily {
        &self.family
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self.family.pencil() {
            Some(p) => pencil_min(&p, self.family.samples().len() - 1, t),
            None => self
                .family
                .samples()
                .iter()
                .map(|s| s.det_one_minus(t))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// Smallest `t > 0` where some represented `det(I - tA)` vanishes.
    pub fn first_zero(&self) -> f64 {
        let max_eig = self
            .family
            .samples()
            .iter()
            .flat_map(|s| s.eigenvalues.iter().copied())
            .fold(0.0, f64::max);
        if max_eig > 0.0 {
            1.0 / max_eig
        } else {
            f64::INFINITY
        }
    }

    /// The sample that attains the infimum for all small `t > 0`: the
    /// lexicographic minimum of the coefficient vectors of `det(I - tA)`.
    pub fn leading_sample(&self) -> NormalSample {
        const ORDER: usize = 8;
        let samples: Vec<NormalSample> = match self.family.pencil() {
            Some(p) => vec![p.sample(1.0), p.sample(-1.0)],
            None => self.family.samples().to_vec(),
        };
        let coeffs =
            |s: &NormalSample| crate::series::Series::det_one_minus(&s.eigenvalues, ORDER).0;
        let mut best = samples[0].clone();
        let mut best_c = coeffs(&best);
        for s in samples.iter().skip(1) {
            let c = coeffs(s);
            for (x, y) in c.iter().zip(&best_c) {
                let tol = 1e-12 * x.abs().max(y.abs()).max(1.0);
                if (x - y).abs() <= tol {
                    continue;
                }
                if x < y {
                    best = s.clone();
                    best_c = c.clone();
                }
                break;
            }
        }
        best
    }
}

/// Minimum over `a0 ∈ [-1, 1]` of the pencil determinant: best grid point,
/// then golden-section refinement on the neighbouring cells.
fn pencil_min(p: &EtaPencil, grid: usize, t: f64) -> f64 {
    let n = grid.max(2);
    let at = |i: usize| -1.0 + 2.0 * i as f64 / n as f64;
    let f = |a0: f64| p.det_one_minus(a0, t);
    let (mut bi, mut bv) = (0, f(-1.0));
    for i in 1..=n {
        let v = f(at(i));
        if v < bv {
            bi = i;
            bv = v;
        }
    }
    let (mut lo, mut hi) = (at(bi.saturating_sub(1)), at((bi + 1).min(n)));
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = f(x2);
        }
    }
    bv.min(f1).min(f2)
}

pub fn det_envelope(link: &Link, t: f64) -> Result<f64> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::InvalidInput(format!(
            "t must be non-negative, got {t}"
        )));
    }
    Ok(DetEnvelope::from_link(link)?.eval(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::links::{make_focal, make_isoparametric_hypersurface, make_sphere, FocalSide};
    use std::f64::consts::PI;

    fn sphere(d: usize) -> Link {
        make_sphere(d).unwrap()
    }

    #[test]
    fn clifford_tori() {
        let t = minimal_product(&[sphere(1), sphere(1)]).unwrap();
        assert_eq!((t.k(), t.alpha_sq()), (2, 2.0));
        assert_eq!(t.normal_radius(), PI / 2.0);

        let s = minimal_product(&[sphere(3), sphere(3)]).unwrap();
        assert_eq!((s.k(), s.alpha_sq()), (6, 6.0));
        assert!((s.normal_radius() - PI / 2.0).abs() < 1e-15);
        assert!(s.spectra().unwrap().is_complete());
        assert_eq!(s.ambient_dim(), Some(7));
        assert_eq!(t.ambient_dim(), Some(3));
    }

    #[test]
    fn focal_times_sphere() {
        let f = make_focal(6, 1, 1, FocalSide::Plus).unwrap();
        let p = minimal_product(&[f, sphere(10)]).unwrap();
        assert_eq!(p.k(), 15);
        assert!((p.alpha_sq() - 20.0).abs() < 1e-12);
        assert!((p.normal_radius().cos() - 5.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn single_factor_unchanged() {
        let l = make_isoparametric_hypersurface(4, 1, 2).unwrap();
        assert_eq!(minimal_product(std::slice::from_ref(&l)).unwrap(), l);
        assert_eq!(minimal_product(&[]), Err(Error::EmptyProduct));
    }

    #[test]
    fn normal_radius_examples() {
        assert_eq!(product_normal_radius(&[(1, PI), (1, PI)]), PI / 2.0);
        let r = product_normal_radius(&[(3, PI / 3.0), (3, PI / 3.0)]);
        assert!((r - 0.75f64.acos()).abs() < 1e-15);
    }

    #[test]
    fn pencil_spectrum_of_sphere_products() {
        let s = minimal_product(&[sphere(3), sphere(3)]).unwrap();
        let fam = s.spectra().unwrap();
        let top = fam.pencil().unwrap().sample(1.0);
        assert_eq!(top.eigenvalues, vec![-1.0, -1.0, -1.0, 1.0, 1.0, 1.0]);

        let p = EtaPencil { k1: 2, k2: 5 };
        let e = p.sample(1.0).eigenvalues;
        assert!((e[0] + (5.0f64 / 2.0).sqrt()).abs() < 1e-15);
        assert!((e[6] - (2.0f64 / 5.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn simons_envelope_closed_form() {
        let s = minimal_product(&[sphere(3), sphere(3)]).unwrap();
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let d = det_envelope(&s, t).unwrap();
            assert!((d - (1.0 - t * t).powi(3)).abs() < 1e-14, "t={t}");
        }
        assert_eq!(det_envelope(&s, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn composed_samples_are_trace_free() {
        let a = make_focal(4, 1, 2, FocalSide::Plus).unwrap();
        let b = make_isoparametric_hypersurface(3, 1, 1).unwrap();
        let fam = compose_spectra(&a, &b, 8).unwrap();
        assert!(!fam.is_complete());
        for s in fam.samples() {
            assert!(s.trace().abs() < 1e-12);
        }
        let p = minimal_product_with(
            &[a, b],
            &ProductOptions {
                compose_spectra: true,
                resolution: 8,
            },
        )
        .unwrap();
        assert!((p.spectra().unwrap().max_norm_sq() - p.alpha_sq()).abs() < 1e-9);
    }

    #[test]
    fn compose_requires_spectra_and_resolution() {
        let a = sphere(2).without_spectra();
        assert!(matches!(
            compose_spectra(&a, &sphere(2), 16),
            Err(Error::SpectraUnavailable(_))
        ));
        assert!(matches!(
            compose_spectra(&sphere(2), &sphere(2), 4),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn envelope_first_zero() {
        let s = minimal_product(&[sphere(3), sphere(3)]).unwrap();
        let env = DetEnvelope::from_link(&s).unwrap();
        assert!((env.first_zero() - 1.0).abs() < 1e-15);
        assert_eq!(
            DetEnvelope::from_link(&sphere(4)).unwrap().first_zero(),
            f64::INFINITY
        );
    }
}
