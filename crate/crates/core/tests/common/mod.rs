//! Test-side reference solver, independent of the library integrator: fixed
//! step classical RK4 on the profile equation, left via the quadratic start
//! only.

#![allow(dead_code)]

/// `B(t)` as a plain closure.
pub fn c_fn(alpha: f64) -> impl Fn(f64) -> f64 {
    move |t| (1.0 - alpha * t) * (alpha * t).exp()
}

pub fn f_fn(alpha: f64, m: usize) -> impl Fn(f64) -> f64 {
    let k = (m - 1) as f64;
    let mf = m as f64;
    move |t| (1.0 - alpha * t * (k / mf).sqrt()) * (1.0 + alpha * t / (k * mf).sqrt()).powf(k)
}

/// First zero of `w` for `w' = -m √(c² - w²)`, `c = cos^{m-1}θ B(tan θ)`,
/// or `None` if the profile meets the envelope or the bound first.
pub fn reference_angle(m: usize, alpha_sq: f64, bound: impl Fn(f64) -> f64) -> Option<f64> {
    let mf = m as f64;
    let disc = (mf - 2.0).powi(2) - 4.0 * alpha_sq;
    if disc < 0.0 {
        return None;
    }
    let b = mf * (mf + disc.sqrt()) / 4.0;
    let env = |th: f64| th.cos().powi(m as i32 - 1) * bound(th.tan());
    let rhs = |th: f64, w: f64| -mf * (env(th).powi(2) - w * w).max(0.0).sqrt();

    let h = 1e-6;
    let mut th = 2e-4;
    let mut w = 1.0 - b * th * th;
    while th < std::f64::consts::FRAC_PI_2 {
        let k1 = rhs(th, w);
        let k2 = rhs(th + h / 2.0, w + h / 2.0 * k1);
        let k3 = rhs(th + h / 2.0, w + h / 2.0 * k2);
        let k4 = rhs(th + h, w + h * k3);
        let next = w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if next <= 0.0 {
            return Some(th + h * w / (w - next));
        }
        let e = env(th + h);
        if bound((th + h).tan()) <= 0.0 || e * e - next * next < -1e-10 {
            return None;
        }
        th += h;
        w = next;
    }
    None
}

/// `Π (1 - t e_i)`.
pub fn det_poly(eigs: &[f64], t: f64) -> f64 {
    eigs.iter().map(|e| 1.0 - t * e).product()
}
