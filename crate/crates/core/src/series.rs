//! Truncated power series, used to leave the degenerate start of the
//! vanishing-angle ODE.

/// Coefficients `c[0] + c[1] x + ... + c[n] x^n`, truncated at order `n`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Series(pub Vec<f64>);

impl Series {
    pub fn zero(order: usize) -> Self {
        Series(vec![0.0; order + 1])
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn mul(&self, other: &Series) -> Series {
        let n = self.order().min(other.order());
        let mut out = Series::zero(n);
        for (i, a) in self.0.iter().enumerate().take(n + 1) {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in other.0.iter().enumerate().take(n + 1 - i) {
                out.0[i + j] += a * b;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Series {
        Series(self.0.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Series) -> Series {
        let n = self.order().min(other.order());
        Series((0..=n).map(|i| self.0[i] + other.0[i]).collect())
    }

    pub fn derivative(&self) -> Series {
        let n = self.order();
        let mut out = Series::zero(n);
        for i in 1..=n {
            out.0[i - 1] = i as f64 * self.0[i];
        }
        out
    }

    /// Multiplies by `x`.
    pub fn shift(&self) -> Series {
        let n = self.order();
        let mut out = Series::zero(n);
        out.0[1..].copy_from_slice(&self.0[..n]);
        out
    }

    /// `self^p` for `self[0] = 1`, via Miller's recurrence.
    pub fn powf(&self, p: f64) -> Series {
        debug_assert!((self.0[0] - 1.0).abs() < 1e-15);
        let n = self.order();
        let a = &self.0;
        let mut g = vec![0.0; n + 1];
        g[0] = 1.0;
        for m in 1..=n {
            let mut s = 0.0;
            for kk in 1..=m {
                s += ((p + 1.0) * kk as f64 - m as f64) * a[kk] * g[m - kk];
            }
            g[m] = s / m as f64;
        }
        Series(g)
    }

    /// `self / other` with `other[0] ≠ 0`.
    pub fn div(&self, other: &Series) -> Series {
        let n = self.order().min(other.order());
        let mut q = vec![0.0; n + 1];
        for m in 0..=n {
            let mut s = self.0[m];
            for kk in 1..=m {
                s -= other.0[kk] * q[m - kk];
            }
            q[m] = s / other.0[0];
        }
        Series(q)
    }

    /// `outer(inner(x))` for `inner[0] = 0`.
    pub fn compose(outer: &Series, inner: &Series) -> Series {
        debug_assert_eq!(inner.0[0], 0.0);
        let n = inner.order();
        let mut out = Series::zero(n);
        // Horner: outer[d] + inner·(outer[d-1] + ...).
        for c in outer.0.iter().rev() {
            out = out.mul(inner);
            out.0[0] += c;
        }
        out
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    #[cfg(test)]
    pub fn eval_derivative(&self, x: f64) -> f64 {
        self.derivative().eval(x)
    }

    pub fn cos(order: usize) -> Series {
        let mut s = Series::zero(order);
        let mut fact = 1.0;
        for i in 0..=order {
            if i > 0 {
                fact *= i as f64;
            }
            if i % 2 == 0 {
                s.0[i] = if (i / 2) % 2 == 0 { 1.0 } else { -1.0 } / fact;
            }
        }
        s
    }

    pub fn sin(order: usize) -> Series {
        let mut s = Series::zero(order);
        let mut fact = 1.0;
        for i in 0..=order {
            if i > 0 {
                fact *= i as f64;
            }
            if i % 2 == 1 {
                s.0[i] = if (i / 2) % 2 == 0 { 1.0 } else { -1.0 } / fact;
            }
        }
        s
    }

    pub fn tan(order: usize) -> Series {
        Series::sin(order).div(&Series::cos(order))
    }

    /// `Π (1 - x·λ_i)`.
    pub fn det_one_minus(eigenvalues: &[f64], order: usize) -> Series {
        let mut out = Series::zero(order);
        out.0[0] = 1.0;
        for e in eigenvalues {
            let mut f = Series::zero(order);
            f.0[0] = 1.0;
            if order >= 1 {
                f.0[1] = -e;
            }
            out = out.mul(&f);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tan_coefficients() {
        let t = Series::tan(7);
        let expect = [0.0, 1.0, 0.0, 1.0 / 3.0, 0.0, 2.0 / 15.0, 0.0, 17.0 / 315.0];
        for (a, b) in t.0.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn powf_matches_binomial() {
        let mut f = Series::zero(6);
        f.0[0] = 1.0;
        f.0[1] = 2.0;
        let g = f.powf(3.0);
        let expect = [1.0, 6.0, 12.0, 8.0, 0.0, 0.0, 0.0];
        for (a, b) in g.0.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let c = Series::cos(8).powf(0.5);
        let x: f64 = 0.1;
        assert!((c.eval(x) - x.cos().sqrt()).abs() < 1e-10);
    }

    #[test]
    fn compose_exp_of_tan() {
        let order = 10;
        let mut exp = Series::zero(order);
        let mut f = 1.0;
        for i in 0..=order {
            if i > 0 {
                f *= i as f64;
            }
            exp.0[i] = 1.0 / f;
        }
        let s = Series::compose(&exp, &Series::tan(order));
        let x: f64 = 0.05;
        assert!((s.eval(x) - x.tan().exp()).abs() < 1e-14);
    }

    #[test]
    fn det_polynomial() {
        let s = Series::det_one_minus(&[1.0, -1.0, 2.0], 5);
        // (1 - x)(1 + x)(1 - 2x) = 1 - 2x - x^2 + 2x^3
        let expect = [1.0, -2.0, -1.0, 2.0, 0.0, 0.0];
        assert_eq!(s.0, expect);
    }
}
