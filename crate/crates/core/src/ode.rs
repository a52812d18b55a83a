//! Dormand–Prince 5(4) embedded Runge–Kutta pair for scalar equations.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Fifth-order minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Step {
    pub y: f64,
    pub err: f64,
}

/// One Dormand–Prince step of size `h` from `(x, y)`.
pub(crate) fn dopri5_step<F>(f: &mut F, x: f64, y: f64, h: f64) -> Step
where
    F: FnMut(f64, f64) -> f64,
{
    let k1 = f(x, y);
    let k2 = f(x + C2 * h, y + h * A21 * k1);
    let k3 = f(x + C3 * h, y + h * (A31 * k1 + A32 * k2));
    let k4 = f(x + C4 * h, y + h * (A41 * k1 + A42 * k2 + A43 * k3));
    let k5 = f(
        x + C5 * h,
        y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
    );
    let k6 = f(
        x + h,
        y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
    );
    let y5 = y + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
    let k7 = f(x + h, y5);
    let err = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
    Step { y: y5, err }
}

/// Scaled error norm against a magnitude `size`; a step is accepted when it
/// is at most one.
pub(crate) fn error_norm(step: &Step, size: f64, rtol: f64, atol: f64) -> f64 {
    (step.err / (atol + rtol * size.abs())).abs()
}

/// Step-size factor for the next attempt after an error norm `en`.
pub(crate) fn step_factor(en: f64) -> f64 {
    const SAFETY: f64 = 0.9;
    if en == 0.0 {
        return 5.0;
    }
    (SAFETY * en.powf(-0.2)).clamp(0.2, 5.0)
}
