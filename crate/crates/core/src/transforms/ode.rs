//! Adaptive Dormand–Prince 5(4) integration of complex ODE systems.

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { atol: 1e-10, rtol: 1e-10, max_steps: 1_000_000 }
    }
}

impl SolverOptions {
    pub fn with_tolerance(tol: f64) -> Self {
        Self { atol: tol, rtol: tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("integration stopped at t = {reached} of {target}: {reason}")]
pub struct ToleranceNotMet {
    pub reached: f64,
    pub target: f64,
    pub reason: &'static str,
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// Fifth-order weights are the last row of A; these are fifth minus fourth.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates the autonomous system `y' = f(y)` from `y0` over `[0, t_end]`.
pub fn integrate<F>(f: F, y0: &[Complex64], t_end: f64, opts: &SolverOptions) -> Result<Vec<Complex64>, ToleranceNotMet>
where
    F: Fn(&[Complex64], &mut [Complex64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    if t_end == 0.0 || n == 0 {
        return Ok(y);
    }
    let fail = |reached: f64, reason| ToleranceNotMet { reached, target: t_end, reason };

    let mut k: Vec<Vec<Complex64>> = vec![vec![Complex64::default(); n]; 7];
    let mut stage = vec![Complex64::default(); n];
    f(&y, &mut k[0]);

    let scale0 = y.iter().map(|v| v.norm()).fold(0.0, f64::max) * opts.rtol + opts.atol;
    let slope0 = k[0].iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut h = if slope0 > 0.0 { 0.01 * (scale0 / slope0).powf(0.2) } else { 1e-3 };
    h = h.clamp(1e-8, t_end);

    let mut t = 0.0;
    for _ in 0..opts.max_steps {
        if t_end - t <= 0.0 {
            return Ok(y);
        }
        let last = h >= t_end - t;
        if last {
            h = t_end - t;
        }
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, a) in A[s].iter().enumerate().take(s) {
                    acc += k[j][i] * (h * a);
                }
                stage[i] = acc;
            }
            let (_, tail) = k.split_at_mut(s);
            f(&stage, &mut tail[0]);
        }
        // Stage 6 evaluated the fifth-order solution; k[6] = f(y_new).
        let mut err: f64 = 0.0;
        let mut finite = true;
        for i in 0..n {
            let y_new = stage[i];
            let mut e = Complex64::default();
            for (j, w) in E.iter().enumerate() {
                e += k[j][i] * (h * w);
            }
            let sc = opts.atol + opts.rtol * y[i].norm().max(y_new.norm());
            err = err.max(e.norm() / sc);
            finite &= y_new.re.is_finite() && y_new.im.is_finite();
        }
        if !finite || !err.is_finite() {
            h *= 0.25;
            if h < 1e-14 * t_end.max(1.0) {
                return Err(fail(t, "solution is not finite"));
            }
            continue;
        }
        if err <= 1.0 {
            t = if last { t_end } else { t + h };
            y.copy_from_slice(&stage);
            let (first, rest) = k.split_at_mut(6);
            first[0].copy_from_slice(&rest[0]);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < 1e-14 * t_end.max(1.0) {
            return Err(fail(t, "step size underflow"));
        }
    }
    if t >= t_end {
        Ok(y)
    } else {
        Err(fail(t, "step limit reached"))
    }
}
