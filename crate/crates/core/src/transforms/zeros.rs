//! Locating zeros of `u ↦ Ψ(u, t)` for one-dimensional systems.

use num_complex::Complex64;
use rayon::prelude::*;

use super::ode::SolverOptions;
use super::riccati::RiccatiSystem;
use super::TransformError;

/// `|Ψ|` below this counts as a zero.
pub const ZERO_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchRectangle {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl SearchRectangle {
    pub fn around(center: Complex64, half_width: f64) -> Self {
        Self {
            re: (center.re - half_width, center.re + half_width),
            im: (center.im - half_width, center.im + half_width),
        }
    }

    fn contains(&self, z: Complex64) -> bool {
        let slack_re = 1e-9 * (self.re.1 - self.re.0).max(1.0);
        let slack_im = 1e-9 * (self.im.1 - self.im.0).max(1.0);
        z.re >= self.re.0 - slack_re && z.re <= self.re.1 + slack_re && z.im >= self.im.0 - slack_im && z.im <= self.im.1 + slack_im
    }
}

/// Grid scan of `|Ψ(u, t)|` over `grid × grid` points, then Newton refinement
/// from the best point (derivative by central differences; `Ψ` is analytic
/// in `u`). Returns `None` when no point with `|Ψ| < 1e-8` is found inside the
/// rectangle.
pub fn find_psi_zero(
    system: &RiccatiSystem,
    t: f64,
    rect: SearchRectangle,
    grid: usize,
) -> Result<Option<Complex64>, TransformError> {
    if system.k != 1 {
        return Err(TransformError::InvalidArgument(format!("zero search needs k = 1, system has k = {}", system.k)));
    }
    if t.is_nan() || t <= 0.0 {
        return Err(TransformError::InvalidArgument("zero search needs t > 0".into()));
    }
    let grid = grid.max(2);
    let compiled = system.compile();
    let opts = SolverOptions::with_tolerance(1e-12);
    let psi = |u: Complex64| -> Option<Complex64> {
        compiled.solve(&[u], t, &opts).ok().map(|v| v.psi[0]).filter(|z| z.re.is_finite() && z.im.is_finite())
    };
    let step = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (grid - 1) as f64;
    let best = (0..grid * grid)
        .into_par_iter()
        .filter_map(|idx| {
            let u = Complex64::new(step(rect.re.0, rect.re.1, idx / grid), step(rect.im.0, rect.im.1, idx % grid));
            psi(u).map(|p| (p.norm(), idx, u))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let Some((_, _, mut u)) = best else {
        return Ok(None);
    };
    let h = 1e-6;
    for _ in 0..60 {
        let Some(value) = psi(u) else { break };
        if value.norm() < 1e-14 {
            break;
        }
        let (Some(fwd), Some(back)) = (psi(u + h), psi(u - h)) else { break };
        let derivative = (fwd - back) / (2.0 * h);
        if derivative.norm() == 0.0 {
            break;
        }
        let delta = value / derivative;
        u -= delta;
        if delta.norm() < 1e-15 * u.norm().max(1.0) {
            break;
        }
    }
    Ok(psi(u).filter(|p| p.norm() < ZERO_THRESHOLD && rect.contains(u)).map(|_| u))
}
