//! Brute-force transform by uniformization of the generator.

use num_complex::Complex64;
use num_traits::Zero;

use crate::counters::shift;
use crate::model::AffineModel;
use crate::rational::to_f64;

/// Truncation bound on the neglected Poisson tail, relative to `max |g|`.
pub const ORACLE_TOLERANCE: f64 = 1e-12;

/// `e^{tQ} g` with `g(y) = e^{⟨u, y⟩}`, indexed like the state space.
///
/// `e^{tQ} = Σ_n e^{−Λt} (Λt)^n / n! · P^n` with `P = I + Q/Λ` and `Λ` the
/// largest exit rate. Since `P` is stochastic, `|P^n g| ≤ max|g|`, and the
/// sum stops once the Poisson tail times `max|g|` drops below
/// [`ORACLE_TOLERANCE`].
pub fn transform_oracle(model: &AffineModel, u: &[Complex64], t: f64) -> Vec<Complex64> {
    let space = &model.space;
    let g: Vec<Complex64> = space
        .points()
        .iter()
        .map(|y| y.iter().zip(u).map(|(&yi, ui)| ui * yi as f64).sum::<Complex64>().exp())
        .collect();
    let g_max = g.iter().map(|z| z.norm()).fold(0.0, f64::max);

    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(space.len());
    let mut exit = Vec::with_capacity(space.len());
    for x in space.points() {
        let mut row = Vec::new();
        let mut total = 0.0;
        for ch in model.channels() {
            let rate = to_f64(&ch.intensity.eval(x));
            if rate > 0.0 {
                let j = space.index_of(&shift(x, &ch.jump)).expect("valid model keeps jumps inside E");
                row.push((j, rate));
                total += rate;
            }
        }
        rows.push(row);
        exit.push(total);
    }
    let lambda = exit.iter().copied().fold(0.0, f64::max);
    if t == 0.0 || lambda == 0.0 {
        return g;
    }
    let lt = lambda * t;
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        rows.iter()
            .zip(&exit)
            .zip(v)
            .map(|((row, &out), &vi)| {
                let mut acc = vi * (1.0 - out / lambda);
                for &(j, rate) in row {
                    acc += v[j] * (rate / lambda);
                }
                acc
            })
            .collect()
    };

    let mut result = vec![Complex64::zero(); g.len()];
    let mut term = g;
    let mut log_w = -lt;
    let mut n = 0usize;
    loop {
        let w = log_w.exp();
        for (r, v) in result.iter_mut().zip(&term) {
            *r += v * w;
        }
        let log_next = log_w + lt.ln() - ((n + 1) as f64).ln();
        if (n + 2) as f64 > lt {
            let tail = log_next.exp() / (1.0 - lt / (n + 2) as f64);
            if g_max * tail < ORACLE_TOLERANCE {
                break;
            }
        }
        term = apply(&term);
        log_w = log_next;
        n += 1;
    }
    result
}
