//! Shared inputs for the criterion benches in `benches/`.

use mfrac_core::GridFunction;

/// Deterministic positive test input with a few smooth bumps, values in `[1, e^2]`.
pub fn fixture(dimension: usize, level: u32, phase: f64) -> GridFunction {
    GridFunction::from_cells(dimension, level, |c| {
        let side = (1usize << level) as f64;
        let s: f64 = c
            .iter()
            .enumerate()
            .map(|(axis, &x)| ((x as f64 + 0.5) / side * std::f64::consts::TAU * (axis + 1) as f64 + phase).sin())
            .sum();
        (1.0 + s / dimension as f64).exp()
    })
    .expect("fixture grid")
}
