//! Uniform sample grids for the warping coordinate u.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A uniform grid on `[min, max]` with `count` samples (endpoints included).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        if !(min < max) || !min.is_finite() || !max.is_finite() {
            return Err(Error::Config(format!("invalid grid bounds [{min}, {max}]")));
        }
        if count < 5 {
            return Err(Error::Config(format!(
                "grid needs at least 5 samples for 4th-order stencils, got {count}"
            )));
        }
        Ok(Grid { min, max, count })
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + self.spacing() * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.point(i)).collect()
    }

    /// Index of the sample closest to `u`.
    pub fn nearest(&self, u: f64) -> usize {
        let i = ((u - self.min) / self.spacing()).round();
        (i.max(0.0) as usize).min(self.count - 1)
    }

    pub fn sample<F: Fn(f64) -> f64>(&self, f: F) -> Vec<f64> {
        self.points().iter().map(|&u| f(u)).collect()
    }
}

/// First-derivative stencil applied to a sample vector: 4th-order central
/// 5-point in the interior. Near the boundary, 6th-order one-sided 7-point
/// rows (when at least 7 samples exist) keep composed applications of this
/// operator 4th-order accurate; on tiny grids 4th-order one-sided rows are
/// used instead.
pub fn derivative4(samples: &[f64], h: f64) -> Vec<f64> {
    let n = samples.len();
    assert!(n >= 5, "derivative4 needs at least 5 samples");
    let mut out = vec![0.0; n];
    let apply = |stencil: &[f64], start: usize| -> f64 {
        stencil.iter().enumerate().map(|(j, c)| c * samples[start + j]).sum::<f64>() / h
    };
    let apply_rev = |stencil: &[f64]| -> f64 {
        -stencil.iter().enumerate().map(|(j, c)| c * samples[n - 1 - j]).sum::<f64>() / h
    };
    if n >= 7 {
        const FWD: [[f64; 7]; 3] = [
            [-49.0 / 20.0, 6.0, -7.5, 20.0 / 3.0, -3.75, 1.2, -1.0 / 6.0],
            [-1.0 / 6.0, -77.0 / 60.0, 2.5, -5.0 / 3.0, 5.0 / 6.0, -0.25, 1.0 / 30.0],
            [1.0 / 30.0, -0.4, -7.0 / 12.0, 4.0 / 3.0, -0.5, 2.0 / 15.0, -1.0 / 60.0],
        ];
        for (row, st) in FWD.iter().enumerate() {
            out[row] = apply(st, 0);
            out[n - 1 - row] = apply_rev(st);
        }
        for (i, o) in out.iter_mut().enumerate().take(n - 3).skip(3) {
            *o = (samples[i - 2] - 8.0 * samples[i - 1] + 8.0 * samples[i + 1]
                - samples[i + 2])
                / (12.0 * h);
        }
    } else {
        const FWD0: [f64; 5] = [-25.0 / 12.0, 4.0, -3.0, 4.0 / 3.0, -0.25];
        const FWD1: [f64; 5] = [-0.25, -5.0 / 6.0, 1.5, -0.5, 1.0 / 12.0];
        for (row, st) in [(0usize, FWD0), (1usize, FWD1)] {
            out[row] = apply(&st, 0);
            out[n - 1 - row] = apply_rev(&st);
        }
        for (i, o) in out.iter_mut().enumerate().take(n - 2).skip(2) {
            *o = (samples[i - 2] - 8.0 * samples[i - 1] + 8.0 * samples[i + 1]
                - samples[i + 2])
                / (12.0 * h);
        }
    }
    out
}
