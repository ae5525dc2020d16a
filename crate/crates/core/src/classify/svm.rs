//! Binary linear SVM trained with Pegasos-style stochastic subgradient
//! steps on the hinge loss.
//!
//! The per-example objective is
//!
//! ```text
//! f(w, b) = lambda/2 * (|w|^2 + b^2) + max(0, 1 - y (w.x + b))
//! ```
//!
//! The bias is the weight of an implicit constant feature, so it is
//! regularized with the rest. At margin exactly 1 the hinge is treated as
//! active.

/// Sparse input row: `(dimension, value)` pairs.
pub type Row = [(usize, f64)];

/// `lambda/2 (|w|^2 + b^2) + max(0, 1 - y (w.x + b))`.
pub fn example_objective(w: &[f64], b: f64, x: &Row, y: f64, lambda: f64) -> f64 {
    let norm2: f64 = w.iter().map(|v| v * v).sum::<f64>() + b * b;
    let margin = y * (dot(w, x) + b);
    0.5 * lambda * norm2 + (1.0 - margin).max(0.0)
}

/// Subgradient of [`example_objective`] with respect to `(w, b)`.
pub fn example_subgradient(w: &[f64], b: f64, x: &Row, y: f64, lambda: f64) -> (Vec<f64>, f64) {
    let mut gw: Vec<f64> = w.iter().map(|v| lambda * v).collect();
    let mut gb = lambda * b;
    if hinge_active(y * (dot(w, x) + b)) {
        for &(i, v) in x {
            gw[i] -= y * v;
        }
        gb -= y;
    }
    (gw, gb)
}

#[inline]
pub fn hinge_active(margin: f64) -> bool {
    margin <= 1.0
}

fn dot(w: &[f64], x: &Row) -> f64 {
    x.iter().map(|&(i, v)| w[i] * v).sum()
}

/// Weights held as `scale * v` so the shrink step is O(1). The last slot of
/// `v` is the bias.
#[derive(Clone, Debug)]
pub(crate) struct Pegasos {
    v: Vec<f64>,
    scale: f64,
}

impl Pegasos {
    pub fn new(dim: usize) -> Self {
        Pegasos {
            v: vec![0.0; dim + 1],
            scale: 1.0,
        }
    }

    fn bias_slot(&self) -> usize {
        self.v.len() - 1
    }

    pub fn decision(&self, x: &Row) -> f64 {
        self.scale * (x.iter().map(|&(i, v)| self.v[i] * v).sum::<f64>() + self.v[self.bias_slot()])
    }

    /// One step at iteration `t >= 1` with step size `1 / (lambda t)`.
    pub fn step(&mut self, x: &Row, y: f64, lambda: f64, t: u64) {
        let eta = 1.0 / (lambda * t as f64);
        let active = hinge_active(y * self.decision(x));
        let shrink = 1.0 - eta * lambda;
        if shrink <= 0.0 {
            self.v.iter_mut().for_each(|v| *v = 0.0);
            self.scale = 1.0;
        } else {
            self.scale *= shrink;
            if self.scale < 1e-9 {
                let s = self.scale;
                self.v.iter_mut().for_each(|v| *v *= s);
                self.scale = 1.0;
            }
        }
        if active {
            let c = eta * y / self.scale;
            for &(i, v) in x {
                self.v[i] += c * v;
            }
            let b = self.bias_slot();
            self.v[b] += c;
        }
    }

    /// `lambda/2 |theta|^2 + mean hinge` over a data set.
    pub fn objective(&self, rows: &[Vec<(usize, f64)>], ys: &[f64], lambda: f64) -> f64 {
        let norm2 = self.scale * self.scale * self.v.iter().map(|v| v * v).sum::<f64>();
        let hinge: f64 = rows
            .iter()
            .zip(ys)
            .map(|(x, &y)| (1.0 - y * self.decision(x)).max(0.0))
            .sum();
        0.5 * lambda * norm2 + hinge / rows.len().max(1) as f64
    }

    /// `(weights, bias)`.
    pub fn into_weights(self) -> (Vec<f64>, f64) {
        let scale = self.scale;
        let mut v = self.v;
        let b = v.pop().unwrap() * scale;
        v.iter_mut().for_each(|x| *x *= scale);
        (v, b)
    }
}
