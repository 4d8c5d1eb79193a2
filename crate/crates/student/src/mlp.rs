//! Fully connected network with tanh hidden layers and a linear output,
//! trained with hand-written backpropagation.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng as _;
use teachkit_core::rng;

#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    pub sizes: Vec<usize>,
    /// `weights[l]` has shape `(sizes[l], sizes[l + 1])`.
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

/// Gradients with the same layout as the network parameters.
#[derive(Clone, Debug)]
pub struct Grads {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

impl Mlp {
    /// Uniform `(-1/sqrt(fan_in), 1/sqrt(fan_in))` initialisation for weights
    /// and biases.
    pub fn new(sizes: &[usize], seed: u64) -> Self {
        assert!(sizes.len() >= 2, "need at least an input and an output layer");
        let mut r = rng::derive(seed, "mlp-init");
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for w in sizes.windows(2) {
            let bound = 1.0 / (w[0] as f64).sqrt();
            weights.push(Array2::from_shape_fn((w[0], w[1]), |_| r.gen_range(-bound..bound)));
            biases.push(Array1::from_shape_fn(w[1], |_| r.gen_range(-bound..bound)));
        }
        Mlp {
            sizes: sizes.to_vec(),
            weights,
            biases,
        }
    }

    /// The 12 -> 64 -> 64 -> 64 -> 2 student architecture.
    pub fn student(seed: u64) -> Self {
        Self::new(
            &[crate::features::INPUT_DIM, 64, 64, 64, crate::features::OUTPUT_DIM],
            seed,
        )
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn forward(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut a = x.to_owned();
        let last = self.num_layers() - 1;
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = a.dot(w);
            z += b;
            if l < last {
                z.mapv_inplace(f64::tanh);
            }
            a = z;
        }
        a
    }

    /// Mean squared error over all output elements and its gradient.
    pub fn loss_and_grad(&self, x: ArrayView2<f64>, y: ArrayView2<f64>) -> (f64, Grads) {
        let last = self.num_layers() - 1;
        let mut acts: Vec<Array2<f64>> = Vec::with_capacity(self.num_layers() + 1);
        acts.push(x.to_owned());
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let mut z = acts[l].dot(w);
            z += b;
            if l < last {
                z.mapv_inplace(f64::tanh);
            }
            acts.push(z);
        }
        let out = &acts[last + 1];
        let diff = out - &y;
        let n = diff.len() as f64;
        let loss = diff.iter().map(|d| d * d).sum::<f64>() / n;

        let mut gw = Vec::with_capacity(self.num_layers());
        let mut gb = Vec::with_capacity(self.num_layers());
        let mut delta = diff * (2.0 / n);
        for l in (0..self.num_layers()).rev() {
            gw.push(acts[l].t().dot(&delta));
            gb.push(delta.sum_axis(Axis(0)));
            if l > 0 {
                let mut d = delta.dot(&self.weights[l].t());
                d.zip_mut_with(&acts[l], |g, &a| *g *= 1.0 - a * a);
                delta = d;
            }
        }
        gw.reverse();
        gb.reverse();
        (
            loss,
            Grads {
                weights: gw,
                biases: gb,
            },
        )
    }

    pub fn num_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>() + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    /// Parameters flattened as `W_0 (row-major), b_0, W_1, b_1, ...`.
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }

    pub fn set_params(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.num_params(), "parameter count mismatch");
        let mut k = 0;
        for (w, b) in self.weights.iter_mut().zip(self.biases.iter_mut()) {
            for v in w.iter_mut() {
                *v = flat[k];
                k += 1;
            }
            for v in b.iter_mut() {
                *v = flat[k];
                k += 1;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
            && self.biases.iter().all(|b| b.iter().all(|v| v.is_finite()))
    }
}

impl Grads {
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            out.extend(w.iter());
            out.extend(b.iter());
        }
        out
    }
}
