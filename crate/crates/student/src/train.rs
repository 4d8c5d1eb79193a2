//! Mini-batch behavior cloning.

use ndarray::Axis;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use teachkit_core::rng;

use crate::dataset::BcDataset;
use crate::error::{Result, StudentError};
use crate::mlp::Mlp;
use crate::optim::Adam;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch: usize,
    pub seed: u64,
}

impl TrainConfig {
    /// 50 epochs at lr 5e-4, batch 256.
    pub fn half_trained(seed: u64) -> Self {
        TrainConfig {
            epochs: 50,
            lr: 5e-4,
            batch: 256,
            seed,
        }
    }

    /// 400 epochs at lr 5e-4, batch 256.
    pub fn full(seed: u64) -> Self {
        TrainConfig {
            epochs: 400,
            ..Self::half_trained(seed)
        }
    }
}

/// Trains in place and returns the mean training loss of every epoch.
pub fn bc_train(net: &mut Mlp, data: &BcDataset, cfg: &TrainConfig) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(StudentError::EmptyDataset("behavior cloning".into()));
    }
    if cfg.batch == 0 || !(cfg.lr > 0.0) {
        return Err(StudentError::InvalidParameter(format!(
            "batch {} and lr {} must be positive",
            cfg.batch, cfg.lr
        )));
    }
    let mut opt = Adam::new(net, cfg.lr);
    let mut r = rng::derive(cfg.seed, "bc-shuffle");
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut curve = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut r);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch) {
            let x = data.inputs.select(Axis(0), chunk);
            let y = data.actions.select(Axis(0), chunk);
            let (loss, g) = net.loss_and_grad(x.view(), y.view());
            if !loss.is_finite() {
                return Err(StudentError::Diverged { epoch, loss });
            }
            total += loss * chunk.len() as f64;
            opt.step(net, &g);
        }
        let loss = total / data.len() as f64;
        if !loss.is_finite() || !net.is_finite() {
            return Err(StudentError::Diverged { epoch, loss });
        }
        curve.push(loss);
    }
    Ok(curve)
}

/// Same optimizer as [`bc_train`], applied to practice pairs.
pub fn fine_tune(net: &mut Mlp, practice: &BcDataset, cfg: &TrainConfig) -> Result<Vec<f64>> {
    if practice.is_empty() {
        return Err(StudentError::EmptyDataset("practice set".into()));
    }
    if cfg.epochs == 0 {
        return Ok(Vec::new());
    }
    bc_train(net, practice, cfg)
}

/// Mean squared action error over all elements.
pub fn eval_mse(net: &Mlp, data: &BcDataset) -> f64 {
    if data.is_empty() {
        return f64::NAN;
    }
    let out = net.forward(data.inputs.view());
    let d = out - &data.actions;
    d.iter().map(|v| v * v).sum::<f64>() / d.len() as f64
}
