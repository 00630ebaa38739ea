//! Full-batch logistic regression for the awareness weights.

use alloc::vec::Vec;

use crate::awareness::AwarenessFeatures;
use crate::error::{Error, Result};
use crate::model::AwarenessWeights;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainParams {
    pub learning_rate: f64,
    pub iterations: usize,
    /// L2 penalty on the three weights (the bias is not penalised).
    pub l2: f64,
}

impl Default for TrainParams {
    fn default() -> Self {
        TrainParams { learning_rate: 0.1, iterations: 5000, l2: 0.0 }
    }
}

/// Parameter vector layout: `[w_r, w_e, w_s, c]`.
pub type Theta = [f64; 4];

pub fn theta_of(w: &AwarenessWeights) -> Theta {
    [w.w_r, w.w_e, w.w_s, w.bias_c]
}

pub fn weights_of(t: &Theta) -> AwarenessWeights {
    AwarenessWeights { w_r: t[0], w_e: t[1], w_s: t[2], bias_c: t[3] }
}

#[inline]
fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + libm::log1p(libm::exp(-z))
    } else {
        libm::log1p(libm::exp(z))
    }
}

/// Mean logistic loss and its analytic gradient at `theta`.
pub fn loss_and_gradient(data: &[(AwarenessFeatures, bool)], theta: &Theta, l2: f64) -> (f64, Theta) {
    let n = data.len() as f64;
    let mut loss = 0.0;
    let mut grad = [0.0; 4];
    for (x, label) in data {
        let xs = x.as_array();
        let z = theta[0] * xs[0] + theta[1] * xs[1] + theta[2] * xs[2] + theta[3];
        let y = if *label { 1.0 } else { 0.0 };
        loss += softplus(z) - y * z;
        let r = sigmoid(z) - y;
        for j in 0..3 {
            grad[j] += r * xs[j];
        }
        grad[3] += r;
    }
    loss /= n;
    grad.iter_mut().for_each(|g| *g /= n);
    if l2 != 0.0 {
        for j in 0..3 {
            loss += 0.5 * l2 * theta[j] * theta[j];
            grad[j] += l2 * theta[j];
        }
    }
    (loss, grad)
}

fn check_dataset(data: &[(AwarenessFeatures, bool)]) -> Result<()> {
    if data.iter().any(|(x, _)| !x.is_finite()) {
        return Err(Error::NonFiniteFeature);
    }
    let positives = data.iter().filter(|(_, y)| *y).count();
    if data.len() < 2 || positives == 0 || positives == data.len() {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Learn weights whose linear score separates aware (`true`) from not aware
/// at 0. Zero initialisation, fixed step, fixed iteration count.
pub fn train_weights(data: &[(AwarenessFeatures, bool)], params: &TrainParams) -> Result<AwarenessWeights> {
    train_weights_traced(data, params).map(|(w, _)| w)
}

/// Like [`train_weights`], also returning the loss before each step and after
/// the last one (`iterations + 1` values).
pub fn train_weights_traced(
    data: &[(AwarenessFeatures, bool)],
    params: &TrainParams,
) -> Result<(AwarenessWeights, Vec<f64>)> {
    check_dataset(data)?;
    if !(params.learning_rate.is_finite() && params.learning_rate > 0.0) {
        return Err(Error::OutOfRange { field: "learning_rate", value: params.learning_rate });
    }
    if !(params.l2.is_finite() && params.l2 >= 0.0) {
        return Err(Error::OutOfRange { field: "l2", value: params.l2 });
    }
    let mut theta: Theta = [0.0; 4];
    let mut losses = Vec::with_capacity(params.iterations + 1);
    for _ in 0..params.iterations {
        let (loss, grad) = loss_and_gradient(data, &theta, params.l2);
        losses.push(loss);
        for (t, g) in theta.iter_mut().zip(grad) {
            *t -= params.learning_rate * g;
        }
    }
    losses.push(loss_and_gradient(data, &theta, params.l2).0);
    Ok((weights_of(&theta), losses))
}
