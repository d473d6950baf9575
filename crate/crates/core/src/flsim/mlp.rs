use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::dataio::Dataset;
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    /// Input size, hidden sizes..., class count.
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
    pub init_seed: u64,
}

/// All weights and biases of an MLP in one flat vector.
///
/// Layer by layer, the weight matrix comes first, stored row-major with
/// shape `(fan_in, fan_out)`, followed by the `fan_out` biases. Gradients use
/// the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub flat: Vec<f64>,
    layer_sizes: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct LayerSlot {
    fan_in: usize,
    fan_out: usize,
    weights: usize,
    bias: usize,
}

fn slots(sizes: &[usize]) -> Vec<LayerSlot> {
    let mut offset = 0;
    sizes
        .windows(2)
        .map(|w| {
            let slot = LayerSlot {
                fan_in: w[0],
                fan_out: w[1],
                weights: offset,
                bias: offset + w[0] * w[1],
            };
            offset += w[0] * w[1] + w[1];
            slot
        })
        .collect()
}

impl ModelParams {
    pub fn from_flat(layer_sizes: Vec<usize>, flat: Vec<f64>) -> Result<Self> {
        validate_sizes(&layer_sizes)?;
        let expected = Self::param_count(&layer_sizes);
        if flat.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: flat.len(),
            });
        }
        Ok(Self { flat, layer_sizes })
    }

    pub fn param_count(layer_sizes: &[usize]) -> usize {
        layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn len(&self) -> usize {
        self.flat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn class_count(&self) -> usize {
        *self.layer_sizes.last().expect("validated")
    }

    fn weights(&self, slot: &LayerSlot) -> ArrayView2<'_, f64> {
        ArrayView2::from_shape(
            (slot.fan_in, slot.fan_out),
            &self.flat[slot.weights..slot.weights + slot.fan_in * slot.fan_out],
        )
        .expect("slot within flat vector")
    }

    fn bias(&self, slot: &LayerSlot) -> ArrayView1<'_, f64> {
        ArrayView1::from(&self.flat[slot.bias..slot.bias + slot.fan_out])
    }

    /// Class scores for each row of `features`.
    pub fn logits(&self, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if features.ncols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                found: features.ncols(),
            });
        }
        let layers = slots(&self.layer_sizes);
        let mut a = features.to_owned();
        for (l, slot) in layers.iter().enumerate() {
            let mut z = a.dot(&self.weights(slot));
            z += &self.bias(slot);
            if l + 1 < layers.len() {
                z.mapv_inplace(relu);
            }
            a = z;
        }
        Ok(a)
    }
}

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 || sizes.contains(&0) {
        return Err(Error::InvalidParameter(format!(
            "layer sizes need at least input and output, all positive: {sizes:?}"
        )));
    }
    Ok(())
}

/// Weights uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, biases zero.
pub fn init_model(cfg: &MlpConfig) -> Result<ModelParams> {
    validate_sizes(&cfg.layer_sizes)?;
    let mut rng = seed::rng(seed::derive(cfg.init_seed, seed::TAG_INIT, 0, 0));
    let mut flat = vec![0.0; ModelParams::param_count(&cfg.layer_sizes)];
    for slot in slots(&cfg.layer_sizes) {
        let bound = 1.0 / (slot.fan_in as f64).sqrt();
        for w in &mut flat[slot.weights..slot.bias] {
            *w = rng.random_range(-bound..=bound);
        }
    }
    Ok(ModelParams {
        flat,
        layer_sizes: cfg.layer_sizes.clone(),
    })
}

/// Row-wise log-softmax.
fn log_softmax(z: &Array2<f64>) -> Array2<f64> {
    let mut out = z.clone();
    for mut row in out.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
        let lse = max + row.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        row.mapv_inplace(|x| x - lse);
    }
    out
}

fn check_batch(
    params: &ModelParams,
    features: &ArrayView2<'_, f64>,
    labels: &[usize],
) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::Empty("batch"));
    }
    if features.nrows() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: features.nrows(),
            found: labels.len(),
        });
    }
    if features.ncols() != params.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: params.input_dim(),
            found: features.ncols(),
        });
    }
    if let Some(l) = labels.iter().find(|&&l| l >= params.class_count()) {
        return Err(Error::InvalidParameter(format!(
            "label {l} outside the model's {} classes",
            params.class_count()
        )));
    }
    Ok(())
}

/// Mean softmax cross-entropy over the batch and its gradient with respect
/// to the flat parameter vector.
pub fn forward_loss_grad(
    params: &ModelParams,
    features: ArrayView2<'_, f64>,
    labels: &[usize],
) -> Result<(f64, Vec<f64>)> {
    check_batch(params, &features, labels)?;
    let layers = slots(&params.layer_sizes);
    let batch = labels.len() as f64;

    // Forward pass, keeping every layer's input and pre-activation.
    let mut inputs: Vec<Array2<f64>> = Vec::with_capacity(layers.len());
    let mut pre: Vec<Array2<f64>> = Vec::with_capacity(layers.len());
    let mut a = features.to_owned();
    for (l, slot) in layers.iter().enumerate() {
        let mut z = a.dot(&params.weights(slot));
        z += &params.bias(slot);
        let next = if l + 1 < layers.len() {
            z.mapv(relu)
        } else {
            z.clone()
        };
        inputs.push(a);
        pre.push(z);
        a = next;
    }
    let logp = log_softmax(&a);
    let loss = -labels
        .iter()
        .enumerate()
        .map(|(i, &y)| logp[[i, y]])
        .sum::<f64>()
        / batch;

    // dLoss/dlogits = (softmax - onehot) / batch
    let mut delta = logp.mapv(f64::exp);
    for (i, &y) in labels.iter().enumerate() {
        delta[[i, y]] -= 1.0;
    }
    delta /= batch;

    let mut grad = vec![0.0; params.len()];
    for l in (0..layers.len()).rev() {
        let slot = &layers[l];
        let dw = inputs[l].t().dot(&delta);
        let db: Array1<f64> = delta.sum_axis(Axis(0));
        grad[slot.weights..slot.bias].copy_from_slice(dw.as_slice().expect("standard layout"));
        grad[slot.bias..slot.bias + slot.fan_out]
            .copy_from_slice(db.as_slice().expect("contiguous"));
        if l > 0 {
            let mut back = delta.dot(&params.weights(slot).t());
            back.zip_mut_with(&pre[l - 1], |g, &z| {
                if z <= 0.0 {
                    *g = 0.0
                }
            });
            delta = back;
        }
    }
    Ok((loss, grad))
}

/// Argmax accuracy and mean cross-entropy on a dataset.
pub fn evaluate_model(params: &ModelParams, data: &Dataset) -> Result<(f64, f64)> {
    if data.is_empty() {
        return Err(Error::Empty("test set"));
    }
    check_batch(params, &data.features.view(), &data.labels)?;
    let logits = params.logits(data.features.view())?;
    let logp = log_softmax(&logits);
    let mut correct = 0usize;
    let mut loss = 0.0;
    for (i, &y) in data.labels.iter().enumerate() {
        let row = logits.row(i);
        // First maximal index, so ties resolve deterministically.
        let pred = row
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |b, (j, &v)| if v > b.1 { (j, v) } else { b },
            )
            .0;
        correct += usize::from(pred == y);
        loss -= logp[[i, y]];
    }
    let n = data.len() as f64;
    Ok((correct as f64 / n, loss / n))
}

/// `steps` sequential mini-batch gradient steps `x <- x - lr * g` on a
/// client's shard. Batches walk a seeded permutation of the shard, reshuffled
/// every epoch; a batch never spans two epochs.
pub fn local_update(
    params: &ModelParams,
    shard: &Dataset,
    steps: usize,
    batch_size: usize,
    lr: f64,
    seed_value: u64,
) -> Result<ModelParams> {
    if shard.is_empty() {
        return Err(Error::Empty("client shard"));
    }
    if steps == 0 || batch_size == 0 {
        return Err(Error::InvalidParameter(
            "local_update needs steps >= 1 and batch_size >= 1".into(),
        ));
    }
    let mut rng = seed::rng(seed_value);
    let mut order: Vec<usize> = (0..shard.len()).collect();
    let mut cursor = shard.len();
    let mut current = params.clone();
    for _ in 0..steps {
        if cursor >= shard.len() {
            order.shuffle(&mut rng);
            cursor = 0;
        }
        let end = (cursor + batch_size).min(shard.len());
        let idx = &order[cursor..end];
        cursor = end;
        let (_, grad) = if idx.len() == shard.len() {
            forward_loss_grad(&current, shard.features.view(), &shard.labels)?
        } else {
            let batch = shard.subset(idx);
            forward_loss_grad(&current, batch.features.view(), &batch.labels)?
        };
        for (x, g) in current.flat.iter_mut().zip(&grad) {
            *x -= lr * g;
        }
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    fn cfg(sizes: &[usize], seed: u64) -> MlpConfig {
        MlpConfig {
            layer_sizes: sizes.to_vec(),
            activation: Activation::Relu,
            init_seed: seed,
        }
    }

    #[test]
    fn init_is_deterministic_and_sized() {
        let a = init_model(&cfg(&[4, 3, 2], 1)).unwrap();
        assert_eq!(a, init_model(&cfg(&[4, 3, 2], 1)).unwrap());
        assert_ne!(a, init_model(&cfg(&[4, 3, 2], 2)).unwrap());
        assert_eq!(a.len(), 23);
        let layers = slots(a.layer_sizes());
        for slot in &layers {
            assert!(a.flat[slot.bias..slot.bias + slot.fan_out]
                .iter()
                .all(|&b| b == 0.0));
            let bound = 1.0 / (slot.fan_in as f64).sqrt();
            assert!(a.flat[slot.weights..slot.bias]
                .iter()
                .all(|w| w.abs() <= bound));
        }
        assert!(init_model(&cfg(&[4], 1)).is_err());
    }

    #[test]
    fn zero_model_has_uniform_loss() {
        let p = ModelParams::from_flat(vec![3, 4, 2], vec![0.0; 3 * 4 + 4 + 4 * 2 + 2]).unwrap();
        let x = array![[1.0, 2.0, 3.0], [-1.0, 0.5, 0.0]];
        let (loss, _) = forward_loss_grad(&p, x.view(), &[0, 1]).unwrap();
        assert_relative_eq!(loss, 2f64.ln(), epsilon = 1e-15);

        let p = ModelParams::from_flat(vec![2, 10], vec![0.0; 30]).unwrap();
        let data = Dataset::new(Array2::zeros((10, 2)), (0..10).collect(), 10).unwrap();
        let (_, loss) = evaluate_model(&p, &data).unwrap();
        assert_relative_eq!(loss, 10f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn duplicated_batch_has_same_loss_and_gradient() {
        let p = init_model(&cfg(&[3, 5, 3], 4)).unwrap();
        let x = array![[0.1, -0.3, 0.8], [0.9, 0.2, -0.4]];
        let xx = ndarray::concatenate![Axis(0), x, x];
        let (l1, g1) = forward_loss_grad(&p, x.view(), &[0, 2]).unwrap();
        let (l2, g2) = forward_loss_grad(&p, xx.view(), &[0, 2, 0, 2]).unwrap();
        assert_relative_eq!(l1, l2, epsilon = 1e-14);
        for (a, b) in g1.iter().zip(&g2) {
            assert_relative_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn batch_errors() {
        let p = init_model(&cfg(&[3, 2], 0)).unwrap();
        let x = array![[0.1, 0.2]];
        assert!(forward_loss_grad(&p, x.view(), &[0]).is_err());
        let x = array![[0.1, 0.2, 0.3]];
        assert!(forward_loss_grad(&p, x.view(), &[2]).is_err());
        assert!(forward_loss_grad(&p, x.view(), &[]).is_err());
    }

    #[test]
    fn majority_and_confident_predictions() {
        // Output bias favours class 0 regardless of the input.
        let mut flat = vec![0.0; 2 * 2 + 2];
        flat[4] = 1.0;
        let p = ModelParams::from_flat(vec![2, 2], flat).unwrap();
        let labels: Vec<usize> = (0..10).map(|i| usize::from(i == 9)).collect();
        let data = Dataset::new(Array2::ones((10, 2)), labels, 2).unwrap();
        let (acc, _) = evaluate_model(&p, &data).unwrap();
        assert_relative_eq!(acc, 0.9);

        let mut flat = vec![0.0; 2 * 2 + 2];
        flat[0] = 60.0; // x0 -> class 0
        flat[3] = 60.0; // x1 -> class 1
        let p = ModelParams::from_flat(vec![2, 2], flat).unwrap();
        let data = Dataset::new(array![[1.0, 0.0], [0.0, 1.0]], vec![0, 1], 2).unwrap();
        let (acc, loss) = evaluate_model(&p, &data).unwrap();
        assert_eq!(acc, 1.0);
        assert!(loss < 1e-20);
    }

    #[test]
    fn local_update_basics() {
        let p = init_model(&cfg(&[2, 4, 2], 3)).unwrap();
        let shard =
            Dataset::new(array![[0.0, 1.0], [1.0, 0.0], [0.5, 0.5]], vec![0, 1, 1], 2).unwrap();
        let same = local_update(&p, &shard, 3, 2, 0.0, 1).unwrap();
        assert_eq!(same, p);

        let a = local_update(&p, &shard, 4, 2, 0.1, 9).unwrap();
        assert_eq!(a, local_update(&p, &shard, 4, 2, 0.1, 9).unwrap());

        // One full-batch step is one plain gradient step.
        let one = local_update(&p, &shard, 1, 10, 0.1, 9).unwrap();
        let (_, g) = forward_loss_grad(&p, shard.features.view(), &shard.labels).unwrap();
        for ((x, x0), gi) in one.flat.iter().zip(&p.flat).zip(&g) {
            assert_relative_eq!(*x, x0 - 0.1 * gi, epsilon = 1e-15);
        }
        let empty = shard.subset(&[]);
        assert!(local_update(&p, &empty, 1, 1, 0.1, 0).is_err());
    }
}
