use num_traits::Zero;

use super::ModelError;
use crate::rational::{self, Rational};

/// One affine layer, optionally followed by a ReLU on every unit.
///
/// `weights[o][i]` is the weight from input `i` to output unit `o`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layer {
    pub weights: Vec<Vec<Rational>>,
    pub bias: Vec<Rational>,
    pub relu: bool,
}

impl Layer {
    pub fn new(weights: Vec<Vec<Rational>>, bias: Vec<Rational>, relu: bool) -> Self {
        Layer { weights, bias, relu }
    }

    pub fn input_width(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }

    pub fn output_width(&self) -> usize {
        self.bias.len()
    }

    /// Pre-activation of unit `o`.
    pub fn affine(&self, o: usize, input: &[Rational]) -> Rational {
        let mut acc = self.bias[o].clone();
        for (w, x) in self.weights[o].iter().zip(input) {
            if !w.is_zero() {
                acc += w * x;
            }
        }
        acc
    }

    pub fn apply(&self, input: &[Rational]) -> Vec<Rational> {
        (0..self.output_width())
            .map(|o| {
                let z = self.affine(o, input);
                if self.relu {
                    rational::relu(&z)
                } else {
                    z
                }
            })
            .collect()
    }
}

/// A feed-forward network of affine layers with ReLU activations.
///
/// The final layer is always an identity layer; its outputs are the action
/// scores, and the chosen action is the lowest index among the maximal scores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    layers: Vec<Layer>,
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Result<Self, ModelError> {
        let Some(last) = layers.last() else {
            return Err(ModelError::InvalidNetwork("network has no layers".into()));
        };
        if last.relu {
            return Err(ModelError::InvalidNetwork(
                "last layer must have identity activation".into(),
            ));
        }
        for (l, layer) in layers.iter().enumerate() {
            if layer.weights.len() != layer.bias.len() {
                return Err(ModelError::InvalidNetwork(format!(
                    "layer {l}: {} weight rows but {} biases",
                    layer.weights.len(),
                    layer.bias.len()
                )));
            }
            if layer.bias.is_empty() {
                return Err(ModelError::InvalidNetwork(format!("layer {l} has no units")));
            }
            let width = layer.input_width();
            if width == 0 || layer.weights.iter().any(|row| row.len() != width) {
                return Err(ModelError::InvalidNetwork(format!("layer {l}: ragged weight matrix")));
            }
            if l > 0 && layers[l - 1].output_width() != width {
                return Err(ModelError::InvalidNetwork(format!(
                    "layer {l} expects {width} inputs but layer {} produces {}",
                    l - 1,
                    layers[l - 1].output_width()
                )));
            }
        }
        Ok(Network { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_width(&self) -> usize {
        self.layers[0].input_width()
    }

    pub fn output_width(&self) -> usize {
        self.layers[self.layers.len() - 1].output_width()
    }

    /// Widths of all non-final layers.
    pub fn hidden_widths(&self) -> Vec<usize> {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(Layer::output_width)
            .collect()
    }

    pub fn hidden_count(&self) -> usize {
        self.hidden_widths().iter().sum()
    }

    pub fn relu_count(&self) -> usize {
        self.layers.iter().filter(|l| l.relu).map(Layer::output_width).sum()
    }

    /// Exact evaluation of the whole network.
    pub fn forward(&self, input: &[Rational]) -> Result<Vec<Rational>, ModelError> {
        Ok(self.trace(input)?.pop().expect("network has layers"))
    }

    /// Activations of every layer (hidden layers then outputs).
    pub fn trace(&self, input: &[Rational]) -> Result<Vec<Vec<Rational>>, ModelError> {
        if input.len() != self.input_width() {
            return Err(ModelError::DimensionMismatch {
                expected: self.input_width(),
                found: input.len(),
            });
        }
        let mut out = Vec::with_capacity(self.layers.len());
        let mut current = input.to_vec();
        for layer in &self.layers {
            current = layer.apply(&current);
            out.push(current.clone());
        }
        Ok(out)
    }

    pub fn classify(&self, input: &[Rational]) -> Result<usize, ModelError> {
        Ok(argmax(&self.forward(input)?))
    }
}

/// Index of the maximal score; ties go to the lowest index.
pub fn argmax(scores: &[Rational]) -> usize {
    let mut best = 0;
    for (i, s) in scores.iter().enumerate().skip(1) {
        if *s > scores[best] {
            best = i;
        }
    }
    best
}

/// True when `action` beats every rival strictly.
pub fn is_decisive(scores: &[Rational], action: usize) -> bool {
    scores
        .iter()
        .enumerate()
        .all(|(i, s)| i == action || *s < scores[action])
}
