use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layers::{self, LayerSpec};
use super::tensor::{Scalar, Tensor};
use crate::error::{Error, Result};

/// A layer plus the ids of the activations it reads.
///
/// Activation 0 is the graph input; node `i` writes activation `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub layer: LayerSpec,
    pub inputs: Vec<usize>,
}

/// Incremental construction of a [`LayerGraph`].
#[derive(Debug)]
pub struct GraphBuilder {
    input_shape: [usize; 3],
    nodes: Vec<Node>,
    shapes: Vec<[usize; 3]>,
    error: Option<Error>,
}

impl GraphBuilder {
    pub fn new(input_shape: [usize; 3]) -> Self {
        GraphBuilder {
            input_shape,
            nodes: Vec::new(),
            shapes: vec![input_shape],
            error: None,
        }
    }

    /// Id of the graph input.
    pub fn input(&self) -> usize {
        0
    }

    pub fn shape(&self, id: usize) -> [usize; 3] {
        self.shapes[id]
    }

    /// Appends a node; shape errors are deferred to [`GraphBuilder::build`].
    pub fn push(&mut self, layer: LayerSpec, inputs: &[usize]) -> usize {
        if self.error.is_none() {
            let shapes: Option<Vec<_>> = inputs.iter().map(|&i| self.shapes.get(i).copied()).collect();
            let result = match shapes {
                Some(s) => layer.output_shape(&s),
                None => Err(Error::Dimension(format!("node reads unknown activation in {inputs:?}"))),
            };
            match result {
                Ok(shape) => self.shapes.push(shape),
                Err(e) => {
                    self.error = Some(e);
                    self.shapes.push([0, 0, 0]);
                }
            }
        } else {
            self.shapes.push([0, 0, 0]);
        }
        self.nodes.push(Node {
            layer,
            inputs: inputs.to_vec(),
        });
        self.nodes.len()
    }

    pub fn conv(&mut self, from: usize, out_channels: usize, kernel: usize, stride: usize) -> usize {
        let in_channels = self.shapes[from][0];
        self.push(
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                stride,
                padding: kernel / 2,
            },
            &[from],
        )
    }

    pub fn dense(&mut self, from: usize, outputs: usize) -> usize {
        let inputs = self.shapes[from].iter().product();
        self.push(LayerSpec::Dense { inputs, outputs }, &[from])
    }

    pub fn relu(&mut self, from: usize) -> usize {
        self.push(LayerSpec::Relu, &[from])
    }

    pub fn sigmoid(&mut self, from: usize) -> usize {
        self.push(LayerSpec::Sigmoid, &[from])
    }

    pub fn upsample(&mut self, from: usize) -> usize {
        self.push(LayerSpec::Upsample2x, &[from])
    }

    pub fn concat(&mut self, a: usize, b: usize) -> usize {
        self.push(LayerSpec::Concat, &[a, b])
    }

    pub fn build<T: Scalar>(self, seed: u64) -> Result<LayerGraph<T>> {
        if let Some(e) = self.error {
            return Err(e);
        }
        LayerGraph::new(self.input_shape, self.nodes, seed)
    }
}

/// Adam moments and step count.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub step: u64,
    pub first: Vec<Tensor<T>>,
    pub second: Vec<Tensor<T>>,
}

/// Hyperparameters for [`LayerGraph::adam_step`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            ..Self::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Parameter gradients, one tensor per parameter in declaration order.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients<T>(pub Vec<Tensor<T>>);

impl<T: Scalar> Gradients<T> {
    pub fn scale(&self, s: T) -> Self {
        Gradients(self.0.iter().map(|t| t.scale(s)).collect())
    }
}

/// Activations retained by a forward pass for use by backward.
#[derive(Clone, Debug)]
pub struct ForwardPass<T> {
    acts: Vec<Tensor<T>>,
}

impl<T: Scalar> ForwardPass<T> {
    pub fn output(&self) -> &Tensor<T> {
        self.acts.last().expect("forward pass holds at least the input")
    }

    pub fn into_output(mut self) -> Tensor<T> {
        self.acts.pop().expect("forward pass holds at least the input")
    }

    /// Drops everything except the output; a released pass cannot be
    /// back-propagated.
    pub fn release(&mut self) {
        let out = self.acts.pop().expect("forward pass holds at least the input");
        self.acts = vec![out];
    }
}

/// A small feed-forward DAG of layers with its parameters and Adam state.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGraph<T = f32> {
    input_shape: [usize; 3],
    nodes: Vec<Node>,
    shapes: Vec<[usize; 3]>,
    param_slot: Vec<Option<usize>>,
    params: Vec<Tensor<T>>,
    adam: AdamState<T>,
    seed: u64,
}

impl<T: Scalar> LayerGraph<T> {
    /// Validates shapes and initialises parameters with seeded
    /// Kaiming-uniform fan-in scaling (biases start at zero).
    pub fn new(input_shape: [usize; 3], nodes: Vec<Node>, seed: u64) -> Result<Self> {
        let mut graph = Self::uninitialized(input_shape, nodes, seed)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (node, slot) in graph.nodes.iter().zip(&graph.param_slot) {
            if let Some(p) = *slot {
                let bound = (6.0 / node.layer.fan_in() as f64).sqrt();
                for v in graph.params[p].data_mut() {
                    *v = T::from_f64(rng.random_range(-bound..bound));
                }
            }
        }
        Ok(graph)
    }

    /// Same structure with all parameters zero.
    pub(crate) fn uninitialized(input_shape: [usize; 3], nodes: Vec<Node>, seed: u64) -> Result<Self> {
        let mut shapes = vec![input_shape];
        let mut param_slot = Vec::with_capacity(nodes.len());
        let mut params = Vec::new();
        for (i, node) in nodes.iter().enumerate() {
            if node.inputs.iter().any(|&a| a > i) {
                return Err(Error::Dimension(format!("node {i} reads a later activation")));
            }
            let ins: Vec<_> = node.inputs.iter().map(|&a| shapes[a]).collect();
            shapes.push(node.layer.output_shape(&ins)?);
            match node.layer.param_shapes() {
                Some((w, b)) => {
                    param_slot.push(Some(params.len()));
                    params.push(Tensor::zeros(w));
                    params.push(Tensor::zeros(b));
                }
                None => param_slot.push(None),
            }
        }
        let adam = AdamState {
            step: 0,
            first: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
            second: params.iter().map(|p| Tensor::zeros(p.shape())).collect(),
        };
        Ok(LayerGraph {
            input_shape,
            nodes,
            shapes,
            param_slot,
            params,
            adam,
            seed,
        })
    }

    pub fn input_shape(&self) -> [usize; 3] {
        self.input_shape
    }

    pub fn output_shape(&self) -> [usize; 3] {
        *self.shapes.last().expect("shapes include the input")
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn params(&self) -> &[Tensor<T>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [Tensor<T>] {
        &mut self.params
    }

    pub fn adam_state(&self) -> &AdamState<T> {
        &self.adam
    }

    pub(crate) fn adam_state_mut(&mut self) -> &mut AdamState<T> {
        &mut self.adam
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(Tensor::len).sum()
    }

    /// Copies the graph into another element type; Adam state is carried over.
    pub fn cast<U: Scalar>(&self) -> LayerGraph<U> {
        LayerGraph {
            input_shape: self.input_shape,
            nodes: self.nodes.clone(),
            shapes: self.shapes.clone(),
            param_slot: self.param_slot.clone(),
            params: self.params.iter().map(Tensor::cast).collect(),
            adam: AdamState {
                step: self.adam.step,
                first: self.adam.first.iter().map(Tensor::cast).collect(),
                second: self.adam.second.iter().map(Tensor::cast).collect(),
            },
            seed: self.seed,
        }
    }

    fn check_input(&self, input: &Tensor<T>) -> Result<()> {
        let [_, c, h, w] = input.shape();
        if [c, h, w] != self.input_shape {
            return Err(Error::Dimension(format!(
                "graph expects input {:?}, got {:?}",
                self.input_shape,
                [c, h, w]
            )));
        }
        Ok(())
    }

    fn eval_node(&self, i: usize, acts: &[Tensor<T>]) -> Result<Tensor<T>> {
        let node = &self.nodes[i];
        let x = &acts[node.inputs[0]];
        let out = match &node.layer {
            spec @ LayerSpec::Conv2d { .. } => {
                let p = self.param_slot[i].expect("conv has params");
                layers::conv2d_forward(spec, x, &self.params[p], &self.params[p + 1])
            }
            LayerSpec::Dense { .. } => {
                let p = self.param_slot[i].expect("dense has params");
                layers::dense_forward(x, &self.params[p], &self.params[p + 1])
            }
            LayerSpec::Relu => layers::relu_forward(x),
            LayerSpec::Sigmoid => layers::sigmoid_forward(x),
            LayerSpec::Upsample2x => layers::upsample_forward(x),
            LayerSpec::Concat => layers::concat_forward(x, &acts[node.inputs[1]]),
        };
        if !out.all_finite() {
            return Err(Error::Numeric {
                node: i,
                layer: node.layer.name().into(),
            });
        }
        Ok(out)
    }

    /// Evaluates the graph, keeping every activation for [`LayerGraph::backward`].
    pub fn forward(&self, input: &Tensor<T>) -> Result<ForwardPass<T>> {
        self.check_input(input)?;
        if !input.all_finite() {
            return Err(Error::Numeric {
                node: 0,
                layer: "input".into(),
            });
        }
        let mut acts = Vec::with_capacity(self.nodes.len() + 1);
        acts.push(input.clone());
        for i in 0..self.nodes.len() {
            let out = self.eval_node(i, &acts)?;
            acts.push(out);
        }
        Ok(ForwardPass { acts })
    }

    /// Sign of every ReLU input in `pass`, in node order; two passes with
    /// different patterns lie on different linear pieces of the graph.
    pub(crate) fn relu_pattern(&self, pass: &ForwardPass<T>) -> Vec<bool> {
        let mut out = Vec::new();
        for node in &self.nodes {
            if matches!(node.layer, LayerSpec::Relu) {
                out.extend(pass.acts[node.inputs[0]].data().iter().map(|v| *v > T::zero()));
            }
        }
        out
    }

    /// Forward pass that keeps only the output.
    pub fn infer(&self, input: &Tensor<T>) -> Result<Tensor<T>> {
        Ok(self.forward(input)?.into_output())
    }

    /// Reverse-mode gradients of every parameter given dLoss/dOutput.
    pub fn backward(&self, pass: &ForwardPass<T>, grad_output: &Tensor<T>) -> Result<Gradients<T>> {
        if pass.acts.len() != self.nodes.len() + 1 {
            return Err(Error::State(
                "backward needs the activations of a forward pass on this graph".into(),
            ));
        }
        for (act, shape) in pass.acts.iter().zip(&self.shapes) {
            let [_, c, h, w] = act.shape();
            if [c, h, w] != *shape {
                return Err(Error::State("forward pass belongs to a different graph".into()));
            }
        }
        if grad_output.shape() != pass.output().shape() {
            return Err(Error::Dimension(format!(
                "output gradient {:?} does not match output {:?}",
                grad_output.shape(),
                pass.output().shape()
            )));
        }

        let mut grads: Vec<Tensor<T>> = self.params.iter().map(|p| Tensor::zeros(p.shape())).collect();
        let mut act_grads: Vec<Option<Tensor<T>>> = vec![None; pass.acts.len()];
        *act_grads.last_mut().expect("non-empty") = Some(grad_output.clone());

        for i in (0..self.nodes.len()).rev() {
            let Some(dout) = act_grads[i + 1].take() else {
                continue;
            };
            let node = &self.nodes[i];
            let x = &pass.acts[node.inputs[0]];
            let y = &pass.acts[i + 1];
            let input_grads: Vec<Tensor<T>> = match &node.layer {
                spec @ LayerSpec::Conv2d { .. } => {
                    let p = self.param_slot[i].expect("conv has params");
                    let (gw, gb) = split_pair(&mut grads, p);
                    match layers::conv2d_backward(spec, x, &self.params[p], &dout, gw, gb, node.inputs[0] != 0) {
                        Some(dx) => vec![dx],
                        None => continue,
                    }
                }
                LayerSpec::Dense { .. } => {
                    let p = self.param_slot[i].expect("dense has params");
                    let (gw, gb) = split_pair(&mut grads, p);
                    vec![layers::dense_backward(x, &self.params[p], &dout, gw, gb)
                        .reshape(x.shape())?]
                }
                LayerSpec::Relu => vec![layers::relu_backward(y, &dout)],
                LayerSpec::Sigmoid => vec![layers::sigmoid_backward(y, &dout)],
                LayerSpec::Upsample2x => vec![layers::upsample_backward(&dout)],
                LayerSpec::Concat => {
                    let (a, b) = layers::concat_backward(x.shape(), pass.acts[node.inputs[1]].shape(), &dout);
                    vec![a, b]
                }
            };
            for (&src, g) in node.inputs.iter().zip(input_grads) {
                // the graph input needs no gradient
                if src == 0 {
                    continue;
                }
                match &mut act_grads[src] {
                    Some(acc) => acc.add_assign(&g),
                    slot @ None => *slot = Some(g),
                }
            }
        }
        Ok(Gradients(grads))
    }

    /// One Adam update with bias correction.
    pub fn adam_step(&mut self, grads: &Gradients<T>, config: &AdamConfig) -> Result<()> {
        if grads.0.len() != self.params.len()
            || grads.0.iter().zip(&self.params).any(|(g, p)| g.shape() != p.shape())
        {
            return Err(Error::Dimension("gradient shapes do not match parameters".into()));
        }
        self.adam.step += 1;
        let t = self.adam.step as i32;
        let b1 = T::from_f64(config.beta1);
        let b2 = T::from_f64(config.beta2);
        let one = T::one();
        let bc1 = T::from_f64(1.0 - config.beta1.powi(t));
        let bc2 = T::from_f64(1.0 - config.beta2.powi(t));
        let lr = T::from_f64(config.lr);
        let eps = T::from_f64(config.eps);
        for (k, g) in grads.0.iter().enumerate() {
            let p = self.params[k].data_mut();
            let m = self.adam.first[k].data_mut();
            let v = self.adam.second[k].data_mut();
            for j in 0..p.len() {
                let gj = g.data()[j];
                m[j] = b1 * m[j] + (one - b1) * gj;
                v[j] = b2 * v[j] + (one - b2) * gj * gj;
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                p[j] = p[j] - lr * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

fn split_pair<T>(grads: &mut [Tensor<T>], p: usize) -> (&mut Tensor<T>, &mut Tensor<T>) {
    let (a, b) = grads.split_at_mut(p + 1);
    (&mut a[p], &mut b[0])
}
