//! Network architectures, parameter layout, and initialization.
//!
//! Two point-evaluated architectures are supported:
//!
//! * `Fcnn` — plain fully connected net; `depth` counts hidden layers.
//! * `Mmnn` — low-rank trainable mixing over wide fixed random feature
//!   layers; `depth` counts blocks including the head. A block maps
//!   `z -> A * act(W z + b) + c` where `W, b` are drawn once and frozen and
//!   only the rank-sized mixing `A, c` trains. The head contracts the last
//!   feature layer to a scalar with a trainable weight vector and bias.
//!
//! Initialization draws every weight and bias uniformly from
//! `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`. When `first_layer_scale > 0`, the
//! first-layer weight matrix (only the weights, never biases or later
//! layers) is then multiplied by `first_layer_scale * width^(1/input_dim)`,
//! widening the initially representable frequency band.

mod checkpoint;
mod forward;
mod layered;

pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use forward::{
    batch_forward_jets, forward, forward_jets, taped_forward, JetField, NetField, NetScalar,
    TapedNet,
};
pub use layered::{
    batch_outputs, batch_values, grads_into, outputs_and_grads, EngineMode, LayeredField,
    PointGrad, LANES,
};

use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::Activation;
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arch {
    Fcnn,
    Mmnn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub arch: Arch,
    pub input_dim: usize,
    pub width: usize,
    /// Hidden layers for `Fcnn`; blocks including the head for `Mmnn`.
    pub depth: usize,
    /// Mixing dimension, `Mmnn` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    pub activation: Activation,
    /// 0 disables scaling; otherwise first-layer weights are multiplied by
    /// `first_layer_scale * width^(1/input_dim)` after the uniform draw.
    pub first_layer_scale: f64,
}

impl NetworkSpec {
    pub fn validate(&self) -> crate::Result<()> {
        if self.width < 1 || self.depth < 1 {
            return Err(Error::Config(format!(
                "network width and depth must be >= 1 (got width {}, depth {})",
                self.width, self.depth
            )));
        }
        if !(1..=3).contains(&self.input_dim) {
            return Err(Error::Config(format!(
                "input_dim must be 1, 2 or 3 (got {})",
                self.input_dim
            )));
        }
        if !(self.first_layer_scale >= 0.0) {
            return Err(Error::Config("first_layer_scale must be >= 0".into()));
        }
        match self.arch {
            Arch::Fcnn => {
                if self.rank.is_some() {
                    return Err(Error::Config("rank is only meaningful for mmnn".into()));
                }
            }
            Arch::Mmnn => {
                let r = self
                    .rank
                    .ok_or_else(|| Error::Config("mmnn requires a rank".into()))?;
                if r < 1 || r > self.width {
                    return Err(Error::Config(format!(
                        "mmnn rank must satisfy 1 <= rank <= width (rank {}, width {})",
                        r, self.width
                    )));
                }
                if self.depth < 2 {
                    return Err(Error::Config(
                        "mmnn depth counts blocks including the head, so depth >= 2".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Closed-form count of trainable parameters.
    pub fn trainable_count(&self) -> usize {
        let (d, w, k) = (self.input_dim, self.width, self.depth);
        match self.arch {
            Arch::Fcnn => (d + 1) * w + (k - 1) * (w * w + w) + (w + 1),
            Arch::Mmnn => {
                let r = self.rank.unwrap_or(0);
                (k - 1) * (r * w + r) + (w + 1)
            }
        }
    }
}

/// One named contiguous slice of the flat parameter vector.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParamBlock {
    pub name: String,
    /// `(rows, cols)`; vectors have `cols == 1`.
    pub shape: (usize, usize),
    pub offset: usize,
    pub trainable: bool,
    /// Input dimension of the linear map this block belongs to; sets the
    /// uniform init bound `1/sqrt(fan_in)`.
    pub fan_in: usize,
}

impl ParamBlock {
    pub fn len(&self) -> usize {
        self.shape.0 * self.shape.1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Flat trainable-parameter vector with its layout map.
#[derive(Clone, Debug)]
pub struct ParamSet {
    pub values: Vec<f64>,
    pub layout: Vec<ParamBlock>,
    trainable: Vec<bool>,
}

impl ParamSet {
    pub fn from_parts(values: Vec<f64>, layout: Vec<ParamBlock>) -> Self {
        let mut trainable = vec![false; values.len()];
        for b in &layout {
            if b.trainable {
                trainable[b.offset..b.offset + b.len()].fill(true);
            }
        }
        ParamSet { values, layout, trainable }
    }

    pub fn n_params(&self) -> usize {
        self.values.len()
    }

    pub fn n_trainable(&self) -> usize {
        self.trainable.iter().filter(|&&t| t).count()
    }

    pub fn is_trainable(&self, idx: usize) -> bool {
        self.trainable[idx]
    }

    /// Contiguous `(start, end)` ranges of trainable entries, in order.
    pub fn trainable_ranges(&self) -> Vec<(usize, usize)> {
        self.layout
            .iter()
            .filter(|b| b.trainable && !b.is_empty())
            .map(|b| (b.offset, b.offset + b.len()))
            .collect()
    }

    pub fn block(&self, name: &str) -> Option<&ParamBlock> {
        self.layout.iter().find(|b| b.name == name)
    }

    pub fn block_values(&self, name: &str) -> Option<&[f64]> {
        self.block(name)
            .map(|b| &self.values[b.offset..b.offset + b.len()])
    }
}

/// Parameter layout in evaluation order.
pub fn build_layout(spec: &NetworkSpec) -> Vec<ParamBlock> {
    let (d, w) = (spec.input_dim, spec.width);
    let mut blocks = Vec::new();
    let mut off = 0usize;
    let push = |name: String, shape: (usize, usize), trainable: bool, fan_in: usize,
                    blocks: &mut Vec<ParamBlock>,
                    off: &mut usize| {
        blocks.push(ParamBlock { name, shape, offset: *off, trainable, fan_in });
        *off += shape.0 * shape.1;
    };

    match spec.arch {
        Arch::Fcnn => {
            let mut fan_in = d;
            for l in 1..=spec.depth {
                push(format!("w{l}"), (w, fan_in), true, fan_in, &mut blocks, &mut off);
                push(format!("b{l}"), (w, 1), true, fan_in, &mut blocks, &mut off);
                fan_in = w;
            }
            push("w_out".into(), (1, w), true, w, &mut blocks, &mut off);
            push("b_out".into(), (1, 1), true, w, &mut blocks, &mut off);
        }
        Arch::Mmnn => {
            let r = spec.rank.expect("validated");
            let mut fan_in = d;
            for l in 1..spec.depth {
                push(format!("wf{l}"), (w, fan_in), false, fan_in, &mut blocks, &mut off);
                push(format!("bf{l}"), (w, 1), false, fan_in, &mut blocks, &mut off);
                push(format!("a{l}"), (r, w), true, w, &mut blocks, &mut off);
                push(format!("c{l}"), (r, 1), true, w, &mut blocks, &mut off);
                fan_in = r;
            }
            push("wf_h".into(), (w, fan_in), false, fan_in, &mut blocks, &mut off);
            push("bf_h".into(), (w, 1), false, fan_in, &mut blocks, &mut off);
            push("w_out".into(), (1, w), true, w, &mut blocks, &mut off);
            push("b_out".into(), (1, 1), true, w, &mut blocks, &mut off);
        }
    }
    blocks
}

/// Draw parameters for `spec` deterministically from `seed`.
pub fn init_params(spec: &NetworkSpec, seed: u64) -> ParamSet {
    let layout = build_layout(spec);
    let total: usize = layout.iter().map(|b| b.len()).sum();
    let mut values = vec![0.0; total];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for b in &layout {
        let bound = 1.0 / (b.fan_in as f64).sqrt();
        let dist = Uniform::new_inclusive(-bound, bound);
        for v in &mut values[b.offset..b.offset + b.len()] {
            *v = dist.sample(&mut rng);
        }
    }

    if spec.first_layer_scale > 0.0 {
        let factor =
            spec.first_layer_scale * (spec.width as f64).powf(1.0 / spec.input_dim as f64);
        let first = &layout[0];
        debug_assert!(first.name == "w1" || first.name == "wf1");
        for v in &mut values[first.offset..first.offset + first.len()] {
            *v *= factor;
        }
    }

    ParamSet::from_parts(values, layout)
}

/// Per-point output of the jet forward pass: value, gradient, and pure second
/// derivative along each axis.
#[derive(Clone, Debug, PartialEq)]
pub struct JetOutput {
    pub u: f64,
    pub grad: Vec<f64>,
    pub d2: Vec<f64>,
}

impl JetOutput {
    pub fn laplacian(&self) -> f64 {
        self.d2.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autodiff::{tape_backward, Tape};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fcnn(d: usize, w: usize, depth: usize, act: Activation, scale: f64) -> NetworkSpec {
        NetworkSpec {
            arch: Arch::Fcnn,
            input_dim: d,
            width: w,
            depth,
            rank: None,
            activation: act,
            first_layer_scale: scale,
        }
    }

    fn mmnn(d: usize, w: usize, r: usize, depth: usize) -> NetworkSpec {
        NetworkSpec {
            arch: Arch::Mmnn,
            input_dim: d,
            width: w,
            depth,
            rank: Some(r),
            activation: Activation::Sine,
            first_layer_scale: 1.0,
        }
    }

    /// Published architecture sizes; exact, no tolerance.
    #[test]
    fn trainable_counts_match_published_values() {
        let cases = [
            (fcnn(1, 50, 3, Activation::Sine, 1.0), 5251),
            (fcnn(1, 100, 3, Activation::Sine, 1.0), 20501),
            (fcnn(1, 100, 5, Activation::Sine, 1.0), 40701),
            (fcnn(1, 100, 1, Activation::Sine, 1.0), 301),
            (fcnn(1, 200, 3, Activation::Sine, 1.0), 81001),
            (mmnn(1, 50, 20, 3), 2091),
            (mmnn(2, 200, 20, 3), 8241),
            (mmnn(2, 200, 40, 3), 16281),
        ];
        for (spec, expect) in cases {
            assert_eq!(spec.trainable_count(), expect, "{spec:?}");
            let params = init_params(&spec, 0);
            assert_eq!(params.n_trainable(), expect, "layout disagrees for {spec:?}");
        }
    }

    #[test]
    fn layout_is_consistent() {
        for spec in [fcnn(2, 7, 3, Activation::Tanh, 0.0), mmnn(3, 12, 4, 4)] {
            let params = init_params(&spec, 5);
            let mut expected_off = 0;
            for b in &params.layout {
                assert_eq!(b.offset, expected_off);
                expected_off += b.len();
            }
            assert_eq!(expected_off, params.n_params());
            let ranges = params.trainable_ranges();
            let from_ranges: usize = ranges.iter().map(|(s, e)| e - s).sum();
            assert_eq!(from_ranges, params.n_trainable());
        }
    }

    #[test]
    fn scaling_touches_only_first_layer_weights() {
        let unscaled = init_params(&fcnn(1, 16, 2, Activation::Sine, 0.0), 42);
        let scaled = init_params(&fcnn(1, 16, 2, Activation::Sine, 1.0), 42);
        let factor = 16.0f64;
        let w1 = unscaled.block("w1").unwrap();
        for i in 0..unscaled.n_params() {
            let in_w1 = i >= w1.offset && i < w1.offset + w1.len();
            if in_w1 {
                assert_eq!(scaled.values[i], unscaled.values[i] * factor);
            } else {
                assert_eq!(scaled.values[i], unscaled.values[i]);
            }
        }

        // In 2 dimensions the factor is width^(1/2).
        let u2 = init_params(&fcnn(2, 9, 1, Activation::Sine, 0.0), 1);
        let s2 = init_params(&fcnn(2, 9, 1, Activation::Sine, 1.0), 1);
        let w1 = u2.block("w1").unwrap();
        for i in w1.offset..w1.offset + w1.len() {
            assert!((s2.values[i] - u2.values[i] * 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn init_is_deterministic() {
        let spec = mmnn(2, 20, 5, 3);
        let a = init_params(&spec, 9);
        let b = init_params(&spec, 9);
        assert_eq!(
            a.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        let c = init_params(&spec, 10);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn zero_parameters_give_zero_output() {
        let spec = fcnn(2, 8, 2, Activation::Tanh, 0.0);
        let mut params = init_params(&spec, 0);
        params.values.fill(0.0);
        assert_eq!(forward(&params, &spec, &[0.3, -0.7]), 0.0);
    }

    #[test]
    fn handset_two_layer_sine_net() {
        let spec = fcnn(1, 1, 2, Activation::Sine, 0.0);
        let mut params = init_params(&spec, 0);
        for name in ["w1", "w2", "w_out"] {
            let b = params.block(name).unwrap().offset;
            params.values[b] = 1.0;
        }
        for name in ["b1", "b2", "b_out"] {
            let b = params.block(name).unwrap().offset;
            params.values[b] = 0.0;
        }
        let u = forward(&params, &spec, &[0.5]);
        assert!((u - 0.5f64.sin().sin()).abs() < 1e-15);
    }

    #[test]
    fn forward_agrees_with_jet_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for spec in [fcnn(1, 10, 2, Activation::Sine, 1.0), mmnn(2, 12, 4, 3)] {
            let params = init_params(&spec, 3);
            for _ in 0..1000 {
                let x: Vec<f64> = (0..spec.input_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let v = forward(&params, &spec, &x);
                let j = forward_jets(&params, &spec, &x);
                assert_eq!(v.to_bits(), j.u.to_bits());
            }
        }
    }

    #[test]
    fn affine_region_relu_net() {
        // relu with the pre-activation kept positive is affine: u = 3x + 2.
        let spec = fcnn(1, 1, 1, Activation::Relu, 0.0);
        let mut params = init_params(&spec, 0);
        for (name, v) in [("w1", 1.0), ("b1", 10.0), ("w_out", 3.0), ("b_out", -28.0)] {
            let off = params.block(name).unwrap().offset;
            params.values[off] = v;
        }
        let j = forward_jets(&params, &spec, &[0.4]);
        assert!((j.u - (3.0 * 0.4 + 2.0)).abs() < 1e-14);
        assert!((j.grad[0] - 3.0).abs() < 1e-14);
        assert_eq!(j.d2[0], 0.0);
    }

    #[test]
    fn jets_match_finite_differences_all_activations() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for act in [Activation::Sine, Activation::Tanh, Activation::Relu, Activation::ReluPow3] {
            for d in 1..=2usize {
                // Unscaled first layer for the kinked activations keeps the
                // finite-difference oracle's truncation error representative.
                let scale = match act {
                    Activation::Relu | Activation::ReluPow3 => 0.0,
                    _ => 1.0,
                };
                let spec = fcnn(d, 6, 2, act, scale);
                let params = init_params(&spec, 17);
                for _ in 0..25 {
                    let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.9..0.9)).collect();
                    let jets = forward_jets(&params, &spec, &x);
                    let h = 1e-4;
                    for axis in 0..d {
                        let at = |t: f64| {
                            let mut xx = x.clone();
                            xx[axis] += t;
                            forward(&params, &spec, &xx)
                        };
                        let fd1 = (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h))
                            / (12.0 * h);
                        let fd2 = (at(h) - 2.0 * at(0.0) + at(-h)) / (h * h);
                        let rel =
                            |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-3);
                        assert!(rel(jets.grad[axis], fd1) <= 1e-6, "{act:?} grad");
                        if act == Activation::Relu {
                            // Piecewise-linear net: the exact second derivative
                            // is zero and the stencil only measures roundoff
                            // (or a kink crossing).
                            assert_eq!(jets.d2[axis], 0.0);
                        } else {
                            assert!(rel(jets.d2[axis], fd2) <= 1e-5, "{act:?} d2");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn frozen_entries_receive_no_gradient() {
        let spec = mmnn(1, 10, 3, 3);
        let params = init_params(&spec, 4);
        let tape = Tape::new();
        let out = taped_forward(&tape, &params, &spec, &[0.3], 0);
        let g = tape_backward(&tape, out, params.n_params()).unwrap();
        for (i, gv) in g.values.iter().enumerate() {
            if !params.is_trainable(i) {
                assert_eq!(*gv, 0.0, "frozen parameter {i} has gradient");
            }
        }
        // The trainable mixing weights do receive gradients.
        let a1 = params.block("a1").unwrap();
        let got: f64 = g.values[a1.offset..a1.offset + a1.len()].iter().map(|v| v.abs()).sum();
        assert!(got > 0.0);
    }

    #[test]
    fn batch_matches_pointwise_and_permutes() {
        let spec = fcnn(2, 9, 2, Activation::Sine, 1.0);
        let params = init_params(&spec, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let xs: Vec<Vec<f64>> = (0..37)
            .map(|_| (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let batch = batch_forward_jets(&params, &spec, &xs);
        assert_eq!(batch.len(), xs.len());
        for (x, b) in xs.iter().zip(&batch) {
            assert_eq!(*b, forward_jets(&params, &spec, x));
        }
        // singleton
        let single = batch_forward_jets(&params, &spec, &xs[..1]);
        assert_eq!(single[0], forward_jets(&params, &spec, &xs[0]));
        // permutation permutes outputs identically
        let mut perm: Vec<usize> = (0..xs.len()).collect();
        perm.reverse();
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| xs[i].clone()).collect();
        let batch_p = batch_forward_jets(&params, &spec, &permuted);
        for (k, &i) in perm.iter().enumerate() {
            assert_eq!(batch_p[k], batch[i]);
        }
    }

    #[test]
    fn layered_engine_matches_generic_forward_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for spec in [
            fcnn(1, 13, 3, Activation::Sine, 1.0),
            fcnn(2, 8, 2, Activation::ReluPow3, 0.0),
            mmnn(2, 14, 5, 3),
            mmnn(3, 10, 4, 4),
        ] {
            let params = init_params(&spec, 33);
            let n = 19;
            let xs: Vec<f64> =
                (0..n * spec.input_dim).map(|_| rng.gen_range(-0.95..0.95)).collect();
            let outs = batch_outputs(&params, &spec, &xs, EngineMode::WithJets);
            for p in 0..n {
                let x = &xs[p * spec.input_dim..(p + 1) * spec.input_dim];
                let reference = forward_jets(&params, &spec, x);
                assert_eq!(outs[p].u.to_bits(), reference.u.to_bits(), "{spec:?}");
                for a in 0..spec.input_dim {
                    assert_eq!(outs[p].grad[a].to_bits(), reference.grad[a].to_bits());
                    assert_eq!(outs[p].d2[a].to_bits(), reference.d2[a].to_bits());
                }
            }
            let values = batch_values(&params, &spec, &xs);
            for p in 0..n {
                assert_eq!(values[p].to_bits(), outs[p].u.to_bits());
            }
        }
    }

    #[test]
    fn layered_gradients_match_tape() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for spec in [
            fcnn(1, 7, 2, Activation::Sine, 1.0),
            fcnn(2, 6, 3, Activation::Tanh, 1.0),
            mmnn(2, 8, 3, 3),
        ] {
            let params = init_params(&spec, 77);
            let d = spec.input_dim;
            let n = 5;
            let xs: Vec<f64> = (0..n * d).map(|_| rng.gen_range(-0.9..0.9)).collect();
            let seeds: Vec<PointGrad> = (0..n)
                .map(|_| {
                    let mut pg = PointGrad { u: rng.gen_range(-1.0..1.0), ..Default::default() };
                    for a in 0..d {
                        pg.d1[a] = rng.gen_range(-1.0..1.0);
                        pg.d2[a] = rng.gen_range(-1.0..1.0);
                    }
                    pg
                })
                .collect();

            let mut fast = vec![0.0; params.n_params()];
            grads_into(&params, &spec, &xs, EngineMode::WithJets, &seeds, &mut fast);

            let mut slow = vec![0.0; params.n_params()];
            for p in 0..n {
                let x = &xs[p * d..(p + 1) * d];
                let tape = Tape::new();
                let mut net = TapedNet::new(&tape, &params, &spec);
                for axis in 0..d {
                    let out = net.forward_axis(x, axis);
                    if axis == 0 {
                        tape.backward_into(out.idx, seeds[p].u, &mut slow).unwrap();
                    }
                    tape.backward_into(out.take_d1().idx, seeds[p].d1[axis], &mut slow).unwrap();
                    tape.backward_into(out.take_d2().idx, seeds[p].d2[axis], &mut slow).unwrap();
                }
            }

            for i in 0..params.n_params() {
                let (a, b) = (fast[i], slow[i]);
                let err = (a - b).abs() / a.abs().max(b.abs()).max(1e-8);
                assert!(err <= 1e-9, "{spec:?} param {i}: layered {a} vs tape {b}");
                if !params.is_trainable(i) {
                    assert_eq!(a, 0.0);
                }
            }
        }
    }

    #[test]
    fn scaled_sine_batches_stay_finite_over_seeds() {
        let spec = fcnn(1, 50, 3, Activation::Sine, 1.0);
        for seed in 0..10 {
            let params = init_params(&spec, seed);
            let xs: Vec<f64> = (0..2000).map(|i| -1.0 + 2.0 * (i as f64 + 1.0) / 2001.0).collect();
            let outs = batch_outputs(&params, &spec, &xs, EngineMode::WithJets);
            assert!(outs
                .iter()
                .all(|o| o.u.is_finite() && o.grad[0].is_finite() && o.d2[0].is_finite()));
        }
    }

    #[test]
    fn checkpoint_roundtrip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let spec = mmnn(2, 11, 4, 3);
        let params = init_params(&spec, 123);
        let path = dir.path().join("ckpt.json");
        save_checkpoint(&path, &Checkpoint::new(&spec, 123, &params)).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(loaded.spec, spec);
        assert_eq!(
            loaded.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            params.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        let roundtrip = loaded.into_params();
        assert_eq!(roundtrip.n_trainable(), params.n_trainable());
    }
}
