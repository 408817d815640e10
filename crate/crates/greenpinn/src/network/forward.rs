//! Point evaluation of networks, generic over the scalar carrier.
//!
//! One definition of the forward pass serves three instantiations: plain
//! `f64` values, [`Jet2`] directional jets, and taped jets for the reverse
//! pass. All three accumulate dot products in the same order (bias first,
//! then ascending input index), so their value channels agree bit for bit.

use super::{Arch, JetOutput, NetworkSpec, ParamSet};
use crate::autodiff::{Activation, Jet2, Tape, TapeJet};
use crate::par;

/// Scalar carrier usable inside a network forward pass.
pub trait NetScalar:
    Copy
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
{
    fn activate(self, a: Activation) -> Self;
}

impl NetScalar for f64 {
    #[inline]
    fn activate(self, a: Activation) -> Self {
        a.derivs(self).0
    }
}

impl NetScalar for Jet2 {
    #[inline]
    fn activate(self, a: Activation) -> Self {
        match a {
            Activation::Sine => self.sin(),
            Activation::Tanh => self.tanh(),
            Activation::Relu => self.relu(),
            Activation::ReluPow3 => self.relu_pow3(),
        }
    }
}

impl<'t> NetScalar for TapeJet<'t> {
    #[inline]
    fn activate(self, a: Activation) -> Self {
        TapeJet::activate(self, a)
    }
}

#[inline]
fn linear<S: NetScalar>(
    get: &mut impl FnMut(usize) -> S,
    w_off: usize,
    b_off: usize,
    rows: usize,
    cols: usize,
    z: &[S],
) -> Vec<S> {
    debug_assert_eq!(z.len(), cols);
    (0..rows)
        .map(|i| {
            let mut acc = get(b_off + i);
            for (j, &zj) in z.iter().enumerate() {
                acc = acc + get(w_off + i * cols + j) * zj;
            }
            acc
        })
        .collect()
}

/// Evaluate the network at one point. `get` fetches the parameter at a flat
/// index as the scalar carrier; `x` holds the (possibly seeded) inputs.
pub fn eval_net<S: NetScalar>(
    spec: &NetworkSpec,
    params: &ParamSet,
    get: &mut impl FnMut(usize) -> S,
    x: &[S],
) -> S {
    debug_assert_eq!(x.len(), spec.input_dim);
    let act = spec.activation;
    let mut z: Vec<S> = x.to_vec();
    let mut blocks = params.layout.iter();

    match spec.arch {
        Arch::Fcnn => {
            for _ in 0..spec.depth {
                let w = blocks.next().expect("layout");
                let b = blocks.next().expect("layout");
                z = linear(get, w.offset, b.offset, w.shape.0, w.shape.1, &z);
                for s in &mut z {
                    *s = s.activate(act);
                }
            }
        }
        Arch::Mmnn => {
            for _ in 1..spec.depth {
                let wf = blocks.next().expect("layout");
                let bf = blocks.next().expect("layout");
                let mut h = linear(get, wf.offset, bf.offset, wf.shape.0, wf.shape.1, &z);
                for s in &mut h {
                    *s = s.activate(act);
                }
                let a = blocks.next().expect("layout");
                let c = blocks.next().expect("layout");
                z = linear(get, a.offset, c.offset, a.shape.0, a.shape.1, &h);
            }
            let wf = blocks.next().expect("layout");
            let bf = blocks.next().expect("layout");
            z = linear(get, wf.offset, bf.offset, wf.shape.0, wf.shape.1, &z);
            for s in &mut z {
                *s = s.activate(act);
            }
        }
    }

    let w = blocks.next().expect("layout");
    let b = blocks.next().expect("layout");
    linear(get, w.offset, b.offset, 1, w.shape.1, &z)[0]
}

/// Network value at `x`.
pub fn forward(params: &ParamSet, spec: &NetworkSpec, x: &[f64]) -> f64 {
    let mut get = |i: usize| params.values[i];
    eval_net(spec, params, &mut get, x)
}

/// Value, gradient, and pure second derivatives at `x`: one jet pass per
/// coordinate axis.
pub fn forward_jets(params: &ParamSet, spec: &NetworkSpec, x: &[f64]) -> JetOutput {
    let d = spec.input_dim;
    let mut grad = vec![0.0; d];
    let mut d2 = vec![0.0; d];
    let mut u = 0.0;
    let mut get = |i: usize| Jet2::constant(params.values[i]);
    for axis in 0..d {
        let seeded: Vec<Jet2> = (0..d).map(|k| Jet2::seed(x[k], k == axis)).collect();
        let out = eval_net(spec, params, &mut get, &seeded);
        grad[axis] = out.d1;
        d2[axis] = out.d2;
        if axis == 0 {
            u = out.v;
        }
    }
    JetOutput { u, grad, d2 }
}

/// Elementwise [`forward_jets`] over a batch, deterministic output order.
pub fn batch_forward_jets(params: &ParamSet, spec: &NetworkSpec, xs: &[Vec<f64>]) -> Vec<JetOutput> {
    let mut out = vec![JetOutput { u: 0.0, grad: vec![], d2: vec![] }; xs.len()];
    par::fill_by(&mut out, |i| forward_jets(params, spec, &xs[i]));
    out
}

/// A network being recorded on a tape. Parameter leaves are created lazily
/// and shared between axis passes; frozen parameters become constant leaves,
/// so no gradient is ever produced for them.
pub struct TapedNet<'t, 'p> {
    pub tape: &'t Tape,
    params: &'p ParamSet,
    spec: &'p NetworkSpec,
    leaf_cache: Vec<Option<u32>>,
}

impl<'t, 'p> TapedNet<'t, 'p> {
    pub fn new(tape: &'t Tape, params: &'p ParamSet, spec: &'p NetworkSpec) -> Self {
        TapedNet { tape, params, spec, leaf_cache: vec![None; params.n_params()] }
    }

    /// Record one jet forward pass seeded along `axis`.
    pub fn forward_axis(&mut self, x: &[f64], axis: usize) -> TapeJet<'t> {
        let tape = self.tape;
        let params = self.params;
        let cache = &mut self.leaf_cache;
        let mut get = |i: usize| -> TapeJet<'t> {
            if let Some(idx) = cache[i] {
                return tape_jet(tape, idx);
            }
            let leaf = if params.is_trainable(i) {
                tape.param(params.values[i], i as u32)
            } else {
                tape.leaf(Jet2::constant(params.values[i]))
            };
            cache[i] = Some(leaf.idx);
            leaf
        };
        let seeded: Vec<TapeJet<'t>> = (0..self.spec.input_dim)
            .map(|k| tape.leaf(Jet2::seed(x[k], k == axis)))
            .collect();
        eval_net(self.spec, params, &mut get, &seeded)
    }
}

fn tape_jet(tape: &Tape, idx: u32) -> TapeJet<'_> {
    // Reconstruct a handle from a cached node index.
    TapeJet::from_parts(tape, idx)
}

/// Record a single-axis jet pass of the network on `tape`.
pub fn taped_forward<'t>(
    tape: &'t Tape,
    params: &ParamSet,
    spec: &NetworkSpec,
    x: &[f64],
    axis: usize,
) -> TapeJet<'t> {
    TapedNet::new(tape, params, spec).forward_axis(x, axis)
}

/// Anything that can report value and jets at a point: a network or an
/// analytic closure standing in for one.
pub trait JetField: Sync {
    fn jets(&self, x: &[f64]) -> JetOutput;
    fn value(&self, x: &[f64]) -> f64 {
        self.jets(x).u
    }
}

/// A `(params, spec)` pair viewed as a field.
pub struct NetField<'a> {
    pub params: &'a ParamSet,
    pub spec: &'a NetworkSpec,
}

impl JetField for NetField<'_> {
    fn jets(&self, x: &[f64]) -> JetOutput {
        forward_jets(self.params, self.spec, x)
    }
    fn value(&self, x: &[f64]) -> f64 {
        forward(self.params, self.spec, x)
    }
}
