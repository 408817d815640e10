//! Recorded-computation reverse pass.
//!
//! Every node holds one primitive jet operation together with its recorded
//! output. All three jet channels `(v, d1, d2)` are treated as ordinary
//! scalars by the reverse sweep, so gradients of losses that depend on first
//! or second derivatives of the recorded quantity are exact.
//!
//! Tapes are single-writer: one tape per collocation point (or chunk), built
//! and consumed on one thread. Batch evaluation uses independent tapes that
//! may run concurrently.

use std::cell::RefCell;

use super::jet::{Activation, Jet2};
use crate::Error;

/// Unary primitives recorded on the tape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnFn {
    Sin,
    Cos,
    Exp,
    Tanh,
    Relu,
    ReluPow3,
}

impl UnFn {
    /// `(f, f', f'', f''')` at `x`.
    #[inline]
    pub fn derivs3(self, x: f64) -> (f64, f64, f64, f64) {
        match self {
            UnFn::Sin => Activation::Sine.derivs3(x),
            UnFn::Cos => {
                let (s, c) = libm::sincos(x);
                (c, -s, -c, s)
            }
            UnFn::Exp => {
                let e = libm::exp(x);
                (e, e, e, e)
            }
            UnFn::Tanh => Activation::Tanh.derivs3(x),
            UnFn::Relu => Activation::Relu.derivs3(x),
            UnFn::ReluPow3 => Activation::ReluPow3.derivs3(x),
        }
    }

    #[inline]
    fn apply(self, a: Jet2) -> Jet2 {
        let (f, df, ddf, _) = self.derivs3(a.v);
        a.lift(f, df, ddf)
    }
}

/// One recorded primitive with operand indices.
#[derive(Clone, Copy, Debug)]
pub enum Op {
    /// Input, constant, or trainable parameter. Only parameter leaves receive
    /// gradient entries; everything else is constant for the reverse pass.
    Leaf { param: Option<u32> },
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Neg(u32),
    Scale(u32, f64),
    Recip(u32),
    Un(UnFn, u32),
    /// Project the first-derivative channel of a node to a plain scalar.
    TakeD1(u32),
    /// Project the second-derivative channel of a node to a plain scalar.
    TakeD2(u32),
}

#[derive(Clone, Copy, Debug)]
pub struct Node {
    pub op: Op,
    pub out: Jet2,
}

/// Per-parameter gradient vector, same length and layout as the flat
/// parameter array. Frozen parameters keep zero entries.
#[derive(Clone, Debug)]
pub struct Adjoints {
    pub values: Vec<f64>,
}

/// Append-only record of primitive jet operations.
#[derive(Default)]
pub struct Tape {
    nodes: RefCell<Vec<Node>>,
}

/// Handle to a node on a tape. Cheap to copy; arithmetic on handles records
/// new nodes.
#[derive(Clone, Copy)]
pub struct TapeJet<'t> {
    tape: &'t Tape,
    pub idx: u32,
}

impl Tape {
    pub fn new() -> Self {
        Tape::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, idx: u32) -> Node {
        self.nodes.borrow()[idx as usize]
    }

    fn push(&self, op: Op, out: Jet2) -> u32 {
        let mut nodes = self.nodes.borrow_mut();
        let idx = nodes.len() as u32;
        nodes.push(Node { op, out });
        idx
    }

    /// Record a constant or input leaf.
    pub fn leaf(&self, jet: Jet2) -> TapeJet<'_> {
        let idx = self.push(Op::Leaf { param: None }, jet);
        TapeJet { tape: self, idx }
    }

    /// Record a trainable-parameter leaf; `param` indexes the flat parameter
    /// array that the reverse pass accumulates into.
    pub fn param(&self, value: f64, param: u32) -> TapeJet<'_> {
        let idx = self.push(Op::Leaf { param: Some(param) }, Jet2::constant(value));
        TapeJet { tape: self, idx }
    }

    /// Every operand index precedes its consumer.
    pub fn is_topologically_ordered(&self) -> bool {
        let nodes = self.nodes.borrow();
        nodes.iter().enumerate().all(|(i, n)| {
            let ok = |j: u32| (j as usize) < i;
            match n.op {
                Op::Leaf { .. } => true,
                Op::Add(a, b) | Op::Sub(a, b) | Op::Mul(a, b) => ok(a) && ok(b),
                Op::Neg(a)
                | Op::Scale(a, _)
                | Op::Recip(a)
                | Op::Un(_, a)
                | Op::TakeD1(a)
                | Op::TakeD2(a) => ok(a),
            }
        })
    }

    /// Recompute every non-leaf output from its operands and compare against
    /// the recorded value bit for bit. Returns the first mismatching index.
    pub fn replay_check(&self) -> Result<(), u32> {
        let nodes = self.nodes.borrow();
        for (i, n) in nodes.iter().enumerate() {
            let get = |j: u32| nodes[j as usize].out;
            let recomputed = match n.op {
                Op::Leaf { .. } => continue,
                Op::Add(a, b) => get(a) + get(b),
                Op::Sub(a, b) => get(a) - get(b),
                Op::Mul(a, b) => get(a) * get(b),
                Op::Neg(a) => -get(a),
                Op::Scale(a, c) => get(a).scale(c),
                Op::Recip(a) => get(a).recip(),
                Op::Un(f, a) => f.apply(get(a)),
                Op::TakeD1(a) => Jet2::constant(get(a).d1),
                Op::TakeD2(a) => Jet2::constant(get(a).d2),
            };
            let bits = |j: Jet2| (j.v.to_bits(), j.d1.to_bits(), j.d2.to_bits());
            if bits(recomputed) != bits(n.out) {
                return Err(i as u32);
            }
        }
        Ok(())
    }

    /// Accumulate `seed * d(out.v)/d(theta)` into `grad` for every parameter
    /// leaf on the tape.
    pub fn backward_into(&self, out: u32, seed: f64, grad: &mut [f64]) -> Result<(), Error> {
        let nodes = self.nodes.borrow();
        if (out as usize) >= nodes.len() {
            return Err(Error::DanglingNode { idx: out, len: nodes.len() });
        }
        let mut adj = vec![Jet2::ZERO; nodes.len()];
        adj[out as usize].v = seed;
        for i in (0..nodes.len()).rev() {
            let a = adj[i];
            if a.v == 0.0 && a.d1 == 0.0 && a.d2 == 0.0 {
                continue;
            }
            match nodes[i].op {
                Op::Leaf { param } => {
                    if let Some(p) = param {
                        grad[p as usize] += a.v;
                    }
                }
                Op::Add(x, y) => {
                    let (x, y) = (x as usize, y as usize);
                    adj[x] = adj[x] + a;
                    adj[y] = adj[y] + a;
                }
                Op::Sub(x, y) => {
                    let (x, y) = (x as usize, y as usize);
                    adj[x] = adj[x] + a;
                    adj[y] = adj[y] - a;
                }
                Op::Mul(x, y) => {
                    let jx = nodes[x as usize].out;
                    let jy = nodes[y as usize].out;
                    let (x, y) = (x as usize, y as usize);
                    adj[x].v += a.v * jy.v + a.d1 * jy.d1 + a.d2 * jy.d2;
                    adj[x].d1 += a.d1 * jy.v + 2.0 * a.d2 * jy.d1;
                    adj[x].d2 += a.d2 * jy.v;
                    adj[y].v += a.v * jx.v + a.d1 * jx.d1 + a.d2 * jx.d2;
                    adj[y].d1 += a.d1 * jx.v + 2.0 * a.d2 * jx.d1;
                    adj[y].d2 += a.d2 * jx.v;
                }
                Op::Neg(x) => {
                    let x = x as usize;
                    adj[x] = adj[x] - a;
                }
                Op::Scale(x, c) => {
                    let x = x as usize;
                    adj[x] = adj[x] + a.scale(c);
                }
                Op::Recip(x) => {
                    let xv = nodes[x as usize].out;
                    let r = 1.0 / xv.v;
                    let r2 = r * r;
                    Self::unary_adjoint(&mut adj, x as usize, a, xv, -r2, 2.0 * r2 * r, -6.0 * r2 * r2);
                }
                Op::Un(f, x) => {
                    let xv = nodes[x as usize].out;
                    let (_, df, ddf, dddf) = f.derivs3(xv.v);
                    Self::unary_adjoint(&mut adj, x as usize, a, xv, df, ddf, dddf);
                }
                Op::TakeD1(x) => {
                    adj[x as usize].d1 += a.v;
                }
                Op::TakeD2(x) => {
                    adj[x as usize].d2 += a.v;
                }
            }
        }
        Ok(())
    }

    #[inline]
    fn unary_adjoint(adj: &mut [Jet2], x: usize, a: Jet2, jx: Jet2, df: f64, ddf: f64, dddf: f64) {
        adj[x].v += a.v * df + a.d1 * ddf * jx.d1 + a.d2 * (dddf * jx.d1 * jx.d1 + ddf * jx.d2);
        adj[x].d1 += a.d1 * df + 2.0 * a.d2 * ddf * jx.d1;
        adj[x].d2 += a.d2 * df;
    }
}

/// Gradient of a recorded scalar with respect to all trainable parameters.
pub fn tape_backward(tape: &Tape, out: TapeJet<'_>, n_params: usize) -> Result<Adjoints, Error> {
    let mut values = vec![0.0; n_params];
    tape.backward_into(out.idx, 1.0, &mut values)?;
    Ok(Adjoints { values })
}

impl<'t> TapeJet<'t> {
    /// Rebuild a handle from a node index (parameter-leaf caches hold bare
    /// indices).
    pub fn from_parts(tape: &'t Tape, idx: u32) -> Self {
        TapeJet { tape, idx }
    }

    pub fn jet(self) -> Jet2 {
        self.tape.node(self.idx).out
    }

    fn bin(self, o: TapeJet<'t>, op: fn(u32, u32) -> Op, out: Jet2) -> TapeJet<'t> {
        debug_assert!(std::ptr::eq(self.tape, o.tape));
        let idx = self.tape.push(op(self.idx, o.idx), out);
        TapeJet { tape: self.tape, idx }
    }

    fn un(self, op: Op, out: Jet2) -> TapeJet<'t> {
        let idx = self.tape.push(op, out);
        TapeJet { tape: self.tape, idx }
    }

    pub fn recip(self) -> Self {
        self.un(Op::Recip(self.idx), self.jet().recip())
    }

    pub fn scale(self, c: f64) -> Self {
        self.un(Op::Scale(self.idx, c), self.jet().scale(c))
    }

    pub fn unfn(self, f: UnFn) -> Self {
        self.un(Op::Un(f, self.idx), f.apply(self.jet()))
    }

    pub fn sin(self) -> Self {
        self.unfn(UnFn::Sin)
    }

    pub fn cos(self) -> Self {
        self.unfn(UnFn::Cos)
    }

    pub fn exp(self) -> Self {
        self.unfn(UnFn::Exp)
    }

    pub fn tanh(self) -> Self {
        self.unfn(UnFn::Tanh)
    }

    pub fn relu_pow3(self) -> Self {
        self.unfn(UnFn::ReluPow3)
    }

    /// First-derivative channel as a plain scalar node.
    pub fn take_d1(self) -> Self {
        self.un(Op::TakeD1(self.idx), Jet2::constant(self.jet().d1))
    }

    /// Second-derivative channel as a plain scalar node.
    pub fn take_d2(self) -> Self {
        self.un(Op::TakeD2(self.idx), Jet2::constant(self.jet().d2))
    }

    pub fn activate(self, a: Activation) -> Self {
        match a {
            Activation::Sine => self.unfn(UnFn::Sin),
            Activation::Tanh => self.unfn(UnFn::Tanh),
            Activation::Relu => self.unfn(UnFn::Relu),
            Activation::ReluPow3 => self.unfn(UnFn::ReluPow3),
        }
    }
}

impl<'t> std::ops::Add for TapeJet<'t> {
    type Output = TapeJet<'t>;
    fn add(self, o: TapeJet<'t>) -> TapeJet<'t> {
        let out = self.jet() + o.jet();
        self.bin(o, Op::Add, out)
    }
}

impl<'t> std::ops::Sub for TapeJet<'t> {
    type Output = TapeJet<'t>;
    fn sub(self, o: TapeJet<'t>) -> TapeJet<'t> {
        let out = self.jet() - o.jet();
        self.bin(o, Op::Sub, out)
    }
}

impl<'t> std::ops::Mul for TapeJet<'t> {
    type Output = TapeJet<'t>;
    fn mul(self, o: TapeJet<'t>) -> TapeJet<'t> {
        let out = self.jet() * o.jet();
        self.bin(o, Op::Mul, out)
    }
}

impl<'t> std::ops::Div for TapeJet<'t> {
    type Output = TapeJet<'t>;
    fn div(self, o: TapeJet<'t>) -> TapeJet<'t> {
        self * o.recip()
    }
}

impl<'t> std::ops::Neg for TapeJet<'t> {
    type Output = TapeJet<'t>;
    fn neg(self) -> TapeJet<'t> {
        let out = -self.jet();
        self.un(Op::Neg(self.idx), out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn square_of_parameter() {
        let tape = Tape::new();
        let p = tape.param(3.0, 0);
        let sq = p * p;
        let g = tape_backward(&tape, sq, 2).unwrap();
        assert_eq!(g.values, vec![6.0, 0.0]);
    }

    #[test]
    fn untouched_parameter_has_zero_gradient() {
        let tape = Tape::new();
        let p0 = tape.param(1.5, 0);
        let _p1 = tape.param(-2.0, 1);
        let out = p0.sin();
        let g = tape_backward(&tape, out, 2).unwrap();
        assert_eq!(g.values[1], 0.0);
        assert!((g.values[0] - 1.5f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn dangling_handle_is_an_error() {
        let tape = Tape::new();
        let p = tape.param(1.0, 0);
        let _ = p;
        let mut grad = vec![0.0; 1];
        assert!(matches!(
            tape.backward_into(99, 1.0, &mut grad),
            Err(crate::Error::DanglingNode { .. })
        ));
    }

    /// Gradient of an expression mixing jet channels, checked against central
    /// finite differences over each parameter.
    #[test]
    fn composite_gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let eval = |theta: &[f64]| -> f64 {
            let tape = Tape::new();
            let x = tape.leaf(Jet2::seed(0.4, true));
            let p0 = tape.param(theta[0], 0);
            let p1 = tape.param(theta[1], 1);
            let p2 = tape.param(theta[2], 2);
            // u = p2 * tanh(p0 * x + p1); out = u_d2 * p0 + u_d1 - u
            let u = (p0 * x + p1).tanh() * p2;
            let out = u.take_d2() * p0 + u.take_d1() - u;
            out.jet().v
        };
        for _ in 0..50 {
            let theta: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let tape = Tape::new();
            let x = tape.leaf(Jet2::seed(0.4, true));
            let p0 = tape.param(theta[0], 0);
            let p1 = tape.param(theta[1], 1);
            let p2 = tape.param(theta[2], 2);
            let u = (p0 * x + p1).tanh() * p2;
            let out = u.take_d2() * p0 + u.take_d1() - u;
            let g = tape_backward(&tape, out, 3).unwrap();

            let h = 1e-5;
            for k in 0..3 {
                let mut tp = theta.clone();
                tp[k] += h;
                let mut tm = theta.clone();
                tm[k] -= h;
                let fd = (eval(&tp) - eval(&tm)) / (2.0 * h);
                let rel = (g.values[k] - fd).abs() / fd.abs().max(g.values[k].abs()).max(1e-6);
                assert!(rel <= 1e-6, "param {k}: ad {} vs fd {}", g.values[k], fd);
            }
        }
    }

    #[test]
    fn backward_is_linear_in_seeds() {
        let tape = Tape::new();
        let x = tape.leaf(Jet2::seed(0.9, true));
        let p = tape.param(0.7, 0);
        let l1 = (p * x).sin();
        let l2 = (p * x).exp() * p;

        let combined = l1.scale(2.5) + l2.scale(-1.25);
        let g = tape_backward(&tape, combined, 1).unwrap();

        let mut expect = vec![0.0];
        tape.backward_into(l1.idx, 2.5, &mut expect).unwrap();
        tape.backward_into(l2.idx, -1.25, &mut expect).unwrap();
        assert_eq!(g.values[0], expect[0]);
    }

    #[test]
    fn replay_and_topology() {
        let tape = Tape::new();
        let x = tape.leaf(Jet2::seed(-0.3, true));
        let p = tape.param(1.1, 0);
        let e = (p * x).relu_pow3() + (x / (p * p + tape.leaf(Jet2::constant(2.0)))).cos();
        let _ = e;
        assert!(tape.is_topologically_ordered());
        assert!(tape.replay_check().is_ok());
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let run = || {
            let tape = Tape::new();
            let x = tape.leaf(Jet2::seed(0.25, true));
            let p0 = tape.param(0.31, 0);
            let p1 = tape.param(-0.8, 1);
            let out = (p0 * x + p1).sin() * p0 + (p1 * x).tanh();
            tape_backward(&tape, out, 2).unwrap().values
        };
        let a = run();
        let b = run();
        assert_eq!(
            a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }
}
