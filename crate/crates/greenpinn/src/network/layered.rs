//! Batched layer-level evaluation and gradients.
//!
//! The taped reverse pass in [`crate::autodiff`] is the per-primitive
//! reference; this module is the production path for full-batch training. It
//! walks the same layer structure with the same per-unit accumulation order
//! (bias first, then ascending input index), so value channels match the
//! generic forward bit for bit, and runs points in lanes of [`LANES`] so the
//! channel loops vectorize.
//!
//! Gradients are accumulated per fixed-size chunk of points and folded in
//! chunk order (see [`crate::par`]), making results independent of worker
//! count.

use super::forward::JetField;
use super::{Arch, JetOutput, NetworkSpec, ParamSet};
use crate::autodiff::Activation;
use crate::par;

/// Points processed together in one register-friendly lane group.
pub const LANES: usize = 8;

/// Whether a pass carries derivative channels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EngineMode {
    /// Value channel only (function approximation, boundary terms, metrics).
    ValueOnly,
    /// Value plus first and second directional derivatives per axis.
    WithJets,
}

/// Adjoint seeds for one point's output jets: `u` seeds the value, `d1[a]`
/// and `d2[a]` seed the derivative channels of axis `a`.
#[derive(Clone, Copy, Debug, Default)]
pub struct PointGrad {
    pub u: f64,
    pub d1: [f64; 3],
    pub d2: [f64; 3],
}

#[derive(Clone, Copy, Debug)]
enum Stage {
    Linear { w_off: usize, b_off: usize, rows: usize, cols: usize, trainable: bool },
    Act,
}

struct Plan {
    stages: Vec<Stage>,
    /// Output width of each stage.
    dims: Vec<usize>,
    in_dim: usize,
    act: Activation,
}

fn build_plan(spec: &NetworkSpec, params: &ParamSet) -> Plan {
    let mut stages = Vec::new();
    let mut dims = Vec::new();
    let mut blocks = params.layout.iter();
    let linear = |blocks: &mut std::slice::Iter<'_, super::ParamBlock>,
                      stages: &mut Vec<Stage>,
                      dims: &mut Vec<usize>| {
        let w = blocks.next().expect("layout");
        let b = blocks.next().expect("layout");
        stages.push(Stage::Linear {
            w_off: w.offset,
            b_off: b.offset,
            rows: w.shape.0,
            cols: w.shape.1,
            trainable: w.trainable,
        });
        dims.push(w.shape.0);
    };
    match spec.arch {
        Arch::Fcnn => {
            for _ in 0..spec.depth {
                linear(&mut blocks, &mut stages, &mut dims);
                stages.push(Stage::Act);
                dims.push(*dims.last().unwrap());
            }
        }
        Arch::Mmnn => {
            for _ in 1..spec.depth {
                linear(&mut blocks, &mut stages, &mut dims);
                stages.push(Stage::Act);
                dims.push(*dims.last().unwrap());
                linear(&mut blocks, &mut stages, &mut dims);
            }
            linear(&mut blocks, &mut stages, &mut dims);
            stages.push(Stage::Act);
            dims.push(*dims.last().unwrap());
        }
    }
    linear(&mut blocks, &mut stages, &mut dims);
    Plan { stages, dims, in_dim: spec.input_dim, act: spec.activation }
}

/// Scratch buffers for one lane group: one `[ch][unit][lane]` array per
/// stage, reused across lane groups and axes. `CH` is 1 or 3.
struct Scratch {
    out: Vec<Vec<f64>>,
    adj: Vec<Vec<f64>>,
    input: Vec<f64>,
}

impl Scratch {
    fn new(plan: &Plan, ch: usize) -> Self {
        let alloc = |unitcount: usize| vec![0.0; ch * unitcount * LANES];
        Scratch {
            out: plan.dims.iter().map(|&u| alloc(u)).collect(),
            adj: plan.dims.iter().map(|&u| alloc(u)).collect(),
            input: alloc(plan.in_dim),
        }
    }
}

#[inline]
fn idx(ch: usize, units: usize, i: usize) -> usize {
    (ch * units + i) * LANES
}

/// Forward through all stages for one lane group. `scratch.input` must hold
/// the seeded input channels.
fn forward_stages<const CH: usize>(plan: &Plan, values: &[f64], scratch: &mut Scratch) {
    for s in 0..plan.stages.len() {
        let (done, rest) = scratch.out.split_at_mut(s);
        let out = &mut rest[0];
        let prev: &[f64] = if s == 0 { &scratch.input } else { &done[s - 1] };
        let prev_units = if s == 0 { plan.in_dim } else { plan.dims[s - 1] };
        match plan.stages[s] {
            Stage::Linear { w_off, b_off, rows, cols, .. } => {
                debug_assert_eq!(prev_units, cols);
                for c in 0..CH {
                    for i in 0..rows {
                        let mut acc = if c == 0 {
                            [values[b_off + i]; LANES]
                        } else {
                            [0.0; LANES]
                        };
                        let wrow = &values[w_off + i * cols..w_off + (i + 1) * cols];
                        for (j, &w) in wrow.iter().enumerate() {
                            let z = &prev[idx(c, cols, j)..idx(c, cols, j) + LANES];
                            for l in 0..LANES {
                                acc[l] += w * z[l];
                            }
                        }
                        out[idx(c, rows, i)..idx(c, rows, i) + LANES].copy_from_slice(&acc);
                    }
                }
            }
            Stage::Act => {
                let units = prev_units;
                for i in 0..units {
                    for l in 0..LANES {
                        let pv = prev[idx(0, units, i) + l];
                        let (f, df, ddf) = plan.act.derivs(pv);
                        out[idx(0, units, i) + l] = f;
                        if CH == 3 {
                            let pd1 = prev[idx(1, units, i) + l];
                            let pd2 = prev[idx(2, units, i) + l];
                            out[idx(1, units, i) + l] = df * pd1;
                            out[idx(2, units, i) + l] = ddf * pd1 * pd1 + df * pd2;
                        }
                    }
                }
            }
        }
    }
}

/// Reverse sweep for one lane group. `seed` holds the output-unit adjoints
/// per channel and lane; weight and bias gradients accumulate into `grad`.
fn backward_stages<const CH: usize>(
    plan: &Plan,
    values: &[f64],
    scratch: &mut Scratch,
    seed: &[[f64; LANES]],
    grad: &mut [f64],
) {
    let n_stages = plan.stages.len();
    // Seed the last stage's adjoint (its output width is 1).
    for buf in scratch.adj.iter_mut() {
        buf.fill(0.0);
    }
    {
        let last = &mut scratch.adj[n_stages - 1];
        for c in 0..CH {
            last[idx(c, 1, 0)..idx(c, 1, 0) + LANES].copy_from_slice(&seed[c]);
        }
    }

    for s in (0..n_stages).rev() {
        let (below, rest) = scratch.adj.split_at_mut(s);
        let a_out = &rest[0];
        let prev_units = if s == 0 { plan.in_dim } else { plan.dims[s - 1] };
        match plan.stages[s] {
            Stage::Linear { w_off, b_off, rows, cols, trainable } => {
                let z: &[f64] = if s == 0 { &scratch.input } else { &scratch.out[s - 1] };
                if trainable {
                    for i in 0..rows {
                        let mut bacc = 0.0;
                        for l in 0..LANES {
                            bacc += a_out[idx(0, rows, i) + l];
                        }
                        grad[b_off + i] += bacc;
                        for j in 0..cols {
                            let mut wacc = 0.0;
                            for c in 0..CH {
                                let ai = &a_out[idx(c, rows, i)..idx(c, rows, i) + LANES];
                                let zj = &z[idx(c, cols, j)..idx(c, cols, j) + LANES];
                                for l in 0..LANES {
                                    wacc += ai[l] * zj[l];
                                }
                            }
                            grad[w_off + i * cols + j] += wacc;
                        }
                    }
                }
                if s > 0 {
                    let a_in = &mut below[s - 1];
                    for c in 0..CH {
                        for i in 0..rows {
                            let ai = &a_out[idx(c, rows, i)..idx(c, rows, i) + LANES];
                            let wrow = &values[w_off + i * cols..w_off + (i + 1) * cols];
                            for (j, &w) in wrow.iter().enumerate() {
                                let aj = &mut a_in[idx(c, cols, j)..idx(c, cols, j) + LANES];
                                for l in 0..LANES {
                                    aj[l] += w * ai[l];
                                }
                            }
                        }
                    }
                }
            }
            Stage::Act => {
                let units = prev_units;
                let pre = &scratch.out[s - 1];
                let a_in = &mut below[s - 1];
                for i in 0..units {
                    for l in 0..LANES {
                        let pv = pre[idx(0, units, i) + l];
                        if CH == 3 {
                            let (_, df, ddf, dddf) = plan.act.derivs3(pv);
                            let pd1 = pre[idx(1, units, i) + l];
                            let pd2 = pre[idx(2, units, i) + l];
                            let av = a_out[idx(0, units, i) + l];
                            let a1 = a_out[idx(1, units, i) + l];
                            let a2 = a_out[idx(2, units, i) + l];
                            a_in[idx(0, units, i) + l] +=
                                av * df + a1 * ddf * pd1 + a2 * (dddf * pd1 * pd1 + ddf * pd2);
                            a_in[idx(1, units, i) + l] += a1 * df + 2.0 * a2 * ddf * pd1;
                            a_in[idx(2, units, i) + l] += a2 * df;
                        } else {
                            let (_, df, _) = plan.act.derivs(pv);
                            a_in[idx(0, units, i) + l] += a_out[idx(0, units, i) + l] * df;
                        }
                    }
                }
            }
        }
    }
}

fn load_input<const CH: usize>(
    scratch: &mut Scratch,
    xs: &[f64],
    dim: usize,
    range: std::ops::Range<usize>,
    n: usize,
    axis: usize,
) {
    scratch.input.fill(0.0);
    for l in 0..LANES {
        // Pad short groups by repeating the last point; padded lanes get zero
        // seeds so they contribute nothing.
        let p = (range.start + l).min(n - 1);
        for k in 0..dim {
            scratch.input[idx(0, dim, k) + l] = xs[p * dim + k];
        }
        if CH == 3 {
            scratch.input[idx(1, dim, axis) + l] = 1.0;
        }
    }
}

fn gather_outputs<const CH: usize>(
    _plan: &Plan,
    scratch: &Scratch,
    axis: usize,
    group: usize,
    out: &mut [JetOutput],
) {
    let last = scratch.out.last().expect("stages");
    for (l, jo) in out.iter_mut().take(group).enumerate() {
        if axis == 0 {
            jo.u = last[idx(0, 1, 0) + l];
        }
        if CH == 3 {
            jo.grad[axis] = last[idx(1, 1, 0) + l];
            jo.d2[axis] = last[idx(2, 1, 0) + l];
        }
    }
}

fn run_batch<const CH: usize>(
    params: &ParamSet,
    plan: &Plan,
    xs: &[f64],
    seeds: Option<&(dyn Fn(usize, &JetOutput) -> PointGrad + Sync)>,
    fixed_seeds: Option<&[PointGrad]>,
    grad: Option<&mut [f64]>,
) -> Vec<JetOutput> {
    let dim = plan.in_dim;
    let n = xs.len() / dim;
    debug_assert_eq!(n * dim, xs.len());
    let axes = if CH == 3 { dim } else { 1 };
    let want_grad = grad.is_some();

    let chunks = par::map_chunks(n, |range| {
        let mut scratch: Vec<Scratch> = (0..axes).map(|_| Scratch::new(plan, CH)).collect();
        let mut outs: Vec<JetOutput> = range
            .clone()
            .map(|_| JetOutput { u: 0.0, grad: vec![0.0; dim], d2: vec![0.0; dim] })
            .collect();
        let mut local_grad = if want_grad { vec![0.0; params.values.len()] } else { Vec::new() };

        let mut start = range.start;
        while start < range.end {
            let group = (range.end - start).min(LANES);
            for (axis, sc) in scratch.iter_mut().enumerate() {
                load_input::<CH>(sc, xs, dim, start..start + group, n, axis);
                forward_stages::<CH>(plan, &params.values, sc);
                gather_outputs::<CH>(
                    plan,
                    sc,
                    axis,
                    group,
                    &mut outs[start - range.start..],
                );
            }
            if want_grad {
                let mut pg = [PointGrad::default(); LANES];
                for l in 0..group {
                    let gi = start + l;
                    pg[l] = match (seeds, fixed_seeds) {
                        (Some(f), _) => f(gi, &outs[gi - range.start]),
                        (_, Some(s)) => s[gi],
                        _ => unreachable!(),
                    };
                }
                for (axis, sc) in scratch.iter_mut().enumerate() {
                    let mut seed = vec![[0.0; LANES]; CH];
                    for l in 0..group {
                        if axis == 0 {
                            seed[0][l] = pg[l].u;
                        }
                        if CH == 3 {
                            seed[1][l] = pg[l].d1[axis];
                            seed[2][l] = pg[l].d2[axis];
                        }
                    }
                    backward_stages::<CH>(plan, &params.values, sc, &seed, &mut local_grad);
                }
            }
            start += group;
        }
        (outs, local_grad)
    });

    let mut all = Vec::with_capacity(n);
    if let Some(grad) = grad {
        for (outs, lg) in chunks {
            all.extend(outs);
            for (g, v) in grad.iter_mut().zip(&lg) {
                *g += v;
            }
        }
    } else {
        for (outs, _) in chunks {
            all.extend(outs);
        }
    }
    all
}

/// Batched jet outputs at `xs` (flat point-major coordinates).
pub fn batch_outputs(
    params: &ParamSet,
    spec: &NetworkSpec,
    xs: &[f64],
    mode: EngineMode,
) -> Vec<JetOutput> {
    let plan = build_plan(spec, params);
    match mode {
        EngineMode::ValueOnly => run_batch::<1>(params, &plan, xs, None, None, None),
        EngineMode::WithJets => run_batch::<3>(params, &plan, xs, None, None, None),
    }
}

/// Accumulate seeded parameter gradients over a batch: adds
/// `sum_p seeds[p] . d(outputs_p)/d(theta)` into `grad`, and returns the
/// outputs from the same pass.
pub fn grads_into(
    params: &ParamSet,
    spec: &NetworkSpec,
    xs: &[f64],
    mode: EngineMode,
    seeds: &[PointGrad],
    grad: &mut [f64],
) -> Vec<JetOutput> {
    let plan = build_plan(spec, params);
    match mode {
        EngineMode::ValueOnly => run_batch::<1>(params, &plan, xs, None, Some(seeds), Some(grad)),
        EngineMode::WithJets => run_batch::<3>(params, &plan, xs, None, Some(seeds), Some(grad)),
    }
}

/// Single-sweep variant for losses whose per-point seed depends only on that
/// point's own outputs: `seed_fn` maps `(point index, jets)` to adjoint
/// seeds. Returns the outputs.
pub fn outputs_and_grads(
    params: &ParamSet,
    spec: &NetworkSpec,
    xs: &[f64],
    mode: EngineMode,
    seed_fn: &(dyn Fn(usize, &JetOutput) -> PointGrad + Sync),
    grad: &mut [f64],
) -> Vec<JetOutput> {
    let plan = build_plan(spec, params);
    match mode {
        EngineMode::ValueOnly => run_batch::<1>(params, &plan, xs, Some(seed_fn), None, Some(grad)),
        EngineMode::WithJets => run_batch::<3>(params, &plan, xs, Some(seed_fn), None, Some(grad)),
    }
}

/// Batched values only; convenience for metric grids.
pub fn batch_values(params: &ParamSet, spec: &NetworkSpec, xs: &[f64]) -> Vec<f64> {
    batch_outputs(params, spec, xs, EngineMode::ValueOnly)
        .into_iter()
        .map(|o| o.u)
        .collect()
}

/// Field view evaluated through the batched engine one point at a time (used
/// by tests to compare against the generic path).
pub struct LayeredField<'a> {
    pub params: &'a ParamSet,
    pub spec: &'a NetworkSpec,
}

impl JetField for LayeredField<'_> {
    fn jets(&self, x: &[f64]) -> JetOutput {
        batch_outputs(self.params, self.spec, x, EngineMode::WithJets)
            .into_iter()
            .next()
            .expect("one point")
    }
}
