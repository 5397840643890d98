//! Minimal deterministic neural-network kernel: linear fusion layer, a
//! stack of uni/bidirectional GRU layers, a two-layer regression head,
//! manual backpropagation, Adam, and bit-exact checkpointing.
//!
//! Parameters live in one flat `f64` arena in a documented order (fusion
//! weight, fusion bias, then per GRU layer and direction `W_r, W_z, W_n,
//! U_r, U_z, U_n, b_r, b_z, b_n`, then the two head layers). Gradients,
//! optimizer state, and checkpoints all share that order, so the whole
//! training loop is reproducible bit for bit.
//!
//! GRU cell (`sigmoid` gates, reset applied to the recurrent candidate
//! contribution, `h_0 = 0`):
//!
//! ```text
//! r_t = sigmoid(W_r x_t + U_r h_{t-1} + b_r)
//! z_t = sigmoid(W_z x_t + U_z h_{t-1} + b_z)
//! n_t = tanh(W_n x_t + r_t .* (U_n h_{t-1} + b_n))
//! h_t = (1 - z_t) .* n_t + z_t .* h_{t-1}
//! ```

use crate::mat::Mat;
use crate::math;
use crate::rng::SplitMix64;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

mod adam;
mod checkpoint;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{decode_checkpoint, encode_checkpoint, CheckpointError, CHECKPOINT_VERSION};

#[derive(Debug, Clone, PartialEq)]
pub enum NnError {
    InvalidConfig { detail: String },
    ShapeMismatch { detail: String },
    /// The cache does not belong to this model/input pair.
    StaleCache,
}

impl fmt::Display for NnError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NnError::InvalidConfig { detail } => write!(f, "invalid model config: {detail}"),
            NnError::ShapeMismatch { detail } => write!(f, "shape mismatch: {detail}"),
            NnError::StaleCache => write!(f, "cache does not match this model"),
        }
    }
}

impl core::error::Error for NnError {}

/// Hyperparameters of the regression model.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    /// Per-modality feature widths in concatenation order.
    pub input_dims: Vec<usize>,
    /// Fusion output width, which is also the GRU hidden size.
    pub fused_dim: usize,
    pub rnn_layers: usize,
    pub bidirectional: bool,
    /// Width of the head bottleneck.
    pub head_hidden: usize,
    /// Seed for parameter initialisation.
    pub seed: u64,
}

impl ModelConfig {
    /// Config with the defaults used throughout: one unidirectional layer
    /// and a head bottleneck of half the fused width.
    pub fn new(input_dims: Vec<usize>, fused_dim: usize) -> Self {
        ModelConfig {
            input_dims,
            fused_dim,
            rnn_layers: 1,
            bidirectional: false,
            head_hidden: (fused_dim / 2).max(1),
            seed: 0,
        }
    }

    pub fn with_layers(mut self, rnn_layers: usize) -> Self {
        self.rnn_layers = rnn_layers;
        self
    }

    pub fn with_bidirectional(mut self, bidirectional: bool) -> Self {
        self.bidirectional = bidirectional;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_head_hidden(mut self, head_hidden: usize) -> Self {
        self.head_hidden = head_hidden;
        self
    }

    /// Total concatenated input width `N`.
    pub fn input_width(&self) -> usize {
        self.input_dims.iter().sum()
    }

    pub fn validate(&self) -> Result<(), NnError> {
        let invalid = |detail: &str| NnError::InvalidConfig {
            detail: detail.into(),
        };
        if self.input_dims.is_empty() {
            return Err(invalid("no input modalities"));
        }
        if self.input_dims.contains(&0) {
            return Err(invalid("zero-width modality"));
        }
        if self.fused_dim == 0 {
            return Err(invalid("fused_dim must be positive"));
        }
        if self.rnn_layers == 0 {
            return Err(invalid("rnn_layers must be at least 1"));
        }
        if self.head_hidden == 0 {
            return Err(invalid("head_hidden must be positive"));
        }
        Ok(())
    }

    fn directions(&self) -> usize {
        if self.bidirectional {
            2
        } else {
            1
        }
    }

    /// GRU input width of `layer` (fused width for layer 0, the previous
    /// layer's full output width above).
    fn layer_input_dim(&self, layer: usize) -> usize {
        if layer == 0 {
            self.fused_dim
        } else {
            self.fused_dim * self.directions()
        }
    }

    /// Width of the GRU stack output consumed by the head.
    fn gru_output_dim(&self) -> usize {
        self.fused_dim * self.directions()
    }
}

/// Offset and shape of one tensor inside the parameter arena.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Tensor {
    offset: usize,
    rows: usize,
    cols: usize,
}

impl Tensor {
    fn len(&self) -> usize {
        self.rows * self.cols
    }

    fn range(&self) -> core::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
struct GruTensors {
    w_r: Tensor,
    w_z: Tensor,
    w_n: Tensor,
    u_r: Tensor,
    u_z: Tensor,
    u_n: Tensor,
    b_r: Tensor,
    b_z: Tensor,
    b_n: Tensor,
}

/// Arena layout derived from a config; defines the documented parameter
/// order.
#[derive(Debug, Clone, PartialEq)]
struct Layout {
    fusion_w: Tensor,
    fusion_b: Tensor,
    /// Indexed `layer * directions + direction` (forward first).
    gru: Vec<GruTensors>,
    head1_w: Tensor,
    head1_b: Tensor,
    head2_w: Tensor,
    head2_b: Tensor,
    total: usize,
}

impl Layout {
    fn new(config: &ModelConfig) -> Layout {
        let mut offset = 0usize;
        let mut tensor = |rows: usize, cols: usize| {
            let t = Tensor { offset, rows, cols };
            offset += rows * cols;
            t
        };
        let n = config.input_width();
        let d = config.fused_dim;
        let fusion_w = tensor(n, d);
        let fusion_b = tensor(d, 1);
        let mut gru = Vec::new();
        for layer in 0..config.rnn_layers {
            let in_dim = config.layer_input_dim(layer);
            for _ in 0..config.directions() {
                gru.push(GruTensors {
                    w_r: tensor(in_dim, d),
                    w_z: tensor(in_dim, d),
                    w_n: tensor(in_dim, d),
                    u_r: tensor(d, d),
                    u_z: tensor(d, d),
                    u_n: tensor(d, d),
                    b_r: tensor(d, 1),
                    b_z: tensor(d, 1),
                    b_n: tensor(d, 1),
                });
            }
        }
        let head1_w = tensor(config.gru_output_dim(), config.head_hidden);
        let head1_b = tensor(config.head_hidden, 1);
        let head2_w = tensor(config.head_hidden, 1);
        let head2_b = tensor(1, 1);
        Layout {
            fusion_w,
            fusion_b,
            gru,
            head1_w,
            head1_b,
            head2_w,
            head2_b,
            total: offset,
        }
    }

    /// Weight tensors (everything with a fan-in), in arena order.
    fn weight_tensors(&self) -> Vec<Tensor> {
        let mut out = vec![self.fusion_w];
        for g in &self.gru {
            out.extend([g.w_r, g.w_z, g.w_n, g.u_r, g.u_z, g.u_n]);
        }
        out.push(self.head1_w);
        out.push(self.head2_w);
        out
    }
}

/// The regression model: fusion layer, GRU stack, two-layer head.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    config: ModelConfig,
    layout: Layout,
    params: Vec<f64>,
}

/// Parameter gradients in the model's arena order.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    flat: Vec<f64>,
}

impl Gradients {
    /// Wraps an accumulated flat gradient buffer (training-loop internal).
    pub(crate) fn from_flat(flat: Vec<f64>) -> Gradients {
        Gradients { flat }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.flat
    }

    pub fn len(&self) -> usize {
        self.flat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }
}

/// Draws every weight uniform in `(-1/sqrt(fan_in), +1/sqrt(fan_in))` from
/// a [`SplitMix64`] stream split off per weight tensor in arena order;
/// biases start at zero.
pub fn init_model(config: &ModelConfig) -> Result<Model, NnError> {
    config.validate()?;
    let layout = Layout::new(config);
    let mut params = vec![0.0; layout.total];
    let mut root = SplitMix64::new(config.seed);
    for t in layout.weight_tensors() {
        let mut stream = root.split();
        let bound = 1.0 / math::sqrt(t.rows as f64);
        for p in &mut params[t.range()] {
            *p = stream.uniform(-bound, bound);
        }
    }
    Ok(Model {
        config: config.clone(),
        layout,
        params,
    })
}

impl Model {
    /// Rebuilds a model from its config and flat parameters (checkpoint
    /// load path).
    pub fn from_flat_params(config: ModelConfig, params: Vec<f64>) -> Result<Model, NnError> {
        config.validate()?;
        let layout = Layout::new(&config);
        if params.len() != layout.total {
            return Err(NnError::ShapeMismatch {
                detail: alloc::format!(
                    "expected {} parameters, got {}",
                    layout.total,
                    params.len()
                ),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(NnError::InvalidConfig {
                detail: "non-finite parameter".into(),
            });
        }
        Ok(Model {
            config,
            layout,
            params,
        })
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Flat parameters in the documented arena order.
    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn t(&self, t: Tensor) -> &[f64] {
        &self.params[t.range()]
    }
}

/// Per-direction cached activations of one GRU layer.
#[derive(Debug, Clone)]
struct DirCache {
    reset: Mat,
    update: Mat,
    cand: Mat,
    /// Recurrent candidate pre-activation `U_n h_prev + b_n`.
    rec: Mat,
    hidden: Mat,
}

/// Intermediates retained by [`forward`] for [`backward`].
#[derive(Debug, Clone)]
pub struct Cache {
    config: ModelConfig,
    input: Mat,
    fused: Mat,
    /// Per layer, per direction caches (direction-minor).
    dirs: Vec<DirCache>,
    /// Full output sequence of each GRU layer.
    layer_out: Vec<Mat>,
    head_pre: Mat,
    head_act: Mat,
}

/// `y += x * W` for one row; `W` is `in x out`, row-major.
#[inline]
fn matvec_acc(x: &[f64], w: &[f64], y: &mut [f64]) {
    let out = y.len();
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let row = &w[i * out..(i + 1) * out];
        for (yj, wj) in y.iter_mut().zip(row) {
            *yj += xi * wj;
        }
    }
}

/// `dx += dy * W^T` for one row.
#[inline]
fn matvec_transpose_acc(dy: &[f64], w: &[f64], dx: &mut [f64]) {
    let out = dy.len();
    for (i, dxi) in dx.iter_mut().enumerate() {
        let row = &w[i * out..(i + 1) * out];
        let mut acc = 0.0;
        for (dyj, wj) in dy.iter().zip(row) {
            acc += dyj * wj;
        }
        *dxi += acc;
    }
}

/// `dW += x^T dy` for one row pair.
#[inline]
fn outer_acc(x: &[f64], dy: &[f64], dw: &mut [f64]) {
    let out = dy.len();
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        let row = &mut dw[i * out..(i + 1) * out];
        for (wj, dyj) in row.iter_mut().zip(dy) {
            *wj += xi * dyj;
        }
    }
}

fn run_gru_direction(
    params: &[f64],
    g: &GruTensors,
    input: &Mat,
    d: usize,
    reverse: bool,
) -> DirCache {
    let t_steps = input.rows();
    let mut cache = DirCache {
        reset: Mat::zeros(t_steps, d),
        update: Mat::zeros(t_steps, d),
        cand: Mat::zeros(t_steps, d),
        rec: Mat::zeros(t_steps, d),
        hidden: Mat::zeros(t_steps, d),
    };
    let w_r = &params[g.w_r.range()];
    let w_z = &params[g.w_z.range()];
    let w_n = &params[g.w_n.range()];
    let u_r = &params[g.u_r.range()];
    let u_z = &params[g.u_z.range()];
    let u_n = &params[g.u_n.range()];
    let b_r = &params[g.b_r.range()];
    let b_z = &params[g.b_z.range()];
    let b_n = &params[g.b_n.range()];

    let mut h_prev = vec![0.0; d];
    for s in 0..t_steps {
        let t = if reverse { t_steps - 1 - s } else { s };
        let x_t = input.row(t);

        let mut a_r = b_r.to_vec();
        matvec_acc(x_t, w_r, &mut a_r);
        matvec_acc(&h_prev, u_r, &mut a_r);
        let mut a_z = b_z.to_vec();
        matvec_acc(x_t, w_z, &mut a_z);
        matvec_acc(&h_prev, u_z, &mut a_z);
        let mut rec = b_n.to_vec();
        matvec_acc(&h_prev, u_n, &mut rec);
        let mut a_n = vec![0.0; d];
        matvec_acc(x_t, w_n, &mut a_n);

        let reset = cache.reset.row_mut(t);
        let update = cache.update.row_mut(t);
        let cand = cache.cand.row_mut(t);
        let hidden = cache.hidden.row_mut(t);
        for j in 0..d {
            reset[j] = math::sigmoid(a_r[j]);
            update[j] = math::sigmoid(a_z[j]);
            cand[j] = math::tanh(a_n[j] + reset[j] * rec[j]);
            hidden[j] = (1.0 - update[j]) * cand[j] + update[j] * h_prev[j];
        }
        cache.rec.row_mut(t).copy_from_slice(&rec);
        h_prev.copy_from_slice(hidden);
    }
    cache
}

/// Runs the model over a `T x N` input of concatenated modality features.
/// Returns one prediction per step and the cache needed by [`backward`].
pub fn forward(model: &Model, input: &Mat) -> Result<(Vec<f64>, Cache), NnError> {
    let cfg = &model.config;
    let n = cfg.input_width();
    if input.cols() != n {
        return Err(NnError::ShapeMismatch {
            detail: alloc::format!("input width {} != model width {n}", input.cols()),
        });
    }
    let t_steps = input.rows();
    if t_steps == 0 {
        return Err(NnError::ShapeMismatch {
            detail: "empty input".into(),
        });
    }
    let d = cfg.fused_dim;
    let dirs = cfg.directions();

    // Linear fusion, no activation.
    let mut fused = Mat::zeros(t_steps, d);
    let f_w = model.t(model.layout.fusion_w);
    let f_b = model.t(model.layout.fusion_b);
    for t in 0..t_steps {
        let row = fused.row_mut(t);
        row.copy_from_slice(f_b);
        matvec_acc(input.row(t), f_w, row);
    }

    // GRU stack.
    let mut dir_caches = Vec::with_capacity(cfg.rnn_layers * dirs);
    let mut layer_out = Vec::with_capacity(cfg.rnn_layers);
    for layer in 0..cfg.rnn_layers {
        let layer_input = if layer == 0 {
            &fused
        } else {
            &layer_out[layer - 1]
        };
        let mut out = Mat::zeros(t_steps, d * dirs);
        for dir in 0..dirs {
            let g = &model.layout.gru[layer * dirs + dir];
            let cache = run_gru_direction(&model.params, g, layer_input, d, dir == 1);
            for t in 0..t_steps {
                out.row_mut(t)[dir * d..(dir + 1) * d].copy_from_slice(cache.hidden.row(t));
            }
            dir_caches.push(cache);
        }
        layer_out.push(out);
    }

    // Head: dense -> ReLU -> dense, no output activation.
    let hh = cfg.head_hidden;
    let top = &layer_out[cfg.rnn_layers - 1];
    let h1_w = model.t(model.layout.head1_w);
    let h1_b = model.t(model.layout.head1_b);
    let h2_w = model.t(model.layout.head2_w);
    let h2_b = model.t(model.layout.head2_b);
    let mut head_pre = Mat::zeros(t_steps, hh);
    let mut head_act = Mat::zeros(t_steps, hh);
    let mut preds = vec![0.0; t_steps];
    for (t, pred) in preds.iter_mut().enumerate() {
        let pre = head_pre.row_mut(t);
        pre.copy_from_slice(h1_b);
        matvec_acc(top.row(t), h1_w, pre);
        let act = head_act.row_mut(t);
        for j in 0..hh {
            act[j] = pre[j].max(0.0);
        }
        let mut y = h2_b[0];
        for j in 0..hh {
            y += act[j] * h2_w[j];
        }
        *pred = y;
    }

    Ok((
        preds,
        Cache {
            config: cfg.clone(),
            input: input.clone(),
            fused,
            dirs: dir_caches,
            layer_out,
            head_pre,
            head_act,
        },
    ))
}

struct DirGradWork<'a> {
    g: &'a GruTensors,
    cache: &'a DirCache,
}

/// Exact backpropagation through the head, GRU stack, and fusion layer.
/// `d_loss_d_pred` holds the loss gradient with respect to each prediction.
pub fn backward(model: &Model, cache: &Cache, d_loss_d_pred: &[f64]) -> Result<Gradients, NnError> {
    if cache.config != model.config {
        return Err(NnError::StaleCache);
    }
    let t_steps = cache.input.rows();
    if d_loss_d_pred.len() != t_steps {
        return Err(NnError::ShapeMismatch {
            detail: alloc::format!(
                "gradient length {} != {t_steps} steps",
                d_loss_d_pred.len()
            ),
        });
    }
    let cfg = &model.config;
    let d = cfg.fused_dim;
    let dirs = cfg.directions();
    let hh = cfg.head_hidden;
    let mut grad = vec![0.0; model.params.len()];

    // -- Head.
    let top = &cache.layer_out[cfg.rnn_layers - 1];
    let h1_w = model.t(model.layout.head1_w);
    let h2_w = model.t(model.layout.head2_w);
    let mut d_top = Mat::zeros(t_steps, d * dirs);
    {
        let mut d_pre = vec![0.0; hh];
        for (t, &dy) in d_loss_d_pred.iter().enumerate() {
            let act = cache.head_act.row(t);
            let pre = cache.head_pre.row(t);
            // head2: y = act . w2 + b2
            {
                let g2_w = &mut grad[model.layout.head2_w.range()];
                for j in 0..hh {
                    g2_w[j] += act[j] * dy;
                }
            }
            grad[model.layout.head2_b.offset] += dy;
            for j in 0..hh {
                let d_act = dy * h2_w[j];
                d_pre[j] = if pre[j] > 0.0 { d_act } else { 0.0 };
            }
            outer_acc(top.row(t), &d_pre, &mut grad[model.layout.head1_w.range()]);
            for (gb, dp) in grad[model.layout.head1_b.range()].iter_mut().zip(&d_pre) {
                *gb += dp;
            }
            matvec_transpose_acc(&d_pre, h1_w, d_top.row_mut(t));
        }
    }

    // -- GRU stack, top layer down.
    let mut d_out = d_top;
    for layer in (0..cfg.rnn_layers).rev() {
        let layer_input = if layer == 0 {
            &cache.fused
        } else {
            &cache.layer_out[layer - 1]
        };
        let in_dim = cfg.layer_input_dim(layer);
        let mut d_in = Mat::zeros(t_steps, in_dim);
        for dir in 0..dirs {
            let work = DirGradWork {
                g: &model.layout.gru[layer * dirs + dir],
                cache: &cache.dirs[layer * dirs + dir],
            };
            backward_gru_direction(
                model,
                &work,
                layer_input,
                &d_out,
                dir,
                d,
                dir == 1,
                &mut grad,
                &mut d_in,
            );
        }
        d_out = d_in;
    }

    // -- Fusion layer.
    let f_w = model.t(model.layout.fusion_w);
    let _ = f_w; // input gradient is not produced; fusion consumes raw features
    for t in 0..t_steps {
        let d_fused = d_out.row(t);
        outer_acc(
            cache.input.row(t),
            d_fused,
            &mut grad[model.layout.fusion_w.range()],
        );
        for (gb, df) in grad[model.layout.fusion_b.range()]
            .iter_mut()
            .zip(d_fused)
        {
            *gb += df;
        }
    }

    Ok(Gradients { flat: grad })
}

#[allow(clippy::too_many_arguments)]
fn backward_gru_direction(
    model: &Model,
    work: &DirGradWork<'_>,
    layer_input: &Mat,
    d_out: &Mat,
    dir: usize,
    d: usize,
    reverse: bool,
    grad: &mut [f64],
    d_in: &mut Mat,
) {
    let t_steps = layer_input.rows();
    let g = work.g;
    let c = work.cache;
    let params = &model.params;
    let u_r = &params[g.u_r.range()];
    let u_z = &params[g.u_z.range()];
    let u_n = &params[g.u_n.range()];
    let w_r = &params[g.w_r.range()];
    let w_z = &params[g.w_z.range()];
    let w_n = &params[g.w_n.range()];

    let zeros = vec![0.0; d];
    let mut carry = vec![0.0; d];
    let mut da_r = vec![0.0; d];
    let mut da_z = vec![0.0; d];
    let mut da_n = vec![0.0; d];
    let mut d_rec = vec![0.0; d];

    // Walk processing order backwards; `idx` maps position -> time index.
    let idx = |s: usize| if reverse { t_steps - 1 - s } else { s };
    for s in (0..t_steps).rev() {
        let t = idx(s);
        let h_prev: &[f64] = if s > 0 { c.hidden.row(idx(s - 1)) } else { &zeros };
        let reset = c.reset.row(t);
        let update = c.update.row(t);
        let cand = c.cand.row(t);
        let rec = c.rec.row(t);

        for j in 0..d {
            let dh = d_out.row(t)[dir * d + j] + carry[j];
            let dz = dh * (h_prev[j] - cand[j]);
            let dn = dh * (1.0 - update[j]);
            let dan = dn * (1.0 - cand[j] * cand[j]);
            let drec = dan * reset[j];
            let dr = dan * rec[j];
            da_r[j] = dr * reset[j] * (1.0 - reset[j]);
            da_z[j] = dz * update[j] * (1.0 - update[j]);
            da_n[j] = dan;
            d_rec[j] = drec;
            // Direct path of h_t through h_{t-1}.
            carry[j] = dh * update[j];
        }

        let x_t = layer_input.row(t);
        outer_acc(x_t, &da_r, &mut grad[g.w_r.range()]);
        outer_acc(x_t, &da_z, &mut grad[g.w_z.range()]);
        outer_acc(x_t, &da_n, &mut grad[g.w_n.range()]);
        outer_acc(h_prev, &da_r, &mut grad[g.u_r.range()]);
        outer_acc(h_prev, &da_z, &mut grad[g.u_z.range()]);
        outer_acc(h_prev, &d_rec, &mut grad[g.u_n.range()]);
        for j in 0..d {
            grad[g.b_r.offset + j] += da_r[j];
            grad[g.b_z.offset + j] += da_z[j];
            grad[g.b_n.offset + j] += d_rec[j];
        }

        let dx = d_in.row_mut(t);
        matvec_transpose_acc(&da_r, w_r, dx);
        matvec_transpose_acc(&da_z, w_z, dx);
        matvec_transpose_acc(&da_n, w_n, dx);

        matvec_transpose_acc(&da_r, u_r, &mut carry);
        matvec_transpose_acc(&da_z, u_z, &mut carry);
        matvec_transpose_acc(&d_rec, u_n, &mut carry);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> ModelConfig {
        ModelConfig::new(vec![3, 2], 4).with_seed(11)
    }

    #[test]
    fn init_is_deterministic_and_seed_sensitive() {
        let cfg = tiny_config();
        let a = init_model(&cfg).unwrap();
        let b = init_model(&cfg).unwrap();
        assert_eq!(a.params(), b.params());
        let c = init_model(&cfg.clone().with_seed(12)).unwrap();
        assert_ne!(a.params(), c.params());
    }

    #[test]
    fn fusion_weight_shape_from_input_dims() {
        let cfg = ModelConfig::new(vec![1024, 768], 256);
        let model = init_model(&cfg).unwrap();
        assert_eq!(model.layout.fusion_w.rows, 1792);
        assert_eq!(model.layout.fusion_w.cols, 256);
    }

    #[test]
    fn biases_start_at_zero() {
        let model = init_model(&tiny_config()).unwrap();
        for t in [
            model.layout.fusion_b,
            model.layout.head1_b,
            model.layout.head2_b,
        ] {
            assert!(model.params()[t.range()].iter().all(|p| *p == 0.0));
        }
    }

    #[test]
    fn single_step_input_gives_finite_scalar() {
        let model = init_model(&tiny_config()).unwrap();
        let x = Mat::from_vec(1, 5, vec![0.1, -0.2, 0.3, 0.4, -0.5]);
        let (preds, _) = forward(&model, &x).unwrap();
        assert_eq!(preds.len(), 1);
        assert!(preds[0].is_finite());
    }

    #[test]
    fn forward_is_bitwise_deterministic() {
        let model = init_model(&tiny_config().with_bidirectional(true)).unwrap();
        let x = Mat::from_vec(6, 5, (0..30).map(|i| (i as f64 * 0.3).sin()).collect());
        let (a, _) = forward(&model, &x).unwrap();
        let (b, _) = forward(&model, &x).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_params_zero_input_give_zero_prediction() {
        let cfg = tiny_config();
        let zeros = vec![0.0; init_model(&cfg).unwrap().param_count()];
        let model = Model::from_flat_params(cfg, zeros).unwrap();
        let x = Mat::zeros(4, 5);
        let (preds, _) = forward(&model, &x).unwrap();
        assert_eq!(preds, vec![0.0; 4]);
    }

    #[test]
    fn bidirectional_doubles_head_input() {
        let cfg = tiny_config().with_bidirectional(true);
        let model = init_model(&cfg).unwrap();
        assert_eq!(model.layout.head1_w.rows, 8);
        let x = Mat::from_vec(3, 5, (0..15).map(|i| i as f64 * 0.1).collect());
        let (preds, _) = forward(&model, &x).unwrap();
        assert_eq!(preds.len(), 3);
    }

    #[test]
    fn hidden_activations_bounded_by_one() {
        let mut rng = SplitMix64::new(5);
        let cfg = ModelConfig::new(vec![4], 6)
            .with_layers(2)
            .with_bidirectional(true)
            .with_seed(3);
        let model = init_model(&cfg).unwrap();
        let x = Mat::from_vec(50, 4, (0..200).map(|_| rng.uniform(-3.0, 3.0)).collect());
        let (_, cache) = forward(&model, &x).unwrap();
        for dc in &cache.dirs {
            for v in dc.hidden.data() {
                assert!(v.abs() < 1.0, "hidden activation {v} out of (-1, 1)");
            }
        }
    }

    #[test]
    fn zero_loss_gradient_gives_zero_parameter_gradients() {
        let model = init_model(&tiny_config()).unwrap();
        let x = Mat::from_vec(4, 5, (0..20).map(|i| (i as f64).sin()).collect());
        let (_, cache) = forward(&model, &x).unwrap();
        let grads = backward(&model, &cache, &[0.0; 4]).unwrap();
        assert!(grads.as_slice().iter().all(|g| *g == 0.0));
    }

    #[test]
    fn backward_is_linear_in_loss_gradient() {
        let model = init_model(&tiny_config()).unwrap();
        let x = Mat::from_vec(4, 5, (0..20).map(|i| (i as f64).cos()).collect());
        let (_, cache) = forward(&model, &x).unwrap();
        let d1 = [0.3, -0.7, 0.2, 1.1];
        let d2: Vec<f64> = d1.iter().map(|v| v * 2.0).collect();
        let g1 = backward(&model, &cache, &d1).unwrap();
        let g2 = backward(&model, &cache, &d2).unwrap();
        for (a, b) in g1.as_slice().iter().zip(g2.as_slice()) {
            assert_eq!(*b, 2.0 * *a);
        }
    }

    #[test]
    fn stale_cache_rejected() {
        let model = init_model(&tiny_config()).unwrap();
        let other = init_model(&ModelConfig::new(vec![5], 4)).unwrap();
        let x = Mat::zeros(2, 5);
        let (_, cache) = forward(&model, &x).unwrap();
        assert_eq!(
            backward(&other, &cache, &[0.0, 0.0]).unwrap_err(),
            NnError::StaleCache
        );
    }

    /// Finite-difference spot check on a small model; the exhaustive sweep
    /// across layer/direction configurations lives in the acceptance suite.
    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = SplitMix64::new(21);
        for (layers, bi) in [(1usize, false), (1, true), (2, false), (2, true)] {
            let cfg = ModelConfig::new(vec![2, 1], 3)
                .with_layers(layers)
                .with_bidirectional(bi)
                .with_seed(40 + layers as u64);
            let model = init_model(&cfg).unwrap();
            let t_steps = 5;
            let x = Mat::from_vec(
                t_steps,
                3,
                (0..t_steps * 3).map(|_| rng.uniform(-1.0, 1.0)).collect(),
            );
            // Scalar objective: weighted sum of predictions.
            let weights: Vec<f64> = (0..t_steps).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let objective = |m: &Model| {
                let (preds, _) = forward(m, &x).unwrap();
                preds.iter().zip(&weights).map(|(p, w)| p * w).sum::<f64>()
            };
            let (_, cache) = forward(&model, &x).unwrap();
            let grads = backward(&model, &cache, &weights).unwrap();
            let h = 1e-6;
            for i in 0..model.param_count() {
                let mut plus = model.clone();
                plus.params_mut()[i] += h;
                let mut minus = model.clone();
                minus.params_mut()[i] -= h;
                let fd = (objective(&plus) - objective(&minus)) / (2.0 * h);
                let a = grads.as_slice()[i];
                let denom = a.abs().max(fd.abs()).max(1e-4);
                assert!(
                    ((a - fd) / denom).abs() < 1e-5,
                    "layers={layers} bi={bi} param {i}: analytic {a} vs fd {fd}"
                );
            }
        }
    }
}
