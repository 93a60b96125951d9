//! GraphSAGE-style regressor with hand-written reverse mode.
//!
//! Parameter layout (one flat vector, row-major matrices), for each layer
//! `l` with input width `d_in` (3, then `hidden`) and aggregate width
//! `d_agg` (`d_in`, or `hidden` for the LSTM aggregator):
//!
//! ```text
//! [lstm only]  Wx  4h x d_in   gate rows in order i, f, g, o
//!              Wh  4h x h
//!              b   4h
//! combiner     W   h x (d_in + d_agg)
//!              b   h
//! ```
//!
//! followed by the head `w` (h) and `b` (1). A layer computes
//! `h_v' = relu(W [h_v ; agg(h_u : u ~ v)] + b)`; the head maps the last
//! hidden state to `y_v`, and the prediction is `shift + scale * y_v`.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::features::INPUT_DIM;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::rng::{self, stream, Rng};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregator {
    #[default]
    Mean,
    Sum,
    Max,
    Lstm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GnnConfig {
    pub layers: usize,
    pub hidden: usize,
    pub aggregator: Aggregator,
}

impl Default for GnnConfig {
    fn default() -> Self {
        GnnConfig {
            layers: 3,
            hidden: 32,
            aggregator: Aggregator::Mean,
        }
    }
}

impl GnnConfig {
    /// Depth `diam + 1`, enough for every node to see the whole graph.
    pub fn with_diameter_depth(mut self, diameter: usize) -> Self {
        self.layers = diameter + 1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.hidden == 0 {
            return Err(Error::InvalidConfig(
                "layer count and hidden width must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct LayerShape {
    pub d_in: usize,
    pub d_agg: usize,
    pub h: usize,
    /// Offsets of Wx, Wh, b for the LSTM aggregator.
    pub lstm: Option<(usize, usize, usize)>,
    pub w: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Layout {
    pub layers: Vec<LayerShape>,
    pub head_w: usize,
    pub head_b: usize,
    pub len: usize,
}

impl Layout {
    pub fn of(cfg: &GnnConfig) -> Self {
        let h = cfg.hidden;
        let mut at = 0;
        let mut take = |k: usize| {
            let o = at;
            at += k;
            o
        };
        let mut layers = Vec::with_capacity(cfg.layers);
        for l in 0..cfg.layers {
            let d_in = if l == 0 { INPUT_DIM } else { h };
            let (lstm, d_agg) = if cfg.aggregator == Aggregator::Lstm {
                let wx = take(4 * h * d_in);
                let wh = take(4 * h * h);
                let b = take(4 * h);
                (Some((wx, wh, b)), h)
            } else {
                (None, d_in)
            };
            let w = take(h * (d_in + d_agg));
            let b = take(h);
            layers.push(LayerShape {
                d_in,
                d_agg,
                h,
                lstm,
                w,
                b,
            });
        }
        let head_w = take(h);
        let head_b = take(1);
        Layout {
            layers,
            head_w,
            head_b,
            len: at,
        }
    }

    /// `(offset, rows, cols)` of every weight matrix, for initialization.
    fn matrices(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for s in &self.layers {
            if let Some((wx, wh, _)) = s.lstm {
                out.push((wx, 4 * s.h, s.d_in));
                out.push((wh, 4 * s.h, s.h));
            }
            out.push((s.w, s.h, s.d_in + s.d_agg));
        }
        out.push((self.head_w, 1, self.layers.last().map_or(0, |s| s.h)));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct GnnModel<S> {
    pub config: GnnConfig,
    pub params: Vec<S>,
    /// Predictions are `target_shift + target_scale * y`.
    pub target_shift: S,
    pub target_scale: S,
    /// Seed of the uniform `±sqrt(6 / (fan_in + fan_out))` initialization.
    pub init_seed: u64,
}

impl<S: Scalar> GnnModel<S> {
    pub fn new(config: GnnConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = Layout::of(&config);
        let mut params = vec![S::zero(); layout.len];
        let mut r = rng::rng(seed, &[stream::INIT]);
        for (off, rows, cols) in layout.matrices() {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            for p in &mut params[off..off + rows * cols] {
                *p = S::of(r.gen_range(-limit..limit));
            }
        }
        Ok(GnnModel {
            config,
            params,
            target_shift: S::zero(),
            target_scale: S::one(),
            init_seed: seed,
        })
    }

    pub fn zeros(config: GnnConfig) -> Result<Self> {
        config.validate()?;
        Ok(GnnModel {
            config,
            params: vec![S::zero(); Layout::of(&config).len],
            target_shift: S::zero(),
            target_scale: S::one(),
            init_seed: 0,
        })
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        let want = Layout::of(&self.config).len;
        if self.params.len() != want {
            return Err(Error::DimensionMismatch(format!(
                "model has {} parameters, its config needs {want}",
                self.params.len()
            )));
        }
        if let Some(i) = self.params.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite {
                layer: 0,
                what: format!("parameter {i}"),
            });
        }
        if !(self.target_scale.is_finite() && self.target_scale > S::zero()) {
            return Err(Error::NonFinite {
                layer: 0,
                what: "target scale".into(),
            });
        }
        Ok(())
    }

    /// Sets the target shift/scale to the mean and standard deviation of
    /// `labels` (scale 1 when they are constant).
    pub fn fit_target(&mut self, labels: &[f64]) {
        if labels.is_empty() {
            return;
        }
        let n = labels.len() as f64;
        let mean = labels.iter().sum::<f64>() / n;
        let var = labels.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        self.target_shift = S::of(mean);
        self.target_scale = S::of(if sd > 1e-12 { sd } else { 1.0 });
    }

    /// Predictions in label space, one per node.
    pub fn predict(&self, g: &Graph, features: &[S]) -> Result<Vec<S>> {
        let order = neighbor_order(g, None);
        let (y, _) = self.forward(g, features, &order)?;
        Ok(y.into_iter()
            .map(|y| self.target_shift + self.target_scale * y)
            .collect())
    }

    /// Raw network outputs `y` and the cache for [`Self::backward`].
    pub(crate) fn forward(
        &self,
        g: &Graph,
        features: &[S],
        order: &[Vec<NodeId>],
    ) -> Result<(Vec<S>, Vec<LayerCache<S>>)> {
        let n = g.node_count();
        if features.len() != n * INPUT_DIM {
            return Err(Error::DimensionMismatch(format!(
                "{} feature values for {n} nodes of width {INPUT_DIM}",
                features.len()
            )));
        }
        if self.params.len() != Layout::of(&self.config).len {
            return Err(Error::DimensionMismatch("parameter vector length".into()));
        }
        let layout = Layout::of(&self.config);
        let p = &self.params;
        let mut h_cur = features.to_vec();
        let mut caches = Vec::with_capacity(layout.layers.len());
        for (l, s) in layout.layers.iter().enumerate() {
            let mut cache = LayerCache {
                input: h_cur,
                agg: vec![S::zero(); n * s.d_agg],
                z: vec![S::zero(); n * s.h],
                max_from: Vec::new(),
                lstm: Vec::new(),
            };
            self.aggregate(g, s, order, &mut cache);
            let cols = s.d_in + s.d_agg;
            let w = &p[s.w..s.w + s.h * cols];
            let b = &p[s.b..s.b + s.h];
            let mut out = vec![S::zero(); n * s.h];
            for v in 0..n {
                let x = &cache.input[v * s.d_in..(v + 1) * s.d_in];
                let a = &cache.agg[v * s.d_agg..(v + 1) * s.d_agg];
                for r in 0..s.h {
                    let row = &w[r * cols..(r + 1) * cols];
                    let mut acc = b[r];
                    for c in 0..s.d_in {
                        acc += row[c] * x[c];
                    }
                    for c in 0..s.d_agg {
                        acc += row[s.d_in + c] * a[c];
                    }
                    cache.z[v * s.h + r] = acc;
                    out[v * s.h + r] = acc.max(S::zero());
                }
            }
            if let Some(i) = out.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    layer: l,
                    what: format!("hidden state of node {}", i / s.h),
                });
            }
            caches.push(cache);
            h_cur = out;
        }
        let h = self.config.hidden;
        let w = &p[layout.head_w..layout.head_w + h];
        let b = p[layout.head_b];
        let y: Vec<S> = (0..n)
            .map(|v| {
                let mut acc = b;
                for k in 0..h {
                    acc += w[k] * h_cur[v * h + k];
                }
                acc
            })
            .collect();
        caches.push(LayerCache {
            input: h_cur,
            agg: Vec::new(),
            z: Vec::new(),
            max_from: Vec::new(),
            lstm: Vec::new(),
        });
        Ok((y, caches))
    }

    fn aggregate(&self, g: &Graph, s: &LayerShape, order: &[Vec<NodeId>], cache: &mut LayerCache<S>) {
        let n = g.node_count();
        let d = s.d_in;
        let x = &cache.input;
        match self.config.aggregator {
            Aggregator::Mean | Aggregator::Sum => {
                for v in 0..n {
                    let nb = g.neighbors(NodeId::new(v));
                    for &u in nb {
                        for c in 0..d {
                            cache.agg[v * d + c] += x[u.index() * d + c];
                        }
                    }
                    if self.config.aggregator == Aggregator::Mean && !nb.is_empty() {
                        let k = S::of_usize(nb.len());
                        for c in 0..d {
                            cache.agg[v * d + c] /= k;
                        }
                    }
                }
            }
            Aggregator::Max => {
                cache.max_from = vec![u32::MAX; n * d];
                for v in 0..n {
                    for &u in g.neighbors(NodeId::new(v)) {
                        for c in 0..d {
                            let val = x[u.index() * d + c];
                            let slot = v * d + c;
                            if cache.max_from[slot] == u32::MAX || val > cache.agg[slot] {
                                cache.agg[slot] = val;
                                cache.max_from[slot] = u.0;
                            }
                        }
                    }
                }
            }
            Aggregator::Lstm => {
                let (wx, wh, b) = s.lstm.expect("lstm layout");
                let h = s.h;
                let p = &self.params;
                cache.lstm = Vec::with_capacity(n);
                for v in 0..n {
                    let seq = &order[v];
                    let t_len = seq.len();
                    let mut tr = LstmTrace {
                        gates: vec![S::zero(); t_len * 4 * h],
                        c: vec![S::zero(); (t_len + 1) * h],
                        h: vec![S::zero(); (t_len + 1) * h],
                    };
                    for (t, &u) in seq.iter().enumerate() {
                        let xt = &x[u.index() * d..(u.index() + 1) * d];
                        for r in 0..4 * h {
                            let mut a = p[b + r];
                            for c in 0..d {
                                a += p[wx + r * d + c] * xt[c];
                            }
                            for c in 0..h {
                                a += p[wh + r * h + c] * tr.h[t * h + c];
                            }
                            tr.gates[t * 4 * h + r] = if (2 * h..3 * h).contains(&r) {
                                a.tanh()
                            } else {
                                sigmoid(a)
                            };
                        }
                        for k in 0..h {
                            let gt = &tr.gates[t * 4 * h..(t + 1) * 4 * h];
                            let (i, f, gg, o) = (gt[k], gt[h + k], gt[2 * h + k], gt[3 * h + k]);
                            let c = f * tr.c[t * h + k] + i * gg;
                            tr.c[(t + 1) * h + k] = c;
                            tr.h[(t + 1) * h + k] = o * c.tanh();
                        }
                    }
                    cache.agg[v * h..(v + 1) * h].copy_from_slice(&tr.h[t_len * h..]);
                    cache.lstm.push(tr);
                }
            }
        }
    }

    /// Gradient of `Σ_v dy[v] * y_v` with respect to every parameter.
    pub(crate) fn backward(
        &self,
        g: &Graph,
        order: &[Vec<NodeId>],
        caches: &[LayerCache<S>],
        dy: &[S],
    ) -> Result<Vec<S>> {
        let layout = Layout::of(&self.config);
        let p = &self.params;
        let n = g.node_count();
        let h = self.config.hidden;
        let mut grad = vec![S::zero(); p.len()];
        let last = &caches[layout.layers.len()].input;
        let mut dh = vec![S::zero(); n * h];
        for v in 0..n {
            grad[layout.head_b] += dy[v];
            for k in 0..h {
                grad[layout.head_w + k] += dy[v] * last[v * h + k];
                dh[v * h + k] = dy[v] * p[layout.head_w + k];
            }
        }
        for (l, s) in layout.layers.iter().enumerate().rev() {
            let cache = &caches[l];
            let cols = s.d_in + s.d_agg;
            let mut dx = vec![S::zero(); n * s.d_in];
            let mut da = vec![S::zero(); n * s.d_agg];
            for v in 0..n {
                let x = &cache.input[v * s.d_in..(v + 1) * s.d_in];
                let a = &cache.agg[v * s.d_agg..(v + 1) * s.d_agg];
                for r in 0..s.h {
                    if cache.z[v * s.h + r] <= S::zero() {
                        continue;
                    }
                    let dz = dh[v * s.h + r];
                    grad[s.b + r] += dz;
                    let row = s.w + r * cols;
                    for c in 0..s.d_in {
                        grad[row + c] += dz * x[c];
                        dx[v * s.d_in + c] += dz * p[row + c];
                    }
                    for c in 0..s.d_agg {
                        grad[row + s.d_in + c] += dz * a[c];
                        da[v * s.d_agg + c] += dz * p[row + s.d_in + c];
                    }
                }
            }
            self.aggregate_backward(g, s, order, cache, &da, &mut dx, &mut grad);
            if let Some(i) = dx.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    layer: l,
                    what: format!("gradient at node {}", i / s.d_in),
                });
            }
            dh = dx;
        }
        Ok(grad)
    }

    #[allow(clippy::too_many_arguments)]
    fn aggregate_backward(
        &self,
        g: &Graph,
        s: &LayerShape,
        order: &[Vec<NodeId>],
        cache: &LayerCache<S>,
        da: &[S],
        dx: &mut [S],
        grad: &mut [S],
    ) {
        let n = g.node_count();
        let d = s.d_in;
        match self.config.aggregator {
            Aggregator::Mean | Aggregator::Sum => {
                for v in 0..n {
                    let nb = g.neighbors(NodeId::new(v));
                    if nb.is_empty() {
                        continue;
                    }
                    let k = if self.config.aggregator == Aggregator::Mean {
                        S::of_usize(nb.len())
                    } else {
                        S::one()
                    };
                    for &u in nb {
                        for c in 0..d {
                            dx[u.index() * d + c] += da[v * d + c] / k;
                        }
                    }
                }
            }
            Aggregator::Max => {
                for slot in 0..n * d {
                    let from = cache.max_from[slot];
                    if from != u32::MAX {
                        dx[from as usize * d + slot % d] += da[slot];
                    }
                }
            }
            Aggregator::Lstm => {
                let (wx, wh, b) = s.lstm.expect("lstm layout");
                let h = s.h;
                let p = &self.params;
                let x = &cache.input;
                let one = S::one();
                for v in 0..n {
                    let seq = &order[v];
                    let tr = &cache.lstm[v];
                    let mut dh_t: Vec<S> = da[v * h..(v + 1) * h].to_vec();
                    let mut dc_t = vec![S::zero(); h];
                    let mut dgate = vec![S::zero(); 4 * h];
                    for t in (0..seq.len()).rev() {
                        let gt = &tr.gates[t * 4 * h..(t + 1) * 4 * h];
                        for k in 0..h {
                            let (i, f, gg, o) = (gt[k], gt[h + k], gt[2 * h + k], gt[3 * h + k]);
                            let c = tr.c[(t + 1) * h + k];
                            let tc = c.tanh();
                            let d_o = dh_t[k] * tc;
                            let dc = dc_t[k] + dh_t[k] * o * (one - tc * tc);
                            dgate[k] = dc * gg * i * (one - i);
                            dgate[h + k] = dc * tr.c[t * h + k] * f * (one - f);
                            dgate[2 * h + k] = dc * i * (one - gg * gg);
                            dgate[3 * h + k] = d_o * o * (one - o);
                            dc_t[k] = dc * f;
                        }
                        let u = seq[t].index();
                        let xt = &x[u * d..(u + 1) * d];
                        let hprev = &tr.h[t * h..(t + 1) * h];
                        let mut dh_prev = vec![S::zero(); h];
                        for r in 0..4 * h {
                            let dg = dgate[r];
                            grad[b + r] += dg;
                            for c in 0..d {
                                grad[wx + r * d + c] += dg * xt[c];
                                dx[u * d + c] += dg * p[wx + r * d + c];
                            }
                            for c in 0..h {
                                grad[wh + r * h + c] += dg * hprev[c];
                                dh_prev[c] += dg * p[wh + r * h + c];
                            }
                        }
                        dh_t = dh_prev;
                    }
                }
            }
        }
    }

    /// `Σ_v (label_v - prediction_v)^2` and its gradient.
    pub fn loss_and_gradient(
        &self,
        g: &Graph,
        features: &[S],
        labels: &[S],
        order: &[Vec<NodeId>],
    ) -> Result<(S, Vec<S>)> {
        self.affine_loss_and_gradient(g, features, labels, order, self.target_shift, self.target_scale)
    }

    /// Same loss with predictions `shift + scale * y`.
    pub(crate) fn affine_loss_and_gradient(
        &self,
        g: &Graph,
        features: &[S],
        labels: &[S],
        order: &[Vec<NodeId>],
        shift: S,
        scale: S,
    ) -> Result<(S, Vec<S>)> {
        if labels.len() != g.node_count() {
            return Err(Error::LengthMismatch {
                left: labels.len(),
                right: g.node_count(),
            });
        }
        let (y, caches) = self.forward(g, features, order)?;
        let mut loss = S::zero();
        let mut dy = Vec::with_capacity(y.len());
        for (yv, &label) in y.iter().zip(labels) {
            let diff = shift + scale * *yv - label;
            loss += diff * diff;
            dy.push(S::of(2.0) * diff * scale);
        }
        let grad = self.backward(g, order, &caches, &dy)?;
        Ok((loss, grad))
    }
}

fn sigmoid<S: Scalar>(x: S) -> S {
    S::one() / (S::one() + (-x).exp())
}

#[derive(Debug, Clone)]
pub(crate) struct LstmTrace<S> {
    /// Post-activation gates per step, `4h` each.
    gates: Vec<S>,
    /// Cell and hidden states, step 0 being the zero state.
    c: Vec<S>,
    h: Vec<S>,
}

#[derive(Debug, Clone)]
pub(crate) struct LayerCache<S> {
    input: Vec<S>,
    agg: Vec<S>,
    z: Vec<S>,
    max_from: Vec<u32>,
    lstm: Vec<LstmTrace<S>>,
}

/// LSTM input order per node: neighbors by descending degree, then
/// ascending id; shuffled per node when an RNG is supplied.
pub fn neighbor_order(g: &Graph, rng: Option<&mut Rng>) -> Vec<Vec<NodeId>> {
    let mut out: Vec<Vec<NodeId>> = g
        .nodes()
        .map(|v| {
            let mut nb = g.neighbors(v).to_vec();
            nb.sort_by_key(|&u| (std::cmp::Reverse(g.degree(u)), u));
            nb
        })
        .collect();
    if let Some(r) = rng {
        for nb in &mut out {
            nb.shuffle(r);
        }
    }
    out
}

/// Mean squared-error sum between predictions and labels.
pub fn loss<S: Scalar>(predictions: &[S], labels: &[S]) -> Result<S> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: labels.len(),
        });
    }
    Ok(predictions
        .iter()
        .zip(labels)
        .map(|(&p, &l)| (l - p) * (l - p))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (Graph, Vec<f64>) {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 3), (1, 3), (3, 4)]).unwrap();
        let f = vec![
            0.10, 0.50, 0.66, //
            0.30, 1.00, 1.00, //
            0.20, 0.70, 0.33, //
            0.25, 0.80, 0.66, //
            0.15, 0.40, 0.33,
        ];
        (g, f)
    }

    #[test]
    fn zero_parameters_predict_head_bias() {
        let (g, f) = fixture();
        let mut m = GnnModel::<f64>::zeros(GnnConfig::default()).unwrap();
        let hb = Layout::of(&m.config).head_b;
        m.params[hb] = 0.75;
        assert!(m.predict(&g, &f).unwrap().iter().all(|&p| p == 0.75));
    }

    #[test]
    fn transitive_graph_gives_identical_predictions() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]).unwrap();
        let f: Vec<f64> = (0..5).flat_map(|_| [0.2, 1.0, 1.0]).collect();
        for agg in [Aggregator::Mean, Aggregator::Sum, Aggregator::Max, Aggregator::Lstm] {
            let cfg = GnnConfig { layers: 2, hidden: 4, aggregator: agg };
            let m = GnnModel::<f64>::new(cfg, 3).unwrap();
            let p = m.predict(&g, &f).unwrap();
            assert!(p.iter().all(|&x| (x - p[0]).abs() < 1e-12), "{agg:?}");
        }
    }

    #[test]
    fn hand_evaluated_single_layer() {
        // one layer, width 1, mean aggregator on the path 0-1-2
        let g = Graph::from_edges(&[(0, 1), (1, 2)]).unwrap();
        let f = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let cfg = GnnConfig { layers: 1, hidden: 1, aggregator: Aggregator::Mean };
        let mut m = GnnModel::<f64>::zeros(cfg).unwrap();
        // W = [1, 2, 3 | 1, 1, -1], b = 0.5, head w = 2, b = -1
        m.params = vec![1.0, 2.0, 3.0, 1.0, 1.0, -1.0, 0.5, 2.0, -1.0];
        // node 0: x=(1,0,0), agg=(0,1,0): z = 1 + 1 + 0.5 = 2.5 -> y = 4
        // node 1: x=(0,1,0), agg=(.5,0,.5): z = 2 + .5 - .5 + .5 = 2.5 -> y = 4
        // node 2: x=(0,0,1), agg=(0,1,0): z = 3 + 1 + .5 = 4.5 -> y = 8
        assert_eq!(m.predict(&g, &f).unwrap(), vec![4.0, 4.0, 8.0]);
        m.params[6] = -10.0;
        assert_eq!(m.predict(&g, &f).unwrap(), vec![-1.0, -1.0, -1.0]);
    }

    #[test]
    fn loss_values() {
        assert_eq!(loss(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(loss(&[3.0], &[1.0]).unwrap(), 4.0);
        assert!(loss(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let (g, f) = fixture();
        let labels = vec![-1.0, -0.4, 0.3, 0.2, -0.7];
        for agg in [Aggregator::Mean, Aggregator::Sum, Aggregator::Max, Aggregator::Lstm] {
            let cfg = GnnConfig { layers: 2, hidden: 3, aggregator: agg };
            let mut m = GnnModel::<f64>::new(cfg, 11).unwrap();
            m.target_scale = 1.3;
            m.target_shift = -0.2;
            let order = neighbor_order(&g, None);
            let (_, grad) = m.loss_and_gradient(&g, &f, &labels, &order).unwrap();
            let eps = 1e-5;
            for i in 0..m.params.len() {
                let mut a = m.clone();
                a.params[i] += eps;
                let mut b = m.clone();
                b.params[i] -= eps;
                let la = a.loss_and_gradient(&g, &f, &labels, &order).unwrap().0;
                let lb = b.loss_and_gradient(&g, &f, &labels, &order).unwrap().0;
                let fd = (la - lb) / (2.0 * eps);
                let err = (fd - grad[i]).abs() / fd.abs().max(grad[i].abs()).max(1e-6);
                assert!(err < 1e-4 || (fd - grad[i]).abs() < 1e-9, "{agg:?} param {i}: {fd} vs {}", grad[i]);
            }
        }
    }

    #[test]
    fn dimension_mismatch() {
        let (g, _) = fixture();
        let m = GnnModel::<f64>::new(GnnConfig::default(), 1).unwrap();
        assert!(matches!(m.predict(&g, &[0.0; 4]), Err(Error::DimensionMismatch(_))));
    }
}
