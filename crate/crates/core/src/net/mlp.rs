//! Multilayer perceptron with reverse-mode parameter gradients and analytic
//! input-Jacobians. Hidden layers share one activation; the final layer is
//! always linear.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::real::Real;
use crate::rng::Xoshiro256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Softplus,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply<T: Real>(self, z: T) -> T {
        match self {
            Activation::Tanh => z.tanh(),
            // ln(1 + e^z), written to avoid overflow for large |z|.
            Activation::Softplus => z.max(T::zero()) + (-z.abs()).exp().ln_1p(),
            Activation::Identity => z,
        }
    }

    #[inline]
    pub fn d1<T: Real>(self, z: T) -> T {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                T::one() - t * t
            }
            Activation::Softplus => T::one() / (T::one() + (-z).exp()),
            Activation::Identity => T::one(),
        }
    }

    #[inline]
    pub fn d2<T: Real>(self, z: T) -> T {
        match self {
            Activation::Tanh => {
                let t = z.tanh();
                T::of(-2.0) * t * (T::one() - t * t)
            }
            Activation::Softplus => {
                let s = T::one() / (T::one() + (-z).exp());
                s * (T::one() - s)
            }
            Activation::Identity => T::zero(),
        }
    }
}

/// Network shape: `layer_sizes` runs input, hidden..., output. Hidden layers
/// use `activation`; the output layer is linear.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpSpec {
    pub layer_sizes: Vec<usize>,
    pub activation: Activation,
}

impl MlpSpec {
    pub fn new(layer_sizes: Vec<usize>, activation: Activation) -> Self {
        assert!(layer_sizes.len() >= 2, "need at least input and output sizes");
        assert!(layer_sizes.iter().all(|&s| s >= 1), "zero-width layer");
        MlpSpec { layer_sizes, activation }
    }

    #[inline]
    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    #[inline]
    pub fn output_dim(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    /// Number of weight layers.
    #[inline]
    pub fn depth(&self) -> usize {
        self.layer_sizes.len() - 1
    }

    /// Activation applied after weight layer `k` (linear on the last).
    #[inline]
    fn layer_activation(&self, k: usize) -> Activation {
        if k + 1 == self.depth() {
            Activation::Identity
        } else {
            self.activation
        }
    }

    /// Total number of scalar parameters.
    pub fn flat_len(&self) -> usize {
        (0..self.depth())
            .map(|k| {
                let (n_in, n_out) = (self.layer_sizes[k], self.layer_sizes[k + 1]);
                n_out * n_in + n_out
            })
            .sum()
    }
}

/// Weight/bias parameters, one dense layer per spec weight layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams<T> {
    pub weights: Vec<Matrix<T>>,
    pub biases: Vec<Vec<T>>,
}

impl<T: Real> MlpParams<T> {
    pub fn zeros(spec: &MlpSpec) -> Self {
        let mut weights = Vec::with_capacity(spec.depth());
        let mut biases = Vec::with_capacity(spec.depth());
        for k in 0..spec.depth() {
            weights.push(Matrix::zeros(spec.layer_sizes[k + 1], spec.layer_sizes[k]));
            biases.push(vec![T::zero(); spec.layer_sizes[k + 1]]);
        }
        MlpParams { weights, biases }
    }

    /// Glorot-uniform weights (+-sqrt(6/(fan_in+fan_out))), zero biases.
    /// Draws are made in f64 before conversion so the stream is identical
    /// across scalar types.
    pub fn init(spec: &MlpSpec, rng: &mut Xoshiro256) -> Self {
        let mut p = Self::zeros(spec);
        for k in 0..spec.depth() {
            let (n_in, n_out) = (spec.layer_sizes[k], spec.layer_sizes[k + 1]);
            let bound = (6.0 / (n_in + n_out) as f64).sqrt();
            for v in p.weights[k].data_mut() {
                *v = T::of(rng.uniform_in(-bound, bound));
            }
        }
        p
    }

    pub fn matches(&self, spec: &MlpSpec) -> bool {
        self.weights.len() == spec.depth()
            && (0..spec.depth()).all(|k| {
                self.weights[k].rows() == spec.layer_sizes[k + 1]
                    && self.weights[k].cols() == spec.layer_sizes[k]
                    && self.biases[k].len() == spec.layer_sizes[k + 1]
            })
    }

    /// Flat view: per layer, weights row-major then bias.
    pub fn to_flat(&self) -> Vec<T> {
        let mut flat = Vec::new();
        for (w, b) in self.weights.iter().zip(&self.biases) {
            flat.extend_from_slice(w.data());
            flat.extend_from_slice(b);
        }
        flat
    }

    pub fn from_flat(spec: &MlpSpec, flat: &[T]) -> Result<Self> {
        if flat.len() != spec.flat_len() {
            return Err(Error::DimMismatch {
                op: "MlpParams::from_flat",
                detail: format!("expected {} values, got {}", spec.flat_len(), flat.len()),
            });
        }
        let mut p = Self::zeros(spec);
        let mut off = 0;
        for k in 0..spec.depth() {
            let wlen = p.weights[k].rows() * p.weights[k].cols();
            p.weights[k]
                .data_mut()
                .copy_from_slice(&flat[off..off + wlen]);
            off += wlen;
            let blen = p.biases[k].len();
            p.biases[k].copy_from_slice(&flat[off..off + blen]);
            off += blen;
        }
        Ok(p)
    }
}

/// Per-layer pre-activations and activations retained for backprop.
#[derive(Debug, Clone)]
pub struct ForwardTape<T> {
    pub input: Vec<T>,
    /// pre[k]: W_k a_{k-1} + b_k
    pub pre: Vec<Vec<T>>,
    /// post[k]: activation(pre[k]); post.last() is the network output.
    pub post: Vec<Vec<T>>,
}

impl<T> ForwardTape<T> {
    pub fn layers(&self) -> usize {
        self.pre.len()
    }
}

pub fn forward<T: Real>(
    spec: &MlpSpec,
    params: &MlpParams<T>,
    x: &[T],
) -> Result<(Vec<T>, ForwardTape<T>)> {
    if x.len() != spec.input_dim() {
        return Err(Error::DimMismatch {
            op: "mlp forward",
            detail: format!("input {} vs spec {}", x.len(), spec.input_dim()),
        });
    }
    debug_assert!(params.matches(spec), "params do not match spec");
    let depth = spec.depth();
    let mut pre = Vec::with_capacity(depth);
    let mut post = Vec::with_capacity(depth);
    let mut a: Vec<T> = x.to_vec();
    for k in 0..depth {
        let mut z = params.weights[k].mul_vec(&a)?;
        for (zi, bi) in z.iter_mut().zip(&params.biases[k]) {
            *zi += *bi;
        }
        let act = spec.layer_activation(k);
        let out: Vec<T> = z.iter().map(|&v| act.apply(v)).collect();
        pre.push(z);
        a = out.clone();
        post.push(out);
    }
    let y = post.last().unwrap().clone();
    Ok((y, ForwardTape { input: x.to_vec(), pre, post }))
}

/// Reverse-mode gradients of a scalar loss given dLoss/dy.
///
/// Returns (dLoss/dparams as a flat vector, dLoss/dx).
pub fn backward<T: Real>(
    spec: &MlpSpec,
    params: &MlpParams<T>,
    tape: &ForwardTape<T>,
    dl_dy: &[T],
) -> Result<(Vec<T>, Vec<T>)> {
    let depth = spec.depth();
    if tape.layers() != depth {
        return Err(Error::DimMismatch {
            op: "mlp backward",
            detail: format!("tape layers {} vs spec depth {}", tape.layers(), depth),
        });
    }
    if dl_dy.len() != spec.output_dim() {
        return Err(Error::DimMismatch {
            op: "mlp backward",
            detail: format!("dl_dy {} vs output {}", dl_dy.len(), spec.output_dim()),
        });
    }

    let mut grads = MlpParams::<T>::zeros(spec);
    // delta starts as dL/dpre on the last (linear) layer.
    let mut delta: Vec<T> = dl_dy.to_vec();
    for k in (0..depth).rev() {
        let a_prev: &[T] = if k == 0 { &tape.input } else { &tape.post[k - 1] };
        accumulate_layer(&mut grads, k, &delta, a_prev);
        let back = params.weights[k].tr_mul_vec(&delta)?;
        if k == 0 {
            return Ok((grads.to_flat(), back));
        }
        let act = spec.layer_activation(k - 1);
        delta = back
            .iter()
            .zip(&tape.pre[k - 1])
            .map(|(&g, &z)| g * act.d1(z))
            .collect();
    }
    unreachable!("depth >= 1")
}

#[inline]
fn accumulate_layer<T: Real>(grads: &mut MlpParams<T>, k: usize, delta: &[T], a_prev: &[T]) {
    let w = &mut grads.weights[k];
    for (i, &di) in delta.iter().enumerate() {
        if di == T::zero() {
            continue;
        }
        let row = w.row_mut(i);
        for (j, &aj) in a_prev.iter().enumerate() {
            row[j] += di * aj;
        }
        grads.biases[k][i] += di;
    }
}

/// Analytic Jacobian of the network output with respect to its input:
/// J = W_L D_{L-1} W_{L-1} ... D_1 W_1 with D_k = diag(act'(pre_k)).
pub fn input_jacobian<T: Real>(
    spec: &MlpSpec,
    params: &MlpParams<T>,
    tape: &ForwardTape<T>,
) -> Result<Matrix<T>> {
    let depth = spec.depth();
    if tape.layers() != depth {
        return Err(Error::DimMismatch {
            op: "input_jacobian",
            detail: format!("tape layers {} vs spec depth {}", tape.layers(), depth),
        });
    }
    // Accumulate left-to-right; output dims are small in this crate.
    let mut j = params.weights[depth - 1].clone();
    for k in (0..depth - 1).rev() {
        let act = spec.layer_activation(k);
        // J <- (J * D_k) * W_k
        let mut scaled = j.clone();
        for r in 0..scaled.rows() {
            let row = scaled.row_mut(r);
            for (c, v) in row.iter_mut().enumerate() {
                *v *= act.d1(tape.pre[k][c]);
            }
        }
        j = scaled.matmul(&params.weights[k])?;
    }
    Ok(j)
}

/// Parameter gradient of the bilinear form c = u^T J(x) w, where J is the
/// input-Jacobian of the network at the taped point. Both the explicit
/// weight dependence of J and the dependence through the activation
/// derivatives are accounted for, so the result is exact.
pub fn jacobian_bilinear_grad<T: Real>(
    spec: &MlpSpec,
    params: &MlpParams<T>,
    tape: &ForwardTape<T>,
    u: &[T],
    w: &[T],
) -> Result<Vec<T>> {
    let depth = spec.depth();
    if u.len() != spec.output_dim() || w.len() != spec.input_dim() {
        return Err(Error::DimMismatch {
            op: "jacobian_bilinear_grad",
            detail: format!(
                "u {} vs out {}, w {} vs in {}",
                u.len(),
                spec.output_dim(),
                w.len(),
                spec.input_dim()
            ),
        });
    }

    // Forward sweep of the directional derivative r_k and the gated r's.
    // r[0] = W_0 w; r[k] = W_k (d_{k-1} .* r[k-1]).
    let mut r: Vec<Vec<T>> = Vec::with_capacity(depth);
    let mut gated: Vec<Vec<T>> = Vec::with_capacity(depth); // gated[k] = d_k .* r[k]
    let mut cur = params.weights[0].mul_vec(w)?;
    for k in 0..depth {
        if k > 0 {
            cur = params.weights[k].mul_vec(gated.last().unwrap())?;
        }
        r.push(cur.clone());
        let act = spec.layer_activation(k);
        let g: Vec<T> = cur
            .iter()
            .zip(&tape.pre[k])
            .map(|(&ri, &z)| ri * act.d1(z))
            .collect();
        gated.push(g);
    }

    let mut grads = MlpParams::<T>::zeros(spec);
    // e[k]: adjoint of pre_k arising from the activation-derivative gates.
    let mut e: Vec<Vec<T>> = (0..depth)
        .map(|k| vec![T::zero(); spec.layer_sizes[k + 1]])
        .collect();

    // Backward sweep through the Jacobian product.
    // g_k: adjoint of r[k]; g_{L-1} = u.
    let mut g: Vec<T> = u.to_vec();
    for k in (0..depth).rev() {
        // Direct term: r[k] = W_k * input_vec, input_vec = w or gated[k-1].
        let input_vec: &[T] = if k == 0 { w } else { &gated[k - 1] };
        {
            let wk = &mut grads.weights[k];
            for (i, &gi) in g.iter().enumerate() {
                if gi == T::zero() {
                    continue;
                }
                let row = wk.row_mut(i);
                for (jj, &vj) in input_vec.iter().enumerate() {
                    row[jj] += gi * vj;
                }
            }
        }
        if k == 0 {
            break;
        }
        // Adjoint of gated[k-1], then split into gate (pre) and r parts.
        let h = params.weights[k].tr_mul_vec(&g)?;
        let act = spec.layer_activation(k - 1);
        let mut g_next = vec![T::zero(); h.len()];
        for i in 0..h.len() {
            let z = tape.pre[k - 1][i];
            e[k - 1][i] += h[i] * r[k - 1][i] * act.d2(z);
            g_next[i] = h[i] * act.d1(z);
        }
        g = g_next;
    }

    // Backprop the injected pre-activation adjoints e[k] through the
    // original forward pass (this is where bias gradients come from).
    let mut delta = e[depth - 1].clone();
    for k in (0..depth).rev() {
        if k < depth - 1 {
            // delta currently holds the adjoint of post[k]; gate it.
            let act = spec.layer_activation(k);
            for (i, d) in delta.iter_mut().enumerate() {
                *d *= act.d1(tape.pre[k][i]);
                *d += e[k][i];
            }
        }
        let a_prev: &[T] = if k == 0 { &tape.input } else { &tape.post[k - 1] };
        accumulate_layer(&mut grads, k, &delta, a_prev);
        if k == 0 {
            break;
        }
        delta = params.weights[k].tr_mul_vec(&delta)?;
    }

    Ok(grads.to_flat())
}
