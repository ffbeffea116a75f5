//! The probe network: dim → h1 (SELU) → h2 (Tanh) → 1 logit, with inverted
//! dropout after both hidden activations during training.
//!
//! Parameters live in one flat vector, `[W1 | b1 | W2 | b2 | w3 | b3]` with
//! weight matrices row-major (output-major), so the optimizer and the
//! checkpoint format see a single slice.

use num_traits::Float;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

pub const SELU_ALPHA: f64 = 1.673_263_242_354_377_284_817_042_991_671_7;
pub const SELU_LAMBDA: f64 = 1.050_700_987_355_480_493_419_334_985_294_6;

fn c<T: Float>(x: f64) -> T {
    T::from(x).expect("representable constant")
}

pub fn selu<T: Float>(x: T) -> T {
    if x > T::zero() {
        c::<T>(SELU_LAMBDA) * x
    } else {
        c::<T>(SELU_LAMBDA * SELU_ALPHA) * (x.exp() - T::one())
    }
}

pub fn selu_grad<T: Float>(x: T) -> T {
    if x > T::zero() {
        c(SELU_LAMBDA)
    } else {
        c::<T>(SELU_LAMBDA * SELU_ALPHA) * x.exp()
    }
}

pub fn sigmoid<T: Float>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

/// Binary cross-entropy on a logit, in the overflow-safe form.
pub fn bce_with_logit<T: Float>(logit: T, label: bool) -> T {
    let y = if label { T::one() } else { T::zero() };
    logit.max(T::zero()) - logit * y + (T::one() + (-logit.abs()).exp()).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shape {
    pub dim: usize,
    pub h1: usize,
    pub h2: usize,
}

impl Shape {
    pub fn param_count(&self) -> usize {
        self.h1 * self.dim + self.h1 + self.h2 * self.h1 + self.h2 + self.h2 + 1
    }

    fn offsets(&self) -> [usize; 6] {
        let w1 = 0;
        let b1 = w1 + self.h1 * self.dim;
        let w2 = b1 + self.h1;
        let b2 = w2 + self.h2 * self.h1;
        let w3 = b2 + self.h2;
        let b3 = w3 + self.h2;
        [w1, b1, w2, b2, w3, b3]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeMlp<T = f32> {
    pub shape: Shape,
    pub params: Vec<T>,
}

/// Per-example dropout multipliers (0 or 1/(1-p)) for both hidden layers.
#[derive(Debug, Clone)]
pub struct Masks<T> {
    pub m1: Vec<T>,
    pub m2: Vec<T>,
}

impl<T: Float> Masks<T> {
    pub fn draw<R: Rng + ?Sized>(shape: Shape, rate: f64, rng: &mut R) -> Self {
        let keep = c::<T>(1.0 / (1.0 - rate));
        let mut m = |n| (0..n).map(|_| if rng.gen::<f64>() < rate { T::zero() } else { keep }).collect();
        Masks {
            m1: m(shape.h1),
            m2: m(shape.h2),
        }
    }
}

/// Scratch space reused across examples.
#[derive(Debug, Clone)]
pub struct Workspace<T> {
    z1: Vec<T>,
    a1: Vec<T>,
    z2: Vec<T>,
    a2: Vec<T>,
    g1: Vec<T>,
    g2: Vec<T>,
}

impl<T: Float> Workspace<T> {
    pub fn new(shape: Shape) -> Self {
        Workspace {
            z1: vec![T::zero(); shape.h1],
            a1: vec![T::zero(); shape.h1],
            z2: vec![T::zero(); shape.h2],
            a2: vec![T::zero(); shape.h2],
            g1: vec![T::zero(); shape.h1],
            g2: vec![T::zero(); shape.h2],
        }
    }
}

impl<T: Float> ProbeMlp<T> {
    /// LeCun-normal weights into the SELU layer, Glorot-uniform into the
    /// Tanh and output layers, zero biases.
    pub fn init<R: Rng + ?Sized>(shape: Shape, rng: &mut R) -> Self {
        let mut params = vec![T::zero(); shape.param_count()];
        let [w1, b1, w2, b2, w3, _] = shape.offsets();
        let std1 = (1.0 / shape.dim as f64).sqrt();
        for p in &mut params[w1..b1] {
            let z: f64 = StandardNormal.sample(rng);
            *p = c(z * std1);
        }
        let glorot = |fan_in: usize, fan_out: usize| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            Uniform::new_inclusive(-limit, limit)
        };
        let u2 = glorot(shape.h1, shape.h2);
        for p in &mut params[w2..b2] {
            *p = c(u2.sample(rng));
        }
        let u3 = glorot(shape.h2, 1);
        for p in &mut params[w3..w3 + shape.h2] {
            *p = c(u3.sample(rng));
        }
        ProbeMlp { shape, params }
    }

    pub fn from_params(shape: Shape, params: Vec<T>) -> Option<Self> {
        (params.len() == shape.param_count()).then_some(ProbeMlp { shape, params })
    }

    /// The logit for `x`; dropout applies when `masks` is given.
    pub fn forward(&self, x: &[T], masks: Option<&Masks<T>>, ws: &mut Workspace<T>) -> T {
        let Shape { dim, h1, h2 } = self.shape;
        let [w1, b1, w2, b2, w3, b3] = self.shape.offsets();
        let p = &self.params;
        for i in 0..h1 {
            let row = &p[w1 + i * dim..w1 + (i + 1) * dim];
            let z = row.iter().zip(x).fold(p[b1 + i], |acc, (&w, &v)| acc + w * v);
            ws.z1[i] = z;
            let a = selu(z);
            ws.a1[i] = masks.map_or(a, |m| a * m.m1[i]);
        }
        for j in 0..h2 {
            let row = &p[w2 + j * h1..w2 + (j + 1) * h1];
            let z = row.iter().zip(&ws.a1).fold(p[b2 + j], |acc, (&w, &v)| acc + w * v);
            ws.z2[j] = z;
            let a = z.tanh();
            ws.a2[j] = masks.map_or(a, |m| a * m.m2[j]);
        }
        p[w3..w3 + h2].iter().zip(&ws.a2).fold(p[b3], |acc, (&w, &v)| acc + w * v)
    }

    /// Adds `scale * dL/dθ` for one example to `grad` and returns its loss.
    /// Must follow the matching [`forward`](Self::forward) call on `ws`.
    pub fn backward(
        &self,
        x: &[T],
        label: bool,
        logit: T,
        masks: Option<&Masks<T>>,
        ws: &mut Workspace<T>,
        scale: T,
        grad: &mut [T],
    ) -> T {
        let Shape { dim, h1, h2 } = self.shape;
        let [w1, b1, w2, b2, w3, b3] = self.shape.offsets();
        let p = &self.params;
        let y = if label { T::one() } else { T::zero() };
        let gl = (sigmoid(logit) - y) * scale;
        grad[b3] = grad[b3] + gl;
        for j in 0..h2 {
            grad[w3 + j] = grad[w3 + j] + gl * ws.a2[j];
            let mut g = gl * p[w3 + j];
            if let Some(m) = masks {
                g = g * m.m2[j];
            }
            let t = ws.z2[j].tanh();
            ws.g2[j] = g * (T::one() - t * t);
        }
        for v in ws.g1.iter_mut() {
            *v = T::zero();
        }
        for j in 0..h2 {
            let g = ws.g2[j];
            grad[b2 + j] = grad[b2 + j] + g;
            let row = w2 + j * h1;
            for i in 0..h1 {
                grad[row + i] = grad[row + i] + g * ws.a1[i];
                ws.g1[i] = ws.g1[i] + g * p[row + i];
            }
        }
        for i in 0..h1 {
            let mut g = ws.g1[i];
            if let Some(m) = masks {
                g = g * m.m1[i];
            }
            let g = g * selu_grad(ws.z1[i]);
            grad[b1 + i] = grad[b1 + i] + g;
            let row = w1 + i * dim;
            for (k, &v) in x.iter().enumerate() {
                grad[row + k] = grad[row + k] + g * v;
            }
        }
        bce_with_logit(logit, label)
    }

    /// Mean loss over a batch and its gradient.
    pub fn loss_and_grad(&self, xs: &[&[T]], labels: &[bool], masks: Option<&[Masks<T>]>) -> (T, Vec<T>) {
        let mut grad = vec![T::zero(); self.params.len()];
        let mut ws = Workspace::new(self.shape);
        let scale = T::one() / T::from(xs.len()).expect("batch size");
        let mut loss = T::zero();
        for (i, (x, &y)) in xs.iter().zip(labels).enumerate() {
            let m = masks.map(|m| &m[i]);
            let logit = self.forward(x, m, &mut ws);
            loss = loss + self.backward(x, y, logit, m, &mut ws, scale, &mut grad) * scale;
        }
        (loss, grad)
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    /// Sets the output weights and bias to zero, so every logit is 0.
    pub fn zero_output_layer(&mut self) {
        let [_, _, _, _, w3, _] = self.shape.offsets();
        for p in &mut self.params[w3..] {
            *p = T::zero();
        }
    }
}
