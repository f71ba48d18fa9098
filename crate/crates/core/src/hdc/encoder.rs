//! Two-stage encoder: random Fourier features followed by the OnlineHD map.
//!
//! ```text
//! z(x)     = sqrt(2 / d_r) * cos(x Ω + b)          Ω ~ N(0, 1/σ²), b ~ U[0, 2π)
//! θ(z)     = cos(z W + φ) ⊙ sin(z W)               W ~ N(0, 1),    φ ~ U[0, 2π)
//! ```
//!
//! All parameters are drawn from the seed, so clients that agree on a seed
//! agree on the encoder without exchanging any matrices.

use std::f64::consts::TAU;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis, Zip};
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{HdcError, Result};
use crate::seed::{SeedTree, Stream};

/// Dimensions and bandwidth needed to draw an [`EncoderParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncoderShape {
    /// Native feature dimension `d`.
    pub input_dim: usize,
    /// Random Fourier feature dimension `d_r`.
    pub rffm_dim: usize,
    /// Hypervector dimension `D`.
    pub hd_dim: usize,
    /// Kernel bandwidth σ; projection entries have standard deviation 1/σ.
    pub bandwidth: f64,
}

impl EncoderShape {
    /// `d_r = d` and σ = 1.
    pub fn new(input_dim: usize, hd_dim: usize) -> Self {
        Self {
            input_dim,
            rffm_dim: input_dim,
            hd_dim,
            bandwidth: 1.0,
        }
    }
}

/// Frozen random parameters of the encoder.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    pub shape: EncoderShape,
    pub seed: u64,
    /// `d × d_r`
    pub rffm_projection: Array2<f64>,
    /// `d_r`, entries in `[0, 2π)`
    pub rffm_offset: Array1<f64>,
    /// `d_r × D`, standard normal
    pub projection: Array2<f64>,
    /// `D`, entries in `[0, 2π)`
    pub phase: Array1<f64>,
}

impl EncoderParams {
    pub fn new(shape: EncoderShape, seed: u64) -> Result<Self> {
        let EncoderShape {
            input_dim,
            rffm_dim,
            hd_dim,
            bandwidth,
        } = shape;
        if input_dim == 0 || rffm_dim == 0 || hd_dim == 0 {
            return Err(HdcError::Config(format!(
                "encoder dimensions must be positive (d={input_dim}, d_r={rffm_dim}, D={hd_dim})"
            )));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(HdcError::Config(format!(
                "bandwidth must be positive, got {bandwidth}"
            )));
        }

        let seeds = SeedTree::new(seed);
        let mut rng = seeds.rng(Stream::Rffm, 0);
        let omega = Normal::new(0.0, 1.0 / bandwidth)
            .map_err(|e| HdcError::Config(format!("bandwidth: {e}")))?;
        let rffm_projection =
            Array2::from_shape_simple_fn((input_dim, rffm_dim), || omega.sample(&mut rng));
        let rffm_offset = Array1::from_shape_simple_fn(rffm_dim, || rng.random_range(0.0..TAU));

        let mut rng = seeds.rng(Stream::HdMap, 0);
        let projection =
            Array2::from_shape_simple_fn((rffm_dim, hd_dim), || StandardNormal.sample(&mut rng));
        let phase = Array1::from_shape_simple_fn(hd_dim, || rng.random_range(0.0..TAU));

        Ok(Self {
            shape,
            seed,
            rffm_projection,
            rffm_offset,
            projection,
            phase,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.shape.input_dim
    }

    pub fn rffm_dim(&self) -> usize {
        self.shape.rffm_dim
    }

    pub fn hd_dim(&self) -> usize {
        self.shape.hd_dim
    }

    /// Random Fourier features of a single (already normalized) sample.
    pub fn rffm_transform(&self, x: ArrayView1<f64>) -> Result<Array1<f64>> {
        if x.len() != self.input_dim() {
            return Err(HdcError::shape(
                format!("input of length {}", self.input_dim()),
                x.len(),
            ));
        }
        let scale = self.rffm_scale();
        let mut z = x.dot(&self.rffm_projection);
        Zip::from(&mut z)
            .and(&self.rffm_offset)
            .for_each(|v, &b| *v = scale * (*v + b).cos());
        Ok(z)
    }

    /// Row-wise [`EncoderParams::rffm_transform`].
    pub fn rffm_batch(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.input_dim() {
            return Err(HdcError::shape(
                format!("{} columns", self.input_dim()),
                x.ncols(),
            ));
        }
        let scale = self.rffm_scale();
        let mut z = x.dot(&self.rffm_projection);
        for mut row in z.axis_iter_mut(Axis(0)) {
            Zip::from(&mut row)
                .and(&self.rffm_offset)
                .for_each(|v, &b| *v = scale * (*v + b).cos());
        }
        Ok(z)
    }

    /// Hypervector of a single RFFM-space sample.
    pub fn encode(&self, z: ArrayView1<f64>) -> Result<Array1<f64>> {
        if z.len() != self.rffm_dim() {
            return Err(HdcError::shape(
                format!("input of length {}", self.rffm_dim()),
                z.len(),
            ));
        }
        let mut h = z.dot(&self.projection);
        Zip::from(&mut h)
            .and(&self.phase)
            .for_each(|v, &phi| *v = onlinehd(*v, phi));
        Ok(h)
    }

    /// Row-wise [`EncoderParams::encode`].
    pub fn encode_batch(&self, z: ArrayView2<f64>) -> Result<Array2<f64>> {
        if z.ncols() != self.rffm_dim() {
            return Err(HdcError::shape(
                format!("{} columns", self.rffm_dim()),
                z.ncols(),
            ));
        }
        let mut h = z.dot(&self.projection);
        for mut row in h.axis_iter_mut(Axis(0)) {
            Zip::from(&mut row)
                .and(&self.phase)
                .for_each(|v, &phi| *v = onlinehd(*v, phi));
        }
        Ok(h)
    }

    fn rffm_scale(&self) -> f64 {
        (2.0 / self.rffm_dim() as f64).sqrt()
    }
}

#[inline]
fn onlinehd(projected: f64, phase: f64) -> f64 {
    (projected + phase).cos() * projected.sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    // Scalar re-evaluation of the formulas straight from the public fields.
    #[allow(clippy::needless_range_loop)]
    fn rffm_oracle(p: &EncoderParams, x: &[f64]) -> Vec<f64> {
        let (d, dr) = (p.input_dim(), p.rffm_dim());
        (0..dr)
            .map(|j| {
                let mut s = 0.0;
                for i in 0..d {
                    s += x[i] * p.rffm_projection[[i, j]];
                }
                (2.0 / dr as f64).sqrt() * (s + p.rffm_offset[j]).cos()
            })
            .collect()
    }

    fn encode_oracle(p: &EncoderParams, z: &[f64]) -> Vec<f64> {
        (0..p.hd_dim())
            .map(|j| {
                let mut s = 0.0;
                for (i, zi) in z.iter().enumerate() {
                    s += zi * p.projection[[i, j]];
                }
                (s + p.phase[j]).cos() * s.sin()
            })
            .collect()
    }

    #[test]
    fn rffm_matches_scalar_oracle() {
        let p = EncoderParams::new(EncoderShape::new(4, 4), 42).unwrap();
        let e1 = array![1.0, 0.0, 0.0, 0.0];
        let got = p.rffm_transform(e1.view()).unwrap();
        let want = rffm_oracle(&p, e1.as_slice().unwrap());
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "{g} vs {w}");
        }
    }

    #[test]
    fn rffm_of_zero_is_scaled_cosine_of_offset() {
        let shape = EncoderShape {
            input_dim: 5,
            rffm_dim: 7,
            hd_dim: 16,
            bandwidth: 1.0,
        };
        let p = EncoderParams::new(shape, 1).unwrap();
        let z = p.rffm_transform(Array1::zeros(5).view()).unwrap();
        let bound = (2.0f64 / 7.0).sqrt();
        for (v, b) in z.iter().zip(&p.rffm_offset) {
            assert_eq!(*v, bound * b.cos());
        }
    }

    #[test]
    fn encode_matches_scalar_oracle() {
        let p = EncoderParams::new(
            EncoderShape {
                input_dim: 2,
                rffm_dim: 2,
                hd_dim: 3,
                bandwidth: 1.0,
            },
            42,
        )
        .unwrap();
        let x = array![1.0, 0.0];
        let got = p.encode(x.view()).unwrap();
        for j in 0..3 {
            let w = p.projection[[0, j]];
            let want = (w + p.phase[j]).cos() * w.sin();
            assert!((got[j] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn encode_of_zero_is_exactly_zero() {
        let p = EncoderParams::new(EncoderShape::new(3, 64), 9).unwrap();
        let h = p.encode(Array1::zeros(3).view()).unwrap();
        assert!(h.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn batch_agrees_with_single_sample() {
        let p = EncoderParams::new(EncoderShape::new(6, 50), 3).unwrap();
        let x = Array2::from_shape_fn((4, 6), |(i, j)| ((i * 7 + j) as f64).sin());
        let zb = p.rffm_batch(x.view()).unwrap();
        let hb = p.encode_batch(zb.view()).unwrap();
        for i in 0..4 {
            let z = p.rffm_transform(x.row(i)).unwrap();
            let want_z = rffm_oracle(&p, x.row(i).to_vec().as_slice());
            let h = p.encode(z.view()).unwrap();
            let want_h = encode_oracle(&p, &want_z);
            for j in 0..50 {
                assert!((hb[[i, j]] - h[j]).abs() < 1e-12);
                assert!((h[j] - want_h[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parameters_in_declared_ranges() {
        let p = EncoderParams::new(
            EncoderShape {
                input_dim: 10,
                rffm_dim: 12,
                hd_dim: 100,
                bandwidth: 0.5,
            },
            5,
        )
        .unwrap();
        assert_eq!(p.rffm_projection.dim(), (10, 12));
        assert_eq!(p.projection.dim(), (12, 100));
        assert!(p.phase.iter().all(|v| (0.0..TAU).contains(v)));
        assert!(p.rffm_offset.iter().all(|v| (0.0..TAU).contains(v)));
    }

    #[test]
    fn shape_errors() {
        let p = EncoderParams::new(EncoderShape::new(3, 8), 0).unwrap();
        assert!(matches!(
            p.rffm_transform(array![1.0].view()),
            Err(HdcError::Shape { .. })
        ));
        assert!(matches!(
            p.encode(array![1.0].view()),
            Err(HdcError::Shape { .. })
        ));
        assert!(p.rffm_batch(Array2::zeros((2, 4)).view()).is_err());
        assert!(EncoderParams::new(EncoderShape::new(0, 8), 0).is_err());
        let mut bad = EncoderShape::new(3, 8);
        bad.bandwidth = 0.0;
        assert!(EncoderParams::new(bad, 0).is_err());
    }

    proptest! {
        #[test]
        fn outputs_are_bounded(x in prop::collection::vec(-5.0f64..5.0, 8), seed in any::<u64>()) {
            let p = EncoderParams::new(EncoderShape::new(8, 32), seed).unwrap();
            let z = p.rffm_transform(Array1::from(x).view()).unwrap();
            let bound = (2.0f64 / 8.0).sqrt();
            prop_assert!(z.iter().all(|v| v.abs() <= bound));
            let h = p.encode(z.view()).unwrap();
            prop_assert!(h.iter().all(|v| v.is_finite() && v.abs() <= 1.0));
        }

        #[test]
        fn same_seed_same_parameters(seed in any::<u64>()) {
            let a = EncoderParams::new(EncoderShape::new(4, 16), seed).unwrap();
            let b = EncoderParams::new(EncoderShape::new(4, 16), seed).unwrap();
            prop_assert_eq!(&a, &b);
            let x = array![0.5, -0.5, 0.5, -0.5];
            let ha = a.encode(a.rffm_transform(x.view()).unwrap().view()).unwrap();
            let hb = b.encode(b.rffm_transform(x.view()).unwrap().view()).unwrap();
            prop_assert_eq!(ha, hb);
        }
    }
}
