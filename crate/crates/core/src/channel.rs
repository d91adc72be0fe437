//! Linear maps on d×d matrices, stored as the images of the matrix units.

use crate::error::{Error, Result};
use crate::operator::{c, max_abs, CMatrix, Operator};

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    d: usize,
    /// images[i * d + j] = E(|i⟩⟨j|)
    images: Vec<CMatrix>,
}

fn unit(d: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, j)] = c(1.0);
    m
}

impl Channel {
    pub fn from_images(d: usize, images: Vec<CMatrix>) -> Result<Self> {
        if images.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: images.len(),
            });
        }
        if let Some(bad) = images.iter().find(|m| m.nrows() != d || m.ncols() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.nrows(),
            });
        }
        Ok(Channel { d, images })
    }

    /// Tabulates an arbitrary linear map.
    pub fn from_fn(d: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Self {
        let images = (0..d * d).map(|k| f(&unit(d, k / d, k % d))).collect();
        Channel { d, images }
    }

    pub fn identity(d: usize) -> Self {
        Self::from_fn(d, |m| m.clone())
    }

    /// ρ ↦ UρU†.
    pub fn unitary(u: &Operator) -> Self {
        let m = u.matrix();
        Self::from_fn(u.dim(), |x| m * x * m.adjoint())
    }

    /// ρ ↦ pρ + (1 − p) tr(ρ) I/d.
    pub fn depolarizing(d: usize, p: f64) -> Self {
        let id = CMatrix::identity(d, d) * c((1.0 - p) / d as f64);
        Self::from_fn(d, |x| x * c(p) + &id * x.trace())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn image(&self, i: usize, j: usize) -> &CMatrix {
        &self.images[i * self.d + j]
    }

    pub fn apply(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.d, self.d);
        for i in 0..self.d {
            for j in 0..self.d {
                let w = x[(i, j)];
                if w != c(0.0) {
                    out += self.image(i, j) * w;
                }
            }
        }
        out
    }

    /// max_ij |tr E(|i⟩⟨j|) − δ_ij|.
    pub fn trace_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.d {
            for j in 0..self.d {
                let expected = if i == j { c(1.0) } else { c(0.0) };
                dev = dev.max((self.image(i, j).trace() - expected).norm());
            }
        }
        dev
    }

    /// V E(·) V†.
    pub fn then_unitary(&self, v: &Operator) -> Self {
        let m = v.matrix();
        Channel {
            d: self.d,
            images: self.images.iter().map(|x| m * x * m.adjoint()).collect(),
        }
    }

    /// max_ij ‖E(|i⟩⟨j|) − F(|i⟩⟨j|)‖_max.
    pub fn distance(&self, other: &Channel) -> f64 {
        self.images
            .iter()
            .zip(&other.images)
            .map(|(a, b)| max_abs(&(a - b)))
            .fold(0.0, f64::max)
    }

    /// Choi matrix Σ_ij |i⟩⟨j| ⊗ E(|i⟩⟨j|).
    pub fn choi(&self) -> CMatrix {
        let d = self.d;
        let mut m = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                m.view_mut((i * d, j * d), (d, d))
                    .copy_from(self.image(i, j));
            }
        }
        m
    }
}
