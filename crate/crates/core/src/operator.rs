//! Dense complex operators on the composite space of `n_tls` two-level
//! systems and one truncated bosonic mode.
//!
//! Tensor ordering is TLS₁ ⊗ TLS₂ ⊗ … ⊗ Fock. The Fock index runs fastest:
//! the composite index of TLS configuration `s` and photon number `m` is
//! `s * fock_cutoff + m`, with TLS₁ the most significant bit of `s`. Each TLS
//! uses the basis {|↑⟩, |↓⟩} with σ_z = diag(1, −1) and σ₊ = |↑⟩⟨↓|.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
pub use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Shape of the composite Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertSpace {
    n_tls: usize,
    fock_cutoff: usize,
}

impl HilbertSpace {
    pub fn new(n_tls: usize, fock_cutoff: usize) -> Result<Self> {
        if n_tls == 0 {
            return Err(Error::invalid("n_tls", "at least one TLS is required"));
        }
        if fock_cutoff < 2 {
            return Err(Error::invalid(
                "fock_cutoff",
                "at least two Fock levels are required",
            ));
        }
        Ok(HilbertSpace { n_tls, fock_cutoff })
    }

    pub fn n_tls(&self) -> usize {
        self.n_tls
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    /// Dimension of the TLS register, 2^n_tls.
    pub fn register_dim(&self) -> usize {
        1 << self.n_tls
    }

    pub fn dim(&self) -> usize {
        self.register_dim() * self.fock_cutoff
    }

    pub fn index(&self, register_state: usize, photons: usize) -> usize {
        debug_assert!(register_state < self.register_dim() && photons < self.fock_cutoff);
        register_state * self.fock_cutoff + photons
    }
}

/// Square complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator(CMatrix);

impl Operator {
    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Ok(Operator(m))
    }

    /// Row-major construction from real entries, for small literals.
    pub fn from_real_rows(d: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), d * d);
        Operator(CMatrix::from_row_iterator(
            d,
            d,
            entries.iter().map(|&x| c(x)),
        ))
    }

    pub fn from_rows(d: usize, entries: &[C64]) -> Self {
        assert_eq!(entries.len(), d * d);
        Operator(CMatrix::from_row_slice(d, d, entries))
    }

    pub fn identity(d: usize) -> Self {
        Operator(CMatrix::identity(d, d))
    }

    pub fn zeros(d: usize) -> Self {
        Operator(CMatrix::zeros(d, d))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let d = values.len();
        let mut m = CMatrix::zeros(d, d);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = c(v);
        }
        Operator(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn dagger(&self) -> Self {
        Operator(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, factor: C64) -> Self {
        Operator(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(c(factor))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    /// max |A − A†|.
    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.0)
    }

    /// max |A†A − I|.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim();
        max_abs(&(self.0.adjoint() * &self.0 - CMatrix::identity(d, d)))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        Operator(&self.0 * &other.0 - &other.0 * &self.0)
    }

    pub fn anticommutator(&self, other: &Operator) -> Operator {
        Operator(&self.0 * &other.0 + &other.0 * &self.0)
    }

    /// Real eigenvalues of a Hermitian operator, ascending.
    pub fn eigenvalues_hermitian(&self) -> Result<Vec<f64>> {
        let dev = self.hermiticity_deviation();
        if dev > 1e-9 * self.max_abs().max(1.0) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(hermitian_eigenvalues(&self.0))
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Add for Operator {
    type Output = Operator;
    fn add(self, rhs: Operator) -> Operator {
        Operator(self.0 + rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl Mul for Operator {
    type Output = Operator;
    fn mul(self, rhs: Operator) -> Operator {
        Operator(self.0 * rhs.0)
    }
}

impl Neg for Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator(-self.0)
    }
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..d {
        for j in i..d {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * c(0.5);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// |tr(A†B)| / d. Equals 1 exactly when unitaries A and B agree up to a
/// global phase.
pub fn phase_insensitive_overlap(a: &Operator, b: &Operator) -> f64 {
    let d = a.dim() as f64;
    (a.0.adjoint() * &b.0).trace().norm() / d
}

pub fn equal_up_to_phase(a: &Operator, b: &Operator, tol: f64) -> bool {
    a.dim() == b.dim() && (1.0 - phase_insensitive_overlap(a, b)).abs() <= tol
}

/// Single-mode annihilation operator truncated to `levels` Fock states.
pub fn fock_annihilation(levels: usize) -> Operator {
    let mut m = CMatrix::zeros(levels, levels);
    for n in 1..levels {
        m[(n - 1, n)] = c((n as f64).sqrt());
    }
    Operator(m)
}

/// Resonator annihilation operator on the composite space.
pub fn annihilation(space: &HilbertSpace) -> Operator {
    kron(
        &Operator::identity(space.register_dim()),
        &fock_annihilation(space.fock_cutoff()),
    )
}

/// a†a on the composite space.
pub fn number(space: &HilbertSpace) -> Operator {
    let a = annihilation(space);
    &a.dagger() * &a
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

pub fn pauli_matrix(axis: PauliAxis) -> Operator {
    let z = C64::new(0.0, 0.0);
    let one = c(1.0);
    let rows = match axis {
        PauliAxis::X => [z, one, one, z],
        PauliAxis::Y => [z, -I, I, z],
        PauliAxis::Z => [one, z, z, -one],
        PauliAxis::Plus => [z, one, z, z],
        PauliAxis::Minus => [z, z, one, z],
    };
    Operator::from_rows(2, &rows)
}

/// Kronecker product A ⊗ B.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    Operator(a.0.kronecker(&b.0))
}

/// Places a single-TLS operator at `site` of an `n_tls` register (no Fock factor).
pub fn embed_register(op: &Operator, site: usize, n_tls: usize) -> Result<Operator> {
    if site >= n_tls {
        return Err(Error::SiteOutOfRange { site, n_tls });
    }
    if op.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: op.dim(),
        });
    }
    let left = Operator::identity(1 << site);
    let right = Operator::identity(1 << (n_tls - site - 1));
    Ok(kron(&kron(&left, op), &right))
}

/// Places a single-TLS operator at `site` of the composite space.
pub fn embed_tls(op: &Operator, site: usize, space: &HilbertSpace) -> Result<Operator> {
    let reg = embed_register(op, site, space.n_tls())?;
    Ok(kron(&reg, &Operator::identity(space.fock_cutoff())))
}

/// Lifts a register operator to the composite space (identity on the mode).
pub fn lift_register(op: &Operator, space: &HilbertSpace) -> Result<Operator> {
    if op.dim() != space.register_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.register_dim(),
            found: op.dim(),
        });
    }
    Ok(kron(op, &Operator::identity(space.fock_cutoff())))
}

pub fn pauli(axis: PauliAxis, site: usize, space: &HilbertSpace) -> Result<Operator> {
    embed_tls(&pauli_matrix(axis), site, space)
}

/// exp(−iHt) for Hermitian H via eigendecomposition.
pub fn expm_hermitian(h: &Operator, t: f64) -> Result<Operator> {
    let dev = h.hermiticity_deviation();
    if dev > 1e-9 * h.max_abs().max(1.0) {
        return Err(Error::NotHermitian { deviation: dev });
    }
    let sym = (&h.0 + h.0.adjoint()) * c(0.5);
    let eig = sym.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = CMatrix::from_diagonal(&eig.eigenvalues.map(|l| (-I * (l * t)).exp()));
    Ok(Operator(v * phases * v.adjoint()))
}

/// Rotation exp(−i φ n̂·σ/2) about the axis n̂ = (sin θ, 0, cos θ).
pub fn axis_rotation(theta: f64, phi: f64) -> Operator {
    let (s, co) = ((phi / 2.0).sin(), (phi / 2.0).cos());
    let (nx, nz) = (theta.sin(), theta.cos());
    Operator::from_rows(
        2,
        &[
            C64::new(co, -s * nz),
            C64::new(0.0, -s * nx),
            C64::new(0.0, -s * nx),
            C64::new(co, s * nz),
        ],
    )
}

/// exp(−i θ σ_y / 2): maps σ_z onto cos θ σ_z + sin θ σ_x by conjugation.
pub fn y_rotation(theta: f64) -> Operator {
    let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    Operator::from_real_rows(2, &[co, -s, s, co])
}

/// Traces out the Fock factor of an arbitrary composite-space matrix.
pub fn trace_out_fock(m: &CMatrix, space: &HilbertSpace) -> Result<CMatrix> {
    if m.nrows() != space.dim() || m.ncols() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: m.nrows(),
        });
    }
    let r = space.register_dim();
    let nf = space.fock_cutoff();
    Ok(CMatrix::from_fn(r, r, |i, j| {
        (0..nf).map(|k| m[(i * nf + k, j * nf + k)]).sum()
    }))
}

/// Density matrix with validated physicality.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMatrix);

pub const DENSITY_HERMITIAN_TOL: f64 = 1e-10;
pub const DENSITY_TRACE_TOL: f64 = 1e-8;
pub const DENSITY_NEGATIVITY_TOL: f64 = 1e-8;

impl DensityMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let dev = hermiticity_deviation(&m);
        if dev > DENSITY_HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let tr = m.trace();
        if (tr - c(1.0)).norm() > DENSITY_TRACE_TOL {
            return Err(Error::invalid("rho", format!("trace is {tr}, expected 1")));
        }
        let min = hermitian_eigenvalues(&m)[0];
        if min < -DENSITY_NEGATIVITY_TOL {
            return Err(Error::invalid(
                "rho",
                format!("minimum eigenvalue {min:.3e} is negative"),
            ));
        }
        Ok(DensityMatrix(m))
    }

    /// Wraps a matrix the caller has already validated.
    pub(crate) fn new_unchecked(m: CMatrix) -> Self {
        DensityMatrix(m)
    }

    /// |ψ⟩⟨ψ| for a normalised state vector (normalised here).
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::invalid("psi", "zero vector"));
        }
        let d = psi.len();
        let m = CMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Ok(DensityMatrix(m))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        DensityMatrix(CMatrix::identity(d, d) * c(1.0 / d as f64))
    }

    pub fn product(a: &DensityMatrix, b: &DensityMatrix) -> Self {
        DensityMatrix(a.0.kronecker(&b.0))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.0)[0]
    }

    pub fn expectation(&self, op: &Operator) -> C64 {
        (&self.0 * op.matrix()).trace()
    }
}

/// Reduces a composite-space state to the TLS register.
pub fn partial_trace_resonator(rho: &DensityMatrix, space: &HilbertSpace) -> Result<DensityMatrix> {
    Ok(DensityMatrix(trace_out_fock(&rho.0, space)?))
}

/// Truncated coherent state |α⟩ on `levels` Fock states, renormalised.
pub fn coherent_state(alpha: C64, levels: usize) -> Vec<C64> {
    let mut amps = Vec::with_capacity(levels);
    let mut term = c(1.0);
    for n in 0..levels {
        if n > 0 {
            term = term * alpha / (n as f64).sqrt();
        }
        amps.push(term);
    }
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    amps.iter().map(|z| z / norm).collect()
}
