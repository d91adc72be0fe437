//! Average gate fidelity of a channel against a target unitary, with
//! optimisation over allowed single-qubit rotations.

use serde::{Deserialize, Serialize};

use crate::calibration::{CompensationAxis, GatePlan};
use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::operator::{axis_rotation, c, kron, CMatrix, Operator, I};

/// Trace-preservation tolerance for fidelity inputs.
pub const TRACE_TOLERANCE: f64 = 1e-6;
/// Grid points per compensation angle.
pub const GRID_POINTS: usize = 64;

/// Operator basis used to evaluate the fidelity sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorBasis {
    /// |i⟩⟨j|, orthonormal but not unitary.
    MatrixUnits,
    /// Tensor products of I, X, Y, Z; requires d = 2^n.
    Pauli,
    /// Clock-and-shift operators X^a Z^b, any d.
    Weyl,
}

fn check_inputs(e: &Channel, u: &Operator) -> Result<()> {
    if e.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: u.dim(),
        });
    }
    let dev = e.trace_deviation();
    if dev > TRACE_TOLERANCE {
        return Err(Error::NotTracePreserving { deviation: dev });
    }
    if !u.is_unitary(1e-8) {
        return Err(Error::invalid("target", "not unitary"));
    }
    Ok(())
}

/// Average gate fidelity via the matrix-unit form of Nielsen's formula.
pub fn nielsen_fidelity(e: &Channel, u: &Operator) -> Result<f64> {
    nielsen_fidelity_in_basis(e, u, OperatorBasis::MatrixUnits)
}

/// F̄ = [Σ_j tr(U U_j† U† E(U_j)) + d²] / (d²(d + 1)) for a unitary
/// orthogonal basis {U_j}; orthonormal bases carry an extra factor d.
pub fn nielsen_fidelity_in_basis(e: &Channel, u: &Operator, basis: OperatorBasis) -> Result<f64> {
    check_inputs(e, u)?;
    fidelity_unchecked(e, u.matrix(), basis)
}

fn fidelity_unchecked(e: &Channel, u: &CMatrix, basis: OperatorBasis) -> Result<f64> {
    let d = e.dim();
    let df = d as f64;
    let ud = u.adjoint();
    let sum = match basis {
        OperatorBasis::MatrixUnits => {
            // tr(U E_ji U† E(E_ij)) = Σ_ab U_aj (U†)_ib E(E_ij)_ba
            let mut s = c(0.0);
            for i in 0..d {
                for j in 0..d {
                    let img = e.image(i, j);
                    for a in 0..d {
                        for b in 0..d {
                            s += u[(a, j)] * ud[(i, b)] * img[(b, a)];
                        }
                    }
                }
            }
            s * df
        }
        OperatorBasis::Pauli | OperatorBasis::Weyl => {
            let ops = match basis {
                OperatorBasis::Pauli => pauli_basis(d)?,
                _ => weyl_basis(d),
            };
            ops.iter()
                .map(|uj| (u * uj.adjoint() * &ud * e.apply(uj)).trace())
                .sum()
        }
    };
    Ok((sum.re + df * df) / (df * df * (df + 1.0)))
}

fn pauli_basis(d: usize) -> Result<Vec<CMatrix>> {
    if !d.is_power_of_two() {
        return Err(Error::invalid(
            "basis",
            format!("Pauli basis needs d = 2^n, got {d}"),
        ));
    }
    let single = [
        CMatrix::identity(2, 2),
        CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]),
        CMatrix::from_row_slice(2, 2, &[c(0.0), -I, I, c(0.0)]),
        CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]),
    ];
    let mut ops = vec![CMatrix::identity(1, 1)];
    let mut size = 1;
    while size < d {
        ops = ops
            .iter()
            .flat_map(|a| single.iter().map(move |p| a.kronecker(p)))
            .collect();
        size *= 2;
    }
    Ok(ops)
}

fn weyl_basis(d: usize) -> Vec<CMatrix> {
    let omega = (I * (2.0 * std::f64::consts::PI / d as f64)).exp();
    let shift = CMatrix::from_fn(d, d, |i, j| if i == (j + 1) % d { c(1.0) } else { c(0.0) });
    let clock = CMatrix::from_fn(
        d,
        d,
        |i, j| if i == j { omega.powu(i as u32) } else { c(0.0) },
    );
    let mut ops = Vec::with_capacity(d * d);
    let mut xa = CMatrix::identity(d, d);
    for _ in 0..d {
        let mut zb = CMatrix::identity(d, d);
        for _ in 0..d {
            ops.push(&xa * &zb);
            zb = &zb * &clock;
        }
        xa = &xa * &shift;
    }
    ops
}

/// Closed form (|tr(U†V)|² + d)/(d² + d) for the unitary channel V·V†.
pub fn unitary_fidelity(v: &Operator, u: &Operator) -> f64 {
    let d = u.dim() as f64;
    let t = (u.matrix().adjoint() * v.matrix()).trace().norm_sqr();
    (t + d) / (d * d + d)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub raw_fidelity: f64,
    pub compensated_fidelity: f64,
    /// Rotation angle applied about each compensation axis, rad.
    pub compensation: Vec<f64>,
    pub axes: Vec<CompensationAxis>,
    pub d: usize,
}

/// ⊗ over the register of rotations by `angles` about the given axes.
pub fn local_rotation(n_tls: usize, axes: &[CompensationAxis], angles: &[f64]) -> Operator {
    let mut u = Operator::identity(1);
    for site in 0..n_tls {
        let local = axes
            .iter()
            .zip(angles)
            .find(|(a, _)| a.site == site)
            .map_or_else(
                || Operator::identity(2),
                |(a, &phi)| axis_rotation(a.theta, phi),
            );
        u = kron(&u, &local);
    }
    u
}

/// Maximises the fidelity of Z∘E over rotations Z about `axes`.
///
/// Angles are scanned on a 64-point grid (jointly for up to two axes,
/// coordinate-wise beyond that) and then refined by golden-section search.
pub fn compensate_local_phases(
    e: &Channel,
    u: &Operator,
    axes: &[CompensationAxis],
) -> Result<FidelityReport> {
    check_inputs(e, u)?;
    let d = u.dim();
    if !d.is_power_of_two() {
        return Err(Error::invalid("target", "register dimension must be 2^n"));
    }
    let n_tls = d.trailing_zeros() as usize;
    if let Some(a) = axes.iter().find(|a| a.site >= n_tls) {
        return Err(Error::SiteOutOfRange {
            site: a.site,
            n_tls,
        });
    }
    let raw = fidelity_unchecked(e, u.matrix(), OperatorBasis::MatrixUnits)?;
    if axes.is_empty() {
        return Ok(FidelityReport {
            raw_fidelity: raw,
            compensated_fidelity: raw,
            compensation: Vec::new(),
            axes: Vec::new(),
            d,
        });
    }
    // F(Z∘E, U) = F(E, Z†U)
    let objective = |angles: &[f64]| -> f64 {
        let z = local_rotation(n_tls, axes, angles);
        let w = z.dagger().matrix() * u.matrix();
        fidelity_unchecked(e, &w, OperatorBasis::MatrixUnits).unwrap_or(f64::NEG_INFINITY)
    };
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|k| 2.0 * std::f64::consts::PI * k as f64 / GRID_POINTS as f64)
        .collect();
    let spacing = grid[1];
    let mut best = vec![0.0; axes.len()];
    let mut best_f = raw;
    match axes.len() {
        1 => {
            for &a in &grid {
                let f = objective(&[a]);
                if f > best_f {
                    best_f = f;
                    best = vec![a];
                }
            }
        }
        2 => {
            for &a in &grid {
                for &b in &grid {
                    let f = objective(&[a, b]);
                    if f > best_f {
                        best_f = f;
                        best = vec![a, b];
                    }
                }
            }
        }
        _ => {
            for _sweep in 0..3 {
                for k in 0..axes.len() {
                    let mut trial = best.clone();
                    for &a in &grid {
                        trial[k] = a;
                        let f = objective(&trial);
                        if f > best_f {
                            best_f = f;
                            best = trial.clone();
                        }
                    }
                }
            }
        }
    }
    // coordinate-wise golden-section refinement within one grid cell
    let mut width = spacing;
    for _round in 0..6 {
        for k in 0..axes.len() {
            let mut trial = best.clone();
            let centre = best[k];
            let (x, f) = golden_max(centre - width, centre + width, 1e-10, |x| {
                trial[k] = x;
                objective(&trial)
            });
            if f > best_f {
                best_f = f;
                best[k] = x;
            }
        }
        width *= 0.5;
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    Ok(FidelityReport {
        raw_fidelity: raw,
        compensated_fidelity: best_f,
        compensation: best.iter().map(|a| a.rem_euclid(two_pi)).collect(),
        axes: axes.to_vec(),
        d,
    })
}

fn golden_max(mut a: f64, mut b: f64, tol: f64, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a).abs() > tol {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Fidelity of a simulated channel against a plan's target, compensating
/// the rotations the plan allows.
pub fn plan_fidelity(plan: &GatePlan, e: &Channel) -> Result<FidelityReport> {
    compensate_local_phases(e, &plan.target, &plan.compensation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{expm_hermitian, pauli_matrix, PauliAxis};

    fn random_unitary(d: usize, seed: u64) -> Operator {
        let mut s = seed;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let m = CMatrix::from_fn(d, d, |_, _| crate::operator::C64::new(next(), next()));
        let h = Operator::from_matrix((&m + m.adjoint()) * c(0.5)).unwrap();
        expm_hermitian(&h, 3.0).unwrap()
    }

    #[test]
    fn perfect_channels() {
        let id = Channel::identity(2);
        assert!((nielsen_fidelity(&id, &Operator::identity(2)).unwrap() - 1.0).abs() < 1e-14);
        let sx = pauli_matrix(PauliAxis::X);
        let f = nielsen_fidelity(&Channel::unitary(&sx), &sx).unwrap();
        assert!((f - 1.0).abs() < 1e-10);
    }

    #[test]
    fn completely_depolarizing() {
        let ch = Channel::depolarizing(2, 0.0);
        for basis in [
            OperatorBasis::MatrixUnits,
            OperatorBasis::Pauli,
            OperatorBasis::Weyl,
        ] {
            let f = nielsen_fidelity_in_basis(&ch, &Operator::identity(2), basis).unwrap();
            assert!((f - 0.5).abs() < 1e-14, "{basis:?}");
        }
        // average fidelity of the partially depolarizing map is p + (1 − p)/d
        let ch = Channel::depolarizing(4, 0.6);
        let f = nielsen_fidelity(&ch, &Operator::identity(4)).unwrap();
        assert!((f - 0.7).abs() < 1e-12);
    }

    #[test]
    fn basis_independence() {
        let u = random_unitary(4, 7);
        let v = random_unitary(4, 11);
        let ch = Channel::unitary(&v);
        let mixed = Channel::from_fn(4, |x| {
            ch.apply(x) * c(0.7) + Channel::depolarizing(4, 0.2).apply(x) * c(0.3)
        });
        let a = nielsen_fidelity_in_basis(&mixed, &u, OperatorBasis::MatrixUnits).unwrap();
        let b = nielsen_fidelity_in_basis(&mixed, &u, OperatorBasis::Pauli).unwrap();
        let w = nielsen_fidelity_in_basis(&mixed, &u, OperatorBasis::Weyl).unwrap();
        assert!((a - b).abs() < 1e-10);
        assert!((a - w).abs() < 1e-10);
    }

    #[test]
    fn closed_form_for_unitaries() {
        for seed in 0..5 {
            let u = random_unitary(4, seed);
            let v = random_unitary(4, seed + 100);
            let f = nielsen_fidelity(&Channel::unitary(&v), &u).unwrap();
            assert!((f - unitary_fidelity(&v, &u)).abs() < 1e-12);
        }
    }

    #[test]
    fn global_phase_invariance() {
        let u = random_unitary(2, 3);
        let ch = Channel::unitary(&random_unitary(2, 4));
        let f1 = nielsen_fidelity(&ch, &u).unwrap();
        let f2 = nielsen_fidelity(&ch, &u.scale((I * 0.77).exp())).unwrap();
        assert!((f1 - f2).abs() < 1e-14);
    }

    #[test]
    fn non_trace_preserving_rejected() {
        let ch = Channel::from_fn(2, |x| x * c(0.5));
        assert!(matches!(
            nielsen_fidelity(&ch, &Operator::identity(2)),
            Err(Error::NotTracePreserving { .. })
        ));
    }

    #[test]
    fn exact_z_compensation() {
        let z = axis_rotation(0.0, 0.9);
        let u = kron(&pauli_matrix(PauliAxis::X), &Operator::identity(2));
        let actual = &kron(&z, &Operator::identity(2)) * &u;
        let ch = Channel::unitary(&actual);
        let axes = [CompensationAxis {
            site: 0,
            theta: 0.0,
        }];
        let r = compensate_local_phases(&ch, &u, &axes).unwrap();
        assert!(r.raw_fidelity < 0.95);
        assert!((r.compensated_fidelity - 1.0).abs() < 1e-12);
        // the optimiser undoes the rotation: angle ≡ −0.9 modulo 4π, or 2π up to phase
        let phi = r.compensation[0];
        let folded = (phi + 0.9).rem_euclid(2.0 * std::f64::consts::PI);
        assert!(folded < 1e-6 || (folded - 2.0 * std::f64::consts::PI).abs() < 1e-6);
    }

    #[test]
    fn no_axes_means_no_change() {
        let u = random_unitary(4, 1);
        let ch = Channel::unitary(&random_unitary(4, 2));
        let r = compensate_local_phases(&ch, &u, &[]).unwrap();
        assert_eq!(r.raw_fidelity, r.compensated_fidelity);
    }

    #[test]
    fn three_axes_coordinate_search() {
        let axes: Vec<CompensationAxis> = (0..3)
            .map(|site| CompensationAxis {
                site,
                theta: 0.3 * site as f64,
            })
            .collect();
        let u = random_unitary(8, 5);
        let z = local_rotation(3, &axes, &[0.4, 1.3, 2.2]);
        let ch = Channel::unitary(&(&z * &u));
        let r = compensate_local_phases(&ch, &u, &axes).unwrap();
        assert!(r.compensated_fidelity > 1.0 - 1e-9);
    }
}
