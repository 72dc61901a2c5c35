//! Finite frame transformations: classical phase-space maps for reference
//! events, exponentiated generator flows on the Fock space, and semiclassical
//! transfer scenarios comparing the two.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{LabError, Result};
use crate::fock::{FockSpace, ManyBodyOp, SectorBlock};
use crate::linalg::{hermitian_eigen, lanczos_exp_multiply, HermitianEigen};
use crate::observables::{expectation_stats, GeneratorSet};
use crate::spectral::GeneratorKind;
use crate::states::FieldState;

/// Largest sector dimension flowed through a dense eigendecomposition;
/// larger sectors fall back to Krylov propagation.
pub const DENSE_FLOW_LIMIT: usize = 700;

/// Krylov tolerance for the large-sector propagator.
pub const KRYLOV_TOL: f64 = 1e-12;

/// A classical reference event: position u (light-cone time) and frequency.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ClassicalEvent {
    pub u: f64,
    pub omega: f64,
}

/// Classical action of a finite frame transformation with parameter `s`:
/// translations shift u, dilatations rescale u and ω oppositely, and the
/// conformal map accelerates the frame with a horizon at s·u = 1.
pub fn classical_map(kind: GeneratorKind, s: f64, ev: ClassicalEvent) -> Result<ClassicalEvent> {
    match kind {
        GeneratorKind::Energy => Ok(ClassicalEvent {
            u: ev.u + s,
            omega: ev.omega,
        }),
        GeneratorKind::Dilatation => Ok(ClassicalEvent {
            u: s.exp() * ev.u,
            omega: (-s).exp() * ev.omega,
        }),
        GeneratorKind::Conformal => {
            let denom = 1.0 - s * ev.u;
            if denom <= 1e-9 {
                return Err(LabError::Domain(format!(
                    "conformal parameter s = {s} puts the event at u = {} beyond the horizon \
                     (1 - s·u = {denom:.3e})",
                    ev.u
                )));
            }
            Ok(ClassicalEvent {
                u: ev.u / denom,
                omega: ev.omega * denom * denom,
            })
        }
    }
}

/// Reusable propagator for one conserving generator: per-sector dense
/// eigendecompositions where affordable, Krylov matvecs elsewhere.
pub struct Flow<'a> {
    op: &'a ManyBodyOp,
    hbar: f64,
    dense_limit: usize,
    eigs: Vec<Option<HermitianEigen>>,
}

impl<'a> Flow<'a> {
    pub fn new(op: &'a ManyBodyOp, hbar: f64) -> Self {
        Flow::with_dense_limit(op, hbar, DENSE_FLOW_LIMIT)
    }

    pub fn with_dense_limit(op: &'a ManyBodyOp, hbar: f64, dense_limit: usize) -> Self {
        let eigs = (0..=op.space().n_max()).map(|_| None).collect();
        Flow {
            op,
            hbar,
            dense_limit,
            eigs,
        }
    }

    fn eig(&mut self, n: usize, block: &SectorBlock) -> &HermitianEigen {
        if self.eigs[n].is_none() {
            self.eigs[n] = Some(hermitian_eigen(&block.to_dense()));
        }
        self.eigs[n].as_ref().unwrap()
    }

    /// exp(+i·s·G/ħ) applied to every sector of `state`.
    pub fn apply(&mut self, state: &FieldState, s: f64) -> Result<FieldState> {
        let space = self.op.space();
        let t = s / self.hbar;
        let mut sectors = Vec::with_capacity(state.sectors().len());
        for (n, amp) in state.sectors().iter().enumerate() {
            if amp.norm_squared() == 0.0 {
                sectors.push(amp.clone());
                continue;
            }
            let block = match self.op.block(n) {
                Some(b) => b,
                None => {
                    return Err(LabError::Contract(format!(
                        "flow generator `{}` has no block on sector {n}",
                        self.op.kind_label
                    )))
                }
            };
            let flowed = if amp.len() <= self.dense_limit {
                self.eig(n, &block.clone()).apply_exp(t, amp)
            } else {
                lanczos_exp_multiply(|x| block.matvec(x), amp, t, KRYLOV_TOL)
            };
            sectors.push(flowed);
        }
        let mut out = FieldState::from_sectors(
            std::sync::Arc::clone(space),
            state.grid().cloned(),
            sectors,
        )?;
        out.truncation_deficit = state.truncation_deficit;
        Ok(out)
    }
}

/// Largest boundary amplitude ratio tolerated after a flow on the grid;
/// beyond it the packet has drifted into the discretization edge.
pub const FLOW_SPILL_LIMIT: f64 = 1e-6;

/// Flow with a post-hoc support check: errors when the transformed packet
/// leaks onto the boundary modes of the grid.
pub fn flow_checked(
    flow: &mut Flow,
    state: &FieldState,
    s: f64,
) -> Result<FieldState> {
    let out = flow.apply(state, s)?;
    if out.grid().is_some() {
        let ratio = out.boundary_amplitude_ratio();
        if ratio > FLOW_SPILL_LIMIT {
            return Err(LabError::Support(format!(
                "flow parameter s = {s} pushes the state onto the grid boundary \
                 (edge amplitude ratio {ratio:.3e}); widen the grid or reduce s"
            )));
        }
    }
    Ok(out)
}

/// Symmetric-power oracle for two-photon flows: fold a sector-2 amplitude
/// into the symmetric matrix Ψ, conjugate with the one-photon matrix as
/// Ψ → UΨUᵀ, and unfold.
pub fn symmetric_power_apply(
    space: &FockSpace,
    one_photon: &DMatrix<C64>,
    amp2: &DVector<C64>,
) -> Result<DVector<C64>> {
    let m = space.modes();
    if one_photon.nrows() != m {
        return Err(LabError::Shape(format!(
            "one-photon matrix dim {} vs {} modes",
            one_photon.nrows(),
            m
        )));
    }
    let sector = space.sector(2);
    if amp2.len() != sector.dimension() {
        return Err(LabError::Shape(format!(
            "sector-2 amplitude dim {} vs basis dim {}",
            amp2.len(),
            sector.dimension()
        )));
    }
    let sqrt2 = 2.0f64.sqrt();
    let mut psi = DMatrix::<C64>::zeros(m, m);
    for i in 0..sector.dimension() {
        let st = sector.state(i);
        let (j, k) = (st[0] as usize, st[1] as usize);
        if j == k {
            psi[(j, j)] = amp2[i];
        } else {
            let half = amp2[i] / C64::new(sqrt2, 0.0);
            psi[(j, k)] = half;
            psi[(k, j)] = half;
        }
    }
    let rotated = one_photon * psi * one_photon.transpose();
    let mut out = DVector::<C64>::zeros(sector.dimension());
    for i in 0..sector.dimension() {
        let st = sector.state(i);
        let (j, k) = (st[0] as usize, st[1] as usize);
        out[i] = if j == k {
            rotated[(j, j)]
        } else {
            rotated[(j, k)] * C64::new(sqrt2, 0.0)
        };
    }
    Ok(out)
}

/// One sampled point of a transfer scenario.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TrajectoryRow {
    pub s: f64,
    pub mean_u: f64,
    pub mean_omega: f64,
    pub var_u: f64,
    pub var_omega: f64,
    pub classical_u: f64,
    pub classical_omega: f64,
    pub vacuum_weight: f64,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TransferResult {
    pub generator: String,
    pub s_total: f64,
    pub steps: usize,
    pub rows: Vec<TrajectoryRow>,
}

/// Flow a state to `s_total` in `steps` increments, tracking the quantum
/// means/variances of U and Ω against the classical map seeded from the
/// initial quantum means.
pub fn transfer_scenario(
    gens: &GeneratorSet,
    state: &FieldState,
    kind: GeneratorKind,
    s_total: f64,
    steps: usize,
) -> Result<TransferResult> {
    if steps == 0 {
        return Err(LabError::config("steps", "need at least one step"));
    }
    let u_op = gens.position();
    let omega_op = gens.frequency();
    let mut flow = Flow::new(gens.generator(kind), gens.hbar());

    let mut rows = Vec::with_capacity(steps + 1);
    let mut current = state.clone();
    let mut classical: Option<ClassicalEvent> = None;
    for step in 0..=steps {
        let s = s_total * step as f64 / steps as f64;
        let (projected, vacuum_weight) = current.project_out_vacuum()?;
        let st_u = expectation_stats(&u_op, &projected)?;
        let st_w = expectation_stats(&omega_op, &projected)?;
        let ev0 = *classical.get_or_insert(ClassicalEvent {
            u: st_u.mean,
            omega: st_w.mean,
        });
        let ev = classical_map(kind, s, ev0)?;
        rows.push(TrajectoryRow {
            s,
            mean_u: st_u.mean,
            mean_omega: st_w.mean,
            var_u: st_u.variance,
            var_omega: st_w.variance,
            classical_u: ev.u,
            classical_omega: ev.omega,
            vacuum_weight,
        });
        if step < steps {
            current = flow_checked(&mut flow, state, s_total * (step + 1) as f64 / steps as f64)?;
        }
    }
    Ok(TransferResult {
        generator: gens.generator(kind).kind_label.clone(),
        s_total,
        steps,
        rows,
    })
}
