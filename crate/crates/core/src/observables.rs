//! Many-body observables: the lifted generators E, D, C, the derived time
//! operator U = ½(D E⁻¹ + E⁻¹ D) and frequency operator Ω = E/(ħN), the
//! Casimir combination, spectral densities, and expectation statistics.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{LabError, Result};
use crate::fock::{BlockStructure, FockSpace, ManyBodyOp, SectorBlock};
use crate::grid::FrequencyGrid;
use crate::linalg::hermitian_inverse;
use crate::spectral::{GeneratorKind, RepKind, Representation};
use crate::states::FieldState;

/// The three lifted conformal generators plus the photon number operator,
/// with enough single-particle context to derive U, Ω, E⁻¹ and the Casimir.
pub struct GeneratorSet {
    rep_kind: RepKind,
    hbar: f64,
    pub energy: ManyBodyOp,
    pub dilatation: ManyBodyOp,
    pub conformal: ManyBodyOp,
    pub number: ManyBodyOp,
    sp_dilatation: DMatrix<C64>,
    space: Arc<FockSpace>,
    // derived operators need per-sector dense inverses; memoized so checks
    // can rebuild them per probe without repaying the factorization
    position_cache: std::sync::OnceLock<ManyBodyOp>,
    energy_inverse_cache: std::sync::OnceLock<ManyBodyOp>,
}

impl GeneratorSet {
    pub fn build(rep: &dyn Representation, space: &Arc<FockSpace>) -> Result<Self> {
        if rep.dim() != space.modes() {
            return Err(LabError::Shape(format!(
                "representation dim {} vs Fock space over {} modes",
                rep.dim(),
                space.modes()
            )));
        }
        let sp_e = rep.generator(GeneratorKind::Energy);
        let sp_d = rep.generator(GeneratorKind::Dilatation);
        let sp_c = rep.generator(GeneratorKind::Conformal);
        Ok(GeneratorSet {
            rep_kind: rep.kind(),
            hbar: rep.hbar(),
            energy: ManyBodyOp::second_quantize(&sp_e, space)?,
            dilatation: ManyBodyOp::second_quantize(&sp_d, space)?,
            conformal: ManyBodyOp::second_quantize(&sp_c, space)?,
            number: ManyBodyOp::number_op(space),
            sp_dilatation: sp_d.matrix,
            space: Arc::clone(space),
            position_cache: std::sync::OnceLock::new(),
            energy_inverse_cache: std::sync::OnceLock::new(),
        })
    }

    pub fn rep_kind(&self) -> RepKind {
        self.rep_kind
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn generator(&self, kind: GeneratorKind) -> &ManyBodyOp {
        match kind {
            GeneratorKind::Energy => &self.energy,
            GeneratorKind::Dilatation => &self.dilatation,
            GeneratorKind::Conformal => &self.conformal,
        }
    }

    /// Diagonal of the energy block on sector `n`; only valid when the
    /// single-particle energy is diagonal (grid realization).
    fn sector_energy_diag(&self, n: usize) -> Vec<f64> {
        match self
            .energy
            .block(n)
            .expect("energy is defined on every sector")
        {
            SectorBlock::Sparse(csr) => csr.diagonal().iter().map(|v| v.re).collect(),
            SectorBlock::Dense(d) => (0..d.nrows()).map(|i| d[(i, i)].re).collect(),
        }
    }

    /// E⁻¹ restricted to the N ≥ 1 sectors; the vacuum block is absent since
    /// E annihilates the vacuum.
    pub fn energy_inverse(&self) -> ManyBodyOp {
        self.energy_inverse_cache
            .get_or_init(|| self.build_energy_inverse())
            .clone()
    }

    fn build_energy_inverse(&self) -> ManyBodyOp {
        let mut blocks: Vec<Option<SectorBlock>> = vec![None];
        for n in 1..=self.space.n_max() {
            let block = match (self.rep_kind, self.energy.block(n).unwrap()) {
                (RepKind::Grid, SectorBlock::Sparse(csr)) => {
                    // the grid energy is diagonal, so inversion is entrywise
                    SectorBlock::Sparse(csr.map_entries(|r, c, v| {
                        debug_assert_eq!(r, c);
                        C64::new(1.0, 0.0) / v
                    }))
                }
                (_, b) => SectorBlock::Dense(hermitian_inverse(&b.to_dense())),
            };
            blocks.push(Some(block));
        }
        ManyBodyOp::from_blocks(
            "E^-1",
            BlockStructure::Conserving,
            blocks,
            Arc::clone(&self.space),
        )
    }

    /// Time operator U = ½(D E⁻¹ + E⁻¹ D) on the N ≥ 1 sectors.
    pub fn position(&self) -> ManyBodyOp {
        self.position_cache
            .get_or_init(|| self.build_position())
            .clone()
    }

    fn build_position(&self) -> ManyBodyOp {
        let mut blocks: Vec<Option<SectorBlock>> = vec![None];
        for n in 1..=self.space.n_max() {
            let d_block = self.dilatation.block(n).unwrap();
            let block = match (self.rep_kind, d_block) {
                (RepKind::Grid, SectorBlock::Sparse(csr)) => {
                    // E is diagonal per sector, so the anticommutator is an
                    // entrywise rescaling of D.
                    let e = self.sector_energy_diag(n);
                    SectorBlock::Sparse(
                        csr.map_entries(|r, c, v| v * (0.5 * (1.0 / e[r] + 1.0 / e[c]))),
                    )
                }
                (_, b) => {
                    let d = b.to_dense();
                    let e_inv = self
                        .energy_inverse_cache
                        .get_or_init(|| self.build_energy_inverse())
                        .block(n)
                        .unwrap()
                        .to_dense();
                    // D and E⁻¹ are hermitian, so E⁻¹D = (DE⁻¹)†
                    let dr = &d * &e_inv;
                    SectorBlock::Dense((&dr + dr.adjoint()) * C64::new(0.5, 0.0))
                }
            };
            blocks.push(Some(block));
        }
        ManyBodyOp::from_blocks(
            "U",
            BlockStructure::Conserving,
            blocks,
            Arc::clone(&self.space),
        )
    }

    /// Frequency operator Ω = E/(ħN) on the N ≥ 1 sectors.
    pub fn frequency(&self) -> ManyBodyOp {
        let mut blocks: Vec<Option<SectorBlock>> = vec![None];
        for n in 1..=self.space.n_max() {
            let scale = C64::new(1.0 / (self.hbar * n as f64), 0.0);
            let block = match self.energy.block(n).unwrap() {
                SectorBlock::Sparse(csr) => SectorBlock::Sparse(csr.scaled(scale)),
                SectorBlock::Dense(m) => SectorBlock::Dense(m * scale),
            };
            blocks.push(Some(block));
        }
        ManyBodyOp::from_blocks(
            "Omega",
            BlockStructure::Conserving,
            blocks,
            Arc::clone(&self.space),
        )
    }

    /// Casimir combination ½(CE + EC) − D² applied on one sector, kept as a
    /// composition of sparse matvecs so it stays cheap on large sectors.
    pub fn casimir_apply(&self, n: usize, x: &DVector<C64>) -> DVector<C64> {
        let e = self.energy.block(n).expect("conserving block");
        let d = self.dilatation.block(n).expect("conserving block");
        let c = self.conformal.block(n).expect("conserving block");
        let ce = c.matvec(&e.matvec(x));
        let ec = e.matvec(&c.matvec(x));
        let dd = d.matvec(&d.matvec(x));
        (ce + ec) * C64::new(0.5, 0.0) - dd
    }

    /// Dense Casimir block, for sectors small enough to eigendecompose.
    pub fn casimir_dense(&self, n: usize) -> DMatrix<C64> {
        let e = self.energy.block(n).unwrap().to_dense();
        let d = self.dilatation.block(n).unwrap().to_dense();
        let c = self.conformal.block(n).unwrap().to_dense();
        (&c * &e + &e * &c) * C64::new(0.5, 0.0) - &d * &d
    }

    /// One-body reduced matrix Γ_jk = ⟨b_j† b_k⟩ of a state; its trace is
    /// the mean photon number.
    pub fn one_body_matrix(&self, state: &FieldState) -> DMatrix<C64> {
        let m = self.space.modes();
        let mut gamma = DMatrix::<C64>::zeros(m, m);
        for (n, amp) in state.sectors().iter().enumerate() {
            let sector = self.space.sector(n);
            for i in 0..sector.dimension() {
                if amp[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                let runs = sector.occupied_runs(i);
                for &(k, n_k) in &runs {
                    // diagonal j = k
                    gamma[(k, k)] += C64::new(n_k as f64, 0.0) * amp[i].norm_sqr();
                    for j in 0..m {
                        if j == k {
                            continue;
                        }
                        let occ_j = runs
                            .iter()
                            .find(|&&(mm, _)| mm == j)
                            .map(|&(_, c)| c)
                            .unwrap_or(0);
                        let target = sector.replace_one(i, k, j).unwrap();
                        let coeff = ((n_k as f64) * (occ_j as f64 + 1.0)).sqrt();
                        gamma[(j, k)] += amp[target].conj() * amp[i] * coeff;
                    }
                }
            }
        }
        gamma
    }
}

/// Mean and variance of a hermitian observable on a state.
#[derive(Debug, Clone, Copy)]
pub struct ObservableStats {
    pub mean: f64,
    pub variance: f64,
}

pub fn expectation(op: &ManyBodyOp, state: &FieldState) -> Result<C64> {
    let applied = op.apply(state.sectors())?;
    Ok(state
        .sectors()
        .iter()
        .zip(&applied)
        .map(|(a, b)| a.dotc(b))
        .sum())
}

/// Mean and variance ⟨A²⟩ − ⟨A⟩² of a hermitian conserving observable.
pub fn expectation_stats(op: &ManyBodyOp, state: &FieldState) -> Result<ObservableStats> {
    let applied = op.apply(state.sectors())?;
    let mean_c: C64 = state
        .sectors()
        .iter()
        .zip(&applied)
        .map(|(a, b)| a.dotc(b))
        .sum();
    let second: f64 = applied.iter().map(|v| v.norm_squared()).sum();
    let scale = second.sqrt().max(1.0);
    if mean_c.im.abs() > 1e-8 * scale {
        return Err(LabError::Contract(format!(
            "variance requested for `{}` but its expectation has imaginary part {:.3e}",
            op.kind_label, mean_c.im
        )));
    }
    Ok(ObservableStats {
        mean: mean_c.re,
        variance: (second - mean_c.re * mean_c.re).max(0.0),
    })
}

/// One row of the spectral-density report.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SpectrumRow {
    pub omega: f64,
    pub weight: f64,
    pub rho0_mean: f64,
    pub rho1_mean: f64,
}

/// Mean energy density ρ0(ω_k) = ħω_k ⟨b_k†b_k⟩ / w_k and the symmetrized
/// dilatation density ρ1(ω_k), both per unit frequency measure.
pub fn spectrum_rows(gens: &GeneratorSet, state: &FieldState) -> Result<Vec<SpectrumRow>> {
    let grid: &Arc<FrequencyGrid> = state.grid().ok_or_else(|| {
        LabError::UnsupportedRep("spectral densities need the frequency-grid realization".into())
    })?;
    if gens.rep_kind() != RepKind::Grid {
        return Err(LabError::UnsupportedRep(
            "spectral densities need grid-realized generators".into(),
        ));
    }
    let gamma = gens.one_body_matrix(state);
    let d = &gens.sp_dilatation;
    let m = grid.modes();
    let mut rows = Vec::with_capacity(m);
    for k in 0..m {
        let w = grid.weight(k);
        let rho0 = grid.hbar() * grid.omega(k) * gamma[(k, k)].re / w;
        // symmetrized diagonal slice of the dilatation bilinear
        let mut slice = 0.0;
        for j in 0..m {
            slice += (d[(k, j)] * gamma[(k, j)]).re;
        }
        rows.push(SpectrumRow {
            omega: grid.omega(k),
            weight: w,
            rho0_mean: rho0,
            rho1_mean: slice / w,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{build_state, StateSpec, WavepacketParams};
    use crate::spectral::LadderRep;

    fn grid_setup(
        modes: usize,
        n_max: usize,
    ) -> (Arc<FrequencyGrid>, Arc<FockSpace>, GeneratorSet) {
        let grid = Arc::new(FrequencyGrid::build(1.0, 9.0, modes).unwrap());
        let space = FockSpace::build(modes, n_max).unwrap();
        let gens = GeneratorSet::build(grid.as_ref(), &space).unwrap();
        (grid, space, gens)
    }

    #[test]
    fn single_photon_frequency_and_position_means() {
        let (grid, space, gens) = grid_setup(192, 1);
        let s = build_state(
            &StateSpec::Single(WavepacketParams::new(5.0, 0.4, 1.0)),
            &grid,
            &space,
        )
        .unwrap();
        let omega = gens.frequency();
        let u = gens.position();
        let st_w = expectation_stats(&omega, &s).unwrap();
        assert!((st_w.mean - 5.0).abs() < 1e-8, "{}", st_w.mean);
        let st_u = expectation_stats(&u, &s).unwrap();
        // linear spectral phase u0·ω marks the packet position, up to the
        // O(Δω²) bias of the centered difference
        assert!((st_u.mean - 1.0).abs() < 5e-3, "{}", st_u.mean);
    }

    #[test]
    fn canonical_pair_near_saturation_for_gaussian() {
        let (grid, space, gens) = grid_setup(256, 1);
        let s = build_state(
            &StateSpec::Single(WavepacketParams::new(5.0, 0.4, 0.0)),
            &grid,
            &space,
        )
        .unwrap();
        let st_e = expectation_stats(&gens.energy, &s).unwrap();
        let st_u = expectation_stats(&gens.position(), &s).unwrap();
        // ΔE ≈ ħσ and ΔU ≈ 1/2σ for an unchirped Gaussian
        assert!((st_e.variance.sqrt() - 0.4).abs() < 1e-3);
        let product = st_e.variance.sqrt() * st_u.variance.sqrt();
        // saturation up to the O(Δω²) closure error of the discrete pair
        assert!(product >= 0.5 * (1.0 - 5e-3), "{product}");
        assert!(product <= 0.5 * 1.01, "{product}");
    }

    #[test]
    fn coherent_number_mean_is_alpha_squared() {
        let (grid, space, gens) = grid_setup(6, 12);
        let s = build_state(
            &StateSpec::Coherent {
                alpha: 1.2,
                packet: WavepacketParams::new(5.0, 0.4, 0.0),
            },
            &grid,
            &space,
        )
        .unwrap();
        let st = expectation_stats(&gens.number, &s).unwrap();
        assert!((st.mean - 1.44).abs() < 1e-6, "{}", st.mean);
        // Poisson statistics: Var N = ⟨N⟩
        assert!((st.variance - 1.44).abs() < 1e-5, "{}", st.variance);
        let gamma = gens.one_body_matrix(&s);
        let trace: f64 = (0..6).map(|k| gamma[(k, k)].re).sum();
        assert!((trace - st.mean).abs() < 1e-10);
    }

    #[test]
    fn frequency_undefined_on_vacuum() {
        let (grid, space, gens) = grid_setup(8, 1);
        let v = build_state(&StateSpec::Vacuum, &grid, &space).unwrap();
        let err = expectation_stats(&gens.frequency(), &v).unwrap_err();
        assert!(matches!(err, LabError::UndefinedOnVacuum(_)), "{err}");
    }

    #[test]
    fn energy_inverse_inverts_energy_off_vacuum() {
        let (grid, space, gens) = grid_setup(16, 2);
        let s = build_state(
            &StateSpec::NPhoton {
                n: 2,
                packet: WavepacketParams::new(5.0, 0.4, 0.0),
            },
            &grid,
            &space,
        )
        .unwrap();
        let e_inv = gens.energy_inverse();
        let back = gens.energy.apply(&e_inv.apply(s.sectors()).unwrap()).unwrap();
        let err: f64 = s
            .sectors()
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).norm_squared())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn spectrum_rows_integrate_to_energy_and_dilatation() {
        let (grid, space, gens) = grid_setup(96, 2);
        let s = build_state(
            &StateSpec::NPhoton {
                n: 2,
                packet: WavepacketParams::new(5.0, 0.4, 0.7),
            },
            &grid,
            &space,
        )
        .unwrap();
        let rows = spectrum_rows(&gens, &s).unwrap();
        let total_e: f64 = rows.iter().map(|r| r.weight * r.rho0_mean).sum();
        let total_d: f64 = rows.iter().map(|r| r.weight * r.rho1_mean).sum();
        let st_e = expectation_stats(&gens.energy, &s).unwrap();
        let st_d = expectation_stats(&gens.dilatation, &s).unwrap();
        assert!((total_e - st_e.mean).abs() < 1e-10, "{total_e} vs {}", st_e.mean);
        assert!((total_d - st_d.mean).abs() < 1e-10, "{total_d} vs {}", st_d.mean);
        // two photons at ω0 = 5 with position phase 0.7: ⟨D⟩ = 2ħω0·u0
        // up to the O(Δω²) bias of the centered difference
        assert!((st_d.mean - 2.0 * 5.0 * 0.7).abs() < 0.06, "{}", st_d.mean);
    }

    #[test]
    fn ladder_position_is_canonical_on_safe_levels() {
        let rep = LadderRep::new(24, 6, 1.0).unwrap();
        let space = FockSpace::build(24, 1).unwrap();
        let gens = GeneratorSet::build(&rep, &space).unwrap();
        let u = gens.position().block(1).unwrap().to_dense();
        let e = gens.energy.block(1).unwrap().to_dense();
        let comm = &e * &u - &u * &e;
        // [E, U] = iħ, checked away from the truncation edge
        for i in 0..16 {
            for j in 0..16 {
                let expect = if i == j {
                    C64::new(0.0, 1.0)
                } else {
                    C64::new(0.0, 0.0)
                };
                assert!((comm[(i, j)] - expect).norm() < 1e-10, "({i},{j})");
            }
        }
    }

    #[test]
    fn casimir_dense_matches_composed_matvec() {
        let (_, _, gens) = grid_setup(10, 2);
        let dense = gens.casimir_dense(2);
        let dim = dense.nrows();
        for col in 0..3 {
            let mut x = DVector::<C64>::zeros(dim);
            x[col * 7 % dim] = C64::new(1.0, 0.0);
            let via_matvec = gens.casimir_apply(2, &x);
            let via_dense = &dense * &x;
            assert!((via_matvec - via_dense).norm() < 1e-10);
        }
    }
}
