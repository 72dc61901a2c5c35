//! Structural checks: the mode commutation relations, number invariance of
//! the lifted generators, and vacuum nullity/invariance.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde_json::json;

use crate::error::Result;
use crate::flows::Flow;
use crate::fock::{FockSpace, ManyBodyOp};
use crate::spectral::GeneratorKind;
use crate::states::product_state;

use super::{
    check_seed, grid_ctx, grid_probes, ladder_ctx, ladder_probes, sectors_norm, CaseResult,
    Check, VerifyConfig,
};

/// Exhaustive verification of [b_j, b_k†] = δ_jk on all basis states of the
/// low sectors of a small mode set.
pub(crate) struct ModeCommutator;

impl Check for ModeCommutator {
    fn id(&self) -> &'static str {
        "mode_commutator"
    }

    fn law(&self) -> &'static str {
        "[b_j, b_k†] = δ_jk on every low-sector basis state"
    }

    fn run(&self, _cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        let modes = 5usize;
        let space = FockSpace::build(modes, 3)?;
        let annihilators: Vec<ManyBodyOp> = (0..modes)
            .map(|k| ManyBodyOp::annihilator(&space, k))
            .collect::<Result<Vec<_>>>()?;
        let mut worst = 0.0f64;
        for j in 0..modes {
            for k in 0..modes {
                let bj = &annihilators[j];
                let bk = &annihilators[k];
                for n in 0..=2usize {
                    for i in 0..space.sector(n).dimension() {
                        let mut sectors: Vec<DVector<C64>> = (0..=space.n_max())
                            .map(|s| DVector::zeros(space.sector(s).dimension()))
                            .collect();
                        sectors[n][i] = C64::new(1.0, 0.0);
                        let down_up = bj.apply(&bk.apply_adjoint(&sectors)?)?;
                        let up_down = bk.apply_adjoint(&bj.apply(&sectors)?)?;
                        let mut diff: Vec<DVector<C64>> = down_up
                            .iter()
                            .zip(&up_down)
                            .map(|(a, b)| a - b)
                            .collect();
                        if j == k {
                            diff[n][i] -= C64::new(1.0, 0.0);
                        }
                        worst = worst.max(sectors_norm(&diff));
                    }
                }
            }
        }
        Ok(vec![CaseResult::new(
            json!({"modes": modes, "sectors": "0..=2", "pairs": "all (j,k)"}),
            worst,
            1e-12,
        )])
    }
}

/// [T_m, N] = 0 verified by explicit operator products on every sector.
pub(crate) struct NumberInvariance;

impl Check for NumberInvariance {
    fn id(&self) -> &'static str {
        "number_invariance"
    }

    fn law(&self) -> &'static str {
        "[T_m, N] = 0 for m = 0, 1, 2: the generators conserve photon number"
    }

    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        let mut cases = Vec::new();
        if cfg.rep.includes_grid() {
            let ctx = grid_ctx(cfg, cfg.modes, cfg.n_max)?;
            let mut worst = 0.0f64;
            for n in 1..=cfg.n_max {
                for probe in grid_probes(&ctx, n, 2, check_seed(cfg, 20 + n as u64))? {
                    for kind in GeneratorKind::ALL {
                        let t = ctx.gens.generator(kind);
                        let tn = t.apply(&ctx.gens.number.apply(probe.sectors())?)?;
                        let nt = ctx.gens.number.apply(&t.apply(probe.sectors())?)?;
                        let diff: Vec<_> = tn.iter().zip(&nt).map(|(a, b)| a - b).collect();
                        worst = worst.max(sectors_norm(&diff));
                    }
                }
            }
            // the products are structurally exact; the tolerance only covers
            // roundoff on conformal stencil entries of size ~ωmax/Δω²
            let spacing = ctx.grid.spacing();
            let tol = 64.0 * f64::EPSILON * cfg.omega_max / (spacing * spacing);
            cases.push(CaseResult::new(
                json!({"rep": "grid", "modes": cfg.modes, "sectors": format!("1..={}", cfg.n_max)}),
                worst,
                tol,
            ));
        }
        if cfg.rep.includes_ladder() {
            let ctx = ladder_ctx(cfg, cfg.ladder_levels, cfg.ladder_margin, 2)?;
            let mut worst = 0.0f64;
            for n in 1..=2usize {
                for probe in ladder_probes(&ctx, n, 2, check_seed(cfg, 25 + n as u64))? {
                    for kind in GeneratorKind::ALL {
                        let t = ctx.gens.generator(kind);
                        let tn = t.apply(&ctx.gens.number.apply(probe.sectors())?)?;
                        let nt = ctx.gens.number.apply(&t.apply(probe.sectors())?)?;
                        let diff: Vec<_> = tn.iter().zip(&nt).map(|(a, b)| a - b).collect();
                        worst = worst.max(sectors_norm(&diff));
                    }
                }
            }
            cases.push(CaseResult::new(
                json!({"rep": "ladder", "levels": cfg.ladder_levels, "sectors": "1..=2"}),
                worst,
                1e-13,
            ));
        }
        Ok(cases)
    }
}

/// T_m|0⟩ = 0 exactly, and the vacuum is a fixed point of every finite flow.
pub(crate) struct VacuumNull;

impl Check for VacuumNull {
    fn id(&self) -> &'static str {
        "vacuum_null"
    }

    fn law(&self) -> &'static str {
        "T_m|0⟩ = 0 and exp(isT_m/ħ)|0⟩ = |0⟩ for m = 0, 1, 2"
    }

    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        let ctx = grid_ctx(cfg, cfg.modes.min(32), 2)?;
        let vacuum = product_state(
            &ctx.space,
            Some(std::sync::Arc::clone(&ctx.grid)),
            &nalgebra::DVector::from_element(ctx.space.modes(), C64::new(1.0, 0.0)),
            0,
        )?;
        let mut worst = 0.0f64;
        for kind in GeneratorKind::ALL {
            let op = ctx.gens.generator(kind);
            let applied = op.apply(vacuum.sectors())?;
            worst = worst.max(sectors_norm(&applied));
            let mut flow = Flow::new(op, ctx.gens.hbar());
            let flowed = flow.apply(&vacuum, 0.8)?;
            let diff: Vec<_> = flowed
                .sectors()
                .iter()
                .zip(vacuum.sectors())
                .map(|(a, b)| a - b)
                .collect();
            worst = worst.max(sectors_norm(&diff));
        }
        Ok(vec![CaseResult::new(
            json!({"rep": "grid", "modes": ctx.grid.modes(), "flow_parameter": 0.8}),
            worst,
            1e-12,
        )])
    }
}
