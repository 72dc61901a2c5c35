//! Closure of the conformal algebra [T_m, T_n] = iħ(n−m)T_{m+n−1} in both
//! realizations, with a Richardson refinement study on the grid.

use serde_json::json;

use crate::error::Result;
use crate::grid::FrequencyGrid;
use crate::spectral::{algebra_rhs, sp_commutator_residual, GeneratorKind, LadderRep, Representation};

use super::{check_seed, graded_tolerance, CaseResult, Check, VerifyConfig};

const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

fn rep_residual(rep: &dyn Representation, probes: usize, seed: u64) -> Result<f64> {
    let states = rep.probe_states(probes, seed);
    let mut worst = 0.0f64;
    for (m, n) in PAIRS {
        let a = rep.generator(GeneratorKind::ALL[m]);
        let b = rep.generator(GeneratorKind::ALL[n]);
        let rhs = algebra_rhs(rep, m as i32, n as i32);
        worst = worst.max(sp_commutator_residual(&a, &b, &rhs, &states)?);
    }
    Ok(worst)
}

pub(crate) struct AlgebraClosure;

impl Check for AlgebraClosure {
    fn id(&self) -> &'static str {
        "algebra_closure"
    }

    fn law(&self) -> &'static str {
        "[T_m, T_n] = iħ(n−m)T_{m+n−1} for m, n ∈ {0, 1, 2}"
    }

    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        let mut cases = Vec::new();
        if cfg.rep.includes_ladder() {
            let rep = LadderRep::new(cfg.ladder_levels, cfg.ladder_margin, cfg.hbar)?;
            let r = rep_residual(&rep, 6, check_seed(cfg, 1))?;
            cases.push(CaseResult::new(
                json!({"rep": "ladder", "levels": cfg.ladder_levels, "pairs": "all"}),
                r,
                1e-11,
            ));
        }
        if cfg.rep.includes_grid() {
            // refinement triplet for the measured convergence order
            let triplet = [32usize, 64, 128];
            let mut residuals = Vec::new();
            for &m in &triplet {
                let grid =
                    FrequencyGrid::build_with_hbar(cfg.omega_min, cfg.omega_max, m, cfg.hbar)?;
                residuals.push(rep_residual(&grid, 4, check_seed(cfg, 2))?);
            }
            let o1 = (residuals[0] / residuals[1]).log2();
            let o2 = (residuals[1] / residuals[2]).log2();
            let order = 0.5 * (o1 + o2);
            cases.push(
                CaseResult::new(
                    json!({"rep": "grid", "modes": triplet, "pairs": "all"}),
                    (o1 - 2.0).abs().max((o2 - 2.0).abs()),
                    0.2,
                )
                .with_order(order)
                .with_note(json!({"residuals": residuals})),
            );
            // graded absolute residual at the configured grid size
            let grid = FrequencyGrid::build_with_hbar(
                cfg.omega_min,
                cfg.omega_max,
                cfg.modes,
                cfg.hbar,
            )?;
            let r = rep_residual(&grid, 4, check_seed(cfg, 2))?;
            cases.push(CaseResult::new(
                json!({"rep": "grid", "modes": cfg.modes, "pairs": "all"}),
                r,
                graded_tolerance(grid.spacing(), cfg.hbar * cfg.omega_max),
            ));
        }
        Ok(cases)
    }
}
