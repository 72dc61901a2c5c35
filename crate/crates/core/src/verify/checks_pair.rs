//! Checks for the canonical pair (E, U), the covariance of U under D, the
//! C-E bracket, the frequency-operator transformation laws, the 1/N
//! commutator floor with its Robertson bound, and the C-U correction series.

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde_json::json;

use crate::error::Result;
use crate::fock::ManyBodyOp;
use crate::observables::{expectation, expectation_stats, GeneratorSet};
use crate::states::{mode_amplitude, product_state, FieldState, WavepacketParams};

use super::{
    anti_expect, check_seed, comm_expect, graded_tolerance, grid_ctx, grid_probes, ladder_ctx,
    ladder_energy_image_probes, ladder_probes, sectors_dot, sectors_norm, CaseResult, Check,
    VerifyConfig,
};

/// Δ² = ½{C,E} − D² applied to every populated sector of a state.
pub(crate) fn casimir_apply_state(
    gens: &GeneratorSet,
    sectors: &[DVector<C64>],
) -> Vec<DVector<C64>> {
    sectors
        .iter()
        .enumerate()
        .map(|(n, v)| {
            if v.norm_squared() == 0.0 {
                v.clone()
            } else {
                gens.casimir_apply(n, v)
            }
        })
        .collect()
}

/// ⟨[E, U]⟩ = iħ on seeded vacuum-orthogonal states.
pub(crate) struct CanonicalEU;

impl Check for CanonicalEU {
    fn id(&self) -> &'static str {
        "canonical_EU"
    }

    fn law(&self) -> &'static str {
        "⟨[E, U]⟩ = iħ on vacuum-orthogonal states: U is conjugate to E"
    }

    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        let mut cases = Vec::new();
        if cfg.rep.includes_grid() {
            let ctx = grid_ctx(cfg, cfg.modes, cfg.n_max)?;
            let u = ctx.gens.position();
            let mut worst = 0.0f64;
            let mut count = 0usize;
            for n in 1..=cfg.n_max {
                for probe in grid_probes(&ctx, n, 4, check_seed(cfg, 30 + n as u64))? {
                    let c = comm_expect(&ctx.gens.energy, &u, &probe)?;
                    worst = worst.max((c - C64::new(0.0, cfg.hbar)).norm());
                    count += 1;
                }
            }
            cases.push(CaseResult::new(
                json!({"rep": "grid", "modes": cfg.modes, "sectors": format!("1..={}", cfg.n_max), "states": count}),
                worst,
                graded_tolerance(ctx.grid.spacing(), cfg.hbar),
            ));
        }
        if cfg.rep.includes_ladder() {
            let ctx = ladder_ctx(cfg, cfg.ladder_levels, cfg.ladder_margin, 2)?;
            let u = ctx.gens.position();
            let mut worst = 0.0f64;
            for n in 1..=2usize {
                for probe in ladder_probes(&ctx, n, 5, check_seed(cfg, 35 + n as u64))? {
                    let c = comm_expect(&ctx.gens.energy, &u, &probe)?;
                    worst = worst.max((c - C64::new(0.0, cfg.hbar)).norm());
                }
            }
            cases.push(CaseResult::new(
                json!({"rep": "ladder", "levels": cfg.ladder_levels, "sectors": "1..=2", "states": 10}),
                worst,
                1e-10 * cfg.hbar.max(1.0),
            ));
        }
        Ok(cases)
    }
}

/// [D, U] = iħU as a state-level operator identity.
pub(crate) struct CovariantDU;

impl Check for CovariantDU {
    fn id(&self) -> &'static str {
        "covariant_DU"
    }

    fn law(&self) -> &'static str {
        "[D, U] = iħU: the time operator rescales covariantly under dilatations"
    }

    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        let residual = |gens: &GeneratorSet, u: &ManyBodyOp, probe: &FieldState| -> Result<f64> {
            let uv = u.apply(probe.sectors())?;
            let duv = gens.dilatation.apply(&uv)?;
            let udv = u.apply(&gens.dilatation.apply(probe.sectors())?)?;
            let ih = C64::new(0.0, gens.hbar());
            let diff: Vec<_> = duv
                .iter()
                .zip(&udv)
                .zip(&uv)
                .map(|((a, b), c)| a - b - c * ih)
                .collect();
            Ok(sectors_norm(&diff) / sectors_norm(&uv).max(1.0))
        };
        let mut cases = Vec::new();
        if cfg.rep.includes_grid() {
            let ctx = grid_ctx(cfg, cfg.modes, 2)?;
            let u = ctx.gens.position();
            let mut worst = 0.0f64;
            for n in 1..=2usize {
                for probe in grid_probes(&ctx, n, 3, check_seed(cfg, 40 + n as u64))? {
                    worst = worst.max(residual(&ctx.gens, &u, &probe)?);
                }
            }
            // the D·U products carry second-derivative probe content, so the
            // Δω² error scale is the squared derivative content of the family
            let s1 = super::packet_probe_content(cfg);
            cases.push(CaseResult::new(
                json!({"rep": "grid", "modes": cfg.modes, "sectors": "1..=2"}),
                worst,
                graded_tolerance(ctx.grid.spacing(), cfg.hbar * s1 * s1),
            ));
        }
        if cfg.rep.includes_ladder() {
            // U is defined on states vanishing at zero frequency: probe in
            // the image of E, where the truncated inverse inside U is exact
            let ctx = ladder_ctx(cfg, cfg.ladder_levels, cfg.ladder_margin, 2)?;
            let u = ctx.gens.position();
            let mut worst = 0.0f64;
            for n in 1..=2usize {
                for probe in
                    ladder_energy_image_probes(&ctx, n, 3, check_seed(cfg, 45 + n as u64), 1)?
                {
                    worst = worst.max(residual(&ctx.gens, &u, &probe)?);
                }
            }
            cases.push(CaseResult::new(
                json!({"rep": "ladder", "levels": cfg.ladder_levels, "sectors": "1..=2"}),
                worst,
                1e-10,
            ));
        }
        Ok(cases)
    }
}

/// ⟨[C, E]⟩ = −2iħ⟨D⟩ = −iħ⟨{E, U}⟩.
pub(crate) struct CoCE;

impl Check for CoCE {
    fn id(&self) -> &'static str {
        "coCE"
    }

    fn law(&self) -> &'static str {
        "⟨[C, E]⟩ = −2iħ⟨D⟩ = −iħ⟨{E, U}⟩"
    }

    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        let residual = |gens: &GeneratorSet, u: &ManyBodyOp, probe: &FieldState| -> Result<f64> {
            let ce = comm_expect(&gens.conformal, &gens.energy, probe)?;
            let d = expectation(&gens.dilatation, probe)?;
            let eu = anti_expect(&gens.energy, u, probe)?;
            let ih = C64::new(0.0, gens.hbar());
            let scale = (2.0 * gens.hbar() * d.norm()).max(1.0);
            let r1 = (ce + ih * d * 2.0).norm();
            let r2 = (ce + ih * eu).norm();
            Ok(r1.max(r2) / scale)
        };
        let mut cases = Vec::new();
        if cfg.rep.includes_grid() {
            let ctx = grid_ctx(cfg, cfg.modes, 2)?;
            let u = ctx.gens.position();
            let mut worst = 0.0f64;
            for n in 1..=2usize {
                for probe in grid_probes(&ctx, n, 3, check_seed(cfg, 50 + n as u64))? {
                    worst = worst.max(residual(&ctx.gens, &u, &probe)?);
                }
            }
            cases.push(CaseResult::new(
                json!({"rep": "grid", "modes": cfg.modes, "sectors": "1..=2"}),
                worst,
                graded_tolerance(ctx.grid.spacing(), cfg.omega_max),
            ));
        }
        if cfg.rep.includes_ladder() {
            let ctx = ladder_ctx(cfg, cfg.ladder_levels, cfg.ladder_margin, 2)?;
            let u = ctx.gens.position();
            let mut worst = 0.0f64;
            for n in 1..=2usize {
                for probe in ladder_probes(&ctx, n, 3, check_seed(cfg, 55 + n as u64))? {
                    worst = worst.max(residual(&ctx.gens, &u, &probe)?);
                }
            }
            cases.push(CaseResult::new(
                json!({"rep": "ladder", "levels": cfg.ladder_levels, "sectors": "1..=2"}),
                worst,
                1e-10,
            ));
        }
        Ok(cases)
    }
}

/// Transformation laws of the frequency operator under D and C.
pub(crate) struct OmegaTransform;

impl Check for OmegaTransform {
    fn id(&self) -> &'static str {
        "omega_transform"
    }

    fn law(&self) -> &'static str {
        "⟨[D, Ω]⟩ = −iħ⟨Ω⟩ and ⟨[C, Ω]⟩ = −iħ⟨{Ω, U}⟩: position-dependent frequency shifts"
    }

    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        let residual = |gens: &GeneratorSet, probe: &FieldState| -> Result<f64> {
            let omega = gens.frequency();
            let u = gens.position();
            let ih = C64::new(0.0, gens.hbar());
            let dw = comm_expect(&gens.dilatation, &omega, probe)?;
            let w = expectation(&omega, probe)?;
            let cw = comm_expect(&gens.conformal, &omega, probe)?;
            let wu = anti_expect(&omega, &u, probe)?;
            let scale = (gens.hbar() * w.norm()).max(1.0);
            let r1 = (dw + ih * w).norm();
            let r2 = (cw + ih * wu).norm();
            Ok(r1.max(r2) / scale)
        };
        let mut cases = Vec::new();
        if cfg.rep.includes_grid() {
            let ctx = grid_ctx(cfg, cfg.modes, 2)?;
            let mut worst = 0.0f64;
            for n in 1..=2usize {
                for probe in grid_probes(&ctx, n, 3, check_seed(cfg, 60 + n as u64))? {
                    worst = worst.max(residual(&ctx.gens, &probe)?);
                }
            }
            cases.push(CaseResult::new(
                json!({"rep": "grid", "modes": cfg.modes, "sectors": "1..=2"}),
                worst,
                graded_tolerance(ctx.grid.spacing(), 1.0),
            ));
        }
        if cfg.rep.includes_ladder() {
            let ctx = ladder_ctx(cfg, cfg.ladder_levels, cfg.ladder_margin, 2)?;
            let mut worst = 0.0f64;
            for n in 1..=2usize {
                for probe in ladder_probes(&ctx, n, 3, check_seed(cfg, 65 + n as u64))? {
                    worst = worst.max(residual(&ctx.gens, &probe)?);
                }
            }
            cases.push(CaseResult::new(
                json!({"rep": "ladder", "levels": cfg.ladder_levels, "sectors": "1..=2"}),
                worst,
                1e-10,
            ));
        }
        Ok(cases)
    }
}

/// Sector-resolved commutator floor ⟨[Ω, U]⟩ = i/N.
pub(crate) struct OmegaUFloor;

impl Check for OmegaUFloor {
    fn id(&self) -> &'static str {
        "omega_u_floor"
    }

    fn law(&self) -> &'static str {
        "⟨[Ω, U]⟩ = i/N on the N-photon sector"
    }

    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        let mut cases = Vec::new();
        if cfg.rep.includes_grid() {
            let ctx = grid_ctx(cfg, cfg.modes, cfg.n_max)?;
            let omega = ctx.gens.frequency();
            let u = ctx.gens.position();
            let mut per_sector = Vec::new();
            let mut worst = 0.0f64;
            for n in 1..=cfg.n_max {
                let mut sector_worst = 0.0f64;
                for probe in grid_probes(&ctx, n, 3, check_seed(cfg, 70 + n as u64))? {
                    let c = comm_expect(&omega, &u, &probe)?;
                    sector_worst = sector_worst.max((c - C64::new(0.0, 1.0 / n as f64)).norm());
                }
                per_sector.push(sector_worst);
                worst = worst.max(sector_worst);
            }
            cases.push(
                CaseResult::new(
                    json!({"rep": "grid", "modes": cfg.modes, "sectors": format!("1..={}", cfg.n_max)}),
                    worst,
                    graded_tolerance(ctx.grid.spacing(), 1.0),
                )
                .with_note(json!({"per_sector_residuals": per_sector})),
            );
        }
        if cfg.rep.includes_ladder() {
            let ctx = ladder_ctx(cfg, cfg.ladder_levels, cfg.ladder_margin, 2)?;
            let omega = ctx.gens.frequency();
            let u = ctx.gens.position();
            let mut worst = 0.0f64;
            for n in 1..=2usize {
                for probe in ladder_probes(&ctx, n, 3, check_seed(cfg, 75 + n as u64))? {
                    let c = comm_expect(&omega, &u, &probe)?;
                    worst = worst.max((c - C64::new(0.0, 1.0 / n as f64)).norm());
                }
            }
            cases.push(CaseResult::new(
                json!({"rep": "ladder", "levels": cfg.ladder_levels, "sectors": "1..=2"}),
                worst,
                1e-10,
            ));
        }
        Ok(cases)
    }
}

/// Robertson bound ΔΩ·ΔU ≥ 1/(2N) on every test state.
pub(crate) struct RobertsonFloor;

impl Check for RobertsonFloor {
    fn id(&self) -> &'static str {
        "robertson_floor"
    }

    fn law(&self) -> &'static str {
        "ΔΩ·ΔU ≥ 1/(2N) on the N-photon sector (Robertson bound of [Ω, U] = i/N)"
    }

    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        let slack = 1.0 - 1e-6;
        let mut cases = Vec::new();
        if cfg.rep.includes_grid() {
            let ctx = grid_ctx(cfg, cfg.modes, cfg.n_max)?;
            let omega = ctx.gens.frequency();
            let u = ctx.gens.position();
            let mut worst = 0.0f64;
            let mut products = Vec::new();
            for n in 1..=cfg.n_max {
                // a chirped packet sits ~40% above the floor, so the O(Δω²)
                // bias of the discrete pair cannot fake a violation
                let sigma = 0.04 * (cfg.omega_max - cfg.omega_min);
                let packet = WavepacketParams {
                    omega0: cfg.center(),
                    sigma,
                    u0: 0.2,
                    chirp: 0.5 / (sigma * sigma),
                };
                let psi = mode_amplitude(&ctx.grid, &packet)?;
                let probe =
                    product_state(&ctx.space, Some(std::sync::Arc::clone(&ctx.grid)), &psi, n)?;
                let st_w = expectation_stats(&omega, &probe)?;
                let st_u = expectation_stats(&u, &probe)?;
                let product = st_w.variance.sqrt() * st_u.variance.sqrt();
                products.push(product);
                worst = worst.max(slack / (2.0 * n as f64) - product);
            }
            cases.push(
                CaseResult::new(
                    json!({"rep": "grid", "modes": cfg.modes, "sectors": format!("1..={}", cfg.n_max), "state": "chirped gaussian product"}),
                    worst.max(0.0),
                    0.0,
                )
                .with_note(json!({"products": products})),
            );
        }
        if cfg.rep.includes_ladder() {
            let ctx = ladder_ctx(cfg, cfg.ladder_levels, cfg.ladder_margin, 2)?;
            let omega = ctx.gens.frequency();
            let u = ctx.gens.position();
            let mut worst = 0.0f64;
            let mut products = Vec::new();
            for n in 1..=2usize {
                for probe in ladder_probes(&ctx, n, 3, check_seed(cfg, 80 + n as u64))? {
                    let st_w = expectation_stats(&omega, &probe)?;
                    let st_u = expectation_stats(&u, &probe)?;
                    let product = st_w.variance.sqrt() * st_u.variance.sqrt();
                    products.push(product);
                    worst = worst.max(slack / (2.0 * n as f64) - product);
                }
            }
            cases.push(
                CaseResult::new(
                    json!({"rep": "ladder", "levels": cfg.ladder_levels, "sectors": "1..=2"}),
                    worst.max(0.0),
                    0.0,
                )
                .with_note(json!({"products": products})),
            );
        }
        Ok(cases)
    }
}

/// The C-U bracket against its quantum correction series.
pub(crate) struct CuCorrection;

impl Check for CuCorrection {
    fn id(&self) -> &'static str {
        "cu_correction"
    }

    fn law(&self) -> &'static str {
        "⟨[C, U]⟩ = iħ(⟨U²⟩ − ⟨Δ²E⁻²⟩ − (ħ²/4)⟨E⁻²⟩): pulse-duration corrections"
    }

    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        let residual = |gens: &GeneratorSet, probe: &FieldState| -> Result<f64> {
            let hbar = gens.hbar();
            let u = gens.position();
            let e_inv = gens.energy_inverse();
            let lhs = comm_expect(&gens.conformal, &u, probe)?;
            let uv = u.apply(probe.sectors())?;
            let u2 = sectors_dot(&uv, &uv).re;
            let einv_v = e_inv.apply(probe.sectors())?;
            let einv2_v = e_inv.apply(&einv_v)?;
            let e2 = sectors_dot(probe.sectors(), &einv2_v).re;
            let cas_v = casimir_apply_state(gens, probe.sectors());
            let d2e2 = sectors_dot(&cas_v, &einv2_v).re;
            let rhs = hbar * (u2 - d2e2 - hbar * hbar / 4.0 * e2);
            let scale = rhs.abs().max(1.0);
            Ok((lhs - C64::new(0.0, rhs)).norm() / scale)
        };
        let mut cases = Vec::new();
        if cfg.rep.includes_grid() {
            let ctx = grid_ctx(cfg, cfg.modes, 2)?;
            let mut worst = 0.0f64;
            for n in 1..=2usize {
                for probe in grid_probes(&ctx, n, 3, check_seed(cfg, 85 + n as u64))? {
                    worst = worst.max(residual(&ctx.gens, &probe)?);
                }
            }
            cases.push(CaseResult::new(
                json!({"rep": "grid", "modes": cfg.modes, "sectors": "1..=2"}),
                worst,
                graded_tolerance(ctx.grid.spacing(), 1.0),
            ));
        }
        if cfg.rep.includes_ladder() {
            // E⁻² laws need probes in the image of E², the level-basis form
            // of the E⁻² domain; there the truncated inverse is exact
            let ctx = ladder_ctx(cfg, cfg.ladder_levels, cfg.ladder_margin, 2)?;
            let mut worst = 0.0f64;
            for n in 1..=2usize {
                for probe in
                    ladder_energy_image_probes(&ctx, n, 3, check_seed(cfg, 90 + n as u64), 2)?
                {
                    worst = worst.max(residual(&ctx.gens, &probe)?);
                }
            }
            cases.push(CaseResult::new(
                json!({"rep": "ladder", "levels": cfg.ladder_levels, "sectors": "1..=2"}),
                worst,
                1e-10,
            ));
        }
        Ok(cases)
    }
}
