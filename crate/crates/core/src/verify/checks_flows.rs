//! Finite-flow checks: the Doppler laws of the dilatation and translation
//! flows, the semiclassical 2ωu frequency-shift law of the conformal flow,
//! and translation invariance of the pulse-duration corrections.

use std::sync::Arc;

use serde_json::json;

use crate::error::Result;
use crate::flows::Flow;
use crate::observables::{expectation, expectation_stats, GeneratorSet};
use crate::states::{mode_amplitude, product_state, FieldState, WavepacketParams};

use super::checks_pair::casimir_apply_state;
use super::{
    check_seed, comm_expect, graded_tolerance, grid_ctx, ladder_ctx, ladder_decaying_probe,
    sectors_dot, CaseResult, Check, VerifyConfig,
};

/// Ladder size used by flow checks: exponentials spread the state across
/// levels, so they get a much deeper safe margin than commutator checks.
const FLOW_LEVELS: usize = 96;
const FLOW_MARGIN: usize = 36;

/// Dilatation redshift ⟨Ω⟩ → e^{−s}⟨Ω⟩ and exact translation covariance.
pub(crate) struct DopplerFlow;

impl Check for DopplerFlow {
    fn id(&self) -> &'static str {
        "doppler_flow"
    }

    fn law(&self) -> &'static str {
        "dilatation flow: ⟨Ω⟩ → e^{−s}⟨Ω⟩; translation flow: ⟨U⟩ → ⟨U⟩ + s with ⟨Ω⟩, ΔΩ, ΔU fixed"
    }

    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        let mut cases = Vec::new();
        if cfg.rep.includes_grid() {
            // fine grid: the acceptance tolerance 1e−3 needs Δω² below ~1e−3
            let modes = 384usize;
            let ctx = grid_ctx(cfg, modes, 1)?;
            let packet = WavepacketParams::new(
                cfg.center(),
                0.05 * (cfg.omega_max - cfg.omega_min),
                0.0,
            );
            let psi = mode_amplitude(&ctx.grid, &packet)?;
            let state = product_state(&ctx.space, Some(Arc::clone(&ctx.grid)), &psi, 1)?;
            let s = 0.3;
            let mut flow = Flow::new(&ctx.gens.dilatation, ctx.gens.hbar());
            let flowed = flow.apply(&state, s)?;
            let omega = ctx.gens.frequency();
            let mean = expectation_stats(&omega, &flowed)?.mean;
            let r = (mean / packet.omega0 - (-s).exp()).abs();
            cases.push(CaseResult::new(
                json!({"rep": "grid", "modes": modes, "flow": "dilatation", "s": s,
                       "omega0": packet.omega0}),
                r,
                1e-3,
            ));
        }
        if cfg.rep.includes_ladder() {
            let ctx = ladder_ctx(cfg, FLOW_LEVELS, FLOW_MARGIN, 1)?;
            let probe = ladder_decaying_probe(&ctx, 0.35, check_seed(cfg, 130))?;
            let s = 0.05;
            let mut flow = Flow::new(&ctx.gens.energy, ctx.gens.hbar());
            let flowed = flow.apply(&probe, s)?;
            let u = ctx.gens.position();
            let omega = ctx.gens.frequency();
            let (u0, u1) = (
                expectation_stats(&u, &probe)?,
                expectation_stats(&u, &flowed)?,
            );
            let (w0, w1) = (
                expectation_stats(&omega, &probe)?,
                expectation_stats(&omega, &flowed)?,
            );
            cases.push(CaseResult::new(
                json!({"rep": "ladder", "levels": FLOW_LEVELS, "flow": "translation", "s": s,
                       "quantity": "shift of <U>"}),
                (u1.mean - u0.mean - s).abs(),
                1e-6,
            ));
            let invariance = (w1.mean - w0.mean)
                .abs()
                .max((w1.variance.sqrt() - w0.variance.sqrt()).abs())
                .max((u1.variance.sqrt() - u0.variance.sqrt()).abs());
            cases.push(CaseResult::new(
                json!({"rep": "ladder", "levels": FLOW_LEVELS, "flow": "translation", "s": s,
                       "quantity": "invariance of <Omega>, dOmega, dU"}),
                invariance,
                1e-9,
            ));
        }
        Ok(cases)
    }
}

/// The semiclassical 2ωu law of the conformal flow.
pub(crate) struct ConformalShift2wu;

impl Check for ConformalShift2wu {
    fn id(&self) -> &'static str {
        "conformal_shift_2wu"
    }

    fn law(&self) -> &'static str {
        "d⟨E⟩/ds under the conformal flow = (i/ħ)⟨[E, C]⟩ = −2⟨D⟩, with |⟨D⟩| = ħN̄ω0|u0| on narrowband pulses"
    }

    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        let mut cases = Vec::new();
        if cfg.rep.includes_ladder() {
            let ctx = ladder_ctx(cfg, cfg.ladder_levels, cfg.ladder_margin, 1)?;
            let probe = ladder_decaying_probe(&ctx, 0.6, check_seed(cfg, 140))?;
            let mut flow = Flow::new(&ctx.gens.conformal, ctx.gens.hbar());
            let h = 0.02;
            let mean_e = |flow: &mut Flow, s: f64| -> Result<f64> {
                let flowed = flow.apply(&probe, s)?;
                Ok(expectation_stats(&ctx.gens.energy, &flowed)?.mean)
            };
            // fourth-order central difference of ⟨E(s)⟩ at s = 0
            let deriv = (8.0 * (mean_e(&mut flow, h)? - mean_e(&mut flow, -h)?)
                - (mean_e(&mut flow, 2.0 * h)? - mean_e(&mut flow, -2.0 * h)?))
                / (12.0 * h);
            let comm = comm_expect(&ctx.gens.energy, &ctx.gens.conformal, &probe)?;
            let rhs = (comm * num_complex::Complex64::new(0.0, 1.0 / cfg.hbar)).re;
            let mean_d = expectation(&ctx.gens.dilatation, &probe)?.re;
            let r = (deriv - rhs).abs() / rhs.abs().max(1e-6);
            cases.push(
                CaseResult::new(
                    json!({"rep": "ladder", "levels": cfg.ladder_levels, "flow": "conformal",
                           "stencil_h": h}),
                    r,
                    1e-6,
                )
                .with_note(json!({"derivative": deriv, "commutator_rate": rhs,
                                  "minus_two_mean_D": -2.0 * mean_d})),
            );
        }
        if cfg.rep.includes_grid() {
            // |⟨D⟩| = ħ N̄ ω0 |u0| on narrowband pulses; the O(Δω²) bias of D
            // must sit below the 5·(ΔΩ/⟨Ω⟩)² allowance, hence the finer grid
            let modes = cfg.modes.max(128);
            let ctx = grid_ctx(cfg, modes, 2)?;
            let width = cfg.omega_max - cfg.omega_min;
            let packet = WavepacketParams::new(cfg.center(), 0.0375 * width, 0.5);
            let psi = mode_amplitude(&ctx.grid, &packet)?;
            let mut worst = 0.0f64;
            let mut ratios = Vec::new();
            for n in 1..=2usize {
                let state = product_state(&ctx.space, Some(Arc::clone(&ctx.grid)), &psi, n)?;
                let mean_d = expectation_stats(&ctx.gens.dilatation, &state)?.mean;
                let ratio = mean_d.abs()
                    / (cfg.hbar * n as f64 * packet.omega0 * packet.u0.abs());
                ratios.push(ratio);
                worst = worst.max((ratio - 1.0).abs());
            }
            let spread = packet.sigma / packet.omega0;
            cases.push(
                CaseResult::new(
                    json!({"rep": "grid", "modes": modes, "sectors": "1..=2",
                           "omega0": packet.omega0, "sigma": packet.sigma, "u0": packet.u0}),
                    worst,
                    5.0 * spread * spread,
                )
                .with_note(json!({"ratios": ratios})),
            );
        }
        Ok(cases)
    }
}

/// ⟨E⁻²⟩ and ⟨Δ²E⁻²⟩ are unchanged when the pulse is delayed.
pub(crate) struct TranslationInvarianceOfCorrections;

fn corrections(gens: &GeneratorSet, state: &FieldState) -> Result<(f64, f64)> {
    let e_inv = gens.energy_inverse();
    let einv_v = e_inv.apply(state.sectors())?;
    let einv2_v = e_inv.apply(&einv_v)?;
    let e2 = sectors_dot(state.sectors(), &einv2_v).re;
    let cas_v = casimir_apply_state(gens, state.sectors());
    let d2e2 = sectors_dot(&cas_v, &einv2_v).re;
    Ok((e2, d2e2))
}

impl Check for TranslationInvarianceOfCorrections {
    fn id(&self) -> &'static str {
        "translation_invariance_of_corrections"
    }

    fn law(&self) -> &'static str {
        "⟨E⁻²⟩ and ⟨Δ²E⁻²⟩ are invariant under the translation flow"
    }

    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        let mut cases = Vec::new();
        if cfg.rep.includes_grid() {
            let ctx = grid_ctx(cfg, cfg.modes, 1)?;
            let width = cfg.omega_max - cfg.omega_min;
            let sigma = 0.04 * width;
            let packet = WavepacketParams {
                omega0: cfg.center(),
                sigma,
                u0: 0.3,
                chirp: 0.2 / (sigma * sigma),
            };
            let psi = mode_amplitude(&ctx.grid, &packet)?;
            let state = product_state(&ctx.space, Some(Arc::clone(&ctx.grid)), &psi, 1)?;
            let mut flow = Flow::new(&ctx.gens.energy, ctx.gens.hbar());
            let moved = flow.apply(&state, 0.4)?;
            let (e2_a, d2e2_a) = corrections(&ctx.gens, &state)?;
            let (e2_b, d2e2_b) = corrections(&ctx.gens, &moved)?;
            // E⁻² commutes with the diagonal grid energy exactly
            cases.push(CaseResult::new(
                json!({"rep": "grid", "modes": cfg.modes, "s": 0.4, "quantity": "<E^-2>"}),
                (e2_a - e2_b).abs(),
                1e-12,
            ));
            // Δ² commutes with E only up to the discretization
            cases.push(CaseResult::new(
                json!({"rep": "grid", "modes": cfg.modes, "s": 0.4, "quantity": "<Delta^2 E^-2>"}),
                (d2e2_a - d2e2_b).abs(),
                graded_tolerance(ctx.grid.spacing(), 1.0),
            ));
        }
        if cfg.rep.includes_ladder() {
            let ctx = ladder_ctx(cfg, FLOW_LEVELS, FLOW_MARGIN, 1)?;
            let probe = ladder_decaying_probe(&ctx, 0.6, check_seed(cfg, 150))?;
            let mut flow = Flow::new(&ctx.gens.energy, ctx.gens.hbar());
            let moved = flow.apply(&probe, 0.05)?;
            let (e2_a, d2e2_a) = corrections(&ctx.gens, &probe)?;
            let (e2_b, d2e2_b) = corrections(&ctx.gens, &moved)?;
            cases.push(CaseResult::new(
                json!({"rep": "ladder", "levels": FLOW_LEVELS, "s": 0.05,
                       "quantity": "<E^-2> and <Delta^2 E^-2>"}),
                (e2_a - e2_b).abs().max((d2e2_a - d2e2_b).abs()),
                1e-10,
            ));
        }
        Ok(cases)
    }
}
