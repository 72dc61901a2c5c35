//! Spectral-density checks: the pointwise transport law of the energy
//! density under D and C flows (with a refinement study), and the partition
//! identities tying the densities back to ⟨E⟩ and ⟨D⟩.

use std::sync::Arc;

use serde_json::json;

use crate::error::Result;
use crate::observables::{expectation_stats, spectrum_rows};
use crate::states::{build_state, mode_amplitude, product_state, StateSpec, WavepacketParams};

use super::{grid_ctx, CaseResult, Check, VerifyConfig};

/// Narrowband chirped single-photon packet used by the density checks.
fn density_packet(cfg: &VerifyConfig) -> WavepacketParams {
    let sigma = 0.05 * (cfg.omega_max - cfg.omega_min);
    WavepacketParams {
        omega0: cfg.center(),
        sigma,
        u0: 0.5,
        chirp: 0.3 / (sigma * sigma),
    }
}

/// Worst relative pointwise transport error at one grid resolution, for both
/// the D law (against ∂_ω ρ0) and the C law (against ∂_ω ρ1).
fn transport_residual(cfg: &VerifyConfig, modes: usize) -> Result<f64> {
    let ctx = grid_ctx(cfg, modes, 1)?;
    let psi = mode_amplitude(&ctx.grid, &density_packet(cfg))?;
    let state = product_state(&ctx.space, Some(Arc::clone(&ctx.grid)), &psi, 1)?;
    let rows = spectrum_rows(&ctx.gens, &state)?;
    let hbar = cfg.hbar;
    let dw = ctx.grid.spacing();
    let amp = state.sector(1);
    let d_amp = ctx.gens.dilatation.block(1).unwrap().matvec(amp);
    let c_amp = ctx.gens.conformal.block(1).unwrap().matvec(amp);
    // ⟨[A, ρ̂0(ω_k)]⟩ = 2i·Im(conj((Aψ)_k)·ψ_k)·ħω_k/w_k for the pointwise
    // density operator ρ̂0(ω_k) = (ħω_k/w_k)|k⟩⟨k|
    let mut worst = 0.0f64;
    for (a_psi, factor, rhs_of) in [
        (&d_amp, 1.0, 0usize),  // D law against ∂_ω ρ0
        (&c_amp, 2.0, 1usize),  // C law against ∂_ω ρ1
    ] {
        let mut max_err = 0.0f64;
        let mut max_rhs = 0.0f64;
        for k in 2..modes - 2 {
            let w = ctx.grid.weight(k);
            let omega = ctx.grid.omega(k);
            let lhs = 2.0 * (a_psi[k].conj() * amp[k]).im * hbar * omega / w;
            let (prev, next) = match rhs_of {
                0 => (rows[k - 1].rho0_mean, rows[k + 1].rho0_mean),
                _ => (rows[k - 1].rho1_mean, rows[k + 1].rho1_mean),
            };
            let rhs = factor * hbar * omega * (next - prev) / (2.0 * dw);
            max_err = max_err.max((lhs - rhs).abs());
            max_rhs = max_rhs.max(rhs.abs());
        }
        worst = worst.max(max_err / max_rhs.max(1e-300));
    }
    Ok(worst)
}

/// Pointwise transport of the energy density under D and C, converging at
/// second order under grid refinement.
pub(crate) struct DensityTransport;

impl Check for DensityTransport {
    fn id(&self) -> &'static str {
        "density_transport"
    }

    fn law(&self) -> &'static str {
        "⟨[T_1, ρ0(ω)]⟩ = iħω ∂_ω⟨ρ0⟩ and ⟨[T_2, ρ0(ω)]⟩ = 2iħω ∂_ω⟨ρ1⟩"
    }

    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        if !cfg.rep.includes_grid() {
            return Ok(Vec::new());
        }
        let triplet = [64usize, 128, 256];
        let mut residuals = Vec::new();
        for &m in &triplet {
            residuals.push(transport_residual(cfg, m)?);
        }
        let o1 = (residuals[0] / residuals[1]).log2();
        let o2 = (residuals[1] / residuals[2]).log2();
        let order = o1.min(o2);
        Ok(vec![CaseResult::new(
            json!({"rep": "grid", "modes": triplet, "state": "chirped narrowband single photon"}),
            (1.8 - order).max(0.0),
            0.0,
        )
        .with_order(order)
        .with_note(json!({"relative_residuals": residuals}))])
    }
}

/// Weighted sums of the densities recover ⟨E⟩ and ⟨D⟩; both densities vanish
/// identically in vacuum.
pub(crate) struct DensityPartition;

impl Check for DensityPartition {
    fn id(&self) -> &'static str {
        "density_partition"
    }

    fn law(&self) -> &'static str {
        "Σ_k w_k ρ0(ω_k) = ⟨E⟩ and Σ_k w_k ρ1(ω_k) = ⟨D⟩; ρ0 = ρ1 = 0 in vacuum"
    }

    fn run(&self, cfg: &VerifyConfig) -> Result<Vec<CaseResult>> {
        if !cfg.rep.includes_grid() {
            return Ok(Vec::new());
        }
        let n_max = cfg.n_max.min(3);
        let ctx = grid_ctx(cfg, cfg.modes, n_max)?;
        let packet = density_packet(cfg);
        let mut specs = vec![StateSpec::Vacuum, StateSpec::Single(packet)];
        for n in 2..=n_max {
            specs.push(StateSpec::NPhoton { n, packet });
        }
        let mut worst = 0.0f64;
        let mut scale = 1.0f64;
        for spec in &specs {
            let state = build_state(spec, &ctx.grid, &ctx.space)?;
            let rows = spectrum_rows(&ctx.gens, &state)?;
            let total_e: f64 = rows.iter().map(|r| r.weight * r.rho0_mean).sum();
            let total_d: f64 = rows.iter().map(|r| r.weight * r.rho1_mean).sum();
            if matches!(spec, StateSpec::Vacuum) {
                let peak = rows
                    .iter()
                    .map(|r| r.rho0_mean.abs().max(r.rho1_mean.abs()))
                    .fold(0.0f64, f64::max);
                worst = worst.max(peak);
                continue;
            }
            let st_e = expectation_stats(&ctx.gens.energy, &state)?;
            let st_d = expectation_stats(&ctx.gens.dilatation, &state)?;
            worst = worst
                .max((total_e - st_e.mean).abs())
                .max((total_d - st_d.mean).abs());
            scale = scale.max(st_e.mean.abs());
        }
        Ok(vec![CaseResult::new(
            json!({"rep": "grid", "modes": cfg.modes, "states": specs.len(),
                   "sectors": format!("0..={n_max}")}),
            worst,
            1e-10 * scale,
        )])
    }
}
