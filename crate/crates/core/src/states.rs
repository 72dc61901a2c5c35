//! Physical states on the truncated Fock space: vacuum, single-photon
//! wavepackets, n-photon products of one wavepacket mode, and truncated
//! coherent states, plus the strict `StateSpec` mini-language used by the CLI.

use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{LabError, Result};
use crate::fock::FockSpace;
use crate::grid::FrequencyGrid;

/// Relative boundary amplitude above which a wavepacket is considered to
/// spill outside the grid.
pub const BOUNDARY_AMPLITUDE_RATIO: f64 = 1e-10;

/// Maximum admissible probability left outside the truncation of a coherent
/// state.
pub const COHERENT_TAIL_LIMIT: f64 = 1e-8;

/// Gaussian wavepacket parameters; `chirp` adds a quadratic spectral phase
/// (not reachable from the CLI mini-language, used by verification probes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavepacketParams {
    pub omega0: f64,
    pub sigma: f64,
    pub u0: f64,
    pub chirp: f64,
}

impl WavepacketParams {
    pub fn new(omega0: f64, sigma: f64, u0: f64) -> Self {
        WavepacketParams {
            omega0,
            sigma,
            u0,
            chirp: 0.0,
        }
    }
}

/// Parsed form of the CLI state mini-language.
#[derive(Debug, Clone, PartialEq)]
pub enum StateSpec {
    Vacuum,
    Single(WavepacketParams),
    NPhoton { n: usize, packet: WavepacketParams },
    Coherent { alpha: f64, packet: WavepacketParams },
}

impl std::str::FromStr for StateSpec {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let (head, rest) = match s.split_once(':') {
            Some((h, r)) => (h, Some(r)),
            None => (s, None),
        };
        let mut fields: std::collections::BTreeMap<&str, f64> = Default::default();
        if let Some(rest) = rest {
            for pair in rest.split(',') {
                let (key, value) = pair.split_once('=').ok_or_else(|| {
                    LabError::config("state", format!("expected key=value, got `{pair}`"))
                })?;
                let parsed: f64 = value.parse().map_err(|_| {
                    LabError::config("state", format!("non-numeric value in `{pair}`"))
                })?;
                if fields.insert(key, parsed).is_some() {
                    return Err(LabError::config(
                        "state",
                        format!("duplicate key `{key}`"),
                    ));
                }
            }
        }
        let mut take = |key: &str| {
            fields.remove(key).ok_or_else(|| {
                LabError::config("state", format!("missing key `{key}` for `{head}`"))
            })
        };
        let spec = match head {
            "vacuum" => StateSpec::Vacuum,
            "single" => StateSpec::Single(WavepacketParams::new(
                take("omega0")?,
                take("sigma")?,
                take("u0")?,
            )),
            "nphoton" => {
                let n = take("n")?;
                if n.fract() != 0.0 || n < 1.0 {
                    return Err(LabError::config("state", "n must be a positive integer"));
                }
                StateSpec::NPhoton {
                    n: n as usize,
                    packet: WavepacketParams::new(take("omega0")?, take("sigma")?, take("u0")?),
                }
            }
            "coherent" => StateSpec::Coherent {
                alpha: take("alpha")?,
                packet: WavepacketParams::new(take("omega0")?, take("sigma")?, take("u0")?),
            },
            other => {
                return Err(LabError::config(
                    "state",
                    format!("unknown state kind `{other}`"),
                ))
            }
        };
        if let Some(key) = fields.keys().next() {
            return Err(LabError::config(
                "state",
                format!("unknown key `{key}` for `{head}`"),
            ));
        }
        Ok(spec)
    }
}

/// Normalized amplitude vector over the direct sum of photon-number sectors.
#[derive(Debug, Clone)]
pub struct FieldState {
    space: Arc<FockSpace>,
    grid: Option<Arc<FrequencyGrid>>,
    sectors: Vec<DVector<C64>>,
    pub norm_tolerance: f64,
    /// Probability lost to the photon-number truncation (coherent states).
    pub truncation_deficit: f64,
}

impl FieldState {
    pub fn from_sectors(
        space: Arc<FockSpace>,
        grid: Option<Arc<FrequencyGrid>>,
        sectors: Vec<DVector<C64>>,
    ) -> Result<Self> {
        if sectors.len() != space.n_max() + 1 {
            return Err(LabError::Shape(format!(
                "{} sector amplitudes for n_max {}",
                sectors.len(),
                space.n_max()
            )));
        }
        for (n, amp) in sectors.iter().enumerate() {
            if amp.len() != space.sector(n).dimension() {
                return Err(LabError::Shape(format!(
                    "sector {n} amplitude of dim {} vs basis dim {}",
                    amp.len(),
                    space.sector(n).dimension()
                )));
            }
        }
        let mut state = FieldState {
            space,
            grid,
            sectors,
            norm_tolerance: 1e-12,
            truncation_deficit: 0.0,
        };
        let n = state.norm();
        if n == 0.0 {
            return Err(LabError::Contract("cannot normalize the zero vector".into()));
        }
        for amp in &mut state.sectors {
            *amp /= C64::new(n, 0.0);
        }
        Ok(state)
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn grid(&self) -> Option<&Arc<FrequencyGrid>> {
        self.grid.as_ref()
    }

    pub fn sectors(&self) -> &[DVector<C64>] {
        &self.sectors
    }

    pub fn sector(&self, n: usize) -> &DVector<C64> {
        &self.sectors[n]
    }

    pub fn norm(&self) -> f64 {
        self.sectors
            .iter()
            .map(|v| v.norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn sector_weight(&self, n: usize) -> f64 {
        self.sectors[n].norm_squared()
    }

    pub fn vacuum_weight(&self) -> f64 {
        self.sector_weight(0)
    }

    pub fn inner(&self, other: &FieldState) -> C64 {
        self.sectors
            .iter()
            .zip(&other.sectors)
            .map(|(a, b)| a.dotc(b))
            .sum()
    }

    /// Renormalized restriction to sectors N ≥ 1 plus the removed vacuum
    /// probability. Errors when the state is essentially vacuum, where U and
    /// Ω do not exist.
    pub fn project_out_vacuum(&self) -> Result<(FieldState, f64)> {
        let w = self.vacuum_weight();
        if w > 1.0 - 1e-12 {
            return Err(LabError::UndefinedOnVacuum(
                "state is essentially vacuum (E = 0); U and Ω are undefined".into(),
            ));
        }
        let mut sectors = self.sectors.clone();
        sectors[0] = DVector::zeros(sectors[0].len());
        let mut projected = FieldState::from_sectors(
            Arc::clone(&self.space),
            self.grid.clone(),
            sectors,
        )?;
        projected.truncation_deficit = self.truncation_deficit;
        Ok((projected, w))
    }

    /// Mean occupation of each mode, Σ_N ⟨n_k⟩ weighted over sectors.
    pub fn mode_occupancy(&self) -> Vec<f64> {
        let mut occ = vec![0.0; self.space.modes()];
        for (n, amp) in self.sectors.iter().enumerate() {
            let sector = self.space.sector(n);
            for i in 0..sector.dimension() {
                let p = amp[i].norm_sqr();
                if p == 0.0 {
                    continue;
                }
                for (mode, count) in sector.occupied_runs(i) {
                    occ[mode] += p * count as f64;
                }
            }
        }
        occ
    }

    /// √(edge occupancy / peak occupancy), the many-body analogue of the
    /// boundary amplitude ratio.
    pub fn boundary_amplitude_ratio(&self) -> f64 {
        let occ = self.mode_occupancy();
        let peak = occ.iter().cloned().fold(0.0f64, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let edge = occ[0].max(*occ.last().unwrap());
        (edge / peak).sqrt()
    }
}

/// Single-photon spectral amplitude ψ_k ∝ √w_k · exp(−(ω−ω0)²/4σ²) ·
/// exp(i(ω u0 + chirp·(ω−ω0)²)), normalized, with the boundary support check.
pub fn mode_amplitude(grid: &FrequencyGrid, p: &WavepacketParams) -> Result<DVector<C64>> {
    if !(p.sigma > 0.0) {
        return Err(LabError::config("sigma", "spectral width must be positive"));
    }
    if !(p.omega0 > 0.0) {
        return Err(LabError::config("omega0", "carrier frequency must be positive"));
    }
    let v = DVector::<C64>::from_fn(grid.modes(), |k, _| {
        let w = grid.omega(k);
        let x = w - p.omega0;
        let mag = grid.weight(k).sqrt() * (-x * x / (4.0 * p.sigma * p.sigma)).exp();
        C64::from_polar(mag, p.u0 * w + p.chirp * x * x)
    });
    let peak = v.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let edge = v[0].norm().max(v[grid.modes() - 1].norm());
    if peak == 0.0 || edge > BOUNDARY_AMPLITUDE_RATIO * peak {
        return Err(LabError::Support(format!(
            "wavepacket (ω0 = {}, σ = {}) spills outside the grid [{}, {}]; \
             widen the grid or narrow the packet",
            p.omega0,
            p.sigma,
            grid.omega_min(),
            grid.omega_max()
        )));
    }
    let n = v.norm();
    Ok(v / C64::new(n, 0.0))
}

fn empty_sectors(space: &FockSpace) -> Vec<DVector<C64>> {
    (0..=space.n_max())
        .map(|n| DVector::zeros(space.sector(n).dimension()))
        .collect()
}

/// Amplitudes of the N-photon product of one normalized wavepacket mode in
/// the occupation basis: √(N!/Πn_j!) Π ψ_j^{n_j}.
fn product_sector(space: &FockSpace, psi: &DVector<C64>, n: usize) -> DVector<C64> {
    let sector = space.sector(n);
    DVector::from_fn(sector.dimension(), |i, _| {
        let mut amp = C64::new(1.0, 0.0);
        let mut multiplicity = 1.0f64;
        let mut placed = 0u32;
        for (mode, count) in sector.occupied_runs(i) {
            for _ in 0..count {
                amp *= psi[mode];
                placed += 1;
            }
            // running multinomial  N! / Π n_j!
            let mut fact = 1.0;
            for c in 1..=count {
                fact *= c as f64;
            }
            multiplicity *= fact;
        }
        let mut n_fact = 1.0;
        for c in 1..=placed {
            n_fact *= c as f64;
        }
        amp * C64::new((n_fact / multiplicity).sqrt(), 0.0)
    })
}

/// Normalized state with all `n` photons occupying one normalized mode
/// vector; works for any single-particle basis, so verification probes use
/// it for both the grid and the ladder realizations.
pub fn product_state(
    space: &Arc<FockSpace>,
    grid: Option<Arc<FrequencyGrid>>,
    psi: &DVector<C64>,
    n: usize,
) -> Result<FieldState> {
    if psi.len() != space.modes() {
        return Err(LabError::Shape(format!(
            "mode vector of dim {} vs Fock space over {} modes",
            psi.len(),
            space.modes()
        )));
    }
    if n > space.n_max() {
        return Err(LabError::config(
            "n",
            format!("{n} photons exceed n_max = {}", space.n_max()),
        ));
    }
    let mut sectors = empty_sectors(space);
    if n == 0 {
        sectors[0][0] = C64::new(1.0, 0.0);
    } else {
        sectors[n] = product_sector(space, psi, n);
    }
    FieldState::from_sectors(Arc::clone(space), grid, sectors)
}

/// Build the state described by `spec` on the given grid and Fock space.
pub fn build_state(
    spec: &StateSpec,
    grid: &Arc<FrequencyGrid>,
    space: &Arc<FockSpace>,
) -> Result<FieldState> {
    if grid.modes() != space.modes() {
        return Err(LabError::Shape(format!(
            "grid of {} modes vs Fock space over {} modes",
            grid.modes(),
            space.modes()
        )));
    }
    let mut sectors = empty_sectors(space);
    let mut deficit = 0.0;
    match spec {
        StateSpec::Vacuum => {
            sectors[0][0] = C64::new(1.0, 0.0);
        }
        StateSpec::Single(p) => {
            if space.n_max() < 1 {
                return Err(LabError::config("n_max", "need n_max ≥ 1 for a photon"));
            }
            sectors[1] = mode_amplitude(grid, p)?;
        }
        StateSpec::NPhoton { n, packet } => {
            if *n > space.n_max() {
                return Err(LabError::config(
                    "n",
                    format!("{n} photons exceed n_max = {}", space.n_max()),
                ));
            }
            let psi = mode_amplitude(grid, packet)?;
            sectors[*n] = product_sector(space, &psi, *n);
        }
        StateSpec::Coherent { alpha, packet } => {
            let psi = mode_amplitude(grid, packet)?;
            let a2 = alpha * alpha;
            let mut covered = 0.0;
            let mut log_term = -a2; // ln of e^{−α²} α^{2N} / N!
            for n in 0..=space.n_max() {
                if n > 0 {
                    log_term += a2.ln() - (n as f64).ln();
                }
                covered += log_term.exp();
            }
            deficit = (1.0 - covered).max(0.0);
            if deficit > COHERENT_TAIL_LIMIT {
                return Err(LabError::Truncation(format!(
                    "coherent state |α|² = {a2} leaves probability {deficit:.3e} above \
                     n_max = {}; raise n_max",
                    space.n_max()
                )));
            }
            let mut log_amp = -a2 / 2.0; // ln of e^{−α²/2} α^N / √N!
            for n in 0..=space.n_max() {
                if n > 0 {
                    log_amp += alpha.abs().ln() - 0.5 * (n as f64).ln();
                }
                let coeff = C64::new(if *alpha < 0.0 && n % 2 == 1 { -1.0 } else { 1.0 }, 0.0)
                    * C64::new(log_amp.exp(), 0.0);
                sectors[n] = product_sector(space, &psi, n) * coeff;
            }
        }
    }
    let mut state = FieldState::from_sectors(Arc::clone(space), Some(Arc::clone(grid)), sectors)?;
    state.truncation_deficit = deficit;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::str::FromStr;

    fn setup(modes: usize, n_max: usize) -> (Arc<FrequencyGrid>, Arc<FockSpace>) {
        let grid = Arc::new(FrequencyGrid::build(1.0, 9.0, modes).unwrap());
        let space = FockSpace::build(modes, n_max).unwrap();
        (grid, space)
    }

    #[test]
    fn spec_parsing_is_strict() {
        assert_eq!(StateSpec::from_str("vacuum").unwrap(), StateSpec::Vacuum);
        let s = StateSpec::from_str("single:omega0=5,sigma=0.4,u0=0").unwrap();
        assert_eq!(
            s,
            StateSpec::Single(WavepacketParams::new(5.0, 0.4, 0.0))
        );
        assert!(StateSpec::from_str("single:omega0=5,sigma=0.4").is_err());
        assert!(StateSpec::from_str("single:omega0=5,sigma=0.4,u0=0,bad=1").is_err());
        assert!(StateSpec::from_str("squeezed:r=1").is_err());
        assert!(StateSpec::from_str("nphoton:n=2.5,omega0=5,sigma=0.4,u0=0").is_err());
        let c = StateSpec::from_str("coherent:alpha=1.2,omega0=5,sigma=0.4,u0=0.3").unwrap();
        match c {
            StateSpec::Coherent { alpha, packet } => {
                assert_eq!(alpha, 1.2);
                assert_eq!(packet.u0, 0.3);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn vacuum_state() {
        let (grid, space) = setup(8, 2);
        let v = build_state(&StateSpec::Vacuum, &grid, &space).unwrap();
        assert_eq!(v.sector(0)[0], C64::new(1.0, 0.0));
        assert_eq!(v.vacuum_weight(), 1.0);
        assert!((v.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_photon_mean_energy() {
        let (grid, space) = setup(128, 1);
        let s = build_state(
            &StateSpec::Single(WavepacketParams::new(5.0, 0.4, 0.0)),
            &grid,
            &space,
        )
        .unwrap();
        let mean_e: f64 = s
            .sector(1)
            .iter()
            .enumerate()
            .map(|(k, a)| grid.hbar() * grid.omega(k) * a.norm_sqr())
            .sum();
        // symmetric Gaussian spectrum: ⟨E⟩ = ħω0 up to boundary/discretization dust
        assert!((mean_e - 5.0).abs() < 1e-8, "{mean_e}");
    }

    #[test]
    fn spilling_wavepacket_is_rejected() {
        let (grid, space) = setup(32, 1);
        let err = build_state(
            &StateSpec::Single(WavepacketParams::new(8.5, 0.8, 0.0)),
            &grid,
            &space,
        )
        .unwrap_err();
        assert!(err.to_string().contains("widen the grid"), "{err}");
    }

    #[test]
    fn coherent_poisson_weights_and_vacuum_projection() {
        let (grid, space) = setup(6, 12);
        let s = build_state(
            &StateSpec::Coherent {
                alpha: 1.2,
                packet: WavepacketParams::new(5.0, 0.4, 0.0),
            },
            &grid,
            &space,
        )
        .unwrap();
        assert!(s.truncation_deficit < COHERENT_TAIL_LIMIT);
        let a2: f64 = 1.44;
        let mut expect = (-a2).exp();
        for n in 0..=6usize {
            if n > 0 {
                expect *= a2 / n as f64;
            }
            assert!(
                (s.sector_weight(n) - expect).abs() < 1e-7,
                "sector {n}: {} vs {expect}",
                s.sector_weight(n)
            );
        }
        // vacuum weight e^{−1.44} ≈ 0.2369 (frozen from the Poisson oracle)
        assert!((s.vacuum_weight() - 0.236927758682122).abs() < 1e-7);
        let (projected, w) = s.project_out_vacuum().unwrap();
        assert!((w - s.vacuum_weight()).abs() < 1e-15);
        assert_eq!(projected.vacuum_weight(), 0.0);
        assert!((projected.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_tail_too_heavy_errors() {
        let (grid, space) = setup(6, 4);
        let err = build_state(
            &StateSpec::Coherent {
                alpha: 1.2,
                packet: WavepacketParams::new(5.0, 0.4, 0.0),
            },
            &grid,
            &space,
        )
        .unwrap_err();
        assert!(matches!(err, LabError::Truncation(_)), "{err}");
    }

    #[test]
    fn vacuum_cannot_be_projected() {
        let (grid, space) = setup(8, 1);
        let v = build_state(&StateSpec::Vacuum, &grid, &space).unwrap();
        assert!(matches!(
            v.project_out_vacuum(),
            Err(LabError::UndefinedOnVacuum(_))
        ));
    }

    #[test]
    fn single_photon_projection_is_identity() {
        let (grid, space) = setup(64, 2);
        let s = build_state(
            &StateSpec::Single(WavepacketParams::new(5.0, 0.4, 1.0)),
            &grid,
            &space,
        )
        .unwrap();
        let (p, w) = s.project_out_vacuum().unwrap();
        assert_eq!(w, 0.0);
        assert!((p.inner(&s).re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn nphoton_state_is_normalized_with_correct_sector() {
        let (grid, space) = setup(24, 3);
        let s = build_state(
            &StateSpec::NPhoton {
                n: 3,
                packet: WavepacketParams::new(5.0, 0.4, 0.0),
            },
            &grid,
            &space,
        )
        .unwrap();
        assert!((s.sector_weight(3) - 1.0).abs() < 1e-12);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }
}
