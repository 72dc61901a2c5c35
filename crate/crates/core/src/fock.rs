//! Photon-number sectors over the mode grid and second quantization.
//!
//! A sector basis state is stored as the nondecreasing list of modes carrying
//! its photons (a multiset of length N), enumerated lexicographically so the
//! ordering is deterministic across runs. All three conformal generators are
//! photon-bilinear and therefore block-diagonal across sectors; mode
//! annihilators are the only maps between neighbouring sectors.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{LabError, Result};
use crate::spectral::SingleParticleOp;

/// C(n, k) without intermediate overflow for the sizes used here.
pub fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Occupation-number basis of the N-photon sector over M modes.
#[derive(Debug, Clone)]
pub struct FockSector {
    modes: usize,
    photons: usize,
    /// Basis state i = nondecreasing list of the modes occupied by each photon.
    basis: Vec<Vec<u16>>,
    index: HashMap<Vec<u16>, usize>,
}

impl FockSector {
    pub fn enumerate(modes: usize, photons: usize) -> Result<Self> {
        if modes == 0 {
            return Err(LabError::config("modes", "need at least one mode"));
        }
        if modes > u16::MAX as usize {
            return Err(LabError::config("modes", "mode count exceeds u16 indexing"));
        }
        let dim = binomial((modes + photons - 1) as u64, photons as u64);
        if dim > 50_000_000 {
            return Err(LabError::config(
                "photons",
                format!("sector dimension {dim} too large to enumerate"),
            ));
        }
        let mut basis = Vec::with_capacity(dim as usize);
        let mut current: Vec<u16> = vec![0; photons];
        loop {
            basis.push(current.clone());
            // lexicographic successor of a nondecreasing multiset
            let mut pos = photons;
            while pos > 0 {
                if (current[pos - 1] as usize) < modes - 1 {
                    let v = current[pos - 1] + 1;
                    for slot in current.iter_mut().skip(pos - 1) {
                        *slot = v;
                    }
                    break;
                }
                pos -= 1;
            }
            if pos == 0 {
                break;
            }
        }
        debug_assert_eq!(basis.len() as u128, dim);
        let index = basis
            .iter()
            .enumerate()
            .map(|(i, b)| (b.clone(), i))
            .collect();
        Ok(FockSector {
            modes,
            photons,
            basis,
            index,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn photons(&self) -> usize {
        self.photons
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn state(&self, i: usize) -> &[u16] {
        &self.basis[i]
    }

    pub fn index_of(&self, state: &[u16]) -> Option<usize> {
        self.index.get(state).copied()
    }

    /// Full occupation vector (n_1 .. n_M) of basis state i.
    pub fn occupation(&self, i: usize) -> Vec<u32> {
        let mut occ = vec![0u32; self.modes];
        for &m in &self.basis[i] {
            occ[m as usize] += 1;
        }
        occ
    }

    /// Distinct `(mode, count)` pairs of basis state i.
    pub fn occupied_runs(&self, i: usize) -> Vec<(usize, u32)> {
        let mut runs: Vec<(usize, u32)> = Vec::new();
        for &m in &self.basis[i] {
            match runs.last_mut() {
                Some((mode, count)) if *mode == m as usize => *count += 1,
                _ => runs.push((m as usize, 1)),
            }
        }
        runs
    }

    pub(crate) fn replace_one(&self, i: usize, from: usize, to: usize) -> Option<usize> {
        let src = &self.basis[i];
        let mut dst = Vec::with_capacity(src.len());
        let mut removed = false;
        for &m in src {
            if !removed && m as usize == from {
                removed = true;
                continue;
            }
            dst.push(m);
        }
        debug_assert!(removed);
        let at = dst.partition_point(|&m| (m as usize) < to);
        dst.insert(at, to as u16);
        self.index_of(&dst)
    }

    fn remove_one(&self, i: usize, mode: usize, lower: &FockSector) -> Option<usize> {
        let src = &self.basis[i];
        let mut dst = Vec::with_capacity(src.len() - 1);
        let mut removed = false;
        for &m in src {
            if !removed && m as usize == mode {
                removed = true;
                continue;
            }
            dst.push(m);
        }
        if !removed {
            return None;
        }
        lower.index_of(&dst)
    }
}

/// The direct sum of sectors N = 0 .. n_max, shared by states and operators.
#[derive(Debug)]
pub struct FockSpace {
    modes: usize,
    n_max: usize,
    sectors: Vec<FockSector>,
}

impl FockSpace {
    pub fn build(modes: usize, n_max: usize) -> Result<Arc<Self>> {
        let sectors = (0..=n_max)
            .map(|n| FockSector::enumerate(modes, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(FockSpace {
            modes,
            n_max,
            sectors,
        }))
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn sector(&self, n: usize) -> &FockSector {
        &self.sectors[n]
    }

    pub fn total_dimension(&self) -> usize {
        self.sectors.iter().map(|s| s.dimension()).sum()
    }
}

// ---------------------------------------------------------------------------
// Sparse sector blocks
// ---------------------------------------------------------------------------

/// Minimal CSR matrix; sector blocks rarely need more than a matvec.
#[derive(Debug, Clone)]
pub struct Csr {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: Vec<(usize, usize, C64)>,
    ) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); nrows];
        for (r, c, v) in triplets {
            rows[r].push((c, v));
        }
        let mut indptr = Vec::with_capacity(nrows + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        indptr.push(0);
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
            let mut last: Option<usize> = None;
            for &(c, v) in row.iter() {
                if last == Some(c) {
                    let k = vals.len() - 1;
                    let acc: &mut C64 = &mut vals[k];
                    *acc += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                    last = Some(c);
                }
            }
            indptr.push(cols.len());
        }
        Csr {
            nrows,
            ncols,
            indptr,
            cols,
            vals,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn matvec(&self, x: &DVector<C64>) -> DVector<C64> {
        assert_eq!(x.len(), self.ncols, "csr matvec dimension");
        let mut y = DVector::<C64>::zeros(self.nrows);
        for r in 0..self.nrows {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[r] = acc;
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut a = DMatrix::<C64>::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                a[(r, self.cols[k])] += self.vals[k];
            }
        }
        a
    }

    /// Main diagonal, zero-filled where no entry is stored.
    pub fn diagonal(&self) -> Vec<C64> {
        let mut diag = vec![C64::new(0.0, 0.0); self.nrows.min(self.ncols)];
        for r in 0..diag.len() {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.cols[k] == r {
                    diag[r] = self.vals[k];
                }
            }
        }
        diag
    }

    /// New matrix with entries f(row, col, value).
    pub fn map_entries(&self, f: impl Fn(usize, usize, C64) -> C64) -> Csr {
        let mut out = self.clone();
        for r in 0..self.nrows {
            for k in out.indptr[r]..out.indptr[r + 1] {
                out.vals[k] = f(r, out.cols[k], out.vals[k]);
            }
        }
        out
    }

    pub fn scaled(&self, factor: C64) -> Csr {
        self.map_entries(|_, _, v| v * factor)
    }
}

// ---------------------------------------------------------------------------
// Many-body operators
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockStructure {
    /// One square block per sector; commutes with the number operator.
    Conserving,
    /// Blocks map sector N to N−1 (mode annihilators).
    Lowering,
}

#[derive(Debug, Clone)]
pub enum SectorBlock {
    Sparse(Csr),
    Dense(DMatrix<C64>),
}

impl SectorBlock {
    pub fn nrows(&self) -> usize {
        match self {
            SectorBlock::Sparse(m) => m.nrows(),
            SectorBlock::Dense(m) => m.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            SectorBlock::Sparse(m) => m.ncols(),
            SectorBlock::Dense(m) => m.ncols(),
        }
    }

    pub fn matvec(&self, x: &DVector<C64>) -> DVector<C64> {
        match self {
            SectorBlock::Sparse(m) => m.matvec(x),
            SectorBlock::Dense(m) => m * x,
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match self {
            SectorBlock::Sparse(m) => m.to_dense(),
            SectorBlock::Dense(m) => m.clone(),
        }
    }
}

/// Block-structured operator on the truncated Fock space.
#[derive(Debug, Clone)]
pub struct ManyBodyOp {
    pub kind_label: String,
    pub structure: BlockStructure,
    /// Indexed by source sector N. `None` marks a sector on which the
    /// operator is undefined (the vacuum block of U and Ω).
    blocks: Vec<Option<SectorBlock>>,
    space: Arc<FockSpace>,
}

/// Amplitude threshold below which a sector is treated as numerically empty.
pub const EMPTY_SECTOR_WEIGHT: f64 = 1e-20;

impl ManyBodyOp {
    pub fn from_blocks(
        kind_label: impl Into<String>,
        structure: BlockStructure,
        blocks: Vec<Option<SectorBlock>>,
        space: Arc<FockSpace>,
    ) -> Self {
        ManyBodyOp {
            kind_label: kind_label.into(),
            structure,
            blocks,
            space,
        }
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn block(&self, n: usize) -> Option<&SectorBlock> {
        self.blocks.get(n).and_then(|b| b.as_ref())
    }

    pub fn has_block(&self, n: usize) -> bool {
        self.block(n).is_some()
    }

    /// Second-quantized lift Σ_{jk} A_{jk} b_j† b_k of a hermitian
    /// single-particle operator; normal ordering makes the vacuum block the
    /// 1×1 zero.
    pub fn second_quantize(op: &SingleParticleOp, space: &Arc<FockSpace>) -> Result<Self> {
        if op.matrix.nrows() != space.modes() {
            return Err(LabError::Shape(format!(
                "single-particle dim {} vs {} modes",
                op.matrix.nrows(),
                space.modes()
            )));
        }
        // column-compressed view of the single-particle matrix
        let m = space.modes();
        let mut cols: Vec<Vec<(usize, C64)>> = vec![Vec::new(); m];
        for c in 0..m {
            for r in 0..m {
                let v = op.matrix[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    cols[c].push((r, v));
                }
            }
        }
        let mut blocks = Vec::with_capacity(space.n_max() + 1);
        for n in 0..=space.n_max() {
            let sector = space.sector(n);
            let dim = sector.dimension();
            let mut triplets: Vec<(usize, usize, C64)> = Vec::new();
            for i in 0..dim {
                for (k, n_k) in sector.occupied_runs(i) {
                    for &(j, a_jk) in &cols[k] {
                        if j == k {
                            triplets.push((i, i, a_jk * n_k as f64));
                        } else {
                            let occ_j = sector
                                .occupied_runs(i)
                                .iter()
                                .find(|&&(mm, _)| mm == j)
                                .map(|&(_, c)| c)
                                .unwrap_or(0);
                            let coeff = a_jk * ((n_k as f64) * (occ_j as f64 + 1.0)).sqrt();
                            let target = sector
                                .replace_one(i, k, j)
                                .expect("mode move stays inside the sector");
                            triplets.push((target, i, coeff));
                        }
                    }
                }
            }
            blocks.push(Some(SectorBlock::Sparse(Csr::from_triplets(
                dim, dim, triplets,
            ))));
        }
        Ok(ManyBodyOp {
            kind_label: op.kind_label.clone(),
            structure: BlockStructure::Conserving,
            blocks,
            space: Arc::clone(space),
        })
    }

    /// Mode annihilator b_k: maps sector N to N−1 with amplitude √n_k.
    pub fn annihilator(space: &Arc<FockSpace>, mode: usize) -> Result<Self> {
        if mode >= space.modes() {
            return Err(LabError::config(
                "mode_index",
                format!("mode {mode} out of range for {} modes", space.modes()),
            ));
        }
        let mut blocks: Vec<Option<SectorBlock>> = vec![None]; // nothing below vacuum
        for n in 1..=space.n_max() {
            let upper = space.sector(n);
            let lower = space.sector(n - 1);
            let mut triplets = Vec::new();
            for i in 0..upper.dimension() {
                let occ = upper
                    .occupied_runs(i)
                    .iter()
                    .find(|&&(mm, _)| mm == mode)
                    .map(|&(_, c)| c)
                    .unwrap_or(0);
                if occ > 0 {
                    let target = upper.remove_one(i, mode, lower).expect("lower state exists");
                    triplets.push((target, i, C64::new((occ as f64).sqrt(), 0.0)));
                }
            }
            blocks.push(Some(SectorBlock::Sparse(Csr::from_triplets(
                lower.dimension(),
                upper.dimension(),
                triplets,
            ))));
        }
        Ok(ManyBodyOp {
            kind_label: format!("b[{mode}]"),
            structure: BlockStructure::Lowering,
            blocks,
            space: Arc::clone(space),
        })
    }

    /// Lift of the identity: the number operator, diagonal N per sector.
    pub fn number_op(space: &Arc<FockSpace>) -> Self {
        let blocks = (0..=space.n_max())
            .map(|n| {
                let dim = space.sector(n).dimension();
                let triplets = (0..dim)
                    .map(|i| (i, i, C64::new(n as f64, 0.0)))
                    .collect();
                Some(SectorBlock::Sparse(Csr::from_triplets(dim, dim, triplets)))
            })
            .collect();
        ManyBodyOp {
            kind_label: "N".into(),
            structure: BlockStructure::Conserving,
            blocks,
            space: Arc::clone(space),
        }
    }

    /// Apply to per-sector amplitudes. Conserving operators keep sector
    /// shapes; lowering operators shift every sector down by one.
    pub fn apply(&self, sectors: &[DVector<C64>]) -> Result<Vec<DVector<C64>>> {
        match self.structure {
            BlockStructure::Conserving => {
                let mut out = Vec::with_capacity(sectors.len());
                for (n, amp) in sectors.iter().enumerate() {
                    match self.block(n) {
                        Some(b) => out.push(b.matvec(amp)),
                        None => {
                            if amp.norm_squared() > EMPTY_SECTOR_WEIGHT {
                                return Err(LabError::UndefinedOnVacuum(format!(
                                    "`{}` has no block on sector {n} but the state carries weight {:.3e} there",
                                    self.kind_label,
                                    amp.norm_squared()
                                )));
                            }
                            out.push(DVector::zeros(amp.len()));
                        }
                    }
                }
                Ok(out)
            }
            BlockStructure::Lowering => {
                let mut out: Vec<DVector<C64>> = Vec::with_capacity(sectors.len());
                for (n, amp) in sectors.iter().enumerate() {
                    if n == 0 {
                        continue; // annihilator kills the vacuum sector
                    }
                    let b = self
                        .block(n)
                        .ok_or_else(|| LabError::Shape(format!("missing lowering block {n}")))?;
                    let lowered = b.matvec(amp);
                    if out.len() < n {
                        out.resize_with(n, || DVector::zeros(0));
                    }
                    out[n - 1] = lowered;
                }
                // normalize shapes: fill sector dims
                for n in 0..out.len() {
                    if out[n].len() != self.space.sector(n).dimension() {
                        out[n] = DVector::zeros(self.space.sector(n).dimension());
                    }
                }
                Ok(out)
            }
        }
    }

    /// Adjoint action for lowering blocks (the creator b†).
    pub fn apply_adjoint(&self, sectors: &[DVector<C64>]) -> Result<Vec<DVector<C64>>> {
        match self.structure {
            BlockStructure::Lowering => {
                let n_max = self.space.n_max();
                let mut out: Vec<DVector<C64>> =
                    (0..=n_max.min(sectors.len()))
                        .map(|n| DVector::zeros(self.space.sector(n).dimension()))
                        .collect();
                for (n, amp) in sectors.iter().enumerate() {
                    if n + 1 > n_max {
                        continue;
                    }
                    let b = self
                        .block(n + 1)
                        .ok_or_else(|| LabError::Shape(format!("missing lowering block {}", n + 1)))?;
                    // (b_k)† restricted: sector n -> n+1
                    let dense = b.to_dense(); // blocks are skinny; fine at suite sizes
                    out[n + 1] = dense.adjoint() * amp;
                }
                Ok(out)
            }
            BlockStructure::Conserving => self.apply(sectors),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FrequencyGrid;
    use crate::spectral::{GeneratorKind, RepKind, Representation};

    #[test]
    fn sector_dimensions() {
        assert_eq!(FockSector::enumerate(3, 0).unwrap().dimension(), 1);
        assert_eq!(FockSector::enumerate(3, 2).unwrap().dimension(), 6);
        // exhaustive enumeration oracle for C(7,3) = 35
        let s = FockSector::enumerate(5, 3).unwrap();
        assert_eq!(s.dimension(), 35);
        let mut seen = std::collections::HashSet::new();
        for i in 0..s.dimension() {
            assert!(seen.insert(s.state(i).to_vec()), "duplicate basis state");
            assert!(s.state(i).windows(2).all(|w| w[0] <= w[1]));
        }
        assert_eq!(binomial(7, 3), 35);
    }

    #[test]
    fn enumeration_is_lexicographic_and_stable() {
        let s = FockSector::enumerate(3, 2).unwrap();
        let expect: Vec<Vec<u16>> = vec![
            vec![0, 0],
            vec![0, 1],
            vec![0, 2],
            vec![1, 1],
            vec![1, 2],
            vec![2, 2],
        ];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(s.state(i), &e[..]);
            assert_eq!(s.index_of(e), Some(i));
        }
    }

    fn small_space() -> Arc<FockSpace> {
        FockSpace::build(4, 3).unwrap()
    }

    #[test]
    fn identity_lift_is_number_weighted_identity() {
        let space = small_space();
        let id = SingleParticleOp {
            rep: RepKind::Grid,
            matrix: DMatrix::<C64>::identity(4, 4),
            kind_label: "1".into(),
            hermitian: true,
        };
        let lifted = ManyBodyOp::second_quantize(&id, &space).unwrap();
        for n in 0..=3usize {
            let dense = lifted.block(n).unwrap().to_dense();
            let expect = DMatrix::<C64>::identity(dense.nrows(), dense.ncols())
                * C64::new(n as f64, 0.0);
            assert!(crate::linalg::fro_norm(&(dense - expect)) == 0.0);
        }
    }

    #[test]
    fn one_photon_block_equals_single_particle_matrix() {
        let grid = FrequencyGrid::build(1.0, 3.0, 4).unwrap();
        let space = small_space();
        let d = grid.generator(GeneratorKind::Dilatation);
        let lifted = ManyBodyOp::second_quantize(&d, &space).unwrap();
        let block = lifted.block(1).unwrap().to_dense();
        assert!(crate::linalg::fro_norm(&(block - d.matrix)) < 1e-15);
    }

    #[test]
    fn vacuum_block_is_zero() {
        let grid = FrequencyGrid::build(1.0, 3.0, 4).unwrap();
        let space = small_space();
        for kind in GeneratorKind::ALL {
            let lifted =
                ManyBodyOp::second_quantize(&grid.generator(kind), &space).unwrap();
            let vac = lifted.block(0).unwrap().to_dense();
            assert_eq!(vac.nrows(), 1);
            assert_eq!(vac[(0, 0)], C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn two_photon_block_matches_symmetric_subspace_oracle() {
        // brute-force A⊗1 + 1⊗A restricted to the symmetric subspace
        let grid = FrequencyGrid::build(1.0, 3.0, 4).unwrap();
        let space = FockSpace::build(4, 2).unwrap();
        let a = grid.generator(GeneratorKind::Dilatation);
        let lifted = ManyBodyOp::second_quantize(&a, &space).unwrap();
        let block = lifted.block(2).unwrap().to_dense();

        let sector = space.sector(2);
        let m = 4usize;
        // symmetric embedding of basis state (j ≤ k) into the 2-photon tensor space
        let embed = |i: usize| -> DVector<C64> {
            let st = sector.state(i);
            let (j, k) = (st[0] as usize, st[1] as usize);
            let mut v = DVector::<C64>::zeros(m * m);
            if j == k {
                v[j * m + k] = C64::new(1.0, 0.0);
            } else {
                let r = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                v[j * m + k] = r;
                v[k * m + j] = r;
            }
            v
        };
        let mut two_body = DMatrix::<C64>::zeros(m * m, m * m);
        for r in 0..m {
            for c in 0..m {
                for x in 0..m {
                    two_body[(r * m + x, c * m + x)] += a.matrix[(r, c)];
                    two_body[(x * m + r, x * m + c)] += a.matrix[(r, c)];
                }
            }
        }
        for i in 0..sector.dimension() {
            for j in 0..sector.dimension() {
                let expect = embed(i).dotc(&(&two_body * embed(j)));
                let got = block[(i, j)];
                assert!(
                    (expect - got).norm() < 1e-13,
                    "({i},{j}): {expect} vs {got}"
                );
            }
        }
    }

    #[test]
    fn lift_is_linear() {
        let grid = FrequencyGrid::build(1.0, 3.0, 4).unwrap();
        let space = small_space();
        let d = grid.generator(GeneratorKind::Dilatation);
        let c = grid.generator(GeneratorKind::Conformal);
        let combo = SingleParticleOp {
            rep: RepKind::Grid,
            matrix: &d.matrix * C64::new(0.7, 0.0) + &c.matrix * C64::new(-1.3, 0.0),
            kind_label: "combo".into(),
            hermitian: true,
        };
        let lift_combo = ManyBodyOp::second_quantize(&combo, &space).unwrap();
        let lift_d = ManyBodyOp::second_quantize(&d, &space).unwrap();
        let lift_c = ManyBodyOp::second_quantize(&c, &space).unwrap();
        for n in 0..=3usize {
            let got = lift_combo.block(n).unwrap().to_dense();
            let expect = lift_d.block(n).unwrap().to_dense() * C64::new(0.7, 0.0)
                + lift_c.block(n).unwrap().to_dense() * C64::new(-1.3, 0.0);
            assert!(crate::linalg::fro_norm(&(got - expect)) < 1e-12);
        }
    }

    #[test]
    fn canonical_commutator_on_low_sectors() {
        // [b_j, b_k†] = δ_jk on every basis state of sectors 0..2
        let space = small_space();
        for j in 0..4usize {
            for k in 0..4usize {
                let bj = ManyBodyOp::annihilator(&space, j).unwrap();
                let bk = ManyBodyOp::annihilator(&space, k).unwrap();
                for n in 0..=2usize {
                    let dim = space.sector(n).dimension();
                    for i in 0..dim {
                        let mut sectors: Vec<DVector<C64>> = (0..=space.n_max())
                            .map(|s| DVector::zeros(space.sector(s).dimension()))
                            .collect();
                        sectors[n][i] = C64::new(1.0, 0.0);
                        let created = bk.apply_adjoint(&sectors).unwrap();
                        let down_up = bj.apply(&created).unwrap();
                        let lowered = bj.apply(&sectors).unwrap();
                        let up_down = bk.apply_adjoint(&lowered).unwrap();
                        // (b_j b_k† − b_k† b_j)|state⟩ should be δ_jk |state⟩
                        for s in 0..=2usize {
                            let dim_s = space.sector(s).dimension();
                            for t in 0..dim_s {
                                let a = down_up.get(s).map(|v| v[t]).unwrap_or_default();
                                let b = up_down.get(s).map(|v| v[t]).unwrap_or_default();
                                let expect = if s == n && t == i && j == k {
                                    C64::new(1.0, 0.0)
                                } else {
                                    C64::new(0.0, 0.0)
                                };
                                assert!(
                                    ((a - b) - expect).norm() < 1e-13,
                                    "j={j} k={k} sector {n} state {i}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn annihilator_on_vacuum_is_zero_and_number_eigenstate_roundtrip() {
        let space = small_space();
        let b1 = ManyBodyOp::annihilator(&space, 1).unwrap();
        let mut vac: Vec<DVector<C64>> = (0..=3usize)
            .map(|s| DVector::zeros(space.sector(s).dimension()))
            .collect();
        vac[0][0] = C64::new(1.0, 0.0);
        let killed = b1.apply(&vac).unwrap();
        assert!(killed.iter().all(|v| v.norm() == 0.0));
        // b† then b: occupation-1 state with eigenvalue 1 of b†b
        let created = b1.apply_adjoint(&vac).unwrap();
        let number = b1.apply_adjoint(&b1.apply(&created).unwrap()).unwrap();
        let diff: f64 = created
            .iter()
            .zip(&number)
            .map(|(a, b)| (a - b).norm_squared())
            .sum();
        assert!(diff < 1e-26);
    }

    #[test]
    fn annihilator_index_out_of_range() {
        let space = small_space();
        assert!(ManyBodyOp::annihilator(&space, 4).is_err());
    }
}
