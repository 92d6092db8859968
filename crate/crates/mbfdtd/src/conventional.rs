//! Conventional 2+1D Yee stepper (s-polarization) with a first-order
//! absorbing boundary (Mur 1981), used for all cells outside the transition
//! regions and standalone as the reference "naive" scheme for moving media.
//!
//! Update order within a step is the usual leapfrog B -> H -> D -> E. Step n
//! advances `(B|n-1, D|n-1/2, E|n-1/2)` to `(B|n, D|n+1/2, E|n+1/2)`; the
//! material clock of step n is `t = n dt`.
//!
//! All stored fields are physical. The E slot holds `Dx / eps` and the H
//! slots hold `B / mu` everywhere, including inside transition regions; the
//! generalized stepper reconstructs its starred quantities on the fly (see
//! `hybrid`), which keeps the two regions freely interleavable.

use crate::array::Grid2;
use crate::error::SimError;
use crate::grid::{Band, GridSpec, MaterialMap, TransitionRegion};

/// Staggered field storage.
///
/// `dx`, `ex` live at integer-space nodes `(k dz, i dy)` and half-integer
/// times; `by`, `bz`, `hy`, `hz` at `((k+1/2) dz, (i+1/2) dy)` and integer
/// times. Arrays store both families at index `(k, i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub dx: Grid2,
    pub ex: Grid2,
    pub by: Grid2,
    pub bz: Grid2,
    pub hy: Grid2,
    pub hz: Grid2,
}

impl FieldState {
    pub fn new(spec: &GridSpec) -> Self {
        let nzb = spec.nz - 1;
        let nyb = b_rows(spec);
        Self {
            dx: Grid2::zeros(spec.nz, spec.ny),
            ex: Grid2::zeros(spec.nz, spec.ny),
            by: Grid2::zeros(nzb, nyb),
            bz: Grid2::zeros(nzb, nyb),
            hy: Grid2::zeros(nzb, nyb),
            hz: Grid2::zeros(nzb, nyb),
        }
    }

    pub fn all_finite(&self) -> bool {
        self.dx.all_finite()
            && self.ex.all_finite()
            && self.by.all_finite()
            && self.bz.all_finite()
    }

    /// Total discrete field energy, 1/2 (D.E + B.H) summed over the grid.
    pub fn energy(&self, spec: &GridSpec) -> f64 {
        let cell = spec.dz * spec.dy;
        let mut e = 0.0;
        for (d, x) in self.dx.as_slice().iter().zip(self.ex.as_slice()) {
            e += d * x;
        }
        for (b, h) in self.by.as_slice().iter().zip(self.hy.as_slice()) {
            e += b * h;
        }
        for (b, h) in self.bz.as_slice().iter().zip(self.hz.as_slice()) {
            e += b * h;
        }
        0.5 * e * cell
    }
}

/// Rows of the B/H arrays: ny - 1 in 2D, a single row in 1+1D.
pub fn b_rows(spec: &GridSpec) -> usize {
    if spec.ny > 1 {
        spec.ny - 1
    } else {
        1
    }
}

/// Domain edge treatment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// First-order Mur absorbing boundary on every edge.
    Absorbing,
    /// Perfect electric conductor: Ex = 0 on every edge.
    PerfectConductor,
}

/// Inclusive k-ranges of `[lo, hi]` not covered by any band.
pub(crate) fn complement_ranges(
    bands: &[Band],
    lo: usize,
    hi: usize,
    out: &mut Vec<(usize, usize)>,
) {
    out.clear();
    let mut start = lo;
    for b in bands {
        if b.k_min > start {
            out.push((start, (b.k_min - 1).min(hi)));
        }
        start = start.max(b.k_max + 1);
        if start > hi {
            break;
        }
    }
    if start <= hi {
        out.push((start, hi));
    }
    out.retain(|&(a, b)| a <= b);
}

/// B sub-update, Faraday's law, on conventional cells only.
pub(crate) fn update_by_conv(
    next: &mut FieldState,
    cur: &FieldState,
    spec: &GridSpec,
    region: &TransitionRegion,
) {
    let s_z = spec.dt / spec.dz;
    let mut ranges = Vec::new();
    for i in 0..b_rows(spec) {
        let ex = cur.ex.row(i);
        let by = cur.by.row(i);
        let out = next.by.row_mut(i);
        complement_ranges(&region.bands[i], 0, spec.nz - 2, &mut ranges);
        for &(a, b) in &ranges {
            for k in a..=b {
                out[k] = by[k] - s_z * (ex[k + 1] - ex[k]);
            }
        }
    }
}

pub(crate) fn update_bz_conv(
    next: &mut FieldState,
    cur: &FieldState,
    spec: &GridSpec,
    region: &TransitionRegion,
) {
    if spec.ny == 1 {
        return;
    }
    let s_y = spec.dt / spec.dy;
    let mut ranges = Vec::new();
    for i in 0..b_rows(spec) {
        let ex = cur.ex.row(i);
        let ex_up = cur.ex.row(i + 1);
        let bz = cur.bz.row(i);
        let out = next.bz.row_mut(i);
        complement_ranges(&region.bands[i], 0, spec.nz - 2, &mut ranges);
        for &(a, b) in &ranges {
            for k in a..=b {
                out[k] = bz[k] + s_y * (ex_up[k] - ex[k]);
            }
        }
    }
}

/// H sub-update, constitutive relation H = B / mu, on every cell. Physical
/// storage makes this identical inside and outside transition regions.
pub(crate) fn update_h(next: &mut FieldState, map: &MaterialMap, spec: &GridSpec, n: usize) {
    let uniform_mu = map.media.iter().all(|m| m.mu == 1.0);
    let FieldState { by, bz, hy, hz, .. } = next;
    for i in 0..b_rows(spec) {
        let byr = by.row(i);
        let bzr = bz.row(i);
        let hyr = hy.row_mut(i);
        let hzr = hz.row_mut(i);
        if uniform_mu {
            hyr.copy_from_slice(byr);
            hzr.copy_from_slice(bzr);
        } else {
            for k in 0..spec.nz - 1 {
                let mu = map.eval_mu(spec, k, i, n);
                hyr[k] = byr[k] / mu;
                hzr[k] = bzr[k] / mu;
            }
        }
    }
}

/// D sub-update, Ampere's law, on conventional interior cells.
pub(crate) fn update_d_conv(
    next: &mut FieldState,
    cur: &FieldState,
    spec: &GridSpec,
    region: &TransitionRegion,
) {
    let s_z = spec.dt / spec.dz;
    let s_y = spec.dt / spec.dy;
    let mut ranges = Vec::new();
    let FieldState { dx, hy, hz, .. } = next;
    if spec.ny == 1 {
        let dxr = cur.dx.row(0);
        let hyr = hy.row(0);
        let out = dx.row_mut(0);
        complement_ranges(&region.bands[0], 1, spec.nz - 2, &mut ranges);
        for &(a, b) in &ranges {
            for k in a..=b {
                out[k] = dxr[k] - s_z * (hyr[k] - hyr[k - 1]);
            }
        }
        return;
    }
    for i in 1..spec.ny - 1 {
        let dxr = cur.dx.row(i);
        let hyr = hy.row(i);
        let hzr = hz.row(i);
        let hz_dn = hz.row(i - 1);
        let out = dx.row_mut(i);
        complement_ranges(&region.bands[i], 1, spec.nz - 2, &mut ranges);
        for &(a, b) in &ranges {
            for k in a..=b {
                out[k] = dxr[k] + s_y * (hzr[k] - hz_dn[k]) - s_z * (hyr[k] - hyr[k - 1]);
            }
        }
    }
}

/// E sub-update, constitutive relation E = D / eps, on every interior cell.
pub(crate) fn update_e(next: &mut FieldState, map: &MaterialMap, spec: &GridSpec, n: usize) {
    let (i_lo, i_hi) = if spec.ny == 1 { (0, 0) } else { (1, spec.ny - 2) };
    let FieldState { dx, ex, .. } = next;
    for i in i_lo..=i_hi {
        let dxr = dx.row(i);
        let out = ex.row_mut(i);
        for k in 1..spec.nz - 1 {
            out[k] = dxr[k] / map.eval_epsilon(spec, k, i, n);
        }
    }
}

/// First-order Mur absorbing boundary on the domain edges.
///
/// Applies the one-way wave equation update normal to each edge, using the
/// local wave speed c/n, then restores D = eps E on the touched nodes. The
/// z edges of the y-interior are treated first, then the full y edges, so
/// corners are consistent. Transition regions never reach the edges.
pub fn apply_abc(
    next: &mut FieldState,
    cur: &FieldState,
    map: &MaterialMap,
    spec: &GridSpec,
    n: usize,
) {
    let kz = spec.nz - 1;
    let mur = |c_loc: f64, d: f64| (c_loc * spec.dt - d) / (c_loc * spec.dt + d);

    let (i_lo, i_hi) = if spec.ny == 1 { (0, 0) } else { (1, spec.ny - 2) };
    for i in i_lo..=i_hi {
        let c0 = mur(1.0 / map.medium_at(0.0, spec.y_at(i), spec.t_at(n)).refractive_index(), spec.dz);
        let v0 = cur.ex.at(1, i) + c0 * (next.ex.at(1, i) - cur.ex.at(0, i));
        next.ex.set(0, i, v0);
        next.dx.set(0, i, v0 * map.eval_epsilon(spec, 0, i, n));

        let c1 = mur(
            1.0 / map.medium_at(spec.z_at(kz), spec.y_at(i), spec.t_at(n)).refractive_index(),
            spec.dz,
        );
        let v1 = cur.ex.at(kz - 1, i) + c1 * (next.ex.at(kz - 1, i) - cur.ex.at(kz, i));
        next.ex.set(kz, i, v1);
        next.dx.set(kz, i, v1 * map.eval_epsilon(spec, kz, i, n));
    }

    if spec.ny > 1 {
        let iy = spec.ny - 1;
        for k in 0..spec.nz {
            let c0 = mur(1.0 / map.medium_at(spec.z_at(k), 0.0, spec.t_at(n)).refractive_index(), spec.dy);
            let v0 = cur.ex.at(k, 1) + c0 * (next.ex.at(k, 1) - cur.ex.at(k, 0));
            next.ex.set(k, 0, v0);
            next.dx.set(k, 0, v0 * map.eval_epsilon(spec, k, 0, n));

            let c1 = mur(
                1.0 / map.medium_at(spec.z_at(k), spec.y_at(iy), spec.t_at(n)).refractive_index(),
                spec.dy,
            );
            let v1 = cur.ex.at(k, iy - 1) + c1 * (next.ex.at(k, iy - 1) - cur.ex.at(k, iy));
            next.ex.set(k, iy, v1);
            next.dx.set(k, iy, v1 * map.eval_epsilon(spec, k, iy, n));
        }
    }
}

/// Perfect electric conductor edges: Ex = Dx = 0.
pub fn apply_pec(next: &mut FieldState, spec: &GridSpec) {
    let kz = spec.nz - 1;
    for i in 0..spec.ny {
        for k in [0, kz] {
            next.ex.set(k, i, 0.0);
            next.dx.set(k, i, 0.0);
        }
    }
    if spec.ny > 1 {
        let iy = spec.ny - 1;
        for k in 0..spec.nz {
            for i in [0, iy] {
                next.ex.set(k, i, 0.0);
                next.dx.set(k, i, 0.0);
            }
        }
    }
}

pub fn apply_boundary(
    boundary: Boundary,
    next: &mut FieldState,
    cur: &FieldState,
    map: &MaterialMap,
    spec: &GridSpec,
    n: usize,
) {
    match boundary {
        Boundary::Absorbing => apply_abc(next, cur, map, spec, n),
        Boundary::PerfectConductor => apply_pec(next, spec),
    }
}

/// Advance `state` one full conventional step (B -> H -> D -> E -> edges),
/// skipping any cells inside `mask` (their update belongs to the
/// generalized stepper). `scratch` is the double buffer; the advanced state
/// lands back in `state`.
pub fn step_conventional(
    state: &mut FieldState,
    scratch: &mut FieldState,
    map: &MaterialMap,
    spec: &GridSpec,
    n: usize,
    mask: &TransitionRegion,
    boundary: Boundary,
) -> Result<(), SimError> {
    update_by_conv(scratch, state, spec, mask);
    update_bz_conv(scratch, state, spec, mask);
    update_h(scratch, map, spec, n);
    update_d_conv(scratch, state, spec, mask);
    update_e(scratch, map, spec, n);
    apply_boundary(boundary, scratch, state, map, spec, n);
    std::mem::swap(state, scratch);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{InterfaceTrajectory, Medium};

    fn vacuum() -> MaterialMap {
        MaterialMap::uniform(Medium::new(1.0, 1.0))
    }

    #[test]
    fn zero_fields_stay_exactly_zero() {
        let spec = GridSpec::new_1d(64, 1.0, 0.5, 50);
        let map = vacuum();
        let region = TransitionRegion::empty(1);
        let mut state = FieldState::new(&spec);
        let mut scratch = FieldState::new(&spec);
        for n in 1..=50 {
            step_conventional(&mut state, &mut scratch, &map, &spec, n, &region, Boundary::Absorbing)
                .unwrap();
        }
        assert_eq!(state.ex.max_abs(), 0.0);
        assert_eq!(state.by.max_abs(), 0.0);
    }

    #[test]
    fn interface_e_sample_shared_by_both_sides() {
        // A unit impulse in Ex at the interface cell drives the B nodes on
        // both sides with equal magnitude and opposite sign: the update
        // stencils at k and k+1 read the identical stored sample, which is
        // what enforces tangential-E continuity at a stationary interface.
        let spec = GridSpec::new_1d(64, 1.0, 0.5, 10);
        let map = MaterialMap::new(
            vec![Medium::new(1.0, 1.0), Medium::new(4.0, 1.0)],
            vec![InterfaceTrajectory::uniform(32.0, 0.0).unwrap()],
        );
        let region = TransitionRegion::empty(1);
        let mut state = FieldState::new(&spec);
        state.ex.set(32, 0, 1.0);
        let mut scratch = FieldState::new(&spec);
        step_conventional(&mut state, &mut scratch, &map, &spec, 1, &region, Boundary::Absorbing)
            .unwrap();
        let left = state.by.at(31, 0);
        let right = state.by.at(32, 0);
        assert!(left != 0.0);
        assert_eq!(left, -right);
    }

    #[test]
    fn pure_time_switch_leaves_dx_untouched() {
        // Run to step n0 with eps = 1, then swap in eps = 2.25 for the
        // D-update of step n0+1. Dx after the switch step must be identical
        // to the unswitched run; only E = D/eps changes.
        let spec = GridSpec::new_1d(128, 1.0, 0.5, 100);
        let map_a = MaterialMap::uniform(Medium::new(1.0, 1.0));
        let map_b = MaterialMap::uniform(Medium::new(2.25, 1.0));
        let region = TransitionRegion::empty(1);

        let mut state = FieldState::new(&spec);
        for k in 20..44 {
            let z = spec.z_at(k);
            let arg = 0.5 * (z - 32.0);
            let g = (-((z - 32.0) / 6.0) * ((z - 32.0) / 6.0)).exp();
            state.ex.set(k, 0, g * arg.cos());
        }
        for k in 20..44 {
            let z = spec.z_at(k) + 0.5;
            let g = (-((z - 32.0) / 6.0) * ((z - 32.0) / 6.0)).exp();
            state.by.set(k, 0, g * (0.5 * (z - 32.0)).cos());
        }
        state.dx = state.ex.clone();
        state.hy = state.by.clone();
        let mut scratch = FieldState::new(&spec);
        for n in 1..=30 {
            step_conventional(&mut state, &mut scratch, &map_a, &spec, n, &region, Boundary::Absorbing)
                .unwrap();
        }
        let mut switched = state.clone();
        let mut continued = state.clone();
        step_conventional(&mut switched, &mut scratch, &map_b, &spec, 31, &region, Boundary::PerfectConductor)
            .unwrap();
        step_conventional(&mut continued, &mut scratch, &map_a, &spec, 31, &region, Boundary::PerfectConductor)
            .unwrap();
        assert_eq!(switched.dx, continued.dx);
        // E jumps by exactly the permittivity ratio on interior nodes.
        for k in 1..spec.nz - 1 {
            let a = switched.ex.at(k, 0);
            let b = continued.ex.at(k, 0);
            assert!((a * 2.25 - b).abs() <= 1e-15 * b.abs().max(1.0));
        }
    }

    #[test]
    fn complement_ranges_partition() {
        let bands = vec![
            Band { k_min: 5, k_max: 9, beta: 0.0, interface: 0 },
            Band { k_min: 20, k_max: 24, beta: 0.0, interface: 1 },
        ];
        let mut out = Vec::new();
        complement_ranges(&bands, 0, 30, &mut out);
        assert_eq!(out, vec![(0, 4), (10, 19), (25, 30)]);
        complement_ranges(&bands, 7, 22, &mut out);
        assert_eq!(out, vec![(10, 19)]);
        complement_ranges(&[], 3, 8, &mut out);
        assert_eq!(out, vec![(3, 8)]);
    }
}
