//! Generalized Yee-cell stepper for transition-region cells, and the full
//! simulation loop that interleaves it with the conventional stepper.
//!
//! Inside a transition band the update equations acquire two kinds of
//! velocity terms: one-sided ("upwinded") advection derivatives of By and Dx
//! shifted toward the direction of motion, and starred-field combinations
//!
//! ```text
//!   E*x = Ex - v <By>,   H*y = Hy - v <Dx>,   H*z = Hz,
//! ```
//!
//! where `< >` are two-point averages onto the staggered node, also shifted
//! by sgn(v). Storage everywhere holds the physical fields (`ex = dx/eps`,
//! `hy = by/mu`); the starred values a hybrid stencil needs are reconstructed
//! on read with exactly the arithmetic the update equations would have used
//! to store them. Within a band this is bit-identical to storing starred
//! fields, and it makes the band free to move between steps: cells entering
//! or leaving a band need no representation change, and a stencil crossing
//! the band edge converts the neighbor value on the fly, which is the seam
//! exchange between the two region types. With v = 0 every extra term
//! vanishes identically and a hybrid step reproduces the conventional one
//! bit for bit.

use crate::array::Grid2;
use crate::conventional::{
    self, apply_boundary, b_rows, Boundary, FieldState,
};
use crate::diagnostics::{
    apply_initial_pulse, inject_sources, ProbeRecord, ProbeSpec, SourceSpec,
};
use crate::error::SimError;
use crate::grid::{classify_cells, GridSpec, MaterialMap, TransitionRegion};

/// Which stepper handles moving interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Naive scheme: conventional updates everywhere, interfaces move only
    /// through the time dependence of eps. Converges to the wrong (static)
    /// scattering coefficients; kept as the failure reference.
    ConventionalOnly,
    /// Local treatment: generalized updates inside transition bands,
    /// conventional everywhere else.
    LocalHybrid,
}

/// By interpolated to the E node (k, i_e) with the sign-shifted two-point
/// average (the widest stencil of the scheme; rows i - 1/2 map to B row
/// i - 1, clamped at the y edge, which the 1+1D case reduces to row 0).
#[inline(always)]
fn by_advected_for_e(by: &Grid2, k: usize, i_e: usize, beta: f64) -> f64 {
    let ir = if i_e == 0 { 0 } else { i_e - 1 };
    if beta >= 0.0 {
        0.5 * (by.at(k - 2, ir) + by.at(k - 1, ir))
    } else {
        0.5 * (by.at(k, ir) + by.at(k + 1, ir))
    }
}

/// Reconstructed E*x at E node (k, i_e), reading the previous-step By.
#[inline(always)]
fn estar_at(ex: &Grid2, by_prev: &Grid2, k: usize, i_e: usize, beta: f64) -> f64 {
    ex.at(k, i_e) - beta * by_advected_for_e(by_prev, k, i_e, beta)
}

/// Dx interpolated to the B/H node (k+1/2, i+1/2), sign-shifted.
#[inline(always)]
fn dx_advected_for_h(dx: &Grid2, k: usize, i_b: usize, beta: f64) -> f64 {
    if beta >= 0.0 {
        0.5 * (dx.at(k + 1, i_b) + dx.at(k, i_b))
    } else {
        0.5 * (dx.at(k, i_b) + dx.at(k - 1, i_b))
    }
}

/// Reconstructed H*y at B/H node (k+1/2, i+1/2), reading the previous Dx.
#[inline(always)]
fn hstar_at(hy: &Grid2, dx_prev: &Grid2, k: usize, i_b: usize, beta: f64) -> f64 {
    hy.at(k, i_b) - beta * dx_advected_for_h(dx_prev, k, i_b, beta)
}

/// Upwind z-derivative: backward difference for v > 0, forward for v < 0.
#[inline(always)]
fn d_dz_upwind(g: &Grid2, k: usize, i: usize, beta: f64, dz: f64) -> f64 {
    if beta >= 0.0 {
        (g.at(k, i) - g.at(k - 1, i)) / dz
    } else {
        (g.at(k + 1, i) - g.at(k, i)) / dz
    }
}

/// Upwind y-derivative of By at a B node; one-sided differences collapse to
/// zero at the y edges and everywhere in 1+1D.
#[inline(always)]
fn dby_dy_upwind(by: &Grid2, k: usize, i_b: usize, beta: f64, dy: f64) -> f64 {
    if beta >= 0.0 {
        if i_b == 0 {
            0.0
        } else {
            (by.at(k, i_b) - by.at(k, i_b - 1)) / dy
        }
    } else if i_b + 1 >= by.ny() {
        0.0
    } else {
        (by.at(k, i_b + 1) - by.at(k, i_b)) / dy
    }
}

pub(crate) fn update_by_hyb(
    next: &mut FieldState,
    cur: &FieldState,
    spec: &GridSpec,
    region: &TransitionRegion,
) {
    let s_z = spec.dt / spec.dz;
    for i in 0..b_rows(spec) {
        for band in &region.bands[i] {
            let v = band.beta;
            for k in band.k_min..=band.k_max {
                let de = estar_at(&cur.ex, &cur.by, k + 1, i, v)
                    - estar_at(&cur.ex, &cur.by, k, i, v);
                let adv = v * spec.dt * d_dz_upwind(&cur.by, k, i, v, spec.dz);
                next.by.set(k, i, cur.by.at(k, i) - s_z * de - adv);
            }
        }
    }
}

pub(crate) fn update_bz_hyb(
    next: &mut FieldState,
    cur: &FieldState,
    spec: &GridSpec,
    region: &TransitionRegion,
) {
    if spec.ny == 1 {
        return;
    }
    let s_y = spec.dt / spec.dy;
    let FieldState { by: nby, bz: nbz, .. } = next;
    for i in 0..b_rows(spec) {
        for band in &region.bands[i] {
            let v = band.beta;
            for k in band.k_min..=band.k_max {
                let de = estar_at(&cur.ex, &cur.by, k, i + 1, v)
                    - estar_at(&cur.ex, &cur.by, k, i, v);
                // the y-advection reads the By values just written this step
                let adv = v * spec.dt * dby_dy_upwind(nby, k, i, v, spec.dy);
                nbz.set(k, i, cur.bz.at(k, i) + s_y * de + adv);
            }
        }
    }
}

pub(crate) fn update_d_hyb(
    next: &mut FieldState,
    cur: &FieldState,
    spec: &GridSpec,
    region: &TransitionRegion,
) {
    let s_z = spec.dt / spec.dz;
    let s_y = spec.dt / spec.dy;
    let (i_lo, i_hi) = if spec.ny == 1 { (0, 0) } else { (1, spec.ny - 2) };
    let FieldState { dx: ndx, hy: nhy, hz: nhz, .. } = next;
    for i in i_lo..=i_hi {
        for band in &region.bands[i] {
            let v = band.beta;
            for k in band.k_min..=band.k_max {
                let dh = hstar_at(nhy, &cur.dx, k, i, v) - hstar_at(nhy, &cur.dx, k - 1, i, v);
                let curl_y =
                    if spec.ny > 1 { s_y * (nhz.at(k, i) - nhz.at(k, i - 1)) } else { 0.0 };
                let adv = v * spec.dt * d_dz_upwind(&cur.dx, k, i, v, spec.dz);
                ndx.set(k, i, cur.dx.at(k, i) + curl_y - s_z * dh - adv);
            }
        }
    }
}

fn update_h_band(
    next: &mut FieldState,
    map: &MaterialMap,
    spec: &GridSpec,
    region: &TransitionRegion,
    n: usize,
) {
    for i in 0..b_rows(spec) {
        for band in &region.bands[i] {
            for k in band.k_min..=band.k_max {
                let mu = map.eval_mu(spec, k, i, n);
                next.hy.set(k, i, next.by.at(k, i) / mu);
                next.hz.set(k, i, next.bz.at(k, i) / mu);
            }
        }
    }
}

fn update_e_band(
    next: &mut FieldState,
    map: &MaterialMap,
    spec: &GridSpec,
    region: &TransitionRegion,
    n: usize,
) {
    let (i_lo, i_hi) = if spec.ny == 1 { (0, 0) } else { (1, spec.ny - 2) };
    for i in i_lo..=i_hi {
        for band in &region.bands[i] {
            for k in band.k_min..=band.k_max {
                let eps = map.eval_epsilon(spec, k, i, n);
                next.ex.set(k, i, next.dx.at(k, i) / eps);
            }
        }
    }
}

/// Starred field values at a cell, per the symmetric two-point averages.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarredFields {
    pub e_star_x: f64,
    pub h_star_y: f64,
    pub h_star_z: f64,
}

/// Convert stored physical fields at cell (k, i) to starred values for local
/// velocity `v`, using the symmetric averages onto the co-located nodes:
/// `E*x = Ex - v (By[k-1/2] + By[k+1/2])/2`, `H*y = Hy - v (Dx[k] + Dx[k+1])/2`,
/// `H*z = Hz`. Requires `1 <= k <= nz-2`.
pub fn to_starred(state: &FieldState, spec: &GridSpec, k: usize, i: usize, v: f64) -> StarredFields {
    assert!(k >= 1 && k + 1 < spec.nz, "starred conversion needs both z neighbors");
    let ib = i.min(state.by.ny() - 1);
    let by_avg = 0.5 * (state.by.at(k - 1, ib) + state.by.at(k, ib));
    let dx_avg = 0.5 * (state.dx.at(k, i) + state.dx.at(k + 1, i));
    StarredFields {
        e_star_x: state.ex.at(k, i) - v * by_avg,
        h_star_y: state.hy.at(k, ib) - v * dx_avg,
        h_star_z: state.hz.at(k, ib),
    }
}

/// Physical field values at a cell, recovered from the stored state:
/// `Ex = Dx/eps`, `Hy = By/mu`, `Hz = Bz/mu`. This is the inversion used for
/// probing and seam exchange; it holds identically inside and outside
/// transition regions.
pub fn from_starred(
    state: &FieldState,
    map: &MaterialMap,
    spec: &GridSpec,
    k: usize,
    i: usize,
    n: usize,
) -> (f64, f64, f64) {
    let ib = i.min(state.by.ny() - 1);
    let eps = map.eval_epsilon(spec, k, i, n);
    let mu = map.eval_mu(spec, k, ib, n);
    (state.dx.at(k, i) / eps, state.by.at(k, ib) / mu, state.bz.at(k, ib) / mu)
}

/// Advance only the transition-region cells one step with the generalized
/// equations; all other cells keep their previous values (the conventional
/// stepper owns them within a full step).
pub fn step_hybrid(
    state: &mut FieldState,
    scratch: &mut FieldState,
    map: &MaterialMap,
    spec: &GridSpec,
    region: &TransitionRegion,
    n: usize,
) -> Result<(), SimError> {
    scratch.clone_from(state);
    update_by_hyb(scratch, state, spec, region);
    update_bz_hyb(scratch, state, spec, region);
    update_h_band(scratch, map, spec, region, n);
    update_d_hyb(scratch, state, spec, region);
    update_e_band(scratch, map, spec, region, n);
    std::mem::swap(state, scratch);
    Ok(())
}

/// Everything needed to run one simulation.
#[derive(Debug, Clone)]
pub struct RunSetup {
    pub spec: GridSpec,
    pub map: MaterialMap,
    pub scheme: Scheme,
    pub boundary: Boundary,
    pub sources: Vec<SourceSpec>,
    pub probes: Vec<ProbeSpec>,
    /// Steps between non-finite checks.
    pub check_every: usize,
}

impl RunSetup {
    pub fn new(spec: GridSpec, map: MaterialMap) -> Self {
        Self {
            spec,
            map,
            scheme: Scheme::LocalHybrid,
            boundary: Boundary::Absorbing,
            sources: Vec::new(),
            probes: Vec::new(),
            check_every: 25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub probes: Vec<ProbeRecord>,
    pub final_state: FieldState,
    pub steps_run: usize,
}

impl SimOutput {
    pub fn probe(&self, name: &str) -> Option<&ProbeRecord> {
        self.probes.iter().find(|r| r.spec.name == name)
    }
}

/// Run the full time loop: per step, recompute the transition region, update
/// conventional cells with the conventional equations and transition cells
/// with the generalized ones (B -> H -> D -> E with seam conversions on
/// read), inject sources, apply the boundary, record probes.
pub fn run_simulation(setup: &RunSetup) -> Result<SimOutput, SimError> {
    let spec = &setup.spec;
    spec.validate()?;
    let map = &setup.map;

    let mut state = FieldState::new(spec);
    let mut scratch = FieldState::new(spec);
    for src in &setup.sources {
        apply_initial_pulse(&mut state, src, map, spec);
    }

    // initial pulses must not load transition cells
    let e0_max = setup.sources.iter().map(|s| s.e0().abs()).fold(0.0, f64::max);
    if e0_max > 0.0 {
        let region0 = region_for(setup, 1)?;
        for i in 0..spec.ny {
            for band in &region0.bands[i] {
                for k in band.k_min..=band.k_max {
                    if state.ex.at(k, i).abs() > 1e-9 * e0_max {
                        return Err(SimError::SourceInTransitionRegion { k, i, step: 0 });
                    }
                }
            }
        }
    }

    let mut records: Vec<ProbeRecord> =
        setup.probes.iter().cloned().map(ProbeRecord::new).collect();

    for n in 1..=spec.n_steps {
        let region = region_for(setup, n)?;

        conventional::update_by_conv(&mut scratch, &state, spec, &region);
        update_by_hyb(&mut scratch, &state, spec, &region);
        conventional::update_bz_conv(&mut scratch, &state, spec, &region);
        update_bz_hyb(&mut scratch, &state, spec, &region);
        conventional::update_h(&mut scratch, map, spec, n);
        conventional::update_d_conv(&mut scratch, &state, spec, &region);
        update_d_hyb(&mut scratch, &state, spec, &region);
        inject_sources(&mut scratch, &setup.sources, &region, spec, n)?;
        conventional::update_e(&mut scratch, map, spec, n);
        apply_boundary(setup.boundary, &mut scratch, &state, map, spec, n);
        std::mem::swap(&mut state, &mut scratch);

        for r in &mut records {
            r.record(&state, spec, n);
        }
        if n % setup.check_every.max(1) == 0 || n == spec.n_steps {
            if !state.all_finite() {
                return Err(SimError::NonFiniteField { step: n });
            }
        }
    }

    Ok(SimOutput { probes: records, final_state: state, steps_run: spec.n_steps })
}

fn region_for(setup: &RunSetup, n: usize) -> Result<TransitionRegion, SimError> {
    match setup.scheme {
        Scheme::LocalHybrid if !setup.map.interfaces.is_empty() => {
            classify_cells(&setup.map, &setup.spec, n)
        }
        _ => Ok(TransitionRegion::empty(setup.spec.ny)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{InterfaceTrajectory, Medium};

    fn smooth_state(spec: &GridSpec) -> FieldState {
        let mut st = FieldState::new(spec);
        for k in 0..spec.nz {
            let z = spec.z_at(k);
            let g = (-(z - 20.0) * (z - 20.0) / 36.0).exp();
            st.ex.set(k, 0, g * (0.7 * z).cos());
            st.dx.set(k, 0, g * (0.7 * z).cos());
        }
        for k in 0..spec.nz - 1 {
            let z = spec.z_at(k) + 0.5 * spec.dz;
            let g = (-(z - 20.0) * (z - 20.0) / 36.0).exp();
            st.by.set(k, 0, 0.8 * g * (0.7 * z).cos());
            st.hy.set(k, 0, 0.8 * g * (0.7 * z).cos());
        }
        st
    }

    #[test]
    fn to_starred_identity_at_zero_velocity() {
        let spec = GridSpec::new_1d(64, 1.0, 0.5, 10);
        let st = smooth_state(&spec);
        for k in [5, 20, 33] {
            let s = to_starred(&st, &spec, k, 0, 0.0);
            assert_eq!(s.e_star_x, st.ex.at(k, 0));
            assert_eq!(s.h_star_y, st.hy.at(k, 0));
            assert_eq!(s.h_star_z, st.hz.at(k, 0));
        }
    }

    #[test]
    fn to_starred_exact_for_uniform_by() {
        let spec = GridSpec::new_1d(64, 1.0, 0.5, 10);
        let mut st = smooth_state(&spec);
        st.by.fill(0.37);
        let v = -0.25;
        let s = to_starred(&st, &spec, 17, 0, v);
        assert!((s.e_star_x - (st.ex.at(17, 0) - v * 0.37)).abs() < 1e-15);
    }

    #[test]
    fn from_starred_recovers_uniform_d() {
        let spec = GridSpec::new_1d(64, 1.0, 0.5, 10);
        let map = MaterialMap::uniform(Medium::new(2.25, 1.0));
        let mut st = FieldState::new(&spec);
        st.dx.fill(0.9);
        let (e, _, _) = from_starred(&st, &map, &spec, 10, 0, 0);
        assert!((e - 0.4).abs() < 1e-15);
    }

    #[test]
    fn starred_averaging_error_is_second_order() {
        // |to_starred(E) - (Ex - v By at the co-located point)| = O(dz^2):
        // refining the grid by 2 must shrink the residual by about 4.
        let v = 0.3;
        let residual = |dz: f64| -> f64 {
            let nz = (60.0 / dz) as usize;
            let spec = GridSpec::new_1d(nz, dz, 0.4 * dz, 10);
            let mut st = FieldState::new(&spec);
            let f = |z: f64| (0.5 * z).sin() * (-(z - 30.0) * (z - 30.0) / 100.0).exp();
            for k in 0..nz {
                st.ex.set(k, 0, f(spec.z_at(k)) * 0.3);
            }
            for k in 0..nz - 1 {
                st.by.set(k, 0, f(spec.z_at(k) + 0.5 * dz));
            }
            let k = nz / 2;
            let s = to_starred(&st, &spec, k, 0, v);
            let exact = st.ex.at(k, 0) - v * f(spec.z_at(k));
            (s.e_star_x - exact).abs()
        };
        let r1 = residual(0.25);
        let r2 = residual(0.125);
        let ratio = r1 / r2;
        assert!((3.0..5.0).contains(&ratio), "ratio {ratio}, r1 {r1}, r2 {r2}");
    }

    #[test]
    fn hybrid_step_at_zero_velocity_equals_conventional_step() {
        let spec = GridSpec::new_1d(64, 1.0, 0.5, 10);
        let map = MaterialMap::new(
            vec![Medium::new(1.0, 1.0), Medium::new(4.0, 1.0)],
            vec![InterfaceTrajectory::uniform(20.2, 0.0).unwrap()],
        );
        let region = classify_cells(&map, &spec, 1).unwrap();
        assert!(!region.is_empty());

        let st0 = smooth_state(&spec);
        // full step via the interleaved path
        let mut a = st0.clone();
        let mut scratch = FieldState::new(&spec);
        conventional::update_by_conv(&mut scratch, &a, &spec, &region);
        update_by_hyb(&mut scratch, &a, &spec, &region);
        conventional::update_h(&mut scratch, &map, &spec, 1);
        conventional::update_d_conv(&mut scratch, &a, &spec, &region);
        update_d_hyb(&mut scratch, &a, &spec, &region);
        conventional::update_e(&mut scratch, &map, &spec, 1);
        conventional::apply_abc(&mut scratch, &a, &map, &spec, 1);
        std::mem::swap(&mut a, &mut scratch);

        // pure conventional step
        let mut b = st0.clone();
        let empty = TransitionRegion::empty(1);
        conventional::step_conventional(
            &mut b,
            &mut scratch,
            &map,
            &spec,
            1,
            &empty,
            Boundary::Absorbing,
        )
        .unwrap();

        assert_eq!(a.by, b.by);
        assert_eq!(a.dx, b.dx);
        assert_eq!(a.ex, b.ex);
    }
}
