//! Computational grid, material assignment, interface trajectories and the
//! per-step classification of cells into conventional vs. transition regions.
//!
//! Staggering convention (natural units, s-polarization):
//!
//! ```text
//!   Dx, Ex   at (k dz,         i dy)          and half-integer time steps
//!   By, Bz,  at ((k+1/2) dz,  (i+1/2) dy)     and integer time steps
//!   Hy, Hz
//! ```
//!
//! Arrays index both families by `(k, i)`; the half-cell offsets live in the
//! update-stencil index arithmetic, not in storage.

use crate::error::SimError;

/// Grid extents and resolution. Natural units: c = 1, eps0 = mu0 = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Cells along z.
    pub nz: usize,
    /// Cells along y. `ny = 1` selects the 1+1D specialization.
    pub ny: usize,
    pub dz: f64,
    pub dy: f64,
    pub dt: f64,
    pub n_steps: usize,
}

impl GridSpec {
    pub fn new_1d(nz: usize, dz: f64, dt: f64, n_steps: usize) -> Self {
        Self { nz, ny: 1, dz, dy: dz, dt, n_steps }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        assert!(self.nz >= 8, "nz must be at least 8");
        assert!(self.ny >= 1, "ny must be at least 1");
        assert!(self.dz > 0.0 && self.dy > 0.0 && self.dt > 0.0);
        Ok(())
    }

    /// Courant factor S = c dt / dz.
    pub fn courant_factor(&self) -> f64 {
        self.dt / self.dz
    }

    #[inline(always)]
    pub fn z_at(&self, k: usize) -> f64 {
        k as f64 * self.dz
    }

    #[inline(always)]
    pub fn y_at(&self, i: usize) -> f64 {
        i as f64 * self.dy
    }

    #[inline(always)]
    pub fn t_at(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    pub fn is_1d(&self) -> bool {
        self.ny == 1
    }
}

/// A moving material discontinuity: position z(y, t) and local normalized
/// velocity beta(y, t) = (1/c) dz/dt.
#[derive(Debug, Clone, PartialEq)]
pub enum InterfaceTrajectory {
    /// z(t) = z0 + beta t.
    Uniform { z0: f64, beta: f64 },
    /// Constant proper acceleration `a_prime` (units c^2/length) with initial
    /// velocity `beta0`. The lab-frame trajectory is the Rindler hyperbola
    ///
    /// ```text
    ///   z(t) = (1/a') [ sqrt(1 + (a' t + sinh xi0)^2) - cosh xi0 ] + z0,
    ///   beta(t) = tanh(xi + xi0),   xi0 = asinh(beta0 gamma0),
    /// ```
    ///
    /// so |beta| < 1 automatically for all t.
    Accelerated { z0: f64, a_prime: f64, beta0: f64 },
    /// z(y, t) = z0 + sum_j shape[j] y^j + beta t. The curve moves rigidly
    /// along z, so the local z-directed velocity is `beta` on every row.
    CurvedParabolic { z0: f64, beta: f64, shape: Vec<f64> },
    /// Segment-wise constant velocity; position is continuous. Segments are
    /// (t_start, beta) pairs sorted by t_start, the first at t = 0.
    PiecewiseLinear { z0: f64, segments: Vec<(f64, f64)> },
}

impl InterfaceTrajectory {
    pub fn uniform(z0: f64, beta: f64) -> Result<Self, SimError> {
        check_beta(beta)?;
        Ok(Self::Uniform { z0, beta })
    }

    pub fn accelerated(z0: f64, a_prime: f64, beta0: f64) -> Result<Self, SimError> {
        check_beta(beta0)?;
        Ok(Self::Accelerated { z0, a_prime, beta0 })
    }

    pub fn curved(z0: f64, beta: f64, shape: Vec<f64>) -> Result<Self, SimError> {
        check_beta(beta)?;
        Ok(Self::CurvedParabolic { z0, beta, shape })
    }

    pub fn piecewise(z0: f64, segments: Vec<(f64, f64)>) -> Result<Self, SimError> {
        assert!(!segments.is_empty(), "piecewise trajectory needs at least one segment");
        assert!(segments[0].0 == 0.0, "first segment must start at t = 0");
        assert!(
            segments.windows(2).all(|w| w[0].0 < w[1].0),
            "segment start times must be strictly increasing"
        );
        for &(_, b) in &segments {
            check_beta(b)?;
        }
        Ok(Self::PiecewiseLinear { z0, segments })
    }

    /// Interface position at row coordinate `y` and time `t`.
    pub fn position(&self, y: f64, t: f64) -> f64 {
        match self {
            Self::Uniform { z0, beta } => z0 + beta * t,
            Self::Accelerated { z0, a_prime, beta0 } => {
                if a_prime.abs() < 1e-300 {
                    return z0 + beta0 * t;
                }
                let xi0 = asinh_beta_gamma(*beta0);
                let u = a_prime * t + xi0.sinh();
                z0 + (u.hypot(1.0) - xi0.cosh()) / a_prime
            }
            Self::CurvedParabolic { z0, beta, shape } => {
                // Horner evaluation of the shape polynomial.
                let s = shape.iter().rev().fold(0.0, |acc, c| acc * y + c);
                z0 + s + beta * t
            }
            Self::PiecewiseLinear { z0, segments } => {
                let mut z = *z0;
                for (idx, &(t_start, beta)) in segments.iter().enumerate() {
                    let t_end = segments.get(idx + 1).map_or(t, |s| s.0.min(t));
                    if t <= t_start {
                        break;
                    }
                    z += beta * (t_end - t_start).max(0.0);
                }
                z
            }
        }
    }

    /// Local normalized z-velocity at row coordinate `y` and time `t`.
    pub fn velocity(&self, _y: f64, t: f64) -> f64 {
        match self {
            Self::Uniform { beta, .. } => *beta,
            Self::Accelerated { a_prime, beta0, .. } => {
                if a_prime.abs() < 1e-300 {
                    return *beta0;
                }
                let u = a_prime * t + asinh_beta_gamma(*beta0).sinh();
                // tanh(asinh(u))
                u / u.hypot(1.0)
            }
            Self::CurvedParabolic { beta, .. } => *beta,
            Self::PiecewiseLinear { segments, .. } => {
                let mut b = segments[0].1;
                for &(t_start, beta) in segments {
                    if t > t_start {
                        b = beta;
                    }
                }
                b
            }
        }
    }

    /// Largest |beta| attained on [0, t_max]; used by Courant validation.
    pub fn max_abs_beta(&self, t_max: f64) -> f64 {
        match self {
            Self::Uniform { beta, .. } | Self::CurvedParabolic { beta, .. } => beta.abs(),
            Self::Accelerated { .. } => {
                self.velocity(0.0, 0.0).abs().max(self.velocity(0.0, t_max).abs())
            }
            Self::PiecewiseLinear { segments, .. } => segments
                .iter()
                .filter(|&&(t_start, _)| t_start < t_max)
                .map(|&(_, b)| b.abs())
                .fold(0.0, f64::max),
        }
    }
}

fn check_beta(beta: f64) -> Result<(), SimError> {
    if beta.abs() >= 1.0 || !beta.is_finite() {
        Err(SimError::SuperluminalVelocity { beta })
    } else {
        Ok(())
    }
}

/// asinh(beta * gamma) with gamma = 1/sqrt(1 - beta^2).
fn asinh_beta_gamma(beta: f64) -> f64 {
    (beta / (1.0 - beta * beta).sqrt()).asinh()
}

/// One homogeneous, lossless, isotropic medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    pub epsilon: f64,
    pub mu: f64,
}

impl Medium {
    pub fn new(epsilon: f64, mu: f64) -> Self {
        assert!(epsilon >= 1.0 && mu >= 1.0, "media must have eps >= 1 and mu >= 1");
        Self { epsilon, mu }
    }

    pub fn refractive_index(&self) -> f64 {
        (self.epsilon * self.mu).sqrt()
    }

    pub fn impedance(&self) -> f64 {
        (self.mu / self.epsilon).sqrt()
    }
}

/// Ordered media separated by moving interfaces. Interface j separates
/// media j and j+1; positions must stay strictly ordered along z.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialMap {
    pub media: Vec<Medium>,
    pub interfaces: Vec<InterfaceTrajectory>,
}

impl MaterialMap {
    pub fn new(media: Vec<Medium>, interfaces: Vec<InterfaceTrajectory>) -> Self {
        assert!(!media.is_empty());
        assert_eq!(
            interfaces.len(),
            media.len() - 1,
            "need exactly one interface between consecutive media"
        );
        Self { media, interfaces }
    }

    pub fn uniform(medium: Medium) -> Self {
        Self { media: vec![medium], interfaces: vec![] }
    }

    /// Medium at physical point (z, y) and time t. A point exactly on an
    /// interface belongs to the medium on its left (the `<=` convention).
    pub fn medium_at(&self, z: f64, y: f64, t: f64) -> Medium {
        for (j, iface) in self.interfaces.iter().enumerate() {
            if z <= iface.position(y, t) {
                return self.media[j];
            }
        }
        *self.media.last().unwrap()
    }

    /// Relative permittivity at the E/D node (k, i) for the E-update of step
    /// n. The material clock of step n is t = n dt.
    #[inline]
    pub fn eval_epsilon(&self, spec: &GridSpec, k: usize, i: usize, n: usize) -> f64 {
        self.medium_at(spec.z_at(k), spec.y_at(i), spec.t_at(n)).epsilon
    }

    /// Relative permeability at the B/H node (k+1/2, i+1/2) at step n.
    #[inline]
    pub fn eval_mu(&self, spec: &GridSpec, k: usize, i: usize, n: usize) -> f64 {
        let z = (k as f64 + 0.5) * spec.dz;
        let y = (i as f64 + 0.5) * spec.dy;
        self.medium_at(z, y, spec.t_at(n)).mu
    }

    pub fn max_refractive_index(&self) -> f64 {
        self.media.iter().map(Medium::refractive_index).fold(1.0, f64::max)
    }

    pub fn min_refractive_index(&self) -> f64 {
        self.media.iter().map(Medium::refractive_index).fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_beta(&self, t_max: f64) -> f64 {
        self.interfaces.iter().map(|tr| tr.max_abs_beta(t_max)).fold(0.0, f64::max)
    }
}

/// Width of a transition band in cells. Fixed at the maximum any stencil in
/// the generalized update equations requires.
pub const BAND_WIDTH_CELLS: usize = 5;

/// Cells the band must keep clear of the domain edge so every stencil and
/// on-the-fly field conversion stays in bounds.
pub const BAND_EDGE_CLEARANCE: usize = 3;

/// One contiguous run of hybrid cells in a row, owned by one interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub k_min: usize,
    pub k_max: usize,
    /// Normalized velocity of the owning interface at this row and step.
    pub beta: f64,
    pub interface: usize,
}

/// Per-step hybrid/conventional cell classification.
///
/// Recomputed once per time step before the field updates; read-only while
/// the sub-updates run, so it can be shared across row workers.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRegion {
    /// `bands[i]` lists the hybrid index ranges of row i, ordered by k.
    pub bands: Vec<Vec<Band>>,
    pub width_cells: usize,
}

impl TransitionRegion {
    pub fn empty(ny: usize) -> Self {
        Self { bands: vec![Vec::new(); ny], width_cells: BAND_WIDTH_CELLS }
    }

    #[inline(always)]
    pub fn band_at(&self, k: usize, i: usize) -> Option<&Band> {
        self.bands[i].iter().find(|b| b.k_min <= k && k <= b.k_max)
    }

    #[inline(always)]
    pub fn is_hybrid(&self, k: usize, i: usize) -> bool {
        self.band_at(k, i).is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.iter().all(Vec::is_empty)
    }
}

/// Flag the band of cells around each discretized interface position.
///
/// The interface cell is `floor(z_interface / dz)` (a point exactly on a node
/// belongs to the left medium). The 5-cell band is placed symmetrically for
/// beta = 0 and shifted one cell toward the upwind side otherwise, so the
/// extra cells sit on the +z side for beta < 0 and on the -z side for
/// beta > 0, matching the one-sided advection stencils.
pub fn classify_cells(
    map: &MaterialMap,
    spec: &GridSpec,
    n: usize,
) -> Result<TransitionRegion, SimError> {
    let t = spec.t_at(n);
    let mut bands: Vec<Vec<Band>> = Vec::with_capacity(spec.ny);

    for i in 0..spec.ny {
        let y = spec.y_at(i);
        let mut row: Vec<Band> = Vec::with_capacity(map.interfaces.len());
        let mut prev_pos = f64::NEG_INFINITY;

        for (j, iface) in map.interfaces.iter().enumerate() {
            let pos = iface.position(y, t);
            if pos <= prev_pos {
                return Err(SimError::UnorderedInterfaces { step: n, row: i });
            }
            prev_pos = pos;

            let beta = iface.velocity(y, t);
            let k_int = (pos / spec.dz).floor() as i64;
            let (lo, hi) = band_offsets(beta);
            let k_min = k_int + lo;
            let k_max = k_int + hi;

            if k_min < BAND_EDGE_CLEARANCE as i64
                || k_max > (spec.nz - 1 - BAND_EDGE_CLEARANCE) as i64
            {
                return Err(SimError::TransitionTouchesBoundary { step: n, row: i });
            }
            let band =
                Band { k_min: k_min as usize, k_max: k_max as usize, beta, interface: j };

            if let Some(prev) = row.last() {
                if band.k_min <= prev.k_max {
                    return Err(SimError::OverlappingTransitionRegions {
                        step: n,
                        row: i,
                        a_min: prev.k_min,
                        a_max: prev.k_max,
                        b_min: band.k_min,
                        b_max: band.k_max,
                    });
                }
            }
            row.push(band);
        }
        bands.push(row);
    }

    Ok(TransitionRegion { bands, width_cells: BAND_WIDTH_CELLS })
}

/// Band extent relative to the interface cell.
fn band_offsets(beta: f64) -> (i64, i64) {
    if beta < 0.0 {
        (-1, 3)
    } else if beta > 0.0 {
        (-3, 1)
    } else {
        (-2, 2)
    }
}
