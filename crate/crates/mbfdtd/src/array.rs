//! Minimal 2D array with z-contiguous storage.
//!
//! Index convention everywhere in this crate: `(k, i)` where `k` runs along
//! z (fast axis) and `i` along y (slow axis). Row `i` is a contiguous slice,
//! which keeps the z-stencil loops cache-friendly and lets the steppers hand
//! disjoint rows to worker threads.

#[derive(Debug, Clone, PartialEq)]
pub struct Grid2 {
    nz: usize,
    ny: usize,
    data: Vec<f64>,
}

impl Grid2 {
    pub fn zeros(nz: usize, ny: usize) -> Self {
        Self { nz, ny, data: vec![0.0; nz * ny] }
    }

    #[inline(always)]
    pub fn nz(&self) -> usize {
        self.nz
    }

    #[inline(always)]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline(always)]
    pub fn at(&self, k: usize, i: usize) -> f64 {
        debug_assert!(k < self.nz && i < self.ny);
        self.data[i * self.nz + k]
    }

    #[inline(always)]
    pub fn set(&mut self, k: usize, i: usize, v: f64) {
        debug_assert!(k < self.nz && i < self.ny);
        self.data[i * self.nz + k] = v;
    }

    #[inline(always)]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.nz..(i + 1) * self.nz]
    }

    #[inline(always)]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.nz..(i + 1) * self.nz]
    }

    pub fn rows_mut(&mut self) -> std::slice::ChunksMut<'_, f64> {
        self.data.chunks_mut(self.nz)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &x| m.max(x.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Sum of squares, optionally weighted per element by `w`.
    pub fn sum_sq(&self) -> f64 {
        self.data.iter().map(|&x| x * x).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_layout_is_z_contiguous() {
        let mut g = Grid2::zeros(4, 3);
        g.set(2, 1, 7.0);
        assert_eq!(g.row(1)[2], 7.0);
        assert_eq!(g.at(2, 1), 7.0);
        assert_eq!(g.as_slice()[1 * 4 + 2], 7.0);
    }

    #[test]
    fn max_abs_and_finite() {
        let mut g = Grid2::zeros(3, 1);
        assert!(g.all_finite());
        g.set(1, 0, -3.5);
        assert_eq!(g.max_abs(), 3.5);
        g.set(0, 0, f64::NAN);
        assert!(!g.all_finite());
    }
}
