//! Tensor-product grids on a rectangular box with homogeneous Dirichlet
//! boundary, discrete sine transforms and spectral differentiation.
//!
//! Fields always store the full node set `0..=J` (and `0..=K`, `0..=L`)
//! including the boundary. Two-dimensional data lives in an `Array3` whose
//! third axis has length one, so every routine below is written once for
//! both dimensions.
//!
//! # Transform normalization
//!
//! Along an axis with `J` cells the forward transform is
//!
//! ```text
//! c_p = (2 / J) * sum_{s=1}^{J-1} f_s sin(p s pi / J),   p = 1..J-1
//! ```
//!
//! and the inverse is the plain sine series `f_s = sum_p c_p sin(p s pi / J)`,
//! so `inverse(forward(f)) == f` and the coefficients are exactly the
//! amplitudes of the interpolating sine series. Multi-dimensional transforms
//! are tensor products of the one-dimensional ones.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use ndarray::Array3;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Boundary values above this magnitude mean the field is corrupted.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

const LANE_CHUNK: usize = 16;

/// Axis-aligned box `[a,b] x [c,e] (x [f,g])`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    bounds: Vec<(f64, f64)>,
}

impl BoxDomain {
    pub fn new(bounds: &[(f64, f64)]) -> Result<Self> {
        if bounds.len() != 2 && bounds.len() != 3 {
            return Err(Error::InvalidDomain(format!(
                "expected 2 or 3 axes, got {}",
                bounds.len()
            )));
        }
        for (axis, &(lo, hi)) in bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || hi <= lo {
                return Err(Error::InvalidDomain(format!(
                    "axis {axis}: bounds ({lo}, {hi}) must be finite with upper > lower"
                )));
            }
        }
        Ok(Self {
            bounds: bounds.to_vec(),
        })
    }

    /// The square `[lo, hi]^2`.
    pub fn square(lo: f64, hi: f64) -> Result<Self> {
        Self::new(&[(lo, hi), (lo, hi)])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self, axis: usize) -> (f64, f64) {
        self.bounds[axis]
    }

    pub fn length(&self, axis: usize) -> f64 {
        let (lo, hi) = self.bounds[axis];
        hi - lo
    }

    /// Closed-box membership test.
    pub fn contains(&self, point: &[f64]) -> bool {
        self.bounds
            .iter()
            .zip(point)
            .all(|(&(lo, hi), &x)| x >= lo && x <= hi)
    }
}

/// Uniform grid with `cells[axis]` intervals per axis; `cells[axis] + 1`
/// nodes including both boundary nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    domain: BoxDomain,
    cells: Vec<usize>,
}

impl GridSpec {
    pub fn new(domain: BoxDomain, cells: &[usize]) -> Result<Self> {
        if cells.len() != domain.dim() {
            return Err(Error::InvalidGrid(format!(
                "{} cell counts for a {}-dimensional domain",
                cells.len(),
                domain.dim()
            )));
        }
        if let Some(&n) = cells.iter().find(|&&n| n < 4 || n % 2 != 0) {
            return Err(Error::InvalidGrid(format!(
                "cell count {n} must be even and at least 4"
            )));
        }
        Ok(Self {
            domain,
            cells: cells.to_vec(),
        })
    }

    /// Grid with (nearly) the requested spacing on every axis. The box
    /// length divided by `h` must be an even integer.
    pub fn with_spacing(domain: BoxDomain, h: f64) -> Result<Self> {
        let mut cells = Vec::with_capacity(domain.dim());
        for axis in 0..domain.dim() {
            let n = domain.length(axis) / h;
            let rounded = n.round();
            if (n - rounded).abs() > 1e-9 * n.max(1.0) {
                return Err(Error::InvalidGrid(format!(
                    "spacing {h} does not divide axis {axis} of length {}",
                    domain.length(axis)
                )));
            }
            cells.push(rounded as usize);
        }
        Self::new(domain, &cells)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self, axis: usize) -> usize {
        self.cells[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.domain.length(axis) / self.cells[axis] as f64
    }

    /// Product of the spacings, the rectangle-rule weight of one node.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    /// Shape of the node array; the third entry is 1 in two dimensions.
    pub fn node_shape(&self) -> [usize; 3] {
        [
            self.cells[0] + 1,
            self.cells[1] + 1,
            self.cells.get(2).map_or(1, |&n| n + 1),
        ]
    }

    pub fn node_count(&self) -> usize {
        self.node_shape().iter().product()
    }

    /// Number of sine modes, `(J-1)(K-1)` (times `L-1` in 3D).
    pub fn mode_count(&self) -> usize {
        self.cells.iter().map(|&n| n - 1).product()
    }

    /// Coordinate of node `index` along `axis`.
    pub fn coordinate(&self, axis: usize, index: usize) -> f64 {
        self.domain.bounds[axis].0 + index as f64 * self.spacing(axis)
    }

    pub fn coordinates(&self, axis: usize) -> Vec<f64> {
        (0..=self.cells[axis])
            .map(|i| self.coordinate(axis, i))
            .collect()
    }

    /// Node coordinates as a point of length `dim`.
    pub fn node_point(&self, index: [usize; 3]) -> Vec<f64> {
        (0..self.dim())
            .map(|a| self.coordinate(a, index[a]))
            .collect()
    }

    /// `mu_p = p pi / (b - a)` along `axis`.
    pub fn frequency(&self, axis: usize, p: usize) -> f64 {
        p as f64 * PI / self.domain.length(axis)
    }

    /// Eigenvalue of `-Laplacian` for the sine mode `(p, q[, r])`.
    pub fn laplacian_symbol(&self, mode: &[usize]) -> Result<f64> {
        if mode.len() != self.dim() {
            return Err(Error::IndexOutOfRange(format!(
                "mode index has {} entries, grid is {}-dimensional",
                mode.len(),
                self.dim()
            )));
        }
        let mut symbol = 0.0;
        for (axis, &p) in mode.iter().enumerate() {
            if p == 0 || p >= self.cells[axis] {
                return Err(Error::IndexOutOfRange(format!(
                    "mode {p} outside 1..{} on axis {axis}",
                    self.cells[axis] - 1
                )));
            }
            symbol += self.frequency(axis, p).powi(2);
        }
        Ok(symbol)
    }

    /// Symbol table in node layout (zero on boundary slots).
    pub fn symbol_table(&self) -> Array3<f64> {
        let shape = self.node_shape();
        Array3::from_shape_fn(shape, |(p, q, r)| {
            let idx = [p, q, r];
            if self.is_boundary(idx) {
                return 0.0;
            }
            (0..self.dim())
                .map(|a| self.frequency(a, idx[a]).powi(2))
                .sum()
        })
    }

    pub fn is_boundary(&self, index: [usize; 3]) -> bool {
        (0..self.dim()).any(|a| index[a] == 0 || index[a] == self.cells[a])
    }

    /// Trapezoid weight of a node. Equal to the rectangle rule on fields that
    /// vanish on the boundary, and exact for cosine products along an axis.
    pub fn trapezoid_weight(&self, index: [usize; 3]) -> f64 {
        let mut w = self.cell_volume();
        for a in 0..self.dim() {
            if index[a] == 0 || index[a] == self.cells[a] {
                w *= 0.5;
            }
        }
        w
    }

    fn spatial_range(&self, axis: usize) -> std::ops::Range<usize> {
        if axis < self.dim() {
            1..self.cells[axis]
        } else {
            0..1
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in 0..self.dim() {
            if a > 0 {
                write!(f, " x ")?;
            }
            let (lo, hi) = self.domain.bounds(a);
            write!(f, "[{lo}, {hi}]/{}", self.cells[a])?;
        }
        Ok(())
    }
}

/// Complex samples on every grid node.
///
/// Wave functions keep the boundary at exactly zero; derivative fields
/// returned by [`SinePlan::derivative`] do not.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: GridSpec,
    values: Array3<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            values: Array3::zeros(grid.node_shape()),
            grid: grid.clone(),
        }
    }

    /// Samples `f` at every node and forces the boundary to zero.
    pub fn from_fn(grid: &GridSpec, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let mut point = vec![0.0; grid.dim()];
        let values = Array3::from_shape_fn(grid.node_shape(), |(i, j, k)| {
            let idx = [i, j, k];
            if grid.is_boundary(idx) {
                return Complex64::new(0.0, 0.0);
            }
            for (a, x) in point.iter_mut().enumerate() {
                *x = grid.coordinate(a, idx[a]);
            }
            f(&point)
        });
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_values(grid: &GridSpec, values: Array3<Complex64>) -> Result<Self> {
        if values.shape() != grid.node_shape() {
            return Err(Error::GridMismatch(format!(
                "array shape {:?} does not match node shape {:?}",
                values.shape(),
                grid.node_shape()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            values: values.as_standard_layout().into_owned(),
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &Array3<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array3<Complex64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array3<Complex64> {
        self.values
    }

    /// Largest modulus on the boundary nodes.
    pub fn max_boundary_abs(&self) -> f64 {
        self.values
            .indexed_iter()
            .filter(|((i, j, k), _)| self.grid.is_boundary([*i, *j, *k]))
            .map(|(_, v)| v.norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// Discrete `l2` norm squared, `h_x h_y sum |f|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// Largest pointwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Sine coefficients `c_{pq(r)}` for `(p, q, r)` in the interior index set.
///
/// Stored in node layout: slot `(p, q, r)` holds mode `(p, q, r)` and the
/// boundary slots stay zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coeffs: Array3<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &GridSpec) -> Self {
        Self {
            coeffs: Array3::zeros(grid.node_shape()),
            grid: grid.clone(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Number of modes, `(J-1)(K-1)` in 2D.
    pub fn len(&self) -> usize {
        self.grid.mode_count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn slot(&self, mode: &[usize]) -> Result<[usize; 3]> {
        self.grid.laplacian_symbol(mode)?;
        let mut idx = [0; 3];
        idx[..mode.len()].copy_from_slice(mode);
        Ok(idx)
    }

    pub fn get(&self, mode: &[usize]) -> Result<Complex64> {
        Ok(self.coeffs[self.slot(mode)?])
    }

    pub fn set(&mut self, mode: &[usize], value: Complex64) -> Result<()> {
        let idx = self.slot(mode)?;
        self.coeffs[idx] = value;
        Ok(())
    }

    /// Node-layout coefficient array.
    pub fn coefficients(&self) -> &Array3<Complex64> {
        &self.coeffs
    }

    pub fn coefficients_mut(&mut self) -> &mut Array3<Complex64> {
        &mut self.coeffs
    }

    /// Iterator over `(mode, coefficient)` pairs of the interior index set.
    pub fn modes(&self) -> impl Iterator<Item = ([usize; 3], Complex64)> + '_ {
        self.coeffs
            .indexed_iter()
            .filter(|((i, j, k), _)| !self.grid.is_boundary([*i, *j, *k]))
            .map(|((i, j, k), v)| ([i, j, k], *v))
    }
}

#[derive(Clone, Copy, PartialEq)]
enum LaneOp {
    Forward,
    Inverse,
}

/// Reusable buffers for the transform passes.
#[derive(Default)]
pub struct DstScratch {
    lanes: Vec<Complex64>,
    fft: Vec<Complex64>,
}

impl DstScratch {
    fn reserve(&mut self, lanes: usize, fft: usize) {
        if self.lanes.len() < lanes {
            self.lanes.resize(lanes, Complex64::default());
        }
        if self.fft.len() < fft {
            self.fft.resize(fft, Complex64::default());
        }
    }
}

struct AxisPlan {
    cells: usize,
    length: f64,
    /// length `2n` pair over the odd extension
    forward: Arc<dyn Fft<f64>>,
    backward: Arc<dyn Fft<f64>>,
}

/// FFT plans for sine transforms and spectral derivatives on one grid.
///
/// A plan is immutable and can be shared between threads; the `_in_place`
/// routines take caller-owned scratch.
pub struct SinePlan {
    grid: GridSpec,
    axes: Vec<AxisPlan>,
}

impl SinePlan {
    pub fn new(grid: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let axes = (0..grid.dim())
            .map(|a| {
                let n = grid.cells(a);
                AxisPlan {
                    cells: n,
                    length: grid.domain().length(a),
                    forward: planner.plan_fft_forward(2 * n),
                    backward: planner.plan_fft_inverse(2 * n),
                }
            })
            .collect();
        Self {
            grid: grid.clone(),
            axes,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn forward(&self, field: &ComplexField) -> Result<SpectralField> {
        self.check_grid(field.grid())?;
        let boundary = field.max_boundary_abs();
        if boundary > BOUNDARY_TOLERANCE {
            return Err(Error::BoundaryNotZero(boundary));
        }
        let mut coeffs = field.values.clone();
        self.forward_in_place(&mut coeffs, &mut DstScratch::default());
        Ok(SpectralField {
            grid: self.grid.clone(),
            coeffs,
        })
    }

    pub fn inverse(&self, spectrum: &SpectralField) -> Result<ComplexField> {
        self.check_grid(spectrum.grid())?;
        let mut values = spectrum.coeffs.clone();
        self.inverse_in_place(&mut values, &mut DstScratch::default());
        Ok(ComplexField {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Exact derivative of the sine interpolant along `axis`, sampled at all
    /// nodes (boundary included).
    pub fn derivative(&self, field: &ComplexField, axis: usize) -> Result<ComplexField> {
        self.check_grid(field.grid())?;
        if axis >= self.grid.dim() {
            return Err(Error::IndexOutOfRange(format!(
                "axis {axis} on a {}-dimensional grid",
                self.grid.dim()
            )));
        }
        let mut values = field.values.clone();
        self.derivative_in_place(&mut values, axis, &mut DstScratch::default());
        Ok(ComplexField {
            grid: self.grid.clone(),
            values,
        })
    }

    /// Replaces node values by sine coefficients (node layout). Boundary
    /// values are ignored and left untouched.
    pub fn forward_in_place(&self, data: &mut Array3<Complex64>, scratch: &mut DstScratch) {
        for axis in 0..self.grid.dim() {
            self.transform_axis(data, axis, LaneOp::Forward, scratch);
        }
    }

    /// Replaces sine coefficients (node layout) by node values.
    pub fn inverse_in_place(&self, data: &mut Array3<Complex64>, scratch: &mut DstScratch) {
        for axis in 0..self.grid.dim() {
            self.transform_axis(data, axis, LaneOp::Inverse, scratch);
        }
    }

    pub fn derivative_in_place(
        &self,
        data: &mut Array3<Complex64>,
        axis: usize,
        scratch: &mut DstScratch,
    ) {
        self.derivative_axis(data, axis, scratch);
    }

    fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if grid != &self.grid {
            return Err(Error::GridMismatch(format!(
                "plan built for {}, field lives on {}",
                self.grid, grid
            )));
        }
        Ok(())
    }

    fn lane_bases(&self, shape: [usize; 3], axis: usize) -> Vec<usize> {
        let strides = [shape[1] * shape[2], shape[2], 1];
        let others: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
        let mut bases = Vec::new();
        for u in self.grid.spatial_range(others[0]) {
            for v in self.grid.spatial_range(others[1]) {
                bases.push(u * strides[others[0]] + v * strides[others[1]]);
            }
        }
        bases
    }

    /// Type-I sine transform of every interior lane along `axis`: the odd
    /// extension `y` of a lane onto `2n` points has `FFT(y)_p = -2i F_p` with
    /// `F_p = sum_s x_s sin(p s pi/n)`.
    fn transform_axis(
        &self,
        data: &mut Array3<Complex64>,
        axis: usize,
        op: LaneOp,
        scratch: &mut DstScratch,
    ) {
        let shape = self.grid.node_shape();
        assert_eq!(data.shape(), shape, "array does not match plan grid");
        let plan = &self.axes[axis];
        let n = plan.cells;
        let period = 2 * n;
        let stride = [shape[1] * shape[2], shape[2], 1][axis];
        let bases = self.lane_bases(shape, axis);
        let flat = data
            .as_slice_mut()
            .expect("field arrays are kept in standard layout");
        let fft_len = plan.forward.get_inplace_scratch_len();
        scratch.reserve(LANE_CHUNK * period, fft_len);
        let scale = match op {
            LaneOp::Forward => 1.0 / n as f64,
            LaneOp::Inverse => 0.5,
        };
        let factor = Complex64::new(0.0, scale);
        let zero = Complex64::new(0.0, 0.0);

        for chunk in bases.chunks(LANE_CHUNK) {
            let buf = &mut scratch.lanes[..chunk.len() * period];
            for (i, &base) in chunk.iter().enumerate() {
                let lane = &mut buf[i * period..(i + 1) * period];
                lane[0] = zero;
                lane[n] = zero;
                for s in 1..n {
                    let v = flat[base + s * stride];
                    lane[s] = v;
                    lane[period - s] = -v;
                }
            }
            plan.forward
                .process_with_scratch(buf, &mut scratch.fft[..fft_len]);
            for (i, &base) in chunk.iter().enumerate() {
                let lane = &buf[i * period..(i + 1) * period];
                for p in 1..n {
                    flat[base + p * stride] = lane[p] * factor;
                }
            }
        }
    }

    /// Odd extension onto `2n` points, Fourier differentiation, and
    /// sampling of all `n + 1` nodes of each lane.
    fn derivative_axis(&self, data: &mut Array3<Complex64>, axis: usize, scratch: &mut DstScratch) {
        let shape = self.grid.node_shape();
        assert_eq!(data.shape(), shape, "array does not match plan grid");
        let plan = &self.axes[axis];
        let n = plan.cells;
        let period = 2 * n;
        let stride = [shape[1] * shape[2], shape[2], 1][axis];
        let bases = self.lane_bases(shape, axis);
        let flat = data
            .as_slice_mut()
            .expect("field arrays are kept in standard layout");
        let fft_len = plan
            .forward
            .get_inplace_scratch_len()
            .max(plan.backward.get_inplace_scratch_len());
        scratch.reserve(LANE_CHUNK * period, fft_len);
        let zero = Complex64::new(0.0, 0.0);
        let dk = PI / plan.length;
        let norm = 1.0 / period as f64;

        for chunk in bases.chunks(LANE_CHUNK) {
            let buf = &mut scratch.lanes[..chunk.len() * period];
            for (i, &base) in chunk.iter().enumerate() {
                let lane = &mut buf[i * period..(i + 1) * period];
                lane[0] = zero;
                lane[n] = zero;
                for s in 1..n {
                    let v = flat[base + s * stride];
                    lane[s] = v;
                    lane[period - s] = -v;
                }
            }
            plan.forward
                .process_with_scratch(buf, &mut scratch.fft[..fft_len]);
            for lane in buf.chunks_exact_mut(period) {
                for (m, v) in lane.iter_mut().enumerate() {
                    let k = if m < n {
                        m as f64
                    } else if m == n {
                        0.0
                    } else {
                        m as f64 - period as f64
                    };
                    *v *= Complex64::new(0.0, k * dk * norm);
                }
            }
            plan.backward
                .process_with_scratch(buf, &mut scratch.fft[..fft_len]);
            for (i, &base) in chunk.iter().enumerate() {
                for s in 0..=n {
                    flat[base + s * stride] = buf[i * period + s];
                }
            }
        }
    }
}

/// Sine coefficients of a boundary-zero field.
pub fn dst_forward(field: &ComplexField) -> Result<SpectralField> {
    SinePlan::new(field.grid()).forward(field)
}

/// Evaluates a sine series at every grid node.
pub fn dst_inverse(spectrum: &SpectralField) -> ComplexField {
    SinePlan::new(spectrum.grid())
        .inverse(spectrum)
        .expect("plan built for the spectrum's own grid")
}

pub fn partial_derivative(field: &ComplexField, axis: usize) -> Result<ComplexField> {
    SinePlan::new(field.grid()).derivative(field, axis)
}

/// `h_x h_y sum_interior conj(f) g`.
pub fn inner_product(f: &ComplexField, g: &ComplexField) -> Result<Complex64> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch(format!(
            "inner product of fields on {} and {}",
            f.grid(),
            g.grid()
        )));
    }
    let grid = f.grid();
    let sum: Complex64 = f
        .values
        .indexed_iter()
        .zip(g.values.iter())
        .filter(|(((i, j, k), _), _)| !grid.is_boundary([*i, *j, *k]))
        .map(|((_, a), b)| a.conj() * b)
        .sum();
    Ok(sum * grid.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(BoxDomain::square(-16.0, 16.0).unwrap(), &[n, n]).unwrap()
    }

    fn mode(grid: &GridSpec, p: usize, q: usize) -> ComplexField {
        let (a, _) = grid.domain().bounds(0);
        let (c, _) = grid.domain().bounds(1);
        let mx = grid.frequency(0, p);
        let my = grid.frequency(1, q);
        ComplexField::from_fn(grid, |x| {
            Complex64::new((mx * (x[0] - a)).sin() * (my * (x[1] - c)).sin(), 0.0)
        })
    }

    #[test]
    fn rejects_bad_domains_and_grids() {
        assert!(BoxDomain::new(&[(1.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(BoxDomain::new(&[(0.0, 1.0)]).is_err());
        assert!(BoxDomain::new(&[(0.0, f64::INFINITY), (0.0, 1.0)]).is_err());
        let d = BoxDomain::square(0.0, 1.0).unwrap();
        assert!(GridSpec::new(d.clone(), &[6, 5]).is_err());
        assert!(GridSpec::new(d.clone(), &[2, 4]).is_err());
        assert!(GridSpec::new(d.clone(), &[4]).is_err());
        assert!(GridSpec::with_spacing(d, 0.3).is_err());
    }

    #[test]
    fn spacing_constructor_counts_cells() {
        let g = GridSpec::with_spacing(BoxDomain::square(-16.0, 16.0).unwrap(), 0.125).unwrap();
        assert_eq!(g.cells(0), 256);
        assert_eq!(g.node_shape(), [257, 257, 1]);
        assert_eq!(g.mode_count(), 255 * 255);
    }

    #[test]
    fn single_mode_transforms_to_unit_coefficient() {
        let g = grid(8);
        let spec = dst_forward(&mode(&g, 1, 1)).unwrap();
        for (m, c) in spec.modes() {
            let expected = if m[0] == 1 && m[1] == 1 { 1.0 } else { 0.0 };
            assert!((c - expected).norm() <= 1e-12, "{m:?} {c}");
        }
    }

    #[test]
    fn zero_field_has_zero_spectrum() {
        let g = grid(8);
        let spec = dst_forward(&ComplexField::zeros(&g)).unwrap();
        assert!(spec.modes().all(|(_, c)| c.norm() == 0.0));
        assert_eq!(spec.len(), 49);
    }

    #[test]
    fn nonzero_boundary_is_rejected() {
        let g = grid(8);
        let mut f = mode(&g, 1, 1);
        f.values_mut()[[0, 3, 0]] = Complex64::new(1e-9, 0.0);
        assert!(matches!(dst_forward(&f), Err(Error::BoundaryNotZero(_))));
    }

    #[test]
    fn inverse_of_single_coefficient_is_the_mode() {
        let g = grid(8);
        let mut spec = SpectralField::zeros(&g);
        spec.set(&[1, 1], Complex64::new(1.0, 0.0)).unwrap();
        let f = dst_inverse(&spec);
        assert!(f.max_abs_diff(&mode(&g, 1, 1)) <= 1e-12);
        assert_eq!(f.max_boundary_abs(), 0.0);
    }

    #[test]
    fn symbol_values() {
        let g = grid(8);
        let s = g.laplacian_symbol(&[1, 1]).unwrap();
        assert!((s - 2.0 * (PI / 32.0).powi(2)).abs() < 1e-15);
        assert!(g.laplacian_symbol(&[0, 1]).is_err());
        assert!(g.laplacian_symbol(&[8, 1]).is_err());
        assert!(g.laplacian_symbol(&[1]).is_err());
        let top = g.laplacian_symbol(&[7, 7]).unwrap();
        for p in 1..7 {
            for q in 1..7 {
                let here = g.laplacian_symbol(&[p, q]).unwrap();
                assert!(here < g.laplacian_symbol(&[p + 1, q]).unwrap());
                assert!(here < g.laplacian_symbol(&[p, q + 1]).unwrap());
                assert!(here < top);
            }
        }
    }

    #[test]
    fn derivative_of_single_mode() {
        let g = grid(16);
        let (a, _) = g.domain().bounds(0);
        let (c, _) = g.domain().bounds(1);
        let (mx, my) = (g.frequency(0, 1), g.frequency(1, 1));
        let d = partial_derivative(&mode(&g, 1, 1), 0).unwrap();
        let mut point_err: f64 = 0.0;
        for ((i, j, _), v) in d.values().indexed_iter() {
            let (x, y) = (g.coordinate(0, i), g.coordinate(1, j));
            let exact = mx * (mx * (x - a)).cos() * (my * (y - c)).sin();
            point_err = point_err.max((v - exact).norm());
        }
        assert!(point_err <= 1e-12, "{point_err}");
        let dz = partial_derivative(&ComplexField::zeros(&g), 1).unwrap();
        assert!(dz.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn mode_inner_products() {
        let g = grid(8);
        let m11 = mode(&g, 1, 1);
        let m12 = mode(&g, 1, 2);
        let n = inner_product(&m11, &m11).unwrap();
        assert!((n.re - 32.0 * 32.0 / 4.0).abs() < 1e-10);
        assert!(inner_product(&m11, &m12).unwrap().norm() < 1e-12);
        let other = grid(16);
        assert!(inner_product(&m11, &ComplexField::zeros(&other)).is_err());
    }

    #[test]
    fn three_dimensional_round_trip() {
        let d = BoxDomain::new(&[(-1.0, 1.0), (0.0, 2.0), (-3.0, 1.0)]).unwrap();
        let g = GridSpec::new(d, &[6, 8, 4]).unwrap();
        let f = ComplexField::from_fn(&g, |x| {
            Complex64::new((x[0] * 3.0).cos() + x[1], x[2] * x[0])
        });
        let back = dst_inverse(&dst_forward(&f).unwrap());
        assert!(back.max_abs_diff(&f) < 1e-12);
    }
}
