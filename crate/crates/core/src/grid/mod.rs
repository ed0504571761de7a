//! Staggered (MAC) grid on a rectangular box.
//!
//! Scalars live at cell centers, vector components at the centers of the faces
//! normal to them, and edge quantities (EMF, current density) at edge midpoints
//! parallel to their component.

pub mod boundary;
pub mod dump;
mod ops;
mod padded;
mod state;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use boundary::{
    validate_boundary_spec, BoundaryReport, BoundarySpec, BoundaryViolation, Environment, Face, FaceConditions,
    MagneticBc, ScalarData, ThermalBc, VectorData, VelocityBc,
};
pub use ops::{curl_edge_to_face, curl_face_to_edge, div, grad};
pub use padded::Padded;
pub use state::FluidState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("each axis needs at least 2 cells, got {0:?}")]
    TooFewCells([usize; 3]),
    #[error("box lengths must be positive and finite, got {0:?}")]
    BadLengths([f64; 3]),
    #[error("field stored at {found:?} but operator expects {expected:?}")]
    StaggerMismatch { expected: Stagger, found: [usize; 3] },
}

/// Location of a discrete quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stagger {
    Cell,
    Face(usize),
    Edge(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: [usize; 3],
    lengths: [f64; 3],
    origin: [f64; 3],
    h: [f64; 3],
}

impl Grid {
    pub fn new(n: [usize; 3], lengths: [f64; 3]) -> Result<Self, GridError> {
        Self::with_origin(n, lengths, [0.0; 3])
    }

    pub fn with_origin(n: [usize; 3], lengths: [f64; 3], origin: [f64; 3]) -> Result<Self, GridError> {
        if n.iter().any(|&c| c < 2) {
            return Err(GridError::TooFewCells(n));
        }
        if lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(GridError::BadLengths(lengths));
        }
        let h = [lengths[0] / n[0] as f64, lengths[1] / n[1] as f64, lengths[2] / n[2] as f64];
        Ok(Grid { n, lengths, origin, h })
    }

    /// Unit cube with `n` cells per axis.
    pub fn cube(n: usize) -> Result<Self, GridError> {
        Self::new([n; 3], [1.0; 3])
    }

    pub fn n(&self) -> [usize; 3] {
        self.n
    }
    pub fn h(&self) -> [f64; 3] {
        self.h
    }
    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }
    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }
    pub fn cell_volume(&self) -> f64 {
        self.h[0] * self.h[1] * self.h[2]
    }
    pub fn cell_count(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn dims(&self, s: Stagger) -> [usize; 3] {
        let mut d = self.n;
        match s {
            Stagger::Cell => {}
            Stagger::Face(a) => d[a] += 1,
            Stagger::Edge(a) => {
                for (b, v) in d.iter_mut().enumerate() {
                    if b != a {
                        *v += 1;
                    }
                }
            }
        }
        d
    }

    /// Physical position of entry `idx` of a field with stagger `s`.
    pub fn position(&self, s: Stagger, idx: [usize; 3]) -> [f64; 3] {
        let mut p = [0.0; 3];
        for a in 0..3 {
            let node = match s {
                Stagger::Cell => false,
                Stagger::Face(f) => f == a,
                Stagger::Edge(e) => e != a,
            };
            let off = if node { 0.0 } else { 0.5 };
            p[a] = self.origin[a] + (idx[a] as f64 + off) * self.h[a];
        }
        p
    }

    /// Same as [`Grid::position`] but for signed (possibly ghost) indices.
    pub fn position_signed(&self, s: Stagger, idx: [isize; 3]) -> [f64; 3] {
        let mut p = [0.0; 3];
        for a in 0..3 {
            let node = match s {
                Stagger::Cell => false,
                Stagger::Face(f) => f == a,
                Stagger::Edge(e) => e != a,
            };
            let off = if node { 0.0 } else { 0.5 };
            p[a] = self.origin[a] + (idx[a] as f64 + off) * self.h[a];
        }
        p
    }

    /// Coordinate of the low (`side = 0`) or high (`side = 1`) wall along `axis`.
    pub fn wall(&self, axis: usize, side: usize) -> f64 {
        self.origin[axis] + if side == 0 { 0.0 } else { self.lengths[axis] }
    }

    /// Tangential axes of a face normal to `axis`, in increasing order.
    pub fn tangential_axes(axis: usize) -> (usize, usize) {
        match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        }
    }

    pub fn box_surface_area(&self) -> f64 {
        let [lx, ly, lz] = self.lengths;
        2.0 * (lx * ly + ly * lz + lz * lx)
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }
}

/// Dense 3-D array, x-fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Array3 {
    dims: [usize; 3],
    data: Vec<f64>,
}

impl Array3 {
    pub fn zeros(dims: [usize; 3]) -> Self {
        Array3 { dims, data: vec![0.0; dims[0] * dims[1] * dims[2]] }
    }

    pub fn from_vec(dims: [usize; 3], data: Vec<f64>) -> Option<Self> {
        (data.len() == dims[0] * dims[1] * dims[2]).then_some(Array3 { dims, data })
    }

    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut([usize; 3]) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    data.push(f([i, j, k]));
                }
            }
        }
        Array3 { dims, data }
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(i, j, k)]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let n = self.idx(i, j, k);
        self.data[n] = v;
    }
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let n = self.idx(i, j, k);
        self.data[n] += v;
    }
    pub fn data(&self) -> &[f64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    /// Iterate over all multi-indices in storage order.
    pub fn indices(&self) -> impl Iterator<Item = [usize; 3]> {
        let d = self.dims;
        (0..d[2]).flat_map(move |k| (0..d[1]).flat_map(move |j| (0..d[0]).map(move |i| [i, j, k])))
    }
}

/// Cell-centered scalar field.
#[derive(Clone, Debug, PartialEq)]
pub struct CellField(pub Array3);

impl CellField {
    pub fn zeros(grid: &Grid) -> Self {
        CellField(Array3::zeros(grid.n()))
    }
    pub fn constant(grid: &Grid, v: f64) -> Self {
        let mut a = Array3::zeros(grid.n());
        a.fill(v);
        CellField(a)
    }
    /// Sample `f` at cell centers.
    pub fn from_fn(grid: &Grid, mut f: impl FnMut([f64; 3]) -> f64) -> Self {
        CellField(Array3::from_fn(grid.n(), |idx| f(grid.position(Stagger::Cell, idx))))
    }
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.0.get(i, j, k)
    }
    pub fn data(&self) -> &[f64] {
        self.0.data()
    }
    pub fn data_mut(&mut self) -> &mut [f64] {
        self.0.data_mut()
    }
    pub fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }
    pub fn min(&self) -> f64 {
        self.0.data().iter().copied().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.0.data().iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Face-centered vector field: component `a` stored on faces normal to axis `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceField {
    pub c: [Array3; 3],
}

impl FaceField {
    pub fn zeros(grid: &Grid) -> Self {
        FaceField { c: [0, 1, 2].map(|a| Array3::zeros(grid.dims(Stagger::Face(a)))) }
    }
    /// Sample component `a` of `f` at the centers of faces normal to `a`.
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        FaceField {
            c: [0, 1, 2].map(|a| {
                Array3::from_fn(grid.dims(Stagger::Face(a)), |idx| f(grid.position(Stagger::Face(a), idx))[a])
            }),
        }
    }
    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(Array3::max_abs).fold(0.0, f64::max)
    }
    pub fn scale(&mut self, s: f64) {
        for a in &mut self.c {
            a.data_mut().iter_mut().for_each(|v| *v *= s);
        }
    }
    /// `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &FaceField) {
        for (a, b) in self.c.iter_mut().zip(other.c.iter()) {
            a.data_mut().iter_mut().zip(b.data()).for_each(|(x, y)| *x += s * y);
        }
    }
    pub fn len(&self) -> usize {
        self.c.iter().map(|a| a.data().len()).sum()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// All components flattened in component order.
    pub fn to_vec(&self) -> Vec<f64> {
        self.c.iter().flat_map(|a| a.data().iter().copied()).collect()
    }
    pub fn from_flat(grid: &Grid, v: &[f64]) -> Self {
        let mut f = FaceField::zeros(grid);
        let mut off = 0;
        for a in &mut f.c {
            let n = a.data().len();
            a.data_mut().copy_from_slice(&v[off..off + n]);
            off += n;
        }
        f
    }
}

/// Edge-centered vector field: component `a` stored on edges parallel to axis `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeField {
    pub c: [Array3; 3],
}

impl EdgeField {
    pub fn zeros(grid: &Grid) -> Self {
        EdgeField { c: [0, 1, 2].map(|a| Array3::zeros(grid.dims(Stagger::Edge(a)))) }
    }
    pub fn from_fn(grid: &Grid, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        EdgeField {
            c: [0, 1, 2].map(|a| {
                Array3::from_fn(grid.dims(Stagger::Edge(a)), |idx| f(grid.position(Stagger::Edge(a), idx))[a])
            }),
        }
    }
    pub fn max_abs(&self) -> f64 {
        self.c.iter().map(Array3::max_abs).fold(0.0, f64::max)
    }
}

/// Midpoint-rule volume integral.
pub fn volume_integral(grid: &Grid, f: &CellField) -> f64 {
    f.data().iter().sum::<f64>() * grid.cell_volume()
}

/// Midpoint-rule integral of `f` over one box face, sampled at the centers of its cells.
pub fn surface_integral(grid: &Grid, face: Face, f: impl Fn([f64; 3]) -> f64) -> f64 {
    let a = face.axis();
    let (b, c) = Grid::tangential_axes(a);
    let n = grid.n();
    let h = grid.h();
    let mut sum = 0.0;
    for jc in 0..n[c] {
        for jb in 0..n[b] {
            let mut p = [0.0; 3];
            p[a] = grid.wall(a, face.side());
            p[b] = grid.origin()[b] + (jb as f64 + 0.5) * h[b];
            p[c] = grid.origin()[c] + (jc as f64 + 0.5) * h[c];
            sum += f(p);
        }
    }
    sum * h[b] * h[c]
}

/// Quadrature weight of a face-normal entry: half a cell on the box boundary.
#[inline]
pub fn face_weight(grid: &Grid, axis: usize, index_along_axis: usize) -> f64 {
    let w = grid.cell_volume();
    if index_along_axis == 0 || index_along_axis == grid.n()[axis] {
        0.5 * w
    } else {
        w
    }
}

/// Discrete L² inner product of face fields.
pub fn face_inner(grid: &Grid, u: &FaceField, v: &FaceField) -> f64 {
    let mut s = 0.0;
    for a in 0..3 {
        let (ua, va) = (&u.c[a], &v.c[a]);
        for idx in ua.indices() {
            let n = ua.idx(idx[0], idx[1], idx[2]);
            s += face_weight(grid, a, idx[a]) * ua.data()[n] * va.data()[n];
        }
    }
    s
}

/// Face values averaged to cell centers.
pub fn face_to_cell(grid: &Grid, f: &FaceField) -> [CellField; 3] {
    [0, 1, 2].map(|a| {
        let src = &f.c[a];
        CellField(Array3::from_fn(grid.n(), |[i, j, k]| {
            let mut hi = [i, j, k];
            hi[a] += 1;
            0.5 * (src.get(i, j, k) + src.get(hi[0], hi[1], hi[2]))
        }))
    })
}

pub(crate) fn check_dims(expected: Stagger, want: [usize; 3], found: [usize; 3]) -> Result<(), GridError> {
    if want == found {
        Ok(())
    } else {
        Err(GridError::StaggerMismatch { expected, found })
    }
}
