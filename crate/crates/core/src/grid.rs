//! Sequences on shifted integer grids `{x0, x0+1, x0+2, …}` and the two
//! elementary differences.
//!
//! The base point is only a label: all arithmetic happens on integer
//! offsets, so an irrational base costs nothing.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// The grid `base + k` for `k = 0..=length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    base: T,
    length: usize,
}

impl<T: Real> Grid<T> {
    pub fn new(base: T, length: usize) -> Result<Self> {
        if !base.is_finite() {
            return Err(Error::InvalidGrid(format!("base {base} is not finite")));
        }
        Ok(Grid { base, length })
    }

    pub fn base(&self) -> T {
        self.base
    }

    /// Largest stored offset.
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn point(&self, offset: usize) -> T {
        self.base + T::from_usize_lossy(offset)
    }
}

/// A real function on a [`Grid`], stored densely by offset.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    /// Builds a grid function from the values at offsets `0..values.len()`.
    pub fn new(base: T, values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidGrid(
                "a grid function needs at least one value".into(),
            ));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "value at offset {k} is not finite"
            )));
        }
        let grid = Grid::new(base, values.len() - 1)?;
        Ok(GridFunction { grid, values })
    }

    /// Samples `f(offset)` for offsets `0..=length`.
    pub fn from_fn(base: T, length: usize, f: impl FnMut(usize) -> T) -> Result<Self> {
        Self::new(base, (0..=length).map(f).collect())
    }

    pub fn constant(base: T, length: usize, value: T) -> Result<Self> {
        Self::new(base, vec![value; length + 1])
    }

    pub(crate) fn from_parts_unchecked(base: T, values: Vec<T>) -> Self {
        debug_assert!(!values.is_empty());
        GridFunction {
            grid: Grid {
                base,
                length: values.len() - 1,
            },
            values,
        }
    }

    pub fn grid(&self) -> Grid<T> {
        self.grid
    }

    pub fn base(&self) -> T {
        self.grid.base
    }

    pub fn length(&self) -> usize {
        self.grid.length
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Value at `offset`.
    ///
    /// # Panics
    /// If `offset > length`.
    pub fn at(&self, offset: usize) -> T {
        self.values[offset]
    }

    pub fn get(&self, offset: usize) -> Option<T> {
        self.values.get(offset).copied()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// The same function viewed on `base + by`, dropping the first `by` values.
    pub fn rebased(&self, by: usize) -> Result<Self> {
        if by > self.length() {
            return Err(Error::EmptyGrid);
        }
        Ok(Self::from_parts_unchecked(
            self.base() + T::from_usize_lossy(by),
            self.values[by..].to_vec(),
        ))
    }

    /// Extends the function one step to the left, placing `value` at `base - 1`.
    pub fn extended_back(&self, value: T) -> Self {
        let mut values = Vec::with_capacity(self.values.len() + 1);
        values.push(value);
        values.extend_from_slice(&self.values);
        Self::from_parts_unchecked(self.base() - T::one(), values)
    }

    /// Restriction to offsets `0..=length`.
    pub fn truncated(&self, length: usize) -> Self {
        let end = length.min(self.length());
        Self::from_parts_unchecked(self.base(), self.values[..=end].to_vec())
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        Self::from_parts_unchecked(self.base(), self.values.iter().map(|&v| f(v)).collect())
    }
}

/// A real function of two grid variables `g(x, s)`, both on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariateGridFunction<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

impl<T: Real> BivariateGridFunction<T> {
    /// `f(offset_x, offset_s)` for both offsets in `0..=length`.
    pub fn from_fn(base: T, length: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        let grid = Grid::new(base, length)?;
        let n = length + 1;
        let mut values = Vec::with_capacity(n * n);
        for x in 0..n {
            for s in 0..n {
                let v = f(x, s);
                if !v.is_finite() {
                    return Err(Error::InvalidGrid(format!(
                        "value at ({x}, {s}) is not finite"
                    )));
                }
                values.push(v);
            }
        }
        Ok(BivariateGridFunction { grid, values })
    }

    pub fn grid(&self) -> Grid<T> {
        self.grid
    }

    pub fn length(&self) -> usize {
        self.grid.length
    }

    pub fn at(&self, offset_x: usize, offset_s: usize) -> T {
        self.values[offset_x * (self.grid.length + 1) + offset_s]
    }
}

/// `(∇y)(x) = y(x) − y(x−1)`, living on `base + 1` with one value fewer.
pub fn backward_difference<T: Real>(y: &GridFunction<T>) -> Result<GridFunction<T>> {
    if y.length() == 0 {
        return Err(Error::EmptyGrid);
    }
    let values = y.values.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(GridFunction::from_parts_unchecked(
        y.base() + T::one(),
        values,
    ))
}

/// `(Δy)(x) = y(x+1) − y(x)`, living on the same base with one value fewer.
pub fn forward_difference<T: Real>(y: &GridFunction<T>) -> Result<GridFunction<T>> {
    if y.length() == 0 {
        return Err(Error::EmptyGrid);
    }
    let values = y.values.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(GridFunction::from_parts_unchecked(y.base(), values))
}
