//! Uniform tensor grids carrying sampled real or complex functions.

use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One uniformly spaced grid axis. Node `i` sits at `min + i * spacing()`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        let axis = Self { min, max, count };
        axis.validate()?;
        Ok(axis)
    }

    /// `count` nodes spanning `[-half, half]`.
    pub fn symmetric(half: f64, count: usize) -> Result<Self> {
        Self::new(-half, half, count)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count < 2 {
            return Err(Error::InvalidGrid(format!("axis needs at least 2 nodes, got {}", self.count)));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.max > self.min) {
            return Err(Error::InvalidGrid(format!("axis bounds [{}, {}] are not increasing", self.min, self.max)));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    /// The last node is pinned to `max` so that axes survive a text round trip.
    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + i as f64 * self.spacing()
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.coord(i)).collect()
    }

    /// Composite trapezoid weight of node `i`.
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i + 1 == self.count {
            0.5 * h
        } else {
            h
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (self.min + self.max).abs() <= 1e-12 * self.max.abs().max(1.0)
    }
}

/// Samples of a function on a tensor grid, stored row-major (last axis
/// varies fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction<T = f64> {
    pub axes: Vec<Axis>,
    pub values: Vec<T>,
}

impl<T> GridFunction<T> {
    pub fn new(axes: Vec<Axis>, values: Vec<T>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidGrid("grid needs at least one axis".into()));
        }
        for axis in &axes {
            axis.validate()?;
        }
        let expected: usize = axes.iter().map(|a| a.count).product();
        if values.len() != expected {
            return Err(Error::InvalidGrid(format!(
                "value tensor has {} entries, axes require {expected}",
                values.len()
            )));
        }
        Ok(Self { axes, values })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.axes.iter().map(Axis::spacing).collect()
    }

    /// Product of the axis spacings.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Multi-index of a flat position.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (k, axis) in self.axes.iter().enumerate().rev() {
            idx[k] = flat % axis.count;
            flat /= axis.count;
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.count + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat).iter().zip(&self.axes).map(|(&i, a)| a.coord(i)).collect()
    }

    /// Tensor trapezoid weight of a flat position.
    pub fn trapezoid_weight(&self, flat: usize) -> f64 {
        self.unravel(flat).iter().zip(&self.axes).map(|(&i, a)| a.trapezoid_weight(i)).product()
    }

    pub fn map<U, F: Fn(&T) -> U>(&self, f: F) -> GridFunction<U> {
        GridFunction { axes: self.axes.clone(), values: self.values.iter().map(f).collect() }
    }
}

impl<T: Send> GridFunction<T> {
    /// Samples `f` at every node, in parallel.
    pub fn from_fn<F>(axes: Vec<Axis>, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> T + Sync,
    {
        let shell = GridFunction::<()>::new(axes.clone(), vec![(); axes.iter().map(|a| a.count).product()])?;
        let values = (0..shell.len()).into_par_iter().map(|flat| f(&shell.point(flat))).collect();
        Ok(Self { axes, values })
    }
}

impl GridFunction<f64> {
    /// Composite trapezoid integral over the grid box.
    pub fn trapezoid_integral(&self) -> f64 {
        let terms: Vec<f64> =
            (0..self.len()).into_par_iter().map(|i| self.trapezoid_weight(i) * self.values[i]).collect();
        crate::quadrature::pairwise_sum(&terms)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Writes `t1,…,tn,value` rows in row-major order with 17 significant
    /// digits.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut out = BufWriter::new(file);
        let header: Vec<String> = (1..=self.dim()).map(|k| format!("t{k}")).chain(["value".to_string()]).collect();
        writeln!(out, "{}", header.join(","))?;
        let mut line = String::new();
        for flat in 0..self.len() {
            line.clear();
            for x in self.point(flat) {
                line.push_str(&format!("{x:.16e},"));
            }
            line.push_str(&format!("{:.16e}", self.values[flat]));
            writeln!(out, "{line}")?;
        }
        out.flush()?;
        Ok(())
    }

    /// Reads the layout produced by [`GridFunction::write_csv`]. A header row
    /// is optional; the axes are recovered from the coordinate columns.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, record) in reader.records().enumerate() {
            let record = record?;
            let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
            match parsed {
                Ok(row) => rows.push(row),
                Err(_) if lineno == 0 => continue,
                Err(e) => return Err(Error::InvalidGrid(format!("line {}: {e}", lineno + 1))),
            }
        }
        let width = rows.first().map(Vec::len).ok_or_else(|| Error::InvalidGrid("empty grid file".into()))?;
        if width < 2 {
            return Err(Error::InvalidGrid("grid rows need at least one coordinate and a value".into()));
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidGrid("ragged rows".into()));
        }
        let dim = width - 1;
        let last = rows.last().expect("non-empty");
        let mut axes = Vec::with_capacity(dim);
        for k in 0..dim {
            // row-major: column k climbs through its nodes before first wrapping
            let mut distinct = 1;
            let mut prev = rows[0][k];
            for row in &rows {
                if row[k] != prev {
                    if row[k] < prev {
                        break;
                    }
                    distinct += 1;
                    prev = row[k];
                }
            }
            axes.push(Axis::new(rows[0][k], last[k], distinct)?);
        }
        let values: Vec<f64> = rows.iter().map(|r| r[dim]).collect();
        let grid = Self::new(axes, values)?;
        let tol: Vec<f64> = grid.axes.iter().map(|a| 1e-9 * a.spacing()).collect();
        for (flat, row) in rows.iter().enumerate() {
            let p = grid.point(flat);
            if p.iter().zip(row).zip(&tol).any(|((a, b), t)| (a - b).abs() > *t) {
                return Err(Error::InvalidGrid(format!("row {} is off the uniform row-major grid", flat + 1)));
            }
        }
        Ok(grid)
    }
}
