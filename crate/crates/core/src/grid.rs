//! Uniform real parameter grids, sampled complex functions on them, and the
//! finite-difference stencils shared by the superpotential calculus and the
//! discrete operators.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::band::BandMatrix;
use crate::error::{Error, Result};

/// Smallest admissible number of grid points.
pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        let grid = GridSpec { x_min, x_max, n };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_min.is_finite() && self.x_max.is_finite()) {
            return Err(Error::validation("grid", "endpoints must be finite"));
        }
        if self.x_min >= self.x_max {
            return Err(Error::validation(
                "grid",
                format!("x_min ({}) must be below x_max ({})", self.x_min, self.x_max),
            ));
        }
        if self.n < MIN_POINTS {
            return Err(Error::validation(
                "grid",
                format!("need at least {MIN_POINTS} points, got {}", self.n),
            ));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.x_max
        } else {
            self.x_min + i as f64 * self.spacing()
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.x_min + self.x_max)
    }

    /// Same interval, spacing halved.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            n: 2 * self.n - 1,
            ..*self
        }
    }
}

/// Complex samples over a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        grid.validate()?;
        if values.len() != grid.n {
            return Err(Error::validation(
                "grid",
                format!("{} samples for a grid of {} points", values.len(), grid.n),
            ));
        }
        if let Some(i) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::validation(
                "grid",
                format!("non-finite sample at index {i} (x = {})", grid.x(i)),
            ));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Result<GridFunction> {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &z)| f(self.grid.x(i), z))
            .collect();
        GridFunction::new(self.grid, values)
    }

    pub(crate) fn check_same_grid(&self, other: &GridFunction, module: &'static str) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::validation(
                module,
                format!("grid mismatch: {:?} vs {:?}", self.grid, other.grid),
            ));
        }
        Ok(())
    }

    /// Max modulus difference over indices `range`.
    pub fn max_abs_diff_in(&self, other: &GridFunction, range: std::ops::Range<usize>) -> f64 {
        range
            .map(|i| (self.values[i] - other.values[i]).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Writes `x,re,im` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["x", "re", "im"])?;
        for (i, z) in self.values.iter().enumerate() {
            out.write_record([
                format!("{:.16e}", self.grid.x(i)),
                format!("{:.16e}", z.re),
                format!("{:.16e}", z.im),
            ])?;
        }
        out.flush()
    }

    /// Reads back a file produced by [`GridFunction::write_csv`].
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let bad = |m: String| Error::validation("grid", m);
        let mut input = csv::Reader::from_reader(reader);
        let headers = input.headers().map_err(|e| bad(e.to_string()))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["x", "re", "im"] {
            return Err(bad(format!("expected header x,re,im, got {headers:?}")));
        }
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for record in input.records() {
            let record = record.map_err(|e| bad(e.to_string()))?;
            let field = |k: usize| -> Result<f64> {
                record
                    .get(k)
                    .ok_or_else(|| bad(format!("missing column {k}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| bad(e.to_string()))
            };
            xs.push(field(0)?);
            values.push(Complex64::new(field(1)?, field(2)?));
        }
        if xs.len() < 2 {
            return Err(bad("fewer than two rows".into()));
        }
        let grid = GridSpec::new(xs[0], xs[xs.len() - 1], xs.len())?;
        let h = grid.spacing();
        for (i, &x) in xs.iter().enumerate() {
            if (x - grid.x(i)).abs() > 1e-9 * h.max(x.abs()) {
                return Err(bad(format!("row {i}: x = {x} is not on a uniform grid")));
            }
        }
        GridFunction::new(grid, values)
    }
}

/// Finite-difference weights for the derivative of order `order` at `z`
/// using nodes `nodes` (Fornberg's recursion).
pub fn fornberg_weights(z: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Number of rows at each end that use one-sided closures.
pub fn boundary_rows(accuracy: usize) -> usize {
    accuracy / 2
}

/// Banded matrix of the `order`-th derivative with central stencils of the
/// given accuracy in the interior and one-sided stencils of the same
/// accuracy at the ends.
pub fn derivative_matrix(grid: &GridSpec, order: usize, accuracy: usize) -> Result<BandMatrix> {
    // stencils only need a proper interval; the point-count floor is checked
    // against the stencil width below
    if !(grid.x_min < grid.x_max && grid.x_max.is_finite() && grid.x_min.is_finite()) || grid.n < 2 {
        return Err(Error::validation("operators", format!("degenerate grid {grid:?}")));
    }
    if !(1..=2).contains(&order) || !(accuracy == 2 || accuracy == 4) {
        return Err(Error::validation(
            "operators",
            format!("unsupported stencil: order {order}, accuracy {accuracy}"),
        ));
    }
    let half = accuracy / 2;
    let one_sided = order + accuracy;
    if one_sided > grid.n {
        return Err(Error::validation(
            "operators",
            format!("stencil of {one_sided} points wider than grid of {}", grid.n),
        ));
    }
    let n = grid.n;
    let scale = grid.spacing().powi(order as i32);
    let reach = half.max(one_sided - 1);
    let mut m = BandMatrix::zeros(n, reach, reach);

    let central: Vec<f64> = {
        let offsets: Vec<f64> = (-(half as i64)..=half as i64).map(|k| k as f64).collect();
        fornberg_weights(0.0, &offsets, order)
    };
    for i in 0..n {
        let (start, weights) = if i < half {
            let nodes: Vec<f64> = (0..one_sided).map(|k| k as f64).collect();
            (0, fornberg_weights(i as f64, &nodes, order))
        } else if i + half >= n {
            let start = n - one_sided;
            let nodes: Vec<f64> = (start..n).map(|k| k as f64).collect();
            (start, fornberg_weights(i as f64, &nodes, order))
        } else {
            (i - half, central.clone())
        };
        for (k, w) in weights.into_iter().enumerate() {
            m.set(i, start + k, Complex64::new(w / scale, 0.0));
        }
    }
    Ok(m)
}

/// Applies [`derivative_matrix`] to sampled values.
pub fn differentiate(f: &GridFunction, order: usize, accuracy: usize) -> Result<GridFunction> {
    let d = derivative_matrix(f.grid(), order, accuracy)?;
    GridFunction::new(*f.grid(), d.mul_vec(f.values()))
}

/// Composite trapezoid rule for `int |f|^2 dx`.
pub fn trapezoid_norm_sq(f: &GridFunction) -> f64 {
    let h = f.grid().spacing();
    let v = f.values();
    let n = v.len();
    let interior: f64 = v[1..n - 1].iter().map(|z| z.norm_sqr()).sum();
    h * (interior + 0.5 * (v[0].norm_sqr() + v[n - 1].norm_sqr()))
}
