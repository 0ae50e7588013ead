//! Square complex band matrices.
//!
//! Every discretised operator in this crate is a finite-difference stencil
//! plus diagonal multipliers, so the dense `n x n` picture is stored by its
//! band only. Products widen the band additively.

use num_complex::Complex64;

/// Square matrix with `lower` sub-diagonals and `upper` super-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    // row-major, each row holds columns i - lower ..= i + upper
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        let lower = lower.min(n.saturating_sub(1));
        let upper = upper.min(n.saturating_sub(1));
        BandMatrix {
            n,
            lower,
            upper,
            data: vec![Complex64::new(0.0, 0.0); n * (lower + upper + 1)],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, Complex64::new(1.0, 0.0))
    }

    pub fn scalar(n: usize, value: Complex64) -> Self {
        Self::from_diagonal(&vec![value; n])
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        BandMatrix {
            n: diag.len(),
            lower: 0,
            upper: 0,
            data: diag.to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.lower, self.upper)
    }

    fn width(&self) -> usize {
        self.lower + self.upper + 1
    }

    /// Columns stored for row `i`, clipped to the matrix.
    pub fn row_range(&self, i: usize) -> std::ops::Range<usize> {
        let lo = i.saturating_sub(self.lower);
        let hi = (i + self.upper + 1).min(self.n);
        lo..hi
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if j + self.lower < i || j > i + self.upper || i >= self.n || j >= self.n {
            Complex64::new(0.0, 0.0)
        } else {
            self.data[i * self.width() + (j + self.lower - i)]
        }
    }

    /// Sets entry `(i, j)`. Panics if it lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: Complex64) {
        assert!(
            j + self.lower >= i && j <= i + self.upper && i < self.n && j < self.n,
            "entry ({i}, {j}) outside band ({}, {})",
            self.lower,
            self.upper
        );
        let w = self.width();
        self.data[i * w + (j + self.lower - i)] = value;
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n, "dimension mismatch");
        (0..self.n)
            .map(|i| {
                self.row_range(i)
                    .map(|j| self.get(i, j) * v[j])
                    .sum::<Complex64>()
            })
            .collect()
    }

    pub fn matmul(&self, other: &BandMatrix) -> BandMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = BandMatrix::zeros(self.n, self.lower + other.lower, self.upper + other.upper);
        for i in 0..self.n {
            for k in self.row_range(i) {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in other.row_range(k) {
                    let idx = i * out.width() + (j + out.lower - i);
                    out.data[idx] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn conj(&self) -> BandMatrix {
        BandMatrix {
            data: self.data.iter().map(|z| z.conj()).collect(),
            ..self.clone()
        }
    }

    pub fn scale(&self, factor: Complex64) -> BandMatrix {
        BandMatrix {
            data: self.data.iter().map(|z| z * factor).collect(),
            ..self.clone()
        }
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, other: &BandMatrix, factor: Complex64) -> BandMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let mut out = BandMatrix::zeros(
            self.n,
            self.lower.max(other.lower),
            self.upper.max(other.upper),
        );
        for i in 0..self.n {
            for j in self.row_range(i) {
                let idx = i * out.width() + (j + out.lower - i);
                out.data[idx] += self.get(i, j);
            }
            for j in other.row_range(i) {
                let idx = i * out.width() + (j + out.lower - i);
                out.data[idx] += factor * other.get(i, j);
            }
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}
