//! Small dense-grid containers shared by the chaos, kernel, and Monte Carlo
//! layers: a row-major 2-d array and bilinear interpolation on rectilinear
//! (not necessarily uniform) axes.

/// Row-major 2-d array of f64, indexed as (i, j) with i the slow axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2 {
    pub n_rows: usize,
    pub n_cols: usize,
    pub data: Vec<f64>,
}

impl Grid2 {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Grid2 {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

/// Values tabulated on the product of two strictly increasing axes, with
/// bilinear interpolation.  Queries outside the axes clamp to the boundary,
/// which callers rely on only where the integrand weight has already decayed
/// to nothing.
#[derive(Debug, Clone)]
pub struct BilinearTable {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub values: Grid2,
}

impl BilinearTable {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, values: Grid2) -> Self {
        debug_assert_eq!(values.n_rows, xs.len());
        debug_assert_eq!(values.n_cols, ys.len());
        debug_assert!(xs.windows(2).all(|w| w[1] > w[0]));
        debug_assert!(ys.windows(2).all(|w| w[1] > w[0]));
        BilinearTable { xs, ys, values }
    }

    /// Index of the cell [axis[i], axis[i+1]] containing x (clamped).
    #[inline]
    fn cell(axis: &[f64], x: f64) -> (usize, f64) {
        let n = axis.len();
        if x <= axis[0] {
            return (0, 0.0);
        }
        if x >= axis[n - 1] {
            return (n - 2, 1.0);
        }
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if axis[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let frac = (x - axis[lo]) / (axis[lo + 1] - axis[lo]);
        (lo, frac)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (i, fx) = Self::cell(&self.xs, x);
        let (j, fy) = Self::cell(&self.ys, y);
        let v00 = self.values.at(i, j);
        let v01 = self.values.at(i, j + 1);
        let v10 = self.values.at(i + 1, j);
        let v11 = self.values.at(i + 1, j + 1);
        v00 * (1.0 - fx) * (1.0 - fy)
            + v10 * fx * (1.0 - fy)
            + v01 * (1.0 - fx) * fy
            + v11 * fx * fy
    }
}
