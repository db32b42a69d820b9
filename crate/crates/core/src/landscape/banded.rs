//! Symmetric positive-definite band matrix with an in-place Cholesky solve.
//!
//! Only the lower band is stored: row `i` keeps `A[i][i - k]` for
//! `k = 0..=bandwidth` at `data[i * (bandwidth + 1) + k]`.

#[derive(Clone, Debug)]
pub(crate) struct BandedSpd {
    n: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

/// Pivot breakdown during factorization; carries the offending row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct NotPositiveDefinite {
    pub row: usize,
}

impl BandedSpd {
    pub fn zeros(n: usize, bandwidth: usize) -> Self {
        Self {
            n,
            bandwidth,
            data: vec![0.0; n * (bandwidth + 1)],
        }
    }

    /// Accumulate into `A[i][j]` for `j <= i`; upper entries are implied by symmetry.
    #[inline]
    pub fn add_lower(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(j <= i && i - j <= self.bandwidth);
        self.data[i * (self.bandwidth + 1) + (i - j)] += v;
    }

    /// Symmetric accumulate: picks the stored triangle.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if j <= i {
            self.add_lower(i, j, v)
        } else {
            self.add_lower(j, i, v)
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.bandwidth + 1) + (i - j)]
    }

    /// Factor `A = L Lᵀ` in place and solve `A x = rhs`.
    ///
    /// A pivot at or below `rel_tol` times its original diagonal entry is
    /// treated as rank deficiency.
    pub fn solve(mut self, rhs: &[f64], rel_tol: f64) -> Result<Vec<f64>, NotPositiveDefinite> {
        assert_eq!(rhs.len(), self.n);
        let bw = self.bandwidth;
        let stride = bw + 1;
        for i in 0..self.n {
            let first = i.saturating_sub(bw);
            for j in first..=i {
                let mut s = self.at(i, j);
                let kstart = first.max(j.saturating_sub(bw));
                let row_i = i * stride;
                let row_j = j * stride;
                for k in kstart..j {
                    s -= self.data[row_i + (i - k)] * self.data[row_j + (j - k)];
                }
                if i == j {
                    let diag = self.data[row_i];
                    if !(s > rel_tol * diag.abs()) || diag == 0.0 {
                        return Err(NotPositiveDefinite { row: i });
                    }
                    self.data[row_i] = s.sqrt();
                } else {
                    self.data[row_i + (i - j)] = s / self.data[row_j];
                }
            }
        }

        // Forward: L y = b.
        let mut y = rhs.to_vec();
        for i in 0..self.n {
            let first = i.saturating_sub(bw);
            let mut s = y[i];
            for (k, yk) in y.iter().enumerate().take(i).skip(first) {
                s -= self.at(i, k) * yk;
            }
            y[i] = s / self.at(i, i);
        }
        // Backward: Lᵀ x = y.
        for i in (0..self.n).rev() {
            let last = (i + bw).min(self.n - 1);
            let mut s = y[i];
            for k in (i + 1)..=last {
                s -= self.at(k, i) * y[k];
            }
            y[i] = s / self.at(i, i);
        }
        Ok(y)
    }
}
