use crate::error::{Error, Result};
use crate::operator::SparseSymmetricMatrix;

/// Envelope (profile) Cholesky factorization `A = L Lᵀ`.
///
/// Row `i` of `L` is stored densely from its first structural nonzero
/// column to the diagonal. Lexicographic grid orderings give a profile of
/// about two lattice rows, so fill stays modest at desk scale.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    pub fn factor(a: &SparseSymmetricMatrix) -> Result<Self> {
        let n = a.dim();
        let lower = a.lower_rows();
        let first: Vec<usize> = lower
            .iter()
            .enumerate()
            .map(|(i, row)| row.first().map(|&(c, _)| c.min(i)).unwrap_or(i))
            .collect();
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0usize;
        for i in 0..n {
            start.push(total);
            total += i - first[i] + 1;
        }
        start.push(total);
        let mut values = vec![0.0; total];
        for (i, row) in lower.iter().enumerate() {
            for &(c, v) in row {
                values[start[i] + c - first[i]] = v;
            }
        }

        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut acc = values[start[i] + j - fi];
                let row_i = &values[start[i] + lo - fi..start[i] + j - fi];
                let row_j = &values[start[j] + lo - fj..start[j] + j - fj];
                acc -= row_i.iter().zip(row_j).map(|(x, y)| x * y).sum::<f64>();
                if j < i {
                    values[start[i] + j - fi] = acc / values[start[j + 1] - 1];
                } else {
                    if !(acc > 0.0) || !acc.is_finite() {
                        return Err(Error::Factorization {
                            matrix: a.name().to_string(),
                            row: i,
                            pivot: acc,
                        });
                    }
                    values[start[i] + i - fi] = acc.sqrt();
                }
            }
        }
        Ok(Self {
            n,
            first,
            start,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L`.
    pub fn fill(&self) -> usize {
        self.values.len()
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut y = b.to_vec();
        for i in 0..self.n {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let xi = y[i];
            for (k, l) in row[..i - fi].iter().enumerate() {
                y[fi + k] -= l * xi;
            }
        }
        y
    }
}
