use alloc::vec;
use alloc::vec::Vec;

/// Dense row-major `n × n` matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    /// Builds a matrix from row-major data of length `n*n`.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Option<Self> {
        (data.len() == n * n).then_some(Self { n, data })
    }

    /// Builds a symmetric matrix from a function evaluated on the upper triangle (`i < j`).
    /// The diagonal is set to zero.
    pub fn symmetric_from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `max_{i,j} |A_ij − A_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_constructor_mirrors_and_zeroes_diagonal() {
        let m = DenseMatrix::symmetric_from_fn(3, |i, j| (i * 10 + j) as f64);
        assert_eq!(m.get(0, 2), 2.0);
        assert_eq!(m.get(2, 0), 2.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.symmetry_defect(), 0.0);
    }

    #[test]
    fn symmetry_defect_sees_injected_fault() {
        let mut m = DenseMatrix::symmetric_from_fn(3, |_, _| 1.0);
        m.set(1, 2, 1.5);
        assert_eq!(m.symmetry_defect(), 0.5);
        assert!(DenseMatrix::from_row_major(2, vec![0.0; 3]).is_none());
    }
}
