//! Dense Gaussian elimination with partial (row) pivoting.
//!
//! The systems solved here are small (one unknown per cluster member, so
//! rarely more than a few dozen), which makes a straightforward O(n³)
//! elimination on a row-major buffer the right tool.

use thiserror::Error;

/// Relative singularity threshold, scaled by the largest row norm of `A`.
pub const SINGULAR_RTOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("empty system")]
    Empty,
    #[error("dimension mismatch: matrix is {rows}x{cols}, rhs has {rhs} entries")]
    Dimension { rows: usize, cols: usize, rhs: usize },
    #[error("non-finite entry in system")]
    NonFinite,
    #[error("matrix is singular (pivot {pivot:e} below tolerance {tol:e} at column {column})")]
    Singular { column: usize, pivot: f64, tol: f64 },
}

/// `A·x = b` with `A` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl LinearSystem {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self, SolveError> {
        let n = a.len();
        if n == 0 {
            return Err(SolveError::Empty);
        }
        if let Some(row) = a.iter().find(|row| row.len() != n) {
            return Err(SolveError::Dimension { rows: n, cols: row.len(), rhs: b.len() });
        }
        Self::from_row_major(n, a.into_iter().flatten().collect(), b)
    }

    pub fn from_row_major(n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self, SolveError> {
        if n == 0 {
            return Err(SolveError::Empty);
        }
        if a.len() != n * n || b.len() != n {
            return Err(SolveError::Dimension { rows: n, cols: a.len() / n, rhs: b.len() });
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(SolveError::NonFinite);
        }
        Ok(Self { n, a, b })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn a(&self, row: usize, col: usize) -> f64 {
        self.a[row * self.n + col]
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.a[row * self.n..(row + 1) * self.n]
    }

    /// Largest infinity-norm over the rows of `A`.
    fn max_row_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().fold(0.0_f64, |m, v| m.max(v.abs())))
            .fold(0.0, f64::max)
    }
}

/// Solves the system, leaving it untouched.
pub fn gaussian_solve(system: &LinearSystem) -> Result<Vec<f64>, SolveError> {
    let n = system.n;
    let tol = SINGULAR_RTOL * system.max_row_norm();
    let mut a = system.a.clone();
    let mut b = system.b.clone();

    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, a[r * n + col]))
            .fold((col, 0.0_f64), |best, (r, v)| if v.abs() > best.1.abs() { (r, v) } else { best });
        if pivot.abs() < tol || pivot == 0.0 {
            return Err(SolveError::Singular { column: col, pivot: pivot.abs(), tol });
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        for r in col + 1..n {
            let factor = a[r * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            a[r * n + col] = 0.0;
            for k in col + 1..n {
                a[r * n + k] -= factor * a[col * n + k];
            }
            b[r] -= factor * b[col];
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let tail: f64 = (i + 1..n).map(|k| a[i * n + k] * x[k]).sum();
        x[i] = (b[i] - tail) / a[i * n + i];
    }
    Ok(x)
}

/// Max-norm of `A·x − b`.
pub fn residual_norm(system: &LinearSystem, x: &[f64]) -> f64 {
    assert_eq!(x.len(), system.n, "solution length must match system dimension");
    (0..system.n)
        .map(|i| {
            let ax: f64 = system.row(i).iter().zip(x).map(|(a, x)| a * x).sum();
            (ax - system.b[i]).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sys(a: Vec<Vec<f64>>, b: Vec<f64>) -> LinearSystem {
        LinearSystem::new(a, b).unwrap()
    }

    #[test]
    fn identity_returns_rhs() {
        let s = sys(
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            vec![4.0, 5.0, 6.0],
        );
        assert_eq!(gaussian_solve(&s).unwrap(), vec![4.0, 5.0, 6.0]);
    }

    #[test]
    fn two_by_two() {
        let s = sys(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![5.0, 10.0]);
        let x = gaussian_solve(&s).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 3.0).abs() < 1e-12);
        assert!(residual_norm(&s, &x) < 1e-12);
    }

    #[test]
    fn rank_deficient_is_singular() {
        for b in [vec![1.0, 2.0], vec![0.0, 0.0], vec![3.0, -7.0]] {
            let s = sys(vec![vec![1.0, 2.0], vec![2.0, 4.0]], b);
            assert!(matches!(gaussian_solve(&s), Err(SolveError::Singular { .. })));
        }
    }

    #[test]
    fn needs_pivoting() {
        let s = sys(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![2.0, 3.0]);
        assert_eq!(gaussian_solve(&s).unwrap(), vec![3.0, 2.0]);
    }

    #[test]
    fn tiny_units_are_not_singular() {
        // energies in joules are ~1e-4; scaling must not trip the tolerance
        let s = sys(vec![vec![2e-4, 1e-4], vec![1e-4, 3e-4]], vec![5e-4, 1e-3]);
        let x = gaussian_solve(&s).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn input_unmodified() {
        let s = sys(vec![vec![0.0, 2.0], vec![3.0, 1.0]], vec![1.0, 1.0]);
        let before = s.clone();
        gaussian_solve(&s).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn residual_of_zero_guess_is_max_rhs() {
        let s = sys(vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![-7.0, 2.0]);
        assert_eq!(residual_norm(&s, &[0.0, 0.0]), 7.0);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert_eq!(LinearSystem::new(vec![], vec![]), Err(SolveError::Empty));
        assert!(matches!(
            LinearSystem::new(vec![vec![1.0, 2.0], vec![1.0]], vec![1.0, 1.0]),
            Err(SolveError::Dimension { .. })
        ));
        assert_eq!(
            LinearSystem::new(vec![vec![f64::NAN]], vec![1.0]),
            Err(SolveError::NonFinite)
        );
    }

    fn shifted_system(n: usize) -> impl Strategy<Value = LinearSystem> {
        (
            prop::collection::vec(-1.0..1.0_f64, n * n),
            prop::collection::vec(-1.0..1.0_f64, n),
        )
            .prop_map(move |(mut a, b)| {
                for i in 0..n {
                    a[i * n + i] += n as f64;
                }
                LinearSystem::from_row_major(n, a, b).unwrap()
            })
    }

    proptest! {
        #[test]
        fn random_five_by_five_residual(s in shifted_system(5)) {
            let x = gaussian_solve(&s).unwrap();
            let bnorm = s.rhs().iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
            prop_assert!(residual_norm(&s, &x) <= 1e-9 * bnorm.max(1.0));
        }

        #[test]
        fn row_permutation_invariant(s in (1usize..8).prop_flat_map(shifted_system), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let n = s.dim();
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a: Vec<Vec<f64>> = perm.iter().map(|&r| s.row(r).to_vec()).collect();
            let b: Vec<f64> = perm.iter().map(|&r| s.rhs()[r]).collect();
            let x1 = gaussian_solve(&s).unwrap();
            let x2 = gaussian_solve(&LinearSystem::new(a, b).unwrap()).unwrap();
            for (u, v) in x1.iter().zip(&x2) {
                prop_assert!((u - v).abs() <= 1e-12 * u.abs().max(1.0));
            }
        }
    }
}
