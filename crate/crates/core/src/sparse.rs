//! Coordinate-format assembly and sparse direct factorizations (backed by faer).
//!
//! Factorizations run with sequential parallelism so that repeated runs give
//! bitwise-identical results.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::lu;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::linalg::SupernodalThreshold;
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};
use faer::{Col, Conj, Mat, Par, Side};

use crate::error::{Error, Result};

/// Square matrix in coordinate format. Duplicates are summed.
#[derive(Debug, Clone, Default)]
pub struct Triplets {
    n: usize,
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Triplets {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            ..Default::default()
        }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self {
            n,
            rows: Vec::with_capacity(cap),
            cols: Vec::with_capacity(cap),
            vals: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.n && c < self.n);
        self.rows.push(r);
        self.cols.push(c);
        self.vals.push(v);
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.rows
            .iter()
            .zip(&self.cols)
            .zip(&self.vals)
            .map(|((&r, &c), &v)| (r, c, v))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (r, c, v) in self.entries() {
            y[r] += v * x[c];
        }
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        self.entries().map(|(r, c, v)| x[r] * v * y[c]).sum()
    }

    /// Dense copy (tests and small systems only).
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for (r, c, v) in self.entries() {
            a[r][c] += v;
        }
        a
    }

    fn same_pattern(&self, rows: &[usize], cols: &[usize]) -> bool {
        self.rows == rows && self.cols == cols
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

struct LuPattern {
    rows: Vec<usize>,
    cols: Vec<usize>,
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    lu: lu::SymbolicLu<usize>,
}

/// Sparse LU with partial pivoting. The symbolic analysis is reused while the
/// triplet pattern stays identical between calls.
#[derive(Default)]
pub struct LuSolver {
    pattern: Option<LuPattern>,
    numeric: lu::NumericLu<usize, f64>,
    buffer: Option<MemBuffer>,
}

/// Outcome of a direct solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub relative_residual: f64,
}

impl LuSolver {
    pub fn new() -> Self {
        faer::set_global_parallelism(Par::Seq);
        Self::default()
    }

    fn ensure_pattern(&mut self, a: &Triplets) -> Result<()> {
        if let Some(p) = &self.pattern {
            if a.same_pattern(&p.rows, &p.cols) {
                return Ok(());
            }
        }
        let idx: Vec<Pair<usize, usize>> = a
            .rows
            .iter()
            .zip(&a.cols)
            .map(|(&r, &c)| Pair::new(r, c))
            .collect();
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(a.n, a.n, &idx)
            .map_err(|e| Error::SolverFailure(format!("pattern construction: {e:?}")))?;
        let params = lu::LuSymbolicParams {
            supernodal_flop_ratio_threshold: SupernodalThreshold::FORCE_SUPERNODAL,
            ..Default::default()
        };
        let lu = lu::factorize_symbolic_lu(symbolic.as_ref(), params)
            .map_err(|e| Error::SolverFailure(format!("symbolic LU: {e:?}")))?;
        let req = lu
            .factorize_numeric_lu_scratch::<f64>(Par::Seq, Default::default())
            .or(lu.solve_in_place_scratch::<f64>(1, Par::Seq));
        self.buffer = Some(MemBuffer::new(req));
        self.pattern = Some(LuPattern {
            rows: a.rows.clone(),
            cols: a.cols.clone(),
            symbolic,
            argsort,
            lu,
        });
        Ok(())
    }

    /// Factorizes `a` and solves `a x = b`, with one step of iterative
    /// refinement. Fails if the final relative residual exceeds `tol`.
    pub fn solve(&mut self, a: &Triplets, b: &[f64], tol: f64) -> Result<SolveReport> {
        if b.len() != a.n {
            return Err(Error::AssemblyShapeMismatch(format!(
                "rhs has {} entries for a {}x{} system",
                b.len(),
                a.n,
                a.n
            )));
        }
        let bn = norm(b);
        if bn == 0.0 {
            return Ok(SolveReport {
                x: vec![0.0; a.n],
                relative_residual: 0.0,
            });
        }
        self.ensure_pattern(a)?;
        let p = self.pattern.as_ref().expect("pattern set above");
        let mat = SparseColMat::new_from_argsort(p.symbolic.clone(), &p.argsort, &a.vals)
            .map_err(|e| Error::SolverFailure(format!("matrix values: {e:?}")))?;
        let buf = self.buffer.as_mut().expect("buffer set with pattern");
        let lu = p
            .lu
            .factorize_numeric_lu(
                &mut self.numeric,
                mat.as_ref(),
                Par::Seq,
                MemStack::new(buf),
                Default::default(),
            )
            .map_err(|e| Error::SolverFailure(format!("numeric LU: {e:?}")))?;
        let mut solve = |rhs: &[f64]| -> Vec<f64> {
            let mut m = Mat::<f64>::from_fn(rhs.len(), 1, |i, _| rhs[i]);
            lu.solve_in_place_with_conj(Conj::No, m.as_mut(), Par::Seq, MemStack::new(buf));
            (0..rhs.len()).map(|i| m[(i, 0)]).collect()
        };
        let mut x = solve(b);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverFailure("non-finite solution".into()));
        }
        let residual = |x: &[f64]| -> Vec<f64> {
            let ax = a.matvec(x);
            b.iter().zip(&ax).map(|(b, ax)| b - ax).collect()
        };
        let mut r = residual(&x);
        let mut rel = norm(&r) / bn;
        if rel > 1e-14 {
            let dx = solve(&r);
            let refined: Vec<f64> = (0..a.n).map(|i| x[i] + dx[i]).collect();
            let r2 = residual(&refined);
            let rel2 = norm(&r2) / bn;
            if rel2 < rel {
                x = refined;
                r = r2;
                rel = rel2;
            }
        }
        let _ = r;
        if !(rel <= tol) {
            return Err(Error::SolverFailure(format!(
                "relative residual {rel:e} exceeds {tol:e}"
            )));
        }
        Ok(SolveReport {
            x,
            relative_residual: rel,
        })
    }
}

/// Sparse Cholesky of a fixed symmetric positive definite matrix, factored once.
#[derive(Clone)]
pub struct SpdSolver {
    n: usize,
    llt: Llt<usize, f64>,
    matrix: Triplets,
}

impl std::fmt::Debug for SpdSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpdSolver").field("n", &self.n).finish()
    }
}

impl SpdSolver {
    pub fn new(a: Triplets) -> Result<Self> {
        faer::set_global_parallelism(faer::Par::Seq);
        let idx: Vec<Pair<usize, usize>> = a
            .rows
            .iter()
            .zip(&a.cols)
            .map(|(&r, &c)| Pair::new(r, c))
            .collect();
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(a.n, a.n, &idx)
            .map_err(|e| Error::SolverFailure(format!("pattern construction: {e:?}")))?;
        let mat = SparseColMat::new_from_argsort(symbolic, &argsort, &a.vals)
            .map_err(|e| Error::SolverFailure(format!("matrix values: {e:?}")))?;
        let sym = SymbolicLlt::try_new(mat.symbolic(), Side::Lower)
            .map_err(|e| Error::SolverFailure(format!("symbolic Cholesky: {e:?}")))?;
        let llt = Llt::try_new_with_symbolic(sym, mat.as_ref(), Side::Lower)
            .map_err(|e| Error::SolverFailure(format!("Cholesky: {e:?}")))?;
        Ok(Self {
            n: a.n,
            llt,
            matrix: a,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Triplets {
        &self.matrix
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let rhs = Col::<f64>::from_fn(self.n, |i| b[i]);
        let x = self.llt.solve(&rhs);
        (0..self.n).map(|i| x[i]).collect()
    }
}

/// Dense symmetric positive definite solve by Cholesky; `None` if not SPD.
pub fn dense_cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i][k] * y[k];
        }
        y[i] = s / l[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in (i + 1)..n {
            s -= l[k][i] * x[k];
        }
        x[i] = s / l[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_saddle_point_and_reuses_pattern() {
        let mut a = Triplets::new(3);
        a.push(0, 0, 2.0);
        a.push(1, 1, 2.0);
        a.push(0, 2, 1.0);
        a.push(2, 0, 1.0);
        a.push(1, 2, 1.0);
        a.push(2, 1, 1.0);
        a.push(2, 2, 0.0);
        let mut s = LuSolver::new();
        let r = s.solve(&a, &[1.0, 2.0, 3.0], 1e-12).unwrap();
        assert!((r.x[0] - 1.25).abs() < 1e-14);
        assert!((r.x[1] - 1.75).abs() < 1e-14);
        assert!((r.x[2] + 1.5).abs() < 1e-14);
        // same pattern, new values
        let mut a2 = a.clone();
        a2.vals[0] = 4.0;
        let r2 = s.solve(&a2, &[1.0, 2.0, 3.0], 1e-12).unwrap();
        let ax = a2.matvec(&r2.x);
        for (u, v) in ax.iter().zip([1.0, 2.0, 3.0]) {
            assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_system_fails() {
        let mut a = Triplets::new(2);
        a.push(0, 0, 1.0);
        a.push(0, 1, 1.0);
        a.push(1, 0, 1.0);
        a.push(1, 1, 1.0);
        let mut s = LuSolver::new();
        assert!(s.solve(&a, &[1.0, 0.0], 1e-10).is_err());
    }

    #[test]
    fn spd_solver_matches_dense_cholesky() {
        let n = 6;
        let mut a = Triplets::new(n);
        for i in 0..n {
            a.push(i, i, 4.0);
            if i + 1 < n {
                a.push(i, i + 1, -1.0);
                a.push(i + 1, i, -1.0);
            }
        }
        let b: Vec<f64> = (0..n).map(|i| i as f64 + 1.0).collect();
        let x = SpdSolver::new(a.clone()).unwrap().solve(&b);
        let y = dense_cholesky_solve(&a.to_dense(), &b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            assert!((u - v).abs() < 1e-13);
        }
    }
}
