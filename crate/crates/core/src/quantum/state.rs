use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen};

use super::{n_qubits_of, CMatrix, CVector, C64, EIGEN_CLAMP, HERMITIAN_TOL, NORM_TOL};
use crate::error::{Error, Result};

/// Normalized pure state on 1 to 3 qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVector,
}

impl StateVector {
    /// Wraps `amps`, requiring unit norm and a power-of-two length.
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let v = Self::check_dim(amps)?;
        let norm = v.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self { amps: v })
    }

    /// Normalizes `amps` first. Fails on the zero vector.
    pub fn normalized(amps: Vec<C64>) -> Result<Self> {
        let v = Self::check_dim(amps)?;
        let norm = v.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Ok(Self { amps: v / C64::from(norm) })
    }

    fn check_dim(amps: Vec<C64>) -> Result<CVector> {
        if n_qubits_of(amps.len()).is_none() {
            return Err(Error::InvalidState(format!(
                "dimension {} is not a power of two",
                amps.len()
            )));
        }
        Ok(DVector::from_vec(amps))
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let dim = 1 << n_qubits;
        assert!(index < dim, "basis index out of range");
        let mut amps = DVector::zeros(dim);
        amps[index] = C64::from(1.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> C64 {
        self.amps[index]
    }

    /// Removes the global phase so the first nonzero amplitude is real positive.
    pub fn canonical_phase(mut self) -> Self {
        if let Some(first) = self.amps.iter().find(|a| a.norm() > 1e-14) {
            let phase = first.conj() / first.norm();
            self.amps *= phase;
        }
        self
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn projector(&self) -> DensityOperator {
        DensityOperator {
            matrix: &self.amps * self.amps.adjoint(),
        }
    }

    /// Reorders qubits so that new qubit `k` is old qubit `order[k]`.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<Self> {
        let n = self.n_qubits();
        let map = permutation_map(n, order)?;
        let mut amps = DVector::zeros(self.dim());
        for (old, &new) in map.iter().enumerate() {
            amps[new] = self.amps[old];
        }
        Ok(Self { amps })
    }
}

/// Positive semidefinite, unit-trace operator on 1 to 3 qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    /// Validates Hermiticity, unit trace and the eigenvalue floor.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || n_qubits_of(dim).is_none() {
            return Err(Error::InvalidState(format!(
                "matrix {}x{} is not square with power-of-two size",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm_err = (&matrix - matrix.adjoint()).camax();
        if herm_err > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian ({herm_err:e})")));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > HERMITIAN_TOL || tr.im.abs() > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let rho = Self { matrix };
        let min = rho.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -EIGEN_CLAMP {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(rho)
    }

    /// Hermitizes and trace-normalizes `matrix` before validating it.
    pub fn from_unnormalized(matrix: CMatrix) -> Result<Self> {
        let herm = (&matrix + matrix.adjoint()) * C64::from(0.5);
        let tr = herm.trace().re;
        if tr <= 0.0 || !tr.is_finite() {
            return Err(Error::InvalidState(format!("trace {tr} is not positive")));
        }
        Self::new(herm / C64::from(tr))
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        Self {
            matrix: CMatrix::identity(dim, dim) / C64::from(dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Spectral decomposition `(weight, eigenvector)` with weights above 1e-14.
    pub fn pure_components(&self) -> Vec<(f64, StateVector)> {
        let eig = SymmetricEigen::new(self.matrix.clone());
        let mut out = Vec::new();
        for (k, &w) in eig.eigenvalues.iter().enumerate() {
            if w > 1e-14 {
                let col = eig.eigenvectors.column(k).into_owned();
                out.push((w, StateVector { amps: col }));
            }
        }
        out
    }

    /// `⟨ψ|ρ|ψ⟩` without clamping.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: psi.dim(),
            });
        }
        let v = psi.amplitudes();
        Ok(v.dotc(&(&self.matrix * v)).re)
    }

    /// `p·self + (1 − p)·other`.
    pub fn mix(&self, p: f64, other: &DensityOperator) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!("mixing weight {p}")));
        }
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Self {
            matrix: &self.matrix * C64::from(p) + &other.matrix * C64::from(1.0 - p),
        })
    }

    /// Reorders qubits so that new qubit `k` is old qubit `order[k]`.
    pub fn permute_qubits(&self, order: &[usize]) -> Result<Self> {
        let map = permutation_map(self.n_qubits(), order)?;
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(map[i], map[j])] = self.matrix[(i, j)];
            }
        }
        Ok(Self { matrix: m })
    }

    /// Reduced state on the qubits in `keep`, in ascending qubit order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let n = self.n_qubits();
        if keep.is_empty() {
            return Err(Error::InvalidArgument("empty keep set".into()));
        }
        let mut keep: Vec<usize> = keep.to_vec();
        keep.sort_unstable();
        keep.dedup();
        if let Some(&bad) = keep.iter().find(|&&q| q >= n) {
            return Err(Error::InvalidArgument(format!(
                "qubit {bad} out of range for {n} qubits"
            )));
        }
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let kd = 1usize << keep.len();
        let td = 1usize << traced.len();
        let index = |kept: usize, tr: usize| -> usize {
            let mut idx = 0;
            for (k, &q) in keep.iter().enumerate() {
                let bit = (kept >> (keep.len() - 1 - k)) & 1;
                idx |= bit << (n - 1 - q);
            }
            for (k, &q) in traced.iter().enumerate() {
                let bit = (tr >> (traced.len() - 1 - k)) & 1;
                idx |= bit << (n - 1 - q);
            }
            idx
        };
        let mut m = CMatrix::zeros(kd, kd);
        for a in 0..kd {
            for b in 0..kd {
                let mut s = C64::from(0.0);
                for t in 0..td {
                    s += self.matrix[(index(a, t), index(b, t))];
                }
                m[(a, b)] = s;
            }
        }
        Ok(Self { matrix: m })
    }

    /// Conjugates by a single-qubit unitary acting on `qubit`.
    pub fn apply_local_unitary(&self, qubit: usize, u: &Matrix2<C64>) -> Result<Self> {
        let full = embed_single_qubit(self.n_qubits(), qubit, u)?;
        Ok(Self {
            matrix: &full * &self.matrix * full.adjoint(),
        })
    }
}

/// Kronecker product with the left operand's qubits most significant.
pub trait Kron {
    fn kron(&self, other: &Self) -> Self;
}

impl Kron for StateVector {
    fn kron(&self, other: &Self) -> Self {
        Self {
            amps: self.amps.kronecker(&other.amps),
        }
    }
}

impl Kron for DensityOperator {
    fn kron(&self, other: &Self) -> Self {
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }
}

/// `a ⊗ b` for two objects of the same kind; mixing kinds does not type-check.
pub fn tensor<T: Kron>(a: &T, b: &T) -> T {
    a.kron(b)
}

/// Full-register operator for a single-qubit gate.
pub(crate) fn embed_single_qubit(n: usize, qubit: usize, u: &Matrix2<C64>) -> Result<CMatrix> {
    if qubit >= n {
        return Err(Error::InvalidArgument(format!(
            "qubit {qubit} out of range for {n} qubits"
        )));
    }
    let mut full = DMatrix::<C64>::identity(1, 1);
    for q in 0..n {
        let factor = if q == qubit {
            DMatrix::from_fn(2, 2, |r, c| u[(r, c)])
        } else {
            DMatrix::identity(2, 2)
        };
        full = full.kronecker(&factor);
    }
    Ok(full)
}

/// For each old index, its new index under the qubit reordering `order`.
pub(crate) fn permutation_map(n: usize, order: &[usize]) -> Result<Vec<usize>> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::InvalidArgument(format!(
            "permutation of length {} for {n} qubits",
            order.len()
        )));
    }
    for &q in order {
        if q >= n || seen[q] {
            return Err(Error::InvalidArgument(format!("invalid permutation {order:?}")));
        }
        seen[q] = true;
    }
    let dim = 1usize << n;
    Ok((0..dim)
        .map(|old| {
            let mut new = 0;
            for (k, &q) in order.iter().enumerate() {
                let bit = (old >> (n - 1 - q)) & 1;
                new |= bit << (n - 1 - k);
            }
            new
        })
        .collect())
}
