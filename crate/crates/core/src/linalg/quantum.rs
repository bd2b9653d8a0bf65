use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{eigh, Eigh, Matrix, RegisterLayout, C64, HERMITIAN_TOL, NORM_TOL, PSD_REL_TOL, TRACE_TOL};
use crate::error::{Error, Result};

/// Tensor product of two objects over disjoint registers.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

fn check_same_layout(a: &RegisterLayout, b: &RegisterLayout) -> Result<()> {
    if a != b {
        return Err(Error::Layout(format!("layouts differ: {a} vs {b}")));
    }
    Ok(())
}

fn check_dim(layout: &RegisterLayout, len: usize) -> Result<()> {
    if layout.total_dim() != len {
        return Err(Error::Layout(format!(
            "layout {layout} has dimension {} but data has {len}",
            layout.total_dim()
        )));
    }
    Ok(())
}

/// Normalized pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: RegisterLayout,
    amps: Vec<C64>,
}

impl StateVector {
    /// Wraps amplitudes that are already normalized (within [`NORM_TOL`]).
    pub fn new(layout: RegisterLayout, amps: Vec<C64>) -> Result<Self> {
        check_dim(&layout, amps.len())?;
        let norm = norm(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { layout, amps })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(layout: RegisterLayout, mut amps: Vec<C64>) -> Result<Self> {
        check_dim(&layout, amps.len())?;
        let n = norm(&amps);
        if !n.is_finite() || n <= 0.0 {
            return Err(Error::Domain(format!("cannot normalize a vector of norm {n}")));
        }
        for a in amps.iter_mut() {
            *a /= n;
        }
        Ok(Self { layout, amps })
    }

    pub fn basis(layout: RegisterLayout, index: usize) -> Result<Self> {
        let dim = layout.total_dim();
        if index >= dim {
            return Err(Error::Domain(format!("basis index {index} out of range for dimension {dim}")));
        }
        let mut amps = alloc::vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { layout, amps })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// Entrywise complex conjugate in the computational basis.
    pub fn conj(&self) -> Self {
        Self { layout: self.layout.clone(), amps: self.amps.iter().map(|a| a.conj()).collect() }
    }

    /// Same amplitudes under a different (equal-dimension) layout.
    pub fn relabel(&self, layout: RegisterLayout) -> Result<Self> {
        check_dim(&layout, self.amps.len())?;
        Ok(Self { layout, amps: self.amps.clone() })
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        check_same_layout(&self.layout, &other.layout)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator { layout: self.layout.clone(), matrix: Matrix::outer(&self.amps, &self.amps) }
    }

    /// Applies a unitary acting on the named registers and keeps the result
    /// normalized. Non-unitary operators should go through [`apply_local`].
    pub fn apply_unitary(&self, op: &Matrix, labels: &[&str]) -> Result<Self> {
        let amps = apply_local(&self.layout, &self.amps, op, labels)?;
        Self::new(self.layout.clone(), amps)
    }
}

impl Tensor for StateVector {
    fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|&a| other.amps.iter().map(move |&b| a * b))
            .collect();
        Ok(Self { layout, amps })
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Applies `op` (acting on the registers named in `labels`, taken in layout
/// order) to a raw amplitude vector, identity elsewhere.
pub fn apply_local(layout: &RegisterLayout, amps: &[C64], op: &Matrix, labels: &[&str]) -> Result<Vec<C64>> {
    check_dim(layout, amps.len())?;
    let pos = layout.positions_of(labels)?;
    let local_dim: usize = pos.iter().map(|&p| layout.registers()[p].dim).product();
    if op.rows() != local_dim || op.cols() != local_dim {
        return Err(Error::Layout(format!(
            "operator is {}x{} but registers {labels:?} have dimension {local_dim}",
            op.rows(),
            op.cols()
        )));
    }
    let (local, rest) = layout.split_offsets(&pos);
    let mut out = alloc::vec![C64::new(0.0, 0.0); amps.len()];
    let mut gathered = alloc::vec![C64::new(0.0, 0.0); local_dim];
    for &r in &rest {
        for (g, &l) in gathered.iter_mut().zip(&local) {
            *g = amps[r + l];
        }
        for (i, &li) in local.iter().enumerate() {
            out[r + li] = op.row(i).iter().zip(&gathered).map(|(a, b)| a * b).sum();
        }
    }
    Ok(out)
}

/// `op ⊗ I` on the full layout as a dense matrix (`op` on `labels`, taken
/// in layout order).
pub fn embed_local(layout: &RegisterLayout, op: &Matrix, labels: &[&str]) -> Result<Matrix> {
    let dim = layout.total_dim();
    let pos = layout.positions_of(labels)?;
    let local_dim: usize = pos.iter().map(|&p| layout.registers()[p].dim).product();
    if op.rows() != local_dim || op.cols() != local_dim {
        return Err(Error::Layout(format!(
            "operator is {}x{} but registers {labels:?} have dimension {local_dim}",
            op.rows(),
            op.cols()
        )));
    }
    let (local, rest) = layout.split_offsets(&pos);
    let mut out = Matrix::zeros(dim, dim);
    for &r in &rest {
        for (i, &li) in local.iter().enumerate() {
            for (j, &lj) in local.iter().enumerate() {
                out[(r + li, r + lj)] = op[(i, j)];
            }
        }
    }
    Ok(out)
}

/// `Tr_{complement of keep}[|a⟩⟨b|]` without forming the outer product.
pub fn partial_trace_outer<S: AsRef<str>>(
    layout: &RegisterLayout,
    a: &[C64],
    b: &[C64],
    keep: &[S],
) -> Result<(RegisterLayout, Matrix)> {
    check_dim(layout, a.len())?;
    check_dim(layout, b.len())?;
    let pos = keep_positions(layout, keep)?;
    let (kept, traced) = layout.split_offsets(&pos);
    let k = kept.len();
    let mut out = Matrix::zeros(k, k);
    for (i, &ki) in kept.iter().enumerate() {
        for (j, &kj) in kept.iter().enumerate() {
            out[(i, j)] = traced.iter().map(|&t| a[ki + t] * b[kj + t].conj()).sum();
        }
    }
    Ok((layout.select(&pos), out))
}

/// Partial trace of a dense operator, keeping `keep` in layout order.
pub fn partial_trace_matrix<S: AsRef<str>>(
    layout: &RegisterLayout,
    m: &Matrix,
    keep: &[S],
) -> Result<(RegisterLayout, Matrix)> {
    check_dim(layout, m.rows())?;
    check_dim(layout, m.cols())?;
    let pos = keep_positions(layout, keep)?;
    let (kept, traced) = layout.split_offsets(&pos);
    let k = kept.len();
    let mut out = Matrix::zeros(k, k);
    for (i, &ki) in kept.iter().enumerate() {
        for (j, &kj) in kept.iter().enumerate() {
            out[(i, j)] = traced.iter().map(|&t| m[(ki + t, kj + t)]).sum();
        }
    }
    Ok((layout.select(&pos), out))
}

fn keep_positions<S: AsRef<str>>(layout: &RegisterLayout, keep: &[S]) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::Layout("partial trace must keep at least one register".into()));
    }
    layout.positions_of(keep)
}

/// Hermitian operator without trace or positivity constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    layout: RegisterLayout,
    matrix: Matrix,
}

impl HermitianOperator {
    pub fn new(layout: RegisterLayout, matrix: Matrix) -> Result<Self> {
        check_dim(&layout, matrix.rows())?;
        check_dim(&layout, matrix.cols())?;
        let defect = matrix.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::Domain(format!("operator is not Hermitian (defect {defect:e})")));
        }
        Ok(Self { layout, matrix })
    }

    /// Symmetrizes `matrix` first; for results of exact Hermitian arithmetic
    /// that picked up rounding noise.
    pub fn from_rounded(layout: RegisterLayout, matrix: &Matrix) -> Result<Self> {
        Self::new(layout, matrix.hermitian_part())
    }

    pub fn identity(layout: RegisterLayout) -> Self {
        let d = layout.total_dim();
        Self { layout, matrix: Matrix::identity(d) }
    }

    pub fn zeros(layout: RegisterLayout) -> Self {
        let d = layout.total_dim();
        Self { layout, matrix: Matrix::zeros(d, d) }
    }

    /// `|ψ⟩⟨ψ|`
    pub fn projector(state: &StateVector) -> Self {
        Self { layout: state.layout.clone(), matrix: Matrix::outer(&state.amps, &state.amps) }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn eigh(&self) -> Result<Eigh> {
        eigh(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigh()?.min_value())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { layout: self.layout.clone(), matrix: self.matrix.scale_real(s) }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        check_same_layout(&self.layout, &other.layout)?;
        Ok(Self { layout: self.layout.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_same_layout(&self.layout, &other.layout)?;
        Ok(Self { layout: self.layout.clone(), matrix: &self.matrix - &other.matrix })
    }

    /// `⟨ψ|H|ψ⟩`
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        check_same_layout(&self.layout, &state.layout)?;
        let hv = self.matrix.apply(&state.amps);
        Ok(state.amps.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum::<C64>().re)
    }

    /// `Tr[H ρ]`
    pub fn expectation_density(&self, rho: &DensityOperator) -> Result<f64> {
        check_same_layout(&self.layout, &rho.layout)?;
        Ok(trace_of_product(&self.matrix, &rho.matrix))
    }

    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        let (layout, matrix) = partial_trace_matrix(&self.layout, &self.matrix, keep)?;
        Ok(Self { layout, matrix: matrix.hermitian_part() })
    }
}

impl Tensor for HermitianOperator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self { layout: self.layout.concat(&other.layout)?, matrix: self.matrix.kron(&other.matrix) })
    }
}

/// `Tr[A B]` without forming the product.
pub(crate) fn trace_of_product(a: &Matrix, b: &Matrix) -> f64 {
    let n = a.rows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc.re
}

/// Density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    layout: RegisterLayout,
    matrix: Matrix,
}

impl DensityOperator {
    /// Validates Hermiticity, positivity (relative tolerance) and trace.
    pub fn new(layout: RegisterLayout, matrix: Matrix) -> Result<Self> {
        let h = HermitianOperator::new(layout, matrix)?;
        let tr = h.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::Domain(format!("density operator has trace {tr}")));
        }
        let e = h.eigh()?;
        if e.min_value() < -PSD_REL_TOL * e.max_value().abs().max(1.0) {
            return Err(Error::Domain(format!(
                "density operator has negative eigenvalue {:e}",
                e.min_value()
            )));
        }
        Ok(Self { layout: h.layout, matrix: h.matrix })
    }

    /// Normalizes a nonzero positive operator by its trace.
    pub fn from_unnormalized(op: &HermitianOperator) -> Result<Self> {
        let tr = op.trace();
        if tr.is_nan() || tr <= 0.0 {
            return Err(Error::Domain(format!("cannot normalize operator with trace {tr}")));
        }
        Self::new(op.layout.clone(), op.matrix.scale_real(1.0 / tr))
    }

    pub fn from_pure(state: &StateVector) -> Self {
        state.to_density()
    }

    pub fn maximally_mixed(layout: RegisterLayout) -> Self {
        let d = layout.total_dim();
        Self { layout, matrix: Matrix::identity(d).scale_real(1.0 / d as f64) }
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn as_hermitian(&self) -> HermitianOperator {
        HermitianOperator { layout: self.layout.clone(), matrix: self.matrix.clone() }
    }

    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        let (layout, matrix) = partial_trace_matrix(&self.layout, &self.matrix, keep)?;
        Ok(Self { layout, matrix: matrix.hermitian_part() })
    }

    /// `⟨ψ|ρ|ψ⟩`
    pub fn overlap(&self, state: &StateVector) -> Result<f64> {
        self.as_hermitian().expectation(state)
    }

    /// `U ρ U†` for a unitary on the whole space.
    pub fn conjugate_by(&self, u: &Matrix) -> Result<Self> {
        if u.rows() != self.dim() || u.cols() != self.dim() {
            return Err(Error::Layout("unitary dimension does not match state".into()));
        }
        let m = u.matmul(&self.matrix).matmul(&u.adjoint());
        Ok(Self { layout: self.layout.clone(), matrix: m.hermitian_part() })
    }

    /// Convex combination `Σ w_i ρ_i`; weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::Domain("empty mixture".into()))?;
        let layout = first.1.layout.clone();
        let d = layout.total_dim();
        let mut m = Matrix::zeros(d, d);
        for (w, rho) in parts {
            check_same_layout(&layout, &rho.layout)?;
            if *w < 0.0 {
                return Err(Error::Domain(format!("negative mixture weight {w}")));
            }
            m.add_scaled(&rho.matrix, *w);
        }
        Self::new(layout, m)
    }
}

impl Tensor for DensityOperator {
    fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self { layout: self.layout.concat(&other.layout)?, matrix: self.matrix.kron(&other.matrix) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn qubit(label: &str) -> RegisterLayout {
        RegisterLayout::single(label, 2).unwrap()
    }

    fn ket(label: &str, bits: &[f64]) -> StateVector {
        StateVector::normalized(
            RegisterLayout::single(label, bits.len()).unwrap(),
            bits.iter().map(|&b| C64::new(b, 0.0)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let s = ket("A", &[1.0, 0.0]).tensor(&ket("B", &[0.0, 1.0])).unwrap();
        let re: Vec<f64> = s.amplitudes().iter().map(|z| z.re).collect();
        assert_eq!(re, vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(s.layout().labels().collect::<Vec<_>>(), vec!["A", "B"]);
    }

    #[test]
    fn tensor_rejects_shared_labels() {
        let a = ket("A", &[1.0, 0.0]);
        assert!(matches!(a.tensor(&a), Err(Error::Layout(_))));
        let i = HermitianOperator::identity(qubit("A"));
        assert!(matches!(i.tensor(&i), Err(Error::Layout(_))));
    }

    #[test]
    fn identity_tensor_identity() {
        let a = HermitianOperator::identity(qubit("A"));
        let b = HermitianOperator::identity(qubit("B"));
        assert_eq!(a.tensor(&b).unwrap().matrix(), &Matrix::identity(4));
    }

    #[test]
    fn partial_trace_of_product_state() {
        let psi = ket("A", &[0.6, 0.8]);
        let prod = psi.tensor(&ket("B", &[1.0, 0.0])).unwrap();
        let rho = prod.to_density().partial_trace(&["A"]).unwrap();
        assert!(rho.matrix().max_abs_diff(psi.to_density().matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_unknown_label() {
        let rho = ket("A", &[1.0, 0.0]).to_density();
        assert!(matches!(rho.partial_trace(&["Z"]), Err(Error::Layout(_))));
        let empty: [&str; 0] = [];
        assert!(matches!(rho.partial_trace(&empty), Err(Error::Layout(_))));
    }

    #[test]
    fn outer_trace_matches_dense_trace() {
        let l = RegisterLayout::new([("a", 2), ("b", 3)]).unwrap();
        let a: Vec<C64> = (0..6).map(|i| C64::new(i as f64, 1.0)).collect();
        let b: Vec<C64> = (0..6).map(|i| C64::new(1.0, -(i as f64))).collect();
        let (_, fast) = partial_trace_outer(&l, &a, &b, &["b"]).unwrap();
        let (_, slow) = partial_trace_matrix(&l, &Matrix::outer(&a, &b), &["b"]).unwrap();
        assert!(fast.max_abs_diff(&slow) < 1e-12);
    }

    #[test]
    fn apply_local_matches_kron() {
        let l = RegisterLayout::new([("a", 2), ("b", 3), ("c", 2)]).unwrap();
        let v: Vec<C64> = (0..12).map(|i| C64::new((i as f64).sin(), (i as f64).cos())).collect();
        let op = Matrix::from_fn(3, 3, |i, j| C64::new((i + 2 * j) as f64, i as f64 - j as f64));
        let full = Matrix::identity(2).kron(&op).kron(&Matrix::identity(2));
        let got = apply_local(&l, &v, &op, &["b"]).unwrap();
        let want = full.apply(&v);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).norm() < 1e-12);
        }
    }

    #[test]
    fn density_validation() {
        let l = qubit("A");
        let bad_trace = Matrix::identity(2);
        assert!(matches!(DensityOperator::new(l.clone(), bad_trace), Err(Error::Domain(_))));
        let negative = Matrix::from_real_diagonal(&[1.5, -0.5]);
        assert!(matches!(DensityOperator::new(l.clone(), negative), Err(Error::Domain(_))));
        let ok = Matrix::from_real_diagonal(&[0.25, 0.75]);
        assert!(DensityOperator::new(l, ok).is_ok());
    }

    #[test]
    fn state_norm_checked() {
        let l = qubit("A");
        assert!(StateVector::new(l.clone(), vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).is_err());
        assert!(StateVector::normalized(l, vec![C64::new(0.0, 0.0); 2]).is_err());
    }
}
