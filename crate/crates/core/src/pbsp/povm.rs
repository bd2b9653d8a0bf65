use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{HermitianOperator, Matrix, RegisterLayout, StateVector, C64};
use crate::states::{alice_label, checked_pow};

/// Completeness tolerance (max elementwise) for the port measurements.
pub const POVM_COMPLETENESS_TOL: f64 = 1e-10;
/// Elements may have eigenvalues down to `-POVM_PSD_TOL`.
pub const POVM_PSD_TOL: f64 = 1e-10;

/// Ordered positive operators on a register set, each with an outcome label.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    layout: RegisterLayout,
    elements: Vec<HermitianOperator>,
    labels: Vec<usize>,
}

/// Numerical health of a POVM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PovmCheck {
    /// `max |Σ_x M_x − I|` elementwise.
    pub completeness_residual: f64,
    /// Smallest eigenvalue over all elements.
    pub min_eigenvalue: f64,
}

impl PovmCheck {
    pub fn passes(&self, completeness_tol: f64, psd_tol: f64) -> bool {
        self.completeness_residual <= completeness_tol && self.min_eigenvalue >= -psd_tol
    }
}

impl Povm {
    /// Assembles a POVM without validating it; see [`Povm::validated`].
    pub fn from_parts(layout: RegisterLayout, elements: Vec<HermitianOperator>, labels: Vec<usize>) -> Result<Self> {
        if elements.len() != labels.len() {
            return Err(Error::Domain("one outcome label per element is required".into()));
        }
        if let Some(bad) = elements.iter().find(|e| e.layout() != &layout) {
            return Err(Error::Layout(format!("element layout {} differs from {layout}", bad.layout())));
        }
        Ok(Self { layout, elements, labels })
    }

    /// Rejects the POVM unless completeness and positivity hold.
    pub fn validated(self, completeness_tol: f64, psd_tol: f64) -> Result<Self> {
        let check = self.check()?;
        if check.completeness_residual > completeness_tol {
            return Err(Error::Numeric(format!(
                "POVM elements sum to identity only within {:e}",
                check.completeness_residual
            )));
        }
        if check.min_eigenvalue < -psd_tol {
            return Err(Error::Numeric(format!(
                "POVM element has eigenvalue {:e}",
                check.min_eigenvalue
            )));
        }
        Ok(self)
    }

    pub fn check(&self) -> Result<PovmCheck> {
        let mut min_eigenvalue = f64::INFINITY;
        for e in &self.elements {
            min_eigenvalue = min_eigenvalue.min(e.min_eigenvalue()?);
        }
        Ok(PovmCheck { completeness_residual: self.completeness_residual(), min_eigenvalue })
    }

    pub fn completeness_residual(&self) -> f64 {
        let d = self.layout.total_dim();
        let mut sum = Matrix::zeros(d, d);
        for e in &self.elements {
            sum.add_scaled(e.matrix(), 1.0);
        }
        sum.max_abs_diff(&Matrix::identity(d))
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, label: usize) -> Option<&HermitianOperator> {
        self.labels.iter().position(|&l| l == label).map(|i| &self.elements[i])
    }

    /// Copy with element `index` multiplied by `factor`; breaks completeness
    /// on purpose so checkers can be exercised.
    pub fn with_scaled_element(&self, index: usize, factor: f64) -> Result<Self> {
        let mut out = self.clone();
        let element = out
            .elements
            .get_mut(index)
            .ok_or_else(|| Error::Domain(format!("element {index} outside 0..{}", self.elements.len())))?;
        *element = element.scale(factor);
        Ok(out)
    }
}

/// Orthonormal basis whose first vector is `v` (unit norm).
pub(crate) fn complete_basis(v: &[C64]) -> Matrix {
    let d = v.len();
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    cols.push(v.to_vec());
    for k in 0..d {
        if cols.len() == d {
            break;
        }
        let mut w = alloc::vec![C64::new(0.0, 0.0); d];
        w[k] = C64::new(1.0, 0.0);
        // two Gram-Schmidt passes for orthogonality to rounding
        for _ in 0..2 {
            for c in &cols {
                let proj: C64 = c.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                for (wi, ci) in w.iter_mut().zip(c) {
                    *wi -= proj * ci;
                }
            }
        }
        let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-6 {
            cols.push(w.into_iter().map(|z| z / n).collect());
        }
    }
    Matrix::from_fn(d, d, |i, j| cols[j][i])
}

/// Diagonal weights of the port measurement in the product basis
/// `⊗_i {ψ*, ψ*⊥}`. Basis digit 0 on port `i` means "ψ found in port i";
/// `weights[x][j]` is the coefficient of outcome `x` (0 = abort) on basis
/// string `j`, i.e. `1/|S|` when `x ∈ S`.
fn port_weights(d: usize, n_ports: usize, deterministic: bool) -> Vec<Vec<f64>> {
    let dim = checked_pow(d, n_ports).expect("checked by caller");
    let mut weights = alloc::vec![alloc::vec![0.0; dim]; n_ports + 1];
    let mut digits = alloc::vec![0usize; n_ports];
    for j in 0..dim {
        let mut rest = j;
        for i in (0..n_ports).rev() {
            digits[i] = rest % d;
            rest /= d;
        }
        let found: Vec<usize> = (0..n_ports).filter(|&i| digits[i] == 0).collect();
        if found.is_empty() {
            if deterministic {
                for w in weights.iter_mut().skip(1) {
                    w[j] = 1.0 / n_ports as f64;
                }
            } else {
                weights[0][j] = 1.0;
            }
        } else {
            let share = 1.0 / found.len() as f64;
            for &i in &found {
                weights[i + 1][j] = share;
            }
        }
    }
    weights
}

fn build_port_povm(psi: &StateVector, n_ports: usize, budget: usize, deterministic: bool) -> Result<Povm> {
    if n_ports < 1 {
        return Err(Error::Domain("at least one port is required".into()));
    }
    let d = psi.dim();
    if d < 2 {
        return Err(Error::Domain(format!("qudit dimension must be at least 2, got {d}")));
    }
    let dim = match checked_pow(d, n_ports) {
        Some(dim) if dim <= budget => dim,
        other => return Err(Error::Capacity { required: other.unwrap_or(usize::MAX), budget }),
    };
    let basis = complete_basis(psi.conj().amplitudes());
    let mut product = Matrix::identity(1);
    for _ in 0..n_ports {
        product = product.kron(&basis);
    }
    let layout = RegisterLayout::new((1..=n_ports).map(|i| (alice_label(i), d)))?;
    let weights = port_weights(d, n_ports, deterministic);
    let first = if deterministic { 1 } else { 0 };
    let mut elements = Vec::with_capacity(n_ports + 1 - first);
    let mut labels = Vec::with_capacity(n_ports + 1 - first);
    for (x, w) in weights.iter().enumerate().skip(first) {
        // W diag(w) W†
        let mut m = Matrix::zeros(dim, dim);
        for (j, &wj) in w.iter().enumerate() {
            if wj == 0.0 {
                continue;
            }
            for r in 0..dim {
                let a = product[(r, j)] * wj;
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for c in 0..dim {
                    m[(r, c)] += a * product[(c, j)].conj();
                }
            }
        }
        elements.push(HermitianOperator::from_rounded(layout.clone(), &m)?);
        labels.push(x);
    }
    Povm::from_parts(layout, elements, labels)?.validated(POVM_COMPLETENESS_TOL, POVM_PSD_TOL)
}

/// Probabilistic port measurement `{M_0, M_1..M_N}` on `A1..AN`:
/// `M_0 = ⊗(I − P*)`, `M_x = Σ_{S∋x} (1/|S|) ⊗_{i∈S} P* ⊗_{i∉S} (I − P*)`
/// with `P* = |ψ*⟩⟨ψ*|`.
pub fn prob_povm(psi: &StateVector, n_ports: usize) -> Result<Povm> {
    prob_povm_with_budget(psi, n_ports, crate::states::DEFAULT_DENSE_BUDGET)
}

pub fn prob_povm_with_budget(psi: &StateVector, n_ports: usize, budget: usize) -> Result<Povm> {
    build_port_povm(psi, n_ports, budget, false)
}

/// Deterministic port measurement `M'_x = M_x + M_0/N`, outcomes `1..N`.
pub fn det_povm(psi: &StateVector, n_ports: usize) -> Result<Povm> {
    det_povm_with_budget(psi, n_ports, crate::states::DEFAULT_DENSE_BUDGET)
}

pub fn det_povm_with_budget(psi: &StateVector, n_ports: usize, budget: usize) -> Result<Povm> {
    build_port_povm(psi, n_ports, budget, true)
}
