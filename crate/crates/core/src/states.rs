//! Resource states, Haar sampling, program states and Boolean-function
//! unitaries.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{qr, Matrix, RegisterLayout, StateVector, Tensor, C64};

/// Default cap on the total dimension of any dense state the crate builds.
pub const DEFAULT_DENSE_BUDGET: usize = 1 << 20;

/// Tolerance for `U†U = I`.
pub const UNITARY_TOL: f64 = 1e-10;

/// Label of Alice's half of port `i` (1-based).
pub fn alice_label(i: usize) -> String {
    format!("A{i}")
}

/// Label of Bob's port `i` (1-based).
pub fn bob_label(i: usize) -> String {
    format!("B{i}")
}

/// Register label for a classical description turned into a quantum state.
pub const DATA_LABEL: &str = "D";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResourceKind {
    /// One maximally entangled pair `φ⁺_d` per port.
    MaximallyEntangledProduct,
}

/// Shared resource: `n_ports` copies of `φ⁺_d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResourceSpec {
    pub d: usize,
    pub n_ports: usize,
    pub kind: ResourceKind,
    pub dense_budget: usize,
}

impl ResourceSpec {
    pub fn new(d: usize, n_ports: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Domain(format!("qudit dimension must be at least 2, got {d}")));
        }
        if n_ports < 1 {
            return Err(Error::Domain("at least one port is required".into()));
        }
        Ok(Self {
            d,
            n_ports,
            kind: ResourceKind::MaximallyEntangledProduct,
            dense_budget: DEFAULT_DENSE_BUDGET,
        })
    }

    pub fn with_budget(mut self, dense_budget: usize) -> Self {
        self.dense_budget = dense_budget;
        self
    }

    /// `d^N` (Alice's side), `None` on overflow.
    pub fn alice_dim(&self) -> Option<usize> {
        checked_pow(self.d, self.n_ports)
    }

    /// `d^{2N}`, `None` on overflow.
    pub fn resource_dim(&self) -> Option<usize> {
        checked_pow(self.d, 2 * self.n_ports)
    }

    /// Errors unless `d^{2N}` fits in the dense budget.
    pub fn check_dense(&self) -> Result<usize> {
        match self.resource_dim() {
            Some(dim) if dim <= self.dense_budget => Ok(dim),
            Some(dim) => Err(Error::Capacity { required: dim, budget: self.dense_budget }),
            None => Err(Error::Capacity { required: usize::MAX, budget: self.dense_budget }),
        }
    }

    /// `A1..AN, B1..BN`
    pub fn layout(&self) -> RegisterLayout {
        let alice = (1..=self.n_ports).map(|i| (alice_label(i), self.d));
        let bob = (1..=self.n_ports).map(|i| (bob_label(i), self.d));
        RegisterLayout::new(alice.chain(bob)).expect("generated labels are unique")
    }

    pub fn alice_labels(&self) -> Vec<String> {
        (1..=self.n_ports).map(alice_label).collect()
    }

    pub fn bob_labels(&self) -> Vec<String> {
        (1..=self.n_ports).map(bob_label).collect()
    }
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Seeded ChaCha20 stream. ChaCha is counter-based, so a `(seed, stream)`
/// pair names the same sample sequence on every platform.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha20Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, inner: ChaCha20Rng::seed_from_u64(seed) }
    }

    /// Independent stream `stream` under the same root seed; used to hand
    /// each worker (or grid point) its own reproducible sequence.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits in [0, 1)
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n`, `n > 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "empty range");
        // rejection sampling keeps the draw exactly uniform
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.inner.next_u64();
            if v < zone {
                return (v % n) as usize;
            }
        }
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Circularly symmetric complex Gaussian with `E|z|² = 1`.
    pub fn complex_normal(&mut self) -> C64 {
        let s = core::f64::consts::FRAC_1_SQRT_2;
        C64::new(self.standard_normal() * s, self.standard_normal() * s)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Square matrix with `U†U = I` to [`UNITARY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary(Matrix);

impl Unitary {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Domain("unitary must be square".into()));
        }
        let defect = m.adjoint().matmul(&m).max_abs_diff(&Matrix::identity(m.rows()));
        if defect > UNITARY_TOL {
            return Err(Error::Domain(format!("matrix is not unitary (defect {defect:e})")));
        }
        Ok(Self(m))
    }

    pub fn identity(d: usize) -> Self {
        Self(Matrix::identity(d))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    /// `U|ψ⟩`, layout unchanged.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.dim() != self.dim() {
            return Err(Error::Layout(format!(
                "unitary of dimension {} applied to state of dimension {}",
                self.dim(),
                psi.dim()
            )));
        }
        StateVector::normalized(psi.layout().clone(), self.0.apply(psi.amplitudes()))
    }
}

/// `|φ⁺_d⟩ = Σ_x |xx⟩/√d` on registers `(a, b)`.
pub fn max_entangled_on(d: usize, a: &str, b: &str) -> Result<StateVector> {
    if d < 2 {
        return Err(Error::Domain(format!("maximally entangled state needs d >= 2, got {d}")));
    }
    let layout = RegisterLayout::new([(a, d), (b, d)])?;
    let mut amps = alloc::vec![C64::new(0.0, 0.0); d * d];
    let amp = 1.0 / (d as f64).sqrt();
    for x in 0..d {
        amps[x * d + x] = C64::new(amp, 0.0);
    }
    StateVector::new(layout, amps)
}

/// `|φ⁺_d⟩` on registers `A`, `B`.
pub fn max_entangled(d: usize) -> Result<StateVector> {
    max_entangled_on(d, "A", "B")
}

/// `⊗_i φ⁺_d` on pairs `(A_i, B_i)`, stored in `A1..AN B1..BN` order.
pub fn resource_state(spec: &ResourceSpec) -> Result<StateVector> {
    let dim = spec.check_dense()?;
    let (d, n) = (spec.d, spec.n_ports);
    // amplitude 1/√(d^N) wherever the A digits equal the B digits
    let amp = C64::new(1.0 / (d as f64).powi(n as i32).sqrt(), 0.0);
    let alice_dim = spec.alice_dim().expect("bounded by check_dense");
    let mut amps = alloc::vec![C64::new(0.0, 0.0); dim];
    for a in 0..alice_dim {
        amps[a * alice_dim + a] = amp;
    }
    StateVector::new(spec.layout(), amps)
}

/// Haar-random pure state on a single register labeled [`DATA_LABEL`].
pub fn haar_state(d: usize, rng: &mut SeededRng) -> Result<StateVector> {
    if d < 1 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let amps = (0..d).map(|_| rng.complex_normal()).collect();
    StateVector::normalized(RegisterLayout::single(DATA_LABEL, d)?, amps)
}

/// Haar-random unitary: Ginibre matrix, QR, then the phases of `diag(R)`
/// moved into `Q` so the result does not depend on the QR sign convention.
pub fn haar_unitary(d: usize, rng: &mut SeededRng) -> Result<Unitary> {
    if d < 1 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    let z = Matrix::from_fn(d, d, |_, _| rng.complex_normal());
    let (mut q, r) = qr(&z);
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    Unitary::new(q)
}

/// Choi-type program state `(I_A ⊗ U_B)^{⊗N} ⊗_i φ⁺_d`.
pub fn program_state(u: &Unitary, n_ports: usize) -> Result<StateVector> {
    program_state_with_budget(u, n_ports, DEFAULT_DENSE_BUDGET)
}

pub fn program_state_with_budget(u: &Unitary, n_ports: usize, budget: usize) -> Result<StateVector> {
    let spec = ResourceSpec::new(u.dim(), n_ports)?.with_budget(budget);
    let mut state = resource_state(&spec)?;
    for b in spec.bob_labels() {
        state = state.apply_unitary(u.matrix(), &[b.as_str()])?;
    }
    Ok(state)
}

/// Permutation `|x⟩|y⟩ ↦ |x⟩|y ⊕ f(x)⟩` on `k` index bits plus one target bit.
/// Basis index is `2x + y`.
pub fn boolean_unitary(f: &[bool], k: usize) -> Result<Unitary> {
    if k < 1 {
        return Err(Error::Domain("Boolean function needs at least one input bit".into()));
    }
    let inputs = 1usize
        .checked_shl(k as u32)
        .ok_or_else(|| Error::Domain(format!("{k} input bits is too many")))?;
    if f.len() != inputs {
        return Err(Error::Domain(format!(
            "truth table has {} entries, expected 2^{k} = {inputs}",
            f.len()
        )));
    }
    let d = 2 * inputs;
    let mut m = Matrix::zeros(d, d);
    for (x, &fx) in f.iter().enumerate() {
        for y in 0..2 {
            let out = 2 * x + (y ^ usize::from(fx));
            m[(out, 2 * x + y)] = C64::new(1.0, 0.0);
        }
    }
    Unitary::new(m)
}

/// `Tensor` helper: `|ψ⟩ ⊗ |φ⟩` under fresh labels.
pub fn product_state(parts: &[&StateVector]) -> Result<StateVector> {
    let (first, rest) = parts.split_first().ok_or_else(|| Error::Domain("empty product".into()))?;
    rest.iter().try_fold((*first).clone(), |acc, p| acc.tensor(p))
}
