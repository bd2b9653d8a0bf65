use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// One named tensor factor.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Register {
    pub label: String,
    pub dim: usize,
}

/// Ordered tensor-product structure. The first register is the most
/// significant digit of the flat index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RegisterLayout {
    registers: Vec<Register>,
}

impl RegisterLayout {
    pub fn new<S: AsRef<str>>(registers: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut out: Vec<Register> = Vec::new();
        for (label, dim) in registers {
            let label = label.as_ref();
            if dim == 0 {
                return Err(Error::Layout(format!("register {label} has dimension 0")));
            }
            if out.iter().any(|r| r.label == label) {
                return Err(Error::Layout(format!("duplicate register label {label}")));
            }
            out.push(Register { label: label.to_string(), dim });
        }
        Ok(Self { registers: out })
    }

    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.registers.iter().map(|r| r.label.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.registers.iter().map(|r| r.dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.registers.iter().map(|r| r.dim).product()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.registers.iter().position(|r| r.label == label)
    }

    /// Concatenation `self ⊗ other`; labels must be disjoint.
    pub fn concat(&self, other: &RegisterLayout) -> Result<Self> {
        Self::new(
            self.registers
                .iter()
                .chain(&other.registers)
                .map(|r| (r.label.as_str(), r.dim)),
        )
    }

    /// Positions of `labels`, sorted into layout order. Unknown or repeated
    /// labels are layout errors.
    pub fn positions_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut pos = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            let p = self
                .position(l)
                .ok_or_else(|| Error::Layout(format!("unknown register label {l}")))?;
            if pos.contains(&p) {
                return Err(Error::Layout(format!("register {l} listed twice")));
            }
            pos.push(p);
        }
        pos.sort_unstable();
        Ok(pos)
    }

    /// Sub-layout with the registers at `positions` (kept in layout order).
    pub fn select(&self, positions: &[usize]) -> Self {
        Self { registers: positions.iter().map(|&p| self.registers[p].clone()).collect() }
    }

    /// Splits the register set into (`positions`, complement) and returns the
    /// flat-index offsets contributed by every multi-index of each part.
    /// `offsets_a[i] + offsets_b[j]` enumerates every flat index exactly once.
    pub(crate) fn split_offsets(&self, positions: &[usize]) -> (Vec<usize>, Vec<usize>) {
        let n = self.registers.len();
        let mut strides = alloc::vec![1usize; n];
        for i in (0..n.saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.registers[i + 1].dim;
        }
        let complement: Vec<usize> = (0..n).filter(|p| !positions.contains(p)).collect();
        let offsets = |part: &[usize]| -> Vec<usize> {
            let mut offs = alloc::vec![0usize];
            for &p in part {
                let d = self.registers[p].dim;
                let s = strides[p];
                let mut next = Vec::with_capacity(offs.len() * d);
                for &o in &offs {
                    for k in 0..d {
                        next.push(o + k * s);
                    }
                }
                offs = next;
            }
            offs
        };
        (offsets(positions), offsets(&complement))
    }
}

impl core::fmt::Display for RegisterLayout {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for (i, r) in self.registers.iter().enumerate() {
            if i > 0 {
                f.write_str("⊗")?;
            }
            write!(f, "{}[{}]", r.label, r.dim)?;
        }
        Ok(())
    }
}
