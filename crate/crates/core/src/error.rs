use alloc::string::String;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Register labels are duplicated, unknown, or two layouts disagree.
    #[error("layout error: {0}")]
    Layout(String),
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A dense object would exceed the configured dimension budget.
    #[error("capacity error: dimension {required} exceeds dense budget {budget}")]
    Capacity { required: usize, budget: usize },
    /// A numerical check failed beyond tolerance.
    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = core::result::Result<T, Error>;
