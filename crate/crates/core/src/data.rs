use crate::error::{LateError, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation<T = f64> {
    pub y: T,
    pub d: bool,
    pub z: bool,
}

impl<T> Observation<T> {
    pub fn new(y: T, d: bool, z: bool) -> Self {
        Self { y, d, z }
    }
}

/// A nonempty sample of `(y, d, z)` observations with finite outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleData<T = f64> {
    rows: Vec<Observation<T>>,
}

impl<T: Scalar> SampleData<T> {
    pub fn new(rows: Vec<Observation<T>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(LateError::EmptySample);
        }
        if let Some(i) = rows.iter().position(|r| !r.y.is_finite()) {
            return Err(LateError::InvalidArgument(format!(
                "non-finite outcome in row {i}"
            )));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Observation<T>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn into_rows(self) -> Vec<Observation<T>> {
        self.rows
    }

    /// True when every outcome is exactly 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.rows
            .iter()
            .all(|r| r.y == T::zero() || r.y == T::one())
    }
}
