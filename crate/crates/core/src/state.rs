use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

/// A point of the state space `ℝ^d`.
///
/// Stored inline for `d <= 4`, so cloning a state inside the chain loop does
/// not allocate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct State(SmallVec<[f64; 4]>);

impl State {
    pub fn new(components: impl IntoIterator<Item = f64>) -> Self {
        State(components.into_iter().collect())
    }

    pub fn scalar(x: f64) -> Self {
        State(smallvec::smallvec![x])
    }

    pub fn zeros(dimension: usize) -> Self {
        State(smallvec::smallvec![0.0; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Euclidean distance to `other`; both states must share a dimension.
    pub fn distance(&self, other: &State) -> f64 {
        debug_assert_eq!(self.dimension(), other.dimension());
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, factor: f64) -> State {
        State(self.0.iter().map(|c| c * factor).collect())
    }

    pub fn add(&self, other: &State) -> State {
        State(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &State) -> State {
        State(self.0.iter().zip(other.0.iter()).map(|(a, b)| a - b).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }
}

impl Deref for State {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<f64> for State {
    fn from(x: f64) -> Self {
        State::scalar(x)
    }
}

impl From<Vec<f64>> for State {
    fn from(v: Vec<f64>) -> Self {
        State(SmallVec::from_vec(v))
    }
}

impl From<&[f64]> for State {
    fn from(v: &[f64]) -> Self {
        State(SmallVec::from_slice(v))
    }
}

/// Components joined by `;`, so a state fits in one CSV cell.
impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}
