//! Circuit description: memory blocks, resonator combs, and cascades.
//!
//! A [`Block`] is the three-resonator unit cell: two outer resonators detuned
//! by `-delta` and `+delta` from the block center and coupled to a common
//! waveguide at rate `k`, plus a central resonator coupled to both outer ones
//! at rate `g` (but not to the waveguide). A [`Comb`] is a chain of
//! independently waveguide-coupled resonators with no inter-resonator
//! coupling. A [`Circuit`] cascades any mix of the two along one waveguide.
//!
//! Circuits serialize to a small self-describing JSON format:
//!
//! ```json
//! { "unit": "Delta",
//!   "elements": [
//!     { "type": "block", "center": 0.0, "delta": 1.0, "k": 3.47, "g": 0.29 },
//!     { "type": "comb", "detunings": [-3.0, -1.0, 1.0, 3.0], "k": 4.26 } ] }
//! ```
//!
//! All frequencies are in units of the block detuning; the `unit` marker
//! records that convention in the file itself.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Frequency unit marker carried by circuit files.
///
/// Only one unit exists — all frequencies are expressed in units of the
/// block detuning — so deserialization of anything else fails loudly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    /// Frequencies and rates in units of the block detuning; times in its inverse.
    #[default]
    Delta,
}

/// Symmetric three-resonator memory block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block<T = f64> {
    /// Frequency offset of the whole block along the waveguide.
    pub center: T,
    /// Detuning half-spread: outer resonators sit at `center ± delta`.
    pub delta: T,
    /// Waveguide coupling rate of the two outer resonators.
    pub k: T,
    /// Coupling rate between the central resonator and each outer one.
    pub g: T,
}

impl<T: Scalar> Block<T> {
    /// Block at the origin with unit detuning spread.
    pub fn centered(k: T, g: T) -> Self {
        Self { center: T::zero(), delta: T::one(), k, g }
    }

    /// Checks the structural invariants: `delta > 0`, `k >= 0`, `g >= 0`,
    /// all fields finite.
    ///
    /// # Errors
    /// [`Error::InvalidParameter`] describing the first violated invariant.
    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "block center must be finite, got {}",
                self.center
            )));
        }
        if !(self.delta > T::zero()) || !self.delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "block delta must be positive and finite, got {}",
                self.delta
            )));
        }
        if !(self.k >= T::zero()) || !self.k.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "block waveguide coupling k must be >= 0 and finite, got {}",
                self.k
            )));
        }
        if !(self.g >= T::zero()) || !self.g.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "block inter-resonator coupling g must be >= 0 and finite, got {}",
                self.g
            )));
        }
        Ok(())
    }
}

/// Chain of waveguide-coupled resonators with no inter-resonator coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comb<T = f64> {
    /// Absolute resonator detunings, strictly increasing.
    pub detunings: Vec<T>,
    /// Waveguide coupling rate shared by every resonator.
    pub k: T,
}

impl<T: Scalar> Comb<T> {
    /// Comb with the given detunings and shared coupling.
    pub fn new(detunings: Vec<T>, k: T) -> Self {
        Self { detunings, k }
    }

    /// Checks the structural invariants: nonempty strictly increasing finite
    /// detunings and `k >= 0`.
    ///
    /// # Errors
    /// [`Error::InvalidParameter`] describing the first violated invariant.
    pub fn validate(&self) -> Result<()> {
        if self.detunings.is_empty() {
            return Err(Error::InvalidParameter(
                "comb needs at least one resonator".into(),
            ));
        }
        if self.detunings.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidParameter(
                "comb detunings must all be finite".into(),
            ));
        }
        if self.detunings.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "comb detunings must be strictly increasing".into(),
            ));
        }
        if !(self.k >= T::zero()) || !self.k.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "comb waveguide coupling k must be >= 0 and finite, got {}",
                self.k
            )));
        }
        Ok(())
    }

    /// Whether the detunings are an exact mirror image about zero.
    pub fn is_symmetric(&self) -> bool {
        let n = self.detunings.len();
        (0..n).all(|i| self.detunings[i] == -self.detunings[n - 1 - i])
    }
}

/// One cascade element: a block or a comb.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Element<T = f64> {
    /// Three-resonator memory block.
    Block(Block<T>),
    /// Independently coupled resonator comb.
    Comb(Comb<T>),
}

impl<T: Scalar> Element<T> {
    /// Frequency offset the element's response is evaluated at: a block's
    /// `center` field; combs carry absolute detunings, so zero.
    pub fn center(&self) -> T {
        match self {
            Element::Block(b) => b.center,
            Element::Comb(_) => T::zero(),
        }
    }

    /// Validates the wrapped element.
    ///
    /// # Errors
    /// [`Error::InvalidParameter`] from the wrapped element.
    pub fn validate(&self) -> Result<()> {
        match self {
            Element::Block(b) => b.validate(),
            Element::Comb(c) => c.validate(),
        }
    }

    /// Largest dynamical rate in the element (couplings and absolute
    /// resonator frequencies), used for integrator stability bounds.
    pub fn max_rate(&self) -> T {
        match self {
            Element::Block(b) => {
                let outer = (b.center.abs() + b.delta).max(b.center.abs());
                b.k.max(b.g).max(outer)
            }
            Element::Comb(c) => c
                .detunings
                .iter()
                .fold(c.k, |acc, d| acc.max(d.abs())),
        }
    }
}

/// Ordered cascade of elements along one waveguide.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit<T = f64> {
    /// Frequency unit marker (always [`Unit::Delta`]).
    #[serde(default)]
    pub unit: Unit,
    /// Cascade order along the waveguide.
    pub elements: Vec<Element<T>>,
}

impl<T: Scalar> Circuit<T> {
    /// Circuit from a list of elements in cascade order.
    pub fn new(elements: Vec<Element<T>>) -> Self {
        Self { unit: Unit::Delta, elements }
    }

    /// Single-block circuit.
    pub fn single_block(block: Block<T>) -> Self {
        Self::new(vec![Element::Block(block)])
    }

    /// Checks that the cascade is nonempty and every element is valid.
    ///
    /// # Errors
    /// [`Error::InvalidParameter`] for an empty cascade or from the first
    /// invalid element.
    pub fn validate(&self) -> Result<()> {
        if self.elements.is_empty() {
            return Err(Error::InvalidParameter(
                "circuit needs at least one element".into(),
            ));
        }
        self.elements.iter().try_for_each(Element::validate)
    }

    /// Smallest strictly positive waveguide coupling in the cascade, if any.
    /// Elements with `k = 0` are transparent and do not constrain grids.
    pub fn min_positive_k(&self) -> Option<T> {
        self.elements
            .iter()
            .map(|e| match e {
                Element::Block(b) => b.k,
                Element::Comb(c) => c.k,
            })
            .filter(|k| *k > T::zero())
            .fold(None, |acc: Option<T>, k| Some(acc.map_or(k, |a| a.min(k))))
    }

    /// Largest dynamical rate across all elements (integrator stability bound).
    pub fn max_rate(&self) -> T {
        self.elements
            .iter()
            .fold(T::zero(), |acc, e| acc.max(e.max_rate()))
    }
}

impl<T: Scalar + Serialize + for<'a> Deserialize<'a>> Circuit<T> {
    /// Parses and validates a circuit from its JSON description.
    ///
    /// # Errors
    /// [`Error::InvalidParameter`] on malformed JSON, an unknown unit
    /// marker, or invalid element parameters.
    pub fn from_json(text: &str) -> Result<Self> {
        let circuit: Self = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("circuit JSON: {e}")))?;
        circuit.validate()?;
        Ok(circuit)
    }

    /// Serializes the circuit to pretty-printed JSON (round-trips through
    /// [`Circuit::from_json`] to an equal circuit).
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("circuit serialization");
        text.push('\n');
        text
    }
}
