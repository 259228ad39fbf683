//! Scaling functions `ψ` applied to pair differences.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthClass {
    Unit,
    AtMostPolynomial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalingKind<T> {
    Unit,
    /// `ψ(N) = max(N, 1)^beta`.
    Power(T),
    /// `ψ(N) = values[⌊N⌋]`.
    Table(Vec<T>),
}

/// A scaling function `ψ : N ↦ [1, ∞)` with its declared growth class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSpec<T> {
    kind: ScalingKind<T>,
    growth_class: GrowthClass,
}

impl<T: Real> ScalingSpec<T> {
    pub fn unit() -> Self {
        Self {
            kind: ScalingKind::Unit,
            growth_class: GrowthClass::Unit,
        }
    }

    pub fn power(beta: T) -> Result<Self> {
        if !beta.is_finite() || beta < T::zero() {
            return Err(Error::InvalidScaling(format!(
                "power exponent {beta} must be finite and >= 0"
            )));
        }
        let growth_class = if beta == T::zero() {
            GrowthClass::Unit
        } else {
            GrowthClass::AtMostPolynomial
        };
        Ok(Self {
            kind: ScalingKind::Power(beta),
            growth_class,
        })
    }

    /// Explicit values `ψ(0), ψ(1), …`. A finite table cannot certify its
    /// asymptotic class, so only the pointwise constraints are checked.
    pub fn table(values: Vec<T>, growth_class: GrowthClass) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidScaling("empty table".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= T::one())) {
            return Err(Error::InvalidScaling(format!("table value {v} is not in [1, inf)")));
        }
        if growth_class == GrowthClass::Unit && values.iter().any(|&v| v != T::one()) {
            return Err(Error::InvalidScaling("unit class requires every value to be 1".into()));
        }
        Ok(Self {
            kind: ScalingKind::Table(values),
            growth_class,
        })
    }

    /// Parses the command-line form `unit` or `power:<beta>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "unit" => Ok(Self::unit()),
            other => {
                let beta = other.strip_prefix("power:").ok_or_else(|| {
                    Error::InvalidScaling(format!("expected `unit` or `power:<beta>`, got `{other}`"))
                })?;
                let beta: f64 = beta
                    .parse()
                    .map_err(|_| Error::InvalidScaling(format!("bad exponent `{beta}`")))?;
                Self::power(T::lit(beta))
            }
        }
    }

    pub fn kind(&self) -> &ScalingKind<T> {
        &self.kind
    }

    pub fn growth_class(&self) -> GrowthClass {
        self.growth_class
    }

    pub fn is_unit(&self) -> bool {
        self.growth_class == GrowthClass::Unit
    }

    /// Evaluates `ψ(n)`.
    pub fn eval(&self, n: T) -> Result<T> {
        match &self.kind {
            ScalingKind::Unit => Ok(T::one()),
            ScalingKind::Power(beta) => Ok(n.max(T::one()).powf(*beta)),
            ScalingKind::Table(values) => {
                let idx = n
                    .floor()
                    .to_usize()
                    .ok_or_else(|| Error::InvalidScaling(format!("cannot index table at N = {n}")))?;
                values
                    .get(idx)
                    .copied()
                    .ok_or_else(|| Error::InvalidScaling(format!("table has no value for N = {idx}")))
            }
        }
    }
}
