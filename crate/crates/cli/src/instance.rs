//! Instance file schema and loading. Coordinates and probabilities may be
//! JSON numbers or decimal strings; either way the literal text is parsed,
//! so exact mode sees `0.05` as 1/20 rather than the nearest double.

use serde::{Deserialize, Serialize};

use ftb_core::bounds::{ConstraintSet, OrthantConstraint};
use ftb_core::measures::DiscreteMarginal;
use ftb_core::numeric::Scalar;
use ftb_core::transport::{CdfBand, PayoffGrid};
use ftb_core::ProductGrid;

use crate::CliError;

/// A number kept in its literal form until the numeric mode is known.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum RawNumber {
    Num(serde_json::Number),
    Str(String),
}

impl RawNumber {
    pub fn parse<T: Scalar>(&self) -> Result<T, CliError> {
        let text = match self {
            RawNumber::Num(n) => n.to_string(),
            RawNumber::Str(s) => s.clone(),
        };
        T::parse_number(&text).map_err(|e| CliError::input(format!("bad number: {e}")))
    }

    pub fn from_value<T: Scalar>(v: &T) -> Self {
        RawNumber::Str(v.render())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct AtomDto {
    pub point: RawNumber,
    pub mass: RawNumber,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MarginalDto {
    pub atoms: Vec<AtomDto>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ConstraintDto {
    pub corner: Vec<RawNumber>,
    pub pi_lower: RawNumber,
    pub pi_upper: RawNumber,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EnvelopeDto {
    pub lower: MarginalDto,
    pub upper: MarginalDto,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PayoffDto {
    LowerOrthantIndicator { corner: Vec<RawNumber> },
    GridSampled { values: Vec<RawNumber> },
}

/// On-disk instance: marginals per axis, orthant constraints, optional cdf
/// envelopes (required for the order-1 band class), optional payoff.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct InstanceFile {
    pub dimension: usize,
    pub marginals: Vec<MarginalDto>,
    #[serde(default)]
    pub constraints: Vec<ConstraintDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelopes: Option<Vec<EnvelopeDto>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoff: Option<PayoffDto>,
}

/// Instance with every number bound to the active numeric mode.
pub struct LoadedInstance<T> {
    pub marginals: Vec<DiscreteMarginal<T>>,
    pub constraints: ConstraintSet<T>,
    pub bands: Option<Vec<CdfBand<T>>>,
    pub payoff: Option<PayoffDto>,
}

fn parse_marginal<T: Scalar>(dto: &MarginalDto) -> Result<DiscreteMarginal<T>, CliError> {
    let atoms = dto
        .atoms
        .iter()
        .map(|a| Ok((a.point.parse()?, a.mass.parse()?)))
        .collect::<Result<Vec<_>, CliError>>()?;
    DiscreteMarginal::probability(atoms).map_err(|e| CliError::input(format!("marginal: {e}")))
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::input(format!("instance JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn load<T: Scalar>(&self) -> Result<LoadedInstance<T>, CliError> {
        if self.dimension == 0 || self.marginals.len() != self.dimension {
            return Err(CliError::input(format!(
                "dimension {} does not match {} marginals",
                self.dimension,
                self.marginals.len()
            )));
        }
        let marginals = self
            .marginals
            .iter()
            .map(parse_marginal::<T>)
            .collect::<Result<Vec<_>, _>>()?;
        let mut constraints = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            if c.corner.len() != self.dimension {
                return Err(CliError::feature(format!(
                    "constraint corner has {} coordinates, instance dimension is {}",
                    c.corner.len(),
                    self.dimension
                )));
            }
            let corner = c
                .corner
                .iter()
                .map(RawNumber::parse)
                .collect::<Result<Vec<T>, _>>()?;
            constraints.push(
                OrthantConstraint::new(corner, c.pi_lower.parse()?, c.pi_upper.parse()?)
                    .map_err(|e| CliError::input(format!("constraint: {e}")))?,
            );
        }
        let bands = match &self.envelopes {
            None => None,
            Some(envs) => {
                if envs.len() != self.dimension {
                    return Err(CliError::input(format!(
                        "{} envelopes for dimension {}",
                        envs.len(),
                        self.dimension
                    )));
                }
                Some(
                    envs.iter()
                        .map(|e| {
                            CdfBand::new(parse_marginal(&e.lower)?, parse_marginal(&e.upper)?)
                                .map_err(|e| CliError::input(format!("envelopes: {e}")))
                        })
                        .collect::<Result<Vec<_>, _>>()?,
                )
            }
        };
        Ok(LoadedInstance {
            marginals,
            constraints: ConstraintSet::new(constraints),
            bands,
            payoff: self.payoff.clone(),
        })
    }
}

impl<T: Scalar> LoadedInstance<T> {
    pub fn payoff_on(&self, grid: ProductGrid<T>) -> Result<PayoffGrid<T>, CliError> {
        match &self.payoff {
            None => Err(CliError::input("instance has no payoff".into())),
            Some(PayoffDto::LowerOrthantIndicator { corner }) => {
                let corner = corner
                    .iter()
                    .map(RawNumber::parse)
                    .collect::<Result<Vec<T>, _>>()?;
                PayoffGrid::lower_orthant_indicator(grid, corner)
                    .map_err(|e| CliError::feature(format!("payoff: {e}")))
            }
            Some(PayoffDto::GridSampled { values }) => {
                let values = values
                    .iter()
                    .map(RawNumber::parse)
                    .collect::<Result<Vec<T>, _>>()?;
                PayoffGrid::sampled(grid, values)
                    .map_err(|e| CliError::input(format!("payoff: {e}")))
            }
        }
    }
}

/// Renders a rational with a power-of-ten-friendly denominator as a plain
/// decimal string; falls back to the `p/q` form otherwise.
pub fn decimal_render<T: Scalar>(v: &T) -> String {
    if !T::EXACT {
        return v.render();
    }
    let raw = v.render();
    let Some((num, den)) = raw.split_once('/') else {
        return raw;
    };
    let (Ok(mut n), Ok(mut d)) = (num.parse::<i128>(), den.parse::<i128>()) else {
        return raw;
    };
    let neg = n < 0;
    n = n.abs();
    let mut digits = 0u32;
    while d % 10 == 0 {
        d /= 10;
        digits += 1;
    }
    while d % 2 == 0 {
        d /= 2;
        n *= 5;
        digits += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        n *= 2;
        digits += 1;
    }
    if d != 1 {
        return raw;
    }
    let s = format!("{n:0>width$}", width = digits as usize + 1);
    let split = s.len() - digits as usize;
    let (int_part, frac_part) = s.split_at(split);
    let frac_part = frac_part.trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    if frac_part.is_empty() {
        format!("{sign}{int_part}")
    } else {
        format!("{sign}{int_part}.{frac_part}")
    }
}
