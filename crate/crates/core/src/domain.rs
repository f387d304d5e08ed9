//! Face records, BMI arithmetic and weight-category binning.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HEIGHT_RANGE_M: (f64, f64) = (0.5, 2.8);
pub const WEIGHT_RANGE_KG: (f64, f64) = (20.0, 400.0);

/// Lowest BMI that can still be categorized.
pub const BMI_FLOOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Before,
    After,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Before => "before",
            Role::After => "after",
        }
    }
}

impl FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "before" => Ok(Role::Before),
            "after" => Ok(Role::After),
            other => Err(format!("unknown role {other:?}, expected before|after")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gender {
    #[serde(rename = "M")]
    Male,
    #[serde(rename = "F")]
    Female,
}

impl Gender {
    pub fn code(self) -> &'static str {
        match self {
            Gender::Male => "M",
            Gender::Female => "F",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Gender {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "M" | "m" | "male" | "Male" => Ok(Gender::Male),
            "F" | "f" | "female" | "Female" => Ok(Gender::Female),
            other => Err(format!("unknown gender {other:?}, expected M|F")),
        }
    }
}

/// One face image with its subject's measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaceRecord {
    pub record_id: String,
    pub person_id: String,
    pub role: Role,
    pub gender: Gender,
    pub height_m: f64,
    pub weight_kg: f64,
    pub bmi: f64,
    pub race: Option<String>,
}

impl FaceRecord {
    /// Builds a record, validating the measurements and deriving BMI.
    pub fn new(
        record_id: impl Into<String>,
        person_id: impl Into<String>,
        role: Role,
        gender: Gender,
        height_m: f64,
        weight_kg: f64,
        race: Option<String>,
    ) -> Result<Self> {
        check_range("height_m", height_m, HEIGHT_RANGE_M)?;
        check_range("weight_kg", weight_kg, WEIGHT_RANGE_KG)?;
        let bmi = compute_bmi(weight_kg, height_m)?;
        Ok(Self {
            record_id: record_id.into(),
            person_id: person_id.into(),
            role,
            gender,
            height_m,
            weight_kg,
            bmi,
            race: race.filter(|r| !r.is_empty()),
        })
    }

    pub fn category(&self) -> Result<BmiCategory> {
        categorize(self.bmi)
    }
}

fn check_range(field: &'static str, value: f64, (lo, hi): (f64, f64)) -> Result<()> {
    if !value.is_finite() || value <= lo || value >= hi {
        return Err(Error::Domain {
            field,
            value,
            reason: "outside accepted open interval",
        });
    }
    Ok(())
}

fn check_positive(field: &'static str, value: f64) -> Result<()> {
    if !value.is_finite() || value <= 0.0 {
        return Err(Error::Domain {
            field,
            value,
            reason: "must be positive and finite",
        });
    }
    Ok(())
}

/// Body mass index: weight in kilograms over squared height in meters.
///
/// Only positivity is checked here; the plausibility ranges for heights and
/// weights are enforced when a [`FaceRecord`] is built.
pub fn compute_bmi(weight_kg: f64, height_m: f64) -> Result<f64> {
    check_positive("weight_kg", weight_kg)?;
    check_positive("height_m", height_m)?;
    Ok(weight_kg / (height_m * height_m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BmiCategory {
    Underweight,
    Normal,
    Overweight,
    ModeratelyObese,
    SeverelyObese,
    VerySeverelyObese,
}

impl BmiCategory {
    pub const ALL: [BmiCategory; 6] = [
        BmiCategory::Underweight,
        BmiCategory::Normal,
        BmiCategory::Overweight,
        BmiCategory::ModeratelyObese,
        BmiCategory::SeverelyObese,
        BmiCategory::VerySeverelyObese,
    ];

    /// Upper edges of the first five bins; the last bin is unbounded.
    pub const EDGES: [f64; 5] = [18.5, 25.0, 30.0, 35.0, 40.0];
}

/// Bins a BMI value. Each bin is open below and closed above, so an edge
/// value belongs to the lower bin. Values in (10, 16] are Underweight.
pub fn categorize(bmi: f64) -> Result<BmiCategory> {
    if !bmi.is_finite() || bmi <= BMI_FLOOR {
        return Err(Error::Domain {
            field: "bmi",
            value: bmi,
            reason: "must be finite and above 10",
        });
    }
    let idx = BmiCategory::EDGES
        .iter()
        .position(|&edge| bmi <= edge)
        .unwrap_or(BmiCategory::EDGES.len());
    Ok(BmiCategory::ALL[idx])
}
