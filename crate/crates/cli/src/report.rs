//! Machine-readable run reports. The JSON form round-trips losslessly:
//! exact values are rendered as `p/q` or decimal strings, floats in their
//! shortest round-trip representation.

use serde::{Deserialize, Serialize};

use ftb_core::measures::JointMeasure;
use ftb_core::numeric::Scalar;
use ftb_core::transport::HedgePortfolio;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct NamedValue {
    pub name: String,
    pub value: String,
    pub approx: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MeasureDto {
    pub axes: Vec<Vec<String>>,
    pub masses: Vec<String>,
}

impl MeasureDto {
    pub fn from_measure<T: Scalar>(mu: &JointMeasure<T>) -> Self {
        Self {
            axes: mu
                .grid()
                .axes()
                .iter()
                .map(|a| a.iter().map(|v| v.render()).collect())
                .collect(),
            masses: mu.masses().iter().map(|v| v.render()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HedgeDto {
    pub axis_values: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axis_values_short: Option<Vec<Vec<String>>>,
    pub coefficients: Vec<String>,
    pub price: String,
}

impl HedgeDto {
    pub fn from_hedge<T: Scalar>(h: &HedgePortfolio<T>) -> Self {
        let render_axes =
            |vv: &Vec<Vec<T>>| vv.iter().map(|a| a.iter().map(|v| v.render()).collect()).collect();
        Self {
            axis_values: render_axes(&h.axis_values),
            axis_values_short: h.axis_values_short.as_ref().map(render_axes),
            coefficients: h.coefficients.iter().map(|v| v.render()).collect(),
            price: h.price.render(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ViolationDto {
    pub kind: String,
    pub location: String,
    pub magnitude: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct Certificates {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<MeasureDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hedge: Option<HedgeDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<MeasureDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arbitrage: Option<HedgeDto>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violations: Vec<ViolationDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hedge_form: Option<String>,
}

impl Certificates {
    pub fn is_empty(&self) -> bool {
        self.plan.is_none()
            && self.hedge.is_none()
            && self.witness.is_none()
            && self.arbitrage.is_none()
            && self.violations.is_empty()
            && self.hedge_form.is_none()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RunReport {
    pub command: String,
    pub args: Vec<String>,
    pub numeric_mode: String,
    pub tolerance: String,
    pub results: Vec<NamedValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub statuses: Vec<String>,
    #[serde(default, skip_serializing_if = "Certificates::is_empty")]
    pub certificates: Certificates,
    pub timing_ms: u64,
}

impl RunReport {
    pub fn new<T: Scalar>(command: &str, args: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            args,
            numeric_mode: if T::EXACT { "exact".into() } else { "float".into() },
            tolerance: T::default_tol().render(),
            results: Vec::new(),
            statuses: Vec::new(),
            certificates: Certificates::default(),
            timing_ms: 0,
        }
    }

    pub fn push_value<T: Scalar>(&mut self, name: impl Into<String>, v: &T) {
        self.results.push(NamedValue {
            name: name.into(),
            value: v.render(),
            approx: v.to_f64(),
        });
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,value,approx\n");
        for r in &self.results {
            out.push_str(&format!("{},{},{}\n", r.name, r.value, r.approx));
        }
        for (i, s) in self.statuses.iter().enumerate() {
            out.push_str(&format!("status_{i},{s},\n"));
        }
        out
    }
}
