//! Per-respondent utility parameters.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::coding::CodingSpec;
use crate::error::{Error, Result};

/// Partworths on the coded scale, the social-signal coefficient (utility per
/// unit fraction of adopting friends) and the status-quo utility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndividualParams {
    pub respondent_id: String,
    pub beta: Vec<f64>,
    pub gamma: f64,
    pub u0: f64,
}

/// Known parameters used to synthesize choices.
pub type GroundTruthParams = IndividualParams;

impl IndividualParams {
    pub fn is_finite(&self) -> bool {
        self.gamma.is_finite() && self.u0.is_finite() && self.beta.iter().all(|b| b.is_finite())
    }

    pub fn check_dims(&self, coding: &CodingSpec) -> Result<()> {
        if self.beta.len() != coding.n_partworths() {
            return Err(Error::DimensionMismatch {
                expected: coding.n_partworths(),
                actual: self.beta.len(),
            });
        }
        Ok(())
    }

    /// Full coefficient vector matching the coded columns.
    pub fn coefficients(&self, coding: &CodingSpec) -> Result<Vec<f64>> {
        self.check_dims(coding)?;
        let mut coef = self.beta.clone();
        coef.push(self.gamma / coding.social_scale);
        coef.push(self.u0);
        Ok(coef)
    }

    pub fn from_coefficients(respondent_id: &str, coef: &[f64], coding: &CodingSpec) -> Result<Self> {
        if coef.len() != coding.n_columns() {
            return Err(Error::DimensionMismatch {
                expected: coding.n_columns(),
                actual: coef.len(),
            });
        }
        Ok(IndividualParams {
            respondent_id: respondent_id.to_string(),
            beta: coef[..coding.n_partworths()].to_vec(),
            gamma: coef[coding.social_column] * coding.social_scale,
            u0: coef[coding.none_column],
        })
    }

    /// Scale every parameter by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        IndividualParams {
            respondent_id: self.respondent_id.clone(),
            beta: self.beta.iter().map(|b| b * c).collect(),
            gamma: self.gamma * c,
            u0: self.u0 * c,
        }
    }
}

/// CSV layout: respondent_id, one column per partworth, gamma, u0.
pub fn write_params_csv(params: &[IndividualParams], partworth_names: &[String], writer: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["respondent_id".to_string()];
    header.extend(partworth_names.iter().cloned());
    header.extend(["gamma".to_string(), "u0".to_string()]);
    w.write_record(&header)?;
    for p in params {
        if p.beta.len() != partworth_names.len() {
            return Err(Error::DimensionMismatch {
                expected: partworth_names.len(),
                actual: p.beta.len(),
            });
        }
        let mut rec = vec![p.respondent_id.clone()];
        rec.extend(p.beta.iter().map(f64::to_string));
        rec.push(p.gamma.to_string());
        rec.push(p.u0.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<params csv>", e))?;
    Ok(())
}

pub fn read_params_csv(reader: impl Read) -> Result<Vec<IndividualParams>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    let n = header.len();
    if n < 3 || &header[0] != "respondent_id" || &header[n - 2] != "gamma" || &header[n - 1] != "u0" {
        return Err(Error::InvalidArgument(
            "params CSV must have columns respondent_id, <partworths>, gamma, u0".into(),
        ));
    }
    let parse = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("not a number: '{s}'")))
    };
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            let beta = (1..n - 2).map(|i| parse(&rec[i])).collect::<Result<Vec<_>>>()?;
            Ok(IndividualParams {
                respondent_id: rec[0].to_string(),
                beta,
                gamma: parse(&rec[n - 2])?,
                u0: parse(&rec[n - 1])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let params = vec![
            IndividualParams { respondent_id: "a".into(), beta: vec![0.1, -2.5], gamma: 3.0, u0: 0.25 },
            IndividualParams { respondent_id: "b".into(), beta: vec![1e-9, 7.0], gamma: -1.0, u0: 0.0 },
        ];
        let names = vec!["x:1".to_string(), "y:1".to_string()];
        let mut buf = Vec::new();
        write_params_csv(&params, &names, &mut buf).unwrap();
        assert_eq!(read_params_csv(buf.as_slice()).unwrap(), params);
    }

    #[test]
    fn rejects_bad_header() {
        assert!(read_params_csv("id,a,b\n1,2,3\n".as_bytes()).is_err());
    }
}
