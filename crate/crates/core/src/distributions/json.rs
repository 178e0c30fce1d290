//! JSON encoding of fitted models, e.g.
//! `{"family":"gaussian_mixture","k":2,"weights":[..],"means":[..],"sds":[..]}`
//! or `{"family":"exponential","theta":2.0}`.

use super::{FamilyId, FittedModel, Params};
use crate::error::{AgofError, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelJson {
    Exponential { theta: f64 },
    Normal { mu: f64, sigma: f64 },
    Weibull { shape: f64, scale: f64 },
    GaussianMixture { k: usize, weights: Vec<f64>, means: Vec<f64>, sds: Vec<f64> },
    Dirac { mu: f64 },
}

impl From<&FittedModel> for ModelJson {
    fn from(m: &FittedModel) -> Self {
        let v = &m.params().values;
        match m.family() {
            FamilyId::Exponential => ModelJson::Exponential { theta: v[0] },
            FamilyId::Normal => ModelJson::Normal { mu: v[0], sigma: v[1] },
            FamilyId::Weibull => ModelJson::Weibull { shape: v[0], scale: v[1] },
            FamilyId::GaussianMixture { k } => ModelJson::GaussianMixture {
                k,
                weights: v[..k].to_vec(),
                means: v[k..2 * k].to_vec(),
                sds: v[2 * k..].to_vec(),
            },
            FamilyId::Dirac => ModelJson::Dirac { mu: v[0] },
        }
    }
}

impl TryFrom<ModelJson> for FittedModel {
    type Error = AgofError;

    fn try_from(j: ModelJson) -> Result<Self> {
        match j {
            ModelJson::Exponential { theta } => FittedModel::exponential(theta),
            ModelJson::Normal { mu, sigma } => FittedModel::normal(mu, sigma),
            ModelJson::Weibull { shape, scale } => FittedModel::weibull(shape, scale),
            ModelJson::GaussianMixture { k, weights, means, sds } => {
                if weights.len() != k {
                    return Err(AgofError::Input(format!("mixture declares k={k} but has {} weights", weights.len())));
                }
                FittedModel::gaussian_mixture(&weights, &means, &sds)
            }
            ModelJson::Dirac { mu } => FittedModel::dirac(mu),
        }
    }
}

impl Serialize for FittedModel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModelJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FittedModel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ModelJson::deserialize(d)?;
        FittedModel::try_from(j).map_err(serde::de::Error::custom)
    }
}

impl FittedModel {
    /// Parses either a JSON object or the compact form `family:v1,v2,...`
    /// (`gaussian_mixture:w1,..,wk,m1,..,mk,s1,..,sk`).
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec.starts_with('{') {
            return serde_json::from_str(spec).map_err(|e| AgofError::Input(format!("bad model JSON: {e}")));
        }
        let (name, rest) = spec
            .split_once(':')
            .ok_or_else(|| AgofError::Input(format!("model spec '{spec}' is not family:params")))?;
        let values = rest
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| AgofError::Input(format!("bad number '{t}' in model spec")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let family = match FamilyId::parse(name, None)? {
            FamilyId::GaussianMixture { .. } => {
                if values.len() % 3 != 0 {
                    return Err(AgofError::Input("mixture spec needs 3k values".into()));
                }
                FamilyId::gaussian_mixture(values.len() / 3)?
            }
            f => f,
        };
        FittedModel::new(family, Params::new(values))
    }
}
