use super::em::{em_fit_mixture, EmConfig};
use super::{FamilyId, Params, Sample};
use crate::error::{AgofError, Result};

/// Maximum-likelihood fit of `family` to `sample` with default EM settings.
pub fn fit_mle(family: FamilyId, sample: &Sample) -> Result<Params> {
    fit_mle_with_em(family, sample, &EmConfig::default())
}

/// Maximum-likelihood fit; mixtures are delegated to EM with `em`.
pub fn fit_mle_with_em(family: FamilyId, sample: &Sample, em: &EmConfig) -> Result<Params> {
    match family {
        FamilyId::Exponential => {
            if let Some(bad) = sample.data().iter().find(|&&x| x <= 0.0) {
                return Err(AgofError::Domain(format!(
                    "exponential fit needs positive data, found {bad}"
                )));
            }
            Ok(Params::new(vec![sample.mean()]))
        }
        FamilyId::Normal => {
            if sample.len() < 2 {
                return Err(AgofError::InsufficientData { needed: 2, got: sample.len() });
            }
            let mu = sample.mean();
            let var = sample.data().iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / sample.len() as f64;
            if !(var > 0.0) {
                return Err(AgofError::DegenerateData("zero sample variance".into()));
            }
            Ok(Params::new(vec![mu, var.sqrt()]))
        }
        FamilyId::Dirac => Ok(Params::new(vec![sample.mean()])),
        FamilyId::GaussianMixture { k } => em_fit_mixture(sample, k, em),
        FamilyId::Weibull => Err(AgofError::Unsupported(
            "weibull is available as a generator only; no MLE fit".into(),
        )),
    }
}
