use crate::error::Result;
use crate::model::{ConstraintFunction, ParetoCertificate, RpDataset};

/// `U^i(γ) = min_s [u_s^i + λ_s^i·g_s^i(γ)]` built from a certificate.
#[derive(Clone, Debug)]
pub struct ReconstructedUtility {
    pub u: Vec<f64>,
    pub lambda: Vec<f64>,
    pub constraints: Vec<ConstraintFunction>,
}

impl ReconstructedUtility {
    pub fn eval(&self, gamma: &[f64]) -> f64 {
        self.u
            .iter()
            .zip(&self.lambda)
            .zip(&self.constraints)
            .map(|((u, l), g)| u + l * g.value(gamma))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Reconstructs agent `agent`'s utility after checking the certificate
/// against the dataset at its own relaxation.
pub fn reconstruct_utility(cert: &ParetoCertificate, d: &RpDataset, agent: usize) -> Result<ReconstructedUtility> {
    cert.validate(d, crate::TOL_LP)?;
    if agent >= d.agents() {
        return Err(crate::Error::Invalid(format!("agent {agent} out of range")));
    }
    Ok(ReconstructedUtility {
        u: cert.u.iter().map(|row| row[agent]).collect(),
        lambda: cert.lambda.iter().map(|row| row[agent]).collect(),
        constraints: (0..d.periods()).map(|t| d.constraint(t, agent).clone()).collect(),
    })
}
