//! Errors and their process exit codes.

use ruinbound::bounds::BoundError;
use ruinbound::dists::DistError;
use ruinbound::mc::McError;
use ruinbound::riskmodel::RiskError;
use ruinbound::seqmodel::SeqError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("infeasible constants: {0}")]
    Infeasible(String),
    #[error("golden mismatch: {0}")]
    Golden(String),
    #[error("bound domination failure: {0}")]
    Domination(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Other(_) => 1,
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::Golden(_) => 4,
            CliError::Domination(_) => 5,
        }
    }
}

impl From<DistError> for CliError {
    fn from(e: DistError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<SeqError> for CliError {
    fn from(e: SeqError) -> Self {
        match e {
            SeqError::Dist(_) | SeqError::Invalid(_) | SeqError::ZeroIndex | SeqError::Parameter(_) => {
                CliError::Config(e.to_string())
            }
            SeqError::Infinite { .. }
            | SeqError::NonMonotone { .. }
            | SeqError::CertificateOpen { .. }
            | SeqError::NonNegativeDrift { .. }
            | SeqError::InfiniteMoment { .. }
            | SeqError::NoNegativeDrift { .. } => CliError::Infeasible(e.to_string()),
        }
    }
}

impl From<BoundError> for CliError {
    fn from(e: BoundError) -> Self {
        match e {
            BoundError::Sequence(s) => s.into(),
            BoundError::InvalidConstants(_) | BoundError::Argument(_) => CliError::Config(e.to_string()),
            BoundError::NoMargin { .. }
            | BoundError::InfeasibleDelta { .. }
            | BoundError::DeltaRange(_)
            | BoundError::DivergentMgf { .. }
            | BoundError::TailDiverges { .. } => CliError::Infeasible(e.to_string()),
        }
    }
}

impl From<RiskError> for CliError {
    fn from(e: RiskError) -> Self {
        match e {
            RiskError::Sequence(s) => s.into(),
            RiskError::Bound(b) => b.into(),
            RiskError::Dist(d) => d.into(),
            RiskError::Invalid(_) | RiskError::Parameter(_) => CliError::Config(e.to_string()),
            RiskError::NetProfit(_) | RiskError::InfeasibleDelta { .. } => CliError::Infeasible(e.to_string()),
            RiskError::NotDegenerate => CliError::Other(e.to_string()),
        }
    }
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::Plan(_) => CliError::Config(e.to_string()),
            McError::Domination(_) => CliError::Domination(e.to_string()),
        }
    }
}
