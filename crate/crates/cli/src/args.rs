use clap::ValueEnum;

use causebound::QuerySpec;
use causebound_lab::{Availability, GraphFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    /// Covariates that are non-descendants of the treatment.
    Nondesc,
    /// A back-door covariate set and a mediator.
    Mediator,
}

impl From<FamilyArg> for GraphFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Nondesc => GraphFamily::Nondescendant,
            FamilyArg::Mediator => GraphFamily::Mediator,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AvailabilityArg {
    Joint,
    CovariateSpecific,
    MarginalOnly,
}

impl From<AvailabilityArg> for Availability {
    fn from(a: AvailabilityArg) -> Self {
        match a {
            AvailabilityArg::Joint => Availability::Joint,
            AvailabilityArg::CovariateSpecific => Availability::CovariateSpecific,
            AvailabilityArg::MarginalOnly => Availability::MarginalOnly,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QueryArg {
    Pns,
    Pn,
    Ps,
}

impl From<QueryArg> for QuerySpec {
    fn from(q: QueryArg) -> Self {
        match q {
            QueryArg::Pns => QuerySpec::pns(),
            QueryArg::Pn => QuerySpec::pn(),
            QueryArg::Ps => QuerySpec::ps(),
        }
    }
}
