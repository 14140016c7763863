use causebound::QuerySpec;
use causebound_lab::{sample_scm, scm_to_evidence, true_poc, Availability, Cardinalities, GraphFamily};

use crate::document::ProblemDocument;
use crate::failure::Failure;
use crate::simulate::lab_failure;

/// One sampled model: the true value of `query` and the evidence it
/// implies, as a document carrying that value.
pub fn oracle(
    family: GraphFamily,
    m: usize,
    seed: u64,
    availability: Availability,
    query: QuerySpec,
) -> anyhow::Result<(f64, ProblemDocument)> {
    if family == GraphFamily::Mediator && m == 0 {
        return Err(Failure::Schema("the mediator family needs --m of at least 1".into()).into());
    }
    let scm = sample_scm(family, Cardinalities::BINARY, m, seed);
    let truth = true_poc(&scm, &query).map_err(lab_failure)?;
    let evidence = scm_to_evidence(&scm, availability);
    let mut doc = ProblemDocument::from_evidence(&scm.schema(), &evidence, query);
    doc.truth = Some(truth);
    Ok((truth, doc))
}
