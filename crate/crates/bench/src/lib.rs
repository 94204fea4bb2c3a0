//! Fixtures shared by the benchmarks.

use zovr_core::problems::{builtin, make_logistic, Logistic};
use zovr_core::{anchor_gradient, AnchorCache, DirectionSet, QueryLedger, SampleBatch};

/// One-vs-all logistic loss on the bundled digits (d = 50, n = 200).
pub fn logistic() -> Logistic {
    make_logistic(builtin::digits()).expect("bundled digits are valid")
}

/// Anchor built at the origin over the full batch with `directions` directions.
pub fn anchor(problem: &Logistic, directions: usize, mu: f64) -> AnchorCache {
    let d = zovr_core::BlackBoxProblem::dim(problem);
    let n = zovr_core::BlackBoxProblem::num_components(problem);
    let set = DirectionSet::new(7, directions, d).expect("valid direction set");
    anchor_gradient(
        problem,
        &vec![0.0; d],
        &set,
        &SampleBatch::full(n),
        mu,
        &mut QueryLedger::new(),
    )
    .expect("finite anchor")
}
