//! Rayon drivers over the core's per-tree and per-instance entry points.
//!
//! Every unit of work derives its randomness from its own index, so these
//! return exactly what the sequential core functions return.

use locality_core::blackbox::{fit_tree, RandomForest, RandomForestParams};
use locality_core::fidelity::{evaluate_instance, FidelityConfig, FidelityReport, InstanceScore};
use locality_core::surrogate::{ExplainerConfig, Reference};
use locality_core::{BlackBox, Dataset, Error};
use rayon::prelude::*;

/// Grows the forest's trees in parallel.
pub fn train_forest(train: &Dataset, params: &RandomForestParams) -> Result<RandomForest, Error> {
    if params.n_trees == 0 {
        return Err(Error::InvalidArgument("n_trees must be at least 1".into()));
    }
    if !train.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let trees = (0..params.n_trees).into_par_iter().map(|t| fit_tree(train, params, t)).collect();
    RandomForest::from_trees(train.dim(), trees)
}

/// Evaluates the rows `indices` of `eval_set` at every radius fraction and
/// returns one report per fraction.
pub fn fidelity_reports<M: BlackBox + ?Sized>(
    model: &M,
    reference: &Reference,
    explainer: &ExplainerConfig,
    eval_set: &Dataset,
    indices: &[usize],
    fractions: &[f64],
    fid: &FidelityConfig,
) -> Result<Vec<FidelityReport>, Error> {
    explainer.validate()?;
    for &f in fractions {
        FidelityConfig { r_fid_fraction: f, ..fid.clone() }.validate()?;
    }
    let per_instance: Vec<Vec<InstanceScore>> = indices
        .par_iter()
        .map(|&i| evaluate_instance(model, reference, explainer, eval_set.row(i), i, fractions, fid))
        .collect::<Result<_, _>>()?;
    Ok(fractions
        .iter()
        .enumerate()
        .map(|(k, &f)| {
            let scores = per_instance.iter().map(|s| s[k].clone()).collect();
            FidelityReport::from_instances(f, fid.n_eval, scores)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use locality_core::data::{generate_half_moons, train_test_split};
    use locality_core::fidelity::dataset_fidelity;

    #[test]
    fn parallel_matches_sequential() {
        let data = generate_half_moons(300, 0.3, 5).unwrap();
        let (train, test) = train_test_split(&data, 0.2, 5).unwrap();
        let params = RandomForestParams { n_trees: 20, seed: 5, ..Default::default() };
        let forest = train_forest(&train, &params).unwrap();
        assert_eq!(forest, RandomForest::fit(&train, &params).unwrap());

        let reference = Reference::new(train);
        let mut cfg = ExplainerConfig::ls(0.3, 9);
        cfg.n_samples = 300;
        let fid = FidelityConfig { n_eval: 200, ..FidelityConfig::new(0.2, 4) };
        let test = test.subset(&(0..8).collect::<Vec<_>>());
        let seq = dataset_fidelity(&forest, &cfg, &test, &reference, &fid).unwrap();
        let par =
            fidelity_reports(&forest, &reference, &cfg, &test, &(0..8).collect::<Vec<_>>(), &[0.2], &fid).unwrap();
        assert_eq!(par[0], seq);
    }
}
