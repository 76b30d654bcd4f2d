use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const CV_FOLDS: usize = 10;

/// Fold id per sample. Stratified 10-fold when every class has at least ten
/// members, leave-one-out when the smallest class has 2..10 members, and
/// `None` when some class has fewer than two members.
pub(crate) fn fold_assignment(targets: &[usize], n_classes: usize, seed: u64) -> Option<Vec<usize>> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); n_classes];
    for (i, &t) in targets.iter().enumerate() {
        by_class[t].push(i);
    }
    let min_count = by_class.iter().map(Vec::len).min().unwrap_or(0);
    if min_count < 2 {
        return None;
    }
    if min_count < CV_FOLDS {
        return Some((0..targets.len()).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; targets.len()];
    let mut counter = 0;
    for members in &mut by_class {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            folds[i] = counter % CV_FOLDS;
            counter += 1;
        }
    }
    Some(folds)
}

/// Cross-validated accuracy of a classifier that predicts sample `i` from
/// every sample outside its fold.
pub(crate) fn cv_accuracy<F>(folds: &[usize], targets: &[usize], predict: F) -> f64
where
    F: Fn(usize, &dyn Fn(usize) -> bool) -> usize,
{
    let correct = (0..targets.len())
        .filter(|&i| {
            let fold = folds[i];
            let in_train = |j: usize| folds[j] != fold;
            predict(i, &in_train) == targets[i]
        })
        .count();
    correct as f64 / targets.len() as f64
}
