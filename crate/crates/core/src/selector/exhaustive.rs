use super::{SelectionProblem, SelectionResult};
use crate::error::{Error, Result};
use crate::graph::Scratch;
use crate::numeric::binomial;

/// Largest number of subsets the exhaustive oracle will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 5_000_000;

/// Far above the disagreement between the fast and canonical objectives.
const SCREEN_MARGIN: f64 = 1e-12;

pub(super) fn run(problem: &SelectionProblem<'_>) -> Result<SelectionResult> {
    let candidates = problem.candidates();
    let k = problem.distractor_count();
    let combinations = binomial(candidates.len() as u64, k as u64);
    if combinations > EXHAUSTIVE_LIMIT {
        return Err(Error::TooManyCombinations {
            combinations,
            limit: EXHAUSTIVE_LIMIT,
        });
    }

    let mut scratch = Scratch::default();
    let mut positions: Vec<usize> = (0..k).collect();
    let mut current: Vec<usize> = positions.iter().map(|&p| candidates[p]).collect();
    let mut best = current.clone();
    let mut best_value = problem.objective(&current, &mut scratch);

    // Lexicographic enumeration; only strict improvements replace the
    // incumbent, so ties keep the smallest list. The fast objective screens
    // out subsets that cannot reach the incumbent; the rest are scored
    // with the canonical order-invariant objective.
    while advance(&mut positions, candidates.len()) {
        for (slot, &p) in current.iter_mut().zip(&positions) {
            *slot = candidates[p];
        }
        if problem.objective_fast(&current) > best_value + SCREEN_MARGIN {
            continue;
        }
        let value = problem.objective(&current, &mut scratch);
        if value < best_value {
            best_value = value;
            best.copy_from_slice(&current);
        }
    }
    problem.finish(best, 0, 0)
}

fn advance(positions: &mut [usize], len: usize) -> bool {
    let k = positions.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if positions[i] < len - k + i {
            positions[i] += 1;
            for j in i + 1..k {
                positions[j] = positions[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SimilarityGraph;
    use crate::selector::exhaustive_select;

    #[test]
    fn enumerates_all_combinations() {
        let mut pos = vec![0, 1];
        let mut seen = vec![pos.clone()];
        while advance(&mut pos, 5) {
            seen.push(pos.clone());
        }
        assert_eq!(seen.len(), 10);
        assert_eq!(seen.last().unwrap(), &vec![3, 4]);
        let mut sorted = seen.clone();
        sorted.sort();
        assert_eq!(sorted, seen);
    }

    #[test]
    fn two_subset_enumeration() {
        let g = SimilarityGraph::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![1.0, 0.2, 0.9, 0.2, 1.0, 0.5, 0.9, 0.5, 1.0],
        )
        .unwrap();
        let res = exhaustive_select(&g, 0, 2, 0.0).unwrap();
        assert_eq!(res.option_set.distractors(), &[1]);
        assert_eq!(res.stats.objective, 0.2);
        assert_eq!(res.stats.s_value, 0.2);
    }

    #[test]
    fn equal_weights_take_smallest_lexicographic_set() {
        let n = 9;
        let w: Vec<f64> = (0..n * n)
            .map(|k| if k / n == k % n { 1.0 } else { 0.37 })
            .collect();
        let g = SimilarityGraph::new((0..n).map(|i| format!("c{i}")).collect(), w).unwrap();
        let res = exhaustive_select(&g, 2, 5, 3.0).unwrap();
        assert_eq!(res.option_set.distractors(), &[0, 1, 3, 4]);
        assert_eq!(res.stats.variance, 0.0);
        assert_eq!(res.stats.objective, 0.37);
    }

    #[test]
    fn rejects_oversized_enumeration() {
        let n = 40;
        let w: Vec<f64> = (0..n * n)
            .map(|k| if k / n == k % n { 1.0 } else { 0.5 })
            .collect();
        let g = SimilarityGraph::new((0..n).map(|i| format!("c{i}")).collect(), w).unwrap();
        assert!(matches!(
            exhaustive_select(&g, 0, 11, 0.0),
            Err(Error::TooManyCombinations { .. })
        ));
    }
}
