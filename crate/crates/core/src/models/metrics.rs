use crate::dataset::Task;

/// Predicted class per row: `p >= 0.5` for one output, argmax otherwise
/// (first maximum on ties).
pub fn decisions(probs: &[Vec<f64>]) -> Vec<usize> {
    probs
        .iter()
        .map(|p| {
            if p.len() == 1 {
                usize::from(p[0] >= 0.5)
            } else {
                let mut best = 0;
                for (k, &v) in p.iter().enumerate() {
                    if v > p[best] {
                        best = k;
                    }
                }
                best
            }
        })
        .collect()
}

fn classes(targets: &[Vec<f64>]) -> Vec<usize> {
    decisions(targets)
}

fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> Option<f64> {
    if tp == 0 {
        return None;
    }
    Some(2.0 * tp as f64 / (2 * tp + fp + fn_) as f64)
}

fn counts(pred: &[usize], truth: &[usize], level: usize) -> (usize, usize, usize) {
    let mut c = (0, 0, 0);
    for (&p, &t) in pred.iter().zip(truth) {
        match (p == level, t == level) {
            (true, true) => c.0 += 1,
            (true, false) => c.1 += 1,
            (false, true) => c.2 += 1,
            _ => {}
        }
    }
    c
}

/// Binary: F1 of the positive level, `None` when there is no true positive.
/// Multi: macro average over levels of one-vs-rest F1; a level without a
/// true positive contributes 0.
pub fn f1_score(probs: &[Vec<f64>], targets: &[Vec<f64>], task: Task) -> Option<f64> {
    let pred = decisions(probs);
    let truth = classes(targets);
    match task {
        Task::Binary => {
            let (tp, fp, fn_) = counts(&pred, &truth, 1);
            f1_from_counts(tp, fp, fn_)
        }
        Task::Multi => {
            let k = targets.first().map_or(0, Vec::len);
            if k == 0 {
                return None;
            }
            let mut total = 0.0;
            for level in 0..k {
                let (tp, fp, fn_) = counts(&pred, &truth, level);
                match f1_from_counts(tp, fp, fn_) {
                    Some(f) => total += f,
                    None => log::debug!("level {level} has no true positive; its F1 counts as 0"),
                }
            }
            Some(total / k as f64)
        }
    }
}

/// Micro-averaged F1 over levels, which for single-label multi-class
/// decisions equals accuracy. Reported next to the macro score.
pub fn micro_f1(probs: &[Vec<f64>], targets: &[Vec<f64>]) -> Option<f64> {
    if probs.is_empty() {
        return None;
    }
    let pred = decisions(probs);
    let truth = classes(targets);
    let hits = pred.iter().zip(&truth).filter(|(p, t)| p == t).count();
    Some(hits as f64 / pred.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn binary_cases() {
        let y = rows(&[1.0, 0.0, 1.0, 0.0]);
        assert_eq!(f1_score(&rows(&[0.9, 0.1, 0.7, 0.2]), &y, Task::Binary), Some(1.0));
        assert_eq!(f1_score(&rows(&[0.1, 0.1, 0.1, 0.1]), &y, Task::Binary), None);
        // precision = recall = 0.5
        assert_eq!(f1_score(&rows(&[0.9, 0.9, 0.1, 0.1]), &y, Task::Binary), Some(0.5));
        assert_eq!(f1_score(&rows(&[0.5]), &rows(&[1.0]), Task::Binary), Some(1.0));
    }

    #[test]
    fn macro_counts_missing_levels_as_zero() {
        let y = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let p = vec![vec![0.9, 0.1, 0.1], vec![0.2, 0.8, 0.1], vec![0.2, 0.8, 0.1]];
        let f = f1_score(&p, &y, Task::Multi).unwrap();
        assert!((f - (1.0 + 2.0 / 3.0) / 3.0).abs() < 1e-12);
        assert!((micro_f1(&p, &y).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    }
}
