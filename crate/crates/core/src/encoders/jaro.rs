/// Jaro similarity in `[0, 1]`. Two empty strings score 1; no matching
/// characters score 0.
pub fn jaro_similarity(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut b_used = vec![false; b.len()];
    let mut a_matched = Vec::new();
    for (i, &c) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_used[j] && b[j] == c {
                b_used[j] = true;
                a_matched.push(c);
                break;
            }
        }
    }
    let m = a_matched.len();
    if m == 0 {
        return 0.0;
    }
    let b_matched = b.iter().zip(&b_used).filter(|p| *p.1).map(|p| *p.0);
    let mismatched = a_matched.iter().zip(b_matched).filter(|(x, y)| **x != *y).count();
    let t = mismatched as f64 / 2.0;
    let m = m as f64;
    (m / a.len() as f64 + m / b.len() as f64 + (m - t) / m) / 3.0
}

/// Jaro similarity boosted by the common prefix (up to 4 chars, scale 0.1).
pub fn jaro_winkler_similarity(a: &str, b: &str) -> f64 {
    let j = jaro_similarity(a, b);
    let prefix = a.chars().zip(b.chars()).take(4).take_while(|(x, y)| x == y).count();
    j + prefix as f64 * 0.1 * (1.0 - j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn textbook_pairs() {
        assert_eq!(jaro_similarity("abc", "abc"), 1.0);
        assert_eq!(jaro_similarity("abc", "xyz"), 0.0);
        assert_eq!(jaro_similarity("", ""), 1.0);
        assert_eq!(jaro_similarity("", "a"), 0.0);
        assert_abs_diff_eq!(jaro_similarity("MARTHA", "MARHTA"), 17.0 / 18.0, epsilon = 1e-12);
        assert_abs_diff_eq!(jaro_winkler_similarity("MARTHA", "MARHTA"), 0.961111111111111, epsilon = 1e-12);
    }

    #[test]
    fn single_chars_use_a_zero_window() {
        assert_eq!(jaro_similarity("a", "a"), 1.0);
        assert_eq!(jaro_similarity("ab", "ba"), 0.0);
    }
}
