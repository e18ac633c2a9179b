/// Length of the longest common subsequence.
pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { cur[j].max(prev[j + 1]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// LCS-based F1 over word tokens.
pub fn rouge_l(hypothesis: &str, reference: &str) -> f64 {
    let h = super::tokens(hypothesis);
    let r = super::tokens(reference);
    if h.is_empty() && r.is_empty() {
        return 100.0;
    }
    let l = lcs_len(&h, &r);
    if l == 0 {
        return 0.0;
    }
    let p = l as f64 / h.len() as f64;
    let rec = l as f64 / r.len() as f64;
    100.0 * 2.0 * p * rec / (p + rec)
}
