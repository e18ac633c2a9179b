use std::collections::HashMap;

fn char_ngrams(chars: &[char], n: usize) -> HashMap<&[char], usize> {
    let mut m = HashMap::new();
    if chars.len() >= n {
        for w in chars.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// Character n-gram F-score, whitespace removed, averaged over orders 1..=`max_n`.
///
/// Orders for which neither string has an n-gram are left out of the average;
/// an order where only one side has n-grams scores 0.
pub fn chrf(hypothesis: &str, reference: &str, max_n: usize, beta: f64) -> f64 {
    let h: Vec<char> = hypothesis.chars().filter(|c| !c.is_whitespace()).collect();
    let r: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
    let b2 = beta * beta;
    let mut sum = 0.0;
    let mut orders = 0usize;
    for n in 1..=max_n {
        let (hc, rc) = (char_ngrams(&h, n), char_ngrams(&r, n));
        let th: usize = hc.values().sum();
        let tr: usize = rc.values().sum();
        if th == 0 && tr == 0 {
            continue;
        }
        orders += 1;
        let m: usize = hc.iter().map(|(g, c)| (*c).min(rc.get(g).copied().unwrap_or(0))).sum();
        if m == 0 {
            continue;
        }
        let p = m as f64 / th as f64;
        let rec = m as f64 / tr as f64;
        sum += (1.0 + b2) * p * rec / (b2 * p + rec);
    }
    if orders == 0 {
        100.0
    } else {
        100.0 * sum / orders as f64
    }
}
