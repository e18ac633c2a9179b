use std::collections::HashMap;

use super::MetricError;

/// Sufficient statistics for BLEU; summing them pools a corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct BleuStats {
    /// Clipped n-gram matches per order (weighted for the keyword variant).
    pub matches: Vec<f64>,
    /// Hypothesis n-gram totals per order.
    pub totals: Vec<f64>,
    pub hyp_len: usize,
    pub ref_len: usize,
}

impl BleuStats {
    pub fn zero(max_n: usize) -> Self {
        Self { matches: vec![0.0; max_n], totals: vec![0.0; max_n], hyp_len: 0, ref_len: 0 }
    }

    pub fn add(&mut self, other: &BleuStats) {
        for (a, b) in self.matches.iter_mut().zip(&other.matches) {
            *a += b;
        }
        for (a, b) in self.totals.iter_mut().zip(&other.totals) {
            *a += b;
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
    }

    /// Score in [0, 100]. The unigram precision is unsmoothed; higher orders
    /// use add-one smoothing.
    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 {
            return if self.ref_len == 0 { 100.0 } else { 0.0 };
        }
        let max_n = self.matches.len();
        let mut log_sum = 0.0;
        for n in 0..max_n {
            let p = if n == 0 {
                self.matches[0] / self.totals[0]
            } else {
                (self.matches[n] + 1.0) / (self.totals[n] + 1.0)
            };
            if p <= 0.0 {
                return 0.0;
            }
            log_sum += p.ln();
        }
        let (c, r) = (self.hyp_len as f64, self.ref_len as f64);
        let bp = if c > r { 1.0 } else { (1.0 - r / c).exp() };
        (100.0 * bp * (log_sum / max_n as f64).exp()).min(100.0)
    }
}

fn ngram_counts<'b, 'a>(tokens: &'b [&'a str], n: usize) -> HashMap<&'b [&'a str], usize> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// Reference length closest to `hyp_len`, preferring the shorter on ties.
pub(crate) fn closest_ref_len(hyp_len: usize, refs: &[Vec<&str>]) -> usize {
    refs.iter().map(|r| r.len()).min_by_key(|&r| (r.abs_diff(hyp_len), r)).unwrap_or(0)
}

/// BLEU statistics; `unigram_weight` scales unigram matches and totals per token.
pub fn bleu_stats(
    hyp: &[&str],
    refs: &[Vec<&str>],
    max_n: usize,
    unigram_weight: &dyn Fn(&str) -> f64,
) -> Result<BleuStats, MetricError> {
    if refs.is_empty() {
        return Err(MetricError::EmptyReference);
    }
    let mut stats = BleuStats::zero(max_n);
    stats.hyp_len = hyp.len();
    stats.ref_len = closest_ref_len(hyp.len(), refs);
    for n in 1..=max_n {
        let h = ngram_counts(hyp, n);
        let mut max_ref: HashMap<&[&str], usize> = HashMap::new();
        for r in refs {
            for (g, c) in ngram_counts(r, n) {
                let e = max_ref.entry(g).or_insert(0);
                *e = (*e).max(c);
            }
        }
        for (g, c) in h {
            let w = if n == 1 { unigram_weight(g[0]) } else { 1.0 };
            let clipped = c.min(max_ref.get(g).copied().unwrap_or(0));
            stats.matches[n - 1] += w * clipped as f64;
            stats.totals[n - 1] += w * c as f64;
        }
    }
    Ok(stats)
}

/// Sentence BLEU over word tokens.
pub fn bleu(hypothesis: &str, references: &[&str], max_n: usize) -> Result<f64, MetricError> {
    let refs: Vec<Vec<&str>> = references.iter().map(|r| super::tokens(r)).collect();
    Ok(bleu_stats(&super::tokens(hypothesis), &refs, max_n, &|_| 1.0)?.score())
}

/// Corpus BLEU from pooled statistics over `(hypothesis, references)` pairs.
pub fn corpus_bleu(pairs: &[(&str, Vec<&str>)], max_n: usize) -> Result<f64, MetricError> {
    if pairs.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let mut total = BleuStats::zero(max_n);
    for (h, rs) in pairs {
        let refs: Vec<Vec<&str>> = rs.iter().map(|r| super::tokens(r)).collect();
        total.add(&bleu_stats(&super::tokens(h), &refs, max_n, &|_| 1.0)?);
    }
    Ok(total.score())
}
