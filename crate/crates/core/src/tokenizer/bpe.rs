use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::segment::word_ranges;
use super::vocab::{SpecialRole, Vocabulary};
use super::{TokenizerError, BYTE_ALPHABET};

type Pair = (u32, u32);

/// Train a byte-level BPE vocabulary.
///
/// Merges never cross word boundaries. Among pairs of equal frequency the
/// lexicographically smallest `(left bytes, right bytes)` wins. Training stops
/// at `vocab_size` entries or when no adjacent pair remains.
pub fn train_bpe<S: AsRef<str>>(
    corpus: &[S],
    vocab_size: usize,
    specials: &[SpecialRole],
) -> Result<Vocabulary, TokenizerError> {
    if corpus.is_empty() {
        return Err(TokenizerError::EmptyCorpus);
    }
    let minimum = BYTE_ALPHABET + specials.len();
    if vocab_size < minimum {
        return Err(TokenizerError::VocabTooSmall { requested: vocab_size, minimum });
    }
    let base = specials.len() as u32;

    // BTreeMap keeps word order independent of hashing.
    let mut counts: BTreeMap<&[u8], u64> = BTreeMap::new();
    for doc in corpus {
        let doc = doc.as_ref();
        for r in word_ranges(doc) {
            *counts.entry(&doc.as_bytes()[r]).or_default() += 1;
        }
    }
    let mut words: Vec<(Vec<u32>, u64)> =
        counts.into_iter().map(|(w, c)| (w.iter().map(|&b| base + b as u32).collect(), c)).collect();

    let mut pieces: Vec<Vec<u8>> = (0..BYTE_ALPHABET).map(|b| vec![b as u8]).collect();
    let mut pair_counts: HashMap<Pair, i64> = HashMap::new();
    let mut where_: HashMap<Pair, BTreeSet<usize>> = HashMap::new();
    for (wi, (syms, c)) in words.iter().enumerate() {
        for w in syms.windows(2) {
            *pair_counts.entry((w[0], w[1])).or_default() += *c as i64;
            where_.entry((w[0], w[1])).or_default().insert(wi);
        }
    }

    let mut merges = Vec::new();
    let target_merges = vocab_size - minimum;
    while merges.len() < target_merges {
        let piece = |id: u32| &pieces[(id - base) as usize];
        let mut best: Option<(Pair, i64)> = None;
        for (&pair, &count) in &pair_counts {
            if count <= 0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((bp, bc)) => match count.cmp(&bc) {
                    Ordering::Greater => true,
                    Ordering::Less => false,
                    Ordering::Equal => (piece(pair.0), piece(pair.1)) < (piece(bp.0), piece(bp.1)),
                },
            };
            if better {
                best = Some((pair, count));
            }
        }
        let Some((pair, _)) = best else { break };

        let new_id = base + pieces.len() as u32;
        let mut merged = piece(pair.0).clone();
        merged.extend_from_slice(piece(pair.1));
        pieces.push(merged);
        merges.push(pair);

        let affected = where_.remove(&pair).unwrap_or_default();
        for wi in affected {
            let (syms, c) = &mut words[wi];
            let c = *c as i64;
            for w in syms.windows(2) {
                let p = (w[0], w[1]);
                *pair_counts.get_mut(&p).unwrap() -= c;
                if let Some(set) = where_.get_mut(&p) {
                    set.remove(&wi);
                }
            }
            let mut out = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && (syms[i], syms[i + 1]) == pair {
                    out.push(new_id);
                    i += 2;
                } else {
                    out.push(syms[i]);
                    i += 1;
                }
            }
            *syms = out;
            for w in syms.windows(2) {
                let p = (w[0], w[1]);
                *pair_counts.entry(p).or_default() += c;
                where_.entry(p).or_default().insert(wi);
            }
        }
        pair_counts.retain(|_, c| *c > 0);
    }

    Vocabulary::from_parts(specials.to_vec(), merges)
}
