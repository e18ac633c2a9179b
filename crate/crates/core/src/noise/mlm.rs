use rand::Rng;

use super::{eligible_words, select_words, NoiseError};
use crate::example::{Objective, TrainingExample};
use crate::tokenizer::{TokenizedDocument, Vocabulary};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MlmTrace {
    pub masked_words: Vec<usize>,
    pub masked_tokens: usize,
    pub eligible_tokens: usize,
}

/// Whole-word masking at `mask_ratio` of the document's tokens.
pub fn corrupt_mlm<R: Rng + ?Sized>(
    doc: &TokenizedDocument,
    vocab: &Vocabulary,
    mask_ratio: f64,
    epoch: u32,
    rng: &mut R,
) -> Result<(TrainingExample, MlmTrace), NoiseError> {
    let eligible = eligible_words(doc, vocab)?;
    let candidates: Vec<usize> = (0..doc.word_count()).filter(|&w| eligible[w]).collect();
    let word_len = |w: usize| doc.word_spans[w].1 - doc.word_spans[w].0;
    let eligible_tokens: usize = candidates.iter().map(|&w| word_len(w)).sum();
    let chosen = select_words(&candidates, word_len, mask_ratio, eligible_tokens, rng);
    let example = mask_words(doc, vocab, &chosen, epoch)?;
    let masked_tokens = chosen.iter().map(|&w| word_len(w)).sum();
    Ok((example, MlmTrace { masked_words: chosen, masked_tokens, eligible_tokens }))
}

/// Replace every token of the listed words with `<mask>`; the target keeps
/// originals at masked positions and `<pad>` elsewhere.
pub fn mask_words(
    doc: &TokenizedDocument,
    vocab: &Vocabulary,
    words: &[usize],
    epoch: u32,
) -> Result<TrainingExample, NoiseError> {
    let mask = vocab.mask_id()?;
    let pad = vocab.pad_id()?;
    let mut input = doc.tokens.clone();
    let mut target = vec![pad; doc.tokens.len()];
    for &w in words {
        let (s, e) = doc.word_spans[w];
        for i in s..e {
            target[i] = input[i];
            input[i] = mask;
        }
    }
    Ok(TrainingExample { objective: Objective::Mlm, src_lang: doc.language, tgt_lang: doc.language, input, target, epoch })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::Language;
    use crate::rng::stream;
    use crate::tokenizer::{train_bpe, SpecialRole};

    fn vocab() -> Vocabulary {
        train_bpe(&["int index = 0;"; 8], 256 + 7 + 40, &SpecialRole::defaults()).unwrap()
    }

    #[test]
    fn int_index_forced() {
        let v = vocab();
        let doc = v.encode("int index", Language::Cpp);
        let ex = mask_words(&doc, &v, &[1], 0).unwrap();
        let mask = v.mask_id().unwrap();
        assert_eq!(ex.input, vec![doc.tokens[0], mask]);
        assert_eq!(v.decode(&ex.input).unwrap(), "int");
        assert_eq!(v.token_text(ex.input[1]).unwrap(), "<mask>");
        assert_eq!(v.decode(&[ex.target[1]]).unwrap(), " index");
        assert_eq!(ex.target[0], v.pad_id().unwrap());
    }

    #[test]
    fn zero_ratio_is_identity() {
        let v = vocab();
        let doc = v.encode("int index = 0;", Language::Cpp);
        let (ex, trace) = corrupt_mlm(&doc, &v, 0.0, 0, &mut stream(1, &[])).unwrap();
        assert_eq!(ex.input, doc.tokens);
        assert!(ex.target.iter().all(|&t| t == v.pad_id().unwrap()));
        assert_eq!(trace.masked_tokens, 0);
    }

    #[test]
    fn empty_doc() {
        let v = vocab();
        let doc = v.encode("", Language::Cpp);
        let (ex, _) = corrupt_mlm(&doc, &v, 0.15, 0, &mut stream(1, &[])).unwrap();
        assert!(ex.input.is_empty() && ex.target.is_empty());
    }

    #[test]
    fn targets_only_at_masked_positions() {
        let v = vocab();
        let doc = v.encode("int index = index + 1 ; int j = index ;", Language::Cpp);
        let (mask, pad) = (v.mask_id().unwrap(), v.pad_id().unwrap());
        for seed in 0..50 {
            let (ex, _) = corrupt_mlm(&doc, &v, 0.3, 0, &mut stream(seed, &[])).unwrap();
            for i in 0..ex.input.len() {
                if ex.input[i] == mask {
                    assert_eq!(ex.target[i], doc.tokens[i]);
                } else {
                    assert_eq!(ex.target[i], pad);
                    assert_eq!(ex.input[i], doc.tokens[i]);
                }
            }
            // whole words only
            for &(s, e) in &doc.word_spans {
                let m: Vec<bool> = (s..e).map(|i| ex.input[i] == mask).collect();
                assert!(m.iter().all(|&x| x) || m.iter().all(|&x| !x));
            }
        }
    }
}
