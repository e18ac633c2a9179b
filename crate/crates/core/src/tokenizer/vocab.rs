use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use super::segment::word_ranges;
use super::{TokenizedDocument, TokenizerError, BYTE_ALPHABET};
use crate::lang::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpecialRole {
    Pad,
    Bos,
    Eos,
    Mask,
    Lang(Language),
}

impl SpecialRole {
    pub fn defaults() -> Vec<SpecialRole> {
        let mut v = vec![SpecialRole::Pad, SpecialRole::Bos, SpecialRole::Eos, SpecialRole::Mask];
        v.extend(Language::ALL.iter().map(|&l| SpecialRole::Lang(l)));
        v
    }

    pub fn text(self) -> String {
        match self {
            SpecialRole::Pad => "<pad>".into(),
            SpecialRole::Bos => "<s>".into(),
            SpecialRole::Eos => "</s>".into(),
            SpecialRole::Mask => "<mask>".into(),
            SpecialRole::Lang(l) => l.token_text(),
        }
    }
}

impl fmt::Display for SpecialRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpecialRole::Pad => f.write_str("pad"),
            SpecialRole::Bos => f.write_str("bos"),
            SpecialRole::Eos => f.write_str("eos"),
            SpecialRole::Mask => f.write_str("mask"),
            SpecialRole::Lang(l) => write!(f, "lang:{l}"),
        }
    }
}

impl FromStr for SpecialRole {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "pad" => Ok(SpecialRole::Pad),
            "bos" => Ok(SpecialRole::Bos),
            "eos" => Ok(SpecialRole::Eos),
            "mask" => Ok(SpecialRole::Mask),
            _ => s
                .strip_prefix("lang:")
                .and_then(|l| l.parse().ok())
                .map(SpecialRole::Lang)
                .ok_or_else(|| format!("unknown special role `{s}`")),
        }
    }
}

/// Trained BPE vocabulary.
///
/// Ids are laid out contiguously: special tokens first, then the 256 byte
/// tokens, then one token per merge in merge order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    specials: Vec<SpecialRole>,
    merges: Vec<(u32, u32)>,
    pieces: Vec<Vec<u8>>,
    merge_rank: HashMap<(u32, u32), u32>,
    piece_to_id: HashMap<Vec<u8>, u32>,
}

impl Vocabulary {
    pub(crate) fn from_parts(specials: Vec<SpecialRole>, merges: Vec<(u32, u32)>) -> Result<Self, TokenizerError> {
        for (i, a) in specials.iter().enumerate() {
            if specials[..i].contains(a) {
                return Err(TokenizerError::Format { line: 0, reason: format!("duplicate special token {a}") });
            }
        }
        let base = specials.len() as u32;
        let mut pieces: Vec<Vec<u8>> = (0..BYTE_ALPHABET).map(|b| vec![b as u8]).collect();
        let mut merge_rank = HashMap::with_capacity(merges.len());
        let mut piece_to_id: HashMap<Vec<u8>, u32> =
            pieces.iter().enumerate().map(|(i, p)| (p.clone(), base + i as u32)).collect();
        for (rank, &(l, r)) in merges.iter().enumerate() {
            let id = base + pieces.len() as u32;
            let get = |t: u32| -> Result<&Vec<u8>, TokenizerError> {
                t.checked_sub(base)
                    .and_then(|i| pieces.get(i as usize))
                    .ok_or(TokenizerError::Format { line: rank + 2, reason: format!("merge refers to unknown id {t}") })
            };
            let mut merged = get(l)?.clone();
            merged.extend_from_slice(get(r)?);
            if piece_to_id.contains_key(&merged) {
                return Err(TokenizerError::Format { line: rank + 2, reason: "merge produces an existing token".into() });
            }
            piece_to_id.insert(merged.clone(), id);
            merge_rank.insert((l, r), rank as u32);
            pieces.push(merged);
        }
        Ok(Self { specials, merges, pieces, merge_rank, piece_to_id })
    }

    pub fn len(&self) -> usize {
        self.specials.len() + self.pieces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn merges(&self) -> &[(u32, u32)] {
        &self.merges
    }

    pub fn specials(&self) -> &[SpecialRole] {
        &self.specials
    }

    fn base(&self) -> u32 {
        self.specials.len() as u32
    }

    pub fn special_id(&self, role: SpecialRole) -> Option<u32> {
        self.specials.iter().position(|&r| r == role).map(|i| i as u32)
    }

    pub fn require_special(&self, role: SpecialRole) -> Result<u32, TokenizerError> {
        self.special_id(role).ok_or_else(|| TokenizerError::MissingSpecial(role.text()))
    }

    pub fn mask_id(&self) -> Result<u32, TokenizerError> {
        self.require_special(SpecialRole::Mask)
    }

    pub fn pad_id(&self) -> Result<u32, TokenizerError> {
        self.require_special(SpecialRole::Pad)
    }

    pub fn lang_id(&self, lang: Language) -> Result<u32, TokenizerError> {
        self.require_special(SpecialRole::Lang(lang))
    }

    pub fn is_special(&self, id: u32) -> bool {
        id < self.base()
    }

    /// Language of a `<LANG>` token id, if it is one.
    pub fn language_of(&self, id: u32) -> Option<Language> {
        match self.specials.get(id as usize) {
            Some(SpecialRole::Lang(l)) => Some(*l),
            _ => None,
        }
    }

    /// Bytes a token renders to; special tokens render to nothing.
    pub fn token_bytes(&self, id: u32) -> Result<&[u8], TokenizerError> {
        if id < self.base() {
            return Ok(&[]);
        }
        self.pieces.get((id - self.base()) as usize).map(Vec::as_slice).ok_or(TokenizerError::UnknownId(id))
    }

    /// Human-readable form of a token, specials included.
    pub fn token_text(&self, id: u32) -> Result<String, TokenizerError> {
        if let Some(role) = self.specials.get(id as usize) {
            return Ok(role.text());
        }
        Ok(String::from_utf8_lossy(self.token_bytes(id)?).into_owned())
    }

    pub fn id_of(&self, piece: &[u8]) -> Option<u32> {
        self.piece_to_id.get(piece).copied()
    }

    /// Apply merges to one pre-segmented word.
    pub fn encode_word(&self, word: &[u8]) -> Vec<u32> {
        let base = self.base();
        let mut syms: Vec<u32> = word.iter().map(|&b| base + b as u32).collect();
        loop {
            let best = syms
                .windows(2)
                .filter_map(|w| self.merge_rank.get(&(w[0], w[1])).map(|&r| (r, (w[0], w[1]))))
                .min_by_key(|&(r, _)| r);
            let Some((rank, pair)) = best else { break };
            let new_id = base + (BYTE_ALPHABET as u32) + rank;
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
            syms = out;
        }
        syms
    }

    pub fn encode(&self, text: &str, language: Language) -> TokenizedDocument {
        let mut tokens = Vec::new();
        let mut word_spans = Vec::new();
        for r in word_ranges(text) {
            let start = tokens.len();
            tokens.extend(self.encode_word(text[r].as_bytes()));
            word_spans.push((start, tokens.len()));
        }
        TokenizedDocument { doc_id: String::new(), language, tokens, word_spans }
    }

    pub fn decode_bytes(&self, ids: &[u32]) -> Result<Vec<u8>, TokenizerError> {
        let mut out = Vec::new();
        for &id in ids {
            out.extend_from_slice(self.token_bytes(id)?);
        }
        Ok(out)
    }

    /// Inverse of [`Vocabulary::encode`]. Byte sequences that are not valid
    /// UTF-8 (only possible for corrupted token streams) are decoded lossily.
    pub fn decode(&self, ids: &[u32]) -> Result<String, TokenizerError> {
        let bytes = self.decode_bytes(ids)?;
        Ok(match String::from_utf8(bytes) {
            Ok(s) => s,
            Err(e) => String::from_utf8_lossy(e.as_bytes()).into_owned(),
        })
    }

    /// Serialized text form: `bpe-v1 <size>`, merge lines, then the special table.
    pub fn to_text(&self) -> String {
        let table = byte_to_char_table();
        let render = |id: u32| -> String {
            self.token_bytes(id).unwrap().iter().map(|&b| table[b as usize]).collect()
        };
        let mut out = format!("bpe-v1 {}\n", self.len());
        for &(l, r) in &self.merges {
            out.push_str(&render(l));
            out.push(' ');
            out.push_str(&render(r));
            out.push('\n');
        }
        out.push_str(&format!("#specials {}\n", self.specials.len()));
        for (id, role) in self.specials.iter().enumerate() {
            out.push_str(&format!("{role} {id}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, TokenizerError> {
        let err = |line: usize, reason: &str| TokenizerError::Format { line, reason: reason.to_string() };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| err(1, "empty file"))?;
        let size: usize = header
            .strip_prefix("bpe-v1 ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err(1, "expected `bpe-v1 <vocab_size>` header"))?;
        let decode_table: HashMap<char, u8> =
            byte_to_char_table().iter().enumerate().map(|(b, &c)| (c, b as u8)).collect();

        let mut merge_pieces: Vec<(Vec<u8>, Vec<u8>)> = Vec::new();
        let mut specials: Vec<(u32, SpecialRole)> = Vec::new();
        let mut special_count = None;
        for (i, line) in lines {
            let lineno = i + 1;
            if let Some(n) = line.strip_prefix("#specials ") {
                special_count = Some(n.trim().parse::<usize>().map_err(|_| err(lineno, "bad special count"))?);
                continue;
            }
            let (a, b) = line.split_once(' ').ok_or_else(|| err(lineno, "expected two fields"))?;
            if special_count.is_some() {
                let role: SpecialRole = a.parse().map_err(|e: String| err(lineno, &e))?;
                let id: u32 = b.trim().parse().map_err(|_| err(lineno, "bad special id"))?;
                specials.push((id, role));
            } else {
                let unmap = |s: &str| -> Result<Vec<u8>, TokenizerError> {
                    s.chars()
                        .map(|c| decode_table.get(&c).copied())
                        .collect::<Option<Vec<u8>>>()
                        .ok_or_else(|| TokenizerError::UnknownCharacter(s.to_string()))
                };
                merge_pieces.push((unmap(a)?, unmap(b)?));
            }
        }
        let count = special_count.ok_or_else(|| err(0, "missing special table"))?;
        if specials.len() != count {
            return Err(err(0, "special table length mismatch"));
        }
        specials.sort_by_key(|&(id, _)| id);
        if specials.iter().enumerate().any(|(i, &(id, _))| id as usize != i) {
            return Err(err(0, "special ids must be contiguous from 0"));
        }
        let roles: Vec<SpecialRole> = specials.into_iter().map(|(_, r)| r).collect();

        // Resolve merge pieces to ids incrementally.
        let base = roles.len() as u32;
        let mut lookup: HashMap<Vec<u8>, u32> = (0..BYTE_ALPHABET).map(|b| (vec![b as u8], base + b as u32)).collect();
        let mut merges = Vec::with_capacity(merge_pieces.len());
        for (i, (l, r)) in merge_pieces.into_iter().enumerate() {
            let li = *lookup.get(&l).ok_or_else(|| err(i + 2, "merge uses an unknown token"))?;
            let ri = *lookup.get(&r).ok_or_else(|| err(i + 2, "merge uses an unknown token"))?;
            let mut m = l;
            m.extend(r);
            lookup.insert(m, base + BYTE_ALPHABET as u32 + i as u32);
            merges.push((li, ri));
        }
        let vocab = Self::from_parts(roles, merges)?;
        if vocab.len() != size {
            return Err(err(1, &format!("header declares {size} entries, file defines {}", vocab.len())));
        }
        Ok(vocab)
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_text())
    }

    pub fn load(path: &Path) -> Result<Self, crate::Error> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
        Ok(Self::from_text(&text)?)
    }
}

/// Printable stand-in for every byte so merge lines contain no whitespace.
fn byte_to_char_table() -> [char; 256] {
    let mut table = ['\0'; 256];
    let mut extra = 0u32;
    for b in 0..256u32 {
        let printable = (b'!' as u32..=b'~' as u32).contains(&b) || (0xA1..=0xAC).contains(&b) || (0xAE..=0xFF).contains(&b);
        table[b as usize] = if printable {
            char::from_u32(b).unwrap()
        } else {
            extra += 1;
            char::from_u32(255 + extra).unwrap()
        };
    }
    table
}
