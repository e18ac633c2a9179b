#![allow(dead_code)]

pub mod aer_golden {
    use std::path::{Path, PathBuf};

    use forge_core::aer::{AerLabeler, AerTagSet};
    use forge_core::Language;

    pub fn dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/aer")
    }

    /// `(source file, labels file)` for every golden case.
    pub fn cases() -> Vec<(PathBuf, PathBuf)> {
        let mut out: Vec<(PathBuf, PathBuf)> = std::fs::read_dir(dir())
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e != "labels"))
            .map(|p| {
                let labels = p.with_extension("labels");
                (p, labels)
            })
            .collect();
        out.sort();
        out
    }

    pub fn language(path: &Path) -> Language {
        match path.extension().and_then(|e| e.to_str()) {
            Some("cpp") => Language::Cpp,
            Some("cu") => Language::Cuda,
            Some("f90") => Language::Fortran,
            other => panic!("unexpected golden extension {other:?}"),
        }
    }

    /// Render word labels in the golden format: an optional tag-set header,
    /// then `word<TAB>category` per non-blank word.
    pub fn render(source: &str, language: Language, extended: bool) -> String {
        let tags = if extended { AerTagSet::cuda_extended() } else { AerTagSet::default() };
        let labeler = AerLabeler::new(language, tags.clone());
        let mut out = String::new();
        if extended {
            out.push_str("# tags: cuda_extended\n");
        }
        for w in labeler.word_labels(source).expect("golden sources parse") {
            let word = source[w.range].trim();
            if word.is_empty() {
                continue;
            }
            let name = tags.name_of(w.begin_id).expect("label is in the tag set");
            out.push_str(&format!("{word}\t{name}\n"));
        }
        out
    }

    /// Compare one case; returns a readable diff on mismatch.
    pub fn check(source: &Path, labels: &Path) -> Result<(), String> {
        let expected = std::fs::read_to_string(labels).map_err(|e| format!("{}: {e}", labels.display()))?;
        let extended = expected.starts_with("# tags: cuda_extended");
        let text = std::fs::read_to_string(source).unwrap();
        let got = render(&text, language(source), extended);
        if got == expected {
            return Ok(());
        }
        let mut diff = format!("{}:\n", source.display());
        for (i, (g, e)) in got.lines().zip(expected.lines()).enumerate() {
            if g != e {
                diff.push_str(&format!("  line {}: got `{g}`, expected `{e}`\n", i + 1));
            }
        }
        if got.lines().count() != expected.lines().count() {
            diff.push_str(&format!("  {} lines vs {} expected\n", got.lines().count(), expected.lines().count()));
        }
        Err(diff)
    }
}

/// Slow, direct implementations of the metric definitions used to cross-check the library.
pub mod metric_oracle {
    use rand::seq::IndexedRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use regex::Regex;
    use tree_sitter::Node;

    pub fn split_words(text: &str) -> Vec<String> {
        let ident = |c: char| c.is_ascii_alphanumeric() || c == '_';
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            if chars[i].is_whitespace() {
                i += 1;
            } else if ident(chars[i]) {
                let start = i;
                while i < chars.len() && ident(chars[i]) {
                    i += 1;
                }
                out.push(chars[start..i].iter().collect());
            } else {
                out.push(chars[i].to_string());
                i += 1;
            }
        }
        out
    }

    fn occurrences<T: PartialEq>(seq: &[T], gram: &[T]) -> usize {
        if gram.len() > seq.len() {
            return 0;
        }
        (0..=seq.len() - gram.len()).filter(|&i| &seq[i..i + gram.len()] == gram).count()
    }

    /// `(clipped matches, hypothesis total)` for order `n`, multiple references.
    fn clipped<T: PartialEq>(hyp: &[T], refs: &[&[T]], n: usize) -> (usize, usize) {
        if hyp.len() < n {
            return (0, 0);
        }
        let mut matches = 0;
        let total = hyp.len() - n + 1;
        for i in 0..total {
            let g = &hyp[i..i + n];
            // count each distinct gram once, at its first position
            if (0..i).any(|j| &hyp[j..j + n] == g) {
                continue;
            }
            let max_ref = refs.iter().map(|r| occurrences(r, g)).max().unwrap_or(0);
            matches += occurrences(hyp, g).min(max_ref);
        }
        (matches, total)
    }

    pub fn bleu(hyp: &str, refs: &[&str], max_n: usize) -> f64 {
        let h = split_words(hyp);
        let rs: Vec<Vec<String>> = refs.iter().map(|r| split_words(r)).collect();
        let rslices: Vec<&[String]> = rs.iter().map(|r| r.as_slice()).collect();
        let mut closest = rs[0].len();
        for r in &rs {
            let (d, best) = (r.len().abs_diff(h.len()), closest.abs_diff(h.len()));
            if d < best || (d == best && r.len() < closest) {
                closest = r.len();
            }
        }
        if h.is_empty() {
            return if closest == 0 { 100.0 } else { 0.0 };
        }
        let mut product = 1.0f64;
        for n in 1..=max_n {
            let (m, t) = clipped(&h, &rslices, n);
            let p = if n == 1 { m as f64 / t as f64 } else { (m as f64 + 1.0) / (t as f64 + 1.0) };
            if p == 0.0 {
                return 0.0;
            }
            product *= p;
        }
        let bp = if h.len() > closest { 1.0 } else { (1.0 - closest as f64 / h.len() as f64).exp() };
        (100.0 * bp * product.powf(1.0 / max_n as f64)).min(100.0)
    }

    pub fn chrf(hyp: &str, reference: &str, max_n: usize, beta: f64) -> f64 {
        let h: Vec<char> = hyp.chars().filter(|c| !c.is_whitespace()).collect();
        let r: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
        let mut scores = Vec::new();
        for n in 1..=max_n {
            let (m, th) = clipped(&h, &[&r], n);
            let tr = if r.len() >= n { r.len() - n + 1 } else { 0 };
            if th == 0 && tr == 0 {
                continue;
            }
            if m == 0 {
                scores.push(0.0);
                continue;
            }
            let p = m as f64 / th as f64;
            let rc = m as f64 / tr as f64;
            let b2 = beta * beta;
            scores.push((1.0 + b2) * p * rc / (b2 * p + rc));
        }
        if scores.is_empty() {
            100.0
        } else {
            100.0 * scores.iter().sum::<f64>() / scores.len() as f64
        }
    }

    fn is_subsequence(sub: &[&String], of: &[String]) -> bool {
        let mut it = of.iter();
        sub.iter().all(|s| it.any(|o| o == *s))
    }

    /// LCS by enumerating every subsequence of the hypothesis.
    pub fn lcs_brute(h: &[String], r: &[String]) -> usize {
        assert!(h.len() <= 16, "brute-force LCS limited to 16 tokens");
        let mut best = 0;
        for mask in 0u32..(1 << h.len()) {
            let k = mask.count_ones() as usize;
            if k <= best {
                continue;
            }
            let sub: Vec<&String> = (0..h.len()).filter(|i| mask & (1 << i) != 0).map(|i| &h[i]).collect();
            if is_subsequence(&sub, r) {
                best = k;
            }
        }
        best
    }

    pub fn rouge_l(hyp: &str, reference: &str) -> f64 {
        let (h, r) = (split_words(hyp), split_words(reference));
        if h.is_empty() && r.is_empty() {
            return 100.0;
        }
        let l = lcs_brute(&h, &r);
        if l == 0 {
            return 0.0;
        }
        let (p, rc) = (l as f64 / h.len() as f64, l as f64 / r.len() as f64);
        100.0 * 2.0 * p * rc / (p + rc)
    }

    /// Subtree signatures from tree-sitter's own s-expression printer, field labels removed.
    pub fn subtrees(root: Node<'_>) -> Vec<String> {
        let field = Regex::new(r"\b\w+: ").unwrap();
        let mut out = Vec::new();
        let mut cursor = root.walk();
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            if node.is_named() && node.child_count() > 0 {
                out.push(field.replace_all(&node.to_sexp(), "").into_owned());
            }
            for c in node.children(&mut cursor) {
                stack.push(c);
            }
        }
        out.sort();
        out
    }

    /// `100 * |hyp ∩ ref| / |ref|` over multisets, by repeated removal.
    pub fn multiset_match<T: PartialEq + Clone>(hyp: &[T], reference: &[T]) -> f64 {
        if reference.is_empty() {
            return if hyp.is_empty() { 100.0 } else { 0.0 };
        }
        let mut pool = hyp.to_vec();
        let mut matched = 0;
        for r in reference {
            if let Some(i) = pool.iter().position(|h| h == r) {
                pool.remove(i);
                matched += 1;
            }
        }
        100.0 * matched as f64 / reference.len() as f64
    }

    pub type OracleEdge = (String, &'static str, Vec<String>);

    /// Def-use edges of a straight-line function `int f(int p, ...) { stmt; ... }`
    /// read off with regular expressions.
    pub fn def_use(program: &str) -> Vec<OracleEdge> {
        let header = Regex::new(r"^int f\(([^)]*)\) \{(.*)\}$").unwrap();
        let ident = Regex::new(r"\b[a-z_]\w*\b").unwrap();
        let decl = Regex::new(r"^int (\w+) = (.+)$").unwrap();
        let assign = Regex::new(r"^(\w+) ([-+*]?)= (.+)$").unwrap();
        let incr = Regex::new(r"^(\w+)\+\+$").unwrap();
        let ret = Regex::new(r"^return (.+)$").unwrap();

        let caps = header.captures(program).expect("program shape");
        let params: Vec<String> =
            caps[1].split(',').map(|p| p.trim().trim_start_matches("int ").to_string()).filter(|p| !p.is_empty()).collect();
        let stmts: Vec<&str> = caps[2].split(';').map(str::trim).filter(|s| !s.is_empty()).collect();

        let mut order: Vec<String> = params.clone();
        let note = |v: &str, order: &mut Vec<String>| {
            if !order.iter().any(|o| o == v) {
                order.push(v.to_string());
            }
        };
        let vars_in = |e: &str| -> Vec<String> { ident.find_iter(e).map(|m| m.as_str().to_string()).collect() };

        // (defined var, uses in value, self use) and plain uses, in source order
        let mut defs: Vec<(String, Vec<String>, bool)> = Vec::new();
        let mut uses: Vec<String> = Vec::new();
        for s in &stmts {
            if let Some(c) = decl.captures(s) {
                note(&c[1], &mut order);
                let u = vars_in(&c[2]);
                u.iter().for_each(|v| note(v, &mut order));
                uses.extend(u.clone());
                defs.push((c[1].to_string(), u, false));
            } else if let Some(c) = assign.captures(s) {
                note(&c[1], &mut order);
                let u = vars_in(&c[3]);
                u.iter().for_each(|v| note(v, &mut order));
                uses.extend(u.clone());
                defs.push((c[1].to_string(), u, !c[2].is_empty()));
            } else if let Some(c) = incr.captures(s) {
                note(&c[1], &mut order);
                defs.push((c[1].to_string(), Vec::new(), true));
            } else if let Some(c) = ret.captures(s) {
                let u = vars_in(&c[1]);
                u.iter().for_each(|v| note(v, &mut order));
                uses.extend(u);
            } else {
                panic!("unexpected statement `{s}`");
            }
        }
        let name = |v: &str| format!("var_{}", order.iter().position(|o| o == v).unwrap());
        let mut edges = Vec::new();
        for (v, u, self_use) in defs {
            let mut parents: Vec<String> = u.iter().map(|x| name(x)).collect();
            if self_use {
                parents.push(name(&v));
            }
            parents.sort();
            parents.dedup();
            edges.push((name(&v), "computedFrom", parents));
        }
        for u in uses {
            edges.push((name(&u), "comesFrom", vec![name(&u)]));
        }
        edges.sort();
        edges
    }

    /// Random straight-line program; every use refers to an already defined variable.
    pub fn straight_line_program(seed: u64) -> String {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pool: Vec<&str> = vec!["a", "b", "c", "d", "n", "sum", "tmp", "x", "y", "acc"];
        let fresh = |rng: &mut ChaCha8Rng, pool: &mut Vec<&'static str>| {
            let i = rng.random_range(0..pool.len());
            pool.swap_remove(i)
        };
        let nparams = rng.random_range(1..=3);
        let mut defined: Vec<&str> = (0..nparams).map(|_| fresh(&mut rng, &mut pool)).collect();
        let params = defined.iter().map(|p| format!("int {p}")).collect::<Vec<_>>().join(", ");
        let mut body = Vec::new();
        let operand = |rng: &mut ChaCha8Rng, defined: &[&str]| -> String {
            if rng.random_bool(0.25) {
                rng.random_range(0..10).to_string()
            } else {
                defined.choose(rng).unwrap().to_string()
            }
        };
        let nstmts = rng.random_range(2..=5);
        for _ in 0..nstmts {
            let expr = {
                let k = rng.random_range(1..=2);
                let mut e = operand(&mut rng, &defined);
                for _ in 1..k {
                    let op = ["+", "-", "*"].choose(&mut rng).unwrap();
                    e = format!("{e} {op} {}", operand(&mut rng, &defined));
                }
                e
            };
            match rng.random_range(0..4) {
                0 if defined.len() < 6 => {
                    let v = fresh(&mut rng, &mut pool);
                    body.push(format!("int {v} = {expr};"));
                    defined.push(v);
                }
                1 => {
                    let v = *defined.choose(&mut rng).unwrap();
                    let op = ["+", "-", "*"].choose(&mut rng).unwrap();
                    body.push(format!("{v} {op}= {expr};"));
                }
                2 => body.push(format!("{}++;", defined.choose(&mut rng).unwrap())),
                _ => {
                    let v = *defined.choose(&mut rng).unwrap();
                    body.push(format!("{v} = {expr};"));
                }
            }
        }
        body.push(format!("return {};", defined.choose(&mut rng).unwrap()));
        format!("int f({params}) {{ {} }}", body.join(" "))
    }

    /// Crafted `(hypothesis, reference)` pairs: edge cases followed by seeded random token strings.
    pub fn crafted_pairs(random: usize) -> Vec<(String, String)> {
        let mut pairs: Vec<(String, String)> = [
            ("", ""),
            ("", "int x ;"),
            ("int x ;", ""),
            ("a b c d", "a b c e"),
            ("the the the the", "the cat"),
            ("x = x + x + x ;", "x = y + x ;"),
            ("for(int i=0;i<n;i++)", "for ( int i = 0 ; i < n ; i ++ )"),
            ("a[i] = b[i] * 2.0f;", "a[i] = 2.0f * b[i];"),
            ("foo", "bar"),
            ("a", "a b c d e f g h"),
            ("abc", "abd"),
            ("__global__ void k(float *x)", "__global__ void k(double *y)"),
            ("subroutine s(a)", "SUBROUTINE s(a)"),
            ("x x y y", "y y x x"),
        ]
        .iter()
        .map(|(h, r)| (h.to_string(), r.to_string()))
        .collect();
        let vocab = ["int", "x", "y", "i", "n", "=", "+", "*", ";", "(", ")", "[", "]", "0", "1", "for", "if", "<"];
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..random {
            let r: Vec<&str> = (0..rng.random_range(1..=14)).map(|_| *vocab.choose(&mut rng).unwrap()).collect();
            // the hypothesis is an edited copy so that pairs share material
            let mut h = r.clone();
            for _ in 0..rng.random_range(0..5) {
                match rng.random_range(0..3) {
                    0 if !h.is_empty() => {
                        let i = rng.random_range(0..h.len());
                        h.remove(i);
                    }
                    1 => {
                        let i = rng.random_range(0..=h.len());
                        h.insert(i, vocab.choose(&mut rng).unwrap());
                    }
                    _ if !h.is_empty() => {
                        let i = rng.random_range(0..h.len());
                        h[i] = vocab.choose(&mut rng).unwrap();
                    }
                    _ => {}
                }
            }
            h.truncate(16);
            let sep = if rng.random_bool(0.5) { " " } else { "" };
            pairs.push((h.join(sep), r.join(" ")));
        }
        pairs
    }

    pub const LEXICAL_TOLERANCE: f64 = 1e-6;

    /// Compare BLEU, ChrF and ROUGE-L with the oracles; returns the number of pairs checked.
    pub fn check_lexical(pairs: &[(String, String)]) -> Result<usize, String> {
        use forge_core::metrics;
        for (h, r) in pairs {
            let lib_words: Vec<String> = metrics::tokens(h).iter().map(|w| w.to_string()).collect();
            if lib_words != split_words(h) {
                return Err(format!("segmentation differs on `{h}`"));
            }
            let checks = [
                ("bleu", metrics::bleu(h, &[r.as_str()], 4).map_err(|e| e.to_string())?, bleu(h, &[r], 4)),
                ("bleu-2ref", metrics::bleu(h, &[r.as_str(), h.as_str()], 4).map_err(|e| e.to_string())?, bleu(h, &[r, h], 4)),
                ("chrf", metrics::chrf(h, r, 6, 2.0), chrf(h, r, 6, 2.0)),
                ("rouge_l", metrics::rouge_l(h, r), rouge_l(h, r)),
            ];
            for (name, got, want) in checks {
                if (got - want).abs() > LEXICAL_TOLERANCE {
                    return Err(format!("{name}(`{h}`, `{r}`) = {got}, oracle {want}"));
                }
            }
        }
        Ok(pairs.len())
    }

    pub fn programs(count: usize) -> Vec<String> {
        (0..count as u64).map(straight_line_program).collect()
    }

    /// Structural CodeBLEU components against the subtree and def-use oracles, exact equality.
    pub fn check_structural(programs: &[String]) -> Result<usize, String> {
        use forge_core::metrics::codebleu::{ast_match, dataflow_edges, dataflow_match, subtrees as lib_subtrees};
        use forge_core::{syntax, Language};
        let mut parsed = Vec::new();
        for p in programs {
            if split_words(p).len() > 50 {
                return Err(format!("program over 50 tokens: {p}"));
            }
            let tree = syntax::parse(p, Language::Cpp).map_err(|e| e.to_string())?;
            if tree.root_node().has_error() {
                return Err(format!("program does not parse cleanly: {p}"));
            }
            let mut subs = lib_subtrees(tree.root_node());
            subs.sort();
            let oracle_subs = subtrees(tree.root_node());
            if subs != oracle_subs {
                return Err(format!("subtrees differ on {p}:\n{subs:#?}\nvs\n{oracle_subs:#?}"));
            }
            let mut edges: Vec<OracleEdge> = dataflow_edges(tree.root_node(), p, Language::Cpp)
                .into_iter()
                .map(|e| (e.var, e.relation, e.parents))
                .collect();
            edges.sort();
            let oracle_edges = def_use(p);
            if edges != oracle_edges {
                return Err(format!("def-use edges differ on {p}:\n{edges:?}\nvs\n{oracle_edges:?}"));
            }
            let lib_edges = dataflow_edges(tree.root_node(), p, Language::Cpp);
            parsed.push((subs, lib_edges, oracle_edges));
        }
        for i in 0..parsed.len() {
            let j = (i * 7 + 3) % parsed.len();
            let (hs, he, ho) = &parsed[i];
            let (rs, re, ro) = &parsed[j];
            let (got, want) = (ast_match(hs, rs), multiset_match(hs, rs));
            if got != want {
                return Err(format!("ast match {i} vs {j}: {got} != {want}"));
            }
            let (got, want) = (dataflow_match(he, re), multiset_match(ho, ro));
            if got != want {
                return Err(format!("dataflow match {i} vs {j}: {got} != {want}"));
            }
        }
        Ok(programs.len())
    }

    /// Every metric scores a snippet against itself at exactly 100.
    pub fn check_self_scores(snippets: &[String]) -> Result<usize, String> {
        use forge_core::metrics::{self, CodeBleuWeights};
        use forge_core::Language;
        let kw = Language::Cpp.default_keywords();
        for s in snippets {
            let cb = metrics::codebleu(s, s, Language::Cpp, CodeBleuWeights::default(), &kw).map_err(|e| e.to_string())?;
            let scores = [
                ("bleu", metrics::bleu(s, &[s.as_str()], 4).map_err(|e| e.to_string())?),
                ("chrf", metrics::chrf(s, s, 6, 2.0)),
                ("rouge_l", metrics::rouge_l(s, s)),
                ("codebleu", cb.codebleu),
                ("ngram", cb.ngram),
                ("weighted_ngram", cb.weighted_ngram),
                ("ast_match", cb.ast_match.unwrap_or(100.0)),
                ("dataflow_match", cb.dataflow_match.unwrap_or(100.0)),
            ];
            for (name, v) in scores {
                if v != 100.0 {
                    return Err(format!("{name}(x, x) = {v} for `{s}`"));
                }
            }
        }
        Ok(snippets.len())
    }

    /// Half straight-line programs, half random token soup.
    pub fn random_snippets(count: usize) -> Vec<String> {
        let mut out = programs(count / 2);
        let soup = ["{", "}", "x", "=", "1", "+", "__global__", "float", "*", "(", ")", ";", "if", "return", "i++"];
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        while out.len() < count {
            let n = rng.random_range(1..30);
            out.push((0..n).map(|_| *soup.choose(&mut rng).unwrap()).collect::<Vec<_>>().join(" "));
        }
        out
    }
}
