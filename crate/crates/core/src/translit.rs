//! Reversible Devanagari↔Latin transliteration, script segmentation of
//! code-mixed text, and rule-based phoneme counting.
//!
//! # Romanization scheme
//!
//! The built-in scheme is ITRANS-like and ASCII-safe. Each Devanagari unit
//! (consonant, vowel, sign) maps to a distinct Latin token, so the mapping is
//! injective by construction. Vowel tokens are positional: directly after a
//! consonant they denote the matra (with `a` standing for the inherent
//! schwa), elsewhere the independent vowel letter. Where naive concatenation
//! of tokens would re-tokenize differently under greedy longest-match, the
//! emitter inserts a `_` separator (e.g. `क्ह` → `k_h`, so it cannot be read
//! back as `ख`); `latin_to_deva` consumes `_` silently and `__` as a literal
//! underscore. This makes `latin_to_deva(deva_to_latin(x)) == x` exact for
//! every string in the scheme's domain.
//!
//! # Phoneme counting rules (published so counts are auditable)
//!
//! Devanagari words: each consonant counts 1; each vowel (matra, independent,
//! or inherent schwa) counts 1; virama suppresses the inherent vowel; nukta
//! counts 0; anusvara, candrabindu, and visarga count 1; a word-final
//! inherent schwa is deleted (`कमल` = k,a,m,a,l = 5; `नमस्ते` = 7). Latin
//! words: the digraphs th/sh/ch/ph count 1; a run of vowels (a,e,i,o,u)
//! counts 1; every other letter counts 1; a final `e` preceded by exactly one
//! consonant that follows a vowel is dropped ("make" = 3, "namaste" = 7).
//! Neutral characters and digits count 0.

use std::collections::HashMap;

use serde::Deserialize;
use thiserror::Error;

pub const VIRAMA: char = '\u{094D}';
pub const NUKTA: char = '\u{093C}';

#[derive(Debug, Error)]
pub enum TranslitError {
    /// A code point the scheme cannot express (absent from the mapping, a
    /// combining mark with no consonant to attach to, or a Latin letter in
    /// Devanagari input).
    #[error("unmappable character {ch:?} at char offset {offset}")]
    UnmappableCharacter { ch: char, offset: usize },
    /// No tokenization of the Latin input exists under the scheme.
    #[error("unparseable sequence at char offset {offset}")]
    UnparseableSequence { offset: usize },
    #[error("empty transcript")]
    EmptyTranscript,
    #[error("invalid scheme: {0}")]
    InvalidScheme(String),
}

/// Script class used by [`segment_scripts`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Script {
    Latin,
    Devanagari,
    Neutral,
}

/// A maximal single-script slice of the input; `start..end` are char offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptSpan {
    pub text: String,
    pub script: Script,
    pub start: usize,
    pub end: usize,
}

fn classify(c: char) -> Script {
    if ('\u{0900}'..='\u{097F}').contains(&c) {
        Script::Devanagari
    } else if c.is_ascii_alphabetic() {
        Script::Latin
    } else {
        Script::Neutral
    }
}

/// Partition text into script spans.
///
/// Neutral runs (digits, punctuation, whitespace) merge into the surrounding
/// script when both sides agree; between differing scripts and at the end of
/// the text they attach to the preceding span; a leading neutral run stands
/// alone. Adjacent spans always differ in script and the concatenation of all
/// spans reproduces the input exactly.
pub fn segment_scripts(text: &str) -> Vec<ScriptSpan> {
    let chars: Vec<char> = text.chars().collect();
    if chars.is_empty() {
        return Vec::new();
    }

    // Raw runs of identical classification.
    let mut runs: Vec<(Script, usize, usize)> = Vec::new();
    for (i, &c) in chars.iter().enumerate() {
        let s = classify(c);
        match runs.last_mut() {
            Some((script, _, end)) if *script == s => *end = i + 1,
            _ => runs.push((s, i, i + 1)),
        }
    }

    let mut spans: Vec<ScriptSpan> = Vec::new();
    let mut i = 0;
    while i < runs.len() {
        let (script, start, mut end) = runs[i];
        if script == Script::Neutral {
            match spans.last_mut() {
                Some(prev) => {
                    // Attach to the preceding span regardless of what follows;
                    // a following run of the same script then merges too.
                    prev.end = end;
                    prev.text.extend(&chars[start..end]);
                    i += 1;
                    continue;
                }
                None => {
                    // Leading neutral run stands alone.
                }
            }
        }
        // Merge a following same-script run reached across attached neutrals.
        match spans.last_mut() {
            Some(prev) if prev.script == script => {
                prev.end = end;
                prev.text.extend(&chars[start..end]);
            }
            _ => {
                spans.push(ScriptSpan {
                    text: chars[start..end].iter().collect(),
                    script,
                    start,
                    end,
                });
            }
        }
        let _ = &mut end;
        i += 1;
    }
    spans
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum TokenUnit {
    Consonant(char),
    Vowel { independent: char, matra: Option<char> },
    Sign(char),
    Nukta,
    /// Explicit virama, emitted only where a bare cluster would be
    /// misread: before an independent vowel (`क्अ` → `k.ha`).
    Virama,
}

#[derive(Debug, Clone, Deserialize)]
struct VowelEntry {
    independent: char,
    matra: Option<char>,
    latin: String,
}

/// A reversible romanization table.
///
/// Construct the built-in table with [`TranslitScheme::builtin`] or load an
/// alternative from JSON with [`TranslitScheme::from_json`].
#[derive(Debug, Clone)]
pub struct TranslitScheme {
    pub name: String,
    consonants: HashMap<char, String>,
    vowels: Vec<VowelEntry>,
    signs: HashMap<char, String>,
    nukta_latin: String,
    virama_latin: String,
    tokens: HashMap<String, TokenUnit>,
    max_token_len: usize,
}

#[derive(Debug, Deserialize)]
struct SchemeFile {
    name: String,
    consonants: HashMap<char, String>,
    vowels: Vec<VowelEntry>,
    signs: HashMap<char, String>,
    nukta: String,
    virama: String,
}

impl TranslitScheme {
    /// The built-in ITRANS-like scheme covering standard Hindi Devanagari.
    pub fn builtin() -> Self {
        let consonants: &[(char, &str)] = &[
            ('क', "k"),
            ('ख', "kh"),
            ('ग', "g"),
            ('घ', "gh"),
            ('ङ', "~N"),
            ('च', "ch"),
            ('छ', "Ch"),
            ('ज', "j"),
            ('झ', "jh"),
            ('ञ', "~n"),
            ('ट', "T"),
            ('ठ', "Th"),
            ('ड', "D"),
            ('ढ', "Dh"),
            ('ण', "N"),
            ('त', "t"),
            ('थ', "th"),
            ('द', "d"),
            ('ध', "dh"),
            ('न', "n"),
            ('प', "p"),
            ('फ', "ph"),
            ('ब', "b"),
            ('भ', "bh"),
            ('म', "m"),
            ('य', "y"),
            ('र', "r"),
            ('ल', "l"),
            ('ळ', "L"),
            ('व', "v"),
            ('श', "sh"),
            ('ष', "Sh"),
            ('स', "s"),
            ('ह', "h"),
            // Precomposed nukta consonants U+0958..U+095F.
            ('\u{0958}', "q"),  // क़
            ('\u{0959}', "Q"),  // ख़
            ('\u{095A}', "G"),  // ग़
            ('\u{095B}', "z"),  // ज़
            ('\u{095C}', "R"),  // ड़
            ('\u{095D}', "Rh"), // ढ़
            ('\u{095E}', "f"),  // फ़
            ('\u{095F}', "Y"),  // य़
        ];
        let vowels: &[(char, Option<char>, &str)] = &[
            ('अ', None, "a"),
            ('आ', Some('ा'), "A"),
            ('इ', Some('ि'), "i"),
            ('ई', Some('ी'), "I"),
            ('उ', Some('ु'), "u"),
            ('ऊ', Some('ू'), "U"),
            ('ऋ', Some('ृ'), "Ri"),
            ('ॠ', Some('ॄ'), "RI"),
            ('ऌ', Some('ॢ'), "Lri"),
            ('ॡ', Some('ॣ'), "LrI"),
            ('ए', Some('े'), "e"),
            ('ऐ', Some('ै'), "ai"),
            ('ओ', Some('ो'), "o"),
            ('औ', Some('ौ'), "au"),
            ('ऍ', Some('ॅ'), "E"),
            ('ऑ', Some('ॉ'), "O"),
        ];
        let signs: &[(char, &str)] = &[
            ('ं', "M"),
            ('ः', "H"),
            ('ँ', ".N"),
            ('ऽ', ".a"),
            ('ॐ', "OM"),
            ('।', ".d"),
            ('॥', ".dd"),
            ('०', ".0"),
            ('१', ".1"),
            ('२', ".2"),
            ('३', ".3"),
            ('४', ".4"),
            ('५', ".5"),
            ('६', ".6"),
            ('७', ".7"),
            ('८', ".8"),
            ('९', ".9"),
        ];
        let scheme = TranslitScheme::build(
            "builtin.v1".to_string(),
            consonants
                .iter()
                .map(|&(c, l)| (c, l.to_string()))
                .collect(),
            vowels
                .iter()
                .map(|&(independent, matra, latin)| VowelEntry {
                    independent,
                    matra,
                    latin: latin.to_string(),
                })
                .collect(),
            signs.iter().map(|&(c, l)| (c, l.to_string())).collect(),
            ".q".to_string(),
            ".h".to_string(),
        );
        scheme.expect("built-in scheme must validate")
    }

    /// Load a scheme from its JSON description.
    pub fn from_json(json: &str) -> Result<Self, TranslitError> {
        let file: SchemeFile = serde_json::from_str(json)
            .map_err(|e| TranslitError::InvalidScheme(e.to_string()))?;
        TranslitScheme::build(
            file.name,
            file.consonants,
            file.vowels,
            file.signs,
            file.nukta,
            file.virama,
        )
    }

    fn build(
        name: String,
        consonants: HashMap<char, String>,
        vowels: Vec<VowelEntry>,
        signs: HashMap<char, String>,
        nukta_latin: String,
        virama_latin: String,
    ) -> Result<Self, TranslitError> {
        let mut tokens: HashMap<String, TokenUnit> = HashMap::new();
        let mut add = |latin: &str, unit: TokenUnit| -> Result<(), TranslitError> {
            if latin.is_empty() {
                return Err(TranslitError::InvalidScheme("empty latin token".into()));
            }
            if !latin.is_ascii() || latin.contains('_') || latin.contains(char::is_whitespace) {
                return Err(TranslitError::InvalidScheme(format!(
                    "token {latin:?} must be ASCII without '_' or whitespace"
                )));
            }
            // A one-char token that is not a letter would collide with
            // neutral pass-through and break reversibility.
            if latin.len() == 1 && !latin.chars().next().unwrap().is_ascii_alphabetic() {
                return Err(TranslitError::InvalidScheme(format!(
                    "single-char token {latin:?} must be a letter"
                )));
            }
            if tokens.insert(latin.to_string(), unit).is_some() {
                return Err(TranslitError::InvalidScheme(format!(
                    "duplicate latin token {latin:?}"
                )));
            }
            Ok(())
        };
        for (&c, latin) in &consonants {
            add(latin, TokenUnit::Consonant(c))?;
        }
        for v in &vowels {
            add(
                &v.latin,
                TokenUnit::Vowel {
                    independent: v.independent,
                    matra: v.matra,
                },
            )?;
        }
        for (&c, latin) in &signs {
            add(latin, TokenUnit::Sign(c))?;
        }
        add(&nukta_latin, TokenUnit::Nukta)?;
        add(&virama_latin, TokenUnit::Virama)?;
        let max_token_len = tokens.keys().map(|t| t.len()).max().unwrap_or(1);
        Ok(TranslitScheme {
            name,
            consonants,
            vowels,
            signs,
            nukta_latin,
            virama_latin,
            tokens,
            max_token_len,
        })
    }

    fn consonant_token(&self, c: char) -> Option<&str> {
        self.consonants.get(&c).map(String::as_str)
    }

    fn independent_vowel_token(&self, c: char) -> Option<&str> {
        self.vowels
            .iter()
            .find(|v| v.independent == c)
            .map(|v| v.latin.as_str())
    }

    fn matra_token(&self, c: char) -> Option<&str> {
        self.vowels
            .iter()
            .find(|v| v.matra == Some(c))
            .map(|v| v.latin.as_str())
    }

    fn sign_token(&self, c: char) -> Option<&str> {
        self.signs.get(&c).map(String::as_str)
    }
}

/// One unit of emitted Latin text, used for separator bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
enum LatinUnit {
    Token(String),
    Neutral(char),
    EscapedUnderscore,
    Separator,
}

impl LatinUnit {
    fn text(&self) -> String {
        match self {
            LatinUnit::Token(t) => t.clone(),
            LatinUnit::Neutral(c) => c.to_string(),
            LatinUnit::EscapedUnderscore => "__".into(),
            LatinUnit::Separator => "_".into(),
        }
    }
}

/// What greedy tokenization reads at one position.
#[derive(Debug, PartialEq, Eq)]
enum Read {
    Token(usize),
    Neutral(char),
    EscapedUnderscore,
    Separator,
    LatinLetter,
}

fn greedy_read(chars: &[char], pos: usize, scheme: &TranslitScheme) -> Read {
    let c = chars[pos];
    if c == '_' {
        if chars.get(pos + 1) == Some(&'_') {
            return Read::EscapedUnderscore;
        }
        return Read::Separator;
    }
    let max = scheme.max_token_len.min(chars.len() - pos);
    for len in (1..=max).rev() {
        let slice = &chars[pos..pos + len];
        if slice.iter().all(char::is_ascii) {
            let s: String = slice.iter().collect();
            if scheme.tokens.contains_key(&s) {
                return Read::Token(len);
            }
        }
    }
    if c.is_ascii_alphabetic() {
        Read::LatinLetter
    } else {
        Read::Neutral(c)
    }
}

/// Emitter that inserts `_` wherever greedy tokenization would otherwise
/// merge adjacent units. Only a window of trailing units needs re-checking:
/// no token is longer than `max_token_len`, so earlier boundaries are stable.
struct LatinEmitter<'a> {
    scheme: &'a TranslitScheme,
    chars: Vec<char>,
    units: Vec<(usize, LatinUnit)>, // (char offset, unit)
}

impl<'a> LatinEmitter<'a> {
    fn new(scheme: &'a TranslitScheme) -> Self {
        LatinEmitter {
            scheme,
            chars: Vec::new(),
            units: Vec::new(),
        }
    }

    fn window_consistent(&self) -> bool {
        let w = self.scheme.max_token_len + 1;
        let from = self.units.len().saturating_sub(w);
        let mut pos = self.units[from].0;
        for (start, unit) in &self.units[from..] {
            if pos != *start {
                return false;
            }
            let read = greedy_read(&self.chars, pos, self.scheme);
            let ok = match (unit, &read) {
                (LatinUnit::Token(t), Read::Token(len)) => t.chars().count() == *len,
                (LatinUnit::Neutral(c), Read::Neutral(rc)) => c == rc,
                (LatinUnit::EscapedUnderscore, Read::EscapedUnderscore) => true,
                (LatinUnit::Separator, Read::Separator) => true,
                _ => false,
            };
            if !ok {
                return false;
            }
            pos += unit.text().chars().count();
        }
        true
    }

    fn push(&mut self, unit: LatinUnit) {
        let start = self.chars.len();
        self.chars.extend(unit.text().chars());
        self.units.push((start, unit));
        if !self.window_consistent() {
            let (_, unit) = self.units.pop().expect("just pushed");
            self.chars.truncate(start);
            self.push_raw(LatinUnit::Separator);
            self.push_raw(unit);
            debug_assert!(self.window_consistent(), "separator failed to isolate unit");
        }
    }

    fn push_raw(&mut self, unit: LatinUnit) {
        let start = self.chars.len();
        self.chars.extend(unit.text().chars());
        self.units.push((start, unit));
    }

    fn finish(self) -> String {
        self.chars.into_iter().collect()
    }
}

/// Transliterate Devanagari text (plus neutral characters) to Latin.
///
/// The inherent schwa is emitted except under virama; neutral characters pass
/// through; a literal `_` is escaped as `__`.
pub fn deva_to_latin(text: &str, scheme: &TranslitScheme) -> Result<String, TranslitError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = LatinEmitter::new(scheme);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let offset = i;
        if let Some(token) = scheme.consonant_token(c) {
            out.push(LatinUnit::Token(token.to_string()));
            i += 1;
            while i < chars.len() && chars[i] == NUKTA {
                out.push(LatinUnit::Token(scheme.nukta_latin.clone()));
                i += 1;
            }
            match chars.get(i) {
                Some(&VIRAMA) => {
                    i += 1; // schwa suppressed
                    // A following independent vowel would otherwise read as
                    // this consonant's matra; make the cluster end explicit.
                    if chars
                        .get(i)
                        .is_some_and(|&next| scheme.independent_vowel_token(next).is_some())
                    {
                        out.push(LatinUnit::Token(scheme.virama_latin.clone()));
                    }
                }
                Some(&next) if scheme.matra_token(next).is_some() => {
                    let token = scheme.matra_token(next).unwrap().to_string();
                    out.push(LatinUnit::Token(token));
                    i += 1;
                }
                _ => {
                    out.push(LatinUnit::Token("a".to_string()));
                }
            }
        } else if let Some(token) = scheme.independent_vowel_token(c) {
            out.push(LatinUnit::Token(token.to_string()));
            i += 1;
        } else if let Some(token) = scheme.sign_token(c) {
            out.push(LatinUnit::Token(token.to_string()));
            i += 1;
        } else if classify(c) == Script::Devanagari {
            // Covers stray matras, virama, and nukta with no consonant, and
            // any Devanagari code point absent from the scheme.
            return Err(TranslitError::UnmappableCharacter { ch: c, offset });
        } else if c.is_ascii_alphabetic() {
            return Err(TranslitError::UnmappableCharacter { ch: c, offset });
        } else if c == '_' {
            out.push(LatinUnit::EscapedUnderscore);
            i += 1;
        } else {
            out.push(LatinUnit::Neutral(c));
            i += 1;
        }
    }
    Ok(out.finish())
}

/// Inverse of [`deva_to_latin`]: greedy longest-match tokenization, with
/// consonant clusters joined by virama and neutral pass-through.
pub fn latin_to_deva(text: &str, scheme: &TranslitScheme) -> Result<String, TranslitError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::new();
    let mut pending: Option<String> = None;

    fn flush(out: &mut String, pending: &mut Option<String>) {
        if let Some(p) = pending.take() {
            out.push_str(&p);
            out.push(VIRAMA);
        }
    }

    let mut i = 0;
    while i < chars.len() {
        match greedy_read(&chars, i, scheme) {
            Read::EscapedUnderscore => {
                flush(&mut out, &mut pending);
                out.push('_');
                i += 2;
            }
            Read::Separator => {
                // Tokenization separator only; transparent to cluster state.
                i += 1;
            }
            Read::Token(len) => {
                let tok: String = chars[i..i + len].iter().collect();
                match scheme.tokens.get(&tok).expect("matched token") {
                    TokenUnit::Consonant(c) => {
                        flush(&mut out, &mut pending);
                        pending = Some(c.to_string());
                    }
                    TokenUnit::Vowel { independent, matra } => {
                        if let Some(p) = pending.take() {
                            out.push_str(&p);
                            if let Some(m) = matra {
                                out.push(*m);
                            }
                            // `a` (matra == None) resolves as the inherent vowel.
                        } else {
                            out.push(*independent);
                        }
                    }
                    TokenUnit::Sign(c) => {
                        flush(&mut out, &mut pending);
                        out.push(*c);
                    }
                    TokenUnit::Nukta => match pending.as_mut() {
                        Some(p) => p.push(NUKTA),
                        None => {
                            return Err(TranslitError::UnparseableSequence { offset: i });
                        }
                    },
                    TokenUnit::Virama => {
                        if pending.is_none() {
                            return Err(TranslitError::UnparseableSequence { offset: i });
                        }
                        flush(&mut out, &mut pending);
                    }
                }
                i += len;
            }
            Read::LatinLetter => {
                return Err(TranslitError::UnparseableSequence { offset: i });
            }
            Read::Neutral(c) => {
                flush(&mut out, &mut pending);
                out.push(c);
                i += 1;
            }
        }
    }
    flush(&mut out, &mut pending);
    Ok(out)
}

/// Language tag used for phoneme counting and manifest validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhonemeLanguage {
    Hindi,
    English,
    Mixed,
}

fn is_devanagari_consonant(c: char, scheme: &TranslitScheme) -> bool {
    scheme.consonant_token(c).is_some()
}

fn hindi_word_phones(word: &[char], scheme: &TranslitScheme) -> usize {
    let mut count = 0usize;
    let mut trailing_inherent = false;
    let mut i = 0;
    while i < word.len() {
        let c = word[i];
        if is_devanagari_consonant(c, scheme) {
            count += 1;
            let mut j = i + 1;
            while j < word.len() && word[j] == NUKTA {
                j += 1;
            }
            let next = word.get(j).copied();
            let has_virama = next == Some(VIRAMA);
            let has_matra = next.is_some_and(|n| scheme.matra_token(n).is_some());
            if !has_virama && !has_matra {
                count += 1; // inherent schwa
                trailing_inherent = true;
            } else {
                trailing_inherent = false;
            }
            i += 1;
        } else if c == NUKTA || c == VIRAMA {
            i += 1;
        } else if scheme.independent_vowel_token(c).is_some()
            || scheme.matra_token(c).is_some()
            || matches!(c, 'ं' | 'ँ' | 'ः')
        {
            // Vowels count one phone each; so do the nasal/aspirate signs.
            count += 1;
            trailing_inherent = false;
            i += 1;
        } else if c == 'ॐ' {
            count += 2;
            trailing_inherent = false;
            i += 1;
        } else {
            // Danda, avagraha, digits: no phones.
            trailing_inherent = false;
            i += 1;
        }
    }
    if trailing_inherent {
        count -= 1;
    }
    count
}

fn is_latin_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

fn english_word_phones(word: &[char]) -> usize {
    #[derive(PartialEq)]
    enum Tok {
        Cons,
        VowelRun(String),
    }
    let lower: Vec<char> = word.iter().map(|c| c.to_ascii_lowercase()).collect();
    let mut toks: Vec<Tok> = Vec::new();
    let mut i = 0;
    while i < lower.len() {
        let c = lower[i];
        let digraph = lower
            .get(i + 1)
            .map(|&n| matches!((c, n), ('t', 'h') | ('s', 'h') | ('c', 'h') | ('p', 'h')))
            .unwrap_or(false);
        if digraph {
            toks.push(Tok::Cons);
            i += 2;
        } else if is_latin_vowel(c) {
            let mut run = String::new();
            while i < lower.len() && is_latin_vowel(lower[i]) {
                run.push(lower[i]);
                i += 1;
            }
            toks.push(Tok::VowelRun(run));
        } else {
            toks.push(Tok::Cons);
            i += 1;
        }
    }
    // Silent final e: vowel, single consonant, then a lone final "e".
    if toks.len() >= 3 {
        let n = toks.len();
        let final_e = matches!(&toks[n - 1], Tok::VowelRun(r) if r == "e");
        let single_cons = toks[n - 2] == Tok::Cons;
        let vowel_before = matches!(&toks[n - 3], Tok::VowelRun(_));
        if final_e && single_cons && vowel_before {
            toks.pop();
        }
    }
    toks.len()
}

fn span_phones(span: &ScriptSpan, scheme: &TranslitScheme) -> usize {
    match span.script {
        Script::Neutral => 0,
        Script::Devanagari => {
            let chars: Vec<char> = span.text.chars().collect();
            let mut total = 0;
            let mut word: Vec<char> = Vec::new();
            for &c in chars.iter().chain(std::iter::once(&' ')) {
                if classify(c) == Script::Devanagari {
                    word.push(c);
                } else if !word.is_empty() {
                    total += hindi_word_phones(&word, scheme);
                    word.clear();
                }
            }
            total
        }
        Script::Latin => {
            let chars: Vec<char> = span.text.chars().collect();
            let mut total = 0;
            let mut word: Vec<char> = Vec::new();
            for &c in chars.iter().chain(std::iter::once(&' ')) {
                if c.is_ascii_alphabetic() {
                    word.push(c);
                } else if !word.is_empty() {
                    total += english_word_phones(&word);
                    word.clear();
                }
            }
            total
        }
    }
}

/// Count phones with the published rule tables.
///
/// The rule set is selected per script span, so code-mixed text counts
/// correctly under any declared language;
/// `count_phonemes(mixed) == Σ count_phonemes per span` by construction.
pub fn count_phonemes(
    text: &str,
    _language: PhonemeLanguage,
    scheme: &TranslitScheme,
) -> Result<usize, TranslitError> {
    if text.trim().is_empty() {
        return Err(TranslitError::EmptyTranscript);
    }
    Ok(segment_scripts(text)
        .iter()
        .map(|span| span_phones(span, scheme))
        .sum())
}
