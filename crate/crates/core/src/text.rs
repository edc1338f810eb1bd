//! Character classes and light-weight text processing shared by the stages.

use unicode_general_category::{get_general_category, GeneralCategory};
use unicode_normalization::UnicodeNormalization;

/// Characters that end a sentence for snippet segmentation.
pub const SENTENCE_DELIMITERS: &[char] = &['。', '！', '？', '!', '?', '；', ';', '\n'];

pub fn is_sentence_delimiter(c: char) -> bool {
    SENTENCE_DELIMITERS.contains(&c)
}

/// Punctuation in the broad sense: Unicode `P*` and `S*` categories plus the
/// CJK Symbols and Punctuation block.
pub fn is_punctuation(c: char) -> bool {
    use GeneralCategory::*;
    if ('\u{3000}'..='\u{303F}').contains(&c) && !c.is_whitespace() {
        return true;
    }
    matches!(
        get_general_category(c),
        ConnectorPunctuation
            | DashPunctuation
            | OpenPunctuation
            | ClosePunctuation
            | InitialPunctuation
            | FinalPunctuation
            | OtherPunctuation
            | MathSymbol
            | CurrencySymbol
            | ModifierSymbol
            | OtherSymbol
    )
}

/// A character that can never be part of a mined term.
pub fn is_term_boundary(c: char) -> bool {
    c.is_whitespace() || is_punctuation(c) || is_sentence_delimiter(c)
}

/// Han, kana and hangul characters.
pub fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3040..=0x30FF
        | 0x3400..=0x4DBF
        | 0x4E00..=0x9FFF
        | 0xAC00..=0xD7AF
        | 0xF900..=0xFAFF
        | 0x20000..=0x2FFFF)
}

/// Splits text into sentences at sentence-final punctuation and newlines.
/// Delimiters are dropped and empty sentences are skipped.
pub fn split_sentences(text: &str) -> Vec<String> {
    text.split(is_sentence_delimiter)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Trimmed, NFC-normalized form used whenever terms are compared.
pub fn normalize_term(term: &str) -> String {
    term.trim().nfc().collect()
}

/// Tokenizes free text for context vectors.
///
/// Runs of non-CJK letters and digits become one lowercased token. Runs of
/// CJK characters become overlapping character bigrams; a lone CJK character
/// is kept as a unigram.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut latin = String::new();
    let mut cjk: Vec<char> = Vec::new();

    fn flush_cjk(run: &mut Vec<char>, out: &mut Vec<String>) {
        match run.len() {
            0 => {}
            1 => out.push(run[0].to_string()),
            _ => out.extend(run.windows(2).map(|w| w.iter().collect())),
        }
        run.clear();
    }

    for c in text.chars() {
        if is_cjk(c) {
            if !latin.is_empty() {
                tokens.push(std::mem::take(&mut latin));
            }
            cjk.push(c);
        } else if c.is_alphanumeric() {
            flush_cjk(&mut cjk, &mut tokens);
            latin.extend(c.to_lowercase());
        } else {
            flush_cjk(&mut cjk, &mut tokens);
            if !latin.is_empty() {
                tokens.push(std::mem::take(&mut latin));
            }
        }
    }
    flush_cjk(&mut cjk, &mut tokens);
    if !latin.is_empty() {
        tokens.push(latin);
    }
    tokens
}
