//! Word tokenizer shared by GLEU and the length-difference score.
//!
//! Treebank-style rules applied per whitespace chunk: brackets, quotes and
//! `;@#$%&?!*` are split off; `,` and `:` are split unless a digit follows;
//! ellipses and `--` become their own tokens; English clitics (`n't`, `'s`,
//! `'ll`, ...) are separated; a sentence-final period is split off. The same
//! rule set is used for every language.

const ALWAYS_SPLIT: &[char] = &[
    ';', '@', '#', '$', '%', '&', '?', '!', '*', '(', ')', '[', ']', '{', '}', '<', '>', '"', '“',
    '”', '„', '«', '»',
];

const CLOSERS: &[char] = &[')', ']', '}', '>', '"', '”', '»', '\''];

const CLITICS: &[&str] = &["'ll", "'re", "'ve", "'s", "'m", "'d"];

fn is_sentence_end(chunk: &str, next: Option<&str>) -> bool {
    let Some(next) = next else { return true };
    let core = chunk.trim_end_matches(|c: char| CLOSERS.contains(&c) || c == '.');
    // initials and dotted abbreviations (J., U.S.) do not end a sentence
    if core.chars().count() <= 1 || core.contains('.') {
        return false;
    }
    next.chars()
        .find(|c| c.is_alphanumeric())
        .is_some_and(|c| c.is_uppercase() || c.is_numeric())
}

fn flush(word: &mut String, out: &mut Vec<String>) {
    if !word.is_empty() {
        out.push(std::mem::take(word));
    }
}

/// Splits a word into stem and English clitic, if any.
fn split_clitic(word: &str) -> Option<(&str, &str)> {
    let lower = word.to_lowercase();
    if lower.len() == word.len() && lower.ends_with("n't") && word.len() > 3 {
        let at = word.len() - 3;
        return Some((&word[..at], &word[at..]));
    }
    for clitic in CLITICS {
        if lower.len() == word.len() && lower.ends_with(clitic) && word.len() > clitic.len() {
            let at = word.len() - clitic.len();
            if !word[..at].ends_with('\'') {
                return Some((&word[..at], &word[at..]));
            }
        }
    }
    None
}

fn tokenize_chunk(chunk: &str, sentence_end: bool, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut pieces: Vec<String> = Vec::new();
    let mut word = String::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        if ALWAYS_SPLIT.contains(&c) {
            flush(&mut word, &mut pieces);
            pieces.push(c.to_string());
        } else if c == ',' || c == ':' {
            if next.is_some_and(char::is_numeric) && !word.is_empty() {
                word.push(c);
            } else {
                flush(&mut word, &mut pieces);
                pieces.push(c.to_string());
            }
        } else if c == '.' && next == Some('.') {
            flush(&mut word, &mut pieces);
            let start = i;
            while i < chars.len() && chars[i] == '.' {
                i += 1;
            }
            pieces.push(chars[start..i].iter().collect());
            continue;
        } else if c == '-' && next == Some('-') {
            flush(&mut word, &mut pieces);
            pieces.push("--".into());
            i += 2;
            continue;
        } else {
            word.push(c);
        }
        i += 1;
    }
    flush(&mut word, &mut pieces);

    if sentence_end {
        if let Some(pos) = pieces
            .iter()
            .rposition(|p| !(p.chars().count() == 1 && CLOSERS.contains(&p.chars().next().unwrap())))
        {
            let piece = &pieces[pos];
            if piece.len() > 1 && piece.ends_with('.') && !piece.ends_with("..") {
                let stem = piece[..piece.len() - 1].to_string();
                pieces[pos] = stem;
                pieces.insert(pos + 1, ".".into());
            }
        }
    }

    for piece in pieces {
        let mut rest = piece.as_str();
        // leading apostrophe that is not a clitic
        if rest.len() > 1 && rest.starts_with('\'') && split_clitic(rest).is_none() {
            out.push("'".into());
            rest = &rest[1..];
        }
        // trailing bare apostrophe (the Jones')
        if rest.len() > 1 && rest.ends_with('\'') && !rest.ends_with("''") {
            let stem = &rest[..rest.len() - 1];
            push_word(stem, out);
            out.push("'".into());
            continue;
        }
        push_word(rest, out);
    }
}

fn push_word(word: &str, out: &mut Vec<String>) {
    if word.is_empty() {
        return;
    }
    match split_clitic(word) {
        Some((stem, clitic)) => {
            out.push(stem.to_string());
            out.push(clitic.to_string());
        }
        None => out.push(word.to_string()),
    }
}

/// Tokenizes `text` into words and punctuation.
pub fn word_tokenize(text: &str) -> Vec<String> {
    let chunks: Vec<&str> = text.split_whitespace().collect();
    let mut out = Vec::new();
    for (k, chunk) in chunks.iter().enumerate() {
        let end = is_sentence_end(chunk, chunks.get(k + 1).copied());
        tokenize_chunk(chunk, end, &mut out);
    }
    out
}
