//! Rule-based detokenizer following the Moses `detokenizer.perl` rule order.
//!
//! Tokens are emitted verbatim; only the whitespace between them is decided
//! here. Rules, in priority order:
//!
//! 1. currency symbols and opening brackets attach to the following token;
//! 2. closing punctuation (`,.;:!?%)]}`) attaches to the preceding token;
//! 3. English clitics starting with an apostrophe (`'s`, `'re`) attach left
//!    when the previous token ends in an alphanumeric character;
//! 4. Italian elisions ending in an apostrophe (`l'`, `dell'`) attach right
//!    when the next token starts with a letter;
//! 5. straight and typographic double quotes alternate between opening
//!    (attach right) and closing (attach left), counted per quote kind;
//! 6. everything else is separated by a single space.

use std::collections::HashMap;

use crate::language::Language;

const CURRENCY: &[char] = &['$', '€', '£', '¥', '¢', '₹', '₽', '₩', '₺', '₴', '₪', '฿', '¤'];
const OPENING: &[char] = &['(', '[', '{', '¿', '¡'];
const CLOSING: &[char] = &[',', '.', '?', '!', ':', ';', '\\', '%', '}', ']', ')'];
const QUOTES: &[char] = &['\'', '"', '„', '“', '”', '`'];

fn all_in(token: &str, set: &[char]) -> bool {
    !token.is_empty() && token.chars().all(|c| set.contains(&c))
}

fn is_opening(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| CURRENCY.contains(&c) || OPENING.contains(&c))
}

fn starts_with_apostrophe_letter(token: &str) -> bool {
    let mut chars = token.chars();
    matches!(chars.next(), Some('\'')) && chars.next().is_some_and(char::is_alphabetic)
}

fn ends_with_letter_apostrophe(token: &str) -> bool {
    let mut chars = token.chars().rev();
    matches!(chars.next(), Some('\'')) && chars.next().is_some_and(char::is_alphabetic)
}

/// Joins corpus tokens back into surface text.
pub fn detokenize<S: AsRef<str>>(tokens: &[S], language: Language) -> String {
    let mut text = String::new();
    let mut prepend = "";
    let mut quote_count: HashMap<String, usize> = HashMap::new();

    for (i, token) in tokens.iter().enumerate() {
        let token = token.as_ref();
        let prev = if i > 0 { Some(tokens[i - 1].as_ref()) } else { None };
        let next = tokens.get(i + 1).map(AsRef::as_ref);

        if is_opening(token) {
            text.push_str(prepend);
            text.push_str(token);
            prepend = "";
        } else if all_in(token, CLOSING)
            || (language == Language::En
                && starts_with_apostrophe_letter(token)
                && prev.is_some_and(|p| p.chars().last().is_some_and(char::is_alphanumeric)))
        {
            text.push_str(token);
            prepend = " ";
        } else if language == Language::It
            && ends_with_letter_apostrophe(token)
            && next.is_some_and(|n| n.chars().next().is_some_and(char::is_alphabetic))
        {
            text.push_str(prepend);
            text.push_str(token);
            prepend = "";
        } else if all_in(token, QUOTES) {
            let normalized = if all_in(token, &['„', '“', '”']) {
                "\"".to_string()
            } else {
                token.to_string()
            };
            let count = quote_count.entry(normalized).or_insert(0);
            if count.is_multiple_of(2) {
                if language == Language::En
                    && token == "'"
                    && prev.is_some_and(|p| p.ends_with('s'))
                {
                    // possessive: "the Jones' house"
                    text.push_str(token);
                    prepend = " ";
                } else {
                    text.push_str(prepend);
                    text.push_str(token);
                    prepend = "";
                    *count += 1;
                }
            } else {
                text.push_str(token);
                prepend = " ";
                *count += 1;
            }
        } else {
            text.push_str(prepend);
            text.push_str(token);
            prepend = " ";
        }
    }

    text.trim().to_string()
}
