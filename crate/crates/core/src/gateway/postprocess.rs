/// Special tokens that chat templates leak into completions.
const WRAPPERS: &[&str] = &[
    "<|im_start|>assistant",
    "<|im_end|>",
    "<|im_start|>",
    "<|start_header_id|>assistant<|end_header_id|>",
    "<|eot_id|>",
    "<|end_of_text|>",
    "<|endoftext|>",
    "<start_of_turn>model",
    "<end_of_turn>",
    "<|assistant|>",
    "<|end|>",
    "[/INST]",
    "</s>",
    "<s>",
];

const QUOTE_PAIRS: &[(char, char)] = &[
    ('"', '"'),
    ('\'', '\''),
    ('“', '”'),
    ('„', '“'),
    ('«', '»'),
    ('‘', '’'),
    ('`', '`'),
];

fn strip_wrappers(s: &str) -> &str {
    let mut s = s;
    for w in WRAPPERS {
        if let Some(rest) = s.strip_prefix(w) {
            s = rest;
        }
        if let Some(rest) = s.strip_suffix(w) {
            s = rest;
        }
    }
    s
}

fn strip_quotes(s: &str) -> &str {
    for &(open, close) in QUOTE_PAIRS {
        let Some(inner) = s.strip_prefix(open).and_then(|r| r.strip_suffix(close)) else {
            continue;
        };
        if !inner.contains(open) && !inner.contains(close) {
            return inner;
        }
    }
    s
}

/// Cleans a raw completion: template wrappers, outer whitespace and one
/// enclosing quote pair are removed, repeatedly, until nothing changes.
/// Interior characters are never touched.
pub fn postprocess(raw: &str) -> String {
    let mut current = raw;
    loop {
        let next = strip_quotes(strip_wrappers(current.trim()).trim());
        if next == current {
            return next.to_string();
        }
        current = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(postprocess("  Fixed text. \n"), "Fixed text.");
        assert_eq!(postprocess("\"Fixed text.\""), "Fixed text.");
        assert_eq!(postprocess("Fixed \"quoted\" text."), "Fixed \"quoted\" text.");
        assert_eq!(postprocess("\"a\" and \"b\""), "\"a\" and \"b\"");
        assert_eq!(postprocess("Fixed.<|im_end|>"), "Fixed.");
        assert_eq!(postprocess("<s> „Korrigiert.“ </s>"), "Korrigiert.");
        assert_eq!(postprocess(""), "");
        assert_eq!(postprocess("\""), "\"");
    }

    proptest! {
        #[test]
        fn idempotent(s in "[ \"'a-c.<>|/s]{0,24}") {
            let once = postprocess(&s);
            prop_assert_eq!(postprocess(&once), once.clone());
        }

        #[test]
        fn output_is_a_substring(s in "\\PC{0,30}") {
            prop_assert!(s.contains(postprocess(&s).as_str()));
        }
    }
}
