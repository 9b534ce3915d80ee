use crate::benchkit::TestSample;

pub const PROMPT_TEMPLATE: &str = include_str!("prompt_template.txt");

/// `(A) label` lines joined by newlines.
pub fn option_block(sample: &TestSample) -> String {
    sample
        .options
        .iter()
        .map(|o| format!("({}) {}", o.letter, o.label))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn render_prompt(sample: &TestSample) -> String {
    PROMPT_TEMPLATE
        .replacen("<question>", &sample.question_text, 1)
        .replacen("<option>", &option_block(sample), 1)
}

fn valid_letter(c: char, m: usize) -> bool {
    c.is_ascii_uppercase() && ((c as u8 - b'A') as usize) < m
}

/// Reads a model reply as one of the first `m` letters.
///
/// A reply that is just a letter (any case, surrounding whitespace ignored)
/// is accepted. Otherwise the reply is split into word tokens (runs of
/// alphanumerics and `_`) and the single-character uppercase tokens naming a
/// valid letter are collected: exactly one distinct letter is the answer,
/// none or several is a parse failure.
pub fn parse_answer(raw: &str, m: usize) -> Option<char> {
    let trimmed = raw.trim();
    let mut chars = trimmed.chars();
    if let (Some(c), None) = (chars.next(), chars.next()) {
        let c = c.to_ascii_uppercase();
        return valid_letter(c, m).then_some(c);
    }
    let mut found = None;
    for token in trimmed.split(|c: char| !(c.is_alphanumeric() || c == '_')) {
        let mut chars = token.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            if valid_letter(c, m) {
                match found {
                    None => found = Some(c),
                    Some(prev) if prev != c => return None,
                    Some(_) => {}
                }
            }
        }
    }
    found
}
