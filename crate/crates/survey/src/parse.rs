use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use amplifier_core::choice_data::Selection;

static OPTION_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\boption\s*(?:#|no\.?|number)?\s*(\d+)").unwrap());
static BARE_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^[\s\p{P}]*(\d+)[\s\p{P}]*$").unwrap());

/// Option picked in a reply, 1-based; the last option is the none option.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParsedChoice {
    Option(usize),
    Unparseable,
}

impl ParsedChoice {
    /// Map to a dataset selection given the number of product alternatives.
    pub fn selection(self, alts_per_task: usize) -> Option<Selection> {
        match self {
            ParsedChoice::Option(k) if k == alts_per_task + 1 => Some(Selection::NoneOption),
            ParsedChoice::Option(k) if (1..=alts_per_task).contains(&k) => Some(Selection::Alternative(k)),
            _ => None,
        }
    }
}

/// First "option k" with k in `1..=n_options`, or a lone number when the
/// reply has nothing else but punctuation.
pub fn parse_choice(raw: &str, n_options: usize) -> ParsedChoice {
    let in_range = |s: &str| s.parse::<usize>().ok().filter(|k| (1..=n_options).contains(k));
    if let Some(k) = OPTION_RE.captures_iter(raw).find_map(|c| in_range(&c[1])) {
        return ParsedChoice::Option(k);
    }
    BARE_RE
        .captures(raw)
        .and_then(|c| in_range(&c[1]))
        .map_or(ParsedChoice::Unparseable, ParsedChoice::Option)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rule_table() {
        assert_eq!(parse_choice("Option 2", 4), ParsedChoice::Option(2));
        assert_eq!(parse_choice("I would pick Option 4.", 4), ParsedChoice::Option(4));
        assert_eq!(parse_choice("OPTION 3", 4), ParsedChoice::Option(3));
        assert_eq!(parse_choice("option #1", 4), ParsedChoice::Option(1));
        assert_eq!(parse_choice("none of these appeal to me", 4), ParsedChoice::Unparseable);
        assert_eq!(parse_choice("Option 7", 4), ParsedChoice::Unparseable);
        assert_eq!(parse_choice("Option 9 is out, so Option 2", 4), ParsedChoice::Option(2));
        assert_eq!(parse_choice(" 3. ", 4), ParsedChoice::Option(3));
        assert_eq!(parse_choice("3 apples", 4), ParsedChoice::Unparseable);
        assert_eq!(parse_choice("", 4), ParsedChoice::Unparseable);
        assert_eq!(parse_choice("Options", 4), ParsedChoice::Unparseable);
    }

    #[test]
    fn selection_mapping() {
        assert_eq!(ParsedChoice::Option(4).selection(3), Some(Selection::NoneOption));
        assert_eq!(ParsedChoice::Option(2).selection(3), Some(Selection::Alternative(2)));
        assert_eq!(ParsedChoice::Unparseable.selection(3), None);
    }

    proptest! {
        #[test]
        fn option_replies_round_trip(n in 2usize..10, k in 1usize..10, prefix in "[a-z ]{0,12}") {
            prop_assume!(k <= n);
            let reply = format!("{prefix} Option {k}.");
            prop_assert_eq!(parse_choice(&reply, n), ParsedChoice::Option(k));
        }
    }
}
