/// Lowercases `text`, splits on every non-alphanumeric character and drops
/// tokens shorter than two characters. No stemming, no stopwords.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().nth(1).is_some())
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(
            tokenize("Maximum-Likelihood estimation!"),
            vec!["maximum", "likelihood", "estimation"]
        );
        assert!(tokenize("a I x").is_empty());
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("p-value_2 ÉTÉ"), vec!["value", "été"]);
    }

    proptest! {
        #[test]
        fn idempotent_on_joined_output(text in "\\PC{0,60}") {
            let once = tokenize(&text);
            prop_assert_eq!(tokenize(&once.join(" ")), once);
        }
    }
}
