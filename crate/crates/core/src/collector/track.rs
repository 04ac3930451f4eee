use crate::tweet::Tweet;

/// Lowercased tokens of `text`, split on every non-alphanumeric character.
pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

fn normalize(term: &str) -> String {
    term.trim().trim_start_matches('#').to_lowercase()
}

/// True if any term (leading `#` stripped, case-folded) equals one of the
/// tweet's hashtags or appears as a whole token of its text. A term made of
/// several words matches when every word is a token of the text.
pub fn matches_track(tweet: &Tweet, track_terms: &[String]) -> bool {
    let text_tokens: Vec<String> = tokens(&tweet.text).collect();
    track_terms.iter().any(|raw| {
        let term = normalize(raw);
        if term.is_empty() {
            return false;
        }
        if tweet.hashtags.iter().any(|h| h.to_lowercase() == term) {
            return true;
        }
        let mut words = tokens(&term).peekable();
        words.peek().is_some() && words.all(|w| text_tokens.contains(&w))
    })
}
