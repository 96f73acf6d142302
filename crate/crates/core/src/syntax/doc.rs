//! `@throws` / `@exception` tag extraction from Javadoc comments.

use super::ast::ThrowsTag;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DocThrows {
    pub tags: Vec<ThrowsTag>,
    /// Tags dropped because no exception type followed them.
    pub malformed: usize,
}

/// Strips the comment delimiters and the leading `*` gutter of each line.
fn strip_delimiters(raw: &str) -> String {
    let inner = raw.trim();
    let inner = inner
        .strip_prefix("/**")
        .or_else(|| inner.strip_prefix("/*"))
        .unwrap_or(inner);
    let inner = inner.strip_suffix("*/").unwrap_or(inner);
    inner
        .lines()
        .map(|l| {
            let l = l.trim_start();
            l.strip_prefix('*').unwrap_or(l)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn is_type_name(tok: &str) -> bool {
    !tok.is_empty()
        && tok.split('.').all(|seg| {
            let mut chars = seg.chars();
            chars
                .next()
                .is_some_and(|c| c.is_alphabetic() || c == '_' || c == '$')
                && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '$')
        })
}

/// A block tag starts a word with `@` and is not inside an inline `{@...}` tag.
fn block_tag(word: &str, brace_depth: usize) -> Option<&str> {
    if brace_depth > 0 {
        return None;
    }
    let name = word.strip_prefix('@')?;
    (!name.is_empty() && name.chars().all(|c| c.is_ascii_alphabetic())).then_some(name)
}

pub fn extract_doc_throws(raw: &str) -> DocThrows {
    let text = strip_delimiters(raw);
    let mut out = DocThrows::default();
    let words: Vec<&str> = text.split_whitespace().collect();

    let mut depth = 0usize;
    let mut i = 0;
    while i < words.len() {
        let w = words[i];
        let tag = block_tag(w, depth);
        depth = update_depth(depth, w);
        i += 1;
        if !matches!(tag, Some("throws") | Some("exception")) {
            continue;
        }
        let Some(ty) = words.get(i).copied().filter(|t| is_type_name(t)) else {
            out.malformed += 1;
            continue;
        };
        i += 1;
        let mut desc = Vec::new();
        while i < words.len() {
            if block_tag(words[i], depth).is_some() {
                break;
            }
            depth = update_depth(depth, words[i]);
            desc.push(words[i]);
            i += 1;
        }
        out.tags.push(ThrowsTag {
            exception: ty.to_string(),
            description: desc.join(" "),
        });
    }
    out
}

fn update_depth(depth: usize, word: &str) -> usize {
    let opens = word.matches('{').count();
    let closes = word.matches('}').count();
    (depth + opens).saturating_sub(closes)
}
