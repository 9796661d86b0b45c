//! A second, independent implementation of the formatter.

use weft_core::annotations::AnnotationStore;
use weft_core::pretty::{decode_whitespace, WsItem};
use weft_core::runtime::ParseTree;

/// Independent reference for `format`: collects programs by scanning every
/// parse node rather than walking ancestors, then lays out lines in a second
/// pass instead of indenting while emitting.
pub fn reference_format(tree: &ParseTree, store: &AnnotationStore) -> String {
    enum Ev {
        Text(String),
        Inc,
        Dec,
    }
    let depth = |mut n: usize| {
        let mut d = 0;
        while let Some(p) = tree.nodes[n].parent {
            n = p;
            d += 1;
        }
        d
    };
    let prog = |gt, name: &str| -> Option<Vec<WsItem>> {
        store.value(gt, name).map(|v| decode_whitespace(v).unwrap())
    };
    let side = |k: usize, name: &str, default: &str, starts: bool| -> Vec<WsItem> {
        let mut hits: Vec<(usize, Vec<WsItem>)> = (0..tree.nodes.len())
            .filter(|&n| {
                let r = &tree.nodes[n].tokens;
                r.start <= k && k < r.end && if starts { r.start == k } else { r.end == k + 1 }
            })
            .filter_map(|n| prog(tree.nodes[n].gt, name).map(|p| (depth(n), p)))
            .collect();
        if hits.is_empty() {
            return prog(store.root(), default).unwrap_or_default();
        }
        hits.sort_by_key(|(d, _)| *d);
        if !starts {
            hits.reverse();
        }
        hits.into_iter().flat_map(|(_, p)| p).collect()
    };
    let mut events = Vec::new();
    let push = |events: &mut Vec<Ev>, p: Vec<WsItem>| {
        for i in p {
            events.push(match i {
                WsItem::Text(s) => Ev::Text(s),
                WsItem::IncIndent => Ev::Inc,
                WsItem::DecIndent => Ev::Dec,
            })
        }
    };
    for k in 0..tree.tokens.len() {
        if k > 0 {
            push(&mut events, side(k - 1, "after", "defaultAfter", false));
        }
        push(&mut events, side(k, "before", "defaultBefore", true));
        events.push(Ev::Text(tree.tokens[k].text.clone()));
    }
    if let Some(last) = tree.tokens.len().checked_sub(1) {
        push(&mut events, side(last, "after", "defaultAfter", false));
    }
    // lines of (indent level fixed at first visible char, raw text)
    let mut lines: Vec<(Option<usize>, String)> = vec![(Some(0), String::new())];
    let mut level = 0usize;
    for ev in events {
        match ev {
            Ev::Inc => level += 1,
            Ev::Dec => level = level.saturating_sub(1),
            Ev::Text(s) => {
                for c in s.chars() {
                    if c == '\n' {
                        lines.push((None, String::new()));
                        continue;
                    }
                    let line = lines.last_mut().unwrap();
                    if line.0.is_none() && !c.is_whitespace() {
                        line.0 = Some(level);
                        line.1.push('\u{0}');
                    }
                    line.1.push(c);
                }
            }
        }
    }
    let text: Vec<String> = lines
        .into_iter()
        .map(|(lvl, raw)| {
            raw.replace('\u{0}', &"    ".repeat(lvl.unwrap_or(0)))
                .trim_end_matches([' ', '\t'])
                .to_string()
        })
        .collect();
    let joined = text.join("\n");
    let body = joined.trim_end_matches(['\n', ' ', '\t']);
    if joined.len() > body.len() && joined[body.len()..].contains('\n') {
        format!("{body}\n")
    } else {
        body.to_string()
    }
}
