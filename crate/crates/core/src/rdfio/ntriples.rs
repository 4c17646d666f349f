use crate::kg::{KnowledgeBase, Term};

/// Escapes `\`, `"`, and the line-breaking characters of a literal.
pub fn escape_literal(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// One `<s> <p> <o> .` (or `"literal"`) line per assertion, sorted by
/// subject, predicate, object; LF endings including the last line.
pub fn export_ntriples(kb: &KnowledgeBase) -> String {
    let mut out = String::new();
    // Assertions iterate in (subject, predicate, object) order already.
    for a in kb.assertions() {
        out.push('<');
        out.push_str(a.subject.as_str());
        out.push_str("> <");
        out.push_str(a.predicate.as_str());
        out.push_str("> ");
        match &a.object {
            Term::Iri(o) => {
                out.push('<');
                out.push_str(o.as_str());
                out.push('>');
            }
            Term::Literal(l) => {
                out.push('"');
                out.push_str(&escape_literal(l));
                out.push('"');
            }
        }
        out.push_str(" .\n");
    }
    out
}
