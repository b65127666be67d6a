/// Minimal markup remover: drops tags, `<script>`/`<style>` bodies and
/// comments, and decodes the handful of entities common in web text.
pub fn strip_tags(html: &str) -> String {
    let mut out = String::with_capacity(html.len());
    let lower = html.to_ascii_lowercase();
    let mut i = 0;
    let bytes = html.as_bytes();
    while i < bytes.len() {
        if bytes[i] == b'<' {
            if lower[i..].starts_with("<!--") {
                i = lower[i..].find("-->").map_or(bytes.len(), |e| i + e + 3);
                continue;
            }
            let skip_body = ["script", "style"]
                .into_iter()
                .find(|t| lower[i + 1..].starts_with(t));
            let close = match lower[i..].find('>') {
                Some(e) => i + e + 1,
                None => bytes.len(),
            };
            i = match skip_body {
                Some(tag) => {
                    let end_tag = format!("</{tag}");
                    match lower[close..].find(&end_tag) {
                        Some(e) => {
                            let from = close + e;
                            lower[from..].find('>').map_or(bytes.len(), |g| from + g + 1)
                        }
                        None => bytes.len(),
                    }
                }
                None => close,
            };
            out.push(' ');
            continue;
        }
        let next = html[i..].find('<').map_or(bytes.len(), |e| i + e);
        out.push_str(&decode_entities(&html[i..next]));
        i = next;
    }
    out
}

fn decode_entities(s: &str) -> String {
    if !s.contains('&') {
        return s.to_string();
    }
    s.replace("&nbsp;", " ")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&quot;", "\"")
        .replace("&#39;", "'")
        .replace("&apos;", "'")
        .replace("&amp;", "&")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strips_markup_and_scripts() {
        let html = "<html><head><style>p{}</style></head><body><p>Fish &amp; chips</p>\
                    <script>var x = '<b>';</script><!-- note -->done</body></html>";
        let text = strip_tags(html);
        let words: Vec<&str> = text.split_whitespace().collect();
        assert_eq!(words, ["Fish", "&", "chips", "done"]);
    }

    #[test]
    fn unterminated_tag_is_dropped() {
        assert_eq!(strip_tags("abc <b").trim(), "abc");
    }
}
