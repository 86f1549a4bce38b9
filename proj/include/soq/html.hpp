#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace soq {

/// What a question body contributes after markup is removed.
struct BodyParts {
    /// Text content with markup and all `<pre>`/`<code>` content removed,
    /// entities decoded, whitespace runs collapsed, trimmed.
    std::string plain_text;
    /// Text of every `<code>` that is a direct child of a `<pre>`.
    std::vector<std::string> code_blocks;
    int links = 0;
    int paragraphs = 0;
    bool has_blockquote = false;
    bool has_list_item = false;

    bool operator==(const BodyParts&) const = default;
};

/// Lenient HTML fragment parser; never throws on user content.
/// Unclosed elements are closed at the end of the fragment.
BodyParts parse_body(std::string_view body_html);

/// Decodes HTML character references (named subset and numeric) into UTF-8.
/// Unknown references are kept verbatim.
std::string decode_html_entities(std::string_view text);

} // namespace soq
