#include "soq/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <utility>

namespace soq {

namespace {

struct NamedEntity {
    std::string_view name;
    std::string_view utf8;
};

constexpr std::array<NamedEntity, 24> kNamedEntities{{
    {"amp", "&"},        {"lt", "<"},           {"gt", ">"},           {"quot", "\""},
    {"apos", "'"},       {"nbsp", "\xC2\xA0"},  {"copy", "\xC2\xA9"},  {"reg", "\xC2\xAE"},
    {"trade", "\xE2\x84\xA2"}, {"hellip", "\xE2\x80\xA6"}, {"mdash", "\xE2\x80\x94"},
    {"ndash", "\xE2\x80\x93"}, {"lsquo", "\xE2\x80\x98"}, {"rsquo", "\xE2\x80\x99"},
    {"ldquo", "\xE2\x80\x9C"}, {"rdquo", "\xE2\x80\x9D"}, {"bull", "\xE2\x80\xA2"},
    {"middot", "\xC2\xB7"}, {"times", "\xC3\x97"}, {"divide", "\xC3\xB7"},
    {"laquo", "\xC2\xAB"},  {"raquo", "\xC2\xBB"}, {"euro", "\xE2\x82\xAC"}, {"deg", "\xC2\xB0"},
}};

// HTML 4 Latin-1 entities, U+00A0 through U+00FF in order.
constexpr std::array<std::string_view, 96> kLatin1Entities{
    "nbsp", "iexcl", "cent", "pound", "curren", "yen", "brvbar", "sect", "uml", "copy", "ordf", "laquo",
    "not", "shy", "reg", "macr", "deg", "plusmn", "sup2", "sup3", "acute", "micro", "para", "middot",
    "cedil", "sup1", "ordm", "raquo", "frac14", "frac12", "frac34", "iquest", "Agrave", "Aacute", "Acirc",
    "Atilde", "Auml", "Aring", "AElig", "Ccedil", "Egrave", "Eacute", "Ecirc", "Euml", "Igrave", "Iacute",
    "Icirc", "Iuml", "ETH", "Ntilde", "Ograve", "Oacute", "Ocirc", "Otilde", "Ouml", "times", "Oslash",
    "Ugrave", "Uacute", "Ucirc", "Uuml", "Yacute", "THORN", "szlig", "agrave", "aacute", "acirc", "atilde",
    "auml", "aring", "aelig", "ccedil", "egrave", "eacute", "ecirc", "euml", "igrave", "iacute", "icirc",
    "iuml", "eth", "ntilde", "ograve", "oacute", "ocirc", "otilde", "ouml", "divide", "oslash", "ugrave",
    "uacute", "ucirc", "uuml", "yacute", "thorn", "yuml"};

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp == 0 || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

// Elements whose boundaries separate words in rendered text.
bool is_block(std::string_view name) {
    static constexpr std::array<std::string_view, 27> kBlocks{
        "p",  "div", "blockquote", "ul",    "ol",    "li",    "pre",   "h1",    "h2",
        "h3", "h4",  "h5",         "h6",    "br",    "hr",    "table", "tr",    "td",
        "th", "dl",  "dt",         "dd",    "thead", "tbody", "img",   "section", "article"};
    return std::find(kBlocks.begin(), kBlocks.end(), name) != kBlocks.end();
}

bool is_void(std::string_view name) {
    static constexpr std::array<std::string_view, 8> kVoid{"br", "hr", "img", "input", "meta", "link", "area", "wbr"};
    return std::find(kVoid.begin(), kVoid.end(), name) != kVoid.end();
}

struct Tag {
    std::string name;
    bool closing = false;
    bool self_closing = false;
};

// Parses a tag starting at text[pos] == '<'. On success sets `end` past '>'.
bool read_tag(std::string_view text, std::size_t pos, Tag& tag, std::size_t& end) {
    std::size_t i = pos + 1;
    if (i < text.size() && text[i] == '/') {
        tag.closing = true;
        ++i;
    }
    if (i >= text.size() || !std::isalpha(static_cast<unsigned char>(text[i]))) return false;
    std::size_t name_start = i;
    while (i < text.size() && (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '-' || text[i] == ':')) ++i;
    tag.name = lower(text.substr(name_start, i - name_start));
    char quote = 0;
    for (; i < text.size(); ++i) {
        char c = text[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '>') {
            tag.self_closing = i > pos + 1 && text[i - 1] == '/';
            end = i + 1;
            return true;
        }
    }
    // Unterminated tag at fragment end: swallow the rest.
    end = text.size();
    return true;
}

class BodyParser {
public:
    explicit BodyParser(std::string_view html) : html_(html) {}

    BodyParts run() {
        std::size_t pos = 0;
        while (pos < html_.size()) {
            auto lt = html_.find('<', pos);
            if (lt == std::string_view::npos) lt = html_.size();
            if (lt > pos) text(html_.substr(pos, lt - pos));
            if (lt >= html_.size()) break;
            pos = markup(lt);
        }
        // Auto-close anything left open.
        while (!stack_.empty()) pop();
        parts_.plain_text = collapse(raw_text_);
        return std::move(parts_);
    }

private:
    std::size_t markup(std::size_t lt) {
        if (html_.compare(lt, 4, "<!--") == 0) {
            auto close = html_.find("-->", lt + 4);
            return close == std::string_view::npos ? html_.size() : close + 3;
        }
        if (lt + 1 < html_.size() && (html_[lt + 1] == '!' || html_[lt + 1] == '?')) {
            auto close = html_.find('>', lt);
            return close == std::string_view::npos ? html_.size() : close + 1;
        }
        Tag tag;
        std::size_t end = 0;
        if (!read_tag(html_, lt, tag, end)) {
            text("<");
            return lt + 1;
        }
        if (tag.closing) {
            close(tag.name);
        } else {
            open(tag.name, tag.self_closing || is_void(tag.name));
        }
        return end;
    }

    void open(const std::string& name, bool empty) {
        if (is_block(name)) raw_text_ += ' ';
        if (name == "a") ++parts_.links;
        else if (name == "p") ++parts_.paragraphs;
        else if (name == "blockquote") parts_.has_blockquote = true;
        else if (name == "li") parts_.has_list_item = true;
        if (empty) return;
        bool block_code = name == "code" && !stack_.empty() && stack_.back().name == "pre";
        stack_.push_back({name, block_code});
        if (block_code) code_.clear();
    }

    void close(const std::string& name) {
        auto it = std::find_if(stack_.rbegin(), stack_.rend(), [&](const Open& o) { return o.name == name; });
        if (it == stack_.rend()) {
            if (is_block(name)) raw_text_ += ' ';
            return;
        }
        auto depth = static_cast<std::size_t>(std::distance(it, stack_.rend()));
        while (stack_.size() >= depth) pop();
    }

    void pop() {
        const Open top = stack_.back();
        stack_.pop_back();
        if (top.block_code) parts_.code_blocks.push_back(decode_html_entities(code_));
        if (is_block(top.name)) raw_text_ += ' ';
    }

    void text(std::string_view chunk) {
        for (const auto& o : stack_) {
            if (o.block_code) {
                code_ += chunk;
                return;
            }
        }
        for (const auto& o : stack_) {
            if (o.name == "pre" || o.name == "code") return;
        }
        raw_text_ += decode_html_entities(chunk);
    }

    static std::string collapse(std::string_view text) {
        std::string out;
        bool pending_space = false;
        for (std::size_t i = 0; i < text.size(); ++i) {
            char c = text[i];
            bool space = is_space(c);
            // U+00A0 (nbsp) renders as whitespace.
            if (!space && c == '\xC2' && i + 1 < text.size() && text[i + 1] == '\xA0') {
                space = true;
                ++i;
            }
            if (space) {
                pending_space = !out.empty();
                continue;
            }
            if (pending_space) out += ' ';
            pending_space = false;
            out += c;
        }
        return out;
    }

    struct Open {
        std::string name;
        bool block_code = false;
    };

    std::string_view html_;
    std::vector<Open> stack_;
    std::string raw_text_;
    std::string code_;
    BodyParts parts_;
};

} // namespace

std::string decode_html_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (c != '&') {
            out += c;
            ++i;
            continue;
        }
        auto semi = text.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out += c;
            ++i;
            continue;
        }
        std::string_view ref = text.substr(i + 1, semi - i - 1);
        bool decoded = false;
        if (!ref.empty() && ref[0] == '#') {
            std::uint32_t cp = 0;
            bool hex = ref.size() > 1 && (ref[1] == 'x' || ref[1] == 'X');
            std::string_view digits = ref.substr(hex ? 2 : 1);
            bool ok = !digits.empty();
            for (char d : digits) {
                int v = -1;
                if (d >= '0' && d <= '9') v = d - '0';
                else if (hex && d >= 'a' && d <= 'f') v = d - 'a' + 10;
                else if (hex && d >= 'A' && d <= 'F') v = d - 'A' + 10;
                if (v < 0 || cp > 0x10FFFF) {
                    ok = false;
                    break;
                }
                cp = cp * (hex ? 16 : 10) + static_cast<std::uint32_t>(v);
            }
            if (ok) {
                append_utf8(out, cp);
                decoded = true;
            }
        } else {
            for (const auto& e : kNamedEntities) {
                if (e.name == ref) {
                    out += e.utf8;
                    decoded = true;
                    break;
                }
            }
            for (std::size_t k = 0; !decoded && k < kLatin1Entities.size(); ++k) {
                if (kLatin1Entities[k] == ref) {
                    append_utf8(out, 0xA0 + static_cast<std::uint32_t>(k));
                    decoded = true;
                }
            }
        }
        if (decoded) {
            i = semi + 1;
        } else {
            out += c;
            ++i;
        }
    }
    return out;
}

BodyParts parse_body(std::string_view body_html) { return BodyParser(body_html).run(); }

} // namespace soq
