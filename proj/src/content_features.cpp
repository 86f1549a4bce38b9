#include "soq/content_features.hpp"

#include <algorithm>
#include <cctype>

namespace soq {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

bool is_word_byte(char c) {
    auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u);
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool contains_word(std::string_view haystack, std::string_view word) {
    std::size_t pos = 0;
    while ((pos = haystack.find(word, pos)) != std::string_view::npos) {
        bool left_ok = pos == 0 || !is_word_byte(haystack[pos - 1]);
        std::size_t after = pos + word.size();
        bool right_ok = after >= haystack.size() || !is_word_byte(haystack[after]);
        if (left_ok && right_ok) return true;
        ++pos;
    }
    return false;
}

struct WordStats {
    int words = 0;
    std::size_t chars = 0;
};

WordStats word_stats(std::string_view text) {
    WordStats stats;
    for (auto w : tokenize_words(text)) {
        ++stats.words;
        stats.chars += utf8_length(w);
    }
    return stats;
}

// First code point of `text`, or -1 when empty or not valid UTF-8.
long first_code_point(std::string_view text) {
    if (text.empty()) return -1;
    auto b = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
    unsigned char lead = b(0);
    if (lead < 0x80) return lead;
    std::size_t len = (lead & 0xE0) == 0xC0 ? 2 : (lead & 0xF0) == 0xE0 ? 3 : (lead & 0xF8) == 0xF0 ? 4 : 0;
    if (len == 0 || text.size() < len) return -1;
    long cp = lead & (0x7F >> len);
    for (std::size_t i = 1; i < len; ++i) {
        if ((b(i) & 0xC0) != 0x80) return -1;
        cp = (cp << 6) | (b(i) & 0x3F);
    }
    return cp;
}

// Uppercase letters of ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic.
bool is_upper_letter(long cp) {
    if (cp < 0x80) return cp >= 'A' && cp <= 'Z';
    if (cp >= 0xC0 && cp <= 0xDE) return cp != 0xD7;
    if (cp >= 0x100 && cp <= 0x137) return cp % 2 == 0;
    if (cp >= 0x139 && cp <= 0x148) return cp % 2 == 1;
    if (cp >= 0x14A && cp <= 0x177) return cp % 2 == 0;
    if (cp == 0x178) return true;
    if (cp >= 0x179 && cp <= 0x17E) return cp % 2 == 1;
    if (cp >= 0x391 && cp <= 0x3A9) return cp != 0x3A2;
    return cp >= 0x400 && cp <= 0x42F;
}

double ratio(double num, int den) { return den == 0 ? 0.0 : num / den; }

} // namespace

std::array<double, 17> to_values(const ContentFeatures& f) {
    auto b = [](bool v) { return v ? 1.0 : 0.0; };
    return {f.title_avg_word_chars,
            b(f.title_has_wh_word),
            f.body_avg_word_chars,
            f.body_avg_sentence_words,
            static_cast<double>(f.body_word_count),
            static_cast<double>(f.link_count),
            static_cast<double>(f.code_snippet_count),
            static_cast<double>(f.title_word_count),
            b(f.title_starts_capital),
            static_cast<double>(f.paragraph_count),
            b(f.title_is_interrogative),
            b(f.title_has_error_keyword),
            b(f.has_quote),
            static_cast<double>(f.lines_of_code),
            static_cast<double>(f.body_sentence_count),
            static_cast<double>(f.code_chars),
            b(f.has_list)};
}

std::size_t utf8_length(std::string_view text) {
    return static_cast<std::size_t>(
        std::count_if(text.begin(), text.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::vector<std::string_view> tokenize_words(std::string_view text) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        std::size_t start = i;
        bool has_alnum = false;
        while (i < text.size() && !is_space(text[i])) {
            has_alnum = has_alnum || is_word_byte(text[i]);
            ++i;
        }
        if (i > start && has_alnum) words.push_back(text.substr(start, i - start));
    }
    return words;
}

int count_sentences(std::string_view text) {
    int sentences = 0;
    std::size_t start = 0;
    auto close_segment = [&](std::size_t end) {
        if (!tokenize_words(text.substr(start, end - start)).empty()) ++sentences;
        start = end;
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if ((c == '.' || c == '?' || c == '!') && (i + 1 == text.size() || is_space(text[i + 1]))) {
            close_segment(i + 1);
        }
    }
    if (start < text.size()) close_segment(text.size());
    return sentences;
}

ContentFeatures extract_content_features(std::string_view title, std::string_view body_html) {
    return extract_content_features(title, parse_body(body_html));
}

ContentFeatures extract_content_features(std::string_view title, const BodyParts& body) {
    static constexpr std::array<std::string_view, 9> kWhWords{"what",  "when", "where", "which", "who",
                                                              "whom", "whose", "why", "how"};
    ContentFeatures f;

    auto title_stats = word_stats(title);
    f.title_word_count = title_stats.words;
    f.title_avg_word_chars = ratio(static_cast<double>(title_stats.chars), title_stats.words);

    std::string title_lower = lower_ascii(title);
    f.title_has_wh_word = std::any_of(kWhWords.begin(), kWhWords.end(),
                                      [&](std::string_view w) { return contains_word(title_lower, w); });
    auto last = title.find_last_not_of(" \t\r\n\f\v");
    f.title_is_interrogative = last != std::string_view::npos && title[last] == '?';
    f.title_has_error_keyword = title_lower.find("error") != std::string::npos ||
                                title_lower.find("not working") != std::string::npos;
    auto first = title.find_first_not_of(" \t\r\n\f\v");
    f.title_starts_capital = first != std::string_view::npos && is_upper_letter(first_code_point(title.substr(first)));

    auto body_stats = word_stats(body.plain_text);
    f.body_word_count = body_stats.words;
    f.body_avg_word_chars = ratio(static_cast<double>(body_stats.chars), body_stats.words);
    f.body_sentence_count = count_sentences(body.plain_text);
    f.body_avg_sentence_words = ratio(static_cast<double>(body_stats.words), f.body_sentence_count);

    f.link_count = body.links;
    f.paragraph_count = body.paragraphs;
    f.has_quote = body.has_blockquote;
    f.has_list = body.has_list_item;
    f.code_snippet_count = static_cast<int>(body.code_blocks.size());
    for (const auto& block : body.code_blocks) {
        f.code_chars += static_cast<int>(utf8_length(block));
        std::string_view rest = block;
        while (!rest.empty()) {
            auto nl = rest.find('\n');
            std::string_view line = rest.substr(0, nl);
            if (std::any_of(line.begin(), line.end(), [](char c) { return !is_space(c); })) ++f.lines_of_code;
            if (nl == std::string_view::npos) break;
            rest.remove_prefix(nl + 1);
        }
    }
    return f;
}

} // namespace soq
