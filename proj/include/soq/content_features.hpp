#pragma once

#include "soq/html.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace soq {

/// The 17 presentation-quality features of a question's title and body.
struct ContentFeatures {
    double title_avg_word_chars = 0;
    bool title_has_wh_word = false;
    double body_avg_word_chars = 0;
    double body_avg_sentence_words = 0;
    int body_word_count = 0;
    int link_count = 0;
    int code_snippet_count = 0;
    int title_word_count = 0;
    bool title_starts_capital = false;
    int paragraph_count = 0;
    bool title_is_interrogative = false;
    bool title_has_error_keyword = false;
    bool has_quote = false;
    int lines_of_code = 0;
    int body_sentence_count = 0;
    int code_chars = 0;
    bool has_list = false;

    bool operator==(const ContentFeatures&) const = default;
};

inline constexpr std::array<std::string_view, 17> kContentFeatureNames{
    "title_avg_word_chars",   "title_has_wh_word",    "body_avg_word_chars",
    "body_avg_sentence_words", "body_word_count",     "link_count",
    "code_snippet_count",     "title_word_count",     "title_starts_capital",
    "paragraph_count",        "title_is_interrogative", "title_has_error_keyword",
    "has_quote",              "lines_of_code",        "body_sentence_count",
    "code_chars",             "has_list"};

/// Values in kContentFeatureNames order, booleans as 0/1.
std::array<double, 17> to_values(const ContentFeatures& f);

/// Whitespace-delimited tokens that contain at least one alphanumeric
/// character. Non-ASCII code points count as alphanumeric.
std::vector<std::string_view> tokenize_words(std::string_view text);

/// Segments ended by `.`, `?` or `!` followed by whitespace or end of text,
/// or by end of text; segments without a word are not counted.
int count_sentences(std::string_view text);

/// Number of Unicode code points in a UTF-8 string.
std::size_t utf8_length(std::string_view text);

ContentFeatures extract_content_features(std::string_view title, std::string_view body_html);
ContentFeatures extract_content_features(std::string_view title, const BodyParts& body);

} // namespace soq
