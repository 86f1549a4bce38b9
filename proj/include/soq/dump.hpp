#pragma once

#include "soq/timestamp.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace soq {

enum class PostType { question = 1, answer = 2, other = 3 };

struct PostRow {
    std::int64_t id = 0;
    PostType post_type = PostType::other;
    std::optional<std::int64_t> accepted_answer_id;
    std::optional<std::int64_t> parent_id;
    Timestamp creation_date{};
    std::int64_t score = 0;
    std::optional<std::string> title;
    std::string body_html;
    std::optional<std::string> tags_raw;
    std::optional<std::int64_t> owner_user_id;

    bool operator==(const PostRow&) const = default;
};

struct TagRow {
    std::int64_t id = 0;
    std::string name;
    std::int64_t count = 0;

    bool operator==(const TagRow&) const = default;
};

struct BadgeAward {
    std::int64_t user_id = 0;
    std::string badge_name;
    Timestamp awarded_at{};
    /// Tag badges (e.g. a "python" bronze badge) share the Name attribute
    /// with the named badges, so they are tracked separately.
    bool tag_based = false;

    bool operator==(const BadgeAward&) const = default;
};

struct UserRow {
    std::int64_t id = 0;
    Timestamp created_at{};

    bool operator==(const UserRow&) const = default;
};

/// Decoded attributes of one `<row>` element, in document order.
class RowAttributes {
public:
    void clear() { items_.clear(); }
    void add(std::string name, std::string value) { items_.emplace_back(std::move(name), std::move(value)); }

    /// Value of attribute `name`, or nullptr when absent.
    const std::string* find(std::string_view name) const;

    std::size_t byte_size() const;
    const std::vector<std::pair<std::string, std::string>>& items() const { return items_; }

private:
    std::vector<std::pair<std::string, std::string>> items_;
};

/// Single-pass SAX reader over a dump file. Yields the `<row>` children of the
/// document element; anything else is ignored. Input is consumed in fixed
/// chunks so memory stays bounded by the chunk size plus the largest row.
class RowReader {
public:
    explicit RowReader(std::istream& in, std::size_t chunk_size = 64 * 1024);
    ~RowReader();
    RowReader(const RowReader&) = delete;
    RowReader& operator=(const RowReader&) = delete;

    /// Fills `out` with the next row. Returns false at end of document.
    /// Throws XmlStreamError on malformed XML.
    bool next(RowAttributes& out);

    std::size_t rows_read() const noexcept;
    /// Largest number of decoded-but-unconsumed bytes held at any time.
    std::size_t peak_pending_bytes() const noexcept;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Outcome of a whole-file parse: the good rows plus row-level rejects.
template <typename Record>
struct ParseResult {
    std::vector<Record> rows;
    std::size_t skipped = 0;
    /// Messages for the first few rejected rows.
    std::vector<std::string> errors;
};

/// Row decoders. Each returns nullopt and fills `error` when a required
/// attribute is missing or unparseable.
std::optional<PostRow> decode_post(const RowAttributes& row, std::string& error);
std::optional<TagRow> decode_tag(const RowAttributes& row, std::string& error);
std::optional<BadgeAward> decode_badge(const RowAttributes& row, std::string& error);
std::optional<UserRow> decode_user(const RowAttributes& row, std::string& error);

/// Streams a dump file and invokes `sink` per decoded record.
template <typename Record, typename Decode, typename Sink>
std::size_t for_each_record(std::istream& in, Decode decode, Sink&& sink,
                            std::vector<std::string>* errors = nullptr) {
    RowReader reader(in);
    RowAttributes attrs;
    std::size_t skipped = 0;
    std::string error;
    while (reader.next(attrs)) {
        std::optional<Record> record = decode(attrs, error);
        if (!record) {
            ++skipped;
            if (errors && errors->size() < 20) {
                errors->push_back("row " + std::to_string(reader.rows_read()) + ": " + error);
            }
            continue;
        }
        sink(std::move(*record));
    }
    return skipped;
}

ParseResult<PostRow> parse_posts(std::istream& in);
ParseResult<TagRow> parse_tags(std::istream& in);
ParseResult<BadgeAward> parse_badges(std::istream& in);
ParseResult<UserRow> parse_users(std::istream& in);

/// Splits the dump's `<a><b>` tag encoding into lowercase names.
/// Throws DataError on any other form (including the `|a|b|` variant).
std::vector<std::string> split_tags(std::string_view tags_raw);

/// Inverse of split_tags.
std::string join_tags(const std::vector<std::string>& names);

struct FollowerTable {
    std::map<std::string, std::int64_t> followers;
    std::size_t skipped = 0;
    std::size_t duplicates = 0;
};

/// Reads the `tag,followers` supplemental file.
FollowerTable load_followers(std::istream& in);

/// Serializes a post back into a dump `<row .../>` element.
std::string to_dump_row(const PostRow& post);

/// Escapes text for use inside a double-quoted XML attribute.
std::string escape_xml_attribute(std::string_view text);

} // namespace soq
