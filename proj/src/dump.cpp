#include "soq/dump.hpp"

#include "soq/error.hpp"

#include <expat.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <deque>
#include <istream>

namespace soq {

const std::string* RowAttributes::find(std::string_view name) const {
    for (const auto& [key, value] : items_) {
        if (key == name) return &value;
    }
    return nullptr;
}

std::size_t RowAttributes::byte_size() const {
    std::size_t total = 0;
    for (const auto& [key, value] : items_) total += key.size() + value.size();
    return total;
}

struct RowReader::Impl {
    std::istream& in;
    std::vector<char> chunk;
    XML_Parser parser = nullptr;
    std::deque<RowAttributes> pending;
    std::size_t pending_bytes = 0;
    std::size_t peak_pending = 0;
    std::size_t rows = 0;
    long long bytes_fed = 0;
    int depth = 0;
    bool finished = false;

    Impl(std::istream& stream, std::size_t chunk_size) : in(stream), chunk(chunk_size) {
        parser = XML_ParserCreate("UTF-8");
        XML_SetUserData(parser, this);
        XML_SetElementHandler(parser, &Impl::on_start, &Impl::on_end);
    }

    ~Impl() { XML_ParserFree(parser); }

    static void on_start(void* user, const XML_Char* name, const XML_Char** attrs) {
        auto* self = static_cast<Impl*>(user);
        ++self->depth;
        if (self->depth != 2 || std::string_view(name) != "row") return;
        RowAttributes row;
        for (std::size_t i = 0; attrs[i] != nullptr; i += 2) row.add(attrs[i], attrs[i + 1]);
        self->pending_bytes += row.byte_size();
        self->peak_pending = std::max(self->peak_pending, self->pending_bytes);
        self->pending.push_back(std::move(row));
    }

    static void on_end(void* user, const XML_Char*) { --static_cast<Impl*>(user)->depth; }

    [[noreturn]] void fail() {
        throw XmlStreamError(std::string("malformed XML: ") + XML_ErrorString(XML_GetErrorCode(parser)),
                             static_cast<long long>(XML_GetCurrentByteIndex(parser)));
    }

    void feed() {
        in.read(chunk.data(), static_cast<std::streamsize>(chunk.size()));
        auto got = static_cast<int>(in.gcount());
        bool last = got < static_cast<int>(chunk.size());
        if (last && got == 0 && bytes_fed == 0) {
            // Empty file: no document element, no rows.
            finished = true;
            return;
        }
        bytes_fed += got;
        if (XML_Parse(parser, chunk.data(), got, last ? XML_TRUE : XML_FALSE) != XML_STATUS_OK) fail();
        if (last) finished = true;
    }
};

RowReader::RowReader(std::istream& in, std::size_t chunk_size)
    : impl_(std::make_unique<Impl>(in, std::max<std::size_t>(chunk_size, 16))) {}

RowReader::~RowReader() = default;

bool RowReader::next(RowAttributes& out) {
    while (impl_->pending.empty()) {
        if (impl_->finished) return false;
        impl_->feed();
    }
    out = std::move(impl_->pending.front());
    impl_->pending.pop_front();
    impl_->pending_bytes -= out.byte_size();
    ++impl_->rows;
    return true;
}

std::size_t RowReader::rows_read() const noexcept { return impl_->rows; }
std::size_t RowReader::peak_pending_bytes() const noexcept { return impl_->peak_pending; }

namespace {

std::optional<std::int64_t> to_int(const std::string& text) {
    std::int64_t value = 0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end || text.empty()) return std::nullopt;
    return value;
}

bool required_int(const RowAttributes& row, std::string_view name, std::int64_t& out, std::string& error) {
    const std::string* raw = row.find(name);
    if (!raw) {
        error = "missing attribute " + std::string(name);
        return false;
    }
    auto value = to_int(*raw);
    if (!value) {
        error = "attribute " + std::string(name) + " is not an integer: '" + *raw + "'";
        return false;
    }
    out = *value;
    return true;
}

bool optional_int(const RowAttributes& row, std::string_view name, std::optional<std::int64_t>& out,
                  std::string& error) {
    const std::string* raw = row.find(name);
    if (!raw) return true;
    out = to_int(*raw);
    if (!out) {
        error = "attribute " + std::string(name) + " is not an integer: '" + *raw + "'";
        return false;
    }
    return true;
}

bool required_time(const RowAttributes& row, std::string_view name, Timestamp& out, std::string& error) {
    const std::string* raw = row.find(name);
    if (!raw) {
        error = "missing attribute " + std::string(name);
        return false;
    }
    auto t = parse_timestamp(*raw);
    if (!t) {
        error = "attribute " + std::string(name) + " is not a timestamp: '" + *raw + "'";
        return false;
    }
    out = *t;
    return true;
}

template <typename Record, typename Decode>
ParseResult<Record> parse_all(std::istream& in, Decode decode) {
    ParseResult<Record> result;
    result.skipped = for_each_record<Record>(
        in, decode, [&](Record&& r) { result.rows.push_back(std::move(r)); }, &result.errors);
    return result;
}

std::string lowercase(std::string_view text) {
    std::string out(text);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string trim(std::string_view text) {
    auto begin = text.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return {};
    auto end = text.find_last_not_of(" \t\r\n");
    return std::string(text.substr(begin, end - begin + 1));
}

} // namespace

std::optional<PostRow> decode_post(const RowAttributes& row, std::string& error) {
    PostRow post;
    std::int64_t type_id = 0;
    if (!required_int(row, "Id", post.id, error) || !required_int(row, "PostTypeId", type_id, error) ||
        !required_time(row, "CreationDate", post.creation_date, error)) {
        return std::nullopt;
    }
    if (post.id <= 0) {
        error = "non-positive Id";
        return std::nullopt;
    }
    post.post_type = type_id == 1 ? PostType::question : type_id == 2 ? PostType::answer : PostType::other;
    std::optional<std::int64_t> score;
    if (!optional_int(row, "AcceptedAnswerId", post.accepted_answer_id, error) ||
        !optional_int(row, "ParentId", post.parent_id, error) ||
        !optional_int(row, "OwnerUserId", post.owner_user_id, error) ||
        !optional_int(row, "Score", score, error)) {
        return std::nullopt;
    }
    post.score = score.value_or(0);
    if (const auto* title = row.find("Title")) post.title = *title;
    if (const auto* body = row.find("Body")) post.body_html = *body;
    if (const auto* tags = row.find("Tags")) post.tags_raw = *tags;
    return post;
}

std::optional<TagRow> decode_tag(const RowAttributes& row, std::string& error) {
    TagRow tag;
    if (!required_int(row, "Id", tag.id, error)) return std::nullopt;
    const std::string* name = row.find("TagName");
    if (!name || name->empty()) {
        error = "missing attribute TagName";
        return std::nullopt;
    }
    tag.name = lowercase(*name);
    std::optional<std::int64_t> count;
    if (!optional_int(row, "Count", count, error)) return std::nullopt;
    tag.count = count.value_or(0);
    if (tag.id <= 0 || tag.count < 0) {
        error = "tag id must be positive and count non-negative";
        return std::nullopt;
    }
    return tag;
}

std::optional<BadgeAward> decode_badge(const RowAttributes& row, std::string& error) {
    BadgeAward badge;
    if (!required_int(row, "UserId", badge.user_id, error) ||
        !required_time(row, "Date", badge.awarded_at, error)) {
        return std::nullopt;
    }
    const std::string* name = row.find("Name");
    if (!name) {
        error = "missing attribute Name";
        return std::nullopt;
    }
    badge.badge_name = *name;
    if (const auto* tag_based = row.find("TagBased")) badge.tag_based = lowercase(*tag_based) == "true";
    return badge;
}

std::optional<UserRow> decode_user(const RowAttributes& row, std::string& error) {
    UserRow user;
    if (!required_int(row, "Id", user.id, error) || !required_time(row, "CreationDate", user.created_at, error)) {
        return std::nullopt;
    }
    return user;
}

ParseResult<PostRow> parse_posts(std::istream& in) { return parse_all<PostRow>(in, decode_post); }
ParseResult<TagRow> parse_tags(std::istream& in) { return parse_all<TagRow>(in, decode_tag); }
ParseResult<BadgeAward> parse_badges(std::istream& in) { return parse_all<BadgeAward>(in, decode_badge); }
ParseResult<UserRow> parse_users(std::istream& in) { return parse_all<UserRow>(in, decode_user); }

std::vector<std::string> split_tags(std::string_view tags_raw) {
    std::vector<std::string> names;
    if (tags_raw.empty()) return names;
    if (tags_raw.front() != '<') {
        throw DataError("unrecognized tag list format '" + std::string(tags_raw) +
                        "' (expected <name> groups)");
    }
    std::size_t pos = 0;
    while (pos < tags_raw.size()) {
        if (tags_raw[pos] != '<') {
            throw DataError("malformed tag list: unexpected '" + std::string(tags_raw.substr(pos)) + "'");
        }
        auto close = tags_raw.find('>', pos + 1);
        if (close == std::string_view::npos) {
            throw DataError("malformed tag list: unterminated '" + std::string(tags_raw.substr(pos)) + "'");
        }
        std::string_view name = tags_raw.substr(pos + 1, close - pos - 1);
        if (name.empty() || name.find('<') != std::string_view::npos) {
            throw DataError("malformed tag list: bad group '" +
                            std::string(tags_raw.substr(pos, close - pos + 1)) + "'");
        }
        names.push_back(lowercase(name));
        pos = close + 1;
    }
    return names;
}

std::string join_tags(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& name : names) {
        out += '<';
        out += name;
        out += '>';
    }
    return out;
}

FollowerTable load_followers(std::istream& in) {
    FollowerTable table;
    std::string line;
    if (!std::getline(in, line)) return table;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (trim(line) != "tag,followers") {
        throw DataError("followers file: expected header 'tag,followers', got '" + line + "'");
    }
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto comma = line.rfind(',');
        if (comma == std::string::npos) {
            ++table.skipped;
            continue;
        }
        std::string name = lowercase(trim(std::string_view(line).substr(0, comma)));
        auto value = to_int(trim(std::string_view(line).substr(comma + 1)));
        if (name.empty() || !value || *value < 0) {
            ++table.skipped;
            continue;
        }
        auto [it, inserted] = table.followers.insert_or_assign(std::move(name), *value);
        if (!inserted) ++table.duplicates;
    }
    return table;
}

std::string escape_xml_attribute(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\n': out += "&#xA;"; break;
        case '\r': out += "&#xD;"; break;
        case '\t': out += "&#x9;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string to_dump_row(const PostRow& post) {
    std::string out = "<row Id=\"" + std::to_string(post.id) + "\" PostTypeId=\"";
    out += post.post_type == PostType::question ? "1" : post.post_type == PostType::answer ? "2" : "3";
    out += "\"";
    auto attr = [&out](std::string_view name, const std::string& value) {
        out += ' ';
        out += name;
        out += "=\"";
        out += escape_xml_attribute(value);
        out += '"';
    };
    if (post.accepted_answer_id) attr("AcceptedAnswerId", std::to_string(*post.accepted_answer_id));
    if (post.parent_id) attr("ParentId", std::to_string(*post.parent_id));
    attr("CreationDate", format_timestamp(post.creation_date));
    attr("Score", std::to_string(post.score));
    attr("Body", post.body_html);
    if (post.owner_user_id) attr("OwnerUserId", std::to_string(*post.owner_user_id));
    if (post.title) attr("Title", *post.title);
    if (post.tags_raw) attr("Tags", *post.tags_raw);
    out += " />";
    return out;
}

} // namespace soq
