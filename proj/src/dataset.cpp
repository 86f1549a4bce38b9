#include "soq/dataset.hpp"

#include "soq/csv.hpp"
#include "soq/error.hpp"
#include "soq/parallel.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace soq {

void Provenance::add(const std::string& key, std::int64_t delta) {
    entries[key] = std::to_string(count(key) + delta);
}

std::int64_t Provenance::count(const std::string& key) const {
    auto it = entries.find(key);
    if (it == entries.end()) return 0;
    return parse_int(it->second, key);
}

int label(const PostRow& post) {
    if (post.post_type != PostType::question) {
        throw DataError("label: post " + std::to_string(post.id) + " is not a question");
    }
    return post.accepted_answer_id ? 1 : 0;
}

Timestamp dump_end_of(std::span<const PostRow> posts) {
    if (posts.empty()) throw DataError("cannot derive dump end from an empty post set");
    return std::max_element(posts.begin(), posts.end(), [](const PostRow& a, const PostRow& b) {
               return a.creation_date < b.creation_date;
           })->creation_date;
}

bool outside_cutoff(Timestamp created, Timestamp dump_end, int cutoff_days) {
    return created <= dump_end - std::chrono::days{cutoff_days};
}

CutoffResult filter_recent(std::span<const PostRow> questions, Timestamp dump_end, int cutoff_days) {
    CutoffResult result;
    for (const auto& q : questions) {
        if (outside_cutoff(q.creation_date, dump_end, cutoff_days)) {
            result.kept.push_back(q);
        } else {
            ++result.removed;
        }
    }
    return result;
}

RowAssembler::Outcome RowAssembler::assemble(const PostRow& question) const {
    Outcome out;
    std::vector<std::string> tags;
    try {
        tags = split_tags(question.tags_raw.value_or(""));
    } catch (const DataError&) {
        out.skip_reason = "skipped_malformed_tags";
        return out;
    }
    if (tags.empty()) {
        out.skip_reason = "skipped_no_tags";
        return out;
    }
    if (tags.size() > 5) {
        out.skip_reason = "skipped_too_many_tags";
        return out;
    }
    auto tag_features = question_tag_features(tags, tag_stats_);
    out.unknown_tags = tag_features.unknown_tags;

    AskerSnapshot asker;
    if (question.owner_user_id) {
        asker = snapshot(*question.owner_user_id, question.creation_date, timelines_, users_);
    }
    out.unknown_asker = !asker.user_known;

    FeatureVector row;
    row.question_id = question.id;
    row.label = label(question);
    row.features = assemble_features(extract_content_features(question.title.value_or(""), question.body_html),
                                     tag_features, metadata_features(question.creation_date), asker);
    out.row = std::move(row);
    return out;
}

FeatureMatrix build_matrix(std::span<const PostRow> posts, const TagStatsMap& tag_stats,
                           const TimelineMap& timelines, const UserIndex& users, const BuildConfig& config) {
    FeatureMatrix matrix;
    matrix.provenance.set("schema_version", std::string(kFeatureSchemaVersion));
    matrix.provenance.set("cutoff_days", std::to_string(config.cutoff_days));
    for (const char* key : {"questions_seen", "removed_recent", "rows", "skipped_no_tags", "skipped_malformed_tags",
                            "skipped_too_many_tags", "skipped_duplicate_id", "unknown_asker", "unknown_tag_uses"}) {
        matrix.provenance.set(key, "0");
    }

    std::optional<Timestamp> dump_end = config.dump_end;
    if (!dump_end && !posts.empty()) dump_end = dump_end_of(posts);
    matrix.provenance.set("dump_end", dump_end ? format_timestamp(*dump_end) : "none");

    std::vector<const PostRow*> candidates;
    for (const auto& p : posts) {
        if (p.post_type != PostType::question) continue;
        matrix.provenance.add("questions_seen");
        if (!outside_cutoff(p.creation_date, *dump_end, config.cutoff_days)) {
            matrix.provenance.add("removed_recent");
            continue;
        }
        candidates.push_back(&p);
    }

    RowAssembler assembler(tag_stats, timelines, users);
    std::vector<RowAssembler::Outcome> outcomes(candidates.size());
    parallel_for(candidates.size(), config.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) outcomes[i] = assembler.assemble(*candidates[i]);
    });

    std::unordered_set<std::int64_t> seen;
    for (auto& outcome : outcomes) {
        if (!outcome.row) {
            matrix.provenance.add(outcome.skip_reason);
            continue;
        }
        if (!seen.insert(outcome.row->question_id).second) {
            matrix.provenance.add("skipped_duplicate_id");
            continue;
        }
        if (outcome.unknown_asker) matrix.provenance.add("unknown_asker");
        matrix.provenance.add("unknown_tag_uses", outcome.unknown_tags);
        matrix.rows.push_back(std::move(*outcome.row));
    }
    matrix.provenance.set("rows", std::to_string(matrix.rows.size()));
    return matrix;
}

void export_matrix(const FeatureMatrix& matrix, std::ostream& out) {
    verify_feature_names(matrix.names, "export_matrix");
    out << "question_id";
    for (const auto& name : matrix.names) out << ',' << name;
    out << ",resolved\n";
    std::string line;
    for (const auto& row : matrix.rows) {
        line = std::to_string(row.question_id);
        for (double v : row.features) {
            line += ',';
            line += format_real(v);
        }
        line += ',';
        line += std::to_string(row.label);
        line += '\n';
        out << line;
    }
}

FeatureMatrix import_matrix(std::istream& in) {
    FeatureMatrix matrix;
    std::string line;
    if (!std::getline(in, line)) throw DataError("matrix file is empty");
    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        CsvReader reader(hs);
        reader.next(header);
    }
    if (header.empty() || header.front() != "question_id") {
        throw DataError("matrix header: column 0 is '" + (header.empty() ? std::string() : header.front()) +
                        "', expected 'question_id'");
    }
    if (header.back() != "resolved") {
        throw DataError("matrix header: last column is '" + header.back() + "', expected 'resolved'");
    }
    std::vector<std::string> names(header.begin() + 1, header.end() - 1);
    verify_feature_names(names, "matrix header");
    matrix.names = std::move(names);

    std::size_t line_no = 1;
    const std::size_t expected_fields = kFeatureCount + 2;
    while (std::getline(in, line)) {
        ++line_no;
        if (in.eof()) throw DataError("matrix file truncated at line " + std::to_string(line_no));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        FeatureVector row;
        std::size_t field = 0;
        std::size_t pos = 0;
        while (true) {
            auto comma = line.find(',', pos);
            std::string_view cell = std::string_view(line).substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (field == 0) {
                row.question_id = parse_int(cell, "question_id");
            } else if (field <= kFeatureCount) {
                row.features[field - 1] = parse_real(cell, matrix.names[field - 1]);
            } else if (field == kFeatureCount + 1) {
                auto value = parse_int(cell, "resolved");
                if (value != 0 && value != 1) throw DataError("matrix line " + std::to_string(line_no) + ": label must be 0 or 1");
                row.label = static_cast<int>(value);
            }
            ++field;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (field != expected_fields) {
            throw DataError("matrix line " + std::to_string(line_no) + " has " + std::to_string(field) +
                            " fields, expected " + std::to_string(expected_fields));
        }
        matrix.rows.push_back(row);
    }
    return matrix;
}

void write_provenance(const Provenance& provenance, std::ostream& out) {
    for (const auto& [key, value] : provenance.entries) out << key << '=' << value << '\n';
}

Provenance read_provenance(std::istream& in) {
    Provenance p;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("provenance line without '=': " + line);
        p.entries[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return p;
}

void save_matrix_file(const FeatureMatrix& matrix, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    export_matrix(matrix, out);
    std::ofstream meta(path + ".meta", std::ios::binary);
    if (!meta) throw DataError("cannot write " + path + ".meta");
    write_provenance(matrix.provenance, meta);
}

FeatureMatrix load_matrix_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open matrix file " + path);
    FeatureMatrix matrix = import_matrix(in);
    std::ifstream meta(path + ".meta", std::ios::binary);
    if (meta) {
        matrix.provenance = read_provenance(meta);
        auto it = matrix.provenance.entries.find("rows");
        if (it != matrix.provenance.entries.end() &&
            parse_int(it->second, "rows") != static_cast<std::int64_t>(matrix.rows.size())) {
            throw DataError("matrix file " + path + " has " + std::to_string(matrix.rows.size()) +
                            " rows but its provenance records " + it->second + " (truncated?)");
        }
    }
    return matrix;
}

} // namespace soq
