#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "surrex/dataset_io.hpp"
#include "surrex/types.hpp"

namespace surrex {

// ---------------------------------------------------------------------------
// Dataset

Dataset Dataset::from_records(std::vector<StudyRecord> records) {
    Dataset d;
    d.studies = std::move(records);
    for (const auto& s : d.studies) {
        if (std::find(d.classes.begin(), d.classes.end(), s.class_id) == d.classes.end())
            d.classes.push_back(s.class_id);
    }
    return d;
}

int Dataset::class_index(const std::string& class_id) const {
    for (std::size_t j = 0; j < classes.size(); ++j)
        if (classes[j] == class_id) return static_cast<int>(j);
    return -1;
}

std::vector<std::vector<int>> Dataset::rows_by_class() const {
    std::vector<std::vector<int>> rows(classes.size());
    for (std::size_t i = 0; i < studies.size(); ++i) {
        const int j = class_index(studies[i].class_id);
        if (j >= 0) rows[j].push_back(static_cast<int>(i));
    }
    return rows;
}

Dataset Dataset::restricted_to_class(const std::string& class_id) const {
    std::vector<StudyRecord> sub;
    for (const auto& s : studies)
        if (s.class_id == class_id) sub.push_back(s);
    return Dataset::from_records(std::move(sub));
}

// ---------------------------------------------------------------------------
// PosteriorDraws

void PosteriorDraws::insert(std::string name, std::vector<double> chain) {
    if (!chains_.empty() && chain.size() != n_draws_)
        throw ValidationError("PosteriorDraws: chain '" + name + "' has length " +
                              std::to_string(chain.size()) + ", expected " +
                              std::to_string(n_draws_));
    n_draws_ = chain.size();
    chains_[std::move(name)] = std::move(chain);
}

const std::vector<double>& PosteriorDraws::at(const std::string& name) const {
    auto it = chains_.find(name);
    if (it == chains_.end())
        throw std::out_of_range("PosteriorDraws: no chain named '" + name + "'");
    return it->second;
}

std::vector<std::string> PosteriorDraws::names() const {
    std::vector<std::string> out;
    out.reserve(chains_.size());
    for (const auto& [k, v] : chains_) out.push_back(k);
    return out;
}

// ---------------------------------------------------------------------------
// CSV IO

std::string format_double(double x) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

const std::vector<std::string> kColumns = {"study_id", "class_id", "y1",
                                           "se1",      "y2",       "se2",
                                           "rho_w"};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_value(const std::string& text, long row, const std::string& column) {
    const char* b = text.data();
    const char* e = b + text.size();
    double value = 0.0;
    auto res = std::from_chars(b, e, value);
    if (res.ec != std::errc{} || res.ptr != e)
        throw ParseError("row " + std::to_string(row) + ", column " + column +
                             ": cannot parse '" + text + "' as a number",
                         row, column);
    if (!std::isfinite(value))
        throw ParseError("row " + std::to_string(row) + ", column " + column +
                             ": value must be finite",
                         row, column);
    return value;
}

void check_record(const StudyRecord& s, long row) {
    if (!(s.se1 > 0.0))
        throw ParseError("row " + std::to_string(row) + ", column se1: must be > 0", row,
                         "se1");
    if (!(s.se2 > 0.0))
        throw ParseError("row " + std::to_string(row) + ", column se2: must be > 0", row,
                         "se2");
    if (!(std::fabs(s.rho_w) < 1.0))
        throw ParseError("row " + std::to_string(row) +
                             ", column rho_w: must lie strictly inside (-1, 1)",
                         row, "rho_w");
}

} // namespace

Dataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw ParseError("'" + path + "' is empty");
    const auto header = split_csv_line(line);
    if (header != kColumns) {
        std::string want;
        for (const auto& c : kColumns) want += (want.empty() ? "" : ",") + c;
        throw ParseError("'" + path + "': header must be exactly '" + want + "'");
    }

    std::vector<StudyRecord> records;
    std::unordered_set<std::string> seen_ids;
    long row = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row;
        const auto fields = split_csv_line(line);
        if (fields.size() != kColumns.size())
            throw ParseError("row " + std::to_string(row) + ": expected " +
                                 std::to_string(kColumns.size()) + " columns, found " +
                                 std::to_string(fields.size()),
                             row, "");
        StudyRecord s;
        s.study_id = fields[0];
        s.class_id = fields[1];
        if (s.study_id.empty())
            throw ParseError("row " + std::to_string(row) + ", column study_id: empty", row,
                             "study_id");
        if (s.class_id.empty())
            throw ParseError("row " + std::to_string(row) + ", column class_id: empty", row,
                             "class_id");
        s.y1 = parse_value(fields[2], row, "y1");
        s.se1 = parse_value(fields[3], row, "se1");
        s.y2 = parse_value(fields[4], row, "y2");
        s.se2 = parse_value(fields[5], row, "se2");
        s.rho_w = parse_value(fields[6], row, "rho_w");
        check_record(s, row);
        if (!seen_ids.insert(s.study_id).second)
            throw ParseError("row " + std::to_string(row) + ", column study_id: duplicate '" +
                                 s.study_id + "'",
                             row, "study_id");
        records.push_back(std::move(s));
    }
    if (records.empty()) throw ParseError("'" + path + "' contains no data rows");
    return Dataset::from_records(std::move(records));
}

std::string dataset_to_csv(const Dataset& data) {
    std::string out = "study_id,class_id,y1,se1,y2,se2,rho_w\n";
    for (const auto& s : data.studies) {
        out += s.study_id + "," + s.class_id + "," + format_double(s.y1) + "," +
               format_double(s.se1) + "," + format_double(s.y2) + "," + format_double(s.se2) +
               "," + format_double(s.rho_w) + "\n";
    }
    return out;
}

void write_dataset(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path + "'");
    out << dataset_to_csv(data);
}

std::vector<Violation> validate(const Dataset& data) {
    std::vector<Violation> v;
    if (data.studies.empty()) v.push_back({"", "studies", "dataset has no studies"});

    std::unordered_map<std::string, int> id_count;
    for (const auto& s : data.studies) {
        if (!std::isfinite(s.y1)) v.push_back({s.study_id, "y1", "not finite"});
        if (!std::isfinite(s.y2)) v.push_back({s.study_id, "y2", "not finite"});
        if (!(s.se1 > 0.0) || !std::isfinite(s.se1))
            v.push_back({s.study_id, "se1", "must be > 0 and finite"});
        if (!(s.se2 > 0.0) || !std::isfinite(s.se2))
            v.push_back({s.study_id, "se2", "must be > 0 and finite"});
        if (!(std::fabs(s.rho_w) < 1.0))
            v.push_back({s.study_id, "rho_w", "must lie strictly inside (-1, 1)"});
        if (++id_count[s.study_id] == 2)
            v.push_back({s.study_id, "study_id", "duplicate study_id"});
    }

    std::unordered_set<std::string> present;
    for (const auto& s : data.studies) present.insert(s.class_id);
    for (const auto& c : data.classes)
        if (!present.count(c))
            v.push_back({"", "classes", "class '" + c + "' has no studies"});
    for (const auto& c : present)
        if (data.class_index(c) < 0)
            v.push_back({"", "classes", "class '" + c + "' missing from class list"});
    return v;
}

std::string dataset_fingerprint(const Dataset& data) {
    const std::string csv = dataset_to_csv(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : csv) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace surrex
