#include "multiroc/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "multiroc/errors.hpp"

namespace multiroc {

namespace {

// Rows already this close to the simplex are left bit-identical, so that a
// renormalized dataset reloads unchanged.
constexpr double kRenormalizeFloor = 1e-12;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

double parse_real(std::string_view field, std::size_t line_no, std::size_t col) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
        throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) +
                         ": cannot parse '" + std::string(field) + "' as a real number");
    }
    return value;
}

int parse_label(std::string_view field, std::size_t line_no, std::size_t col) {
    long value = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
        throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) +
                         ": cannot parse '" + std::string(field) + "' as an integer label");
    }
    return static_cast<int>(value);
}

// Reads header + rows of numeric fields. `label_column` controls whether the
// last field of each row is an integer label.
std::pair<Matrix, std::vector<int>> read_csv(std::istream& in, bool label_column) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            width = split_commas(line).size();
            break;
        }
    }
    if (width == 0) throw ParseError("empty input: expected a header row");
    const std::size_t k = label_column ? width - 1 : width;
    if (label_column && width < 2) throw ParseError("header must name k probability columns and a label column");

    std::vector<double> values;
    std::vector<int> labels;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_commas(line);
        if (fields.size() != width) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                             " fields, found " + std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < k; ++c) values.push_back(parse_real(fields[c], line_no, c));
        if (label_column) labels.push_back(parse_label(fields[k], line_no, k));
        ++rows;
    }
    if (rows == 0) throw ParseError("no observations after the header row");

    Matrix probs(rows, k);
    std::copy(values.begin(), values.end(), probs.data().begin());
    return {std::move(probs), std::move(labels)};
}

ScoredDataset read_json(std::istream& in, double simplex_tol) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("probs") || !doc.contains("labels")) {
        throw ParseError("JSON dataset must be an object with \"probs\" and \"labels\"");
    }
    const auto& jp = doc["probs"];
    const auto& jl = doc["labels"];
    if (!jp.is_array() || jp.empty() || !jl.is_array()) {
        throw ParseError("\"probs\" must be a non-empty array of rows and \"labels\" an array");
    }
    const std::size_t n = jp.size();
    if (!jp[0].is_array()) throw ParseError("probs row 0 is not an array");
    const std::size_t k = jp[0].size();
    Matrix probs(n, k);
    for (std::size_t r = 0; r < n; ++r) {
        if (!jp[r].is_array() || jp[r].size() != k) {
            throw ParseError("probs row " + std::to_string(r) + ": expected " + std::to_string(k) + " entries");
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (!jp[r][c].is_number()) {
                throw ParseError("probs row " + std::to_string(r) + ", column " + std::to_string(c) +
                                 ": not a number");
            }
            probs(r, c) = jp[r][c].get<double>();
        }
    }
    if (jl.size() != n) {
        throw ParseError("labels has " + std::to_string(jl.size()) + " entries but probs has " +
                         std::to_string(n) + " rows");
    }
    std::vector<int> labels(n);
    for (std::size_t r = 0; r < n; ++r) {
        if (!jl[r].is_number_integer()) throw ParseError("label " + std::to_string(r) + ": not an integer");
        labels[r] = jl[r].get<int>();
    }
    return ScoredDataset(std::move(probs), std::move(labels), simplex_tol);
}

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path.string() + "'");
    return in;
}

}  // namespace

std::size_t ClassCounts::total() const {
    std::size_t s = 0;
    for (auto c : counts) s += c;
    return s;
}

ScoredDataset::ScoredDataset(Matrix probs, std::vector<int> labels, double simplex_tol)
    : probs_(std::move(probs)), labels_(std::move(labels)) {
    const std::size_t n = probs_.rows();
    const std::size_t k = probs_.cols();
    if (k < 2) throw InvalidK("a scored dataset needs at least 2 classes, got " + std::to_string(k));
    if (n == 0) throw ParseError("a scored dataset needs at least one observation");
    if (labels_.size() != n) {
        throw DimensionMismatch(std::to_string(labels_.size()) + " labels for " + std::to_string(n) +
                                " probability rows");
    }

    for (std::size_t r = 0; r < n; ++r) {
        auto row = probs_.row(r);
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            const double p = row[c];
            if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
                throw SimplexViolation("row " + std::to_string(r) + ", column " + std::to_string(c) +
                                       ": probability " + format_real(p) + " outside [0, 1]");
            }
            sum += p;
        }
        const double dev = std::abs(sum - 1.0);
        if (dev > simplex_tol) {
            throw SimplexViolation("row " + std::to_string(r) + ": probabilities sum to " + format_real(sum) +
                                   " (tolerance " + format_real(simplex_tol) + ")");
        }
        if (dev > kRenormalizeFloor) {
            for (auto& p : row) p /= sum;
        }
    }

    std::vector<std::size_t> seen(k, 0);
    for (std::size_t r = 0; r < n; ++r) {
        const int y = labels_[r];
        if (y < 0 || static_cast<std::size_t>(y) >= k) {
            throw LabelOutOfRange("row " + std::to_string(r) + ": label " + std::to_string(y) +
                                  " is not a class index in [0, " + std::to_string(k - 1) + "]");
        }
        ++seen[static_cast<std::size_t>(y)];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (seen[c] == 0) throw EmptyClass("class " + std::to_string(c) + " has no observations");
    }
}

ClassCounts class_counts(const ScoredDataset& dataset) {
    ClassCounts out{std::vector<std::size_t>(dataset.k(), 0)};
    for (int y : dataset.labels()) ++out.counts[static_cast<std::size_t>(y)];
    return out;
}

DataFormat parse_format(std::string_view name) {
    if (name == "csv") return DataFormat::csv;
    if (name == "json") return DataFormat::json;
    throw ParseError("unknown format '" + std::string(name) + "' (expected csv or json)");
}

DataFormat format_from_path(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return ext == ".json" ? DataFormat::json : DataFormat::csv;
}

ScoredDataset load_dataset(std::istream& in, DataFormat format, double simplex_tol) {
    if (format == DataFormat::json) return read_json(in, simplex_tol);
    auto [probs, labels] = read_csv(in, true);
    return ScoredDataset(std::move(probs), std::move(labels), simplex_tol);
}

ScoredDataset load_dataset(const std::filesystem::path& path, DataFormat format, double simplex_tol) {
    auto in = open_input(path);
    return load_dataset(in, format, simplex_tol);
}

ScoredDataset load_dataset(const std::filesystem::path& path) {
    return load_dataset(path, format_from_path(path));
}

Matrix load_probabilities_csv(std::istream& in) { return read_csv(in, false).first; }

std::vector<int> load_labels(std::istream& in) {
    std::vector<int> labels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto field = trim(line);
        if (field.empty()) continue;
        // Tolerate a single non-numeric header line.
        if (labels.empty() && line_no == 1 && !(std::isdigit(static_cast<unsigned char>(field.front())) ||
                                                field.front() == '-')) {
            continue;
        }
        labels.push_back(parse_label(field, line_no, 0));
    }
    return labels;
}

ScoredDataset load_dataset_split(const std::filesystem::path& probs_path,
                                 const std::filesystem::path& labels_path, double simplex_tol) {
    auto pin = open_input(probs_path);
    auto lin = open_input(labels_path);
    return ScoredDataset(load_probabilities_csv(pin), load_labels(lin), simplex_tol);
}

void write_dataset(std::ostream& out, const ScoredDataset& dataset, DataFormat format) {
    const std::size_t n = dataset.n();
    const std::size_t k = dataset.k();
    if (format == DataFormat::json) {
        nlohmann::json doc;
        doc["probs"] = nlohmann::json::array();
        for (std::size_t r = 0; r < n; ++r) {
            auto row = dataset.probs().row(r);
            doc["probs"].push_back(std::vector<double>(row.begin(), row.end()));
        }
        doc["labels"] = dataset.labels();
        out << doc.dump() << '\n';
        return;
    }
    for (std::size_t c = 0; c < k; ++c) out << 'p' << c << ',';
    out << "label\n";
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < k; ++c) out << format_real(dataset.prob(r, c)) << ',';
        out << dataset.label(r) << '\n';
    }
}

void write_dataset(const std::filesystem::path& path, const ScoredDataset& dataset, DataFormat format) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write '" + path.string() + "'");
    write_dataset(out, dataset, format);
}

ScoredDataset subset(const ScoredDataset& dataset, const std::vector<std::size_t>& rows) {
    Matrix probs(rows.size(), dataset.k());
    std::vector<int> labels(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto src = dataset.probs().row(rows[i]);
        std::copy(src.begin(), src.end(), probs.row(i).begin());
        labels[i] = dataset.label(rows[i]);
    }
    return ScoredDataset(std::move(probs), std::move(labels));
}

std::string format_real(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) {
        std::ostringstream os;
        os.precision(17);
        os << value;
        return os.str();
    }
    return std::string(buf, ptr);
}

}  // namespace multiroc
