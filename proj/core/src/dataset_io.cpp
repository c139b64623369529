#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "spreader_gnn/data_io.hpp"
#include "spreader_gnn/error.hpp"

namespace spreader_gnn::io {

namespace {

namespace fs = std::filesystem;

std::string where(const fs::path& file, std::size_t line) {
    return file.string() + ":" + std::to_string(line);
}

std::vector<std::string> read_lines(const fs::path& file) {
    std::ifstream in(file);
    if (!in) {
        throw IoError("cannot open " + file.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        lines.push_back(std::move(line));
    }
    return lines;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            return out;
        }
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
        s.remove_suffix(1);
    }
    return s;
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
    text = trim(text);
    T value{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return value;
}

std::uint64_t parse_id(std::string_view text, const fs::path& file, std::size_t line) {
    const auto id = parse_number<std::uint64_t>(text);
    if (!id) {
        throw ParseError(where(file, line) + ": invalid node id '" + std::string(text) + "'");
    }
    return *id;
}

NodeTable read_features(const fs::path& file) {
    const auto lines = read_lines(file);
    if (lines.empty()) {
        throw ParseError(where(file, 1) + ": missing header");
    }
    const auto header = split(lines[0], ',');
    if (trim(header[0]) != "id") {
        throw ParseError(where(file, 1) + ": header must start with 'id'");
    }
    const std::size_t dim = header.size() - 1;
    for (std::size_t j = 0; j < dim; ++j) {
        if (trim(header[j + 1]) != "f" + std::to_string(j)) {
            throw ParseError(where(file, 1) + ": expected column 'f" + std::to_string(j) + "'");
        }
    }
    std::vector<std::pair<std::uint64_t, std::vector<double>>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) {
            continue;
        }
        const auto fields = split(lines[i], ',');
        if (fields.size() != dim + 1) {
            throw ParseError(where(file, i + 1) + ": expected " + std::to_string(dim + 1) + " fields, got " +
                             std::to_string(fields.size()));
        }
        std::vector<double> values(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            const auto v = parse_number<double>(fields[j + 1]);
            if (!v) {
                throw ParseError(where(file, i + 1) + ": invalid number '" + std::string(fields[j + 1]) + "'");
            }
            values[j] = *v;
        }
        rows.emplace_back(parse_id(fields[0], file, i + 1), std::move(values));
    }
    const std::size_t n = rows.size();
    NodeTable table;
    table.features = Tensor(n, dim);
    table.labels.assign(n, Label::unlabeled);
    std::vector<bool> seen(n, false);
    for (const auto& [id, values] : rows) {
        if (id >= n) {
            throw DataError(file.string() + ": node id " + std::to_string(id) + " outside 0.." + std::to_string(n - 1) +
                            "; ids must be contiguous from 0");
        }
        if (seen[id]) {
            throw DataError(file.string() + ": duplicate node id " + std::to_string(id));
        }
        seen[id] = true;
        std::copy(values.begin(), values.end(), table.features.row(id).begin());
    }
    return table;
}

std::vector<graph::Edge> read_edges(const fs::path& file, std::size_t n_nodes) {
    const auto lines = read_lines(file);
    std::vector<graph::Edge> edges;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto fields = split(line, '\t');
        if (fields.size() != 2) {
            throw ParseError(where(file, i + 1) + ": expected 'src<TAB>dst'");
        }
        const auto src = parse_id(fields[0], file, i + 1);
        const auto dst = parse_id(fields[1], file, i + 1);
        if (src >= n_nodes || dst >= n_nodes) {
            throw DataError(where(file, i + 1) + ": edge (" + std::to_string(src) + "," + std::to_string(dst) +
                            ") references a node missing from " + std::string(kFeaturesFile));
        }
        edges.push_back({static_cast<graph::NodeId>(src), static_cast<graph::NodeId>(dst)});
    }
    return edges;
}

void read_labels(const fs::path& file, NodeTable& table) {
    const auto lines = read_lines(file);
    if (lines.empty()) {
        return;
    }
    const auto header = split(lines[0], ',');
    if (header.size() != 2 || trim(header[0]) != "id" || trim(header[1]) != "label") {
        throw ParseError(where(file, 1) + ": header must be 'id,label'");
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) {
            continue;
        }
        const auto fields = split(lines[i], ',');
        if (fields.size() != 2) {
            throw ParseError(where(file, i + 1) + ": expected 'id,label'");
        }
        const auto id = parse_id(fields[0], file, i + 1);
        const auto label = parse_number<int>(fields[1]);
        if (!label || (*label != 0 && *label != 1)) {
            throw ParseError(where(file, i + 1) + ": label must be 0 or 1");
        }
        if (id >= table.n_nodes()) {
            throw DataError(where(file, i + 1) + ": node id " + std::to_string(id) + " missing from " +
                            std::string(kFeaturesFile));
        }
        if (table.labels[id] != Label::unlabeled) {
            throw DataError(where(file, i + 1) + ": duplicate label for node " + std::to_string(id));
        }
        table.labels[id] = *label == 1 ? Label::spreader : Label::regular;
    }
}

std::ofstream open_for_write(const fs::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + file.string());
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

Dataset load_dataset(const std::filesystem::path& dir) {
    if (!fs::is_directory(dir)) {
        throw IoError("dataset directory not found: " + dir.string());
    }
    Dataset data;
    data.table = read_features(dir / kFeaturesFile);
    const auto edges = read_edges(dir / kEdgesFile, data.table.n_nodes());
    data.graph = graph::build_graph(edges, data.table.n_nodes());
    read_labels(dir / kLabelsFile, data.table);
    return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
    const std::size_t n = data.table.n_nodes();
    const std::size_t dim = data.table.feature_dim();
    {
        auto out = open_for_write(dir / kEdgesFile);
        out << "# src\tdst\n";
        for (graph::NodeId u = 0; u < data.graph.n_nodes(); ++u) {
            for (const graph::NodeId v : data.graph.neighbors(u)) {
                if (u < v) {
                    out << u << '\t' << v << '\n';
                }
            }
        }
    }
    {
        auto out = open_for_write(dir / kFeaturesFile);
        out << "id";
        for (std::size_t j = 0; j < dim; ++j) {
            out << ",f" << j;
        }
        out << '\n';
        for (std::size_t i = 0; i < n; ++i) {
            out << i;
            for (const double v : data.table.features.row(i)) {
                out << ',' << format_double(v);
            }
            out << '\n';
        }
    }
    {
        auto out = open_for_write(dir / kLabelsFile);
        out << "id,label\n";
        for (std::size_t i = 0; i < n; ++i) {
            if (data.table.labels[i] != Label::unlabeled) {
                out << i << ',' << (data.table.labels[i] == Label::spreader ? 1 : 0) << '\n';
            }
        }
    }
}

void write_history(const training::TrainHistory& history, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    out << "epoch,loss,train_acc\n";
    for (const auto& rec : history.epochs) {
        out << rec.epoch << ',' << format_double(rec.train_loss) << ',' << format_double(rec.train_accuracy) << '\n';
    }
}

}  // namespace spreader_gnn::io
