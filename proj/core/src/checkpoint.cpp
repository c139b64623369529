#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spreader_gnn/data_io.hpp"
#include "spreader_gnn/error.hpp"

namespace spreader_gnn::io {

namespace {

constexpr std::string_view kSortpoolTensor = "dgcnn.sortpool_k";

class Writer {
public:
    void bytes(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
    void u32(std::uint32_t v) { le(v, 4); }
    void u64(std::uint64_t v) { le(v, 8); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }
    const std::vector<char>& buffer() const { return buf_; }

private:
    void le(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) {
            buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
        }
    }
    std::vector<char> buf_;
};

class Reader {
public:
    Reader(std::vector<char> data, std::string source) : data_(std::move(data)), source_(std::move(source)) {}

    std::string bytes(std::size_t n) {
        need(n);
        std::string out(data_.data() + pos_, n);
        pos_ += n;
        return out;
    }
    std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
    std::uint64_t u64() { return le(8); }
    double f64() { return std::bit_cast<double>(le(8)); }
    bool at_end() const { return pos_ == data_.size(); }
    std::size_t remaining() const { return data_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) {
            throw IncompatibilityError(source_ + ": truncated checkpoint");
        }
    }
    std::uint64_t le(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i) {
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + static_cast<std::size_t>(i)]))
                 << (8 * i);
        }
        pos_ += static_cast<std::size_t>(n);
        return v;
    }

    std::vector<char> data_;
    std::string source_;
    std::size_t pos_ = 0;
};

void write_tensor(Writer& w, std::string_view name, const Tensor& t) {
    w.u32(static_cast<std::uint32_t>(name.size()));
    w.bytes(name);
    w.u64(t.rows());
    w.u64(t.cols());
    for (const double v : t.data()) {
        w.f64(v);
    }
}

}  // namespace

void save_checkpoint(const models::ModelParams& params, const std::filesystem::path& path) {
    Writer w;
    w.bytes(kCheckpointMagic);
    w.u8(kCheckpointVersion);
    const bool dgcnn = params.arch == models::Architecture::dgcnn;
    w.u32(static_cast<std::uint32_t>(params.tensors.size() + (dgcnn ? 1 : 0)));
    for (const auto& nt : params.tensors) {
        write_tensor(w, nt.name, nt.tensor);
    }
    if (dgcnn) {
        write_tensor(w, kSortpoolTensor, Tensor(1, 1, static_cast<double>(params.sortpool_k)));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

models::ModelParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const std::string src = path.string();
    Reader r(std::move(bytes), src);

    if (r.remaining() < kCheckpointMagic.size() || r.bytes(kCheckpointMagic.size()) != kCheckpointMagic) {
        throw IncompatibilityError(src + ": not a checkpoint (bad magic)");
    }
    if (const auto version = r.u8(); version != kCheckpointVersion) {
        throw IncompatibilityError(src + ": checkpoint version " + std::to_string(version) + ", expected " +
                                   std::to_string(kCheckpointVersion));
    }
    const std::uint32_t count = r.u32();
    std::vector<models::NamedTensor> loaded;
    std::optional<std::size_t> sortpool_k;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint32_t name_len = r.u32();
        std::string name = r.bytes(name_len);
        const std::uint64_t rows = r.u64();
        const std::uint64_t cols = r.u64();
        if (cols != 0 && rows > r.remaining() / 8 / cols) {
            throw IncompatibilityError(src + ": truncated checkpoint");
        }
        std::vector<double> values(rows * cols);
        for (double& v : values) {
            v = r.f64();
        }
        if (name == kSortpoolTensor) {
            if (rows != 1 || cols != 1 || !(values[0] >= 2.0)) {
                throw IncompatibilityError(src + ": invalid " + std::string(kSortpoolTensor));
            }
            sortpool_k = static_cast<std::size_t>(values[0]);
            continue;
        }
        loaded.push_back({std::move(name), Tensor(rows, cols, std::move(values))});
    }
    if (!r.at_end()) {
        throw IncompatibilityError(src + ": trailing bytes after tensor table");
    }
    if (loaded.empty()) {
        throw IncompatibilityError(src + ": checkpoint holds no tensors");
    }

    const auto& first = loaded.front();
    const auto dot = first.name.find('.');
    const auto arch = [&] {
        try {
            return models::parse_architecture(first.name.substr(0, dot));
        } catch (const ConfigError&) {
            throw IncompatibilityError(src + ": unknown model tag in tensor '" + first.name + "'");
        }
    }();
    if (arch == models::Architecture::dgcnn && !sortpool_k) {
        throw IncompatibilityError(src + ": dgcnn checkpoint lacks " + std::string(kSortpoolTensor));
    }
    const std::size_t hidden = first.tensor.cols();
    std::size_t input_dim = first.tensor.rows();
    if (arch == models::Architecture::sage) {
        input_dim /= 2;
    } else if (arch == models::Architecture::dgcnn) {
        input_dim = input_dim > models::kDgcnnHopChannels ? input_dim - models::kDgcnnHopChannels : 0;
    }

    // Build the expected layout and require an exact name/shape match.
    Rng rng(0);
    models::ModelParams params;
    try {
        params = models::init_params(arch, input_dim, hidden, sortpool_k.value_or(0), rng);
    } catch (const ConfigError& e) {
        throw IncompatibilityError(src + ": " + e.what());
    }
    if (params.tensors.size() != loaded.size()) {
        throw IncompatibilityError(src + ": expected " + std::to_string(params.tensors.size()) + " tensors for " +
                                   std::string(models::to_string(arch)) + ", found " + std::to_string(loaded.size()));
    }
    for (std::size_t i = 0; i < loaded.size(); ++i) {
        auto& expected = params.tensors[i];
        auto& got = loaded[i];
        if (expected.name != got.name || expected.tensor.rows() != got.tensor.rows() ||
            expected.tensor.cols() != got.tensor.cols()) {
            throw IncompatibilityError(src + ": tensor " + std::to_string(i) + " is '" + got.name + "' " +
                                       got.tensor.shape_string() + ", expected '" + expected.name + "' " +
                                       expected.tensor.shape_string());
        }
        got.tensor.set_requires_grad(expected.tensor.requires_grad());
        expected.tensor = std::move(got.tensor);
    }
    return params;
}

std::string metrics_json(const metrics::MetricsRecord& record, std::string_view model, std::uint64_t seed) {
    nlohmann::ordered_json j;
    j["model"] = std::string(model);
    j["seed"] = seed;
    j["accuracy"] = record.accuracy;
    j["mcc"] = record.mcc;
    if (record.roc_auc) {
        j["roc_auc"] = *record.roc_auc;
    } else {
        j["roc_auc"] = nullptr;
    }
    return j.dump(2) + "\n";
}

void write_metrics(const metrics::MetricsRecord& record, std::string_view model, std::uint64_t seed,
                   const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << metrics_json(record, model, seed);
}

}  // namespace spreader_gnn::io
