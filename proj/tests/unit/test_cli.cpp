#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = spreader_gnn::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "spreader_gnn_cli" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t data_lines(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) {
        n += !line.empty() && line[0] != '#';
    }
    return n - 1;  // header
}

// Small dense dataset shared by the slower cases.
fs::path small_data(const fs::path& root) {
    const fs::path d = root / "data";
    const auto r = run({"generate", "--n", "60", "--shift", "1.5", "--p-intra", "0.08", "--p-inter", "0.02",
                        "--hub-boost", "0", "--label-fraction", "1", "--seed", "3", "--out", d.string()});
    REQUIRE(r.code == 0);
    return d;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("generate writes the dataset it reports") {
    const fs::path d = scratch("gen") / "data";
    const auto r = run({"generate", "--n", "50", "--label-fraction", "0.4", "--seed", "2", "--out", d.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("nodes 50\n") != std::string::npos);
    CHECK(data_lines(d / "features.csv") == 50);
    CHECK(data_lines(d / "labels.csv") == 20);

    const fs::path e = d.parent_path() / "again";
    REQUIRE(run({"generate", "--n", "50", "--label-fraction", "0.4", "--seed", "2", "--out", e.string()}).code == 0);
    for (const char* f : {"edges.tsv", "features.csv", "labels.csv"}) {
        CHECK(slurp(d / f) == slurp(e / f));
    }
}

TEST_CASE("bad flags and configs exit non-zero") {
    const auto r = run({"generate", "--spreader-fraction", "1.5", "--out", (scratch("bad") / "x").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("error:") != std::string::npos);
    CHECK(run({"train", "--model", "gin"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
}

TEST_CASE("help lists defaults") {
    const auto r = run({"train", "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("--epochs") != std::string::npos);
    CHECK(r.out.find("200") != std::string::npos);
    CHECK(r.out.find("0.001") != std::string::npos);
}

TEST_CASE("train, eval and ego on a small dataset") {
    const fs::path root = scratch("train");
    const fs::path data = small_data(root);
    const fs::path ckpt = root / "gcn.ckpt";
    auto r = run({"train", "--model", "gcn", "--data", data.string(), "--epochs", "30", "--seed", "1", "--out",
                  ckpt.string()});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(ckpt));
    CHECK(data_lines(root / "gcn.ckpt.history.csv") == 30);

    const fs::path metrics = root / "m.json";
    r = run({"eval", "--data", data.string(), "--checkpoint", ckpt.string(), "--seed", "1", "--out",
             metrics.string()});
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(slurp(metrics));
    CHECK(j.at("model") == "gcn");
    CHECK(j.at("accuracy").get<double>() >= 0.0);

    CHECK(run({"eval", "--data", data.string(), "--checkpoint", ckpt.string(), "--model", "sage", "--out",
               metrics.string()})
              .code == 1);
    CHECK(run({"eval", "--data", data.string(), "--checkpoint", (root / "none.ckpt").string()}).code == 1);
    CHECK(run({"eval", "--data", (root / "nowhere").string(), "--checkpoint", ckpt.string()}).code == 1);

    r = run({"ego", "--data", data.string(), "--root", "0", "--hops", "1"});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("local,node,hop\n0,0,0\n", 0) == 0);
}

TEST_CASE("dgcnn with zero learning rate equals the untrained model") {
    const fs::path root = scratch("lr0");
    const fs::path data = small_data(root);
    const std::vector<std::string> common{"--model", "dgcnn", "--data", data.string(), "--seed", "2",
                                          "--hops", "1", "--hidden", "4", "--sortpool-k", "6"};
    auto with = [&](std::vector<std::string> extra) {
        std::vector<std::string> a{"train"};
        a.insert(a.end(), common.begin(), common.end());
        a.insert(a.end(), extra.begin(), extra.end());
        return a;
    };
    REQUIRE(run(with({"--epochs", "1", "--lr", "0", "--out", (root / "a.ckpt").string()})).code == 0);
    REQUIRE(run(with({"--epochs", "3", "--lr", "0", "--out", (root / "b.ckpt").string()})).code == 0);
    CHECK(slurp(root / "a.ckpt") == slurp(root / "b.ckpt"));
    REQUIRE(run(with({"--epochs", "1", "--out", (root / "c.ckpt").string()})).code == 0);
    CHECK(slurp(root / "a.ckpt") != slurp(root / "c.ckpt"));
}

TEST_CASE("run-all is reproducible") {
    const fs::path root = scratch("runall");
    const fs::path data = small_data(root);
    auto go = [&](const std::string& name) {
        const auto r = run({"run-all", "--data", data.string(), "--epochs", "3", "--hops", "1", "--hidden", "4",
                            "--seed", "4", "--out", (root / name).string()});
        REQUIRE(r.code == 0);
        return r.out;
    };
    const std::string t1 = go("a");
    const std::string t2 = go("b");
    CHECK(t1 == t2);
    CHECK(t1.rfind("model", 0) == 0);
    for (const char* f : {"gcn.metrics.json", "sage.metrics.json", "dgcnn.metrics.json", "dgcnn.ckpt", "table.txt"}) {
        INFO(f);
        CHECK(slurp(root / "a" / f) == slurp(root / "b" / f));
    }
}

}  // TEST_SUITE
