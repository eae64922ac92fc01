#include "app.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace kgnls::app;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("kgnls_cli_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path write_config(const fs::path& dir, const json& j) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << j.dump();
    return p;
}

}  // namespace

TEST_CASE("config resolution") {
    const json d = default_config("measure");
    CHECK(d["seed"] == 1);
    CHECK(d["experiment"] == "measure");
    for (const auto& e : experiments()) CHECK_NOTHROW(default_config(e));
    CHECK_THROWS_AS(default_config("nope"), ConfigError);

    RunOptions o;
    o.seed = 42;
    const json r = resolve_config("measure", json{{"samples", 100}}, o);
    CHECK(r["samples"] == 100);
    CHECK(r["seed"] == 42);

    try {
        resolve_config("measure", json{{"sampels", 100}, {"c", "ten"}, {"workers", 0}}, RunOptions{});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.problems().size() == 3);
    }
    CHECK_THROWS_AS(resolve_config("simulate", json{{"system", "GP"}}, RunOptions{}), ConfigError);
    CHECK_THROWS_AS(resolve_config("measure", json::array(), RunOptions{}), ConfigError);
    CHECK(config_hash(r) == config_hash(resolve_config("measure", json{{"samples", 100}}, o)));
    CHECK(config_hash(r) != config_hash(d));
}

TEST_CASE("shipped schema is current") {
    const fs::path p = fs::path(KGNLS_SOURCE_DIR) / "tools" / "config.schema.json";
    CHECK(json::parse(slurp(p)) == schema());
}

TEST_CASE("bad config exits with code 2 and writes nothing") {
    const fs::path dir = scratch("bad");
    RunOptions o;
    o.config_path = write_config(dir, json{{"unknown", 1}}).string();
    o.out_dir = (dir / "out").string();
    std::ostringstream log;
    CHECK(run("measure", o, log) == kConfig);
    CHECK(log.str().find("unknown: unknown key") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out" / "manifest.json"));
    o.config_path = (dir / "missing.json").string();
    CHECK(run("measure", o, log) == kConfig);
}

TEST_CASE("runs are reproducible and collected into a report") {
    const fs::path dir = scratch("runs");
    const fs::path cfg = write_config(dir, json{{"samples", 2000}, {"alpha_points", 2}});
    auto go = [&](const std::string& name, std::uint64_t seed) {
        RunOptions o;
        o.config_path = cfg.string();
        o.seed = seed;
        o.out_dir = (dir / name).string();
        std::ostringstream log;
        REQUIRE(run("measure", o, log) == kOk);
        return dir / name;
    };
    const fs::path a = go("a", 7), b = go("b", 7), c = go("c", 8);
    CHECK(slurp(a / "measure.csv") == slurp(b / "measure.csv"));
    CHECK(slurp(a / "measure.csv") != slurp(c / "measure.csv"));

    const json m = json::parse(slurp(a / "manifest.json"));
    CHECK(m["seed"] == 7);
    CHECK(m["status"] == "ok");
    CHECK(m["config_hash"] == config_hash(m["config"]));
    for (const auto& f : m["artifacts"]) CHECK(fs::exists(a / f.get<std::string>()));

    std::vector<std::string> skipped;
    CHECK(collect_report({}, skipped).empty());
    std::ostringstream empty;
    write_report({}, empty);
    CHECK(empty.str() == "experiment,seed,quantity,fitted,predicted,run_dir\n");

    const auto rows = collect_report({a.string(), c.string(), (dir / "nothing").string()}, skipped);
    REQUIRE(skipped.size() == 1);
    REQUIRE_FALSE(rows.empty());
    CHECK(rows.size() % 2 == 0);
    CHECK(rows.front().seed == 7);
    CHECK(rows.back().seed == 8);
}
