#include <doctest.h>

#include <filesystem>

#include "charm/config.hpp"
#include "charm/error.hpp"
#include "charm/io.hpp"

using namespace charm;

namespace {

std::string config_error(const std::string& json) {
    try {
        parse_run_config(json);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
        return e.what();
    }
    FAIL("expected a configuration error for " << json);
    return {};
}

}  // namespace

TEST_CASE("defaults describe the synthetic experiment") {
    const auto c = default_run_config();
    CHECK(c.classes == std::vector<std::string>{"coffee_time", "lunch", "cleanup", "morning_routine"});
    CHECK(c.charm.window == 16);
    CHECK(c.charm.windows == 32);
    CHECK(c.charm.channels == 6);
    CHECK(c.charm.classes == 4);
    CHECK(c.sequence_length == 512);
    CHECK(c.stride == 256);
    CHECK(c.model == ModelKind::Charm);
    CHECK(c.train.epochs == 10);
    CHECK(c.train.batch_size == 1);
    CHECK(c.train.lr == 5e-4);
    CHECK(c.train.seed == 42);
    CHECK(c.mlp.sequence_length == 512);
    CHECK(c.mlp.channels == 6);
    CHECK(c.synth.seed == 42);
    CHECK(c.schema.channel_columns.size() == 6);
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("dump and parse round trip") {
    auto c = parse_run_config(R"({"train": {"epochs": 3, "seed": 7}, "charm": {"low_out": 8}, "model": "mlp"})");
    CHECK(c.train.epochs == 3);
    CHECK(c.train.seed == 7);
    CHECK(c.charm.low_out == 8);
    CHECK(c.model == ModelKind::Mlp);
    const auto text = dump_run_config(c);
    CHECK(dump_run_config(parse_run_config(text)) == text);
    CHECK(dump_run_config(default_run_config()) == dump_run_config(parse_run_config("{}")));
}

TEST_CASE("invalid configurations are rejected and name the offending key") {
    CHECK(config_error(R"({"train": {"epoch": 3}})").find("train.epoch") != std::string::npos);
    CHECK(config_error(R"({"bogus": 1})").find("bogus") != std::string::npos);
    CHECK(config_error(R"({"train": {"epochs": "ten"}})").find("train.epochs") != std::string::npos);
    CHECK(config_error(R"({"train": {"epochs": 0}})").find("epochs") != std::string::npos);
    CHECK(config_error(R"({"model": "cnn"})").find("cnn") != std::string::npos);
    config_error("{not json");
    config_error(R"({"charm": {"channels": 5}})");
    config_error(R"({"data": {"sequence_length": 500}})");
}

TEST_CASE("load_run_config") {
    const auto path = std::filesystem::temp_directory_path() / "charm_test_config.json";
    write_file_atomic(path, R"({"train": {"lr": 0.001}})");
    CHECK(load_run_config(path).train.lr == 0.001);
    std::filesystem::remove(path);
    try {
        load_run_config(path);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Config);
    }
}

TEST_CASE("shipped configuration files parse") {
    const std::filesystem::path dir = CHARM_SOURCE_DIR "/configs";
    const auto d = load_run_config(dir / "default.json");
    CHECK(dump_run_config(d) == dump_run_config(default_run_config()));
    const auto o = load_run_config(dir / "opportunity.json");
    CHECK(o.charm.windows == 160);
    CHECK(o.charm.channels == 18);
    CHECK(o.sequence_length == 2560);
    CHECK(o.classes.size() == 4);
    CHECK(o.schema.delimiter == ' ');
    CHECK(o.schema.channel_columns.size() == 18);
}
