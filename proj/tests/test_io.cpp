#include <doctest.h>

#include <bit>
#include <cmath>
#include <filesystem>
#include <limits>

#include "charm/error.hpp"
#include "charm/io.hpp"
#include "charm/neurocore.hpp"

using namespace charm;

TEST_CASE("format_double round-trips exactly") {
    SeededRng rng(1);
    for (int i = 0; i < 20000; ++i) {
        const double v = std::bit_cast<double>(rng.next_u64());
        if (!std::isfinite(v)) continue;
        CHECK(std::bit_cast<std::uint64_t>(parse_double(format_double(v))) == std::bit_cast<std::uint64_t>(v));
    }
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1e300) == "1e+300");
    CHECK(std::signbit(parse_double(format_double(-0.0))));
}

TEST_CASE("parse_double is strict") {
    CHECK(parse_double("2.5") == 2.5);
    CHECK(parse_double("-1e-3") == -1e-3);
    for (const char* bad : {"", "abc", "1.0x", " 1", "1 ", "--1"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(parse_double(bad), Error);
    }
}

TEST_CASE("write_file_atomic") {
    const auto dir = std::filesystem::temp_directory_path() / "charm_test_io" / "nested";
    std::filesystem::remove_all(dir.parent_path());
    const auto path = dir / "out.bin";
    const std::string payload("a\0b\nc", 5);
    write_file_atomic(path, payload);
    CHECK(read_file(path) == payload);
    write_file_atomic(path, "second");
    CHECK(read_file(path) == "second");
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    try {
        read_file(dir / "missing");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Io);
    }
    std::filesystem::remove_all(dir.parent_path());
}

TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}
