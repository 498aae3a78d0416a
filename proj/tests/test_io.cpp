#include <doctest.h>

#include <annulus/error.hpp>
#include <annulus/io.hpp>

#include "support.hpp"

#include <cmath>
#include <cstring>
#include <limits>

using namespace annulus;

TEST_SUITE("io") {

TEST_CASE("format_double round-trips bit-exactly") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 20000; ++i) {
        std::uint64_t bits = rng();
        double v;
        std::memcpy(&v, &bits, sizeof v);
        if (!std::isfinite(v)) continue;
        const double back = parse_double(format_double(v));
        CHECK(std::memcmp(&v, &back, sizeof v) == 0);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-2.5) == "-2.5");
}

TEST_CASE("non-finite values are spelled out") {
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(std::isinf(parse_double("inf")));
    CHECK(std::isnan(parse_double(format_double(std::nan("")))));
}

TEST_CASE("parse_double tolerates cell padding") {
    CHECK(parse_double(" 2\r") == 2.0);
}

TEST_CASE("parse_double rejects junk") {
    for (const char* bad : {"", "1.5x", "abc", "1,5", "2 3"}) {
        try {
            parse_double(bad);
            FAIL("accepted '" << bad << "'");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Schema);
        }
    }
}

TEST_CASE("config_hash is 64-bit FNV-1a") {
    // Published FNV-1a test vectors.
    CHECK(config_hash("") == "cbf29ce484222325");
    CHECK(config_hash("a") == "af63dc4c8601ec8c");
    CHECK(config_hash("foobar") == "85944171f73967e8");
}

TEST_CASE("provenance tag carries version, seed and hash") {
    Provenance p{7, "00ff"};
    CHECK(p.tag() == std::string("annulus ") + kToolVersion + " seed=7 config=00ff");
}

TEST_CASE("atomic write replaces content and leaves no temp files") {
    const auto dir = testing::scratch("io_atomic");
    write_file_atomic(dir / "x.txt", "first");
    write_file_atomic(dir / "x.txt", "second");
    CHECK(read_file(dir / "x.txt") == "second");
    int entries = 0;
    for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
    CHECK(entries == 1);
}

TEST_CASE("I/O failures map to exit code 2") {
    try {
        read_file("/nonexistent/dir/file");
        FAIL("no throw");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Io);
        CHECK(exit_code(e.kind()) == 2);
    }
    CHECK_THROWS_AS(write_file_atomic("/nonexistent/dir/file", "x"), Error);
    CHECK(exit_code(ErrorKind::Schema) == 3);
    CHECK(exit_code(ErrorKind::Data) == 4);
    CHECK(exit_code(ErrorKind::Numerical) == 5);
}

}
