#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "madelung/field_io.hpp"

using namespace madelung;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "madelung_test_field_io";
    fs::create_directories(dir);
    return dir / name;
}

ScalarField noisy_field() {
    const GridSpec s = GridSpec::from_domain(13, 7, -1.3, 2.9, 0.1, 0.9);
    ScalarField f(s);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (std::size_t k = 0; k < s.size(); ++k) f[k] = u(rng) * std::pow(10.0, static_cast<int>(k % 40) - 20);
    f[4] = -0.0;
    f[5] = 5e-324;
    f[6] = std::numeric_limits<double>::max();
    f.invalidate(9);
    f.invalidate(50);
    return f;
}

bool bit_equal(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

void check_identical(const ScalarField& a, const ScalarField& b) {
    CHECK(a.spec == b.spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(a.valid(k) == b.valid(k));
        if (a.valid(k)) CHECK(bit_equal(a[k], b[k]));
    }
}

}  // namespace

TEST_CASE("binary round trip is bit exact") {
    const ScalarField f = noisy_field();
    const fs::path p = scratch("f.bin");
    io::write_binary(f, p);
    check_identical(f, io::read_binary(p));
}

TEST_CASE("csv round trip is bit exact") {
    const ScalarField f = noisy_field();
    const fs::path p = scratch("f.csv");
    io::write_csv(f, p);
    check_identical(f, io::read_csv(p));
}

TEST_CASE("truncated or foreign binary files are rejected") {
    const ScalarField f = noisy_field();
    const fs::path p = scratch("t.bin");
    io::write_binary(f, p);
    fs::resize_file(p, fs::file_size(p) - 8);
    CHECK_THROWS_AS(io::read_binary(p), io::FormatError);
    std::ofstream(scratch("bad.bin"), std::ios::binary) << "NOTAFIELD";
    CHECK_THROWS_AS(io::read_binary(scratch("bad.bin")), io::FormatError);
    CHECK_THROWS_AS(io::read_binary(scratch("missing.bin")), io::FormatError);
}

TEST_CASE("gnuplot tables have one block per row") {
    const GridSpec s = GridSpec::from_domain(3, 3, 0, 4, 0, 4);
    ScalarField f(s, 2.0);
    f.invalidate(1);
    const fs::path p = scratch("g.dat");
    io::write_gnuplot(f, p);
    std::ifstream in(p);
    std::string line;
    std::size_t data = 0, blank = 0;
    while (std::getline(in, line)) {
        if (line.empty()) ++blank;
        else if (line[0] != '#') {
            std::istringstream ls(line);
            double x, y;
            std::string v;
            ls >> x >> y >> v;
            CHECK(ls);
            ++data;
        }
    }
    CHECK(data == 9);
    CHECK(blank >= 1);
}

TEST_CASE("dump formats") {
    CHECK(io::parse_dump_format("csv") == io::DumpFormat::Csv);
    CHECK(io::parse_dump_format("bin") == io::DumpFormat::Binary);
    CHECK(io::parse_dump_format("gnuplot") == io::DumpFormat::Gnuplot);
    CHECK_THROWS(io::parse_dump_format("hdf5"));
    const ScalarField f = noisy_field();
    const fs::path written = io::write_field(f, scratch("stem"), io::DumpFormat::Binary);
    CHECK(written.extension() == ".bin");
    CHECK(fs::exists(written));

    ComplexField psi(f.spec, {1.0, -2.0});
    const auto [re, im] = io::write_complex(psi, scratch("psi"), io::DumpFormat::Csv);
    CHECK(io::read_csv(re)[0] == 1.0);
    CHECK(io::read_csv(im)[0] == -2.0);
}
