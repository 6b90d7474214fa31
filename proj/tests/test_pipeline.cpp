#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "madelung/pipeline.hpp"

using namespace madelung;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "madelung_test_pipeline" / name;
    fs::remove_all(dir);
    return dir;
}

RunConfig small(const std::string& name) {
    RunConfig cfg;
    cfg.grid = {40, 40, -3, 3, -3, 3};
    cfg.outDir = scratch(name);
    return cfg;
}

// Every number in the report is finite; non-numbers in norm/residual slots are sentinels.
void check_finite(const json& j, const std::string& where) {
    if (j.is_number_float()) {
        CAPTURE(where);
        CHECK(std::isfinite(j.get<double>()));
    } else if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) check_finite(it.value(), where + "." + it.key());
    } else if (j.is_array()) {
        for (std::size_t n = 0; n < j.size(); ++n) check_finite(j[n], where + "[" + std::to_string(n) + "]");
    }
}

}  // namespace

TEST_CASE("combine specs") {
    const CombineSpec a = parse_combine("1,2:1,i");
    CHECK(a.indices == std::vector<std::size_t>{1, 2});
    REQUIRE(a.coeffs.size() == 2);
    CHECK(a.coeffs[1] == std::complex<double>(0, 1));
    const CombineSpec b = parse_combine(" 0 , 3 : 1/sqrt(2), -exp(i*pi/2) ");
    CHECK(b.indices == std::vector<std::size_t>{0, 3});
    CHECK(b.coeffs[0].real() == doctest::Approx(std::sqrt(0.5)));
    CHECK(b.coeffs[1].imag() == doctest::Approx(-1.0));
    for (const char* bad : {"", "1,2", "1,2:1", "a:1", "1:x", "-1:1", "1::1", "1,:1"}) {
        CAPTURE(bad);
        CHECK_THROWS(parse_combine(bad));
    }
}

TEST_CASE("grid refinement halves the spacing") {
    const GridRequest g{31, 15, -2, 2, 0, 1};
    const GridRequest r = g.refined();
    CHECK(r.nx == 63);
    CHECK(r.ny == 31);
    CHECK(r.spec().dx == doctest::Approx(g.spec().dx / 2));
    CHECK(r.spec().dy == doctest::Approx(g.spec().dy / 2));
    CHECK(r.spec().x0 == doctest::Approx(-2 + g.spec().dx / 2));
}

TEST_CASE("config validation") {
    RunConfig cfg = small("validate");
    CHECK_THROWS(cfg.validate());  // empty --psi
    cfg.psi = "1";
    CHECK_NOTHROW(cfg.validate());
    cfg.source = StateSource::Solve;
    CHECK_THROWS(cfg.validate());
    cfg.potential = "x^2";
    cfg.solver.count = 21;
    CHECK_THROWS(cfg.validate());
    cfg.solver.count = 2;
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("analyze exit codes") {
    SUBCASE("smooth state") {
        RunConfig cfg = small("smooth");
        cfg.psi = "exp(-(x^2+y^2)/2 + i*(x - 0.5*y))";
        const RunResult r = cmd_analyze(cfg);
        CHECK(r.exitCode == kExitOk);
        CHECK(r.report["jtilde"]["available"] == true);
        CHECK(fs::exists(cfg.outDir / "report.json"));
    }
    SUBCASE("vortex") {
        RunConfig cfg = small("vortex");
        cfg.source = StateSource::Builtin;
        cfg.builtin = "ho_vortex";
        const RunResult r = cmd_analyze(cfg);
        CHECK(r.exitCode == kExitVortex);
        CHECK(r.report["vortices"]["total_winding"] == 1);
        CHECK(r.report["jtilde"]["available"] == false);
        CHECK(r.report["norms"]["divJtilde"] == "n/a");
    }
    SUBCASE("parse error") {
        RunConfig cfg = small("parse");
        cfg.psi = "sin(x,";
        const RunResult r = cmd_analyze(cfg);
        CHECK(r.exitCode == kExitFailure);
        CHECK(r.message.find("offset 6") != std::string::npos);
    }
    SUBCASE("empty interior") {
        RunConfig cfg = small("empty");
        cfg.psi = "0*x";
        const RunResult r = cmd_analyze(cfg);
        CHECK(r.exitCode == kExitFailure);
        CHECK(r.message.find("empty interior") != std::string::npos);
    }
}

TEST_CASE("solve exit codes") {
    RunConfig cfg = small("solve");
    cfg.source = StateSource::Solve;
    cfg.potential = "0.5*(x^2+y^2)";
    cfg.solver.count = 3;
    SUBCASE("ground state") {
        const RunResult r = cmd_solve(cfg);
        CHECK(r.exitCode == kExitOk);
        CHECK(r.report["energies"]["values"].size() == 3);
        CHECK(r.report["energy"].get<double>() == doctest::Approx(1.0).epsilon(0.02));
    }
    SUBCASE("vortex combination") {
        cfg.combine = parse_combine("1,2:1,i");
        const RunResult r = cmd_solve(cfg);
        CHECK(r.exitCode == kExitVortex);
        CHECK(r.report["energies"]["combined"]["indices"].size() == 2);
    }
    SUBCASE("non-degenerate combination is refused") {
        cfg.combine = parse_combine("0,1:1,1");
        CHECK(cmd_solve(cfg).exitCode == kExitFailure);
    }
    SUBCASE("no convergence keeps the partial result") {
        cfg.solver.maxIter = 1;
        const RunResult r = cmd_solve(cfg);
        CHECK(r.exitCode == kExitNoConvergence);
        CHECK(r.report["energies"]["values"].size() == 3);
        CHECK(r.report.contains("error"));
        CHECK(fs::exists(cfg.outDir / "report.json"));
    }
}

TEST_CASE("reports are deterministic and their manifests round trip") {
    RunConfig cfg = small("determinism");
    cfg.psi = "exp(-(x^2+y^2)/3 + i*(0.4*x*y + y))";
    cfg.potential = "x^2/4";
    cfg.energy = 0.7;
    const RunResult a = cmd_analyze(cfg);
    const RunResult b = cmd_analyze(cfg);
    REQUIRE(a.exitCode == kExitOk);
    CHECK(strip_volatile(a.report) == strip_volatile(b.report));
    CHECK(a.report["manifest_hash"] == b.report["manifest_hash"]);
    CHECK_FALSE(strip_volatile(a.report).contains("timestamp"));
    check_finite(a.report, "report");

    const json& man = a.report["manifest"];
    REQUIRE(man.size() > 10);
    for (const auto& e : man) {
        const fs::path p = e["path"].get<std::string>();
        CAPTURE(p);
        REQUIRE(fs::exists(p));
        const ScalarField f = io::read_binary(p);
        CHECK(f.spec == cfg.grid.spec());
        const fs::path again = io::write_field(f, cfg.outDir / "again", io::DumpFormat::Binary);
        const auto bytes = [](const fs::path& q) {
            std::ifstream in(q, std::ios::binary);
            return std::string(std::istreambuf_iterator<char>(in), {});
        };
        CHECK(bytes(p) == bytes(again));
    }
    for (const char* k : {"orth", "crStrict", "harmS", "harmI", "defectC", "defectA", "divJ", "divJtilde",
                          "divJtildeReduced", "qhjResidual", "gradS", "U"}) {
        CAPTURE(k);
        const json& n = a.report["norms"][k];
        CHECK((n.is_object() || n == "masked" || n == "n/a"));
    }
    for (const char* p : {"P1", "P2", "P3", "P4", "P5"}) CHECK(a.report["verdicts"].contains(p));
}

TEST_CASE("convergence table") {
    RunConfig cfg = small("convergence");
    cfg.grid = {15, 15, -2, 2, -2, 2};
    cfg.source = StateSource::Builtin;
    cfg.builtin = "exp_z";
    std::ostringstream out, err;
    REQUIRE(cmd_convergence(cfg, out, err) == kExitOk);
    std::istringstream in(out.str());
    std::string header, line;
    std::getline(in, header);
    CHECK(header.rfind("level,nx,ny,h,orth,orth_order,crStrict,crStrict_order", 0) == 0);
    std::vector<std::string> rows;
    while (std::getline(in, line))
        if (!line.empty()) rows.push_back(line);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].rfind("1,31,31,", 0) == 0);
    CHECK(rows[2].rfind("2,63,63,", 0) == 0);

    cfg.convergenceLevels = 1;
    CHECK(cmd_convergence(cfg, out, err) == kExitFailure);
}
