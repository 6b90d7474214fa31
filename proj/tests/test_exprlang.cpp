#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "madelung/exprlang.hpp"

using namespace madelung;
using expr::parse;
using C = std::complex<double>;

namespace {

std::size_t error_offset(const std::string& src) {
    try {
        (void)parse(src);
    } catch (const expr::ParseError& e) {
        return e.offset();
    }
    FAIL("expected a parse error for " << src);
    return 0;
}

std::string literal(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return v < 0 ? "(" + std::string(buf) + ")" : std::string(buf);
}

}  // namespace

TEST_CASE("evaluation examples") {
    CHECK(parse("0.5*(x^2+y^2)").eval(1, 2) == C(2.5, 0.0));
    CHECK(parse("exp(i*(2*x+3*y))").eval(0, 0) == C(1.0, 0.0));
    const C v = parse("(x+i*y)*exp(-(x^2+y^2)/2)").eval(1, 0);
    CHECK(v.real() == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
    CHECK(v.imag() == 0.0);
}

TEST_CASE("precedence and associativity") {
    CHECK(parse("2^3^2").eval(0, 0).real() == 512.0);
    CHECK(parse("-x^2").eval(3, 0).real() == -9.0);
    CHECK(parse("2^-1").eval(0, 0).real() == 0.5);
    CHECK(parse("8/4/2").eval(0, 0).real() == 1.0);
    CHECK(parse("1-2-3").eval(0, 0).real() == -4.0);
    CHECK(parse("--x").eval(2, 0).real() == 2.0);
    CHECK(parse("2*pi").eval(0, 0).real() == doctest::Approx(2 * M_PI));
    CHECK(parse("e").eval(0, 0).real() == doctest::Approx(M_E));
    CHECK(parse(" 1.5e2 + x ").eval(1, 0).real() == 151.0);
}

TEST_CASE("a+b*c equals a+(b*c) for random literals") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int n = 0; n < 200; ++n) {
        const std::string a = literal(u(rng)), b = literal(u(rng)), c = literal(u(rng));
        CHECK(parse(a + "+" + b + "*" + c).eval(0, 0) == parse(a + "+(" + b + "*" + c + ")").eval(0, 0));
        CHECK(parse(a + "-" + b + "/" + c).eval(0, 0) == parse(a + "-(" + b + "/" + c + ")").eval(0, 0));
        CHECK(parse(a + "*" + b + "^2").eval(0, 0) == parse(a + "*(" + b + "^2)").eval(0, 0));
    }
}

TEST_CASE("complex functions use principal branches") {
    const C s = parse("sqrt(-4)").eval(0, 0);
    CHECK(s.real() == doctest::Approx(0.0));
    CHECK(s.imag() == doctest::Approx(2.0));
    const C l = parse("ln(-1)").eval(0, 0);
    CHECK(l.imag() == doctest::Approx(M_PI));
    CHECK(parse("atan2(1, -1+3*i)").eval(0, 0).real() == doctest::Approx(std::atan2(1.0, -1.0)));
    CHECK(parse("re(conj(2+3*i))*im(conj(2+3*i))").eval(0, 0).real() == -6.0);
    CHECK(parse("abs(3+4*i)").eval(0, 0) == C(5.0, 0.0));
    const C p = parse("i^i").eval(0, 0);
    CHECK(p.real() == doctest::Approx(std::exp(-M_PI / 2)));
    CHECK(p.imag() == doctest::Approx(0.0));
    CHECK(parse("(1+i)^2").eval(0, 0) == C(0.0, 2.0));
}

TEST_CASE("real expressions have exactly zero imaginary part") {
    const char* cases[] = {"sin(x)*cos(y)-tan(x*y)", "exp(-(x^2+y^2)/2)", "sqrt(x^2+1)", "ln(abs(x)+2)",
                           "x^0.5 + y^3 - 1/(x+4)", "atan2(y, x) + re(x) + im(y)", "(x-y)^(-2)"};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (const char* src : cases) {
        const auto e = parse(src);
        for (int n = 0; n < 20; ++n) CHECK(e.eval(u(rng), u(rng)).imag() == 0.0);
    }
}

TEST_CASE("division by zero is non-finite, not an error") {
    const C v = parse("1/x").eval(0, 0);
    const bool finite = std::isfinite(v.real()) && std::isfinite(v.imag());
    CHECK_FALSE(finite);
}

TEST_CASE("evaluation is deterministic") {
    const auto e = parse("sin(3*x+i*y)^2/(1+x^2)");
    const C a = e.eval(0.3, -1.2);
    for (int n = 0; n < 10; ++n) CHECK(e.eval(0.3, -1.2) == a);
}

TEST_CASE("parse errors carry offsets") {
    CHECK(error_offset("sin(x,") == 6);
    CHECK(error_offset("foo(x)") == 0);
    CHECK(error_offset("x + bar") == 4);
    CHECK(error_offset("atan2(x)") == 0);
    CHECK(error_offset("sin(x, y)") == 0);
    CHECK(error_offset("(x+1") == 4);
    CHECK(error_offset("x+*y") == 2);
    CHECK(error_offset("x y") == 2);
    CHECK(error_offset("") == 0);
    for (const char* src : {"sin(x,", "((", "1+", "x)", "2..3", "$"}) CHECK(error_offset(src) <= std::string(src).size());
}

TEST_CASE("unparse round trips") {
    const char* cases[] = {"0.5*(x^2+y^2)", "exp(i*(2*x+3*y))", "-x^2", "2^3^2", "(2^3)^2", "1-(2-3)",
                           "atan2(y,x)*conj(x+i*y)", "0.1+1e-300*pi-e", "--x/-y"};
    for (const char* src : cases) {
        const auto a = parse(src);
        const auto b = parse(a.unparse());
        CHECK(a == b);
        CHECK(b.unparse() == a.unparse());
        CHECK(b.eval(0.7, -0.3) == a.eval(0.7, -0.3));
    }
    CHECK_FALSE(parse("x+y") == parse("y+x"));
}

TEST_CASE("eval_field masks non-finite cells") {
    GridSpec s;
    s.nx = 5;
    s.ny = 3;
    s.x0 = -2;
    s.y0 = 0;
    s.dx = s.dy = 1;
    const ComplexField one = parse("1").eval_field(s);
    CHECK(one.valid_count() == 15);
    for (std::size_t k = 0; k < 15; ++k) CHECK(one[k] == C(1.0, 0.0));
    const ComplexField inv = parse("1/x").eval_field(s);
    CHECK(inv.valid_count() == 12);
    for (std::size_t j = 0; j < 3; ++j) CHECK_FALSE(inv.valid(s.index(2, j)));

    GridSpec g = s;
    g.x0 = g.y0 = -6.0;
    g.dx = g.dy = 0.125;
    const ComplexField gauss = parse("exp(-(x^2+y^2)/2)").eval_field(g);
    CHECK(gauss[0].real() == doctest::Approx(2.3195228302435696e-16).epsilon(1e-12));
}
