#include "madelung/field_io.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace madelung::io {

namespace {

constexpr std::array<char, 5> kMagic{'M', 'F', 'L', 'D', '1'};

static_assert(std::endian::native == std::endian::little,
              "binary field format assumes a little-endian host");

std::string format_double(double v) {
    if (std::isnan(v)) return "NaN";
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw FormatError("cannot format value");
    return std::string(buf.data(), end);
}

// strtod rather than stod: stod rejects subnormals as out of range.
double parse_double(const std::string& tok) {
    if (tok == "NaN" || tok == "nan") return std::numeric_limits<double>::quiet_NaN();
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || end != tok.c_str() + tok.size() || std::isspace(static_cast<unsigned char>(tok[0])) ||
        (errno == ERANGE && std::isinf(v)))
        throw FormatError("bad number '" + tok + "'");
    return v;
}

ScalarField make_field(const GridSpec& spec, std::vector<double> values) {
    ScalarField f(spec);
    f.values = std::move(values);
    for (std::size_t k = 0; k < f.size(); ++k) f.mask[k] = std::isnan(f.values[k]) ? 0 : 1;
    return f;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    return out;
}

template <class T>
void put(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("truncated binary field");
    return v;
}

double stored_value(const ScalarField& f, std::size_t k) {
    return f.valid(k) ? f[k] : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

void write_csv(const ScalarField& f, const std::filesystem::path& path) {
    auto out = open_out(path, false);
    const auto& s = f.spec;
    out << "# " << s.nx << ' ' << s.ny << ' ' << format_double(s.x0) << ' ' << format_double(s.y0)
        << ' ' << format_double(s.dx) << ' ' << format_double(s.dy) << '\n';
    for (std::size_t j = 0; j < s.ny; ++j) {
        for (std::size_t i = 0; i < s.nx; ++i) {
            if (i) out << ',';
            out << format_double(stored_value(f, s.index(i, j)));
        }
        out << '\n';
    }
}

ScalarField read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw FormatError("missing CSV header");
    std::istringstream hdr(line.substr(2));
    GridSpec s;
    std::string x0, y0, dx, dy;
    if (!(hdr >> s.nx >> s.ny >> x0 >> y0 >> dx >> dy)) throw FormatError("malformed CSV header");
    s.x0 = parse_double(x0);
    s.y0 = parse_double(y0);
    s.dx = parse_double(dx);
    s.dy = parse_double(dy);
    s.validate();

    std::vector<double> values;
    values.reserve(s.size());
    for (std::size_t j = 0; j < s.ny; ++j) {
        if (!std::getline(in, line)) throw FormatError("CSV has too few rows");
        std::istringstream row(line);
        std::string tok;
        std::size_t count = 0;
        while (std::getline(row, tok, ',')) {
            values.push_back(parse_double(tok));
            ++count;
        }
        if (count != s.nx) throw FormatError("CSV row " + std::to_string(j) + " has wrong length");
    }
    return make_field(s, std::move(values));
}

void write_binary(const ScalarField& f, const std::filesystem::path& path) {
    auto out = open_out(path, true);
    const auto& s = f.spec;
    out.write(kMagic.data(), kMagic.size());
    put<std::uint64_t>(out, s.nx);
    put<std::uint64_t>(out, s.ny);
    put(out, s.x0);
    put(out, s.y0);
    put(out, s.dx);
    put(out, s.dy);
    for (std::size_t k = 0; k < f.size(); ++k) put(out, stored_value(f, k));
    if (!out) throw FormatError("write failed for " + path.string());
}

ScalarField read_binary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::array<char, 5> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw FormatError("bad magic");
    GridSpec s;
    s.nx = get<std::uint64_t>(in);
    s.ny = get<std::uint64_t>(in);
    s.x0 = get<double>(in);
    s.y0 = get<double>(in);
    s.dx = get<double>(in);
    s.dy = get<double>(in);
    s.validate();
    std::vector<double> values(s.size());
    for (auto& v : values) v = get<double>(in);
    return make_field(s, std::move(values));
}

void write_gnuplot(const ScalarField& f, const std::filesystem::path& path) {
    auto out = open_out(path, false);
    const auto& s = f.spec;
    for (std::size_t j = 0; j < s.ny; ++j) {
        for (std::size_t i = 0; i < s.nx; ++i) {
            out << format_double(s.x(i)) << ' ' << format_double(s.y(j)) << ' '
                << format_double(stored_value(f, s.index(i, j))) << '\n';
        }
        out << '\n';
    }
}

DumpFormat parse_dump_format(const std::string& name) {
    if (name == "csv") return DumpFormat::Csv;
    if (name == "bin") return DumpFormat::Binary;
    if (name == "gnuplot") return DumpFormat::Gnuplot;
    throw FormatError("unknown dump format '" + name + "'");
}

const char* extension(DumpFormat fmt) {
    switch (fmt) {
        case DumpFormat::Csv: return ".csv";
        case DumpFormat::Binary: return ".bin";
        case DumpFormat::Gnuplot: return ".dat";
    }
    return "";
}

std::filesystem::path write_field(const ScalarField& f, const std::filesystem::path& stem,
                                  DumpFormat fmt) {
    std::filesystem::path path = stem;
    path += extension(fmt);
    switch (fmt) {
        case DumpFormat::Csv: write_csv(f, path); break;
        case DumpFormat::Binary: write_binary(f, path); break;
        case DumpFormat::Gnuplot: write_gnuplot(f, path); break;
    }
    return path;
}

std::pair<std::filesystem::path, std::filesystem::path> write_complex(
    const ComplexField& f, const std::filesystem::path& stem, DumpFormat fmt) {
    auto re = stem;
    re += ".re";
    auto im = stem;
    im += ".im";
    return {write_field(f.real(), re, fmt), write_field(f.imag(), im, fmt)};
}

}  // namespace madelung::io
