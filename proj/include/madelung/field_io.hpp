#pragma once

#include <filesystem>
#include <stdexcept>

#include "madelung/grid.hpp"

namespace madelung::io {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Text CSV: header line "# nx ny x0 y0 dx dy", then one comma-separated line
// per grid row (j ascending), NaN at masked cells.
void write_csv(const ScalarField& f, const std::filesystem::path& path);
ScalarField read_csv(const std::filesystem::path& path);

// Binary: "MFLD1", nx and ny as u64 LE, x0 y0 dx dy as f64 LE, then nx*ny
// f64 LE row-major. NaN marks a masked cell.
void write_binary(const ScalarField& f, const std::filesystem::path& path);
ScalarField read_binary(const std::filesystem::path& path);

/// "x y value" lines with a blank line between grid rows (gnuplot splot/pm3d).
void write_gnuplot(const ScalarField& f, const std::filesystem::path& path);

enum class DumpFormat { Csv, Binary, Gnuplot };

DumpFormat parse_dump_format(const std::string& name);
const char* extension(DumpFormat fmt);

/// Writes with the given format; `stem` gets the format's extension appended.
std::filesystem::path write_field(const ScalarField& f, const std::filesystem::path& stem,
                                  DumpFormat fmt);

/// Complex fields are two scalar files, `<stem>.re.<ext>` and `<stem>.im.<ext>`.
std::pair<std::filesystem::path, std::filesystem::path> write_complex(
    const ComplexField& f, const std::filesystem::path& stem, DumpFormat fmt);

}  // namespace madelung::io
