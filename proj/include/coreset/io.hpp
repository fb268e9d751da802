#pragma once

#include <iosfwd>
#include <string>

#include "coreset/types.hpp"

namespace coreset {

/// Matrix file: first line `# rows=<n> cols=<d>`, then n lines of d comma-separated floats.
Matrix read_matrix(const std::string& path);
Matrix parse_matrix(std::istream& in, bool header_required);
void write_matrix(const std::string& path, const Matrix& m);
void write_matrix(std::ostream& out, const Matrix& m);

/// Stream file: one row per line, header optional.
Matrix read_stream(const std::string& path);

/// Single column of floats (one per line, optional matrix header).
Vector read_vector(const std::string& path);

}  // namespace coreset
