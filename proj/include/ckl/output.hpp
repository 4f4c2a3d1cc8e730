#ifndef CKL_OUTPUT_HPP
#define CKL_OUTPUT_HPP

#include <string>

namespace ckl {

// Writes to `path + ".tmp"` and renames over `path`.
void write_file_atomic(const std::string& path, const std::string& contents);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double x);

}  // namespace ckl

#endif  // CKL_OUTPUT_HPP
