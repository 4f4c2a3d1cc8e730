#ifndef CKL_INSTANCE_IO_HPP
#define CKL_INSTANCE_IO_HPP

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "ckl/core.hpp"

namespace ckl {

// One instance per line:
//   {"query_id": "...", "positives": [{"doc_id": "...", "teacher_score": x,
//    "student_score": y}, ...], "negatives": [...]}
// Blank lines are skipped. Malformed lines throw std::runtime_error naming the
// line number. Every parsed instance is validated.
std::vector<DistillationInstance> read_instances(std::istream& in);
std::vector<DistillationInstance> read_instances_file(const std::string& path);

DistillationInstance parse_instance(const std::string& line);
std::string format_instance(const DistillationInstance& inst);
void write_instances(std::ostream& out, const std::vector<DistillationInstance>& instances);

}  // namespace ckl

#endif  // CKL_INSTANCE_IO_HPP
