#include "ckl/instance_io.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace ckl {

using nlohmann::json;

namespace {

std::vector<DocEntry> parse_docs(const json& arr, const char* field) {
  if (!arr.is_array()) throw std::runtime_error(std::string("field '") + field + "' must be an array");
  std::vector<DocEntry> docs;
  for (const auto& d : arr) {
    if (!d.is_object()) throw std::runtime_error("document entries must be objects");
    for (const auto& [key, value] : d.items()) {
      if (key != "doc_id" && key != "teacher_score" && key != "student_score") {
        throw std::runtime_error("unknown document key '" + key + "'");
      }
    }
    DocEntry e;
    e.doc_id = d.at("doc_id").get<std::string>();
    e.teacher_score = d.at("teacher_score").get<double>();
    e.student_score = d.at("student_score").get<double>();
    docs.push_back(std::move(e));
  }
  return docs;
}

json docs_json(const std::vector<DocEntry>& docs) {
  json arr = json::array();
  for (const auto& d : docs) {
    arr.push_back({{"doc_id", d.doc_id}, {"teacher_score", d.teacher_score},
                   {"student_score", d.student_score}});
  }
  return arr;
}

}  // namespace

DistillationInstance parse_instance(const std::string& line) {
  DistillationInstance inst;
  try {
    const json j = json::parse(line);
    if (!j.is_object()) throw std::runtime_error("instance must be a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (key != "query_id" && key != "positives" && key != "negatives") {
        throw std::runtime_error("unknown instance key '" + key + "'");
      }
    }
    inst.query_id = j.at("query_id").get<std::string>();
    inst.positives = parse_docs(j.at("positives"), "positives");
    inst.negatives = parse_docs(j.at("negatives"), "negatives");
  } catch (const json::exception& e) {
    throw std::runtime_error(e.what());
  }
  inst.validate();
  return inst;
}

std::vector<DistillationInstance> read_instances(std::istream& in) {
  std::vector<DistillationInstance> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_instance(line));
    } catch (const std::exception& e) {
      throw std::runtime_error("malformed instance on line " + std::to_string(lineno) + ": " +
                               e.what());
    }
  }
  return out;
}

std::vector<DistillationInstance> read_instances_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instances file '" + path + "'");
  return read_instances(in);
}

std::string format_instance(const DistillationInstance& inst) {
  const json j = {{"query_id", inst.query_id},
                  {"positives", docs_json(inst.positives)},
                  {"negatives", docs_json(inst.negatives)}};
  return j.dump();
}

void write_instances(std::ostream& out, const std::vector<DistillationInstance>& instances) {
  for (const auto& inst : instances) out << format_instance(inst) << '\n';
}

}  // namespace ckl
