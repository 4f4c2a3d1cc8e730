#include <random>
#include <sstream>

#include "doctest.h"

#include "ckl/instance_io.hpp"

using namespace ckl;

TEST_CASE("parse a single instance") {
  const auto inst = parse_instance(
      R"({"query_id": "q1", "positives": [{"doc_id": "a", "teacher_score": 1.5, "student_score": 0.25}],)"
      R"( "negatives": [{"doc_id": "b", "teacher_score": -1, "student_score": 0}]})");
  CHECK(inst.query_id == "q1");
  REQUIRE(inst.positives.size() == 1);
  CHECK(inst.positives[0].teacher_score == 1.5);
  CHECK(inst.negatives[0].doc_id == "b");
}

TEST_CASE("round trip preserves instances exactly") {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> g(0.0, 3.0);
  std::uniform_int_distribution<int> count(1, 5);
  std::vector<DistillationInstance> all;
  for (int t = 0; t < 200; ++t) {
    DistillationInstance inst;
    inst.query_id = "q" + std::to_string(t);
    for (int j = count(rng); j > 0; --j) inst.positives.push_back({"p" + std::to_string(j), g(rng), g(rng)});
    for (int i = count(rng); i > 0; --i) inst.negatives.push_back({"n" + std::to_string(i), g(rng), g(rng)});
    all.push_back(inst);
  }
  std::stringstream buf;
  write_instances(buf, all);
  const auto back = read_instances(buf);
  REQUIRE(back.size() == all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    CHECK(back[i].query_id == all[i].query_id);
    CHECK(back[i].teacher_scores() == all[i].teacher_scores());
    CHECK(back[i].student_scores() == all[i].student_scores());
    CHECK(back[i].doc_ids() == all[i].doc_ids());
    CHECK(format_instance(back[i]) == format_instance(all[i]));
  }
}

TEST_CASE("blank lines are skipped") {
  std::stringstream in;
  in << "\n"
     << R"({"query_id": "q", "positives": [{"doc_id": "a", "teacher_score": 1, "student_score": 1}], )"
     << R"("negatives": [{"doc_id": "b", "teacher_score": 0, "student_score": 0}]})"
     << "\n   \n";
  CHECK(read_instances(in).size() == 1);
}

TEST_CASE("malformed lines name the line number") {
  std::stringstream in;
  in << R"({"query_id": "q", "positives": [{"doc_id": "a", "teacher_score": 1, "student_score": 1}], )"
     << R"("negatives": [{"doc_id": "b", "teacher_score": 0, "student_score": 0}]})" << "\n";
  in << "{not json\n";
  CHECK_THROWS_WITH(read_instances(in), doctest::Contains("line 2"));
}

TEST_CASE("invalid instances are rejected") {
  // no negatives
  CHECK_THROWS(parse_instance(
      R"({"query_id": "q", "positives": [{"doc_id": "a", "teacher_score": 1, "student_score": 1}], "negatives": []})"));
  // unknown key
  CHECK_THROWS(parse_instance(
      R"({"query_id": "q", "positives": [{"doc_id": "a", "teacher_score": 1, "student_score": 1}], )"
      R"("negatives": [{"doc_id": "b", "teacher_score": 0, "student_score": 0}], "extra": 1})"));
  // duplicate doc id
  CHECK_THROWS(parse_instance(
      R"({"query_id": "q", "positives": [{"doc_id": "a", "teacher_score": 1, "student_score": 1}], )"
      R"("negatives": [{"doc_id": "a", "teacher_score": 0, "student_score": 0}]})"));
  // wrong type
  CHECK_THROWS(parse_instance(
      R"({"query_id": "q", "positives": [{"doc_id": "a", "teacher_score": "x", "student_score": 1}], )"
      R"("negatives": [{"doc_id": "b", "teacher_score": 0, "student_score": 0}]})"));
  CHECK_THROWS(read_instances_file("/nonexistent/instances.jsonl"));
}
