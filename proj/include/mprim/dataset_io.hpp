#pragma once

// JSON-lines dataset persistence. Line 1 is a header object, every following
// line one sample. See docs/formats.md for the exact schema.

#include "mprim/dataset.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace mprim {

inline constexpr const char* kDatasetFormat = "mprim.dataset";
inline constexpr int kDatasetVersion = 1;

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

inline std::string to_string(DatasetKind kind) { return kind == DatasetKind::Rtp ? "rtp" : "wpp"; }

inline DatasetKind dataset_kind_from_string(const std::string& s) {
  if (s == "rtp") return DatasetKind::Rtp;
  if (s == "wpp") return DatasetKind::Wpp;
  throw std::invalid_argument("unknown dataset kind '" + s + "' (expected rtp or wpp)");
}

inline std::string to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::Unassigned: return "none";
    case SplitTag::Train: return "train";
    case SplitTag::Validation: return "validation";
    case SplitTag::Test: return "test";
  }
  return "none";
}

inline SplitTag split_tag_from_string(const std::string& s) {
  if (s == "none") return SplitTag::Unassigned;
  if (s == "train") return SplitTag::Train;
  if (s == "validation") return SplitTag::Validation;
  if (s == "test") return SplitTag::Test;
  throw std::invalid_argument("unknown split tag '" + s + "'");
}

inline nlohmann::json sample_to_json(const DemoSample& s, std::size_t index, DatasetKind kind) {
  const Eigen::MatrixXd& v = s.trajectory.values;
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(v.size()));
  for (Eigen::Index r = 0; r < v.rows(); ++r) {
    for (Eigen::Index c = 0; c < v.cols(); ++c) flat.push_back(v(r, c));
  }
  nlohmann::json tags;
  if (kind == DatasetKind::Rtp) {
    tags = {{"region", s.tags.region}};
  } else {
    tags = {{"pattern", s.tags.pattern},
            {"configuration", s.tags.configuration},
            {"path_scale", s.tags.path_scale}};
  }
  return {{"index", index},
          {"context", std::vector<double>(s.context.data(), s.context.data() + s.context.size())},
          {"rows", v.rows()},
          {"cols", v.cols()},
          {"sampling_frequency", s.trajectory.phase.sampling_frequency},
          {"trajectory", flat},
          {"tags", tags},
          {"split", to_string(s.split)}};
}

inline DemoSample sample_from_json(const nlohmann::json& j, DatasetKind kind) {
  DemoSample s;
  const auto ctx = j.at("context").get<std::vector<double>>();
  s.context = Eigen::Map<const Eigen::VectorXd>(ctx.data(), static_cast<Eigen::Index>(ctx.size()));
  const auto rows = j.at("rows").get<int>();
  const auto cols = j.at("cols").get<int>();
  const auto flat = j.at("trajectory").get<std::vector<double>>();
  if (rows < 2 || cols < 1 || flat.size() != static_cast<std::size_t>(rows) * cols) {
    throw std::invalid_argument("trajectory has " + std::to_string(flat.size()) +
                                " values, expected rows*cols = " +
                                std::to_string(static_cast<long>(rows) * cols));
  }
  Eigen::MatrixXd values(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) values(r, c) = flat[static_cast<std::size_t>(r) * cols + c];
  }
  s.trajectory = Trajectory(std::move(values),
                            PhaseConfig{j.at("sampling_frequency").get<double>(), rows});
  const auto& tags = j.at("tags");
  if (kind == DatasetKind::Rtp) {
    s.tags.region = tags.at("region").get<std::string>();
  } else {
    s.tags.pattern = tags.at("pattern").get<int>();
    s.tags.configuration = tags.at("configuration").get<int>();
    s.tags.path_scale = tags.at("path_scale").get<double>();
  }
  s.split = split_tag_from_string(j.value("split", "none"));
  return s;
}

inline void write_jsonl(std::ostream& out, const DemoDataset& ds) {
  const nlohmann::json header = {{"format", kDatasetFormat},
                                 {"version", kDatasetVersion},
                                 {"kind", to_string(ds.kind)},
                                 {"seed", ds.seed},
                                 {"count", ds.samples.size()}};
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    out << sample_to_json(ds.samples[i], i, ds.kind).dump() << '\n';
  }
}

inline DemoDataset read_jsonl(std::istream& in) {
  DemoDataset ds;
  std::string line;
  std::size_t line_no = 0;
  std::size_t expected = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const nlohmann::json j = nlohmann::json::parse(line);
      if (!have_header) {
        if (j.value("format", "") != kDatasetFormat) {
          throw std::invalid_argument("missing dataset header");
        }
        if (j.at("version").get<int>() != kDatasetVersion) {
          throw std::invalid_argument("unsupported dataset version " + j.at("version").dump());
        }
        ds.kind = dataset_kind_from_string(j.at("kind").get<std::string>());
        ds.seed = j.at("seed").get<std::uint64_t>();
        expected = j.at("count").get<std::size_t>();
        have_header = true;
        continue;
      }
      if (j.at("index").get<std::size_t>() != ds.samples.size()) {
        throw std::invalid_argument("record index out of sequence");
      }
      ds.samples.push_back(sample_from_json(j, ds.kind));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (!have_header) throw ParseError(line_no + 1, "missing dataset header");
  if (ds.samples.size() != expected) {
    throw ParseError(line_no, "header announces " + std::to_string(expected) + " records, found " +
                                  std::to_string(ds.samples.size()));
  }
  return ds;
}

inline void save_jsonl(const DemoDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset " + path);
  write_jsonl(out, ds);
  if (!out) throw std::runtime_error("write failed for dataset " + path);
}

inline DemoDataset load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset " + path);
  return read_jsonl(in);
}

}  // namespace mprim
