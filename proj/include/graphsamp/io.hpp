#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "graphsamp/core.hpp"
#include "graphsamp/synthdata.hpp"

namespace graphsamp::io {

using json = nlohmann::json;

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    fail(ErrorCode::ParseError, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to a sibling temp file and renames it over `path`.
inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::ParseError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail(ErrorCode::ParseError, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

// ---- CSV -------------------------------------------------------------------

inline std::string matrix_to_csv(const Matrix& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

inline Matrix matrix_from_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    std::vector<double> row;
    std::size_t cell = 0;
    while (true) {
      const auto comma = line.find(',', cell);
      row.push_back(parse_double(line.substr(cell, comma == std::string_view::npos ? line.npos : comma - cell)));
      if (comma == std::string_view::npos) break;
      cell = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      fail(ErrorCode::ParseError, "ragged CSV: row " + std::to_string(rows.size()) + " has " +
                                      std::to_string(row.size()) + " columns");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::ParseError, "empty CSV");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

inline DenseSymMatrix read_sym_matrix_csv(const std::filesystem::path& path) {
  return DenseSymMatrix(matrix_from_csv(read_file(path)));
}

inline Matrix read_matrix_csv(const std::filesystem::path& path) { return matrix_from_csv(read_file(path)); }

// ---- graph JSON: {"n": N, "edges": [[i, j, w], ...], "q": [...]} ------------

inline json graph_to_json(const GraphModel& g) {
  json edges = json::array();
  const Matrix& a = g.adjacency().mat();
  for (Index i = 0; i < g.n(); ++i)
    for (Index j = i + 1; j < g.n(); ++j)
      if (a(i, j) > 0.0) edges.push_back(json::array({i, j, a(i, j)}));
  json out = {{"n", g.n()}, {"edges", std::move(edges)}};
  if (g.has_importance()) {
    const Vector& q = *g.vertex_importance();
    out["q"] = std::vector<double>(q.data(), q.data() + q.size());
  }
  return out;
}

inline GraphModel graph_from_json(const json& j) {
  try {
    const Index n = j.at("n").get<Index>();
    if (n < 1) fail(ErrorCode::BadSize, "graph n must be >= 1");
    Matrix a = Matrix::Zero(n, n);
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 3) fail(ErrorCode::ParseError, "edge must be [i, j, w]");
      const auto u = e[0].get<Index>();
      const auto v = e[1].get<Index>();
      const double w = e[2].get<double>();
      if (u < 0 || v < 0 || u >= n || v >= n) fail(ErrorCode::IndexOutOfRange, "edge endpoint outside [0, n)");
      if (u == v) fail(ErrorCode::NonzeroDiagonal, "self-loop at " + std::to_string(u));
      a(u, v) = a(v, u) = w;
    }
    std::optional<Vector> q;
    if (j.contains("q") && !j.at("q").is_null()) {
      const auto values = j.at("q").get<std::vector<double>>();
      q = Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
    }
    return build_graph_model(DenseSymMatrix(std::move(a)), std::move(q));
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("graph JSON: ") + e.what());
  }
}

inline GraphModel read_graph(const std::filesystem::path& path) {
  try {
    return graph_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

// ---- sampling set JSON: {"method": ..., "indices": [...], "scores": [...]} --

inline json set_to_json(const SamplingSet& s) {
  return {{"method", s.method}, {"indices", s.indices}, {"scores", s.scores}};
}

inline SamplingSet set_from_json(const json& j) {
  try {
    SamplingSet s;
    s.method = j.value("method", std::string{});
    s.indices = j.at("indices").get<std::vector<Index>>();
    if (j.contains("scores")) s.scores = j.at("scores").get<std::vector<double>>();
    return s;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("sampling set JSON: ") + e.what());
  }
}

inline SamplingSet read_set(const std::filesystem::path& path) {
  try {
    return set_from_json(json::parse(read_file(path)));
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
}

// ---- layout JSON: {"n": N, "seed": s, "points": [[x, y], ...]} ------------

inline json layout_to_json(const NodeLayout& layout) {
  json pts = json::array();
  for (const auto& p : layout.points) pts.push_back(json::array({p.x, p.y}));
  return {{"n", layout.n()}, {"seed", layout.seed}, {"points", std::move(pts)}};
}

inline NodeLayout layout_from_json(const json& j) {
  try {
    NodeLayout layout;
    layout.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& p : j.at("points")) layout.points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    if (layout.n() != j.at("n").get<Index>()) fail(ErrorCode::ParseError, "layout n differs from point count");
    return layout;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("layout JSON: ") + e.what());
  }
}

}  // namespace graphsamp::io
