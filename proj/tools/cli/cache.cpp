#include "cache.hpp"

#include <cstdio>
#include <cstdlib>
#include <string_view>

namespace vpm::cli {

namespace {

void append_hex(std::string& s, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, " %a", v);
  s += buf;
}

}  // namespace

std::string format_node_line(std::size_t index, const QuadratureNode& node, const CMatrix& r) {
  std::string s = std::to_string(index);
  append_hex(s, node.kappa);
  append_hex(s, node.kx0);
  append_hex(s, node.ky0);
  s += ' ' + std::to_string(r.rows());
  for (Eigen::Index j = 0; j < r.cols(); ++j)
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
      append_hex(s, r(i, j).real());
      append_hex(s, r(i, j).imag());
    }
  return s + " end";
}

bool parse_node_line(const std::string& line, int dim, std::size_t& index, QuadratureNode& node, CMatrix& r) {
  const char* p = line.c_str();
  char* end = nullptr;
  const unsigned long long idx = std::strtoull(p, &end, 10);
  if (end == p) return false;
  p = end;
  double coords[3];
  for (double& c : coords) {
    c = std::strtod(p, &end);
    if (end == p) return false;
    p = end;
  }
  const long rows = std::strtol(p, &end, 10);
  if (end == p || rows != dim) return false;
  p = end;
  r.resize(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) {
      const double re = std::strtod(p, &end);
      if (end == p) return false;
      p = end;
      const double im = std::strtod(p, &end);
      if (end == p) return false;
      p = end;
      r(i, j) = {re, im};
    }
  if (std::string_view(p) != " end") return false;
  index = static_cast<std::size_t>(idx);
  node.kappa = coords[0];
  node.kx0 = coords[1];
  node.ky0 = coords[2];
  return true;
}

NodeFileCache::NodeFileCache(const std::filesystem::path& file, const std::vector<QuadratureNode>& nodes, int dim)
    : file_(file), nodes_(nodes), dim_(dim) {
  std::filesystem::create_directories(file_.parent_path());
  {
    std::ifstream in(file_);
    std::string line;
    while (std::getline(in, line)) {
      std::size_t i = 0;
      QuadratureNode n;
      CMatrix r;
      // A torn last line from an interrupted run is skipped.
      if (!parse_node_line(line, dim_, i, n, r) || i >= nodes_.size()) continue;
      const auto& want = nodes_[i];
      if (n.kappa != want.kappa || n.kx0 != want.kx0 || n.ky0 != want.ky0) continue;
      entries_[i] = std::move(r);
    }
  }
  out_.open(file_, std::ios::app);
  if (!out_) throw Error("cannot write cache file '" + file_.string() + "'");
}

NodeCache NodeFileCache::hooks() {
  NodeCache c;
  c.lookup = [this](std::size_t i) -> std::optional<CMatrix> {
    auto it = entries_.find(i);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  };
  c.store = [this](std::size_t i, const NodeReflection& r) {
    out_ << format_node_line(i, r.node, r.r_transverse) << '\n';
    out_.flush();
  };
  return c;
}

}  // namespace vpm::cli
