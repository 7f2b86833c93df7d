#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "vpm/casimir.hpp"

namespace vpm::cli {

/// Append-only text file of per-node reflection matrices stored as hex
/// floats, so a reloaded entry is bit-identical to the computed one.
/// Entries are served only if the stored node coordinates match exactly.
class NodeFileCache {
 public:
  NodeFileCache(const std::filesystem::path& file, const std::vector<QuadratureNode>& nodes, int dim);

  NodeCache hooks();
  std::size_t loaded() const { return entries_.size(); }

 private:
  std::filesystem::path file_;
  const std::vector<QuadratureNode>& nodes_;
  int dim_;
  std::map<std::size_t, CMatrix> entries_;
  std::ofstream out_;
};

std::string format_node_line(std::size_t index, const QuadratureNode& node, const CMatrix& r);

/// Returns false on a malformed line or a size mismatch.
bool parse_node_line(const std::string& line, int dim, std::size_t& index, QuadratureNode& node, CMatrix& r);

}  // namespace vpm::cli
