#include <algorithm>
#include <fstream>
#include <sstream>

#include "spdekit/areal.hpp"
#include "spdekit/error.hpp"

namespace spdekit {

void AdjacencyGraph::validate() const {
  require(n >= 0 && static_cast<Index>(nb.size()) == n, ErrorKind::DimensionMismatch,
          "neighbour list count differs from n");
  for (Index i = 0; i < n; ++i)
    for (Index j : nb[i]) {
      require(j >= 0 && j < n, ErrorKind::IndexOutOfRange,
              "region " + std::to_string(i) + " lists out-of-range neighbour " + std::to_string(j));
      require(j != i, ErrorKind::InvalidArgument, "region " + std::to_string(i) + " lists itself");
      require(std::binary_search(nb[j].begin(), nb[j].end(), i), ErrorKind::AsymmetricGraph,
              "region " + std::to_string(i) + " lists " + std::to_string(j) + " but not vice versa");
    }
}

std::size_t AdjacencyGraph::n_edges() const {
  std::size_t s = 0;
  for (const auto& l : nb) s += l.size();
  return s / 2;
}

AdjacencyGraph parse_graph(std::string_view text, bool zero_based) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    return false;
  };
  auto where = [&] { return "line " + std::to_string(line_no) + ": "; };

  require(next_line(), ErrorKind::MalformedLine, "empty graph file");
  AdjacencyGraph g;
  {
    std::istringstream s(line);
    long n = -1;
    std::string extra;
    require(static_cast<bool>(s >> n) && n >= 0 && !(s >> extra), ErrorKind::MalformedLine,
            where() + "expected the region count");
    g.n = static_cast<Index>(n);
  }
  g.nb.assign(g.n, {});
  std::vector<char> seen(g.n, 0);
  const long base = zero_based ? 0 : 1;
  for (Index k = 0; k < g.n; ++k) {
    require(next_line(), ErrorKind::MalformedLine,
            "line " + std::to_string(line_no + 1) + ": expected " + std::to_string(g.n) + " region lines, got " +
                std::to_string(k));
    std::istringstream s(line);
    long idx = 0, count = 0;
    require(static_cast<bool>(s >> idx >> count), ErrorKind::MalformedLine,
            where() + "expected 'index count neighbours...'");
    require(count >= 0, ErrorKind::MalformedLine, where() + "negative neighbour count");
    const long i = idx - base;
    require(i >= 0 && i < g.n, ErrorKind::IndexOutOfRange, where() + "region index out of range");
    require(!seen[i], ErrorKind::MalformedLine, where() + "region listed twice");
    seen[i] = 1;
    std::vector<Index> list;
    for (long c = 0; c < count; ++c) {
      long j = 0;
      require(static_cast<bool>(s >> j), ErrorKind::MalformedLine, where() + "fewer neighbours than the count");
      j -= base;
      require(j >= 0 && j < g.n, ErrorKind::IndexOutOfRange, where() + "neighbour index out of range");
      list.push_back(static_cast<Index>(j));
    }
    std::string extra;
    require(!(s >> extra), ErrorKind::MalformedLine, where() + "more neighbours than the count");
    std::sort(list.begin(), list.end());
    require(std::adjacent_find(list.begin(), list.end()) == list.end(), ErrorKind::MalformedLine,
            where() + "duplicate neighbour");
    g.nb[i] = std::move(list);
  }
  g.validate();
  return g;
}

AdjacencyGraph read_graph_file(const std::string& path, bool zero_based) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorKind::InvalidArgument, "cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_graph(buf.str(), zero_based);
}

std::string format_graph(const AdjacencyGraph& g) {
  std::ostringstream out;
  out << g.n << '\n';
  for (Index i = 0; i < g.n; ++i) {
    out << (i + 1) << ' ' << g.nb[i].size();
    for (Index j : g.nb[i]) out << ' ' << (j + 1);
    out << '\n';
  }
  return out.str();
}

std::vector<std::vector<Index>> connected_components(const AdjacencyGraph& g) {
  std::vector<Index> label(g.n, -1);
  std::vector<std::vector<Index>> comps;
  for (Index s = 0; s < g.n; ++s) {
    if (label[s] >= 0) continue;
    const Index id = static_cast<Index>(comps.size());
    std::vector<Index> members{s};
    label[s] = id;
    for (std::size_t k = 0; k < members.size(); ++k)
      for (Index j : g.nb[members[k]])
        if (label[j] < 0) {
          label[j] = id;
          members.push_back(j);
        }
    std::sort(members.begin(), members.end());
    comps.push_back(std::move(members));
  }
  return comps;
}

}  // namespace spdekit
