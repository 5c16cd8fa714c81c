#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "pgvo/io.hpp"

namespace pgvo {

/// A matched image point in frames t and t+1 with the z-depth observed at
/// each end. Image coordinates are continuous (pixel centers at +0.5).
struct Correspondence {
  Eigen::Vector2d uv = Eigen::Vector2d::Zero();
  Eigen::Vector2d uv2 = Eigen::Vector2d::Zero();
  double depth = 0.0;
  double depth2 = 0.0;
};

using Correspondences = std::vector<Correspondence>;

/// Same matches seen from frame t+1 to frame t.
inline Correspondences swapped(const Correspondences& c) {
  Correspondences out;
  out.reserve(c.size());
  for (const auto& p : c) out.push_back({p.uv2, p.uv, p.depth2, p.depth});
  return out;
}

// Text format: one pair per line, "u,v,u2,v2,d,d2".

inline std::string encode_correspondences(const Correspondences& c) {
  std::string out;
  for (const auto& p : c) {
    out += format_double(p.uv.x()) + "," + format_double(p.uv.y()) + "," +
           format_double(p.uv2.x()) + "," + format_double(p.uv2.y()) + "," +
           format_double(p.depth) + "," + format_double(p.depth2) + "\n";
  }
  return out;
}

inline Correspondences decode_correspondences(const std::string& text) {
  Correspondences out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream fields(line);
    Correspondence p;
    double u, v, u2, v2;
    if (!(fields >> u >> v >> u2 >> v2 >> p.depth >> p.depth2))
      throw UsageError("bad correspondence line " + std::to_string(lineno));
    p.uv = {u, v};
    p.uv2 = {u2, v2};
    out.push_back(p);
  }
  return out;
}

}  // namespace pgvo
