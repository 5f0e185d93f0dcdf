#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "krmcf/grid.hpp"

namespace krmcf {

// full-precision decimal rendering; 17 significant digits round-trip doubles
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline void write_series_csv(const std::string& path,
                             const std::vector<std::string>& columns,
                             const std::vector<std::vector<double>>& rows) {
  std::string body;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (c) body += ',';
    body += columns[c];
  }
  body += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) body += ',';
      body += fmt17(row[c]);
    }
    body += '\n';
  }
  write_text_file(path, body);
}

struct Snapshot {
  double t = 0;
  int nx = 0, ny = 0;
  std::vector<std::pair<std::string, Field>> fields;
};

inline void write_snapshot(const std::string& path, const Snapshot& s) {
  std::string body = "# t " + fmt17(s.t) + "\n";
  body += "# grid " + std::to_string(s.nx) + " " + std::to_string(s.ny) + "\n";
  body += "# fields";
  for (const auto& [name, f] : s.fields) body += " " + name;
  body += "\n";
  for (int i = 0; i < s.nx; ++i)
    for (int j = 0; j < s.ny; ++j) {
      for (std::size_t c = 0; c < s.fields.size(); ++c) {
        if (c) body += ' ';
        body += fmt17(s.fields[c].second.at(i, j));
      }
      body += '\n';
    }
  write_text_file(path, body);
}

inline Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open snapshot: " + path);
  Snapshot s;
  std::string tok;
  in >> tok >> tok >> s.t;             // "# t <v>"
  in >> tok >> tok >> s.nx >> s.ny;    // "# grid <nx> <ny>"
  in >> tok >> tok;                    // "# fields"
  std::string line;
  std::getline(in, line);
  std::istringstream names(line);
  std::string name;
  while (names >> name) s.fields.emplace_back(name, Field(s.nx, s.ny));
  for (int i = 0; i < s.nx; ++i)
    for (int j = 0; j < s.ny; ++j)
      for (auto& [nm, f] : s.fields)
        if (!(in >> f.at(i, j)))
          throw std::runtime_error("truncated snapshot: " + path);
  return s;
}

// Fixed 256-entry colormap: piecewise-linear ramp through five anchors
// (black, violet, crimson, amber, pale yellow). Documented in the README;
// chosen so equal value steps give equal byte steps (deterministic output).
inline const std::array<std::array<unsigned char, 3>, 256>& colormap256() {
  static const auto table = [] {
    std::array<std::array<unsigned char, 3>, 256> t{};
    const double anchor[5][3] = {{0, 0, 0},
                                 {64, 0, 96},
                                 {192, 48, 64},
                                 {255, 160, 0},
                                 {255, 255, 224}};
    for (int i = 0; i < 256; ++i) {
      double s = i / 255.0 * 4.0;
      int a = std::min(int(s), 3);
      double f = s - a;
      for (int c = 0; c < 3; ++c) {
        double v = anchor[a][c] + f * (anchor[a + 1][c] - anchor[a][c]);
        t[i][c] = (unsigned char)(v + 0.5);
      }
    }
    return t;
  }();
  return table;
}

inline void write_ppm(const std::string& path, const Field& f, double lo,
                      double hi) {
  const auto& cmap = colormap256();
  std::string body = "P6\n" + std::to_string(f.ny) + " " +
                     std::to_string(f.nx) + "\n255\n";
  double span = hi > lo ? hi - lo : 1.0;
  for (int i = 0; i < f.nx; ++i)
    for (int j = 0; j < f.ny; ++j) {
      double s = (f.at(i, j) - lo) / span;
      int idx = int(std::clamp(s, 0.0, 1.0) * 255.0 + 0.5);
      for (int c = 0; c < 3; ++c) body += char(cmap[idx][c]);
    }
  write_text_file(path, body);
}

}  // namespace krmcf
