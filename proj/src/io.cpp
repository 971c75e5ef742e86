#include "hk/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "hk/lifting.hpp"

namespace hk {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  Table t;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::Io, "empty file " + path);
  t.header = split_csv(line);
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (cells.size() != t.header.size())
      fail(ErrorKind::Io, path + ":" + std::to_string(lineno) +
                              ": expected " + std::to_string(t.header.size()) +
                              " columns, got " + std::to_string(cells.size()));
    std::vector<double> row(cells.size());
    for (size_t c = 0; c < cells.size(); ++c) {
      try {
        row[c] = std::stod(cells[c]);
      } catch (const std::exception&) {
        fail(ErrorKind::Io, path + ":" + std::to_string(lineno) +
                                ": bad number '" + cells[c] + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

// Number of leading coordinate columns x1..xd; fails unless the header is
// exactly x1..xd followed by `suffix`.
int coord_count(const Table& t, const std::vector<std::string>& suffix,
                const std::string& path) {
  const int total = static_cast<int>(t.header.size());
  const int d = total - static_cast<int>(suffix.size());
  bool ok = d >= 1;
  for (int c = 0; ok && c < d; ++c)
    ok = t.header[c] == "x" + std::to_string(c + 1);
  for (size_t c = 0; ok && c < suffix.size(); ++c)
    ok = t.header[d + c] == suffix[c];
  if (!ok) fail(ErrorKind::Io, path + ": unexpected CSV header");
  return d;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  out << std::setprecision(17);
  return out;
}

void write_coords(std::ofstream& out, int d, bool tail_comma = true) {
  for (int c = 0; c < d; ++c) out << "x" << (c + 1) << (c + 1 < d ? "," : "");
  if (tail_comma) out << ",";
}

}  // namespace

DiscreteMeasure load_measure(const std::string& path) {
  Table t = read_table(path);
  const int d = coord_count(t, {"mass"}, path);
  const int n = static_cast<int>(t.rows.size());
  Mat pts(n, d);
  Vec ms(n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) pts(i, c) = t.rows[i][c];
    ms[i] = t.rows[i][d];
    if (ms[i] <= 0.0)
      fail(ErrorKind::Io, path + ": nonpositive mass at data row " +
                              std::to_string(i + 1));
  }
  return DiscreteMeasure(std::move(pts), std::move(ms));
}

void save_measure(const std::string& path, const DiscreteMeasure& m) {
  auto out = open_out(path);
  write_coords(out, m.dim(), true);
  out << "mass\n";
  for (int i = 0; i < m.size(); ++i) {
    for (int c = 0; c < m.dim(); ++c) out << m.points()(i, c) << ",";
    out << m.mass(i) << "\n";
  }
}

ConeMeasure load_cone_measure(const std::string& path) {
  Table t = read_table(path);
  const int d = coord_count(t, {"r", "mass"}, path);
  const int n = static_cast<int>(t.rows.size());
  Mat pts(n, d);
  Vec radii(n), ms(n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) pts(i, c) = t.rows[i][c];
    radii[i] = t.rows[i][d];
    ms[i] = t.rows[i][d + 1];
    if (radii[i] < 0.0 || ms[i] <= 0.0)
      fail(ErrorKind::Io, path + ": bad radius/mass at data row " +
                              std::to_string(i + 1));
  }
  return ConeMeasure(std::move(pts), std::move(radii), std::move(ms));
}

void save_cone_measure(const std::string& path, const ConeMeasure& m) {
  auto out = open_out(path);
  write_coords(out, m.dim(), true);
  out << "r,mass\n";
  for (int i = 0; i < m.size(); ++i) {
    for (int c = 0; c < m.dim(); ++c) out << m.points()(i, c) << ",";
    out << m.radii()[i] << "," << m.mass(i) << "\n";
  }
}

HKTangent load_tangent(const std::string& path) {
  Table t = read_table(path);
  const int cols = static_cast<int>(t.header.size());
  // x1..xd, mass, v1..vd, beta
  if (cols < 4 || cols % 2 != 0)
    fail(ErrorKind::Io, path + ": not a tangent file");
  const int d = (cols - 2) / 2;
  std::vector<std::string> suffix = {"mass"};
  for (int c = 0; c < d; ++c) suffix.push_back("v" + std::to_string(c + 1));
  suffix.push_back("beta");
  coord_count(t, suffix, path);
  const int n = static_cast<int>(t.rows.size());
  Mat pts(n, d), v(n, d);
  Vec ms(n), beta(n);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < d; ++c) pts(i, c) = t.rows[i][c];
    ms[i] = t.rows[i][d];
    for (int c = 0; c < d; ++c) v(i, c) = t.rows[i][d + 1 + c];
    beta[i] = t.rows[i][2 * d + 1];
  }
  HKTangent u;
  u.anchor = DiscreteMeasure(std::move(pts), std::move(ms));
  if (u.anchor.size() != n)
    fail(ErrorKind::Io, path + ": tangent anchor has zero-mass atoms");
  u.v = std::move(v);
  u.beta = std::move(beta);
  return u;
}

void save_tangent(const std::string& path, const HKTangent& u) {
  auto out = open_out(path);
  const int d = u.anchor.dim();
  write_coords(out, d, true);
  out << "mass,";
  for (int c = 0; c < d; ++c) out << "v" << (c + 1) << ",";
  out << "beta\n";
  for (int i = 0; i < u.anchor.size(); ++i) {
    for (int c = 0; c < d; ++c) out << u.anchor.points()(i, c) << ",";
    out << u.anchor.mass(i) << ",";
    for (int c = 0; c < d; ++c) out << u.v(i, c) << ",";
    out << u.beta[i] << "\n";
  }
}

void save_trace(const std::string& path, const std::string& value_name,
                const std::vector<double>& values) {
  auto out = open_out(path);
  out << "step," << value_name << "\n";
  for (size_t k = 0; k < values.size(); ++k)
    out << k << "," << values[k] << "\n";
}

void save_cone_field(const std::string& path, const ConeTangentField& V) {
  auto out = open_out(path);
  const ConeMeasure& m = V.anchor;
  write_coords(out, m.dim(), true);
  out << "r,mass,";
  for (int c = 0; c < m.dim(); ++c) out << "a" << (c + 1) << ",";
  out << "b\n";
  for (int i = 0; i < m.size(); ++i) {
    for (int c = 0; c < m.dim(); ++c) out << m.points()(i, c) << ",";
    out << m.radii()[i] << "," << m.mass(i) << ",";
    for (int c = 0; c < m.dim(); ++c) out << V.a(i, c) << ",";
    out << V.b[i] << "\n";
  }
}

}  // namespace hk
