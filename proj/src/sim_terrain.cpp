#include "rollfly/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace rollfly {

Terrain Terrain::flat(double slope_rad, double crr) {
  Terrain t;
  t.kind_ = Kind::flat;
  t.flat_slope_ = slope_rad;
  t.crr_ = crr;
  return t;
}

Terrain Terrain::from_profile(std::vector<double> distance_m, std::vector<double> height_m,
                              double crr) {
  if (distance_m.size() != height_m.size() || distance_m.size() < 2)
    throw ParseError("profile needs at least two (distance, height) samples");
  for (size_t i = 1; i < distance_m.size(); ++i)
    if (!(distance_m[i] > distance_m[i - 1]))
      throw ParseError("profile distances must be strictly increasing");
  Terrain t;
  t.kind_ = Kind::profile;
  t.xs_ = std::move(distance_m);
  t.hs_ = std::move(height_m);
  t.crr_ = crr;
  return t;
}

namespace {

// Segment index for x; clamps to the end segments (linear extrapolation).
size_t segment_of(const std::vector<double>& xs, double x) {
  if (x <= xs.front()) return 0;
  if (x >= xs[xs.size() - 2]) return xs.size() - 2;
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  return static_cast<size_t>(it - xs.begin()) - 1;
}

}  // namespace

double Terrain::height(double x) const {
  if (kind_ == Kind::flat) return x * std::tan(flat_slope_);
  const size_t i = segment_of(xs_, x);
  const double f = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
  return hs_[i] + f * (hs_[i + 1] - hs_[i]);
}

double Terrain::slope(double x) const {
  if (kind_ == Kind::flat) return flat_slope_;
  const size_t i = segment_of(xs_, x);
  return std::atan2(hs_[i + 1] - hs_[i], xs_[i + 1] - xs_[i]);
}

Vec3 Terrain::normal(double x) const {
  const double s = slope(x);
  return Vec3(-std::sin(s), 0.0, std::cos(s));
}

namespace {

ParseError at_line(const std::string& path, int line, const std::string& what) {
  std::ostringstream os;
  os << path << ":" << line << ": " << what;
  return ParseError(os.str());
}

Terrain load_ascii_grid(const std::string& path, double crr) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");

  std::map<std::string, double> header;
  int line_no = 0;
  std::string line;
  std::streampos data_start;
  while (true) {
    data_start = in.tellg();
    if (!std::getline(in, line)) throw at_line(path, line_no + 1, "missing grid data");
    ++line_no;
    std::istringstream ls(line);
    std::string key;
    double value;
    if (!(ls >> key)) continue;  // blank line
    if (!key.empty() && (std::isdigit(static_cast<unsigned char>(key[0])) || key[0] == '-' ||
                         key[0] == '+' || key[0] == '.'))
      break;  // first data row
    if (!(ls >> value)) throw at_line(path, line_no, "malformed header line '" + line + "'");
    std::transform(key.begin(), key.end(), key.begin(), ::tolower);
    header[key] = value;
  }

  for (const char* key : {"ncols", "nrows", "cellsize", "nodata_value"})
    if (!header.count(key))
      throw at_line(path, line_no, std::string("missing required header key '") + key + "'");

  const int ncols = static_cast<int>(header["ncols"]);
  const int nrows = static_cast<int>(header["nrows"]);
  const double cellsize = header["cellsize"];
  const double nodata = header["nodata_value"];
  if (ncols < 2 || nrows < 1) throw at_line(path, line_no, "grid must be at least 2 columns wide");
  if (!(cellsize > 0.0)) throw at_line(path, line_no, "cellsize must be positive");

  std::vector<std::vector<double>> rows;
  in.clear();
  in.seekg(data_start);
  --line_no;
  while (static_cast<int>(rows.size()) < nrows) {
    if (!std::getline(in, line))
      throw at_line(path, line_no + 1, "unexpected end of file inside grid data");
    ++line_no;
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (row.empty()) continue;
    if (static_cast<int>(row.size()) != ncols)
      throw at_line(path, line_no, "expected " + std::to_string(ncols) + " columns, got " +
                                        std::to_string(row.size()));
    for (double h : row)
      if (!std::isfinite(h)) throw at_line(path, line_no, "non-finite height value");
    rows.push_back(std::move(row));
  }

  // Track along +x through the grid center. For an even row count, blend the
  // two middle rows; warn once if they disagree (ignored lateral slope).
  const double rc = 0.5 * (nrows - 1);
  const int r0 = static_cast<int>(std::floor(rc));
  const int r1 = std::min(r0 + 1, nrows - 1);
  const double frac = rc - r0;

  std::vector<double> xs(ncols), hs(ncols);
  int track_line0 = line_no - nrows + 1;
  double max_lateral = 0.0;
  for (int c = 0; c < ncols; ++c) {
    const double h0 = rows[r0][c];
    const double h1 = rows[r1][c];
    if (h0 == nodata) throw at_line(path, track_line0 + r0, "nodata cell on the traversal track");
    if (h1 == nodata) throw at_line(path, track_line0 + r1, "nodata cell on the traversal track");
    xs[c] = c * cellsize;
    hs[c] = (1.0 - frac) * h0 + frac * h1;
    const int ra = std::max(r0 - 1, 0);
    const int rb = std::min(r1 + 1, nrows - 1);
    if (rb > ra)
      max_lateral = std::max(max_lateral,
                             std::abs(rows[rb][c] - rows[ra][c]) / ((rb - ra) * cellsize));
  }
  if (max_lateral > 1e-6)
    std::fprintf(stderr,
                 "rollfly: heightmap %s has lateral slope up to %.3g; "
                 "ignored (planar track along +x)\n",
                 path.c_str(), max_lateral);

  return Terrain::from_profile(std::move(xs), std::move(hs), crr);
}

Terrain load_csv_profile(const std::string& path, double crr) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open file");
  std::vector<double> xs, hs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.find_first_not_of("0123456789+-.eE, \t\r") != std::string::npos)
      continue;  // header row
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x, h;
    if (!(ls >> x >> h))
      throw at_line(path, line_no, "expected 'distance_m,height_m', got '" + line + "'");
    if (!xs.empty() && !(x > xs.back()))
      throw at_line(path, line_no, "profile distances must be strictly increasing");
    xs.push_back(x);
    hs.push_back(h);
  }
  if (xs.size() < 2) throw ParseError(path + ": profile needs at least two samples");
  return Terrain::from_profile(std::move(xs), std::move(hs), crr);
}

}  // namespace

Terrain load_terrain(const std::string& path, TerrainFormat format, double crr) {
  switch (format) {
    case TerrainFormat::ascii_grid:
      return load_ascii_grid(path, crr);
    case TerrainFormat::csv_profile:
      return load_csv_profile(path, crr);
  }
  throw ParseError("unknown terrain format");
}

}  // namespace rollfly
