#include "spdesign/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

namespace spd {

namespace {

std::string row_message(const char* what, Eigen::Index row) {
  return std::string(what) + ", row " + std::to_string(row + 1);
}

void check_unit_cube(const Matrix& pts, const char* what) {
  for (Eigen::Index i = 0; i < pts.rows(); ++i) {
    for (Eigen::Index l = 0; l < pts.cols(); ++l) {
      const double v = pts(i, l);
      if (!std::isfinite(v)) throw InputError(row_message("non-finite coordinate", i));
      if (v < 0.0 || v > 1.0) throw InputError(row_message(what, i));
    }
  }
}

}  // namespace

Design::Design(Matrix points, std::string label) : points_(std::move(points)), label_(std::move(label)) {
  if (points_.rows() < 1 || points_.cols() < 1) throw InputError("design must have n >= 1 and p >= 1");
  check_unit_cube(points_, "coordinate out of range");

  // Exact duplicate rows: sort row indices lexicographically, compare neighbours.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(points_.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const auto less = [this](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index l = 0; l < points_.cols(); ++l) {
      if (points_(a, l) != points_(b, l)) return points_(a, l) < points_(b, l);
    }
    return false;
  };
  std::sort(order.begin(), order.end(), less);
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (points_.row(order[k - 1]) == points_.row(order[k])) {
      const auto [a, b] = std::minmax(order[k - 1], order[k]);
      throw InputError("duplicate rows " + std::to_string(a + 1) + " and " + std::to_string(b + 1));
    }
  }
}

const char* to_string(BatchSource s) {
  switch (s) {
    case BatchSource::monte_carlo: return "monte-carlo";
    case BatchSource::randomized_sobol: return "randomized-sobol";
    case BatchSource::quadrature: return "quadrature";
  }
  return "?";
}

SampleBatch::SampleBatch(Matrix points, BatchSource source, std::uint64_t seed)
    : points_(std::move(points)), source_(source), seed_(seed) {
  if (points_.rows() < 1 || points_.cols() < 1) throw InputError("sample batch must be non-empty");
  check_unit_cube(points_, "sample coordinate out of range");
}

KernelSpec KernelSpec::distance(Eigen::Index p) {
  KernelSpec k;
  k.variant = KernelVariant::distance;
  k.p = p;
  return k;
}

KernelSpec KernelSpec::gaussian(Vector theta) {
  KernelSpec k;
  k.variant = KernelVariant::gaussian_aniso;
  k.p = theta.size();
  k.theta = std::move(theta);
  k.max_order = 1;
  return k;
}

KernelSpec KernelSpec::pod_prior(Eigen::Index p, int max_order) {
  KernelSpec k;
  k.variant = KernelVariant::pod;
  k.p = p;
  k.max_order = max_order;
  return k;
}

double KernelSpec::order_weight(int k) const {
  return std::pow(static_cast<double>(p), -0.25) / std::sqrt(std::tgamma(k + 1.0));
}

void KernelSpec::validate() const {
  if (p < 1) throw InputError("kernel dimension must be >= 1");
  switch (variant) {
    case KernelVariant::distance: break;
    case KernelVariant::gaussian_aniso:
      if (theta.size() != p) throw InputError("kernel theta has wrong length");
      if ((theta.array() <= 0.0).any()) throw InputError("kernel theta must be positive");
      break;
    case KernelVariant::pod:
      if (max_order < 1 || max_order > p) throw InputError("POD max interaction order must be in [1, p]");
      if (!(pod_shape > 0.0) || !(pod_scale > 0.0)) throw InputError("POD prior parameters must be positive");
      break;
  }
}

// ---------------------------------------------------------------------------

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string format_design_csv(const Design& d) {
  std::string out;
  for (Eigen::Index l = 0; l < d.p(); ++l) {
    if (l) out += ',';
    out += 'x' + std::to_string(l + 1);
  }
  out += '\n';
  for (Eigen::Index i = 0; i < d.n(); ++i) {
    for (Eigen::Index l = 0; l < d.p(); ++l) {
      if (l) out += ',';
      out += format_double(d.points()(i, l));
    }
    out += '\n';
  }
  return out;
}

void save_design(const Design& d, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os << format_design_csv(d);
  if (!os) throw Error("write failed: " + path.string());
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_number(std::string_view field, double& out) {
  field = trim(field);
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  if (field.empty()) return false;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), out);
  return res.ec == std::errc{} && res.ptr == field.data() + field.size();
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

Design parse_design_csv(const std::string& text, std::string label) {
  std::vector<std::vector<double>> rows;
  std::istringstream is(text);
  std::string raw;
  bool first_line = true;
  std::size_t line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto fields = split(line);
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t k = 0; k < fields.size(); ++k) numeric = numeric && parse_number(fields[k], row[k]);
    if (!numeric) {
      if (first_line) {
        first_line = false;
        continue;  // header
      }
      throw InputError("parse failure at line " + std::to_string(line_no));
    }
    first_line = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InputError("inconsistent column count at line " + std::to_string(line_no));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("design file contains no data rows");

  Matrix pts(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t l = 0; l < rows[i].size(); ++l) {
      pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l)) = rows[i][l];
    }
  }
  return Design(std::move(pts), std::move(label));
}

Design load_design(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_design_csv(ss.str(), "file:" + path.filename().string());
}

}  // namespace spd
