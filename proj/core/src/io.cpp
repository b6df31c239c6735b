#include "gmrbm/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "gmrbm/errors.hpp"
#include "gmrbm/random.hpp"

namespace gmrbm {

namespace {

std::string at_line(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

bool parse_finite(std::string_view token, double& out) {
  const char* first = token.data();
  const char* last = first + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

bool parse_count(std::string_view token, std::size_t& out) {
  const char* first = token.data();
  const char* last = first + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string> split(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> tokens;
  std::string tok;
  while (ss >> tok) tokens.push_back(tok);
  return tokens;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  return out;
}

void write_row(std::ostream& out, std::span<const double> row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ' ';
    out << format_double(row[i]);
  }
  out << '\n';
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

VectorFile parse_vectors(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  VectorFile file;

  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    const auto tokens = split(line);
    if (!have_header) {
      if (tokens.size() != 2 || !parse_count(tokens[0], file.count) ||
          !parse_count(tokens[1], file.dim)) {
        throw DataError(at_line(line_no, "expected header '<count> <dim>'"));
      }
      if (file.dim == 0) throw DataError(at_line(line_no, "dimension must be >= 1"));
      have_header = true;
      file.rows.reserve(file.count);
      continue;
    }
    if (file.rows.size() == file.count) {
      throw DataError(at_line(line_no, "more rows than the header count of " +
                                           std::to_string(file.count)));
    }
    if (tokens.size() != file.dim) {
      throw DataError(at_line(line_no, "expected " + std::to_string(file.dim) +
                                           " values, found " +
                                           std::to_string(tokens.size())));
    }
    Vector row(file.dim);
    for (std::size_t i = 0; i < file.dim; ++i) {
      if (!parse_finite(tokens[i], row[i])) {
        throw DataError(at_line(line_no, "non-numeric or non-finite token '" +
                                             tokens[i] + "'"));
      }
    }
    file.rows.push_back(std::move(row));
  }
  if (!have_header) throw DataError(at_line(line_no + 1, "empty vector file"));
  if (file.rows.size() != file.count) {
    throw DataError(at_line(line_no + 1,
                            "header promises " + std::to_string(file.count) +
                                " rows, file has " +
                                std::to_string(file.rows.size())));
  }
  return file;
}

VectorFile read_vectors(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  try {
    return parse_vectors(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_vectors(std::ostream& out, std::span<const Vector> rows) {
  const std::size_t dim = rows.empty() ? 0 : rows.front().size();
  for (const Vector& row : rows) {
    if (row.size() != dim) throw UsageError("rows must all have the same width");
  }
  if (!rows.empty() && dim == 0) throw UsageError("rows must be non-empty");
  out << rows.size() << ' ' << (rows.empty() ? 1 : dim) << '\n';
  for (const Vector& row : rows) write_row(out, row);
}

void write_vectors(const std::filesystem::path& path,
                   std::span<const Vector> rows) {
  auto out = open_for_write(path);
  write_vectors(out, rows);
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void write_checkpoint(std::ostream& out, const ModelParams& params) {
  params.validate();
  const std::size_t n = params.visible_count();
  const std::size_t m = params.slot_count();
  const std::size_t q = params.state_count();
  out << kCheckpointMagic << ' ' << n << ' ' << m << ' ' << q << ' '
      << (params.has_variance() ? 1 : 0) << '\n';
  write_row(out, params.visible_bias());
  for (std::size_t j = 0; j < m; ++j) {
    write_row(out, params.hidden_bias().subspan(j * q, q));
  }
  for (std::size_t k = 0; k < q; ++k) {
    for (std::size_t j = 0; j < m; ++j) write_row(out, params.weight_template(k, j));
  }
  if (params.has_variance()) write_row(out, params.variance());
}

void save_checkpoint(const ModelParams& params,
                     const std::filesystem::path& path) {
  auto out = open_for_write(path);
  write_checkpoint(out, params);
  if (!out) throw DataError("failed writing '" + path.string() + "'");
}

ModelParams parse_checkpoint(std::istream& in) {
  std::string magic;
  if (!(in >> magic)) throw DataError("empty checkpoint");
  if (magic != kCheckpointMagic) {
    throw DataError("bad checkpoint magic '" + magic + "', expected " +
                    kCheckpointMagic);
  }
  std::string tok[4];
  std::size_t dims[4];
  for (int i = 0; i < 4; ++i) {
    if (!(in >> tok[i]) || !parse_count(tok[i], dims[i])) {
      throw DataError("checkpoint header must be 'GMRBM1 n m q has_sigma2'");
    }
  }
  const auto [n, m, q, has_sigma2] = dims;
  if (n == 0 || m == 0 || q == 0 || has_sigma2 > 1) {
    throw DataError("checkpoint header has invalid dimensions");
  }

  const std::size_t total = n + m * q + q * m * n + (has_sigma2 ? n : 0);
  Vector values;
  values.reserve(total);
  std::string token;
  while (in >> token) {
    double x = 0.0;
    if (!parse_finite(token, x)) {
      throw DataError("checkpoint value " + std::to_string(values.size() + 1) +
                      " is not a finite number: '" + token + "'");
    }
    values.push_back(x);
    if (values.size() > total) {
      throw DataError("checkpoint has more values than its header declares (" +
                      std::to_string(total) + ")");
    }
  }
  if (values.size() != total) {
    throw DataError("checkpoint truncated: expected " + std::to_string(total) +
                    " values, found " + std::to_string(values.size()));
  }

  ModelParams params(n, m, q);
  auto it = values.begin();
  auto take = [&](std::span<double> dst) {
    std::copy(it, it + static_cast<std::ptrdiff_t>(dst.size()), dst.begin());
    it += static_cast<std::ptrdiff_t>(dst.size());
  };
  take(params.visible_bias());
  take(params.hidden_bias());
  take(params.weights());
  if (has_sigma2) {
    Vector sigma2(it, it + static_cast<std::ptrdiff_t>(n));
    try {
      params.set_variance(std::move(sigma2));
    } catch (const UsageError& e) {
      throw DataError(std::string("checkpoint variance invalid: ") + e.what());
    }
  }
  return params;
}

ModelParams load_checkpoint(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  try {
    return parse_checkpoint(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::size_t GmmSpec::dim() const {
  return components.empty() ? 0 : components.front().mean.size();
}

void GmmSpec::validate() const {
  if (components.empty()) throw UsageError("GMM needs at least one component");
  const std::size_t d = dim();
  if (d == 0) throw UsageError("GMM dimension must be >= 1");
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw UsageError("GMM weights must be positive");
    if (c.mean.size() != d || c.variance.size() != d) {
      throw UsageError("GMM components must share one dimension");
    }
    for (double v : c.variance) {
      if (!(v > 0.0)) throw UsageError("GMM variances must be positive");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw UsageError("GMM weights must sum to 1");
  }
}

std::vector<Vector> sample_gmm(const GmmSpec& spec, std::size_t count,
                               std::uint64_t seed,
                               std::vector<std::size_t>* labels) {
  spec.validate();
  RandomStream rng(derive_seed(seed, "gmm"), 0);
  std::vector<double> weights;
  for (const auto& c : spec.components) weights.push_back(c.weight);

  std::vector<Vector> rows;
  rows.reserve(count);
  if (labels) labels->clear();
  for (std::size_t r = 0; r < count; ++r) {
    const double u = rng.uniform();
    std::size_t pick = weights.size() - 1;
    double cumulative = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      cumulative += weights[k];
      if (u < cumulative) {
        pick = k;
        break;
      }
    }
    const auto& comp = spec.components[pick];
    Vector row(comp.mean);
    for (std::size_t i = 0; i < row.size(); ++i) {
      row[i] += std::sqrt(comp.variance[i]) * rng.normal();
    }
    rows.push_back(std::move(row));
    if (labels) labels->push_back(pick);
  }
  return rows;
}

}  // namespace gmrbm
