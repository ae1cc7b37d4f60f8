#include "smg/data.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace smg {

namespace {

[[noreturn]] void parse_error(const std::string& source, int line, const std::string& what) {
  throw std::runtime_error(source + ":" + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view tok, const std::string& source, int line,
                    const char* what) {
  const std::string_view body =  // from_chars rejects an explicit leading '+'
      !tok.empty() && tok.front() == '+' ? tok.substr(1) : tok;
  double v = 0.0;
  const auto res = std::from_chars(body.data(), body.data() + body.size(), v);
  if (body.empty() || res.ec != std::errc() || res.ptr != body.data() + body.size())
    parse_error(source, line, std::string("malformed ") + what + " '" +
                                  std::string(tok) + "'");
  return v;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, const std::string& source, int min_dim) {
  Dataset ds;
  ds.source = source;
  std::string line;
  int line_no = 0;
  std::int32_t max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Strip comments and trailing CR.
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    std::istringstream fields(line);
    std::string tok;
    if (!(fields >> tok)) continue;  // blank line
    const double raw_label = parse_number(tok, source, line_no, "label");
    SparseVector x;
    std::int32_t prev_idx = 0;
    while (fields >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        parse_error(source, line_no, "malformed index:value pair '" + tok + "'");
      const double idx_val = parse_number(
          std::string_view(tok).substr(0, colon), source, line_no, "index");
      const double val =
          parse_number(std::string_view(tok).substr(colon + 1), source, line_no, "value");
      const auto idx = static_cast<std::int32_t>(idx_val);
      if (idx_val != static_cast<double>(idx) || idx < 1)
        parse_error(source, line_no, "feature index must be a positive integer");
      if (idx <= prev_idx)
        parse_error(source, line_no, "feature indices must be strictly ascending");
      prev_idx = idx;
      if (val != 0.0) {  // implicit zeros are never stored
        x.indices.push_back(idx - 1);
        x.values.push_back(val);
      }
      max_index = std::max(max_index, idx);
    }
    ds.features.push_back(std::move(x));
    ds.labels.push_back(raw_label > 0.0 ? 1.0 : -1.0);
  }
  if (ds.features.empty()) parse_error(source, line_no, "no samples");
  ds.dim = std::max(max_index, static_cast<std::int32_t>(min_dim));
  for (auto& x : ds.features) {
    x.dim = ds.dim;
    x.validate();
  }
  return ds;
}

Dataset parse_libsvm_file(const std::string& path, int min_dim) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return parse_libsvm(in, path, min_dim);
}

Dataset parse_libsvm_string(const std::string& text, int min_dim) {
  std::istringstream in(text);
  return parse_libsvm(in, "<string>", min_dim);
}

std::string serialize_libsvm(const Dataset& ds) {
  std::string out;
  for (int i = 0; i < ds.n(); ++i) {
    out += ds.labels[i] > 0.0 ? "+1" : "-1";
    const auto& x = ds.features[i];
    for (std::size_t k = 0; k < x.indices.size(); ++k) {
      out += ' ';
      out += std::to_string(x.indices[k] + 1);
      out += ':';
      out += format_double(x.values[k]);
    }
    out += '\n';
  }
  return out;
}

std::shared_ptr<DiagonalQuadraticProblem> synth_quadratic_dataset(
    int n, int dim, std::uint64_t seed, double condition, double center_scale,
    double spread) {
  if (n <= 0 || dim <= 0) throw std::invalid_argument("synth: n and dim must be positive");
  if (condition < 1.0) throw std::invalid_argument("synth: condition must be >= 1");
  if (spread < 0.0) throw std::invalid_argument("synth: spread must be >= 0");
  SplitMix64 rng(derive_stream(seed, kStreamSynthesis, 0));
  Vector center(dim);
  for (int j = 0; j < dim; ++j) center[j] = center_scale * rng.normal();
  std::vector<Vector> diag(n), b(n);
  for (int i = 0; i < n; ++i) {
    diag[i].resize(dim);
    b[i].resize(dim);
    for (int j = 0; j < dim; ++j)
      diag[i][j] = 1.0 + (condition - 1.0) * rng.uniform();
    for (int j = 0; j < dim; ++j) b[i][j] = center[j] + spread * rng.normal();
  }
  return std::make_shared<DiagonalQuadraticProblem>(std::move(diag), std::move(b));
}

SplitDataset split_dataset(const Dataset& ds, double test_fraction,
                           std::uint64_t seed) {
  if (test_fraction < 0.0 || test_fraction >= 1.0)
    throw std::invalid_argument("split: test fraction must be in [0, 1)");
  std::vector<int> order(ds.n());
  for (int i = 0; i < ds.n(); ++i) order[i] = i;
  SplitMix64 rng(derive_stream(seed, kStreamSplit, 0));
  for (int i = ds.n() - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(order[i], order[j]);
  }
  const int n_test = static_cast<int>(test_fraction * ds.n());
  SplitDataset out;
  out.train.dim = out.test.dim = ds.dim;
  out.train.source = ds.source + "[train]";
  out.test.source = ds.source + "[test]";
  for (int k = 0; k < ds.n(); ++k) {
    Dataset& dst = k < ds.n() - n_test ? out.train : out.test;
    dst.features.push_back(ds.features[order[k]]);
    dst.labels.push_back(ds.labels[order[k]]);
  }
  return out;
}

double binary_accuracy(const Dataset& ds, const Vector& w) {
  if (ds.n() == 0) throw std::invalid_argument("accuracy: empty dataset");
  int hits = 0;
  for (int i = 0; i < ds.n(); ++i) {
    const double pred = ds.features[i].dot(w) >= 0.0 ? 1.0 : -1.0;
    if (pred == ds.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / ds.n();
}

}  // namespace smg
