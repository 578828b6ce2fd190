// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <unistd.h>

namespace domcl::testing {

namespace fs = std::filesystem;

Rows to_rows(const Matrix& m) {
  Rows rows(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
  }
  return rows;
}

Matrix to_matrix(const Rows& rows) {
  const Index cols = rows.empty() ? 0 : static_cast<Index>(rows[0].size());
  Matrix m(static_cast<Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

namespace {

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace

double oracle_contrastive(const Rows& z, double tau) {
  const std::size_t n = z.size();
  double total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i % 2 == 0) ? i + 1 : i - 1;
    double denom = 0;
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i) denom += std::exp(cosine(z[i], z[k]) / tau);
    }
    total += -std::log(std::exp(cosine(z[i], z[j]) / tau) / denom);
  }
  return total / static_cast<double>(n);
}

double oracle_in_domain(const Rows& source, const Rows& target, double tau) {
  return oracle_contrastive(source, tau) + oracle_contrastive(target, tau);
}

double oracle_entropy(const Rows& logits) {
  double total = 0;
  for (const auto& row : logits) {
    double z = 0;
    for (double v : row) z += std::exp(v);
    for (double v : row) {
      const double p = std::exp(v) / z;
      if (p > 0) total -= p * std::log(p);
    }
  }
  return total / static_cast<double>(logits.size());
}

double oracle_cross_entropy(const Rows& logits, const std::vector<int>& labels) {
  double total = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    double z = 0;
    for (double v : logits[i]) z += std::exp(v);
    total -= std::log(std::exp(logits[i][labels[i]]) / z);
  }
  return total / static_cast<double>(logits.size());
}

Matrix finite_difference(const std::function<double(const Matrix&)>& f, const Matrix& x,
                         double step) {
  Matrix grad(x.rows(), x.cols());
  Matrix probe = x;
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      const double saved = probe(i, j);
      probe(i, j) = saved + step;
      const double up = f(probe);
      probe(i, j) = saved - step;
      const double down = f(probe);
      probe(i, j) = saved;
      grad(i, j) = (up - down) / (2 * step);
    }
  }
  return grad;
}

double max_relative_error(const Matrix& analytic, const Matrix& numeric, double floor) {
  double worst = 0;
  for (Index i = 0; i < analytic.rows(); ++i) {
    for (Index j = 0; j < analytic.cols(); ++j) {
      const double scale = std::max(std::abs(numeric(i, j)), floor);
      worst = std::max(worst, std::abs(analytic(i, j) - numeric(i, j)) / scale);
    }
  }
  return worst;
}

Matrix random_matrix(Index rows, Index cols, Rng& rng, double scale) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = scale * (2 * uniform01(rng) - 1);
  }
  return m;
}

std::int64_t binomial_quantile(std::int64_t n, double p, double q) {
  double cdf = 0;
  for (std::int64_t k = 0; k <= n; ++k) {
    const double log_pmf = std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                           k * std::log(p) + (n - k) * std::log1p(-p);
    cdf += std::exp(log_pmf);
    if (cdf >= q) return k;
  }
  return n;
}

std::pair<std::int64_t, std::int64_t> binomial_interval(std::int64_t n, double p, double coverage) {
  const double tail = (1 - coverage) / 2;
  return {binomial_quantile(n, p, tail), binomial_quantile(n, p, 1 - tail)};
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = fs::temp_directory_path() /
          ("domcl-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace domcl::testing
