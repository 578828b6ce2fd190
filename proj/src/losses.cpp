// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "domcl/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "domcl/error.hpp"

namespace domcl {

Temperature::Temperature(double value) : value_(value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ValidationError("temperature must be positive and finite");
  }
}

void LossWeights::validate() const {
  for (double w : {ce, con, ent}) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("loss weights must be finite and >= 0");
  }
}

ProjectionBatch::ProjectionBatch(Matrix z, std::vector<std::string> pair_domains)
    : z_(std::move(z)), domains_(std::move(pair_domains)) {
  if (z_.rows() == 0 || z_.rows() % 2 != 0) {
    throw ValidationError("projection batch needs a positive even row count, got " +
                          std::to_string(z_.rows()));
  }
  if (static_cast<Index>(domains_.size()) != pairs()) {
    throw ValidationError("projection batch has " + std::to_string(pairs()) + " pairs but " +
                          std::to_string(domains_.size()) + " domain tags");
  }
  for (Index i = 0; i < z_.rows(); ++i) {
    const double norm = z_.row(i).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw ValidationError("projection row " + std::to_string(i) + " has zero or non-finite norm");
    }
  }
}

ProjectionBatch ProjectionBatch::from_views(const Matrix& anchors, const Matrix& positives,
                                            std::vector<std::string> pair_domains) {
  if (anchors.rows() != positives.rows() || anchors.cols() != positives.cols()) {
    throw ValidationError("anchor and positive views differ in shape");
  }
  Matrix z(2 * anchors.rows(), anchors.cols());
  for (Index k = 0; k < anchors.rows(); ++k) {
    z.row(2 * k) = anchors.row(k);
    z.row(2 * k + 1) = positives.row(k);
  }
  return ProjectionBatch(std::move(z), std::move(pair_domains));
}

std::string ProjectionBatch::single_domain() const {
  const auto& first = domains_.front();
  for (const auto& d : domains_) {
    if (d != first) return {};
  }
  return first;
}

double cosine_similarity(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v) {
  if (u.size() != v.size()) throw PreconditionError("cosine_similarity: length mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (!(nu > 0.0) || !(nv > 0.0)) throw PreconditionError("cosine_similarity: zero-norm input");
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

namespace {

Matrix normalized_rows(const Matrix& z) { return z.rowwise().normalized(); }

/// Scaled cosine similarities S(i,k) = sim(z_i, z_k) / tau. Entries are
/// plain dot products so each value depends only on its two rows.
Matrix scaled_similarity(const Matrix& unit, double tau) {
  const Index n = unit.rows();
  Matrix s(n, n);
  for (Index i = 0; i < n; ++i) {
    s(i, i) = 1.0 / tau;
    for (Index k = i + 1; k < n; ++k) {
      s(i, k) = s(k, i) = std::clamp(unit.row(i).dot(unit.row(k)), -1.0, 1.0) / tau;
    }
  }
  return s;
}

/// Sum in ascending order, so the result does not depend on input order.
double ordered_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc;
}

/// log sum_{k != i} exp(s(i,k)), max-shifted.
double row_logsumexp_excluding_self(const Matrix& s, Index i) {
  double m = -std::numeric_limits<double>::infinity();
  for (Index k = 0; k < s.cols(); ++k) {
    if (k != i) m = std::max(m, s(i, k));
  }
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(s.cols()));
  for (Index k = 0; k < s.cols(); ++k) {
    if (k != i) terms.push_back(std::exp(s(i, k) - m));
  }
  return m + std::log(ordered_sum(terms));
}

}  // namespace

double info_nce_pair(const ProjectionBatch& batch, Index i, Index j, Temperature tau) {
  if (i < 0 || j < 0 || i >= batch.rows() || j >= batch.rows()) {
    throw PreconditionError("info_nce_pair: row index out of range");
  }
  if (i == j) throw PreconditionError("info_nce_pair: anchor and positive are the same row");
  if (batch.partner(i) != j) {
    throw PreconditionError("info_nce_pair: rows " + std::to_string(i) + " and " +
                            std::to_string(j) + " are not a positive pair");
  }
  const Matrix s = scaled_similarity(normalized_rows(batch.z()), tau.value());
  return std::max(0.0, row_logsumexp_excluding_self(s, i) - s(i, j));
}

double contrastive_loss(const ProjectionBatch& batch, Temperature tau) {
  const Matrix s = scaled_similarity(normalized_rows(batch.z()), tau.value());
  std::vector<double> terms;
  for (Index i = 0; i < batch.rows(); ++i) {
    terms.push_back(std::max(0.0, row_logsumexp_excluding_self(s, i) - s(i, batch.partner(i))));
  }
  return ordered_sum(terms) / static_cast<double>(batch.rows());
}

LossWithGrad contrastive_loss_with_grad(const ProjectionBatch& batch, Temperature tau) {
  const Matrix& z = batch.z();
  const Index n = batch.rows();
  const Matrix unit = normalized_rows(z);
  const Matrix s = scaled_similarity(unit, tau.value());

  // dL/dS(i,k) = (softmax_i(k) - [k == partner(i)]) / n, zero on the diagonal.
  Matrix ds = Matrix::Zero(n, n);
  std::vector<double> terms;
  for (Index i = 0; i < n; ++i) {
    const double lse = row_logsumexp_excluding_self(s, i);
    const Index j = batch.partner(i);
    terms.push_back(std::max(0.0, lse - s(i, j)));
    for (Index k = 0; k < n; ++k) {
      if (k != i) ds(i, k) = std::exp(s(i, k) - lse);
    }
    ds(i, j) -= 1.0;
  }
  ds /= static_cast<double>(n);

  const Matrix dunit = (ds + ds.transpose()) * unit / tau.value();
  Matrix grad(n, z.cols());
  for (Index i = 0; i < n; ++i) {
    const double norm = z.row(i).norm();
    const auto u = unit.row(i);
    grad.row(i) = (dunit.row(i) - u * u.dot(dunit.row(i))) / norm;
  }
  return {ordered_sum(terms) / static_cast<double>(n), std::move(grad)};
}

namespace {

void check_in_domain(const ProjectionBatch& source, const ProjectionBatch& target) {
  const std::string s = source.single_domain();
  const std::string t = target.single_domain();
  if (s.empty()) throw ValidationError("in-domain contrastive loss: source batch mixes domains");
  if (t.empty()) throw ValidationError("in-domain contrastive loss: target batch mixes domains");
  if (s == t) {
    throw ValidationError("in-domain contrastive loss: source and target batches share domain '" +
                          s + "'");
  }
}

}  // namespace

double in_domain_contrastive_loss(const ProjectionBatch& source, const ProjectionBatch& target,
                                  Temperature tau) {
  check_in_domain(source, target);
  return contrastive_loss(source, tau) + contrastive_loss(target, tau);
}

InDomainLoss in_domain_contrastive_loss_with_grad(const ProjectionBatch& source,
                                                  const ProjectionBatch& target, Temperature tau) {
  check_in_domain(source, target);
  auto s = contrastive_loss_with_grad(source, tau);
  auto t = contrastive_loss_with_grad(target, tau);
  return {s.value + t.value, std::move(s.grad), std::move(t.grad)};
}

namespace {

void check_logits(const Matrix& logits, const char* what) {
  if (logits.rows() == 0) throw PreconditionError(std::string(what) + " of an empty batch");
  if (!logits.allFinite()) throw PreconditionError(std::string(what) + ": non-finite logits");
}

Matrix log_softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    out.row(i) = logits.row(i).array() - lse;
  }
  return out;
}

}  // namespace

LossWithGrad prediction_entropy_with_grad(const Matrix& logits) {
  check_logits(logits, "prediction_entropy");
  const Matrix logp = log_softmax_rows(logits);
  const Matrix p = logp.array().exp().matrix();
  const double n = static_cast<double>(logits.rows());

  Matrix grad(logits.rows(), logits.cols());
  double total = 0.0;
  for (Index i = 0; i < logits.rows(); ++i) {
    const double h = -(p.row(i).array() * logp.row(i).array()).sum();
    total += h;
    // dH/dlogit_a = -p_a (log p_a + H)
    grad.row(i) = -(p.row(i).array() * (logp.row(i).array() + h)) / n;
  }
  return {std::max(0.0, total / n), std::move(grad)};
}

double prediction_entropy(const Matrix& logits) { return prediction_entropy_with_grad(logits).value; }

LossWithGrad cross_entropy_with_grad(const Matrix& logits, std::span<const int> labels) {
  check_logits(logits, "cross_entropy");
  if (static_cast<Index>(labels.size()) != logits.rows()) {
    throw PreconditionError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                            std::to_string(logits.rows()) + " rows");
  }
  const Matrix logp = log_softmax_rows(logits);
  const double n = static_cast<double>(logits.rows());
  Matrix grad = logp.array().exp().matrix() / n;
  double total = 0.0;
  for (Index i = 0; i < logits.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.cols()) {
      throw PreconditionError("cross_entropy: label " + std::to_string(y) + " out of range");
    }
    total -= logp(i, y);
    grad(i, y) -= 1.0 / n;
  }
  return {std::max(0.0, total / n), std::move(grad)};
}

double cross_entropy(const Matrix& logits, std::span<const int> labels) {
  return cross_entropy_with_grad(logits, labels).value;
}

double joint_loss(double ce, double con, double ent, const LossWeights& weights,
                  bool entropy_active) {
  return weights.ce * ce + weights.con * con + (entropy_active ? weights.ent * ent : 0.0);
}

}  // namespace domcl
