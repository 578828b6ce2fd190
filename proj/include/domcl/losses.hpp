// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

// Training objectives and their analytic gradients.
//
// Contrastive losses operate on a ProjectionBatch whose rows come in
// positive pairs: 0-based rows 2k and 2k+1 hold the projection of document
// k and of its augmented view. Every log-sum-exp is max-shifted; at the
// default temperature of 0.05 a unit change in cosine similarity moves an
// exponent by 20.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "domcl/model.hpp"

namespace domcl {

class Temperature {
 public:
  static constexpr double kDefault = 0.05;

  Temperature() = default;
  explicit Temperature(double value);
  double value() const { return value_; }

 private:
  double value_ = kDefault;
};

struct LossWeights {
  double ce = 1.0;
  double con = 1.0;
  double ent = 1.0;

  void validate() const;
};

class ProjectionBatch {
 public:
  /// `pair_domains` has one tag per pair. Throws ValidationError on an odd
  /// row count, a zero-norm row or a tag count that does not match.
  ProjectionBatch(Matrix z, std::vector<std::string> pair_domains);

  /// Interleaves anchors[k] and positives[k] into rows 2k, 2k+1.
  static ProjectionBatch from_views(const Matrix& anchors, const Matrix& positives,
                                    std::vector<std::string> pair_domains);

  const Matrix& z() const { return z_; }
  Index rows() const { return z_.rows(); }
  Index pairs() const { return z_.rows() / 2; }
  Index partner(Index row) const { return row ^ 1; }
  const std::vector<std::string>& pair_domains() const { return domains_; }

  /// The shared tag when every pair carries the same one, else empty.
  std::string single_domain() const;

 private:
  Matrix z_;
  std::vector<std::string> domains_;
};

struct LossWithGrad {
  double value = 0.0;
  Matrix grad;
};

/// u.v / (|u||v|) clamped to [-1, 1]; throws on a zero-norm input.
double cosine_similarity(const Eigen::Ref<const Vector>& u, const Eigen::Ref<const Vector>& v);

/// -log( exp(sim(z_i,z_j)/tau) / sum_{k != i} exp(sim(z_i,z_k)/tau) ). The
/// positive j is part of the denominator. (i, j) must be a pair of the layout.
double info_nce_pair(const ProjectionBatch& batch, Index i, Index j, Temperature tau);

/// Mean of the 2N ordered pair terms l(a,b) and l(b,a).
double contrastive_loss(const ProjectionBatch& batch, Temperature tau);
LossWithGrad contrastive_loss_with_grad(const ProjectionBatch& batch, Temperature tau);

struct InDomainLoss {
  double value = 0.0;
  Matrix grad_source;
  Matrix grad_target;
};

/// contrastive_loss(source) + contrastive_loss(target). Each batch must be
/// single-domain and the two domains must differ, so no cross-domain pair
/// enters any denominator.
double in_domain_contrastive_loss(const ProjectionBatch& source, const ProjectionBatch& target,
                                  Temperature tau);
InDomainLoss in_domain_contrastive_loss_with_grad(const ProjectionBatch& source,
                                                  const ProjectionBatch& target, Temperature tau);

/// Mean Shannon entropy (nats) of the row softmax.
double prediction_entropy(const Matrix& logits);
LossWithGrad prediction_entropy_with_grad(const Matrix& logits);

/// Mean negative log-softmax of the true class; labels are class indices.
double cross_entropy(const Matrix& logits, std::span<const int> labels);
LossWithGrad cross_entropy_with_grad(const Matrix& logits, std::span<const int> labels);

/// w_ce*ce + w_con*con + (entropy_active ? w_ent*ent : 0).
double joint_loss(double ce, double con, double ent, const LossWeights& weights,
                  bool entropy_active);

}  // namespace domcl
