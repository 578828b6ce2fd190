// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

// Encoder, projection head and sentiment classifier.
//
// Rows are samples throughout: an encoder maps n documents to an (n, d)
// matrix H, the projection head maps H to Z (n, p), and the classifier maps
// H to (n, 2) logits. Every layer owns its gradient buffers and exposes an
// explicit backward pass so the whole stack trains end to end.

#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "domcl/corpus.hpp"
#include "domcl/random.hpp"

namespace domcl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool decay = true;  // biases are excluded from weight decay

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

/// y = x W^T + b with W of shape (out, in).
class Dense {
 public:
  Dense(const std::string& name, Index in, Index out, Rng& rng);

  Matrix forward(const Matrix& x) const;
  /// Accumulates dW, db and returns dx.
  Matrix backward(const Matrix& x, const Matrix& dy);

  Index input_dim() const { return weight.value.cols(); }
  Index output_dim() const { return weight.value.rows(); }

  Parameter weight;
  Parameter bias;
};

/// in -> hidden -> out with ReLU in between; exactly one hidden layer.
class Mlp {
 public:
  struct Trace {
    Matrix input;
    Matrix hidden_pre;
  };

  Mlp(const std::string& name, Index in, Index hidden, Index out, Rng& rng);

  Matrix forward(const Matrix& x, Trace* trace = nullptr) const;
  Matrix backward(const Trace& trace, const Matrix& dy);
  std::vector<Parameter*> parameters() { return {&first_.weight, &first_.bias, &second_.weight, &second_.bias}; }

  Index input_dim() const { return first_.input_dim(); }
  Index hidden_dim() const { return first_.output_dim(); }
  Index output_dim() const { return second_.output_dim(); }

 private:
  Dense first_;
  Dense second_;
};

class ProjectionHead {
 public:
  ProjectionHead(Index hidden_dim, Index projection_dim, Rng& rng)
      : mlp_("head", hidden_dim, hidden_dim, projection_dim, rng) {}

  Matrix forward(const Matrix& h, Mlp::Trace* trace = nullptr) const;
  Matrix backward(const Mlp::Trace& trace, const Matrix& dz) { return mlp_.backward(trace, dz); }
  std::vector<Parameter*> parameters() { return mlp_.parameters(); }
  Index input_dim() const { return mlp_.input_dim(); }
  Index output_dim() const { return mlp_.output_dim(); }

 private:
  Mlp mlp_;
};

/// Two-logit classifier over hidden features H (never over projections Z).
class SentimentClassifier {
 public:
  SentimentClassifier(Index hidden_dim, Rng& rng) : mlp_("classifier", hidden_dim, hidden_dim, 2, rng) {}

  Matrix forward(const Matrix& h, Mlp::Trace* trace = nullptr) const;
  Matrix backward(const Mlp::Trace& trace, const Matrix& dlogits) { return mlp_.backward(trace, dlogits); }
  std::vector<Parameter*> parameters() { return mlp_.parameters(); }
  Index input_dim() const { return mlp_.input_dim(); }

 private:
  Mlp mlp_;
};

class TextEncoder {
 public:
  virtual ~TextEncoder() = default;

  virtual Index hidden_dim() const = 0;
  virtual std::string id() const = 0;

  /// Inference pass; reentrant.
  virtual Matrix encode(std::span<const std::string> texts) const = 0;
  /// Training pass; records what backward() needs.
  virtual Matrix forward(std::span<const std::string> texts) = 0;
  /// Accumulates parameter gradients for dL/dH of the last forward().
  virtual void backward(const Matrix& dh) = 0;
  virtual std::vector<Parameter*> parameters() = 0;
};

/// Hashes lower-cased alphanumeric words into a fixed bucket table.
std::vector<std::uint32_t> hash_tokens(std::string_view text, std::uint32_t buckets);

/// Mean-pooled embedding bag over hashed words followed by one dense layer
/// with tanh. Stands in for a pretrained transformer in tests and desk runs.
class ToyEncoder : public TextEncoder {
 public:
  struct Options {
    std::uint32_t buckets = 4096;
    Index hidden_dim = 32;
    double embedding_init = 0.1;  // embeddings start uniform in [-b, b]
  };

  ToyEncoder(Options options, Rng& rng);

  Index hidden_dim() const override { return dense_.output_dim(); }
  std::string id() const override;
  Matrix encode(std::span<const std::string> texts) const override;
  Matrix forward(std::span<const std::string> texts) override;
  void backward(const Matrix& dh) override;
  std::vector<Parameter*> parameters() override { return {&embedding_, &dense_.weight, &dense_.bias}; }

  const Options& options() const { return options_; }

 private:
  Matrix pool(const std::vector<std::vector<std::uint32_t>>& tokens) const;

  Options options_;
  Parameter embedding_;
  Dense dense_;

  std::vector<std::vector<std::uint32_t>> last_tokens_;
  Matrix last_pooled_;
  Matrix last_output_;
};

struct ModelDims {
  std::uint32_t buckets = 4096;
  Index hidden_dim = 32;
  Index projection_dim = 128;
};

/// Encoder, projection head and classifier trained jointly. The same head
/// and encoder instances serve every view of every document.
class Model {
 public:
  Model(std::unique_ptr<TextEncoder> encoder, Index projection_dim, Rng& rng);

  TextEncoder& encoder() { return *encoder_; }
  const TextEncoder& encoder() const { return *encoder_; }
  ProjectionHead& head() { return head_; }
  const ProjectionHead& head() const { return head_; }
  SentimentClassifier& classifier() { return classifier_; }
  const SentimentClassifier& classifier() const { return classifier_; }

  /// All trainable parameters, each exactly once.
  std::vector<Parameter*> parameters();
  void zero_grad();

 private:
  std::unique_ptr<TextEncoder> encoder_;
  ProjectionHead head_;
  SentimentClassifier classifier_;
};

Model make_toy_model(const ModelDims& dims, std::uint64_t seed);

struct Features {
  Matrix hidden;      // H
  Matrix projection;  // Z
};

std::vector<std::string> texts_of(std::span<const Document> docs);

/// H = encode(docs), Z = head(H). Throws PreconditionError on an empty batch.
Features forward_features(const TextEncoder& encoder, const ProjectionHead& head,
                          std::span<const Document> docs);

/// Logits (n, 2) for hidden features H. n = 0 gives a (0, 2) matrix.
Matrix classify(const SentimentClassifier& classifier, const Matrix& hidden);

/// Row-wise softmax.
Matrix softmax_rows(const Matrix& logits);

}  // namespace domcl
