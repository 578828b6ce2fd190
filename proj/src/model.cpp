// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "domcl/model.hpp"

#include <cctype>
#include <cmath>

#include "domcl/error.hpp"

namespace domcl {

namespace {

void fill_uniform(Matrix& m, double bound, Rng& rng) {
  for (Index j = 0; j < m.cols(); ++j) {
    for (Index i = 0; i < m.rows(); ++i) m(i, j) = (2.0 * uniform01(rng) - 1.0) * bound;
  }
}

Parameter make_parameter(std::string name, Index rows, Index cols, double bound, Rng& rng,
                         bool decay) {
  Parameter p{std::move(name), Matrix(rows, cols), Matrix::Zero(rows, cols), decay};
  fill_uniform(p.value, bound, rng);
  return p;
}

}  // namespace

Dense::Dense(const std::string& name, Index in, Index out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  weight = make_parameter(name + ".weight", out, in, bound, rng, true);
  bias = make_parameter(name + ".bias", 1, out, bound, rng, false);
}

Matrix Dense::forward(const Matrix& x) const {
  if (x.cols() != input_dim()) {
    throw PreconditionError(weight.name + ": expected input width " + std::to_string(input_dim()) +
                            ", got " + std::to_string(x.cols()));
  }
  Matrix y = x * weight.value.transpose();
  y.rowwise() += bias.value.row(0);
  return y;
}

Matrix Dense::backward(const Matrix& x, const Matrix& dy) {
  weight.grad.noalias() += dy.transpose() * x;
  bias.grad.row(0) += dy.colwise().sum();
  return dy * weight.value;
}

Mlp::Mlp(const std::string& name, Index in, Index hidden, Index out, Rng& rng)
    : first_(name + ".0", in, hidden, rng), second_(name + ".1", hidden, out, rng) {}

Matrix Mlp::forward(const Matrix& x, Trace* trace) const {
  Matrix pre = first_.forward(x);
  Matrix out = second_.forward(pre.cwiseMax(0.0));
  if (trace != nullptr) {
    trace->input = x;
    trace->hidden_pre = std::move(pre);
  }
  return out;
}

Matrix Mlp::backward(const Trace& trace, const Matrix& dy) {
  const Matrix hidden = trace.hidden_pre.cwiseMax(0.0);
  Matrix dhidden = second_.backward(hidden, dy);
  dhidden = dhidden.cwiseProduct((trace.hidden_pre.array() > 0.0).cast<double>().matrix());
  return first_.backward(trace.input, dhidden);
}

Matrix ProjectionHead::forward(const Matrix& h, Mlp::Trace* trace) const {
  return mlp_.forward(h, trace);
}

Matrix SentimentClassifier::forward(const Matrix& h, Mlp::Trace* trace) const {
  return mlp_.forward(h, trace);
}

std::vector<std::uint32_t> hash_tokens(std::string_view text, std::uint32_t buckets) {
  std::vector<std::uint32_t> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !std::isalnum(static_cast<unsigned char>(text[i]))) ++i;
    if (i >= text.size()) break;
    // FNV-1a over the lower-cased word.
    std::uint64_t h = 1469598103934665603ULL;
    while (i < text.size() && std::isalnum(static_cast<unsigned char>(text[i]))) {
      h ^= static_cast<unsigned char>(std::tolower(static_cast<unsigned char>(text[i])));
      h *= 1099511628211ULL;
      ++i;
    }
    out.push_back(static_cast<std::uint32_t>(h % buckets));
  }
  return out;
}

ToyEncoder::ToyEncoder(Options options, Rng& rng)
    : options_(options),
      embedding_(make_parameter("encoder.embedding", options.buckets, options.hidden_dim,
                                options.embedding_init, rng, true)),
      dense_("encoder.dense", options.hidden_dim, options.hidden_dim, rng) {
  if (options.buckets == 0 || options.hidden_dim <= 0) {
    throw ValidationError("toy encoder needs positive bucket count and hidden dim");
  }
}

std::string ToyEncoder::id() const {
  return "toy-hash-bag:buckets=" + std::to_string(options_.buckets) +
         ",d=" + std::to_string(options_.hidden_dim);
}

Matrix ToyEncoder::pool(const std::vector<std::vector<std::uint32_t>>& tokens) const {
  Matrix pooled = Matrix::Zero(static_cast<Index>(tokens.size()), options_.hidden_dim);
  for (std::size_t r = 0; r < tokens.size(); ++r) {
    if (tokens[r].empty()) continue;
    for (auto b : tokens[r]) pooled.row(static_cast<Index>(r)) += embedding_.value.row(b);
    pooled.row(static_cast<Index>(r)) /= static_cast<double>(tokens[r].size());
  }
  return pooled;
}

Matrix ToyEncoder::encode(std::span<const std::string> texts) const {
  std::vector<std::vector<std::uint32_t>> tokens;
  tokens.reserve(texts.size());
  for (const auto& t : texts) tokens.push_back(hash_tokens(t, options_.buckets));
  return dense_.forward(pool(tokens)).array().tanh().matrix();
}

Matrix ToyEncoder::forward(std::span<const std::string> texts) {
  last_tokens_.clear();
  last_tokens_.reserve(texts.size());
  for (const auto& t : texts) last_tokens_.push_back(hash_tokens(t, options_.buckets));
  last_pooled_ = pool(last_tokens_);
  last_output_ = dense_.forward(last_pooled_).array().tanh().matrix();
  return last_output_;
}

void ToyEncoder::backward(const Matrix& dh) {
  if (dh.rows() != last_output_.rows() || dh.cols() != last_output_.cols()) {
    throw PreconditionError("encoder backward: gradient shape does not match last forward");
  }
  const Matrix dpre = dh.cwiseProduct((1.0 - last_output_.array().square()).matrix());
  const Matrix dpooled = dense_.backward(last_pooled_, dpre);
  for (std::size_t r = 0; r < last_tokens_.size(); ++r) {
    const auto& toks = last_tokens_[r];
    if (toks.empty()) continue;
    const double scale = 1.0 / static_cast<double>(toks.size());
    for (auto b : toks) embedding_.grad.row(b) += scale * dpooled.row(static_cast<Index>(r));
  }
}

Model::Model(std::unique_ptr<TextEncoder> encoder, Index projection_dim, Rng& rng)
    : encoder_(std::move(encoder)),
      head_(encoder_->hidden_dim(), projection_dim, rng),
      classifier_(encoder_->hidden_dim(), rng) {}

std::vector<Parameter*> Model::parameters() {
  std::vector<Parameter*> all = encoder_->parameters();
  for (auto* p : head_.parameters()) all.push_back(p);
  for (auto* p : classifier_.parameters()) all.push_back(p);
  return all;
}

void Model::zero_grad() {
  for (auto* p : parameters()) p->zero_grad();
}

Model make_toy_model(const ModelDims& dims, std::uint64_t seed) {
  Rng rng = make_rng({seed, 0x6d6f64656cULL});
  auto encoder = std::make_unique<ToyEncoder>(ToyEncoder::Options{dims.buckets, dims.hidden_dim, 0.1}, rng);
  return Model(std::move(encoder), dims.projection_dim, rng);
}

std::vector<std::string> texts_of(std::span<const Document> docs) {
  std::vector<std::string> texts;
  texts.reserve(docs.size());
  for (const auto& d : docs) texts.push_back(d.text);
  return texts;
}

Features forward_features(const TextEncoder& encoder, const ProjectionHead& head,
                          std::span<const Document> docs) {
  if (docs.empty()) throw PreconditionError("forward_features on an empty batch");
  const auto texts = texts_of(docs);
  Features f;
  try {
    f.hidden = encoder.encode(texts);
  } catch (const std::exception& e) {
    throw Error("encoder " + encoder.id() + " failed on batch [" + docs.front().id + " .. " +
                docs.back().id + "] of " + std::to_string(docs.size()) + " documents: " + e.what());
  }
  if (!f.hidden.allFinite()) throw Error("encoder produced non-finite features");
  f.projection = head.forward(f.hidden);
  return f;
}

Matrix classify(const SentimentClassifier& classifier, const Matrix& hidden) {
  if (hidden.cols() != classifier.input_dim()) {
    throw PreconditionError("classifier expects hidden width " +
                            std::to_string(classifier.input_dim()) + ", got " +
                            std::to_string(hidden.cols()));
  }
  if (hidden.rows() == 0) return Matrix(0, 2);
  return classifier.forward(hidden);
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix p(logits.rows(), logits.cols());
  for (Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    p.row(i) = (logits.row(i).array() - m).exp().matrix();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

}  // namespace domcl
