// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "domcl/optim.hpp"

#include <cmath>

#include "domcl/error.hpp"

namespace domcl {

AdamW::AdamW(std::vector<Parameter*> params, Options options)
    : params_(std::move(params)), options_(options) {
  for (auto* p : params_) {
    m_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
  }
}

void AdamW::step(double lr) {
  ++t_;
  const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    if (p.decay && options_.weight_decay > 0.0) p.value *= 1.0 - lr * options_.weight_decay;
    m_[i] = options_.beta1 * m_[i] + (1.0 - options_.beta1) * p.grad;
    v_[i] = options_.beta2 * v_[i] + (1.0 - options_.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= lr * (m_[i].array() / bc1) / ((v_[i].array() / bc2).sqrt() + options_.eps);
  }
}

std::vector<Parameter> AdamW::export_state() const {
  std::vector<Parameter> out;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    out.push_back({params_[i]->name + ".m", m_[i], Matrix(), false});
    out.push_back({params_[i]->name + ".v", v_[i], Matrix(), false});
  }
  Matrix step(1, 1);
  step(0, 0) = static_cast<double>(t_);
  out.push_back({"adamw.step", step, Matrix(), false});
  return out;
}

void AdamW::import_state(const std::vector<Parameter>& state) {
  auto find = [&](const std::string& name) -> const Matrix& {
    for (const auto& s : state) {
      if (s.name == name) return s.value;
    }
    throw ValidationError("optimizer state has no entry '" + name + "'");
  };
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const Matrix& m = find(params_[i]->name + ".m");
    const Matrix& v = find(params_[i]->name + ".v");
    if (m.rows() != m_[i].rows() || m.cols() != m_[i].cols() || v.rows() != v_[i].rows() ||
        v.cols() != v_[i].cols()) {
      throw ValidationError("optimizer state shape mismatch for '" + params_[i]->name + "'");
    }
    m_[i] = m;
    v_[i] = v;
  }
  t_ = static_cast<std::int64_t>(find("adamw.step")(0, 0));
}

double global_grad_norm(std::span<Parameter* const> params) {
  double sq = 0.0;
  for (const auto* p : params) sq += p->grad.squaredNorm();
  return std::sqrt(sq);
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / (norm + 1e-6);
    for (auto* p : params) p->grad *= scale;
  }
  return norm;
}

}  // namespace domcl
