// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "domcl/evalviz.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "domcl/config.hpp"
#include "domcl/error.hpp"

namespace domcl {

std::vector<Label> predict_labels(const Matrix& logits) {
  std::vector<Label> out;
  out.reserve(static_cast<std::size_t>(logits.rows()));
  for (Index i = 0; i < logits.rows(); ++i) {
    out.push_back(logits(i, 1) > logits(i, 0) ? Label::positive : Label::negative);
  }
  return out;
}

EvalReport evaluate_logits(const Matrix& logits, std::span<const LabeledDocument> test_set) {
  if (test_set.empty()) throw PreconditionError("evaluate: empty test set");
  if (logits.rows() != static_cast<Index>(test_set.size()) || logits.cols() != 2) {
    throw PreconditionError("evaluate: logits do not match the test set");
  }
  const auto predicted = predict_labels(logits);
  EvalReport report;
  std::size_t tp[2] = {0, 0}, predicted_count[2] = {0, 0}, support[2] = {0, 0};
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    const int gold = class_index(test_set[i].label);
    const int pred = class_index(predicted[i]);
    ++support[gold];
    ++predicted_count[pred];
    if (gold == pred) {
      ++tp[gold];
      ++report.n_correct;
    }
  }
  report.n_total = test_set.size();
  report.accuracy = static_cast<double>(report.n_correct) / static_cast<double>(report.n_total);
  auto metrics = [&](int c) {
    ClassMetrics m;
    m.support = support[c];
    m.precision = predicted_count[c] ? static_cast<double>(tp[c]) / predicted_count[c] : 0.0;
    m.recall = support[c] ? static_cast<double>(tp[c]) / support[c] : 0.0;
    return m;
  };
  report.negative = metrics(0);
  report.positive = metrics(1);
  return report;
}

Matrix hidden_features(const Model& model, std::span<const Document> docs, std::size_t batch_size) {
  Matrix h(static_cast<Index>(docs.size()), model.encoder().hidden_dim());
  for (std::size_t start = 0; start < docs.size(); start += batch_size) {
    const auto chunk = docs.subspan(start, std::min(batch_size, docs.size() - start));
    h.middleRows(static_cast<Index>(start), static_cast<Index>(chunk.size())) =
        model.encoder().encode(texts_of(chunk));
  }
  return h;
}

namespace {

std::vector<Document> bases(std::span<const LabeledDocument> docs) {
  std::vector<Document> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(d.base);
  return out;
}

}  // namespace

EvalReport evaluate(const Model& model, std::span<const LabeledDocument> test_set,
                    const std::string& config_hash, std::size_t batch_size) {
  if (test_set.empty()) throw PreconditionError("evaluate: empty test set");
  const auto docs = bases(test_set);
  const Matrix logits = classify(model.classifier(), hidden_features(model, docs, batch_size));
  auto report = evaluate_logits(logits, test_set);
  report.config_hash = config_hash;
  return report;
}

void write_eval_report(const std::filesystem::path& path, const EvalReport& report) {
  auto cls = [](const ClassMetrics& m) {
    return nlohmann::json{{"precision", m.precision}, {"recall", m.recall}, {"support", m.support}};
  };
  nlohmann::json j = {{"accuracy", report.accuracy},
                      {"n_correct", report.n_correct},
                      {"n_total", report.n_total},
                      {"negative", cls(report.negative)},
                      {"positive", cls(report.positive)},
                      {"config_hash", report.config_hash},
                      {"warnings", report.warnings}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Matrix PcaReducer::reduce(const Matrix& features) {
  if (features.rows() == 0) return Matrix(0, 2);
  const Matrix centered = features.rowwise() - features.colwise().mean();
  const Matrix cov = centered.transpose() * centered / std::max<double>(1.0, features.rows() - 1.0);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw Error("PCA eigen-decomposition failed");
  const Index d = features.cols();
  Matrix basis = Matrix::Zero(d, 2);
  // Eigenvalues come in increasing order.
  for (Index c = 0; c < std::min<Index>(2, d); ++c) {
    Vector v = solver.eigenvectors().col(d - 1 - c);
    Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    basis.col(c) = v;
  }
  return centered * basis;
}

CommandReducer::CommandReducer(std::string command, std::uint64_t seed)
    : command_(std::move(command)), seed_(seed) {}

std::map<std::string, std::string> CommandReducer::parameters() const {
  return {{"command", command_}, {"seed", std::to_string(seed_)}};
}

Matrix CommandReducer::reduce(const Matrix& features) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       ("domcl-reduce-" + std::to_string(std::hash<std::string>{}(command_)) + "-" +
                        std::to_string(reinterpret_cast<std::uintptr_t>(this)));
  fs::create_directories(dir);
  const fs::path in_path = dir / "features.csv";
  const fs::path out_path = dir / "reduced.csv";
  {
    std::ofstream out(in_path);
    for (Index i = 0; i < features.rows(); ++i) {
      for (Index j = 0; j < features.cols(); ++j) {
        out << (j ? "," : "") << format_double(features(i, j));
      }
      out << '\n';
    }
  }
  const std::string cmd = command_ + " '" + in_path.string() + "' '" + out_path.string() + "' " +
                          std::to_string(seed_);
  const int status = std::system(cmd.c_str());
  if (status != 0) {
    fs::remove_all(dir);
    throw Error("reducer command exited with status " + std::to_string(status));
  }
  Matrix reduced(features.rows(), 2);
  std::ifstream in(out_path);
  std::string line;
  Index row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (row >= features.rows()) break;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    if (!(fields >> reduced(row, 0) >> reduced(row, 1))) {
      fs::remove_all(dir);
      throw Error("reducer output line " + std::to_string(row + 1) + " is not x,y");
    }
    ++row;
  }
  fs::remove_all(dir);
  if (row != features.rows()) {
    throw Error("reducer wrote " + std::to_string(row) + " rows for " +
                std::to_string(features.rows()) + " inputs");
  }
  return reduced;
}

ProjectionExport export_projection(const Model& model, std::span<const LabeledDocument> source,
                                   std::span<const LabeledDocument> target, Reducer& reducer) {
  std::vector<Document> docs = bases(source);
  for (const auto& d : target) docs.push_back(d.base);

  ProjectionExport projection;
  projection.reducer_id = reducer.id();
  projection.reducer_parameters = reducer.parameters();
  if (docs.empty()) return projection;

  const Matrix h = hidden_features(model, docs);
  Matrix xy;
  try {
    xy = reducer.reduce(h);
  } catch (const std::exception& e) {
    std::string params;
    for (const auto& [k, v] : projection.reducer_parameters) params += " " + k + "=" + v;
    throw Error("reducer '" + reducer.id() + "'" + params + " failed: " + e.what());
  }
  if (xy.rows() != h.rows() || xy.cols() != 2) {
    throw Error("reducer '" + reducer.id() + "' returned a " + std::to_string(xy.rows()) + "x" +
                std::to_string(xy.cols()) + " matrix");
  }
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const bool is_source = i < source.size();
    const Label label = is_source ? source[i].label : target[i - source.size()].label;
    projection.rows.push_back({xy(static_cast<Index>(i), 0), xy(static_cast<Index>(i), 1),
                               is_source ? DomainRole::source : DomainRole::target, label});
  }
  return projection;
}

namespace {
std::string_view role_name(DomainRole role) { return role == DomainRole::source ? "source" : "target"; }
}  // namespace

void write_projection_csv(const std::filesystem::path& path, const ProjectionExport& projection) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "x,y,domain,label\n";
  for (const auto& r : projection.rows) {
    out << format_double(r.x) << ',' << format_double(r.y) << ',' << role_name(r.domain) << ','
        << to_string(r.label) << '\n';
  }
}

std::string_view group_color(DomainRole domain, Label label) {
  if (domain == DomainRole::source) return label == Label::positive ? "red" : "gold";
  return label == Label::positive ? "blue" : "green";
}

void write_projection_svg(const std::filesystem::path& path, const ProjectionExport& projection) {
  constexpr double kSize = 600.0;
  constexpr double kMargin = 20.0;
  double min_x = 0, max_x = 1, min_y = 0, max_y = 1;
  if (!projection.rows.empty()) {
    min_x = max_x = projection.rows.front().x;
    min_y = max_y = projection.rows.front().y;
    for (const auto& r : projection.rows) {
      min_x = std::min(min_x, r.x);
      max_x = std::max(max_x, r.x);
      min_y = std::min(min_y, r.y);
      max_y = std::max(max_y, r.y);
    }
  }
  const double span_x = max_x > min_x ? max_x - min_x : 1.0;
  const double span_y = max_y > min_y ? max_y - min_y : 1.0;

  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& r : projection.rows) {
    const double px = kMargin + (r.x - min_x) / span_x * (kSize - 2 * kMargin);
    const double py = kSize - kMargin - (r.y - min_y) / span_y * (kSize - 2 * kMargin);
    out << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"2.5\" fill=\""
        << group_color(r.domain, r.label) << "\" fill-opacity=\"0.7\"/>\n";
  }
  out << "</svg>\n";
}

}  // namespace domcl
