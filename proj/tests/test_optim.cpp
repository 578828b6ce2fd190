// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0


#include <doctest.h>

#include "domcl/error.hpp"
#include "domcl/optim.hpp"

using namespace domcl;

namespace {

Parameter scalar(const std::string& name, double value, double grad, bool decay = true) {
  Parameter p{name, Matrix::Constant(1, 1, value), Matrix::Constant(1, 1, grad), decay};
  return p;
}

}  // namespace

TEST_CASE("first AdamW step moves by lr against the gradient sign") {
  Parameter w = scalar("w", 1.0, 0.5);
  Parameter b = scalar("b", 1.0, -2.0, false);
  AdamW opt({&w, &b}, {0.9, 0.999, 1e-8, 0.1});
  opt.step(0.01);
  // Bias-corrected moments give m/sqrt(v) = sign(g) on the first step.
  CHECK(w.value(0, 0) == doctest::Approx(1.0 - 0.01 * (1.0 + 0.1)).epsilon(1e-6));
  CHECK(b.value(0, 0) == doctest::Approx(1.0 + 0.01).epsilon(1e-6));
  CHECK(opt.steps_taken() == 1);
}

TEST_CASE("zero learning rate leaves parameters alone") {
  Parameter w = scalar("w", 3.0, 1.0);
  AdamW opt({&w}, {});
  opt.step(0.0);
  CHECK(w.value(0, 0) == 3.0);
}

TEST_CASE("optimizer state round-trips") {
  Parameter w = scalar("w", 1.0, 0.5);
  AdamW a({&w}, {});
  a.step(0.1);
  const auto state = a.export_state();

  Parameter w2 = w;
  AdamW b({&w2}, {});
  b.import_state(state);
  CHECK(b.steps_taken() == 1);
  w.grad(0, 0) = w2.grad(0, 0) = -0.3;
  a.step(0.1);
  b.step(0.1);
  CHECK(w.value(0, 0) == w2.value(0, 0));

  Parameter other = scalar("other", 0, 0);
  AdamW c({&other}, {});
  CHECK_THROWS_AS(c.import_state(state), ValidationError);
}

TEST_CASE("gradient clipping") {
  Parameter a = scalar("a", 0, 3.0);
  Parameter b = scalar("b", 0, 4.0);
  std::vector<Parameter*> ps{&a, &b};
  CHECK(global_grad_norm(ps) == doctest::Approx(5.0));
  CHECK(clip_grad_norm(ps, 1.0) == doctest::Approx(5.0));
  CHECK(global_grad_norm(ps) == doctest::Approx(1.0));
  CHECK(a.grad(0, 0) == doctest::Approx(0.6));
  CHECK(clip_grad_norm(ps, 10.0) == doctest::Approx(1.0));
  CHECK(a.grad(0, 0) == doctest::Approx(0.6));
}
