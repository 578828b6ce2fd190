// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace domcl::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kInput = 2,        // missing/unreadable/malformed input file
  kMismatch = 3,     // resume or cache manifest does not match the config
  kInvalid = 4,      // invalid configuration or data
  kDiverged = 5,     // non-finite loss during training
  kIncomplete = 6,   // some documents failed to augment
  kUsage = 64,       // bad command line
};

/// Entry point shared by the binary and the tests.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace domcl::cli
