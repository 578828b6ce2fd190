// Copyright 2026 The domcl Authors
// SPDX-License-Identifier: Apache-2.0

#include "domcl/error.hpp"

namespace domcl {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

CacheMissError::CacheMissError(const std::string& id)
    : Error("back-translation cache has no entry for document '" + id + "'"), id_(id) {}

}  // namespace domcl
