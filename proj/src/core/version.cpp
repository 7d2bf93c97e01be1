// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0

#include "core/version.hpp"

namespace duocolor {

const char* version() { return "0.1.0"; }

}  // namespace duocolor
