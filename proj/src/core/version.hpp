// Copyright 2026 The duocolor Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

namespace duocolor {

const char* version();

}  // namespace duocolor
