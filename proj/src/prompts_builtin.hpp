// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace sopagent::detail {

extern const char* const kStatePromptText;
extern const char* const kActionPromptText;
extern const char* const kUserPromptText;

}  // namespace sopagent::detail
