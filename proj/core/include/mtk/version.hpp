#pragma once

namespace mtk {

inline constexpr const char* version = "0.1.0";

} // namespace mtk
