#pragma once

#include <string>
#include <string_view>

namespace dcsim {

/// 64-bit FNV-1a of `text` as 16 lowercase hex digits.
std::string digest_hex(std::string_view text);

}  // namespace dcsim
