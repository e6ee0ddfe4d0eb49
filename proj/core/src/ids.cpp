#include "qosmc/ids.hpp"

#include <cctype>

namespace qosmc {

bool is_identifier(const std::string& s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  for (char ch : s) {
    if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_') return false;
  }
  return true;
}

bool is_mangle_safe(const std::string& s) {
  return is_identifier(s) && s.find("__") == std::string::npos && s.back() != '_';
}

}  // namespace qosmc
