#include "ctc/rational.hpp"

#include <cstdlib>

namespace ctc {

std::string rat_str(const Rat& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::optional<Rat> rat_parse(std::string_view s) {
  auto digits = [](std::string_view t) {
    if (t.empty()) return false;
    size_t i = (t[0] == '-') ? 1 : 0;
    if (i == t.size()) return false;
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') return false;
    return true;
  };
  auto slash = s.find('/');
  if (slash == std::string_view::npos) {
    if (!digits(s)) return std::nullopt;
    return Rat(std::atoll(std::string(s).c_str()), 1);
  }
  auto num = s.substr(0, slash);
  auto den = s.substr(slash + 1);
  if (!digits(num) || !digits(den)) return std::nullopt;
  long long d = std::atoll(std::string(den).c_str());
  if (d == 0) return std::nullopt;
  return Rat(std::atoll(std::string(num).c_str()), d);
}

}  // namespace ctc
