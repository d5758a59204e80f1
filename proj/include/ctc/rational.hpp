#pragma once

#include <boost/rational.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace ctc {

using Rat = boost::rational<long long>;

std::string rat_str(const Rat& r);

// Accepts "p/q" or "p"; returns nullopt on malformed input or q == 0.
std::optional<Rat> rat_parse(std::string_view s);

}  // namespace ctc
